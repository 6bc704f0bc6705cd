//! Discontinuity trees, their growth rate, the skeleton context tree and the
//! shift-stability check.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Per-depth word sets `D^1, ..., D^depth`, each sorted by rank.
///
/// Every `w` in `D^{n+1}` has its length-`n` suffix in `D^n`, and every word
/// of `D^n` below the last level has an extension in `D^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityTree {
    alphabet: Alphabet,
    levels: Vec<Vec<Word>>,
    members: Vec<HashSet<Word>>,
}

/// JSON form: `{"depth": n, "levels": [["0"], ["00"], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeExport {
    pub depth: usize,
    pub levels: Vec<Vec<String>>,
}

impl DiscontinuityTree {
    /// Validates and wraps `levels[n - 1] = D^n`.
    pub fn from_levels(alphabet: Alphabet, levels: Vec<Vec<Word>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::input("tree depth must be >= 1"));
        }
        let mut sorted = Vec::with_capacity(levels.len());
        for (i, mut level) in levels.into_iter().enumerate() {
            let n = i + 1;
            for w in &level {
                if w.len() != n || !w.iter().all(|&s| alphabet.contains(s)) {
                    return Err(Error::spec(format!("D^{n} holds malformed word {:?}", alphabet.render(w))));
                }
            }
            level.sort_by_key(|w| alphabet.rank(w));
            level.dedup();
            sorted.push(level);
        }
        let members: Vec<HashSet<Word>> = sorted.iter().map(|l| l.iter().cloned().collect()).collect();
        for n in 1..sorted.len() {
            for w in &sorted[n] {
                if !members[n - 1].contains(w.suffix(n)) {
                    return Err(Error::spec(format!(
                        "D^{} word {:?} has suffix {:?} outside D^{n}",
                        n + 1,
                        alphabet.render(w),
                        alphabet.render(w.suffix(n))
                    )));
                }
            }
            let extended: HashSet<&[Symbol]> = sorted[n].iter().map(|w| w.suffix(n)).collect();
            if let Some(w) = sorted[n - 1].iter().find(|w| !extended.contains(w.symbols())) {
                return Err(Error::spec(format!(
                    "D^{n} word {:?} has no extension in D^{}",
                    alphabet.render(w),
                    n + 1
                )));
            }
        }
        Ok(Self { alphabet, levels: sorted, members })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `D^n`; `D^0` is the single empty word.
    pub fn level(&self, n: usize) -> &[Word] {
        static ROOT: std::sync::OnceLock<Vec<Word>> = std::sync::OnceLock::new();
        if n == 0 {
            return ROOT.get_or_init(|| vec![Word::empty()]);
        }
        &self.levels[n - 1]
    }

    pub fn contains(&self, w: &[Symbol]) -> bool {
        match w.len() {
            0 => true,
            n if n <= self.depth() => self.members[n - 1].contains(w),
            _ => false,
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(Vec::is_empty)
    }

    pub fn export(&self) -> TreeExport {
        TreeExport {
            depth: self.depth(),
            levels: self.levels.iter().map(|l| l.iter().map(|w| self.alphabet.render(w)).collect()).collect(),
        }
    }

    pub fn import(alphabet: Alphabet, export: &TreeExport) -> Result<Self> {
        if export.levels.len() != export.depth {
            return Err(Error::input(format!("depth {} but {} levels", export.depth, export.levels.len())));
        }
        let levels = export
            .levels
            .iter()
            .map(|l| l.iter().map(|s| alphabet.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_levels(alphabet, levels)
    }
}

/// Materializes `D^1..D^depth` from the kernel and validates the tree shape.
pub fn build_tree(kernel: &dyn Kernel, depth: usize) -> Result<DiscontinuityTree> {
    if depth == 0 {
        return Err(Error::input("tree depth must be >= 1"));
    }
    let levels = (1..=depth).map(|n| kernel.discontinuity_words(n)).collect();
    DiscontinuityTree::from_levels(kernel.alphabet().clone(), levels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRate {
    pub per_level: Vec<f64>,
    pub estimate: f64,
    pub empty_discontinuity_set: bool,
}

/// `|D^n|^(1/n)`, exact when the count is a perfect `n`-th power.
fn level_root(count: usize, n: usize) -> f64 {
    let approx = (count as f64).powf(1.0 / n as f64);
    let r = approx.round() as usize;
    if r.checked_pow(n as u32) == Some(count) {
        r as f64
    } else {
        approx
    }
}

/// Growth rate from level counts `|D^1|, ..., |D^depth|`. The estimate is the
/// largest per-level root over the deepest `ceil(depth / 2)` levels.
pub fn growth_rate_from_counts(counts: &[usize]) -> Result<GrowthRate> {
    let depth = counts.len();
    if depth < 2 {
        return Err(Error::input("growth rate needs tree depth >= 2"));
    }
    let per_level: Vec<f64> = counts.iter().enumerate().map(|(i, &c)| level_root(c, i + 1)).collect();
    let empty = counts.iter().all(|&c| c == 0);
    let estimate = per_level[depth - depth.div_ceil(2)..].iter().copied().fold(0.0, f64::max);
    Ok(GrowthRate { per_level, estimate, empty_discontinuity_set: empty })
}

pub fn growth_rate(tree: &DiscontinuityTree) -> Result<GrowthRate> {
    growth_rate_from_counts(&tree.counts())
}

/// Finite leaves of the skeleton context tree, discovered to the tree depth.
#[derive(Debug, Clone)]
pub struct Skeleton {
    depth: usize,
    finite_leaves: Vec<Word>,
    leaf_set: HashSet<Word>,
}

impl Skeleton {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Leaves ordered by length, then rank.
    pub fn finite_leaves(&self) -> &[Word] {
        &self.finite_leaves
    }

    pub fn is_leaf(&self, w: &[Symbol]) -> bool {
        self.leaf_set.contains(w)
    }

    /// The leaf that is a suffix of `context`, if one of length at most
    /// `min(|context|, depth)` exists.
    pub fn leaf_for<'c>(&self, context: &'c [Symbol]) -> Option<&'c [Symbol]> {
        (1..=context.len().min(self.depth)).map(|k| &context[context.len() - k..]).find(|s| self.is_leaf(s))
    }
}

/// Leaves `a·w` with `w ∈ D^k`, `k < depth`, and `a·w ∉ D^{k+1}`.
pub fn skeleton_leaves(tree: &DiscontinuityTree) -> Skeleton {
    let alphabet = tree.alphabet();
    let mut finite_leaves = Vec::new();
    for k in 0..tree.depth() {
        let mut level: Vec<Word> = tree
            .level(k)
            .iter()
            .flat_map(|w| alphabet.symbols().map(move |a| w.prepend(a)))
            .filter(|v| !tree.contains(v))
            .collect();
        level.sort_by_key(|v| alphabet.rank(v));
        finite_leaves.extend(level);
    }
    let leaf_set = finite_leaves.iter().cloned().collect();
    Skeleton { depth: tree.depth(), finite_leaves, leaf_set }
}

/// First word of `A^depth` that is not covered exactly once by the skeleton
/// leaves together with `D^depth`.
pub fn tiling_violation(tree: &DiscontinuityTree, skeleton: &Skeleton) -> Option<Word> {
    let depth = tree.depth();
    tree.alphabet().words(depth).find(|w| {
        let leaf_hits = (1..=depth).filter(|&k| skeleton.is_leaf(w.suffix(k))).count();
        leaf_hits + usize::from(tree.contains(w)) != 1
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Report {
    pub holds_to_depth: bool,
    pub depth: usize,
    pub witness: Option<String>,
}

/// For each `w ∈ D^{n+1}`, `n < depth`, checks `drop_last(w) ∈ D^n`.
pub fn check_h3(tree: &DiscontinuityTree) -> Result<H3Report> {
    if tree.depth() < 2 {
        return Err(Error::input("H3 check needs tree depth >= 2"));
    }
    for n in 1..tree.depth() {
        for w in tree.level(n + 1) {
            if !tree.contains(&w[..n]) {
                return Ok(H3Report {
                    holds_to_depth: false,
                    depth: tree.depth(),
                    witness: Some(tree.alphabet().render(w)),
                });
            }
        }
    }
    Ok(H3Report { holds_to_depth: true, depth: tree.depth(), witness: None })
}
