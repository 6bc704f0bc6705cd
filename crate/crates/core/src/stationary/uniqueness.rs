//! Square-summability of the variations, leaf by leaf and cylinder by
//! cylinder.

use std::collections::HashMap;

use serde::Serialize;

use super::StationaryEstimate;
use crate::alphabet::{Symbol, Word};
use crate::error::{Error, Result};
use crate::kernels::{variation_bound, Kernel};
use crate::pressure::sup_gn_bound;
use crate::trees::{DiscontinuityTree, Skeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum H4Verdict {
    SummableToDepth,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H4Increment {
    /// Leaf length.
    pub k: usize,
    /// `Σ_{|v| = k} µ̂(v) R̂_v`, with the closed-form tail when declared.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H4Report {
    pub depth: usize,
    /// `Σ_{|v| <= depth} µ̂(v) Σ_{n=|v|}^{depth} (var^v_n)^2`.
    pub partial_sum: f64,
    /// `Σ µ̂(v) R_v(depth + 1)` from closed forms; absent if any leaf lacks one.
    pub tail_bound: Option<f64>,
    pub increments: Vec<H4Increment>,
    /// `exp` of the least-squares slope of `log increment` against `k`.
    pub fitted_ratio: Option<f64>,
    pub verdict: H4Verdict,
    pub estimate_source: String,
    pub caveat: Option<String>,
}

/// Squared variation bounds `(var^v_n)^2` for `n = |v|..=depth`, per leaf.
struct LeafVariations {
    leaves: Vec<(Word, Vec<f64>)>,
    index: HashMap<Word, usize>,
}

impl LeafVariations {
    fn compute(kernel: &dyn Kernel, skeleton: &Skeleton, depth: usize, depth_budget: usize) -> Result<Self> {
        let leaves = skeleton
            .finite_leaves()
            .iter()
            .filter(|v| v.len() <= depth)
            .map(|v| {
                let squares = (v.len()..=depth)
                    .map(|n| variation_bound(kernel, v, n, depth_budget).map(|x| x * x))
                    .collect::<Result<Vec<_>>>()?;
                Ok((v.clone(), squares))
            })
            .collect::<Result<Vec<_>>>()?;
        let index = leaves.iter().enumerate().map(|(i, (v, _))| (v.clone(), i)).collect();
        Ok(Self { leaves, index })
    }

    fn squared(&self, leaf: &[Symbol], n: usize) -> f64 {
        let (v, squares) = &self.leaves[self.index[leaf]];
        squares[n - v.len()]
    }
}

fn check_inputs(skeleton: &Skeleton, est: &StationaryEstimate, depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::input("summability depth must be >= 1"));
    }
    if skeleton.depth() < depth {
        return Err(Error::input(format!("skeleton depth {} is below {depth}", skeleton.depth())));
    }
    if !est.covers(depth) {
        return Err(Error::input(format!("estimate does not cover words of length {depth}")));
    }
    Ok(())
}

/// Partial leaf sums of `µ̂(v) R_v` with closed-form tails where declared.
pub fn check_h4(
    kernel: &dyn Kernel,
    skeleton: &Skeleton,
    est: &StationaryEstimate,
    depth: usize,
    depth_budget: usize,
) -> Result<H4Report> {
    check_inputs(skeleton, est, depth)?;
    let vars = LeafVariations::compute(kernel, skeleton, depth, depth_budget)?;
    let mut partial_sum = 0.0;
    let mut tail_bound = Some(0.0);
    let mut increments = vec![0.0; depth + 1];
    for (v, squares) in &vars.leaves {
        let mu = est.prob(v)?;
        let partial: f64 = squares.iter().sum();
        let tail = kernel.tail_r(v, depth + 1);
        partial_sum += mu * partial;
        tail_bound = tail_bound.zip(tail).map(|(acc, t)| acc + mu * t);
        increments[v.len()] += mu * (partial + tail.unwrap_or(0.0));
    }
    let increments: Vec<H4Increment> =
        increments.into_iter().enumerate().skip(1).map(|(k, value)| H4Increment { k, value }).collect();
    let fitted_ratio = fitted_ratio(&increments);
    let all_zero = increments.iter().all(|i| i.value == 0.0);
    let verdict = if all_zero || (tail_bound.is_some() && fitted_ratio.is_some_and(|r| r < 1.0)) {
        H4Verdict::SummableToDepth
    } else {
        H4Verdict::Inconclusive
    };
    let caveat = tail_bound.is_none().then(|| {
        "unbounded tail: some leaves have no closed-form R_v tail, so only partial sums are reported".to_string()
    });
    Ok(H4Report {
        depth,
        partial_sum,
        tail_bound,
        increments,
        fitted_ratio,
        verdict,
        estimate_source: est.source().name().into(),
        caveat,
    })
}

/// `exp(slope)` of the least-squares line through `(k, log value)` over the
/// positive increments; needs two of them.
fn fitted_ratio(increments: &[H4Increment]) -> Option<f64> {
    let points: Vec<(f64, f64)> =
        increments.iter().filter(|i| i.value > 0.0).map(|i| (i.k as f64, i.value.ln())).collect();
    crate::simulate::least_squares_slope(&points).map(f64::exp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoReport {
    pub depth: usize,
    pub total: f64,
    /// Cylinders in `D^n`, weighted by their own squared bound width.
    pub d_part: f64,
    /// Every other cylinder, weighted by its leaf's `(var^v_n)^2`.
    pub leaf_part: f64,
    /// `Σ_{n <= depth} Σ_{B ∈ D^n} ub(sup_B g_n)`, which dominates `d_part`.
    pub d_ceiling: f64,
}

/// `Σ_{n=1}^{depth} Σ_{|c| = n} µ̂(c) var_n(c)^2`, split between the
/// discontinuity cylinders and the skeleton leaves.
///
/// Grouping the leaf part by leaf reproduces [`check_h4`]'s partial sum
/// through `µ̂(v) = Σ_{|c| = n, c ends in v} µ̂(c)`.
pub fn jo_criterion(
    kernel: &dyn Kernel,
    tree: &DiscontinuityTree,
    skeleton: &Skeleton,
    est: &StationaryEstimate,
    depth: usize,
    depth_budget: usize,
) -> Result<JoReport> {
    check_inputs(skeleton, est, depth)?;
    if tree.depth() < depth {
        return Err(Error::input(format!("tree depth {} is below {depth}", tree.depth())));
    }
    let vars = LeafVariations::compute(kernel, skeleton, depth, depth_budget)?;
    let alphabet = kernel.alphabet();
    let (mut d_part, mut leaf_part, mut d_ceiling) = (0.0, 0.0, 0.0);
    for n in 1..=depth {
        for c in alphabet.words(n) {
            let mu = est.prob(&c)?;
            if tree.contains(&c) {
                let width = alphabet.symbols().map(|a| kernel.bounds(&c, a).width()).fold(0.0, f64::max);
                d_part += mu * width * width;
                d_ceiling += sup_gn_bound(kernel, &c)?.ub;
            } else {
                let leaf = skeleton
                    .leaf_for(&c)
                    .ok_or_else(|| Error::spec(format!("context {:?} has no skeleton leaf", alphabet.render(&c))))?;
                leaf_part += mu * vars.squared(leaf, n);
            }
        }
    }
    Ok(JoReport { depth, total: d_part + leaf_part, d_part, leaf_part, d_ceiling })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        CombKernelSpec, LongMemoryKernelSpec, MarkovKernelSpec, ThreeLetterKernelSpec, DEFAULT_DEPTH_BUDGET,
    };
    use crate::stationary::{build_markov_approx, DEFAULT_STATE_BUDGET};
    use crate::trees::{build_tree, skeleton_leaves};

    fn run(kernel: &dyn Kernel, depth: usize, order: usize) -> (H4Report, JoReport) {
        let tree = build_tree(kernel, depth).unwrap();
        let skel = skeleton_leaves(&tree);
        let est = build_markov_approx(kernel, order, DEFAULT_STATE_BUDGET).unwrap().estimate();
        let h4 = check_h4(kernel, &skel, &est, depth, DEFAULT_DEPTH_BUDGET).unwrap();
        let jo = jo_criterion(kernel, &tree, &skel, &est, depth, DEFAULT_DEPTH_BUDGET).unwrap();
        (h4, jo)
    }

    #[test]
    fn iid_sums_vanish() {
        let k = MarkovKernelSpec::iid("01", &[0.7, 0.3]).build().unwrap();
        let (h4, jo) = run(&k, 4, 4);
        assert_eq!(h4.partial_sum, 0.0);
        assert_eq!(h4.verdict, H4Verdict::SummableToDepth);
        assert_eq!(jo.total, 0.0);
    }

    #[test]
    fn leaf_part_matches_h4_for_each_kernel() {
        let kernels: Vec<Box<dyn Kernel>> = vec![
            Box::new(CombKernelSpec::alternating(0.2, 0.5).build().unwrap()),
            Box::new(LongMemoryKernelSpec::geometric(0.1, 0.95).build().unwrap()),
            Box::new(ThreeLetterKernelSpec::example().build().unwrap()),
        ];
        for k in &kernels {
            let (h4, jo) = run(k.as_ref(), 6, 6);
            assert!((jo.leaf_part - h4.partial_sum).abs() < 1e-10, "{}", k.name());
        }
    }

    #[test]
    fn comb_d_part_below_ceiling() {
        let k = CombKernelSpec::alternating(0.2, 0.5).build().unwrap();
        let (h4, jo) = run(&k, 8, 8);
        assert_eq!(h4.partial_sum, 0.0);
        let ceiling: f64 = (1..=8).map(|n| 0.8f64.powi(n + 1)).sum();
        assert!(jo.d_part <= ceiling);
        assert!(jo.d_part <= jo.d_ceiling);
    }

    #[test]
    fn long_memory_increments_decay() {
        let k = LongMemoryKernelSpec::geometric(0.1, 0.95).build().unwrap();
        let (h4, _) = run(&k, 8, 8);
        for inc in &h4.increments {
            assert!(inc.value <= (0.9f64 / 0.95).powi(inc.k as i32));
        }
        assert!(h4.tail_bound.is_some());
    }

    #[test]
    fn fitted_ratio_of_exact_geometric() {
        let inc: Vec<H4Increment> = (1..6).map(|k| H4Increment { k, value: 0.5f64.powi(k as i32) }).collect();
        assert!((fitted_ratio(&inc).unwrap() - 0.5).abs() < 1e-12);
    }
}
