use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::sequence::Sequence;
use super::{last_index_of, Kernel};
use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::interval::ProbabilityInterval;

const ONE: Symbol = Symbol(1);

const BASE: f64 = 0.26;
const PURE_01: f64 = 0.3;
const PURE_2: f64 = 0.4;
const THETA_CAP: f64 = 0.03;

/// Ternary kernel on `{0, 1, 2}`.
///
/// Pasts without any `1` emit `0`, `1`, `2` with probabilities 0.3, 0.3,
/// 0.4. When the distance `ℓ` to the last `1` lies in `n0` (resp. `n1`,
/// `n2`) the symbol `0` (resp. `1`, `2`) is forbidden and the two others get
/// 1/2. Otherwise `g(x0) = g(x1) = 0.26 + Σ_k θ_k x_{-ℓ-k}` with the symbol
/// read as its numeric value.
///
/// `theta` is indexed from `θ_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLetterKernelSpec {
    pub n0: BTreeSet<usize>,
    pub n1: BTreeSet<usize>,
    pub n2: BTreeSet<usize>,
    pub theta: Sequence,
}

impl ThreeLetterKernelSpec {
    /// `n0 = {1}`, `n1 = {2}`, `n2 = {3}`, `θ_k = 0.01 · 2^(1-k)` (total 0.02).
    pub fn example() -> Self {
        Self { n0: [1].into(), n1: [2].into(), n2: [3].into(), theta: Sequence::Geometric { scale: 0.01, ratio: 0.5 } }
    }

    pub fn validate(&self) -> Result<()> {
        let sets = [&self.n0, &self.n1, &self.n2];
        for i in 0..3 {
            for j in i + 1..3 {
                if let Some(x) = sets[i].intersection(sets[j]).next() {
                    return Err(Error::spec(format!("n{i} and n{j} share the depth {x}")));
                }
            }
        }
        self.theta.validate()?;
        match self.theta.tail_sum(0) {
            Some(total) if total < THETA_CAP => Ok(()),
            Some(total) => Err(Error::spec(format!("sum of theta is {total}, must be < {THETA_CAP}"))),
            None => Err(Error::spec("theta must be summable")),
        }
    }

    pub fn build(&self) -> Result<ThreeLetterKernel> {
        self.validate()?;
        let horizon = [&self.n0, &self.n1, &self.n2].iter().filter_map(|s| s.iter().max()).max().copied();
        Ok(ThreeLetterKernel { spec: self.clone(), alphabet: Alphabet::ternary(), horizon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    /// Symbol with index `forbidden` has probability 0, the others 1/2.
    Half {
        forbidden: u8,
    },
    Theta,
}

#[derive(Debug, Clone)]
pub struct ThreeLetterKernel {
    spec: ThreeLetterKernelSpec,
    alphabet: Alphabet,
    horizon: Option<usize>,
}

impl ThreeLetterKernel {
    pub fn spec(&self) -> &ThreeLetterKernelSpec {
        &self.spec
    }

    /// Largest depth listed in `n0 ∪ n1 ∪ n2`.
    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    fn branch(&self, l: usize) -> Branch {
        if self.spec.n0.contains(&l) {
            Branch::Half { forbidden: 0 }
        } else if self.spec.n1.contains(&l) {
            Branch::Half { forbidden: 1 }
        } else if self.spec.n2.contains(&l) {
            Branch::Half { forbidden: 2 }
        } else {
            Branch::Theta
        }
    }

    fn half(forbidden: u8, next: Symbol) -> f64 {
        if next.0 == forbidden {
            0.0
        } else {
            0.5
        }
    }

    /// `Σ_{j > p} θ_j`.
    fn theta_tail(&self, p: usize) -> f64 {
        self.spec.theta.tail_sum(p).unwrap_or(0.0)
    }

    fn theta(&self, j: usize) -> f64 {
        self.spec.theta.value(j - 1)
    }

    fn seen_sum(&self, context: &[Symbol], p: usize) -> f64 {
        (1..=p).map(|j| self.theta(j) * context[p - j].0 as f64).sum()
    }

    /// Interval for `g(x·next)` given `g(x0) = g(x1) ∈ [lo, hi]`.
    fn theta_interval(lo: f64, hi: f64, next: Symbol) -> ProbabilityInterval {
        if next.0 == 2 {
            ProbabilityInterval::clamped(1.0 - 2.0 * hi, 1.0 - 2.0 * lo)
        } else {
            ProbabilityInterval::clamped(lo, hi)
        }
    }

    fn theta_value(v01: f64, next: Symbol) -> f64 {
        if next.0 == 2 {
            1.0 - 2.0 * v01
        } else {
            v01
        }
    }

    fn pure(next: Symbol) -> f64 {
        if next.0 == 2 {
            PURE_2
        } else {
            PURE_01
        }
    }
}

impl Kernel for ThreeLetterKernel {
    fn name(&self) -> &'static str {
        "three_letter"
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn bounds(&self, context: &[Symbol], next: Symbol) -> ProbabilityInterval {
        match last_index_of(context, ONE) {
            Some(p) => match self.branch(context.len() - 1 - p) {
                Branch::Half { forbidden } => ProbabilityInterval::point(Self::half(forbidden, next)),
                Branch::Theta => {
                    let lo = BASE + self.seen_sum(context, p);
                    Self::theta_interval(lo, lo + 2.0 * self.theta_tail(p), next)
                }
            },
            None => {
                // completions: the pure {0,2} past, or a 1 at any depth l >= |context|
                let k = context.len();
                let mut hull = ProbabilityInterval::point(Self::pure(next));
                hull = hull.hull(&Self::theta_interval(BASE, BASE + 2.0 * self.theta_tail(0), next));
                for set in [&self.spec.n0, &self.spec.n1, &self.spec.n2] {
                    for &l in set.range(k..) {
                        if let Branch::Half { forbidden } = self.branch(l) {
                            hull = hull.hull(&ProbabilityInterval::point(Self::half(forbidden, next)));
                        }
                    }
                }
                hull
            }
        }
    }

    fn discontinuity_words(&self, n: usize) -> Vec<Word> {
        // {0, 2}^n in rank order
        let mut out: Vec<Word> = (0..1usize << n)
            .map(|bits| {
                Word::from_symbols((0..n).map(|i| Symbol(if bits >> (n - 1 - i) & 1 == 1 { 2 } else { 0 })).collect())
            })
            .collect();
        out.sort();
        out
    }

    fn value_with_fill(&self, context: &[Symbol], fill: Symbol, next: Symbol) -> f64 {
        match last_index_of(context, ONE) {
            Some(p) => match self.branch(context.len() - 1 - p) {
                Branch::Half { forbidden } => Self::half(forbidden, next),
                Branch::Theta => {
                    let v = BASE + self.seen_sum(context, p) + fill.0 as f64 * self.theta_tail(p);
                    Self::theta_value(v, next)
                }
            },
            None if fill == ONE => match self.branch(context.len()) {
                Branch::Half { forbidden } => Self::half(forbidden, next),
                Branch::Theta => Self::theta_value(BASE + self.theta_tail(0), next),
            },
            None => Self::pure(next),
        }
    }

    fn analytic_variation(&self, v: &[Symbol], n: usize) -> Option<f64> {
        let p = last_index_of(v, ONE)?;
        Some(match self.branch(v.len() - 1 - p) {
            Branch::Half { .. } => 0.0,
            // the symbol 2 moves twice as fast as 0 and 1
            Branch::Theta => 4.0 * self.theta_tail(p + n - v.len()),
        })
    }

    fn tail_r(&self, v: &[Symbol], n0: usize) -> Option<f64> {
        let p = last_index_of(v, ONE)?;
        if let Branch::Half { .. } = self.branch(v.len() - 1 - p) {
            return Some(0.0);
        }
        let start = p + n0.max(v.len()) - v.len();
        let term = |s: usize| 16.0 * self.theta_tail(s).powi(2);
        match &self.spec.theta {
            Sequence::Geometric { ratio, .. } => Some(term(start) / (1.0 - ratio * ratio)),
            Sequence::List { values, tail } => {
                let split = start.max(values.len());
                let head: f64 = (start..split).map(term).sum();
                let rest = match *tail {
                    super::Tail::Zero => 0.0,
                    super::Tail::Geometric { ratio } => term(split) / (1.0 - ratio * ratio),
                    super::Tail::Constant { value: 0.0 } => 0.0,
                    _ => return None,
                };
                Some(head + rest)
            }
            Sequence::Constant { value } if *value == 0.0 => Some(0.0),
            _ => None,
        }
    }
}
