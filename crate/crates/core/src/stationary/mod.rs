//! Stationary measure estimates and the checks that consume them.
//!
//! Every estimate exposes cylinder probabilities `µ̂(w)`. Table-backed
//! estimates store suffix marginals, so `µ̂(v) = Σ_a µ̂(a·v)` holds up to
//! floating-point summation order.

mod markov_approx;
mod renewal;
mod uniqueness;

pub use markov_approx::{build_markov_approx, MarkovApprox, DEFAULT_STATE_BUDGET, MAX_POWER_ITERATIONS, POWER_TOL};
pub use renewal::{renewal_oracle, RenewalOracle, Summability, DEFAULT_TAIL_TERMS};
pub use uniqueness::{check_h4, jo_criterion, H4Increment, H4Report, H4Verdict, JoReport};

use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::pressure::sup_gn_bound;
use crate::trees::DiscontinuityTree;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateSource {
    MarkovApprox { order: usize },
    RenewalOracle,
    Empirical { length: usize },
}

impl EstimateSource {
    pub fn name(&self) -> &'static str {
        match self {
            EstimateSource::MarkovApprox { .. } => "markov_approx",
            EstimateSource::RenewalOracle => "renewal_oracle",
            EstimateSource::Empirical { .. } => "empirical",
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    /// `levels[j][rank(w)] = µ̂(w)` for `|w| = j`.
    Table(Vec<Vec<f64>>),
    Renewal(Arc<RenewalOracle>),
}

#[derive(Debug, Clone)]
pub struct StationaryEstimate {
    source: EstimateSource,
    alphabet: Alphabet,
    backend: Backend,
}

/// JSON form: `{"source": ..., "order": k, "cylinders": {"0": p, ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateExport {
    pub source: String,
    pub order: usize,
    pub cylinders: Map<String, Value>,
}

/// Rounds to 15 significant digits.
fn sig15(x: f64) -> f64 {
    format!("{x:.14e}").parse().unwrap_or(x)
}

impl StationaryEstimate {
    /// Builds every shorter level from the top-level table by summing out the
    /// oldest coordinate.
    pub(crate) fn from_top_level(source: EstimateSource, alphabet: Alphabet, top: Vec<f64>, order: usize) -> Self {
        let m = alphabet.size();
        let mut levels = vec![Vec::new(); order + 1];
        levels[order] = top;
        for j in (1..=order).rev() {
            let width = m.pow(j as u32 - 1);
            let mut lower = vec![0.0; width];
            for (r, p) in levels[j].iter().enumerate() {
                lower[r % width] += p;
            }
            levels[j - 1] = lower;
        }
        Self { source, alphabet, backend: Backend::Table(levels) }
    }

    pub fn from_renewal(oracle: Arc<RenewalOracle>) -> Result<Self> {
        if oracle.summability() != Summability::Summable {
            return Err(Error::input(format!("renewal oracle has no stationary measure ({})", oracle.note())));
        }
        Ok(Self {
            source: EstimateSource::RenewalOracle,
            alphabet: Alphabet::binary(),
            backend: Backend::Renewal(oracle),
        })
    }

    pub fn source(&self) -> &EstimateSource {
        &self.source
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Longest word length with a stored probability; `None` for oracles.
    pub fn max_len(&self) -> Option<usize> {
        match &self.backend {
            Backend::Table(levels) => Some(levels.len() - 1),
            Backend::Renewal(_) => None,
        }
    }

    pub fn covers(&self, len: usize) -> bool {
        self.max_len().is_none_or(|k| len <= k)
    }

    /// `µ̂(w)`.
    pub fn prob(&self, w: &[Symbol]) -> Result<f64> {
        match &self.backend {
            Backend::Table(levels) => levels
                .get(w.len())
                .map(|level| level[self.alphabet.rank(w)])
                .ok_or_else(|| Error::input(format!("estimate covers words up to length {}", levels.len() - 1))),
            Backend::Renewal(oracle) => oracle.cylinder(w),
        }
    }

    /// All cylinders of length `1..=order`, by length then rank.
    pub fn export(&self, order: usize) -> Result<EstimateExport> {
        if !self.covers(order) {
            return Err(Error::input(format!("estimate does not cover order {order}")));
        }
        let mut cylinders = Map::new();
        for len in 1..=order {
            for w in self.alphabet.words(len) {
                cylinders.insert(self.alphabet.render(&w), Value::from(sig15(self.prob(&w)?)));
            }
        }
        Ok(EstimateExport { source: self.source.name().into(), order, cylinders })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassRow {
    pub n: usize,
    /// `µ̂(C_n(D)) = Σ_{B ∈ D^n} µ̂(B)`.
    pub mass: f64,
    /// `Σ_{B ∈ D^n} ub(sup_B g_n)`.
    pub ceiling: f64,
}

/// Estimated mass of the depth-`n` neighbourhood of `D` next to its
/// pressure ceiling, `n = 1..=n_max`.
pub fn discontinuity_mass(
    kernel: &dyn Kernel,
    est: &StationaryEstimate,
    tree: &DiscontinuityTree,
    n_max: usize,
) -> Result<Vec<MassRow>> {
    if !est.covers(n_max) {
        return Err(Error::input(format!("estimate does not cover depth {n_max}")));
    }
    if tree.depth() < n_max {
        return Err(Error::input(format!("tree depth {} is below {n_max}", tree.depth())));
    }
    (1..=n_max)
        .map(|n| {
            let (mut mass, mut ceiling) = (0.0, 0.0);
            for b in tree.level(n) {
                mass += est.prob(b)?;
                ceiling += sup_gn_bound(kernel, b)?.ub;
            }
            Ok(MassRow { n, mass, ceiling })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{CombKernelSpec, MarkovKernelSpec};
    use crate::trees::build_tree;

    #[test]
    fn suffix_marginals_are_additive() {
        let a = Alphabet::binary();
        let top = vec![0.1, 0.2, 0.3, 0.4];
        let est = StationaryEstimate::from_top_level(EstimateSource::Empirical { length: 10 }, a.clone(), top, 2);
        let one = a.parse("1").unwrap();
        assert!((est.prob(&one).unwrap() - 0.6).abs() < 1e-15);
        assert!((est.prob(&[]).unwrap() - 1.0).abs() < 1e-15);
        assert!(est.prob(&a.parse("000").unwrap()).is_err());
        let json = serde_json::to_value(est.export(2).unwrap()).unwrap();
        assert_eq!(json["source"], "empirical");
        assert_eq!(
            json["cylinders"].as_object().unwrap().keys().collect::<Vec<_>>(),
            ["0", "1", "00", "01", "10", "11"]
        );
    }

    #[test]
    fn sig15_rounds() {
        assert_eq!(sig15(0.12345678901234568), 0.123456789012346);
        assert_eq!(sig15(1.0 / 3.0).to_string(), "0.333333333333333");
    }

    #[test]
    fn comb_renewal_mass_is_tail_of_pi() {
        let spec = CombKernelSpec::alternating(0.2, 0.5);
        let k = spec.build().unwrap();
        let oracle = Arc::new(renewal_oracle(&spec, 64).unwrap());
        let est = StationaryEstimate::from_renewal(oracle.clone()).unwrap();
        let t = build_tree(&k, 8).unwrap();
        let rows = discontinuity_mass(&k, &est, &t, 8).unwrap();
        for r in &rows {
            // independent oracle: direct summation of rho up to a long horizon
            let mut rho = 1.0;
            let (mut z, mut tail) = (0.0, 0.0);
            for l in 0..400 {
                z += rho;
                if l >= r.n {
                    tail += rho;
                }
                rho *= 1.0 - if l % 2 == 0 { 0.8 } else { 0.2 };
            }
            assert!((r.mass - tail / z).abs() < 1e-12);
            assert!(r.mass <= r.ceiling);
        }
    }

    #[test]
    fn empty_tree_carries_no_mass() {
        let k = MarkovKernelSpec::iid("01", &[0.7, 0.3]).build().unwrap();
        let approx = build_markov_approx(&k, 3, DEFAULT_STATE_BUDGET).unwrap();
        let t = build_tree(&k, 3).unwrap();
        let rows = discontinuity_mass(&k, &approx.estimate(), &t, 3).unwrap();
        assert!(rows.iter().all(|r| r.mass == 0.0 && r.ceiling == 0.0));
    }
}
