//! Exact stationary law of comb kernels through the distance-to-last-one
//! chain.
//!
//! The chain sits at `ℓ`, moves to 0 with probability `q_ℓ` and to `ℓ + 1`
//! otherwise. Its stationary weights are `ρ(ℓ) = Π_{i<ℓ}(1 - q_i)`, and a
//! stationary law exists exactly when `Z = Σ_ℓ ρ(ℓ)` is finite.

use std::sync::Mutex;

use serde::Serialize;

use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::kernels::{CombKernelSpec, Sequence, Tail};

pub const DEFAULT_TAIL_TERMS: usize = 4096;

/// Largest tail bound accepted as a certified normalization.
const TAIL_ACCEPT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Summable,
    NonSummable,
    Inconclusive,
}

/// How `Σ_{l >= n} ρ(l)` is obtained beyond the stored prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
enum TailRule {
    /// `ρ(l) = 0` for `l >= hit`.
    Vanishes { hit: usize },
    /// `ρ(l + period) = ratio · ρ(l)` for every `l`.
    Periodic { period: usize, ratio: f64 },
    /// `q_l = value` for `l >= from`.
    Constant { from: usize, value: f64 },
    /// `q_l = c / (l + b)` with `c > 1`; beyond `from` only an upper bound
    /// is known.
    Harmonic { c: f64, b: f64, from: usize },
    /// Divergent or unbounded.
    None,
}

#[derive(Debug)]
pub struct RenewalOracle {
    q: Sequence,
    rho: Mutex<Vec<f64>>,
    rule: TailRule,
    summability: Summability,
    z: Option<f64>,
    /// Absolute error bound on `z`; 0 for closed-form tails.
    z_error: f64,
    note: String,
}

impl Clone for RenewalOracle {
    fn clone(&self) -> Self {
        Self {
            q: self.q.clone(),
            rho: Mutex::new(self.rho.lock().expect("rho cache poisoned").clone()),
            rule: self.rule,
            summability: self.summability,
            z: self.z,
            z_error: self.z_error,
            note: self.note.clone(),
        }
    }
}

/// Builds the oracle, storing `ρ(0..=tail_terms)` and classifying the tail.
pub fn renewal_oracle(spec: &CombKernelSpec, tail_terms: usize) -> Result<RenewalOracle> {
    spec.validate()?;
    if tail_terms == 0 {
        return Err(Error::input("renewal oracle needs tail_terms >= 1"));
    }
    let q = &spec.q;
    let mut rho = vec![1.0];
    let extend_to = |rho: &mut Vec<f64>, len: usize| {
        while rho.len() <= len {
            let l = rho.len() - 1;
            rho.push(rho[l] * (1.0 - q.value(l)));
        }
    };
    extend_to(&mut rho, tail_terms);
    let big_l = tail_terms;

    // a zero reached by underflow is not a vanishing tail
    let exact_hit = (1..rho.len()).find(|&l| q.value(l - 1) == 1.0);
    let (rule, note) = if let Some(hit) = exact_hit {
        (TailRule::Vanishes { hit }, format!("rho vanishes from l = {hit}"))
    } else {
        classify(q, big_l)
    };
    if let TailRule::Periodic { period, .. } = rule {
        extend_to(&mut rho, big_l + period);
    }

    let mut oracle = RenewalOracle {
        q: q.clone(),
        rho: Mutex::new(rho),
        rule,
        summability: Summability::NonSummable,
        z: None,
        z_error: 0.0,
        note,
    };
    match rule {
        TailRule::None => {}
        TailRule::Harmonic { c, b, .. } => {
            let bound = oracle.rho(big_l) * (1.0 + (big_l as f64 + b) / (c - 1.0));
            if bound <= TAIL_ACCEPT {
                oracle.summability = Summability::Summable;
                oracle.z = Some(oracle.tail_sum(0));
                oracle.z_error = bound;
            } else {
                oracle.summability = Summability::Inconclusive;
                oracle.note = format!(
                    "harmonic tail bound {bound:e} after {big_l} terms exceeds {TAIL_ACCEPT:e}; raise tail_terms"
                );
            }
        }
        _ => {
            oracle.summability = Summability::Summable;
            oracle.z = Some(oracle.tail_sum(0));
        }
    }
    Ok(oracle)
}

fn classify(q: &Sequence, big_l: usize) -> (TailRule, String) {
    let non_summable = |why: &str| (TailRule::None, format!("rho is not summable: {why}"));
    match q {
        Sequence::List { values, tail } => match *tail {
            Tail::Periodic => {
                let ratio: f64 = values.iter().map(|v| 1.0 - v).product();
                if ratio >= 1.0 {
                    non_summable("q vanishes on a full period")
                } else {
                    (TailRule::Periodic { period: values.len(), ratio }, "periodic q, closed-form tail".into())
                }
            }
            Tail::Constant { value } => constant_rule(values.len(), value),
            Tail::Geometric { ratio } if ratio >= 1.0 => constant_rule(values.len(), values[values.len() - 1]),
            Tail::Geometric { .. } => non_summable("q has a summable geometric tail"),
            Tail::Zero => non_summable("q is eventually 0"),
        },
        Sequence::Constant { value } => constant_rule(0, *value),
        Sequence::Harmonic { numerator, offset } => {
            if *numerator <= 1.0 {
                non_summable("harmonic q with numerator <= 1 gives rho(l) ~ l^-c, c <= 1")
            } else {
                (
                    TailRule::Harmonic { c: *numerator, b: *offset, from: big_l },
                    format!("harmonic tail bounded after {big_l} terms"),
                )
            }
        }
        Sequence::Geometric { scale, ratio } => {
            if *ratio >= 1.0 {
                constant_rule(0, *scale)
            } else {
                non_summable("q is summable, so rho has a positive limit")
            }
        }
    }
}

fn constant_rule(from: usize, value: f64) -> (TailRule, String) {
    if value > 0.0 {
        (TailRule::Constant { from, value }, "eventually constant q, closed-form tail".into())
    } else {
        (TailRule::None, "rho is not summable: q is eventually 0".into())
    }
}

impl RenewalOracle {
    pub fn summability(&self) -> Summability {
        self.summability
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// `Z = Σ_l ρ(l)` when summable.
    pub fn normalization(&self) -> Option<f64> {
        self.z
    }

    pub fn normalization_error(&self) -> f64 {
        self.z_error
    }

    /// `ρ(l)`, extending the cache as needed.
    pub fn rho(&self, l: usize) -> f64 {
        let mut rho = self.rho.lock().expect("rho cache poisoned");
        while rho.len() <= l {
            let i = rho.len() - 1;
            let next = rho[i] * (1.0 - self.q.value(i));
            rho.push(next);
        }
        rho[l]
    }

    /// `Σ_{l >= n} ρ(l)`; an upper bound under the harmonic rule.
    pub fn tail_sum(&self, n: usize) -> f64 {
        match self.rule {
            TailRule::Vanishes { hit } => (n..hit).map(|l| self.rho(l)).sum(),
            TailRule::Periodic { period, ratio } => (0..period).map(|j| self.rho(n + j)).sum::<f64>() / (1.0 - ratio),
            TailRule::Constant { from, value } => {
                let start = n.max(from);
                (n..start).map(|l| self.rho(l)).sum::<f64>() + self.rho(start) / value
            }
            TailRule::Harmonic { c, b, from } => {
                let start = n.max(from);
                (n..start).map(|l| self.rho(l)).sum::<f64>() + self.rho(start) * (1.0 + (start as f64 + b) / (c - 1.0))
            }
            TailRule::None => f64::INFINITY,
        }
    }

    /// Exponential decay rate of `ρ` when it is known in closed form.
    pub fn tail_rate(&self) -> Option<f64> {
        match self.rule {
            TailRule::Periodic { period, ratio } => Some(ratio.ln() / period as f64),
            TailRule::Constant { value, .. } => Some((1.0 - value).ln()),
            _ => None,
        }
    }

    fn require_z(&self) -> Result<f64> {
        self.z.ok_or_else(|| Error::input(format!("no stationary measure for this comb kernel ({})", self.note)))
    }

    /// `π(l) = ρ(l) / Z`.
    pub fn pi(&self, l: usize) -> Result<f64> {
        Ok(self.rho(l) / self.require_z()?)
    }

    /// `P(ℓ >= n)` under the stationary law; equals `µ(0^n)`.
    pub fn tail_prob(&self, n: usize) -> Result<f64> {
        let z = self.require_z()?;
        Ok(if n == 0 { 1.0 } else { self.tail_sum(n) / z })
    }

    /// Stationary probability of the cylinder `w` (most recent last).
    ///
    /// `µ(0^j 1 u) = π(j) · P(u | ℓ = 0)` and `µ(0^n) = P(ℓ >= n)`.
    pub fn cylinder(&self, w: &[Symbol]) -> Result<f64> {
        let Some(j) = w.iter().position(|&s| s == Symbol(1)) else {
            return self.tail_prob(w.len());
        };
        let mut p = self.pi(j)?;
        let mut l = 0;
        for &s in &w[j + 1..] {
            let q = self.q.value(l);
            if s == Symbol(1) {
                p *= q;
                l = 0;
            } else {
                p *= 1.0 - q;
                l += 1;
            }
        }
        Ok(p)
    }

    /// Inverse-CDF draw of `ℓ` from `π` given a uniform `u` in `[0, 1)`.
    pub fn sample_distance(&self, u: f64) -> Result<usize> {
        let z = self.require_z()?;
        let target = u * z;
        let mut acc = 0.0;
        let mut l = 0;
        loop {
            acc += self.rho(l);
            if acc > target || self.rho(l + 1) == 0.0 || self.tail_sum(l + 1) < f64::MIN_POSITIVE {
                return Ok(l);
            }
            l += 1;
        }
    }
}
