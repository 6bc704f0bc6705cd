use serde::{Deserialize, Serialize};

use super::{last_index_of, Kernel};
use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::interval::ProbabilityInterval;

const ZERO: Symbol = Symbol(0);
const ONE: Symbol = Symbol(1);

/// Largest unresolved mass a truncated table row may leave.
const TABLE_TAIL_TOL: f64 = 1e-10;

fn default_offset() -> i32 {
    1
}

/// Distributions `(q^l_n)_{n >= 1}`, one for each memory depth `l >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum QFamily {
    /// Geometric on `{1, 2, ...}` with success probability
    /// `alpha^(l + exponent_offset)`.
    Geometric {
        alpha: f64,
        #[serde(default = "default_offset")]
        exponent_offset: i32,
    },
    /// Row `l` holds `q^l_1, q^l_2, ...`; the last row serves every deeper `l`.
    /// Mass missing from a row is treated as unresolved.
    Table { rows: Vec<Vec<f64>> },
}

impl QFamily {
    fn validate(&self) -> Result<()> {
        match self {
            QFamily::Geometric { alpha, exponent_offset } => {
                if !(alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::spec(format!("alpha = {alpha} must lie in (0, 1]")));
                }
                if *exponent_offset < 0 {
                    return Err(Error::spec("exponent_offset must be >= 0"));
                }
            }
            QFamily::Table { rows } => {
                if rows.is_empty() {
                    return Err(Error::spec("q table needs at least one row"));
                }
                for (l, row) in rows.iter().enumerate() {
                    if row.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
                        return Err(Error::spec(format!("q table row {l} has entries outside [0, 1]")));
                    }
                    let missing = 1.0 - row.iter().sum::<f64>();
                    if !(-1e-12..=TABLE_TAIL_TOL).contains(&missing) {
                        return Err(Error::spec(format!(
                            "q table row {l} sums to {}, must be 1 within {TABLE_TAIL_TOL:e}",
                            1.0 - missing
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `q^l_j`, `j >= 1`.
    fn mass(&self, l: usize, j: usize) -> f64 {
        match self {
            QFamily::Geometric { .. } => {
                let p = self.success(l);
                p * (1.0 - p).powi(j as i32 - 1)
            }
            QFamily::Table { rows } => {
                let row = &rows[l.min(rows.len() - 1)];
                row.get(j - 1).copied().unwrap_or(0.0)
            }
        }
    }

    /// Mass beyond index `seen`: `Σ_{j > seen} q^l_j`.
    fn unseen(&self, l: usize, seen: usize) -> f64 {
        match self {
            QFamily::Geometric { .. } => (1.0 - self.success(l)).powi(seen as i32),
            QFamily::Table { rows } => {
                let row = &rows[l.min(rows.len() - 1)];
                let listed: f64 = row.iter().skip(seen).sum();
                let missing = (1.0 - row.iter().sum::<f64>()).max(0.0);
                listed + missing
            }
        }
    }

    fn success(&self, l: usize) -> f64 {
        match self {
            QFamily::Geometric { alpha, exponent_offset } => alpha.powi(l as i32 + exponent_offset),
            QFamily::Table { .. } => unreachable!("tables have no success parameter"),
        }
    }
}

/// Binary kernel `g(xa) = eps + (1 - 2 eps) Σ_n 1{x_{-ℓ-n} = a} q^ℓ_n` with
/// `g(0^∞ 1) = eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongMemoryKernelSpec {
    pub eps: f64,
    pub q_family: QFamily,
}

impl LongMemoryKernelSpec {
    pub fn geometric(eps: f64, alpha: f64) -> Self {
        Self { eps, q_family: QFamily::Geometric { alpha, exponent_offset: 1 } }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::spec(format!("eps = {} must lie in (0, 1/2)", self.eps)));
        }
        self.q_family.validate()
    }

    pub fn build(&self) -> Result<LongMemoryKernel> {
        self.validate()?;
        Ok(LongMemoryKernel { spec: self.clone(), alphabet: Alphabet::binary() })
    }
}

#[derive(Debug, Clone)]
pub struct LongMemoryKernel {
    spec: LongMemoryKernelSpec,
    alphabet: Alphabet,
}

impl LongMemoryKernel {
    pub fn spec(&self) -> &LongMemoryKernelSpec {
        &self.spec
    }

    fn scale(&self, s: f64) -> f64 {
        self.spec.eps + (1.0 - 2.0 * self.spec.eps) * s
    }

    /// Matched mass among the `p` symbols visible behind the last `1` at
    /// index `p`.
    fn seen_match(&self, context: &[Symbol], p: usize, l: usize, next: Symbol) -> f64 {
        (1..=p).filter(|&j| context[p - j] == next).map(|j| self.spec.q_family.mass(l, j)).sum()
    }

    fn width_at(&self, l: usize, seen: usize) -> f64 {
        (1.0 - 2.0 * self.spec.eps) * self.spec.q_family.unseen(l, seen)
    }
}

impl Kernel for LongMemoryKernel {
    fn name(&self) -> &'static str {
        "long_memory"
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn bounds(&self, context: &[Symbol], next: Symbol) -> ProbabilityInterval {
        match last_index_of(context, ONE) {
            Some(p) => {
                let l = context.len() - 1 - p;
                let s = self.seen_match(context, p, l, next);
                let u = self.spec.q_family.unseen(l, p);
                ProbabilityInterval::clamped(self.scale(s), self.scale(s + u))
            }
            // every l >= |context| leaves the matching mass fully undetermined,
            // and the all-zero past sits inside the same hull
            None => ProbabilityInterval::clamped(self.spec.eps, 1.0 - self.spec.eps),
        }
    }

    fn discontinuity_words(&self, n: usize) -> Vec<Word> {
        vec![Word::repeat(ZERO, n)]
    }

    fn value_with_fill(&self, context: &[Symbol], fill: Symbol, next: Symbol) -> f64 {
        match last_index_of(context, ONE) {
            Some(p) => {
                let l = context.len() - 1 - p;
                let mut s = self.seen_match(context, p, l, next);
                if fill == next {
                    s += self.spec.q_family.unseen(l, p);
                }
                self.scale(s)
            }
            None if fill == ONE => self.scale(if next == ONE { 1.0 } else { 0.0 }),
            None => {
                if next == ONE {
                    self.spec.eps
                } else {
                    1.0 - self.spec.eps
                }
            }
        }
    }

    fn representative_fill(&self) -> Symbol {
        ONE
    }

    fn analytic_variation(&self, v: &[Symbol], n: usize) -> Option<f64> {
        match last_index_of(v, ONE) {
            Some(p) => Some(self.width_at(v.len() - 1 - p, p + n - v.len())),
            None => Some(1.0 - 2.0 * self.spec.eps),
        }
    }

    fn tail_r(&self, v: &[Symbol], n0: usize) -> Option<f64> {
        let p = last_index_of(v, ONE)?;
        let l = v.len() - 1 - p;
        let seen0 = p + n0.max(v.len()) - v.len();
        let c = (1.0 - 2.0 * self.spec.eps).powi(2);
        match &self.spec.q_family {
            QFamily::Geometric { .. } => {
                let r = (1.0 - self.spec.q_family.success(l)).powi(2);
                (r < 1.0).then(|| c * r.powi(seen0 as i32) / (1.0 - r))
            }
            QFamily::Table { rows } => {
                let row = &rows[l.min(rows.len() - 1)];
                if 1.0 - row.iter().sum::<f64>() > 0.0 {
                    return None;
                }
                Some((seen0..row.len()).map(|s| c * self.spec.q_family.unseen(l, s).powi(2)).sum())
            }
        }
    }
}
