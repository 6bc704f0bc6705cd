use serde::{Deserialize, Serialize};

use super::sequence::Sequence;
use super::{last_index_of, Kernel};
use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::interval::ProbabilityInterval;

const ZERO: Symbol = Symbol(0);
const ONE: Symbol = Symbol(1);

/// Binary kernel with `g(x1) = q_{ℓ(x)}`, where `ℓ(x)` is the distance back
/// to the most recent `1` and `q_inf` is used on the all-zero past.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombKernelSpec {
    pub q: Sequence,
    pub q_inf: f64,
}

impl CombKernelSpec {
    /// `q_i = 1 - eps` for even `i`, `eps` for odd `i`.
    pub fn alternating(eps: f64, q_inf: f64) -> Self {
        Self { q: Sequence::List { values: vec![1.0 - eps, eps], tail: super::Tail::Periodic }, q_inf }
    }

    pub fn validate(&self) -> Result<()> {
        self.q.validate()?;
        if !(self.q_inf.is_finite() && (0.0..=1.0).contains(&self.q_inf)) {
            return Err(Error::spec(format!("q_inf = {} is outside [0, 1]", self.q_inf)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<CombKernel> {
        self.validate()?;
        Ok(CombKernel { spec: self.clone(), alphabet: Alphabet::binary() })
    }
}

#[derive(Debug, Clone)]
pub struct CombKernel {
    spec: CombKernelSpec,
    alphabet: Alphabet,
}

impl CombKernel {
    pub fn spec(&self) -> &CombKernelSpec {
        &self.spec
    }

    fn for_symbol(q: f64, next: Symbol) -> f64 {
        if next == ONE {
            q
        } else {
            1.0 - q
        }
    }
}

impl Kernel for CombKernel {
    fn name(&self) -> &'static str {
        "comb"
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn bounds(&self, context: &[Symbol], next: Symbol) -> ProbabilityInterval {
        match last_index_of(context, ONE) {
            Some(p) => {
                let q = self.spec.q.value(context.len() - 1 - p);
                ProbabilityInterval::point(Self::for_symbol(q, next))
            }
            None => {
                let (lo, hi) = self.spec.q.inf_sup_from(context.len());
                let (lo, hi) = (lo.min(self.spec.q_inf), hi.max(self.spec.q_inf));
                if next == ONE {
                    ProbabilityInterval::clamped(lo, hi)
                } else {
                    ProbabilityInterval::clamped(1.0 - hi, 1.0 - lo)
                }
            }
        }
    }

    fn discontinuity_words(&self, n: usize) -> Vec<Word> {
        vec![Word::repeat(ZERO, n)]
    }

    fn value_with_fill(&self, context: &[Symbol], fill: Symbol, next: Symbol) -> f64 {
        let q = match last_index_of(context, ONE) {
            Some(p) => self.spec.q.value(context.len() - 1 - p),
            None if fill == ONE => self.spec.q.value(context.len()),
            None => self.spec.q_inf,
        };
        Self::for_symbol(q, next)
    }

    fn representative_fill(&self) -> Symbol {
        ONE
    }

    fn analytic_variation(&self, v: &[Symbol], n: usize) -> Option<f64> {
        if v.contains(&ONE) {
            Some(0.0)
        } else {
            Some(self.bounds(&vec![ZERO; n], ONE).width())
        }
    }

    fn tail_r(&self, v: &[Symbol], _n0: usize) -> Option<f64> {
        v.contains(&ONE).then_some(0.0)
    }

    fn as_comb(&self) -> Option<&CombKernel> {
        Some(self)
    }
}
