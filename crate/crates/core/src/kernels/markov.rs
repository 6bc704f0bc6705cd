use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::interval::ProbabilityInterval;

/// Finite-order Markov kernel. `order = 0` gives an i.i.d. source.
///
/// `transitions` maps every context word of length `order` (labels, most
/// recent last) to its next-symbol distribution in alphabet order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovKernelSpec {
    pub alphabet: String,
    pub order: usize,
    pub transitions: BTreeMap<String, Vec<f64>>,
}

impl MarkovKernelSpec {
    pub fn iid(alphabet: &str, probs: &[f64]) -> Self {
        Self { alphabet: alphabet.into(), order: 0, transitions: [(String::new(), probs.to_vec())].into() }
    }

    pub fn build(&self) -> Result<MarkovKernel> {
        let alphabet = Alphabet::new(self.alphabet.chars()).map_err(|e| Error::spec(e.to_string()))?;
        let m = alphabet.size();
        if self.order > 16 {
            return Err(Error::spec(format!("markov order {} is above the supported 16", self.order)));
        }
        let states = m.checked_pow(self.order as u32).ok_or_else(|| Error::spec("markov state space overflows"))?;
        let mut rows = vec![None; states];
        for (ctx, row) in &self.transitions {
            let w = alphabet.parse(ctx).map_err(|e| Error::spec(format!("transitions[{ctx:?}]: {e}")))?;
            if w.len() != self.order {
                return Err(Error::spec(format!("transitions[{ctx:?}]: context length must be {}", self.order)));
            }
            if row.len() != m {
                return Err(Error::spec(format!("transitions[{ctx:?}]: expected {m} probabilities")));
            }
            if row.iter().any(|p| !(p.is_finite() && (0.0..=1.0).contains(p))) {
                return Err(Error::spec(format!("transitions[{ctx:?}]: entries must lie in [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::spec(format!("transitions[{ctx:?}]: row sums to {total}")));
            }
            rows[alphabet.rank(&w)] = Some(row.clone());
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(r, row)| {
                row.ok_or_else(|| {
                    let w = alphabet.unrank(r, self.order);
                    Error::spec(format!("transitions missing context {:?}", alphabet.render(&w)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkovKernel { alphabet, order: self.order, rows })
    }
}

#[derive(Debug, Clone)]
pub struct MarkovKernel {
    alphabet: Alphabet,
    order: usize,
    rows: Vec<Vec<f64>>,
}

impl MarkovKernel {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Transition row for a full context of length `order`.
    pub fn row(&self, context: &[Symbol]) -> &[f64] {
        &self.rows[self.alphabet.rank(context)]
    }
}

impl Kernel for MarkovKernel {
    fn name(&self) -> &'static str {
        "markov"
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn bounds(&self, context: &[Symbol], next: Symbol) -> ProbabilityInterval {
        if context.len() >= self.order {
            let full = &context[context.len() - self.order..];
            return ProbabilityInterval::point(self.row(full)[next.index()]);
        }
        let free = self.order - context.len();
        let stride = self.alphabet.size().pow(context.len() as u32);
        let tail_rank = self.alphabet.rank(context);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for prefix in 0..self.alphabet.size().pow(free as u32) {
            let p = self.rows[prefix * stride + tail_rank][next.index()];
            lo = lo.min(p);
            hi = hi.max(p);
        }
        ProbabilityInterval::clamped(lo, hi)
    }

    fn discontinuity_words(&self, _n: usize) -> Vec<Word> {
        Vec::new()
    }

    fn value_with_fill(&self, context: &[Symbol], fill: Symbol, next: Symbol) -> f64 {
        let mut full = vec![fill; self.order.saturating_sub(context.len())];
        full.extend_from_slice(&context[context.len().saturating_sub(self.order)..]);
        self.row(&full)[next.index()]
    }

    fn analytic_variation(&self, _v: &[Symbol], n: usize) -> Option<f64> {
        (n >= self.order).then_some(0.0)
    }

    fn tail_r(&self, _v: &[Symbol], n0: usize) -> Option<f64> {
        (n0 >= self.order).then_some(0.0)
    }
}
