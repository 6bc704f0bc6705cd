//! Probability kernels evaluated on cylinders.
//!
//! A kernel answers, for a finite context (the visible part of the past) and
//! a next symbol, the infimum and supremum of `g` over every infinite past
//! that ends with that context. Discontinuity is reported as the per-depth
//! word sets `D^n`, where each word is the visible tail of a discontinuous
//! past.

mod comb;
mod long_memory;
mod markov;
pub mod sequence;
mod spec;
mod three_letter;

pub use comb::{CombKernel, CombKernelSpec};
pub use long_memory::{LongMemoryKernel, LongMemoryKernelSpec, QFamily};
pub use markov::{MarkovKernel, MarkovKernelSpec};
pub use sequence::{Sequence, Tail};
pub use spec::KernelSpec;
pub use three_letter::{ThreeLetterKernel, ThreeLetterKernelSpec};

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::interval::ProbabilityInterval;

/// Default cap on the number of symbols enumerated by the generic variation
/// fallback (context plus next symbol).
pub const DEFAULT_DEPTH_BUDGET: usize = 14;

pub trait Kernel: Send + Sync {
    fn name(&self) -> &'static str;

    fn alphabet(&self) -> &Alphabet;

    /// Inf and sup of `g(x·next)` over pasts `x` ending in `context`.
    fn bounds(&self, context: &[Symbol], next: Symbol) -> ProbabilityInterval;

    /// The set `D^n`, sorted.
    fn discontinuity_words(&self, n: usize) -> Vec<Word>;

    /// `g` at the past `fill^∞ · context`.
    fn value_with_fill(&self, context: &[Symbol], fill: Symbol, next: Symbol) -> f64;

    /// Symbol repeated into the unseen past when a single representative
    /// completion of a cylinder is needed.
    fn representative_fill(&self) -> Symbol {
        Symbol(0)
    }

    /// Closed-form upper bound on `var^v_n`, when the kernel has one.
    fn analytic_variation(&self, _v: &[Symbol], _n: usize) -> Option<f64> {
        None
    }

    /// Closed-form upper bound on `Σ_{n >= n0} (var^v_n)^2`.
    fn tail_r(&self, _v: &[Symbol], _n0: usize) -> Option<f64> {
        None
    }

    fn as_comb(&self) -> Option<&CombKernel> {
        None
    }
}

/// `D^n` for `n >= 1`.
pub fn discontinuity_words(kernel: &dyn Kernel, n: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::input("discontinuity depth must be >= 1"));
    }
    Ok(kernel.discontinuity_words(n))
}

/// Upper bound on `var^v_n`: the largest bound width over contexts of length
/// `n` ending in `v`, for every next symbol.
///
/// Uses the kernel's closed form when present and otherwise enumerates the
/// `m^(n - |v| + 1)` extensions, refusing when `n + 1 > depth_budget`.
pub fn variation_bound(kernel: &dyn Kernel, v: &[Symbol], n: usize, depth_budget: usize) -> Result<f64> {
    if n < v.len() {
        return Err(Error::input(format!("variation depth {n} shorter than leaf length {}", v.len())));
    }
    if let Some(b) = kernel.analytic_variation(v, n) {
        return Ok(b);
    }
    enumerated_variation(kernel, v, n, depth_budget)
}

/// The enumeration fallback of [`variation_bound`], ignoring closed forms.
pub fn enumerated_variation(kernel: &dyn Kernel, v: &[Symbol], n: usize, depth_budget: usize) -> Result<f64> {
    if n + 1 > depth_budget {
        return Err(Error::resource(format!(
            "generic variation enumeration needs {} symbols, budget is {depth_budget}; \
             raise --budget-depth or use a kernel with a closed-form variation",
            n + 1
        )));
    }
    let alphabet = kernel.alphabet();
    let free = n - v.len();
    let mut context = vec![Symbol(0); n];
    context[free..].copy_from_slice(v);
    let mut worst: f64 = 0.0;
    for prefix in alphabet.words(free) {
        context[..free].copy_from_slice(&prefix);
        for a in alphabet.symbols() {
            worst = worst.max(kernel.bounds(&context, a).width());
        }
    }
    Ok(worst)
}

/// Position of the most recent occurrence of `s` in `context`.
pub(crate) fn last_index_of(context: &[Symbol], s: Symbol) -> Option<usize> {
    context.iter().rposition(|&c| c == s)
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Normalization sandwich and refinement monotonicity over every word up
    /// to `depth`.
    pub fn check_structural_invariants(kernel: &dyn Kernel, depth: usize) {
        let alphabet = kernel.alphabet().clone();
        for len in 0..=depth {
            for w in alphabet.words(len) {
                let parent: Vec<ProbabilityInterval> = alphabet.symbols().map(|a| kernel.bounds(&w, a)).collect();
                let lo: f64 = parent.iter().map(|i| i.lo()).sum();
                let hi: f64 = parent.iter().map(|i| i.hi()).sum();
                assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9, "{} sandwich fails at {w}: {lo} {hi}", kernel.name());
                if len < depth {
                    for older in alphabet.symbols() {
                        let child = w.prepend(older);
                        for (a, p) in alphabet.symbols().zip(&parent) {
                            let c = kernel.bounds(&child, a);
                            assert!(c.within(p), "{} refinement fails at {child} -> {a:?}", kernel.name());
                        }
                    }
                }
            }
        }
    }
}
