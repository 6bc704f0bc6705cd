//! Randomized invariant suites shared by the invariant and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use gmeasure_core::kernels::{
    CombKernelSpec, LongMemoryKernelSpec, MarkovKernelSpec, QFamily, Sequence, Tail, ThreeLetterKernelSpec,
};
use gmeasure_core::pressure::sup_gn_bound;
use gmeasure_core::stationary::build_markov_approx;
use gmeasure_core::trees::{build_tree, skeleton_leaves, tiling_violation};
use gmeasure_core::{Alphabet, Kernel, KernelSpec, Symbol, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 128;

/// Runs `test` on `CASES` deterministic draws; `Err` carries the minimal
/// failing input.
pub fn run_suite<S>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<u32, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map(|_| CASES).map_err(|e| e.to_string())
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn comb_spec() -> impl Strategy<Value = CombKernelSpec> {
    (prop::collection::vec(unit(), 1..5), unit(), 0..3usize).prop_map(|(values, q_inf, tail)| {
        let tail = match tail {
            0 => Tail::Periodic,
            1 => Tail::Constant { value: values[0] },
            _ => Tail::Zero,
        };
        CombKernelSpec { q: Sequence::List { values, tail }, q_inf }
    })
}

fn long_memory_spec() -> impl Strategy<Value = LongMemoryKernelSpec> {
    (0.01..0.49f64, 0.3..0.99f64).prop_map(|(eps, alpha)| LongMemoryKernelSpec {
        eps,
        q_family: QFamily::Geometric { alpha, exponent_offset: 1 },
    })
}

fn three_letter_spec() -> impl Strategy<Value = ThreeLetterKernelSpec> {
    (prop::collection::vec(0..4usize, 6), 0.0..0.014f64, 0.0..0.5f64).prop_map(|(labels, scale, ratio)| {
        let mut sets = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
        for (d, &l) in labels.iter().enumerate() {
            if l < 3 {
                sets[l].insert(d + 1);
            }
        }
        let [n0, n1, n2] = sets;
        ThreeLetterKernelSpec { n0, n1, n2, theta: Sequence::Geometric { scale, ratio } }
    })
}

/// Rows of positive weights, normalized; `m^order` rows of `m` entries.
fn markov_spec() -> impl Strategy<Value = MarkovKernelSpec> {
    (2..4usize, 0..3usize)
        .prop_flat_map(|(m, order)| {
            let rows = m.pow(order as u32);
            (Just(m), Just(order), prop::collection::vec(prop::collection::vec(0.01..1.0f64, m), rows))
        })
        .prop_map(|(m, order, weights)| markov_from_weights(m, order, weights))
}

pub fn markov_from_weights(m: usize, order: usize, weights: Vec<Vec<f64>>) -> MarkovKernelSpec {
    let labels: String = "abcd".chars().take(m).collect();
    let alphabet = Alphabet::new(labels.chars()).unwrap();
    let transitions: BTreeMap<String, Vec<f64>> = weights
        .into_iter()
        .enumerate()
        .map(|(r, w)| {
            let total: f64 = w.iter().sum();
            (alphabet.render(&alphabet.unrank(r, order)), w.iter().map(|x| x / total).collect())
        })
        .collect();
    MarkovKernelSpec { alphabet: labels, order, transitions }
}

pub fn kernel_spec() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        comb_spec().prop_map(KernelSpec::Comb),
        long_memory_spec().prop_map(KernelSpec::LongMemory),
        three_letter_spec().prop_map(KernelSpec::ThreeLetter),
        markov_spec().prop_map(KernelSpec::Markov),
    ]
}

fn build(spec: &KernelSpec) -> Result<Arc<dyn Kernel>, TestCaseError> {
    spec.build().map_err(|e| TestCaseError::fail(format!("spec rejected: {e}")))
}

fn random_word(alphabet: &Alphabet, indices: &[usize]) -> Word {
    Word::from_symbols(indices.iter().map(|i| Symbol((i % alphabet.size()) as u8)).collect())
}

type Indices = Vec<usize>;

fn kernel_and_word(max_len: usize) -> impl Strategy<Value = (KernelSpec, Indices)> {
    (kernel_spec(), prop::collection::vec(0..12usize, 0..=max_len))
}

/// `Σ_a lo(w, a) <= 1 <= Σ_a hi(w, a)`.
pub fn normalization_sandwich() -> Result<u32, String> {
    run_suite(kernel_and_word(10), |(spec, idx)| {
        let k = build(&spec)?;
        let w = random_word(k.alphabet(), &idx);
        let (lo, hi) = k.alphabet().symbols().fold((0.0, 0.0), |(lo, hi), a| {
            let b = k.bounds(&w, a);
            (lo + b.lo(), hi + b.hi())
        });
        prop_assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9, "{} at {w}: {lo} {hi}", spec.kind());
        Ok(())
    })
}

/// `bounds(b·w, a) ⊆ bounds(w, a)` for every older symbol `b`.
pub fn refinement_monotonicity() -> Result<u32, String> {
    run_suite(kernel_and_word(10), |(spec, idx)| {
        let k = build(&spec)?;
        let w = random_word(k.alphabet(), &idx);
        for older in k.alphabet().symbols() {
            let child = w.prepend(older);
            for a in k.alphabet().symbols() {
                let (p, c) = (k.bounds(&w, a), k.bounds(&child, a));
                prop_assert!(c.within(&p), "{} at {child} -> {a:?}: {c:?} not within {p:?}", spec.kind());
            }
        }
        Ok(())
    })
}

/// `drop_last(extend(w, a)) = w`, and parse inverts render.
pub fn extend_drop_round_trip() -> Result<u32, String> {
    let strategy = (2..6usize, prop::collection::vec(0..12usize, 0..24), 0..12usize);
    run_suite(strategy, |(m, idx, a)| {
        let labels: String = "abcdef".chars().take(m).collect();
        let alphabet = Alphabet::new(labels.chars()).unwrap();
        let w = random_word(&alphabet, &idx);
        let a = Symbol((a % m) as u8);
        let extended = w.extend(a);
        prop_assert_eq!(extended.last(), Some(a));
        prop_assert_eq!(extended.drop_last().unwrap(), w.clone());
        prop_assert_eq!(alphabet.parse(&alphabet.render(&w)).unwrap(), w.clone());
        prop_assert_eq!(alphabet.unrank(alphabet.rank(&w), w.len()), w);
        Ok(())
    })
}

/// Truncated chains are row-stochastic and their power-iteration limit is a
/// fixed point within 1e-10.
pub fn fixed_point_residual() -> Result<u32, String> {
    run_suite((kernel_spec(), 1..7usize), |(spec, order)| {
        let k = build(&spec)?;
        let approx = build_markov_approx(k.as_ref(), order, 1 << 12)
            .map_err(|e| TestCaseError::fail(format!("{}: {e}", spec.kind())))?;
        prop_assert!(approx.row_sum_residual() < 1e-10);
        prop_assert!(approx.fixed_point_residual() < 1e-10, "{}: {}", spec.kind(), approx.fixed_point_residual());
        let total: f64 = approx.stationary().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(approx.stationary().iter().all(|&p| p >= 0.0));
        Ok(())
    })
}

/// Every word of length `depth` has exactly one suffix among the finite
/// skeleton leaves or lies in `D^depth`.
pub fn context_tree_tiling() -> Result<u32, String> {
    run_suite((kernel_spec(), 1..8usize), |(spec, depth)| {
        let k = build(&spec)?;
        let tree = build_tree(k.as_ref(), depth).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let skeleton = skeleton_leaves(&tree);
        prop_assert_eq!(tiling_violation(&tree, &skeleton), None, "{}", spec.kind());
        Ok(())
    })
}

/// Positive Markov kernels with `inf g = eps` satisfy
/// `ub(sup_B g_n) <= (1 - (m - 1) eps)^n`.
pub fn contraction_bound() -> Result<u32, String> {
    run_suite((markov_spec(), 1..=10usize, prop::collection::vec(0..12usize, 10)), |(spec, n, idx)| {
        let k = spec.build().unwrap();
        let m = k.alphabet().size();
        let eps = spec.transitions.values().flatten().copied().fold(f64::INFINITY, f64::min);
        let b = random_word(k.alphabet(), &idx[..n]);
        let ub = sup_gn_bound(&k, &b).unwrap().ub;
        let bound = (1.0 - (m - 1) as f64 * eps).powi(n as i32);
        prop_assert!(ub <= bound * (1.0 + 1e-12), "{b}: {ub} > {bound}");
        Ok(())
    })
}

/// Same bound for two-symbol combs whose `q` values and `q_inf` lie in
/// `[eps, 1 - eps]`.
pub fn comb_contraction_bound() -> Result<u32, String> {
    let strategy =
        (0.01..0.5f64, prop::collection::vec(unit(), 1..5), unit(), 1..=10usize, prop::collection::vec(0..2usize, 10));
    run_suite(strategy, |(eps, raw, q_inf, n, idx)| {
        let squeeze = |x: f64| eps + (1.0 - 2.0 * eps) * x;
        let spec = CombKernelSpec {
            q: Sequence::List { values: raw.into_iter().map(squeeze).collect(), tail: Tail::Periodic },
            q_inf: squeeze(q_inf),
        };
        let k = spec.build().unwrap();
        let b = random_word(k.alphabet(), &idx[..n]);
        let ub = sup_gn_bound(&k, &b).unwrap().ub;
        prop_assert!(ub <= (1.0 - eps).powi(n as i32) * (1.0 + 1e-12), "{b}: {ub}");
        Ok(())
    })
}
