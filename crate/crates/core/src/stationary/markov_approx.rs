//! Order-`k` truncation of the transfer operator.
//!
//! States are the words of length `k` in rank order. State `w` moves to
//! `drop_first(w)·a` with the midpoint of `bounds(w, a)`, renormalized over
//! `a`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use super::{EstimateSource, StationaryEstimate};
use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

pub const DEFAULT_STATE_BUDGET: usize = 1 << 20;
pub const POWER_TOL: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct MarkovApprox {
    #[serde(skip)]
    alphabet: Alphabet,
    order: usize,
    #[serde(skip)]
    transitions: Vec<f64>,
    #[serde(skip)]
    stationary: Vec<f64>,
    iterations: usize,
    /// Total-variation distance between `πP` and `π`.
    fixed_point_residual: f64,
    /// Largest `hi - lo` over every state and next symbol.
    max_row_width: f64,
    /// Largest gap between the oldest-`k-1` and newest-`k-1` marginals of `π`.
    shift_residual: f64,
    closed_classes: usize,
    reducible: bool,
}

/// Assembles the truncated chain and runs power iteration from the uniform
/// vector.
pub fn build_markov_approx(kernel: &dyn Kernel, order: usize, state_budget: usize) -> Result<MarkovApprox> {
    if order == 0 {
        return Err(Error::input("markov approximation order must be >= 1"));
    }
    let alphabet = kernel.alphabet().clone();
    let m = alphabet.size();
    let states = m.checked_pow(order as u32).filter(|&s| s <= state_budget).ok_or_else(|| {
        Error::resource(format!(
            "{m}^{order} states exceed the state budget {state_budget}; lower --order or raise --budget-states"
        ))
    })?;

    let rows: Vec<(Vec<f64>, f64)> = (0..states)
        .into_par_iter()
        .map(|r| {
            let w = alphabet.unrank(r, order);
            let bounds: Vec<_> = alphabet.symbols().map(|a| kernel.bounds(&w, a)).collect();
            let width = bounds.iter().map(|b| b.width()).fold(0.0, f64::max);
            let mids: Vec<f64> = bounds.iter().map(|b| b.midpoint()).collect();
            let total: f64 = mids.iter().sum();
            (mids.iter().map(|p| p / total).collect(), width)
        })
        .collect();
    let max_row_width = rows.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    let transitions: Vec<f64> = rows.into_iter().flat_map(|(row, _)| row).collect();

    let mut approx = MarkovApprox {
        alphabet,
        order,
        transitions,
        stationary: vec![1.0 / states as f64; states],
        iterations: 0,
        fixed_point_residual: f64::INFINITY,
        max_row_width,
        shift_residual: 0.0,
        closed_classes: 0,
        reducible: false,
    };
    approx.closed_classes = approx.count_closed_classes();
    approx.reducible = approx.closed_classes > 1;

    let mut step = f64::INFINITY;
    while step >= POWER_TOL {
        if approx.iterations == MAX_POWER_ITERATIONS {
            return Err(Error::Diagnostic {
                message: format!("power iteration did not settle within {MAX_POWER_ITERATIONS} steps"),
                residual: step,
            });
        }
        let next = approx.apply(&approx.stationary);
        step = total_variation(&next, &approx.stationary);
        approx.stationary = next;
        approx.iterations += 1;
    }
    let total: f64 = approx.stationary.iter().sum();
    approx.stationary.iter_mut().for_each(|p| *p /= total);
    approx.fixed_point_residual = total_variation(&approx.apply(&approx.stationary), &approx.stationary);
    approx.shift_residual = approx.compute_shift_residual();
    Ok(approx)
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

impl MarkovApprox {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.stationary.len()
    }

    /// `π_k` indexed by state rank.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Row `r` of the transition matrix over next symbols.
    pub fn row(&self, r: usize) -> &[f64] {
        let m = self.alphabet.size();
        &self.transitions[r * m..(r + 1) * m]
    }

    /// Rank of `drop_first(w)·a` for `w` of rank `r`.
    pub fn successor(&self, r: usize, a: usize) -> usize {
        let m = self.alphabet.size();
        (r % m.pow(self.order as u32 - 1)) * m + a
    }

    /// One step of the dual action `π ↦ πP`, in state order.
    pub fn apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; pi.len()];
        for (r, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let base = self.successor(r, 0);
            for (a, t) in self.row(r).iter().enumerate() {
                next[base + a] += p * t;
            }
        }
        next
    }

    /// `Pf` for a function on states; constant one maps to constant one.
    pub fn apply_function(&self, f: &[f64]) -> Vec<f64> {
        (0..self.states())
            .map(|r| {
                let base = self.successor(r, 0);
                self.row(r).iter().enumerate().map(|(a, t)| t * f[base + a]).sum()
            })
            .collect()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn fixed_point_residual(&self) -> f64 {
        self.fixed_point_residual
    }

    pub fn max_row_width(&self) -> f64 {
        self.max_row_width
    }

    pub fn shift_residual(&self) -> f64 {
        self.shift_residual
    }

    pub fn closed_classes(&self) -> usize {
        self.closed_classes
    }

    pub fn reducible(&self) -> bool {
        self.reducible
    }

    /// Largest `|1 - Σ_a P(w, a)|` over states.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.states()).map(|r| (1.0 - self.row(r).iter().sum::<f64>()).abs()).fold(0.0, f64::max)
    }

    pub fn estimate(&self) -> StationaryEstimate {
        StationaryEstimate::from_top_level(
            EstimateSource::MarkovApprox { order: self.order },
            self.alphabet.clone(),
            self.stationary.clone(),
            self.order,
        )
    }

    fn count_closed_classes(&self) -> usize {
        let n = self.states();
        let mut graph = DiGraph::<(), ()>::with_capacity(n, n * self.alphabet.size());
        let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
        for r in 0..n {
            for (a, &t) in self.row(r).iter().enumerate() {
                if t > 0.0 {
                    graph.add_edge(nodes[r], nodes[self.successor(r, a)], ());
                }
            }
        }
        let sccs = tarjan_scc(&graph);
        let mut component = vec![0; n];
        for (c, scc) in sccs.iter().enumerate() {
            for node in scc {
                component[node.index()] = c;
            }
        }
        let mut closed = vec![true; sccs.len()];
        for e in graph.raw_edges() {
            let (s, t) = (component[e.source().index()], component[e.target().index()]);
            if s != t {
                closed[s] = false;
            }
        }
        closed.iter().filter(|&&c| c).count()
    }

    fn compute_shift_residual(&self) -> f64 {
        if self.order == 1 {
            return 0.0;
        }
        let m = self.alphabet.size();
        let width = m.pow(self.order as u32 - 1);
        let (mut oldest, mut newest) = (vec![0.0; width], vec![0.0; width]);
        for (r, &p) in self.stationary.iter().enumerate() {
            oldest[r / m] += p;
            newest[r % width] += p;
        }
        oldest.iter().zip(&newest).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
