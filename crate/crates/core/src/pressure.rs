//! Pressure of the discontinuity set, the weak non-nullness infimum and the
//! sufficient conditions built from the growth rate.
//!
//! Non-finite values (the pressure of an empty set is `-inf`) serialize to
//! JSON `null`.

use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::stationary::H4Report;
use crate::trees::{check_h3, growth_rate, DiscontinuityTree, GrowthRate, H3Report};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnBound {
    /// Product of per-factor suprema, an upper bound on `sup_B g_n`.
    pub ub: f64,
    /// `g_n` at one completion of `B`, a lower bound on `sup_B g_n`.
    pub lb: f64,
}

/// Bounds on `sup_B g_n` with the kernel's representative completion.
pub fn sup_gn_bound(kernel: &dyn Kernel, b: &[Symbol]) -> Result<GnBound> {
    sup_gn_bound_with_fill(kernel, b, kernel.representative_fill())
}

/// Factor `i` of `g_n` on `B` is `g` at next symbol `B[n-i-1]` with visible
/// context `B[..n-i-1]`.
pub fn sup_gn_bound_with_fill(kernel: &dyn Kernel, b: &[Symbol], fill: Symbol) -> Result<GnBound> {
    if b.is_empty() {
        return Err(Error::input("g_n bound needs a word of length >= 1"));
    }
    let (mut ub, mut lb) = (1.0, 1.0);
    for end in (0..b.len()).rev() {
        let (context, next) = (&b[..end], b[end]);
        ub *= kernel.bounds(context, next).hi();
        lb *= kernel.value_with_fill(context, fill, next);
    }
    Ok(GnBound { ub, lb })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureVerdict {
    NegativeToDepth,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureRow {
    pub n: usize,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureCurve {
    pub per_n: Vec<PressureRow>,
    pub verdict: PressureVerdict,
}

impl PressureCurve {
    /// Plot-ready CSV with header `n,upper,lower`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,upper,lower\n");
        for r in &self.per_n {
            out.push_str(&format!("{},{},{}\n", r.n, r.upper, r.lower));
        }
        out
    }

    pub fn last_upper(&self) -> f64 {
        self.per_n.last().map_or(f64::NEG_INFINITY, |r| r.upper)
    }
}

/// Trailing points used by the monotonicity part of the verdict.
const VERDICT_WINDOW: usize = 3;

/// `(1/n) log Σ_{B ∈ D^n}` of the upper and lower `g_n` bounds, `n = 1..=n_max`.
///
/// Summation runs in rank order so the result does not depend on scheduling.
pub fn pressure_curve(kernel: &dyn Kernel, tree: &DiscontinuityTree, n_max: usize) -> Result<PressureCurve> {
    if n_max == 0 {
        return Err(Error::input("pressure depth must be >= 1"));
    }
    if tree.depth() < n_max {
        return Err(Error::input(format!("tree depth {} is below pressure depth {n_max}", tree.depth())));
    }
    let mut per_n = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let bounds: Vec<GnBound> = tree.level(n).par_iter().map(|b| sup_gn_bound(kernel, b)).collect::<Result<_>>()?;
        let (ub, lb) = bounds.iter().fold((0.0, 0.0), |(u, l), g| (u + g.ub, l + g.lb));
        per_n.push(PressureRow { n, upper: ub.ln() / n as f64, lower: lb.ln() / n as f64 });
    }
    let verdict = pressure_verdict(&per_n);
    Ok(PressureCurve { per_n, verdict })
}

fn pressure_verdict(per_n: &[PressureRow]) -> PressureVerdict {
    let tail = &per_n[per_n.len().saturating_sub(VERDICT_WINDOW)..];
    let last = tail[tail.len() - 1].upper;
    let non_increasing =
        tail.windows(2).all(|w| w[1].upper <= w[0].upper + crate::interval::TOL || w[1].upper == f64::NEG_INFINITY);
    if last < 0.0 && non_increasing {
        PressureVerdict::NegativeToDepth
    } else {
        PressureVerdict::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H1Level {
    #[serde(rename = "N")]
    pub n: usize,
    /// `None` when `D^{N+1}` is empty and `E_N` has no contexts.
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Report {
    pub holds: bool,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub per_n: Vec<H1Level>,
}

/// Lower bound on `inf_{E_N} g`: the smallest `lo` over contexts
/// `drop_last(w)`, `w ∈ D^{N+1}`, and every next symbol. `E_0` is the whole
/// space.
pub fn eps_n(kernel: &dyn Kernel, tree: &DiscontinuityTree, n: usize) -> Result<Option<f64>> {
    if n == 0 {
        return Ok(Some(min_lo(kernel, &[])));
    }
    if tree.depth() < n + 1 {
        return Err(Error::input(format!("E_{n} needs tree depth >= {}", n + 1)));
    }
    let level = tree.level(n + 1);
    if level.is_empty() {
        return Ok(None);
    }
    Ok(Some(level.iter().map(|w| min_lo(kernel, &w[..n])).fold(f64::INFINITY, f64::min)))
}

fn min_lo(kernel: &dyn Kernel, context: &[Symbol]) -> f64 {
    kernel.alphabet().symbols().map(|a| kernel.bounds(context, a).lo()).fold(f64::INFINITY, f64::min)
}

/// The smallest `N <= n_max` with `eps_N > 0`.
pub fn check_h1(kernel: &dyn Kernel, tree: &DiscontinuityTree, n_max: usize) -> Result<H1Report> {
    let per_n = (0..=n_max).map(|n| Ok(H1Level { n, eps: eps_n(kernel, tree, n)? })).collect::<Result<Vec<_>>>()?;
    let first = per_n.iter().find(|l| l.eps.is_some_and(|e| e > 0.0));
    Ok(H1Report { holds: first.is_some(), n: first.map(|l| l.n), eps: first.and_then(|l| l.eps), per_n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorollaryRoute {
    #[serde(rename = "H1'+H2'")]
    NonNullGrowth,
    #[serde(rename = "H1+H2'+H3")]
    WeakNonNullGrowthShift,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub route: CorollaryRoute,
    pub holds: bool,
    pub gr: f64,
    pub eps: Option<f64>,
    /// `1 / (1 - (m - 1) eps)`; infinite when `(m - 1) eps >= 1`.
    pub threshold: Option<f64>,
    pub details: String,
}

/// Compares the growth estimate against `1 / (1 - (m - 1) eps)` as
/// `gr · (1 - (m - 1) eps) < 1`.
pub fn check_corollary(alphabet_size: usize, growth: &GrowthRate, h1: &H1Report, h3: &H3Report) -> CorollaryReport {
    let gr = growth.estimate;
    let (Some(n), Some(eps)) = (h1.n, h1.eps) else {
        return CorollaryReport {
            route: CorollaryRoute::None,
            holds: false,
            gr,
            eps: None,
            threshold: None,
            details: "no N with a positive infimum on E_N".into(),
        };
    };
    let contraction = 1.0 - (alphabet_size - 1) as f64 * eps;
    let threshold = 1.0 / contraction.max(0.0);
    let growth_ok = gr * contraction < 1.0;
    let (route, holds, details) = if n == 0 {
        (CorollaryRoute::NonNullGrowth, growth_ok, format!("gr = {gr} against threshold {threshold} with eps = {eps}"))
    } else {
        (
            CorollaryRoute::WeakNonNullGrowthShift,
            growth_ok && h3.holds_to_depth,
            format!(
                "N = {n}, gr = {gr} against threshold {threshold} with eps = {eps}; shift stability {}",
                if h3.holds_to_depth { "holds to depth" } else { "fails" }
            ),
        )
    };
    CorollaryReport { route, holds, gr, eps: Some(eps), threshold: Some(threshold), details }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonNullReport {
    pub holds: bool,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub verdict: PressureVerdict,
    pub n_max: usize,
    pub last_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthConditionReport {
    pub holds: bool,
    pub gr: f64,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    #[serde(rename = "H1")]
    pub h1: H1Report,
    #[serde(rename = "H1_prime")]
    pub h1_prime: NonNullReport,
    #[serde(rename = "H2")]
    pub h2: H2Report,
    #[serde(rename = "H2_prime")]
    pub h2_prime: GrowthConditionReport,
    #[serde(rename = "H3")]
    pub h3: H3Report,
    #[serde(rename = "H4")]
    pub h4: Option<H4Report>,
    pub growth: GrowthRate,
    pub corollary: CorollaryReport,
    pub pressure: PressureCurve,
}

/// Runs every tree-level check. `tree` must reach `max(h1_max + 1, n_max, 2)`.
pub fn hypothesis_report(
    kernel: &dyn Kernel,
    tree: &DiscontinuityTree,
    h1_max: usize,
    n_max: usize,
    h4: Option<H4Report>,
) -> Result<HypothesisReport> {
    let h1 = check_h1(kernel, tree, h1_max)?;
    let eps0 = eps_n(kernel, tree, 0)?.unwrap_or(0.0);
    let pressure = pressure_curve(kernel, tree, n_max)?;
    let growth = growth_rate(tree)?;
    let h3 = check_h3(tree)?;
    let corollary = check_corollary(kernel.alphabet().size(), &growth, &h1, &h3);
    let contraction = h1.eps.map(|e| 1.0 - (kernel.alphabet().size() - 1) as f64 * e);
    Ok(HypothesisReport {
        h1_prime: NonNullReport { holds: eps0 > 0.0, eps: eps0 },
        h2: H2Report { verdict: pressure.verdict, n_max, last_upper: pressure.last_upper() },
        h2_prime: GrowthConditionReport {
            holds: contraction.is_some_and(|c| growth.estimate * c < 1.0),
            gr: growth.estimate,
            threshold: corollary.threshold,
        },
        h1,
        h3,
        h4,
        growth,
        corollary,
        pressure,
    })
}
