//! One function per subcommand. Each returns a JSON result and a CSV view.

use std::sync::Arc;

use gmeasure_core::kernels::Kernel;
use gmeasure_core::pressure::{hypothesis_report, pressure_curve};
use gmeasure_core::simulate::{
    decay_diagnostic, empirical_cylinders, sample_path, DecayReport, SimConfig, DEFAULT_PERSISTENCE_SLOPE,
};
use gmeasure_core::stationary::{
    build_markov_approx, check_h4, discontinuity_mass, renewal_oracle, StationaryEstimate, Summability,
};
use gmeasure_core::trees::{build_tree, check_h3, growth_rate, skeleton_leaves, DiscontinuityTree};
use gmeasure_core::{Error, KernelSpec};
use serde_json::{json, Value};

use crate::config::{EstimateChoice, RunConfig};
use crate::CliError;

pub struct Artifact {
    pub result: Value,
    pub csv: String,
    /// Raw symbol text of a sampled path, when one was drawn.
    pub path_text: Option<String>,
}

pub struct Context<'a> {
    pub spec: &'a KernelSpec,
    pub kernel: Arc<dyn Kernel>,
    pub cfg: &'a RunConfig,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

fn warn(message: &str) {
    eprintln!("gmeasure: warning: {message}");
}

impl Context<'_> {
    fn tree(&self, depth: usize) -> Result<DiscontinuityTree, CliError> {
        Ok(build_tree(self.kernel.as_ref(), depth)?)
    }

    /// The configured estimate with its diagnostics; `None` when the source is
    /// switched off or has no stationary measure.
    fn estimate(&self) -> Result<(Option<StationaryEstimate>, Value), CliError> {
        match self.cfg.estimate {
            EstimateChoice::None => Ok((None, Value::Null)),
            EstimateChoice::Markov => {
                let approx = build_markov_approx(self.kernel.as_ref(), self.cfg.order, self.cfg.budget_states)?;
                if approx.reducible() {
                    warn(&format!(
                        "truncated chain has {} closed classes; the estimate is one of several",
                        approx.closed_classes()
                    ));
                }
                Ok((Some(approx.estimate()), to_value(&approx)))
            }
            EstimateChoice::Renewal => {
                let KernelSpec::Comb(comb) = self.spec else {
                    return Err(Error::input(format!(
                        "the renewal estimate needs a comb kernel, got {}",
                        self.spec.kind()
                    ))
                    .into());
                };
                let oracle = renewal_oracle(comb, self.cfg.tail_terms)?;
                let diagnostics = json!({
                    "summability": oracle.summability(),
                    "note": oracle.note(),
                    "normalization": oracle.normalization(),
                    "normalization_error": oracle.normalization_error(),
                    "tail_rate": oracle.tail_rate(),
                });
                if oracle.summability() != Summability::Summable {
                    warn(&format!("no renewal-stationary measure: {}", oracle.note()));
                    return Ok((None, diagnostics));
                }
                Ok((Some(StationaryEstimate::from_renewal(Arc::new(oracle))?), diagnostics))
            }
        }
    }

    /// Depth the estimate can support, capped at `cfg.depth`.
    fn estimate_depth(&self, est: &StationaryEstimate) -> usize {
        est.max_len().map_or(self.cfg.depth, |k| k.min(self.cfg.depth))
    }
}

pub fn tree(cx: &Context) -> Result<Artifact, CliError> {
    let tree = cx.tree(cx.cfg.depth)?;
    let growth = growth_rate(&tree)?;
    let h3 = check_h3(&tree)?;
    let skeleton = skeleton_leaves(&tree);
    let alphabet = cx.kernel.alphabet();
    let leaves: Vec<String> = skeleton.finite_leaves().iter().map(|w| alphabet.render(w)).collect();
    let mut csv = String::from("n,count,root\n");
    for (i, (count, root)) in tree.counts().iter().zip(&growth.per_level).enumerate() {
        csv.push_str(&format!("{},{count},{root}\n", i + 1));
    }
    let result = json!({
        "tree": tree.export(),
        "counts": tree.counts(),
        "growth": growth,
        "H3": h3,
        "skeleton_leaves": leaves,
    });
    Ok(Artifact { result, csv, path_text: None })
}

pub fn pressure(cx: &Context) -> Result<Artifact, CliError> {
    let tree = cx.tree(cx.cfg.n_max)?;
    let curve = pressure_curve(cx.kernel.as_ref(), &tree, cx.cfg.n_max)?;
    Ok(Artifact { csv: curve.to_csv(), result: to_value(&curve), path_text: None })
}

pub fn hypotheses(cx: &Context) -> Result<Artifact, CliError> {
    let kernel = cx.kernel.as_ref();
    let tree = cx.tree(cx.cfg.tree_depth())?;
    let (est, _) = cx.estimate()?;
    let h4 = match &est {
        Some(est) => {
            let depth = cx.estimate_depth(est);
            Some(check_h4(kernel, &skeleton_leaves(&tree), est, depth, cx.cfg.budget_depth)?)
        }
        None => None,
    };
    let report = hypothesis_report(kernel, &tree, cx.cfg.h1_max, cx.cfg.n_max, h4)?;
    Ok(Artifact { csv: report.pressure.to_csv(), result: to_value(&report), path_text: None })
}

pub fn stationary(cx: &Context) -> Result<Artifact, CliError> {
    let (est, diagnostics) = cx.estimate()?;
    let Some(est) = est else {
        return Ok(Artifact {
            result: json!({ "estimate": null, "diagnostics": diagnostics, "discontinuity_mass": null }),
            csv: String::from("word,probability\n"),
            path_text: None,
        });
    };
    let order = est.max_len().unwrap_or(cx.cfg.order);
    let depth = cx.estimate_depth(&est);
    let tree = cx.tree(depth)?;
    let mass = discontinuity_mass(cx.kernel.as_ref(), &est, &tree, depth)?;
    let export = est.export(order)?;
    let mut csv = String::from("word,probability\n");
    for (w, p) in &export.cylinders {
        csv.push_str(&format!("{w},{p}\n"));
    }
    let result = json!({ "estimate": export, "diagnostics": diagnostics, "discontinuity_mass": mass });
    Ok(Artifact { result, csv, path_text: None })
}

fn decay_csv(report: &DecayReport) -> String {
    let mut csv = String::from("n,mass,ceiling\n");
    for r in &report.rows {
        csv.push_str(&format!("{},{},{}\n", r.n, r.mass, r.ceiling));
    }
    csv
}

pub fn simulate(cx: &Context) -> Result<Artifact, CliError> {
    let cfg = cx.cfg;
    let sim = SimConfig {
        seed: cfg.seed,
        burn_in: cfg.burn_in,
        length: cfg.length,
        init: cfg.init.clone(),
        truncation_depth: cfg.truncation_depth,
        midpoint_fallback: cfg.midpoint_fallback,
    };
    let kernel = cx.kernel.as_ref();
    let path = sample_path(kernel, &sim)?;
    if path.nondegenerate_draws > 0 {
        warn(&format!(
            "{} draws used interval midpoints; the window of {} symbols did not determine g",
            path.nondegenerate_draws, cfg.truncation_depth
        ));
    }
    let max_len = cfg.empirical_max_len;
    let est = empirical_cylinders(&path.symbols, kernel.alphabet(), max_len)?;
    let tree = cx.tree(max_len.max(2))?;
    let decay = decay_diagnostic(kernel, &tree, &est, max_len, DEFAULT_PERSISTENCE_SLOPE)?;
    let result = json!({
        "path": path,
        "length": path.symbols.len(),
        "estimate": est.export(max_len)?,
        "decay": decay,
    });
    Ok(Artifact { csv: decay_csv(&decay), result, path_text: Some(kernel.alphabet().render(&path.symbols)) })
}
