//! Path sampling and empirical checks of stationarity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::stationary::{
    discontinuity_mass, renewal_oracle, EstimateSource, MassRow, StationaryEstimate, Summability, DEFAULT_TAIL_TERMS,
};
use crate::trees::DiscontinuityTree;

/// Generator recorded in every simulation report.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seeded with seed_from_u64";

/// Slope above which the decay diagnostic flags persistent mass near `D`.
pub const DEFAULT_PERSISTENCE_SLOPE: f64 = -0.1;

/// Minimum path length per cylinder cell.
const CELLS_PER_WORD: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Init {
    /// `word` (most recent last) preceded by `padding` repeated.
    Word { word: String, padding: char },
    /// A comb-kernel past `1 0^ℓ` with `ℓ` drawn from the renewal law.
    RenewalStationary,
}

fn default_fallback() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub burn_in: usize,
    pub length: usize,
    pub init: Init,
    /// Number of most recent symbols handed to the kernel.
    pub truncation_depth: usize,
    /// Sample from interval midpoints when the window leaves `g` undetermined.
    #[serde(default = "default_fallback")]
    pub midpoint_fallback: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::input("simulation length must be >= 1"));
        }
        if self.truncation_depth == 0 {
            return Err(Error::input("truncation depth must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    #[serde(skip)]
    pub symbols: Vec<Symbol>,
    pub seed: u64,
    pub rng: &'static str,
    /// Steps (burn-in included) drawn from midpoints rather than exact values.
    pub nondegenerate_draws: u64,
}

fn initial_history(kernel: &dyn Kernel, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Symbol>> {
    let alphabet = kernel.alphabet();
    match &cfg.init {
        Init::Word { word, padding } => {
            let pad = alphabet.symbol(*padding)?;
            let word = alphabet.parse(word)?;
            let mut history = vec![pad; cfg.truncation_depth.saturating_sub(word.len())];
            history.extend_from_slice(&word);
            Ok(history)
        }
        Init::RenewalStationary => {
            let comb = kernel.as_comb().ok_or_else(|| {
                Error::input(format!("renewal-stationary init needs a comb kernel, got {}", kernel.name()))
            })?;
            let oracle = renewal_oracle(comb.spec(), DEFAULT_TAIL_TERMS)?;
            if oracle.summability() != Summability::Summable {
                return Err(Error::Simulation(format!("no renewal-stationary start: {}", oracle.note())));
            }
            let l = oracle.sample_distance(rng.random::<f64>())?;
            let mut history = vec![Symbol(1)];
            history.extend(std::iter::repeat_n(Symbol(0), l));
            Ok(history)
        }
    }
}

/// Samples `burn_in + length` steps and keeps the last `length`.
///
/// Identical kernel, seed and configuration give an identical path.
pub fn sample_path(kernel: &dyn Kernel, cfg: &SimConfig) -> Result<SamplePath> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = initial_history(kernel, cfg, &mut rng)?;
    let start = history.len();
    let steps = cfg.burn_in + cfg.length;
    history.reserve(steps);
    let symbols: Vec<Symbol> = kernel.alphabet().symbols().collect();
    let mut probs = vec![0.0; symbols.len()];
    let mut nondegenerate = 0u64;
    for _ in 0..steps {
        let context = &history[history.len().saturating_sub(cfg.truncation_depth)..];
        let mut exact = true;
        for (p, &a) in probs.iter_mut().zip(&symbols) {
            let b = kernel.bounds(context, a);
            exact &= b.is_degenerate();
            *p = b.midpoint();
        }
        if !exact {
            if !cfg.midpoint_fallback {
                return Err(Error::Simulation(format!(
                    "g is not determined by the context {:?}; raise the truncation depth or allow midpoint fallback",
                    kernel.alphabet().render(context)
                )));
            }
            nondegenerate += 1;
        }
        let total: f64 = probs.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = symbols[symbols.len() - 1];
        for (&p, &a) in probs.iter().zip(&symbols) {
            if u < p {
                pick = a;
                break;
            }
            u -= p;
        }
        history.push(pick);
    }
    let symbols = history.split_off(start + cfg.burn_in);
    Ok(SamplePath { symbols, seed: cfg.seed, rng: RNG_ALGORITHM, nondegenerate_draws: nondegenerate })
}

/// Independent paths, one per seed, sampled concurrently.
pub fn sample_replicas(kernel: &dyn Kernel, cfg: &SimConfig, seeds: &[u64]) -> Vec<Result<SamplePath>> {
    seeds.par_iter().map(|&seed| sample_path(kernel, &SimConfig { seed, ..cfg.clone() })).collect()
}

/// Sliding-window frequencies of every word up to `max_len`.
///
/// Every length uses the same windows (those ending at `t >= max_len - 1`),
/// so additivity holds exactly.
pub fn empirical_cylinders(path: &[Symbol], alphabet: &Alphabet, max_len: usize) -> Result<StationaryEstimate> {
    if max_len == 0 {
        return Err(Error::input("empirical cylinder length must be >= 1"));
    }
    let cells =
        alphabet.size().checked_pow(max_len as u32).ok_or_else(|| Error::resource("cylinder table size overflows"))?;
    let needed = cells.saturating_mul(CELLS_PER_WORD);
    if path.len() < needed {
        return Err(Error::resource(format!(
            "path of length {} is shorter than {CELLS_PER_WORD} x {cells} = {needed} needed for words up to length {max_len}",
            path.len()
        )));
    }
    let m = alphabet.size();
    let mut counts = vec![0u64; cells];
    let mut rank = 0usize;
    for (t, s) in path.iter().enumerate() {
        rank = (rank * m + s.index()) % cells;
        if t + 1 >= max_len {
            counts[rank] += 1;
        }
    }
    let windows = (path.len() + 1 - max_len) as f64;
    let top = counts.into_iter().map(|c| c as f64 / windows).collect();
    Ok(StationaryEstimate::from_top_level(
        EstimateSource::Empirical { length: path.len() },
        alphabet.clone(),
        top,
        max_len,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub batches: usize,
}

/// Mean with a batch-means standard error over `batches` equal blocks.
pub fn batch_means(values: &[f64], batches: usize) -> Result<BatchEstimate> {
    if batches < 2 || values.len() < batches {
        return Err(Error::input(format!(
            "batch means needs >= 2 batches and one value per batch, got {} values",
            values.len()
        )));
    }
    let size = values.len() / batches;
    let means: Vec<f64> =
        values.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(BatchEstimate { mean, standard_error: (var / batches as f64).sqrt(), batches })
}

/// Frequency of `w` over windows ending at `t >= |w| - 1`, with a batch-means
/// standard error.
pub fn word_frequency(path: &[Symbol], w: &[Symbol], batches: usize) -> Result<BatchEstimate> {
    if w.is_empty() || path.len() < w.len() {
        return Err(Error::input("word must be nonempty and no longer than the path"));
    }
    let hits: Vec<f64> = path.windows(w.len()).map(|win| if win == w { 1.0 } else { 0.0 }).collect();
    batch_means(&hits, batches)
}

/// Least-squares slope of `y` on `x`; needs two distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub source: String,
    pub rows: Vec<MassRow>,
    /// Fitted slope of `log mass` against `n` over levels with positive mass.
    pub slope: Option<f64>,
    pub persistent_mass: bool,
}

/// Mass of `D^n` under `est` next to the pressure ceiling, with a log-linear
/// fit. Mass is flagged persistent when the slope exceeds `persistence_slope`.
pub fn decay_diagnostic(
    kernel: &dyn Kernel,
    tree: &DiscontinuityTree,
    est: &StationaryEstimate,
    n_max: usize,
    persistence_slope: f64,
) -> Result<DecayReport> {
    let rows = discontinuity_mass(kernel, est, tree, n_max)?;
    let points: Vec<(f64, f64)> = rows.iter().filter(|r| r.mass > 0.0).map(|r| (r.n as f64, r.mass.ln())).collect();
    let slope = least_squares_slope(&points);
    Ok(DecayReport {
        source: est.source().name().into(),
        rows,
        slope,
        persistent_mass: slope.is_some_and(|s| s >= persistence_slope),
    })
}

/// [`decay_diagnostic`] on the sliding-window frequencies of a path.
pub fn decay_from_path(
    kernel: &dyn Kernel,
    tree: &DiscontinuityTree,
    path: &[Symbol],
    n_max: usize,
) -> Result<DecayReport> {
    let est = empirical_cylinders(path, kernel.alphabet(), n_max)?;
    decay_diagnostic(kernel, tree, &est, n_max, DEFAULT_PERSISTENCE_SLOPE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{CombKernelSpec, MarkovKernelSpec, Sequence};
    use crate::trees::build_tree;

    fn cfg(seed: u64, length: usize) -> SimConfig {
        SimConfig {
            seed,
            burn_in: 100,
            length,
            init: Init::Word { word: String::new(), padding: '1' },
            truncation_depth: 32,
            midpoint_fallback: true,
        }
    }

    #[test]
    fn same_seed_same_path() {
        let k = CombKernelSpec::alternating(0.2, 0.5).build().unwrap();
        let a = sample_path(&k, &cfg(7, 5000)).unwrap();
        let b = sample_path(&k, &cfg(7, 5000)).unwrap();
        let c = sample_path(&k, &cfg(8, 5000)).unwrap();
        assert_eq!(a.symbols, b.symbols);
        assert_ne!(a.symbols, c.symbols);
        assert_eq!(a.symbols.len(), 5000);
    }

    #[test]
    fn iid_frequency_within_three_se() {
        let k = MarkovKernelSpec::iid("01", &[0.7, 0.3]).build().unwrap();
        let p = sample_path(&k, &cfg(1, 200_000)).unwrap();
        let f = word_frequency(&p.symbols, &[Symbol(1)], 100).unwrap();
        assert!((f.mean - 0.3).abs() < 3.0 * f.standard_error, "{f:?}");
        assert_eq!(p.nondegenerate_draws, 0);
    }

    #[test]
    fn markov_transition_counts_match_matrix() {
        let spec = MarkovKernelSpec {
            alphabet: "ab".into(),
            order: 1,
            transitions: [("a".to_string(), vec![0.9, 0.1]), ("b".to_string(), vec![0.4, 0.6])].into(),
        };
        let k = spec.build().unwrap();
        let c = SimConfig { init: Init::Word { word: "a".into(), padding: 'a' }, ..cfg(3, 200_000) };
        let p = sample_path(&k, &c).unwrap();
        let (a, b) = (Symbol(0), Symbol(1));
        // P(b | a) = f(ab) / f(a); standard error from the binomial count
        let from_a = p.symbols[..p.symbols.len() - 1].iter().filter(|&&s| s == a).count() as f64;
        let ab = p.symbols.windows(2).filter(|w| w == &[a, b]).count() as f64;
        let phat = ab / from_a;
        let se = (0.1 * 0.9 / from_a).sqrt();
        assert!((phat - 0.1).abs() < 3.0 * se * 2.0, "{phat}");
    }

    #[test]
    fn midpoint_fallback_can_be_refused() {
        let k = CombKernelSpec::alternating(0.2, 0.5).build().unwrap();
        let c = SimConfig {
            init: Init::Word { word: "000".into(), padding: '0' },
            truncation_depth: 3,
            midpoint_fallback: false,
            ..cfg(1, 10)
        };
        let err = sample_path(&k, &c).unwrap_err();
        assert!(matches!(err, Error::Simulation(ref m) if m.contains("\"000\"")));
    }

    #[test]
    fn constant_kernel_gives_unit_frequencies() {
        let k = MarkovKernelSpec::iid("01", &[0.0, 1.0]).build().unwrap();
        let p = sample_path(&k, &cfg(5, 1000)).unwrap();
        let est = empirical_cylinders(&p.symbols, k.alphabet(), 3).unwrap();
        assert_eq!(est.prob(&[Symbol(1), Symbol(1), Symbol(1)]).unwrap(), 1.0);
        assert_eq!(est.prob(&[Symbol(0)]).unwrap(), 0.0);
    }

    #[test]
    fn empirical_additivity_is_exact() {
        let k = CombKernelSpec::alternating(0.3, 0.5).build().unwrap();
        let p = sample_path(&k, &cfg(11, 20_000)).unwrap();
        let a = k.alphabet();
        let est = empirical_cylinders(&p.symbols, a, 4).unwrap();
        for len in 0..4 {
            for w in a.words(len) {
                let sum: f64 = a.symbols().map(|s| est.prob(&w.prepend(s)).unwrap()).sum();
                assert!((sum - est.prob(&w).unwrap()).abs() < 1e-12);
            }
        }
        assert!(matches!(empirical_cylinders(&p.symbols[..1000], a, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn iid_word_frequency_is_product() {
        let k = MarkovKernelSpec::iid("01", &[0.6, 0.4]).build().unwrap();
        let p = sample_path(&k, &cfg(21, 400_000)).unwrap();
        let w = [Symbol(1), Symbol(0), Symbol(1)];
        let f = word_frequency(&p.symbols, &w, 100).unwrap();
        assert!((f.mean - 0.4 * 0.6 * 0.4).abs() < 3.0 * f.standard_error);
    }

    #[test]
    fn standard_error_halves_when_length_quadruples() {
        let k = MarkovKernelSpec::iid("01", &[0.7, 0.3]).build().unwrap();
        let mean_se = |len: usize| -> f64 {
            let seeds: Vec<u64> = (0..8).collect();
            let runs = sample_replicas(&k, &cfg(0, len), &seeds);
            runs.into_iter()
                .map(|p| word_frequency(&p.unwrap().symbols, &[Symbol(1)], 50).unwrap().standard_error)
                .sum::<f64>()
                / 8.0
        };
        let ratio = mean_se(50_000) / mean_se(200_000);
        assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn empty_tree_decay_is_zero() {
        let k = MarkovKernelSpec::iid("01", &[0.5, 0.5]).build().unwrap();
        let t = build_tree(&k, 4).unwrap();
        let p = sample_path(&k, &cfg(2, 4000)).unwrap();
        let d = decay_from_path(&k, &t, &p.symbols, 4).unwrap();
        assert!(d.rows.iter().all(|r| r.mass == 0.0));
        assert!(d.slope.is_none() && !d.persistent_mass);
    }

    #[test]
    fn non_summable_comb_path_keeps_mass_near_zero_branch() {
        let spec = CombKernelSpec { q: Sequence::Harmonic { numerator: 1.0, offset: 2.0 }, q_inf: 0.5 };
        let k = spec.build().unwrap();
        let t = build_tree(&k, 10).unwrap();
        let c = SimConfig { truncation_depth: 64, ..cfg(4, 300_000) };
        let p = sample_path(&k, &c).unwrap();
        let d = decay_from_path(&k, &t, &p.symbols, 10).unwrap();
        assert!(d.persistent_mass, "{:?}", d.slope);
    }

    #[test]
    fn renewal_init_requires_comb() {
        let k = MarkovKernelSpec::iid("01", &[0.5, 0.5]).build().unwrap();
        let c = SimConfig { init: Init::RenewalStationary, ..cfg(1, 10) };
        assert!(sample_path(&k, &c).is_err());
    }
}
