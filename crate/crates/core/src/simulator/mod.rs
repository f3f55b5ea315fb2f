//! Monte Carlo realization of the network: PPP sampling in a disc around
//! the typical user, tiering, random caching, request aggregation over the
//! on/off window, and Rayleigh-faded SINR at the serving slot.
//!
//! Trial `i` of a run draws from the ChaCha8 stream `i` of the run's master
//! seed, so results are a pure function of the inputs and the seed no
//! matter how trials are spread over threads.

mod scenario;
mod trial;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use scenario::{
    nearest_bs, sample_scenario, serving_bs, serving_slot, BaseStation, ScenarioSnapshot, BS_DISC_FACTOR,
};
pub use trial::{run_trial, sinr_sample, window_load, Routing, ServedLink, TrialConfig, TrialOutcome, Variant};

use crate::error::{Error, Result};
use crate::model::Model;
use scenario::Samplers;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Radius multiplier: `R = 6 / sqrt(π λ_b min_n T_n)`.
const RADIUS_FACTOR: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    pub trials: u64,
    pub master_seed: u64,
    /// Overrides the default disc radius.
    pub radius: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub variant: Variant,
    /// Restrict interferers to BSs with at least one routed request.
    pub active_interferers_only: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            trials: 20_000,
            master_seed: 0x5eed,
            radius: None,
            threads: None,
            variant: Variant::Proposed,
            active_interferers_only: false,
        }
    }
}

/// Default disc radius; the least cached file is served from beyond `R/2`
/// with probability `e^{-9}`.
pub fn default_radius(model: &Model) -> f64 {
    let min_hit = model.design().hit().iter().copied().fold(f64::INFINITY, f64::min);
    RADIUS_FACTOR / (std::f64::consts::PI * model.net().lambda_b * min_hit).sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FileTally {
    pub trials: u64,
    pub successes: u64,
    /// Number of served trials and the sum of their loads.
    pub served: u64,
    pub load_sum: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub variant: Variant,
    pub master_seed: u64,
    pub theta: f64,
    pub radius: f64,
    pub trials: u64,
    pub successes: u64,
    pub q_hat: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub ci95: f64,
    pub per_file: Vec<FileTally>,
    pub no_serving: u64,
    /// Trials whose serving BS lies beyond half the disc radius.
    pub beyond_half_radius: u64,
}

impl EstimateResult {
    pub fn q_file(&self, n: usize) -> Option<f64> {
        let t = self.per_file[n];
        (t.trials > 0).then(|| t.successes as f64 / t.trials as f64)
    }

    pub fn mean_load(&self, n: usize) -> Option<f64> {
        let t = self.per_file[n];
        (t.served > 0).then(|| t.load_sum as f64 / t.served as f64)
    }

    pub fn no_serving_freq(&self) -> f64 {
        self.no_serving as f64 / self.trials as f64
    }

    pub fn edge_freq(&self) -> f64 {
        self.beyond_half_radius as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone)]
struct Tally {
    successes: Vec<u64>,
    files: Vec<Vec<FileTally>>,
    no_serving: u64,
    beyond_half: u64,
}

impl Tally {
    fn new(n_rates: usize, n_files: usize) -> Self {
        Self {
            successes: vec![0; n_rates],
            files: vec![vec![FileTally::default(); n_files]; n_rates],
            no_serving: 0,
            beyond_half: 0,
        }
    }

    fn record(&mut self, o: &TrialOutcome, thetas: &[f64], bandwidth_w: f64, radius: f64) {
        match o.serving_distance {
            None => self.no_serving += 1,
            Some(d) if d > 0.5 * radius => self.beyond_half += 1,
            Some(_) => {}
        }
        for (r, &theta) in thetas.iter().enumerate() {
            let ok = o.succeeds_at(theta, bandwidth_w);
            let f = &mut self.files[r][o.file];
            f.trials += 1;
            if let Some(l) = o.link {
                f.served += 1;
                f.load_sum += l.load as u64;
            }
            if ok {
                f.successes += 1;
                self.successes[r] += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.successes.iter_mut().zip(&other.successes) {
            *a += b;
        }
        for (fa, fb) in self.files.iter_mut().zip(&other.files) {
            for (a, b) in fa.iter_mut().zip(fb) {
                a.trials += b.trials;
                a.successes += b.successes;
                a.served += b.served;
                a.load_sum += b.load_sum;
            }
        }
        self.no_serving += other.no_serving;
        self.beyond_half += other.beyond_half;
        self
    }
}

fn check_settings(model: &Model, settings: &SimSettings) -> Result<f64> {
    if settings.trials < 1 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if model.n_files() > u16::MAX as usize + 1 {
        return Err(Error::Domain("the simulator supports at most 65536 files".into()));
    }
    let radius = settings.radius.unwrap_or_else(|| default_radius(model));
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "simulation radius must be positive (got {radius})"
        )));
    }
    Ok(radius)
}

/// Random stream of trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn trial_config(settings: &SimSettings, radius: f64) -> TrialConfig {
    TrialConfig {
        radius,
        variant: settings.variant,
        active_interferers_only: settings.active_interferers_only,
    }
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Estimates the success probability at several rates from one set of
/// trials; the trials do not depend on the rate.
pub fn estimate_rates(model: &Model, settings: &SimSettings, thetas: &[f64]) -> Result<Vec<EstimateResult>> {
    let radius = check_settings(model, settings)?;
    let samplers = Samplers::new(model);
    let config = trial_config(settings, radius);
    let base = ChaCha8Rng::seed_from_u64(settings.master_seed);
    let w = model.net().bandwidth_w;
    let n_files = model.n_files();

    let tally = with_pool(settings.threads, || {
        (0..settings.trials)
            .into_par_iter()
            .fold(
                || Tally::new(thetas.len(), n_files),
                |mut acc, i| {
                    let mut rng = base.clone();
                    rng.set_stream(i);
                    let (o, _) = trial::run_trial_with(model, &samplers, config, &mut rng);
                    acc.record(&o, thetas, w, radius);
                    acc
                },
            )
            .reduce(|| Tally::new(thetas.len(), n_files), Tally::merge)
    })?;

    Ok(thetas
        .iter()
        .enumerate()
        .map(|(r, &theta)| {
            let successes = tally.successes[r];
            let q_hat = successes as f64 / settings.trials as f64;
            EstimateResult {
                variant: settings.variant,
                master_seed: settings.master_seed,
                theta,
                radius,
                trials: settings.trials,
                successes,
                q_hat,
                ci95: Z95 * (q_hat * (1.0 - q_hat) / settings.trials as f64).sqrt(),
                per_file: tally.files[r].clone(),
                no_serving: tally.no_serving,
                beyond_half_radius: tally.beyond_half,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `q(p, T)` at the model's rate.
pub fn estimate(model: &Model, settings: &SimSettings) -> Result<EstimateResult> {
    let mut v = estimate_rates(model, settings, &[model.scheme().rate_theta])?;
    Ok(v.pop().expect("one rate"))
}

/// Outcomes of trials `range` in order, for diagnostics.
pub fn trial_outcomes(model: &Model, settings: &SimSettings, range: std::ops::Range<u64>) -> Result<Vec<TrialOutcome>> {
    let radius = check_settings(model, settings)?;
    let samplers = Samplers::new(model);
    let config = trial_config(settings, radius);
    with_pool(settings.threads, || {
        range
            .into_par_iter()
            .map(|i| trial::run_trial_with(model, &samplers, config, &mut trial_rng(settings.master_seed, i)).0)
            .collect()
    })
}

/// The network realization behind trial `index`, for dumping.
pub fn scenario_of_trial(model: &Model, settings: &SimSettings, index: u64) -> Result<ScenarioSnapshot> {
    let radius = check_settings(model, settings)?;
    let samplers = Samplers::new(model);
    let mut rng = trial_rng(settings.master_seed, index);
    Ok(trial::run_trial_with(model, &samplers, trial_config(settings, radius), &mut rng).1)
}
