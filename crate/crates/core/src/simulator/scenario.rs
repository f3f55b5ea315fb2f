use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::model::{CacheDesign, Model};

/// A BS in the sampled disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseStation {
    pub pos: [f64; 2],
    /// Tier in `1..=T`.
    pub tier: u32,
    /// Index into the caching design's entries.
    pub combo: usize,
}

/// Ratio of the BS disc radius to the user disc radius. Users beyond the
/// user disc never reach a BS near the origin, but far BSs still interfere.
pub const BS_DISC_FACTOR: f64 = 4.0;

/// One realization of the network around the typical user at the origin.
///
/// Users live in the disc of radius `radius`, BSs in the wider disc of
/// radius `bs_radius`. File indices in `requests` are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSnapshot {
    pub radius: f64,
    pub bs_radius: f64,
    pub period_t: u32,
    pub base_stations: Vec<BaseStation>,
    pub users: Vec<[f64; 2]>,
    /// Row-major `users.len() × period_t` table of the files each user
    /// requests in the slots of the window.
    pub requests: Vec<u16>,
}

impl ScenarioSnapshot {
    pub fn user_requests(&self, user: usize) -> &[u16] {
        let t = self.period_t as usize;
        &self.requests[user * t..(user + 1) * t]
    }
}

/// Samplers reused across the trials of one run.
#[derive(Debug, Clone)]
pub(crate) struct Samplers {
    pub combo: WeightedIndex<f64>,
    pub file: WeightedIndex<f64>,
}

impl Samplers {
    pub fn new(model: &Model) -> Self {
        let weights: Vec<f64> = model.design().entries().iter().map(|e| e.prob).collect();
        Self {
            combo: WeightedIndex::new(&weights).expect("validated caching distribution"),
            file: WeightedIndex::new(model.popularity().probs()).expect("validated popularity"),
        }
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// Samples users (with their request table) in the disc of radius `radius`
/// centred on the origin, and BSs (with tiers and caches) in the disc of
/// radius `BS_DISC_FACTOR * radius`.
pub fn sample_scenario<R: Rng + ?Sized>(model: &Model, period_t: u32, radius: f64, rng: &mut R) -> ScenarioSnapshot {
    sample_with(model, &Samplers::new(model), period_t, radius, rng)
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    model: &Model,
    samplers: &Samplers,
    period_t: u32,
    radius: f64,
    rng: &mut R,
) -> ScenarioSnapshot {
    let bs_radius = BS_DISC_FACTOR * radius;
    let area = std::f64::consts::PI * radius * radius;
    let n_bs = poisson_count(rng, model.net().lambda_b * area * BS_DISC_FACTOR * BS_DISC_FACTOR);
    let base_stations = (0..n_bs)
        .map(|_| BaseStation {
            pos: uniform_in_disc(rng, bs_radius),
            tier: rng.random_range(1..=period_t),
            combo: samplers.combo.sample(rng),
        })
        .collect();
    let n_users = poisson_count(rng, model.net().lambda_u * area);
    let users: Vec<[f64; 2]> = (0..n_users).map(|_| uniform_in_disc(rng, radius)).collect();
    let requests = (0..n_users * period_t as usize)
        .map(|_| samplers.file.sample(rng) as u16)
        .collect();
    ScenarioSnapshot {
        radius,
        bs_radius,
        period_t,
        base_stations,
        users,
        requests,
    }
}

#[inline]
pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Nearest BS to `pos` whose cache holds `file`; ties go to the lowest index.
pub fn serving_bs(snapshot: &ScenarioSnapshot, design: &CacheDesign, pos: [f64; 2], file: usize) -> Option<usize> {
    let entries = design.entries();
    nearest_matching(snapshot, pos, |bs| entries[bs.combo].contains(file))
}

/// Geographically nearest BS to `pos`, regardless of its cache.
pub fn nearest_bs(snapshot: &ScenarioSnapshot, pos: [f64; 2]) -> Option<usize> {
    nearest_matching(snapshot, pos, |_| true)
}

fn nearest_matching<P: Fn(&BaseStation) -> bool>(snapshot: &ScenarioSnapshot, pos: [f64; 2], keep: P) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, bs) in snapshot.base_stations.iter().enumerate() {
        if !keep(bs) {
            continue;
        }
        let d = dist2(bs.pos, pos);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Slot in which a tier-`tau0` BS serves a request made in slot `t0`:
/// `T ⌈(t0 - τ0)/T⌉ + τ0`, the first slot `≥ t0` congruent to `τ0`
/// modulo `T` (tier `T` is active in slots divisible by `T`).
pub fn serving_slot(t0: u64, tau0: u32, t_period: u32) -> u64 {
    let t = t_period as u64;
    let tau = tau0 as u64;
    debug_assert!(tau >= 1 && tau <= t && t0 >= tau);
    t * (t0 - tau).div_ceil(t) + tau
}
