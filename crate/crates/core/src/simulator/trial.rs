use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::scenario::{dist2, nearest_bs, sample_with, serving_bs, serving_slot, Samplers, ScenarioSnapshot};
use crate::model::{CacheDesign, Model, NetworkConfig};

/// Multicasting scheme realized by a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Temporal-spatial aggregation: cache-aware association, period `T`.
    Proposed,
    /// Temporal aggregation only: requests go to the geographically nearest
    /// BS and fail when it does not cache the file.
    BaselineTemporal,
    /// Spatial aggregation only: the proposed scheme with `T = 1`.
    BaselineContinuous,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Proposed,
        Variant::BaselineTemporal,
        Variant::BaselineContinuous,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Proposed => "proposed",
            Variant::BaselineTemporal => "baseline-temporal",
            Variant::BaselineContinuous => "baseline-continuous",
        }
    }

    /// Period actually used by the variant.
    pub fn period(self, configured: u32) -> u32 {
        match self {
            Variant::BaselineContinuous => 1,
            _ => configured,
        }
    }

    fn routing(self) -> Routing {
        match self {
            Variant::BaselineTemporal => Routing::Nearest,
            _ => Routing::CacheAware,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.label() == s).ok_or_else(|| {
            format!("unknown variant {s:?} (expected proposed, baseline-temporal or baseline-continuous)")
        })
    }
}

/// How a user's request for a file picks its BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Routing {
    /// Nearest BS caching the file.
    CacheAware,
    /// Nearest BS overall.
    Nearest,
}

/// The decoding link of a served request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServedLink {
    pub tier: u32,
    pub slot: u64,
    /// Number of distinct files the serving BS multicasts in that slot.
    pub load: usize,
    pub sinr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// Zero-based requested file.
    pub file: usize,
    /// Distance to the BS the request was sent to; `None` when no BS
    /// qualifies.
    pub serving_distance: Option<f64>,
    /// `None` when no BS qualifies or, for the temporal baseline, when the
    /// nearest BS lacks the file.
    pub link: Option<ServedLink>,
    pub success: bool,
}

impl TrialOutcome {
    pub fn no_serving_bs(&self) -> bool {
        self.serving_distance.is_none()
    }

    /// `(W / load) log2(1 + SINR) ≥ θ`.
    pub fn succeeds_at(&self, theta: f64, bandwidth_w: f64) -> bool {
        self.link
            .is_some_and(|l| bandwidth_w / l.load as f64 * (1.0 + l.sinr).log2() >= theta)
    }
}

/// Whether the request of a user at `pos` for `file` is routed to `target`.
fn routes_to(snapshot: &ScenarioSnapshot, holders: &[usize], pos: [f64; 2], target: usize) -> bool {
    let d0 = dist2(pos, snapshot.base_stations[target].pos);
    for &j in holders {
        if j == target {
            continue;
        }
        let d = dist2(pos, snapshot.base_stations[j].pos);
        if d < d0 || (d == d0 && j < target) {
            return false;
        }
    }
    true
}

/// BSs a request for `file` may be routed to.
fn candidates(snapshot: &ScenarioSnapshot, design: &CacheDesign, file: usize, routing: Routing) -> Vec<usize> {
    let entries = design.entries();
    snapshot
        .base_stations
        .iter()
        .enumerate()
        .filter(|(_, bs)| routing == Routing::Nearest || entries[bs.combo].contains(file))
        .map(|(i, _)| i)
        .collect()
}

fn requested_by_someone_at(snapshot: &ScenarioSnapshot, holders: &[usize], target: usize, file: usize) -> bool {
    (0..snapshot.users.len()).any(|u| {
        snapshot.user_requests(u).contains(&(file as u16)) && routes_to(snapshot, holders, snapshot.users[u], target)
    })
}

/// Number of distinct files of the BS `serving` requested during the
/// window: the typical request for `file` plus every other cached file some
/// user asked for and routed to this BS.
pub fn window_load(
    snapshot: &ScenarioSnapshot,
    design: &CacheDesign,
    serving: usize,
    file: usize,
    routing: Routing,
) -> usize {
    let members = &design.entries()[snapshot.base_stations[serving].combo].members;
    let nearest_all = (routing == Routing::Nearest).then(|| candidates(snapshot, design, 0, routing));
    1 + members
        .iter()
        .filter(|&&m| m != file)
        .filter(|&&m| {
            let holders = match &nearest_all {
                Some(all) => std::borrow::Cow::Borrowed(all),
                None => std::borrow::Cow::Owned(candidates(snapshot, design, m, routing)),
            };
            requested_by_someone_at(snapshot, &holders, serving, m)
        })
        .count()
}

/// Whether any user's request during the window is routed to `bs`.
fn has_requests(snapshot: &ScenarioSnapshot, design: &CacheDesign, bs: usize, routing: Routing) -> bool {
    let members = &design.entries()[snapshot.base_stations[bs].combo].members;
    members.iter().any(|&m| {
        let holders = candidates(snapshot, design, m, routing);
        requested_by_someone_at(snapshot, &holders, bs, m)
    })
}

/// SINR at the origin from `serving`, with every other BS of tier `tier`
/// interfering (or only those in `active`, when given). Fading powers are
/// unit-mean exponentials drawn in BS index order.
pub fn sinr_sample<R: Rng + ?Sized>(
    snapshot: &ScenarioSnapshot,
    serving: usize,
    tier: u32,
    net: &NetworkConfig,
    active: Option<&[bool]>,
    rng: &mut R,
) -> f64 {
    let half_alpha = 0.5 * net.alpha;
    let gain = |pos: [f64; 2]| dist2(pos, [0.0, 0.0]).powf(-half_alpha);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, bs) in snapshot.base_stations.iter().enumerate() {
        if i == serving {
            let h: f64 = Exp1.sample(rng);
            signal = gain(bs.pos) * h;
        } else if bs.tier == tier {
            // drawn even for silent BSs so the stream does not depend on `active`
            let h: f64 = Exp1.sample(rng);
            if active.is_none_or(|a| a[i]) {
                interference += gain(bs.pos) * h;
            }
        }
    }
    signal / (interference + net.snr_ratio.recip())
}

/// Per-run options of a trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub radius: f64,
    pub variant: Variant,
    pub active_interferers_only: bool,
}

/// Runs one trial: samples the network, draws the typical request, and
/// evaluates its decoding at the model's rate.
pub fn run_trial<R: Rng + ?Sized>(model: &Model, config: TrialConfig, rng: &mut R) -> TrialOutcome {
    run_trial_with(model, &Samplers::new(model), config, rng).0
}

pub(crate) fn run_trial_with<R: Rng + ?Sized>(
    model: &Model,
    samplers: &Samplers,
    config: TrialConfig,
    rng: &mut R,
) -> (TrialOutcome, ScenarioSnapshot) {
    let period = config.variant.period(model.scheme().period_t);
    let routing = config.variant.routing();
    let design = model.design();
    let snapshot = sample_with(model, samplers, period, config.radius, rng);
    let file = samplers.file.sample(rng);
    let t0 = rng.random_range(period as u64..2 * period as u64);

    let target = match routing {
        Routing::CacheAware => serving_bs(&snapshot, design, [0.0, 0.0], file),
        Routing::Nearest => nearest_bs(&snapshot, [0.0, 0.0]),
    };
    let Some(serving) = target else {
        let outcome = TrialOutcome {
            file,
            serving_distance: None,
            link: None,
            success: false,
        };
        return (outcome, snapshot);
    };
    let bs = snapshot.base_stations[serving];
    let distance = dist2(bs.pos, [0.0, 0.0]).sqrt();
    if !design.entries()[bs.combo].contains(file) {
        let outcome = TrialOutcome {
            file,
            serving_distance: Some(distance),
            link: None,
            success: false,
        };
        return (outcome, snapshot);
    }

    let load = if design.cache_size() == 1 {
        1
    } else {
        window_load(&snapshot, design, serving, file, routing)
    };
    let active = config.active_interferers_only.then(|| {
        snapshot
            .base_stations
            .iter()
            .enumerate()
            .map(|(i, b)| i != serving && b.tier == bs.tier && has_requests(&snapshot, design, i, routing))
            .collect::<Vec<_>>()
    });
    let sinr = sinr_sample(&snapshot, serving, bs.tier, model.net(), active.as_deref(), rng);
    let link = ServedLink {
        tier: bs.tier,
        slot: serving_slot(t0, bs.tier, period),
        load,
        sinr,
    };
    let mut outcome = TrialOutcome {
        file,
        serving_distance: Some(distance),
        link: Some(link),
        success: false,
    };
    outcome.success = outcome.succeeds_at(model.scheme().rate_theta, model.net().bandwidth_w);
    (outcome, snapshot)
}
