//! Static model objects: network parameters, file popularity, file
//! combinations, caching distributions and the on/off scheme.
//!
//! Files are indexed from zero internally. User-facing surfaces (config
//! files, CSV columns, error messages) number them from one.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Default cap on the number of explicitly enumerated combinations.
pub const DEFAULT_COMBINATION_CAP: usize = 100_000;

const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// BS density per unit area.
    pub lambda_b: f64,
    /// User density per unit area.
    pub lambda_u: f64,
    /// Pathloss exponent, must exceed 2.
    pub alpha: f64,
    /// Total bandwidth in Hz.
    pub bandwidth_w: f64,
    /// Linear transmit power to noise ratio P/N_0.
    pub snr_ratio: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let positive = |name: &str, x: f64, v: &mut Vec<Violation>| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(Violation::new(name, format!("{name} > 0 (got {x})")));
            }
        };
        positive("lambda_b", self.lambda_b, &mut v);
        positive("lambda_u", self.lambda_u, &mut v);
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            v.push(Violation::new("alpha", format!("alpha > 2 (got {})", self.alpha)));
        }
        positive("bandwidth_w", self.bandwidth_w, &mut v);
        if self.snr_ratio.is_nan() || self.snr_ratio <= 0.0 {
            v.push(Violation::new(
                "snr_ratio",
                format!("snr_ratio > 0 (got {})", self.snr_ratio),
            ));
        }
        v
    }
}

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-slot request probabilities `a_n`, non-increasing in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Popularity {
    probs: Vec<f64>,
}

impl Popularity {
    /// Wraps raw probabilities; invariants are checked by [`Popularity::validate`].
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_files(&self) -> usize {
        self.probs.len()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let n = self.probs.len();
        if n == 0 {
            v.push(Violation::new("popularity", "at least one file"));
            return v;
        }
        // a single file necessarily has a_1 = 1
        let open_upper = n > 1;
        for (i, &a) in self.probs.iter().enumerate() {
            let ok = a > 0.0 && if open_upper { a < 1.0 } else { a <= 1.0 };
            if !ok {
                v.push(Violation::new(
                    format!("popularity[{}]", i + 1),
                    format!("a_n in (0,1) (got {a})"),
                ));
            }
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            v.push(Violation::new(
                "popularity",
                format!("sum of a_n = 1 within 1e-12 (got {sum})"),
            ));
        }
        if self.probs.windows(2).any(|w| w[1] > w[0]) {
            v.push(Violation::new("popularity", "a_1 >= a_2 >= ... >= a_N"));
        }
        v
    }
}

/// Zipf popularity `a_n ∝ n^{-gamma}`.
pub fn zipf_popularity(n_files: usize, gamma: f64) -> Result<Popularity> {
    if n_files == 0 {
        return Err(Error::Domain("zipf_popularity: n_files must be at least 1".into()));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!(
            "zipf_popularity: gamma must be finite and >= 0 (got {gamma})"
        )));
    }
    let weights: Vec<f64> = (1..=n_files).map(|n| (n as f64).powf(-gamma)).collect();
    let total: f64 = weights.iter().sum();
    Ok(Popularity::new(weights.into_iter().map(|w| w / total).collect()))
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) stays integral at every step
        acc = match acc.checked_mul((n - j) as u128) {
            Some(x) => x / (j as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `K`-subsets of the `N` files in lexicographic order of their sorted
/// members.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinationSet {
    n_files: usize,
    cache_size: usize,
    combos: Vec<Vec<usize>>,
}

impl CombinationSet {
    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    pub fn combos(&self) -> &[Vec<usize>] {
        &self.combos
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    /// Indices of the combinations containing file `n` (the set `I_n`).
    pub fn containing(&self, n: usize) -> Vec<usize> {
        self.combos
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&n))
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn enumerate_combinations(n_files: usize, cache_size: usize) -> Result<CombinationSet> {
    enumerate_combinations_capped(n_files, cache_size, DEFAULT_COMBINATION_CAP)
}

pub fn enumerate_combinations_capped(n_files: usize, cache_size: usize, cap: usize) -> Result<CombinationSet> {
    if cache_size == 0 || cache_size > n_files {
        return Err(Error::Domain(format!(
            "cache size K = {cache_size} must satisfy 1 <= K <= N = {n_files}"
        )));
    }
    let count = binomial(n_files, cache_size);
    if count > cap as u128 {
        return Err(Error::TooManyCombinations {
            n_files,
            cache_size,
            count,
            cap,
        });
    }
    let combos = (0..n_files).combinations(cache_size).collect();
    Ok(CombinationSet {
        n_files,
        cache_size,
        combos,
    })
}

/// One combination a BS may store, with its caching probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CachedCombination {
    /// Sorted zero-based file indices.
    pub members: Vec<usize>,
    pub prob: f64,
}

impl CachedCombination {
    pub fn contains(&self, file: usize) -> bool {
        self.members.binary_search(&file).is_ok()
    }
}

/// Random caching design over file combinations.
///
/// Dense designs list every combination; sparse designs list only the
/// combinations with positive probability. Entries are always held in
/// lexicographic order of their members.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheDesign {
    n_files: usize,
    cache_size: usize,
    entries: Vec<CachedCombination>,
    hit: Vec<f64>,
}

impl CacheDesign {
    /// Probabilities given in the lexicographic order of `combos`.
    pub fn dense(combos: &CombinationSet, p: &[f64]) -> Result<Self> {
        if p.len() != combos.len() {
            return Err(Error::Domain(format!(
                "caching distribution has {} entries but C({},{}) = {}",
                p.len(),
                combos.n_files,
                combos.cache_size,
                combos.len()
            )));
        }
        let entries = combos
            .combos
            .iter()
            .zip(p)
            .map(|(members, &prob)| CachedCombination {
                members: members.clone(),
                prob,
            })
            .collect();
        Ok(Self::from_entries(combos.n_files, combos.cache_size, entries))
    }

    pub fn uniform(combos: &CombinationSet) -> Self {
        let p = vec![1.0 / combos.len() as f64; combos.len()];
        Self::dense(combos, &p).expect("lengths match")
    }

    /// Sparse listing of `(members, probability)` pairs, members zero-based.
    pub fn sparse(n_files: usize, cache_size: usize, pairs: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if cache_size == 0 || cache_size > n_files {
            return Err(Error::Domain(format!(
                "cache size K = {cache_size} must satisfy 1 <= K <= N = {n_files}"
            )));
        }
        let mut entries = Vec::with_capacity(pairs.len());
        for (mut members, prob) in pairs {
            members.sort_unstable();
            members.dedup();
            if members.len() != cache_size {
                return Err(Error::Domain(format!(
                    "combination {:?} must hold {cache_size} distinct files",
                    members.iter().map(|m| m + 1).collect::<Vec<_>>()
                )));
            }
            if let Some(&bad) = members.iter().find(|&&m| m >= n_files) {
                return Err(Error::Domain(format!(
                    "combination member {} outside 1..={n_files}",
                    bad + 1
                )));
            }
            entries.push(CachedCombination { members, prob });
        }
        entries.sort_by(|a, b| a.members.cmp(&b.members));
        if entries.windows(2).any(|w| w[0].members == w[1].members) {
            return Err(Error::Domain("duplicate combination in caching distribution".into()));
        }
        Ok(Self::from_entries(n_files, cache_size, entries))
    }

    fn from_entries(n_files: usize, cache_size: usize, entries: Vec<CachedCombination>) -> Self {
        let hit = membership_sums(n_files, &entries);
        Self {
            n_files,
            cache_size,
            entries,
            hit,
        }
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    pub fn entries(&self) -> &[CachedCombination] {
        &self.entries
    }

    /// `T_n`, the probability that a BS stores file `n`.
    pub fn hit(&self) -> &[f64] {
        &self.hit
    }

    /// Entries containing file `n` (the set `I_n`).
    pub fn containing(&self, n: usize) -> impl Iterator<Item = &CachedCombination> + '_ {
        self.entries.iter().filter(move |e| e.contains(n))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.prob) {
                v.push(Violation::new(
                    format!("caching[{}]", i + 1),
                    format!("p_i in [0,1] (got {})", e.prob),
                ));
            }
        }
        let sum: f64 = self.entries.iter().map(|e| e.prob).sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            v.push(Violation::new(
                "caching",
                format!("caching distribution on the simplex: sum of p_i = 1 within 1e-12 (got {sum})"),
            ));
        }
        for (n, &t) in self.hit.iter().enumerate() {
            if t <= 0.0 {
                v.push(Violation::new(
                    format!("caching.T[{}]", n + 1),
                    "T_n > 0 (every file must be cached with positive probability)",
                ));
            }
        }
        v
    }
}

fn membership_sums(n_files: usize, entries: &[CachedCombination]) -> Vec<f64> {
    let mut hit = vec![0.0; n_files];
    for e in entries {
        for &m in &e.members {
            hit[m] += e.prob;
        }
    }
    hit
}

/// `T_n = Σ_{i ∈ I_n} p_i` recomputed from the design's entries.
pub fn hit_probabilities(design: &CacheDesign) -> Vec<f64> {
    membership_sums(design.n_files, &design.entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// BS on/off period in slots.
    pub period_t: u32,
    /// Multicast rate in bits/second.
    pub rate_theta: f64,
}

impl SchemeConfig {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.period_t < 1 {
            v.push(Violation::new("period_t", "period_t >= 1"));
        }
        if !(self.rate_theta >= 0.0 && self.rate_theta.is_finite()) {
            v.push(Violation::new(
                "rate_theta",
                format!("rate_theta >= 0 (got {})", self.rate_theta),
            ));
        }
        v
    }
}

/// A validated model bundle. Only [`validate_inputs`] constructs one, so
/// every consumer may rely on the model invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Model {
    net: NetworkConfig,
    pop: Popularity,
    design: CacheDesign,
    scheme: SchemeConfig,
}

/// Checks every invariant and reports all violations at once.
pub fn validate_inputs(
    net: NetworkConfig,
    pop: Popularity,
    design: CacheDesign,
    scheme: SchemeConfig,
) -> Result<Model> {
    let mut v = net.validate();
    v.extend(pop.validate());
    v.extend(design.validate());
    v.extend(scheme.validate());
    if pop.n_files() != design.n_files() {
        v.push(Violation::new(
            "n_files",
            format!(
                "popularity covers {} files but the caching design {}",
                pop.n_files(),
                design.n_files()
            ),
        ));
    }
    if v.is_empty() {
        Ok(Model {
            net,
            pop,
            design,
            scheme,
        })
    } else {
        Err(Error::Validation(v))
    }
}

impl Model {
    pub fn net(&self) -> &NetworkConfig {
        &self.net
    }

    pub fn popularity(&self) -> &Popularity {
        &self.pop
    }

    pub fn design(&self) -> &CacheDesign {
        &self.design
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn n_files(&self) -> usize {
        self.design.n_files
    }

    pub fn cache_size(&self) -> usize {
        self.design.cache_size
    }

    pub fn with_period(&self, period_t: u32) -> Result<Model> {
        let mut scheme = self.scheme;
        scheme.period_t = period_t;
        validate_inputs(self.net, self.pop.clone(), self.design.clone(), scheme)
    }

    pub fn with_theta(&self, rate_theta: f64) -> Result<Model> {
        let mut scheme = self.scheme;
        scheme.rate_theta = rate_theta;
        validate_inputs(self.net, self.pop.clone(), self.design.clone(), scheme)
    }

    pub fn with_lambda_u(&self, lambda_u: f64) -> Result<Model> {
        let mut net = self.net;
        net.lambda_u = lambda_u;
        validate_inputs(net, self.pop.clone(), self.design.clone(), self.scheme)
    }

    pub fn with_network(&self, net: NetworkConfig) -> Result<Model> {
        validate_inputs(net, self.pop.clone(), self.design.clone(), self.scheme)
    }
}
