//! Analytical approximation of the successful transmission probability.
//!
//! The file load at the serving BS and its SINR are treated as
//! independent. The load p.m.f. uses the gamma-type Voronoi cell
//! approximation (constants [`CELL_SCALE`] and [`CELL_SHAPE`]); the SINR
//! c.c.d.f. is a one-dimensional integral over the serving distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::model::{Model, NetworkConfig};
use crate::quadrature::{integrate, Estimate, Tolerances};
use crate::special::{beta_complete, beta_upper};

/// Scale constant of the cell-size approximation (`3.5`).
pub const CELL_SCALE: f64 = 3.5;
/// Shape constant of the size-biased cell approximation (`4.5`).
pub const CELL_SHAPE: f64 = 4.5;

const PMF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Probability mass allowed beyond the truncation point of the
    /// semi-infinite distance integral.
    pub tail_cutoff_mass: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
            tail_cutoff_mass: 1e-10,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (name, x) in [
            ("quadrature.rel_tol", self.rel_tol),
            ("quadrature.abs_tol", self.abs_tol),
            ("quadrature.tail_cutoff_mass", self.tail_cutoff_mass),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(Violation::new(name, format!("{name} > 0 (got {x})")));
            }
        }
        if self.tail_cutoff_mass >= 1.0 {
            v.push(Violation::new("quadrature.tail_cutoff_mass", "tail_cutoff_mass < 1"));
        }
        if self.max_subdivisions < 10 {
            v.push(Violation::new("quadrature.max_subdivisions", "max_subdivisions >= 10"));
        }
        v
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Distribution of the file load over `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadPmf {
    probs: Vec<f64>,
}

impl LoadPmf {
    /// `probs[k - 1] = Pr[load = k]`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum()
    }
}

/// `W_m = 1 + λ_u (1 - (1 - a_m)^T) / (3.5 T_m λ_b)`.
pub fn load_weight(m: usize, model: &Model, t_period: u32) -> Result<f64> {
    let a_m = model.popularity().probs()[m];
    let window_density = model.net().lambda_u * (1.0 - (1.0 - a_m).powf(t_period as f64));
    weight_from_density(m, model, window_density)
}

/// Weight in the `T → ∞` limit, where every user requests file `m` at some
/// slot of the window.
pub fn load_weight_limit_t(m: usize, model: &Model) -> Result<f64> {
    weight_from_density(m, model, model.net().lambda_u)
}

fn weight_from_density(m: usize, model: &Model, requester_density: f64) -> Result<f64> {
    let t_m = model.design().hit()[m];
    if t_m <= 0.0 {
        return Err(Error::UncachedFile { file: m + 1 });
    }
    Ok(1.0 + requester_density / (CELL_SCALE * t_m * model.net().lambda_b))
}

/// Load p.m.f. of file `n` given the weights `W_m` of every file.
///
/// Within each combination the other `K - 1` files are requested
/// independently with probability `1 - W_m^{-4.5}`, so the inner sum over
/// subsets is a Poisson-binomial distribution; it is accumulated by the
/// usual O(K²) recursion instead of enumerating subsets.
pub(crate) fn load_pmf_with_weights(n: usize, model: &Model, weights: &[f64]) -> Result<LoadPmf> {
    let design = model.design();
    let k_max = design.cache_size();
    let t_n = design.hit()[n];
    if t_n <= 0.0 {
        return Err(Error::UncachedFile { file: n + 1 });
    }
    let mut probs = vec![0.0; k_max];
    let mut dp = vec![0.0; k_max];
    for entry in design.containing(n) {
        if entry.prob == 0.0 {
            continue;
        }
        dp.iter_mut().for_each(|x| *x = 0.0);
        dp[0] = 1.0;
        let mut seen = 0;
        for &m in entry.members.iter().filter(|&&m| m != n) {
            let idle = weights[m].powf(-CELL_SHAPE);
            let busy = 1.0 - idle;
            seen += 1;
            for j in (0..=seen).rev() {
                let stay = dp[j] * idle;
                let step = if j > 0 { dp[j - 1] * busy } else { 0.0 };
                dp[j] = stay + step;
            }
        }
        let w = entry.prob / t_n;
        for (acc, d) in probs.iter_mut().zip(&dp) {
            *acc += w * d;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PMF_TOL {
        return Err(Error::Normalization { file: n + 1, sum });
    }
    Ok(LoadPmf { probs })
}

pub fn load_pmf(n: usize, model: &Model) -> Result<LoadPmf> {
    let t = model.scheme().period_t;
    let weights = (0..model.n_files())
        .map(|m| load_weight(m, model, t))
        .collect::<Result<Vec<_>>>()?;
    load_pmf_with_weights(n, model, &weights)
}

/// `E[K_{n,0}]` under the approximate load p.m.f.
pub fn expected_load(n: usize, model: &Model) -> Result<f64> {
    Ok(load_pmf(n, model)?.mean())
}

/// `∫_0^∞ exp(-(1 + ρ) s - c s^{α/2}) ds`, truncated where the remaining
/// mass is below `tail_cutoff_mass`. The truncation bound is added to the
/// quadrature error estimate.
pub(crate) fn coverage_integral(rho: f64, noise: f64, alpha: f64, quad: &QuadratureSettings) -> Result<Estimate> {
    let rate = 1.0 + rho;
    let cutoff = quad.tail_cutoff_mass;
    let s_max = if rate * cutoff < 1.0 {
        -(rate * cutoff).ln() / rate
    } else {
        cutoff / rate
    };
    let half_alpha = 0.5 * alpha;
    let est = integrate(
        |s: f64| (-rate * s - noise * s.powf(half_alpha)).exp(),
        0.0,
        s_max,
        quad.tolerances(),
    )?;
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        error: est.error + (-rate * s_max).exp() / rate,
    })
}

fn check_ccdf_args(eta: f64, t_n: f64, t_period: u32) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!(
            "SINR threshold must be finite and >= 0 (got {eta})"
        )));
    }
    if !(t_n > 0.0 && t_n <= 1.0) {
        return Err(Error::Domain(format!("hit probability must lie in (0,1] (got {t_n})")));
    }
    if t_period < 1 {
        return Err(Error::Domain("period must be at least one slot".into()));
    }
    Ok(())
}

/// Noise coefficient after the change of variable `s = π λ_b T_n d²`.
fn noise_coefficient(eta: f64, t_n: f64, net: &NetworkConfig) -> f64 {
    if eta == 0.0 || net.snr_ratio.is_infinite() {
        return 0.0;
    }
    eta / net.snr_ratio / (std::f64::consts::PI * net.lambda_b * t_n).powf(0.5 * net.alpha)
}

/// `Pr[SINR ≥ η]` for a file cached with probability `t_n` under period `T`.
///
/// Same-tier BSs caching the file sit beyond the serving distance (upper
/// incomplete Beta term with lower limit `1/(1+η)`); same-tier BSs without
/// the file may be anywhere (complete Beta term).
pub fn sinr_ccdf(
    eta: f64,
    t_n: f64,
    net: &NetworkConfig,
    t_period: u32,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    check_ccdf_args(eta, t_n, t_period)?;
    let delta = 2.0 / net.alpha;
    let rho = if eta == 0.0 {
        0.0
    } else {
        let excluded = beta_upper(delta, 1.0 - delta, 1.0 / (1.0 + eta))?;
        let unrestricted = beta_complete(delta, 1.0 - delta)?;
        delta / t_period as f64 * eta.powf(delta) * (excluded + (1.0 - t_n) / t_n * unrestricted)
    };
    coverage_integral(rho, noise_coefficient(eta, t_n, net), net.alpha, quad)
}

/// Interference-free c.c.d.f., the `T → ∞` limit of [`sinr_ccdf`].
pub fn sinr_ccdf_no_interference(
    eta: f64,
    t_n: f64,
    net: &NetworkConfig,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    check_ccdf_args(eta, t_n, 1)?;
    coverage_integral(0.0, noise_coefficient(eta, t_n, net), net.alpha, quad)
}

/// SINR threshold for decoding at rate `θ` over `W / k`.
pub fn rate_threshold(k: usize, theta: f64, bandwidth_w: f64) -> f64 {
    (k as f64 * theta / bandwidth_w).exp2() - 1.0
}

/// `Σ_k g(k) f(2^{kθ/W} - 1)` for one file, with the weighted error.
pub(crate) fn mix_over_load<F>(pmf: &LoadPmf, theta: f64, bandwidth_w: f64, mut ccdf: F) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let mut value = 0.0;
    let mut error = 0.0;
    for (j, &g) in pmf.probs().iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let f = ccdf(rate_threshold(j + 1, theta, bandwidth_w))?;
        value += g * f.value;
        error += g * f.error;
    }
    Ok(Estimate { value, error })
}

/// `q_n(p, T)`.
pub fn success_prob_file(n: usize, model: &Model, quad: &QuadratureSettings) -> Result<Estimate> {
    let pmf = load_pmf(n, model)?;
    let net = model.net();
    let t_n = model.design().hit()[n];
    let t = model.scheme().period_t;
    mix_over_load(&pmf, model.scheme().rate_theta, net.bandwidth_w, |eta| {
        sinr_ccdf(eta, t_n, net, t, quad)
    })
}

/// Overall and per-file success probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessBreakdown {
    pub q: Estimate,
    pub per_file: Vec<Estimate>,
}

/// Popularity-weighted total of per-file estimates.
pub(crate) fn weight_by_popularity(model: &Model, per_file: Vec<Estimate>) -> SuccessBreakdown {
    let a = model.popularity().probs();
    let value = per_file.iter().zip(a).map(|(e, a)| a * e.value).sum::<f64>();
    let error = per_file.iter().zip(a).map(|(e, a)| a * e.error).sum();
    SuccessBreakdown {
        q: Estimate {
            value: value.clamp(0.0, 1.0),
            error,
        },
        per_file,
    }
}

pub fn success_prob_detailed(model: &Model, quad: &QuadratureSettings) -> Result<SuccessBreakdown> {
    let per_file = (0..model.n_files())
        .map(|n| success_prob_file(n, model, quad))
        .collect::<Result<Vec<_>>>()?;
    Ok(weight_by_popularity(model, per_file))
}

/// `q(p, T) = Σ_n a_n q_n(p, T)`.
pub fn success_prob(model: &Model, quad: &QuadratureSettings) -> Result<Estimate> {
    Ok(success_prob_detailed(model, quad)?.q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        enumerate_combinations, validate_inputs, zipf_popularity, CacheDesign, Popularity, SchemeConfig,
    };
    use std::f64::consts::PI;

    fn net(lambda_u: f64, snr_ratio: f64) -> NetworkConfig {
        NetworkConfig {
            lambda_b: 0.01,
            lambda_u,
            alpha: 4.0,
            bandwidth_w: 1e7,
            snr_ratio,
        }
    }

    fn reference(period_t: u32, theta: f64) -> Model {
        let combos = enumerate_combinations(5, 4).unwrap();
        validate_inputs(
            net(0.1, 1000.0),
            zipf_popularity(5, 2.0).unwrap(),
            CacheDesign::dense(&combos, &[0.7, 0.2, 0.06, 0.02, 0.02]).unwrap(),
            SchemeConfig {
                period_t,
                rate_theta: theta,
            },
        )
        .unwrap()
    }

    fn two_file_model(lambda_u: f64) -> Model {
        let combos = enumerate_combinations(2, 2).unwrap();
        validate_inputs(
            net(lambda_u, 1000.0),
            Popularity::new(vec![0.8, 0.2]),
            CacheDesign::dense(&combos, &[1.0]).unwrap(),
            SchemeConfig {
                period_t: 1,
                rate_theta: 1e6,
            },
        )
        .unwrap()
    }

    fn single_cache_model() -> Model {
        let combos = enumerate_combinations(3, 1).unwrap();
        validate_inputs(
            net(0.5, 1000.0),
            zipf_popularity(3, 1.0).unwrap(),
            CacheDesign::dense(&combos, &[0.5, 0.3, 0.2]).unwrap(),
            SchemeConfig {
                period_t: 3,
                rate_theta: 2e6,
            },
        )
        .unwrap()
    }

    #[test]
    fn weight_at_unit_period() {
        let m = reference(1, 0.0);
        let a1 = m.popularity().probs()[0];
        let w = load_weight(0, &m, 1).unwrap();
        assert!((w - (1.0 + a1 * 0.1 / (3.5 * 0.98 * 0.01))).abs() < 1e-12);
        // 1 + 0.068324 / 0.0343
        assert!((w - 2.9920).abs() < 5e-4, "{w}");
    }

    #[test]
    fn weight_limits() {
        let m = reference(1, 0.0);
        let sparse = m.with_lambda_u(1e-12).unwrap();
        assert!((load_weight(2, &sparse, 4).unwrap() - 1.0).abs() < 1e-9);
        let big_t = load_weight(3, &m, 100_000).unwrap();
        assert!((big_t - load_weight_limit_t(3, &m).unwrap()).abs() < 1e-12);
        assert!((big_t - (1.0 + 0.1 / (3.5 * 0.8 * 0.01))).abs() < 1e-12);
        let mut prev = 0.0;
        for t in 1..10 {
            let w = load_weight(4, &m, t).unwrap();
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn pmf_deterministic_for_unit_cache() {
        let m = single_cache_model();
        for n in 0..3 {
            assert_eq!(load_pmf(n, &m).unwrap().probs(), &[1.0]);
            assert_eq!(expected_load(n, &m).unwrap(), 1.0);
        }
    }

    #[test]
    fn pmf_two_file_hand_evaluation() {
        let m = two_file_model(0.1);
        let w2 = load_weight(1, &m, 1).unwrap();
        assert!((w2 - (1.0 + 0.02 / 0.035)).abs() < 1e-12);
        let pmf = load_pmf(0, &m).unwrap();
        assert!((pmf.prob(1) - w2.powf(-4.5)).abs() < 1e-14);
        assert!((pmf.prob(1) - 0.1308).abs() < 1e-4, "{}", pmf.prob(1));
        assert!((pmf.prob(2) - 0.8692).abs() < 1e-4);
        assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pmf_degenerates_without_users() {
        let m = reference(4, 0.0).with_lambda_u(1e-14).unwrap();
        for n in 0..5 {
            let pmf = load_pmf(n, &m).unwrap();
            assert!((pmf.prob(1) - 1.0).abs() < 1e-9);
            assert!((expected_load(n, &m).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    /// Direct subset enumeration of the load p.m.f.
    fn brute_pmf(n: usize, model: &Model) -> Vec<f64> {
        let k = model.cache_size();
        let mut probs = vec![0.0; k];
        let t_n = model.design().hit()[n];
        for entry in model.design().containing(n) {
            let others: Vec<usize> = entry.members.iter().copied().filter(|&m| m != n).collect();
            for mask in 0u32..(1 << others.len()) {
                let mut g = 1.0;
                for (bit, &m) in others.iter().enumerate() {
                    let idle = load_weight(m, model, model.scheme().period_t).unwrap().powf(-4.5);
                    g *= if mask >> bit & 1 == 1 { 1.0 - idle } else { idle };
                }
                probs[mask.count_ones() as usize] += entry.prob / t_n * g;
            }
        }
        probs
    }

    #[test]
    fn pmf_matches_subset_enumeration() {
        for t in [1, 2, 5] {
            let m = reference(t, 0.0);
            for n in 0..5 {
                let fast = load_pmf(n, &m).unwrap();
                let slow = brute_pmf(n, &m);
                for (a, b) in fast.probs().iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn expected_load_increases_with_period() {
        let mut prev = [0.0; 5];
        for t in [1, 2, 4, 8] {
            let m = reference(t, 0.0);
            for (n, p) in prev.iter_mut().enumerate() {
                let e = expected_load(n, &m).unwrap();
                assert!(e > *p && (1.0..=4.0).contains(&e));
                *p = e;
            }
        }
    }

    #[test]
    fn ccdf_at_zero_threshold() {
        let q = QuadratureSettings::default();
        for t_n in [0.1, 0.5, 1.0] {
            for t in [1, 2, 8] {
                let f = sinr_ccdf(0.0, t_n, &net(0.1, 1000.0), t, &q).unwrap();
                assert!((f.value - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ccdf_interference_limited_closed_form() {
        let q = QuadratureSettings::default();
        let noiseless = net(0.1, 1e12);
        let f = sinr_ccdf(1.0, 1.0, &noiseless, 1, &q).unwrap();
        assert!((f.value - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-3);
        assert!((f.value - 0.56010).abs() < 1e-3);
        for eta in [0.5f64, 1.0, 2.0] {
            // ρ = (2/α) η^{2/α} B'(1/2, 1/2, 1/(1+η)); for α = 4 the
            // arcsine integral gives B' = 2 atan(sqrt(η)).
            let rho = 0.5 * eta.sqrt() * 2.0 * eta.sqrt().atan();
            let f = sinr_ccdf(eta, 1.0, &noiseless, 1, &q).unwrap();
            assert!((f.value - 1.0 / (1.0 + rho)).abs() < 1e-3, "eta {eta}");
        }
    }

    #[test]
    fn ccdf_monotone_in_threshold_and_period() {
        let q = QuadratureSettings::default();
        let n = net(0.1, 1000.0);
        for t_n in [0.3, 0.98] {
            let f = |eta, t| sinr_ccdf(eta, t_n, &n, t, &q).unwrap().value;
            for t in 1..=8 {
                assert!(f(2.0, t) < f(1.0, t) && f(1.0, t) < f(0.5, t));
            }
            for eta in [0.5, 1.0, 2.0] {
                for t in 1..8 {
                    assert!(f(eta, t + 1) > f(eta, t));
                }
            }
        }
    }

    #[test]
    fn ccdf_error_estimate_bounds_tolerance_change() {
        let coarse = QuadratureSettings::default();
        let fine = QuadratureSettings {
            rel_tol: coarse.rel_tol / 2.0,
            ..coarse
        };
        let n = net(0.1, 1000.0);
        for eta in [0.3, 1.0, 7.0] {
            let a = sinr_ccdf(eta, 0.8, &n, 2, &coarse).unwrap();
            let b = sinr_ccdf(eta, 0.8, &n, 2, &fine).unwrap();
            assert!((a.value - b.value).abs() <= a.error);
        }
    }

    #[test]
    fn ccdf_rejects_bad_arguments() {
        let q = QuadratureSettings::default();
        let n = net(0.1, 1000.0);
        assert!(sinr_ccdf(-1.0, 0.5, &n, 1, &q).is_err());
        assert!(sinr_ccdf(1.0, 0.0, &n, 1, &q).is_err());
        assert!(sinr_ccdf(1.0, 1.5, &n, 1, &q).is_err());
    }

    #[test]
    fn quadrature_failure_is_explicit() {
        let q = QuadratureSettings {
            rel_tol: 1e-300,
            abs_tol: 1e-300,
            max_subdivisions: 10,
            tail_cutoff_mass: 1e-10,
        };
        let err = sinr_ccdf(1.0, 0.5, &net(0.1, 1000.0), 1, &q).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn success_zero_rate_is_certain() {
        let m = reference(2, 0.0);
        let q = QuadratureSettings::default();
        for n in 0..5 {
            assert!((success_prob_file(n, &m, &q).unwrap().value - 1.0).abs() < 1e-6);
        }
        assert!((success_prob(&m, &q).unwrap().value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn success_unit_cache_reduces_to_ccdf() {
        let m = single_cache_model();
        let q = QuadratureSettings::default();
        for n in 0..3 {
            let eta = rate_threshold(1, 2e6, 1e7);
            let f = sinr_ccdf(eta, m.design().hit()[n], m.net(), 3, &q).unwrap();
            assert_eq!(success_prob_file(n, &m, &q).unwrap().value, f.value);
        }
    }

    #[test]
    fn success_symmetric_design() {
        let combos = enumerate_combinations(4, 2).unwrap();
        let m = validate_inputs(
            net(0.1, 1000.0),
            zipf_popularity(4, 0.0).unwrap(),
            CacheDesign::uniform(&combos),
            SchemeConfig {
                period_t: 2,
                rate_theta: 3e6,
            },
        )
        .unwrap();
        let q = QuadratureSettings::default();
        let b = success_prob_detailed(&m, &q).unwrap();
        for e in &b.per_file {
            assert!((e.value - b.q.value).abs() < 1e-12);
        }
    }

    #[test]
    fn success_non_increasing_in_rate() {
        let q = QuadratureSettings::default();
        let mut prev = 1.0 + 1e-9;
        for i in 0..12 {
            let theta = 1e5 * 10f64.powf(i as f64 / 5.5);
            let v = success_prob(&reference(2, theta), &q).unwrap().value;
            assert!(v <= prev && v > 0.0 && v < 1.0);
            prev = v;
        }
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::default().validate().is_empty());
        let bad = QuadratureSettings {
            rel_tol: 0.0,
            max_subdivisions: 3,
            ..Default::default()
        };
        assert_eq!(bad.validate().len(), 2);
    }
}
