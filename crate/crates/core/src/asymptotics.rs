//! Leading terms in the large-period, dense-user and sparse-user regimes,
//! and empirical probes of how fast the general-region value approaches
//! them.

use serde::Serialize;

use crate::analysis::{
    load_pmf_with_weights, load_weight_limit_t, mix_over_load, rate_threshold, sinr_ccdf, sinr_ccdf_no_interference,
    weight_by_popularity, LoadPmf, QuadratureSettings, SuccessBreakdown,
};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::quadrature::Estimate;

/// Load p.m.f. of file `n` as `T → ∞`.
pub fn load_pmf_limit_t(n: usize, model: &Model) -> Result<LoadPmf> {
    let weights = (0..model.n_files())
        .map(|m| load_weight_limit_t(m, model))
        .collect::<Result<Vec<_>>>()?;
    load_pmf_with_weights(n, model, &weights)
}

/// `lim_{T→∞} q(p, T)` at rate `theta`, with per-file terms.
pub fn q_limit_large_t_detailed(model: &Model, theta: f64, quad: &QuadratureSettings) -> Result<SuccessBreakdown> {
    let net = model.net();
    let per_file = (0..model.n_files())
        .map(|n| {
            let pmf = load_pmf_limit_t(n, model)?;
            let t_n = model.design().hit()[n];
            mix_over_load(&pmf, theta, net.bandwidth_w, |eta| {
                sinr_ccdf_no_interference(eta, t_n, net, quad)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(weight_by_popularity(model, per_file))
}

pub fn q_limit_large_t(model: &Model, theta: f64, quad: &QuadratureSettings) -> Result<Estimate> {
    Ok(q_limit_large_t_detailed(model, theta, quad)?.q)
}

/// `Σ_n a_n f(2^{kθ/W} - 1, T_n, T)` with every load pinned at `k`.
fn pinned_load(model: &Model, k: usize, quad: &QuadratureSettings) -> Result<Estimate> {
    let net = model.net();
    let eta = rate_threshold(k, model.scheme().rate_theta, net.bandwidth_w);
    let per_file = (0..model.n_files())
        .map(|n| sinr_ccdf(eta, model.design().hit()[n], net, model.scheme().period_t, quad))
        .collect::<Result<Vec<_>>>()?;
    Ok(weight_by_popularity(model, per_file).q)
}

/// `λ_u → ∞`: the serving BS transmits all `K` cached files.
pub fn q_limit_dense(model: &Model, quad: &QuadratureSettings) -> Result<Estimate> {
    pinned_load(model, model.cache_size(), quad)
}

/// `λ_u → 0`: the serving BS transmits only the requested file.
pub fn q_limit_sparse(model: &Model, quad: &QuadratureSettings) -> Result<Estimate> {
    pinned_load(model, 1, quad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderStatus {
    Determined,
    Indeterminate,
}

/// Errors of a general-region quantity against its limit along a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub errors: Vec<f64>,
    /// `errors[i + 1] / errors[i]`, absent when either error is not
    /// strictly positive.
    pub ratios: Vec<Option<f64>>,
    /// Positive when the error shrinks along the schedule: 1 for an
    /// `O(1/T)` law as `T` grows, 1 for `O(λ)` as `λ` shrinks, 4.5 for
    /// `O(λ^{-4.5})` as `λ` grows.
    pub fitted_order: Option<f64>,
    pub status: OrderStatus,
}

impl ConvergenceReport {
    /// True when the errors strictly decrease along the schedule.
    pub fn errors_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// Evaluates `quantity` along `schedule` and measures its distance to
/// `limit`. The order is reported as indeterminate when any error falls to
/// `noise_floor` or below.
pub fn probe_convergence<F>(
    schedule: &[f64],
    mut quantity: F,
    limit: f64,
    noise_floor: f64,
) -> Result<ConvergenceReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    if schedule.len() < 2 {
        return Err(Error::Domain("convergence schedule needs at least two points".into()));
    }
    if schedule.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("convergence schedule must be positive and finite".into()));
    }
    let increasing = schedule.windows(2).all(|w| w[1] > w[0]);
    let decreasing = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Domain("convergence schedule must be strictly monotone".into()));
    }

    let values = schedule.iter().map(|&x| quantity(x)).collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let ratios = errors
        .windows(2)
        .map(|w| (w[0] > 0.0 && w[1] > 0.0).then(|| w[1] / w[0]))
        .collect();

    let resolved = errors.iter().all(|&e| e > noise_floor);
    let fitted_order = resolved.then(|| {
        // least-squares slope of ln e against ln x
        let xs: Vec<f64> = schedule.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        if increasing {
            -slope
        } else {
            slope
        }
    });

    Ok(ConvergenceReport {
        schedule: schedule.to_vec(),
        values,
        limit,
        errors,
        ratios,
        fitted_order,
        status: if resolved {
            OrderStatus::Determined
        } else {
            OrderStatus::Indeterminate
        },
    })
}
