//! Complete and upper-tail incomplete Beta integrals.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerances};

const BETA_TOL: Tolerances = Tolerances {
    rel_tol: 1e-13,
    abs_tol: 1e-16,
    max_subdivisions: 400,
};

fn check_exponents(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!(
            "Beta exponents must be positive and finite (got x = {x}, y = {y})"
        )));
    }
    Ok(())
}

/// `B(x, y) = ∫_0^1 u^{x-1} (1-u)^{y-1} du`, through log-gamma.
pub fn beta_complete(x: f64, y: f64) -> Result<f64> {
    check_exponents(x, y)?;
    Ok((ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp())
}

/// `B'(x, y, z) = ∫_z^1 u^{x-1} (1-u)^{y-1} du`.
///
/// The range is split at `max(z, 1/2)`. An endpoint singularity at `u = 0`
/// (`x < 1`) is removed with `w = u^x`, the one at `u = 1` (`y < 1`) with
/// `v = (1-u)^y`, leaving bounded integrands on both pieces.
pub fn beta_upper(x: f64, y: f64, z: f64) -> Result<f64> {
    check_exponents(x, y)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!(
            "incomplete Beta lower limit must lie in [0,1] (got {z})"
        )));
    }
    if z == 1.0 {
        return Ok(0.0);
    }
    let split = z.max(0.5);

    let lower = if z < split {
        if x < 1.0 {
            let inv_x = x.recip();
            integrate(
                |w: f64| (1.0 - w.powf(inv_x)).powf(y - 1.0),
                z.powf(x),
                split.powf(x),
                BETA_TOL,
            )?
            .value
                / x
        } else {
            integrate(|u: f64| u.powf(x - 1.0) * (1.0 - u).powf(y - 1.0), z, split, BETA_TOL)?.value
        }
    } else {
        0.0
    };

    let upper = if y < 1.0 {
        let inv_y = y.recip();
        integrate(
            |v: f64| (1.0 - v.powf(inv_y)).powf(x - 1.0),
            0.0,
            (1.0 - split).powf(y),
            BETA_TOL,
        )?
        .value
            / y
    } else {
        integrate(|u: f64| u.powf(x - 1.0) * (1.0 - u).powf(y - 1.0), split, 1.0, BETA_TOL)?.value
    };

    Ok(lower + upper)
}
