//! Standard-normal special functions and lognormal quantiles.
//!
//! Everything downstream (put prices, CVaR coefficients, the dynamic
//! benchmark) reduces to the normal CDF and its inverse, so these two are
//! built to full double precision: the CDF via a Maclaurin series for small
//! arguments and the Laplace continued fraction for the tails, the quantile
//! via the Acklam rational approximation polished with one Newton step.

use crate::error::{Error, Result};
use crate::pricing::MarketParams;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = 0.5 * std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// erf(x) for |x| < 3 via the Maclaurin series.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -x2 / n as f64;
        let contribution = term / (2 * n + 1) as f64;
        sum += contribution;
        if contribution.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

/// erfc(x) for x >= 3 via the Laplace continued fraction, evaluated backward.
fn erfc_cf(x: f64) -> f64 {
    let mut f = 0.0_f64;
    for n in (1..=60).rev() {
        f = n as f64 * 0.5 / (x + f);
    }
    (-x * x).exp() * FRAC_1_SQRT_PI / (x + f)
}

/// Complementary error function, accurate in both tails.
fn erfc(x: f64) -> f64 {
    let a = x.abs();
    let v = if a < 3.0 {
        1.0 - erf_series(a)
    } else {
        erfc_cf(a)
    };
    if x >= 0.0 {
        v
    } else {
        2.0 - v
    }
}

/// Standard normal CDF, no input validation. Internal callers guarantee
/// finiteness through `MarketParams` validation.
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub(crate) fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cumulative distribution function N(x).
pub fn norm_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("norm_cdf: non-finite input {x}")));
    }
    Ok(phi(x))
}

// Acklam coefficients for the inverse normal CDF.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

/// Acklam rational approximation, ~1e-9 relative accuracy.
fn quantile_approx(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse CDF, no input validation; p must lie in (0, 1).
pub(crate) fn quantile(p: f64) -> f64 {
    let x = quantile_approx(p);
    // One Newton step on the CDF takes the Acklam estimate to ~1e-15.
    let err = phi(x) - p;
    x - err / pdf(x)
}

/// Upper p-quantile of the standard normal, i.e. the inverse CDF at p.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "norm_quantile: p must lie in (0, 1), got {p}"
        )));
    }
    Ok(quantile(p))
}

/// p-quantile of the terminal stock price S(T) under the physical measure:
/// S0 * exp((mu - sigma^2/2) T + sigma sqrt(T) * q(p)).
pub fn lognormal_quantile(m: &MarketParams, p: f64) -> Result<f64> {
    let z = norm_quantile(p)?;
    Ok(m.s0 * ((m.mu - 0.5 * m.sigma * m.sigma) * m.t + m.sigma * m.t.sqrt() * z).exp())
}
