//! Dynamic-hedging benchmark: the minimal CVaR attainable by a continuously
//! rebalanced self-financing strategy with the same budget, via the strike
//! level K*, the implicit barrier b(K) and the cost functional over K.
//!
//! Only the optimal value and its (K, b) description are computed; the
//! replicating trading strategy itself is out of scope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{lognormal_quantile, phi};
use crate::pricing::{d_plus_minus, put_price, MarketParams};

/// Borrow V0, hold x shares, spend c = V0 - x S0 on the hedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicProblem {
    pub market: MarketParams,
    pub v0: f64,
    pub c: f64,
}

impl DynamicProblem {
    pub fn new(market: MarketParams, v0: f64, c: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::Domain(format!("v0 must be positive, got {v0}")));
        }
        if !(c.is_finite() && c > 0.0 && c < v0) {
            return Err(Error::Domain(format!(
                "hedging budget must satisfy 0 < c < v0, got {c}"
            )));
        }
        Ok(Self { market, v0, c })
    }

    pub fn x(&self) -> f64 {
        (self.v0 - self.c) / self.market.s0
    }
}

/// Optimal dynamic hedge description: the strike level, its barrier and the
/// minimal CVaR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicSolution {
    pub k_star: f64,
    pub k_opt: f64,
    pub b_opt: f64,
    pub cvar: f64,
}

const REL_TOL: f64 = 1e-13;

/// Bisection of a continuous monotone-decreasing f on [lo, hi] with
/// f(lo) >= 0 >= f(hi).
fn bisect_decreasing(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_TOL * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// K* solving c = x * P(r, T, K*, S0, sigma); the put price is globally
/// increasing in K, so an expanding bracket plus bisection always lands.
pub fn solve_k_star(p: &DynamicProblem) -> Result<f64> {
    let m = &p.market;
    let x = p.x();
    let target = p.c / x;
    let mut lo = 1e-8 * m.s0;
    let mut hi = 2.0 * m.s0;
    let mut guard = 0;
    while put_price(m.r, m, hi)? < target {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Infeasible {
                requested: p.c,
                max_feasible: f64::INFINITY,
            });
        }
    }
    while put_price(m.r, m, lo)? > target {
        lo *= 0.5;
        guard += 1;
        if guard > 400 {
            return Err(Error::Bracket("no lower bracket for K*".into()));
        }
    }
    // c - x P(K) is decreasing in K with a sign change inside the bracket.
    Ok(bisect_decreasing(lo, hi, |k| {
        p.c - x * put_price(m.r, m, k).unwrap()
    }))
}

/// Value retained by the truncated claim x (K - S(T))^+ 1{S(T) > b},
/// minus the budget c. Decreasing in b from x P(K) - c (b -> 0) to -c
/// (b -> K).
fn barrier_residual(m: &MarketParams, x: f64, c: f64, k: f64, b: f64) -> f64 {
    let full = put_price(m.r, m, k).unwrap();
    let cut = put_price(m.r, m, b).unwrap();
    let (_, d_minus_b) = d_plus_minus(m.r, m, b).unwrap();
    x * (full - cut - (k - b) * (-m.r * m.t).exp() * phi(-d_minus_b)) - c
}

fn barrier_given_k_star(p: &DynamicProblem, k_star: f64, k: f64) -> Result<f64> {
    let m = &p.market;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("K must be positive, got {k}")));
    }
    if k < k_star - 1e-9 * k_star.max(1.0) {
        return Err(Error::Domain(format!(
            "barrier is defined only for K >= K* = {k_star}, got {k}"
        )));
    }
    let x = p.x();
    let lo = 1e-12 * k;
    if barrier_residual(m, x, p.c, k, lo) <= 0.0 {
        // K is (numerically) K* itself: the whole claim is worth exactly c.
        return Ok(0.0);
    }
    Ok(bisect_decreasing(lo, k, |b| {
        barrier_residual(m, x, p.c, k, b)
    }))
}

/// The barrier b(K) implicitly defined by
/// c = x E_*(e^{-rT} (K - S(T))^+ 1{S(T) > b}).
pub fn solve_barrier(p: &DynamicProblem, k: f64) -> Result<f64> {
    let k_star = solve_k_star(p)?;
    barrier_given_k_star(p, k_star, k)
}

fn cost_given_k_star(p: &DynamicProblem, k_star: f64, k: f64) -> Result<f64> {
    let m = &p.market;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("K must be positive, got {k}")));
    }
    let x = p.x();
    let disc = (-m.r * m.t).exp();
    let affine = p.v0 - x * disc * k;
    if k <= k_star {
        return Ok(affine);
    }
    let b = barrier_given_k_star(p, k_star, k)?;
    // E((K - S(T))^+ 1{S(T) <= b}) under the physical measure, in closed form.
    let tail = if b > 0.0 {
        let (_, d_minus_b) = d_plus_minus(m.mu, m, b)?;
        (m.mu * m.t).exp() * put_price(m.mu, m, b)? + (k - b) * phi(-d_minus_b)
    } else {
        0.0
    };
    Ok(affine + x * disc / m.alpha * tail)
}

/// The cost functional: V0 - x e^{-rT} K below K*, plus the discounted tail
/// expectation above it.
pub fn cost_functional(p: &DynamicProblem, k: f64) -> Result<f64> {
    let k_star = solve_k_star(p)?;
    cost_given_k_star(p, k_star, k)
}

const SCAN_POINTS: usize = 512;
const AUDIT_FACTOR: f64 = 2.0;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimisation of f on [lo, hi] to |hi - lo| <= tol.
fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut a = hi - GOLDEN * (hi - lo);
    let mut b = lo + GOLDEN * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - GOLDEN * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + GOLDEN * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Minimise the cost functional over K >= K*.
///
/// The functional is affine decreasing below K*, so the search starts there.
/// A coarse log-spaced scan guards against non-unimodality before
/// golden-section refinement in the best bracket.
pub fn minimize_dynamic_cvar(p: &DynamicProblem) -> Result<DynamicSolution> {
    let m = &p.market;
    let k_star = solve_k_star(p)?;
    let k_hi = AUDIT_FACTOR * lognormal_quantile(m, 0.9999)?;
    if k_hi <= k_star {
        return Err(Error::Bracket(format!(
            "scan ceiling {k_hi} does not exceed K* = {k_star}"
        )));
    }

    let ratio = (k_hi / k_star).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| k_star * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    for (i, &k) in grid.iter().enumerate() {
        let v = cost_given_k_star(p, k_star, k)?;
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }

    let lo = if best_idx == 0 { k_star } else { grid[best_idx - 1] };
    let hi = if best_idx + 1 == grid.len() {
        k_hi
    } else {
        grid[best_idx + 1]
    };
    let (k_opt, cvar) = golden_min(lo, hi, 1e-6, |k| {
        cost_given_k_star(p, k_star, k).unwrap()
    });
    let (k_opt, cvar) = if best_val < cvar {
        (grid[best_idx], best_val)
    } else {
        (k_opt, cvar)
    };

    let b_opt = if k_opt > k_star {
        barrier_given_k_star(p, k_star, k_opt)?
    } else {
        0.0
    };
    Ok(DynamicSolution { k_star, k_opt: k_opt.max(k_star), b_opt, cvar })
}
