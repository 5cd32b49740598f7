//! Seeded Monte Carlo cross-check: terminal GBM samples, the empirical
//! CVaR estimator with its discrete-atom correction, and conditional-mean
//! verification.
//!
//! Normal variates come from the inverse CDF applied to a counter-based
//! uniform stream, so a given (seed, n_paths) always produces the same
//! sample multiset no matter how the work is chunked or parallelised.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{phi, quantile};
use crate::pricing::MarketParams;
use crate::riskform::{portfolio_value0, Portfolio};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Reproducible simulation setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Paths per work unit when running in parallel; has no effect on the
    /// generated samples.
    pub chunk: usize,
}

impl SimConfig {
    pub fn new(n_paths: usize, seed: u64, chunk: usize) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        if chunk == 0 {
            return Err(Error::Domain("chunk must be at least 1".into()));
        }
        Ok(Self { n_paths, seed, chunk })
    }
}

/// Empirical VaR/CVaR with a tail standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRisk {
    pub var_hat: f64,
    pub cvar_hat: f64,
    pub std_err: f64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output function on the counter stream seed + (i+1) * gamma.
fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in the open interval (0, 1) for path index i.
fn uniform(seed: u64, i: u64) -> f64 {
    ((mix(seed, i) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn terminal_price(m: &MarketParams, seed: u64, i: u64) -> f64 {
    let z = quantile(uniform(seed, i));
    m.s0 * ((m.mu - 0.5 * m.sigma * m.sigma) * m.t + m.sigma * m.t.sqrt() * z).exp()
}

/// Sequential terminal-price simulation.
pub fn simulate_terminal_seq(m: &MarketParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    validate(cfg)?;
    Ok((0..cfg.n_paths as u64)
        .map(|i| terminal_price(m, cfg.seed, i))
        .collect())
}

/// Terminal stock prices S(T) = S0 exp((mu - sigma^2/2) T + sigma sqrt(T) Z).
///
/// Parallel over chunks when the `parallel` feature is on; the output is
/// bit-identical to the sequential path.
pub fn simulate_terminal(m: &MarketParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    validate(cfg)?;
    #[cfg(feature = "parallel")]
    {
        let mut out = vec![0.0; cfg.n_paths];
        out.par_chunks_mut(cfg.chunk).enumerate().for_each(|(ci, chunk)| {
            let base = (ci * cfg.chunk) as u64;
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = terminal_price(m, cfg.seed, base + j as u64);
            }
        });
        Ok(out)
    }
    #[cfg(not(feature = "parallel"))]
    {
        simulate_terminal_seq(m, cfg)
    }
}

fn validate(cfg: &SimConfig) -> Result<()> {
    if cfg.n_paths == 0 || cfg.chunk == 0 {
        return Err(Error::Domain("n_paths and chunk must be at least 1".into()));
    }
    Ok(())
}

/// Empirical VaR/CVaR of a gain sample at tail mass alpha.
///
/// Applies the atom-corrected CVaR identity directly to the empirical
/// distribution: with q the upper alpha-quantile order statistic,
/// CVaR = -(1/alpha) [ E(X 1{X <= q}) + q (alpha - P(X <= q)) ].
pub fn empirical_cvar(gains: &[f64], alpha: f64) -> Result<EmpiricalRisk> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let n = gains.len();
    let needed = (1.0 / alpha).ceil() as usize;
    if n < needed {
        return Err(Error::Domain(format!(
            "need at least {needed} samples for alpha = {alpha}, got {n}"
        )));
    }
    let mut sorted = gains.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let nf = n as f64;
    let m = ((alpha * nf).ceil() as usize).clamp(1, n);
    let q = sorted[m - 1];
    let count_le = sorted.partition_point(|&g| g <= q);
    let sum_le: f64 = sorted[..count_le].iter().sum();
    let cvar_hat = -(sum_le / nf + q * (alpha - count_le as f64 / nf)) / alpha;
    let var_hat = -q;

    // Asymptotic standard error of the CVaR estimator: the within-tail
    // variance plus the quantile-estimation term (1-alpha)(q - tail mean)^2,
    // both scaled by the tail count.
    let tail = &sorted[..m];
    let mean = tail.iter().sum::<f64>() / m as f64;
    let var = tail.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>()
        / (m.max(2) - 1) as f64;
    let quantile_term = (1.0 - alpha) * (q - mean) * (q - mean);
    let std_err = ((var + quantile_term) / m as f64).sqrt();

    Ok(EmpiricalRisk { var_hat, cvar_hat, std_err })
}

/// Discounted gain per terminal-price sample:
/// e^{-rT} (x s + sum z_i (K_i - s)^+) - V0.
pub fn empirical_portfolio_gain(
    m: &MarketParams,
    pf: &Portfolio,
    samples: &[f64],
) -> Result<Vec<f64>> {
    let v0 = portfolio_value0(m, pf)?;
    let disc = (-m.r * m.t).exp();
    let x = pf.x();
    Ok(samples
        .iter()
        .map(|&s| {
            let mut payoff = x * s;
            for (&k, &zi) in pf.strikes().iter().zip(pf.z()) {
                payoff += zi * (k - s).max(0.0);
            }
            disc * payoff - v0
        })
        .collect())
}

/// Simulated conditional mean of S(T) given W(T) <= q sqrt(T), the MC
/// counterpart of the closed-form conditional stock mean.
pub fn conditional_mean_check(m: &MarketParams, q: f64, cfg: &SimConfig) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::Domain(format!("q must be finite, got {q}")));
    }
    if phi(q) * (cfg.n_paths as f64) < 1000.0 {
        return Err(Error::Domain(format!(
            "insufficient tail mass: N({q}) * {} < 1000",
            cfg.n_paths
        )));
    }
    let cutoff = m.s0 * ((m.mu - 0.5 * m.sigma * m.sigma) * m.t + m.sigma * m.t.sqrt() * q).exp();
    let samples = simulate_terminal(m, cfg)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in samples {
        if s <= cutoff {
            sum += s;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Domain("no samples fell in the conditioning tail".into()));
    }
    Ok(sum / count as f64)
}
