//! Black-Scholes put pricing under an arbitrary rate argument.
//!
//! The same parametric formula serves risk-neutral pricing (rate = r) and
//! the physical-measure variants (rate = mu) that appear in the CVaR
//! coefficient and the expected put payoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::phi;

/// The Black-Scholes world plus the confidence tail mass alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Spot price S(0).
    pub s0: f64,
    /// Physical drift per year.
    pub mu: f64,
    /// Volatility per sqrt(year).
    pub sigma: f64,
    /// Risk-free rate per year.
    pub r: f64,
    /// Maturity in years.
    pub t: f64,
    /// Tail mass of the risk measures, in (0, 1).
    pub alpha: f64,
}

impl MarketParams {
    pub fn new(s0: f64, mu: f64, sigma: f64, r: f64, t: f64, alpha: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::Domain(format!("s0 must be positive, got {s0}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !mu.is_finite() || !r.is_finite() {
            return Err(Error::Domain("mu and r must be finite".into()));
        }
        Ok(Self { s0, mu, sigma, r, t, alpha })
    }
}

/// A strike together with its time-0 price, its CVaR-contribution
/// coefficient and its expected payoff under the physical measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PutQuote {
    pub strike: f64,
    /// P(0), the Black-Scholes put premium at rate r.
    pub price0: f64,
    /// P^alpha(K), the per-put CVaR contribution coefficient.
    pub p_alpha: f64,
    /// E(P(T)) under the physical drift.
    pub expected_payoff: f64,
}

fn check_strike(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("strike must be positive, got {k}")));
    }
    Ok(())
}

/// d_+ and d_- of the Black-Scholes formula at an explicit rate.
///
/// Passing rate = r gives the pricing quantities; rate = mu gives the
/// physical-measure d_+/- used by the CVaR coefficient.
pub fn d_plus_minus(rate: f64, m: &MarketParams, k: f64) -> Result<(f64, f64)> {
    check_strike(k)?;
    let vol = m.sigma * m.t.sqrt();
    let d_plus = ((m.s0 / k).ln() + (rate + 0.5 * m.sigma * m.sigma) * m.t) / vol;
    Ok((d_plus, d_plus - vol))
}

/// European put value K e^{-rate T} N(-d_-) - S0 N(-d_+) at an explicit rate.
pub fn put_price(rate: f64, m: &MarketParams, k: f64) -> Result<f64> {
    let (d_plus, d_minus) = d_plus_minus(rate, m, k)?;
    Ok(k * (-rate * m.t).exp() * phi(-d_minus) - m.s0 * phi(-d_plus))
}

/// Expected put payoff E(K - S(T))^+ under the physical drift:
/// e^{mu T} P(mu, T, K, S0, sigma).
pub fn expected_put_payoff(m: &MarketParams, k: f64) -> Result<f64> {
    Ok((m.mu * m.t).exp() * put_price(m.mu, m, k)?)
}

/// Conditional mean of the terminal stock price given W(T) <= q sqrt(T):
/// S0 e^{mu T} N(q - sigma sqrt(T)) / N(q).
pub fn conditional_stock_mean(m: &MarketParams, q: f64) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::Domain(format!("q must be finite, got {q}")));
    }
    let vol = m.sigma * m.t.sqrt();
    Ok(m.s0 * (m.mu * m.t).exp() * phi(q - vol) / phi(q))
}
