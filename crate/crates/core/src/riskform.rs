//! Closed-form VaR and CVaR for a stock position hedged with long puts.
//!
//! The formulas hold under the hypothesis z_i >= 0, sum z_i <= x, which makes
//! the terminal payoff a nondecreasing function of S(T). Outside it they are
//! simply wrong, so the hypothesis is enforced as a hard contract error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{phi, quantile};
use crate::pricing::{d_plus_minus, expected_put_payoff, put_price, MarketParams, PutQuote};

/// x shares of stock plus z_i long puts at strike K_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    x: f64,
    strikes: Vec<f64>,
    z: Vec<f64>,
}

impl Portfolio {
    pub fn new(x: f64, strikes: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
        }
        if strikes.len() != z.len() {
            return Err(Error::Domain(format!(
                "strikes and z lengths differ: {} vs {}",
                strikes.len(),
                z.len()
            )));
        }
        for w in strikes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(
                    "strikes must be strictly increasing with no duplicates".into(),
                ));
            }
        }
        for &k in &strikes {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Domain(format!("strike must be positive, got {k}")));
            }
        }
        for &zi in &z {
            if !(zi.is_finite() && zi >= 0.0) {
                return Err(Error::Contract(format!(
                    "put quantities must be nonnegative, got {zi}"
                )));
            }
        }
        let total: f64 = z.iter().sum();
        if total > x + 1e-12 {
            return Err(Error::Contract(format!(
                "sum of put quantities {total} exceeds stock quantity {x}"
            )));
        }
        Ok(Self { x, strikes, z })
    }

    /// Stock-only position.
    pub fn stock_only(x: f64) -> Result<Self> {
        Self::new(x, Vec::new(), Vec::new())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }
}

/// VaR, CVaR and expected discounted gain of one portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub value0: f64,
    pub var_alpha: f64,
    pub cvar_alpha: f64,
    pub expected_gain: f64,
}

/// Time-0 value x S0 + sum z_i P_i(0).
pub fn portfolio_value0(m: &MarketParams, pf: &Portfolio) -> Result<f64> {
    let mut v = pf.x * m.s0;
    for (&k, &zi) in pf.strikes.iter().zip(&pf.z) {
        v += zi * put_price(m.r, m, k)?;
    }
    Ok(v)
}

/// Closed-form VaR of the discounted gain: V0 - e^{-rT} (x q^a(S(T)) +
/// sum z_i (K_i - q^a(S(T)))^+).
pub fn var_closed_form(m: &MarketParams, pf: &Portfolio) -> Result<f64> {
    let v0 = portfolio_value0(m, pf)?;
    let q_z = quantile(m.alpha);
    let s_q = m.s0 * ((m.mu - 0.5 * m.sigma * m.sigma) * m.t + m.sigma * m.t.sqrt() * q_z).exp();
    let mut terminal = pf.x * s_q;
    for (&k, &zi) in pf.strikes.iter().zip(&pf.z) {
        terminal += zi * (k - s_q).max(0.0);
    }
    Ok(v0 - (-m.r * m.t).exp() * terminal)
}

fn p_alpha_at(m: &MarketParams, q_z: f64, k: f64) -> Result<f64> {
    let (_, d_minus_mu) = d_plus_minus(m.mu, m, k)?;
    let d_minus = d_minus_mu.max(-q_z);
    let d_plus = d_minus + m.sigma * m.t.sqrt();
    Ok(k * (-m.mu * m.t).exp() * phi(-d_minus) - m.s0 * phi(-d_plus))
}

/// The per-put CVaR contribution coefficient P^alpha(K).
pub fn p_alpha_coefficient(m: &MarketParams, k: f64) -> Result<f64> {
    p_alpha_at(m, quantile(m.alpha), k)
}

/// CVaR with the tail quantile q^alpha(Z) precomputed, so the clamp is
/// numerically identical across strikes.
fn cvar_at(m: &MarketParams, pf: &Portfolio, q_z: f64) -> Result<f64> {
    let v0 = portfolio_value0(m, pf)?;
    let mut bracket = pf.x * m.s0 * phi(q_z - m.sigma * m.t.sqrt());
    for (&k, &zi) in pf.strikes.iter().zip(&pf.z) {
        bracket += zi * p_alpha_at(m, q_z, k)?;
    }
    Ok(v0 - ((m.mu - m.r) * m.t).exp() / m.alpha * bracket)
}

/// Closed-form CVaR of the discounted gain of a stock+puts portfolio.
pub fn cvar_closed_form(m: &MarketParams, pf: &Portfolio) -> Result<f64> {
    cvar_at(m, pf, quantile(m.alpha))
}

/// Single-strike CVaR; identical to `cvar_closed_form` with a one-element
/// strike list, kept as its own entry point for the consistency check.
pub fn cvar_single_strike(m: &MarketParams, x: f64, z: f64, k: f64) -> Result<f64> {
    if !(z >= 0.0 && z <= x) {
        return Err(Error::Contract(format!(
            "single-strike CVaR requires 0 <= z <= x, got z = {z}, x = {x}"
        )));
    }
    cvar_closed_form(m, &Portfolio::new(x, vec![k], vec![z])?)
}

/// Expected discounted gain e^{-rT}(x S0 e^{mu T} + z^T E(P(T))) - V0.
pub fn expected_gain(m: &MarketParams, pf: &Portfolio) -> Result<f64> {
    let v0 = portfolio_value0(m, pf)?;
    let mut terminal = pf.x * m.s0 * (m.mu * m.t).exp();
    for (&k, &zi) in pf.strikes.iter().zip(&pf.z) {
        terminal += zi * expected_put_payoff(m, k)?;
    }
    Ok((-m.r * m.t).exp() * terminal - v0)
}

/// Full report: value, VaR, CVaR and expected gain in one pass.
pub fn risk_report(m: &MarketParams, pf: &Portfolio) -> Result<RiskReport> {
    let q_z = quantile(m.alpha);
    Ok(RiskReport {
        value0: portfolio_value0(m, pf)?,
        var_alpha: var_closed_form(m, pf)?,
        cvar_alpha: cvar_at(m, pf, q_z)?,
        expected_gain: expected_gain(m, pf)?,
    })
}

/// Price, CVaR coefficient and expected payoff for each strike.
pub fn quote_chain(m: &MarketParams, strikes: &[f64]) -> Result<Vec<PutQuote>> {
    let q_z = quantile(m.alpha);
    strikes
        .iter()
        .map(|&k| {
            Ok(PutQuote {
                strike: k,
                price0: put_price(m.r, m, k)?,
                p_alpha: p_alpha_at(m, q_z, k)?,
                expected_payoff: expected_put_payoff(m, k)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::put_price;

    fn example_params() -> MarketParams {
        MarketParams::new(100.0, 0.10, 0.2, 0.03, 1.0, 0.05).unwrap()
    }

    const EXAMPLE_STRIKES: [f64; 5] = [80.0, 90.0, 100.0, 110.0, 120.0];

    #[test]
    fn portfolio_validation() {
        assert!(Portfolio::new(10.0, vec![80.0, 80.0], vec![1.0, 1.0]).is_err());
        assert!(Portfolio::new(10.0, vec![90.0, 80.0], vec![1.0, 1.0]).is_err());
        assert!(Portfolio::new(10.0, vec![80.0], vec![-1.0]).is_err());
        assert!(Portfolio::new(1.0, vec![80.0], vec![2.0]).is_err());
        assert!(Portfolio::new(10.0, vec![80.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn value0_examples() {
        let m = example_params();
        let stock = Portfolio::stock_only(10.0).unwrap();
        assert!((portfolio_value0(&m, &stock).unwrap() - 1000.0).abs() < 1e-12);

        // Budget identity V0 = x S0 + c on the c = 20 frontier row.
        let pf = Portfolio::new(9.8, vec![80.0, 90.0], vec![3.74, 6.06]).unwrap();
        assert!((portfolio_value0(&m, &pf).unwrap() - 1000.0).abs() < 0.05);

        let empty = Portfolio::stock_only(0.0).unwrap();
        assert_eq!(portfolio_value0(&m, &empty).unwrap(), 0.0);
    }

    #[test]
    fn var_stock_only() {
        let m = example_params();
        let pf = Portfolio::stock_only(10.0).unwrap();
        let var = var_closed_form(&m, &pf).unwrap();
        assert!((var - 243.4).abs() < 0.1);
    }

    #[test]
    fn var_fully_protected_is_deterministic() {
        let m = example_params();
        // z = x at a strike far above any reachable quantile: the payoff is
        // the constant x K, so VaR collapses to V0 - e^{-rT} x K.
        let k = 1000.0;
        let pf = Portfolio::new(5.0, vec![k], vec![5.0]).unwrap();
        let v0 = portfolio_value0(&m, &pf).unwrap();
        let var = var_closed_form(&m, &pf).unwrap();
        assert!((var - (v0 - (-m.r * m.t).exp() * 5.0 * k)).abs() < 1e-9);
    }

    #[test]
    fn p_alpha_example_vector() {
        let m = example_params();
        for (k, want) in [
            (80.0, 0.366),
            (90.0, 0.819),
            (100.0, 1.271),
            (110.0, 1.724),
            (120.0, 2.176),
        ] {
            let p = p_alpha_coefficient(&m, k).unwrap();
            assert!((p - want).abs() < 1e-3, "P^a({k}) = {p}, want {want}");
        }
        assert!(p_alpha_coefficient(&m, 1e-9).unwrap().abs() < 1e-12);
        assert!(p_alpha_coefficient(&m, -1.0).is_err());
    }

    #[test]
    fn p_alpha_continuous_across_clamp() {
        let m = example_params();
        // The clamp binds for K above the alpha-quantile of S(T).
        let k_clamp = crate::mathcore::lognormal_quantile(&m, m.alpha).unwrap();
        let below = p_alpha_coefficient(&m, k_clamp - 1e-9).unwrap();
        let above = p_alpha_coefficient(&m, k_clamp + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn cvar_example_rows() {
        let m = example_params();
        let stock = Portfolio::stock_only(10.0).unwrap();
        assert!((cvar_closed_form(&m, &stock).unwrap() - 302.24).abs() < 0.01);

        let pf = Portfolio::new(
            9.0,
            vec![100.0, 110.0],
            vec![1.50, 7.50],
        )
        .unwrap();
        assert!((cvar_closed_form(&m, &pf).unwrap() - 53.82).abs() < 0.05);
    }

    #[test]
    fn cvar_rejects_hypothesis_violation() {
        let m = example_params();
        assert!(Portfolio::new(1.0, vec![100.0], vec![1.5]).is_err());
        assert!(cvar_single_strike(&m, 1.0, 1.5, 100.0).is_err());
        assert!(cvar_single_strike(&m, 1.0, -0.1, 100.0).is_err());
    }

    #[test]
    fn single_strike_matches_theorem() {
        let m = example_params();
        for &k in &EXAMPLE_STRIKES {
            for z in [0.0, 1.0, 4.2, 10.0] {
                let via_prop = cvar_single_strike(&m, 10.0, z, k).unwrap();
                let via_thm =
                    cvar_closed_form(&m, &Portfolio::new(10.0, vec![k], vec![z]).unwrap()).unwrap();
                assert!((via_prop - via_thm).abs() < 1e-12);
            }
        }
        // z = 0 matches the stock-only row.
        assert!((cvar_single_strike(&m, 10.0, 0.0, 100.0).unwrap() - 302.24).abs() < 0.01);
        // Continuity as z approaches x.
        let at_x = cvar_single_strike(&m, 10.0, 10.0, 100.0).unwrap();
        let near_x = cvar_single_strike(&m, 10.0, 10.0 - 1e-9, 100.0).unwrap();
        assert!(at_x.is_finite());
        assert!((at_x - near_x).abs() < 1e-6);
    }

    #[test]
    fn cvar_fully_protected_asymptote() {
        let m = example_params();
        // With z = x and a huge strike the portfolio pays x K for sure.
        let k = 5000.0;
        let pf = Portfolio::new(3.0, vec![k], vec![3.0]).unwrap();
        let v0 = portfolio_value0(&m, &pf).unwrap();
        let cvar = cvar_closed_form(&m, &pf).unwrap();
        assert!((cvar - (v0 - (-m.r * m.t).exp() * 3.0 * k)).abs() < 1e-6);
    }

    #[test]
    fn expected_gain_rows() {
        let m = example_params();
        let stock = Portfolio::stock_only(10.0).unwrap();
        assert!((expected_gain(&m, &stock).unwrap() - 72.51).abs() < 0.01);

        let pf = Portfolio::new(8.4, vec![110.0, 120.0], vec![0.20, 8.20]).unwrap();
        assert!((expected_gain(&m, &pf).unwrap() - 19.42).abs() < 0.05);
    }

    #[test]
    fn expected_gain_vanishes_at_mu_equals_r() {
        let m = MarketParams::new(100.0, 0.03, 0.2, 0.03, 1.0, 0.05).unwrap();
        let pf = Portfolio::stock_only(7.0).unwrap();
        assert!(expected_gain(&m, &pf).unwrap().abs() < 1e-10);
    }

    #[test]
    fn cvar_dominates_var() {
        let m = example_params();
        for pf in [
            Portfolio::stock_only(10.0).unwrap(),
            Portfolio::new(9.8, vec![80.0, 90.0], vec![3.74, 6.06]).unwrap(),
            Portfolio::new(8.4, vec![110.0, 120.0], vec![0.20, 8.20]).unwrap(),
        ] {
            let r = risk_report(&m, &pf).unwrap();
            assert!(r.cvar_alpha >= r.var_alpha - 1e-12);
        }
    }

    #[test]
    fn single_strike_slope_matches_finite_difference() {
        let m = example_params();
        // CVaR is affine in z with slope P(0) - (1/a) e^{(mu-r)T} P^a(K).
        for &k in &EXAMPLE_STRIKES {
            let analytic = put_price(m.r, &m, k).unwrap()
                - ((m.mu - m.r) * m.t).exp() / m.alpha * p_alpha_coefficient(&m, k).unwrap();
            let h = 1e-4;
            let fd = (cvar_single_strike(&m, 10.0, 2.0 + h, k).unwrap()
                - cvar_single_strike(&m, 10.0, 2.0 - h, k).unwrap())
                / (2.0 * h);
            assert!((analytic - fd).abs() < 1e-8, "slope mismatch at K = {k}");
        }
    }

    #[test]
    fn quote_chain_matches_pointwise_ops() {
        let m = example_params();
        let quotes = quote_chain(&m, &EXAMPLE_STRIKES).unwrap();
        assert_eq!(quotes.len(), 5);
        for q in &quotes {
            assert!((q.price0 - put_price(m.r, &m, q.strike).unwrap()).abs() < 1e-15);
            assert!((q.p_alpha - p_alpha_coefficient(&m, q.strike).unwrap()).abs() < 1e-15);
            assert!(q.price0 >= (q.strike * (-m.r * m.t).exp() - m.s0).max(0.0));
            assert!(q.price0 < q.strike * (-m.r * m.t).exp());
            assert!(q.p_alpha >= 0.0 && q.expected_payoff >= 0.0);
        }
    }
}
