//! CVaR-optimal put allocation for a fixed budget, and the budget sweep that
//! traces the risk/return frontier.
//!
//! The program
//!
//!   max  z^T P^alpha
//!   s.t. z^T P(0) = c,  z^T 1 <= x,  z >= 0
//!
//! has two rows, so every vertex has at most two basic variables among
//! {z_1..z_n, slack}. With small strike chains, exhaustively solving the 2x2
//! bases is exact and doubles as its own optimality certificate; no iterative
//! simplex is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riskform::{self, Portfolio};
use crate::pricing::MarketParams;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A hedging budget c carved out of total capital V0; the stock quantity is
/// the remainder x = (V0 - c)/S0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeProblem {
    pub market: MarketParams,
    pub strikes: Vec<f64>,
    pub v0: f64,
    pub c: f64,
}

impl HedgeProblem {
    pub fn new(market: MarketParams, strikes: Vec<f64>, v0: f64, c: f64) -> Result<Self> {
        if strikes.is_empty() {
            return Err(Error::Domain("strike list must not be empty".into()));
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
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::Domain(format!("v0 must be positive, got {v0}")));
        }
        if !(c.is_finite() && (0.0..=v0).contains(&c)) {
            return Err(Error::Domain(format!("c must lie in [0, v0], got {c}")));
        }
        Ok(Self { market, strikes, v0, c })
    }

    /// Stock quantity implied by the budget split x S0 + c = V0.
    pub fn x(&self) -> f64 {
        (self.v0 - self.c) / self.market.s0
    }
}

/// Optimal allocation at one budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeSolution {
    pub z: Vec<f64>,
    pub cvar: f64,
    pub expected_gain: f64,
    pub active_strikes: Vec<usize>,
}

/// One budget grid point of a frontier sweep; infeasible budgets are kept
/// and flagged rather than dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub c: f64,
    pub x: f64,
    pub outcome: FrontierOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrontierOutcome {
    Solved(HedgeSolution),
    Infeasible { max_feasible: f64 },
}

/// Basic feasible solutions of the two-row LP, best-first.
///
/// Candidate bases are every strike pair (z_i, z_j) with both constraints
/// binding, and every single strike (z_i, slack) with only the budget
/// binding. The 2x2 systems are never singular: the determinant is
/// P(0)_j - P(0)_i, nonzero because put prices are strictly increasing in K
/// and duplicate strikes are rejected upstream.
fn best_vertex(p0: &[f64], p_alpha: &[f64], c: f64, x: f64) -> Option<Vec<f64>> {
    const FEAS_TOL: f64 = 1e-9;
    let n = p0.len();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;

    let mut consider = |active: Vec<usize>, z: Vec<f64>| {
        let obj: f64 = z.iter().zip(p_alpha).map(|(zi, pa)| zi * pa).sum();
        let better = match &best {
            None => true,
            // Ties broken toward the lexicographically smallest active set.
            Some((b, idx, _)) => obj > *b || (obj == *b && active < *idx),
        };
        if better {
            best = Some((obj, active, z));
        }
    };

    for i in 0..n {
        // Single strike basic, slack absorbs the rest of z^T 1 <= x.
        let zi = c / p0[i];
        if zi <= x + FEAS_TOL {
            let mut z = vec![0.0; n];
            z[i] = zi.min(x);
            consider(vec![i], z);
        }
        for j in (i + 1)..n {
            // Both constraints binding: [p0_i p0_j; 1 1] [zi; zj] = [c; x].
            let det = p0[i] - p0[j];
            let zi = (c - x * p0[j]) / det;
            let zj = (x * p0[i] - c) / det;
            if zi >= -FEAS_TOL && zj >= -FEAS_TOL {
                let mut z = vec![0.0; n];
                z[i] = zi.max(0.0);
                z[j] = zj.max(0.0);
                consider(vec![i, j], z);
            }
        }
    }

    best.map(|(_, _, z)| z)
}

/// Solve the allocation LP for one budget and price the solution.
pub fn solve_budget(p: &HedgeProblem) -> Result<HedgeSolution> {
    let m = &p.market;
    let x = p.x();
    let quotes = riskform::quote_chain(m, &p.strikes)?;
    let p0: Vec<f64> = quotes.iter().map(|q| q.price0).collect();
    let p_alpha: Vec<f64> = quotes.iter().map(|q| q.p_alpha).collect();

    let z = if p.c == 0.0 {
        vec![0.0; p.strikes.len()]
    } else {
        let max_feasible = x * p0.iter().cloned().fold(f64::MIN, f64::max);
        match best_vertex(&p0, &p_alpha, p.c, x) {
            Some(z) => z,
            None => {
                return Err(Error::Infeasible {
                    requested: p.c,
                    max_feasible,
                })
            }
        }
    };

    let pf = Portfolio::new(x, p.strikes.clone(), z.clone())?;
    let cvar = riskform::cvar_closed_form(m, &pf)?;
    let expected_gain = riskform::expected_gain(m, &pf)?;
    let active_strikes = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
    Ok(HedgeSolution { z, cvar, expected_gain, active_strikes })
}

fn sweep_row(market: &MarketParams, strikes: &[f64], v0: f64, c: f64) -> Result<FrontierRow> {
    let p = HedgeProblem::new(*market, strikes.to_vec(), v0, c)?;
    let x = p.x();
    let outcome = match solve_budget(&p) {
        Ok(sol) => FrontierOutcome::Solved(sol),
        Err(Error::Infeasible { max_feasible, .. }) => FrontierOutcome::Infeasible { max_feasible },
        Err(e) => return Err(e),
    };
    Ok(FrontierRow { c, x, outcome })
}

/// Sequential budget sweep.
pub fn sweep_frontier_seq(
    market: &MarketParams,
    strikes: &[f64],
    v0: f64,
    c_grid: &[f64],
) -> Result<Vec<FrontierRow>> {
    c_grid
        .iter()
        .map(|&c| sweep_row(market, strikes, v0, c))
        .collect()
}

/// Budget sweep over a grid; grid points are independent and evaluated in
/// parallel when the `parallel` feature is enabled, with ordered assembly.
pub fn sweep_frontier(
    market: &MarketParams,
    strikes: &[f64],
    v0: f64,
    c_grid: &[f64],
) -> Result<Vec<FrontierRow>> {
    #[cfg(feature = "parallel")]
    {
        c_grid
            .par_iter()
            .map(|&c| sweep_row(market, strikes, v0, c))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_frontier_seq(market, strikes, v0, c_grid)
    }
}
