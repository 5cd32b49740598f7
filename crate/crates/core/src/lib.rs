//! Closed-form risk analytics for a stock position hedged with European puts
//! in the Black-Scholes model.
//!
//! The crate computes Value at Risk and Conditional Value at Risk of a
//! stock-plus-puts portfolio in closed form, solves the small linear program
//! that spreads a hedging budget across strikes to minimise CVaR, and compares
//! the result with the optimal dynamically hedged CVaR. A seeded Monte Carlo
//! engine provides an independent empirical cross-check of every closed form.

pub mod dynamic;
pub mod error;
pub mod mathcore;
pub mod mc_oracle;
pub mod optimizer;
pub mod pricing;
pub mod riskform;
pub mod scenario;

pub use error::{Error, Result};
pub use pricing::{MarketParams, PutQuote};
pub use riskform::{Portfolio, RiskReport};
