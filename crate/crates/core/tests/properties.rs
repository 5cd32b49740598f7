//! Property tests over randomly generated markets and portfolios.

use proptest::prelude::*;

use cvar_hedge::mc_oracle::empirical_cvar;
use cvar_hedge::pricing::{put_price, MarketParams};
use cvar_hedge::riskform::{cvar_closed_form, var_closed_form, Portfolio};

fn market() -> impl Strategy<Value = MarketParams> {
    (
        50.0..200.0f64,
        -0.05..0.2f64,
        0.05..0.6f64,
        0.0..0.1f64,
        0.1..3.0f64,
        0.01..0.3f64,
    )
        .prop_map(|(s0, mu, sigma, r, t, alpha)| {
            MarketParams::new(s0, mu, sigma, r, t, alpha).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn put_price_within_arbitrage_bounds(m in market(), k_rel in 0.2..3.0f64) {
        let k = k_rel * m.s0;
        let p = put_price(m.r, &m, k).unwrap();
        let disc = (-m.r * m.t).exp();
        prop_assert!(p >= (k * disc - m.s0).max(0.0) - 1e-10);
        prop_assert!(p < k * disc);
    }

    #[test]
    fn cvar_dominates_var(
        m in market(),
        x in 0.5..20.0f64,
        k_rel in (0.4..1.6f64, 0.05..1.0f64),
        weight in 0.0..1.0f64,
    ) {
        let (k1_rel, dk) = k_rel;
        let strikes = vec![k1_rel * m.s0, (k1_rel + dk) * m.s0];
        let z_total = weight * x;
        let pf = Portfolio::new(x, strikes, vec![0.3 * z_total, 0.7 * z_total]).unwrap();
        let var = var_closed_form(&m, &pf).unwrap();
        let cvar = cvar_closed_form(&m, &pf).unwrap();
        prop_assert!(cvar >= var - 1e-9 * var.abs().max(1.0));
    }

    #[test]
    fn empirical_cvar_dominates_and_bounds(
        gains in prop::collection::vec(-1000.0..1000.0f64, 50..400),
        alpha in 0.05..0.9f64,
    ) {
        let est = empirical_cvar(&gains, alpha).unwrap();
        prop_assert!(est.cvar_hat >= est.var_hat - 1e-9);
        // CVaR cannot exceed the worst loss in the sample.
        let worst = -gains.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(est.cvar_hat <= worst + 1e-9);
    }

    #[test]
    fn empirical_cvar_shift_equivariant(
        gains in prop::collection::vec(-100.0..100.0f64, 40..200),
        shift in -50.0..50.0f64,
    ) {
        // Translation invariance of the estimator: shifting every gain by a
        // constant shifts CVaR by its negative.
        let base = empirical_cvar(&gains, 0.1).unwrap();
        let shifted: Vec<f64> = gains.iter().map(|g| g + shift).collect();
        let moved = empirical_cvar(&shifted, 0.1).unwrap();
        prop_assert!((moved.cvar_hat - (base.cvar_hat - shift)).abs() < 1e-9);
    }
}
