//! Scenario configuration and the workflows behind the CLI subcommands:
//! strike-chain quotes, the budget frontier, the dynamic benchmark and the
//! Monte Carlo verification report, each renderable as an aligned table,
//! CSV or JSON.

use serde::{Deserialize, Serialize};

use crate::dynamic::{minimize_dynamic_cvar, DynamicProblem};
use crate::error::{Error, Result};
use crate::mc_oracle::{empirical_cvar, empirical_portfolio_gain, simulate_terminal, SimConfig};
use crate::optimizer::{sweep_frontier, FrontierOutcome, FrontierRow};
use crate::pricing::{MarketParams, PutQuote};
use crate::riskform::{cvar_closed_form, quote_chain, Portfolio};

/// One scenario: market, strike chain, capital, budget grid and an optional
/// Monte Carlo section. Rates and volatilities are plain decimals
/// (mu = 0.10 means 10% drift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub t: f64,
    pub alpha: f64,
    pub strikes: Vec<f64>,
    pub v0: f64,
    #[serde(default)]
    pub c_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
}

/// Monte Carlo settings for the `verify` workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSection {
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "default_chunk")]
    pub chunk: usize,
}

fn default_chunk() -> usize {
    65_536
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(s).map_err(|e| Error::Config(format!("failed to parse config: {e}")))?;
        cfg.market()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn market(&self) -> Result<MarketParams> {
        MarketParams::new(self.s0, self.mu, self.sigma, self.r, self.t, self.alpha)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let mc = self
            .mc
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [mc] section".into()))?;
        SimConfig::new(mc.paths, mc.seed, mc.chunk)
    }
}

/// Output format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicRow {
    pub c: f64,
    pub x: f64,
    pub k: f64,
    pub b: f64,
    pub cvar_dynamic: f64,
    pub cvar_static: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub c: f64,
    pub x: f64,
    pub cvar_closed: f64,
    pub cvar_mc: f64,
    pub std_err: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum ReportRows {
    Price(Vec<PutQuote>),
    Optimize(Vec<FrontierRow>),
    Dynamic(Vec<DynamicRow>),
    Verify(Vec<VerifyRow>),
}

/// A rendered-ready result of one workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: ScenarioConfig,
    pub seed: Option<u64>,
    pub rows: ReportRows,
    pub notes: Vec<String>,
}

/// Quote every strike in the chain.
pub fn run_price(config: &ScenarioConfig) -> Result<Report> {
    let m = config.market()?;
    if config.strikes.is_empty() {
        return Err(Error::Domain("strike list must not be empty".into()));
    }
    let quotes = quote_chain(&m, &config.strikes)?;
    Ok(Report {
        config: config.clone(),
        seed: None,
        rows: ReportRows::Price(quotes),
        notes: Vec::new(),
    })
}

/// Sweep the budget grid and report the optimal allocation per budget.
pub fn run_optimize(config: &ScenarioConfig) -> Result<Report> {
    let m = config.market()?;
    if config.c_grid.is_empty() {
        return Err(Error::Config("optimize requires a non-empty c_grid".into()));
    }
    let rows = sweep_frontier(&m, &config.strikes, config.v0, &config.c_grid)?;
    Ok(Report {
        config: config.clone(),
        seed: None,
        rows: ReportRows::Optimize(rows),
        notes: Vec::new(),
    })
}

/// Dynamic-hedging benchmark against the static frontier.
pub fn run_dynamic(config: &ScenarioConfig) -> Result<Report> {
    let m = config.market()?;
    if config.c_grid.is_empty() {
        return Err(Error::Config("dynamic requires a non-empty c_grid".into()));
    }
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    for &c in &config.c_grid {
        if c <= 0.0 {
            notes.push(format!(
                "c = {c} skipped: the dynamic problem requires a positive hedging budget"
            ));
            continue;
        }
        let p = DynamicProblem::new(m, config.v0, c)?;
        let sol = minimize_dynamic_cvar(&p)?;
        let static_rows = sweep_frontier(&m, &config.strikes, config.v0, &[c])?;
        let cvar_static = match &static_rows[0].outcome {
            FrontierOutcome::Solved(s) => s.cvar,
            FrontierOutcome::Infeasible { .. } => f64::NAN,
        };
        rows.push(DynamicRow {
            c,
            x: p.x(),
            k: sol.k_opt,
            b: sol.b_opt,
            cvar_dynamic: sol.cvar,
            cvar_static,
            gap: cvar_static - sol.cvar,
        });
    }
    Ok(Report {
        config: config.clone(),
        seed: None,
        rows: ReportRows::Dynamic(rows),
        notes,
    })
}

/// Cross-check every feasible frontier row against the Monte Carlo
/// estimator at the 3-standard-error gate.
pub fn run_verify(config: &ScenarioConfig) -> Result<Report> {
    let m = config.market()?;
    let sim = config.sim_config()?;
    if config.c_grid.is_empty() {
        return Err(Error::Config("verify requires a non-empty c_grid".into()));
    }
    let samples = simulate_terminal(&m, &sim)?;
    let frontier = sweep_frontier(&m, &config.strikes, config.v0, &config.c_grid)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for row in &frontier {
        match &row.outcome {
            FrontierOutcome::Solved(sol) => {
                let pf = Portfolio::new(row.x, config.strikes.clone(), sol.z.clone())?;
                let gains = empirical_portfolio_gain(&m, &pf, &samples)?;
                let emp = empirical_cvar(&gains, m.alpha)?;
                let closed = cvar_closed_form(&m, &pf)?;
                // Optimal vertices often floor the whole alpha-tail, which
                // drives the tail standard error to rounding noise; an
                // absolute agreement floor keeps the gate meaningful there.
                let floor = 1e-9 * closed.abs().max(1.0);
                let z_score = (closed - emp.cvar_hat) / emp.std_err.max(floor);
                rows.push(VerifyRow {
                    c: row.c,
                    x: row.x,
                    cvar_closed: closed,
                    cvar_mc: emp.cvar_hat,
                    std_err: emp.std_err,
                    z_score,
                    pass: (closed - emp.cvar_hat).abs() <= 3.0 * emp.std_err + floor,
                });
            }
            FrontierOutcome::Infeasible { max_feasible } => {
                notes.push(format!(
                    "c = {} skipped: infeasible (max feasible spend {max_feasible:.3})",
                    row.c
                ));
            }
        }
    }
    Ok(Report {
        config: config.clone(),
        seed: Some(sim.seed),
        rows: ReportRows::Verify(rows),
        notes,
    })
}

impl Report {
    pub fn all_passed(&self) -> bool {
        match &self.rows {
            ReportRows::Verify(rows) => rows.iter().all(|r| r.pass),
            _ => true,
        }
    }

    pub fn feasible_row_count(&self) -> usize {
        match &self.rows {
            ReportRows::Optimize(rows) => rows
                .iter()
                .filter(|r| matches!(r.outcome, FrontierOutcome::Solved(_)))
                .count(),
            ReportRows::Price(rows) => rows.len(),
            ReportRows::Dynamic(rows) => rows.len(),
            ReportRows::Verify(rows) => rows.len(),
        }
    }

    fn headers(&self) -> Vec<String> {
        match &self.rows {
            ReportRows::Price(_) => {
                vec!["K".into(), "P(0)".into(), "P^alpha".into(), "E(P(T))".into()]
            }
            ReportRows::Optimize(rows) => {
                let n = rows
                    .iter()
                    .map(|r| match &r.outcome {
                        FrontierOutcome::Solved(s) => s.z.len(),
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(0);
                let mut h = vec!["c".to_string(), "x".to_string()];
                for i in 1..=n {
                    h.push(format!("z{i}"));
                }
                h.push("CVaR".into());
                h.push("E".into());
                h.push("status".into());
                h
            }
            ReportRows::Dynamic(_) => vec![
                "c".into(),
                "x".into(),
                "K".into(),
                "b".into(),
                "CVaR_dyn".into(),
                "CVaR_static".into(),
                "gap".into(),
            ],
            ReportRows::Verify(_) => vec![
                "c".into(),
                "x".into(),
                "CVaR_closed".into(),
                "CVaR_mc".into(),
                "std_err".into(),
                "z_score".into(),
                "result".into(),
            ],
        }
    }

    /// Cell strings; `display` selects 2-decimal table rounding, otherwise
    /// full double precision for CSV.
    fn cells(&self, display: bool) -> Vec<Vec<String>> {
        let num = |v: f64| {
            if display {
                format!("{v:.2}")
            } else {
                format!("{v}")
            }
        };
        match &self.rows {
            ReportRows::Price(rows) => rows
                .iter()
                .map(|q| {
                    let price = |v: f64| if display { format!("{v:.3}") } else { format!("{v}") };
                    vec![num(q.strike), price(q.price0), price(q.p_alpha), price(q.expected_payoff)]
                })
                .collect(),
            ReportRows::Optimize(rows) => {
                let n = self.headers().len() - 5;
                rows.iter()
                    .map(|r| {
                        let mut cells = vec![num(r.c), num(r.x)];
                        match &r.outcome {
                            FrontierOutcome::Solved(s) => {
                                for &zi in &s.z {
                                    cells.push(num(zi));
                                }
                                cells.resize(2 + n, num(0.0));
                                cells.push(num(s.cvar));
                                cells.push(num(s.expected_gain));
                                cells.push("ok".into());
                            }
                            FrontierOutcome::Infeasible { max_feasible } => {
                                cells.resize(2 + n, "-".into());
                                cells.push("-".into());
                                cells.push("-".into());
                                cells.push(format!("INFEASIBLE (max c = {:.2})", max_feasible));
                            }
                        }
                        cells
                    })
                    .collect()
            }
            ReportRows::Dynamic(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.c),
                        num(r.x),
                        num(r.k),
                        num(r.b),
                        num(r.cvar_dynamic),
                        num(r.cvar_static),
                        num(r.gap),
                    ]
                })
                .collect(),
            ReportRows::Verify(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.c),
                        num(r.x),
                        num(r.cvar_closed),
                        num(r.cvar_mc),
                        num(r.std_err),
                        num(r.z_score),
                        if r.pass { "PASS".into() } else { "FAIL".into() },
                    ]
                })
                .collect(),
        }
    }

    fn render_table(&self) -> String {
        let headers = self.headers();
        let rows = self.cells(true);
        let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:>w$}", c, w = widths[i]))
                .collect();
            parts.join("  ")
        };
        out.push_str(&line(&headers));
        out.push('\n');
        for row in &rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        if let ReportRows::Verify(_) = self.rows {
            out.push_str(if self.all_passed() {
                "overall: PASS\n"
            } else {
                "overall: FAIL\n"
            });
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.headers().join(","));
        out.push('\n');
        for row in self.cells(false) {
            let escaped: Vec<String> = row
                .iter()
                .map(|c| {
                    if c.contains(',') {
                        format!("\"{c}\"")
                    } else {
                        c.clone()
                    }
                })
                .collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let body = serde_json::json!({
            "params": self.config,
            "rows": self.rows,
            "meta": {
                "version": env!("CARGO_PKG_VERSION"),
                "seed": self.seed,
                "notes": self.notes,
            },
        });
        serde_json::to_string_pretty(&body).expect("report serialization cannot fail")
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_TOML: &str = r#"
        s0 = 100.0
        mu = 0.10
        sigma = 0.2
        r = 0.03
        t = 1.0
        alpha = 0.05
        strikes = [80.0, 90.0, 100.0, 110.0, 120.0]
        v0 = 1000.0
        c_grid = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0]

        [mc]
        paths = 100000
        seed = 42
    "#;

    fn config() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(EXAMPLE_TOML).unwrap()
    }

    #[test]
    fn config_parses_and_validates() {
        let cfg = config();
        assert_eq!(cfg.strikes.len(), 5);
        assert_eq!(cfg.mc.unwrap().chunk, 65_536);
        assert!(ScenarioConfig::from_toml_str("s0 = -1").is_err());
        let bad = EXAMPLE_TOML.replace("alpha = 0.05", "alpha = 1.5");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn price_rows_match_example_vectors() {
        let report = run_price(&config()).unwrap();
        match &report.rows {
            ReportRows::Price(rows) => {
                assert_eq!(rows.len(), 5);
                assert!((rows[2].price0 - 6.458).abs() < 1e-3);
                assert!((rows[0].p_alpha - 0.366).abs() < 1e-3);
                assert!((rows[4].expected_payoff - 14.686).abs() < 1e-3);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn price_rejects_empty_strikes() {
        let mut cfg = config();
        cfg.strikes.clear();
        assert!(run_price(&cfg).is_err());
    }

    #[test]
    fn formats_agree_to_printed_precision() {
        let report = run_optimize(&config()).unwrap();
        let table = report.render(Format::Table);
        let csv = report.render(Format::Csv);
        let json = report.render(Format::Json);

        // Spot-check the c = 100 row across the three emitters.
        assert!(table.contains("53.82"));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = parsed["rows"]["rows"].as_array().unwrap();
        let row = rows.iter().find(|r| r["c"] == 100.0).unwrap();
        let cvar = row["outcome"]["Solved"]["cvar"].as_f64().unwrap();
        assert!((cvar - 53.82).abs() < 0.05);
        let csv_row: Vec<&str> = csv
            .lines()
            .find(|l| l.starts_with("100,"))
            .unwrap()
            .split(',')
            .collect();
        let csv_cvar: f64 = csv_row[7].parse().unwrap();
        assert!((csv_cvar - cvar).abs() < 1e-12);
    }

    #[test]
    fn json_params_round_trip() {
        let report = run_price(&config()).unwrap();
        let json = report.render(Format::Json);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let cfg2: ScenarioConfig = serde_json::from_value(parsed["params"].clone()).unwrap();
        let report2 = run_price(&cfg2).unwrap();
        assert_eq!(report.rows, report2.rows);
    }

    #[test]
    fn dynamic_skips_zero_budget_with_note() {
        let report = run_dynamic(&config()).unwrap();
        match &report.rows {
            ReportRows::Dynamic(rows) => {
                assert_eq!(rows.len(), 8);
                assert!((rows[0].cvar_static - 180.35).abs() < 0.05);
                assert!((rows[0].cvar_dynamic - 172.06).abs() < 0.05);
                assert!((rows[0].gap - 8.29).abs() < 0.1);
            }
            _ => unreachable!(),
        }
        assert_eq!(report.notes.len(), 1);
        assert!(report.notes[0].contains("c = 0"));
    }

    #[test]
    fn verify_report_is_deterministic() {
        let mut cfg = config();
        cfg.c_grid = vec![0.0, 100.0];
        let a = run_verify(&cfg).unwrap();
        let b = run_verify(&cfg).unwrap();
        assert_eq!(a.render(Format::Json), b.render(Format::Json));
        assert!(a.all_passed());
    }

    #[test]
    fn verify_rejects_too_few_paths() {
        let mut cfg = config();
        cfg.mc = Some(McSection { paths: 10, seed: 1, chunk: 8 });
        cfg.c_grid = vec![0.0];
        assert!(run_verify(&cfg).is_err());
    }

    #[test]
    fn optimize_flags_infeasible_rows() {
        let mut cfg = config();
        cfg.c_grid = vec![0.0, 400.0];
        let report = run_optimize(&cfg).unwrap();
        assert_eq!(report.feasible_row_count(), 1);
        let table = report.render(Format::Table);
        assert!(table.contains("INFEASIBLE"));
    }
}
