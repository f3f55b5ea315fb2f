use std::io::Write;

use tsagg_core::analysis::{success_prob, success_prob_detailed, SuccessBreakdown};
use tsagg_core::asymptotics::{probe_convergence, q_limit_dense, q_limit_large_t, q_limit_sparse};
use tsagg_core::simulator::{estimate, estimate_rates, scenario_of_trial, EstimateResult, SimSettings, Variant};
use tsagg_core::Model;

use crate::config::{Grid, Regime, RunConfig, SweepAxis, SweepSpec};
use crate::error::{CliError, Result};
use crate::output::{ProbeOutput, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Analysis,
    Simulation,
    Both,
}

impl Engine {
    fn analysis(self) -> bool {
        self != Engine::Simulation
    }

    fn simulation(self) -> bool {
        self != Engine::Analysis
    }
}

/// Rows produced by a command; rows carrying a note failed in part.
#[derive(Debug, Clone)]
pub struct Table {
    pub rows: Vec<ResultRow>,
    pub n_files: usize,
}

impl Table {
    pub fn is_partial(&self) -> bool {
        self.rows.iter().any(|r| r.note.is_some())
    }
}

/// The analytical counterpart of `variant`, when there is one.
fn analysis_of(
    model: &Model,
    variant: Variant,
    quad: &tsagg_core::analysis::QuadratureSettings,
) -> Option<tsagg_core::Result<SuccessBreakdown>> {
    match variant {
        Variant::Proposed => Some(success_prob_detailed(model, quad)),
        Variant::BaselineContinuous => Some(model.with_period(1).and_then(|m| success_prob_detailed(&m, quad))),
        Variant::BaselineTemporal => None,
    }
}

fn fill_analysis(row: &mut ResultRow, b: &SuccessBreakdown) {
    row.q_analysis = Some(b.q.value);
    row.q_files = b.per_file.iter().map(|e| Some(e.value)).collect();
}

fn fill_simulation(row: &mut ResultRow, r: &EstimateResult) {
    row.q_sim = Some(r.q_hat);
    row.ci95 = Some(r.ci95);
    row.no_serving_freq = Some(r.no_serving_freq());
    row.seed = Some(r.master_seed);
    if row.q_analysis.is_none() {
        row.q_files = (0..r.per_file.len()).map(|n| r.q_file(n)).collect();
    }
}

fn settings_for(config: &RunConfig, variant: Variant) -> SimSettings {
    SimSettings {
        variant,
        ..config.simulation
    }
}

/// Analytical evaluation at the configured point.
pub fn analyze(config: &RunConfig) -> Result<Table> {
    let model = config.model()?;
    let b = success_prob_detailed(&model, &config.quadrature).map_err(CliError::core("analysis"))?;
    let mut row = ResultRow::new("theta", config.rate_theta, Variant::Proposed, model.n_files());
    fill_analysis(&mut row, &b);
    Ok(Table {
        rows: vec![row],
        n_files: model.n_files(),
    })
}

/// Monte Carlo estimate at the configured point, with the configured variant.
pub fn simulate(config: &RunConfig) -> Result<Table> {
    let model = config.model()?;
    let r = estimate(&model, &config.simulation).map_err(CliError::core("simulation"))?;
    let mut row = ResultRow::new("theta", config.rate_theta, config.simulation.variant, model.n_files());
    fill_simulation(&mut row, &r);
    if let Some(path) = &config.output.scenario_dump {
        dump_scenarios(&model, &config.simulation, path, config.output.dump_trials)?;
    }
    Ok(Table {
        rows: vec![row],
        n_files: model.n_files(),
    })
}

/// Writes the snapshots of the first `count` trials, one JSON document per line.
pub fn dump_scenarios(model: &Model, settings: &SimSettings, path: &std::path::Path, count: u64) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    for i in 0..count.min(settings.trials) {
        let s = scenario_of_trial(model, settings, i).map_err(CliError::core("simulation"))?;
        serde_json::to_writer(&mut out, &s).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(out).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn point_model(base: &Model, axis: SweepAxis, x: f64) -> tsagg_core::Result<Model> {
    match axis {
        SweepAxis::Theta => base.with_theta(x),
        SweepAxis::PeriodT => base.with_period(x as u32),
        SweepAxis::LambdaU => base.with_lambda_u(x),
    }
}

fn sweep_rows(
    config: &RunConfig,
    model: &Model,
    sweep: &SweepSpec,
    variant: Variant,
    engine: Engine,
) -> Vec<ResultRow> {
    let grid = sweep.grid.values();
    let name = sweep.axis.name();
    let mut rows: Vec<ResultRow> = grid
        .iter()
        .map(|&x| ResultRow::new(name, x, variant, model.n_files()))
        .collect();
    let points: Vec<tsagg_core::Result<Model>> = grid.iter().map(|&x| point_model(model, sweep.axis, x)).collect();

    if engine.analysis() {
        for (row, m) in rows.iter_mut().zip(&points) {
            let result = match m {
                Ok(m) => analysis_of(m, variant, &config.quadrature),
                Err(e) => Some(Err(tsagg_core::Error::Domain(e.to_string()))),
            };
            match result {
                Some(Ok(b)) => fill_analysis(row, &b),
                Some(Err(e)) => row.annotate(format!("analysis: {e}")),
                None => {}
            }
        }
    }

    if engine.simulation() {
        let settings = settings_for(config, variant);
        if sweep.axis == SweepAxis::Theta {
            // one set of trials serves every rate
            match estimate_rates(model, &settings, &grid) {
                Ok(results) => rows
                    .iter_mut()
                    .zip(&results)
                    .for_each(|(row, r)| fill_simulation(row, r)),
                Err(e) => rows.iter_mut().for_each(|row| row.annotate(format!("simulation: {e}"))),
            }
        } else {
            for (row, m) in rows.iter_mut().zip(&points) {
                match m
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|m| estimate(m, &settings).map_err(|e| e.to_string()))
                {
                    Ok(r) => fill_simulation(row, &r),
                    Err(e) => row.annotate(format!("simulation: {e}")),
                }
            }
        }
    }
    rows
}

fn sort_rows(rows: &mut [ResultRow]) {
    let rank = |v: Variant| Variant::ALL.iter().position(|&w| w == v).unwrap_or(0);
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(rank(a.variant).cmp(&rank(b.variant)))
    });
}

/// One row per grid point of the configured sweep, sorted by the sweep
/// variable. Failures at single points are recorded in the row's note.
pub fn sweep(config: &RunConfig, engine: Engine) -> Result<Table> {
    let model = config.model()?;
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a sweep axis (config \"sweep\" or --sweep)".into()))?;
    let mut rows = sweep_rows(config, &model, spec, config.simulation.variant, engine);
    sort_rows(&mut rows);
    Ok(Table {
        rows,
        n_files: model.n_files(),
    })
}

/// All three schemes over the configured sweep (the default rate grid when
/// none is configured) with matched seeds.
pub fn compare(config: &RunConfig) -> Result<Table> {
    let model = config.model()?;
    let spec = config.sweep.clone().unwrap_or(SweepSpec {
        axis: SweepAxis::Theta,
        grid: Grid::default_theta(),
    });
    let mut rows = Vec::new();
    for v in Variant::ALL {
        rows.extend(sweep_rows(config, &model, &spec, v, Engine::Both));
    }
    sort_rows(&mut rows);
    Ok(Table {
        rows,
        n_files: model.n_files(),
    })
}

/// Convergence of the general-region `q` towards a limit regime.
pub fn asymptotic(config: &RunConfig, regime: Option<Regime>, schedule: Option<Vec<f64>>) -> Result<ProbeOutput> {
    let model = config.model()?;
    let spec = config.asymptotic.as_ref();
    let regime = regime
        .or(spec.map(|s| s.regime))
        .ok_or_else(|| CliError::Config("asymptotic needs a regime (config \"asymptotic\" or --regime)".into()))?;
    let schedule = schedule
        .or_else(|| spec.and_then(|s| s.schedule.clone()))
        .unwrap_or_else(|| regime.default_schedule());
    let quad = &config.quadrature;
    let noise_floor = 10.0 * (quad.rel_tol + quad.abs_tol);
    let q = |m: tsagg_core::Result<Model>| m.and_then(|m| success_prob(&m, quad)).map(|e| e.value);
    let ctx = CliError::core("asymptotics");

    let report = match regime {
        Regime::LargeT => {
            if schedule.iter().any(|&t| t < 1.0 || t.fract() != 0.0) {
                return Err(CliError::Config("large-t schedule holds positive integers".into()));
            }
            let limit = q_limit_large_t(&model, config.rate_theta, quad).map_err(CliError::core("asymptotics"))?;
            probe_convergence(&schedule, |t| q(model.with_period(t as u32)), limit.value, noise_floor)
        }
        Regime::Dense => {
            let limit = q_limit_dense(&model, quad).map_err(CliError::core("asymptotics"))?;
            probe_convergence(&schedule, |l| q(model.with_lambda_u(l)), limit.value, noise_floor)
        }
        Regime::Sparse => {
            let limit = q_limit_sparse(&model, quad).map_err(CliError::core("asymptotics"))?;
            probe_convergence(&schedule, |l| q(model.with_lambda_u(l)), limit.value, noise_floor)
        }
        Regime::Synthetic => probe_convergence(&schedule, |x| Ok(0.5 + 1.0 / x), 0.5, noise_floor),
    }
    .map_err(ctx)?;
    Ok(ProbeOutput { regime, report })
}
