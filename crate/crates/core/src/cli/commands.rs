//! One function per subcommand. Each validates its inputs, runs, and returns
//! the files it wrote. Scientific verdicts go into report columns.

use std::path::PathBuf;
use std::sync::Arc;

use serde_json::json;

use crate::cli::config::RunConfig;
use crate::error::{Error, Result};
use crate::expansion::{solomon_speed, speed_expansion, speedup_integral, speedup_integral_grid, ExpansionReport};
use crate::green::{j_closed_form_1d, j_exact, one_point_second_order, series_oracle, QuadSettings};
use crate::kalikow::{auxiliary_kernel, drift_field, lemma2_scaling, prop1_residual, AuxBudget, DriftSettings};
use crate::lattice::{directions, Direction, Site};
use crate::model::{ModelSpec, TransitionKernel};
use crate::montecarlo::{annealed_speed, lemma4_decay, order_scaling, SpeedReference};
use crate::report::{fmt_f64, CsvReport};

/// Where outputs go: `<prefix><name>`.
#[derive(Clone, Debug)]
pub struct Output {
    pub prefix: String,
}

impl Output {
    pub fn path(&self, name: &str) -> PathBuf {
        PathBuf::from(format!("{}{name}", self.prefix))
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(path)
    }
}

/// Header line content: the command and its fully resolved configuration.
fn header(command: &str, config: &RunConfig) -> String {
    json!({ "command": command, "config": config }).to_string()
}

fn e2(v: &[f64]) -> f64 {
    v.get(1).copied().unwrap_or(0.0)
}

/// Speed expansion for each gamma, to `order` (default 3 when `d0 != 0`, else 2).
pub fn cmd_expand(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    let gammas = config.gamma_list()?;
    let order = config.order.unwrap_or(if model.d0_is_zero() { 2 } else { 3 });
    let reports: Vec<ExpansionReport> =
        gammas.iter().map(|&g| speed_expansion(model, g, order)).collect::<Result<_>>()?;
    let d = model.dim();
    let head = header("expand", config);

    let mut cols = vec!["gamma".to_string(), "order".to_string()];
    cols.extend((1..=d).map(|i| format!("v{i}")));
    cols.extend(["solomon".to_string(), "j_source".to_string()]);
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let csv_path = out.path("expansion.csv");
    let mut csv = CsvReport::create(&csv_path, &head, &cols)?;
    let mut flags = Vec::new();
    for rep in &reports {
        let solomon = if d == 1 { fmt_f64(solomon_speed(model, rep.gamma)?) } else { String::new() };
        for (k, v) in rep.v_order.iter().enumerate() {
            let mut row = vec![fmt_f64(rep.gamma), k.to_string()];
            row.extend(v.iter().map(|&x| fmt_f64(x)));
            row.push(solomon.clone());
            row.push(rep.j_source.as_str().into());
            csv.row(&row)?;
        }
        flags.push(json!({
            "gamma": rep.gamma,
            "d2_e2": rep.d2.as_deref().map(e2),
            "d2_e2_positive": rep.d2.as_deref().map(|v| e2(v) > 0.0),
        }));
    }
    csv.finish()?;
    let json_path = out.write_json(
        "expansion.json",
        &json!({ "command": "expand", "config": config, "flags": flags, "reports": reports }),
    )?;
    Ok(vec![csv_path, json_path])
}

/// Annealed speed at `gamma`; in `d = 1` also the exact speed and a 3-stderr agreement column.
pub fn cmd_simulate(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    let seed = config.require_seed()?;
    let gamma = config.require_gamma()?;
    let est =
        annealed_speed(model, gamma, config.n_steps.unwrap_or(100_000), config.n_replicates.unwrap_or(400), seed)?;
    let exact = if model.dim() == 1 { Some(solomon_speed(model, gamma)?) } else { None };
    let path = out.path("simulate.csv");
    let mut csv = CsvReport::create(
        &path,
        &header("simulate", config),
        &[
            "gamma",
            "component",
            "v_hat",
            "stderr",
            "n_steps",
            "n_replicates",
            "master_seed",
            "solomon",
            "within_3_stderr",
            "hypothesis_h",
        ],
    )?;
    for (i, (v, s)) in est.v_hat.iter().zip(&est.stderr).enumerate() {
        let (sol, ok) = match exact {
            Some(x) => (fmt_f64(x), ((v - x).abs() <= 3.0 * s).to_string()),
            None => (String::new(), String::new()),
        };
        csv.row(&[
            fmt_f64(gamma),
            (i + 1).to_string(),
            fmt_f64(*v),
            fmt_f64(*s),
            est.n_steps.to_string(),
            est.n_replicates.to_string(),
            seed.to_string(),
            sol,
            ok,
            est.hypothesis_h.to_string(),
        ])?;
    }
    csv.finish()?;
    Ok(vec![path])
}

/// Order scaling against the exact speed (`d = 1` default) or simulation.
pub fn cmd_scaling(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    let gammas = config.gammas.clone().unwrap_or_else(|| vec![0.08, 0.04, 0.02]);
    let order = config.order.unwrap_or(2);
    let default_ref = if model.dim() == 1 { "exact" } else { "monte-carlo" };
    let reference = match config.reference.as_deref().unwrap_or(default_ref) {
        "exact" => SpeedReference::Exact,
        "monte-carlo" => SpeedReference::MonteCarlo {
            n_steps: config.n_steps.unwrap_or(100_000),
            n_replicates: config.n_replicates.unwrap_or(400),
            master_seed: config.require_seed()?,
        },
        other => return Err(Error::Config(format!("unknown reference {other:?}; use exact or monte-carlo"))),
    };
    let rep = order_scaling(model, &gammas, order, reference)?;
    let path = out.path("scaling.csv");
    rep.write_csv(&path, &header("scaling", config))?;
    Ok(vec![path])
}

/// Exactness residuals per delta, the second-order remainder sweep, and optionally the drift field.
pub fn cmd_kalikow(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    let gamma = config.require_gamma()?;
    let d = model.dim();
    let domain = Arc::new(config.domain(d)?);
    let z0 = config.start()?;
    let deltas = config.deltas.clone().unwrap_or_else(|| vec![0.9, 0.95, 1.0]);
    let head = header("kalikow", config);
    let mut files = Vec::new();

    let path = out.path("kalikow_prop1.csv");
    let mut csv = CsvReport::create(
        &path,
        &head,
        &["gamma", "delta", "sites", "environments", "method", "residual", "weights_checked"],
    )?;
    for &delta in &deltas {
        let aux = auxiliary_kernel(model, gamma, &domain, delta, z0, AuxBudget::exact_only())?;
        csv.row(&[
            fmt_f64(gamma),
            fmt_f64(delta),
            domain.len().to_string(),
            aux.environments.to_string(),
            aux.method.as_str().into(),
            fmt_f64(prop1_residual(&aux)?),
            aux.weights_checked.to_string(),
        ])?;
    }
    csv.finish()?;
    files.push(path);

    let lemma_gammas = config.lemma2_gammas.clone().unwrap_or_else(|| vec![gamma, gamma / 2.0, gamma / 4.0]);
    let rep = lemma2_scaling(model, &domain, deltas[0], z0, &lemma_gammas)?;
    let path = out.path("kalikow_lemma2.csv");
    let mut csv = CsvReport::create(
        &path,
        &head,
        &[
            "gamma",
            "delta",
            "residual",
            "bound",
            "within_bound",
            "exponent",
            "noise_floor",
            "lemma1_pairs",
            "lemma1_violations",
        ],
    )?;
    let exponent = rep.exponent.map(fmt_f64).unwrap_or_default();
    for r in &rep.rows {
        csv.row(&[
            fmt_f64(r.gamma),
            fmt_f64(deltas[0]),
            fmt_f64(r.residual),
            fmt_f64(r.bound),
            r.within_bound.to_string(),
            exponent.clone(),
            rep.noise_floor.to_string(),
            rep.lemma1.pairs_checked.to_string(),
            rep.lemma1.violations.to_string(),
        ])?;
    }
    csv.finish()?;
    files.push(path);

    if let Some(radius) = config.window_radius {
        let settings = DriftSettings::new(config.env_samples.unwrap_or(64), config.require_seed()?);
        let field = drift_field(model, gamma, radius, config.drift_delta.unwrap_or(0.9), settings)?;
        let path = out.path("kalikow_drift.csv");
        field.write_csv(&path, &head)?;
        files.push(path);
    }
    Ok(files)
}

/// The `d = 2` speedup experiment: the sign integral, `d2 · e2`, and the simulated `v · e2` against `d0 · e2`.
pub fn cmd_speedup(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    if model.dim() != 2 {
        return Err(Error::Config("speedup needs a d = 2 model".into()));
    }
    let seed = config.require_seed()?;
    let gamma = config.gamma.unwrap_or(0.05);
    let a = config.a.unwrap_or(0.5);
    let integral = speedup_integral(a)?;
    let grid = speedup_integral_grid(a, 64, 1 << 13, 1e-7)?;
    let exp = speed_expansion(model, gamma, 2)?;
    let d2_e2 = exp.d2.as_deref().map_or(f64::NAN, e2);
    let est =
        annealed_speed(model, gamma, config.n_steps.unwrap_or(100_000), config.n_replicates.unwrap_or(2000), seed)?;
    let d0_e2 = e2(&model.d0());
    let v_e2 = e2(&est.v_hat);
    let s_e2 = e2(&est.stderr);
    let margin = if s_e2 > 0.0 { (v_e2 - d0_e2) / s_e2 } else { f64::NAN };
    let path = out.path("speedup.csv");
    let mut csv = CsvReport::create(
        &path,
        &header("speedup", config),
        &[
            "a",
            "gamma",
            "speedup_integral",
            "speedup_integral_grid",
            "grid_difference",
            "d0_e2",
            "d2_e2",
            "v_hat_e2",
            "stderr_e2",
            "margin_stderr",
            "significant",
        ],
    )?;
    csv.row(&[
        fmt_f64(a),
        fmt_f64(gamma),
        fmt_f64(integral.value),
        fmt_f64(grid.value),
        fmt_f64((integral.value - grid.value).abs()),
        fmt_f64(d0_e2),
        fmt_f64(d2_e2),
        fmt_f64(v_e2),
        fmt_f64(s_e2),
        fmt_f64(margin),
        (margin >= 3.0).to_string(),
    ])?;
    csv.finish()?;
    Ok(vec![path])
}

/// Kernel decay for a symmetric kernel (default: simple walk in `dim` dimensions).
pub fn cmd_lemma4(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>> {
    let s = match &config.kernel {
        Some(half) => TransitionKernel::symmetric(half)?,
        None => TransitionKernel::simple(config.dim.unwrap_or(2))?,
    };
    let d = s.dim();
    let n_list = config.n_list.clone().unwrap_or_else(|| (4..=12).map(|k| 1usize << k).collect());
    let dirs = config.direction_list(d)?;
    let table = lemma4_decay(&s, &n_list, &dirs)?;
    let path = out.path("lemma4.csv");
    table.write_csv(&path, &header("lemma4", config))?;
    Ok(vec![path])
}

/// Cross-checks: `J` by quadrature (or closed form) against the series, and the
/// one-site route to `gamma^2 d_{2,gamma}` against `sum C J`.
pub fn cmd_oracle(config: &RunConfig, model: &ModelSpec, out: &Output) -> Result<Vec<PathBuf>> {
    let gamma = config.gamma.unwrap_or(0.05);
    let d = model.dim();
    let p = model.p_gamma(gamma)?;
    let (j, label) = if d == 1 {
        (j_closed_form_1d(&p)?, "j_closed_form_1d")
    } else {
        (j_exact(&p, QuadSettings::default_for(d))?, "j_exact")
    };
    let mut pairs = vec![(Site::ORIGIN, Site::ORIGIN)];
    pairs.extend(directions(d).map(|e| (e.unit(), Site::ORIGIN)));
    let series = series_oracle(&p, &pairs, config.horizon.unwrap_or(1_000_000), 1.0, config.tol.unwrap_or(1e-12))?;

    let path = out.path("oracle.csv");
    let mut csv = CsvReport::create(
        &path,
        &header("oracle", config),
        &["check", "component", "value", "reference", "abs_diff", "tolerance", "pass"],
    )?;
    for (i, e) in directions(d).enumerate() {
        let reference = series.values[i + 1] - series.values[0];
        let v = j.get(e);
        csv.row(&[
            format!("{label}_vs_series"),
            e.to_string(),
            fmt_f64(v),
            fmt_f64(reference),
            fmt_f64((v - reference).abs()),
            fmt_f64(1e-6),
            ((v - reference).abs() <= 1e-6).to_string(),
        ])?;
    }
    let exp = speed_expansion(model, gamma, 2)?;
    let one_site = one_point_second_order(model, gamma, config.box_radius.unwrap_or(12), 0.999)?;
    let scale = exp.d2_gamma.iter().map(|x| (gamma * gamma * x).abs()).fold(0.0, f64::max);
    for (i, (a, x)) in one_site.iter().zip(&exp.d2_gamma).enumerate() {
        let b = gamma * gamma * x;
        csv.row(&[
            "one_site_vs_covariance".to_string(),
            Direction::new(i + 1, 1)?.to_string(),
            fmt_f64(*a),
            fmt_f64(b),
            fmt_f64((a - b).abs()),
            fmt_f64(0.02 * scale),
            ((a - b).abs() <= 0.02 * scale).to_string(),
        ])?;
    }
    csv.finish()?;
    Ok(vec![path])
}
