//! Nonlinear Euler versus truncated Carleman evolution, one row per order.

use std::path::Path;

use carleman_adr::adr::{logistic_carleman_truncated, logistic_exact, NonlinearEuler};
use carleman_adr::carleman::{initial_carleman_state, relative_error_series};
use carleman_adr::{AdrParams, CarlemanOperator, LatticeField};

use super::{derived_metadata, read_adr, read_initial, Report};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt_f64, Metadata, Table};

#[derive(Debug, Clone)]
struct Settings {
    params: AdrParams,
    phi0: LatticeField,
    orders: Vec<usize>,
    n_steps: usize,
    trajectories: bool,
}

fn read_settings(cfg: &Config) -> Result<Settings, CliError> {
    let params = read_adr(cfg, true)?;
    let phi0 = read_initial(cfg, params.n_sites)?;
    let orders = cfg.usize_list_or("convergence.orders", &[1, 2, 3, 4, 5])?;
    if orders.contains(&0) || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Value {
            key: "convergence.orders".into(),
            msg: "orders must be positive and strictly ascending".into(),
        });
    }
    let n_steps = cfg.usize_or("convergence.n_steps", 1000)?;
    let trajectories = cfg.bool_or("convergence.write_trajectories", true)?;
    cfg.reject_unknown()?;
    Ok(Settings {
        params,
        phi0,
        orders,
        n_steps,
        trajectories,
    })
}

/// Steps until `n_steps` or the first non-finite field.
fn euler_reference(
    params: &AdrParams,
    phi0: &LatticeField,
    n_steps: usize,
) -> Result<Vec<LatticeField>, CliError> {
    let euler = NonlinearEuler::new(params)?;
    let mut out = vec![phi0.clone()];
    for _ in 0..n_steps {
        match euler.step(out.last().unwrap()) {
            Ok(next) => out.push(next),
            Err(_) => break,
        }
    }
    Ok(out)
}

fn carleman_run(
    op: &CarlemanOperator,
    phi0: &LatticeField,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<LatticeField>, CliError> {
    let mut u = initial_carleman_state(phi0, op.order())?;
    let mut out = vec![phi0.clone()];
    for _ in 0..n_steps {
        u = op.euler_step(&u, dt)?;
        if !u.is_finite() {
            break;
        }
        out.push(LatticeField::new(u.first().to_vec())?);
    }
    Ok(out)
}

/// Relative error of the truncated logistic series against the exact
/// logistic solution, per stored step. `None` once the exact solution blows up.
fn logistic_series(
    params: &AdrParams,
    phi_max: f64,
    order: usize,
    n_steps: usize,
) -> Vec<Option<f64>> {
    let (a, b) = (params.linear_rate, params.quadratic_rate);
    (0..=n_steps)
        .map(|s| {
            let t = s as f64 * params.dt;
            let exact = logistic_exact(phi_max, a, b, t).ok()?;
            Some((logistic_carleman_truncated(phi_max, a, b, t, order) - exact).abs() / exact.abs())
        })
        .collect()
}

fn series_max(v: &[Option<f64>]) -> f64 {
    if v.iter().any(Option::is_none) {
        return f64::NAN;
    }
    v.iter().flatten().cloned().fold(0.0, f64::max)
}

pub fn run_convergence(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let s = read_settings(cfg)?;
    ensure_dir(out)?;
    let mut meta = Metadata::new("convergence");
    meta.extend(cfg.echo());
    derived_metadata(&mut meta, &s.params)?;
    let phi_max = s.phi0.max();
    meta.push(
        "derived.nonlinearity_r",
        fmt_f64(s.params.nonlinearity(phi_max)),
    );

    let mut report = Report::default();
    let reference = euler_reference(&s.params, &s.phi0, s.n_steps)?;
    if reference.len() <= s.n_steps {
        let msg = format!(
            "reference Euler field became non-finite at step {}",
            reference.len()
        );
        meta.push("flag.reference", &msg);
        report.failures.push(msg);
    }

    let mut summary = Table::new(&[
        "K",
        "max_rel_err",
        "mean_rel_err",
        "t_star",
        "logistic_err_k_minus_1",
        "logistic_err_k",
        "steps_completed",
    ]);
    let mut per_k = Vec::new();
    for &order in &s.orders {
        let op = CarlemanOperator::from_params(&s.params, order)?;
        let traj = carleman_run(&op, &s.phi0, s.params.dt, s.n_steps)?;
        let common = traj.len().min(reference.len());
        if traj.len() <= s.n_steps {
            let msg = format!(
                "K={order}: Carleman state became non-finite at step {}",
                traj.len()
            );
            meta.push(&format!("flag.k{order}"), &msg);
            report.failures.push(msg);
        }
        let errors = match relative_error_series(&reference[..common], &traj[..common]) {
            Ok(e) => Some(e),
            Err(e) => {
                let msg = format!("K={order}: {e}");
                meta.push(&format!("flag.k{order}.error"), &msg);
                report.failures.push(msg);
                None
            }
        };
        let log_prev = logistic_series(&s.params, phi_max, order - 1, s.n_steps);
        let log_same = logistic_series(&s.params, phi_max, order, s.n_steps);
        let (max, mean, t_star) = errors.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |e| {
            (e.max, e.mean_at_star, e.step_star as f64 * s.params.dt)
        });
        summary.push(vec![
            order.to_string(),
            fmt_f64(max),
            fmt_f64(mean),
            fmt_f64(t_star),
            fmt_f64(series_max(&log_prev)),
            fmt_f64(series_max(&log_same)),
            (traj.len() - 1).to_string(),
        ]);
        per_k.push((order, traj, errors, log_prev, log_same));
    }

    meta.push("status", if report.passed() { "ok" } else { "flagged" });
    report
        .files
        .push(summary.write(out, "convergence.csv", &meta)?);
    if s.trajectories {
        let sites: Vec<String> = (0..s.params.n_sites).map(|j| format!("phi_{j}")).collect();
        let traj_table = |traj: &[LatticeField]| {
            let mut cols = vec!["step".to_string(), "t".to_string()];
            cols.extend(sites.iter().cloned());
            let mut t = Table::with_columns(cols);
            for (step, f) in traj.iter().enumerate() {
                let mut row = vec![step.to_string(), fmt_f64(step as f64 * s.params.dt)];
                row.extend(f.values().iter().map(|v| fmt_f64(*v)));
                t.push(row);
            }
            t
        };
        report
            .files
            .push(traj_table(&reference).write(out, "trajectory_euler.csv", &meta)?);
        for (order, traj, errors, log_prev, log_same) in &per_k {
            report.files.push(traj_table(traj).write(
                out,
                &format!("trajectory_K{order}.csv"),
                &meta,
            )?);
            let mut t = Table::new(&[
                "step",
                "t",
                "rel_err",
                "logistic_rel_err_k_minus_1",
                "logistic_rel_err_k",
            ]);
            let n = errors.as_ref().map_or(0, |e| e.series.len());
            for step in 0..n {
                t.push(vec![
                    step.to_string(),
                    fmt_f64(step as f64 * s.params.dt),
                    fmt_f64(errors.as_ref().unwrap().series[step]),
                    log_prev[step].map(fmt_f64).unwrap_or_default(),
                    log_same[step].map(fmt_f64).unwrap_or_default(),
                ]);
            }
            report
                .files
                .push(t.write(out, &format!("error_K{order}.csv"), &meta)?);
        }
    }
    Ok(report)
}
