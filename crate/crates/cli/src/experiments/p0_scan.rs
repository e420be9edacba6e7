//! Success probability of the `L` block encoding over Courant-number grids.

use std::path::Path;

use carleman_adr::block_encoding::{
    build_be_circuit_l, check_applicability, p0_analytic_l, InitialState, ToeplitzL,
};
use carleman_adr::{Complex64, DerivedNumbers};
use rayon::prelude::*;

use super::Report;
use crate::config::Config;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt_f64, opt_f64, Metadata, Table};

/// Largest lattice for which the circuit is also simulated.
pub const MAX_SIMULATED_SITES: usize = 32;
const SIM_TOLERANCE: f64 = 1e-12;

struct Point {
    gamma_adv: f64,
    gamma_diff: f64,
    gamma_react: f64,
}

struct Row {
    applicable: bool,
    localized: Option<f64>,
    uniform: Option<f64>,
    localized_sim: Option<f64>,
    uniform_sim: Option<f64>,
}

fn evaluate(p: &Point, n: usize, site: usize, simulate: bool) -> Result<Row, CliError> {
    let numbers = DerivedNumbers::from_courant(p.gamma_diff, p.gamma_adv, p.gamma_react);
    if !check_applicability(&numbers).encodable() {
        return Ok(Row {
            applicable: false,
            localized: None,
            uniform: None,
            localized_sim: None,
            uniform_sim: None,
        });
    }
    let l = ToeplitzL::new(n, &numbers);
    let localized = p0_analytic_l(&l, &InitialState::Localized(site))?;
    let uniform = p0_analytic_l(&l, &InitialState::Uniform)?;
    let (mut localized_sim, mut uniform_sim) = (None, None);
    if simulate {
        let circuit = build_be_circuit_l(&l)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        psi[site] = Complex64::new(1.0, 0.0);
        localized_sim = Some(circuit.simulate(&psi)?.probability);
        let flat = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        uniform_sim = Some(circuit.simulate(&flat)?.probability);
    }
    Ok(Row {
        applicable: true,
        localized: Some(localized),
        uniform: Some(uniform),
        localized_sim,
        uniform_sim,
    })
}

fn scan(
    points: &[Point],
    n: usize,
    site: usize,
    simulate: bool,
) -> Result<(Table, Vec<String>), CliError> {
    let rows = points
        .par_iter()
        .map(|p| evaluate(p, n, site, simulate))
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec![
        "gamma_adv",
        "gamma_diff",
        "gamma_re",
        "applicable",
        "p0_localized",
        "p0_uniform",
    ];
    if simulate {
        columns.extend(["p0_localized_sim", "p0_uniform_sim"]);
    }
    let mut table = Table::new(&columns);
    let mut failures = Vec::new();
    for (p, r) in points.iter().zip(&rows) {
        let mut row = vec![
            fmt_f64(p.gamma_adv),
            fmt_f64(p.gamma_diff),
            fmt_f64(p.gamma_react),
            u8::from(r.applicable).to_string(),
            opt_f64(r.localized),
            opt_f64(r.uniform),
        ];
        if simulate {
            row.extend([opt_f64(r.localized_sim), opt_f64(r.uniform_sim)]);
            for (sim, analytic) in [(r.localized_sim, r.localized), (r.uniform_sim, r.uniform)] {
                if let (Some(s), Some(a)) = (sim, analytic) {
                    if (s - a).abs() > SIM_TOLERANCE {
                        failures.push(format!(
                            "simulated p0 {s} differs from analytic {a} at g_a={}, g_d={}, g_r={}",
                            p.gamma_adv, p.gamma_diff, p.gamma_react
                        ));
                    }
                }
            }
        }
        table.push(row);
    }
    Ok((table, failures))
}

pub fn run_p0_scan(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let n = cfg.usize_or("p0.n_sites", 100)?;
    let site = cfg.usize_or("p0.localized_site", n / 2)?;
    let gamma_react = cfg.f64_or("p0.gamma_react", 0.01)?;
    let adv_grid = cfg.grid_or("p0.gamma_adv", "0:1:21")?;
    let diff_grid = cfg.grid_or("p0.gamma_diff", "0:0.5:21")?;
    let sweep_adv = cfg.f64_or("p0.sweep_gamma_adv", 0.1)?;
    let sweep_diff = cfg.f64_or("p0.sweep_gamma_diff", 0.1)?;
    let react_grid = cfg.grid_or("p0.sweep_gamma_react", "0:1:21")?;
    cfg.reject_unknown()?;
    if n < 2 {
        return Err(CliError::Value {
            key: "p0.n_sites".into(),
            msg: format!("need at least 2 sites, got {n}"),
        });
    }
    if site >= n {
        return Err(CliError::Value {
            key: "p0.localized_site".into(),
            msg: format!("site {site} outside 0..{n}"),
        });
    }
    ensure_dir(out)?;
    let simulate = n.is_power_of_two() && n <= MAX_SIMULATED_SITES;
    let mut meta = Metadata::new("p0scan");
    meta.extend(cfg.echo());
    meta.push("simulated", simulate);

    let grid: Vec<Point> = adv_grid
        .iter()
        .flat_map(|&gamma_adv| {
            diff_grid.iter().map(move |&gamma_diff| Point {
                gamma_adv,
                gamma_diff,
                gamma_react,
            })
        })
        .collect();
    let sweep: Vec<Point> = react_grid
        .iter()
        .map(|&gamma_react| Point {
            gamma_adv: sweep_adv,
            gamma_diff: sweep_diff,
            gamma_react,
        })
        .collect();

    let mut report = Report::default();
    let (table, failures) = scan(&grid, n, site, simulate)?;
    report.failures.extend(failures);
    report.files.push(table.write(out, "p0_scan.csv", &meta)?);
    let (table, failures) = scan(&sweep, n, site, simulate)?;
    report.failures.extend(failures);
    report
        .files
        .push(table.write(out, "p0_gamma_re.csv", &meta)?);
    Ok(report)
}
