//! Block-encoding circuits checked against dense matrix-vector products.

use std::path::Path;

use carleman_adr::block_encoding::{
    build_be_circuit_b, build_be_circuit_l, check_applicability, p0_analytic_l, p0_max_b,
    simulate_be_b_natural, BhatOperator, InitialState, ToeplitzL,
};
use carleman_adr::{Complex64, CsrMatrix, DerivedNumbers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Report;
use crate::config::Config;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt_f64, opt_f64, Metadata, Table};

pub const MAX_L_SITES: usize = 32;
pub const MAX_B_SITES: usize = 8;
pub const COMPONENT_TOLERANCE: f64 = 1e-11;
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

fn basis(n: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// `max_k |scale·residual_k − (M ψ)_k|`
fn component_error(m: &CsrMatrix, psi: &[Complex64], residual: &[Complex64], scale: f64) -> f64 {
    (0..m.nrows())
        .map(|r| {
            let (cols, vals) = m.row(r);
            let want: Complex64 = cols.iter().zip(vals).map(|(&c, &v)| psi[c] * v).sum();
            (residual[r] * scale - want).norm()
        })
        .fold(0.0, f64::max)
}

struct Row {
    case: &'static str,
    n: usize,
    gammas: Option<[f64; 3]>,
    coupling: Option<f64>,
    err: f64,
    p0_sim: f64,
    p0_analytic: f64,
}

fn check_sites(key: &str, sites: &[usize], cap: usize) -> Result<(), CliError> {
    match sites
        .iter()
        .find(|&&n| n < 2 || !n.is_power_of_two() || n > cap)
    {
        Some(n) => Err(CliError::Value {
            key: key.into(),
            msg: format!("sizes must be powers of two in 2..={cap}, got {n}"),
        }),
        None => Ok(()),
    }
}

/// Random Courant numbers with every applicability condition strictly met.
fn draw_gammas(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let g = [
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        if check_applicability(&DerivedNumbers::from_courant(g[0], g[1], g[2])).all_pass() {
            return g;
        }
    }
}

fn l_row(
    rng: &mut ChaCha8Rng,
    case: &'static str,
    n: usize,
    g: [f64; 3],
    states: usize,
    failures: &mut Vec<String>,
) -> Result<Row, CliError> {
    let l = ToeplitzL::from_courant(n, g[0], g[1], g[2]);
    let circuit = build_be_circuit_l(&l)?;
    let m = l.matrix()?;
    let scale = circuit.subnormalization();
    let mut err: f64 = 0.0;
    for _ in 0..states {
        let psi = random_state(rng, n);
        let out = circuit.simulate(&psi)?;
        err = err.max(component_error(&m, &psi, &out.residual, scale));
        let p = p0_analytic_l(&l, &InitialState::Explicit(psi))?;
        if (out.probability - p).abs() > PROBABILITY_TOLERANCE {
            failures.push(format!(
                "{case} N={n}: simulated p0 {} vs analytic {p}",
                out.probability
            ));
        }
    }
    let p0_sim = circuit.simulate(&basis(n, 0))?.probability;
    let p0_analytic = p0_analytic_l(&l, &InitialState::Localized(0))?;
    Ok(Row {
        case,
        n,
        gammas: Some(g),
        coupling: None,
        err,
        p0_sim,
        p0_analytic,
    })
}

fn b_row(rng: &mut ChaCha8Rng, n: usize, coupling: f64, states: usize) -> Result<Row, CliError> {
    let bhat = BhatOperator::new(n, coupling, 1.0)?;
    let circuit = build_be_circuit_b(&bhat)?;
    let m = bhat.natural_matrix()?;
    let scale = circuit.subnormalization();
    let mut err: f64 = 0.0;
    for _ in 0..states {
        let psi = random_state(rng, bhat.dim());
        let out = simulate_be_b_natural(&bhat, &circuit, &psi)?;
        err = err.max(component_error(&m, &psi, &out.residual, scale));
    }
    let mut p0_sim: f64 = 0.0;
    for i in 0..bhat.dim() {
        p0_sim =
            p0_sim.max(simulate_be_b_natural(&bhat, &circuit, &basis(bhat.dim(), i))?.probability);
    }
    Ok(Row {
        case: "B",
        n,
        gammas: None,
        coupling: Some(coupling),
        err,
        p0_sim,
        p0_analytic: p0_max_b(coupling, 1.0),
    })
}

pub fn run_be_verify(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let seed = cfg.u64_or("seed", 1)?;
    let l_sites = cfg.usize_list_or("be.l_sites", &[2, 4, 8])?;
    let draws = cfg.usize_or("be.draws", 50)?;
    let states = cfg.usize_or("be.states", 20)?;
    let b_sites = cfg.usize_list_or("be.b_sites", &[2, 4])?;
    let couplings = cfg.grid_or("be.b_couplings", "0,0.006,0.5")?;
    cfg.reject_unknown()?;
    check_sites("be.l_sites", &l_sites, MAX_L_SITES)?;
    check_sites("be.b_sites", &b_sites, MAX_B_SITES)?;
    if let Some(c) = couplings.iter().find(|c| c.abs() > 1.0) {
        return Err(CliError::Value {
            key: "be.b_couplings".into(),
            msg: format!("|b·dt| must be <= 1, got {c}"),
        });
    }
    ensure_dir(out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &n in &l_sites {
        for _ in 0..draws {
            let g = draw_gammas(&mut rng);
            rows.push(l_row(&mut rng, "L", n, g, states, &mut failures)?);
        }
        let mut still = l_row(&mut rng, "L_identity", n, [0.0; 3], states, &mut failures)?;
        still.p0_analytic = 1.0 / 16.0;
        rows.push(still);
    }
    for &n in &b_sites {
        for &c in &couplings {
            rows.push(b_row(&mut rng, n, c, states)?);
        }
    }

    let mut table = Table::new(&[
        "case",
        "N",
        "gamma_diff",
        "gamma_adv",
        "gamma_react",
        "b_dt",
        "max_component_err",
        "p0_sim",
        "p0_analytic",
    ]);
    for r in &rows {
        if r.err > COMPONENT_TOLERANCE {
            failures.push(format!("{} N={}: component error {}", r.case, r.n, r.err));
        }
        if (r.p0_sim - r.p0_analytic).abs() > PROBABILITY_TOLERANCE {
            failures.push(format!(
                "{} N={}: p0_sim {} vs p0_analytic {}",
                r.case, r.n, r.p0_sim, r.p0_analytic
            ));
        }
        let g = r.gammas.map(|g| g.map(Some)).unwrap_or([None; 3]);
        table.push(vec![
            r.case.to_string(),
            r.n.to_string(),
            opt_f64(g[0]),
            opt_f64(g[1]),
            opt_f64(g[2]),
            opt_f64(r.coupling),
            fmt_f64(r.err),
            fmt_f64(r.p0_sim),
            fmt_f64(r.p0_analytic),
        ]);
    }
    let mut meta = Metadata::new("beverify");
    meta.extend(cfg.echo());
    meta.push("component_tolerance", fmt_f64(COMPONENT_TOLERANCE));
    meta.push("probability_tolerance", fmt_f64(PROBABILITY_TOLERANCE));
    meta.push("status", if failures.is_empty() { "ok" } else { "failed" });
    Ok(Report {
        files: vec![table.write(out, "be_verify.csv", &meta)?],
        failures,
    })
}
