//! Truncation distance of Pauli expansions for Carleman and linear-only
//! matrices.

use std::path::Path;

use carleman_adr::adr::build_linear_matrix_profile;
use carleman_adr::pauli::{decompose, pad_to_power_of_two, qubits_for, MAX_DECOMPOSITION_QUBITS};
use carleman_adr::{AdrParams, CarlemanOperator, CsrMatrix, Error};
use rayon::prelude::*;

use super::{read_adr, Report};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt_f64, Metadata, Table};

#[derive(Debug, Clone, Copy)]
enum Family {
    Carleman,
    LinearOnly,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Carleman => "carleman",
            Family::LinearOnly => "a_only",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Case {
    family: Family,
    sites: usize,
    order: usize,
}

impl Case {
    fn dimension(&self) -> f64 {
        (1..=self.order)
            .map(|k| (self.sites as f64).powi(k as i32))
            .sum()
    }

    fn check_cap(&self) -> Result<(), CliError> {
        let dim = self.dimension();
        if dim > (1usize << MAX_DECOMPOSITION_QUBITS) as f64 {
            return Err(Error::CapExceeded {
                what: "decomposition qubits",
                value: qubits_for(dim as usize),
                cap: MAX_DECOMPOSITION_QUBITS,
            }
            .into());
        }
        Ok(())
    }

    fn matrix(&self, base: &AdrParams) -> Result<CsrMatrix, CliError> {
        let mut p = base.clone();
        p.n_sites = self.sites;
        Ok(match self.family {
            Family::Carleman => CarlemanOperator::from_params(&p, self.order)?.assemble()?,
            Family::LinearOnly => build_linear_matrix_profile(&p)?,
        })
    }
}

struct CaseResult {
    case: Case,
    qubits: usize,
    nnz: usize,
    distances: Vec<f64>,
    m_star: Vec<usize>,
}

fn run_case(case: Case, base: &AdrParams, epsilons: &[f64]) -> Result<CaseResult, CliError> {
    let m = case.matrix(base)?;
    let (padded, qubits) = pad_to_power_of_two(&m)?;
    let exp = decompose(&padded)?;
    let distances = (0..=exp.len())
        .map(|k| exp.truncation_distance(k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CaseResult {
        case,
        qubits,
        nnz: m.nnz(),
        distances,
        m_star: epsilons.iter().map(|&e| exp.terms_for_epsilon(e)).collect(),
    })
}

pub fn run_pauli_scaling(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let base = read_adr(cfg, false)?;
    let carleman_sites = cfg.usize_list_or("pauli.carleman_sites", &[2, 3, 4, 5, 6])?;
    let order = cfg.usize_or("pauli.order", 3)?;
    let a_only_qubits = cfg.usize_list_or("pauli.a_only_qubits", &[2, 3, 4, 5, 6])?;
    let epsilons = cfg.grid_or("pauli.epsilons", "0.1,0.01,0.001")?;
    cfg.reject_unknown()?;
    if order == 0 {
        return Err(CliError::Value {
            key: "pauli.order".into(),
            msg: "must be >= 1".into(),
        });
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(CliError::Value {
            key: "pauli.epsilons".into(),
            msg: format!("every epsilon must lie in (0, 1), got {e}"),
        });
    }
    if let Some(n) = carleman_sites.iter().find(|&&n| n < 2) {
        return Err(CliError::Value {
            key: "pauli.carleman_sites".into(),
            msg: format!("need at least 2 sites, got {n}"),
        });
    }
    if let Some(q) = a_only_qubits
        .iter()
        .find(|&&q| q == 0 || q > MAX_DECOMPOSITION_QUBITS)
    {
        return Err(Error::CapExceeded {
            what: "decomposition qubits",
            value: *q,
            cap: MAX_DECOMPOSITION_QUBITS,
        }
        .into());
    }
    let mut cases: Vec<Case> = carleman_sites
        .iter()
        .map(|&sites| Case {
            family: Family::Carleman,
            sites,
            order,
        })
        .collect();
    cases.extend(a_only_qubits.iter().map(|&q| Case {
        family: Family::LinearOnly,
        sites: 1 << q,
        order: 1,
    }));
    for c in &cases {
        c.check_cap()?;
    }
    ensure_dir(out)?;

    let results = cases
        .par_iter()
        .map(|&c| run_case(c, &base, &epsilons))
        .collect::<Result<Vec<_>, _>>()?;

    let mut meta = Metadata::new("pauli");
    meta.extend(cfg.echo());
    let mut dist = Table::new(&["matrix", "N", "K", "q", "m", "m_fraction", "d"]);
    let mut mstar = Table::new(&[
        "matrix",
        "N",
        "K",
        "q",
        "nnz",
        "epsilon",
        "m_star",
        "m_star_fraction",
    ]);
    for r in &results {
        let key = [
            r.case.family.name().to_string(),
            r.case.sites.to_string(),
            r.case.order.to_string(),
            r.qubits.to_string(),
        ];
        for (m, d) in r.distances.iter().enumerate() {
            let mut row = key.to_vec();
            row.extend([m.to_string(), fmt_f64(m as f64 / r.nnz as f64), fmt_f64(*d)]);
            dist.push(row);
        }
        for (eps, m) in epsilons.iter().zip(&r.m_star) {
            let mut row = key.to_vec();
            row.extend([
                r.nnz.to_string(),
                fmt_f64(*eps),
                m.to_string(),
                fmt_f64(*m as f64 / r.nnz as f64),
            ]);
            mstar.push(row);
        }
    }
    let mut report = Report::default();
    report
        .files
        .push(dist.write(out, "pauli_distance.csv", &meta)?);
    report
        .files
        .push(mstar.write(out, "pauli_mstar.csv", &meta)?);
    Ok(report)
}
