//! The four experiment drivers. Each reads its settings from a [`Config`],
//! rejects unknown keys before doing any work, and writes CSV files into the
//! output directory.

use std::path::PathBuf;

use carleman_adr::{AdrParams, InitialBox, LatticeField, VelocityField};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{fmt_f64, Metadata};

pub mod be_verify;
pub mod convergence;
pub mod p0_scan;
pub mod pauli_scaling;

pub use be_verify::run_be_verify;
pub use convergence::run_convergence;
pub use p0_scan::run_p0_scan;
pub use pauli_scaling::run_pauli_scaling;

/// Files written and the tolerance checks that failed.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Physical parameters from the `adr` section. Sites are read only when
/// `with_sites` is set.
pub(crate) fn read_adr(cfg: &Config, with_sites: bool) -> Result<AdrParams, CliError> {
    let n_sites = if with_sites {
        cfg.usize_or("adr.n_sites", 20)?
    } else {
        2
    };
    let params = AdrParams {
        diffusion: cfg.f64_or("adr.diffusion", 1.0)?,
        dx: cfg.f64_or("adr.dx", 1.0)?,
        dt: cfg.f64_or("adr.dt", 0.01)?,
        linear_rate: cfg.f64_or("adr.a", 1.0)?,
        quadratic_rate: cfg.f64_or("adr.b", 0.6)?,
        n_sites,
        velocity: read_velocity(cfg, n_sites, with_sites)?,
    };
    if with_sites {
        params.validate()?;
    }
    Ok(params)
}

fn read_velocity(
    cfg: &Config,
    n_sites: usize,
    with_sites: bool,
) -> Result<VelocityField, CliError> {
    let raw = cfg.str_or("adr.velocity", "1");
    if raw == "gaussian" {
        if !with_sites {
            return Err(CliError::Value {
                key: "adr.velocity".into(),
                msg: "a velocity profile needs a lattice size".into(),
            });
        }
        let u0 = cfg.f64_or("adr.velocity_amplitude", 1.0)?;
        let sigma = cfg.f64_or("adr.velocity_sigma", n_sites as f64 / 8.0)?;
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(CliError::Value {
                key: "adr.velocity_sigma".into(),
                msg: "must be > 0".into(),
            });
        }
        return Ok(VelocityField::gaussian(n_sites, u0, sigma));
    }
    match raw.parse::<f64>() {
        Ok(u) if u.is_finite() => Ok(VelocityField::Constant(u)),
        _ => Err(CliError::Value {
            key: "adr.velocity".into(),
            msg: format!("expected a number or `gaussian`, got `{raw}`"),
        }),
    }
}

/// Initial field from the `initial` section: `box`, `localized` or `uniform`.
pub(crate) fn read_initial(cfg: &Config, n_sites: usize) -> Result<LatticeField, CliError> {
    let kind = cfg.str_or("initial.kind", "box");
    let field = match kind.as_str() {
        "box" => {
            let height = cfg.f64_or("initial.height", 1.0)?;
            let width = cfg.usize_or("initial.width", 5)?;
            let center = cfg.usize_or("initial.center", n_sites / 2)?;
            InitialBox {
                height,
                width,
                center,
            }
            .field(n_sites)?
        }
        "localized" => {
            let height = cfg.f64_or("initial.height", 1.0)?;
            let site = cfg.usize_or("initial.site", n_sites / 2)?;
            if site >= n_sites {
                return Err(CliError::Value {
                    key: "initial.site".into(),
                    msg: format!("site {site} outside 0..{n_sites}"),
                });
            }
            let mut v = vec![0.0; n_sites];
            v[site] = height;
            LatticeField::new(v)?
        }
        "uniform" => LatticeField::new(vec![cfg.f64_or("initial.height", 1.0)?; n_sites])?,
        other => {
            return Err(CliError::Value {
                key: "initial.kind".into(),
                msg: format!("expected box, localized or uniform, got `{other}`"),
            })
        }
    };
    Ok(field)
}

/// Derived Courant, Peclet and Damkohler numbers for the metadata block.
pub(crate) fn derived_metadata(meta: &mut Metadata, params: &AdrParams) -> Result<(), CliError> {
    let d = params.derived()?;
    meta.push("derived.gamma_diff", fmt_f64(d.gamma_diff));
    meta.push("derived.gamma_adv", fmt_f64(d.gamma_adv));
    meta.push("derived.gamma_react", fmt_f64(d.gamma_react));
    meta.push("derived.peclet_cell", fmt_f64(d.peclet_cell));
    meta.push("derived.damkohler_adv", fmt_f64(d.damkohler_adv));
    meta.push("derived.damkohler_diff", fmt_f64(d.damkohler_diff));
    Ok(())
}
