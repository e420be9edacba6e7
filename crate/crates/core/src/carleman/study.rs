//! Error measures between the nonlinear Euler solution and the Carleman
//! approximation.

use super::{initial_carleman_state, CarlemanOperator};
use crate::adr::{AdrParams, LatticeField, NonlinearEuler, RELATIVE_ERROR_GUARD};
use crate::error::{Error, Result};

/// Per-step relative error `max_j |φ_Eul − φ_Carl| / |φ_Eul|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeErrorSeries {
    /// One entry per stored step.
    pub series: Vec<f64>,
    /// Step of the largest error (first one on ties).
    pub step_star: usize,
    pub max: f64,
    /// Site-averaged relative error at `step_star`.
    pub mean_at_star: f64,
}

/// Compares two trajectories step by step. Sites where `|φ_Eul|` is below
/// [`RELATIVE_ERROR_GUARD`] are left out; a step with no admitted site is an
/// error.
pub fn relative_error_series(
    reference: &[LatticeField],
    approx: &[LatticeField],
) -> Result<RelativeErrorSeries> {
    if reference.len() != approx.len() {
        return Err(Error::ShapeMismatch {
            expected: reference.len(),
            found: approx.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let mut series = Vec::with_capacity(reference.len());
    let mut means = Vec::with_capacity(reference.len());
    for (step, (r, a)) in reference.iter().zip(approx).enumerate() {
        if r.len() != a.len() {
            return Err(Error::ShapeMismatch {
                expected: r.len(),
                found: a.len(),
            });
        }
        let errs: Vec<f64> = r
            .values()
            .iter()
            .zip(a.values())
            .filter(|(re, _)| re.abs() >= RELATIVE_ERROR_GUARD)
            .map(|(re, ap)| (re - ap).abs() / re.abs())
            .collect();
        if errs.is_empty() {
            return Err(Error::DegenerateError { step });
        }
        series.push(errs.iter().cloned().fold(0.0, f64::max));
        means.push(errs.iter().sum::<f64>() / errs.len() as f64);
    }
    let (step_star, max) =
        series.iter().enumerate().fold(
            (0, series[0]),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        );
    Ok(RelativeErrorSeries {
        mean_at_star: means[step_star],
        series,
        step_star,
        max,
    })
}

/// First-order block of the Carleman evolution at steps `0..=n_steps`.
///
/// Stops with an error at the first step that produces non-finite values.
pub fn carleman_trajectory(
    op: &CarlemanOperator,
    phi0: &LatticeField,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<LatticeField>> {
    let mut u = initial_carleman_state(phi0, op.order())?;
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(phi0.clone());
    for step in 1..=n_steps {
        u = op.euler_step(&u, dt)?;
        if !u.is_finite() {
            return Err(Error::NonFinite {
                what: "Carleman state",
                step,
            });
        }
        out.push(LatticeField::new(u.first().to_vec())?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
    pub step_star: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln(max error)` against `K`; `None` when fewer
    /// than two rows have a positive error.
    pub log_slope: Option<f64>,
}

/// Runs the nonlinear Euler integration once and the Carleman evolution for
/// each order in `orders` (ascending), tabulating the worst relative error.
pub fn convergence_study(
    params: &AdrParams,
    phi0: &LatticeField,
    orders: &[usize],
    n_steps: usize,
) -> Result<ConvergenceTable> {
    if orders.is_empty() || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "truncation orders must be non-empty and strictly ascending".into(),
        ));
    }
    let reference = NonlinearEuler::new(params)?.trajectory(phi0, n_steps)?;
    let mut rows = Vec::with_capacity(orders.len());
    for &order in orders {
        let op = CarlemanOperator::from_params(params, order)?;
        let approx = carleman_trajectory(&op, phi0, params.dt, n_steps)?;
        let err = relative_error_series(&reference, &approx)?;
        rows.push(ConvergenceRow {
            order,
            max_relative_error: err.max,
            mean_relative_error: err.mean_at_star,
            step_star: err.step_star,
        });
    }
    let log_slope = log_linear_slope(
        rows.iter()
            .filter(|r| r.max_relative_error > 0.0)
            .map(|r| (r.order as f64, r.max_relative_error.ln())),
    );
    Ok(ConvergenceTable { rows, log_slope })
}

fn log_linear_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
