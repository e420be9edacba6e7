//! Finite-difference form of the 1D advection-diffusion-reaction equation
//!
//! ```text
//! dφ/dt = D ∂²φ/∂x² − ∂(Uφ)/∂x − aφ + bφ²
//! ```
//!
//! on a periodic lattice of `N` sites, integrated with forward Euler, plus the
//! closed-form single-site (logistic) references used to judge the Carleman
//! truncation.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Sites whose reference value is below this magnitude are skipped when
/// forming relative errors.
pub const RELATIVE_ERROR_GUARD: f64 = 1e-12;

/// Advection velocity on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityField {
    Constant(f64),
    /// One velocity per site.
    Profile(Vec<f64>),
}

impl VelocityField {
    /// Localized Gaussian "wind" `u0 * exp(-(j - N/2)^2 / (2 sigma^2))`.
    pub fn gaussian(n_sites: usize, u0: f64, sigma: f64) -> Self {
        let center = (n_sites / 2) as f64;
        VelocityField::Profile(
            (0..n_sites)
                .map(|j| {
                    let d = j as f64 - center;
                    u0 * (-d * d / (2.0 * sigma * sigma)).exp()
                })
                .collect(),
        )
    }

    /// Velocity at site `j`.
    pub fn at(&self, j: usize) -> f64 {
        match self {
            VelocityField::Constant(u) => *u,
            VelocityField::Profile(values) => values[j],
        }
    }

    /// Largest velocity magnitude, used for the advective Courant number.
    pub fn max_abs(&self) -> f64 {
        match self {
            VelocityField::Constant(u) => u.abs(),
            VelocityField::Profile(values) => values.iter().fold(0.0, |m, u| m.max(u.abs())),
        }
    }
}

/// Physical and numerical parameters of one ADR run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdrParams {
    /// Diffusion coefficient `D`.
    pub diffusion: f64,
    /// Linear decay rate `a`.
    pub linear_rate: f64,
    /// Quadratic growth rate `b`.
    pub quadratic_rate: f64,
    pub dx: f64,
    pub dt: f64,
    pub n_sites: usize,
    pub velocity: VelocityField,
}

impl AdrParams {
    /// Lattice units (`dx = D = 1`), constant velocity.
    pub fn lattice_units(n_sites: usize, velocity: f64, a: f64, b: f64, dt: f64) -> Self {
        Self {
            diffusion: 1.0,
            linear_rate: a,
            quadratic_rate: b,
            dx: 1.0,
            dt,
            n_sites,
            velocity: VelocityField::Constant(velocity),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return bad(format!(
                "diffusion must be finite and >= 0, got {}",
                self.diffusion
            ));
        }
        if !(self.linear_rate > 0.0 && self.linear_rate.is_finite()) {
            return bad(format!(
                "linear rate a must be > 0, got {}",
                self.linear_rate
            ));
        }
        if !(self.quadratic_rate >= 0.0 && self.quadratic_rate.is_finite()) {
            return bad(format!(
                "quadratic rate b must be >= 0, got {}",
                self.quadratic_rate
            ));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return bad(format!("dx must be > 0, got {}", self.dx));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.n_sites < 2 {
            return bad(format!("need at least 2 sites, got {}", self.n_sites));
        }
        if let VelocityField::Profile(values) = &self.velocity {
            if values.len() != self.n_sites {
                return Err(Error::ShapeMismatch {
                    expected: self.n_sites,
                    found: values.len(),
                });
            }
        }
        if !(self.velocity.max_abs().is_finite()) {
            return bad("velocity field has non-finite entries".into());
        }
        Ok(())
    }

    /// Courant numbers and the ratios built from them. For a velocity profile
    /// the advective number uses the largest `|U_j|`.
    pub fn derived(&self) -> Result<DerivedNumbers> {
        self.validate()?;
        Ok(DerivedNumbers::from_courant(
            self.dt * self.diffusion / (self.dx * self.dx),
            self.dt * self.velocity.max_abs() / self.dx,
            self.linear_rate * self.dt,
        ))
    }

    /// Nonlinearity strength `R = φmax · b / a`.
    pub fn nonlinearity(&self, phi_max: f64) -> f64 {
        phi_max * self.quadratic_rate / self.linear_rate
    }

    /// Carrying capacity `a / b`.
    pub fn carrying_capacity(&self) -> f64 {
        self.linear_rate / self.quadratic_rate
    }
}

/// Per-step strengths of diffusion, advection and reaction, with the
/// stencil weights of `1 + dt·A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedNumbers {
    pub gamma_diff: f64,
    pub gamma_adv: f64,
    pub gamma_react: f64,
    pub peclet_cell: f64,
    pub damkohler_adv: f64,
    pub damkohler_diff: f64,
    /// Diagonal weight `1 − 2γ_d − γ_r`.
    pub lambda0: f64,
    /// Weight of the right neighbour, `γ_d − γ_a/2`.
    pub lambda1: f64,
    /// Weight of the left neighbour, `γ_d + γ_a/2`.
    pub lambda2: f64,
}

impl DerivedNumbers {
    pub fn from_courant(gamma_diff: f64, gamma_adv: f64, gamma_react: f64) -> Self {
        Self {
            gamma_diff,
            gamma_adv,
            gamma_react,
            peclet_cell: gamma_adv / gamma_diff,
            damkohler_adv: gamma_adv / gamma_react,
            damkohler_diff: gamma_diff / gamma_react,
            lambda0: 1.0 - 2.0 * gamma_diff - gamma_react,
            lambda1: gamma_diff - gamma_adv / 2.0,
            lambda2: gamma_diff + gamma_adv / 2.0,
        }
    }
}

/// Concentration profile over the periodic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField(Vec<f64>);

impl LatticeField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty lattice field".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "lattice field has non-finite entries".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Box initial condition of given height and width around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialBox {
    pub height: f64,
    pub width: usize,
    pub center: usize,
}

impl InitialBox {
    /// Box centred on site `N/2`.
    pub fn centered(n_sites: usize, height: f64, width: usize) -> Self {
        Self {
            height,
            width,
            center: n_sites / 2,
        }
    }

    /// Sites `center - width/2 .. center - width/2 + width` (periodic) are set
    /// to `height`.
    pub fn field(&self, n_sites: usize) -> Result<LatticeField> {
        if self.width == 0 || self.width > n_sites {
            return Err(Error::InvalidParameter(format!(
                "box width {} must lie in 1..={n_sites}",
                self.width
            )));
        }
        if !(self.height.is_finite()) {
            return Err(Error::InvalidParameter("box height must be finite".into()));
        }
        let mut values = vec![0.0; n_sites];
        let start = (self.center % n_sites + n_sites - self.width / 2 % n_sites) % n_sites;
        for k in 0..self.width {
            values[(start + k) % n_sites] = self.height;
        }
        LatticeField::new(values)
    }
}

fn stencil_triplets(params: &AdrParams) -> Vec<(usize, usize, f64)> {
    let n = params.n_sites;
    let diff = params.diffusion / (params.dx * params.dx);
    let half = 1.0 / (2.0 * params.dx);
    let mut triplets = Vec::with_capacity(3 * n);
    for j in 0..n {
        let left = (j + n - 1) % n;
        let right = (j + 1) % n;
        let u = params.velocity.at(j);
        let divergence = match &params.velocity {
            VelocityField::Constant(_) => 0.0,
            VelocityField::Profile(values) => (values[right] - values[left]) * half,
        };
        triplets.push((j, j, -2.0 * diff - params.linear_rate - divergence));
        triplets.push((j, left, diff + u * half));
        triplets.push((j, right, diff - u * half));
    }
    triplets
}

/// Linear operator `A` for a constant velocity: diagonal `−2D/dx² − a`,
/// left neighbour `D/dx² + U/(2dx)`, right neighbour `D/dx² − U/(2dx)`,
/// periodic wrap.
pub fn build_linear_matrix(params: &AdrParams) -> Result<CsrMatrix> {
    params.validate()?;
    if let VelocityField::Profile(_) = params.velocity {
        return Err(Error::InvalidParameter(
            "velocity profile given; use build_linear_matrix_profile".into(),
        ));
    }
    CsrMatrix::from_triplets(params.n_sites, params.n_sites, stencil_triplets(params))
}

/// Linear operator `A` for a site-dependent velocity `U_j` (central
/// differences). The diagonal picks up `−(U_{j+1} − U_{j−1})/(2dx)`.
/// A constant field is accepted and gives the constant-velocity matrix.
pub fn build_linear_matrix_profile(params: &AdrParams) -> Result<CsrMatrix> {
    params.validate()?;
    CsrMatrix::from_triplets(params.n_sites, params.n_sites, stencil_triplets(params))
}

/// Forward-Euler integrator of the nonlinear lattice equation. Holds the
/// assembled `A` so repeated steps do not rebuild it.
#[derive(Debug, Clone)]
pub struct NonlinearEuler {
    matrix: CsrMatrix,
    quadratic_rate: f64,
    dt: f64,
}

impl NonlinearEuler {
    pub fn new(params: &AdrParams) -> Result<Self> {
        Ok(Self {
            matrix: build_linear_matrix_profile(params)?,
            quadratic_rate: params.quadratic_rate,
            dt: params.dt,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `φ + dt·(Aφ + bφ²)` with the square taken per site. Fails if the
    /// result is not finite.
    pub fn step(&self, phi: &LatticeField) -> Result<LatticeField> {
        let a_phi = self.matrix.matvec(phi.values())?;
        LatticeField::new(
            phi.values()
                .iter()
                .zip(a_phi)
                .map(|(&p, ap)| p + self.dt * (ap + self.quadratic_rate * p * p))
                .collect(),
        )
    }

    /// States at steps `0..=n_steps`.
    pub fn trajectory(&self, phi0: &LatticeField, n_steps: usize) -> Result<Vec<LatticeField>> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(phi0.clone());
        for step in 1..=n_steps {
            let next = self
                .step(out.last().expect("non-empty"))
                .map_err(|_| Error::NonFinite {
                    what: "nonlinear Euler field",
                    step,
                })?;
            out.push(next);
        }
        Ok(out)
    }
}

/// One forward-Euler step of the nonlinear lattice equation.
pub fn euler_step_nonlinear(phi: &LatticeField, params: &AdrParams) -> Result<LatticeField> {
    if phi.len() != params.n_sites {
        return Err(Error::ShapeMismatch {
            expected: params.n_sites,
            found: phi.len(),
        });
    }
    NonlinearEuler::new(params)?.step(phi)
}

/// Exact solution of `dφ/dt = −aφ + bφ²`:
/// `φ0 e^{−at} / (1 − R(1 − e^{−at}))` with `R = bφ0/a`.
///
/// Fails once the denominator reaches zero (finite-time blow-up for `R ≥ 1`).
pub fn logistic_exact(phi0: f64, a: f64, b: f64, t: f64) -> Result<f64> {
    let ratio = b * phi0 / a;
    let decay = (-a * t).exp();
    let denom = 1.0 - ratio * (1.0 - decay);
    if denom <= 0.0 {
        return Err(Error::LogisticBlowUp { t, ratio });
    }
    Ok(phi0 * decay / denom)
}

/// Carleman closed form of the logistic equation,
/// `φ0 e^{−at} Σ_{k=0}^{K} [R(1 − e^{−at})]^k`.
///
/// The sum to `K` is what a Carleman system with blocks `u_1..u_{K+1}`
/// produces for the first component.
pub fn logistic_carleman_truncated(phi0: f64, a: f64, b: f64, t: f64, order: usize) -> f64 {
    let ratio = b * phi0 / a;
    let decay = (-a * t).exp();
    let x = ratio * (1.0 - decay);
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=order {
        sum += term;
        term *= x;
    }
    phi0 * decay * sum
}
