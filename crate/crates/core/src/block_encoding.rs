//! Oracle-based block encodings of the Euler update `L = 1 + dt·A` and of
//! the quadratic coupling `B̂`, built as explicit gate lists.
//!
//! Every circuit has the shape `H^{⊗m} · O_c · O_v · H^{⊗m}` on a value
//! qubit, an `m`-qubit column register and the system register. After
//! projecting all ancillas on `|0⟩` the system holds `M·ψ / 2^m`.
//!
//! The oracles are column-access: branch `l` moves amplitude from system
//! index `i` to `c(i, l)` and weights it by `M[c(i, l), i]`. Weighting by
//! `M[i, c(i, l)]` instead would encode `Mᵀ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::adr::DerivedNumbers;
use crate::error::{Error, Result};
use crate::qsim::{Gate, QuantumRegisterLayout, Register, ShiftDirection, StateVector};
use crate::sparse::CsrMatrix;

const NORM_TOLERANCE: f64 = 1e-10;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Rotation angle whose `|0⟩` amplitude equals `value`.
fn angle(value: f64) -> f64 {
    2.0 * value.clamp(-1.0, 1.0).acos()
}

/// How one applicability inequality `|x| < 1` came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Pass,
    /// `|x| = 1` exactly: encodable, but not strictly inside the region.
    Boundary,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    /// `|x|`
    pub magnitude: f64,
    /// `1 − |x|`
    pub margin: f64,
    pub status: ConditionStatus,
}

impl ConditionCheck {
    fn new(name: &'static str, x: f64) -> Self {
        let magnitude = x.abs();
        let status = if magnitude < 1.0 {
            ConditionStatus::Pass
        } else if magnitude == 1.0 {
            ConditionStatus::Boundary
        } else {
            ConditionStatus::Fail
        };
        Self {
            name,
            magnitude,
            margin: 1.0 - magnitude,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplicabilityReport {
    pub numbers: DerivedNumbers,
    /// `|λ0|`, `|λ1|`, `|λ2|`, `|1 − γ_r|`, in that order.
    pub conditions: [ConditionCheck; 4],
}

impl ApplicabilityReport {
    /// Every condition strictly satisfied.
    pub fn all_pass(&self) -> bool {
        self.conditions
            .iter()
            .all(|c| c.status == ConditionStatus::Pass)
    }

    /// No condition violated (boundary allowed).
    pub fn encodable(&self) -> bool {
        self.conditions
            .iter()
            .all(|c| c.status != ConditionStatus::Fail)
    }
}

pub fn check_applicability(numbers: &DerivedNumbers) -> ApplicabilityReport {
    ApplicabilityReport {
        numbers: *numbers,
        conditions: [
            ConditionCheck::new("|1-2g_d-g_r|<1", numbers.lambda0),
            ConditionCheck::new("|g_d-g_a/2|<1", numbers.lambda1),
            ConditionCheck::new("|g_d+g_a/2|<1", numbers.lambda2),
            ConditionCheck::new("|1-g_r|<1", 1.0 - numbers.gamma_react),
        ],
    }
}

/// Sparse access tables of a matrix: for every source index `i` and branch
/// `l < 2^m`, the destination `column_map[i][l]` and the weight
/// `values[i][l] = M[column_map[i][l], i]`, with rotation angle
/// `2·arccos(value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOracleSpec {
    pub sparsity: usize,
    pub column_qubits: usize,
    pub column_map: Vec<Vec<usize>>,
    pub values: Vec<Vec<f64>>,
}

impl SparseOracleSpec {
    pub fn angle(&self, i: usize, l: usize) -> f64 {
        angle(self.values[i][l])
    }

    /// Matrix the tables describe, `M[c(i,l), i] += value`.
    pub fn to_matrix(&self) -> Result<CsrMatrix> {
        let dim = self.column_map.len();
        CsrMatrix::from_triplets(
            dim,
            dim,
            self.column_map.iter().enumerate().flat_map(|(i, cols)| {
                cols.iter()
                    .zip(&self.values[i])
                    .map(move |(&c, &v)| (c, i, v))
            }),
        )
    }
}

/// Periodic tridiagonal Euler update: `λ0` on the diagonal, `λ1` on the
/// superdiagonal, `λ2` on the subdiagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzL {
    pub n: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ToeplitzL {
    pub fn new(n: usize, numbers: &DerivedNumbers) -> Self {
        Self {
            n,
            lambda0: numbers.lambda0,
            lambda1: numbers.lambda1,
            lambda2: numbers.lambda2,
        }
    }

    pub fn from_courant(n: usize, gamma_diff: f64, gamma_adv: f64, gamma_react: f64) -> Self {
        Self::new(
            n,
            &DerivedNumbers::from_courant(gamma_diff, gamma_adv, gamma_react),
        )
    }

    pub fn matrix(&self) -> Result<CsrMatrix> {
        let n = self.n;
        CsrMatrix::from_triplets(
            n,
            n,
            (0..n).flat_map(|i| {
                [
                    (i, i, self.lambda0),
                    (i, (i + 1) % n, self.lambda1),
                    (i, (i + n - 1) % n, self.lambda2),
                ]
            }),
        )
    }

    /// `L·ψ`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                psi[i] * self.lambda0
                    + psi[(i + 1) % n] * self.lambda1
                    + psi[(i + n - 1) % n] * self.lambda2
            })
            .collect()
    }

    /// Eigenvalue of the Fourier mode `v_j = e^{2πi jk/N}/√N`.
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.n as f64);
        self.lambda0 + w * self.lambda1 + w.conj() * self.lambda2
    }

    pub fn fourier_mode(&self, k: usize) -> Vec<Complex64> {
        let s = 1.0 / (self.n as f64).sqrt();
        (0..self.n)
            .map(|j| Complex64::from_polar(s, 2.0 * PI * (j * k) as f64 / self.n as f64))
            .collect()
    }

    fn numbers_check(&self) -> Result<()> {
        for (name, v) in [
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ] {
            if v.is_nan() || v.abs() > 1.0 {
                return Err(Error::NotApplicable(format!("|{name}| = {} > 1", v.abs())));
            }
        }
        Ok(())
    }

    /// Branches `l = 0, 1, 2, 3` go to `i`, `i+1`, `i−1`, `i` with weights
    /// `λ0`, `λ2`, `λ1`, `0`. The last branch duplicates the diagonal and is
    /// zeroed.
    pub fn oracle_spec(&self) -> SparseOracleSpec {
        let n = self.n;
        SparseOracleSpec {
            sparsity: 3,
            column_qubits: 2,
            column_map: (0..n)
                .map(|i| vec![i, (i + 1) % n, (i + n - 1) % n, i])
                .collect(),
            values: (0..n)
                .map(|_| vec![self.lambda0, self.lambda2, self.lambda1, 0.0])
                .collect(),
        }
    }
}

/// `B̂ = [[1, dt·B], [0, 1]]` on the first- and second-order Carleman
/// blocks, padded to a power of two.
///
/// In the natural layout (u_1 then u_2 row-major) the coupling sits at
/// `(i, i + (i+1)N)`. The circuit works in a reordered layout where the
/// diagonal second-order entries `(i, i)` occupy `N..2N`, so the coupling
/// becomes `(i, N + i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhatOperator {
    pub n: usize,
    /// `b·dt`
    pub coupling: f64,
    pub system_qubits: usize,
}

impl BhatOperator {
    pub fn new(n: usize, b: f64, dt: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let coupling = b * dt;
        if coupling.is_nan() || coupling.abs() > 1.0 {
            return Err(Error::NotApplicable(format!(
                "|b·dt| = {} > 1",
                coupling.abs()
            )));
        }
        let dim = n + n * n;
        let mut system_qubits = 1;
        while (1usize << system_qubits) < dim {
            system_qubits += 1;
        }
        Ok(Self {
            n,
            coupling,
            system_qubits,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.system_qubits
    }

    /// `β = 2·arccos(b·dt)`.
    pub fn beta(&self) -> f64 {
        angle(self.coupling)
    }

    /// Natural index → reordered index.
    pub fn reordered_index(&self, natural: usize) -> usize {
        let n = self.n;
        if natural < n || natural >= n + n * n {
            return natural;
        }
        let pair = natural - n;
        let (j, k) = (pair / n, pair % n);
        if j == k {
            return n + j;
        }
        // off-diagonal pairs keep their relative order after the N diagonals
        let diagonals_before = j + usize::from(k > j);
        2 * n + pair - diagonals_before
    }

    /// Natural-layout matrix.
    pub fn natural_matrix(&self) -> Result<CsrMatrix> {
        let n = self.n;
        let dim = self.dim();
        CsrMatrix::from_triplets(
            dim,
            dim,
            (0..dim)
                .map(|i| (i, i, 1.0))
                .chain((0..n).map(|i| (i, i + (i + 1) * n, self.coupling))),
        )
    }

    /// Reordered-layout matrix.
    pub fn reordered_matrix(&self) -> Result<CsrMatrix> {
        let n = self.n;
        let dim = self.dim();
        CsrMatrix::from_triplets(
            dim,
            dim,
            (0..dim)
                .map(|i| (i, i, 1.0))
                .chain((0..n).map(|i| (i, n + i, self.coupling))),
        )
    }

    pub fn to_reordered(&self, natural: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![zero(); natural.len()];
        for (i, &a) in natural.iter().enumerate() {
            out[self.reordered_index(i)] = a;
        }
        out
    }

    pub fn to_natural(&self, reordered: &[Complex64]) -> Vec<Complex64> {
        (0..reordered.len())
            .map(|i| reordered[self.reordered_index(i)])
            .collect()
    }

    /// Reordered layout: branch 0 is the identity, branch 1 moves `N + i` to
    /// `i` with weight `b·dt` and carries zero weight elsewhere.
    pub fn oracle_spec(&self) -> SparseOracleSpec {
        let n = self.n;
        let dim = self.dim();
        SparseOracleSpec {
            sparsity: 2,
            column_qubits: 1,
            column_map: (0..dim).map(|i| vec![i, (i + dim - n) % dim]).collect(),
            values: (0..dim)
                .map(|i| {
                    let w = if (n..2 * n).contains(&i) {
                        self.coupling
                    } else {
                        0.0
                    };
                    vec![1.0, w]
                })
                .collect(),
        }
    }
}

/// Assembled block-encoding circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncodingCircuit {
    pub layout: QuantumRegisterLayout,
    pub gates: Vec<Gate>,
    pub value: Register,
    pub column: Register,
    pub flag: Option<Register>,
    pub system: Register,
}

/// Post-selected output of one circuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct BeOutcome {
    /// System amplitudes with every ancilla projected on `|0⟩`, not
    /// renormalized.
    pub residual: Vec<Complex64>,
    pub probability: f64,
}

impl BlockEncodingCircuit {
    /// `2^m`: the factor by which the residual is scaled down.
    pub fn subnormalization(&self) -> f64 {
        self.column.dim() as f64
    }

    pub fn total_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    fn ancillas(&self) -> Vec<(Register, usize)> {
        let mut a = vec![(self.value, 0), (self.column, 0)];
        if let Some(f) = self.flag {
            a.push((f, 0));
        }
        a
    }

    /// Runs the circuit on `|0⟩_anc ⊗ |ψ⟩` and post-selects the ancillas.
    pub fn simulate(&self, psi: &[Complex64]) -> Result<BeOutcome> {
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "input state norm {norm} is not 1"
            )));
        }
        let mut state = StateVector::with_register(self.total_qubits(), self.system, psi)?;
        state.apply_all(&self.gates)?;
        let (residual, probability) = state.postselect(&self.ancillas())?;
        Ok(BeOutcome {
            residual,
            probability,
        })
    }
}

fn be_layout(
    column_qubits: usize,
    flag: bool,
    system_qubits: usize,
) -> Result<BlockEncodingCircuit> {
    let mut layout = QuantumRegisterLayout::new();
    let value = layout.add("value", 1)?;
    let column = layout.add("column", column_qubits)?;
    let flag = if flag {
        Some(layout.add("flag", 1)?)
    } else {
        None
    };
    let system = layout.add("system", system_qubits)?;
    Ok(BlockEncodingCircuit {
        layout,
        gates: Vec::new(),
        value,
        column,
        flag,
        system,
    })
}

/// Circuit block-encoding `L / 4`.
///
/// Value oracle: one `R_y` on the value qubit per column-register pattern.
/// Column oracle: `S₊` controlled by the low column qubit and `S₋` by the
/// high one, so pattern 3 shifts there and back.
pub fn build_be_circuit_l(l: &ToeplitzL) -> Result<BlockEncodingCircuit> {
    if l.n < 2 || !l.n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(l.n));
    }
    l.numbers_check()?;
    let n_qubits = l.n.trailing_zeros() as usize;
    let mut circuit = be_layout(2, false, n_qubits)?;
    let (v, col, sys) = (circuit.value.start, circuit.column, circuit.system);
    let spec = l.oracle_spec();

    let mut gates = vec![Gate::Hadamard(col.qubit(0)), Gate::Hadamard(col.qubit(1))];
    for branch in 0..4 {
        gates.push(Gate::Ry(v, spec.angle(0, branch)).controlled(col.controls_for(branch)));
    }
    gates.push(
        Gate::CyclicShift {
            register: sys,
            direction: ShiftDirection::Right,
            power: 1,
        }
        .controlled(vec![(col.qubit(1), true)]),
    );
    gates.push(
        Gate::CyclicShift {
            register: sys,
            direction: ShiftDirection::Left,
            power: 1,
        }
        .controlled(vec![(col.qubit(0), true)]),
    );
    gates.push(Gate::Hadamard(col.qubit(0)));
    gates.push(Gate::Hadamard(col.qubit(1)));
    circuit.gates = gates;
    Ok(circuit)
}

/// Circuit block-encoding `B̂ / 2` in the reordered layout.
///
/// A flag qubit marks system indices in `N..2N` (high bits equal to 1),
/// selects between `R_y(β)` and `R_y(π)` on the `l = 1` branch, and is
/// uncomputed before the controlled `S₋^N` moves those entries onto `0..N`.
pub fn build_be_circuit_b(bhat: &BhatOperator) -> Result<BlockEncodingCircuit> {
    let n_bits = bhat.n.trailing_zeros() as usize;
    let mut circuit = be_layout(1, true, bhat.system_qubits)?;
    let (v, c, sys) = (circuit.value.start, circuit.column.start, circuit.system);
    let flag = circuit.flag.expect("flag register").start;

    let high = Register {
        start: sys.start,
        len: sys.len - n_bits,
    };
    let compare = Gate::mcx(flag, high.controls_for(1));
    circuit.gates = vec![
        Gate::Hadamard(c),
        compare.clone(),
        Gate::Ry(v, bhat.beta()).controlled(vec![(c, true), (flag, true)]),
        Gate::Ry(v, PI).controlled(vec![(c, true), (flag, false)]),
        compare,
        Gate::CyclicShift {
            register: sys,
            direction: ShiftDirection::Left,
            power: bhat.n,
        }
        .controlled(vec![(c, true)]),
        Gate::Hadamard(c),
    ];
    Ok(circuit)
}

/// Runs a block-encoding circuit on `psi` and post-selects the ancillas.
pub fn simulate_be(circuit: &BlockEncodingCircuit, psi: &[Complex64]) -> Result<BeOutcome> {
    circuit.simulate(psi)
}

/// Runs the `B̂` circuit on a natural-layout state and returns the residual
/// in the natural layout.
pub fn simulate_be_b_natural(
    bhat: &BhatOperator,
    circuit: &BlockEncodingCircuit,
    psi_natural: &[Complex64],
) -> Result<BeOutcome> {
    let out = circuit.simulate(&bhat.to_reordered(psi_natural))?;
    Ok(BeOutcome {
        residual: bhat.to_natural(&out.residual),
        probability: out.probability,
    })
}

/// Initial system state for the analytic success probability.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// `c_i = δ_{i,x}`
    Localized(usize),
    /// `c_i = 1/√N`
    Uniform,
    Explicit(Vec<Complex64>),
}

/// Closed-form success probability of the `L` circuit:
///
/// ```text
/// p0 = 1/16 Σ_i [ |c_i|²(λ0²+λ1²+λ2²)
///                + (c_i c*_{i+1} + c_i c*_{i−1})(λ0λ1 + λ0λ2)
///                + (c_i c*_{i+2} + c_i c*_{i−2}) λ1λ2 ]
/// ```
///
/// with periodic indices. Works for any `N`, power of two or not.
pub fn p0_analytic_l(l: &ToeplitzL, initial: &InitialState) -> Result<f64> {
    let n = l.n;
    let c: Vec<Complex64> = match initial {
        InitialState::Localized(x) => {
            if *x >= n {
                return Err(Error::OutOfRange {
                    index: *x,
                    limit: n,
                });
            }
            (0..n)
                .map(|i| Complex64::new(if i == *x { 1.0 } else { 0.0 }, 0.0))
                .collect()
        }
        InitialState::Uniform => vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n],
        InitialState::Explicit(c) => {
            if c.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            c.clone()
        }
    };
    let (l0, l1, l2) = (l.lambda0, l.lambda1, l.lambda2);
    let at = |i: isize| c[i.rem_euclid(n as isize) as usize];
    let mut sum = zero();
    for i in 0..n as isize {
        let ci = at(i);
        sum += ci.norm_sqr() * (l0 * l0 + l1 * l1 + l2 * l2);
        sum += (ci * at(i + 1).conj() + ci * at(i - 1).conj()) * (l0 * l1 + l0 * l2);
        sum += (ci * at(i + 2).conj() + ci * at(i - 2).conj()) * (l1 * l2);
    }
    Ok(sum.re / 16.0)
}

/// Largest success probability of the `B̂` circuit over computational-basis
/// inputs, `(1 + (b·dt)²)/4`, reached by a state sitting on a diagonal
/// second-order entry.
pub fn p0_max_b(b: f64, dt: f64) -> f64 {
    (1.0 + (b * dt).powi(2)) / 4.0
}
