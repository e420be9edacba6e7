//! Small dense statevector simulator.
//!
//! Qubits are numbered globally from 0, and qubit 0 is the most significant
//! bit of a basis index. Registers are contiguous qubit ranges laid out in
//! the order they are added, so a register's value is read most significant
//! qubit first.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Desk-scale cap on the total number of simulated qubits.
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-10;

/// Contiguous run of qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Register {
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }

    pub fn dim(&self) -> usize {
        1 << self.len
    }

    /// Global qubit index of the `k`-th qubit (0 = most significant).
    pub fn qubit(&self, k: usize) -> usize {
        self.start + k
    }

    /// Controls selecting register value `value`.
    pub fn controls_for(&self, value: usize) -> Vec<(usize, bool)> {
        (0..self.len)
            .map(|k| (self.start + k, value >> (self.len - 1 - k) & 1 == 1))
            .collect()
    }
}

/// Named registers in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantumRegisterLayout {
    registers: Vec<(String, Register)>,
    total: usize,
}

impl QuantumRegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a register below the existing ones.
    pub fn add(&mut self, name: &str, len: usize) -> Result<Register> {
        if len == 0 {
            return Err(Error::InvalidParameter(format!("register {name} is empty")));
        }
        if self.registers.iter().any(|(n, _)| n == name) {
            return Err(Error::InvalidParameter(format!(
                "duplicate register {name}"
            )));
        }
        if self.total + len > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "total qubits",
                value: self.total + len,
                cap: MAX_QUBITS,
            });
        }
        let reg = Register {
            start: self.total,
            len,
        };
        self.total += len;
        self.registers.push((name.to_string(), reg));
        Ok(reg)
    }

    pub fn get(&self, name: &str) -> Option<Register> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| *r)
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, Register)> {
        self.registers.iter().map(|(n, r)| (n.as_str(), *r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `|i⟩ → |i + p mod 2^len⟩`
    Right,
    /// `|i⟩ → |i − p mod 2^len⟩`
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    PauliX(usize),
    /// `|0⟩ → cos(θ/2)|0⟩ + sin(θ/2)|1⟩`
    Ry(usize, f64),
    /// Acts only on basis states where every `(qubit, polarity)` matches.
    Controlled {
        gate: Box<Gate>,
        controls: Vec<(usize, bool)>,
    },
    CyclicShift {
        register: Register,
        direction: ShiftDirection,
        power: usize,
    },
    /// Basis permutation `|i⟩ → |map[i]⟩` on one register.
    Permutation {
        register: Register,
        map: Vec<usize>,
    },
}

impl Gate {
    pub fn controlled(self, controls: Vec<(usize, bool)>) -> Gate {
        Gate::Controlled {
            gate: Box::new(self),
            controls,
        }
    }

    /// Multi-controlled X.
    pub fn mcx(target: usize, controls: Vec<(usize, bool)>) -> Gate {
        Gate::PauliX(target).controlled(controls)
    }

    /// Qubits acted on, controls excluded.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Hadamard(q) | Gate::PauliX(q) | Gate::Ry(q, _) => vec![*q],
            Gate::Controlled { gate, .. } => gate.targets(),
            Gate::CyclicShift { register, .. } | Gate::Permutation { register, .. } => {
                register.qubits().collect()
            }
        }
    }

    fn flatten(&self) -> (&Gate, Vec<(usize, bool)>) {
        let mut controls = Vec::new();
        let mut gate = self;
        while let Gate::Controlled {
            gate: inner,
            controls: c,
        } = gate
        {
            controls.extend_from_slice(c);
            gate = inner;
        }
        (gate, controls)
    }
}

/// `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "total qubits",
                value: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange { index, limit: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes; they must have unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let state = Self {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        };
        if state.n_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "total qubits",
                value: state.n_qubits,
                cap: MAX_QUBITS,
            });
        }
        if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "state norm {} is not 1",
                state.norm()
            )));
        }
        Ok(state)
    }

    /// `|0⟩` on every qubit outside `register`, `psi` on `register`.
    pub fn with_register(n_qubits: usize, register: Register, psi: &[Complex64]) -> Result<Self> {
        if register.start + register.len > n_qubits {
            return Err(Error::OutOfRange {
                index: register.start + register.len,
                limit: n_qubits,
            });
        }
        if psi.len() != register.dim() {
            return Err(Error::ShapeMismatch {
                expected: register.dim(),
                found: psi.len(),
            });
        }
        let shift = n_qubits - register.start - register.len;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        for (r, &c) in psi.iter().enumerate() {
            amps[r << shift] = c;
        }
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn register_value(&self, index: usize, register: Register) -> usize {
        let shift = self.n_qubits - register.start - register.len;
        (index >> shift) & (register.dim() - 1)
    }

    fn with_register_value(&self, index: usize, register: Register, value: usize) -> usize {
        let shift = self.n_qubits - register.start - register.len;
        let mask = (register.dim() - 1) << shift;
        (index & !mask) | (value << shift)
    }

    fn check_register(&self, register: Register) -> Result<()> {
        if register.len == 0 || register.start + register.len > self.n_qubits {
            return Err(Error::OutOfRange {
                index: register.start + register.len,
                limit: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let (base, controls) = gate.flatten();
        let targets = base.targets();
        for &q in targets.iter().chain(controls.iter().map(|(q, _)| q)) {
            if q >= self.n_qubits {
                return Err(Error::OutOfRange {
                    index: q,
                    limit: self.n_qubits,
                });
            }
        }
        for (i, (q, _)) in controls.iter().enumerate() {
            if targets.contains(q) {
                return Err(Error::InvalidGate(format!("control {q} overlaps a target")));
            }
            if controls[..i].iter().any(|(p, _)| p == q) {
                return Err(Error::InvalidGate(format!("control {q} listed twice")));
            }
        }
        let (mut mask, mut want) = (0usize, 0usize);
        for &(q, polarity) in &controls {
            mask |= self.bit(q);
            if polarity {
                want |= self.bit(q);
            }
        }
        let active = |i: usize| i & mask == want;

        match base {
            Gate::Hadamard(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_single(*q, [h, h, h, -h], active);
            }
            Gate::PauliX(q) => self.apply_single(*q, [0.0, 1.0, 1.0, 0.0], active),
            Gate::Ry(q, theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.apply_single(*q, [c, -s, s, c], active);
            }
            Gate::CyclicShift {
                register,
                direction,
                power,
            } => {
                self.check_register(*register)?;
                let dim = register.dim();
                let p = power % dim;
                let step = match direction {
                    ShiftDirection::Right => p,
                    ShiftDirection::Left => dim - p,
                };
                self.apply_permutation(*register, |v| (v + step) % dim, active);
            }
            Gate::Permutation { register, map } => {
                self.check_register(*register)?;
                if map.len() != register.dim() {
                    return Err(Error::ShapeMismatch {
                        expected: register.dim(),
                        found: map.len(),
                    });
                }
                let mut seen = vec![false; map.len()];
                for &m in map {
                    if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                        return Err(Error::InvalidGate("permutation is not bijective".into()));
                    }
                }
                self.apply_permutation(*register, |v| map[v], active);
            }
            Gate::Controlled { .. } => unreachable!("flattened"),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, m: [f64; 4], active: impl Fn(usize) -> bool) {
        let bit = self.bit(qubit);
        for i in 0..self.amps.len() {
            if i & bit != 0 || !active(i) {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = a0 * m[0] + a1 * m[1];
            self.amps[i | bit] = a0 * m[2] + a1 * m[3];
        }
    }

    fn apply_permutation(
        &mut self,
        register: Register,
        f: impl Fn(usize) -> usize,
        active: impl Fn(usize) -> bool,
    ) {
        let mut out = self.amps.clone();
        for (i, &a) in self.amps.iter().enumerate() {
            if active(i) {
                let v = self.register_value(i, register);
                out[self.with_register_value(i, register, f(v))] = a;
            }
        }
        self.amps = out;
    }

    /// Projects `registers` onto the given values. Returns the amplitudes of
    /// the remaining qubits (in their original order, not renormalized) and
    /// the probability of the projection.
    pub fn postselect(&self, registers: &[(Register, usize)]) -> Result<(Vec<Complex64>, f64)> {
        let mut fixed_mask = 0usize;
        let mut fixed_want = 0usize;
        for &(reg, value) in registers {
            self.check_register(reg)?;
            if value >= reg.dim() {
                return Err(Error::OutOfRange {
                    index: value,
                    limit: reg.dim(),
                });
            }
            for k in 0..reg.len {
                let bit = self.bit(reg.qubit(k));
                if fixed_mask & bit != 0 {
                    return Err(Error::InvalidParameter("registers overlap".into()));
                }
                fixed_mask |= bit;
                if value >> (reg.len - 1 - k) & 1 == 1 {
                    fixed_want |= bit;
                }
            }
        }
        let free_bits: Vec<usize> = (0..self.n_qubits)
            .map(|q| self.bit(q))
            .filter(|b| fixed_mask & b == 0)
            .collect();
        let mut residual = vec![Complex64::new(0.0, 0.0); 1 << free_bits.len()];
        for (r, slot) in residual.iter_mut().enumerate() {
            let mut idx = fixed_want;
            for (k, &b) in free_bits.iter().enumerate() {
                if r >> (free_bits.len() - 1 - k) & 1 == 1 {
                    idx |= b;
                }
            }
            *slot = self.amps[idx];
        }
        let probability = residual.iter().map(|a| a.norm_sqr()).sum();
        Ok((residual, probability))
    }
}

/// Applies one gate to a state.
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

/// Post-selection on register values.
pub fn postselect(
    state: &StateVector,
    registers: &[(Register, usize)],
) -> Result<(Vec<Complex64>, f64)> {
    state.postselect(registers)
}

/// Dense matrix of a gate sequence, column `j` being the image of basis
/// state `j`. Returned row-major.
pub fn dense_unitary(n_qubits: usize, gates: &[Gate]) -> Result<Vec<Vec<Complex64>>> {
    let dim = 1usize << n_qubits;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        let mut s = StateVector::basis(n_qubits, col)?;
        s.apply_all(gates)?;
        for (m_row, a) in m.iter_mut().zip(s.amps) {
            m_row[col] = a;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::Hadamard(0)).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        }
    }

    #[test]
    fn ry_amplitudes() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::Ry(0, 1.2)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.6f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 0.6f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply(&Gate::PauliX(0)).unwrap();
        assert_eq!(s.amplitudes()[0b100], c(1.0));
    }

    #[test]
    fn negative_controls_mismatch_is_identity() {
        let mut s = StateVector::basis(2, 0b10).unwrap();
        let before = s.clone();
        s.apply(&Gate::Ry(1, 0.7).controlled(vec![(0, false)]))
            .unwrap();
        assert_eq!(s, before);
        s.apply(&Gate::Ry(1, 0.7).controlled(vec![(0, true)]))
            .unwrap();
        assert_ne!(s, before);
    }

    #[test]
    fn shift_moves_register_value() {
        let mut layout = QuantumRegisterLayout::new();
        let a = layout.add("a", 1).unwrap();
        let sys = layout.add("sys", 3).unwrap();
        let mut s = StateVector::basis(4, 0b1_110).unwrap();
        s.apply(&Gate::CyclicShift {
            register: sys,
            direction: ShiftDirection::Right,
            power: 3,
        })
        .unwrap();
        assert_eq!(s.amplitudes()[0b1_001], c(1.0));
        s.apply(
            &Gate::CyclicShift {
                register: sys,
                direction: ShiftDirection::Left,
                power: 2,
            }
            .controlled(vec![(a.start, true)]),
        )
        .unwrap();
        assert_eq!(s.amplitudes()[0b1_111], c(1.0));
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply(&Gate::Hadamard(2)).is_err());
        assert!(s
            .apply(&Gate::PauliX(0).controlled(vec![(0, true)]))
            .is_err());
        assert!(s
            .apply(&Gate::PauliX(0).controlled(vec![(1, true), (1, false)]))
            .is_err());
        let reg = Register { start: 0, len: 2 };
        assert!(s
            .apply(&Gate::Permutation {
                register: reg,
                map: vec![0, 0, 1, 2]
            })
            .is_err());
        assert!(s
            .apply(&Gate::Permutation {
                register: reg,
                map: vec![0, 1]
            })
            .is_err());
    }

    #[test]
    fn postselect_product_state() {
        let psi = [c(0.6), c(0.0), c(0.0), c(0.8)];
        let mut layout = QuantumRegisterLayout::new();
        let anc = layout.add("anc", 1).unwrap();
        let sys = layout.add("sys", 2).unwrap();
        let s = StateVector::with_register(3, sys, &psi).unwrap();
        let (res, p) = s.postselect(&[(anc, 0)]).unwrap();
        assert_eq!(res, psi);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        let (res1, p1) = s.postselect(&[(anc, 1)]).unwrap();
        assert_eq!(p1, 0.0);
        assert!(res1.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn postselect_uniform() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_all(&[Gate::Hadamard(0), Gate::Hadamard(1)])
            .unwrap();
        let (_, p) = s.postselect(&[(Register { start: 1, len: 1 }, 0)]).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn layout_cap_and_names() {
        let mut layout = QuantumRegisterLayout::new();
        layout.add("v", 1).unwrap();
        assert!(layout.add("v", 1).is_err());
        assert!(layout.add("big", MAX_QUBITS).is_err());
        assert_eq!(layout.get("v"), Some(Register { start: 0, len: 1 }));
        assert_eq!(layout.total_qubits(), 1);
    }

    #[test]
    fn from_amplitudes_requires_unit_norm() {
        assert!(StateVector::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0), c(0.0), c(0.0)]).is_err());
    }
}
