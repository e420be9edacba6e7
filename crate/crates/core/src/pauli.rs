//! Expansion of padded sparse matrices in the tensor Pauli basis.
//!
//! A Pauli string on `q` qubits is addressed by two bit masks: `x` marks the
//! positions carrying X or Y, `z` the positions carrying Z or Y. Its matrix
//! has a single nonzero per column, `P[c ⊕ x, c] = i^{|x∧z|} (−1)^{|z∧c|}`,
//! so the coefficient `Tr(P† M) / 2^q` only sees the entries of `M` with
//! `row ⊕ col = x`. Grouping entries by that mask and running a Walsh–Hadamard
//! transform over `z` yields every coefficient sharing the mask at once.
//!
//! Qubit 0 is the most significant bit of a row/column index and is printed
//! first in labels.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest qubit count accepted by [`decompose`].
pub const MAX_DECOMPOSITION_QUBITS: usize = 10;

/// Relative magnitude below which coefficients are treated as roundoff.
pub const COEFFICIENT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLabel::I,
            (true, false) => PauliLabel::X,
            (true, true) => PauliLabel::Y,
            (false, true) => PauliLabel::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }
}

/// One weighted Pauli string `α · σ_1 ⊗ … ⊗ σ_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub labels: Vec<PauliLabel>,
    pub coefficient: Complex64,
}

impl PauliString {
    fn from_masks(q: usize, x: usize, z: usize, coefficient: Complex64) -> Self {
        let labels = (0..q)
            .map(|p| {
                let bit = q - 1 - p;
                PauliLabel::from_bits(x >> bit & 1 == 1, z >> bit & 1 == 1)
            })
            .collect();
        Self {
            labels,
            coefficient,
        }
    }

    pub fn qubits(&self) -> usize {
        self.labels.len()
    }

    /// `(x, z)` masks, qubit 0 in the most significant bit.
    pub fn masks(&self) -> (usize, usize) {
        let q = self.labels.len();
        let mut x = 0;
        let mut z = 0;
        for (p, label) in self.labels.iter().enumerate() {
            let bit = 1 << (q - 1 - p);
            match label {
                PauliLabel::I => {}
                PauliLabel::X => x |= bit,
                PauliLabel::Y => {
                    x |= bit;
                    z |= bit;
                }
                PauliLabel::Z => z |= bit,
            }
        }
        (x, z)
    }

    /// Entry `(row, col)` of the bare Pauli matrix (coefficient excluded).
    pub fn matrix_entry(&self, row: usize, col: usize) -> Complex64 {
        let (x, z) = self.masks();
        if row != col ^ x {
            return Complex64::new(0.0, 0.0);
        }
        let phase = Complex64::i().powu((x & z).count_ones());
        let sign = if (z & col).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        phase * sign
    }

    pub fn label(&self) -> String {
        self.labels.iter().map(|l| l.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.coefficient, self.label())
    }
}

/// Pauli terms of a `2^q × 2^q` matrix, largest `|α|` first.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpansion {
    pub qubits: usize,
    pub terms: Vec<PauliString>,
    /// Frobenius norm of the decomposed matrix.
    pub source_norm: f64,
    // tail[m] = Σ_{i ≥ m} |α_i|²
    tail: Vec<f64>,
}

impl PauliExpansion {
    fn new(qubits: usize, mut terms: Vec<PauliString>, source_norm: f64) -> Self {
        terms.sort_by(|a, b| {
            b.coefficient
                .norm()
                .total_cmp(&a.coefficient.norm())
                .then_with(|| a.labels.cmp(&b.labels))
        });
        let mut tail = vec![0.0; terms.len() + 1];
        for i in (0..terms.len()).rev() {
            tail[i] = tail[i + 1] + terms[i].coefficient.norm_sqr();
        }
        Self {
            qubits,
            terms,
            source_norm,
            tail,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |α_i|² · 2^q`, equal to the squared Frobenius norm of the source.
    pub fn parseval_norm_sqr(&self) -> f64 {
        self.tail[0] * (1u64 << self.qubits) as f64
    }

    /// Normalized Frobenius distance between the source matrix and its first
    /// `m` terms, from the squared magnitudes of the dropped coefficients.
    pub fn truncation_distance(&self, m: usize) -> Result<f64> {
        if m > self.terms.len() {
            return Err(Error::OutOfRange {
                index: m,
                limit: self.terms.len(),
            });
        }
        if self.source_norm == 0.0 {
            return Ok(0.0);
        }
        Ok((self.tail[m] * (1u64 << self.qubits) as f64).sqrt() / self.source_norm)
    }

    /// Smallest `m` with `d(m) < epsilon`.
    pub fn terms_for_epsilon(&self, epsilon: f64) -> usize {
        let dist = |m: usize| self.truncation_distance(m).expect("m in range");
        let (mut lo, mut hi) = (0, self.terms.len());
        if dist(lo) < epsilon {
            return 0;
        }
        // invariant: d(lo) >= eps, d(hi) < eps (d(len) = 0)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if dist(mid) < epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Dense sum of the first `m` terms. Intended for verification at small
    /// qubit counts.
    pub fn reconstruct_dense(&self, m: usize) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.qubits;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for term in self.terms.iter().take(m) {
            let (x, _) = term.masks();
            for (row, out_row) in out.iter_mut().enumerate() {
                let col = row ^ x;
                out_row[col] += term.coefficient * term.matrix_entry(row, col);
            }
        }
        out
    }
}

/// Number of qubits `⌈log₂ n⌉` (at least one) needed for an `n × n` matrix.
pub fn qubits_for(n: usize) -> usize {
    let mut q = 1;
    while (1usize << q) < n {
        q += 1;
    }
    q
}

/// Embeds a square matrix into the top-left corner of a `2^q × 2^q` zero
/// matrix, `q = ⌈log₂ n⌉`.
pub fn pad_to_power_of_two(m: &CsrMatrix) -> Result<(CsrMatrix, usize)> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let q = qubits_for(m.nrows());
    Ok((m.embed(1 << q)?, q))
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(values: &mut [f64]) {
    let n = values.len();
    let mut h = 1;
    while h < n {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Pauli coefficients `α_s = Tr(Σ_s† M) / 2^q` of a power-of-two sized
/// matrix. Terms with `|α| ≤ 1e-14 ‖M‖_F` are dropped.
pub fn decompose(m: &CsrMatrix) -> Result<PauliExpansion> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: dim,
            found: m.ncols(),
        });
    }
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let q = dim.trailing_zeros() as usize;
    if q > MAX_DECOMPOSITION_QUBITS {
        return Err(Error::CapExceeded {
            what: "qubits",
            value: q,
            cap: MAX_DECOMPOSITION_QUBITS,
        });
    }

    let mut by_mask: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (r, c, v) in m.iter() {
        by_mask.entry(r ^ c).or_insert_with(|| vec![0.0; dim])[c] += v;
    }

    let norm = m.frobenius_norm();
    let cutoff = COEFFICIENT_CUTOFF * norm;
    let scale = 1.0 / dim as f64;
    let terms: Vec<PauliString> = by_mask
        .into_par_iter()
        .flat_map_iter(|(x, mut column)| {
            walsh_hadamard(&mut column);
            column.into_iter().enumerate().filter_map(move |(z, f)| {
                // conj(i^k) = (-i)^k
                let alpha = (-Complex64::i()).powu((x & z).count_ones()) * (f * scale);
                (alpha.norm() > cutoff).then(|| PauliString::from_masks(q, x, z, alpha))
            })
        })
        .collect();
    Ok(PauliExpansion::new(q, terms, norm))
}

/// `d(m)` for the given expansion.
pub fn truncation_distance(expansion: &PauliExpansion, m: usize) -> Result<f64> {
    expansion.truncation_distance(m)
}

/// Smallest term count with `d(m) < epsilon`; `epsilon` must lie in `(0, 1)`.
pub fn terms_for_epsilon(expansion: &PauliExpansion, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(expansion.terms_for_epsilon(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn raising_operator() {
        let m = CsrMatrix::from_triplets(2, 2, [(0, 1, 1.0)]).unwrap();
        let e = decompose(&m).unwrap();
        assert_eq!(e.len(), 2);
        let find = |l: &str| e.terms.iter().find(|t| t.label() == l).unwrap().coefficient;
        assert_abs_diff_eq!(find("X").re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(find("X").im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(find("Y").re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(find("Y").im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn identity_is_single_term() {
        let e = decompose(&CsrMatrix::identity(8)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.terms[0].label(), "III");
        assert_abs_diff_eq!(e.terms[0].coefficient.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn padded_three_identity() {
        let (p, q) = pad_to_power_of_two(&CsrMatrix::identity(3)).unwrap();
        assert_eq!((p.nrows(), q), (4, 2));
        let e = decompose(&p).unwrap();
        // diag(1,1,1,0) = (3 II + IZ + ZI − ZZ) / 4
        let expect = [("II", 0.75), ("IZ", 0.25), ("ZI", 0.25), ("ZZ", -0.25)];
        assert_eq!(e.len(), 4);
        for (label, value) in expect {
            let t = e.terms.iter().find(|t| t.label() == label).unwrap();
            assert_abs_diff_eq!(t.coefficient.re, value, epsilon = 1e-15);
        }
        assert_eq!(e.terms[0].label(), "II");
        // ties broken lexicographically
        let order: Vec<String> = e.terms[1..].iter().map(|t| t.label()).collect();
        assert_eq!(order, ["IZ", "ZI", "ZZ"]);
    }

    #[test]
    fn padding_sizes() {
        assert_eq!(qubits_for(84), 7);
        assert_eq!(qubits_for(4), 2);
        assert_eq!(qubits_for(1), 1);
        let (p, q) = pad_to_power_of_two(&CsrMatrix::identity(4)).unwrap();
        assert_eq!((p.nrows(), q), (4, 2));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(
            decompose(&CsrMatrix::identity(3)),
            Err(Error::NotPowerOfTwo(3))
        );
        assert!(matches!(
            decompose(&CsrMatrix::identity(1 << 11)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn distance_endpoints() {
        let m = CsrMatrix::from_triplets(4, 4, [(0, 1, 1.0), (2, 3, -2.0), (1, 1, 0.5)]).unwrap();
        let e = decompose(&m).unwrap();
        assert_abs_diff_eq!(e.truncation_distance(0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(e.truncation_distance(e.len()).unwrap() <= 1e-13);
        assert!(e.truncation_distance(e.len() + 1).is_err());
        assert!(terms_for_epsilon(&e, 1.0).is_err());
        let m_small = terms_for_epsilon(&e, 0.999).unwrap();
        assert!((1..=2).contains(&m_small));
    }

    #[test]
    fn wht_matches_definition() {
        let mut v = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0, 2.0];
        let orig = v.clone();
        walsh_hadamard(&mut v);
        for (z, &got) in v.iter().enumerate() {
            let expect: f64 = orig
                .iter()
                .enumerate()
                .map(|(c, &f)| if (z & c).count_ones() % 2 == 0 { f } else { -f })
                .sum();
            assert_abs_diff_eq!(got, expect, epsilon = 1e-13);
        }
    }
}
