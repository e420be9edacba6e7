//! Truncated Carleman embedding of the lattice ADR equation.
//!
//! The state holds the tensor powers `u_k = φ^{⊗k}` for `k = 1..=K`, each
//! stored row-major with the first tensor index slowest. The operator
//!
//! ```text
//! block (k, k)   = Σ_i 1^{⊗i} ⊗ A ⊗ 1^{⊗(k−1−i)}
//! block (k, k+1) = Σ_i 1^{⊗i} ⊗ B ⊗ 1^{⊗(k−1−i)},   B_{ijk} = b δ_ij δ_jk
//! ```
//!
//! is applied leg by leg without materializing any `N^k × N^k` block.

mod study;

pub use study::{
    carleman_trajectory, convergence_study, relative_error_series, ConvergenceRow,
    ConvergenceTable, RelativeErrorSeries,
};

use rayon::prelude::*;

use crate::adr::{build_linear_matrix_profile, AdrParams, LatticeField};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

// Below this contiguous run length the leg kernels hand whole outer slabs to
// each task instead of single rows.
const MIN_PARALLEL_RUN: usize = 64;

/// Tensor-power blocks `u_1..u_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanState {
    n: usize,
    blocks: Vec<Vec<f64>>,
}

impl CarlemanState {
    pub fn zeros(n: usize, order: usize) -> Self {
        Self {
            n,
            blocks: (1..=order).map(|k| vec![0.0; n.pow(k as u32)]).collect(),
        }
    }

    /// Wraps explicit blocks; block `k` (1-based) must have length `n^k`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter(
                "Carleman order must be >= 1".into(),
            ));
        }
        for (idx, block) in blocks.iter().enumerate() {
            let expected = n.pow(idx as u32 + 1);
            if block.len() != expected {
                return Err(Error::ShapeMismatch {
                    expected,
                    found: block.len(),
                });
            }
        }
        Ok(Self { n, blocks })
    }

    /// Builds from a flat vector laid out block after block.
    pub fn from_flat(n: usize, order: usize, flat: &[f64]) -> Result<Self> {
        let total = carleman_dimension(n, order);
        if flat.len() != total {
            return Err(Error::ShapeMismatch {
                expected: total,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        let blocks = (1..=order)
            .map(|k| {
                let len = n.pow(k as u32);
                let block = flat[offset..offset + len].to_vec();
                offset += len;
                block
            })
            .collect();
        Ok(Self { n, blocks })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.blocks.len()
    }

    /// Block `u_k`, 1-based.
    pub fn block(&self, k: usize) -> &[f64] {
        &self.blocks[k - 1]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    /// The first-order block, i.e. the approximation of φ.
    pub fn first(&self) -> &[f64] {
        &self.blocks[0]
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().flatten().all(|v| v.is_finite())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &CarlemanState) {
        for (dst, src) in self.blocks.iter_mut().zip(&other.blocks) {
            dst.par_iter_mut()
                .zip(src.par_iter())
                .for_each(|(d, s)| *d += alpha * s);
        }
    }
}

/// Total number of unknowns `Σ_{k=1..K} N^k`.
pub fn carleman_dimension(n: usize, order: usize) -> usize {
    (1..=order).map(|k| n.pow(k as u32)).sum()
}

/// `u_k = φ^{⊗k}` for `k = 1..=order`.
pub fn initial_carleman_state(phi: &LatticeField, order: usize) -> Result<CarlemanState> {
    if order == 0 {
        return Err(Error::InvalidParameter(
            "Carleman order must be >= 1".into(),
        ));
    }
    let phi = phi.values();
    let mut blocks = Vec::with_capacity(order);
    blocks.push(phi.to_vec());
    for _ in 1..order {
        let prev = blocks.last().expect("non-empty");
        let next: Vec<f64> = prev
            .iter()
            .flat_map(|&p| phi.iter().map(move |&q| p * q))
            .collect();
        blocks.push(next);
    }
    Ok(CarlemanState {
        n: phi.len(),
        blocks,
    })
}

/// Truncated Carleman operator defined by the linear matrix `A` and the
/// scalar `b` of the 1-sparse quadratic term.
#[derive(Debug, Clone)]
pub struct CarlemanOperator {
    linear: CsrMatrix,
    quadratic_rate: f64,
    order: usize,
}

impl CarlemanOperator {
    pub fn new(linear: CsrMatrix, quadratic_rate: f64, order: usize) -> Result<Self> {
        if linear.nrows() != linear.ncols() {
            return Err(Error::ShapeMismatch {
                expected: linear.nrows(),
                found: linear.ncols(),
            });
        }
        if order == 0 {
            return Err(Error::InvalidParameter(
                "Carleman order must be >= 1".into(),
            ));
        }
        Ok(Self {
            linear,
            quadratic_rate,
            order,
        })
    }

    /// Operator for the lattice equation described by `params` (either
    /// velocity case).
    pub fn from_params(params: &AdrParams, order: usize) -> Result<Self> {
        Self::new(
            build_linear_matrix_profile(params)?,
            params.quadratic_rate,
            order,
        )
    }

    pub fn sites(&self) -> usize {
        self.linear.nrows()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn linear(&self) -> &CsrMatrix {
        &self.linear
    }

    pub fn quadratic_rate(&self) -> f64 {
        self.quadratic_rate
    }

    pub fn dimension(&self) -> usize {
        carleman_dimension(self.sites(), self.order)
    }

    fn check(&self, u: &CarlemanState) -> Result<()> {
        if u.sites() != self.sites() {
            return Err(Error::ShapeMismatch {
                expected: self.sites(),
                found: u.sites(),
            });
        }
        if u.order() != self.order {
            return Err(Error::ShapeMismatch {
                expected: self.order,
                found: u.order(),
            });
        }
        Ok(())
    }

    /// `C·u`, matrix-free.
    pub fn apply(&self, u: &CarlemanState) -> Result<CarlemanState> {
        self.check(u)?;
        let n = self.sites();
        let mut out = CarlemanState::zeros(n, self.order);
        for k in 1..=self.order {
            let dst = &mut out.blocks[k - 1];
            add_linear_legs(&self.linear, n, k, &u.blocks[k - 1], dst);
            if k < self.order && self.quadratic_rate != 0.0 {
                add_quadratic_legs(self.quadratic_rate, n, k, &u.blocks[k], dst);
            }
        }
        Ok(out)
    }

    /// `u + dt·C·u`.
    pub fn euler_step(&self, u: &CarlemanState, dt: f64) -> Result<CarlemanState> {
        let mut next = self.apply(u)?;
        for (dst, src) in next.blocks.iter_mut().zip(&u.blocks) {
            dst.par_iter_mut()
                .zip(src.par_iter())
                .for_each(|(d, s)| *d = s + dt * *d);
        }
        Ok(next)
    }

    /// Explicit sparse assembly of `C` over the flat block layout.
    pub fn assemble(&self) -> Result<CsrMatrix> {
        let n = self.sites();
        let dim = self.dimension();
        let mut offsets = Vec::with_capacity(self.order + 1);
        let mut acc = 0;
        for k in 1..=self.order {
            offsets.push(acc);
            acc += n.pow(k as u32);
        }
        offsets.push(acc);

        let mut triplets = Vec::new();
        for k in 1..=self.order {
            let len = n.pow(k as u32);
            for leg in 0..k {
                let inner = n.pow((k - 1 - leg) as u32);
                for row in 0..len {
                    let s = row % inner;
                    let j = (row / inner) % n;
                    let o = row / (inner * n);
                    let (cols, vals) = self.linear.row(j);
                    for (&l, &v) in cols.iter().zip(vals) {
                        let col = (o * n + l) * inner + s;
                        triplets.push((offsets[k - 1] + row, offsets[k - 1] + col, v));
                    }
                    if k < self.order && self.quadratic_rate != 0.0 {
                        let col = (o * n * n + j * (n + 1)) * inner + s;
                        triplets.push((
                            offsets[k - 1] + row,
                            offsets[k] + col,
                            self.quadratic_rate,
                        ));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(dim, dim, triplets)
    }
}

/// `out += Σ_legs (1 ⊗ … ⊗ A ⊗ … ⊗ 1) input` for a block of order `k`.
fn add_linear_legs(a: &CsrMatrix, n: usize, k: usize, input: &[f64], out: &mut [f64]) {
    for leg in 0..k {
        let inner = n.pow((k - 1 - leg) as u32);
        if inner >= MIN_PARALLEL_RUN {
            out.par_chunks_mut(inner).enumerate().for_each(|(c, dst)| {
                let (o, j) = (c / n, c % n);
                let base = o * n * inner;
                let (cols, vals) = a.row(j);
                for (&l, &v) in cols.iter().zip(vals) {
                    let src = &input[base + l * inner..base + (l + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += v * s;
                    }
                }
            });
        } else {
            let slab = n * inner;
            out.par_chunks_mut(slab)
                .zip(input.par_chunks(slab))
                .for_each(|(dst, src)| {
                    for j in 0..n {
                        let (cols, vals) = a.row(j);
                        let d = &mut dst[j * inner..(j + 1) * inner];
                        for (&l, &v) in cols.iter().zip(vals) {
                            let s = &src[l * inner..(l + 1) * inner];
                            for (dd, ss) in d.iter_mut().zip(s) {
                                *dd += v * ss;
                            }
                        }
                    }
                });
        }
    }
}

/// `out += b Σ_legs (1 ⊗ … ⊗ B ⊗ … ⊗ 1) input`, where `input` is the block
/// of order `k + 1`. Leg `i` of the output reads the doubled index `(j, j)`
/// at legs `i, i+1` of the input.
fn add_quadratic_legs(b: f64, n: usize, k: usize, input: &[f64], out: &mut [f64]) {
    for leg in 0..k {
        let inner = n.pow((k - 1 - leg) as u32);
        if inner >= MIN_PARALLEL_RUN {
            out.par_chunks_mut(inner).enumerate().for_each(|(c, dst)| {
                let (o, j) = (c / n, c % n);
                let base = (o * n * n + j * (n + 1)) * inner;
                for (d, s) in dst.iter_mut().zip(&input[base..base + inner]) {
                    *d += b * s;
                }
            });
        } else {
            let slab = n * inner;
            out.par_chunks_mut(slab)
                .zip(input.par_chunks(slab * n))
                .for_each(|(dst, src)| {
                    for j in 0..n {
                        let base = j * (n + 1) * inner;
                        for (d, s) in dst[j * inner..(j + 1) * inner]
                            .iter_mut()
                            .zip(&src[base..base + inner])
                        {
                            *d += b * s;
                        }
                    }
                });
        }
    }
}

/// Matrix-free `C·u`.
pub fn apply_carleman(op: &CarlemanOperator, u: &CarlemanState) -> Result<CarlemanState> {
    op.apply(u)
}

/// One forward-Euler step of the linearized system, `u + dt·C·u`.
pub fn euler_step_carleman(
    u: &CarlemanState,
    op: &CarlemanOperator,
    dt: f64,
) -> Result<CarlemanState> {
    op.euler_step(u, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn field(v: &[f64]) -> LatticeField {
        LatticeField::new(v.to_vec()).unwrap()
    }

    #[test]
    fn one_hot_powers_stay_one_hot() {
        let u = initial_carleman_state(&field(&[1.0, 0.0, 0.0]), 3).unwrap();
        for k in 1..=3 {
            let block = u.block(k);
            assert_eq!(block.len(), 3usize.pow(k as u32));
            assert_eq!(block[0], 1.0);
            assert_eq!(block.iter().filter(|&&v| v != 0.0).count(), 1);
        }
    }

    #[test]
    fn second_power_is_row_major() {
        let u = initial_carleman_state(&field(&[2.0, 3.0]), 2).unwrap();
        assert_eq!(u.block(2), &[4.0, 6.0, 6.0, 9.0]);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(initial_carleman_state(&field(&[1.0]), 0).is_err());
        assert!(CarlemanOperator::new(CsrMatrix::identity(2), 1.0, 0).is_err());
    }

    #[test]
    fn first_order_is_linear_matvec() {
        let a =
            CsrMatrix::from_triplets(3, 3, [(0, 0, -1.0), (0, 2, 0.5), (1, 1, 2.0), (2, 0, 3.0)])
                .unwrap();
        let op = CarlemanOperator::new(a.clone(), 0.7, 1).unwrap();
        let u = initial_carleman_state(&field(&[1.0, -2.0, 0.5]), 1).unwrap();
        assert_eq!(
            op.apply(&u).unwrap().first(),
            a.matvec(u.first()).unwrap().as_slice()
        );
    }

    #[test]
    fn zero_b_decouples_blocks() {
        let a =
            CsrMatrix::from_triplets(2, 2, [(0, 0, -1.0), (0, 1, 0.3), (1, 0, 0.2), (1, 1, -0.5)])
                .unwrap();
        let op = CarlemanOperator::new(a, 0.0, 3).unwrap();
        let mut u = initial_carleman_state(&field(&[0.4, 0.9]), 3).unwrap();
        let before = op.apply(&u).unwrap();
        u.blocks[2].iter_mut().for_each(|v| *v += 10.0);
        let after = op.apply(&u).unwrap();
        assert_eq!(before.block(1), after.block(1));
        assert_eq!(before.block(2), after.block(2));
    }

    #[test]
    fn dt_zero_is_identity() {
        let p = AdrParams::lattice_units(4, 1.0, 1.0, 0.6, 0.01);
        let op = CarlemanOperator::from_params(&p, 3).unwrap();
        let u = initial_carleman_state(&field(&[0.1, 0.5, -0.2, 1.0]), 3).unwrap();
        assert_eq!(op.euler_step(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = AdrParams::lattice_units(4, 1.0, 1.0, 0.6, 0.01);
        let op = CarlemanOperator::from_params(&p, 3).unwrap();
        let u = initial_carleman_state(&field(&[0.1, 0.5, -0.2, 1.0]), 2).unwrap();
        assert!(op.apply(&u).is_err());
        let v = initial_carleman_state(&field(&[0.1, 0.5, -0.2]), 3).unwrap();
        assert!(op.apply(&v).is_err());
    }

    #[test]
    fn assembled_dimension() {
        let p = AdrParams::lattice_units(4, 1.0, 1.0, 0.6, 0.01);
        let c = CarlemanOperator::from_params(&p, 3)
            .unwrap()
            .assemble()
            .unwrap();
        assert_eq!(c.nrows(), 84);
        assert_eq!(c.ncols(), 84);
    }

    #[test]
    fn flat_round_trip() {
        let u = initial_carleman_state(&field(&[0.3, -0.7, 0.1]), 3).unwrap();
        let back = CarlemanState::from_flat(3, 3, &u.to_flat()).unwrap();
        assert_eq!(back, u);
        assert_abs_diff_eq!(back.norm(), u.norm());
    }
}
