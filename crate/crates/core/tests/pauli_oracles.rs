mod common;

use carleman_adr::adr::{build_linear_matrix, AdrParams};
use carleman_adr::carleman::CarlemanOperator;
use carleman_adr::pauli::{decompose, pad_to_power_of_two, terms_for_epsilon, truncation_distance};
use carleman_adr::{Complex64, CsrMatrix};
use common::{all_labels, pauli_dense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sparse(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> CsrMatrix {
    let mut triplets = Vec::new();
    for r in 0..dim {
        for c in 0..dim {
            if rng.gen_bool(density) {
                triplets.push((r, c, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(dim, dim, triplets).unwrap()
}

fn adr_matrix(n: usize) -> CsrMatrix {
    build_linear_matrix(&AdrParams::lattice_units(n, 1.0, 1.0, 0.6, 0.01)).unwrap()
}

fn carleman_matrix(n: usize, order: usize) -> CsrMatrix {
    let p = AdrParams::lattice_units(n, 1.0, 1.0, 0.6, 0.01);
    CarlemanOperator::from_params(&p, order)
        .unwrap()
        .assemble()
        .unwrap()
}

fn trace_oracle(m: &CsrMatrix, q: usize) -> Vec<(String, Complex64)> {
    let dim = 1usize << q;
    let dense = m.to_dense();
    all_labels(q)
        .into_iter()
        .map(|label| {
            let p = pauli_dense(&label);
            let mut tr = Complex64::new(0.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    // Tr(P† M) = Σ conj(P[r][c]) M[r][c]
                    tr += p[r][c].conj() * dense[r][c];
                }
            }
            (label, tr / dim as f64)
        })
        .collect()
}

fn check_against_oracle(m: &CsrMatrix) {
    let (padded, q) = pad_to_power_of_two(m).unwrap();
    let exp = decompose(&padded).unwrap();
    let scale = padded.frobenius_norm().max(1.0);
    for (label, alpha) in trace_oracle(&padded, q) {
        let fast = exp
            .terms
            .iter()
            .find(|t| t.label() == label)
            .map(|t| t.coefficient)
            .unwrap_or_default();
        assert!(
            (fast - alpha).norm() <= 1e-12 * scale,
            "{label}: {fast} vs {alpha}"
        );
    }
}

#[test]
fn fast_decomposition_matches_trace_oracle() {
    check_against_oracle(&adr_matrix(4));
    check_against_oracle(&adr_matrix(3));
    check_against_oracle(&carleman_matrix(2, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in 1..=4 {
        for _ in 0..5 {
            check_against_oracle(&random_sparse(&mut rng, 1 << q, 0.4));
        }
    }
}

#[test]
fn padded_identity_expansion() {
    let (padded, q) = pad_to_power_of_two(&CsrMatrix::identity(3)).unwrap();
    assert_eq!(q, 2);
    let exp = decompose(&padded).unwrap();
    let find = |l: &str| {
        exp.terms
            .iter()
            .find(|t| t.label() == l)
            .unwrap()
            .coefficient
            .re
    };
    assert_eq!(exp.len(), 4);
    assert!((find("II") - 0.75).abs() < 1e-15);
    assert!((find("IZ") - 0.25).abs() < 1e-15);
    assert!((find("ZI") - 0.25).abs() < 1e-15);
    assert!((find("ZZ") + 0.25).abs() < 1e-15);
}

#[test]
fn parseval_and_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mats = vec![carleman_matrix(4, 3), adr_matrix(8), carleman_matrix(3, 3)];
    mats.push(random_sparse(&mut rng, 200, 0.02));
    for m in mats {
        let (padded, q) = pad_to_power_of_two(&m).unwrap();
        assert!(q <= 8);
        let exp = decompose(&padded).unwrap();
        let fro2 = padded.frobenius_norm().powi(2);
        assert!((exp.parseval_norm_sqr() - fro2).abs() <= 1e-10 * fro2);
        let recon = exp.reconstruct_dense(exp.len());
        let dense = padded.to_dense();
        let mut err = 0.0;
        for (rr, dr) in recon.iter().zip(&dense) {
            for (a, b) in rr.iter().zip(dr) {
                err += (a - b).norm_sqr();
            }
        }
        assert!(err.sqrt() <= 1e-12 * fro2.sqrt());
    }
}

#[test]
fn real_symmetric_input_gives_real_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let dim = 16;
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in r..dim {
                if rng.gen_bool(0.3) {
                    let v = rng.gen_range(-1.0..1.0);
                    triplets.push((r, c, v));
                    if r != c {
                        triplets.push((c, r, v));
                    }
                }
            }
        }
        let m = CsrMatrix::from_triplets(dim, dim, triplets).unwrap();
        let exp = decompose(&m).unwrap();
        assert!(exp.terms.iter().all(|t| t.coefficient.im.abs() < 1e-14));
    }
}

#[test]
fn distance_is_monotone_and_matches_explicit_residual() {
    let m = carleman_matrix(3, 2);
    let (padded, _) = pad_to_power_of_two(&m).unwrap();
    let exp = decompose(&padded).unwrap();
    let dense = padded.to_dense();
    let norm = padded.frobenius_norm();
    let mut prev = f64::INFINITY;
    for k in 0..=exp.len() {
        let d = truncation_distance(&exp, k).unwrap();
        assert!(d <= prev + 1e-15);
        prev = d;
        let recon = exp.reconstruct_dense(k);
        let mut r2 = 0.0;
        for (rr, dr) in recon.iter().zip(&dense) {
            for (a, b) in rr.iter().zip(dr) {
                r2 += (Complex64::new(*b, 0.0) - a).norm_sqr();
            }
        }
        assert!((d - r2.sqrt() / norm).abs() <= 1e-12);
    }
    assert_eq!(truncation_distance(&exp, 0).unwrap(), 1.0);
    assert!(truncation_distance(&exp, exp.len()).unwrap() <= 1e-13);
    assert!(truncation_distance(&exp, exp.len() + 1).is_err());
}

#[test]
fn terms_for_epsilon_is_minimal() {
    let exp = decompose(&pad_to_power_of_two(&carleman_matrix(4, 2)).unwrap().0).unwrap();
    for eps in [0.5, 0.1, 1e-2, 1e-3] {
        let m = terms_for_epsilon(&exp, eps).unwrap();
        assert!(exp.truncation_distance(m).unwrap() < eps);
        if m > 0 {
            assert!(exp.truncation_distance(m - 1).unwrap() >= eps);
        }
    }
    assert!(terms_for_epsilon(&exp, 1.0).is_err());
    assert!(terms_for_epsilon(&exp, 0.0).is_err());
}

#[test]
fn power_of_two_grid_converges_faster() {
    let frac = |n: usize| {
        let m = carleman_matrix(n, 3);
        let exp = decompose(&pad_to_power_of_two(&m).unwrap().0).unwrap();
        terms_for_epsilon(&exp, 0.1).unwrap() as f64 / m.nnz() as f64
    };
    let (four, five) = (frac(4), frac(5));
    assert!(four < five, "N=4: {four}, N=5: {five}");
}
