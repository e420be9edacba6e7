#![allow(dead_code)]

use carleman_adr::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_unit_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn dense_matvec(m: &[Vec<f64>], psi: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| b * *a).sum())
        .collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense Pauli matrix for a label string such as "XZI", built by explicit
/// Kronecker products of the 2×2 matrices.
pub fn pauli_dense(labels: &str) -> Vec<Vec<Complex64>> {
    let one = c(1.0);
    let zero = c(0.0);
    let i = Complex64::new(0.0, 1.0);
    let single = |ch: char| -> [[Complex64; 2]; 2] {
        match ch {
            'I' => [[one, zero], [zero, one]],
            'X' => [[zero, one], [one, zero]],
            'Y' => [[zero, -i], [i, zero]],
            'Z' => [[one, zero], [zero, -one]],
            _ => panic!("bad label {ch}"),
        }
    };
    let mut out = vec![vec![one]];
    for ch in labels.chars() {
        let s = single(ch);
        let d = out.len();
        let mut next = vec![vec![zero; 2 * d]; 2 * d];
        for r in 0..d {
            for cc in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        next[r * 2 + a][cc * 2 + b] = out[r][cc] * s[a][b];
                    }
                }
            }
        }
        out = next;
    }
    out
}

pub fn all_labels(q: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..q {
        out = out
            .into_iter()
            .flat_map(|p| "IXYZ".chars().map(move |ch| format!("{p}{ch}")))
            .collect();
    }
    out
}
