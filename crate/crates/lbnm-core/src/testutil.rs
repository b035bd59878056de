//! Shared helpers for unit tests.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm, ComplexMatrix};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, m, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn diff(a: &[C64], b: &[C64]) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d)
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &ComplexMatrix, b: &[C64]) -> Vec<C64> {
    let n = a.rows();
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| m[x][k].norm().partial_cmp(&m[y][k].norm()).unwrap())
            .unwrap();
        m.swap(k, p);
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in (i + 1)..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}
