#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use streampca::linalg::{jacobi_eigen, EigenBasis, Matrix, SymMatrix};
use streampca::synth::{covariance_from, random_orthogonal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix with eigenvalues `k + 1 + U(-0.25, 0.25)` in a
/// random orthonormal frame, plus its Jacobi decomposition.
pub fn well_separated(n: usize, rng: &mut ChaCha8Rng) -> (SymMatrix, EigenBasis) {
    let q = random_orthogonal(n, rng);
    let values: Vec<f64> = (0..n)
        .map(|k| (k + 1) as f64 + rng.random_range(-0.25..0.25))
        .collect();
    let a = covariance_from(&q, &values);
    let basis = jacobi_eigen(&a).expect("oracle");
    (a, basis)
}

/// Gaussian perturbation rescaled to Frobenius norm `size`.
pub fn perturbation(rows: usize, cols: usize, size: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let p = Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    let norm = p.frobenius_norm();
    p.scale(size / norm)
}

/// Largest column-wise error `min(‖v − u‖, ‖v + u‖)` between two bases.
pub fn column_error(v: &Matrix, u: &Matrix) -> f64 {
    (0..v.cols())
        .map(|j| {
            let (mut plus, mut minus) = (0.0, 0.0);
            for i in 0..v.rows() {
                plus += (v[(i, j)] - u[(i, j)]).powi(2);
                minus += (v[(i, j)] + u[(i, j)]).powi(2);
            }
            plus.min(minus).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Pearson correlation of two equal-length series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
