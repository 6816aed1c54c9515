//! Seeded synthetic return series.
//!
//! Three families: stationary Gaussian, piecewise-stationary (regime
//! switching) Gaussian, and Gaussian with GARCH(1,1)-style volatility
//! clustering. All use ChaCha8 so the same seed yields the same data on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

/// Eigenvalues `scale · ratio^k`, `k = 0..p`.
pub fn geometric_spectrum(p: usize, scale: f64, ratio: f64) -> Vec<f64> {
    (0..p).map(|k| scale * ratio.powi(k as i32)).collect()
}

/// Haar-ish random orthogonal matrix: Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(p: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..p).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..p {
            for k in 0..j {
                let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                let (head, tail) = cols.split_at_mut(j);
                for (v, u) in tail[0].iter_mut().zip(&head[k]) {
                    *v -= dot * u;
                }
            }
            let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            return Matrix::from_fn(p, p, |i, j| cols[j][i]);
        }
    }
}

/// Covariance `Q diag(λ) Qᵀ`.
pub fn covariance_from(rotation: &Matrix, eigenvalues: &[f64]) -> SymMatrix {
    let scaled = Matrix::from_fn(rotation.rows(), rotation.cols(), |i, j| {
        rotation[(i, j)] * eigenvalues[j]
    });
    SymMatrix::from_matrix(scaled.matmul(&rotation.transpose())).expect("square")
}

/// Samples rows `x = Q diag(√λ) g` with `g` standard normal, scaled per row.
struct Factor {
    loading: Matrix,
}

impl Factor {
    fn new(rotation: &Matrix, eigenvalues: &[f64]) -> Self {
        let loading = Matrix::from_fn(rotation.rows(), rotation.cols(), |i, j| {
            rotation[(i, j)] * eigenvalues[j].sqrt()
        });
        Self { loading }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, scale: f64, out: &mut [f64]) {
        let p = out.len();
        let g: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.loading.row(i);
            *o = scale * row.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// i.i.d. Gaussian rows with covariance `Q diag(eigenvalues) Qᵀ`; `Q` is
    /// random unless `axis_aligned`.
    StationaryGaussian {
        n: usize,
        p: usize,
        seed: u64,
        eigenvalues: Vec<f64>,
        axis_aligned: bool,
    },
    /// Independent covariance per regime; regimes start at `switch_points`.
    /// Each regime gets its own rotation and a volatility level drawn
    /// log-uniformly from [1/4, 4].
    RegimeSwitch {
        n: usize,
        p: usize,
        seed: u64,
        switch_points: Vec<usize>,
        eigenvalues: Vec<f64>,
    },
    /// Fixed correlation structure scaled by a GARCH(1,1) variance driven by
    /// the first feature's shocks. `persistence` is `a + b`.
    VolatilityCluster {
        n: usize,
        p: usize,
        seed: u64,
        persistence: f64,
        eigenvalues: Vec<f64>,
    },
}

impl Generator {
    pub fn stationary(n: usize, p: usize, seed: u64) -> Self {
        Generator::StationaryGaussian {
            n,
            p,
            seed,
            eigenvalues: geometric_spectrum(p, 1.0, 0.5),
            axis_aligned: false,
        }
    }

    pub fn regime_switch(n: usize, p: usize, seed: u64, switch_points: Vec<usize>) -> Self {
        Generator::RegimeSwitch {
            n,
            p,
            seed,
            switch_points,
            eigenvalues: geometric_spectrum(p, 1.0, 0.5),
        }
    }

    pub fn volatility_cluster(n: usize, p: usize, seed: u64, persistence: f64) -> Self {
        Generator::VolatilityCluster {
            n,
            p,
            seed,
            persistence,
            eigenvalues: geometric_spectrum(p, 1.0, 0.5),
        }
    }

    pub fn generate(&self) -> Result<Matrix> {
        match self {
            Generator::StationaryGaussian {
                n,
                p,
                seed,
                eigenvalues,
                axis_aligned,
            } => {
                check_spectrum(*p, eigenvalues)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let rotation = if *axis_aligned {
                    Matrix::identity(*p)
                } else {
                    random_orthogonal(*p, &mut rng)
                };
                let factor = Factor::new(&rotation, eigenvalues);
                let mut x = Matrix::zeros(*n, *p);
                for i in 0..*n {
                    factor.draw(&mut rng, 1.0, x.row_mut(i));
                }
                Ok(x)
            }
            Generator::RegimeSwitch {
                n,
                p,
                seed,
                switch_points,
                eigenvalues,
            } => {
                check_spectrum(*p, eigenvalues)?;
                if switch_points.windows(2).any(|w| w[0] >= w[1])
                    || switch_points.iter().any(|&s| s == 0 || s >= *n)
                {
                    return Err(Error::InvalidParameter(
                        "switch points must be strictly increasing and inside (0, n)".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let regimes = switch_points.len() + 1;
                let factors: Vec<(Factor, f64)> = (0..regimes)
                    .map(|_| {
                        let rotation = random_orthogonal(*p, &mut rng);
                        let u: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
                        (Factor::new(&rotation, eigenvalues), 4f64.powf(u))
                    })
                    .collect();
                let mut x = Matrix::zeros(*n, *p);
                let mut regime = 0;
                for i in 0..*n {
                    if regime < switch_points.len() && i == switch_points[regime] {
                        regime += 1;
                    }
                    let (factor, vol) = &factors[regime];
                    factor.draw(&mut rng, vol.sqrt(), x.row_mut(i));
                }
                Ok(x)
            }
            Generator::VolatilityCluster {
                n,
                p,
                seed,
                persistence,
                eigenvalues,
            } => {
                check_spectrum(*p, eigenvalues)?;
                if !(*persistence >= 0.0 && *persistence < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "persistence must lie in [0, 1), got {persistence}"
                    )));
                }
                let arch = (0.5 * persistence).min(0.1);
                let garch = persistence - arch;
                let omega = 1.0 - persistence;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let rotation = random_orthogonal(*p, &mut rng);
                let factor = Factor::new(&rotation, eigenvalues);
                let first_sd = eigenvalues
                    .iter()
                    .zip(rotation.row(0))
                    .map(|(l, q)| l * q * q)
                    .sum::<f64>()
                    .sqrt();
                let mut variance = 1.0;
                let mut shock = 0.0;
                let mut x = Matrix::zeros(*n, *p);
                for i in 0..*n {
                    variance = omega + arch * shock * shock + garch * variance;
                    factor.draw(&mut rng, variance.sqrt(), x.row_mut(i));
                    shock = x[(i, 0)] / first_sd;
                }
                Ok(x)
            }
        }
    }
}

fn check_spectrum(p: usize, eigenvalues: &[f64]) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if eigenvalues.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: eigenvalues.len(),
        });
    }
    if eigenvalues.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(
            "eigenvalues must be finite and non-negative".into(),
        ));
    }
    Ok(())
}
