//! Seeded random inputs: Gaussian matrices, Haar unitaries and states, rotations.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{inner, ComplexMatrix, DensityMatrix, PureState};

/// Generator for a seed. Every call site owns its generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of sub-task `index` from a parent seed (splitmix64 finalizer).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian `(x + iy)` with `x, y ~ N(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, data).expect("shape is consistent")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Haar-distributed pure state.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        if let Ok(state) = PureState::normalized(random_vector(rng, dim)) {
            return state;
        }
    }
}

/// Full-rank mixed state `G G^dagger / tr(G G^dagger)` (Hilbert-Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = random_matrix(rng, dim, dim);
    DensityMatrix::from_unnormalized(&g * &g.adjoint()).expect("G G^dagger is a valid state")
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..m.cols()).map(|c| m.column(c)).collect();
    for k in 0..cols.len() {
        for _pass in 0..2 {
            for j in 0..k {
                let proj = inner(&cols[j], &cols[k]);
                let (done, rest) = cols.split_at_mut(k);
                for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= proj * y;
                }
            }
        }
        let norm = crate::linalg::vec_norm(&cols[k]);
        for x in &mut cols[k] {
            *x /= norm;
        }
    }
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            out[(r, c)] = z;
        }
    }
    out
}

/// Haar-random unitary.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    orthonormalize_columns(&random_matrix(rng, n, n))
}

/// Uniform unit 3-vector and an angle in `[0, 2 pi)`.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> ([f64; 3], f64) {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            return ([v[0] / n, v[1] / n, v[2] / n], angle);
        }
    }
}
