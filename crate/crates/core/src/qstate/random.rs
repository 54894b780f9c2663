//! Seeded random states for sampling and tests.

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::density::{DensityMatrix, DEFAULT_TOLERANCE};
use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    C64::new(a, b)
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(layout: &RegisterLayout, rng: &mut R) -> DensityMatrix {
    let v: Vec<C64> = (0..layout.dim()).map(|_| gaussian(rng)).collect();
    DensityMatrix::pure(layout.clone(), &v).expect("gaussian vector is nonzero")
}

/// Ginibre ensemble state of the given rank.
pub fn random_state<R: Rng + ?Sized>(layout: &RegisterLayout, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = layout.dim();
    if rank == 0 || rank > d {
        return Err(Error::domain(format!("rank {rank} out of range for dimension {d}")));
    }
    let g = Mat::from_fn(d, rank, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    let m = linalg::hermitian_part(&linalg::scale(&m, 1.0 / tr));
    Ok(DensityMatrix::from_parts(layout.clone(), m, DEFAULT_TOLERANCE))
}

pub fn random_full_rank<R: Rng + ?Sized>(layout: &RegisterLayout, rng: &mut R) -> DensityMatrix {
    random_state(layout, layout.dim(), rng).expect("full rank is in range")
}

/// Uniform (flat Dirichlet) probability vector.
pub fn random_probs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

pub fn random_diagonal<R: Rng + ?Sized>(layout: &RegisterLayout, rng: &mut R) -> DensityMatrix {
    let p = random_probs(layout.dim(), rng);
    DensityMatrix::from_parts(layout.clone(), linalg::diag_real(&p), DEFAULT_TOLERANCE)
}

/// Haar-random unitary matrix via QR of a Ginibre matrix.
pub fn random_unitary_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> linalg::CMat {
    let g = Mat::from_fn(d, d, |_, _| gaussian(rng));
    // Gram-Schmidt keeps this dependency-free and exact enough for sampling
    let mut q = linalg::zeros(d, d);
    for j in 0..d {
        let mut v: Vec<C64> = (0..d).map(|i| g[(i, j)]).collect();
        for k in 0..j {
            let dot: C64 = (0..d).map(|i| q[(i, k)].conj() * v[i]).sum();
            for i in 0..d {
                v[i] -= q[(i, k)] * dot;
            }
        }
        let n = linalg::norm_sqr(&v).sqrt();
        for i in 0..d {
            q[(i, j)] = v[i] / n;
        }
    }
    q
}
