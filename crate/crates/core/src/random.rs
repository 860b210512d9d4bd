//! Seeded random Hermitian matrices, involutions, states and setups.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::construct::{check_quantum_n, MeasurementSetup, Observable, PureState};
use crate::error::Result;
use crate::numerics::{matrix_sign, ComplexMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Hermitian matrix with independent Gaussian entries (a GUE sample up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(gaussian(rng), 0.0);
        for j in i + 1..dim {
            let z = C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `sign(H)` of a random Hermitian `H`.
pub fn random_involution<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Observable> {
    Observable::new(matrix_sign(&random_hermitian(dim, rng))?)
}

/// Haar-random pure state on `C^dim_a (x) C^dim_b`.
pub fn haar_state<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> Result<PureState> {
    let v = (0..dim_a * dim_b)
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    PureState::normalized(v, dim_a, dim_b)
}

/// Random involutions for both parties on the given state.
pub fn random_setup_on<R: Rng + ?Sized>(
    n: usize,
    state: PureState,
    rng: &mut R,
) -> Result<MeasurementSetup> {
    check_quantum_n(n)?;
    let alice = (0..1usize << (n - 1))
        .map(|_| random_involution(state.dim_a(), rng))
        .collect::<Result<Vec<_>>>()?;
    let bob = (0..n)
        .map(|_| random_involution(state.dim_b(), rng))
        .collect::<Result<Vec<_>>>()?;
    MeasurementSetup::new(n, state, alice, bob)
}

/// Random involutions and a Haar-random state, local dimension `dim`.
pub fn random_setup<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    rng: &mut R,
) -> Result<MeasurementSetup> {
    let state = haar_state(dim, dim, rng)?;
    random_setup_on(n, state, rng)
}
