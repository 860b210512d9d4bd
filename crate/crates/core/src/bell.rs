//! The `2^(n-1) x n` Bell operator, its expectation on a setup, the
//! sum-of-squares certificate for its quantum bound, and its classical
//! (deterministic-assignment) maximum.

use serde::Serialize;

use crate::construct::MeasurementSetup;
use crate::error::{PomError, Result};
use crate::numerics::{eig_hermitian, kron, product_expectation, ComplexMatrix, C64};
use crate::task::{quantum_bell_bound, sign_matrix};

/// Expectation values with a larger imaginary part are reported as errors.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Largest `n` accepted by [`lhv_max`].
pub const LHV_MAX_BITS: usize = 5;

/// `sum_y sum_i s[i][y] A_i (x) B_y` as a dense matrix.
#[derive(Clone, Debug)]
pub struct BellOperator {
    pub n: usize,
    pub matrix: ComplexMatrix,
}

pub fn bell_operator(setup: &MeasurementSetup) -> Result<BellOperator> {
    setup.validate()?;
    let dim = setup.dim_a() * setup.dim_b();
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    for (c, b) in setup.alice_combinations()?.iter().zip(&setup.bob) {
        matrix.add_scaled(&kron(c, b.matrix()), C64::new(1.0, 0.0));
    }
    Ok(BellOperator { n: setup.n, matrix })
}

/// `<psi| B_n |psi>`.
pub fn bell_value(setup: &MeasurementSetup) -> Result<f64> {
    setup.validate()?;
    let psi = setup.state.vector();
    let mut total = C64::new(0.0, 0.0);
    for (c, b) in setup.alice_combinations()?.iter().zip(&setup.bob) {
        total += product_expectation(psi, setup.dim_a(), setup.dim_b(), c, b.matrix())?;
    }
    if total.im.abs() > IMAGINARY_TOL {
        return Err(PomError::ComplexExpectation(total.im));
    }
    Ok(total.re)
}

/// Largest eigenvalue of the operator.
pub fn spectral_max(op: &BellOperator) -> Result<f64> {
    Ok(eig_hermitian(&op.matrix)?.max())
}

/// Result of checking `gamma_n = 2^(n-1) sqrt(n) I - B_n = (sqrt(n)/2) sum_i M_i^dagger M_i`.
#[derive(Clone, Debug, Serialize)]
pub struct SosCertificate {
    /// Frobenius norm of `gamma_n - (sqrt(n)/2) sum_i M_i^dagger M_i`.
    pub residual: f64,
    /// Smallest eigenvalue of `gamma_n`.
    pub gamma_min_eig: f64,
}

impl SosCertificate {
    pub const RESIDUAL_TOL: f64 = 1e-10;
    pub const MIN_EIG_TOL: f64 = -1e-9;

    pub fn is_valid(&self) -> bool {
        self.residual <= Self::RESIDUAL_TOL && self.gamma_min_eig >= Self::MIN_EIG_TOL
    }
}

/// Forms `gamma_n` and `M_i = sum_y s[i][y] (I (x) B_y)/sqrt(n) - A_i (x) I`
/// as full matrices and measures how far the SOS identity is from exact.
///
/// The identity needs only `A_i^2 = B_y^2 = I`; broken observables surface as
/// a nonzero residual rather than an error.
pub fn sos_certificate(setup: &MeasurementSetup) -> Result<SosCertificate> {
    let n = setup.n;
    let op = bell_operator(setup)?;
    let (da, db) = (setup.dim_a(), setup.dim_b());
    let dim = da * db;
    let bound = quantum_bell_bound(n);
    let gamma = ComplexMatrix::identity(dim).scale_real(bound) - &op.matrix;

    let signs = sign_matrix(n)?;
    let id_a = ComplexMatrix::identity(da);
    let id_b = ComplexMatrix::identity(db);
    let bob_embedded: Vec<ComplexMatrix> =
        setup.bob.iter().map(|b| kron(&id_a, b.matrix())).collect();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (i, a) in setup.alice.iter().enumerate() {
        let mut m = kron(a.matrix(), &id_b).scale_real(-1.0);
        for (y, b) in bob_embedded.iter().enumerate() {
            m.add_scaled(b, C64::new(signs.get(i, y) as f64 * inv_sqrt_n, 0.0));
        }
        sum = sum + m.dagger() * &m;
    }
    let residual = (&gamma - &sum.scale_real((n as f64).sqrt() / 2.0)).frobenius_norm();
    let gamma_min_eig = eig_hermitian(&crate::numerics::hermitian_part(&gamma))?.min();
    Ok(SosCertificate {
        residual,
        gamma_min_eig,
    })
}

/// Maximum of the Bell expression over deterministic `+-1` assignments.
///
/// Alice's `2^(2^(n-1))` assignments are enumerated; Bob's best response to
/// each is `sum_y |sum_i s[i][y] a_i|`.
pub fn lhv_max(n: usize) -> Result<i64> {
    if !(2..=LHV_MAX_BITS).contains(&n) {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: LHV_MAX_BITS,
        });
    }
    let signs = sign_matrix(n)?;
    let rows = signs.rows();
    let columns: Vec<Vec<i64>> = (0..n)
        .map(|y| (0..rows).map(|i| signs.get(i, y) as i64).collect())
        .collect();
    let mut best = i64::MIN;
    for mask in 0u64..1 << rows {
        let value: i64 = columns
            .iter()
            .map(|col| {
                col.iter()
                    .enumerate()
                    .map(|(i, s)| if mask >> i & 1 == 1 { -s } else { *s })
                    .sum::<i64>()
                    .abs()
            })
            .sum();
        best = best.max(value);
    }
    Ok(best)
}
