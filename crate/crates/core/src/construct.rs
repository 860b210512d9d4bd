//! The entanglement-assisted quantum strategy: Bob's anti-commuting basis,
//! Alice's combined observables, the maximally entangled state, the ensemble
//! Alice steers Bob's half into, and the parity-obliviousness check on it.

use serde::{Deserialize, Serialize};

use crate::error::{PomError, Result};
use crate::numerics::{
    kron, reduce_to_b, sigma_x, sigma_y, sigma_z, vec_norm, ComplexMatrix, C64, ZERO,
};
use crate::task::{input_ordering, parity_set, sign_matrix, BitString};

/// Upper limit on `n` for the quantum constructions (Bell operator dimension
/// `2^(2 floor(n/2)) <= 4096`).
pub const MAX_QUANTUM_BITS: usize = 12;

/// Tolerance used when validating caller-supplied observables and states.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Allowed deviation of each steering probability from 1/2.
pub const STEERING_TOL: f64 = 1e-9;

pub(crate) fn check_quantum_n(n: usize) -> Result<()> {
    if !(2..=MAX_QUANTUM_BITS).contains(&n) {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: MAX_QUANTUM_BITS,
        });
    }
    Ok(())
}

/// Local dimension `2^floor(n/2)` of the canonical construction.
pub fn canonical_dim(n: usize) -> usize {
    1 << (n / 2)
}

/// A Hermitian involution, i.e. a sharp two-outcome measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    /// Validates Hermiticity and `M^2 = I` within [`VALIDATION_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(PomError::InvalidObservable(format!(
                "{}x{} matrix is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_residual();
        if herm > VALIDATION_TOL {
            return Err(PomError::InvalidObservable(format!(
                "Hermiticity residual {herm:.3e}"
            )));
        }
        let inv = involution_residual(&matrix);
        if inv > VALIDATION_TOL {
            return Err(PomError::InvalidObservable(format!(
                "involution residual {inv:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without checks. Used to feed deliberately broken
    /// observables to diagnostics such as the SOS certificate.
    pub fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// `(I + sign M) / 2`
    pub fn projector(&self, sign: f64) -> ComplexMatrix {
        (ComplexMatrix::identity(self.dim()) + self.matrix.scale_real(sign)).scale_real(0.5)
    }
}

/// Largest entry of `|M^2 - I|`.
pub fn involution_residual(m: &ComplexMatrix) -> f64 {
    (m * m - ComplexMatrix::identity(m.rows())).max_abs()
}

/// A unit vector on `C^dim_a (x) C^dim_b`, Alice's factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<C64>,
    dim_a: usize,
    dim_b: usize,
}

impl PureState {
    pub fn new(vector: Vec<C64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        if vector.len() != dim_a * dim_b {
            return Err(PomError::DimensionMismatch(format!(
                "state of length {} on {dim_a}x{dim_b}",
                vector.len()
            )));
        }
        let norm = vec_norm(&vector);
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(PomError::InvalidSetup(format!("state norm {norm}")));
        }
        Ok(Self {
            vector,
            dim_a,
            dim_b,
        })
    }

    /// Normalizes `vector` first.
    pub fn normalized(vector: Vec<C64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        let norm = vec_norm(&vector);
        if norm == 0.0 || !norm.is_finite() {
            return Err(PomError::InvalidSetup(
                "cannot normalize a zero state".into(),
            ));
        }
        Self::new(vector.into_iter().map(|z| z / norm).collect(), dim_a, dim_b)
    }

    /// `(1/sqrt d) sum_k |k>|k>`
    pub fn maximally_entangled(dim: usize) -> Self {
        let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let mut vector = vec![ZERO; dim * dim];
        for k in 0..dim {
            vector[k * dim + k] = amp;
        }
        Self {
            vector,
            dim_a: dim,
            dim_b: dim,
        }
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector)
    }
}

/// Shared state plus Alice's `2^(n-1)` and Bob's `n` observables.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetup {
    pub n: usize,
    pub state: PureState,
    pub alice: Vec<Observable>,
    pub bob: Vec<Observable>,
}

impl MeasurementSetup {
    pub fn new(
        n: usize,
        state: PureState,
        alice: Vec<Observable>,
        bob: Vec<Observable>,
    ) -> Result<Self> {
        let setup = Self {
            n,
            state,
            alice,
            bob,
        };
        setup.validate()?;
        Ok(setup)
    }

    /// Checks list lengths and dimensions (not involution-ness, which the
    /// [`Observable`] constructor owns).
    pub fn validate(&self) -> Result<()> {
        check_quantum_n(self.n)?;
        let half = 1usize << (self.n - 1);
        if self.alice.len() != half {
            return Err(PomError::InvalidSetup(format!(
                "{} Alice observables, expected {half}",
                self.alice.len()
            )));
        }
        if self.bob.len() != self.n {
            return Err(PomError::InvalidSetup(format!(
                "{} Bob observables, expected {}",
                self.bob.len(),
                self.n
            )));
        }
        if let Some(a) = self.alice.iter().find(|a| a.dim() != self.state.dim_a) {
            return Err(PomError::DimensionMismatch(format!(
                "Alice observable of dimension {} for local dimension {}",
                a.dim(),
                self.state.dim_a
            )));
        }
        if let Some(b) = self.bob.iter().find(|b| b.dim() != self.state.dim_b) {
            return Err(PomError::DimensionMismatch(format!(
                "Bob observable of dimension {} for local dimension {}",
                b.dim(),
                self.state.dim_b
            )));
        }
        Ok(())
    }

    pub fn dim_a(&self) -> usize {
        self.state.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.state.dim_b
    }

    /// `C_y = sum_i s[i][y] A_i`, Alice's effective observable paired with `B_y`.
    pub fn alice_combinations(&self) -> Result<Vec<ComplexMatrix>> {
        let signs = sign_matrix(self.n)?;
        Ok((0..self.n)
            .map(|y| {
                let mut c = ComplexMatrix::zeros(self.dim_a(), self.dim_a());
                for (i, a) in self.alice.iter().enumerate() {
                    c.add_scaled(a.matrix(), C64::new(signs.get(i, y) as f64, 0.0));
                }
                c
            })
            .collect())
    }

    /// `D_i = sum_y s[i][y] B_y`, Bob's effective observable paired with `A_i`.
    pub fn bob_combinations(&self) -> Result<Vec<ComplexMatrix>> {
        let signs = sign_matrix(self.n)?;
        Ok((0..self.alice.len())
            .map(|i| {
                let mut d = ComplexMatrix::zeros(self.dim_b(), self.dim_b());
                for (y, b) in self.bob.iter().enumerate() {
                    d.add_scaled(b.matrix(), C64::new(signs.get(i, y) as f64, 0.0));
                }
                d
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SetupDocument::from_setup(
            self,
        )?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SetupDocument = serde_json::from_str(text)?;
        doc.into_setup()
    }
}

/// On-disk form of a [`MeasurementSetup`]: complex numbers are `[re, im]`
/// pairs, matrices are flat row-major lists of pairs.
#[derive(Serialize, Deserialize)]
pub struct SetupDocument {
    pub n: usize,
    pub dim: usize,
    pub state: Vec<[f64; 2]>,
    pub alice: Vec<Vec<[f64; 2]>>,
    pub bob: Vec<Vec<[f64; 2]>>,
}

fn pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn complexes(values: &[[f64; 2]]) -> Vec<C64> {
    values.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

impl SetupDocument {
    pub fn from_setup(setup: &MeasurementSetup) -> Result<Self> {
        if setup.dim_a() != setup.dim_b() {
            return Err(PomError::InvalidSetup(format!(
                "setup files need equal local dimensions, got {} and {}",
                setup.dim_a(),
                setup.dim_b()
            )));
        }
        Ok(Self {
            n: setup.n,
            dim: setup.dim_a(),
            state: pairs(setup.state.vector()),
            alice: setup
                .alice
                .iter()
                .map(|a| pairs(a.matrix().as_slice()))
                .collect(),
            bob: setup
                .bob
                .iter()
                .map(|b| pairs(b.matrix().as_slice()))
                .collect(),
        })
    }

    pub fn into_setup(self) -> Result<MeasurementSetup> {
        let dim = self.dim;
        let to_obs = |m: &Vec<[f64; 2]>| -> Result<Observable> {
            Observable::new(ComplexMatrix::from_vec(dim, dim, complexes(m))?)
        };
        let state = PureState::new(complexes(&self.state), dim, dim)?;
        let alice = self.alice.iter().map(to_obs).collect::<Result<Vec<_>>>()?;
        let bob = self.bob.iter().map(to_obs).collect::<Result<Vec<_>>>()?;
        MeasurementSetup::new(self.n, state, alice, bob)
    }
}

/// Pairwise anti-commuting involutions `B_{n,1..n}` of dimension `2^floor(n/2)`.
pub fn bob_basis(n: usize) -> Result<Vec<Observable>> {
    check_quantum_n(n)?;
    Ok(basis_matrices(n)
        .into_iter()
        .map(Observable::new_unchecked)
        .collect())
}

fn basis_matrices(n: usize) -> Vec<ComplexMatrix> {
    match n {
        2 => vec![sigma_x(), sigma_y()],
        3 => vec![sigma_x(), sigma_y(), sigma_z()],
        _ => {
            let prev = basis_matrices(if n.is_multiple_of(2) { n - 1 } else { n - 2 });
            let id = ComplexMatrix::identity(prev[0].rows());
            let mut out: Vec<ComplexMatrix> = prev.iter().map(|b| kron(&sigma_x(), b)).collect();
            out.push(kron(&sigma_y(), &id));
            if n % 2 == 1 {
                out.push(kron(&sigma_z(), &id));
            }
            out
        }
    }
}

/// `A_i = (1/sqrt n) sum_y s[i][y] B_{n,y}`.
pub fn alice_observables(n: usize) -> Result<Vec<Observable>> {
    let basis = bob_basis(n)?;
    let signs = sign_matrix(n)?;
    let dim = basis[0].dim();
    let norm = 1.0 / (n as f64).sqrt();
    Ok((0..signs.rows())
        .map(|i| {
            let mut a = ComplexMatrix::zeros(dim, dim);
            for (y, b) in basis.iter().enumerate() {
                a.add_scaled(b.matrix(), C64::new(signs.get(i, y) as f64 * norm, 0.0));
            }
            Observable::new_unchecked(a)
        })
        .collect())
}

/// Maximally entangled state of local dimension `2^floor(n/2)`.
pub fn canonical_state(n: usize) -> Result<PureState> {
    check_quantum_n(n)?;
    Ok(PureState::maximally_entangled(canonical_dim(n)))
}

/// The observables Bob measures: transposes of [`bob_basis`], so that
/// `<B (x) B^T> = 1` on the maximally entangled state.
pub fn bob_measurements(n: usize) -> Result<Vec<Observable>> {
    Ok(bob_basis(n)?.iter().map(Observable::transpose).collect())
}

pub fn canonical_setup(n: usize) -> Result<MeasurementSetup> {
    MeasurementSetup::new(
        n,
        canonical_state(n)?,
        alice_observables(n)?,
        bob_measurements(n)?,
    )
}

/// Bob's states `rho_x` prepared by Alice's measurement on her half.
#[derive(Clone, Debug)]
pub struct EncodingEnsemble {
    pub n: usize,
    /// Indexed by the numeric value of `x`.
    pub states: Vec<ComplexMatrix>,
    /// `tr[(P_{A_i} (x) I) rho_AB]` for each `i`.
    pub steering_probabilities: Vec<f64>,
}

impl EncodingEnsemble {
    pub fn state(&self, x: BitString) -> &ComplexMatrix {
        &self.states[x.value() as usize]
    }

    /// Largest `|p_i - 1/2|`; nonzero values signal a state that is not
    /// maximally entangled, so the `rho_x` are not unit-trace.
    pub fn max_steering_deviation(&self) -> f64 {
        self.steering_probabilities
            .iter()
            .map(|p| (p - 0.5).abs())
            .fold(0.0, f64::max)
    }

    pub fn steering_ok(&self) -> bool {
        self.max_steering_deviation() <= STEERING_TOL
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.states.len() as f64
    }
}

/// `rho_{x^i} = 2 Tr_A[(P_{A_i} (x) I) rho_AB]` and
/// `rho_{x^j} = 2 Tr_A[((I - P_{A_i}) (x) I) rho_AB]` for each complement pair.
pub fn encode_ensemble(setup: &MeasurementSetup) -> Result<EncodingEnsemble> {
    setup.validate()?;
    let ordering = input_ordering(setup.n)?;
    let psi = setup.state.vector();
    let (da, db) = (setup.dim_a(), setup.dim_b());
    let mut states = vec![ComplexMatrix::zeros(db, db); 1 << setup.n];
    let mut steering_probabilities = Vec::with_capacity(setup.alice.len());
    for ((xi, xj), a) in ordering.pairs().zip(&setup.alice) {
        let plus = reduce_to_b(psi, da, db, &a.projector(1.0))?;
        let minus = reduce_to_b(psi, da, db, &a.projector(-1.0))?;
        steering_probabilities.push(plus.trace().re);
        states[xi.value() as usize] = plus.scale_real(2.0);
        states[xj.value() as usize] = minus.scale_real(2.0);
    }
    Ok(EncodingEnsemble {
        n: setup.n,
        states,
        steering_probabilities,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityDeviation {
    pub s: BitString,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityReport {
    pub max_deviation: f64,
    pub per_parity: Vec<ParityDeviation>,
}

/// Frobenius norm of `sum_{s.x=0} rho_x - sum_{s.x=1} rho_x` for every
/// parity `s` of weight at least two.
pub fn verify_parity_obliviousness(e: &EncodingEnsemble) -> Result<ParityReport> {
    let ordering = input_ordering(e.n)?;
    let dim = e.states[0].rows();
    let per_parity: Vec<ParityDeviation> = parity_set(e.n)?
        .into_iter()
        .map(|s| {
            let mut diff = ComplexMatrix::zeros(dim, dim);
            for &x in ordering.entries() {
                let sign = if s.dot(&x) == 0 { 1.0 } else { -1.0 };
                diff.add_scaled(e.state(x), C64::new(sign, 0.0));
            }
            ParityDeviation {
                s,
                deviation: diff.frobenius_norm(),
            }
        })
        .collect();
    let max_deviation = per_parity.iter().map(|p| p.deviation).fold(0.0, f64::max);
    Ok(ParityReport {
        max_deviation,
        per_parity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eig_hermitian, partial_trace, Side, I};

    fn paulis() -> [ComplexMatrix; 3] {
        [sigma_x(), sigma_y(), sigma_z()]
    }

    fn combo(coeffs: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(coeffs[0].1.rows(), coeffs[0].1.cols());
        for (c, x) in coeffs {
            m.add_scaled(x, C64::new(*c, 0.0));
        }
        m
    }

    #[test]
    fn basis_three_bits_is_pauli() {
        let b = bob_basis(3).unwrap();
        for (got, want) in b.iter().zip(paulis()) {
            assert!(got.matrix().approx_eq(&want, 0.0));
        }
    }

    #[test]
    fn basis_four_bits() {
        let [x, y, z] = paulis();
        let id = ComplexMatrix::identity(2);
        let want = [kron(&x, &x), kron(&x, &y), kron(&x, &z), kron(&y, &id)];
        let b = bob_basis(4).unwrap();
        for (got, want) in b.iter().zip(&want) {
            assert!(got.matrix().approx_eq(want, 0.0));
        }
    }

    #[test]
    fn basis_five_bits() {
        let [x, y, z] = paulis();
        let id = ComplexMatrix::identity(2);
        let want = [
            kron(&x, &x),
            kron(&x, &y),
            kron(&x, &z),
            kron(&y, &id),
            kron(&z, &id),
        ];
        let b = bob_basis(5).unwrap();
        assert_eq!(b.len(), 5);
        for (got, want) in b.iter().zip(&want) {
            assert!(got.matrix().approx_eq(want, 0.0));
        }
    }

    #[test]
    fn basis_range_checked() {
        assert!(bob_basis(1).is_err());
        assert!(bob_basis(13).is_err());
        assert!(canonical_setup(0).is_err());
    }

    #[test]
    fn basis_anticommutes_for_all_sizes() {
        for n in 2..=12 {
            let b = bob_basis(n).unwrap();
            assert_eq!(b.len(), n);
            assert_eq!(b[0].dim(), canonical_dim(n));
            for y in 0..n {
                assert!(involution_residual(b[y].matrix()) <= 1e-12);
                for yp in y + 1..n {
                    let ac = b[y].matrix().anticommutator(b[yp].matrix());
                    assert!(ac.max_abs() <= 1e-12, "n={n} y={y} y'={yp}");
                }
            }
        }
    }

    #[test]
    fn alice_three_bits_matches_listing() {
        let [x, y, z] = paulis();
        let r = 1.0 / 3f64.sqrt();
        let a = alice_observables(3).unwrap();
        assert!(a[0]
            .matrix()
            .approx_eq(&combo(&[(r, &x), (r, &y), (r, &z)]), 1e-15));
        assert!(a[1]
            .matrix()
            .approx_eq(&combo(&[(r, &x), (r, &y), (-r, &z)]), 1e-15));
        assert!(a[2]
            .matrix()
            .approx_eq(&combo(&[(r, &x), (-r, &y), (r, &z)]), 1e-15));
        assert!(a[3]
            .matrix()
            .approx_eq(&combo(&[(-r, &x), (r, &y), (r, &z)]), 1e-15));
    }

    #[test]
    fn alice_four_bits_sixth_observable() {
        let [x, y, z] = paulis();
        let id = ComplexMatrix::identity(2);
        let (xx, xy, xz, yi) = (kron(&x, &x), kron(&x, &y), kron(&x, &z), kron(&y, &id));
        let want = combo(&[(0.5, &xx), (0.5, &xy), (-0.5, &xz), (-0.5, &yi)]);
        assert!(alice_observables(4).unwrap()[5]
            .matrix()
            .approx_eq(&want, 1e-15));
    }

    #[test]
    fn alice_observables_are_involutions_and_combine() {
        for n in 2..=10 {
            let a = alice_observables(n).unwrap();
            let basis = bob_basis(n).unwrap();
            let signs = sign_matrix(n).unwrap();
            for obs in &a {
                assert!(obs.matrix().is_hermitian(1e-12));
                assert!(involution_residual(obs.matrix()) <= 1e-12, "n={n}");
            }
            let scale = (1u64 << (n - 1)) as f64 / (n as f64).sqrt();
            for (y, b) in basis.iter().enumerate() {
                let mut sum = ComplexMatrix::zeros(b.dim(), b.dim());
                for (i, obs) in a.iter().enumerate() {
                    sum.add_scaled(obs.matrix(), C64::new(signs.get(i, y) as f64, 0.0));
                }
                let err = (&sum - &b.matrix().scale_real(scale)).max_abs();
                assert!(err <= 1e-12 * scale, "n={n} y={y}: {err:e}");
            }
        }
    }

    #[test]
    fn canonical_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s3 = canonical_state(3).unwrap();
        let want = [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
        assert!(s3
            .vector()
            .iter()
            .zip(&want)
            .all(|(a, b)| (a - b).norm() < 1e-15));
        assert_eq!(canonical_state(2).unwrap(), s3);

        // |k>_A|k>_B with k big-endian over two qubits per side: nonzero at
        // qubit strings 0000, 0101, 1010, 1111.
        let s4 = canonical_state(4).unwrap();
        let nonzero: Vec<usize> = (0..16).filter(|&k| s4.vector()[k] != ZERO).collect();
        assert_eq!(nonzero, vec![0b0000, 0b0101, 0b1010, 0b1111]);
        assert!(nonzero
            .iter()
            .all(|&k| (s4.vector()[k].re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn bob_measurements_are_transposes() {
        let [x, y, z] = paulis();
        let b3 = bob_measurements(3).unwrap();
        assert!(b3[0].matrix().approx_eq(&x, 0.0));
        assert!(b3[1].matrix().approx_eq(&(-&y), 0.0));
        assert!(b3[2].matrix().approx_eq(&z, 0.0));

        let b2 = bob_measurements(2).unwrap();
        assert!(b2[1].matrix().approx_eq(&(-&y), 0.0));

        let id = ComplexMatrix::identity(2);
        let b4 = bob_measurements(4).unwrap();
        let want = [kron(&x, &x), -kron(&x, &y), kron(&x, &z), -kron(&y, &id)];
        for (got, want) in b4.iter().zip(&want) {
            assert!(got.matrix().approx_eq(want, 0.0));
        }
    }

    #[test]
    fn transpose_identity_on_random_involutions() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &d in &[2usize, 3, 4, 8] {
            let phi = PureState::maximally_entangled(d);
            for _ in 0..10 {
                let m = crate::random::random_involution(d, &mut rng).unwrap();
                let v = kron(m.matrix(), &m.transpose().matrix().clone()).expectation(phi.vector());
                assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    fn phi_plus_rho() -> ComplexMatrix {
        PureState::maximally_entangled(2).density_matrix()
    }

    #[test]
    fn steered_state_matches_brute_force_partial_trace() {
        let setup = canonical_setup(3).unwrap();
        let e = encode_ensemble(&setup).unwrap();
        let x000 = BitString::parse("000").unwrap();

        // Independent route: full density matrix, embed, trace out Alice.
        let p = setup.alice[0].projector(1.0);
        let joint = kron(&p, &ComplexMatrix::identity(2)) * phi_plus_rho();
        let brute = partial_trace(&joint, 2, 2, Side::A)
            .unwrap()
            .scale_real(2.0);
        assert!(e.state(x000).approx_eq(&brute, 1e-14));

        let [x, y, z] = paulis();
        let r = 1.0 / 3f64.sqrt();
        let want =
            (ComplexMatrix::identity(2) + combo(&[(r, &x), (-r, &y), (r, &z)])).scale_real(0.5);
        assert!(e.state(x000).approx_eq(&want, 1e-14));
        let _ = I;
    }

    #[test]
    fn complement_pairs_sum_to_identity() {
        let e = encode_ensemble(&canonical_setup(3).unwrap()).unwrap();
        let sum =
            e.state(BitString::parse("000").unwrap()) + e.state(BitString::parse("111").unwrap());
        assert!(sum.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn ensemble_states_are_valid_densities() {
        for n in 2..=6 {
            let setup = canonical_setup(n).unwrap();
            let e = encode_ensemble(&setup).unwrap();
            assert!(e.steering_ok());
            let marginal = partial_trace(
                &setup.state.density_matrix(),
                setup.dim_a(),
                setup.dim_b(),
                Side::A,
            )
            .unwrap()
            .scale_real(2.0);
            for rho in &e.states {
                assert!(rho.is_hermitian(1e-12));
                assert!((rho.trace().re - 1.0).abs() < 1e-10);
                assert!(eig_hermitian(rho).unwrap().min() >= -1e-10);
            }
            let ordering = input_ordering(n).unwrap();
            for (xi, xj) in ordering.pairs() {
                assert!((e.state(xi) + e.state(xj)).approx_eq(&marginal, 1e-12));
            }
        }
    }

    #[test]
    fn parity_obliviousness_holds_canonically() {
        for n in 2..=8 {
            let e = encode_ensemble(&canonical_setup(n).unwrap()).unwrap();
            let r = verify_parity_obliviousness(&e).unwrap();
            assert_eq!(r.per_parity.len(), (1 << n) - n - 1);
            assert!(r.max_deviation < 1e-12, "n={n}: {}", r.max_deviation);
        }
    }

    #[test]
    fn broken_ensemble_is_flagged() {
        let mut e = encode_ensemble(&canonical_setup(3).unwrap()).unwrap();
        let x000 = BitString::parse("000").unwrap();
        let x111 = BitString::parse("111").unwrap();
        e.states[x111.value() as usize] = e.state(x000).clone();
        let r = verify_parity_obliviousness(&e).unwrap();
        let s111 = r.per_parity.iter().find(|p| p.s == x111).unwrap();
        assert!(s111.deviation > 0.5);
    }

    #[test]
    fn non_maximal_state_reports_steering_deviation() {
        let mut setup = canonical_setup(2).unwrap();
        setup.state = PureState::normalized(
            vec![C64::new(0.8, 0.0), ZERO, C64::new(0.6, 0.0), ZERO],
            2,
            2,
        )
        .unwrap();
        let e = encode_ensemble(&setup).unwrap();
        assert!(!e.steering_ok());
    }

    #[test]
    fn setup_validation() {
        let mut setup = canonical_setup(3).unwrap();
        setup.bob.pop();
        assert!(setup.validate().is_err());
        assert!(Observable::new(ComplexMatrix::diag_real(&[1.0, 0.5])).is_err());
        assert!(Observable::new(sigma_x().scale(I)).is_err());
        assert!(PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)], 1, 2).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        for n in [2, 3, 4] {
            let setup = canonical_setup(n).unwrap();
            let back = MeasurementSetup::from_json(&setup.to_json().unwrap()).unwrap();
            assert_eq!(back, setup);
        }
    }

    #[test]
    fn json_document_shape() {
        let text = canonical_setup(2).unwrap().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys, ["n", "dim", "state", "alice", "bob"]);
        assert_eq!(v["dim"], 2);
        assert_eq!(v["alice"].as_array().unwrap().len(), 2);
        assert_eq!(v["bob"][1].as_array().unwrap().len(), 4);
        assert_eq!(v["bob"][1][1], serde_json::json!([0.0, 1.0]));
    }
}
