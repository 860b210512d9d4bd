//! Dense complex matrices in row-major storage.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{PomError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A dense `rows x cols` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which tensor factor of a bipartite operator to act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PomError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows of complex entries.
    ///
    /// Panics if the rows are ragged; intended for literals.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().copied()).collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows
                .iter()
                .flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0)))
                .collect(),
        }
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Entrywise comparison with an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(PomError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<v| self |v>`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        self.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(mv, vi)| vi.conj() * mv)
            .sum()
    }

    /// `self * other + other * self`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self * other + other * self
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_matmul(rhs)
            .expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                (&self).$f(rhs)
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Mul, mul);
forward_owned!(Add, add);
forward_owned!(Sub, sub);

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let s = a[(ai, aj)];
            if s == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                let base = (ai * b.rows + bi) * cols + aj * b.cols;
                let b_row = b.row(bi);
                for (o, &bv) in out.data[base..base + b.cols].iter_mut().zip(b_row) {
                    *o = s * bv;
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Traces out one factor of an operator on `C^dim_a (x) C^dim_b`.
///
/// Factor order is A then B; the result lives on the remaining factor.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    side: Side,
) -> Result<ComplexMatrix> {
    let d = dim_a * dim_b;
    if m.rows != d || m.cols != d {
        return Err(PomError::DimensionMismatch(format!(
            "partial trace of a {}x{} matrix over {dim_a}x{dim_b}",
            m.rows, m.cols
        )));
    }
    Ok(match side {
        Side::A => ComplexMatrix::from_fn(dim_b, dim_b, |b, bp| {
            (0..dim_a).map(|a| m[(a * dim_b + b, a * dim_b + bp)]).sum()
        }),
        Side::B => ComplexMatrix::from_fn(dim_a, dim_a, |a, ap| {
            (0..dim_b).map(|b| m[(a * dim_b + b, ap * dim_b + b)]).sum()
        }),
    })
}

/// `Tr_A[(op_a (x) I) |psi><psi|]` without forming the joint density matrix.
///
/// With `psi` reshaped to a `dim_a x dim_b` matrix `P`, this is `(op_a P)^T conj(P)`.
pub fn reduce_to_b(
    psi: &[C64],
    dim_a: usize,
    dim_b: usize,
    op_a: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_state_dims(psi, dim_a, dim_b)?;
    if op_a.rows != dim_a || op_a.cols != dim_a {
        return Err(PomError::DimensionMismatch(format!(
            "operator {}x{} on a factor of dimension {dim_a}",
            op_a.rows, op_a.cols
        )));
    }
    let amps = ComplexMatrix::from_vec(dim_a, dim_b, psi.to_vec())?;
    let acted = op_a * &amps;
    Ok(acted.transpose() * amps.conj())
}

/// `Tr_B[(I (x) op_b) |psi><psi|]`, computed as `P op_b^T P^dagger`.
pub fn reduce_to_a(
    psi: &[C64],
    dim_a: usize,
    dim_b: usize,
    op_b: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_state_dims(psi, dim_a, dim_b)?;
    if op_b.rows != dim_b || op_b.cols != dim_b {
        return Err(PomError::DimensionMismatch(format!(
            "operator {}x{} on a factor of dimension {dim_b}",
            op_b.rows, op_b.cols
        )));
    }
    let amps = ComplexMatrix::from_vec(dim_a, dim_b, psi.to_vec())?;
    Ok(&amps * op_b.transpose() * amps.dagger())
}

/// `<psi| op_a (x) op_b |psi>` via `sum conj(P) .* (op_a P op_b^T)`.
pub fn product_expectation(
    psi: &[C64],
    dim_a: usize,
    dim_b: usize,
    op_a: &ComplexMatrix,
    op_b: &ComplexMatrix,
) -> Result<C64> {
    check_state_dims(psi, dim_a, dim_b)?;
    if op_a.rows != dim_a || op_a.cols != dim_a || op_b.rows != dim_b || op_b.cols != dim_b {
        return Err(PomError::DimensionMismatch(format!(
            "local operators {}x{} and {}x{} on {dim_a}x{dim_b}",
            op_a.rows, op_a.cols, op_b.rows, op_b.cols
        )));
    }
    let amps = ComplexMatrix::from_vec(dim_a, dim_b, psi.to_vec())?;
    let acted = op_a * &amps * op_b.transpose();
    Ok(amps
        .data
        .iter()
        .zip(&acted.data)
        .map(|(p, q)| p.conj() * q)
        .sum())
}

fn check_state_dims(psi: &[C64], dim_a: usize, dim_b: usize) -> Result<()> {
    if psi.len() != dim_a * dim_b {
        return Err(PomError::DimensionMismatch(format!(
            "state of length {} on {dim_a}x{dim_b}",
            psi.len()
        )));
    }
    Ok(())
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_sigma_x_identity() {
        let got = kron(&sigma_x(), &ComplexMatrix::identity(2));
        let want = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(got.approx_eq(&want, 0.0));
    }

    #[test]
    fn kron_identity_sigma_z() {
        let got = kron(&ComplexMatrix::identity(2), &sigma_z());
        assert!(got.approx_eq(&ComplexMatrix::diag_real(&[1.0, -1.0, 1.0, -1.0]), 0.0));
    }

    #[test]
    fn kron_sigma_y_sigma_y_is_real() {
        let got = kron(&sigma_y(), &sigma_y());
        let want = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0, 0.0],
        ]);
        assert!(got.approx_eq(&want, 1e-15));
        assert!(got.as_slice().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn kron_rectangular_shapes() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0]]);
        let b = ComplexMatrix::from_real_rows(&[&[1.0], &[-1.0]]);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (2, 3));
        assert_eq!(k[(1, 2)], c(-3.0));
    }

    fn phi_plus() -> Vec<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(h), ZERO, ZERO, c(h)]
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let rho = ComplexMatrix::outer(&phi_plus());
        let red = partial_trace(&rho, 2, 2, Side::A).unwrap();
        assert!(red.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_steering_identity() {
        // P = (I + sigma_y)/2 steers Bob to P^T/2 = (I - sigma_y)/4.
        let p = (&ComplexMatrix::identity(2) + &sigma_y()).scale_real(0.5);
        let rho = ComplexMatrix::outer(&phi_plus());
        let joint = kron(&p, &ComplexMatrix::identity(2)) * &rho;
        let red = partial_trace(&joint, 2, 2, Side::A).unwrap();
        let want = (&ComplexMatrix::identity(2) - &sigma_y()).scale_real(0.25);
        assert!(red.approx_eq(&want, 1e-15));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = ComplexMatrix::from_rows(&[
            &[c(0.7), C64::new(0.1, 0.2)],
            &[C64::new(0.1, -0.2), c(0.3)],
        ]);
        let sigma = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let joint = kron(&rho, &sigma);
        let red = partial_trace(&joint, 2, 2, Side::B).unwrap();
        assert!(red.approx_eq(&rho.scale(sigma.trace()), 1e-14));
        let red_b = partial_trace(&joint, 2, 2, Side::A).unwrap();
        assert!(red_b.approx_eq(&sigma.scale(rho.trace()), 1e-14));
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, 2, 3, Side::A),
            Err(PomError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn reduced_operators_match_brute_force() {
        let psi = vec![
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.4),
            C64::new(0.5, -0.3),
            C64::new(0.1, 0.2),
            C64::new(0.0, -0.25),
            C64::new(0.35, 0.05),
        ];
        let norm = vec_norm(&psi);
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let (da, db) = (2, 3);
        let op_a = sigma_y() + sigma_z().scale_real(0.5);
        let op_b =
            ComplexMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let rho = ComplexMatrix::outer(&psi);

        let brute_b = partial_trace(
            &(kron(&op_a, &ComplexMatrix::identity(db)) * &rho),
            da,
            db,
            Side::A,
        )
        .unwrap();
        assert!(reduce_to_b(&psi, da, db, &op_a)
            .unwrap()
            .approx_eq(&brute_b, 1e-14));

        let brute_a = partial_trace(
            &(kron(&ComplexMatrix::identity(da), &op_b) * &rho),
            da,
            db,
            Side::B,
        )
        .unwrap();
        assert!(reduce_to_a(&psi, da, db, &op_b)
            .unwrap()
            .approx_eq(&brute_a, 1e-14));

        let brute = kron(&op_a, &op_b).expectation(&psi);
        let fast = product_expectation(&psi, da, db, &op_a, &op_b).unwrap();
        assert!((brute - fast).norm() < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let xy = sigma_x() * sigma_y();
        assert!(xy.approx_eq(&sigma_z().scale(I), 1e-15));
        assert!(sigma_x().anticommutator(&sigma_z()).max_abs() == 0.0);
    }
}
