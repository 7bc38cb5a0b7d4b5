//! Dense complex matrix algebra used by every other module.
//!
//! Operators are `nalgebra::DMatrix<Complex64>` in the computational
//! basis. [`HermitianOperator`] and [`UnitaryOperator`] are thin wrappers
//! that validate their defining property once, at construction; numerical
//! code that trusts its own algebra works on raw matrices and wraps the
//! final result.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Construction tolerance on `max |H - H†|` for Hermitian operators.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Construction tolerance on `max |U†U - I|` for unitary operators.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Largest entry magnitude of a matrix.
pub fn max_abs_entry(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn check_square_finite(a: &CMat, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Hermitian matrix wrapper; `max |H - H†| <= 1e-12` is checked once here.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMat,
}

impl HermitianOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        check_square_finite(&matrix, "Hermitian operator")?;
        let dev = max_abs_entry(&(&matrix - matrix.adjoint()));
        if dev > HERMITICITY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: max |H - H†| = {dev:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Builds the operator from a real symmetric matrix given as rows.
    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("ragged real matrix".into()));
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(x, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Frobenius norm `sqrt(Tr H†H)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Unitary matrix wrapper; `max |U†U - I| <= 1e-10` is checked once here.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMat,
}

impl UnitaryOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        check_square_finite(&matrix, "unitary operator")?;
        let n = matrix.nrows();
        let dev = max_abs_entry(&(matrix.adjoint() * &matrix - CMat::identity(n, n)));
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary: max |U†U - I| = {dev:.3e} exceeds {UNITARITY_TOL:.0e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMat::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Eigendecomposition of a Hermitian operator: real eigenvalues `w` and a
/// unitary eigenvector matrix `V` with `H = V diag(w) V†`.
pub fn hermitian_eigen(h: &HermitianOperator) -> (DVector<f64>, CMat) {
    let se = h.matrix().clone().symmetric_eigen();
    (se.eigenvalues, se.eigenvectors)
}

/// Propagator `exp(-i t H)` for Hermitian `H`, by spectral decomposition.
///
/// Negative `t` means reverse evolution. The result is unitary up to the
/// eigensolver's accuracy and is validated against [`UNITARITY_TOL`].
pub fn matrix_exponential_unitary(h: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(Error::InvalidInput("non-finite evolution time".into()));
    }
    if t == 0.0 {
        return Ok(UnitaryOperator::identity(h.dim()));
    }
    let (w, v) = hermitian_eigen(h);
    UnitaryOperator::new(spectral_propagator(&w, &v, t))
}

/// `V diag(exp(-i t w)) V†` from a precomputed eigendecomposition.
pub fn spectral_propagator(w: &DVector<f64>, v: &CMat, t: f64) -> CMat {
    let n = w.len();
    if t == 0.0 {
        return CMat::identity(n, n);
    }
    let mut scaled = v.clone();
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, -t * w[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// General matrix exponential by scaling-and-squaring with a diagonal Padé
/// approximant. Retained as an independent cross-check of the spectral
/// path; production propagators use [`matrix_exponential_unitary`].
pub fn matrix_exponential_pade(a: &CMat) -> Result<CMat> {
    check_square_finite(a, "exponent")?;
    let n = a.nrows();
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let x = a.map(|z| z / 2f64.powi(s as i32));

    // [6/6] Padé: p(x) = sum b_k x^k, exp(x) ≈ p(x)/p(-x) with q = p(-x).
    let b = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let mut term = CMat::identity(n, n);
    let mut even = &term * Complex64::new(b[0], 0.0);
    let mut odd = CMat::zeros(n, n);
    for (k, &bk) in b.iter().enumerate().skip(1) {
        term = &term * &x;
        let contrib = &term * Complex64::new(bk, 0.0);
        if k % 2 == 0 {
            even += contrib;
        } else {
            odd += contrib;
        }
    }
    let p = &even + &odd;
    let q = &even - &odd;
    let mut e = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::IntegrationFailure("singular Padé denominator".into()))?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

/// Hilbert-Schmidt inner product `Tr(A†B)`.
pub fn hilbert_schmidt_inner(a: &CMat, b: &CMat) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch in inner product: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product `A ⊗ B`.
pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Commutator `[A, B] = AB - BA`.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch in commutator: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b - b * a)
}

pub fn identity2() -> CMat {
    CMat::identity(2, 2)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
}

/// Serializes a matrix as rows of `[re, im]` pairs (the on-disk format).
pub fn to_reim_rows(a: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

/// Parses a matrix from rows of `[re, im]` pairs.
pub fn from_reim_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    let mut out = CMat::zeros(n, m);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidInput("non-finite matrix entry".into()));
            }
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_generator_gives_identity() {
        let h = HermitianOperator::new(CMat::zeros(3, 3)).unwrap();
        let u = matrix_exponential_unitary(&h, 7.3).unwrap();
        assert_abs_diff_eq!(
            max_abs_entry(&(u.matrix() - CMat::identity(3, 3))),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn pauli_x_half_turn() {
        let h = HermitianOperator::new(pauli_x()).unwrap();
        let u = matrix_exponential_unitary(&h, std::f64::consts::FRAC_PI_2).unwrap();
        let expected = pauli_x() * Complex64::new(0.0, -1.0);
        assert_abs_diff_eq!(max_abs_entry(&(u.matrix() - expected)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_matches_pade_oracle() {
        // Deterministic non-commuting Hermitian test matrix.
        let mut m = CMat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let re = ((3 * i + 5 * j + 1) as f64).sin();
                let im = ((7 * i) as f64 - (2 * j) as f64).cos();
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        let h = HermitianOperator::new((&m + m.adjoint()).scale(0.5)).unwrap();
        let t = 0.83;
        let u = matrix_exponential_unitary(&h, t).unwrap();
        let arg = h.matrix().map(|z| z * Complex64::new(0.0, -t));
        let oracle = matrix_exponential_pade(&arg).unwrap();
        assert!(max_abs_entry(&(u.matrix() - oracle)) < 1e-10);
    }

    #[test]
    fn hs_inner_pauli_orthogonality() {
        assert_abs_diff_eq!(
            hilbert_schmidt_inner(&pauli_x(), &pauli_z()).unwrap().norm(),
            0.0,
            epsilon = 1e-15
        );
        let xx = hilbert_schmidt_inner(&pauli_x(), &pauli_x()).unwrap();
        assert_abs_diff_eq!(xx.re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xx.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hs_inner_conjugate_symmetry() {
        let a = pauli_x() + pauli_y().scale(0.5);
        let b = pauli_z() + pauli_x().scale(2.0);
        let ab = hilbert_schmidt_inner(&a, &b).unwrap();
        let ba = hilbert_schmidt_inner(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.re, ba.re, epsilon = 1e-14);
        assert_abs_diff_eq!(ab.im, -ba.im, epsilon = 1e-14);
    }

    #[test]
    fn tensor_product_basics() {
        let i4 = tensor_product(&identity2(), &identity2());
        assert_eq!(i4, CMat::identity(4, 4));

        // X⊗I on |00⟩ = e_0 gives |10⟩ = e_2.
        let xi = tensor_product(&pauli_x(), &identity2());
        let e0 = CVec::from_fn(4, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let out = &xi * e0;
        assert_abs_diff_eq!(out[2].re, 1.0, epsilon = 1e-15);

        let xz = tensor_product(&pauli_x(), &pauli_z());
        assert!(max_abs_entry(&(&xz * &xz - CMat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn commutator_pauli_algebra() {
        let zero = commutator(&pauli_x(), &pauli_x()).unwrap();
        assert_abs_diff_eq!(max_abs_entry(&zero), 0.0, epsilon = 1e-15);

        // [X, Z] = -2iY
        let xz = commutator(&pauli_x(), &pauli_z()).unwrap();
        let expected = pauli_y() * Complex64::new(0.0, -2.0);
        assert_abs_diff_eq!(max_abs_entry(&(xz - expected)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hermitian_construction_rejects_asymmetry() {
        let mut m = pauli_x();
        m[(0, 1)] += Complex64::new(1e-9, 0.0);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn unitary_construction_rejects_nonunitary() {
        assert!(UnitaryOperator::new(pauli_x().scale(1.1)).is_err());
        assert!(UnitaryOperator::new(pauli_x()).is_ok());
    }

    #[test]
    fn reim_rows_round_trip() {
        let m = pauli_y();
        let rows = to_reim_rows(&m);
        let back = from_reim_rows(&rows).unwrap();
        assert_eq!(m, back);
    }
}
