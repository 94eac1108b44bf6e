//! Dense matrix kernels: Kronecker products, row-stacking vectorization,
//! the matrix exponential and principal logarithm, and the two divided
//! difference functions `(exp(xt) - I)/x` and `Log(x)/(x - I)`.
//!
//! Both divided differences are evaluated as the off-diagonal block of the
//! corresponding function applied to a 2x2 block upper-triangular matrix.
//! That form is well defined when `x` (or `x - I`) is singular, which is a
//! common case here: free Hamiltonians with vanishing blocks and channels
//! close to the identity.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Arguments within this distance of pi are treated as sitting on the cut.
const BRANCH_CUT_ARG_SLACK: f64 = 1e-8;
/// Relative modulus under which an eigenvalue counts as zero.
const SINGULAR_REL: f64 = 1e-13;
/// Inverse scaling stops once `|X - I|_F` drops below this.
const LOG_SERIES_RADIUS: f64 = 0.1;
const MAX_SQRTS: usize = 64;
const MAX_DB_ITERS: usize = 100;
const SCHUR_ATTEMPTS: usize = 4;
const SCHUR_ITERS_PER_DIM: usize = 200;
/// Coupling used for the off-diagonal block in the divided-difference trick.
/// The block is linear in it, so any power of two works; small values
/// reduce the number of square roots the logarithm needs.
const BLOCK_COUPLING: f64 = 1.0 / 16.0;

pub fn ensure_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Largest absolute deviation from symmetry.
pub fn asymmetry(m: &Matrix) -> f64 {
    (m - m.transpose()).amax()
}

/// Symmetric part `(m + m^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn check_symmetric(m: &Matrix, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let dev = asymmetry(m);
    if dev > tol * m.amax().max(1.0) {
        return Err(Error::NotSymmetric(dev));
    }
    Ok(())
}

/// Kronecker (tensor) product; dimensions multiply.
pub fn tensor_product(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Row-stacking vectorization: `[[a, b], [c, d]] -> (a, b, c, d)`.
///
/// With this ordering `vec(X Y Z^T) = (X ⊗ Z) vec(Y)`.
pub fn vec(m: &Matrix) -> Vector {
    let (rows, cols) = m.shape();
    Vector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vec`].
pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Result<Matrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot restack a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Matrix::from_row_slice(rows, cols, v.as_slice()))
}

/// Matrix exponential (scaling and squaring with a degree-13 Padé approximant).
///
/// # Panics
/// If `m` is not square.
pub fn mat_exp(m: &Matrix) -> Matrix {
    assert!(m.is_square(), "mat_exp needs a square matrix");
    if m.iter().all(|x| *x == 0.0) {
        return Matrix::identity(m.nrows(), m.ncols());
    }
    m.exp()
}

/// Eigenvalues of a real square matrix.
///
/// The real Schur iteration can stall on highly degenerate spectra (for
/// example Kronecker products of rotations), so a stalled attempt is
/// retried on an orthogonally similar matrix.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    for attempt in 0..SCHUR_ATTEMPTS {
        let work = if attempt == 0 {
            m.clone()
        } else {
            let q = householder(n, attempt);
            &q * m * &q
        };
        if let Some(schur) = Schur::try_new(work, f64::EPSILON, SCHUR_ITERS_PER_DIM * n) {
            return Ok(schur
                .complex_eigenvalues()
                .iter()
                .map(|z: &Complex<f64>| Complex64::new(z.re, z.im))
                .collect());
        }
    }
    Err(Error::NoConvergence("eigenvalue iteration".into()))
}

/// Symmetric orthogonal reflector `I - 2 v v^T / |v|^2` with a fixed,
/// attempt-dependent direction.
fn householder(n: usize, attempt: usize) -> Matrix {
    let v = Vector::from_fn(n, |i, _| 1.0 + ((i + 1) * (attempt + 2)) as f64 % 7.0);
    Matrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared())
}

/// Rejects matrices whose principal logarithm is undefined or ill-posed.
pub fn check_log_domain(m: &Matrix) -> Result<()> {
    let scale = m.amax().max(1.0);
    for z in eigenvalues(m)? {
        let modulus = z.norm();
        if modulus <= SINGULAR_REL * scale {
            return Err(Error::SingularInput { modulus });
        }
        if z.arg().abs() >= std::f64::consts::PI - BRANCH_CUT_ARG_SLACK {
            return Err(Error::BranchCutEigenvalue { re: z.re, im: z.im });
        }
    }
    Ok(())
}

/// Principal square root by the product form of the Denman–Beavers iteration.
fn sqrtm(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let id = Matrix::identity(n, n);
    let mut m = a.clone();
    let mut y = a.clone();
    for _ in 0..MAX_DB_ITERS {
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or(Error::SingularInput { modulus: 0.0 })?;
        y = &y * (&id + &m_inv) * 0.5;
        m = (&id + (&m + &m_inv) * 0.5) * 0.5;
        if (&m - &id).norm() <= 1e-15 * (n as f64).sqrt() {
            return Ok(y);
        }
    }
    Err(Error::NoConvergence("matrix square root".into()))
}

/// `log(X)` for `X` close to the identity, via the series
/// `2 * sum_j Y^(2j+1) / (2j+1)` with `Y = (X - I)(X + I)^-1`.
fn log_near_identity(x: &Matrix) -> Result<Matrix> {
    let n = x.nrows();
    let id = Matrix::identity(n, n);
    let plus_inv = (x + &id)
        .try_inverse()
        .ok_or(Error::SingularInput { modulus: 0.0 })?;
    let y = (x - &id) * plus_inv;
    let y2 = &y * &y;
    let mut power = y.clone();
    let mut sum = y;
    for j in 1..200 {
        power = &power * &y2;
        let term = &power / (2 * j + 1) as f64;
        let tn = term.norm();
        sum += term;
        if tn <= 1e-18 * sum.norm().max(f64::MIN_POSITIVE) {
            return Ok(sum * 2.0);
        }
    }
    Err(Error::NoConvergence("logarithm series".into()))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Returns `BranchCutEigenvalue` for an eigenvalue on `(-inf, 0)` and
/// `SingularInput` for a (numerically) zero eigenvalue. `Log(I) = 0` exactly.
pub fn mat_log_principal(m: &Matrix) -> Result<Matrix> {
    let n = ensure_square(m)?;
    check_log_domain(m)?;
    log_unchecked(m, n)
}

fn log_unchecked(m: &Matrix, n: usize) -> Result<Matrix> {
    let id = Matrix::identity(n, n);
    let mut x = m.clone();
    let mut roots = 0usize;
    while (&x - &id).norm() > LOG_SERIES_RADIUS {
        if roots == MAX_SQRTS {
            return Err(Error::NoConvergence("inverse scaling".into()));
        }
        x = sqrtm(&x)?;
        roots += 1;
    }
    Ok(log_near_identity(&x)? * 2f64.powi(roots as i32))
}

/// `(exp(x t) - I) / x = sum_m t^(m+1) / (m+1)! x^m`, valid for singular `x`.
///
/// Computed as the upper-right block of `exp([[x t, t I], [0, 0]])`.
pub fn expm1_div(x: &Matrix, t: f64) -> Matrix {
    assert!(x.is_square(), "expm1_div needs a square matrix");
    let n = x.nrows();
    if t == 0.0 {
        return Matrix::zeros(n, n);
    }
    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(x * t));
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(Matrix::identity(n, n) * (t * BLOCK_COUPLING)));
    let e = mat_exp(&block);
    e.view((0, n), (n, n)).into_owned() / BLOCK_COUPLING
}

/// `Log(x) / (x - I) = sum_m (-1)^m / (m+1) (x - I)^m`, valid when `x - I`
/// is singular.
///
/// Computed as the upper-right block of `Log([[x, I], [0, I]])`.
pub fn logm_div(x: &Matrix) -> Result<Matrix> {
    ensure_square(x)?;
    check_log_domain(x)?;
    logm_div_unchecked(x)
}

/// [`logm_div`] without the spectral domain check, for callers that have
/// already established it (e.g. from the factors of a Kronecker product).
pub(crate) fn logm_div_unchecked(x: &Matrix) -> Result<Matrix> {
    let n = ensure_square(x)?;
    let mut block = Matrix::identity(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(x);
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(Matrix::identity(n, n) * BLOCK_COUPLING));
    let l = log_unchecked(&block, 2 * n)?;
    Ok(l.view((0, n), (n, n)).into_owned() / BLOCK_COUPLING)
}

/// A complex matrix that equals its conjugate transpose within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, Self::DEFAULT_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let dev = (&m - m.adjoint())
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        if dev > tol * scale {
            return Err(Error::NotHermitian(dev));
        }
        // Exact hermiticity for the eigen-solver.
        Ok(Self((&m + m.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    /// `re + i im` for real symmetric `re` and real antisymmetric `im`.
    pub fn from_parts(re: &Matrix, im: &Matrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch(format!(
                "real part {:?} vs imaginary part {:?}",
                re.shape(),
                im.shape()
            )));
        }
        let m = ComplexMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
            Complex64::new(re[(i, j)], im[(i, j)])
        });
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_hermitian(m: &HermitianMatrix) -> f64 {
    m.0.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn omega() -> Matrix {
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Matrix {
        Matrix::from_fn(r, c, |_, _| scale * rng.random_range(-1.0..1.0))
    }

    #[test]
    fn tensor_of_identities() {
        let i2 = Matrix::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2), Matrix::identity(4, 4));
    }

    #[test]
    fn tensor_block_structure() {
        let t = tensor_product(&omega(), &Matrix::identity(2, 2));
        let expected = Matrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn tensor_maps_outer_products() {
        // vec(u v^T) = u ⊗ v, expanded entry by entry.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random(&mut rng, 2, 1, 1.0);
        let v = random(&mut rng, 2, 1, 1.0);
        let outer = &u * v.transpose();
        let kron = tensor_product(&u, &v);
        for k in 0..4 {
            assert_abs_diff_eq!(vec(&outer)[k], kron[(k, 0)], epsilon = 1e-15);
        }
    }

    #[test]
    fn vec_is_row_stacking() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&Matrix::zeros(3, 2)), Vector::zeros(6));
        assert_eq!(unvec(&vec(&m), 2, 2).unwrap(), m);
    }

    #[test]
    fn unvec_rejects_bad_length() {
        let v = Vector::zeros(5);
        assert!(matches!(unvec(&v, 2, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn vec_identity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random(&mut rng, 2, 2, 1.0);
            let y = random(&mut rng, 2, 2, 1.0);
            let z = random(&mut rng, 2, 2, 1.0);
            // Direct multiplication against the Kronecker form.
            let lhs = vec(&(&x * &y * z.transpose()));
            let rhs = tensor_product(&x, &z) * vec(&y);
            assert!((lhs - rhs).amax() <= 1e-13);
        }
    }

    #[test]
    fn exp_of_zero_and_rotation() {
        assert_eq!(mat_exp(&Matrix::zeros(3, 3)), Matrix::identity(3, 3));
        let theta = 0.7;
        let r = mat_exp(&(omega() * theta));
        let expected = Matrix::from_row_slice(
            2,
            2,
            &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()],
        );
        assert!((r - expected).amax() < 1e-15);
    }

    #[test]
    fn exp_inverse_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random(&mut rng, 4, 4, 1.0);
            let prod = mat_exp(&m) * mat_exp(&(-&m));
            assert!((prod - Matrix::identity(4, 4)).amax() < 1e-12);
        }
    }

    #[test]
    fn log_of_identity_is_exact_zero() {
        let l = mat_log_principal(&Matrix::identity(4, 4)).unwrap();
        assert!(l.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn log_inverts_rotation() {
        for theta in [-3.0, -1.0, 0.1, 2.0, 3.1] {
            let r = mat_exp(&(omega() * theta));
            let l = mat_log_principal(&r).unwrap();
            assert!((l - omega() * theta).amax() < 1e-10, "theta = {theta}");
        }
    }

    #[test]
    fn log_rejects_half_turn() {
        let r = mat_exp(&(omega() * PI));
        assert!(matches!(
            mat_log_principal(&r),
            Err(Error::BranchCutEigenvalue { .. })
        ));
        let neg = Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            mat_log_principal(&neg),
            Err(Error::BranchCutEigenvalue { .. })
        ));
    }

    #[test]
    fn log_rejects_singular() {
        let s = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            mat_log_principal(&s),
            Err(Error::SingularInput { .. })
        ));
    }

    #[test]
    fn log_handles_defective_input() {
        // Jordan block: Log([[1, 1], [0, 1]]) = [[0, 1], [0, 0]].
        let j = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let l = mat_log_principal(&j).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((l - expected).amax() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let l0 = random(&mut rng, 4, 4, 0.8);
            let m = mat_exp(&l0);
            let l = mat_log_principal(&m).unwrap();
            assert!((mat_exp(&l) - &m).amax() < 1e-10);
        }
    }

    #[test]
    fn tensor_log_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = Matrix::identity(3, 3);
        for _ in 0..10 {
            let t = &id + random(&mut rng, 3, 3, 0.2);
            let lt = mat_log_principal(&t).unwrap();
            let lhs = mat_log_principal(&tensor_product(&t, &t)).unwrap();
            let rhs = tensor_product(&lt, &id) + tensor_product(&id, &lt);
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    /// Truncated series oracle for `(exp(xt) - I)/x`.
    fn expm1_div_series(x: &Matrix, t: f64, terms: usize) -> Matrix {
        let n = x.nrows();
        let mut sum = Matrix::zeros(n, n);
        let mut term = Matrix::identity(n, n) * t;
        for m in 0..terms {
            sum += &term;
            term = &term * x * (t / (m + 2) as f64);
        }
        sum
    }

    #[test]
    fn expm1_div_small_cases() {
        let z = expm1_div(&Matrix::zeros(2, 2), 0.3);
        assert!((z - Matrix::identity(2, 2) * 0.3).amax() < 1e-15);

        let nil = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let r = expm1_div(&nil, 1.0);
        let expected = Matrix::identity(2, 2) + &nil * 0.5;
        assert!((r - expected).amax() < 1e-14);
    }

    #[test]
    fn expm1_div_against_inverse_and_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let x = random(&mut rng, 4, 4, 1.0);
            let t = rng.random_range(0.1..2.0);
            let r = expm1_div(&x, t);
            let id = Matrix::identity(4, 4);
            let inv = x.clone().try_inverse().unwrap();
            let oracle = inv * (mat_exp(&(&x * t)) - &id);
            assert!((&r - oracle).amax() < 1e-10 * (1.0 + r.amax()));
            // invariant: r x = exp(xt) - I
            assert!((&r * &x - (mat_exp(&(&x * t)) - &id)).amax() < 1e-10);
        }
        // Singular argument against the series.
        for _ in 0..10 {
            let u = random(&mut rng, 4, 1, 1.0);
            let v = random(&mut rng, 4, 1, 1.0);
            let x = &u * v.transpose();
            let r = expm1_div(&x, 0.7);
            assert!((&r - expm1_div_series(&x, 0.7, 40)).amax() < 1e-12);
            let id = Matrix::identity(4, 4);
            assert!((&r * &x - (mat_exp(&(&x * 0.7)) - id)).amax() < 1e-10);
        }
    }

    /// Truncated series oracle for `Log(x)/(x - I)`.
    fn logm_div_series(x: &Matrix, terms: usize) -> Matrix {
        let n = x.nrows();
        let e = x - Matrix::identity(n, n);
        let mut sum = Matrix::zeros(n, n);
        let mut power = Matrix::identity(n, n);
        for m in 0..terms {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += &power * (sign / (m + 1) as f64);
            power = &power * &e;
        }
        sum
    }

    #[test]
    fn logm_div_cases() {
        let id = Matrix::identity(3, 3);
        assert!((logm_div(&id).unwrap() - &id).amax() < 1e-14);

        let d = Matrix::from_diagonal(&Vector::from_vec(vec![E, 1.0]));
        let r = logm_div(&d).unwrap();
        let expected = Matrix::from_diagonal(&Vector::from_vec(vec![1.0 / (E - 1.0), 1.0]));
        assert!((r - expected).amax() < 1e-12);
    }

    #[test]
    fn logm_div_matches_series_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let id = Matrix::identity(4, 4);
        for _ in 0..20 {
            let x = &id + random(&mut rng, 4, 4, 0.05);
            let r = logm_div(&x).unwrap();
            assert!((&r - logm_div_series(&x, 30)).amax() < 1e-10);
            // explicit inverse route
            let inv = (&x - &id).try_inverse().unwrap();
            let oracle = inv * mat_log_principal(&x).unwrap();
            assert!((&r - oracle).amax() < 1e-8 * (1.0 + r.amax()));
        }
    }

    #[test]
    fn logm_div_rejects_cut() {
        let neg = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            logm_div(&neg),
            Err(Error::BranchCutEigenvalue { .. })
        ));
    }

    #[test]
    fn min_eig_cases() {
        let id = HermitianMatrix::from_parts(&Matrix::identity(2, 2), &Matrix::zeros(2, 2)).unwrap();
        assert_abs_diff_eq!(min_eig_hermitian(&id), 1.0, epsilon = 1e-14);

        let d = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -3.0]));
        let h = HermitianMatrix::from_parts(&d, &Matrix::zeros(2, 2)).unwrap();
        assert_abs_diff_eq!(min_eig_hermitian(&h), -3.0, epsilon = 1e-14);

        // vacuum: I + i omega has eigenvalues 0 and 2
        let v = HermitianMatrix::from_parts(&Matrix::identity(2, 2), &omega()).unwrap();
        assert_abs_diff_eq!(min_eig_hermitian(&v), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian(_))
        ));
    }
}
