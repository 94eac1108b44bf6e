//! Time-independent generators `(A, b, C)` whose flow passes exactly through
//! a discrete channel and all of its powers, plus the forward flow itself.
//!
//! The master equation is
//! `dX/dt = Omega (A X + b)` and `dcov/dt = (Omega A) cov + cov (Omega A)^T + C`.

use serde::{Deserialize, Serialize};

use crate::channel::{CpReport, GaussianChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, HermitianMatrix, Matrix, Vector};
use crate::phase_space::{modes_for_dim, omega, GaussianState};
use crate::tolerances::Tolerances;

/// Eigenvalue pairs whose arguments add up to within this much of pi make
/// the principal log of `T ⊗ T` disagree with the Kronecker sum of logs.
const PAIR_ARG_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generators {
    #[serde(rename = "A", with = "crate::serde_mat::matrix")]
    pub a: Matrix,
    #[serde(with = "crate::serde_mat::vector")]
    pub b: Vector,
    #[serde(rename = "C", with = "crate::serde_mat::matrix")]
    pub c: Matrix,
}

impl Generators {
    pub fn new(a: Matrix, b: Vector, c: Matrix) -> Result<Self> {
        let g = Self { a, b, c };
        g.check_shape()?;
        linalg::check_symmetric(&g.c, Tolerances::default().symmetry)?;
        Ok(g)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            a: Matrix::zeros(dim, dim),
            b: Vector::zeros(dim),
            c: Matrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub(crate) fn check_shape(&self) -> Result<usize> {
        let dim = self.b.len();
        modes_for_dim(dim)?;
        if self.a.shape() != (dim, dim) || self.c.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "generators with A {:?}, b {}, C {:?}",
                self.a.shape(),
                dim,
                self.c.shape()
            )));
        }
        Ok(dim)
    }

    /// `Omega A`, the drift matrix of the mean.
    pub fn drift(&self) -> Matrix {
        omega(self.dim() / 2) * &self.a
    }

    /// Generator of `vec(cov) -> vec(M cov + cov M^T)` with `M = Omega A`.
    pub fn covariance_drift(&self) -> Matrix {
        kronecker_sum(&self.drift())
    }
}

/// `M ⊗ I + I ⊗ M`.
pub fn kronecker_sum(m: &Matrix) -> Matrix {
    let id = Matrix::identity(m.nrows(), m.ncols());
    linalg::tensor_product(m, &id) + linalg::tensor_product(&id, m)
}

/// Interpolation generators of a channel applied every `dt`.
///
/// Fails with `SingularInput` if `T` is singular and with
/// `BranchCutEigenvalue` if `T` has an eigenvalue on the negative real axis
/// or two eigenvalues whose arguments sum to pi or more. Both cases mean
/// `dt` is too long for a time-independent interpolation.
pub fn generators_from_channel(c: &GaussianChannel, dt: f64) -> Result<Generators> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step duration must be positive, got {dt}"
        )));
    }
    let dim = c.dim();
    let n = modes_for_dim(dim)?;
    if c.t.shape() != (dim, dim) || c.r.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch("malformed channel".into()));
    }
    linalg::check_log_domain(&c.t)?;
    check_pair_arguments(&c.t)?;

    let w = omega(n);
    let omega_a = linalg::mat_log_principal(&c.t)? / dt;
    let omega_b = linalg::logm_div(&c.t)? * &c.d / dt;
    let tt = linalg::tensor_product(&c.t, &c.t);
    let vec_c = linalg::logm_div_unchecked(&tt)? * linalg::vec(&c.r) / dt;
    let cov_gen = linalg::symmetrize(&linalg::unvec(&vec_c, dim, dim)?);

    // Omega^-1 = -Omega.
    Ok(Generators {
        a: -(&w * omega_a),
        b: -(&w * omega_b),
        c: cov_gen,
    })
}

fn check_pair_arguments(t: &Matrix) -> Result<()> {
    let eig = linalg::eigenvalues(t)?;
    let limit = std::f64::consts::PI - PAIR_ARG_SLACK;
    for (i, zi) in eig.iter().enumerate() {
        for zj in &eig[i..] {
            if (zi.arg() + zj.arg()).abs() >= limit {
                let p = zi * zj;
                return Err(Error::BranchCutEigenvalue { re: p.re, im: p.im });
            }
        }
    }
    Ok(())
}

/// Channel obtained by running the master equation for time `t >= 0`.
pub fn propagate(g: &Generators, t: f64) -> Result<GaussianChannel> {
    let dim = g.check_shape()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "propagation time must be finite and non-negative, got {t}"
        )));
    }
    let m = g.drift();
    let shift = omega(dim / 2) * &g.b;
    let t_mat = linalg::mat_exp(&(&m * t));
    let d = linalg::expm1_div(&m, t) * shift;
    let vec_r = linalg::expm1_div(&kronecker_sum(&m), t) * linalg::vec(&g.c);
    let r = linalg::symmetrize(&linalg::unvec(&vec_r, dim, dim)?);
    Ok(GaussianChannel { t: t_mat, d, r })
}

pub fn cp_differential_check(g: &Generators) -> Result<CpReport> {
    cp_differential_check_with(g, &Tolerances::default())
}

/// Smallest eigenvalue of `C - i Omega (A - A^T) Omega`.
pub fn cp_differential_check_with(g: &Generators, tol: &Tolerances) -> Result<CpReport> {
    let dim = g.check_shape()?;
    let w = omega(dim / 2);
    let im = -(&w * (&g.a - g.a.transpose()) * &w);
    let h = HermitianMatrix::from_parts(&linalg::symmetrize(&g.c), &im)?;
    let margin = linalg::min_eig_hermitian(&h);
    Ok(CpReport {
        cp: margin >= -tol.cp,
        margin,
    })
}

/// Time derivatives of the mean and covariance under the master equation.
pub fn master_rhs(g: &Generators, s: &GaussianState) -> Result<(Vector, Matrix)> {
    let dim = g.check_shape()?;
    s.check_shape()?;
    if s.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "generators of dimension {dim} applied to a state of dimension {}",
            s.dim()
        )));
    }
    let w = omega(dim / 2);
    let m = &w * &g.a;
    let mean_dot = &w * (&g.a * &s.mean + &g.b);
    let cov_dot = &m * &s.cov + &s.cov * m.transpose() + &g.c;
    Ok((mean_dot, cov_dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{compose, is_cptp};
    use crate::phase_space::{hamiltonian_flow, QuadraticHamiltonian};
    use crate::random;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flow_channel(f: Matrix, alpha: Vector, dt: f64) -> GaussianChannel {
        let flow = hamiltonian_flow(&QuadraticHamiltonian::new(f, alpha).unwrap(), dt);
        let dim = flow.d.len();
        GaussianChannel {
            t: flow.s,
            d: flow.d,
            r: Matrix::zeros(dim, dim),
        }
    }

    #[test]
    fn hamiltonian_flow_is_inverted() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..20 {
            let f = random::symmetric(&mut rng, 4, 1.0);
            let alpha = random::vector(&mut rng, 4, 1.0);
            let g = generators_from_channel(&flow_channel(f.clone(), alpha.clone(), 0.05), 0.05)
                .unwrap();
            assert!((&g.a - &f).amax() < 1e-10);
            assert!((&g.b - &alpha).amax() < 1e-10);
            assert!(g.c.amax() < 1e-12);
        }
    }

    #[test]
    fn identity_channel_has_zero_generators() {
        let g = generators_from_channel(&GaussianChannel::identity(4), 0.3).unwrap();
        assert_eq!(g.a.amax(), 0.0);
        assert_eq!(g.b.amax(), 0.0);
        assert_eq!(g.c.amax(), 0.0);
    }

    #[test]
    fn round_trip_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let modes = rng.random_range(1..=2);
            let dt = rng.random_range(0.01..0.2);
            let j = random::joint_setup(&mut rng, modes, 1, dt);
            let c = crate::channel::reduce_from_joint(&j).unwrap();
            let g = generators_from_channel(&c, dt).unwrap();
            assert!(linalg::asymmetry(&g.c) == 0.0);
            let back = propagate(&g, dt).unwrap();
            assert!(back.max_abs_diff(&c) < 1e-9, "{}", back.max_abs_diff(&c));
        }
    }

    #[test]
    fn generator_c_matches_inverse_route() {
        // C = unvec(((exp(K dt) - I)/K)^-1 vec R), independent of Log(T ⊗ T).
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let j = random::joint_setup(&mut rng, 2, 1, 0.1);
            let c = crate::channel::reduce_from_joint(&j).unwrap();
            let g = generators_from_channel(&c, 0.1).unwrap();
            let phi = linalg::expm1_div(&g.covariance_drift(), 0.1);
            let vec_c = phi.lu().solve(&linalg::vec(&c.r)).unwrap();
            let alt = linalg::unvec(&vec_c, 4, 4).unwrap();
            assert!((alt - &g.c).amax() < 1e-10);
        }
    }

    #[test]
    fn generator_b_matches_augmented_log() {
        // Log of the affine matrix [[T, d], [0, 1]] is [[Omega A, Omega b], [0, 0]] dt.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let dt = 0.1;
            let j = random::joint_setup(&mut rng, 1, 2, dt);
            let c = crate::channel::reduce_from_joint(&j).unwrap();
            let g = generators_from_channel(&c, dt).unwrap();
            let mut aff = Matrix::identity(3, 3);
            aff.view_mut((0, 0), (2, 2)).copy_from(&c.t);
            aff.view_mut((0, 2), (2, 1)).copy_from(&c.d);
            let l = linalg::mat_log_principal(&aff).unwrap() / dt;
            let omega_b = omega(1) * &g.b;
            assert!((l.view((0, 2), (2, 1)) - omega_b).amax() < 1e-10);
            assert!(l.row(2).amax() < 1e-12);
        }
    }

    #[test]
    fn long_steps_hit_the_branch_cut() {
        let f = Matrix::identity(2, 2);
        let c = flow_channel(f.clone(), Vector::zeros(2), std::f64::consts::PI);
        assert!(matches!(
            generators_from_channel(&c, std::f64::consts::PI),
            Err(Error::BranchCutEigenvalue { .. })
        ));
        // T itself is fine here but T ⊗ T wraps.
        let c = flow_channel(f, Vector::zeros(2), 1.7);
        assert!(matches!(
            generators_from_channel(&c, 1.7),
            Err(Error::BranchCutEigenvalue { .. })
        ));
        let singular = GaussianChannel {
            t: Matrix::zeros(2, 2),
            d: Vector::zeros(2),
            r: Matrix::identity(2, 2),
        };
        assert!(matches!(
            generators_from_channel(&singular, 0.1),
            Err(Error::SingularInput { .. })
        ));
        assert!(generators_from_channel(&GaussianChannel::identity(2), 0.0).is_err());
    }

    #[test]
    fn propagate_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = random::generators(&mut rng, 2);
        let c = propagate(&g, 0.0).unwrap();
        assert_eq!(c.max_abs_diff(&GaussianChannel::identity(4)), 0.0);
        assert!(propagate(&g, -1.0).is_err());

        let f = random::symmetric(&mut rng, 4, 1.0);
        let alpha = random::vector(&mut rng, 4, 1.0);
        let unitary = Generators::new(f.clone(), alpha.clone(), Matrix::zeros(4, 4)).unwrap();
        let c = propagate(&unitary, 0.7).unwrap();
        let expected = flow_channel(f, alpha, 0.7);
        assert!(c.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn propagate_solves_the_master_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..20 {
            let g = random::generators(&mut rng, 2);
            let s = random::valid_state(&mut rng, 2, 1.0, 2.0);
            let t = rng.random_range(0.1..1.0);
            let h = 1e-5;
            let at = |t: f64| crate::channel::apply(&propagate(&g, t).unwrap(), &s).unwrap();
            let (plus, minus, mid) = (at(t + h), at(t - h), at(t));
            let mean_fd = (&plus.mean - &minus.mean) / (2.0 * h);
            let cov_fd = (&plus.cov - &minus.cov) / (2.0 * h);
            let (mean_dot, cov_dot) = master_rhs(&g, &mid).unwrap();
            assert!((mean_fd - mean_dot).amax() < 1e-6);
            assert!((cov_fd - cov_dot).amax() < 1e-6);
        }
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let g = random::generators(&mut rng, 2);
        let a = propagate(&g, 0.3).unwrap();
        let b = propagate(&g, 0.5).unwrap();
        let ab = propagate(&g, 0.8).unwrap();
        assert!(compose(&b, &a).unwrap().max_abs_diff(&ab) < 1e-12);
    }

    #[test]
    fn differential_cp_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let f = random::symmetric(&mut rng, 4, 1.0);
        let rep = cp_differential_check(&Generators::new(f, Vector::zeros(4), Matrix::zeros(4, 4)).unwrap())
            .unwrap();
        assert!(rep.cp);
        assert_abs_diff_eq!(rep.margin, 0.0, epsilon = 1e-14);

        let w = omega(1);
        let g_mat = Matrix::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 0.4]);
        let det = g_mat.determinant();
        assert!(det > 0.0);
        for nu_a in [1.0, 1.5, 4.0] {
            let first = Generators::new(
                &w * (0.5 * det),
                Vector::zeros(2),
                &w * &g_mat * g_mat.transpose() * w.transpose() * nu_a,
            )
            .unwrap();
            assert!(cp_differential_check(&first).unwrap().cp);
        }

        let bad = Generators::new(w.clone(), Vector::zeros(2), Matrix::zeros(2, 2)).unwrap();
        let rep = cp_differential_check(&bad).unwrap();
        assert!(!rep.cp);
        assert_abs_diff_eq!(rep.margin, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn differential_cp_gives_cptp_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let mut checked = 0;
        while checked < 50 {
            let g = random::generators(&mut rng, 1);
            if !cp_differential_check(&g).unwrap().cp {
                continue;
            }
            checked += 1;
            for k in 1..=10 {
                let c = propagate(&g, 0.2 * k as f64).unwrap();
                assert!(is_cptp(&c).unwrap().cp);
            }
        }
    }

    #[test]
    fn master_rhs_examples() {
        let s = GaussianState::vacuum(1);
        let (m, c) = master_rhs(&Generators::zeros(2), &s).unwrap();
        assert_eq!(m.amax(), 0.0);
        assert_eq!(c.amax(), 0.0);

        let noise = Generators::new(Matrix::zeros(2, 2), Vector::zeros(2), Matrix::identity(2, 2)).unwrap();
        let (_, c) = master_rhs(&noise, &s).unwrap();
        assert_eq!(c, Matrix::identity(2, 2));

        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let f = random::symmetric(&mut rng, 2, 1.0);
        let alpha = random::vector(&mut rng, 2, 1.0);
        let st = random::valid_state(&mut rng, 1, 1.0, 2.0);
        let g = Generators::new(f.clone(), alpha.clone(), Matrix::zeros(2, 2)).unwrap();
        let (m, c) = master_rhs(&g, &st).unwrap();
        let w = omega(1);
        assert!((m - &w * (&f * &st.mean + &alpha)).amax() < 1e-15);
        let wf = &w * &f;
        assert!((c - (&wf * &st.cov + &st.cov * wf.transpose())).amax() < 1e-15);
        assert!(master_rhs(&g, &GaussianState::vacuum(2)).is_err());
    }

    #[test]
    fn json_shape() {
        let g = Generators::zeros(2);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"A":[[0.0,0.0],[0.0,0.0]],"b":[0.0,0.0],"C":[[0.0,0.0],[0.0,0.0]]}"#);
        let back: Generators = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
