//! Gaussian channels `(T, d, R)`, their complete-positivity test and
//! composition, and the reduction of a joint system–ancilla Hamiltonian
//! evolution to a channel on the system alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianMatrix, Matrix, Vector};
use crate::phase_space::{self, modes_for_dim, omega, GaussianState};
use crate::tolerances::Tolerances;

/// `X -> T X + d`, `cov -> T cov T^T + R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    #[serde(rename = "T", with = "crate::serde_mat::matrix")]
    pub t: Matrix,
    #[serde(with = "crate::serde_mat::vector")]
    pub d: Vector,
    #[serde(rename = "R", with = "crate::serde_mat::matrix")]
    pub r: Matrix,
}

/// Smallest eigenvalue of the Hermitian positivity test matrix and the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpReport {
    pub cp: bool,
    pub margin: f64,
}

impl GaussianChannel {
    pub fn new(t: Matrix, d: Vector, r: Matrix) -> Result<Self> {
        let c = Self { t, d, r };
        c.check_shape()?;
        linalg::check_symmetric(&c.r, Tolerances::default().symmetry)?;
        Ok(c)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            t: Matrix::identity(dim, dim),
            d: Vector::zeros(dim),
            r: Matrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    fn check_shape(&self) -> Result<usize> {
        let dim = self.d.len();
        modes_for_dim(dim)?;
        if self.t.shape() != (dim, dim) || self.r.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "channel with T {:?}, d {}, R {:?}",
                self.t.shape(),
                dim,
                self.r.shape()
            )));
        }
        Ok(dim)
    }

    /// Largest entrywise difference across `T`, `d` and `R`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.t - &other.t)
            .amax()
            .max((&self.d - &other.d).amax())
            .max((&self.r - &other.r).amax())
    }

    /// `n`-fold composition with itself (fresh ancilla every step), by
    /// repeated squaring.
    pub fn power(&self, mut n: usize) -> Self {
        let mut acc = Self::identity(self.dim());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = compose_unchecked(&base, &acc);
            }
            n >>= 1;
            if n > 0 {
                base = compose_unchecked(&base, &base);
            }
        }
        acc
    }
}

pub fn apply(c: &GaussianChannel, s: &GaussianState) -> Result<GaussianState> {
    s.check_shape()?;
    if c.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel of dimension {} applied to a state of dimension {}",
            c.dim(),
            s.dim()
        )));
    }
    Ok(GaussianState {
        mean: &c.t * &s.mean + &c.d,
        cov: linalg::symmetrize(&(&c.t * &s.cov * c.t.transpose() + &c.r)),
    })
}

pub fn is_cptp(c: &GaussianChannel) -> Result<CpReport> {
    is_cptp_with(c, &Tolerances::default())
}

/// `R - i (T Omega T^T - Omega) >= 0`.
pub fn is_cptp_with(c: &GaussianChannel, tol: &Tolerances) -> Result<CpReport> {
    let dim = c.check_shape()?;
    let w = omega(dim / 2);
    let defect = &c.t * &w * c.t.transpose() - &w;
    let h = HermitianMatrix::from_parts(&linalg::symmetrize(&c.r), &(-defect))?;
    let margin = linalg::min_eig_hermitian(&h);
    Ok(CpReport {
        cp: margin >= -tol.cp,
        margin,
    })
}

/// `second ∘ first`.
pub fn compose(second: &GaussianChannel, first: &GaussianChannel) -> Result<GaussianChannel> {
    second.check_shape()?;
    first.check_shape()?;
    if second.dim() != first.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose channels of dimension {} and {}",
            second.dim(),
            first.dim()
        )));
    }
    Ok(compose_unchecked(second, first))
}

fn compose_unchecked(second: &GaussianChannel, first: &GaussianChannel) -> GaussianChannel {
    GaussianChannel {
        t: &second.t * &first.t,
        d: &second.t * &first.d + &second.d,
        r: linalg::symmetrize(&(&second.t * &first.r * second.t.transpose() + &second.r)),
    }
}

/// System Hamiltonian, ancilla Hamiltonian, coupling block `G`, ancilla
/// initial state and the interaction duration of one bombardment step.
///
/// The joint phase space orders system modes first, then ancilla modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSetup {
    #[serde(rename = "F_S", with = "crate::serde_mat::matrix")]
    pub f_s: Matrix,
    #[serde(rename = "alpha_S", with = "crate::serde_mat::vector")]
    pub alpha_s: Vector,
    #[serde(rename = "F_A", with = "crate::serde_mat::matrix")]
    pub f_a: Matrix,
    #[serde(rename = "alpha_A", with = "crate::serde_mat::vector")]
    pub alpha_a: Vector,
    #[serde(rename = "G", with = "crate::serde_mat::matrix")]
    pub g: Matrix,
    pub ancilla: GaussianState,
    pub dt: f64,
}

impl JointSetup {
    /// Checks shapes, symmetry of `F_S`/`F_A`, ancilla validity and `dt >= 0`.
    pub fn validate(&self) -> Result<()> {
        let tol = Tolerances::default();
        let ds = self.f_s.nrows();
        let da = self.f_a.nrows();
        modes_for_dim(ds)?;
        modes_for_dim(da)?;
        linalg::check_symmetric(&self.f_s, tol.symmetry)?;
        linalg::check_symmetric(&self.f_a, tol.symmetry)?;
        if self.alpha_s.len() != ds || self.alpha_a.len() != da {
            return Err(Error::DimensionMismatch(
                "linear terms must match their Hamiltonian blocks".into(),
            ));
        }
        if self.g.shape() != (ds, da) {
            return Err(Error::DimensionMismatch(format!(
                "coupling is {:?}, expected ({ds}, {da})",
                self.g.shape()
            )));
        }
        if self.ancilla.dim() != da {
            return Err(Error::DimensionMismatch(format!(
                "ancilla state has dimension {}, expected {da}",
                self.ancilla.dim()
            )));
        }
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSetup(format!(
                "step duration must be finite and non-negative, got {}",
                self.dt
            )));
        }
        let check = phase_space::validate_state(&self.ancilla)?;
        if !check.valid {
            return Err(Error::InvalidAncillaState {
                min_eig: check.min_eig,
            });
        }
        Ok(())
    }

    pub fn system_dim(&self) -> usize {
        self.f_s.nrows()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.f_a.nrows()
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    /// Joint `F_SA = [[F_S, G], [G^T, F_A]]`.
    pub fn joint_f(&self) -> Matrix {
        let (ds, da) = (self.system_dim(), self.ancilla_dim());
        let mut f = Matrix::zeros(ds + da, ds + da);
        f.view_mut((0, 0), (ds, ds)).copy_from(&self.f_s);
        f.view_mut((0, ds), (ds, da)).copy_from(&self.g);
        f.view_mut((ds, 0), (da, ds)).copy_from(&self.g.transpose());
        f.view_mut((ds, ds), (da, da)).copy_from(&self.f_a);
        f
    }

    pub fn joint_alpha(&self) -> Vector {
        let (ds, da) = (self.system_dim(), self.ancilla_dim());
        let mut a = Vector::zeros(ds + da);
        a.rows_mut(0, ds).copy_from(&self.alpha_s);
        a.rows_mut(ds, da).copy_from(&self.alpha_a);
        a
    }

    /// `(Omega_SA F_SA, Omega_SA alpha_SA)`.
    fn joint_generator(&self) -> (Matrix, Vector) {
        let w = omega((self.system_dim() + self.ancilla_dim()) / 2);
        (&w * self.joint_f(), &w * self.joint_alpha())
    }
}

/// Channel induced on the system by one interaction of duration `dt` with a
/// fresh, uncorrelated ancilla.
pub fn reduce_from_joint(j: &JointSetup) -> Result<GaussianChannel> {
    j.validate()?;
    let (ds, da) = (j.system_dim(), j.ancilla_dim());
    let (gen, shift) = j.joint_generator();
    let s = linalg::mat_exp(&(&gen * j.dt));
    let d_joint = linalg::expm1_div(&gen, j.dt) * shift;
    let m_ss = s.view((0, 0), (ds, ds)).into_owned();
    let m_sa = s.view((0, ds), (ds, da)).into_owned();
    let d = &m_sa * &j.ancilla.mean + d_joint.rows(0, ds);
    let r = linalg::symmetrize(&(&m_sa * &j.ancilla.cov * m_sa.transpose()));
    Ok(GaussianChannel { t: m_ss, d, r })
}

/// Taylor coefficients `T_k`, `d_k`, `R_k` (k = 0..=order) of a channel in
/// its step duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub t: Vec<Matrix>,
    pub d: Vec<Vector>,
    pub r: Vec<Matrix>,
}

impl ChannelSeries {
    pub fn order(&self) -> usize {
        self.t.len().saturating_sub(1)
    }

    /// Sums the truncated series at `dt`.
    pub fn evaluate(&self, dt: f64) -> GaussianChannel {
        let dim = self.t[0].nrows();
        let mut c = GaussianChannel {
            t: Matrix::zeros(dim, dim),
            d: Vector::zeros(dim),
            r: Matrix::zeros(dim, dim),
        };
        let mut p = 1.0;
        for k in 0..self.t.len() {
            c.t += &self.t[k] * p;
            c.d += &self.d[k] * p;
            c.r += &self.r[k] * p;
            p *= dt;
        }
        c
    }
}

pub const MAX_CHANNEL_TAYLOR_ORDER: usize = 4;

/// Exact Taylor coefficients of [`reduce_from_joint`] about `dt = 0`, read
/// off the power series of `exp(Omega_SA F_SA dt)`. The setup's own `dt`
/// is ignored.
pub fn channel_taylor(j: &JointSetup, order: usize) -> Result<ChannelSeries> {
    if order > MAX_CHANNEL_TAYLOR_ORDER {
        return Err(Error::InvalidArgument(format!(
            "channel Taylor order {order} exceeds {MAX_CHANNEL_TAYLOR_ORDER}"
        )));
    }
    j.validate()?;
    let (ds, da) = (j.system_dim(), j.ancilla_dim());
    let (gen, shift) = j.joint_generator();

    let mut powers = vec![Matrix::identity(ds + da, ds + da)];
    for k in 1..=order {
        powers.push(&powers[k - 1] * &gen);
    }
    let mut factorial = 1.0;
    let mut t = Vec::with_capacity(order + 1);
    let mut d = Vec::with_capacity(order + 1);
    let mut m_sa = Vec::with_capacity(order + 1);
    for (k, p) in powers.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        t.push(p.view((0, 0), (ds, ds)) / factorial);
        let block = p.view((0, ds), (ds, da)) / factorial;
        if k == 0 {
            d.push(Vector::zeros(ds));
        } else {
            let drift = (&powers[k - 1] * &shift).rows(0, ds) / factorial;
            d.push(&block * &j.ancilla.mean + drift);
        }
        m_sa.push(block);
    }
    let r = (0..=order)
        .map(|k| {
            let mut acc = Matrix::zeros(ds, ds);
            for i in 1..k {
                acc += &m_sa[i] * &j.ancilla.cov * m_sa[k - i].transpose();
            }
            linalg::symmetrize(&acc)
        })
        .collect();
    Ok(ChannelSeries { t, d, r })
}
