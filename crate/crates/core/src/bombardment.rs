//! Power series of the interpolation generators in the step duration `dt`,
//! the purification predicates, and truncated complete-positivity checks.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSeries, CpReport, JointSetup};
use crate::error::{Error, Result};
use crate::interpolation::{cp_differential_check_with, Generators};
use crate::linalg::{self, Matrix, Vector};
use crate::phase_space::{modes_for_dim, omega};
use crate::tolerances::Tolerances;

/// Highest generator order obtainable from a channel series.
pub const MAX_SERIES_ORDER: usize = 3;
/// Highest order with closed-form coefficients.
pub const MAX_CLOSED_FORM_ORDER: usize = 2;

/// One coefficient triple `(A_k, b_k, C_k)` of `dt^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub k: usize,
    #[serde(rename = "A", with = "crate::serde_mat::matrix")]
    pub a: Matrix,
    #[serde(with = "crate::serde_mat::vector")]
    pub b: Vector,
    #[serde(rename = "C", with = "crate::serde_mat::matrix")]
    pub c: Matrix,
}

/// Generators expanded as `A = sum_k A_k dt^k` (likewise `b`, `C`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorSeries {
    pub terms: Vec<SeriesTerm>,
}

impl GeneratorSeries {
    pub fn order(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    pub fn term(&self, k: usize) -> Option<&SeriesTerm> {
        self.terms.get(k)
    }

    /// The order-`k` coefficients alone, as a generator triple.
    pub fn coefficient(&self, k: usize) -> Result<Generators> {
        let t = self.term(k).ok_or_else(|| self.order_error(k))?;
        Ok(Generators {
            a: t.a.clone(),
            b: t.b.clone(),
            c: t.c.clone(),
        })
    }

    /// Partial sum through order `k` evaluated at `dt`.
    pub fn truncated(&self, k: usize, dt: f64) -> Result<Generators> {
        if k > self.order() || self.terms.is_empty() {
            return Err(self.order_error(k));
        }
        let mut g = Generators::zeros(self.terms[0].b.len());
        let mut p = 1.0;
        for t in &self.terms[..=k] {
            g.a += &t.a * p;
            g.b += &t.b * p;
            g.c += &t.c * p;
            p *= dt;
        }
        Ok(g)
    }

    fn order_error(&self, k: usize) -> Error {
        Error::InvalidArgument(format!(
            "order {k} requested from a series of order {}",
            self.order()
        ))
    }
}

/// Truncated product of two matrix power series.
fn series_mul(a: &[Matrix], b: &[Matrix], order: usize) -> Vec<Matrix> {
    let (r, c) = (a[0].nrows(), b[0].ncols());
    (0..=order)
        .map(|k| {
            let mut acc = Matrix::zeros(r, c);
            for i in 0..=k.min(a.len() - 1) {
                if k - i < b.len() {
                    acc += &a[i] * &b[k - i];
                }
            }
            acc
        })
        .collect()
}

/// Series of `Log(I + E) / E = sum_m (-1)^m / (m + 1) E^m` for `E` with no
/// constant term.
fn log_div_series(e: &[Matrix], order: usize) -> Vec<Matrix> {
    let n = e[0].nrows();
    let mut power = vec![Matrix::zeros(n, n); order + 1];
    power[0] = Matrix::identity(n, n);
    let mut out = power.clone();
    for m in 1..=order {
        power = series_mul(&power, e, order);
        let c = if m % 2 == 0 { 1.0 } else { -1.0 } / (m + 1) as f64;
        for (o, p) in out.iter_mut().zip(&power) {
            *o += p * c;
        }
    }
    out
}

/// Generator coefficients through order `k` from the Taylor coefficients of
/// a channel, which must reach order `k + 1`.
///
/// With `E = T - I` the drift series is that of `Log(I + E)`, the
/// displacement series that of `Log(T)/(T - I) d`, and the noise series
/// that of `Log(T ⊗ T)/(T ⊗ T - I) vec R`, each shifted down by one order.
pub fn series_from_channel_series(ch: &ChannelSeries, k: usize) -> Result<GeneratorSeries> {
    if k > MAX_SERIES_ORDER {
        return Err(Error::MalformedSeries(format!(
            "order {k} exceeds {MAX_SERIES_ORDER}"
        )));
    }
    let need = k + 2;
    if ch.t.len() < need || ch.d.len() < need || ch.r.len() < need {
        return Err(Error::MalformedSeries(format!(
            "order {k} needs channel coefficients through order {}",
            k + 1
        )));
    }
    let dim = ch.t[0].nrows();
    let n = modes_for_dim(dim)?;
    let shapes_ok = ch.t[..need].iter().all(|m| m.shape() == (dim, dim))
        && ch.r[..need].iter().all(|m| m.shape() == (dim, dim))
        && ch.d[..need].iter().all(|v| v.len() == dim);
    if !shapes_ok {
        return Err(Error::MalformedSeries("inconsistent coefficient shapes".into()));
    }
    let tol = Tolerances::default().symmetry;
    if (&ch.t[0] - Matrix::identity(dim, dim)).amax() > tol
        || ch.d[0].amax() > tol
        || ch.r[0].amax() > tol
    {
        return Err(Error::MalformedSeries(
            "zeroth-order channel must be the identity".into(),
        ));
    }

    let order = k + 1;
    let mut e: Vec<Matrix> = ch.t[..=order].to_vec();
    e[0] = Matrix::zeros(dim, dim);
    let l = log_div_series(&e, order);
    let log_t = series_mul(&e, &l, order);
    let d_cols: Vec<Matrix> = ch.d[..=order].iter().map(|v| Matrix::from_column_slice(dim, 1, v.as_slice())).collect();
    let shift = series_mul(&l, &d_cols, order);

    let mut e2 = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let mut acc = Matrix::zeros(dim * dim, dim * dim);
        for i in 0..=m {
            acc += linalg::tensor_product(&ch.t[i], &ch.t[m - i]);
        }
        if m == 0 {
            acc.fill(0.0);
        }
        e2.push(acc);
    }
    let l2 = log_div_series(&e2, order);
    let r_cols: Vec<Matrix> = ch.r[..=order]
        .iter()
        .map(|r| {
            let v = linalg::vec(r);
            Matrix::from_column_slice(v.len(), 1, v.as_slice())
        })
        .collect();
    let noise = series_mul(&l2, &r_cols, order);

    let w = omega(n);
    let mut terms = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let c_vec = Vector::from_column_slice(noise[j + 1].as_slice());
        terms.push(SeriesTerm {
            k: j,
            a: -(&w * &log_t[j + 1]),
            b: -(&w * Vector::from_column_slice(shift[j + 1].as_slice())),
            c: linalg::symmetrize(&linalg::unvec(&c_vec, dim, dim)?),
        });
    }
    Ok(GeneratorSeries { terms })
}

/// Closed-form generator coefficients through order `k <= 2` in terms of the
/// Hamiltonian blocks, the coupling and the ancilla moments.
pub fn closed_form_series(j: &JointSetup, k: usize) -> Result<GeneratorSeries> {
    if k > MAX_CLOSED_FORM_ORDER {
        return Err(Error::InvalidArgument(format!(
            "closed-form series only reaches order {MAX_CLOSED_FORM_ORDER}"
        )));
    }
    j.validate()?;
    let ws = omega(j.system_dim() / 2);
    let wa = omega(j.ancilla_dim() / 2);
    let (fs, fa, g) = (&j.f_s, &j.f_a, &j.g);
    let gt = g.transpose();
    let (xa, sa) = (&j.ancilla.mean, &j.ancilla.cov);
    let (al_s, al_a) = (&j.alpha_s, &j.alpha_a);

    let g_wa = g * &wa;
    let g_wa_gt = &g_wa * &gt;
    let g_wa_fa = &g_wa * fa;
    let g_wa_fa_wa = &g_wa_fa * &wa;
    let fs_ws = fs * &ws;
    let ws_g = &ws * g;
    let ws_t = ws.transpose();

    let mut terms = vec![SeriesTerm {
        k: 0,
        a: fs.clone(),
        b: al_s + g * xa,
        c: Matrix::zeros(fs.nrows(), fs.ncols()),
    }];
    if k >= 1 {
        terms.push(SeriesTerm {
            k: 1,
            a: &g_wa_gt * 0.5,
            b: (&g_wa_fa * xa + &g_wa * al_a) * 0.5,
            c: linalg::symmetrize(&(&ws_g * sa * &gt * &ws_t)),
        });
    }
    if k >= 2 {
        let a2 = (&g_wa_gt * &ws * fs) * (-1.0 / 12.0) + (&fs_ws * &g_wa_gt) * (-1.0 / 12.0)
            + (&g_wa_fa_wa * &gt) * (1.0 / 6.0);
        let b2 = (&fs_ws * &g_wa * al_a) * (-1.0 / 12.0)
            + (&g_wa_fa_wa * al_a) * (1.0 / 6.0)
            + (&fs_ws * &g_wa_fa * xa) * (-1.0 / 12.0)
            + (&g_wa_fa_wa * fa * xa) * (1.0 / 6.0)
            + (&g_wa_gt * &ws * al_s) * (-1.0 / 12.0)
            + (&g_wa_gt * &ws * g * xa) * (-1.0 / 12.0);
        let wf = &wa * fa;
        let inner = &wf * sa + sa * wf.transpose();
        let c2 = (&ws_g * inner * &gt * &ws_t) * 0.5;
        terms.push(SeriesTerm {
            k: 2,
            a: a2,
            b: b2,
            c: linalg::symmetrize(&c2),
        });
    }
    Ok(GeneratorSeries { terms })
}

pub fn can_purify(a: &Matrix) -> Result<bool> {
    can_purify_with(a, &Tolerances::default())
}

/// Some state has increasing purity under drift `Omega A` iff `tr(Omega A) < 0`.
pub fn can_purify_with(a: &Matrix, tol: &Tolerances) -> Result<bool> {
    let dim = linalg::ensure_square(a)?;
    let n = modes_for_dim(dim)?;
    Ok((omega(n) * a).trace() < -tol.purify)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurifyReport {
    pub purifies: bool,
    pub value: f64,
}

/// First-order purification test `tr(Omega_S G Omega_A G^T) / 2 < 0` for a
/// `2N_S x 2N_A` coupling block.
pub fn first_order_purify(g: &Matrix) -> Result<PurifyReport> {
    let n_s = modes_for_dim(g.nrows())?;
    let n_a = modes_for_dim(g.ncols())?;
    let value = 0.5 * (omega(n_s) * g * omega(n_a) * g.transpose()).trace();
    Ok(PurifyReport {
        purifies: value < -Tolerances::default().purify,
        value,
    })
}

/// `u v^T`.
pub fn rank_one_coupling(u: &Vector, v: &Vector) -> Matrix {
    u * v.transpose()
}

pub fn truncated_cp_check(series: &GeneratorSeries, k: usize, dt: f64) -> Result<CpReport> {
    truncated_cp_check_with(series, k, dt, &Tolerances::default())
}

/// Differential complete-positivity test of the series truncated at order `k`.
pub fn truncated_cp_check_with(
    series: &GeneratorSeries,
    k: usize,
    dt: f64,
    tol: &Tolerances,
) -> Result<CpReport> {
    cp_differential_check_with(&series.truncated(k, dt)?, tol)
}

/// Single-mode system and ancilla with Hamiltonians `e_s I`, `e_a I`, a
/// position-position coupling of strength `g`, and a ground-state ancilla.
pub fn position_coupled_setup(e_s: f64, e_a: f64, g: f64, dt: f64) -> JointSetup {
    let mut coupling = Matrix::zeros(2, 2);
    coupling[(0, 0)] = g;
    JointSetup {
        f_s: Matrix::identity(2, 2) * e_s,
        alpha_s: Vector::zeros(2),
        f_a: Matrix::identity(2, 2) * e_a,
        alpha_a: Vector::zeros(2),
        g: coupling,
        ancilla: crate::phase_space::GaussianState::vacuum(1),
        dt,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpViolation {
    pub setup: JointSetup,
    pub order: usize,
    pub margin: f64,
}

/// Grid search over position-coupled setups for the most negative
/// truncated-generator margin at the given order. The step duration of
/// each candidate is stored in the returned setup.
pub fn search_cp_violation(
    order: usize,
    energies: &[f64],
    couplings: &[f64],
    steps: &[f64],
) -> Result<Option<CpViolation>> {
    let mut worst: Option<CpViolation> = None;
    for &e_s in energies {
        for &e_a in energies {
            for &g in couplings {
                let base = position_coupled_setup(e_s, e_a, g, 0.0);
                let series = channel_route_series(&base, order)?;
                for &dt in steps {
                    let margin = truncated_cp_check(&series, order, dt)?.margin;
                    if worst.as_ref().is_none_or(|w| margin < w.margin) {
                        worst = Some(CpViolation {
                            setup: base.with_dt(dt),
                            order,
                            margin,
                        });
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Generator series of a setup through order `k <= 3` via the channel
/// Taylor coefficients.
pub fn channel_route_series(j: &JointSetup, k: usize) -> Result<GeneratorSeries> {
    let ch = crate::channel::channel_taylor(j, k + 1)?;
    series_from_channel_series(&ch, k)
}
