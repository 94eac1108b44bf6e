//! Sorting generators into eleven kinds of dynamics by expanding every 2x2
//! mode block over `{I, omega, X, Z}`.

use serde::{Deserialize, Serialize};

use crate::bombardment::GeneratorSeries;
use crate::error::{Error, Result};
use crate::interpolation::Generators;
use crate::linalg::{self, Matrix};
use crate::phase_space::{modes_for_dim, omega2};
use crate::thermal::{pauli_x, pauli_z};
use crate::tolerances::Tolerances;

/// Coefficients of one 2x2 block over `{I, omega, X, Z}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockCoefficients {
    pub c_i: f64,
    pub c_omega: f64,
    pub c_x: f64,
    pub c_z: f64,
}

impl BlockCoefficients {
    /// The basis is orthogonal under `<A, B> = tr(A^T B)` with every
    /// element of squared norm 2.
    pub fn of(block: &Matrix) -> Self {
        let proj = |b: Matrix| (b.transpose() * block).trace() / 2.0;
        Self {
            c_i: proj(Matrix::identity(2, 2)),
            c_omega: proj(omega2()),
            c_x: proj(pauli_x()),
            c_z: proj(pauli_z()),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::identity(2, 2) * self.c_i
            + omega2() * self.c_omega
            + pauli_x() * self.c_x
            + pauli_z() * self.c_z
    }

    fn rotation_like(&self) -> f64 {
        self.c_i.abs().max(self.c_omega.abs())
    }

    fn squeezing_like(&self) -> f64 {
        self.c_x.abs().max(self.c_z.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub n_modes: usize,
    /// Row-major, `blocks[i][j]` for modes `i` and `j`.
    pub blocks: Vec<Vec<BlockCoefficients>>,
}

impl BlockDecomposition {
    pub fn block(&self, i: usize, j: usize) -> &BlockCoefficients {
        &self.blocks[i][j]
    }

    pub fn reconstruct(&self) -> Matrix {
        let dim = 2 * self.n_modes;
        let mut m = Matrix::zeros(dim, dim);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&b.to_matrix());
            }
        }
        m
    }
}

pub fn block_decompose(m: &Matrix) -> Result<BlockDecomposition> {
    let dim = linalg::ensure_square(m)?;
    let n = modes_for_dim(dim)?;
    let blocks = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BlockCoefficients::of(&m.view((2 * i, 2 * j), (2, 2)).into_owned()))
                .collect()
        })
        .collect();
    Ok(BlockDecomposition { n_modes: n, blocks })
}

/// Which kinds of dynamics a generator triple contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub single_mode_rotation: bool,
    pub single_mode_squeezing: bool,
    pub displacement: bool,
    pub single_mode_squeezed_noise: bool,
    pub amplification_relaxation: bool,
    pub thermal_noise: bool,
    pub multimode_rotation: bool,
    pub multimode_squeezing: bool,
    pub multimode_counter_rotation: bool,
    pub multimode_noise: bool,
    pub multimode_counter_squeezing: bool,
}

impl DynamicsReport {
    pub fn flags(&self) -> [(&'static str, bool); 11] {
        [
            ("single_mode_rotation", self.single_mode_rotation),
            ("single_mode_squeezing", self.single_mode_squeezing),
            ("displacement", self.displacement),
            ("single_mode_squeezed_noise", self.single_mode_squeezed_noise),
            ("amplification_relaxation", self.amplification_relaxation),
            ("thermal_noise", self.thermal_noise),
            ("multimode_rotation", self.multimode_rotation),
            ("multimode_squeezing", self.multimode_squeezing),
            ("multimode_counter_rotation", self.multimode_counter_rotation),
            ("multimode_noise", self.multimode_noise),
            ("multimode_counter_squeezing", self.multimode_counter_squeezing),
        ]
    }

    /// Names of flags raised here but not in `allowed`.
    pub fn excess_over(&self, allowed: &DynamicsReport) -> Vec<&'static str> {
        self.flags()
            .iter()
            .zip(allowed.flags())
            .filter(|((_, mine), (_, ok))| *mine && !ok)
            .map(|((name, _), _)| *name)
            .collect()
    }

    pub fn is_subset_of(&self, allowed: &DynamicsReport) -> bool {
        self.excess_over(allowed).is_empty()
    }

    pub fn union(&self, other: &DynamicsReport) -> DynamicsReport {
        let mut out = *self;
        out.single_mode_rotation |= other.single_mode_rotation;
        out.single_mode_squeezing |= other.single_mode_squeezing;
        out.displacement |= other.displacement;
        out.single_mode_squeezed_noise |= other.single_mode_squeezed_noise;
        out.amplification_relaxation |= other.amplification_relaxation;
        out.thermal_noise |= other.thermal_noise;
        out.multimode_rotation |= other.multimode_rotation;
        out.multimode_squeezing |= other.multimode_squeezing;
        out.multimode_counter_rotation |= other.multimode_counter_rotation;
        out.multimode_noise |= other.multimode_noise;
        out.multimode_counter_squeezing |= other.multimode_counter_squeezing;
        out
    }
}

pub fn classify(g: &Generators) -> Result<DynamicsReport> {
    classify_with(g, Tolerances::default().classify)
}

/// A flag is raised when one of its coefficients exceeds `eps` times the
/// largest entry of `A`, `b` or `C`.
pub fn classify_with(g: &Generators, eps: f64) -> Result<DynamicsReport> {
    g.check_shape()?;
    let scale = g.a.amax().max(g.b.amax()).max(g.c.amax());
    let thr = eps * scale;
    let above = |x: f64| x > thr;

    let sym = linalg::symmetrize(&g.a);
    let anti = (&g.a - g.a.transpose()) * 0.5;
    let sym = block_decompose(&sym)?;
    let anti = block_decompose(&anti)?;
    let noise = block_decompose(&g.c)?;

    let mut r = DynamicsReport {
        displacement: above(g.b.amax()),
        ..Default::default()
    };
    let n = sym.n_modes;
    for i in 0..n {
        for j in 0..n {
            let (s, a, c) = (sym.block(i, j), anti.block(i, j), noise.block(i, j));
            if i == j {
                r.single_mode_rotation |= above(s.c_i.abs());
                r.single_mode_squeezing |= above(s.squeezing_like());
                r.amplification_relaxation |= above(a.c_omega.abs());
                r.thermal_noise |= above(c.c_i.abs());
                r.single_mode_squeezed_noise |= above(c.squeezing_like());
            } else {
                r.multimode_rotation |= above(s.rotation_like());
                r.multimode_squeezing |= above(s.squeezing_like());
                r.multimode_counter_rotation |= above(a.rotation_like());
                r.multimode_counter_squeezing |= above(a.squeezing_like());
                r.multimode_noise |= above(c.rotation_like().max(c.squeezing_like()));
            }
        }
    }
    Ok(r)
}

/// Kinds of dynamics that may appear at order `k`: free and induced at
/// zeroth order, then alternating between odd and even orders.
pub fn allowed_at_order(k: usize) -> DynamicsReport {
    if k == 0 {
        DynamicsReport {
            single_mode_rotation: true,
            single_mode_squeezing: true,
            displacement: true,
            multimode_rotation: true,
            multimode_squeezing: true,
            ..Default::default()
        }
    } else if k % 2 == 1 {
        DynamicsReport {
            displacement: true,
            single_mode_squeezed_noise: true,
            amplification_relaxation: true,
            thermal_noise: true,
            multimode_counter_rotation: true,
            multimode_noise: true,
            multimode_counter_squeezing: true,
            ..Default::default()
        }
    } else {
        DynamicsReport {
            single_mode_rotation: true,
            single_mode_squeezing: true,
            displacement: true,
            single_mode_squeezed_noise: true,
            thermal_noise: true,
            multimode_rotation: true,
            multimode_squeezing: true,
            multimode_noise: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Availability {
    pub order: usize,
    pub report: DynamicsReport,
    pub allowed: DynamicsReport,
    pub conforms: bool,
    pub excess: Vec<String>,
}

/// Classifies the order-`k` coefficients of a series and compares them
/// with what that order permits.
pub fn table_availability(series: &GeneratorSeries, k: usize) -> Result<Availability> {
    if k > series.order() {
        return Err(Error::InvalidArgument(format!(
            "order {k} requested from a series of order {}",
            series.order()
        )));
    }
    let report = classify(&series.coefficient(k)?)?;
    let allowed = allowed_at_order(k);
    let excess: Vec<String> = report.excess_over(&allowed).into_iter().map(String::from).collect();
    Ok(Availability {
        order: k,
        report,
        allowed,
        conforms: excess.is_empty(),
        excess,
    })
}
