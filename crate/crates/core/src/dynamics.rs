//! White-noise-acceleration kinematics and the steady-state predicted
//! covariance from the discrete algebraic Riccati equation.

use nalgebra::allocator::Allocator;
use nalgebra::{
    DMatrix, DefaultAllocator, Dim, Dyn, Matrix1, Matrix1x4, Matrix2, Matrix2x4, Matrix4, Matrix4x2, OMatrix,
    Vector4, U4,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::cholesky_lower;

/// Default time step in seconds.
pub const DEFAULT_DT: f64 = 0.1;

/// Planar state `(x, y, ẋ, ẏ)` in m and m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub Vector4<f64>);

impl StateVector {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self(Vector4::new(x, y, vx, vy))
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn vx(&self) -> f64 {
        self.0[2]
    }

    pub fn vy(&self) -> f64 {
        self.0[3]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Discrete white-noise-acceleration model `ξ(k+1) = F ξ(k) + G ν(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicModel {
    dt: f64,
    transition: Matrix4<f64>,
    noise_gain: Matrix4x2<f64>,
}

impl KinematicModel {
    pub const LABEL: &'static str = "white-noise-acceleration";

    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("time step must be positive, got {dt}")));
        }
        #[rustfmt::skip]
        let transition = Matrix4::new(
            1.0, 0.0, dt,  0.0,
            0.0, 1.0, 0.0, dt,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let half_sq = dt * dt / 2.0;
        #[rustfmt::skip]
        let noise_gain = Matrix4x2::new(
            half_sq, 0.0,
            0.0,     half_sq,
            dt,      0.0,
            0.0,     dt,
        );
        Ok(Self {
            dt,
            transition,
            noise_gain,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `F(Δt)`
    pub fn transition(&self) -> &Matrix4<f64> {
        &self.transition
    }

    /// `G(Δt)`
    pub fn noise_gain(&self) -> &Matrix4x2<f64> {
        &self.noise_gain
    }

    pub fn label(&self) -> &'static str {
        Self::LABEL
    }
}

/// The linear output models used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementModel {
    /// Position `(x, y)`.
    H1,
    /// `(x − y, y)`.
    H2,
    /// First row of `H1`: `x` only.
    H11,
}

impl MeasurementModel {
    pub fn dim(self) -> usize {
        match self {
            MeasurementModel::H1 | MeasurementModel::H2 => 2,
            MeasurementModel::H11 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MeasurementModel::H1 => "H1",
            MeasurementModel::H2 => "H2",
            MeasurementModel::H11 => "H11",
        }
    }

    pub fn matrix(self) -> OMatrix<f64, Dyn, U4> {
        match self {
            MeasurementModel::H11 => OMatrix::<f64, Dyn, U4>::from_row_slice(self.matrix1().as_slice()),
            _ => {
                let m = self.matrix2();
                OMatrix::<f64, Dyn, U4>::from_fn(2, |r, c| m[(r, c)])
            }
        }
    }

    /// Fixed-size form of a two-row model. Panics for `H11`.
    pub fn matrix2(self) -> Matrix2x4<f64> {
        match self {
            MeasurementModel::H1 => Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            MeasurementModel::H2 => Matrix2x4::new(1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            MeasurementModel::H11 => panic!("H11 has a single row"),
        }
    }

    pub fn matrix1(self) -> Matrix1x4<f64> {
        match self {
            MeasurementModel::H11 => Matrix1x4::new(1.0, 0.0, 0.0, 0.0),
            other => panic!("{} has two rows", other.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    /// Convergence threshold on the Frobenius norm of `map(P) − P`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution<S: Dim>
where
    DefaultAllocator: Allocator<S, S>,
{
    pub covariance: OMatrix<f64, S, S>,
    pub iterations: usize,
    /// Frobenius residual of the returned covariance.
    pub residual: f64,
    /// Residuals of (up to) the last ten iterates, oldest first.
    pub recent_residuals: Vec<f64>,
}

/// One application of the Riccati map
/// `P ↦ F P Fᵀ − F P Hᵀ (H P Hᵀ + R)⁻¹ H P Fᵀ + G V Gᵀ`.
pub fn riccati_map<S: Dim, M: Dim>(
    p: &OMatrix<f64, S, S>,
    f: &OMatrix<f64, S, S>,
    h: &OMatrix<f64, M, S>,
    r: &OMatrix<f64, M, M>,
    process: &OMatrix<f64, S, S>,
) -> Result<OMatrix<f64, S, S>>
where
    DefaultAllocator: Allocator<S, S> + Allocator<M, S> + Allocator<S, M> + Allocator<M, M>,
{
    let innovation = h * p * h.transpose() + r;
    let lower = innovation.cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
    let hpf = h * p * f.transpose();
    let whitened = lower
        .solve_lower_triangular(&hpf)
        .ok_or(Error::NotPositiveDefinite)?;
    Ok(f * p * f.transpose() - whitened.transpose() * whitened + process)
}

/// Fixed-point iteration of the Riccati map from `initial` (default `G V Gᵀ`),
/// symmetrizing each iterate.
pub fn solve_dare<S: Dim, M: Dim, W: Dim>(
    f: &OMatrix<f64, S, S>,
    g: &OMatrix<f64, S, W>,
    h: &OMatrix<f64, M, S>,
    v: &OMatrix<f64, W, W>,
    r: &OMatrix<f64, M, M>,
    initial: Option<&OMatrix<f64, S, S>>,
    options: &RiccatiOptions,
) -> Result<RiccatiSolution<S>>
where
    DefaultAllocator: Allocator<S, S>
        + Allocator<S, W>
        + Allocator<W, S>
        + Allocator<W, W>
        + Allocator<M, S>
        + Allocator<S, M>
        + Allocator<M, M>,
{
    Error::check_dim("Riccati F", f.nrows(), f.ncols())?;
    Error::check_dim("Riccati G rows", f.nrows(), g.nrows())?;
    Error::check_dim("Riccati H columns", f.nrows(), h.ncols())?;
    Error::check_dim("Riccati V", g.ncols(), v.nrows())?;
    Error::check_dim("Riccati R", h.nrows(), r.nrows())?;
    cholesky_lower(v)?;
    cholesky_lower(r)?;

    let process = g * v * g.transpose();
    let mut p = match initial {
        Some(p0) => {
            Error::check_dim("Riccati initial covariance", f.nrows(), p0.nrows())?;
            p0.clone()
        }
        None => process.clone(),
    };
    let mut recent = Vec::with_capacity(10);
    let mut residual = f64::INFINITY;
    for iteration in 0..options.max_iterations {
        let next = riccati_map(&p, f, h, r, &process)?;
        residual = (&next - &p).norm();
        if recent.len() == 10 {
            recent.remove(0);
        }
        recent.push(residual);
        if residual < options.tolerance {
            // one more step is at least as close to the fixed point when the map contracts
            let candidate = (&next + next.transpose()) * 0.5;
            let follow = riccati_map(&candidate, f, h, r, &process)?;
            let candidate_residual = (&follow - &candidate).norm();
            let (covariance, residual) = if candidate_residual <= residual {
                recent.remove(0);
                recent.push(candidate_residual);
                (candidate, candidate_residual)
            } else {
                (p, residual)
            };
            return Ok(RiccatiSolution {
                covariance,
                iterations: iteration + 1,
                residual,
                recent_residuals: recent,
            });
        }
        if !residual.is_finite() {
            break;
        }
        p = (&next + next.transpose()) * 0.5;
    }
    Err(Error::NoConvergence {
        iterations: options.max_iterations,
        residual,
    })
}

/// Steady-state predicted covariance `P⁻∞` for the kinematic model observed
/// through `measurement` with process noise `v` and measurement noise `r`.
pub fn steady_state_predicted_cov(
    model: &KinematicModel,
    measurement: MeasurementModel,
    v: &Matrix2<f64>,
    r: &DMatrix<f64>,
) -> Result<Matrix4<f64>> {
    let n = measurement.dim();
    Error::check_dim("measurement noise", n, r.nrows())?;
    Error::check_dim("measurement noise (square)", n, r.ncols())?;
    let options = RiccatiOptions::default();
    let f = model.transition();
    let g = model.noise_gain();
    let solution = match measurement {
        MeasurementModel::H11 => {
            let r1 = Matrix1::new(r[(0, 0)]);
            solve_dare(f, g, &measurement.matrix1(), v, &r1, None, &options)?
        }
        _ => {
            let r2 = Matrix2::new(r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]);
            solve_dare(f, g, &measurement.matrix2(), v, &r2, None, &options)?
        }
    };
    Ok(solution.covariance)
}

/// Fixed-size variant of [`steady_state_predicted_cov`] for two-row models.
pub fn steady_state_predicted_cov2(
    model: &KinematicModel,
    measurement: MeasurementModel,
    v: &Matrix2<f64>,
    r: &Matrix2<f64>,
) -> Result<Matrix4<f64>> {
    let solution = solve_dare(
        model.transition(),
        model.noise_gain(),
        &measurement.matrix2(),
        v,
        r,
        None,
        &RiccatiOptions::default(),
    )?;
    Ok(solution.covariance)
}
