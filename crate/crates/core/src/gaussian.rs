//! Multivariate Gaussian densities.
//!
//! Densities are generic over the nalgebra dimension so the Monte-Carlo hot
//! path can stay on stack-allocated matrices while library callers use the
//! dynamic [`DGaussian`] alias. All evaluation goes through the lower
//! Cholesky factor, which is computed once at construction.

use std::f64::consts::{PI, TAU};

use nalgebra::allocator::Allocator;
use nalgebra::{DMatrix, DefaultAllocator, Dim, Dyn, Matrix2, OMatrix, OVector, U1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Absolute per-entry tolerance for the covariance symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Gaussian with dynamically sized mean and covariance.
pub type DGaussian = GaussianDensity<Dyn>;

#[derive(Debug, Clone)]
pub struct GaussianDensity<D: Dim = Dyn>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    mean: OVector<f64, D>,
    covariance: OMatrix<f64, D, D>,
    cholesky_lower: OMatrix<f64, D, D>,
}

impl<D: Dim> PartialEq for GaussianDensity<D>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.covariance == other.covariance
    }
}

/// Checks symmetry and positive definiteness, returning the lower Cholesky
/// factor. Degenerate covariances are rejected, never regularized.
pub fn cholesky_lower<D: Dim>(covariance: &OMatrix<f64, D, D>) -> Result<OMatrix<f64, D, D>>
where
    DefaultAllocator: Allocator<D, D>,
{
    let (rows, cols) = covariance.shape();
    Error::check_dim("covariance (square)", rows, cols)?;
    if rows == 0 {
        return Err(Error::invalid("covariance", "dimension must be positive"));
    }
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("covariance", "entries must be finite"));
    }
    for row in 0..rows {
        for col in (row + 1)..cols {
            let diff = (covariance[(row, col)] - covariance[(col, row)]).abs();
            if diff > SYMMETRY_TOLERANCE {
                return Err(Error::NotSymmetric { row, col, diff });
            }
        }
    }
    let chol = covariance
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let lower = chol.unpack();
    if (0..rows).any(|i| !(lower[(i, i)] > 0.0 && lower[(i, i)].is_finite())) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(lower)
}

/// Squared Mahalanobis form `Δᵀ Σ⁻¹ Δ` and `ln|Σ|` from a lower Cholesky factor.
pub(crate) fn quadratic_and_log_det<D: Dim>(
    lower: &OMatrix<f64, D, D>,
    delta: &OVector<f64, D>,
) -> (f64, f64)
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    let whitened = lower
        .solve_lower_triangular(delta)
        .expect("Cholesky factor has a positive diagonal");
    let log_det = 2.0 * (0..lower.nrows()).map(|i| lower[(i, i)].ln()).sum::<f64>();
    (whitened.norm_squared(), log_det)
}

impl<D: Dim> GaussianDensity<D>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    pub fn new(mean: OVector<f64, D>, covariance: OMatrix<f64, D, D>) -> Result<Self> {
        Error::check_dim("Gaussian mean", covariance.nrows(), mean.nrows())?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mean", "entries must be finite"));
        }
        let cholesky_lower = cholesky_lower(&covariance)?;
        Ok(Self {
            mean,
            covariance,
            cholesky_lower,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.nrows()
    }

    pub fn mean(&self) -> &OVector<f64, D> {
        &self.mean
    }

    pub fn covariance(&self) -> &OMatrix<f64, D, D> {
        &self.covariance
    }

    pub fn cholesky_factor(&self) -> &OMatrix<f64, D, D> {
        &self.cholesky_lower
    }

    /// `ln 𝒩(point; μ, Σ) = −½ ΔᵀΣ⁻¹Δ − ½ ln|2πΣ|`.
    pub fn log_density(&self, point: &OVector<f64, D>) -> Result<f64> {
        Error::check_dim("log_density point", self.dim(), point.nrows())?;
        let delta = point - &self.mean;
        let (quad, log_det) = quadratic_and_log_det(&self.cholesky_lower, &delta);
        let n = self.dim() as f64;
        Ok(-0.5 * quad - 0.5 * (n * (2.0 * PI).ln() + log_det))
    }

    /// Draws `μ + L·w` with `w` standard normal from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OVector<f64, D> {
        let (dim, _) = self.mean.shape_generic();
        let white = OVector::<f64, D>::from_fn_generic(dim, U1, |_, _| rng.sample(StandardNormal));
        &self.mean + &self.cholesky_lower * white
    }

    /// Density of `z = H·x + r` with `x ~ self` and independent `r ~ 𝒩(0, noise)`:
    /// mean `H·μ`, covariance `H·P·Hᵀ + R`.
    pub fn propagate_linear<M: Dim>(
        &self,
        h: &OMatrix<f64, M, D>,
        noise: &OMatrix<f64, M, M>,
    ) -> Result<GaussianDensity<M>>
    where
        DefaultAllocator: Allocator<M> + Allocator<M, M> + Allocator<M, D> + Allocator<D, M>,
    {
        Error::check_dim("propagate_linear H columns", self.dim(), h.ncols())?;
        Error::check_dim("propagate_linear noise", h.nrows(), noise.nrows())?;
        cholesky_lower(noise)?;
        let mean = h * &self.mean;
        let projected = h * &self.covariance * h.transpose() + noise;
        let covariance = (&projected + projected.transpose()) * 0.5;
        GaussianDensity::new(mean, covariance)
    }
}

impl DGaussian {
    pub fn from_slices(mean: &[f64], covariance_row_major: &[f64]) -> Result<Self> {
        let n = mean.len();
        Error::check_dim("covariance entries", n * n, covariance_row_major.len())?;
        Self::new(
            nalgebra::DVector::from_column_slice(mean),
            DMatrix::from_row_slice(n, n, covariance_row_major),
        )
    }
}

/// Parameters for [`random_spd`]: one uniform range per diagonal entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpdSpec {
    diagonal_ranges: Vec<(f64, f64)>,
}

impl RandomSpdSpec {
    /// Every diagonal entry uniform in `[lower, upper)`.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![(lower, upper); dimension])
    }

    pub fn new(diagonal_ranges: Vec<(f64, f64)>) -> Result<Self> {
        let dimension = diagonal_ranges.len();
        if dimension != 2 && dimension != 4 {
            return Err(Error::invalid(
                "dimension",
                format!("random rotations are defined for 2 and 4 dimensions, got {dimension}"),
            ));
        }
        for &(lower, upper) in &diagonal_ranges {
            if !(lower > 0.0 && lower < upper && upper.is_finite()) {
                return Err(Error::invalid(
                    "diagonal_range",
                    format!("need 0 < lower < upper, got [{lower}, {upper}]"),
                ));
            }
        }
        Ok(Self { diagonal_ranges })
    }

    pub fn dimension(&self) -> usize {
        self.diagonal_ranges.len()
    }

    pub fn diagonal_ranges(&self) -> &[(f64, f64)] {
        &self.diagonal_ranges
    }
}

/// A random covariance together with the draws that produced it.
#[derive(Debug, Clone)]
pub struct SpdDraw {
    pub matrix: DMatrix<f64>,
    pub diagonal: Vec<f64>,
    pub angles: Vec<f64>,
}

/// Coordinate pairs rotated, in application order, for the 4-D construction.
pub const GIVENS_PAIRS_4D: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn givens(dimension: usize, p: usize, q: usize, angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    let mut g = DMatrix::identity(dimension, dimension);
    g[(p, p)] = c;
    g[(q, q)] = c;
    g[(p, q)] = -s;
    g[(q, p)] = s;
    g
}

/// Random symmetric positive definite matrix `Q·D·Qᵀ`.
///
/// `D` is diagonal with entries drawn uniformly from the spec's ranges; `Q` is
/// a rotation by a uniform angle in `[0, 2π)` (2-D) or the product of Givens
/// rotations over [`GIVENS_PAIRS_4D`] with independent uniform angles (4-D).
/// Diagonal entries are drawn first, then the angles.
pub fn random_spd<R: Rng + ?Sized>(spec: &RandomSpdSpec, rng: &mut R) -> SpdDraw {
    let dimension = spec.dimension();
    let diagonal: Vec<f64> = spec
        .diagonal_ranges
        .iter()
        .map(|&(lower, upper)| rng.random_range(lower..upper))
        .collect();
    let pairs: &[(usize, usize)] = if dimension == 2 {
        &[(0, 1)]
    } else {
        &GIVENS_PAIRS_4D
    };
    let angles: Vec<f64> = pairs.iter().map(|_| rng.random_range(0.0..TAU)).collect();

    let rotation = pairs
        .iter()
        .zip(&angles)
        .fold(DMatrix::<f64>::identity(dimension, dimension), |q, (&(p, r), &angle)| {
            q * givens(dimension, p, r, angle)
        });
    let scaled = &rotation * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&diagonal));
    let raw = scaled * rotation.transpose();
    let matrix = (&raw + raw.transpose()) * 0.5;
    SpdDraw {
        matrix,
        diagonal,
        angles,
    }
}

/// 2-D specialization of [`random_spd`] used on the simulation hot path.
/// Consumes the stream identically.
pub fn random_spd2<R: Rng + ?Sized>(spec: &RandomSpdSpec, rng: &mut R) -> Matrix2<f64> {
    debug_assert_eq!(spec.dimension(), 2);
    let [(l0, u0), (l1, u1)] = [spec.diagonal_ranges[0], spec.diagonal_ranges[1]];
    let d0 = rng.random_range(l0..u0);
    let d1 = rng.random_range(l1..u1);
    let angle: f64 = rng.random_range(0.0..TAU);
    let (s, c) = angle.sin_cos();
    let q = Matrix2::new(c, -s, s, c);
    let raw = q * Matrix2::new(d0, 0.0, 0.0, d1) * q.transpose();
    (raw + raw.transpose()) * 0.5
}
