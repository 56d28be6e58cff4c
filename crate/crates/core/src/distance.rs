//! Association distances between a measurement and a predicted-measurement
//! density.
//!
//! The association log-likelihood distance is `−2` times the log of the
//! measurement-to-track association likelihood (times `P_D`):
//!
//! ```text
//! d²_AssoLL = ΔᵀΣ⁻¹Δ + ln|Σ| + n·ln(2π) − 2·ln(P_D)
//! ```
//!
//! with the measurement volume fixed to one unit, so its logarithm vanishes.
//! The first term is the squared Mahalanobis distance. `n` is always the
//! runtime length of `Δ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::allocator::Allocator;
use nalgebra::{DefaultAllocator, Dim, OMatrix, OVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{cholesky_lower, quadratic_and_log_det};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceKind {
    Mahalanobis,
    AssociationLogLikelihood,
    /// The log-likelihood distance with the `n·ln(2π)` term dropped.
    AssociationLogLikelihoodNoDimTerm,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [
        DistanceKind::Mahalanobis,
        DistanceKind::AssociationLogLikelihood,
        DistanceKind::AssociationLogLikelihoodNoDimTerm,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            DistanceKind::Mahalanobis => "maha",
            DistanceKind::AssociationLogLikelihood => "asso-ll",
            DistanceKind::AssociationLogLikelihoodNoDimTerm => "asso-ll-no-dim",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "maha" | "mahalanobis" => Ok(DistanceKind::Mahalanobis),
            "asso-ll" | "assoll" | "asso_ll" => Ok(DistanceKind::AssociationLogLikelihood),
            "asso-ll-no-dim" | "asso-ll-nodim" | "asso_ll_no_dim" => {
                Ok(DistanceKind::AssociationLogLikelihoodNoDimTerm)
            }
            other => Err(Error::invalid(
                "distance",
                format!("unknown distance `{other}` (expected maha, asso-ll or asso-ll-no-dim)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceContext {
    detection_probability: f64,
}

impl DistanceContext {
    pub fn new(detection_probability: f64) -> Result<Self> {
        if !(detection_probability > 0.0 && detection_probability <= 1.0) {
            return Err(Error::invalid(
                "detection_probability",
                format!("must lie in (0, 1], got {detection_probability}"),
            ));
        }
        Ok(Self {
            detection_probability,
        })
    }

    pub fn detection_probability(&self) -> f64 {
        self.detection_probability
    }
}

impl Default for DistanceContext {
    fn default() -> Self {
        Self {
            detection_probability: 1.0,
        }
    }
}

/// The ingredients shared by all distances for one `(Δ, Σ)` pair, so a
/// single factorization can serve several distance kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationTerms {
    pub mahalanobis_sq: f64,
    pub log_det: f64,
    pub dim: usize,
}

impl InnovationTerms {
    pub fn new<D: Dim>(delta: &OVector<f64, D>, sigma: &OMatrix<f64, D, D>) -> Result<Self>
    where
        DefaultAllocator: Allocator<D> + Allocator<D, D>,
    {
        Error::check_dim("innovation", sigma.nrows(), delta.nrows())?;
        let lower = cholesky_lower(sigma)?;
        Ok(Self::from_cholesky(&lower, delta))
    }

    /// From an already validated lower Cholesky factor of `Σ`.
    pub fn from_cholesky<D: Dim>(lower: &OMatrix<f64, D, D>, delta: &OVector<f64, D>) -> Self
    where
        DefaultAllocator: Allocator<D> + Allocator<D, D>,
    {
        let (mahalanobis_sq, log_det) = quadratic_and_log_det(lower, delta);
        Self {
            mahalanobis_sq,
            log_det,
            dim: delta.nrows(),
        }
    }

    pub fn distance(&self, kind: DistanceKind, ctx: &DistanceContext) -> f64 {
        let likelihood_terms = || self.log_det - 2.0 * ctx.detection_probability.ln();
        match kind {
            DistanceKind::Mahalanobis => self.mahalanobis_sq,
            DistanceKind::AssociationLogLikelihood => {
                self.mahalanobis_sq + likelihood_terms() + self.dim as f64 * (2.0 * PI).ln()
            }
            DistanceKind::AssociationLogLikelihoodNoDimTerm => self.mahalanobis_sq + likelihood_terms(),
        }
    }
}

/// `Δᵀ Σ⁻¹ Δ`
pub fn mahalanobis_sq<D: Dim>(delta: &OVector<f64, D>, sigma: &OMatrix<f64, D, D>) -> Result<f64>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    Ok(InnovationTerms::new(delta, sigma)?.mahalanobis_sq)
}

/// `(μ₁ − μ₂)ᵀ (Σ₁ + Σ₂)⁻¹ (μ₁ − μ₂)`
pub fn generalized_mahalanobis_sq<D: Dim>(
    mu1: &OVector<f64, D>,
    sigma1: &OMatrix<f64, D, D>,
    mu2: &OVector<f64, D>,
    sigma2: &OMatrix<f64, D, D>,
) -> Result<f64>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    Error::check_dim("generalized Mahalanobis means", mu1.nrows(), mu2.nrows())?;
    Error::check_dim("generalized Mahalanobis covariances", sigma1.nrows(), sigma2.nrows())?;
    mahalanobis_sq(&(mu1 - mu2), &(sigma1 + sigma2))
}

pub fn asso_ll_sq<D: Dim>(
    delta: &OVector<f64, D>,
    sigma: &OMatrix<f64, D, D>,
    ctx: &DistanceContext,
    kind: DistanceKind,
) -> Result<f64>
where
    DefaultAllocator: Allocator<D> + Allocator<D, D>,
{
    Ok(InnovationTerms::new(delta, sigma)?.distance(kind, ctx))
}
