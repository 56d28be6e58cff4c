use std::io::Write;

use assoc_core::{asso_ll_sq, mahalanobis_sq, DistanceContext, DistanceKind};
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, Result};
use crate::manifest::{output_name, Job, RunManifest};
use crate::{write_file, write_stdout, CurveArgs};

pub const CSV_COLUMNS: &str = "variance,d2_maha,d2_asso_ll";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub variance: f64,
    pub d2_maha: f64,
    pub d2_asso_ll: f64,
}

/// `min, min + step, …` up to `max` (inclusive within half a step).
pub fn variance_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && step > 0.0 && max >= min && max.is_finite()) {
        return Err(CliError::config(format!(
            "variance grid: need 0 < min <= max and step > 0, got min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// Both squared distances of a scalar innovation `delta_z` with variance `σ²`, at `P_D = 1`.
pub fn curve(delta_z: f64, variances: &[f64]) -> Result<Vec<CurvePoint>> {
    let ctx = DistanceContext::default();
    let delta = DVector::from_element(1, delta_z);
    variances
        .iter()
        .map(|&variance| {
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(CliError::config(format!("variance grid: non-positive variance {variance}")));
            }
            let sigma = DMatrix::from_element(1, 1, variance);
            Ok(CurvePoint {
                variance,
                d2_maha: mahalanobis_sq(&delta, &sigma)?,
                d2_asso_ll: asso_ll_sq(&delta, &sigma, &ctx, DistanceKind::AssociationLogLikelihood)?,
            })
        })
        .collect()
}

pub fn render(manifest: &RunManifest, points: &[CurvePoint]) -> String {
    let mut csv = manifest.csv_header();
    csv.push_str(CSV_COLUMNS);
    csv.push('\n');
    for p in points {
        csv.push_str(&format!("{:.6},{:.10},{:.10}\n", p.variance, p.d2_maha, p.d2_asso_ll));
    }
    csv
}

pub fn run(args: &CurveArgs, stdout: &mut dyn Write) -> Result<()> {
    let (delta_z, variances) = match &args.manifest {
        Some(path) => match RunManifest::load(path)?.job {
            Job::Curve { delta_z, variances } => (delta_z, variances),
            _ => return Err(CliError::config(format!("{}: not a curve manifest", path.display()))),
        },
        None => {
            let variances = match &args.variances {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| CliError::config(format!("field `variances`: {s:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => variance_grid(args.min, args.max, args.step)?,
            };
            (args.delta_z, variances)
        }
    };
    if !delta_z.is_finite() {
        return Err(CliError::config("field `delta_z`: must be finite"));
    }
    let points = curve(delta_z, &variances)?;
    let manifest = RunManifest::new(Job::Curve { delta_z, variances }, vec![output_name(args.out.as_deref())]);
    let csv = render(&manifest, &points);
    match &args.out {
        Some(path) => write_file(path, &csv),
        None => write_stdout(stdout, &csv),
    }
}
