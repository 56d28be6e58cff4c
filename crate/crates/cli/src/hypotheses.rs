use std::io::Write;
use std::path::Path;

use assoc_core::hypothesis::ENUMERATION_LIMIT;
use assoc_core::{
    count_hypotheses, enumerate_hypotheses, rng, score_hypothesis, DGaussian, HypothesisParams, JointHypothesis,
    Measurement, MeasurementModel, Origin, ScanInput,
};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::{write_stdout, HypothesesArgs};

pub const DEFAULT_PD: f64 = 0.9;
pub const DEFAULT_BETA_FD: f64 = 0.02;
pub const DEFAULT_BETA_NT: f64 = 0.005;

/// A scan stored as JSON:
///
/// ```json
/// {
///   "detection_probability": 0.9, "beta_fd": 0.02, "beta_nt": 0.005,
///   "tracks": [{ "mean": [0, 0, 1, 1], "covariance": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "model": "H1" }],
///   "measurements": [{ "value": [0.3, -0.2], "noise": [[0.5, 0], [0, 0.5]] }]
/// }
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub detection_probability: Option<f64>,
    pub beta_fd: Option<f64>,
    pub beta_nt: Option<f64>,
    pub tracks: Vec<TrackEntry>,
    pub measurements: Vec<MeasurementEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackEntry {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub model: MeasurementModel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementEntry {
    pub value: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
}

fn square(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::config(format!("field `{field}`: matrix must be square")));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn scan(&self) -> Result<ScanInput> {
        let tracks = self
            .tracks
            .iter()
            .map(|t| Ok(DGaussian::new(DVector::from_vec(t.mean.clone()), square("covariance", &t.covariance)?)?))
            .collect::<Result<Vec<_>>>()?;
        let models = self.tracks.iter().map(|t| t.model).collect();
        let measurements = self
            .measurements
            .iter()
            .map(|m| {
                Ok(Measurement {
                    value: DVector::from_vec(m.value.clone()),
                    noise: square("noise", &m.noise)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScanInput::new(tracks, models, measurements)?)
    }
}

pub fn describe(h: &JointHypothesis) -> String {
    let mut parts: Vec<String> = h
        .origins
        .iter()
        .enumerate()
        .map(|(j, o)| match o {
            Origin::Track(i) => format!("z{}->T{}", j + 1, i + 1),
            Origin::False => format!("z{}->false", j + 1),
            Origin::New => format!("z{}->new", j + 1),
        })
        .collect();
    parts.extend(h.missed_tracks().iter().map(|i| format!("T{}:missed", i + 1)));
    parts.join(" ")
}

pub fn run(args: &HypothesesArgs, out: &mut dyn Write) -> Result<()> {
    let count = count_hypotheses(args.n_tracks, args.n_detections)?;
    write_stdout(out, &format!("{count}\n"))?;
    if !args.enumerate {
        return Ok(());
    }
    if args.n_tracks + args.n_detections > ENUMERATION_LIMIT {
        return Err(CliError::config(format!(
            "--enumerate supports at most {ENUMERATION_LIMIT} tracks plus detections, got {}",
            args.n_tracks + args.n_detections
        )));
    }
    let (scan, file) = match &args.instance {
        Some(path) => {
            let file = InstanceFile::load(path)?;
            let scan = file.scan()?;
            if (scan.n_tracks(), scan.n_detections()) != (args.n_tracks, args.n_detections) {
                return Err(CliError::config(format!(
                    "{}: instance has {} tracks and {} detections, expected {} and {}",
                    path.display(),
                    scan.n_tracks(),
                    scan.n_detections(),
                    args.n_tracks,
                    args.n_detections
                )));
            }
            (scan, Some(file))
        }
        None => (
            ScanInput::random_toy(args.n_tracks, args.n_detections, &mut rng::stream(args.seed)),
            None,
        ),
    };
    let pick = |flag: Option<f64>, stored: Option<f64>, default: f64| flag.or(stored).unwrap_or(default);
    let params = HypothesisParams::new(
        pick(args.pd, file.as_ref().and_then(|f| f.detection_probability), DEFAULT_PD),
        pick(args.beta_fd, file.as_ref().and_then(|f| f.beta_fd), DEFAULT_BETA_FD),
        pick(args.beta_nt, file.as_ref().and_then(|f| f.beta_nt), DEFAULT_BETA_NT),
    )?;
    let ranked = enumerate_hypotheses(args.n_tracks, args.n_detections, |o| score_hypothesis(o, &scan, &params))?;
    let mut listing = String::from("rank,log_score,hypothesis\n");
    for (rank, h) in ranked.iter().enumerate() {
        listing.push_str(&format!("{},{:.6},{}\n", rank + 1, h.log_score, describe(h)));
    }
    write_stdout(out, &listing)
}
