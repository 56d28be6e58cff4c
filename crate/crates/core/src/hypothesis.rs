//! Joint association hypotheses for a single scan.
//!
//! A joint hypothesis assigns every detection an origin (an established
//! track, a false detection, or a new track); established tracks that
//! receive no detection are missed. Its log-probability, up to the
//! normalization constant, is
//!
//! ```text
//! Σ_detected [ln p(z_j | track i) + ln P_D] + Σ_missed ln(1 − P_D)
//!   + N_FD·ln β_FD + N_NT·ln β_NT
//! ```
//!
//! The log-probabilities can be laid out as a square assignment matrix
//! (detections and missing-detection rows against established, false-track
//! and new-track columns) whose independent element sets are exactly the
//! hypotheses, or as the reduced `N_D × (N_T + 2N_D)` matrix obtained by
//! subtracting `ln(1 − P_D)` from the track columns, dropping the then
//! all-zero missing-detection rows and forbidding the off-diagonal
//! false/new entries.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::assignment::{maximize, Assignment, CostMatrix};
use crate::dynamics::MeasurementModel;
use crate::error::{Error, Result};
use crate::gaussian::{random_spd, DGaussian, RandomSpdSpec};

/// Largest `N_T + N_D` accepted by [`enumerate_hypotheses`].
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisParams {
    detection_probability: f64,
    beta_false: f64,
    beta_new: f64,
    measurement_volume: f64,
}

impl HypothesisParams {
    /// `beta_new` already includes the detection probability of new tracks.
    pub fn new(detection_probability: f64, beta_false: f64, beta_new: f64) -> Result<Self> {
        if !(detection_probability > 0.0 && detection_probability <= 1.0) {
            return Err(Error::invalid(
                "detection_probability",
                format!("must lie in (0, 1], got {detection_probability}"),
            ));
        }
        for (name, beta) in [("beta_fd", beta_false), ("beta_nt", beta_new)] {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::invalid(name, format!("density must be positive, got {beta}")));
            }
        }
        Ok(Self {
            detection_probability,
            beta_false,
            beta_new,
            measurement_volume: 1.0,
        })
    }

    /// Replaces the unit measurement volume. Rankings do not depend on it.
    pub fn with_measurement_volume(mut self, volume: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::invalid("measurement_volume", format!("must be positive, got {volume}")));
        }
        self.measurement_volume = volume;
        Ok(self)
    }

    pub fn detection_probability(&self) -> f64 {
        self.detection_probability
    }

    pub fn beta_false(&self) -> f64 {
        self.beta_false
    }

    pub fn beta_new(&self) -> f64 {
        self.beta_new
    }

    pub fn measurement_volume(&self) -> f64 {
        self.measurement_volume
    }

    fn ln_missed(&self) -> f64 {
        (1.0 - self.detection_probability).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub value: DVector<f64>,
    pub noise: DMatrix<f64>,
}

/// Predicted tracks, their output models and the detections of one scan.
#[derive(Debug, Clone)]
pub struct ScanInput {
    tracks: Vec<DGaussian>,
    models: Vec<MeasurementModel>,
    measurements: Vec<Measurement>,
}

impl ScanInput {
    pub fn new(tracks: Vec<DGaussian>, models: Vec<MeasurementModel>, measurements: Vec<Measurement>) -> Result<Self> {
        Error::check_dim("models per track", tracks.len(), models.len())?;
        for track in &tracks {
            Error::check_dim("track state", 4, track.dim())?;
        }
        for m in &measurements {
            Error::check_dim("measurement noise", m.value.len(), m.noise.nrows())?;
            crate::gaussian::cholesky_lower(&m.noise)?;
        }
        Ok(Self {
            tracks,
            models,
            measurements,
        })
    }

    pub fn n_tracks(&self) -> usize {
        self.tracks.len()
    }

    pub fn n_detections(&self) -> usize {
        self.measurements.len()
    }

    pub fn tracks(&self) -> &[DGaussian] {
        &self.tracks
    }

    pub fn models(&self) -> &[MeasurementModel] {
        &self.models
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    /// Predicted-measurement density of track `track` as seen by detection `detection`.
    pub fn predicted_measurement(&self, detection: usize, track: usize) -> Result<DGaussian> {
        let model = self.models[track];
        let m = &self.measurements[detection];
        Error::check_dim("measurement vs. track model", model.dim(), m.value.len())?;
        let h = DMatrix::from_fn(model.dim(), 4, |r, c| model.matrix()[(r, c)]);
        self.tracks[track].propagate_linear(&h, &m.noise)
    }

    /// `ln 𝒩(z_j; H_i ξ_i, H_i P_i H_iᵀ + R_j)`
    pub fn log_likelihood(&self, detection: usize, track: usize) -> Result<f64> {
        self.predicted_measurement(detection, track)?
            .log_density(&self.measurements[detection].value)
    }

    /// A small random instance with 2-D measurements, for demos and tests.
    pub fn random_toy<R: Rng + ?Sized>(n_tracks: usize, n_detections: usize, rng: &mut R) -> Self {
        let state_cov = RandomSpdSpec::uniform(4, 0.2, 2.0).expect("valid spec");
        let noise_cov = RandomSpdSpec::uniform(2, 0.1, 1.0).expect("valid spec");
        let tracks = (0..n_tracks)
            .map(|_| {
                let mean = DVector::from_fn(4, |k, _| {
                    let half = if k < 2 { 5.0 } else { 2.0 };
                    rng.random_range(-half..half)
                });
                DGaussian::new(mean, random_spd(&state_cov, rng).matrix).expect("random SPD")
            })
            .collect();
        let models = (0..n_tracks)
            .map(|_| {
                if rng.random_bool(0.5) {
                    MeasurementModel::H1
                } else {
                    MeasurementModel::H2
                }
            })
            .collect();
        let measurements = (0..n_detections)
            .map(|_| Measurement {
                value: DVector::from_fn(2, |_, _| rng.random_range(-5.0..5.0)),
                noise: random_spd(&noise_cov, rng).matrix,
            })
            .collect();
        Self::new(tracks, models, measurements).expect("consistent toy instance")
    }
}

/// Origin of one detection under a joint hypothesis. The derived order
/// (tracks by index, then false, then new) matches the reduced-matrix
/// column order and is used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Track(usize),
    False,
    New,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointHypothesis {
    /// Origin of each detection, indexed by detection.
    pub origins: Vec<Origin>,
    pub n_tracks: usize,
    pub log_score: f64,
}

impl JointHypothesis {
    pub fn detected_tracks(&self) -> Vec<usize> {
        let mut tracks: Vec<usize> = self
            .origins
            .iter()
            .filter_map(|o| match o {
                Origin::Track(i) => Some(*i),
                _ => None,
            })
            .collect();
        tracks.sort_unstable();
        tracks
    }

    pub fn missed_tracks(&self) -> Vec<usize> {
        let detected = self.detected_tracks();
        (0..self.n_tracks).filter(|i| detected.binary_search(i).is_err()).collect()
    }

    pub fn false_detections(&self) -> Vec<usize> {
        self.detections_with(Origin::False)
    }

    pub fn new_tracks(&self) -> Vec<usize> {
        self.detections_with(Origin::New)
    }

    fn detections_with(&self, origin: Origin) -> Vec<usize> {
        (0..self.origins.len()).filter(|&j| self.origins[j] == origin).collect()
    }
}

/// Checks that `origins` is a structurally valid hypothesis for `n_tracks` tracks.
pub fn validate_origins(origins: &[Origin], n_tracks: usize) -> Result<()> {
    let mut used = vec![false; n_tracks];
    for (j, origin) in origins.iter().enumerate() {
        if let Origin::Track(i) = *origin {
            if i >= n_tracks {
                return Err(Error::InvalidHypothesis(format!("detection {j} assigned to unknown track {i}")));
            }
            if std::mem::replace(&mut used[i], true) {
                return Err(Error::InvalidHypothesis(format!("track {i} assigned to more than one detection")));
            }
        }
    }
    Ok(())
}

/// Log of the joint association probability without the normalization
/// constant. Missed tracks contribute `ln(1 − P_D)`, which is `−∞` at
/// `P_D = 1`.
pub fn score_hypothesis(origins: &[Origin], scan: &ScanInput, params: &HypothesisParams) -> Result<f64> {
    Error::check_dim("hypothesis detections", scan.n_detections(), origins.len())?;
    validate_origins(origins, scan.n_tracks())?;
    let ln_pd = params.detection_probability.ln();
    let mut score = 0.0;
    let mut detected = 0;
    for (j, origin) in origins.iter().enumerate() {
        score += match *origin {
            Origin::Track(i) => {
                detected += 1;
                scan.log_likelihood(j, i)? + ln_pd
            }
            Origin::False => params.beta_false.ln(),
            Origin::New => params.beta_new.ln(),
        };
    }
    let missed = scan.n_tracks() - detected;
    if missed > 0 {
        score += missed as f64 * params.ln_missed();
    }
    Ok(score)
}

/// Number of distinct joint hypotheses:
/// `Σ_{N_DT} Σ_{N_FD} C(N_D, N_DT)·C(N_D − N_DT, N_FD)·N_T!/(N_T − N_DT)!`.
pub fn count_hypotheses(n_tracks: usize, n_detections: usize) -> Result<u64> {
    let overflow = || Error::CountOverflow {
        n_tracks,
        n_detections,
    };
    let mut total: u64 = 0;
    for detected in 0..=n_detections.min(n_tracks) {
        let falling = falling_factorial(n_tracks as u64, detected as u64).ok_or_else(overflow)?;
        let choose_detected = binomial(n_detections as u64, detected as u64).ok_or_else(overflow)?;
        for false_alarms in 0..=(n_detections - detected) {
            let term = binomial((n_detections - detected) as u64, false_alarms as u64)
                .and_then(|c| c.checked_mul(choose_detected))
                .and_then(|c| c.checked_mul(falling))
                .ok_or_else(overflow)?;
            total = total.checked_add(term).ok_or_else(overflow)?;
        }
    }
    Ok(total)
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn falling_factorial(n: u64, k: u64) -> Option<u64> {
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i))
}

/// Every distinct hypothesis, scored by `scorer` and sorted by descending
/// score. Ties keep lexicographic order of the origins.
pub fn enumerate_hypotheses(
    n_tracks: usize,
    n_detections: usize,
    mut scorer: impl FnMut(&[Origin]) -> Result<f64>,
) -> Result<Vec<JointHypothesis>> {
    if n_tracks + n_detections > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            n_tracks,
            n_detections,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut all = Vec::new();
    let mut used = vec![false; n_tracks];
    let mut current = Vec::with_capacity(n_detections);
    collect_origins(n_detections, &mut used, &mut current, &mut all);
    let mut hypotheses = all
        .into_iter()
        .map(|origins| {
            let log_score = scorer(&origins)?;
            Ok(JointHypothesis {
                origins,
                n_tracks,
                log_score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    hypotheses.sort_by(|a, b| b.log_score.total_cmp(&a.log_score));
    Ok(hypotheses)
}

fn collect_origins(n_detections: usize, used: &mut [bool], current: &mut Vec<Origin>, out: &mut Vec<Vec<Origin>>) {
    if current.len() == n_detections {
        out.push(current.clone());
        return;
    }
    for i in 0..used.len() {
        if !used[i] {
            used[i] = true;
            current.push(Origin::Track(i));
            collect_origins(n_detections, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
    for origin in [Origin::False, Origin::New] {
        current.push(origin);
        collect_origins(n_detections, used, current, out);
        current.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixForm {
    /// `(N_T + 2N_D)` square, no forbidden entries.
    Full,
    /// `N_D × (N_T + 2N_D)`, off-diagonal false/new entries forbidden.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnLabel {
    EstablishedTrack(usize),
    FalseTrack(usize),
    NewTrack(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    Detection(usize),
    MissingDetection(usize),
}

/// Log-probability assignment matrix; forbidden entries are `None`.
#[derive(Debug, Clone)]
pub struct HypothesisMatrix {
    pub form: MatrixForm,
    pub scores: CostMatrix,
    pub row_labels: Vec<RowLabel>,
    pub column_labels: Vec<ColumnLabel>,
    pub n_tracks: usize,
    pub n_detections: usize,
    pub params: HypothesisParams,
}

fn column_labels(n_tracks: usize, n_detections: usize) -> Vec<ColumnLabel> {
    (0..n_tracks)
        .map(ColumnLabel::EstablishedTrack)
        .chain((0..n_detections).map(ColumnLabel::FalseTrack))
        .chain((0..n_detections).map(ColumnLabel::NewTrack))
        .collect()
}

/// `ln(p(z_j | i)·V_z·P_D)` for every detection/track pair, row-major by detection.
fn detection_track_block(scan: &ScanInput, params: &HypothesisParams) -> Result<Vec<f64>> {
    let offset = params.measurement_volume.ln() + params.detection_probability.ln();
    let mut block = Vec::with_capacity(scan.n_detections() * scan.n_tracks());
    for j in 0..scan.n_detections() {
        for i in 0..scan.n_tracks() {
            block.push(scan.log_likelihood(j, i)? + offset);
        }
    }
    Ok(block)
}

pub fn build_full_matrix(scan: &ScanInput, params: &HypothesisParams) -> Result<HypothesisMatrix> {
    if params.detection_probability >= 1.0 {
        return Err(Error::invalid(
            "detection_probability",
            "the full matrix needs P_D < 1 (ln(1 − P_D) is finite); use the reduced form",
        ));
    }
    let (nt, nd) = (scan.n_tracks(), scan.n_detections());
    let size = nt + 2 * nd;
    let block = detection_track_block(scan, params)?;
    let ln_false = (params.beta_false * params.measurement_volume).ln();
    let ln_new = (params.beta_new * params.measurement_volume).ln();
    let ln_missed = params.ln_missed();
    let scores = CostMatrix::from_fn(size, size, |r, c| {
        Some(match (r < nd, c) {
            (true, c) if c < nt => block[r * nt + c],
            (true, c) if c < nt + nd => ln_false,
            (true, _) => ln_new,
            (false, c) if c < nt => ln_missed,
            (false, _) => 0.0,
        })
    })?;
    let row_labels = (0..nd)
        .map(RowLabel::Detection)
        .chain((0..nt + nd).map(RowLabel::MissingDetection))
        .collect();
    Ok(HypothesisMatrix {
        form: MatrixForm::Full,
        scores,
        row_labels,
        column_labels: column_labels(nt, nd),
        n_tracks: nt,
        n_detections: nd,
        params: *params,
    })
}

/// The reduced matrix. At `P_D = 1` the track columns are not shifted (there
/// is no finite `ln(1 − P_D)`); hypotheses with missed tracks are then
/// excluded by [`HypothesisMatrix::best_hypothesis`].
pub fn build_reduced_matrix(scan: &ScanInput, params: &HypothesisParams) -> Result<HypothesisMatrix> {
    let (nt, nd) = (scan.n_tracks(), scan.n_detections());
    let mut block = detection_track_block(scan, params)?;
    if params.detection_probability < 1.0 {
        let ln_missed = params.ln_missed();
        block.iter_mut().for_each(|a| *a -= ln_missed);
    }
    let ln_false = (params.beta_false * params.measurement_volume).ln();
    let ln_new = (params.beta_new * params.measurement_volume).ln();
    let scores = CostMatrix::from_fn(nd, nt + 2 * nd, |j, c| {
        if c < nt {
            Some(block[j * nt + c])
        } else if c < nt + nd {
            (c - nt == j).then_some(ln_false)
        } else if c - nt - nd == j {
            Some(ln_new)
        } else {
            None
        }
    })?;
    Ok(HypothesisMatrix {
        form: MatrixForm::Reduced,
        scores,
        row_labels: (0..nd).map(RowLabel::Detection).collect(),
        column_labels: column_labels(nt, nd),
        n_tracks: nt,
        n_detections: nd,
        params: *params,
    })
}

impl HypothesisMatrix {
    /// Reads the hypothesis encoded by an independent element set.
    pub fn origins_of(&self, assignment: &Assignment) -> Vec<Origin> {
        (0..self.n_detections)
            .map(|j| match self.column_labels[assignment.row_to_col[j]] {
                ColumnLabel::EstablishedTrack(i) => Origin::Track(i),
                ColumnLabel::FalseTrack(_) => Origin::False,
                ColumnLabel::NewTrack(_) => Origin::New,
            })
            .collect()
    }

    /// The most probable joint hypothesis, by optimal assignment over this
    /// matrix. `log_score` is the matrix total for the chosen element set.
    ///
    /// For the reduced form at `P_D = 1` every track must be detected; the
    /// search then assigns tracks to detections, letting each remaining
    /// detection take the better of its false/new entries.
    pub fn best_hypothesis(&self) -> Result<JointHypothesis> {
        if self.form == MatrixForm::Reduced && self.params.detection_probability >= 1.0 {
            return self.best_with_all_tracks_detected();
        }
        let assignment = maximize(&self.scores)?;
        Ok(JointHypothesis {
            origins: self.origins_of(&assignment),
            n_tracks: self.n_tracks,
            log_score: assignment.total_cost,
        })
    }

    fn best_with_all_tracks_detected(&self) -> Result<JointHypothesis> {
        let (nt, nd) = (self.n_tracks, self.n_detections);
        let fallback: Vec<(Origin, f64)> = (0..nd)
            .map(|j| {
                let ln_false = self.scores.get(j, nt + j).expect("diagonal entry");
                let ln_new = self.scores.get(j, nt + nd + j).expect("diagonal entry");
                if ln_false >= ln_new {
                    (Origin::False, ln_false)
                } else {
                    (Origin::New, ln_new)
                }
            })
            .collect();
        let gains = CostMatrix::from_fn(nt, nd, |i, j| self.scores.get(j, i).map(|a| a - fallback[j].1))?;
        let assignment = maximize(&gains)?;
        let mut origins: Vec<Origin> = fallback.iter().map(|(o, _)| *o).collect();
        for (track, &detection) in assignment.row_to_col.iter().enumerate() {
            origins[detection] = Origin::Track(track);
        }
        let log_score = assignment.total_cost + fallback.iter().map(|(_, s)| s).sum::<f64>();
        Ok(JointHypothesis {
            origins,
            n_tracks: nt,
            log_score,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{asso_ll_sq, DistanceContext, DistanceKind};
    use crate::rng;
    use std::collections::HashMap;

    fn params(pd: f64) -> HypothesisParams {
        HypothesisParams::new(pd, 0.02, 0.005).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn go(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    cur.push(c);
                    go(n, cur, used, out);
                    cur.pop();
                    used[c] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    #[test]
    fn counts() {
        assert_eq!(count_hypotheses(1, 2).unwrap(), 8);
        assert_eq!(count_hypotheses(0, 0).unwrap(), 1);
        assert_eq!(count_hypotheses(1, 0).unwrap(), 1);
        assert_eq!(count_hypotheses(0, 1).unwrap(), 2);
        for nt in 0..=4 {
            for nd in 0..=4 {
                let listed = enumerate_hypotheses(nt, nd, |_| Ok(0.0)).unwrap();
                assert_eq!(listed.len() as u64, count_hypotheses(nt, nd).unwrap(), "({nt}, {nd})");
            }
        }
        assert!(matches!(count_hypotheses(40, 40), Err(Error::CountOverflow { .. })));
    }

    #[test]
    fn enumeration_size_guard() {
        assert!(matches!(
            enumerate_hypotheses(5, 4, |_| Ok(0.0)),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn enumerated_hypotheses_respect_track_bookkeeping() {
        for h in enumerate_hypotheses(3, 4, |_| Ok(0.0)).unwrap() {
            validate_origins(&h.origins, 3).unwrap();
            let (nd, ndt, nfd) = (4, h.detected_tracks().len(), h.false_detections().len());
            assert_eq!(h.new_tracks().len(), nd - ndt - nfd);
            assert_eq!(h.missed_tracks().len() + ndt, 3);
        }
        let one_track = enumerate_hypotheses(1, 0, |_| Ok(0.0)).unwrap();
        assert_eq!(one_track.len(), 1);
        assert_eq!(one_track[0].missed_tracks(), vec![0]);
    }

    #[test]
    fn no_tracks_one_detection() {
        let mut s = rng::stream(1);
        let scan = ScanInput::random_toy(0, 1, &mut s);
        let p = params(0.9);
        let full = build_full_matrix(&scan, &p).unwrap();
        assert_eq!((full.scores.rows(), full.scores.cols()), (2, 2));
        let listed = enumerate_hypotheses(0, 1, |o| score_hypothesis(o, &scan, &p)).unwrap();
        assert_eq!(listed.len(), 2);
        assert_eq!(listed[0].origins, vec![Origin::False]);
        assert!((listed[0].log_score - 0.02_f64.ln()).abs() < 1e-15);
        assert!((listed[1].log_score - 0.005_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn full_matrix_permutations_collapse_to_eight_hypotheses() {
        let mut s = rng::stream(2);
        let scan = ScanInput::random_toy(1, 2, &mut s);
        let p = params(0.8);
        let full = build_full_matrix(&scan, &p).unwrap();
        assert_eq!((full.scores.rows(), full.scores.cols()), (5, 5));
        let perms = permutations(5);
        assert_eq!(perms.len(), 120);
        let mut groups: HashMap<Vec<Origin>, Vec<f64>> = HashMap::new();
        for perm in perms {
            let a = Assignment {
                total_cost: full.scores.total(&perm).unwrap(),
                row_to_col: perm,
            };
            groups.entry(full.origins_of(&a)).or_default().push(a.total_cost);
        }
        assert_eq!(groups.len(), 8);
        for (origins, totals) in &groups {
            let expected = score_hypothesis(origins, &scan, &p).unwrap();
            for t in totals {
                assert!((t - expected).abs() < 1e-12, "{origins:?}: {t} vs {expected}");
            }
        }
    }

    #[test]
    fn established_block_is_minus_half_asso_ll() {
        let mut s = rng::stream(3);
        let scan = ScanInput::random_toy(3, 2, &mut s);
        let pd = 0.85;
        let full = build_full_matrix(&scan, &params(pd)).unwrap();
        let ctx = DistanceContext::new(pd).unwrap();
        for j in 0..2 {
            for i in 0..3 {
                let pred = scan.predicted_measurement(j, i).unwrap();
                let delta = &scan.measurements()[j].value - pred.mean();
                let d2 = asso_ll_sq(&delta, pred.covariance(), &ctx, DistanceKind::AssociationLogLikelihood).unwrap();
                assert!((full.scores.get(j, i).unwrap() + 0.5 * d2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_matrix_rejects_certain_detection() {
        let mut s = rng::stream(4);
        let scan = ScanInput::random_toy(1, 1, &mut s);
        assert!(build_full_matrix(&scan, &params(1.0)).is_err());
        assert!(build_reduced_matrix(&scan, &params(1.0)).is_ok());
    }

    #[test]
    fn reduced_shape_and_forbidden_pattern() {
        let mut s = rng::stream(5);
        let scan = ScanInput::random_toy(1, 2, &mut s);
        let m = build_reduced_matrix(&scan, &params(0.9)).unwrap();
        assert_eq!((m.scores.rows(), m.scores.cols()), (2, 5));
        let forbidden: Vec<(usize, usize)> = (0..2)
            .flat_map(|r| (0..5).map(move |c| (r, c)))
            .filter(|&(r, c)| m.scores.is_forbidden(r, c))
            .collect();
        assert_eq!(forbidden, vec![(0, 2), (0, 4), (1, 1), (1, 3)]);
        let full = build_full_matrix(&scan, &params(0.9)).unwrap();
        assert!((0..5).all(|r| (0..5).all(|c| !full.scores.is_forbidden(r, c))));
    }

    #[test]
    fn single_pair_and_all_false_scores() {
        let mut s = rng::stream(6);
        let scan = ScanInput::random_toy(1, 1, &mut s);
        let p = params(0.7);
        let score = score_hypothesis(&[Origin::Track(0)], &scan, &p).unwrap();
        assert!((score - (scan.log_likelihood(0, 0).unwrap() + 0.7_f64.ln())).abs() < 1e-15);

        let scan = ScanInput::random_toy(2, 3, &mut s);
        let all_false = score_hypothesis(&[Origin::False; 3], &scan, &p).unwrap();
        assert!((all_false - (3.0 * 0.02_f64.ln() + 2.0 * 0.3_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn invalid_hypotheses_rejected() {
        let mut s = rng::stream(7);
        let scan = ScanInput::random_toy(2, 2, &mut s);
        let p = params(0.9);
        assert!(score_hypothesis(&[Origin::Track(0), Origin::Track(0)], &scan, &p).is_err());
        assert!(score_hypothesis(&[Origin::Track(5), Origin::New], &scan, &p).is_err());
        assert!(score_hypothesis(&[Origin::New], &scan, &p).is_err());
    }

    #[test]
    fn dimension_mismatch_between_measurement_and_model() {
        let mut s = rng::stream(8);
        let toy = ScanInput::random_toy(1, 1, &mut s);
        let scan = ScanInput::new(toy.tracks().to_vec(), vec![MeasurementModel::H11], toy.measurements().to_vec()).unwrap();
        assert!(matches!(build_reduced_matrix(&scan, &params(0.9)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn full_matrix_scores_equal_product_form() {
        let mut s = rng::stream(9);
        for case in 0..100 {
            let nt = s.random_range(0..=3);
            let nd = s.random_range(0..=3);
            let scan = ScanInput::random_toy(nt, nd, &mut s);
            let p = params(s.random_range(0.5..0.99));
            let full = build_full_matrix(&scan, &p).unwrap();
            let perms = permutations(nt + 2 * nd);
            let perm = &perms[s.random_range(0..perms.len())];
            let a = Assignment {
                total_cost: full.scores.total(perm).unwrap(),
                row_to_col: perm.clone(),
            };
            let expected = score_hypothesis(&full.origins_of(&a), &scan, &p).unwrap();
            assert!((a.total_cost - expected).abs() < 1e-10, "case {case}");
        }
    }

    #[test]
    fn reduced_and_full_scores_differ_by_track_count_constant() {
        let mut s = rng::stream(10);
        for _ in 0..20 {
            let nt = s.random_range(0..=3);
            let nd = s.random_range(1..=3);
            let scan = ScanInput::random_toy(nt, nd, &mut s);
            let pd = s.random_range(0.5..0.99);
            let p = params(pd);
            let reduced = build_reduced_matrix(&scan, &p).unwrap();
            for h in enumerate_hypotheses(nt, nd, |o| score_hypothesis(o, &scan, &p)).unwrap() {
                let cols: Vec<usize> = h
                    .origins
                    .iter()
                    .enumerate()
                    .map(|(j, o)| match o {
                        Origin::Track(i) => *i,
                        Origin::False => nt + j,
                        Origin::New => nt + nd + j,
                    })
                    .collect();
                let reduced_score = reduced.scores.total(&cols).unwrap();
                let shift = nt as f64 * (1.0 - pd).ln();
                assert!((h.log_score - reduced_score - shift).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn measurement_volume_shifts_scores_uniformly() {
        let mut s = rng::stream(11);
        let scan = ScanInput::random_toy(2, 3, &mut s);
        let p1 = params(0.8);
        let p10 = p1.with_measurement_volume(10.0).unwrap();
        let m1 = build_full_matrix(&scan, &p1).unwrap();
        let m10 = build_full_matrix(&scan, &p10).unwrap();
        let score_of = |m: &HypothesisMatrix, h: &[Origin]| {
            // any element set encoding h: detections in their columns, missing rows fill the rest
            let (nt, nd) = (2, 3);
            let mut cols: Vec<usize> = h
                .iter()
                .enumerate()
                .map(|(j, o)| match o {
                    Origin::Track(i) => *i,
                    Origin::False => nt + j,
                    Origin::New => nt + nd + j,
                })
                .collect();
            let rest: Vec<usize> = (0..nt + 2 * nd).filter(|c| !cols.contains(c)).collect();
            cols.extend(rest);
            m.scores.total(&cols).unwrap()
        };
        let hyps = enumerate_hypotheses(2, 3, |o| Ok(score_of(&m1, o))).unwrap();
        let hyps10 = enumerate_hypotheses(2, 3, |o| Ok(score_of(&m10, o))).unwrap();
        for (a, b) in hyps.iter().zip(&hyps10) {
            assert_eq!(a.origins, b.origins);
            assert!((b.log_score - a.log_score - 3.0 * 10f64.ln()).abs() < 1e-10);
        }
        assert_eq!(m1.best_hypothesis().unwrap().origins, m10.best_hypothesis().unwrap().origins);
    }

    #[test]
    fn reduced_argmax_matches_enumeration() {
        let mut s = rng::stream(12);
        for case in 0..200 {
            let nt = s.random_range(0..=4);
            let nd = s.random_range(0..=4);
            let pd = [0.7, 0.9, 1.0][case % 3];
            let scan = ScanInput::random_toy(nt, nd, &mut s);
            let p = params(pd);
            let listed = enumerate_hypotheses(nt, nd, |o| score_hypothesis(o, &scan, &p)).unwrap();
            let best = build_reduced_matrix(&scan, &p).unwrap().best_hypothesis();
            if listed[0].log_score == f64::NEG_INFINITY {
                assert!(best.is_err(), "case {case}");
            } else {
                assert_eq!(best.unwrap().origins, listed[0].origins, "case {case}");
            }
        }
    }

    #[test]
    fn full_matrix_argmax_matches_enumeration() {
        let mut s = rng::stream(13);
        for case in 0..50 {
            let nt = s.random_range(0..=3);
            let nd = s.random_range(0..=3);
            let scan = ScanInput::random_toy(nt, nd, &mut s);
            let p = params(0.9);
            let listed = enumerate_hypotheses(nt, nd, |o| score_hypothesis(o, &scan, &p)).unwrap();
            let full = build_full_matrix(&scan, &p).unwrap().best_hypothesis().unwrap();
            let reduced = build_reduced_matrix(&scan, &p).unwrap().best_hypothesis().unwrap();
            assert_eq!(full.origins, listed[0].origins, "case {case}");
            assert_eq!(reduced.origins, listed[0].origins, "case {case}");
            assert!((full.log_score - listed[0].log_score).abs() < 1e-9);
        }
    }
}
