//! Monte-Carlo association experiment.
//!
//! Each scenario places `N` ground-truth tracks uniformly in a state volume,
//! draws one measurement per track and one predicted estimate per track, and
//! associates measurements to predicted tracks by optimal assignment over a
//! distance matrix. The ground-truth association is the identity. Every
//! requested distance is evaluated on the same draws.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4, U4};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve, Assignment, CostMatrix};
use crate::distance::{DistanceContext, DistanceKind, InnovationTerms};
use crate::dynamics::{steady_state_predicted_cov2, KinematicModel, MeasurementModel, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::gaussian::{random_spd, random_spd2, GaussianDensity, RandomSpdSpec};
use crate::rng::substream;

pub const DEFAULT_STATE_VOLUME: [(f64, f64); 4] = [(-20.0, 20.0), (-20.0, 20.0), (-40.0, 40.0), (-40.0, 40.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceRegime {
    /// Predicted covariance from the steady-state Riccati solution.
    SteadyState,
    /// Predicted covariance drawn like the noise covariances.
    ArbitraryShape,
}

impl CovarianceRegime {
    pub fn label(self) -> &'static str {
        match self {
            Self::SteadyState => "steady",
            Self::ArbitraryShape => "arbitrary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPolicy {
    AllH1,
    AllH2,
    /// `H₁` everywhere except pairs `(z_j, track i)` with `j` and `i` both odd
    /// (counting from 1), which use the one-row model `H₁₁`.
    MixedH1H11,
}

impl ModelPolicy {
    pub fn label(self) -> &'static str {
        match self {
            Self::AllH1 => "h1",
            Self::AllH2 => "h2",
            Self::MixedH1H11 => "mixed",
        }
    }

    /// Output model of a track, used for measurement generation and the Riccati solve.
    pub fn track_model(self) -> MeasurementModel {
        match self {
            Self::AllH2 => MeasurementModel::H2,
            Self::AllH1 | Self::MixedH1H11 => MeasurementModel::H1,
        }
    }

    /// Model used when comparing measurement `j` with track `i` (both 0-based).
    pub fn pair_model(self, measurement: usize, track: usize) -> MeasurementModel {
        match self {
            Self::MixedH1H11 if measurement.is_multiple_of(2) && track.is_multiple_of(2) => MeasurementModel::H11,
            other => other.track_model(),
        }
    }
}

macro_rules! labelled_from_str {
    ($ty:ty, $what:literal, [$($variant:expr),*]) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                [$($variant),*]
                    .into_iter()
                    .find(|v| v.label().eq_ignore_ascii_case(s.trim()))
                    .ok_or_else(|| Error::invalid($what, format!("unknown value {s:?}")))
            }
        }
    };
}

labelled_from_str!(CovarianceRegime, "regime", [CovarianceRegime::SteadyState, CovarianceRegime::ArbitraryShape]);
labelled_from_str!(ModelPolicy, "model", [ModelPolicy::AllH1, ModelPolicy::AllH2, ModelPolicy::MixedH1H11]);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_tracks: usize,
    /// Bounds for x, y (m) and ẋ, ẏ (m/s).
    pub state_volume: [(f64, f64); 4],
    pub regime: CovarianceRegime,
    pub model_policy: ModelPolicy,
    /// Distances evaluated on every scenario, in output order.
    pub distances: Vec<DistanceKind>,
    pub dt: f64,
    /// Diagonal range of the process noise `V` ((m/s²)²).
    pub process_noise_range: (f64, f64),
    /// Diagonal range of the measurement noise `R` (m²).
    pub measurement_noise_range: (f64, f64),
    /// Position diagonal range of an arbitrary-shape `P⁻` (m²).
    pub position_variance_range: (f64, f64),
    /// Velocity diagonal range of an arbitrary-shape `P⁻` ((m/s)²).
    pub velocity_variance_range: (f64, f64),
    pub detection_probability: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_tracks: 10,
            state_volume: DEFAULT_STATE_VOLUME,
            regime: CovarianceRegime::SteadyState,
            model_policy: ModelPolicy::AllH1,
            distances: vec![DistanceKind::Mahalanobis, DistanceKind::AssociationLogLikelihood],
            dt: DEFAULT_DT,
            process_noise_range: (0.5, 2.0),
            measurement_noise_range: (0.1, 1.0),
            position_variance_range: (0.5, 5.0),
            velocity_variance_range: (0.5, 5.0),
            detection_probability: 1.0,
            seed: 0,
        }
    }
}

fn check_range(name: &'static str, (lo, hi): (f64, f64), positive: bool) -> Result<()> {
    let ok = lo.is_finite() && hi.is_finite() && lo < hi && (!positive || lo > 0.0);
    if ok {
        Ok(())
    } else {
        let need = if positive { "0 < lower < upper" } else { "lower < upper" };
        Err(Error::invalid(name, format!("need {need}, got [{lo}, {hi}]")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tracks == 0 {
            return Err(Error::invalid("n_tracks", "must be at least 1"));
        }
        for &bounds in &self.state_volume {
            check_range("state_volume", bounds, false)?;
        }
        if self.distances.is_empty() {
            return Err(Error::invalid("distances", "at least one distance is required"));
        }
        KinematicModel::new(self.dt)?;
        check_range("process_noise_range", self.process_noise_range, true)?;
        check_range("measurement_noise_range", self.measurement_noise_range, true)?;
        check_range("position_variance_range", self.position_variance_range, true)?;
        check_range("velocity_variance_range", self.velocity_variance_range, true)?;
        DistanceContext::new(self.detection_probability)?;
        Ok(())
    }
}

/// One drawn association scenario. Index `i` of every list refers to ground-truth track `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub truth: Vec<Vector4<f64>>,
    pub predicted: Vec<GaussianDensity<U4>>,
    pub measurements: Vec<Vector2<f64>>,
    pub measurement_noise: Vec<Matrix2<f64>>,
    pub process_noise: Vec<Matrix2<f64>>,
}

struct Generator {
    kinematics: KinematicModel,
    process: RandomSpdSpec,
    noise: RandomSpdSpec,
    arbitrary: RandomSpdSpec,
}

impl Generator {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (p, v) = (cfg.position_variance_range, cfg.velocity_variance_range);
        Ok(Self {
            kinematics: KinematicModel::new(cfg.dt)?,
            process: RandomSpdSpec::uniform(2, cfg.process_noise_range.0, cfg.process_noise_range.1)?,
            noise: RandomSpdSpec::uniform(2, cfg.measurement_noise_range.0, cfg.measurement_noise_range.1)?,
            arbitrary: RandomSpdSpec::new(vec![p, p, v, v])?,
        })
    }

    fn scenario(&self, cfg: &ScenarioConfig, index: u64) -> Result<Scenario> {
        let mut rng = substream(cfg.seed, index);
        let model = cfg.model_policy.track_model();
        let h = model.matrix2();
        let n = cfg.n_tracks;
        let mut scenario = Scenario {
            truth: Vec::with_capacity(n),
            predicted: Vec::with_capacity(n),
            measurements: Vec::with_capacity(n),
            measurement_noise: Vec::with_capacity(n),
            process_noise: Vec::with_capacity(n),
        };
        for _ in 0..n {
            let truth = Vector4::from_fn(|k, _| {
                let (lo, hi) = cfg.state_volume[k];
                rng.random_range(lo..hi)
            });
            let v = random_spd2(&self.process, &mut rng);
            let r = random_spd2(&self.noise, &mut rng);
            let p = match cfg.regime {
                CovarianceRegime::SteadyState => steady_state_predicted_cov2(&self.kinematics, model, &v, &r)?,
                CovarianceRegime::ArbitraryShape => {
                    Matrix4::from_iterator(random_spd(&self.arbitrary, &mut rng).matrix.iter().copied())
                }
            };
            let estimate = GaussianDensity::<U4>::new(truth, p)?.sample(&mut rng);
            let z = GaussianDensity::new(h * truth, r)?.sample(&mut rng);
            scenario.truth.push(truth);
            scenario.predicted.push(GaussianDensity::new(estimate, p)?);
            scenario.measurements.push(z);
            scenario.measurement_noise.push(r);
            scenario.process_noise.push(v);
        }
        Ok(scenario)
    }
}

/// Draws scenario `index` of the stream selected by `cfg.seed`.
pub fn generate_scenario(cfg: &ScenarioConfig, index: u64) -> Result<Scenario> {
    Generator::new(cfg)?.scenario(cfg, index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub distance: DistanceKind,
    pub n_correct: usize,
    pub n_total: usize,
    /// Measurement `j` is associated with track `chosen_mapping.row_to_col[j]`.
    pub chosen_mapping: Assignment,
}

/// Innovation terms for every (measurement, track) pair, row-major by measurement.
fn innovation_table(policy: ModelPolicy, scenario: &Scenario) -> Result<Vec<InnovationTerms>> {
    let h = policy.track_model().matrix2();
    let projected: Vec<(Vector2<f64>, Matrix2<f64>)> = scenario
        .predicted
        .iter()
        .map(|track| (h * track.mean(), h * track.covariance() * h.transpose()))
        .collect();
    let n = scenario.measurements.len();
    let mut table = Vec::with_capacity(n * projected.len());
    for (j, (z, r)) in scenario.measurements.iter().zip(&scenario.measurement_noise).enumerate() {
        for (i, (hx, hph)) in projected.iter().enumerate() {
            let delta = z - hx;
            let s = hph + r;
            let terms = if policy.pair_model(j, i) == MeasurementModel::H11 {
                InnovationTerms {
                    mahalanobis_sq: delta[0] * delta[0] / s[(0, 0)],
                    log_det: s[(0, 0)].ln(),
                    dim: 1,
                }
            } else {
                let sym = (s + s.transpose()) * 0.5;
                let lower = sym.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
                InnovationTerms::from_cholesky(&lower, &delta)
            };
            table.push(terms);
        }
    }
    Ok(table)
}

/// Associates the scenario under every distance in `cfg.distances`.
pub fn run_scenario(cfg: &ScenarioConfig, scenario: &Scenario) -> Result<Vec<ScenarioResult>> {
    let n = scenario.measurements.len();
    let n_tracks = scenario.predicted.len();
    let ctx = DistanceContext::new(cfg.detection_probability)?;
    let table = innovation_table(cfg.model_policy, scenario)?;
    cfg.distances
        .iter()
        .map(|&kind| {
            let costs = CostMatrix::from_fn(n, n_tracks, |j, i| Some(table[j * n_tracks + i].distance(kind, &ctx)))?;
            let mapping = solve(&costs)?;
            let n_correct = mapping.row_to_col.iter().enumerate().filter(|&(j, &i)| i == j).count();
            Ok(ScenarioResult {
                distance: kind,
                n_correct,
                n_total: n,
                chosen_mapping: mapping,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub batch_rates: Vec<f64>,
    pub mean_rate: f64,
    pub max_abs_deviation_from_mean: f64,
}

impl BatchSummary {
    pub fn from_rates(batch_rates: Vec<f64>) -> Self {
        let mean_rate = batch_rates.iter().sum::<f64>() / batch_rates.len() as f64;
        let max_abs_deviation_from_mean = batch_rates.iter().map(|r| (r - mean_rate).abs()).fold(0.0, f64::max);
        Self {
            batch_rates,
            mean_rate,
            max_abs_deviation_from_mean,
        }
    }
}

/// Paired difference `rate(a) − rate(b)` in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub mean: f64,
    pub standard_error: f64,
}

impl GapEstimate {
    /// Gap divided by its standard error; infinite for a nonzero gap without spread.
    pub fn z_score(&self) -> f64 {
        if self.standard_error > 0.0 {
            self.mean / self.standard_error
        } else if self.mean == 0.0 {
            0.0
        } else {
            self.mean.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub config: ScenarioConfig,
    pub n_batches: usize,
    pub scenarios_per_batch: usize,
    /// One summary per entry of `config.distances`.
    pub summaries: Vec<BatchSummary>,
    /// Correct associations per scenario, indexed `[distance][scenario]`.
    pub correct_counts: Vec<Vec<u32>>,
}

impl SimulationReport {
    pub fn summary(&self, kind: DistanceKind) -> Option<&BatchSummary> {
        let k = self.config.distances.iter().position(|&d| d == kind)?;
        Some(&self.summaries[k])
    }

    pub fn paired_gap(&self, a: DistanceKind, b: DistanceKind) -> Option<GapEstimate> {
        let ia = self.config.distances.iter().position(|&d| d == a)?;
        let ib = self.config.distances.iter().position(|&d| d == b)?;
        let scale = 100.0 / self.config.n_tracks as f64;
        let diffs: Vec<f64> = self.correct_counts[ia]
            .iter()
            .zip(&self.correct_counts[ib])
            .map(|(&x, &y)| (x as f64 - y as f64) * scale)
            .collect();
        let m = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / m;
        let var = if m > 1.0 {
            diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        Some(GapEstimate {
            mean,
            standard_error: (var / m).sqrt(),
        })
    }
}

/// Runs `n_batches × scenarios_per_batch` scenarios; batch `b` covers
/// scenario indices `b·scenarios_per_batch ..`. Scenarios run in parallel but
/// results depend only on the configuration.
pub fn run_batches(cfg: &ScenarioConfig, n_batches: usize, scenarios_per_batch: usize) -> Result<SimulationReport> {
    if n_batches == 0 {
        return Err(Error::invalid("n_batches", "must be at least 1"));
    }
    if scenarios_per_batch == 0 {
        return Err(Error::invalid("scenarios_per_batch", "must be at least 1"));
    }
    let generator = Generator::new(cfg)?;
    let total = (n_batches * scenarios_per_batch) as u64;
    let per_scenario: Vec<Vec<u32>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let scenario = generator.scenario(cfg, index)?;
            Ok(run_scenario(cfg, &scenario)?
                .iter()
                .map(|r| r.n_correct as u32)
                .collect())
        })
        .collect::<Result<_>>()?;

    let correct_counts: Vec<Vec<u32>> = (0..cfg.distances.len())
        .map(|k| per_scenario.iter().map(|row| row[k]).collect())
        .collect();
    let per_batch_total = (scenarios_per_batch * cfg.n_tracks) as f64;
    let summaries = correct_counts
        .iter()
        .map(|counts| {
            let rates = counts
                .chunks(scenarios_per_batch)
                .map(|batch| 100.0 * batch.iter().map(|&c| c as u64).sum::<u64>() as f64 / per_batch_total)
                .collect();
            BatchSummary::from_rates(rates)
        })
        .collect();
    Ok(SimulationReport {
        config: cfg.clone(),
        n_batches,
        scenarios_per_batch,
        summaries,
        correct_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::asso_ll_sq;
    use nalgebra::DVector;

    fn cfg(n: usize) -> ScenarioConfig {
        ScenarioConfig {
            n_tracks: n,
            seed: 7,
            ..ScenarioConfig::default()
        }
    }

    fn single_track(mean: [f64; 4], cov: f64) -> GaussianDensity<U4> {
        GaussianDensity::new(Vector4::from(mean), Matrix4::identity() * cov).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for r in [CovarianceRegime::SteadyState, CovarianceRegime::ArbitraryShape] {
            assert_eq!(r.label().parse::<CovarianceRegime>().unwrap(), r);
        }
        for p in [ModelPolicy::AllH1, ModelPolicy::AllH2, ModelPolicy::MixedH1H11] {
            assert_eq!(p.to_string().parse::<ModelPolicy>().unwrap(), p);
        }
        assert!("h3".parse::<ModelPolicy>().is_err());
    }

    #[test]
    fn mixed_policy_uses_one_based_odd_pairs() {
        let p = ModelPolicy::MixedH1H11;
        assert_eq!(p.pair_model(0, 0), MeasurementModel::H11);
        assert_eq!(p.pair_model(2, 4), MeasurementModel::H11);
        assert_eq!(p.pair_model(0, 1), MeasurementModel::H1);
        assert_eq!(p.pair_model(1, 1), MeasurementModel::H1);
        assert_eq!(ModelPolicy::AllH2.pair_model(0, 0), MeasurementModel::H2);
    }

    #[test]
    fn validation() {
        assert!(cfg(0).validate().is_err());
        let mut c = cfg(3);
        c.measurement_noise_range = (0.0, 1.0);
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.distances.clear();
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.state_volume[2] = (1.0, -1.0);
        assert!(c.validate().is_err());
        assert!(cfg(3).validate().is_ok());
    }

    #[test]
    fn scenarios_are_deterministic_and_inside_volume() {
        for regime in [CovarianceRegime::SteadyState, CovarianceRegime::ArbitraryShape] {
            let c = ScenarioConfig { regime, ..cfg(10) };
            let a = generate_scenario(&c, 3).unwrap();
            assert_eq!(a, generate_scenario(&c, 3).unwrap());
            assert_ne!(a.truth, generate_scenario(&c, 4).unwrap().truth);
            for xi in &a.truth {
                for k in 0..4 {
                    let (lo, hi) = c.state_volume[k];
                    assert!(xi[k] >= lo && xi[k] < hi);
                }
            }
        }
    }

    #[test]
    fn regimes_share_truth_and_noise_draws() {
        let steady = generate_scenario(&cfg(5), 11).unwrap();
        let arbitrary = generate_scenario(
            &ScenarioConfig {
                regime: CovarianceRegime::ArbitraryShape,
                ..cfg(5)
            },
            11,
        )
        .unwrap();
        assert_eq!(steady.truth[0], arbitrary.truth[0]);
        assert_eq!(steady.measurement_noise[0], arbitrary.measurement_noise[0]);
    }

    /// Kolmogorov–Smirnov statistic of `samples` against U(lo, hi).
    fn ks_uniform(mut samples: Vec<f64>, lo: f64, hi: f64) -> f64 {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        samples
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = (x - lo) / (hi - lo);
                (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn truth_is_uniform_per_coordinate() {
        let c = ScenarioConfig {
            regime: CovarianceRegime::ArbitraryShape,
            ..cfg(1)
        };
        let generator = Generator::new(&c).unwrap();
        let truths: Vec<Vector4<f64>> = (0..100_000).map(|i| generator.scenario(&c, i).unwrap().truth[0]).collect();
        // asymptotic 1% critical value 1.628 / √n
        let critical = 1.628 / (truths.len() as f64).sqrt();
        for k in 0..4 {
            let (lo, hi) = c.state_volume[k];
            let d = ks_uniform(truths.iter().map(|t| t[k]).collect(), lo, hi);
            assert!(d < critical, "coordinate {k}: D = {d}");
        }
    }

    #[test]
    fn single_track_is_always_correct() {
        for i in 0..20 {
            let c = cfg(1);
            let s = generate_scenario(&c, i).unwrap();
            for r in run_scenario(&c, &s).unwrap() {
                assert_eq!((r.n_correct, r.n_total), (1, 1));
            }
        }
    }

    #[test]
    fn well_separated_tracks_are_all_correct() {
        let n = 6;
        let c = ScenarioConfig {
            distances: DistanceKind::ALL.to_vec(),
            model_policy: ModelPolicy::MixedH1H11,
            ..cfg(n)
        };
        let truth: Vec<Vector4<f64>> = (0..n).map(|i| Vector4::new(1000.0 * i as f64, -500.0 * i as f64, 0.0, 0.0)).collect();
        let s = Scenario {
            predicted: truth
                .iter()
                .enumerate()
                .map(|(i, t)| single_track([t[0] + 0.3, t[1] - 0.2, 1.0, 1.0], 0.5 + i as f64))
                .collect(),
            measurements: truth.iter().map(|t| Vector2::new(t[0] - 0.4, t[1] + 0.1)).collect(),
            measurement_noise: (0..n).map(|i| Matrix2::identity() * (0.2 + 0.1 * i as f64)).collect(),
            process_noise: vec![Matrix2::identity(); n],
            truth,
        };
        for r in run_scenario(&c, &s).unwrap() {
            assert_eq!(r.n_correct, n, "{:?}", r.distance);
        }
    }

    #[test]
    fn fig1_fixture_argmins_disagree() {
        // one track, measurement 1 close with a small covariance, measurement 2
        // farther with a large covariance
        let track = single_track([0.0, 0.0, 0.0, 0.0], 0.1);
        let measurements = [Vector2::new(1.0, 0.0), Vector2::new(3.0, 0.0)];
        let noise = [Matrix2::identity() * 0.1, Matrix2::identity() * 9.9];
        let ctx = DistanceContext::new(1.0).unwrap();
        let direct = |kind| -> Vec<f64> {
            measurements
                .iter()
                .zip(&noise)
                .map(|(z, r)| {
                    let s = track.covariance().fixed_view::<2, 2>(0, 0) + r;
                    let delta = DVector::from_column_slice(z.as_slice());
                    let sigma = nalgebra::DMatrix::from_column_slice(2, 2, s.as_slice());
                    asso_ll_sq(&delta, &sigma, &ctx, kind).unwrap_or_else(|_| unreachable!())
                })
                .collect()
        };
        // independent evaluation: Δᵀ S⁻¹ Δ with S = s·I
        let maha_oracle = [1.0 / 0.2, 9.0 / 10.0];
        let assoll_oracle = [5.0 + (0.04_f64).ln() + 2.0 * (2.0 * std::f64::consts::PI).ln(), 0.9 + 100f64.ln() + 2.0 * (2.0 * std::f64::consts::PI).ln()];
        let maha = direct(DistanceKind::Mahalanobis);
        let assoll = direct(DistanceKind::AssociationLogLikelihood);
        for k in 0..2 {
            assert!((maha[k] - maha_oracle[k]).abs() < 1e-12);
            assert!((assoll[k] - assoll_oracle[k]).abs() < 1e-12);
        }
        assert!(maha[1] < maha[0], "Mahalanobis picks measurement 2");
        assert!(assoll[0] < assoll[1], "AssoLL picks measurement 1");

        // the same decision through the assignment solver (track as the single row)
        for (kind, values, pick) in [(DistanceKind::Mahalanobis, &maha, 1), (DistanceKind::AssociationLogLikelihood, &assoll, 0)] {
            let costs = CostMatrix::from_rows(std::slice::from_ref(values)).unwrap();
            assert_eq!(solve(&costs).unwrap().row_to_col, vec![pick], "{kind:?}");
        }
    }

    #[test]
    fn batch_rates_have_scenario_granularity() {
        for n in [1, 3, 7] {
            let report = run_batches(&cfg(n), 1, 1).unwrap();
            for s in &report.summaries {
                let k = s.batch_rates[0] * n as f64 / 100.0;
                assert!((k - k.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn batches_are_deterministic_and_consistent() {
        let c = ScenarioConfig {
            distances: DistanceKind::ALL.to_vec(),
            model_policy: ModelPolicy::MixedH1H11,
            ..cfg(8)
        };
        let a = run_batches(&c, 4, 25).unwrap();
        let b = run_batches(&c, 4, 25).unwrap();
        assert_eq!(a.summaries, b.summaries);
        assert_eq!(a.correct_counts, b.correct_counts);
        for s in &a.summaries {
            assert_eq!(s.batch_rates.len(), 4);
            let mean = s.batch_rates.iter().sum::<f64>() / 4.0;
            assert!((mean - s.mean_rate).abs() < 1e-9);
        }
        // scenario-level results match a direct evaluation
        for index in [0u64, 37, 99] {
            let s = generate_scenario(&c, index).unwrap();
            let direct = run_scenario(&c, &s).unwrap();
            for (k, r) in direct.iter().enumerate() {
                assert_eq!(a.correct_counts[k][index as usize] as usize, r.n_correct);
            }
        }
    }

    #[test]
    fn paired_runs_match_single_distance_runs() {
        let paired = run_batches(&cfg(10), 2, 50).unwrap();
        for (k, &kind) in paired.config.distances.iter().enumerate() {
            let alone = run_batches(
                &ScenarioConfig {
                    distances: vec![kind],
                    ..cfg(10)
                },
                2,
                50,
            )
            .unwrap();
            assert_eq!(alone.summaries[0], paired.summaries[k]);
        }
        let gap = paired
            .paired_gap(DistanceKind::AssociationLogLikelihood, DistanceKind::Mahalanobis)
            .unwrap();
        let direct = paired.summaries[1].mean_rate - paired.summaries[0].mean_rate;
        assert!((gap.mean - direct).abs() < 1e-9);
    }

    #[test]
    fn zero_batches_rejected() {
        assert!(run_batches(&cfg(3), 0, 10).is_err());
        assert!(run_batches(&cfg(3), 1, 0).is_err());
    }
}
