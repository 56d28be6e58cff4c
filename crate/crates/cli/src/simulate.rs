use std::io::Write;
use std::path::PathBuf;

use assoc_core::{run_batches, DistanceKind, ScenarioConfig, SimulationReport};
use serde_json::json;

use crate::config::{model_from, parse_distances, regime_from, resolve_seed, FileConfig};
use crate::error::{CliError, Result};
use crate::manifest::{output_name, Job, RunManifest};
use crate::{write_file, write_stdout, ScenarioArgs, SimulateArgs};

pub const DEFAULT_BATCHES: usize = 10;
pub const DEFAULT_PER_BATCH: usize = 10_000;
pub const CSV_COLUMNS: &str = "regime,model_policy,distance,n_tracks,batch,rate_percent";

/// Resolved scenario parameters shared by `simulate` and `tables`:
/// defaults, then the config file, then flags.
pub(crate) fn resolve_common(common: &ScenarioArgs) -> Result<(FileConfig, ScenarioConfig, usize, usize)> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut cfg = ScenarioConfig::default();
    file.apply(&mut cfg)?;
    if let Some(dt) = common.dt {
        cfg.dt = dt;
    }
    cfg.seed = resolve_seed(common.seed, &file)?;
    let batches = common.batches.or(file.run.batches).unwrap_or(DEFAULT_BATCHES);
    let per_batch = common.per_batch.or(file.run.per_batch).unwrap_or(DEFAULT_PER_BATCH);
    if batches == 0 {
        return Err(CliError::config("field `batches`: must be at least 1"));
    }
    if per_batch == 0 {
        return Err(CliError::config("field `per_batch`: must be at least 1"));
    }
    Ok((file, cfg, batches, per_batch))
}

#[derive(Debug, Clone)]
pub struct SimulatePlan {
    pub manifest: RunManifest,
    pub config: ScenarioConfig,
    pub n_batches: usize,
    pub scenarios_per_batch: usize,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn plan(args: &SimulateArgs) -> Result<SimulatePlan> {
    let (config, n_batches, scenarios_per_batch, out, summary) = match &args.common.manifest {
        Some(path) => {
            let manifest = RunManifest::load(path)?;
            let Job::Simulate {
                config,
                n_batches,
                scenarios_per_batch,
            } = manifest.job
            else {
                return Err(CliError::config(format!("{}: not a simulate manifest", path.display())));
            };
            let recorded = |k: usize| manifest.outputs.get(k).cloned().flatten().map(PathBuf::from);
            let out = args.out.clone().or_else(|| recorded(0));
            let summary = args.summary.clone().or_else(|| recorded(1));
            (config, n_batches, scenarios_per_batch, out, summary)
        }
        None => {
            let (_, mut cfg, batches, per_batch) = resolve_common(&args.common)?;
            if let Some(n) = args.n_tracks {
                cfg.n_tracks = n;
            }
            if let Some(r) = &args.regime {
                cfg.regime = regime_from(r)?;
            }
            if let Some(m) = &args.model {
                cfg.model_policy = model_from(m)?;
            }
            if let Some(d) = &args.distance {
                cfg.distances = parse_distances(d)?;
            }
            (cfg, batches, per_batch, args.out.clone(), args.summary.clone())
        }
    };
    config.validate()?;
    let manifest = RunManifest::new(
        Job::Simulate {
            config: config.clone(),
            n_batches,
            scenarios_per_batch,
        },
        vec![output_name(out.as_deref()), output_name(summary.as_deref())],
    );
    Ok(SimulatePlan {
        manifest,
        config,
        n_batches,
        scenarios_per_batch,
        out,
        summary,
    })
}

pub fn render_csv(manifest: &RunManifest, report: &SimulationReport) -> String {
    let cfg = &report.config;
    let mut csv = manifest.csv_header();
    csv.push_str(CSV_COLUMNS);
    csv.push('\n');
    for (kind, summary) in cfg.distances.iter().zip(&report.summaries) {
        for (b, rate) in summary.batch_rates.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{:.1}\n",
                cfg.regime,
                cfg.model_policy,
                kind,
                cfg.n_tracks,
                b + 1,
                rate
            ));
        }
    }
    csv
}

pub fn render_summary(manifest: &RunManifest, report: &SimulationReport) -> String {
    let cfg = &report.config;
    let results: Vec<_> = cfg
        .distances
        .iter()
        .zip(&report.summaries)
        .map(|(kind, s)| {
            json!({
                "regime": cfg.regime.label(),
                "model_policy": cfg.model_policy.label(),
                "distance": kind.label(),
                "n_tracks": cfg.n_tracks,
                "batch_rates": s.batch_rates,
                "mean_rate": s.mean_rate,
                "max_abs_deviation_from_mean": s.max_abs_deviation_from_mean,
            })
        })
        .collect();
    let mut gaps = Vec::new();
    for (i, &a) in cfg.distances.iter().enumerate() {
        for &b in &cfg.distances[i + 1..] {
            let (a, b) = if a == DistanceKind::Mahalanobis { (b, a) } else { (a, b) };
            if let Some(g) = report.paired_gap(a, b) {
                gaps.push(json!({
                    "minuend": a.label(),
                    "subtrahend": b.label(),
                    "mean": g.mean,
                    "standard_error": g.standard_error,
                }));
            }
        }
    }
    let doc = json!({
        "manifest_sha256": manifest.sha256(),
        "manifest": manifest,
        "results": results,
        "paired_gaps": gaps,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

/// Runs the plan and returns the CSV and JSON summary texts.
pub fn execute(plan: &SimulatePlan) -> Result<(String, String)> {
    let report = run_batches(&plan.config, plan.n_batches, plan.scenarios_per_batch)?;
    Ok((render_csv(&plan.manifest, &report), render_summary(&plan.manifest, &report)))
}

pub fn run(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let plan = plan(args)?;
    let (csv, summary) = execute(&plan)?;
    match &plan.out {
        Some(path) => write_file(path, &csv)?,
        None => write_stdout(stdout, &csv)?,
    }
    if let Some(path) = &plan.summary {
        write_file(path, &summary)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(n: usize) -> SimulateArgs {
        SimulateArgs {
            common: ScenarioArgs {
                batches: Some(3),
                per_batch: Some(20),
                seed: Some(5),
                ..Default::default()
            },
            n_tracks: Some(n),
            distance: Some("maha,asso-ll".into()),
            ..Default::default()
        }
    }

    #[test]
    fn csv_shape() {
        let plan = plan(&args(4)).unwrap();
        let (csv, summary) = execute(&plan).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], CSV_COLUMNS);
        assert_eq!(rows.len(), 1 + 2 * 3);
        assert!(rows[1].starts_with("steady,h1,maha,4,1,"));
        assert!(rows[6].starts_with("steady,h1,asso-ll,4,3,"));
        let doc: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(doc["results"].as_array().unwrap().len(), 2);
        assert_eq!(doc["paired_gaps"][0]["minuend"], "asso-ll");
        assert_eq!(doc["manifest_sha256"], plan.manifest.sha256());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut a = args(0);
        assert_eq!(plan(&a).unwrap_err().exit_code(), 2);
        a = args(3);
        a.regime = Some("sideways".into());
        let err = plan(&a).unwrap_err();
        assert!(err.to_string().contains("regime"));
        a = args(3);
        a.common.dt = Some(-1.0);
        assert_eq!(plan(&a).unwrap_err().exit_code(), 2);
    }
}
