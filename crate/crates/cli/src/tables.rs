use std::io::Write;
use std::path::PathBuf;

use assoc_core::{run_batches, ModelPolicy, ScenarioConfig};

use crate::error::{CliError, Result};
use crate::manifest::{Job, RunManifest};
use crate::published::{reference_rate, TableLayout, TABLES, TRACK_COUNTS};
use crate::simulate::resolve_common;
use crate::{write_file, write_stdout, TablesArgs};

pub const CSV_COLUMNS: &str = "distance,n_tracks,model_policy,rate_percent,paper_reference";

/// One rate cell of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub distance: assoc_core::DistanceKind,
    pub n_tracks: usize,
    pub model_policy: ModelPolicy,
    pub rate: f64,
    pub paper_reference: f64,
}

/// Runs every (N, policy) column of `table` with all of its distances paired.
pub fn table_cells(
    table: &TableLayout,
    base: &ScenarioConfig,
    n_batches: usize,
    scenarios_per_batch: usize,
) -> Result<Vec<Cell>> {
    let mut columns = Vec::new();
    for n_tracks in TRACK_COUNTS {
        for &policy in table.policies {
            let cfg = ScenarioConfig {
                n_tracks,
                regime: table.regime,
                model_policy: policy,
                distances: table.distances.to_vec(),
                ..base.clone()
            };
            let report = run_batches(&cfg, n_batches, scenarios_per_batch)?;
            columns.push((n_tracks, policy, report));
        }
    }
    let mut cells = Vec::new();
    for (k, &distance) in table.distances.iter().enumerate() {
        for (n_tracks, policy, report) in &columns {
            cells.push(Cell {
                distance,
                n_tracks: *n_tracks,
                model_policy: *policy,
                rate: report.summaries[k].mean_rate,
                paper_reference: reference_rate(table.regime, *policy, distance, *n_tracks)
                    .expect("reference for every grid cell"),
            });
        }
    }
    Ok(cells)
}

pub fn render_table(manifest: &RunManifest, cells: &[Cell]) -> String {
    let mut csv = manifest.csv_header();
    csv.push_str(CSV_COLUMNS);
    csv.push('\n');
    for c in cells {
        csv.push_str(&format!(
            "{},{},{},{:.1},{:.1}\n",
            c.distance, c.n_tracks, c.model_policy, c.rate, c.paper_reference
        ));
    }
    csv
}

pub fn run(args: &TablesArgs, stdout: &mut dyn Write) -> Result<()> {
    let (base, n_batches, scenarios_per_batch) = match &args.common.manifest {
        Some(path) => match RunManifest::load(path)?.job {
            Job::Tables {
                base,
                n_batches,
                scenarios_per_batch,
            } => (base, n_batches, scenarios_per_batch),
            _ => return Err(CliError::config(format!("{}: not a tables manifest", path.display()))),
        },
        None => {
            let (_, cfg, batches, per_batch) = resolve_common(&args.common)?;
            (cfg, batches, per_batch)
        }
    };
    base.validate()?;
    let manifest = RunManifest::new(
        Job::Tables {
            base: base.clone(),
            n_batches,
            scenarios_per_batch,
        },
        TABLES.iter().map(|t| Some(t.file_name.to_string())).collect(),
    );
    for table in &TABLES {
        let cells = table_cells(table, &base, n_batches, scenarios_per_batch)?;
        let path: PathBuf = args.out_dir.join(table.file_name);
        write_file(&path, &render_table(&manifest, &cells))?;
        write_stdout(stdout, &format!("wrote {} ({})\n", path.display(), table.title))?;
    }
    Ok(())
}
