use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use matterwave::holography::io::write_csv as write_field_csv;
use matterwave::paramp::{run_series, GaussianState, MINUS, PLUS, PROBE};
use matterwave::spinor::{
    correlation_report, detect_revivals, first_population_maximum, run_population_series,
};
use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{self, Job, JobSpec, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::holo;

pub const FWM_COLUMNS: [&str; 14] = [
    "two_c2_t", "n1", "nm1", "n01", "n02", "g2_1", "g2_m1", "g2_01", "g2_02", "g2_1_m1", "g2_1_01",
    "r_1_m1", "r_1_01", "q_1_m1",
];

pub const PAMP_COLUMNS: [&str; 15] = [
    "omega_r_t",
    "I_a",
    "I_p",
    "I_m",
    "g2_a",
    "g2_p",
    "g2_m",
    "g2_am",
    "g2_ap",
    "g2_mp",
    "r_am",
    "q_am",
    "r_mp",
    "q_mp",
    "r_ap",
];

/// Run record written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub scenario: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub outputs: Vec<OutputEntry>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Path relative to the manifest.
    pub file: String,
    /// `data` for the primary table; `scan`, `density` or `inset` for holography extras.
    pub role: String,
    pub sha256: String,
    pub params: BTreeMap<String, String>,
    pub seconds: f64,
    #[serde(default)]
    pub summary: Option<serde_json::Value>,
}

struct Table {
    role: &'static str,
    bytes: Vec<u8>,
}

struct JobOutput {
    tables: Vec<Table>,
    seconds: f64,
    summary: serde_json::Value,
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn fwm_tables(
    scn: &matterwave::spinor::FwmScenario<f64>,
) -> matterwave::Result<(Vec<Table>, serde_json::Value)> {
    let report = correlation_report(scn)?;
    let rows = report
        .two_c2_t
        .iter()
        .zip(&report.snapshots)
        .map(|(&t, s)| {
            let pair = |i, j| s.pair(i, j).copied();
            let mut row = vec![num(t)];
            row.extend(s.intensities.iter().map(|&v| num(v)));
            row.extend(s.g2.iter().map(|&v| opt(v)));
            row.push(opt(pair(0, 1).and_then(|p| p.g2)));
            row.push(opt(pair(0, 2).and_then(|p| p.g2)));
            row.push(opt(pair(0, 1).and_then(|p| p.classical)));
            row.push(opt(pair(0, 2).and_then(|p| p.classical)));
            row.push(opt(pair(0, 1).and_then(|p| p.quantum)));
            row
        });
    let data = csv_bytes(&FWM_COLUMNS, rows);

    let series = run_population_series(scn)?;
    let first = first_population_maximum(&series);
    let revivals = detect_revivals(&series).ok();
    let summary = json!({
        "atoms": scn.total_atoms(),
        "first_maximum_time": first.map(|p| p.time),
        "first_maximum_n1": first.map(|p| p.value),
        "first_revival": revivals.and_then(|r| r.first().copied()),
    });
    Ok((
        vec![Table {
            role: "data",
            bytes: data,
        }],
        summary,
    ))
}

fn pamp_tables(
    params: &matterwave::paramp::ThreeModeParams<f64>,
    probe: Complex<f64>,
    grid: &[f64],
) -> matterwave::Result<(Vec<Table>, serde_json::Value)> {
    let z = Complex::default();
    let series = run_series(&GaussianState::coherent([probe, z, z]), params, grid)?;
    let rows = grid.iter().zip(&series).map(|(&t, (_, c))| {
        let i = c.intensities();
        vec![
            num(t),
            num(i[PROBE]),
            num(i[PLUS]),
            num(i[MINUS]),
            opt(c.g2(PROBE)),
            opt(c.g2(PLUS)),
            opt(c.g2(MINUS)),
            opt(c.g2_pair(PROBE, MINUS)),
            opt(c.g2_pair(PROBE, PLUS)),
            opt(c.g2_pair(MINUS, PLUS)),
            opt(c.classical_margin(PROBE, MINUS)),
            opt(c.quantum_margin(PROBE, MINUS)),
            opt(c.classical_margin(MINUS, PLUS)),
            opt(c.quantum_margin(MINUS, PLUS)),
            opt(c.classical_margin(PROBE, PLUS)),
        ]
    });
    let summary = json!({ "chi": params.chi, "delta": params.delta, "omega_r": params.omega_r });
    Ok((
        vec![Table {
            role: "data",
            bytes: csv_bytes(&PAMP_COLUMNS, rows),
        }],
        summary,
    ))
}

fn holo_tables(p: &holo::HoloParams) -> matterwave::Result<(Vec<Table>, serde_json::Value)> {
    let run = holo::run(p)?;
    let rec = &run.reconstruction;
    let mut image = Vec::new();
    write_field_csv(&rec.image, &mut image)?;

    let mut scan = rec.scan.clone();
    scan.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scan = csv_bytes(
        &["distance", "score"],
        scan.iter().map(|&(d, s)| vec![num(d), num(s)]),
    );

    let xs = run.grid.coordinates(0);
    let density = csv_bytes(
        &["x", "density", "potential", "trap"],
        (0..xs.len()).map(|k| {
            vec![
                num(xs[k]),
                num(run.hologram.profile.density[k]),
                num(run.hologram.potential.values()[k]),
                num(run.trap.values()[k]),
            ]
        }),
    );
    let inset = csv_bytes(
        &["x", "original", "reconstructed"],
        run.inset(p.object_width)
            .into_iter()
            .map(|(x, o, r)| vec![num(x), num(o), num(r)]),
    );
    let mut warnings = run.hologram.warnings.clone();
    warnings.extend(rec.warnings.iter().cloned());
    let summary = json!({
        "best_distance": rec.best_distance,
        "focus_estimate": run.focus_estimate,
        "score": rec.score,
        "image_position": rec.image_position,
        "de_broglie_wavelength": run.de_broglie,
        "eta": run.eta,
        "chemical_potential": run.hologram.profile.mu,
        "clipping_fraction": run.hologram.clipping_fraction,
        "fragmented": run.hologram.fragmented,
        "warnings": warnings,
    });
    Ok((
        vec![
            Table {
                role: "data",
                bytes: image,
            },
            Table {
                role: "scan",
                bytes: scan,
            },
            Table {
                role: "density",
                bytes: density,
            },
            Table {
                role: "inset",
                bytes: inset,
            },
        ],
        summary,
    ))
}

fn execute(job: &Job) -> CliResult<JobOutput> {
    let start = Instant::now();
    let (tables, summary) = match &job.spec {
        JobSpec::Fwm(scn) => fwm_tables(scn),
        JobSpec::Pamp {
            params,
            probe,
            omega_r_t,
        } => pamp_tables(params, *probe, omega_r_t),
        JobSpec::Holo(p) => holo_tables(p),
    }
    .map_err(|e| CliError::numerical(job.stem.clone(), e))?;
    Ok(JobOutput {
        tables,
        seconds: start.elapsed().as_secs_f64(),
        summary,
    })
}

pub fn file_name(stem: &str, role: &str) -> String {
    if role == "data" {
        format!("{stem}.csv")
    } else {
        format!("{stem}.{role}.csv")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn manifest_path(out_dir: &Path, scenario: &str) -> PathBuf {
    out_dir.join(format!("{scenario}.manifest.json"))
}

/// Options shared by `run` invocations.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub seed: Option<u64>,
}

/// Executes every job of a config and writes CSVs and the manifest.
///
/// Jobs run concurrently on `workers` threads; files are written afterwards
/// in job order, so the output never depends on scheduling.
pub fn run(config_path: &Path, options: &RunOptions) -> CliResult<(PathBuf, Manifest)> {
    let raw = std::fs::read(config_path).map_err(|e| CliError::io(config_path, e))?;
    let text =
        String::from_utf8(raw.clone()).map_err(|e| CliError::config("config", e.to_string()))?;
    let cfg: ScenarioConfig = config::parse(&text)?;
    let out_dir = options
        .out
        .clone()
        .or(cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let started = Instant::now();
    let workers = options.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config("--workers", e.to_string()))?;
    let results: Vec<CliResult<JobOutput>> =
        pool.install(|| cfg.jobs.par_iter().map(execute).collect());

    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut outputs = Vec::new();
    for (job, result) in cfg.jobs.iter().zip(results) {
        let out = result?;
        for table in out.tables {
            let name = file_name(&job.stem, table.role);
            let path = out_dir.join(&name);
            std::fs::write(&path, &table.bytes).map_err(|e| CliError::io(&path, e))?;
            outputs.push(OutputEntry {
                file: name,
                role: table.role.to_string(),
                sha256: sha256_hex(&table.bytes),
                params: job.params.iter().cloned().collect(),
                seconds: out.seconds,
                summary: (table.role == "data").then(|| out.summary.clone()),
            });
        }
    }
    let manifest = Manifest {
        tool: "mwsim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: cfg.kind.block().into(),
        scenario: cfg.name.clone(),
        config: config_path.display().to_string(),
        config_sha256: sha256_hex(&raw),
        seed: options.seed,
        workers,
        outputs,
        total_seconds: started.elapsed().as_secs_f64(),
    };
    let path = manifest_path(&out_dir, &cfg.name);
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, body + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok((path, manifest))
}

pub fn load_manifest(path: &Path) -> CliResult<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config("manifest", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0, 1e21] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_uses_bare_newlines() {
        let bytes = csv_bytes(&["a", "b"], [vec!["1.0".into(), String::new()]]);
        assert_eq!(bytes, b"a,b\n1.0,\n");
    }

    #[test]
    fn file_names_by_role() {
        assert_eq!(file_name("run__m=5__", "data"), "run__m=5__.csv");
        assert_eq!(file_name("holo", "scan"), "holo.scan.csv");
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
