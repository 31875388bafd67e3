//! Executes an experiment over a worker pool and writes its artifacts.

use crate::config::ExperimentConfig;
use crate::experiments::{plan, Experiment, Partial};
use ftn_tbp::rng::derive_seed;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

pub const CHECKPOINT_INTERVAL: Duration = Duration::from_secs(60);

#[derive(Debug)]
pub enum RunError {
    Io(io::Error),
    /// Some points failed; partial artifacts and a FAILED manifest exist.
    Numeric(Vec<String>),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Numeric(errs) => write!(f, "{} point(s) failed; first: {}", errs.len(), errs[0]),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub resume: bool,
    pub checkpoint_interval: Duration,
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
    pub resumed_points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    parts: BTreeMap<usize, Partial>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(bytes)?;
    fs::rename(tmp, path)
}

fn save_checkpoint(path: &Path, fingerprint: &str, parts: &[Option<Partial>]) -> io::Result<()> {
    let cp = Checkpoint {
        fingerprint: fingerprint.to_string(),
        parts: parts.iter().enumerate().filter_map(|(i, p)| p.clone().map(|p| (i, p))).collect(),
    };
    write_atomic(path, &serde_json::to_vec(&cp).expect("checkpoint serializes"))
}

fn load_checkpoint(path: &Path, fingerprint: &str, len: usize) -> Vec<Option<Partial>> {
    let mut parts = vec![None; len];
    let Ok(text) = fs::read_to_string(path) else {
        return parts;
    };
    match serde_json::from_str::<Checkpoint>(&text) {
        Ok(cp) if cp.fingerprint == fingerprint => {
            for (i, p) in cp.parts {
                if i < len {
                    parts[i] = Some(p);
                }
            }
        }
        Ok(_) => log::warn!("checkpoint {} belongs to a different configuration; starting over", path.display()),
        Err(e) => log::warn!("unreadable checkpoint {}: {e}; starting over", path.display()),
    }
    parts
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}

/// Runs `cfg`, writing `<output>.csv` and `<output>.manifest.json` into the
/// output directory. The manifest is written on every path that gets past
/// directory creation.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Artifacts, RunError> {
    let start = Instant::now();
    fs::create_dir_all(&opts.out_dir)?;
    let csv = opts.out_dir.join(format!("{}.csv", cfg.output));
    let manifest = opts.out_dir.join(format!("{}.manifest.json", cfg.output));
    let checkpoint = opts.out_dir.join(format!("{}.checkpoint.json", cfg.output));
    let threads = pool(cfg.workers);
    let workers = threads.current_num_threads();

    let exp = match threads.install(|| plan(cfg)) {
        Ok(e) => e,
        Err(e) => {
            let msg = format!("planning: {e}");
            let m = json!({
                "status": "FAILED",
                "experiment": cfg.experiment,
                "config": cfg,
                "seed": cfg.seed,
                "versions": versions(),
                "wall_time_s": start.elapsed().as_secs_f64(),
                "workers": workers,
                "errors": [msg],
            });
            write_atomic(&manifest, serde_json::to_string_pretty(&m).expect("manifest").as_bytes())?;
            return Err(RunError::Numeric(vec![msg]));
        }
    };

    let fingerprint = cfg.fingerprint();
    let len = exp.len();
    let mut parts = if opts.resume { load_checkpoint(&checkpoint, &fingerprint, len) } else { vec![None; len] };
    let resumed = parts.iter().filter(|p| p.is_some()).count();
    if resumed > 0 {
        log::info!("resuming {}: {resumed} of {len} points already done", cfg.output);
    }
    let pending: Vec<usize> = (0..len).filter(|&i| parts[i].is_none()).collect();
    let mut errors: BTreeMap<usize, String> = BTreeMap::new();

    let (tx, rx) = mpsc::channel();
    let exp_ref: &dyn Experiment = exp.as_ref();
    std::thread::scope(|s| -> io::Result<()> {
        s.spawn(move || {
            threads.install(|| {
                use rayon::prelude::*;
                pending.par_iter().for_each_with(tx, |tx, &i| {
                    let r = exp_ref.eval(i, derive_seed(cfg.seed, i as u64));
                    let _ = tx.send((i, r));
                });
            })
        });
        let mut last = Instant::now();
        for (i, r) in rx {
            match r {
                Ok(p) => parts[i] = Some(p),
                Err(e) => {
                    log::error!("point {i} failed: {e}");
                    errors.insert(i, e.to_string());
                }
            }
            if last.elapsed() >= opts.checkpoint_interval {
                save_checkpoint(&checkpoint, &fingerprint, &parts)?;
                last = Instant::now();
            }
        }
        Ok(())
    })?;

    let rows = exp.finish(&parts);
    write_atomic(&csv, csv_text(exp.header(), &rows).as_bytes())?;
    let failed = !errors.is_empty();
    if failed {
        save_checkpoint(&checkpoint, &fingerprint, &parts)?;
    } else if checkpoint.exists() {
        fs::remove_file(&checkpoint)?;
    }
    let points: Vec<Value> = (0..len)
        .map(|i| {
            let mut v = json!({
                "index": i,
                "seed": derive_seed(cfg.seed, i as u64),
                "params": exp.describe(i),
            });
            if let Some(p) = &parts[i] {
                v["status"] = json!("ok");
                v["diagnostics"] = p.diag.clone();
            } else {
                v["status"] = json!("error");
                v["error"] = json!(errors.get(&i));
            }
            v
        })
        .collect();
    let m = json!({
        "status": if failed { "FAILED" } else { "OK" },
        "experiment": cfg.experiment,
        "config": cfg,
        "seed": cfg.seed,
        "versions": versions(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "workers": workers,
        "csv": csv.file_name().map(|n| n.to_string_lossy().into_owned()),
        "columns": exp.header(),
        "rows": rows.len(),
        "resumed_points": resumed,
        "summary": exp.summary(),
        "points": points,
        "errors": errors.iter().map(|(i, e)| format!("point {i}: {e}")).collect::<Vec<_>>(),
    });
    write_atomic(&manifest, serde_json::to_string_pretty(&m).expect("manifest").as_bytes())?;
    if failed {
        return Err(RunError::Numeric(errors.into_iter().map(|(i, e)| format!("point {i}: {e}")).collect()));
    }
    Ok(Artifacts { csv, manifest, rows: rows.len(), resumed_points: resumed })
}

fn versions() -> Value {
    json!({"ftn-tbp": ftn_tbp::VERSION, "ftn-tbp-cli": env!("CARGO_PKG_VERSION")})
}
