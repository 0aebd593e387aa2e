//! Cross-product sweeps with per-cell state files for resuming.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pinnbench_core::trainer::{self, StdClock};
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig};
use crate::{io, write_run, CliError, EXIT_DIVERGED, EXIT_OK};

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub layers: usize,
    pub neurons: usize,
    pub seed: u64,
    pub rmse_oracle: Option<f64>,
    pub rmse_fd: Option<f64>,
    pub final_loss: f64,
    pub wall_seconds: f64,
    pub diverged: bool,
}

/// What a cell-state file holds: the exact cell config and its outcome.
#[derive(Debug, Serialize, Deserialize)]
struct CellState {
    config: ExperimentConfig,
    result: CellResult,
}

fn cell_config(cfg: &ExperimentConfig, cell: &Cell) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.layers = vec![cell.layers];
    c.neurons = vec![cell.neurons];
    c.seeds = vec![cell.seed];
    c.output_dir = None;
    c
}

fn state_path(dir: &Path, cell: &Cell) -> PathBuf {
    dir.join("cells").join(format!("{}x{}_s{}.json", cell.layers, cell.neurons, cell.seed))
}

/// A finished cell whose stored config matches, if any.
fn load_state(path: &Path, want: &ExperimentConfig) -> Option<CellResult> {
    let text = std::fs::read_to_string(path).ok()?;
    let st: CellState = serde_json::from_str(&text).ok()?;
    (st.config == *want).then_some(st.result)
}

pub fn run_sweep(cfg: &ExperimentConfig, root: &Path, jobs: usize, force: bool) -> Result<i32, CliError> {
    let dir = match &cfg.output_dir {
        Some(d) => root.join(d),
        None => root.to_path_buf(),
    };
    let cells = cfg.cells()?;
    let mut results: Vec<Option<CellResult>> = cells
        .iter()
        .map(|c| if force { None } else { load_state(&state_path(&dir, c), &cell_config(cfg, c)) })
        .collect();
    let todo: Vec<usize> = (0..cells.len()).filter(|&i| results[i].is_none()).collect();
    let skipped = cells.len() - todo.len();
    if skipped > 0 {
        println!("resuming: {skipped} of {} cells already done", cells.len());
    }

    if !todo.is_empty() {
        let refs = trainer::references(&cells[0].train.problem, cfg.scale)?;
        let next = AtomicUsize::new(0);
        let done: Mutex<Vec<(usize, Result<CellResult, CliError>)>> = Mutex::new(Vec::new());
        let worker = || loop {
            let k = next.fetch_add(1, Ordering::Relaxed);
            let Some(&i) = todo.get(k) else { break };
            let cell = &cells[i];
            let out = run_cell(cfg, cell, &dir, &refs);
            if let Ok(r) = &out {
                println!(
                    "{}x{} s{}: rmse_oracle={} rmse_fd={} diverged={} ({:.1}s)",
                    r.layers,
                    r.neurons,
                    r.seed,
                    crate::fmt_opt(r.rmse_oracle),
                    crate::fmt_opt(r.rmse_fd),
                    r.diverged,
                    r.wall_seconds
                );
            }
            done.lock().unwrap().push((i, out));
        };
        std::thread::scope(|s| {
            for _ in 0..jobs.min(todo.len()) {
                s.spawn(worker);
            }
        });
        for (i, r) in done.into_inner().unwrap() {
            results[i] = Some(r?);
        }
    }

    let rows: Vec<CellResult> = results.into_iter().map(|r| r.expect("every cell finished")).collect();
    io::write_file(&dir.join("results_raw.csv"), raw_csv(&rows).as_bytes())?;
    io::write_file(&dir.join("results_table.csv"), table_csv(cfg, &rows).as_bytes())?;
    io::write_file(&dir.join("timings.csv"), timings_csv(&rows).as_bytes())?;
    println!("{} cells -> {}", rows.len(), dir.join("results_table.csv").display());
    Ok(if rows.iter().any(|r| r.diverged) { EXIT_DIVERGED } else { EXIT_OK })
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    dir: &Path,
    refs: &trainer::References,
) -> Result<CellResult, CliError> {
    let r = trainer::train_with(&cell.train, Some(refs), &StdClock::default())?;
    let tag = cell.tag(&cfg.problem);
    write_run(&dir.join("runs"), &tag, cfg, cell, &r, refs, false)?;
    let result = CellResult {
        layers: cell.layers,
        neurons: cell.neurons,
        seed: cell.seed,
        rmse_oracle: r.rmse_oracle.as_ref().map(|x| x.all),
        rmse_fd: r.rmse_fd.as_ref().map(|x| x.all),
        final_loss: r.final_loss.total,
        wall_seconds: r.seconds,
        diverged: r.diverged(),
    };
    let state = CellState { config: cell_config(cfg, cell), result: result.clone() };
    let json = serde_json::to_string_pretty(&state).expect("state serializes");
    io::write_file(&state_path(dir, cell), json.as_bytes())?;
    Ok(result)
}

/// One line per cell; wall time lives in timings.csv so this file is reproducible.
pub fn raw_csv(rows: &[CellResult]) -> String {
    let mut s = String::from("layers,neurons,seed,rmse_oracle,rmse_fd,final_loss,diverged\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.layers,
            r.neurons,
            r.seed,
            crate::fmt_opt(r.rmse_oracle),
            crate::fmt_opt(r.rmse_fd),
            r.final_loss,
            r.diverged
        ));
    }
    s
}

/// Layers down, neurons across, best seed per cell; one block per reference.
pub fn table_csv(cfg: &ExperimentConfig, rows: &[CellResult]) -> String {
    let mut s = String::new();
    let pick: [(&str, fn(&CellResult) -> Option<f64>); 2] = [("oracle", |r| r.rmse_oracle), ("fd", |r| r.rmse_fd)];
    for (name, get) in pick {
        if rows.iter().all(|r| get(r).is_none()) {
            continue;
        }
        let mut best: BTreeMap<(usize, usize), Option<f64>> = BTreeMap::new();
        for r in rows {
            let e = best.entry((r.layers, r.neurons)).or_insert(None);
            if let Some(v) = get(r).filter(|v| v.is_finite() && !r.diverged) {
                *e = Some(e.map_or(v, |b: f64| b.min(v)));
            }
        }
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str(&format!("reference,{name}\nlayers\\neurons"));
        for n in &cfg.neurons {
            s.push_str(&format!(",{n}"));
        }
        s.push('\n');
        for l in &cfg.layers {
            s.push_str(&l.to_string());
            for n in &cfg.neurons {
                let v = best.get(&(*l, *n)).copied().flatten();
                s.push(',');
                s.push_str(&v.map_or("diverged".into(), |v| format!("{v}")));
            }
            s.push('\n');
        }
    }
    s
}

/// Wall-clock seconds plus the min:sec form used in published runtime tables.
pub fn timings_csv(rows: &[CellResult]) -> String {
    let mut s = String::from("layers,neurons,seed,wall_seconds,min_sec\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.3},{}\n",
            r.layers,
            r.neurons,
            r.seed,
            r.wall_seconds,
            min_sec(r.wall_seconds)
        ));
    }
    s
}

pub fn min_sec(secs: f64) -> String {
    let t = secs.max(0.0).round() as u64;
    format!("{}:{:02}", t / 60, t % 60)
}
