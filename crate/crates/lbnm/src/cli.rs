//! Subcommands behind the `lbnm` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lbnm_core::metrics::FieldSample;
use lbnm_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{self as ex, Setup};
use crate::io::{self, num};

#[derive(Debug, Parser)]
#[command(name = "lbnm", version, about = "Learned boundary-to-interior operators for the damped Helmholtz equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (key = value with [section] headers). Defaults apply without one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides output.seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn, apply on the interior grid, write field.csv and summary.json.
    Solve,
    /// BB and FS errors per geometry and damping ratio.
    StabilitySweep {
        /// Comma separated ratios, overriding sweep.ratios.
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Errors for a range of M at fixed N, with fitted slopes.
    Convergence,
    /// Single against multi-center bases on the same boundary.
    Multicenter,
    /// Learn and write the operator, its boundary data and targets.
    Export,
    /// Apply an exported operator to boundary data at targets.
    Apply {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        /// Also time this many random right-hand sides.
        #[arg(long, default_value_t = 0)]
        repeat: usize,
    },
    /// GCV function over the α grid.
    GcvCurve,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_summary(dir: &Path, command: &str, cfg: Option<&ExperimentConfig>, body: Value) -> Result<()> {
    let mut v = json!({ "command": command });
    if let Some(c) = cfg {
        v["config"] = Value::String(c.render());
    }
    v["result"] = body;
    let text = serde_json::to_string_pretty(&v).expect("plain json");
    io::write_text(&out_path(dir, "summary.json"), &(text + "\n"))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain json")
}

pub fn run(cli: Cli) -> Result<()> {
    let common = cli.common;
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
    let pool = ex::pool(common.threads)?;
    let dir = common.out.as_path();
    match cli.command {
        Command::Solve => {
            let cfg = load_config(&common)?;
            let out = ex::solve(&pool, &cfg)?;
            io::write_field_csv(&out_path(dir, "field.csv"), &out.sample)?;
            write_summary(dir, "solve", Some(&cfg), to_json(&out.summary))
        }
        Command::StabilitySweep { ratios } => {
            let mut cfg = load_config(&common)?;
            if let Some(r) = ratios {
                cfg.sweep.ratios = parse_ratios(&r)?;
            }
            let rows = ex::stability_sweep(&pool, &cfg)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.geometry.clone(),
                        num(r.ratio),
                        r.method.into(),
                        r.n.to_string(),
                        r.m.to_string(),
                        num(r.alpha),
                        num(r.error),
                        num(r.relative_training_residual),
                    ]
                })
                .collect();
            io::write_table(
                &out_path(dir, "stability.csv"),
                &["geometry", "ratio", "method", "n", "m", "alpha", "error", "training_residual"],
                &table,
            )?;
            write_summary(dir, "stability-sweep", Some(&cfg), json!({ "rows": to_json(&rows) }))
        }
        Command::Convergence => {
            let cfg = load_config(&common)?;
            let out = ex::convergence(&pool, &cfg)?;
            let table: Vec<Vec<String>> = out
                .rows
                .iter()
                .map(|r| vec![r.m.to_string(), r.method.into(), num(r.alpha), num(r.error)])
                .collect();
            io::write_table(&out_path(dir, "convergence.csv"), &["m", "method", "alpha", "error"], &table)?;
            write_summary(dir, "convergence", Some(&cfg), to_json(&out))
        }
        Command::Multicenter => {
            let cfg = load_config(&common)?;
            let out = ex::multicenter(&pool, &cfg)?;
            let mut table = Vec::new();
            for fld in &out {
                for p in [&fld.single, &fld.multi, &fld.reference] {
                    table.push(vec![
                        fld.field.clone(),
                        p.label.clone(),
                        p.m.to_string(),
                        num(p.alpha),
                        num(p.training_residual),
                        num(p.boundary_residual),
                        num(p.tip_median),
                        num(p.back_median),
                    ]);
                    let rows: Vec<Vec<String>> = p
                        .points
                        .iter()
                        .zip(&p.residuals)
                        .enumerate()
                        .map(|(j, (q, r))| vec![j.to_string(), num(q.x), num(q.y), num(*r)])
                        .collect();
                    io::write_table(
                        &out_path(dir, &format!("profile_{}_{}.csv", fld.field, p.label)),
                        &["j", "x", "y", "residual"],
                        &rows,
                    )?;
                }
            }
            io::write_table(
                &out_path(dir, "multicenter.csv"),
                &["field", "basis", "m", "alpha", "training_residual", "boundary_residual", "tip_median", "back_median"],
                &table,
            )?;
            write_summary(dir, "multicenter", Some(&cfg), to_json(&out))
        }
        Command::Export => {
            let cfg = load_config(&common)?;
            let setup = Setup::from_config(&cfg)?;
            let out = ex::solve_on(&pool, &setup, None, cfg.grid_h)?;
            io::write_operator(&out_path(dir, "operator.txt"), &out.op)?;
            io::write_complex_csv(&out_path(dir, "boundary.csv"), &out.f)?;
            io::write_points_csv(&out_path(dir, "targets.csv"), &out.sample.points)?;
            io::write_field_csv(&out_path(dir, "field.csv"), &out.sample)?;
            write_summary(dir, "export", Some(&cfg), to_json(&out.summary))
        }
        Command::Apply { operator, boundary, targets, repeat } => {
            let seed = match &common.config {
                Some(_) => load_config(&common)?.seed,
                None => common.seed.unwrap_or(0),
            };
            let op = io::read_operator(&operator)?;
            let f = io::read_complex_csv(&boundary)?;
            let pts = io::read_points_csv(&targets)?;
            let t = Instant::now();
            let values = op.apply(&f, &pts)?;
            let single = t.elapsed().as_secs_f64();
            let n = pts.len();
            let sample = FieldSample { points: pts.clone(), values, truth: None, valid: vec![true; n] };
            io::write_field_csv(&out_path(dir, "field.csv"), &sample)?;
            let mut body = json!({ "targets": n, "alpha": op.alpha(), "apply_seconds": single });
            if repeat > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let fs: Vec<Vec<C64>> = (0..repeat)
                    .map(|_| (0..f.len()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
                    .collect();
                let t = Instant::now();
                op.apply_many(&fs, &pts)?;
                body["repeat"] = json!(repeat);
                body["seconds_per_solve"] = json!(t.elapsed().as_secs_f64() / repeat as f64);
            }
            write_summary(dir, "apply", None, body)
        }
        Command::GcvCurve => {
            let cfg = load_config(&common)?;
            let rep = ex::gcv_curve(&cfg)?;
            let rows: Vec<Vec<String>> = rep
                .curve
                .alphas
                .iter()
                .zip(&rep.curve.values)
                .map(|(a, g)| vec![num(*a), num(*g)])
                .collect();
            io::write_table(&out_path(dir, "gcv.csv"), &["alpha", "G"], &rows)?;
            write_summary(dir, "gcv-curve", Some(&cfg), to_json(&rep))
        }
    }
}

fn parse_ratios(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|r| *r >= 0.0)
                .ok_or_else(|| CliError::Invalid(format!("bad damping ratio `{x}`")))
        })
        .collect()
}
