//! CSV tables and the JSON provenance sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::LearnerTemplate;
use crate::error::{Error, Result};
use crate::game::{GameParams, IncentiveScheme, StageGame};
use crate::harness::config::Arm;
use crate::harness::experiment::{ArmTable, ExperimentResult, StatsRow};
use crate::stackelberg::{SignalingPolicy, StackelbergSolution};

pub const ARM_HEADER: &str = "t,delta_mean,delta_std,regret_mean,regret_std,payment_avg,bound";
pub const COMBINED_HEADER: &str =
    "t,arm,delta_mean,delta_std,regret_mean,regret_std,payment_avg,bound";

fn row_fields(r: &StatsRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.delta_mean, r.delta_std, r.regret_mean, r.regret_std, r.payment_avg, r.bound
    )
}

pub fn arm_csv(table: &ArmTable) -> String {
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(ARM_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(out, "{},{}", r.t, row_fields(r));
    }
    out
}

pub fn combined_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str(COMBINED_HEADER);
    out.push('\n');
    for table in &result.arms {
        for r in &table.rows {
            let _ = writeln!(out, "{},{},{}", r.t, table.arm.as_str(), row_fields(r));
        }
    }
    out
}

#[derive(Serialize)]
struct ArmMeta<'a> {
    arm: Arm,
    rows: usize,
    gamma_frac: Option<f64>,
    file: &'a str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    name: &'a str,
    config_hash: &'a str,
    seed: u64,
    runs: usize,
    horizon: u64,
    stride: u64,
    params: &'a GameParams,
    game: StageGame,
    scheme: &'a IncentiveScheme,
    policy: SignalingPolicy,
    learner: &'a LearnerTemplate,
    floor: f64,
    kappa: f64,
    equilibrium: Option<&'a StackelbergSolution>,
    warnings: &'a [String],
    arms: Vec<ArmMeta<'a>>,
    version: &'static str,
}

pub fn sidecar_json(result: &ExperimentResult) -> Result<String> {
    let cfg = &result.config;
    let files: Vec<String> = result
        .arms
        .iter()
        .map(|t| format!("{}_{}.csv", cfg.name, t.arm.as_str()))
        .collect();
    let sidecar = Sidecar {
        name: &cfg.name,
        config_hash: &result.config_hash,
        seed: cfg.seed,
        runs: cfg.runs,
        horizon: cfg.horizon,
        stride: cfg.stride,
        params: &cfg.params,
        game: cfg.game()?,
        scheme: &cfg.scheme,
        policy: result.policy,
        learner: &cfg.learner,
        floor: cfg.floor,
        kappa: result.kappa,
        equilibrium: result.equilibrium.as_ref(),
        warnings: &result.warnings,
        arms: result
            .arms
            .iter()
            .zip(&files)
            .map(|(t, f)| ArmMeta {
                arm: t.arm,
                rows: t.rows.len(),
                gamma_frac: t.gamma_frac,
                file: f,
            })
            .collect(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut s = serde_json::to_string_pretty(&sidecar)?;
    s.push('\n');
    Ok(s)
}

/// Writes `{name}_{arm}.csv` per arm, `{name}_combined.csv` and
/// `{name}_meta.json` into `dir`. Existing files are only replaced with `force`.
pub fn emit_plot_data(result: &ExperimentResult, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    if result.arms.is_empty() {
        return Err(Error::invalid("arms", "nothing to emit"));
    }
    let name = &result.config.name;
    let mut files: Vec<(PathBuf, String)> = result
        .arms
        .iter()
        .map(|t| {
            (
                dir.join(format!("{name}_{}.csv", t.arm.as_str())),
                arm_csv(t),
            )
        })
        .collect();
    files.push((
        dir.join(format!("{name}_combined.csv")),
        combined_csv(result),
    ));
    files.push((dir.join(format!("{name}_meta.json")), sidecar_json(result)?));

    if !force {
        if let Some((p, _)) = files.iter().find(|(p, _)| p.exists()) {
            return Err(Error::WouldClobber(p.display().to_string()));
        }
    }
    fs::create_dir_all(dir)?;
    for (path, body) in &files {
        fs::write(path, body)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
