use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ExperimentConfig, ExperimentResult, RegretCurve};
use crate::error::{Error, Result};

pub const REGRET_FILE: &str = "regret.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";

/// `episode,trial_0,..,trial_{T-1},mean,std`, one row per episode (1-based),
/// trial columns holding cumulative regret.
pub fn regret_csv(curve: &RegretCurve) -> String {
    let mut out = String::from("episode");
    for t in 0..curve.trials() {
        let _ = write!(out, ",trial_{t}");
    }
    out.push_str(",mean,std\n");
    for k in 0..curve.episodes() {
        let _ = write!(out, "{}", k + 1);
        for c in &curve.cumulative {
            let _ = write!(out, ",{}", c[k]);
        }
        let _ = writeln!(out, ",{},{}", curve.mean[k], curve.std[k]);
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `regret.csv`, `config.json` and, when diagnostics were collected,
/// `diagnostics.jsonl` into `dir` (created if missing).
pub fn write_outputs(
    result: &ExperimentResult,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(REGRET_FILE), &regret_csv(&result.curve))?;

    let json = serde_json::to_string_pretty(&config.resolved())
        .map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join(CONFIG_FILE), &(json + "\n"))?;

    if config.diagnostics {
        let mut lines = String::new();
        for record in result.diagnostics.iter().flatten() {
            let line = serde_json::to_string(record).map_err(|e| Error::Config(e.to_string()))?;
            lines.push_str(&line);
            lines.push('\n');
        }
        write_file(&dir.join(DIAGNOSTICS_FILE), &lines)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let curve = RegretCurve::from_instantaneous(vec![vec![1.0, 0.5], vec![0.0, 0.25]]);
        assert_eq!(
            regret_csv(&curve),
            "episode,trial_0,trial_1,mean,std\n\
             1,1,0,0.5,0.7071067811865476\n\
             2,1.5,0.25,0.875,0.8838834764831844\n"
        );
    }
}
