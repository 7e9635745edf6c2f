//! Entry points behind the command-line subcommands.

use std::path::Path;

use super::lemmas::{check_lemmas, LemmaSuiteReport};
use super::{deltas_csv, load_config, render_report, run_to_dir, RunReport};
use crate::{Error, Result};

/// Thread count from the flag, then `PPFLOW_THREADS`; `None` keeps rayon's default.
pub fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("PPFLOW_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::config("PPFLOW_THREADS", format!("not a thread count: {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::config("threads", "must be positive"));
        }
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

/// Loads, runs and writes artifacts. A run that does not converge still
/// writes everything and then reports non-convergence.
pub fn cli_run(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<RunReport> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_to_dir(&cfg, out_dir)?;
    if !report.converged() {
        return Err(Error::NonConvergence {
            t_max: report.t_end,
            residual: report.final_residual,
        });
    }
    Ok(report)
}

pub fn cli_check_lemmas(n: usize, p: usize, samples: usize, seed: u64) -> Result<LemmaSuiteReport> {
    check_lemmas(n, p, samples, seed)
}

/// Renders `report.json` as text into `out`, with the `δ_k` table beside it
/// as `<out>.deltas.csv`. Returns the rendered text.
pub fn cli_report(report_json: &Path, out: Option<&Path>) -> Result<String> {
    let text = std::fs::read_to_string(report_json)?;
    let report: RunReport = serde_json::from_str(&text)
        .map_err(|e| Error::Argument(format!("{}: not a run report: {e}", report_json.display())))?;
    let rendered = render_report(&report);
    if let Some(out) = out {
        std::fs::write(out, &rendered)?;
        let mut csv = out.as_os_str().to_owned();
        csv.push(".deltas.csv");
        std::fs::write(csv, deltas_csv(&report))?;
    }
    Ok(rendered)
}
