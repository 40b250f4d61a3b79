//! Config-driven sweep: run the plane suite over a delta list and emit the
//! CSV reports, exactly as the `sweep` CLI subcommand does.
//!
//! Run with: cargo run --example convergence_sweep

use lamin_smooth::config::ExperimentConfig;
use lamin_smooth::sweep::{emit_reports, resolve_workers, run_sweep};

fn main() -> lamin_smooth::Result<()> {
    let mut config = ExperimentConfig::default();
    config.family = "canonical-osgood".into();
    config.smoothing.deltas = vec![0.1, 0.05, 0.025, 0.0125];
    config.smoothing.grid_j = vec![16, 32];
    config.sampling.nx = 48;
    config.sampling.ny = 48;
    config.sampling.leaves = 32;
    config.output.dir = std::env::temp_dir().join("lamin-smooth-sweep");

    let workers = resolve_workers(None, config.workers);
    let result = run_sweep(&config, workers)?;
    emit_reports(&result, &config.output.dir, config.output.plot_data)?;
    println!(
        "aggregate: {} ({} cells), reports in {}",
        if result.pass { "pass" } else { "FAIL" },
        result.cells.len(),
        config.output.dir.display()
    );
    Ok(())
}
