//! Experiment plumbing: sweeps over `t`, least-squares fits, SVG plots and
//! a small `key=value` configuration format.

mod config;
mod fit;
mod plot;
mod sweep;

pub use config::{default_jobs, parse_config, read_config, JOBS_ENV};
pub use fit::{fit, fit_csv, read_columns, FitResult};
pub use plot::{plot_csv, render_svg, PlotSpec};
pub use sweep::{
    calibrate_proposition, log_spaced, sweep, sweep_csv, write_sweep_csv, Calibration, SweepRecord,
    SweepRow, SWEEP_COLUMNS,
};

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Runs `f` on a dedicated pool of `jobs` workers.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| crate::Error::Precondition(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}
