//! Monte-Carlo evaluation of switch-based hybrid precoders: seeded sweeps
//! over SNR and stream count, CSV records, summaries and SVG plots.
//!
//! ```
//! use switchbf_experiment::{run_sweep, summarize, ExperimentConfig, Method};
//!
//! let config = ExperimentConfig {
//!     trials: 2,
//!     snr_db_list: vec![0.0, 10.0],
//!     methods: vec![Method::Uop, Method::ShdQrqu],
//!     ..Default::default()
//! };
//! let records = run_sweep(&config)?;
//! assert_eq!(records.len(), 2 * 2 * 2);
//! let summary = summarize(&records)?;
//! assert!(summary.iter().all(|row| row.count == 2));
//! # Ok::<(), switchbf_experiment::ExperimentError>(())
//! ```

pub mod config;
pub mod error;
pub mod plot;
pub mod summary;
pub mod sweep;

pub use config::{ConnectivityRef, ExperimentConfig, Method};
pub use error::{ExperimentError, Result};
pub use plot::{emit_plot, render_svg};
pub use summary::{summarize, SummaryRow};
pub use sweep::{run_sweep, write_records_csv, MetricRecord};
