//! Switch-based hybrid precoder design for mmWave massive-MIMO transmitters.
//!
//! The analog stage of a switch-based hybrid precoder is a binary matrix
//! `F_RF` (`N_t × k_t`): entry `(i, j)` closes the switch routing RF chain
//! `j` to antenna `i`. The digital stage `F_BB` (`k_t × N_s`) is complex.
//! This crate designs both for a known narrowband channel:
//!
//! * [`nm::design_shd_nm`] maximizes a Frobenius-norm surrogate of the
//!   mutual information by sequential linearization, guarded by a rank check,
//!   mutual-information acceptance and Gaussian randomization.
//! * [`qrqu::design_shd_qrqu`] maximizes the QR lower bound of the mutual
//!   information column by column.
//!
//! Both accept an optional [`ConnectivitySpec`] restricting which switches
//! exist. [`channel`] generates clustered channels and [`metrics`] evaluates
//! spectral efficiency and the unconstrained optimum.
//!
//! ```
//! use switchbf::channel::{generate_seeded, ChannelConfig};
//! use switchbf::metrics::{optimal_mutual_information, LinkBudget};
//! use switchbf::nm::{design_shd_nm, NmConfig};
//!
//! let config = ChannelConfig::reference(7);
//! let h = generate_seeded(&config)?.h;
//! let budget = LinkBudget::from_snr_db(0.0, 2);
//! let report = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(1), None)?;
//! assert!(report.precoder.is_binary());
//! assert!(report.mutual_information <= optimal_mutual_information(&h, &budget)? + 1e-9);
//! # Ok::<(), switchbf::Error>(())
//! ```

pub mod baseband;
pub mod channel;
pub mod connectivity;
pub mod design;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod nm;
pub mod qrqu;

pub use connectivity::ConnectivitySpec;
pub use design::DesignReport;
pub use error::{Error, Result};
pub use metrics::{HybridPrecoder, LinkBudget};
