//! Pieces shared by both analog precoder designs.

use serde::{Deserialize, Serialize};

use crate::connectivity::ConnectivitySpec;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix, SvdBundle};
use crate::metrics::{truncate, HybridPrecoder, LinkBudget};

/// Result of a precoder design run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub precoder: HybridPrecoder,
    /// Spectral efficiency of the finalized precoder on the full channel.
    pub mutual_information: f64,
    /// Accepted mutual-information values, starting with the initial point.
    /// Empty for the QR design, which does not evaluate it in the loop.
    pub mi_trace: Vec<f64>,
    /// Frobenius surrogate at each accepted iterate.
    pub surrogate_trace: Vec<f64>,
    /// Per-column quadratic objective across inner iterations (QR design).
    pub column_traces: Vec<Vec<f64>>,
    pub outer_iters: usize,
    pub random_draws: usize,
    pub converged: bool,
    /// The final Gram matrix `F_RFᴴF_RF` needed PSD repair.
    pub psd_repaired: bool,
}

/// Channel quantities every design needs.
pub(crate) struct Problem {
    /// Rank-`N_s` truncation of the channel.
    pub h1: CMatrix,
    /// Leading right singular vectors `V₁`.
    pub v1: CMatrix,
}

pub(crate) fn prepare(
    h: &CMatrix,
    budget: &LinkBudget,
    k_t: usize,
    rank_tol: f64,
    mask: Option<&ConnectivitySpec>,
) -> Result<Problem> {
    budget.validate()?;
    let n_s = budget.n_streams;
    let n_t = h.ncols();
    if !(n_s <= k_t && k_t <= n_t) {
        return Err(Error::InvalidParameter(format!("need N_s <= k_t <= N_t, got {n_s}, {k_t}, {n_t}")));
    }
    let svd = SvdBundle::new(h);
    let smax = svd.s.iter().copied().fold(0.0, f64::max);
    let rank = svd.s.iter().filter(|&&s| s > rank_tol * smax).count();
    if rank < n_s {
        return Err(Error::RankDeficient { requested: n_s, rank });
    }
    let h1 = truncate(&svd, n_s);
    let v1 = svd.v_leading(n_s);
    if let Some(spec) = mask {
        spec.check_shape(n_t, k_t)?;
        spec.check_feasible(&h1, n_s, rank_tol)?;
    }
    Ok(Problem { h1, v1 })
}

/// Entries `>= 0.5` become 1, the rest 0.
pub fn round_binary(f: &RMatrix) -> RMatrix {
    f.map(|x| if x >= 0.5 { 1.0 } else { 0.0 })
}

pub(crate) fn masked(f: RMatrix, mask: Option<&ConnectivitySpec>) -> RMatrix {
    match mask {
        Some(spec) => RMatrix::from_fn(f.nrows(), f.ncols(), |i, j| if spec.allowed(i, j) { f[(i, j)] } else { 0.0 }),
        None => f,
    }
}
