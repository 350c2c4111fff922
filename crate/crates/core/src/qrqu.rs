//! Switch-based hybrid design by QR decomposition with quadratic update
//! (SHD-QRQU).
//!
//! For `M = H₁F_RF`, the squared diagonal of a QR factor lower-bounds the
//! squared singular values in the multiplicative-majorization sense, so the
//! mutual information evaluated on `|R_ii|²` lower-bounds the one evaluated
//! on the singular values. The design therefore fixes the columns of `F_RF`
//! one at a time, each maximizing `|R_ii|² = fᴴA_i f` with
//! `A_i = H₁ᴴ Π H₁` and `Π` the projector onto the orthogonal complement of
//! the already-fixed columns `H₁F^(i-1)`. Each column subproblem is a convex
//! maximization over the box, handled by successive linearization.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseband::baseband_update_qr_detailed;
use crate::channel::rng_from_seed;
use crate::connectivity::ConnectivitySpec;
use crate::design::{prepare, round_binary, DesignReport};
use crate::error::{Error, Result};
use crate::linalg::{complexify, pivoted_qr_diagonal, CMatrix, RMatrix, SvdBundle, DEFAULT_RANK_TOL};
use crate::metrics::{mutual_information_from_gains, mutual_information_full, HybridPrecoder, LinkBudget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QrquConfig {
    /// Linearization steps per column.
    pub inner_iters: usize,
    pub rank_tol: f64,
    pub psd_floor: f64,
    /// Ridge added to `XᴴX` inside the projector.
    pub reg_eps: f64,
    /// Stop a column early once the relative objective change drops below this.
    pub rel_stop: f64,
    pub seed: u64,
}

impl Default for QrquConfig {
    fn default() -> Self {
        Self { inner_iters: 20, rank_tol: DEFAULT_RANK_TOL, psd_floor: 1e-8, reg_eps: 1e-10, rel_stop: 1e-9, seed: 0 }
    }
}

impl QrquConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// `I - X (XᴴX + εI)⁻¹ Xᴴ`.
pub fn projection_complement(x: &CMatrix, reg_eps: f64) -> CMatrix {
    let n = x.nrows();
    let mut id = CMatrix::identity(n, n);
    if x.ncols() == 0 {
        return id;
    }
    let mut gram = x.adjoint() * x;
    for i in 0..gram.nrows() {
        gram[(i, i)] += reg_eps;
    }
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let solved = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&x.adjoint()),
        None => gram.pseudo_inverse(0.0).expect("pseudo-inverse with zero eps") * x.adjoint(),
    };
    id -= x * solved;
    (&id + id.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `A_i = H₁ᴴ Π H₁` for the columns fixed so far.
#[derive(Debug, Clone)]
pub struct ProjectionState {
    pub a: CMatrix,
    pub columns_fixed: usize,
    h1: CMatrix,
    fixed: RMatrix,
    reg_eps: f64,
}

impl ProjectionState {
    /// Start with `Π = I`, i.e. `A_1 = H₁ᴴH₁`.
    pub fn new(h1: &CMatrix, reg_eps: f64) -> Self {
        Self {
            a: h1.adjoint() * h1,
            columns_fixed: 0,
            h1: h1.clone(),
            fixed: RMatrix::zeros(h1.ncols(), 0),
            reg_eps,
        }
    }

    /// Append column `f` and rebuild `A` against the enlarged set.
    pub fn fix_column(&mut self, f: &DVector<f64>) {
        let k = self.fixed.ncols();
        self.fixed = self.fixed.clone().insert_column(k, 0.0);
        self.fixed.set_column(k, f);
        self.columns_fixed += 1;
        let x = &self.h1 * complexify(&self.fixed);
        let pi = projection_complement(&x, self.reg_eps);
        let a = self.h1.adjoint() * pi * &self.h1;
        self.a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    }

    pub fn fixed_columns(&self) -> &RMatrix {
        &self.fixed
    }
}

/// `fᴴ A f` for a real vector `f`.
pub fn quad_objective(a: &CMatrix, f: &DVector<f64>) -> f64 {
    let fc = f.map(|x| Complex64::new(x, 0.0));
    (fc.adjoint() * a * &fc)[(0, 0)].re
}

/// One linearization step: maximize `fᴴAf` linearized at `f_prev` over the
/// box. The gradient is `(A + Aᵀ) f_prev = 2·Re(A)·f_prev`; zero-gradient
/// entries keep their previous value and masked entries are forced to 0.
pub fn quad_gradient_step(a: &CMatrix, f_prev: &DVector<f64>, mask_column: Option<&[bool]>) -> DVector<f64> {
    let gradient = (a + a.transpose()).map(|z| z.re) * f_prev;
    DVector::from_fn(f_prev.len(), |j, _| {
        if mask_column.is_some_and(|m| !m[j]) {
            return 0.0;
        }
        let g = gradient[j];
        if g > 0.0 {
            1.0
        } else if g < 0.0 {
            0.0
        } else {
            f_prev[j]
        }
    })
}

/// `Σ_{i≤N_s} log2(1 + c·σ_i²(m))`.
pub fn singular_value_information(m: &CMatrix, scale: f64, n_streams: usize) -> f64 {
    let svd = SvdBundle::new(m);
    mutual_information_from_gains(svd.s.iter().take(n_streams).map(|s| s * s), scale)
}

/// `Σ_{i≤N_s} log2(1 + c·|R_ii|²)` over the largest diagonal entries of a
/// column-pivoted QR of `m`.
pub fn qr_diagonal_information(m: &CMatrix, scale: f64, n_streams: usize) -> f64 {
    mutual_information_from_gains(pivoted_qr_diagonal(m).into_iter().take(n_streams).map(|r| r * r), scale)
}

struct ColumnRun {
    f: DVector<f64>,
    trace: Vec<f64>,
    iters: usize,
}

fn run_column(a: &CMatrix, start: DVector<f64>, mask_column: Option<&[bool]>, config: &QrquConfig) -> ColumnRun {
    let mut f = start;
    let mut value = quad_objective(a, &f);
    let mut trace = vec![value];
    let mut iters = 0;
    for _ in 0..config.inner_iters.max(1) {
        let next = quad_gradient_step(a, &f, mask_column);
        let next_value = quad_objective(a, &next);
        trace.push(next_value);
        iters += 1;
        let change = (next_value - value).abs();
        let settled = next == f || change <= config.rel_stop * value.abs().max(f64::MIN_POSITIVE);
        f = next;
        value = next_value;
        if settled {
            break;
        }
    }
    ColumnRun { f, trace, iters }
}

/// Run SHD-QRQU on channel `h` with `k_t` RF chains.
///
/// The analog stage depends on the channel only, not on the link budget;
/// `budget` enters through the final baseband update and the reported
/// spectral efficiency.
pub fn design_shd_qrqu(
    h: &CMatrix,
    budget: &LinkBudget,
    k_t: usize,
    config: &QrquConfig,
    mask: Option<&ConnectivitySpec>,
) -> Result<DesignReport> {
    if config.inner_iters == 0 {
        return Err(Error::InvalidParameter("inner_iters must be at least 1".into()));
    }
    let problem = prepare(h, budget, k_t, config.rank_tol, mask)?;
    let n_s = budget.n_streams;
    let n_t = h.ncols();
    let mut rng = rng_from_seed(config.seed);
    let mut state = ProjectionState::new(&problem.h1, config.reg_eps);
    let signal_scale = state.a.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut column_traces = Vec::with_capacity(k_t);
    let mut total_iters = 0;
    let mut restarts = 0;
    for i in 0..k_t {
        let mask_column: Option<Vec<bool>> = mask.map(|m| (0..n_t).map(|r| m.allowed(r, i)).collect());
        let mask_ref = mask_column.as_deref();
        let mut draw = || {
            DVector::from_fn(n_t, |r, _| {
                let v: f64 = rng.random();
                if mask_ref.is_some_and(|m| !m[r]) {
                    0.0
                } else {
                    v
                }
            })
        };
        let mut run = run_column(&state.a, draw(), mask_ref, config);
        total_iters += run.iters;
        // a column collapsing onto nothing wastes one of the first N_s chains
        let stalled = |r: &ColumnRun| r.trace.last().copied().unwrap_or(0.0) <= 1e-12 * signal_scale;
        if i < n_s && stalled(&run) {
            run = run_column(&state.a, draw(), mask_ref, config);
            total_iters += run.iters;
            restarts += 1;
        }
        state.fix_column(&run.f);
        column_traces.push(run.trace);
    }

    let f_rf = round_binary(state.fixed_columns());
    let update = baseband_update_qr_detailed(h, &f_rf, budget, config.psd_floor)?;
    let precoder = HybridPrecoder::new(f_rf, update.f_bb)?;
    let mutual_information = mutual_information_full(h, &precoder.product(), budget)?;
    Ok(DesignReport {
        precoder,
        mutual_information,
        mi_trace: Vec::new(),
        surrogate_trace: Vec::new(),
        column_traces,
        outer_iters: total_iters,
        random_draws: restarts,
        converged: true,
        psd_repaired: update.repaired,
    })
}
