//! Switch-based hybrid design by norm maximization (SHD-NM).
//!
//! The analog precoder maximizes the Frobenius surrogate `‖V₁ᴴF_RF‖²_F`
//! over the box `[0, 1]^{N_t × k_t}` by sequential convex programming: the
//! surrogate is linearized at the current iterate and the resulting linear
//! program is solved exactly (it separates per entry, so the optimum is the
//! sign pattern of the gradient). A candidate is accepted only if
//! `rank(H₁F_RF) = N_s` and the true mutual information did not decrease;
//! otherwise the linearization point is redrawn by Gaussian randomization
//! around the last accepted iterate.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baseband::{baseband_update_qr, baseband_update_qr_detailed, baseband_update_scaled_with_tol};
use crate::channel::{rng_from_seed, SimRng};
use crate::connectivity::ConnectivitySpec;
use crate::design::{masked, prepare, round_binary, DesignReport};
use crate::error::{Error, Result};
use crate::linalg::{complexify, numerical_rank, CMatrix, RMatrix, DEFAULT_RANK_TOL};
use crate::metrics::{frobenius_surrogate, mutual_information_full, HybridPrecoder, LinkBudget};

/// How the linearization point is redrawn after a rejected candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Randomization {
    /// `N(F, I)` draw, clamped to the box.
    #[default]
    Unbounded,
    /// Displacement shrunk onto the unit ball, then clamped.
    UnitBall,
}

/// Baseband update used to score candidates inside the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InLoopUpdate {
    /// Polar/QR update on the full channel, the same one applied at the end.
    #[default]
    Qr,
    /// SVD of `H₁F_RF` with scalar power adjustment.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmConfig {
    /// Maximum number of accepted outer steps `L`.
    pub max_outer: usize,
    /// Maximum number of consecutive randomized draws `I`.
    pub max_random: usize,
    pub rank_tol: f64,
    pub psd_floor: f64,
    /// Accept when `I^ℓ >= I^(ℓ-1) - improvement_tol`.
    pub improvement_tol: f64,
    /// An accepted step that gains less than this counts as a stall.
    pub stall_tol: f64,
    /// Stop after this many consecutive stalled accepted steps.
    pub stall_patience: usize,
    /// Bernoulli redraws allowed to find a rank-feasible start.
    pub init_attempts: usize,
    pub randomization: Randomization,
    pub in_loop_update: InLoopUpdate,
    pub seed: u64,
}

impl Default for NmConfig {
    fn default() -> Self {
        Self {
            max_outer: 1000,
            max_random: 1000,
            rank_tol: DEFAULT_RANK_TOL,
            psd_floor: 1e-8,
            improvement_tol: 0.0,
            stall_tol: 1e-6,
            stall_patience: 5,
            init_attempts: 50,
            randomization: Randomization::default(),
            in_loop_update: InLoopUpdate::default(),
            seed: 0,
        }
    }
}

impl NmConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Gradient of `‖V₁ᴴF‖²_F` at `f_prev`: `2·Re(V₁V₁ᴴ)·F`.
pub fn linearized_gradient(v1: &CMatrix, f_prev: &RMatrix) -> Result<RMatrix> {
    if v1.nrows() != f_prev.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "V1 has {} rows but F_RF has {} rows",
            v1.nrows(),
            f_prev.nrows()
        )));
    }
    Ok(gradient_from_projector(&real_projector(v1), f_prev))
}

fn real_projector(v1: &CMatrix) -> RMatrix {
    (v1 * v1.adjoint()).map(|z| z.re)
}

fn gradient_from_projector(p: &RMatrix, f: &RMatrix) -> RMatrix {
    p * f * 2.0
}

/// Exact maximizer of `⟨gradient, F⟩` over `0 <= F <= 1` with masked entries
/// pinned to zero. Zero-gradient entries keep their value from `previous`.
pub fn solve_box_lp(gradient: &RMatrix, previous: &RMatrix, mask: Option<&ConnectivitySpec>) -> Result<RMatrix> {
    if gradient.shape() != previous.shape() {
        return Err(Error::DimensionMismatch("gradient and previous iterate differ in shape".into()));
    }
    if let Some(spec) = mask {
        spec.check_shape(gradient.nrows(), gradient.ncols())?;
    }
    Ok(RMatrix::from_fn(gradient.nrows(), gradient.ncols(), |i, j| {
        if mask.is_some_and(|m| !m.allowed(i, j)) {
            return 0.0;
        }
        let g = gradient[(i, j)];
        if g > 0.0 {
            1.0
        } else if g < 0.0 {
            0.0
        } else {
            previous[(i, j)]
        }
    }))
}

/// Standard normal displacement, shrunk onto the unit ball when it falls
/// outside it.
pub fn gaussian_displacement<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> RMatrix {
    let mut d = RMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = d.norm();
    if n > 1.0 {
        d /= n;
    }
    d
}

/// Random point within unit distance of `f_rf`, clamped to the box.
pub fn gaussian_perturb<R: Rng + ?Sized>(f_rf: &RMatrix, rng: &mut R) -> RMatrix {
    let d = gaussian_displacement(f_rf.nrows(), f_rf.ncols(), rng);
    (f_rf + d).map(|x| x.clamp(0.0, 1.0))
}

/// Draw from `N(vec F, I)` clamped to the box.
pub fn gaussian_perturb_unbounded<R: Rng + ?Sized>(f_rf: &RMatrix, rng: &mut R) -> RMatrix {
    f_rf.map(|x| (x + rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
}

fn random_start(
    problem_h1: &CMatrix,
    n_t: usize,
    k_t: usize,
    n_s: usize,
    config: &NmConfig,
    mask: Option<&ConnectivitySpec>,
    rng: &mut SimRng,
) -> Result<RMatrix> {
    for _ in 0..config.init_attempts.max(1) {
        let f = masked(RMatrix::from_fn(n_t, k_t, |_, _| if rng.random::<bool>() { 1.0 } else { 0.0 }), mask);
        if numerical_rank(&(problem_h1 * complexify(&f)), config.rank_tol) == n_s {
            return Ok(f);
        }
    }
    Err(Error::InitializationFailed { n_streams: n_s, attempts: config.init_attempts.max(1) })
}

/// Run SHD-NM on channel `h` with `k_t` RF chains.
pub fn design_shd_nm(
    h: &CMatrix,
    budget: &LinkBudget,
    k_t: usize,
    config: &NmConfig,
    mask: Option<&ConnectivitySpec>,
) -> Result<DesignReport> {
    let problem = prepare(h, budget, k_t, config.rank_tol, mask)?;
    let n_s = budget.n_streams;
    let n_t = h.ncols();
    let mut rng = rng_from_seed(config.seed);
    let projector = real_projector(&problem.v1);

    let evaluate = |f: &RMatrix| -> Option<f64> {
        if numerical_rank(&(&problem.h1 * complexify(f)), config.rank_tol) != n_s {
            return None;
        }
        let f_bb = match config.in_loop_update {
            InLoopUpdate::Qr => baseband_update_qr(h, f, budget, config.psd_floor).ok()?,
            InLoopUpdate::Scaled => baseband_update_scaled_with_tol(&problem.h1, f, n_s, config.rank_tol).ok()?,
        };
        mutual_information_full(h, &(complexify(f) * f_bb), budget).ok()
    };

    let mut accepted = random_start(&problem.h1, n_t, k_t, n_s, config, mask, &mut rng)?;
    let mut best = evaluate(&accepted).ok_or(Error::InitializationFailed { n_streams: n_s, attempts: 1 })?;
    let mut mi_trace = vec![best];
    let mut surrogate_trace = vec![frobenius_surrogate(&problem.v1, &accepted)?];

    let mut linearize_at = accepted.clone();
    let (mut outer, mut draws, mut total_draws, mut stalls) = (0usize, 0usize, 0usize, 0usize);
    let mut converged = false;
    while outer < config.max_outer {
        let gradient = gradient_from_projector(&projector, &linearize_at);
        let candidate = solve_box_lp(&gradient, &linearize_at, mask)?;
        if let Some(mi) = evaluate(&candidate) {
            if mi >= best - config.improvement_tol {
                let gain = mi - best;
                surrogate_trace.push(frobenius_surrogate(&problem.v1, &candidate)?);
                mi_trace.push(mi);
                best = mi;
                accepted = candidate;
                linearize_at = accepted.clone();
                outer += 1;
                draws = 0;
                stalls = if gain < config.stall_tol { stalls + 1 } else { 0 };
                if stalls >= config.stall_patience {
                    converged = true;
                    break;
                }
                continue;
            }
        }
        if draws >= config.max_random {
            break;
        }
        let drawn = match config.randomization {
            Randomization::Unbounded => gaussian_perturb_unbounded(&accepted, &mut rng),
            Randomization::UnitBall => gaussian_perturb(&accepted, &mut rng),
        };
        linearize_at = masked(drawn, mask);
        draws += 1;
        total_draws += 1;
    }

    let f_rf = round_binary(&accepted);
    let update = baseband_update_qr_detailed(h, &f_rf, budget, config.psd_floor)?;
    let precoder = HybridPrecoder::new(f_rf, update.f_bb)?;
    let mutual_information = mutual_information_full(h, &precoder.product(), budget)?;
    Ok(DesignReport {
        precoder,
        mutual_information,
        mi_trace,
        surrogate_trace,
        column_traces: Vec::new(),
        outer_iters: outer,
        random_draws: total_draws,
        converged,
        psd_repaired: update.repaired,
    })
}
