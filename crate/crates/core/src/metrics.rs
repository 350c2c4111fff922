//! Transmit-side mutual information, the unconstrained optimal precoder and
//! the Frobenius surrogate used by norm maximization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complexify, frobenius_sq, numerical_rank, CMatrix, RMatrix, SvdBundle, DEFAULT_RANK_TOL};

/// Received power `ρ`, noise variance `σ²` and stream count `N_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rho: f64,
    pub noise_var: f64,
    pub n_streams: usize,
}

impl LinkBudget {
    /// Budget at `snr_db` with unit noise variance.
    pub fn from_snr_db(snr_db: f64, n_streams: usize) -> Self {
        Self { rho: 10f64.powf(snr_db / 10.0), noise_var: 1.0, n_streams }
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.rho / self.noise_var).log10()
    }

    /// Per-stream SNR scale `ρ / (N_s σ²)`.
    pub fn scale(&self) -> f64 {
        self.rho / (self.n_streams as f64 * self.noise_var)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.noise_var > 0.0) || !self.rho.is_finite() || !self.noise_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho and noise variance must be positive (rho={}, noise_var={})",
                self.rho, self.noise_var
            )));
        }
        if self.n_streams == 0 {
            return Err(Error::InvalidParameter("need at least one stream".into()));
        }
        Ok(())
    }
}

/// `F = F_RF · F_BB` with a real (binary once finalized) analog part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridPrecoder {
    /// `N_t × k_t`.
    pub f_rf: RMatrix,
    /// `k_t × N_s`.
    pub f_bb: CMatrix,
}

impl HybridPrecoder {
    pub fn new(f_rf: RMatrix, f_bb: CMatrix) -> Result<Self> {
        if f_rf.ncols() != f_bb.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "F_RF has {} columns but F_BB has {} rows",
                f_rf.ncols(),
                f_bb.nrows()
            )));
        }
        Ok(Self { f_rf, f_bb })
    }

    pub fn product(&self) -> CMatrix {
        complexify(&self.f_rf) * &self.f_bb
    }

    pub fn n_streams(&self) -> usize {
        self.f_bb.ncols()
    }

    pub fn rf_chains(&self) -> usize {
        self.f_rf.ncols()
    }

    /// `‖F_RF F_BB‖²_F`.
    pub fn power(&self) -> f64 {
        frobenius_sq(&self.product())
    }

    pub fn is_binary(&self) -> bool {
        self.f_rf.iter().all(|&x| x == 0.0 || x == 1.0)
    }
}

/// `Σ log2(1 + c·g_i)` for per-mode gains `g_i`.
pub fn mutual_information_from_gains(gains: impl IntoIterator<Item = f64>, scale: f64) -> f64 {
    gains.into_iter().map(|g| (1.0 + scale * g).log2()).sum()
}

/// `log2 det(I_{N_s} + c (HF)ᴴ(HF))` for a full precoder matrix `F`.
pub fn mutual_information_full(h: &CMatrix, f: &CMatrix, budget: &LinkBudget) -> Result<f64> {
    budget.validate()?;
    if h.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns but precoder has {} rows",
            h.ncols(),
            f.nrows()
        )));
    }
    if f.ncols() != budget.n_streams {
        return Err(Error::DimensionMismatch(format!(
            "precoder has {} columns but the budget carries {} streams",
            f.ncols(),
            budget.n_streams
        )));
    }
    let hf = h * f;
    let n = f.ncols();
    let mut gram = hf.adjoint() * &hf * Complex64::new(budget.scale(), 0.0);
    for i in 0..n {
        gram[(i, i)] += 1.0;
    }
    gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    match gram.clone().cholesky() {
        Some(chol) => Ok(2.0 * chol.l().diagonal().iter().map(|z| z.re.log2()).sum::<f64>()),
        // I + PSD is never singular in exact arithmetic; fall back to eigenvalues
        None => {
            let (vals, _) = crate::linalg::hermitian_eigen(&gram);
            Ok(vals.iter().map(|&l| l.max(f64::MIN_POSITIVE).log2()).sum())
        }
    }
}

/// Spectral efficiency (bits/s/Hz) of a hybrid precoder on channel `h`.
pub fn mutual_information(h: &CMatrix, precoder: &HybridPrecoder, budget: &LinkBudget) -> Result<f64> {
    mutual_information_full(h, &precoder.product(), budget)
}

fn check_streams(h: &CMatrix, n_streams: usize) -> Result<()> {
    if n_streams == 0 {
        return Err(Error::InvalidParameter("need at least one stream".into()));
    }
    let rank = numerical_rank(h, DEFAULT_RANK_TOL);
    if n_streams > rank {
        return Err(Error::RankDeficient { requested: n_streams, rank });
    }
    Ok(())
}

/// Unconstrained optimal precoder with equal power: the leading `N_s` right
/// singular vectors of `h`, behind an identity analog stage.
pub fn optimal_precoder(h: &CMatrix, n_streams: usize) -> Result<HybridPrecoder> {
    check_streams(h, n_streams)?;
    let svd = SvdBundle::new(h);
    HybridPrecoder::new(RMatrix::identity(h.ncols(), h.ncols()), svd.v_leading(n_streams))
}

/// Closed-form spectral efficiency of the unconstrained optimal precoder.
pub fn optimal_mutual_information(h: &CMatrix, budget: &LinkBudget) -> Result<f64> {
    budget.validate()?;
    check_streams(h, budget.n_streams)?;
    let svd = SvdBundle::new(h);
    Ok(mutual_information_from_gains(svd.s.iter().take(budget.n_streams).map(|s| s * s), budget.scale()))
}

/// Rank-`N_s` truncation `H₁ = U_{N_s} Σ_{N_s} V_{N_s}ᴴ`.
pub fn truncated_channel(h: &CMatrix, n_streams: usize) -> Result<CMatrix> {
    check_streams(h, n_streams)?;
    Ok(truncate(&SvdBundle::new(h), n_streams))
}

pub(crate) fn truncate(svd: &SvdBundle, n_streams: usize) -> CMatrix {
    let mut us = svd.u_leading(n_streams);
    for j in 0..n_streams {
        us.column_mut(j).scale_mut(svd.s[j]);
    }
    us * svd.v_leading(n_streams).adjoint()
}

/// `‖V₁ᴴ F_RF‖²_F`.
pub fn frobenius_surrogate(v1: &CMatrix, f_rf: &RMatrix) -> Result<f64> {
    if v1.nrows() != f_rf.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "V1 has {} rows but F_RF has {} rows",
            v1.nrows(),
            f_rf.nrows()
        )));
    }
    Ok(frobenius_sq(&(v1.adjoint() * complexify(f_rf))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag3() -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(2.0), c(1.0)]))
    }

    #[test]
    fn zero_baseband_has_zero_information() {
        let h = CMatrix::identity(3, 3);
        let p = HybridPrecoder::new(RMatrix::identity(3, 2), CMatrix::zeros(2, 2)).unwrap();
        let budget = LinkBudget { rho: 5.0, noise_var: 1.0, n_streams: 2 };
        assert_eq!(mutual_information(&h, &p, &budget).unwrap(), 0.0);
    }

    #[test]
    fn identity_link_carries_two_bits() {
        let h = CMatrix::identity(2, 2);
        let p = HybridPrecoder::new(RMatrix::identity(2, 2), CMatrix::identity(2, 2)).unwrap();
        let budget = LinkBudget { rho: 2.0, noise_var: 1.0, n_streams: 2 };
        assert!((mutual_information(&h, &p, &budget).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = CMatrix::identity(2, 3);
        let p = HybridPrecoder::new(RMatrix::identity(2, 2), CMatrix::identity(2, 2)).unwrap();
        let budget = LinkBudget { rho: 1.0, noise_var: 1.0, n_streams: 2 };
        assert!(matches!(mutual_information(&h, &p, &budget), Err(Error::DimensionMismatch(_))));
        assert!(HybridPrecoder::new(RMatrix::identity(3, 2), CMatrix::identity(3, 1)).is_err());
    }

    #[test]
    fn optimal_precoder_of_diagonal_channel() {
        let f = optimal_precoder(&diag3(), 2).unwrap();
        let expected = CMatrix::identity(3, 2);
        assert!((f.f_bb.clone() - expected).norm() < 1e-12);
        assert!((f.power() - 2.0).abs() < 1e-12);
        assert!(matches!(optimal_precoder(&diag3(), 4), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn truncation_of_diagonal_channel() {
        let h1 = truncated_channel(&diag3(), 1).unwrap();
        let expected = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(0.0), c(0.0)]));
        assert!((h1 - expected).norm() < 1e-12);
        assert!((truncated_channel(&diag3(), 3).unwrap() - diag3()).norm() < 1e-10);
    }

    #[test]
    fn surrogate_trivial_values() {
        let v1 = CMatrix::identity(4, 2);
        assert_eq!(frobenius_surrogate(&v1, &RMatrix::zeros(4, 3)).unwrap(), 0.0);
        assert!((frobenius_surrogate(&v1, &RMatrix::from_element(4, 3, 1.0)).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn snr_round_trip() {
        let b = LinkBudget::from_snr_db(-10.0, 2);
        assert!((b.rho - 0.1).abs() < 1e-15);
        assert!((b.snr_db() + 10.0).abs() < 1e-12);
        assert!((b.scale() - 0.05).abs() < 1e-15);
    }
}
