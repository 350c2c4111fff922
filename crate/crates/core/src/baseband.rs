//! Digital (baseband) precoder updates for a fixed analog precoder.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    complexify, frobenius_sq, hermitian_inv_sqrt, min_eigenvalue, nearest_psd_fix, numerical_rank, CMatrix, RMatrix,
    SvdBundle, DEFAULT_RANK_TOL,
};
use crate::metrics::LinkBudget;

/// Outcome of [`baseband_update_qr_detailed`].
#[derive(Debug, Clone)]
pub struct QrUpdate {
    pub f_bb: CMatrix,
    /// `F_RFᴴ F_RF` fell below the PSD floor and was repaired.
    pub repaired: bool,
}

/// Baseband update through the polar factor of `F_RF`.
///
/// With `U_RF = F_RF (F_RFᴴF_RF)^(-1/2)` and `G` the leading `N_s` right
/// singular vectors of `H U_RF`, returns `F_BB = (F_RFᴴF_RF)^(-1/2) G`, so
/// that `F_RF F_BB = U_RF G` is semi-unitary.
pub fn baseband_update_qr(h: &CMatrix, f_rf: &RMatrix, budget: &LinkBudget, psd_floor: f64) -> Result<CMatrix> {
    baseband_update_qr_detailed(h, f_rf, budget, psd_floor).map(|u| u.f_bb)
}

pub fn baseband_update_qr_detailed(
    h: &CMatrix,
    f_rf: &RMatrix,
    budget: &LinkBudget,
    psd_floor: f64,
) -> Result<QrUpdate> {
    let n_s = budget.n_streams;
    let k_t = f_rf.ncols();
    if k_t < n_s {
        return Err(Error::InvalidParameter(format!("k_t = {k_t} RF chains cannot carry {n_s} streams")));
    }
    if h.ncols() != f_rf.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns but F_RF has {} rows",
            h.ncols(),
            f_rf.nrows()
        )));
    }
    if h.nrows() < n_s {
        return Err(Error::RankDeficient { requested: n_s, rank: h.nrows() });
    }
    let f = complexify(f_rf);
    let mut gram = f.adjoint() * &f;
    let repaired = min_eigenvalue(&gram) < psd_floor;
    if repaired {
        gram = nearest_psd_fix(&gram, psd_floor)?;
    }
    let inv_sqrt = hermitian_inv_sqrt(&gram)?;
    let u_rf = &f * &inv_sqrt;
    let g = SvdBundle::new(&(h * &u_rf)).v_leading(n_s);
    let mut f_bb = inv_sqrt * g;
    if repaired {
        // U_RF is no longer semi-unitary; restore the power constraint
        rescale_to_power(&f, &mut f_bb, n_s);
    }
    Ok(QrUpdate { f_bb, repaired })
}

fn rescale_to_power(f_rf: &CMatrix, f_bb: &mut CMatrix, n_s: usize) {
    let p = frobenius_sq(&(f_rf * &*f_bb));
    if p > 0.0 {
        *f_bb *= Complex64::new((n_s as f64 / p).sqrt(), 0.0);
    }
}

/// Baseband update by SVD of `H₁ F_RF` followed by a scalar adjustment so
/// that `‖F_RF F_BB‖²_F = N_s`.
pub fn baseband_update_scaled(h1: &CMatrix, f_rf: &RMatrix, n_streams: usize) -> Result<CMatrix> {
    baseband_update_scaled_with_tol(h1, f_rf, n_streams, DEFAULT_RANK_TOL)
}

pub fn baseband_update_scaled_with_tol(h1: &CMatrix, f_rf: &RMatrix, n_streams: usize, rank_tol: f64) -> Result<CMatrix> {
    if h1.ncols() != f_rf.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "H1 has {} columns but F_RF has {} rows",
            h1.ncols(),
            f_rf.nrows()
        )));
    }
    let f = complexify(f_rf);
    let h_tilde = h1 * &f;
    let rank = numerical_rank(&h_tilde, rank_tol);
    if rank < n_streams || f_rf.ncols() < n_streams {
        return Err(Error::RankDeficient { requested: n_streams, rank });
    }
    let mut f_bb = SvdBundle::new(&h_tilde).v_leading(n_streams);
    rescale_to_power(&f, &mut f_bb, n_streams);
    Ok(f_bb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{mutual_information_full, truncated_channel};
    use num_complex::Complex64;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(rows, cols, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn identity_analog_stage_gives_right_singular_vectors() {
        let h = lcg_matrix(4, 6, 1);
        let budget = LinkBudget { rho: 1.0, noise_var: 1.0, n_streams: 2 };
        let f_bb = baseband_update_qr(&h, &RMatrix::identity(6, 6), &budget, 1e-8).unwrap();
        let v = SvdBundle::new(&h).v_leading(2);
        assert!((f_bb - v).norm() < 1e-10);
    }

    #[test]
    fn too_few_chains_is_an_error() {
        let h = lcg_matrix(4, 6, 2);
        let budget = LinkBudget { rho: 1.0, noise_var: 1.0, n_streams: 3 };
        assert!(baseband_update_qr(&h, &RMatrix::identity(6, 2), &budget, 1e-8).is_err());
    }

    #[test]
    fn duplicate_columns_trigger_repair_and_keep_power() {
        let h = lcg_matrix(4, 6, 3);
        let budget = LinkBudget { rho: 1.0, noise_var: 1.0, n_streams: 2 };
        let f_rf = RMatrix::from_row_slice(6, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 1., 0., 0., 1., 1., 1., 0., 0., 0., 1.]);
        let up = baseband_update_qr_detailed(&h, &f_rf, &budget, 1e-8).unwrap();
        assert!(up.repaired);
        let p = frobenius_sq(&(complexify(&f_rf) * &up.f_bb));
        assert!((p - 2.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_update_meets_power_and_is_scale_free() {
        let h = lcg_matrix(4, 6, 4);
        let h1 = truncated_channel(&h, 2).unwrap();
        let f_rf = RMatrix::from_row_slice(6, 2, &[1., 0., 0., 1., 1., 1., 0., 0., 1., 0., 0., 1.]);
        let f_bb = baseband_update_scaled(&h1, &f_rf, 2).unwrap();
        let f = complexify(&f_rf);
        assert!((frobenius_sq(&(&f * &f_bb)) - 2.0).abs() < 1e-12);
        let mut bigger = f_bb.clone() * Complex64::new(7.5, 0.0);
        rescale_to_power(&f, &mut bigger, 2);
        assert!((bigger - f_bb).norm() < 1e-12);
    }

    #[test]
    fn scaled_update_rejects_rank_deficiency() {
        let h = lcg_matrix(4, 6, 5);
        let h1 = truncated_channel(&h, 2).unwrap();
        let f_rf = RMatrix::from_row_slice(6, 2, &[1., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.]);
        assert!(matches!(baseband_update_scaled(&h1, &f_rf, 2), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn updates_agree_for_identity_analog_stage() {
        let h = lcg_matrix(4, 6, 6);
        let budget = LinkBudget { rho: 3.0, noise_var: 1.0, n_streams: 2 };
        let h1 = truncated_channel(&h, 2).unwrap();
        let id = RMatrix::identity(6, 6);
        let qr = baseband_update_qr(&h, &id, &budget, 1e-8).unwrap();
        let sc = baseband_update_scaled(&h1, &id, 2).unwrap();
        let a = mutual_information_full(&h, &qr, &budget).unwrap();
        let b = mutual_information_full(&h, &sc, &budget).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
