//! Dense complex linear algebra shared by the design algorithms.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`.
//! The singular value decomposition is wrapped in [`SvdBundle`], which fixes
//! the ordering and the column-phase ambiguity so that downstream results are
//! reproducible bit-for-bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type CVector = DVector<Complex64>;

/// Default relative tolerance for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Thin SVD `M = U diag(s) Vᴴ` with singular values sorted in descending order.
///
/// Each right singular vector is rotated so that its largest-magnitude entry
/// is real and positive; the matching left vector gets the same rotation so
/// the factorization is unchanged.
#[derive(Debug, Clone)]
pub struct SvdBundle {
    pub u: CMatrix,
    pub s: DVector<f64>,
    pub v: CMatrix,
}

impl SvdBundle {
    pub fn new(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Self {
                u: CMatrix::zeros(rows, 0),
                s: DVector::zeros(0),
                v: CMatrix::zeros(cols, 0),
            };
        }
        let svd = m.clone().svd(true, true);
        let u_raw = svd.u.expect("u requested");
        let v_raw = svd.v_t.expect("v_t requested").adjoint();
        let s_raw = svd.singular_values;

        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s_raw[b].total_cmp(&s_raw[a]));

        let mut u = CMatrix::zeros(rows, k);
        let mut v = CMatrix::zeros(cols, k);
        let mut s = DVector::zeros(k);
        for (dst, &src) in order.iter().enumerate() {
            s[dst] = s_raw[src];
            let vc = v_raw.column(src);
            let pivot = vc
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or(Complex64::new(1.0, 0.0));
            let rot = if pivot.norm() > 0.0 {
                pivot.conj() / pivot.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            v.set_column(dst, &(vc * rot));
            u.set_column(dst, &(u_raw.column(src) * rot));
        }
        Self { u, s, v }
    }

    /// First `k` right singular vectors as an `N×k` matrix.
    pub fn v_leading(&self, k: usize) -> CMatrix {
        self.v.columns(0, k).into_owned()
    }

    pub fn u_leading(&self, k: usize) -> CMatrix {
        self.u.columns(0, k).into_owned()
    }
}

/// Number of singular values strictly above `rel_tol · σ_max`. Zero for an
/// all-zero (or empty) matrix.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.clone().singular_values();
    let smax = s.iter().copied().fold(0.0_f64, f64::max);
    if smax == 0.0 || !smax.is_finite() {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Largest absolute entry of `g - gᴴ`.
pub fn hermitian_defect(g: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in i..g.ncols() {
            worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(g: &CMatrix) -> Result<()> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let defect = hermitian_defect(g);
    let scale = g.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(g: &CMatrix) -> (DVector<f64>, CMatrix) {
    // symmetrize so rounding noise in the input cannot leak into the result
    let sym = (g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

fn rebuild(vecs: &CMatrix, vals: impl Iterator<Item = f64>) -> CMatrix {
    let mut scaled = vecs.clone();
    for (j, lam) in vals.enumerate() {
        scaled.column_mut(j).scale_mut(lam);
    }
    let out = &scaled * vecs.adjoint();
    (&out + out.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Raise every eigenvalue of the Hermitian matrix `g` below `floor` up to
/// `floor`. Returns `g` unchanged when it is already above the floor.
pub fn nearest_psd_fix(g: &CMatrix, floor: f64) -> Result<CMatrix> {
    check_hermitian(g)?;
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter(format!("psd floor must be > 0, got {floor}")));
    }
    let (vals, vecs) = hermitian_eigen(g);
    if vals.iter().all(|&l| l >= floor) {
        return Ok(g.clone());
    }
    Ok(rebuild(&vecs, vals.iter().map(|&l| l.max(floor))))
}

/// `g^(-1/2)` for a Hermitian positive-definite matrix.
pub fn hermitian_inv_sqrt(g: &CMatrix) -> Result<CMatrix> {
    check_hermitian(g)?;
    let (vals, vecs) = hermitian_eigen(g);
    if let Some(&bad) = vals.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "inverse square root needs a positive-definite matrix (eigenvalue {bad:e})"
        )));
    }
    Ok(rebuild(&vecs, vals.iter().map(|&l| 1.0 / l.sqrt())))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(g: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(g);
    vals.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lift a real matrix into the complex field.
pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Magnitudes of the diagonal of `R` from a column-pivoted QR of `m`, sorted
/// in descending order.
pub fn pivoted_qr_diagonal(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let mut diag: Vec<f64> = (0..k).map(|i| r[(i, i)].norm()).collect();
    diag.sort_by(|a, b| b.total_cmp(a));
    diag
}

/// Magnitudes of the diagonal of `R` from an unpivoted QR of `m`, in column
/// order.
pub fn qr_diagonal(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let r = m.clone().qr().r();
    let k = r.nrows().min(r.ncols());
    (0..k).map(|i| r[(i, i)].norm()).collect()
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}
