//! Test-only oracles, independent of the design algorithms.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use switchbf::baseband::baseband_update_qr;
use switchbf::channel::{generate_seeded, ArrayGeometry, ChannelConfig, MeanAngleLaw, SimRng, DEFAULT_ANGLE_SPREAD};
use switchbf::linalg::{complexify, numerical_rank, CMatrix, RMatrix};
use switchbf::metrics::{mutual_information_full, truncated_channel, LinkBudget};

/// 6-element transmit UPA (3×2, sectored) and 4-element omni receiver.
pub fn small_channel(seed: u64) -> CMatrix {
    let config = ChannelConfig {
        n_clusters: 8,
        n_rays: 10,
        angle_spread: DEFAULT_ANGLE_SPREAD,
        tx_geometry: ArrayGeometry::sectored(3, 2, std::f64::consts::PI / 6.0, std::f64::consts::PI / 12.0),
        rx_geometry: ArrayGeometry::omni(2, 2),
        seed,
        mean_law: MeanAngleLaw::Confined,
    };
    generate_seeded(&config).unwrap().h
}

/// Best spectral efficiency over every binary `N_t × k_t` analog precoder
/// with `rank(H₁F_RF) = N_s`, each completed by the QR baseband update.
pub fn exhaustive_optimum(h: &CMatrix, budget: &LinkBudget, k_t: usize) -> f64 {
    let n_t = h.ncols();
    let bits = n_t * k_t;
    assert!(bits <= 20, "enumeration too large");
    let h1 = truncated_channel(h, budget.n_streams).unwrap();
    let mut best = f64::NEG_INFINITY;
    for code in 0u32..(1 << bits) {
        let f_rf = RMatrix::from_fn(n_t, k_t, |i, j| ((code >> (j * n_t + i)) & 1) as f64);
        if numerical_rank(&(&h1 * complexify(&f_rf)), 1e-8) != budget.n_streams {
            continue;
        }
        let f_bb = baseband_update_qr(h, &f_rf, budget, 1e-8).unwrap();
        let mi = mutual_information_full(h, &(complexify(&f_rf) * f_bb), budget).unwrap();
        best = best.max(mi);
    }
    best
}

pub fn random_complex(rows: usize, cols: usize, rng: &mut SimRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Random `n × k` matrix with orthonormal columns.
pub fn random_semi_unitary(n: usize, k: usize, rng: &mut SimRng) -> CMatrix {
    random_complex(n, k, rng).qr().q()
}
