mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use switchbf::channel::{
    generate_channel, generate_seeded, read_channel_dump, rng_from_seed, steering_vector, write_channel_dump,
    ArrayGeometry, ChannelConfig, MeanAngleLaw, DEFAULT_ANGLE_SPREAD,
};
use switchbf::linalg::{frobenius_sq, numerical_rank, DEFAULT_RANK_TOL};

proptest! {
    #[test]
    fn steering_vectors_have_unit_norm(ny in 1usize..9, nz in 1usize..9, az in -PI..PI, el in 0.0..PI) {
        let a = steering_vector(&ArrayGeometry::omni(ny, nz), az, el);
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steering_vector_matches_elementwise_formula(ny in 1usize..6, nz in 1usize..6, az in -PI..PI, el in 0.0..PI) {
        let g = ArrayGeometry::omni(ny, nz);
        let a = steering_vector(&g, az, el);
        let n = (ny * nz) as f64;
        for m in 0..ny {
            for k in 0..nz {
                let phase = PI * (m as f64 * az.sin() * el.sin() + k as f64 * el.cos());
                let want = Complex64::new(phase.cos(), phase.sin()) / n.sqrt();
                prop_assert!((a[m * nz + k] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_rank_is_bounded_by_path_count(seed in any::<u64>(), clusters in 1usize..3, rays in 1usize..3) {
        let config = ChannelConfig { n_clusters: clusters, n_rays: rays, ..ChannelConfig::reference(seed) };
        let h = generate_seeded(&config).unwrap().h;
        let bound = (clusters * rays).min(config.n_t()).min(config.n_r());
        prop_assert!(numerical_rank(&h, DEFAULT_RANK_TOL) <= bound);
    }
}

#[test]
fn rays_rebuild_the_stored_channel() {
    for seed in 0..10 {
        for law in [MeanAngleLaw::Confined, MeanAngleLaw::Gated] {
            let config = ChannelConfig { mean_law: law, ..ChannelConfig::reference(seed) };
            let real = generate_seeded(&config).unwrap();
            let rebuilt = real.reconstruct(&config);
            assert!((&rebuilt - &real.h).norm() <= 1e-10 * real.h.norm().max(1e-300));
        }
    }
}

#[test]
fn omni_channel_energy_matches_normalization() {
    let config = ChannelConfig {
        n_clusters: 8,
        n_rays: 10,
        angle_spread: DEFAULT_ANGLE_SPREAD,
        tx_geometry: ArrayGeometry::omni(4, 4),
        rx_geometry: ArrayGeometry::omni(2, 2),
        seed: 0,
        mean_law: MeanAngleLaw::Confined,
    };
    let mut rng = rng_from_seed(2024);
    let trials = 10_000;
    let total: f64 = (0..trials).map(|_| frobenius_sq(&generate_channel(&config, &mut rng).unwrap().h)).sum();
    let mean = total / trials as f64;
    let target = (config.n_t() * config.n_r()) as f64;
    assert!((mean / target - 1.0).abs() < 0.05, "mean {mean} vs {target}");
}

#[test]
fn dump_round_trips_bit_exactly() {
    let h = common::small_channel(31);
    let mut buf = Vec::new();
    write_channel_dump(&mut buf, &h, 31).unwrap();
    let (back, seed) = read_channel_dump(buf.as_slice()).unwrap();
    assert_eq!(seed, 31);
    assert_eq!(back, h);
}
