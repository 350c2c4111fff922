mod common;

use common::{exhaustive_optimum, random_semi_unitary, small_channel};
use rand::Rng;
use switchbf::channel::{generate_seeded, rng_from_seed, ArrayGeometry, ChannelConfig};
use switchbf::connectivity::{interleaved_spec, subset_partition, ConnectivitySpec};
use switchbf::linalg::{complexify, numerical_rank, CMatrix, RMatrix};
use switchbf::metrics::{frobenius_surrogate, optimal_mutual_information, truncated_channel, LinkBudget};
use switchbf::nm::{design_shd_nm, linearized_gradient, NmConfig};
use switchbf::qrqu::{design_shd_qrqu, QrquConfig};
use switchbf::{DesignReport, Error};

fn unit_budget(n_s: usize) -> LinkBudget {
    LinkBudget { rho: 1.0, noise_var: 1.0, n_streams: n_s }
}

fn reference_channel(seed: u64) -> CMatrix {
    generate_seeded(&ChannelConfig::reference(seed)).unwrap().h
}

fn mid_size_channel(seed: u64) -> CMatrix {
    let config = ChannelConfig {
        tx_geometry: ArrayGeometry::sectored(4, 4, std::f64::consts::PI / 6.0, std::f64::consts::PI / 12.0),
        rx_geometry: ArrayGeometry::omni(2, 2),
        ..ChannelConfig::reference(seed)
    };
    generate_seeded(&config).unwrap().h
}

fn check_common(report: &DesignReport, h: &CMatrix, budget: &LinkBudget, mask: Option<&ConnectivitySpec>) {
    let n_s = budget.n_streams;
    let p = &report.precoder;
    assert!(p.is_binary());
    assert!((p.power() - n_s as f64).abs() < 1e-8);
    if !report.psd_repaired {
        let f = p.product();
        assert!((f.adjoint() * &f - CMatrix::identity(n_s, n_s)).norm() < 1e-8);
    }
    assert!(report.mutual_information <= optimal_mutual_information(h, budget).unwrap() + 1e-9);
    if let Some(spec) = mask {
        for i in 0..p.f_rf.nrows() {
            for j in 0..p.f_rf.ncols() {
                if !spec.allowed(i, j) {
                    assert_eq!(p.f_rf[(i, j)], 0.0);
                }
            }
        }
    }
}

#[test]
fn surrogate_gradient_matches_central_differences() {
    let mut rng = rng_from_seed(41);
    let eps = 1e-5;
    for _ in 0..50 {
        let v1 = random_semi_unitary(8, 2, &mut rng);
        let f = RMatrix::from_fn(8, 3, |_, _| rng.random::<f64>());
        let g = linearized_gradient(&v1, &f).unwrap();
        for i in 0..8 {
            for j in 0..3 {
                let mut up = f.clone();
                up[(i, j)] += eps;
                let mut down = f.clone();
                down[(i, j)] -= eps;
                let fd = (frobenius_surrogate(&v1, &up).unwrap() - frobenius_surrogate(&v1, &down).unwrap()) / (2.0 * eps);
                assert!((fd - g[(i, j)]).abs() < 1e-6, "{fd} vs {}", g[(i, j)]);
            }
        }
    }
}

#[test]
fn designs_come_close_to_exhaustive_search() {
    let budget = unit_budget(2);
    let (mut nm_hits, mut qr_hits) = (0, 0);
    for t in 0..20u64 {
        let h = small_channel(1000 + t);
        let best = exhaustive_optimum(&h, &budget, 2);
        let nm = design_shd_nm(&h, &budget, 2, &NmConfig::with_seed(t), None).unwrap();
        let qr = design_shd_qrqu(&h, &budget, 2, &QrquConfig::with_seed(t), None).unwrap();
        assert!(nm.mutual_information <= best + 1e-9);
        assert!(qr.mutual_information <= best + 1e-9);
        nm_hits += usize::from(nm.mutual_information >= 0.90 * best);
        qr_hits += usize::from(qr.mutual_information >= 0.85 * best);
    }
    assert!(nm_hits >= 18, "SHD-NM reached 0.90x in {nm_hits}/20");
    assert!(qr_hits >= 16, "SHD-QRQU reached 0.85x in {qr_hits}/20");
}

#[test]
fn accepted_information_never_decreases() {
    for seed in 0..100 {
        let h = mid_size_channel(seed);
        let budget = LinkBudget::from_snr_db(-10.0 + (seed % 5) as f64 * 5.0, 2);
        let report = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(seed), None).unwrap();
        assert!(!report.mi_trace.is_empty());
        assert!(report.mi_trace.windows(2).all(|w| w[1] >= w[0]), "seed {seed}");
        assert_eq!(report.mi_trace.len(), report.surrogate_trace.len());
    }
}

#[test]
fn column_objectives_never_decrease() {
    for seed in 0..50 {
        let h = mid_size_channel(seed);
        let report = design_shd_qrqu(&h, &unit_budget(2), 4, &QrquConfig::with_seed(seed), None).unwrap();
        assert_eq!(report.column_traces.len(), 4);
        for trace in &report.column_traces {
            assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0)), "seed {seed}");
        }
    }
}

#[test]
fn full_scale_designs_are_valid() {
    for seed in 0..5 {
        let h = reference_channel(seed);
        for n_s in [1, 2, 4] {
            let budget = LinkBudget::from_snr_db(0.0, n_s);
            let nm = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(seed), None).unwrap();
            check_common(&nm, &h, &budget, None);
            let h1 = truncated_channel(&h, n_s).unwrap();
            assert_eq!(numerical_rank(&(&h1 * complexify(&nm.precoder.f_rf)), 1e-8), n_s);
            let qr = design_shd_qrqu(&h, &budget, 4, &QrquConfig::with_seed(seed), None).unwrap();
            check_common(&qr, &h, &budget, None);
        }
    }
}

#[test]
fn designs_are_deterministic() {
    let h = reference_channel(7);
    let budget = unit_budget(2);
    let a = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(3), None).unwrap();
    let b = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(3), None).unwrap();
    assert_eq!(a, b);
    let a = design_shd_qrqu(&h, &budget, 4, &QrquConfig::with_seed(3), None).unwrap();
    let b = design_shd_qrqu(&h, &budget, 4, &QrquConfig::with_seed(3), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn masked_designs_respect_the_connectivity() {
    let specs = [interleaved_spec(64, 4, 2).unwrap(), subset_partition(64, 4).unwrap()];
    for spec in &specs {
        assert!(spec.validate().is_ok());
        for seed in 0..3 {
            let h = reference_channel(100 + seed);
            let budget = unit_budget(2);
            let nm = design_shd_nm(&h, &budget, 4, &NmConfig::with_seed(seed), Some(spec)).unwrap();
            check_common(&nm, &h, &budget, Some(spec));
            let qr = design_shd_qrqu(&h, &budget, 4, &QrquConfig::with_seed(seed), Some(spec)).unwrap();
            check_common(&qr, &h, &budget, Some(spec));
        }
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn masks_do_not_help_on_average() {
    let spec = interleaved_spec(16, 4, 2).unwrap();
    let budget = unit_budget(2);
    let (mut nm_full, mut nm_pc, mut qr_full, mut qr_pc) = (vec![], vec![], vec![], vec![]);
    for seed in 0..50 {
        let h = mid_size_channel(500 + seed);
        let cfg = NmConfig::with_seed(seed);
        nm_full.push(design_shd_nm(&h, &budget, 4, &cfg, None).unwrap().mutual_information);
        nm_pc.push(design_shd_nm(&h, &budget, 4, &cfg, Some(&spec)).unwrap().mutual_information);
        let cfg = QrquConfig::with_seed(seed);
        qr_full.push(design_shd_qrqu(&h, &budget, 4, &cfg, None).unwrap().mutual_information);
        qr_pc.push(design_shd_qrqu(&h, &budget, 4, &cfg, Some(&spec)).unwrap().mutual_information);
    }
    let (a, se) = mean_and_stderr(&nm_full);
    let (b, _) = mean_and_stderr(&nm_pc);
    assert!(b <= a + se, "NM: masked {b} vs full {a} ± {se}");
    let (a, se) = mean_and_stderr(&qr_full);
    let (b, _) = mean_and_stderr(&qr_pc);
    assert!(b <= a + se, "QRQU: masked {b} vs full {a} ± {se}");
}

#[test]
fn mask_blind_to_the_signal_space_is_rejected() {
    // the channel only sees antennas 0..2; the mask keeps every chain away from them
    let mut h = CMatrix::zeros(2, 8);
    h[(0, 0)] = num_complex::Complex64::new(1.0, 0.0);
    h[(1, 1)] = num_complex::Complex64::new(0.5, 0.5);
    let spec = ConnectivitySpec::from_fn(8, 2, 3, 1, |i, j| i >= 2 && (i - 2) % 2 == j).unwrap();
    let budget = unit_budget(2);
    let err = design_shd_nm(&h, &budget, 2, &NmConfig::default(), Some(&spec)).unwrap_err();
    assert!(matches!(err, Error::InfeasibleConnectivity(_)));
    let err = design_shd_qrqu(&h, &budget, 2, &QrquConfig::default(), Some(&spec)).unwrap_err();
    assert!(matches!(err, Error::InfeasibleConnectivity(_)));
}
