use std::f64::consts::PI;

use subrayleigh::fock::{build_tmsv_dense, joint_photon_pmf, required_cutoff};
use subrayleigh::montecarlo::{
    click_probabilities_from_pmf, exact_click_probabilities, simulate_counts, simulate_counts_with, CountsTable,
};
use subrayleigh::par::Exec;
use subrayleigh::pipeline::{build_output_fock, Backend, DetectorCombo, PipelineConfig};
use subrayleigh::OpaParams;

const COMBOS: [DetectorCombo; 4] = [
    DetectorCombo::D1A,
    DetectorCombo::D1A_D1B,
    DetectorCombo::D1A_D1B_D1C,
    DetectorCombo::D1A_D2,
];

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / n as f64).collect()
}

#[test]
fn tables_do_not_depend_on_thread_count() {
    let config = PipelineConfig::new(0.9).with_efficiency(0.3);
    let g = grid(5);
    // more than one chunk per point
    let shots = 150_000;
    let parallel = simulate_counts_with(Exec::Parallel, &config, &g, shots, 7).unwrap();
    let serial = simulate_counts_with(Exec::Sequential, &config, &g, shots, 7).unwrap();
    assert_eq!(parallel, serial);
    let other = simulate_counts(&config, &g, shots, 8).unwrap();
    assert_ne!(parallel.rows, other.rows);
}

fn max_z(table: &CountsTable, exact: impl Fn(f64, DetectorCombo) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for row in &table.rows {
        for combo in COMBOS {
            let p = exact(row.phi, combo);
            let sd = (p * (1.0 - p) / row.shots() as f64).sqrt();
            if sd > 0.0 {
                worst = worst.max((row.rate(combo) - p).abs() / sd);
            }
        }
    }
    worst
}

#[test]
fn thinning_after_sampling_matches_lossy_state() {
    let g = 0.6;
    let eta = 0.5;
    let config = PipelineConfig::new(g).with_efficiency(eta);
    let phis = grid(4);
    let table = simulate_counts(&config, &phis, 200_000, 11).unwrap();

    // Lossy Gaussian state, vacuum probabilities after loss.
    let z = max_z(&table, |phi, c| exact_click_probabilities(&config, phi).unwrap().get(c));
    assert!(z < 4.0, "gaussian route: {z}");

    // Lossless Fock pmf with binomial thinning.
    let params = OpaParams::new(g).unwrap();
    let cutoff = required_cutoff(&params, 0, 1e-13).unwrap();
    let fock = config.with_backend(Backend::Fock { cutoff });
    let z = max_z(&table, |phi, c| {
        let pmf = joint_photon_pmf(&build_output_fock(&fock, phi).unwrap());
        click_probabilities_from_pmf(&pmf, eta).get(c)
    });
    assert!(z < 4.0, "pmf route: {z}");
}

#[test]
fn errors_shrink_as_inverse_square_root_of_shots() {
    let config = PipelineConfig::new(0.8).with_efficiency(0.2);
    let phis = grid(16);
    let exact: Vec<f64> = phis
        .iter()
        .map(|&phi| {
            exact_click_probabilities(&config, phi)
                .unwrap()
                .get(DetectorCombo::D1A_D2)
        })
        .collect();
    let rms = |shots: u64, seed: u64| {
        let t = simulate_counts(&config, &phis, shots, seed).unwrap();
        let sq: f64 = t
            .rows
            .iter()
            .zip(&exact)
            .map(|(r, p)| (r.rate(DetectorCombo::D1A_D2) - p).powi(2))
            .sum();
        (sq / phis.len() as f64).sqrt()
    };
    let mean_p = exact.iter().sum::<f64>() / exact.len() as f64;
    for shots in [20_000u64, 80_000, 320_000] {
        let normalised = rms(shots, shots) / (mean_p * (1.0 - mean_p) / shots as f64).sqrt();
        assert!((0.5..1.6).contains(&normalised), "shots {shots}: {normalised}");
    }
}

#[test]
fn zero_gain_stays_dark_and_tmsv_matches_pmf() {
    let config = PipelineConfig::new(0.0);
    let t = simulate_counts(&config, &grid(3), 1000, 1).unwrap();
    assert!(t.rows.iter().all(|r| COMBOS.iter().all(|&c| r.count(c) == 0)));

    let params = OpaParams::new(0.5).unwrap();
    let state = build_tmsv_dense(&params, required_cutoff(&params, 0, 1e-14).unwrap()).unwrap();
    let pmf = joint_photon_pmf(&state);
    let from_pmf = click_probabilities_from_pmf(&pmf, 1.0);
    let exact = exact_click_probabilities(&PipelineConfig::new(0.5), 0.0).unwrap();
    for c in COMBOS {
        assert!((from_pmf.get(c) - exact.get(c)).abs() < 1e-12, "{c}");
    }
}

#[test]
fn rejects_zero_shots_and_partial_overlap() {
    let config = PipelineConfig::new(0.5);
    assert!(simulate_counts(&config, &grid(2), 0, 1).is_err());
    let partial = config.with_decoherence(subrayleigh::analytic::DecoherenceBasis::HV, 0.5);
    assert!(simulate_counts(&partial, &grid(2), 10, 1).is_err());
}
