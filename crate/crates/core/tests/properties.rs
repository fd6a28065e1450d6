use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use subrayleigh::analytic::{fringe_closed_form, visibility_closed_form, DecoherenceBasis, FringeKind};
use subrayleigh::fit::{fit_fringe_with, fit_rate_vs_gain_with, FitOptions, FringePoint, GainPoint};
use subrayleigh::fock::{apply_mode_unitary, build_tmsv_dense, DenseFockState};
use subrayleigh::linalg::{c64, ModeMatrix, C64};
use subrayleigh::montecarlo::rotation_amplitudes;
use subrayleigh::pipeline::{
    arm_moment, build_output_state, run_fringe_scan, uniform_phase_grid, visibility_of_scan, DetectorCombo,
    PipelineConfig, VisibilityMethod,
};
use subrayleigh::OpaParams;

/// General SU(2)·U(1) element from Euler angles and a global phase.
fn unitary(alpha: f64, beta: f64, gamma: f64, theta: f64) -> ModeMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = |x: f64| C64::from_polar(1.0, x);
    ModeMatrix::new(
        e(alpha + beta) * c,
        e(alpha - gamma) * s,
        -e(alpha + gamma) * s,
        e(alpha - beta) * c,
    )
}

fn angles() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-PI..PI, -PI..PI, -PI..PI, 0.0..PI)
}

fn max_amplitude_gap(a: &DenseFockState, b: &DenseFockState) -> f64 {
    let k = a.cutoff().max(b.cutoff());
    let mut gap: f64 = 0.0;
    for h in 0..=k {
        for v in 0..=k {
            gap = gap.max((a.amplitude(h, v) - b.amplitude(h, v)).norm());
        }
    }
    gap
}

fn tmsv(g: f64) -> DenseFockState {
    let params = OpaParams::new(g).unwrap();
    let cutoff = subrayleigh::fock::required_cutoff(&params, 0, 1e-12).unwrap();
    build_tmsv_dense(&params, cutoff).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passive_unitaries_keep_total_photon_distribution(g in 0.0..0.9f64, u in angles()) {
        let state = tmsv(g);
        let rotated = apply_mode_unitary(&state, &unitary(u.0, u.1, u.2, u.3)).unwrap();
        let before = state.total_photon_distribution();
        let after = rotated.total_photon_distribution();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn unitaries_compose(g in 0.0..0.8f64, u1 in angles(), u2 in angles()) {
        let state = tmsv(g);
        let a = unitary(u1.0, u1.1, u1.2, u1.3);
        let b = unitary(u2.0, u2.1, u2.2, u2.3);
        let stepwise = apply_mode_unitary(&apply_mode_unitary(&state, &a).unwrap(), &b).unwrap();
        let direct = apply_mode_unitary(&state, &(b * a)).unwrap();
        prop_assert!(max_amplitude_gap(&stepwise, &direct) < 1e-10);
    }

    #[test]
    fn sector_amplitudes_are_normalised(n in 0usize..=200, u in angles()) {
        let amps = rotation_amplitudes(n, &unitary(u.0, u.1, u.2, u.3)).unwrap();
        prop_assert_eq!(amps.len(), 2 * n + 1);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10, "n={} norm={}", n, norm);
    }

    #[test]
    fn vacuum_fringes_have_period_pi(phi in -10.0..10.0f64, n in 0.0..50.0f64) {
        for kind in [FringeKind::SAME_2, FringeKind::CROSS_2, FringeKind::SAME_3] {
            let (a, b) = (fringe_closed_form(kind, phi, n).unwrap(), fringe_closed_form(kind, phi + PI, n).unwrap());
            prop_assert!((a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(1.0));
        }
    }

    #[test]
    fn visibility_matches_fringe_extrema(n in 0.0..1e3f64) {
        let kinds = [
            FringeKind::SAME_2,
            FringeKind::CROSS_2,
            FringeKind::SAME_3,
            FringeKind::decohered_same_2(DecoherenceBasis::HV),
            FringeKind::decohered_same_2(DecoherenceBasis::PM),
        ];
        for kind in kinds {
            let values: Vec<f64> = uniform_phase_grid(64).iter().map(|&p| fringe_closed_form(kind, p, n).unwrap()).collect();
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            let min = values.iter().cloned().fold(f64::MAX, f64::min);
            let v = if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 };
            prop_assert!((v - visibility_closed_form(kind, n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_photon_visibility_exceeds_two_photon(n in 1e-6..1e6f64) {
        let v2 = visibility_closed_form(FringeKind::SAME_2, n).unwrap();
        let v3 = visibility_closed_form(FringeKind::SAME_3, n).unwrap();
        prop_assert!(v3 > v2);
    }

    #[test]
    fn sum_rule_and_flat_singles(g in 0.0..2.0f64, phi in 0.0..TAU) {
        let config = PipelineConfig::new(g);
        let state = build_output_state(&config, phi).unwrap();
        let n = g.sinh().powi(2);
        let g11 = arm_moment(&state, 2, 0).unwrap();
        let g22 = arm_moment(&state, 0, 2).unwrap();
        let g12 = arm_moment(&state, 1, 1).unwrap();
        let total = 8.0 * n * n + 2.0 * n;
        prop_assert!((g11 + g22 + 2.0 * g12 - total).abs() <= 1e-10 * total.max(1e-300));
        let singles = arm_moment(&state, 1, 0).unwrap();
        prop_assert!((singles - n).abs() <= 1e-12 * n.max(1.0));
    }

    #[test]
    fn phase_offset_shifts_the_scan(g in 0.05..1.5f64, delta in -PI..PI) {
        let grid = uniform_phase_grid(16);
        let shifted: Vec<f64> = grid.iter().map(|p| p + delta).collect();
        for combo in [DetectorCombo::D1A_D1B, DetectorCombo::D1A_D2] {
            let with_offset = run_fringe_scan(&PipelineConfig::new(g).with_phase_offset(delta), &grid, combo).unwrap();
            let moved = run_fringe_scan(&PipelineConfig::new(g), &shifted, combo).unwrap();
            for (a, b) in with_offset.points.iter().zip(&moved.points) {
                prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs().max(1.0));
            }
        }
    }

    #[test]
    fn efficiency_leaves_visibility_unchanged(g in 0.05..2.0f64, eta in 0.01..1.0f64) {
        let grid = uniform_phase_grid(32);
        for combo in [DetectorCombo::D1A_D1B, DetectorCombo::D1A_D2, DetectorCombo::D1A_D1B_D1C] {
            let full = run_fringe_scan(&PipelineConfig::new(g), &grid, combo).unwrap();
            let lossy = run_fringe_scan(&PipelineConfig::new(g).with_efficiency(eta), &grid, combo).unwrap();
            let v = |s| visibility_of_scan(s, VisibilityMethod::Extrema).unwrap().visibility;
            prop_assert!((v(&full) - v(&lossy)).abs() < 1e-10);
        }
    }

    #[test]
    fn full_overlap_is_decoherence_free(g in 0.05..1.5f64, phi in 0.0..PI) {
        for basis in [DecoherenceBasis::HV, DecoherenceBasis::PM] {
            let config = PipelineConfig::new(g).with_decoherence(basis, 1.0);
            for (a1, a2) in [(2, 0), (1, 1), (3, 0)] {
                let a = arm_moment(&build_output_state(&config, phi).unwrap(), a1, a2).unwrap();
                let b = arm_moment(&build_output_state(&PipelineConfig::new(g), phi).unwrap(), a1, a2).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn fringe_fit_is_scale_invariant(
        a in 1.0..50.0f64,
        ratio in 0.05..0.95f64,
        delta in -3.0..3.0f64,
        scale in 1e-3..1e3f64,
    ) {
        let points: Vec<FringePoint> = uniform_phase_grid(24)
            .iter()
            .enumerate()
            .map(|(i, &phi)| FringePoint {
                phi,
                value: a + a * ratio * (2.0 * phi + delta).cos() + 0.01 * a * ((i * 7 % 5) as f64 - 2.0),
                weight: 1.0 + (i % 3) as f64,
            })
            .collect();
        let scaled: Vec<FringePoint> = points
            .iter()
            .map(|p| FringePoint { phi: p.phi, value: p.value * scale, weight: p.weight / (scale * scale) })
            .collect();
        let options = FitOptions::default();
        let f = fit_fringe_with(&points, &options).unwrap();
        let s = fit_fringe_with(&scaled, &options).unwrap();
        prop_assert!((f.visibility - s.visibility).abs() < 1e-10);
        prop_assert!((f.result.get("delta").unwrap() - s.result.get("delta").unwrap()).abs() < 1e-10);
        prop_assert!(f.result.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rate_fit_is_scale_invariant(alpha in 0.5..1.2f64, scale in 1e-3..1e3f64) {
        let points: Vec<GainPoint> = (0..8)
            .map(|i| {
                let g = 0.3 + 0.25 * i as f64;
                let n = (alpha * g).sinh().powi(2);
                GainPoint { g, value: (n + 5.0 * n * n) * (1.0 + 0.02 * ((i % 3) as f64 - 1.0)), weight: 1.0 }
            })
            .collect();
        let scaled: Vec<GainPoint> = points.iter().map(|p| GainPoint { value: p.value * scale, ..*p }).collect();
        let options = FitOptions::default();
        let f = fit_rate_vs_gain_with(&points, 2, &options).unwrap();
        let s = fit_rate_vs_gain_with(&scaled, 2, &options).unwrap();
        prop_assert!((f.get("alpha").unwrap() - s.get("alpha").unwrap()).abs() < 1e-10);
        prop_assert!(f.history.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn asymptotic_visibilities_at_large_photon_number() {
    let n = 1e4;
    for (kind, limit) in [
        (FringeKind::SAME_2, 0.2),
        (FringeKind::CROSS_2, 1.0 / 3.0),
        (FringeKind::SAME_3, 3.0 / 7.0),
    ] {
        let v = visibility_closed_form(kind, n).unwrap();
        assert!((v - limit).abs() <= 1.0 / n, "{kind:?}: {v}");
    }
}

#[test]
fn identity_unitary_is_exact() {
    let state = tmsv(0.7);
    let out = apply_mode_unitary(&state, &ModeMatrix::identity()).unwrap();
    let gap = max_amplitude_gap(&state, &out);
    assert!(gap < 1e-13, "{gap}");
    let phase = ModeMatrix::new(
        C64::from_polar(1.0, 0.4),
        c64(0.0, 0.0),
        c64(0.0, 0.0),
        C64::from_polar(1.0, -0.4),
    );
    let out = apply_mode_unitary(&state, &phase).unwrap();
    assert!(max_amplitude_gap(&state, &out) < 1e-12);
}
