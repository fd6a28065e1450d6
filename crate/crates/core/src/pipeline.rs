//! The experiment: amplifier source, optional temporal decoherence, the
//! compensator phase, the polarizing beam splitter and the detectors.
//!
//! Detector arm 1 is the H output port of the beam splitter and arm 2 the V
//! port. Arm 1 feeds the detectors D1A, D1B and D1C through a three-way
//! fan-out, arm 2 feeds D2.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::DecoherenceBasis;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_fringe, FringePoint};
use crate::fock::{
    apply_mode_unitary, build_coherent_dense, build_tmsv_dense_with_tolerance, moment_tail_bound, normal_moment_dense,
    DenseFockState,
};
use crate::gaussian::{hv_labels, GaussianState, ModeLabel, Polarization};
use crate::linalg::{c64, detector_map, hv_to_pm, to_dmatrix, ModeMatrix, C64};
use crate::montecarlo::simulate_counts_with;
use crate::par::Exec;
use crate::params::OpaParams;

/// Truncation tolerance of the Fock backend (norm tail and moment tail).
pub const FOCK_TAIL_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_WAVELENGTH_NM: f64 = 795.0;
/// Number of detectors sharing arm 1.
pub const ARM1_DETECTORS: usize = 3;

const FLAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedPolarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Input {
    Vacuum,
    Coherent {
        alpha_re: f64,
        alpha_im: f64,
        polarization: SeedPolarization,
    },
}

impl Input {
    pub fn coherent(alpha: C64, polarization: SeedPolarization) -> Self {
        Input::Coherent {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
            polarization,
        }
    }

    /// Seed amplitudes on `(H, V)`.
    pub fn amplitudes(&self) -> (C64, C64) {
        match *self {
            Input::Vacuum => (c64(0.0, 0.0), c64(0.0, 0.0)),
            Input::Coherent {
                alpha_re,
                alpha_im,
                polarization,
            } => {
                let a = c64(alpha_re, alpha_im);
                match polarization {
                    SeedPolarization::H => (a, c64(0.0, 0.0)),
                    SeedPolarization::V => (c64(0.0, 0.0), a),
                }
            }
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Input::Vacuum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoherence {
    pub basis: DecoherenceBasis,
    /// Temporal overlap of the delayed component, 1 = fully coherent.
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    Gaussian,
    Fock { cutoff: usize },
    MonteCarlo { shots: u64, seed: u64 },
}

impl Backend {
    pub fn tag(&self) -> &'static str {
        match self {
            Backend::Gaussian => "gaussian",
            Backend::Fock { .. } => "fock",
            Backend::MonteCarlo { .. } => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub gain: f64,
    pub input: Input,
    pub decoherence: Option<Decoherence>,
    pub phase_offset: f64,
    pub detector_efficiency: f64,
    pub backend: Backend,
    pub wavelength_nm: f64,
}

impl PipelineConfig {
    /// Vacuum-seeded, fully coherent, ideal detectors, Gaussian backend.
    pub fn new(gain: f64) -> Self {
        Self {
            gain,
            input: Input::Vacuum,
            decoherence: None,
            phase_offset: 0.0,
            detector_efficiency: 1.0,
            backend: Backend::Gaussian,
            wavelength_nm: DEFAULT_WAVELENGTH_NM,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_input(mut self, input: Input) -> Self {
        self.input = input;
        self
    }

    pub fn with_decoherence(mut self, basis: DecoherenceBasis, overlap: f64) -> Self {
        self.decoherence = Some(Decoherence { basis, overlap });
        self
    }

    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.detector_efficiency = eta;
        self
    }

    pub fn with_phase_offset(mut self, delta: f64) -> Self {
        self.phase_offset = delta;
        self
    }

    pub fn params(&self) -> Result<OpaParams> {
        OpaParams::new(self.gain)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let (ah, av) = self.input.amplitudes();
        if !(ah.re.is_finite() && ah.im.is_finite() && av.re.is_finite() && av.im.is_finite()) {
            return Err(invalid("seed amplitude must be finite"));
        }
        if let Some(d) = self.decoherence {
            if !(0.0..=1.0).contains(&d.overlap) {
                return Err(invalid(format!("overlap must lie in [0,1], got {}", d.overlap)));
            }
        }
        if !self.phase_offset.is_finite() {
            return Err(invalid("phase offset must be finite"));
        }
        let eta = self.detector_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid(format!("detector efficiency must lie in (0,1], got {eta}")));
        }
        if !(self.wavelength_nm > 0.0) || !self.wavelength_nm.is_finite() {
            return Err(invalid("wavelength must be positive"));
        }
        match self.backend {
            Backend::Gaussian => {}
            Backend::Fock { cutoff } => {
                if cutoff == 0 {
                    return Err(invalid("fock cutoff must be at least 1"));
                }
                if self.decoherence.is_some_and(|d| d.overlap < 1.0) {
                    return Err(Error::Unsupported(
                        "the fock backend has no temporal modes; use gaussian for decoherence".into(),
                    ));
                }
                if !self.input.is_vacuum() {
                    if self.gain != 0.0 {
                        return Err(Error::Unsupported(
                            "the fock backend takes a coherent seed only at zero gain".into(),
                        ));
                    }
                    let (ah, av) = self.input.amplitudes();
                    let photons = ah.norm_sqr() + av.norm_sqr();
                    if photons > cutoff as f64 / 4.0 {
                        return Err(invalid(format!(
                            "seed of {photons} photons needs a cutoff of at least {}",
                            (4.0 * photons).ceil()
                        )));
                    }
                }
            }
            Backend::MonteCarlo { shots, .. } => {
                if shots == 0 {
                    return Err(invalid("shots must be at least 1"));
                }
                if self.decoherence.is_some_and(|d| d.overlap > 0.0 && d.overlap < 1.0) {
                    return Err(Error::Unsupported("Monte Carlo covers overlap 0 and 1 only".into()));
                }
                if !self.input.is_vacuum() && self.gain != 0.0 {
                    return Err(Error::Unsupported(
                        "Monte Carlo takes a coherent seed only at zero gain".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorCombo {
    D1A,
    D1A_D1B,
    D1A_D1B_D1C,
    D1A_D2,
}

impl DetectorCombo {
    pub const ALL: [DetectorCombo; 4] = [
        DetectorCombo::D1A,
        DetectorCombo::D1A_D1B,
        DetectorCombo::D1A_D1B_D1C,
        DetectorCombo::D1A_D2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            DetectorCombo::D1A => "D1A",
            DetectorCombo::D1A_D1B => "D1A_D1B",
            DetectorCombo::D1A_D1B_D1C => "D1A_D1B_D1C",
            DetectorCombo::D1A_D2 => "D1A_D2",
        }
    }

    /// Photons taken from (arm 1, arm 2).
    pub fn arm_orders(&self) -> (usize, usize) {
        match self {
            DetectorCombo::D1A => (1, 0),
            DetectorCombo::D1A_D1B => (2, 0),
            DetectorCombo::D1A_D1B_D1C => (3, 0),
            DetectorCombo::D1A_D2 => (1, 1),
        }
    }

    pub fn order(&self) -> usize {
        let (a, b) = self.arm_orders();
        a + b
    }

    /// Ratio between the coincidence rate of the distinct detectors behind
    /// the fan-out and the arm moment reported by the exact backends.
    pub fn fanout_factor(&self) -> f64 {
        (ARM1_DETECTORS as f64).powi(-(self.arm_orders().0 as i32))
    }
}

impl fmt::Display for DetectorCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DetectorCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorCombo::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| invalid(format!("unknown detector combination {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub phi: f64,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub points: Vec<ScanPoint>,
    pub combo: DetectorCombo,
    pub config: PipelineConfig,
    pub backend: String,
    /// See [`DetectorCombo::fanout_factor`]; 1 when the fan-out is simulated.
    pub fanout_factor: f64,
}

impl FringeScan {
    pub fn phis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.phi).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// `n` points spaced uniformly over `[0, 2π)`.
pub fn uniform_phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// `n` points over the half-open interval `[start, stop)`.
pub fn phase_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(invalid("phase grid needs points >= 1 and start < stop"));
    }
    Ok((0..n).map(|i| start + (stop - start) * i as f64 / n as f64).collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("phase grid is empty"));
    }
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(invalid("phase grid contains a non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("phase grid must be strictly increasing"));
    }
    Ok(())
}

/// Compensator and beam splitter expressed in the ± basis: the phase acts on
/// the − mode, then the modes are projected back onto H/V.
fn pm_to_detectors(phi: f64) -> ModeMatrix {
    let phase = ModeMatrix::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), C64::from_polar(1.0, -phi));
    hv_to_pm().adjoint() * phase
}

/// [`build_output_state`] without the detection loss.
pub fn build_output_state_lossless(config: &PipelineConfig, phi: f64) -> Result<GaussianState> {
    config.validate()?;
    let theta = phi + config.phase_offset;
    let (ah, av) = config.input.amplitudes();
    let mut state = GaussianState::vacuum(hv_labels())?;
    if ah != c64(0.0, 0.0) {
        state = state.apply_displacement(0, ah)?;
    }
    if av != c64(0.0, 0.0) {
        state = state.apply_displacement(1, av)?;
    }
    if config.gain > 0.0 {
        state = state.apply_two_mode_squeeze(0, 1, config.gain)?;
    }
    let h = |t| ModeLabel::new(Polarization::H, t);
    let v = |t| ModeLabel::new(Polarization::V, t);
    let state = match config.decoherence {
        None => state.apply_passive_unitary(&to_dmatrix(&detector_map(theta)), &[0, 1])?,
        Some(Decoherence {
            basis: DecoherenceBasis::HV,
            overlap,
        }) => {
            let map = to_dmatrix(&detector_map(theta));
            state
                .split_temporal_mode(1, overlap)?
                .append_vacuum(h(1))
                .apply_passive_unitary(&map, &[0, 1])?
                .apply_passive_unitary(&map, &[3, 2])?
        }
        Some(Decoherence {
            basis: DecoherenceBasis::PM,
            overlap,
        }) => {
            let plus = |t| ModeLabel::new(Polarization::Plus, t);
            let minus = |t| ModeLabel::new(Polarization::Minus, t);
            let map = to_dmatrix(&pm_to_detectors(theta));
            state
                .apply_passive_unitary(&to_dmatrix(&hv_to_pm()), &[0, 1])?
                .with_labels(vec![plus(0), minus(0)])?
                .split_temporal_mode(1, overlap)?
                .append_vacuum(plus(1))
                .apply_passive_unitary(&map, &[0, 1])?
                .apply_passive_unitary(&map, &[3, 2])?
                .with_labels(vec![h(0), v(0), v(1), h(1)])?
        }
    };
    Ok(state)
}

/// Gaussian state on the detector modes at compensator phase `phi`,
/// including the detection efficiency as loss on every mode.
pub fn build_output_state(config: &PipelineConfig, phi: f64) -> Result<GaussianState> {
    let state = build_output_state_lossless(config, phi)?;
    let eta = config.detector_efficiency;
    if eta == 1.0 {
        return Ok(state);
    }
    (0..state.mode_count()).try_fold(state, |s, i| s.apply_loss(i, eta))
}

/// Mode indices of arm 1 (H port) and arm 2 (V port).
pub fn arm_modes(state: &GaussianState) -> (Vec<usize>, Vec<usize>) {
    let mut arm1 = Vec::new();
    let mut arm2 = Vec::new();
    for (i, label) in state.labels().iter().enumerate() {
        match label.polarization {
            Polarization::H => arm1.push(i),
            Polarization::V => arm2.push(i),
            _ => {}
        }
    }
    (arm1, arm2)
}

/// Detector-mode Fock state at phase `phi`, without detection loss.
pub fn build_output_fock(config: &PipelineConfig, phi: f64) -> Result<DenseFockState> {
    config.validate()?;
    let cutoff = match config.backend {
        Backend::Fock { cutoff } => cutoff,
        _ => return Err(invalid("configuration does not select the fock backend")),
    };
    let state = if config.input.is_vacuum() {
        let params = config.params()?;
        build_tmsv_dense_with_tolerance(&params, cutoff, FOCK_TAIL_TOLERANCE)?
    } else {
        let (ah, av) = config.input.amplitudes();
        build_coherent_dense(ah, av, cutoff, FOCK_TAIL_TOLERANCE)?
    };
    apply_mode_unitary(&state, &detector_map(phi + config.phase_offset))
}

/// Arm-1/arm-2 normal-ordered moment `⟨:N₁^p N₂^q:⟩` summed over temporal
/// modes.
pub fn arm_moment(state: &GaussianState, arm1_order: usize, arm2_order: usize) -> Result<f64> {
    let (arm1, arm2) = arm_modes(state);
    let mut picks: Vec<usize> = Vec::with_capacity(arm1_order + arm2_order);
    let mut total = c64(0.0, 0.0);
    let mut err = None;
    enumerate_tuples(&arm1, arm1_order, &mut picks, &mut |p1| {
        let base = p1.len();
        enumerate_tuples(&arm2, arm2_order, p1, &mut |all| {
            if err.is_none() {
                match state.wick_normal_moment(all, all) {
                    Ok(v) => total += v,
                    Err(e) => err = Some(e),
                }
            }
        });
        p1.truncate(base);
    });
    if let Some(e) = err {
        return Err(e);
    }
    if total.im.abs() > 1e-9 * total.re.abs().max(1.0) {
        return Err(Error::Instability(format!(
            "normal-ordered intensity moment has imaginary part {}",
            total.im
        )));
    }
    Ok(total.re)
}

fn enumerate_tuples(modes: &[usize], depth: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&mut Vec<usize>)) {
    if depth == 0 {
        visit(prefix);
        return;
    }
    for &m in modes {
        prefix.push(m);
        enumerate_tuples(modes, depth - 1, prefix, visit);
        prefix.pop();
    }
}

fn fock_moment(config: &PipelineConfig, combo: DetectorCombo, phi: f64) -> Result<f64> {
    let (a1, a2) = combo.arm_orders();
    let cutoff = match config.backend {
        Backend::Fock { cutoff } => cutoff,
        _ => unreachable!(),
    };
    if config.input.is_vacuum() {
        let params = config.params()?;
        let tail = moment_tail_bound(&params, cutoff, 2 * combo.order());
        if tail > FOCK_TAIL_TOLERANCE {
            return Err(Error::TruncationInsufficient {
                cutoff,
                tail,
                tolerance: FOCK_TAIL_TOLERANCE,
            });
        }
    }
    let state = build_output_fock(config, phi)?;
    let m = normal_moment_dense(&state, a1, a2, a1, a2)?;
    Ok(m.re * config.detector_efficiency.powi(combo.order() as i32))
}

/// Coincidence signal of `combo` at phase `phi`: the normal-ordered moment
/// for the exact backends, the per-pulse click probability with its
/// standard error for Monte Carlo.
pub fn evaluate_coincidence(config: &PipelineConfig, combo: DetectorCombo, phi: f64) -> Result<ScanPoint> {
    config.validate()?;
    if !phi.is_finite() {
        return Err(invalid("phase must be finite"));
    }
    match config.backend {
        Backend::Gaussian => {
            let (a1, a2) = combo.arm_orders();
            let state = build_output_state(config, phi)?;
            Ok(ScanPoint {
                phi,
                value: arm_moment(&state, a1, a2)?,
                stderr: None,
            })
        }
        Backend::Fock { .. } => Ok(ScanPoint {
            phi,
            value: fock_moment(config, combo, phi)?,
            stderr: None,
        }),
        Backend::MonteCarlo { .. } => {
            let scan = run_fringe_scan_with(Exec::Sequential, config, &[phi], combo)?;
            Ok(scan.points[0])
        }
    }
}

pub fn run_fringe_scan(config: &PipelineConfig, grid: &[f64], combo: DetectorCombo) -> Result<FringeScan> {
    run_fringe_scan_with(Exec::default(), config, grid, combo)
}

pub fn run_fringe_scan_with(
    exec: Exec,
    config: &PipelineConfig,
    grid: &[f64],
    combo: DetectorCombo,
) -> Result<FringeScan> {
    config.validate()?;
    check_grid(grid)?;
    let (points, fanout_factor) = match config.backend {
        Backend::MonteCarlo { shots, seed } => {
            let table = simulate_counts_with(exec, config, grid, shots, seed)?;
            let points = table
                .rows
                .iter()
                .map(|row| ScanPoint {
                    phi: row.phi,
                    value: row.rate(combo),
                    stderr: Some(row.stderr(combo)),
                })
                .collect();
            (points, 1.0)
        }
        _ => {
            let points = exec.try_map(grid.len(), |i| evaluate_coincidence(config, combo, grid[i]))?;
            (points, combo.fanout_factor())
        }
    };
    Ok(FringeScan {
        points,
        combo,
        config: *config,
        backend: config.backend.tag().to_string(),
        fanout_factor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VisibilityMethod {
    Extrema,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub visibility: f64,
    pub uncertainty: Option<f64>,
}

fn expected_period(scan: &FringeScan) -> f64 {
    if scan.config.input.is_vacuum() {
        PI
    } else {
        TAU
    }
}

/// `(max−min)/(max+min)` over the scan points, or `B/A` of a fitted
/// `A + B cos(2φ+δ)` with its propagated uncertainty.
pub fn visibility_of_scan(scan: &FringeScan, method: VisibilityMethod) -> Result<VisibilityEstimate> {
    let n = scan.points.len();
    if n < 2 {
        return Err(invalid("scan needs at least two points"));
    }
    let first = scan.points[0].phi;
    let last = scan.points[n - 1].phi;
    let step = (last - first) / (n - 1) as f64;
    if last - first + step < expected_period(scan) * (1.0 - 1e-9) {
        return Err(invalid("scan does not cover a full fringe period"));
    }
    match method {
        VisibilityMethod::Extrema => {
            let values = scan.values();
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let visibility = if max + min > 0.0 {
                (max - min) / (max + min)
            } else {
                0.0
            };
            Ok(VisibilityEstimate {
                visibility,
                uncertainty: None,
            })
        }
        VisibilityMethod::Fit => {
            let points: Vec<FringePoint> = scan
                .points
                .iter()
                .map(|p| FringePoint {
                    phi: p.phi,
                    value: p.value,
                    weight: p.stderr.map_or(1.0, |s| if s > 0.0 { 1.0 / (s * s) } else { 1.0 }),
                })
                .collect();
            let fit = fit_fringe(&points)?;
            if !fit.result.converged {
                return Err(Error::NonConvergence(format!(
                    "fringe fit stopped after {} iterations",
                    fit.result.iterations
                )));
            }
            Ok(VisibilityEstimate {
                visibility: fit.visibility,
                uncertainty: Some(fit.visibility_stderr),
            })
        }
    }
}

/// Fourier magnitudes `|Σ v_j e^{−ikφ_j}|/n` for `k = 0..=n/2` of a scan on a
/// uniform `[0, 2π)` grid.
pub fn harmonic_spectrum(scan: &FringeScan) -> Result<Vec<f64>> {
    let n = scan.points.len();
    if n < 4 {
        return Err(invalid("harmonic analysis needs at least four points"));
    }
    for (i, p) in scan.points.iter().enumerate() {
        let expected = TAU * i as f64 / n as f64;
        if (p.phi - expected).abs() > 1e-9 {
            return Err(invalid("harmonic analysis needs a uniform grid over [0, 2π)"));
        }
    }
    let values = scan.values();
    Ok((0..=n / 2)
        .map(|k| {
            let z: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| C64::from_polar(*v, -TAU * (k * j) as f64 / n as f64))
                .sum();
            z.norm() / n as f64
        })
        .collect())
}

/// Frequency (cycles per 2π of φ) of the strongest nonzero harmonic, or
/// `None` for a flat scan.
pub fn dominant_harmonic(scan: &FringeScan) -> Result<Option<usize>> {
    let spectrum = harmonic_spectrum(scan)?;
    let scale = scan.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let (k, mag) = spectrum
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, 0.0), |best, (k, &m)| if m > best.1 { (k, m) } else { best });
    if scale == 0.0 || mag <= FLAT_TOLERANCE * scale {
        Ok(None)
    } else {
        Ok(Some(k))
    }
}

/// `(max−min)/(max+min)` of the scan values, 0 when both vanish.
pub fn relative_fringe_amplitude(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max + min > 0.0 {
        (max - min) / (max + min)
    } else {
        0.0
    }
}
