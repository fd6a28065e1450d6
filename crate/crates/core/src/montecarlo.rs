//! Pulse-by-pulse simulation of threshold detectors.
//!
//! A pulse draws the pair number from the geometric law of the squeezed
//! vacuum, routes the photons to the two beam-splitter ports, and thins each
//! port through the detectors: arm 1 fans out to D1A, D1B and D1C, each
//! receiving a photon with probability η/3, arm 2 feeds D2 with probability
//! η. A detector clicks when at least one photon reaches it.

use std::borrow::Cow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::analytic::DecoherenceBasis;
use crate::error::{invalid, Error, Result};
use crate::fock::PhotonGrid;
use crate::linalg::{check_unitary2, detector_map, ModeMatrix, C64, UNITARY_TOL};
use crate::par::Exec;
use crate::pipeline::{arm_modes, build_output_state_lossless, Backend, DetectorCombo, PipelineConfig, ARM1_DETECTORS};

/// Pulses per independently seeded chunk.
pub const CHUNK_SHOTS: u64 = 65_536;
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";
pub const RNG_STREAM_RULE: &str = "seed_from_u64(seed), stream = (point << 32) | chunk";

const NORM_DRIFT_TOL: f64 = 1e-8;
/// Sector distributions are cached up to this pair-number tail probability.
const SECTOR_CACHE_TAIL: f64 = 1e-9;
const SECTOR_CACHE_MAX: usize = 2000;

/// Amplitudes `⟨k, 2n−k| U |n, n⟩`, `k = 0..=2n`, where `U` maps the input
/// creators as `a_j† → Σ_k u_kj a_k†`.
pub fn rotation_amplitudes(n: usize, u: &ModeMatrix) -> Result<Vec<C64>> {
    check_unitary2(u, UNITARY_TOL)?;
    let mut ladder = SectorLadder::new(*u);
    for _ in 0..n {
        ladder.advance();
    }
    ladder.checked()
}

/// Builds `|n,n⟩ = (a_H† a_V†)ⁿ|0⟩/n!` in the output basis one pair at a time.
struct SectorLadder {
    u: ModeMatrix,
    pairs: usize,
    amps: Vec<C64>,
    scratch: Vec<C64>,
}

impl SectorLadder {
    fn new(u: ModeMatrix) -> Self {
        Self {
            u,
            pairs: 0,
            amps: vec![C64::new(1.0, 0.0)],
            scratch: Vec::new(),
        }
    }

    fn create(&mut self, input_mode: usize) {
        let total = self.amps.len() - 1;
        let (u0, u1) = (self.u[(0, input_mode)], self.u[(1, input_mode)]);
        self.scratch.clear();
        self.scratch.resize(total + 2, C64::new(0.0, 0.0));
        for (k, a) in self.amps.iter().enumerate() {
            self.scratch[k + 1] += u0 * a * ((k + 1) as f64).sqrt();
            self.scratch[k] += u1 * a * ((total - k + 1) as f64).sqrt();
        }
        std::mem::swap(&mut self.amps, &mut self.scratch);
    }

    fn advance(&mut self) {
        self.create(1);
        self.create(0);
        self.pairs += 1;
        let inv = 1.0 / self.pairs as f64;
        self.amps.iter_mut().for_each(|a| *a *= inv);
    }

    fn checked(&self) -> Result<Vec<C64>> {
        let norm: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::Instability(format!(
                "sector {} lost normalisation (|ψ|² = {norm})",
                self.pairs
            )));
        }
        Ok(self.amps.clone())
    }

    fn cdf(&self) -> Result<Vec<f64>> {
        let amps = self.checked()?;
        let mut acc = 0.0;
        Ok(amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect())
    }
}

fn sample_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Photon counts arriving at the two beam-splitter ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortCounts {
    pub arm1: u64,
    pub arm2: u64,
}

/// Click pattern of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Clicks {
    pub d1a: bool,
    pub d1b: bool,
    pub d1c: bool,
    pub d2: bool,
}

#[derive(Debug, Clone)]
enum Source {
    Dark,
    /// Indistinguishable pairs; per-sector CDFs over the arm-1 count `k`.
    Pairs {
        pair_law: Geometric,
        cdfs: Vec<Vec<f64>>,
        u: ModeMatrix,
    },
    /// Distinguishable H and V photons, routed independently.
    SplitHv {
        pair_law: Geometric,
        p_h: f64,
        p_v: f64,
    },
    /// Independent single-mode squeezed ± components, each photon routed to
    /// either arm with probability ½.
    SplitPm {
        cdf: Vec<f64>,
        x: f64,
    },
    Coherent {
        mean1: f64,
        mean2: f64,
    },
}

/// Per-phase sampler built once and shared by every pulse at that phase.
#[derive(Debug, Clone)]
pub struct PulseSampler {
    source: Source,
    eta: f64,
}

fn geometric(x: f64) -> Result<Geometric> {
    Geometric::new(1.0 - x).map_err(|e| invalid(format!("pair-number law: {e}")))
}

/// `P(2i) = C(2i, i) (x/4)^i / cosh g` for one squeezed ± component.
fn squeezed_pair_cdf(x: f64, c_norm: f64) -> Vec<f64> {
    let mut cdf = Vec::new();
    let mut p = 1.0 / c_norm;
    let mut acc = 0.0;
    let mut i = 0usize;
    loop {
        acc += p;
        cdf.push(acc);
        if 1.0 - acc < 1e-15 || cdf.len() > 200_000 || p == 0.0 && i > 0 {
            break;
        }
        p *= x * (2 * i + 1) as f64 / (2 * (i + 1)) as f64;
        i += 1;
    }
    cdf
}

impl PulseSampler {
    pub fn new(config: &PipelineConfig, phi: f64) -> Result<Self> {
        config.validate()?;
        let params = config.params()?;
        let x = params.pair_ratio();
        let theta = phi + config.phase_offset;
        let overlap_zero = config.decoherence.filter(|d| d.overlap == 0.0).map(|d| d.basis);
        let source = if !config.input.is_vacuum() {
            let state = build_output_state_lossless(config, phi)?;
            let (arm1, arm2) = arm_modes(&state);
            let mean = |modes: &[usize]| modes.iter().map(|&i| state.mean()[i].norm_sqr()).sum::<f64>();
            Source::Coherent {
                mean1: mean(&arm1),
                mean2: mean(&arm2),
            }
        } else if x == 0.0 {
            Source::Dark
        } else {
            match overlap_zero {
                None => {
                    let u = detector_map(theta);
                    let pair_law = geometric(x)?;
                    let mut cap = 0usize;
                    while x.powi(cap as i32 + 1) > SECTOR_CACHE_TAIL && cap < SECTOR_CACHE_MAX {
                        cap += 1;
                    }
                    let mut ladder = SectorLadder::new(u);
                    let mut cdfs = Vec::with_capacity(cap + 1);
                    cdfs.push(ladder.cdf()?);
                    for _ in 0..cap {
                        ladder.advance();
                        cdfs.push(ladder.cdf()?);
                    }
                    Source::Pairs { pair_law, cdfs, u }
                }
                Some(DecoherenceBasis::HV) => {
                    let (s, c) = (0.5 * theta).sin_cos();
                    Source::SplitHv {
                        pair_law: geometric(x)?,
                        p_h: c * c,
                        p_v: s * s,
                    }
                }
                Some(DecoherenceBasis::PM) => Source::SplitPm {
                    cdf: squeezed_pair_cdf(x, params.c_norm),
                    x,
                },
            }
        };
        Ok(Self {
            source,
            eta: config.detector_efficiency,
        })
    }

    fn sector_cdf<'a>(cdfs: &'a [Vec<f64>], u: &ModeMatrix, n: usize) -> Result<Cow<'a, [f64]>> {
        if let Some(c) = cdfs.get(n) {
            return Ok(Cow::Borrowed(c));
        }
        let mut ladder = SectorLadder::new(*u);
        for _ in 0..n {
            ladder.advance();
        }
        Ok(Cow::Owned(ladder.cdf()?))
    }

    fn squeezed_pairs<R: Rng + ?Sized>(cdf: &[f64], x: f64, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = cdf.partition_point(|c| *c <= u);
        if i < cdf.len() {
            return i as u64;
        }
        // beyond the table: continue the series
        let mut i = cdf.len() - 1;
        let mut acc = cdf[i];
        let mut p = (cdf[i] - if i > 0 { cdf[i - 1] } else { 0.0 }).max(f64::MIN_POSITIVE);
        while acc <= u && p > 0.0 {
            p *= x * (2 * i + 1) as f64 / (2 * (i + 1)) as f64;
            acc += p;
            i += 1;
        }
        i as u64
    }

    /// Photon numbers at the two ports before detection.
    pub fn sample_ports<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PortCounts> {
        let binomial = |n: u64, p: f64, rng: &mut R| -> Result<u64> {
            if n == 0 || p <= 0.0 {
                return Ok(0);
            }
            Ok(Binomial::new(n, p.min(1.0))
                .map_err(|e| Error::Instability(format!("binomial law: {e}")))?
                .sample(rng))
        };
        match &self.source {
            Source::Dark => Ok(PortCounts { arm1: 0, arm2: 0 }),
            Source::Pairs { pair_law, cdfs, u } => {
                let n = pair_law.sample(rng) as usize;
                let cdf = Self::sector_cdf(cdfs, u, n)?;
                let k = sample_cdf(&cdf, rng) as u64;
                Ok(PortCounts {
                    arm1: k,
                    arm2: 2 * n as u64 - k,
                })
            }
            Source::SplitHv { pair_law, p_h, p_v } => {
                let n = pair_law.sample(rng);
                let h1 = binomial(n, *p_h, rng)?;
                let v1 = binomial(n, *p_v, rng)?;
                Ok(PortCounts {
                    arm1: h1 + v1,
                    arm2: 2 * n - h1 - v1,
                })
            }
            Source::SplitPm { cdf, x } => {
                let plus = 2 * Self::squeezed_pairs(cdf, *x, rng);
                let minus = 2 * Self::squeezed_pairs(cdf, *x, rng);
                let p1 = binomial(plus, 0.5, rng)?;
                let m1 = binomial(minus, 0.5, rng)?;
                Ok(PortCounts {
                    arm1: p1 + m1,
                    arm2: plus + minus - p1 - m1,
                })
            }
            Source::Coherent { mean1, mean2 } => {
                let poisson = |m: f64, rng: &mut R| -> Result<u64> {
                    if m <= 0.0 {
                        return Ok(0);
                    }
                    Ok(Poisson::new(m)
                        .map_err(|e| Error::Instability(format!("poisson law: {e}")))?
                        .sample(rng) as u64)
                };
                Ok(PortCounts {
                    arm1: poisson(*mean1, rng)?,
                    arm2: poisson(*mean2, rng)?,
                })
            }
        }
    }

    /// Detection of given port counts through the fan-out and efficiency.
    pub fn detect<R: Rng + ?Sized>(&self, ports: PortCounts, rng: &mut R) -> Result<Clicks> {
        let share = self.eta / ARM1_DETECTORS as f64;
        let mut remaining = ports.arm1;
        let mut left = 1.0;
        let mut hits = [0u64; ARM1_DETECTORS];
        for h in hits.iter_mut() {
            if remaining == 0 {
                break;
            }
            let p = (share / left).min(1.0);
            *h = Binomial::new(remaining, p)
                .map_err(|e| Error::Instability(format!("binomial law: {e}")))?
                .sample(rng);
            remaining -= *h;
            left -= share;
        }
        let d2 = ports.arm2 > 0
            && Binomial::new(ports.arm2, self.eta)
                .map_err(|e| Error::Instability(format!("binomial law: {e}")))?
                .sample(rng)
                > 0;
        Ok(Clicks {
            d1a: hits[0] > 0,
            d1b: hits[1] > 0,
            d1c: hits[2] > 0,
            d2,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Clicks> {
        let ports = self.sample_ports(rng)?;
        self.detect(ports, rng)
    }
}

/// One pulse at phase `phi`. Builds a fresh [`PulseSampler`]; use the
/// sampler directly for repeated draws.
pub fn sample_pulse<R: Rng + ?Sized>(config: &PipelineConfig, phi: f64, rng: &mut R) -> Result<Clicks> {
    PulseSampler::new(config, phi)?.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub shots: u64,
    pub singles_1: u64,
    pub singles_2: u64,
    pub pairs: u64,
    pub same_pairs: u64,
    pub triples: u64,
}

impl Tally {
    fn record(&mut self, c: Clicks) {
        self.shots += 1;
        self.singles_1 += c.d1a as u64;
        self.singles_2 += c.d2 as u64;
        self.pairs += (c.d1a && c.d2) as u64;
        self.same_pairs += (c.d1a && c.d1b) as u64;
        self.triples += (c.d1a && c.d1b && c.d1c) as u64;
    }

    fn merge(&mut self, o: &Tally) {
        self.shots += o.shots;
        self.singles_1 += o.singles_1;
        self.singles_2 += o.singles_2;
        self.pairs += o.pairs;
        self.same_pairs += o.same_pairs;
        self.triples += o.triples;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountsRow {
    pub phi: f64,
    #[serde(flatten)]
    pub tally: Tally,
}

impl CountsRow {
    pub fn count(&self, combo: DetectorCombo) -> u64 {
        match combo {
            DetectorCombo::D1A => self.tally.singles_1,
            DetectorCombo::D1A_D1B => self.tally.same_pairs,
            DetectorCombo::D1A_D1B_D1C => self.tally.triples,
            DetectorCombo::D1A_D2 => self.tally.pairs,
        }
    }

    pub fn singles_2(&self) -> u64 {
        self.tally.singles_2
    }

    pub fn shots(&self) -> u64 {
        self.tally.shots
    }

    pub fn rate(&self, combo: DetectorCombo) -> f64 {
        binomial_rate(self.count(combo), self.tally.shots).0
    }

    pub fn stderr(&self, combo: DetectorCombo) -> f64 {
        binomial_rate(self.count(combo), self.tally.shots).1
    }
}

/// `(k/n, √(r(1−r)/n))`.
pub fn binomial_rate(count: u64, shots: u64) -> (f64, f64) {
    let r = count as f64 / shots as f64;
    (r, (r * (1.0 - r) / shots as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    pub rows: Vec<CountsRow>,
    pub seed: u64,
    pub chunk_shots: u64,
    pub rng: String,
    pub stream_rule: String,
}

pub fn simulate_counts(config: &PipelineConfig, grid: &[f64], shots: u64, seed: u64) -> Result<CountsTable> {
    simulate_counts_with(Exec::default(), config, grid, shots, seed)
}

/// Runs `shots` pulses at every phase of `grid`. Chunk `c` of point `p` uses
/// its own ChaCha8 stream `(p << 32) | c` under `seed`, so the table depends
/// only on `(seed, CHUNK_SHOTS)`.
pub fn simulate_counts_with(
    exec: Exec,
    config: &PipelineConfig,
    grid: &[f64],
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    let mut config = *config;
    config.backend = Backend::MonteCarlo { shots, seed };
    config.validate()?;
    if grid.is_empty() || grid.iter().any(|p| !p.is_finite()) {
        return Err(invalid("phase grid must be nonempty and finite"));
    }
    let samplers = exec.try_map(grid.len(), |i| PulseSampler::new(&config, grid[i]))?;
    let chunks = shots.div_ceil(CHUNK_SHOTS);
    if chunks > u32::MAX as u64 || grid.len() > u32::MAX as usize {
        return Err(invalid("too many chunks for the stream layout"));
    }
    let jobs = grid.len() * chunks as usize;
    let tallies = exec.try_map(jobs, |job| {
        let point = job / chunks as usize;
        let chunk = (job % chunks as usize) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((point as u64) << 32) | chunk);
        let n = CHUNK_SHOTS.min(shots - chunk * CHUNK_SHOTS);
        let sampler = &samplers[point];
        let mut tally = Tally::default();
        for _ in 0..n {
            tally.record(sampler.sample(&mut rng)?);
        }
        Ok(tally)
    })?;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(p, &phi)| {
            let mut tally = Tally::default();
            for t in &tallies[p * chunks as usize..(p + 1) * chunks as usize] {
                tally.merge(t);
            }
            CountsRow { phi, tally }
        })
        .collect();
    Ok(CountsTable {
        rows,
        seed,
        chunk_shots: CHUNK_SHOTS,
        rng: RNG_ALGORITHM.to_string(),
        stream_rule: RNG_STREAM_RULE.to_string(),
    })
}

/// Per-pulse click probabilities of the tallied events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    pub singles_1: f64,
    pub singles_2: f64,
    pub pairs: f64,
    pub same_pairs: f64,
    pub triples: f64,
}

impl ClickProbabilities {
    pub fn get(&self, combo: DetectorCombo) -> f64 {
        match combo {
            DetectorCombo::D1A => self.singles_1,
            DetectorCombo::D1A_D1B => self.same_pairs,
            DetectorCombo::D1A_D1B_D1C => self.triples,
            DetectorCombo::D1A_D2 => self.pairs,
        }
    }

    /// Inclusion–exclusion from `dark(a, d)`, the probability that `a`
    /// given arm-1 detectors and (`d = 1`) D2 all stay dark.
    fn from_dark(dark: impl Fn(usize, usize) -> f64) -> Self {
        let d = |a, b| dark(a, b);
        Self {
            singles_1: 1.0 - d(1, 0),
            singles_2: 1.0 - d(0, 1),
            pairs: 1.0 - d(1, 0) - d(0, 1) + d(1, 1),
            same_pairs: 1.0 - 2.0 * d(1, 0) + d(2, 0),
            triples: 1.0 - 3.0 * d(1, 0) + 3.0 * d(2, 0) - d(3, 0),
        }
    }
}

/// Exact click probabilities from the Gaussian state: every "all dark"
/// event is the vacuum probability of the arms after thinning arm 1 by
/// `aη/3` and arm 2 by `η`.
pub fn exact_click_probabilities(config: &PipelineConfig, phi: f64) -> Result<ClickProbabilities> {
    let state = build_output_state_lossless(config, phi)?;
    let (arm1, arm2) = arm_modes(&state);
    let eta = config.detector_efficiency;
    let share = eta / ARM1_DETECTORS as f64;
    let mut table = [[1.0f64; 2]; ARM1_DETECTORS + 1];
    for (a, row) in table.iter_mut().enumerate() {
        for (d, cell) in row.iter_mut().enumerate() {
            if a == 0 && d == 0 {
                continue;
            }
            let mut s = state.clone();
            let mut modes = Vec::new();
            if a > 0 {
                for &i in &arm1 {
                    s = s.apply_loss(i, a as f64 * share)?;
                    modes.push(i);
                }
            }
            if d > 0 {
                for &i in &arm2 {
                    s = s.apply_loss(i, eta)?;
                    modes.push(i);
                }
            }
            *cell = s.vacuum_probability(&modes)?;
        }
    }
    Ok(ClickProbabilities::from_dark(|a, d| table[a][d]))
}

/// Click probabilities from a joint port-count distribution `(arm 1, arm 2)`
/// with binomial thinning.
pub fn click_probabilities_from_pmf(grid: &PhotonGrid, eta: f64) -> ClickProbabilities {
    let share = eta / ARM1_DETECTORS as f64;
    let mut table = [[0.0f64; 2]; ARM1_DETECTORS + 1];
    for (k, m, p) in grid.iter() {
        for (a, row) in table.iter_mut().enumerate() {
            let q1 = (1.0 - a as f64 * share).powi(k as i32);
            row[0] += p * q1;
            row[1] += p * q1 * (1.0 - eta).powi(m as i32);
        }
    }
    ClickProbabilities::from_dark(|a, d| table[a][d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_mode_unitary, build_tmsv_dense, joint_photon_pmf};
    use crate::linalg::c64;
    use crate::params::OpaParams;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn vacuum_sector() {
        let a = rotation_amplitudes(0, &detector_map(0.3)).unwrap();
        assert_eq!(a, vec![c64(1.0, 0.0)]);
    }

    #[test]
    fn hong_ou_mandel_sector() {
        let a = rotation_amplitudes(1, &detector_map(FRAC_PI_2)).unwrap();
        assert!(a[1].norm_sqr() < 1e-30);
        assert!((a[0].norm_sqr() - 0.5).abs() < 1e-15);
        assert!((a[2].norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_pair_coincidence_is_cos_squared() {
        for phi in [0.0, 0.3, 1.1, 2.5] {
            let a = rotation_amplitudes(1, &detector_map(phi)).unwrap();
            assert!((a[1].norm_sqr() - phi.cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn sectors_match_fock_engine() {
        let params = OpaParams::new(0.5).unwrap();
        let u = detector_map(0.9);
        let out = apply_mode_unitary(&build_tmsv_dense(&params, 40).unwrap(), &u).unwrap();
        for n in 0..6usize {
            let amps = rotation_amplitudes(n, &u).unwrap();
            let weight = params.gamma.powi(n as i32) / params.c_norm;
            for (k, a) in amps.iter().enumerate() {
                let f = out.amplitude(k, 2 * n - k);
                assert!((a * weight - f).norm() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn dark_at_zero_gain() {
        let c = PipelineConfig::new(0.0);
        let t = simulate_counts(&c, &[0.0, 1.0], 1000, 3).unwrap();
        for r in &t.rows {
            assert_eq!(r.tally.singles_1 + r.tally.singles_2, 0);
        }
    }

    #[test]
    fn perfect_correlation_at_zero_phase() {
        let c = PipelineConfig::new(0.8);
        let s = PulseSampler::new(&c, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5000 {
            let p = s.sample_ports(&mut rng).unwrap();
            assert_eq!(p.arm1, p.arm2);
        }
    }

    #[test]
    fn single_shot_counts_are_binary() {
        let c = PipelineConfig::new(1.2);
        let t = simulate_counts(&c, &[0.4], 1, 1).unwrap();
        let r = t.rows[0];
        for combo in DetectorCombo::ALL {
            assert!(r.count(combo) <= 1);
        }
    }

    #[test]
    fn exact_routes_agree() {
        for (g, eta, phi) in [(0.6, 0.3, 0.0), (0.8, 0.1, 1.0), (0.4, 1.0, 2.2)] {
            let c = PipelineConfig::new(g).with_efficiency(eta);
            let params = OpaParams::new(g).unwrap();
            let out = apply_mode_unitary(&build_tmsv_dense(&params, 80).unwrap(), &detector_map(phi)).unwrap();
            let a = click_probabilities_from_pmf(&joint_photon_pmf(&out), eta);
            let b = exact_click_probabilities(&c, phi).unwrap();
            for combo in DetectorCombo::ALL {
                assert!((a.get(combo) - b.get(combo)).abs() < 1e-12, "{combo}");
            }
            assert!((a.singles_2 - b.singles_2).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_partial_overlap() {
        let c = PipelineConfig::new(0.5).with_decoherence(DecoherenceBasis::HV, 0.5);
        assert!(simulate_counts(&c, &[0.0], 10, 1).is_err());
        assert!(simulate_counts(&PipelineConfig::new(0.5), &[0.0], 0, 1).is_err());
    }

    #[test]
    fn squeezed_component_law_is_normalised() {
        let p = OpaParams::new(1.5).unwrap();
        let cdf = squeezed_pair_cdf(p.pair_ratio(), p.c_norm);
        assert!((cdf[cdf.len() - 1] - 1.0).abs() < 1e-13);
        // mean photons of one component equals sinh² g
        let mut prev = 0.0;
        let mut mean = 0.0;
        for (i, c) in cdf.iter().enumerate() {
            mean += 2.0 * i as f64 * (c - prev);
            prev = *c;
        }
        assert!((mean - p.n_bar).abs() < 1e-9 * p.n_bar);
    }
}
