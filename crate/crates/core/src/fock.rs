//! Dense two-mode Fock-space engine.
//!
//! States are stored as a full `(cutoff+1)²` amplitude grid indexed by
//! `(n_H, n_V)`. Passive two-mode optics is applied sector by sector over
//! fixed total photon number, so it never leaks probability out of the grid:
//! the output grid is widened to hold every sector the input populates.

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_unitary2, ModeMatrix, C64, UNITARY_TOL};
use crate::params::OpaParams;

/// Default tolerance on the discarded probability of a truncated state.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Highest operator order accepted by [`normal_moment_dense`].
pub const MAX_MOMENT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseFockState {
    cutoff: usize,
    amplitudes: Vec<C64>,
    norm_deficit: f64,
}

impl DenseFockState {
    /// Builds a state from a row-major `(cutoff+1)²` grid. The deficit is
    /// computed from the stored norm.
    pub fn from_amplitudes(cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = cutoff + 1;
        if amplitudes.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} amplitudes for cutoff {cutoff}, got {}",
                dim * dim,
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(invalid(format!("amplitude norm {norm} exceeds 1")));
        }
        Ok(Self {
            cutoff,
            amplitudes,
            norm_deficit: 1.0 - norm,
        })
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let dim = cutoff + 1;
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim * dim];
        amplitudes[0] = C64::new(1.0, 0.0);
        Self {
            cutoff,
            amplitudes,
            norm_deficit: 0.0,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Amplitude of `|n_h⟩_H |n_v⟩_V`; zero outside the grid.
    pub fn amplitude(&self, n_h: usize, n_v: usize) -> C64 {
        if n_h > self.cutoff || n_v > self.cutoff {
            return C64::new(0.0, 0.0);
        }
        self.amplitudes[self.index(n_h, n_v)]
    }

    fn index(&self, n_h: usize, n_v: usize) -> usize {
        n_h * (self.cutoff + 1) + n_v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest total photon number carrying a nonzero amplitude.
    pub fn max_total_photons(&self) -> usize {
        let dim = self.cutoff + 1;
        let mut best = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                best = best.max(i / dim + i % dim);
            }
        }
        best
    }

    /// Probability of each total photon number `n_H + n_V`.
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let dim = self.cutoff + 1;
        let mut dist = vec![0.0; 2 * self.cutoff + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            dist[i / dim + i % dim] += a.norm_sqr();
        }
        dist
    }
}

/// Geometric tail `Σ_{n>K} (1−x)xⁿ = x^{K+1}` of the pair-number law.
pub fn tmsv_norm_tail(params: &OpaParams, cutoff: usize) -> f64 {
    params.pair_ratio().powi(cutoff as i32 + 1)
}

/// Bound on the truncation bias of a moment of total operator order `order`.
///
/// Sums `(2n + 2·order)^order · pₙ` over the pair numbers `n > K − ⌈order/2⌉`
/// that either lie beyond the cutoff or are coupled to it by the moment's
/// operators, with `pₙ = (1−x)xⁿ`, `x = tanh² g`. For `order = 0` this is the
/// plain norm tail.
pub fn moment_tail_bound(params: &OpaParams, cutoff: usize, order: usize) -> f64 {
    let x = params.pair_ratio();
    if x == 0.0 {
        return 0.0;
    }
    let start = (cutoff + 1).saturating_sub(order.div_ceil(2));
    let mut total = 0.0;
    let mut p = (1.0 - x) * x.powi(start as i32);
    let mut n = start;
    loop {
        let w = ((2 * n + 2 * order) as f64).powi(order as i32);
        let term = w * p;
        total += term;
        // terms decay geometrically once n is past the polynomial peak
        if n > start + 16 && term < total * 1e-17 {
            break;
        }
        if n > start + 100_000 {
            break;
        }
        p *= x;
        n += 1;
    }
    total
}

/// Smallest cutoff whose norm tail and order-`order` moment tail are both at
/// most `tol`.
pub fn required_cutoff(params: &OpaParams, order: usize, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(invalid("tail tolerance must be positive"));
    }
    if params.pair_ratio() >= 1.0 {
        return Err(invalid("gain too large for a dense Fock representation"));
    }
    let mut cutoff = 0usize;
    while tmsv_norm_tail(params, cutoff) > tol || moment_tail_bound(params, cutoff, order) > tol {
        cutoff += 1;
        if cutoff > 4096 {
            return Err(Error::TruncationInsufficient {
                cutoff,
                tail: moment_tail_bound(params, cutoff, order),
                tolerance: tol,
            });
        }
    }
    Ok(cutoff)
}

/// Two-mode squeezed vacuum `Σ Γⁿ |n⟩_H|n⟩_V / C` truncated at `cutoff`,
/// with the default tail tolerance.
pub fn build_tmsv_dense(params: &OpaParams, cutoff: usize) -> Result<DenseFockState> {
    build_tmsv_dense_with_tolerance(params, cutoff, DEFAULT_TAIL_TOLERANCE)
}

pub fn build_tmsv_dense_with_tolerance(
    params: &OpaParams,
    cutoff: usize,
    tail_tolerance: f64,
) -> Result<DenseFockState> {
    if !params.g.is_finite() {
        return Err(invalid("gain must be finite"));
    }
    let deficit = params.pair_ratio().powi(cutoff as i32 + 1);
    if deficit > tail_tolerance {
        return Err(Error::TruncationInsufficient {
            cutoff,
            tail: deficit,
            tolerance: tail_tolerance,
        });
    }
    let dim = cutoff + 1;
    let mut amplitudes = vec![C64::new(0.0, 0.0); dim * dim];
    let mut a = 1.0 / params.c_norm;
    for n in 0..=cutoff {
        amplitudes[n * dim + n] = C64::new(a, 0.0);
        a *= params.gamma;
    }
    Ok(DenseFockState {
        cutoff,
        amplitudes,
        norm_deficit: deficit,
    })
}

/// Product coherent state `|α_H⟩|α_V⟩` truncated at `cutoff`.
pub fn build_coherent_dense(alpha_h: C64, alpha_v: C64, cutoff: usize, tail_tolerance: f64) -> Result<DenseFockState> {
    let single = |alpha: C64| {
        let mut out = Vec::with_capacity(cutoff + 1);
        let mut a = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..=cutoff {
            out.push(a);
            a = a * alpha / ((n + 1) as f64).sqrt();
        }
        out
    };
    let h = single(alpha_h);
    let v = single(alpha_v);
    let dim = cutoff + 1;
    let mut amplitudes = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            amplitudes[i * dim + j] = h[i] * v[j];
        }
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let deficit = (1.0 - norm).max(0.0);
    if deficit > tail_tolerance {
        return Err(Error::TruncationInsufficient {
            cutoff,
            tail: deficit,
            tolerance: tail_tolerance,
        });
    }
    Ok(DenseFockState {
        cutoff,
        amplitudes,
        norm_deficit: 1.0 - norm,
    })
}

/// Applies the passive linear-optics transformation induced by the 2×2
/// unitary `u`.
///
/// The returned state `ψ'` satisfies `⟨ψ'|f(a)|ψ'⟩ = ⟨ψ|f(u·a)|ψ⟩`, so
/// moments of the output modes `b = u·a` are read off `ψ'` directly. The
/// output cutoff equals the largest populated total photon number, which
/// keeps every sector complete.
pub fn apply_mode_unitary(state: &DenseFockState, u: &ModeMatrix) -> Result<DenseFockState> {
    check_unitary2(u, UNITARY_TOL)?;
    let n_max = state.max_total_photons();
    let out_cutoff = n_max.max(state.cutoff);
    let dim_in = state.cutoff + 1;
    let dim_out = out_cutoff + 1;
    let mut out = vec![C64::new(0.0, 0.0); dim_out * dim_out];
    let generator = SectorGenerator::new(u);

    let mut sector_in = Vec::new();
    for total in 0..=n_max {
        sector_in.clear();
        let mut any = false;
        for j in 0..=total {
            let a = if j < dim_in && total - j < dim_in {
                state.amplitudes[j * dim_in + (total - j)]
            } else {
                C64::new(0.0, 0.0)
            };
            any |= a != C64::new(0.0, 0.0);
            sector_in.push(a);
        }
        if !any {
            continue;
        }
        let sector_out = generator.apply(total, &sector_in)?;
        for (j, a) in sector_out.into_iter().enumerate() {
            out[j * dim_out + (total - j)] = a;
        }
    }
    Ok(DenseFockState {
        cutoff: out_cutoff,
        amplitudes: out,
        norm_deficit: state.norm_deficit,
    })
}

/// Sector action of the passive unitary `exp(i a†ha)` with `e^{ih} = u`.
///
/// Writing `u = λ₁P₁ + λ₂P₂`, the sector-`N` block is
/// `Σ_k λ₁^k λ₂^{N−k} v_k v_k†` where `v_k` are the eigenvectors of the
/// tridiagonal generator `G = a†P₁a` with integer eigenvalue `k`. The
/// eigenvectors come from inverse iteration at the known eigenvalues.
struct SectorGenerator {
    scalar: Option<C64>,
    theta1: f64,
    theta2: f64,
    p00: f64,
    p11: f64,
    rho: f64,
    beta: f64,
}

impl SectorGenerator {
    fn new(u: &ModeMatrix) -> Self {
        let tr = u[(0, 0)] + u[(1, 1)];
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = 0.5 * (tr - disc);
        if (l1 - l2).norm() < 1e-13 {
            let lam = 0.5 * tr;
            return Self {
                scalar: Some(lam / lam.norm()),
                theta1: 0.0,
                theta2: 0.0,
                p00: 0.0,
                p11: 0.0,
                rho: 0.0,
                beta: 0.0,
            };
        }
        // eigenvector of l1: the two candidate forms, keep the better conditioned
        let cand_a = [u[(0, 1)], l1 - u[(0, 0)]];
        let cand_b = [l1 - u[(1, 1)], u[(1, 0)]];
        let na = cand_a[0].norm_sqr() + cand_a[1].norm_sqr();
        let nb = cand_b[0].norm_sqr() + cand_b[1].norm_sqr();
        let (w, nw) = if na >= nb { (cand_a, na) } else { (cand_b, nb) };
        let s = nw.sqrt();
        let w = [w[0] / s, w[1] / s];
        let p01 = w[0] * w[1].conj();
        Self {
            scalar: None,
            theta1: l1.arg(),
            theta2: l2.arg(),
            p00: w[0].norm_sqr(),
            p11: w[1].norm_sqr(),
            rho: p01.norm(),
            beta: p01.arg(),
        }
    }

    fn apply(&self, total: usize, x: &[C64]) -> Result<Vec<C64>> {
        if let Some(lam) = self.scalar {
            let phase = C64::from_polar(1.0, lam.arg() * total as f64);
            return Ok(x.iter().map(|a| a * phase).collect());
        }
        let dim = total + 1;
        let nf = total as f64;
        let diag: Vec<f64> = (0..dim)
            .map(|j| self.p00 * j as f64 + self.p11 * (nf - j as f64))
            .collect();
        let off: Vec<f64> = (0..total)
            .map(|j| self.rho * (((j + 1) * (total - j)) as f64).sqrt())
            .collect();
        // gauge away the phase of the off-diagonal: G = D R Dᵀ*, D_jj = e^{ijβ}
        let gauge: Vec<C64> = (0..dim).map(|j| C64::from_polar(1.0, self.beta * j as f64)).collect();
        let xg: Vec<C64> = x.iter().zip(&gauge).map(|(a, d)| a * d.conj()).collect();
        let mut y = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let v = eigenvector_at(&diag, &off, k as f64)?;
            let proj: C64 = v.iter().zip(&xg).map(|(vi, xi)| xi * *vi).sum();
            let angle = self.theta1 * k as f64 + self.theta2 * (nf - k as f64);
            let coef = proj * C64::from_polar(1.0, angle);
            for (yi, vi) in y.iter_mut().zip(&v) {
                *yi += coef * *vi;
            }
        }
        Ok(y.into_iter().zip(&gauge).map(|(a, d)| a * d).collect())
    }
}

/// Normalized eigenvector of the real symmetric tridiagonal matrix
/// `(diag, off)` for the (exactly known, isolated) eigenvalue `lambda`.
fn eigenvector_at(diag: &[f64], off: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let scale = diag.iter().map(|d| d.abs()).fold(1.0, f64::max);
    let shift = lambda + 1e-10 * scale;
    let mut x: Vec<f64> = (0..n)
        .map(|j| 1.0 + 0.5 * (1.7 * j as f64 + 0.3 * lambda + 0.1).sin())
        .collect();
    for _ in 0..3 {
        let d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        x = solve_tridiagonal(off, &d, off, &x, scale)?;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Instability(
                "inverse iteration failed in a photon-number sector".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(x)
}

/// Gaussian elimination with partial pivoting for a tridiagonal system
/// (the LAPACK `gtsv` scheme). Exactly singular pivots are nudged by
/// `ε·scale`.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], scale: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    let dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * scale;
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Instability("tridiagonal solve overflowed".into()));
    }
    Ok(b)
}

fn rising_sqrt(n: usize, p: usize) -> f64 {
    (1..=p).map(|i| ((n + i) as f64).sqrt()).product()
}

/// Normal-ordered moment `⟨a_H†ᵖ a_V†^q a_H^r a_V^s⟩` of the truncated state.
pub fn normal_moment_dense(state: &DenseFockState, p: usize, q: usize, r: usize, s: usize) -> Result<C64> {
    let order = p + q + r + s;
    if order > MAX_MOMENT_ORDER {
        return Err(Error::OrderTooHigh {
            order,
            max: MAX_MOMENT_ORDER,
        });
    }
    let k = state.cutoff;
    let mut acc = C64::new(0.0, 0.0);
    for nh in 0..=k {
        if nh + p > k || nh + r > k {
            break;
        }
        let fh = rising_sqrt(nh, p) * rising_sqrt(nh, r);
        for nv in 0..=k {
            if nv + q > k || nv + s > k {
                break;
            }
            let left = state.amplitude(nh + p, nv + q);
            let right = state.amplitude(nh + r, nv + s);
            if left == C64::new(0.0, 0.0) || right == C64::new(0.0, 0.0) {
                continue;
            }
            let f = fh * rising_sqrt(nv, q) * rising_sqrt(nv, s);
            acc += left.conj() * right * f;
        }
    }
    Ok(acc)
}

/// Joint photon-number probabilities over `(n_H, n_V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonGrid {
    cutoff: usize,
    probs: Vec<f64>,
}

impl PhotonGrid {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn get(&self, n_h: usize, n_v: usize) -> f64 {
        if n_h > self.cutoff || n_v > self.cutoff {
            return 0.0;
        }
        self.probs[n_h * (self.cutoff + 1) + n_v]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Iterates over `(n_h, n_v, probability)` for nonzero entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let dim = self.cutoff + 1;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (i / dim, i % dim, *p))
    }
}

pub fn joint_photon_pmf(state: &DenseFockState) -> PhotonGrid {
    PhotonGrid {
        cutoff: state.cutoff,
        probs: state.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
    }
}
