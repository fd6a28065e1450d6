//! Multimode Gaussian states in the normal-ordered parameterization.
//!
//! A state is held as its coherent means `⟨a_i⟩` plus the fluctuation
//! moments `N_ij = ⟨δa_i† δa_j⟩` and `M_ij = ⟨δa_i δa_j⟩`. Every quantity the
//! detectors see is a normal-ordered moment, which Wick's theorem expands
//! into products of these entries without any reordering corrections.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_unitary, C64, UNITARY_TOL};

/// Highest operator order accepted by [`GaussianState::wick_normal_moment`].
pub const MAX_WICK_ORDER: usize = 8;

const PHYSICALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
    Derived,
}

/// Polarization and temporal slot of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub polarization: Polarization,
    pub temporal: u8,
}

impl ModeLabel {
    pub const fn new(polarization: Polarization, temporal: u8) -> Self {
        Self { polarization, temporal }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<C64>,
    n_mat: DMatrix<C64>,
    m_mat: DMatrix<C64>,
    labels: Vec<ModeLabel>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl GaussianState {
    /// Vacuum on `labels.len()` modes.
    pub fn vacuum(labels: Vec<ModeLabel>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(invalid("a Gaussian state needs at least one mode"));
        }
        Ok(Self {
            mean: DVector::from_element(m, zero()),
            n_mat: DMatrix::from_element(m, m, zero()),
            m_mat: DMatrix::from_element(m, m, zero()),
            labels,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn mean(&self) -> &DVector<C64> {
        &self.mean
    }

    pub fn n_mat(&self) -> &DMatrix<C64> {
        &self.n_mat
    }

    pub fn m_mat(&self) -> &DMatrix<C64> {
        &self.m_mat
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.mode_count() {
            return Err(invalid(format!(
                "mode index {i} out of range for {} modes",
                self.mode_count()
            )));
        }
        Ok(())
    }

    /// Total mean photon number `Σ_i (N_ii + |⟨a_i⟩|²)`.
    pub fn total_photons(&self) -> f64 {
        (0..self.mode_count())
            .map(|i| self.n_mat[(i, i)].re + self.mean[i].norm_sqr())
            .sum()
    }

    /// Bogoliubov map `b = K a + L a†` applied to means and fluctuations.
    fn apply_bogoliubov(&mut self, k: &DMatrix<C64>, l: &DMatrix<C64>) {
        let n = &self.n_mat;
        let m = &self.m_mat;
        let kc = k.map(|z| z.conj());
        let lc = l.map(|z| z.conj());
        let mc = m.map(|z| z.conj());
        let nt = n.transpose();
        let eye = DMatrix::<C64>::identity(n.nrows(), n.ncols());

        let new_n = &kc * n * k.transpose()
            + &kc * &mc * l.transpose()
            + &lc * m * k.transpose()
            + &lc * (&eye + &nt) * l.transpose();
        let new_m =
            k * m * k.transpose() + k * (&eye + &nt) * l.transpose() + l * n * k.transpose() + l * &mc * l.transpose();
        let new_mean = k * &self.mean + l * self.mean.map(|z| z.conj());

        self.n_mat = hermitize(new_n);
        self.m_mat = symmetrize(new_m);
        self.mean = new_mean;
    }

    /// Unseeded two-mode squeezing with gain `g` between modes `i` and `j`:
    /// `a_i → cosh g a_i + sinh g a_j†` and symmetrically for `a_j`.
    pub fn apply_two_mode_squeeze(&self, i: usize, j: usize, g: f64) -> Result<Self> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(invalid("two-mode squeezing needs two distinct modes"));
        }
        if !g.is_finite() {
            return Err(invalid("gain must be finite"));
        }
        let m = self.mode_count();
        let mut k = DMatrix::<C64>::identity(m, m);
        let mut l = DMatrix::from_element(m, m, zero());
        k[(i, i)] = C64::new(g.cosh(), 0.0);
        k[(j, j)] = C64::new(g.cosh(), 0.0);
        l[(i, j)] = C64::new(g.sinh(), 0.0);
        l[(j, i)] = C64::new(g.sinh(), 0.0);
        let mut out = self.clone();
        out.apply_bogoliubov(&k, &l);
        Ok(out)
    }

    /// Passive unitary `u` acting on the listed modes: `b = u a` on that
    /// subset, identity elsewhere.
    pub fn apply_passive_unitary(&self, u: &DMatrix<C64>, modes: &[usize]) -> Result<Self> {
        if u.nrows() != modes.len() || u.ncols() != modes.len() {
            return Err(invalid("unitary size does not match the mode subset"));
        }
        for (a, &i) in modes.iter().enumerate() {
            self.check_mode(i)?;
            if modes[..a].contains(&i) {
                return Err(invalid("mode subset contains duplicates"));
            }
        }
        check_unitary(u, UNITARY_TOL)?;
        let full = crate::linalg::embed(u, modes, self.mode_count());
        let zeros = DMatrix::from_element(self.mode_count(), self.mode_count(), zero());
        let mut out = self.clone();
        out.apply_bogoliubov(&full, &zeros);
        Ok(out)
    }

    /// Coherent displacement of mode `i` by `alpha`.
    pub fn apply_displacement(&self, i: usize, alpha: C64) -> Result<Self> {
        self.check_mode(i)?;
        let mut out = self.clone();
        out.mean[i] += alpha;
        Ok(out)
    }

    /// Pure loss with transmission `eta` on mode `i`.
    pub fn apply_loss(&self, i: usize, eta: f64) -> Result<Self> {
        self.check_mode(i)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("loss transmission must lie in [0,1], got {eta}")));
        }
        let t = eta.sqrt();
        let mut out = self.clone();
        out.mean[i] *= t;
        for j in 0..self.mode_count() {
            out.n_mat[(i, j)] *= t;
            out.n_mat[(j, i)] *= t;
            out.m_mat[(i, j)] *= t;
            out.m_mat[(j, i)] *= t;
        }
        Ok(out)
    }

    /// Replaces the mode labels, e.g. after a basis change.
    pub fn with_labels(mut self, labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.len() != self.mode_count() {
            return Err(invalid("label count does not match the mode count"));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Appends one vacuum mode with the given label.
    pub fn append_vacuum(&self, label: ModeLabel) -> Self {
        let m = self.mode_count();
        let mut out = Self {
            mean: DVector::from_element(m + 1, zero()),
            n_mat: DMatrix::from_element(m + 1, m + 1, zero()),
            m_mat: DMatrix::from_element(m + 1, m + 1, zero()),
            labels: self.labels.clone(),
        };
        out.labels.push(label);
        out.mean.rows_mut(0, m).copy_from(&self.mean);
        out.n_mat.view_mut((0, 0), (m, m)).copy_from(&self.n_mat);
        out.m_mat.view_mut((0, 0), (m, m)).copy_from(&self.m_mat);
        out
    }

    /// Partial distinguishability of mode `i`: appends a vacuum ancilla in
    /// temporal slot 1 and mixes `a_i → √overlap·a_i + √(1−overlap)·a_anc`.
    /// The ancilla inherits the polarization of mode `i`.
    pub fn split_temporal_mode(&self, i: usize, overlap: f64) -> Result<Self> {
        self.check_mode(i)?;
        if !(0.0..=1.0).contains(&overlap) {
            return Err(invalid(format!("overlap must lie in [0,1], got {overlap}")));
        }
        let label = ModeLabel::new(self.labels[i].polarization, 1);
        let extended = self.append_vacuum(label);
        if overlap == 1.0 {
            return Ok(extended);
        }
        let anc = extended.mode_count() - 1;
        let (c, s) = (overlap.sqrt(), (1.0 - overlap).sqrt());
        let rot = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
        );
        extended.apply_passive_unitary(&rot, &[i, anc])
    }

    /// Normal-ordered moment `⟨a†_{c₁}…a†_{c_p} a_{d₁}…a_{d_q}⟩`.
    ///
    /// Each operator is either replaced by its mean or contracted with a
    /// later operator: `(a†,a) → N`, `(a,a) → M`, `(a†,a†) → M*`.
    pub fn wick_normal_moment(&self, creators: &[usize], annihilators: &[usize]) -> Result<C64> {
        let order = creators.len() + annihilators.len();
        if order > MAX_WICK_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                max: MAX_WICK_ORDER,
            });
        }
        let mut ops = Vec::with_capacity(order);
        for &c in creators {
            self.check_mode(c)?;
            ops.push(Op { mode: c, dagger: true });
        }
        for &a in annihilators {
            self.check_mode(a)?;
            ops.push(Op { mode: a, dagger: false });
        }
        let has_mean = self.mean.iter().any(|z| *z != zero());
        if !has_mean && order % 2 == 1 {
            return Ok(zero());
        }
        let mut used = vec![false; order];
        Ok(self.wick_rec(&ops, &mut used, has_mean))
    }

    fn contraction(&self, a: Op, b: Op) -> C64 {
        match (a.dagger, b.dagger) {
            (true, false) => self.n_mat[(a.mode, b.mode)],
            (false, true) => {
                // a_i a_j† with i before j: never produced by normal ordering,
                // kept for completeness
                let delta = if a.mode == b.mode { 1.0 } else { 0.0 };
                self.n_mat[(b.mode, a.mode)] + delta
            }
            (false, false) => self.m_mat[(a.mode, b.mode)],
            (true, true) => self.m_mat[(a.mode, b.mode)].conj(),
        }
    }

    fn wick_rec(&self, ops: &[Op], used: &mut [bool], has_mean: bool) -> C64 {
        let first = match used.iter().position(|u| !u) {
            Some(f) => f,
            None => return C64::new(1.0, 0.0),
        };
        used[first] = true;
        let mut acc = zero();
        let a = ops[first];
        if has_mean {
            let mu = self.mean[a.mode];
            let mu = if a.dagger { mu.conj() } else { mu };
            if mu != zero() {
                acc += mu * self.wick_rec(ops, used, has_mean);
            }
        }
        for j in first + 1..ops.len() {
            if used[j] {
                continue;
            }
            let c = self.contraction(a, ops[j]);
            if c == zero() {
                continue;
            }
            used[j] = true;
            acc += c * self.wick_rec(ops, used, has_mean);
            used[j] = false;
        }
        used[first] = false;
        acc
    }

    /// Second moments `⟨ξ ξ†⟩` of `ξ = (δa, δa†)`, i.e.
    /// `[[I+N*, M],[M*, N]]`; positive semidefinite for physical states.
    pub fn physicality_matrix(&self) -> DMatrix<C64> {
        let m = self.mode_count();
        let mut big = DMatrix::from_element(2 * m, 2 * m, zero());
        let eye = DMatrix::<C64>::identity(m, m);
        big.view_mut((0, 0), (m, m))
            .copy_from(&(self.n_mat.map(|z| z.conj()) + &eye));
        big.view_mut((0, m), (m, m)).copy_from(&self.m_mat);
        big.view_mut((m, 0), (m, m)).copy_from(&self.m_mat.map(|z| z.conj()));
        big.view_mut((m, m), (m, m)).copy_from(&self.n_mat);
        big
    }

    /// Checks the structural invariants and positivity of the state.
    pub fn check_physical(&self) -> Result<()> {
        let m = self.mode_count();
        for i in 0..m {
            if self.n_mat[(i, i)].re < -PHYSICALITY_TOL {
                return Err(Error::Unphysical(format!("negative occupation on mode {i}")));
            }
            for j in 0..m {
                if (self.n_mat[(i, j)] - self.n_mat[(j, i)].conj()).norm() > PHYSICALITY_TOL {
                    return Err(Error::Unphysical("N is not Hermitian".into()));
                }
                if (self.m_mat[(i, j)] - self.m_mat[(j, i)]).norm() > PHYSICALITY_TOL {
                    return Err(Error::Unphysical("M is not symmetric".into()));
                }
            }
        }
        // complex Cholesky in nalgebra does not reject indefinite input, so
        // test the real embedding [[A, −B],[B, A]] of H = A + iB instead
        let big = self.physicality_matrix();
        let d = 2 * m;
        let mut real = DMatrix::<f64>::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                let z = big[(i, j)];
                real[(i, j)] = z.re;
                real[(i + d, j + d)] = z.re;
                real[(i, j + d)] = -z.im;
                real[(i + d, j)] = z.im;
            }
        }
        for i in 0..2 * d {
            real[(i, i)] += PHYSICALITY_TOL;
        }
        if real.cholesky().is_none() {
            return Err(Error::Unphysical("moment matrix is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Probability that every mode in `modes` is empty.
    ///
    /// The reduced state's Husimi function at the origin gives
    /// `exp(−½ ξ† Σ⁻¹ ξ)/√det Σ` with `Σ = [[I+Nᵀ, M],[M*, I+N]]` and
    /// `ξ = (⟨a⟩, ⟨a⟩*)` on the subset.
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64> {
        for &i in modes {
            self.check_mode(i)?;
        }
        let k = modes.len();
        if k == 0 {
            return Ok(1.0);
        }
        let mut sigma = DMatrix::from_element(2 * k, 2 * k, zero());
        let mut xi = DVector::from_element(2 * k, zero());
        for (a, &i) in modes.iter().enumerate() {
            xi[a] = self.mean[i];
            xi[k + a] = self.mean[i].conj();
            for (b, &j) in modes.iter().enumerate() {
                let delta = if a == b { 1.0 } else { 0.0 };
                sigma[(a, b)] = self.n_mat[(j, i)] + delta;
                sigma[(a, k + b)] = self.m_mat[(i, j)];
                sigma[(k + a, b)] = self.m_mat[(i, j)].conj();
                sigma[(k + a, k + b)] = self.n_mat[(i, j)] + delta;
            }
        }
        let lu = sigma.clone().lu();
        let det = lu.determinant();
        if !(det.re > 0.0) {
            return Err(Error::Unphysical(format!(
                "vacuum-probability determinant {det} is not positive"
            )));
        }
        let mut p = 1.0 / det.re.sqrt();
        if xi.iter().any(|z| *z != zero()) {
            let sol = lu
                .solve(&xi)
                .ok_or_else(|| Error::Instability("singular Husimi covariance".into()))?;
            let quad = xi.adjoint() * sol;
            p *= (-0.5 * quad[(0, 0)].re).exp();
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy)]
struct Op {
    mode: usize,
    dagger: bool,
}

fn hermitize(a: DMatrix<C64>) -> DMatrix<C64> {
    let adj = a.adjoint();
    (a + adj) * C64::new(0.5, 0.0)
}

fn symmetrize(a: DMatrix<C64>) -> DMatrix<C64> {
    let t = a.transpose();
    (a + t) * C64::new(0.5, 0.0)
}

/// Two polarization modes `H`, `V` in temporal slot 0.
pub fn hv_labels() -> Vec<ModeLabel> {
    vec![ModeLabel::new(Polarization::H, 0), ModeLabel::new(Polarization::V, 0)]
}

/// Two-mode squeezed vacuum on `(H, V)` with gain `g`.
pub fn tmsv(g: f64) -> Result<GaussianState> {
    GaussianState::vacuum(hv_labels())?.apply_two_mode_squeeze(0, 1, g)
}
