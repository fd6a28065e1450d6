//! Small complex linear-algebra helpers shared by the engines.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Two-mode (polarization) transformation matrix. Row `i` gives the output
/// annihilator `b_i = Σ_j u_ij a_j`.
pub type ModeMatrix = Matrix2<C64>;

pub(crate) const UNITARY_TOL: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry of `|U U† − I|`.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    let prod = u * u.adjoint();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &DMatrix<C64>, tol: f64) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation.is_nan() || deviation > tol {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(())
}

pub fn check_unitary2(u: &ModeMatrix, tol: f64) -> Result<()> {
    check_unitary(&DMatrix::from_iterator(2, 2, u.iter().copied()), tol)
}

/// H/V → ± basis change: `a_± = (a_H ± a_V)/√2`.
pub fn hv_to_pm() -> ModeMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ModeMatrix::new(c64(s, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-s, 0.0))
}

/// Detector modes behind the compensator and polarizing beam splitter:
/// `c₁ = e^{−iφ/2}(cos(φ/2) a_H + i sin(φ/2) a_V)`,
/// `c₂ = e^{−iφ/2}(i sin(φ/2) a_H + cos(φ/2) a_V)`.
pub fn detector_map(phi: f64) -> ModeMatrix {
    let (s, c) = (0.5 * phi).sin_cos();
    let ph = C64::from_polar(1.0, -0.5 * phi);
    ModeMatrix::new(ph * c, ph * c64(0.0, s), ph * c64(0.0, s), ph * c)
}

/// The same map built stage by stage: relative phase `φ` on the `−` mode of
/// the ± basis, then projection back onto H/V at the beam splitter.
pub fn phase_then_pbs(phi: f64) -> ModeMatrix {
    let b = hv_to_pm();
    let phase = ModeMatrix::new(
        c64(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, -phi),
    );
    b.adjoint() * phase * b
}

/// Embeds `u` acting on `modes` into an identity of size `m`.
pub fn embed(u: &DMatrix<C64>, modes: &[usize], m: usize) -> DMatrix<C64> {
    let mut full = DMatrix::<C64>::identity(m, m);
    for (a, &i) in modes.iter().enumerate() {
        for (b, &j) in modes.iter().enumerate() {
            full[(i, j)] = u[(a, b)];
        }
    }
    full
}

pub fn to_dmatrix(u: &ModeMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| u[(i, j)])
}
