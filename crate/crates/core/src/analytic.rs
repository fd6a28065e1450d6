//! Closed-form fringe, visibility and excitation-rate laws for the
//! unseeded amplifier output. These are the reference values the engines
//! are checked against and the model functions used by the fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorPairing {
    /// All photons counted on one output port (`G₁₁`, `G₁₁₁`).
    Same,
    /// One photon on each port (`G₁₂`).
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoherenceBasis {
    /// Delay between the H and V components.
    HV,
    /// Delay between the + and − components.
    PM,
}

/// Selects one member of the closed-form fringe family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FringeKind {
    pub order: u8,
    pub pairing: DetectorPairing,
    pub decohered: Option<DecoherenceBasis>,
}

impl FringeKind {
    pub const SAME_2: Self = Self {
        order: 2,
        pairing: DetectorPairing::Same,
        decohered: None,
    };
    pub const CROSS_2: Self = Self {
        order: 2,
        pairing: DetectorPairing::Cross,
        decohered: None,
    };
    pub const SAME_3: Self = Self {
        order: 3,
        pairing: DetectorPairing::Same,
        decohered: None,
    };

    pub fn decohered_same_2(basis: DecoherenceBasis) -> Self {
        Self {
            order: 2,
            pairing: DetectorPairing::Same,
            decohered: Some(basis),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.order, self.pairing, self.decohered) {
            (2, _, None) | (3, DetectorPairing::Same, None) => Ok(()),
            (2, DetectorPairing::Same, Some(_)) => Ok(()),
            _ => Err(Error::Unsupported(format!("no closed form for {self:?}"))),
        }
    }
}

/// Scale factors of the calibration models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub sigma2: f64,
    pub sigma3: f64,
    pub v_max: f64,
    pub alpha: f64,
}

impl RateParams {
    pub fn new(sigma2: f64, sigma3: f64, v_max: f64, alpha: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma3 > 0.0) {
            return Err(invalid("cross sections must be positive"));
        }
        if !(v_max > 0.0 && v_max <= 1.0) {
            return Err(invalid("v_max must lie in (0, 1]"));
        }
        if !(alpha > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        Ok(Self {
            sigma2,
            sigma3,
            v_max,
            alpha,
        })
    }
}

fn check_n_bar(n_bar: f64) -> Result<()> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(invalid(format!(
            "mean photon number must be finite and >= 0, got {n_bar}"
        )));
    }
    Ok(())
}

/// `n̄ = sinh² g`.
pub fn mean_photons(g: f64) -> Result<f64> {
    if !g.is_finite() || g < 0.0 {
        return Err(invalid(format!("gain must be finite and >= 0, got {g}")));
    }
    Ok(g.sinh().powi(2))
}

/// Gain from pump power, `g = κ √P`.
pub fn gain_from_pump(p_uv: f64, kappa: f64) -> Result<f64> {
    if !(p_uv >= 0.0) || !p_uv.is_finite() {
        return Err(invalid(format!("pump power must be >= 0, got {p_uv}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be > 0, got {kappa}")));
    }
    Ok(kappa * p_uv.sqrt())
}

/// Closed-form fringe value at phase `phi`.
///
/// * `G₁₂⁽²⁾ = n̄² + ½(n̄²+n̄)(1+cos 2φ)`
/// * `G₁₁⁽²⁾ = 2n̄² + ½(n̄²+n̄)(1−cos 2φ)`
/// * `G₁₁₁⁽³⁾ = 6n̄³ + 9n̄²(n̄+1) sin²φ`
/// * H/V-decohered `G₁₁⁽²⁾ = 2n̄² + (n̄/2) sin²φ`
/// * ±-decohered `G₁₁⁽²⁾ = 2n̄² + n̄/2`
pub fn fringe_closed_form(kind: FringeKind, phi: f64, n_bar: f64) -> Result<f64> {
    kind.validate()?;
    check_n_bar(n_bar)?;
    let n = n_bar;
    let c2 = (2.0 * phi).cos();
    let s2 = phi.sin().powi(2);
    let value = match (kind.order, kind.pairing, kind.decohered) {
        (2, DetectorPairing::Cross, None) => n * n + 0.5 * (n * n + n) * (1.0 + c2),
        (2, DetectorPairing::Same, None) => 2.0 * n * n + 0.5 * (n * n + n) * (1.0 - c2),
        (3, DetectorPairing::Same, None) => 6.0 * n.powi(3) + 9.0 * n * n * (n + 1.0) * s2,
        (2, DetectorPairing::Same, Some(DecoherenceBasis::HV)) => 2.0 * n * n + 0.5 * n * s2,
        (2, DetectorPairing::Same, Some(DecoherenceBasis::PM)) => 2.0 * n * n + 0.5 * n,
        _ => unreachable!("validated above"),
    };
    Ok(value)
}

/// Fringe visibility `(max−min)/(max+min)` in closed form.
pub fn visibility_closed_form(kind: FringeKind, n_bar: f64) -> Result<f64> {
    kind.validate()?;
    check_n_bar(n_bar)?;
    let n = n_bar;
    let v = match (kind.order, kind.pairing, kind.decohered) {
        (2, DetectorPairing::Same, None) => (n + 1.0) / (5.0 * n + 1.0),
        (2, DetectorPairing::Cross, None) => (n + 1.0) / (3.0 * n + 1.0),
        (3, DetectorPairing::Same, None) => (3.0 * n + 3.0) / (7.0 * n + 3.0),
        (2, DetectorPairing::Same, Some(DecoherenceBasis::HV)) => 1.0 / (8.0 * n + 1.0),
        (2, DetectorPairing::Same, Some(DecoherenceBasis::PM)) => 0.0,
        _ => unreachable!("validated above"),
    };
    Ok(v)
}

/// Phase-averaged multiphoton excitation rate:
/// `R̄⁽²⁾ = 2σ⁽²⁾(n̄+5n̄²)`, `R̄⁽³⁾ = 12σ⁽³⁾(7n̄³+3n̄²)`.
pub fn excitation_rate(order: u8, n_bar: f64, params: &RateParams) -> Result<f64> {
    check_n_bar(n_bar)?;
    let n = n_bar;
    match order {
        2 => Ok(2.0 * params.sigma2 * (n + 5.0 * n * n)),
        3 => Ok(12.0 * params.sigma3 * (7.0 * n.powi(3) + 3.0 * n * n)),
        _ => Err(Error::Unsupported(format!("excitation rate of order {order}"))),
    }
}

/// The rate law without its cross section: `n̄+5n̄²` or `7n̄³+3n̄²`, times the
/// prefactor (2 or 12).
pub(crate) fn rate_shape(order: u8, n_bar: f64) -> Result<f64> {
    let unit = RateParams {
        sigma2: 1.0,
        sigma3: 1.0,
        v_max: 1.0,
        alpha: 1.0,
    };
    excitation_rate(order, n_bar, &unit)
}

/// `d ln(rate_shape)/d n̄`, used by the rate fit's Jacobian.
pub(crate) fn rate_shape_log_derivative(order: u8, n_bar: f64) -> f64 {
    let n = n_bar;
    match order {
        2 => (1.0 + 10.0 * n) / (n + 5.0 * n * n),
        _ => (21.0 * n * n + 6.0 * n) / (7.0 * n.powi(3) + 3.0 * n * n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const NB_14: f64 = 3.626_364_208_430_566;

    #[test]
    fn mean_photon_values() {
        assert_eq!(mean_photons(0.0).unwrap(), 0.0);
        assert!((mean_photons(1.4).unwrap() - 3.626_364).abs() < 1e-6);
        assert!((mean_photons(2.5).unwrap() - 36.6050).abs() < 1e-4);
        assert!(mean_photons(-1.0).is_err());
    }

    #[test]
    fn pump_scaling() {
        assert_eq!(gain_from_pump(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(gain_from_pump(4.0, 1.0).unwrap(), 2.0);
        for kappa in [0.1, 0.8, 3.0] {
            let a = gain_from_pump(1.3, kappa).unwrap();
            let b = gain_from_pump(4.0 * 1.3, kappa).unwrap();
            assert!((b - 2.0 * a).abs() < 1e-15);
        }
        assert!(gain_from_pump(-1.0, 1.0).is_err());
        assert!(gain_from_pump(1.0, 0.0).is_err());
    }

    #[test]
    fn printed_fringe_values() {
        let n = NB_14;
        let cross0 = fringe_closed_form(FringeKind::CROSS_2, 0.0, n).unwrap();
        let cross90 = fringe_closed_form(FringeKind::CROSS_2, FRAC_PI_2, n).unwrap();
        assert!((cross0 - 29.9274).abs() < 1e-4);
        assert!((cross90 - 13.1505).abs() < 1e-4);
        let same0 = fringe_closed_form(FringeKind::SAME_2, 0.0, n).unwrap();
        let same90 = fringe_closed_form(FringeKind::SAME_2, FRAC_PI_2, n).unwrap();
        assert!((same0 - 26.3010).abs() < 1e-4);
        assert!((same90 - 43.0779).abs() < 1e-4);
        assert_eq!(fringe_closed_form(FringeKind::SAME_3, FRAC_PI_2, 1.0).unwrap(), 24.0);
        assert_eq!(fringe_closed_form(FringeKind::SAME_3, 0.0, 1.0).unwrap(), 6.0);
    }

    #[test]
    fn printed_visibilities() {
        for kind in [FringeKind::SAME_2, FringeKind::CROSS_2, FringeKind::SAME_3] {
            assert_eq!(visibility_closed_form(kind, 0.0).unwrap(), 1.0);
        }
        let v1 = visibility_closed_form(FringeKind::SAME_2, NB_14).unwrap();
        let v12 = visibility_closed_form(FringeKind::CROSS_2, NB_14).unwrap();
        let v3 = visibility_closed_form(FringeKind::SAME_3, NB_14).unwrap();
        assert!((v1 - 0.24182).abs() < 1e-5);
        assert!((v12 - 0.38946).abs() < 1e-5);
        assert!((v3 - 0.48897).abs() < 1e-5);
        let v3_24 = visibility_closed_form(FringeKind::SAME_3, 29.8797).unwrap();
        assert!((v3_24 - 0.43666).abs() < 1e-5);
    }

    #[test]
    fn unsupported_kinds() {
        let bad = FringeKind {
            order: 3,
            pairing: DetectorPairing::Cross,
            decohered: None,
        };
        assert!(fringe_closed_form(bad, 0.0, 1.0).is_err());
        let bad = FringeKind {
            order: 2,
            pairing: DetectorPairing::Cross,
            decohered: Some(DecoherenceBasis::HV),
        };
        assert!(visibility_closed_form(bad, 1.0).is_err());
    }

    #[test]
    fn rates() {
        let p = RateParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(excitation_rate(2, 0.0, &p).unwrap(), 0.0);
        assert_eq!(excitation_rate(2, 1.0, &p).unwrap(), 12.0);
        assert_eq!(excitation_rate(3, 1.0, &p).unwrap(), 120.0);
        assert!(excitation_rate(4, 1.0, &p).is_err());
        assert!(RateParams::new(1.0, 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn rate_equals_phase_average_of_fringe() {
        // trapezoid over one period is exact for trigonometric polynomials
        let p = RateParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let points = 64;
        for n in [0.5, 3.63, 36.6] {
            let avg = |kind| {
                (0..points)
                    .map(|i| fringe_closed_form(kind, PI * i as f64 / points as f64, n).unwrap())
                    .sum::<f64>()
                    / points as f64
            };
            let r2 = excitation_rate(2, n, &p).unwrap();
            let r3 = excitation_rate(3, n, &p).unwrap();
            assert!((r2 / 4.0 - avg(FringeKind::SAME_2)).abs() <= 1e-12 * r2);
            assert!((r3 / 8.0 - avg(FringeKind::SAME_3)).abs() <= 1e-12 * r3);
        }
    }

    #[test]
    fn log_derivative_matches_finite_difference() {
        for order in [2u8, 3] {
            for n in [0.05, 1.0, 20.0] {
                let h = 1e-6 * n;
                let fd = (rate_shape(order, n + h).unwrap().ln() - rate_shape(order, n - h).unwrap().ln()) / (2.0 * h);
                assert!((fd - rate_shape_log_derivative(order, n)).abs() < 1e-6 * fd.abs());
            }
        }
    }
}
