use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Gain of the unseeded parametric amplifier and the quantities derived from it.
///
/// `gamma = tanh g` is the ratio of successive pair amplitudes, `c_norm = cosh g`
/// the normalization, and `n_bar = sinh² g` the mean photon number per
/// polarization mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaParams {
    pub g: f64,
    pub gamma: f64,
    pub c_norm: f64,
    pub n_bar: f64,
}

impl OpaParams {
    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(invalid(format!("gain must be finite, got {g}")));
        }
        if g < 0.0 {
            return Err(invalid(format!("gain must be non-negative, got {g}")));
        }
        let s = g.sinh();
        Ok(Self {
            g,
            gamma: g.tanh(),
            c_norm: g.cosh(),
            n_bar: s * s,
        })
    }

    /// `sinh g · cosh g`, the pair correlation ⟨a_H a_V⟩.
    pub fn pair_amplitude(&self) -> f64 {
        self.g.sinh() * self.c_norm
    }

    /// `tanh² g = n̄/(n̄+1)`, ratio of successive pair-number probabilities.
    pub fn pair_ratio(&self) -> f64 {
        self.gamma * self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = OpaParams::new(0.6).unwrap();
        assert!((p.gamma - 0.6f64.tanh()).abs() < 1e-16);
        assert!((p.c_norm - 0.6f64.cosh()).abs() < 1e-16);
        assert!((p.n_bar - 0.405_327_783_662_187_3).abs() < 1e-15);
        assert!((p.pair_ratio() - p.n_bar / (p.n_bar + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_gain() {
        assert!(OpaParams::new(-0.1).is_err());
        assert!(OpaParams::new(f64::NAN).is_err());
        assert!(OpaParams::new(f64::INFINITY).is_err());
    }
}
