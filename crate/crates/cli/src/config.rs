//! The run-configuration file: a strict JSON schema mirroring the optical
//! setup. Unknown keys anywhere in the document are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subrayleigh::analytic::DecoherenceBasis;
use subrayleigh::linalg::c64;
use subrayleigh::pipeline::{phase_grid, Backend, DetectorCombo, Input, PipelineConfig, SeedPolarization};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gain: f64,
    #[serde(default)]
    pub input: InputSpec,
    pub phase_grid: PhaseGridSpec,
    #[serde(default)]
    pub decoherence: Option<DecoherenceSpec>,
    #[serde(default)]
    pub phase_offset: f64,
    pub detectors: DetectorSpec,
    pub backend: BackendSpec,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputSpec {
    Vacuum {},
    Coherent {
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
        pol: SeedPolarization,
    },
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::Vacuum {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSpec {
    pub basis: DecoherenceBasis,
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub efficiency: f64,
    pub combo: DetectorCombo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendSpec {
    Gaussian,
    Fock { cutoff: usize },
    Montecarlo { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    pub path: String,
    #[serde(default)]
    pub svg: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The validated pipeline configuration.
    pub fn pipeline(&self) -> CliResult<PipelineConfig> {
        let input = match self.input {
            InputSpec::Vacuum {} => Input::Vacuum,
            InputSpec::Coherent {
                alpha_re,
                alpha_im,
                pol,
            } => Input::coherent(c64(alpha_re, alpha_im), pol),
        };
        let backend = match self.backend {
            BackendSpec::Gaussian => Backend::Gaussian,
            BackendSpec::Fock { cutoff } => Backend::Fock { cutoff },
            BackendSpec::Montecarlo { shots, seed } => Backend::MonteCarlo { shots, seed },
        };
        let mut config = PipelineConfig::new(self.gain)
            .with_input(input)
            .with_phase_offset(self.phase_offset)
            .with_efficiency(self.detectors.efficiency)
            .with_backend(backend);
        if let Some(d) = self.decoherence {
            config = config.with_decoherence(d.basis, d.overlap);
        }
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let g = self.phase_grid;
        phase_grid(g.start, g.stop, g.points).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "gain": 1.4,
        "input": {"type": "vacuum"},
        "phase_grid": {"start": 0.0, "stop": 6.283185307179586, "points": 64},
        "decoherence": null,
        "phase_offset": 0.0,
        "detectors": {"efficiency": 1.0, "combo": "D1A_D2"},
        "backend": "gaussian",
        "output": {"format": "csv", "path": "scan.csv"}
    }"#;

    #[test]
    fn parses_full_document() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.backend, BackendSpec::Gaussian);
        assert_eq!(c.detectors.combo, DetectorCombo::D1A_D2);
        assert_eq!(c.grid().unwrap().len(), 64);
        c.pipeline().unwrap();
    }

    #[test]
    fn parses_variants() {
        let text = BASE
            .replace(
                r#""backend": "gaussian""#,
                r#""backend": {"montecarlo": {"shots": 10, "seed": 4}}"#,
            )
            .replace(
                r#"{"type": "vacuum"}"#,
                r#"{"type": "coherent", "alpha_re": 1.0, "alpha_im": 0.5, "pol": "V"}"#,
            )
            .replace(
                r#""decoherence": null"#,
                r#""decoherence": {"basis": "PM", "overlap": 0.0}"#,
            );
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.backend, BackendSpec::Montecarlo { shots: 10, seed: 4 });
        assert!(matches!(
            c.input,
            InputSpec::Coherent {
                pol: SeedPolarization::V,
                ..
            }
        ));
        let fock = BASE.replace(r#""backend": "gaussian""#, r#""backend": {"fock": {"cutoff": 30}}"#);
        assert_eq!(
            RunConfig::parse(&fock).unwrap().backend,
            BackendSpec::Fock { cutoff: 30 }
        );
    }

    #[test]
    fn rejects_unknown_keys_everywhere() {
        for (from, to) in [
            (r#""gain": 1.4,"#, r#""gain": 1.4, "extra": 1,"#),
            (r#""points": 64}"#, r#""points": 64, "step": 1}"#),
            (r#""combo": "D1A_D2"}"#, r#""combo": "D1A_D2", "dark": 0}"#),
            (r#""path": "scan.csv"}"#, r#""path": "scan.csv", "mode": 1}"#),
            (r#"{"type": "vacuum"}"#, r#"{"type": "vacuum", "x": 1}"#),
            (
                r#""backend": "gaussian""#,
                r#""backend": {"fock": {"cutoff": 3, "tol": 1}}"#,
            ),
        ] {
            let text = BASE.replace(from, to);
            assert_ne!(text, BASE);
            assert!(RunConfig::parse(&text).is_err(), "accepted {to}");
        }
    }

    #[test]
    fn rejects_invalid_values() {
        let neg = BASE.replace(r#""gain": 1.4"#, r#""gain": -1.0"#);
        assert!(matches!(
            RunConfig::parse(&neg).unwrap().pipeline(),
            Err(CliError::Config(_))
        ));
        let combo = BASE.replace("D1A_D2", "D9");
        assert!(RunConfig::parse(&combo).is_err());
        let missing = BASE.replace(r#""gain": 1.4,"#, "");
        assert!(RunConfig::parse(&missing).is_err());
    }

    #[test]
    fn hash_tracks_every_field() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.hash(), RunConfig::parse(BASE).unwrap().hash());
        let mut d = c.clone();
        d.phase_offset = 1e-9;
        assert_ne!(c.hash(), d.hash());
        let mut e = c.clone();
        e.detectors.efficiency = 0.5;
        assert_ne!(c.hash(), e.hash());
        assert!(c.hash().starts_with("sha256:") && c.hash().len() == 71);
    }
}
