//! Declarative experiment configuration (TOML).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ModelKahlerSurface, TangentVector};
use crate::kernels::{check_hypotheses, BandKind, BandSpec};
use crate::toeplitz::SymbolFunction;

/// Environment variable that overrides `output_dir`.
pub const OUT_DIR_ENV: &str = "TBAND_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Cp1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolChoice {
    Height,
    SphereX,
    SphereZ,
    SphereXSquared,
    FirstHarmonic,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    pub xi: f64,
    pub varpi: f64,
    pub c: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self { xi: 0.25, varpi: 1.0 / 6.0, c: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChiConfig {
    pub epsilon: f64,
}

impl Default for ChiConfig {
    fn default() -> Self {
        Self { epsilon: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub decay_slope: f64,
    pub eigen_bound: f64,
    pub eigen_oracle: f64,
    /// `C` in `|(π/k)^d … − e^{ψ₂}| ≤ C k^{−1/2}`.
    pub scaling: f64,
    /// `C` in `|(π/k)^d dim − vol| ≤ C/k`.
    pub weyl: f64,
    pub gk_gap: f64,
    /// `C` in `|lhs − 2π𝒯_k| ≤ C k`.
    pub gk_szego: f64,
    pub structural: f64,
    pub equivariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            decay_slope: -3.0,
            eigen_bound: 1e-10,
            eigen_oracle: 1e-8,
            scaling: 2.0,
            weyl: 4.0,
            gk_gap: 1e-5,
            gk_szego: 1e-4,
            structural: 1e-10,
            equivariance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    pub symbol: SymbolChoice,
    /// Value of the constant symbol.
    pub symbol_constant: f64,
    pub k_list: Vec<u32>,
    /// Smallest `k` entering the decay fits.
    pub fit_k_min: u32,
    /// Base point `m` as `[re, im]`.
    pub base_point: [f64; 2],
    pub offset_w: [f64; 2],
    pub offset_v: [f64; 2],
    /// Extra `(w, v)` pairs for the scaling-limit table.
    pub scaling_offsets: Vec<[f64; 4]>,
    pub margin: f64,
    /// Fiber angles sampled per side.
    pub theta_samples: usize,
    pub band: BandConfig,
    pub chi: ChiConfig,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Cp1,
            symbol: SymbolChoice::Height,
            symbol_constant: 1.0,
            k_list: vec![16, 32, 64, 128, 256, 512],
            fit_k_min: 64,
            base_point: [1.0, 0.0],
            offset_w: [1.0, 0.0],
            offset_v: [0.0, 1.0],
            scaling_offsets: vec![
                [0.0, 0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [1.0, 0.0, 0.0, 1.0],
                [2.0, 0.0, -1.0, 1.0],
                [1.2, -1.6, 0.0, 0.0],
            ],
            margin: 0.2,
            theta_samples: 5,
            band: BandConfig::default(),
            chi: ChiConfig::default(),
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("tband-out"),
            seed: 20_240_601,
        }
    }
}

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hypothesis gates and basic sanity, run before any computation.
    pub fn validate(&self) -> Result<()> {
        check_hypotheses(self.band.xi, self.band.varpi)?;
        if !(self.band.c > 0.0) {
            return Err(Error::Hypothesis(format!("shrink constant c = {} must be positive", self.band.c)));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::Config("k_list must be non-empty with positive entries".into()));
        }
        if !(self.chi.epsilon > 0.0) {
            return Err(Error::Config("chi.epsilon must be positive".into()));
        }
        if self.theta_samples == 0 {
            return Err(Error::Config("theta_samples must be positive".into()));
        }
        if !(self.margin > 0.0) {
            return Err(Error::Config("margin must be positive".into()));
        }
        let k_min = *self.k_list.iter().min().unwrap();
        self.check_offsets(k_min)?;
        Ok(())
    }

    /// `‖w‖, ‖v‖ ≤ k^ϖ` for the configured offsets.
    pub fn check_offsets(&self, k: u32) -> Result<()> {
        let bound = (k as f64).powf(self.band.varpi) * (1.0 + 1e-12);
        for (name, w) in [("offset_w", self.offset_w), ("offset_v", self.offset_v)] {
            let n = c(w).norm();
            if n > bound {
                return Err(Error::Hypothesis(format!("{name} has norm {n} > k^ϖ = {bound} at k = {k}")));
            }
        }
        Ok(())
    }

    /// The sweep the acceptance fits use: `64·2^{i/4}`, `i = 0..=12`.
    pub fn fit_sweep() -> Vec<u32> {
        (0..=12).map(|i| (64.0 * 2f64.powf(i as f64 / 4.0)).round() as u32).collect()
    }

    /// Output directory, honouring [`OUT_DIR_ENV`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn model(&self) -> ModelKahlerSurface {
        match self.model {
            ModelChoice::Cp1 => ModelKahlerSurface::cp1(),
        }
    }

    pub fn symbol(&self) -> SymbolFunction {
        match self.symbol {
            SymbolChoice::Height => SymbolFunction::height(),
            SymbolChoice::SphereX => SymbolFunction::sphere_x(),
            SymbolChoice::SphereZ => SymbolFunction::sphere_z(),
            SymbolChoice::SphereXSquared => SymbolFunction::sphere_x_squared(),
            SymbolChoice::FirstHarmonic => SymbolFunction::first_harmonic(),
            SymbolChoice::Constant => SymbolFunction::constant(self.symbol_constant),
        }
    }

    pub fn base_point(&self) -> ChartPoint {
        ChartPoint::scalar(c(self.base_point))
    }

    pub fn offsets(&self) -> (TangentVector, TangentVector) {
        (TangentVector::scalar(c(self.offset_w)), TangentVector::scalar(c(self.offset_v)))
    }

    pub fn scaling_pairs(&self) -> Vec<(TangentVector, TangentVector)> {
        self.scaling_offsets
            .iter()
            .map(|p| (TangentVector::scalar(Complex64::new(p[0], p[1])), TangentVector::scalar(Complex64::new(p[2], p[3]))))
            .collect()
    }

    /// Reduced symbol `ς_T(m) = f(m)` of the lift `D∘T_f`.
    pub fn symbol_at_base(&self) -> f64 {
        self.symbol().eval(c(self.base_point))
    }

    pub fn band_spec(&self, kind: BandKind) -> Result<BandSpec> {
        BandSpec::new(kind, self.band.c, self.band.xi, self.band.varpi)
    }

    /// `θ` samples spread over `(−π, π)`.
    pub fn theta_grid(&self) -> Vec<f64> {
        let n = self.theta_samples;
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|i| -2.5 + 5.0 * i as f64 / (n - 1) as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str("symbol = \"sphere_x\"\nk_list = [8, 16]\n[band]\nxi = 0.1\n").unwrap();
        assert_eq!(cfg.symbol, SymbolChoice::SphereX);
        assert_eq!(cfg.k_list, vec![8, 16]);
        assert_eq!(cfg.band.c, 0.3);
    }

    #[test]
    fn hypothesis_gates() {
        for bad in ["[band]\nxi = 0.5\n", "[band]\nvarpi = 0.2\n", "[band]\nxi = 0.4\nvarpi = 0.15\n", "[band]\nc = 0.0\n"] {
            assert!(matches!(ExperimentConfig::from_toml_str(bad), Err(Error::Hypothesis(_))), "{bad}");
        }
        assert!(matches!(ExperimentConfig::from_toml_str("bogus = 1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn offset_norm_gate() {
        // 16^{1/6} ≈ 1.59
        let bad = "k_list = [16]\noffset_w = [2.0, 0.0]\n";
        assert!(matches!(ExperimentConfig::from_toml_str(bad), Err(Error::Hypothesis(_))));
        assert!(ExperimentConfig::from_toml_str("k_list = [64]\noffset_w = [2.0, 0.0]\n").is_ok());
    }

    #[test]
    fn fit_sweep_values() {
        assert_eq!(
            ExperimentConfig::fit_sweep(),
            vec![64, 76, 91, 108, 128, 152, 181, 215, 256, 304, 362, 431, 512]
        );
    }
}
