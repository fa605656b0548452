//! Run configuration: experiment selection, weight parameters, discretization
//! sizes, symbol suites, and output locations.
//!
//! Configurations are plain JSON documents. Every numeric knob has a default,
//! so a minimal configuration is just an experiment id plus a non-empty symbol
//! list. [`RunConfig::load`] parses and validates in one step; validation
//! failures surface as [`Error::Config`] so the command-line driver can map
//! them to a usage error.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::space::Weight;
use crate::symbols::{build_symbol, Symbol, SymbolSpec};
use crate::{Error, Result};

/// The experiment driven by a configuration.
///
/// The wire names double as output-file stems, so they are stable identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    /// Compare Schatten norms, averaged-oscillation field norms, and
    /// kernel-field norms of Hankel sections over a symbol suite.
    #[serde(rename = "E1-equivalence")]
    Equivalence,
    /// Ratio of the conjugate-symbol Hankel norm to the original one.
    #[serde(rename = "E2-berger-coburn")]
    BergerCoburn,
    /// Hilbert-Schmidt identity: eigenvalue sums against kernel-field
    /// integrals.
    #[serde(rename = "E3-hs-identity")]
    HsIdentity,
    /// Vanishing kernel fields and translation covariance.
    #[serde(rename = "E4-compactness")]
    Compactness,
    /// Plane FFT derivative comparisons through the singular integral
    /// transform.
    #[serde(rename = "E5-beurling")]
    Beurling,
    /// Positive Toeplitz sections against averaged-measure fields.
    #[serde(rename = "E6-toeplitz")]
    Toeplitz,
}

impl ExperimentId {
    /// Stable identifier used in file names and summaries.
    pub fn slug(self) -> &'static str {
        match self {
            ExperimentId::Equivalence => "E1-equivalence",
            ExperimentId::BergerCoburn => "E2-berger-coburn",
            ExperimentId::HsIdentity => "E3-hs-identity",
            ExperimentId::Compactness => "E4-compactness",
            ExperimentId::Beurling => "E5-beurling",
            ExperimentId::Toeplitz => "E6-toeplitz",
        }
    }

    /// Exponent list used when the configuration leaves `p_list` empty.
    pub fn default_p_list(self) -> Vec<f64> {
        match self {
            ExperimentId::Equivalence => vec![1.0, 2.0, 4.0],
            ExperimentId::BergerCoburn => vec![1.5, 2.0, 4.0],
            ExperimentId::HsIdentity => vec![2.0],
            // The compactness experiment reports sup-type quantities; the
            // exponent column is fixed to infinity there.
            ExperimentId::Compactness => vec![],
            ExperimentId::Beurling => vec![1.5, 2.0, 3.0],
            ExperimentId::Toeplitz => vec![1.0, 2.0],
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

/// Weight parameters: quadratic coefficient plus an optional bounded radial
/// perturbation ψ(ρ) = (amplitude/2)·(1 − cos(2πρ/period)).
///
/// That perturbation vanishes to second order at the origin, so the weight
/// Laplacian stays bounded: |Δψ| ≤ amplitude·(2π/period)². Validation keeps
/// that excursion strictly below the flat curvature 2α so the curvature window
/// stays positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    /// Quadratic coefficient α of the weight (α/2)|z|².
    pub alpha: f64,
    /// Peak-to-trough size of the radial perturbation; 0 disables it.
    pub psi_amplitude: f64,
    /// Radial period of the perturbation.
    pub psi_period: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            alpha: 1.0,
            psi_amplitude: 0.0,
            psi_period: 2.0,
        }
    }
}

impl WeightConfig {
    /// The curvature excursion bound amplitude·(2π/period)² of ψ.
    fn curvature_excursion(&self) -> f64 {
        let omega = 2.0 * PI / self.psi_period;
        self.psi_amplitude * omega * omega
    }

    /// Build the weight described by this configuration.
    pub fn build(&self) -> Result<Weight> {
        if self.psi_amplitude == 0.0 {
            return Weight::standard(self.alpha);
        }
        let half = 0.5 * self.psi_amplitude;
        let omega = 2.0 * PI / self.psi_period;
        let psi = Arc::new(move |rho: f64| half * (1.0 - (omega * rho).cos()));
        let excursion = self.curvature_excursion();
        let m = 2.0 * self.alpha - excursion;
        let big_m = 2.0 * self.alpha + excursion;
        Weight::radial_perturbed(self.alpha, psi, m, big_m)
    }

    fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !(0.2..=4.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "weight.alpha must lie in [0.2, 4], got {}",
                self.alpha
            )));
        }
        if !self.psi_amplitude.is_finite() || !(0.0..=3.0).contains(&self.psi_amplitude) {
            return Err(Error::Config(format!(
                "weight.psi_amplitude must lie in [0, 3], got {}",
                self.psi_amplitude
            )));
        }
        if !self.psi_period.is_finite() || !(0.5..=16.0).contains(&self.psi_period) {
            return Err(Error::Config(format!(
                "weight.psi_period must lie in [0.5, 16], got {}",
                self.psi_period
            )));
        }
        if self.psi_amplitude > 0.0 && self.curvature_excursion() >= 1.8 * self.alpha {
            return Err(Error::Config(format!(
                "radial perturbation too violent: amplitude·(2π/period)² = {:.3} \
                 must stay below 1.8·alpha = {:.3} to keep the curvature window \
                 positive",
                self.curvature_excursion(),
                1.8 * self.alpha
            )));
        }
        Ok(())
    }
}

fn default_order() -> usize {
    60
}
fn default_grid_radius() -> f64 {
    8.0
}
fn default_ball_radius() -> f64 {
    0.5
}
fn default_fit_degree() -> usize {
    10
}
fn default_seed() -> u64 {
    424242
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_fft_resolution() -> usize {
    512
}
fn default_fft_half_side() -> f64 {
    8.0
}

/// A complete, serializable experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Which experiment to run.
    pub experiment: ExperimentId,
    /// Weight parameters.
    #[serde(default)]
    pub weight: WeightConfig,
    /// Truncation order N of the holomorphic sections.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Radius of the polar evaluation grid for field quantities.
    #[serde(default = "default_grid_radius")]
    pub grid_radius: f64,
    /// Ball radius r for averaged oscillation quantities.
    #[serde(default = "default_ball_radius")]
    pub ball_radius: f64,
    /// Polynomial degree d for local holomorphic fits.
    #[serde(default = "default_fit_degree")]
    pub fit_degree: usize,
    /// Exponents p to evaluate; empty means the experiment's default list.
    #[serde(default)]
    pub p_list: Vec<f64>,
    /// Symbol suite; must be non-empty.
    pub symbols: Vec<SymbolSpec>,
    /// Seed for pseudo-random symbol families that do not fix their own.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Directory receiving the CSV table and JSON summary.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Side resolution (power of two) of the square FFT grid.
    #[serde(default = "default_fft_resolution")]
    pub fft_resolution: usize,
    /// Half side length L of the FFT grid [−L, L)².
    #[serde(default = "default_fft_half_side")]
    pub fft_half_side: f64,
    /// Also write per-symbol field tables (point, value) next to the run CSV.
    #[serde(default)]
    pub export_fields: bool,
}

impl RunConfig {
    /// Parse and validate a configuration from a JSON file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    /// Parse and validate a configuration from a JSON string.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// A ready-to-run configuration for an experiment with a sensible suite.
    pub fn example(experiment: ExperimentId) -> RunConfig {
        let symbols = match experiment {
            ExperimentId::Equivalence | ExperimentId::BergerCoburn => vec![
                SymbolSpec::named("z"),
                SymbolSpec::named("zbar"),
                SymbolSpec::named("bump"),
                SymbolSpec::named("cbump"),
                SymbolSpec::conjugated("cbump"),
                SymbolSpec::named("step"),
                SymbolSpec::named("randfield"),
                SymbolSpec::conjugated("randfield"),
            ],
            ExperimentId::HsIdentity => {
                vec![SymbolSpec::named("bump"), SymbolSpec::named("cbump")]
            }
            ExperimentId::Compactness => vec![
                SymbolSpec::named("bump"),
                SymbolSpec::named("cbump"),
                SymbolSpec::named("zbar"),
                SymbolSpec::named("z"),
            ],
            ExperimentId::Beurling => vec![
                SymbolSpec::named("gauss"),
                SymbolSpec::named("cbump"),
                SymbolSpec::conjugated("cbump"),
                SymbolSpec::named("zbar_gauss"),
                SymbolSpec::named("winrand"),
            ],
            ExperimentId::Toeplitz => {
                let mut shifted = SymbolSpec::named("bump");
                shifted.params.insert("center_re".to_string(), 0.8);
                shifted.params.insert("center_im".to_string(), 0.4);
                shifted.params.insert("width".to_string(), 1.2);
                vec![SymbolSpec::named("bump"), shifted]
            }
        };
        RunConfig {
            experiment,
            weight: WeightConfig::default(),
            order: default_order(),
            grid_radius: default_grid_radius(),
            ball_radius: default_ball_radius(),
            fit_degree: default_fit_degree(),
            p_list: Vec::new(),
            symbols,
            seed: default_seed(),
            out_dir: default_out_dir(),
            fft_resolution: default_fft_resolution(),
            fft_half_side: default_fft_half_side(),
            export_fields: false,
        }
    }

    /// The exponent list actually used: the configured one, or the
    /// experiment's default when the configuration leaves it empty.
    pub fn effective_p_list(&self) -> Vec<f64> {
        if self.p_list.is_empty() {
            self.experiment.default_p_list()
        } else {
            self.p_list.clone()
        }
    }

    /// Symbol selectors with the run seed injected into pseudo-random
    /// families that do not pin their own seed.
    pub fn seeded_specs(&self) -> Vec<SymbolSpec> {
        self.symbols
            .iter()
            .map(|spec| {
                let mut spec = spec.clone();
                if matches!(spec.name.as_str(), "randfield" | "winrand")
                    && !spec.params.contains_key("seed")
                {
                    spec.params.insert("seed".to_string(), self.seed as f64);
                }
                spec
            })
            .collect()
    }

    /// Build the configured symbol suite.
    pub fn build_symbols(&self) -> Result<Vec<Symbol>> {
        self.seeded_specs().iter().map(build_symbol).collect()
    }

    /// Build the configured weight.
    pub fn build_weight(&self) -> Result<Weight> {
        self.weight.build()
    }

    /// Check every knob against its documented range.
    pub fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        if !(30..=180).contains(&self.order) {
            return Err(Error::Config(format!(
                "order must lie in [30, 180], got {}",
                self.order
            )));
        }
        if !self.grid_radius.is_finite() || !(4.0..=16.0).contains(&self.grid_radius) {
            return Err(Error::Config(format!(
                "grid_radius must lie in [4, 16], got {}",
                self.grid_radius
            )));
        }
        if !self.ball_radius.is_finite() || !(0.05..=2.0).contains(&self.ball_radius) {
            return Err(Error::Config(format!(
                "ball_radius must lie in [0.05, 2], got {}",
                self.ball_radius
            )));
        }
        if !(2..=40).contains(&self.fit_degree) {
            return Err(Error::Config(format!(
                "fit_degree must lie in [2, 40], got {}",
                self.fit_degree
            )));
        }
        for &p in &self.p_list {
            if !p.is_finite() || !(0.5..=16.0).contains(&p) {
                return Err(Error::Config(format!(
                    "exponents must be finite and lie in [0.5, 16], got {p}"
                )));
            }
        }
        if self.symbols.is_empty() {
            return Err(Error::Config(
                "symbol list is empty; list at least one symbol".to_string(),
            ));
        }
        if self.seed > (1u64 << 53) {
            return Err(Error::Config(format!(
                "seed must fit in 53 bits, got {}",
                self.seed
            )));
        }
        if !self.fft_resolution.is_power_of_two() || !(64..=4096).contains(&self.fft_resolution) {
            return Err(Error::Config(format!(
                "fft_resolution must be a power of two in [64, 4096], got {}",
                self.fft_resolution
            )));
        }
        if !self.fft_half_side.is_finite() || !(4.0..=16.0).contains(&self.fft_half_side) {
            return Err(Error::Config(format!(
                "fft_half_side must lie in [4, 16], got {}",
                self.fft_half_side
            )));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(Error::Config("out_dir must be non-empty".to_string()));
        }
        // Building the suite validates family names, parameters, and growth
        // classes now rather than mid-run.
        let built = self.build_symbols()?;
        if self.experiment == ExperimentId::Toeplitz {
            for symbol in &built {
                validate_density(symbol)?;
            }
        }
        Ok(())
    }
}

/// Require a symbol destined to serve as a measure density to be real and
/// non-negative on a probe grid.
fn validate_density(symbol: &Symbol) -> Result<()> {
    for i in 0..24 {
        for j in 0..24 {
            let z = Complex64::new(-6.0 + 0.5 * i as f64, -6.0 + 0.5 * j as f64);
            let v = symbol.eval(z);
            let scale = 1.0 + v.norm();
            if v.im.abs() > 1e-10 * scale || v.re < -1e-10 * scale {
                return Err(Error::Config(format!(
                    "symbol {} is not a non-negative real density (value {v} at \
                     z = {z}); the positive Toeplitz experiment requires one",
                    symbol.name()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": "E1-equivalence", "symbols": [{"name": "bump"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentId::Equivalence);
        assert_eq!(cfg.order, 60);
        assert_eq!(cfg.grid_radius, 8.0);
        assert_eq!(cfg.ball_radius, 0.5);
        assert_eq!(cfg.fit_degree, 10);
        assert_eq!(cfg.seed, 424242);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
        assert_eq!(cfg.fft_resolution, 512);
        assert_eq!(cfg.fft_half_side, 8.0);
        assert_eq!(cfg.effective_p_list(), vec![1.0, 2.0, 4.0]);
        assert!(!cfg.export_fields);
    }

    #[test]
    fn experiment_ids_round_trip_through_their_wire_names() {
        let ids = [
            (ExperimentId::Equivalence, "E1-equivalence"),
            (ExperimentId::BergerCoburn, "E2-berger-coburn"),
            (ExperimentId::HsIdentity, "E3-hs-identity"),
            (ExperimentId::Compactness, "E4-compactness"),
            (ExperimentId::Beurling, "E5-beurling"),
            (ExperimentId::Toeplitz, "E6-toeplitz"),
        ];
        for (id, name) in ids {
            assert_eq!(serde_json::to_value(id).unwrap(), name);
            assert_eq!(id.slug(), name);
            let back: ExperimentId =
                serde_json::from_value(serde_json::Value::String(name.to_string())).unwrap();
            assert_eq!(back, id);
        }
        assert!(serde_json::from_str::<ExperimentId>("\"E9-something\"").is_err());
    }

    #[test]
    fn unknown_fields_and_empty_suites_are_rejected() {
        let err = RunConfig::from_json(
            r#"{"experiment": "E1-equivalence", "symbols": [{"name": "bump"}], "typo": 1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");

        let err = RunConfig::from_json(r#"{"experiment": "E1-equivalence", "symbols": []}"#)
            .unwrap_err();
        assert!(err.to_string().contains("symbol list is empty"), "{err}");

        let err =
            RunConfig::from_json(r#"{"experiment": "E1-equivalence"}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn range_checks_cover_every_knob() {
        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.order = 20;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.ball_radius = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.p_list = vec![0.2];
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.fft_resolution = 500;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.weight.psi_amplitude = 3.5;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.weight.psi_amplitude = 1.0;
        cfg.weight.psi_period = 0.5;
        // amplitude·(2π/period)² = 158 ≫ 2α: curvature window would collapse.
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_injection_reaches_unpinned_random_families() {
        let mut cfg = RunConfig::example(ExperimentId::Equivalence);
        cfg.symbols = vec![SymbolSpec::named("randfield")];
        cfg.seed = 7;
        let specs = cfg.seeded_specs();
        assert_eq!(specs[0].params.get("seed"), Some(&7.0));

        // A pinned seed wins over the run seed.
        cfg.symbols[0].params.insert("seed".to_string(), 99.0);
        let specs = cfg.seeded_specs();
        assert_eq!(specs[0].params.get("seed"), Some(&99.0));

        // Deterministic: same seed, same field; different seed, different field.
        let a = cfg.build_symbols().unwrap();
        let b = cfg.build_symbols().unwrap();
        let z = Complex64::new(0.3, -1.1);
        assert_eq!(a[0].eval(z), b[0].eval(z));
        cfg.symbols[0].params.insert("seed".to_string(), 100.0);
        let c = cfg.build_symbols().unwrap();
        assert_ne!(a[0].eval(z), c[0].eval(z));
    }

    #[test]
    fn example_configs_validate_and_round_trip() {
        for id in [
            ExperimentId::Equivalence,
            ExperimentId::BergerCoburn,
            ExperimentId::HsIdentity,
            ExperimentId::Compactness,
            ExperimentId::Beurling,
            ExperimentId::Toeplitz,
        ] {
            let cfg = RunConfig::example(id);
            cfg.validate().unwrap();
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            let back = RunConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn perturbed_weight_builds_with_positive_curvature_window() {
        let cfg = WeightConfig {
            alpha: 1.0,
            psi_amplitude: 0.4,
            psi_period: 4.0,
        };
        cfg.validate().unwrap();
        let weight = cfg.build().unwrap();
        assert!(weight.m > 0.0 && weight.big_m >= weight.m);
    }

    #[test]
    fn toeplitz_densities_must_be_real_and_nonnegative() {
        let mut cfg = RunConfig::example(ExperimentId::Toeplitz);
        cfg.symbols = vec![SymbolSpec::named("cbump")];
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("density"), "{err}");

        let mut cfg = RunConfig::example(ExperimentId::Toeplitz);
        cfg.symbols = vec![SymbolSpec::named("bump")];
        cfg.validate().unwrap();
    }
}
