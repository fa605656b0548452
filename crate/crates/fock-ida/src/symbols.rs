//! Symbol catalog: the functions f that Hankel, Toeplitz, and oscillation
//! functionals act on.
//!
//! A [`Symbol`] is an evaluable function C → C tagged with a growth class
//! and optional support metadata. The catalog covers the regimes the
//! experiments probe: entire coordinates (`z`), anti-holomorphic
//! counterexamples (`zbar`), smooth compactly supported bumps (`bump`),
//! oscillating complex bumps (`cbump`), a smoothed indicator (`step`),
//! band-limited random fields (`randfield`), and Gaussian-localized
//! variants used by the singular-integral tests.
//!
//! Random fields are deterministic: the seed fully determines the field,
//! including its sup-normalization, so repeated runs reproduce identical
//! values bit for bit.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Growth regime of a symbol, from most to least localized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    /// Identically zero outside a finite radius.
    CompactlySupported,
    /// Bounded on the whole plane.
    Bounded,
    /// |f(z)| ≤ C (1 + |z|)^d for some finite degree d.
    PolynomialGrowth,
}

type EvalFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// An evaluable symbol with growth metadata.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    eval: EvalFn,
    growth: GrowthClass,
    sup_bound: Option<f64>,
    support_radius: Option<f64>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("growth", &self.growth)
            .field("sup_bound", &self.sup_bound)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl Symbol {
    /// Wrap a closure as a symbol of the given growth class.
    pub fn new(
        name: impl Into<String>,
        growth: GrowthClass,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol {
            name: name.into(),
            eval: Arc::new(eval),
            growth,
            sup_bound: None,
            support_radius: None,
        }
    }

    /// Attach a sup bound (tightens `Bounded` metadata).
    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Attach a support radius: |f| vanishes (or is numerically negligible,
    /// below ~1e−300 relative) outside |z − 0| ≤ radius.
    pub fn with_support_radius(mut self, radius: f64) -> Self {
        self.support_radius = Some(radius);
        self
    }

    /// Evaluate the symbol.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// Symbol name (used in reports and CSV rows).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declared growth class.
    pub fn growth(&self) -> GrowthClass {
        self.growth
    }

    /// Declared sup bound, if any.
    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    /// Radius outside which the symbol vanishes, if it is localized.
    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// The complex conjugate symbol, named `conj(...)`.
    pub fn conjugated(&self) -> Symbol {
        let inner = self.eval.clone();
        Symbol {
            name: format!("conj({})", self.name),
            eval: Arc::new(move |z| inner(z).conj()),
            growth: self.growth,
            sup_bound: self.sup_bound,
            support_radius: self.support_radius,
        }
    }

    /// The translated symbol f∘τ_a with τ_a(w) = w + a.
    pub fn translated(&self, a: Complex64) -> Symbol {
        let inner = self.eval.clone();
        let support_radius = self.support_radius.map(|r| r + a.norm());
        Symbol {
            name: format!("shift({},{:.3}{:+.3}i)", self.name, a.re, a.im),
            eval: Arc::new(move |z| inner(z + a)),
            growth: self.growth,
            sup_bound: self.sup_bound,
            support_radius,
        }
    }

    /// The real symbol |f|², named `abs2(...)`.
    pub fn abs_squared(&self) -> Symbol {
        let inner = self.eval.clone();
        Symbol {
            name: format!("abs2({})", self.name),
            eval: Arc::new(move |z| Complex64::new(inner(z).norm_sqr(), 0.0)),
            growth: self.growth,
            sup_bound: self.sup_bound.map(|b| b * b),
            support_radius: self.support_radius,
        }
    }

    /// Pointwise product with another symbol.
    pub fn times(&self, other: &Symbol) -> Symbol {
        let a = self.eval.clone();
        let b = other.eval.clone();
        let growth = match (self.growth, other.growth) {
            (GrowthClass::CompactlySupported, _) | (_, GrowthClass::CompactlySupported) => {
                GrowthClass::CompactlySupported
            }
            (GrowthClass::Bounded, GrowthClass::Bounded) => GrowthClass::Bounded,
            _ => GrowthClass::PolynomialGrowth,
        };
        let support = match (self.support_radius, other.support_radius) {
            (Some(r), Some(s)) => Some(r.min(s)),
            (Some(r), None) | (None, Some(r)) => Some(r),
            (None, None) => None,
        };
        Symbol {
            name: format!("{}*{}", self.name, other.name),
            eval: Arc::new(move |z| a(z) * b(z)),
            growth,
            sup_bound: self.sup_bound.zip(other.sup_bound).map(|(x, y)| x * y),
            support_radius: support,
        }
    }

    /// Check the declared growth class against sampled values on radii up
    /// to `radius`. Returns an error naming the violated class.
    pub fn validate_growth(&self, radius: f64) -> Result<()> {
        let samples = 96usize;
        let mut max_outside = 0.0f64;
        let mut max_overall = 0.0f64;
        for i in 0..samples {
            let rho = radius * (i as f64 + 0.5) / samples as f64;
            for t in 0..16 {
                let theta = 2.0 * std::f64::consts::PI * (t as f64 + 0.37) / 16.0;
                let v = self.eval(Complex64::from_polar(rho, theta)).norm();
                if !v.is_finite() {
                    return Err(Error::SymbolClass(format!(
                        "symbol {} is not finite at |z| = {rho:.2}",
                        self.name
                    )));
                }
                max_overall = max_overall.max(v);
                if let Some(r) = self.support_radius {
                    if rho > r + 1e-9 {
                        max_outside = max_outside.max(v);
                    }
                }
            }
        }
        match self.growth {
            GrowthClass::CompactlySupported => {
                let r = self.support_radius.ok_or_else(|| {
                    Error::SymbolClass(format!(
                        "symbol {} is declared compactly supported but has no \
                         support radius",
                        self.name
                    ))
                })?;
                if max_outside > 1e-12 * max_overall.max(1e-300) {
                    return Err(Error::SymbolClass(format!(
                        "symbol {} leaks {max_outside:.3e} outside its declared \
                         support radius {r}",
                        self.name
                    )));
                }
            }
            GrowthClass::Bounded => {
                if let Some(bound) = self.sup_bound {
                    if max_overall > bound * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::SymbolClass(format!(
                            "symbol {} exceeds its sup bound: {max_overall:.6} > {bound:.6}",
                            self.name
                        )));
                    }
                }
                // A bounded symbol must not keep growing past the probe
                // radius: its maximum over the ring (R, 2R] may not exceed
                // the disk maximum by more than a modest factor.
                let mut ring = 0.0f64;
                for i in 0..(samples / 2) {
                    let rho = radius * (1.0 + (i as f64 + 0.5) / (samples / 2) as f64);
                    for t in 0..16 {
                        let theta = 2.0 * std::f64::consts::PI * (t as f64 + 0.37) / 16.0;
                        ring = ring.max(self.eval(Complex64::from_polar(rho, theta)).norm());
                    }
                }
                if ring > 1.5 * max_overall + 1e-9 {
                    return Err(Error::SymbolClass(format!(
                        "symbol {} keeps growing past |z| = {radius} ({max_overall:.3} \
                         inside vs {ring:.3} on the outer ring): not bounded",
                        self.name
                    )));
                }
            }
            GrowthClass::PolynomialGrowth => {
                // |f| ≤ C (1+ρ)^d with d = 8 must hold with modest C.
                let c = (0..samples)
                    .map(|i| {
                        let rho = radius * (i as f64 + 0.5) / samples as f64;
                        let v = self.eval(Complex64::from_polar(rho, 1.1)).norm();
                        v / (1.0 + rho).powi(8)
                    })
                    .fold(0.0, f64::max);
                if c > 1e6 {
                    return Err(Error::SymbolClass(format!(
                        "symbol {} grows faster than (1+|z|)^8 (C ~ {c:.3e})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The smooth compact profile β(t) = e^{1 − 1/(1 − t)} for t < 1, else 0:
/// β(0) = 1, all derivatives vanish at t = 1.
pub fn bump_profile(t: f64) -> f64 {
    if t < 1.0 {
        (1.0 - 1.0 / (1.0 - t)).exp()
    } else {
        0.0
    }
}

/// Derivative β′(t) = −β(t)/(1 − t)² (zero outside the support).
pub fn bump_profile_derivative(t: f64) -> f64 {
    if t < 1.0 {
        let d = 1.0 - t;
        -bump_profile(t) / (d * d)
    } else {
        0.0
    }
}

/// Smooth plateau step: 0 for t ≤ 0, 1 for t ≥ 1, C^∞ monotone in between.
pub fn plateau_step(t: f64) -> f64 {
    fn q(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let a = q(t);
    let b = q(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Radial plateau window: ≡ 1 on |z| ≤ r_inner, ≡ 0 on |z| ≥ r_outer,
/// smooth and radial in between.
pub fn radial_window(r_inner: f64, r_outer: f64) -> Symbol {
    assert!(r_outer > r_inner && r_inner > 0.0);
    Symbol::new(
        format!("window({r_inner},{r_outer})"),
        GrowthClass::CompactlySupported,
        move |z| {
            let t = (r_outer - z.norm()) / (r_outer - r_inner);
            Complex64::new(plateau_step(t), 0.0)
        },
    )
    .with_sup_bound(1.0)
    .with_support_radius(r_outer)
}

/// Band-limited periodic random field with Gaussian-decaying mode energies,
/// sup-normalized to 1. Fully determined by the seed.
fn random_field(seed: u64, period: f64, modes: i32) -> Symbol {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut coeffs: Vec<(i32, i32, Complex64)> = Vec::new();
    // Box-Muller pairs in a fixed mode order keep the field reproducible.
    let gauss = move |rng: &mut ChaCha20Rng| {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        Complex64::new(r * t.cos(), r * t.sin())
    };
    for m in -modes..=modes {
        for s in -modes..=modes {
            let decay = (-((m * m + s * s) as f64) / 8.0).exp();
            coeffs.push((m, s, gauss(&mut rng) * decay));
        }
    }
    let omega = 2.0 * std::f64::consts::PI / period;
    let raw = move |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(m, s, c) in &coeffs {
            let phase = omega * (m as f64 * z.re + s as f64 * z.im);
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    };
    // Sup over one period cell on a fixed 200 × 200 grid: deterministic,
    // and dense enough for a field with ≤ `modes` oscillations per side.
    let mut sup = 0.0f64;
    for i in 0..200 {
        for j in 0..200 {
            let z = Complex64::new(
                period * (i as f64 / 200.0 - 0.5),
                period * (j as f64 / 200.0 - 0.5),
            );
            sup = sup.max(raw(z).norm());
        }
    }
    let scale = if sup > 0.0 { 1.0 / sup } else { 1.0 };
    Symbol::new(
        format!("randfield(seed={seed})"),
        GrowthClass::Bounded,
        move |z| raw(z) * scale,
    )
    .with_sup_bound(1.0 + 1e-9)
}

/// One catalog entry: a named symbol family with its growth class.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    /// Family name accepted by [`build_symbol`].
    pub name: &'static str,
    /// Growth class of the family.
    pub growth: GrowthClass,
    /// Human-readable description, including accepted parameters.
    pub description: &'static str,
}

/// The built-in symbol families.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "one",
            growth: GrowthClass::Bounded,
            description: "constant 1",
        },
        CatalogEntry {
            name: "z",
            growth: GrowthClass::PolynomialGrowth,
            description: "coordinate z (entire, unbounded)",
        },
        CatalogEntry {
            name: "zbar",
            growth: GrowthClass::PolynomialGrowth,
            description: "conjugate coordinate z̄ (anti-holomorphic, unbounded)",
        },
        CatalogEntry {
            name: "abs2",
            growth: GrowthClass::PolynomialGrowth,
            description: "|z|² (radial, quadratic growth)",
        },
        CatalogEntry {
            name: "bump",
            growth: GrowthClass::CompactlySupported,
            description: "smooth bump exp(1 - 1/(1-|x|²)) with x = (z-c)/width; \
                          params: center_re, center_im, width (default 0, 0, 1)",
        },
        CatalogEntry {
            name: "cbump",
            growth: GrowthClass::CompactlySupported,
            description: "bump modulated by e^{i omega Re z}; params: bump params \
                          plus omega (default 2)",
        },
        CatalogEntry {
            name: "step",
            growth: GrowthClass::Bounded,
            description: "smoothed indicator 1/(1 + e^{sharpness(|z| - radius)}); \
                          params: radius (default 2), sharpness (default 8)",
        },
        CatalogEntry {
            name: "randfield",
            growth: GrowthClass::Bounded,
            description: "band-limited periodic random field, sup-normalized; \
                          params: seed (default 424242), period (default 16), \
                          modes (default 4)",
        },
        CatalogEntry {
            name: "winrand",
            growth: GrowthClass::CompactlySupported,
            description: "band-limited random field times a smooth radial window \
                          (1 inside r_inner, 0 outside r_outer); params: seed, \
                          period, modes as for randfield, plus r_inner (default 5), \
                          r_outer (default 7)",
        },
        CatalogEntry {
            name: "gauss",
            growth: GrowthClass::Bounded,
            description: "Gaussian e^{-|z|²}",
        },
        CatalogEntry {
            name: "zbar_gauss",
            growth: GrowthClass::Bounded,
            description: "z̄ e^{-|z|²} (bounded, non-analytic)",
        },
    ]
}

/// Serializable symbol selector used in run configurations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    /// Catalog family name.
    pub name: String,
    /// Apply complex conjugation after building.
    #[serde(default)]
    pub conjugate: bool,
    /// Family-specific numeric parameters.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SymbolSpec {
    /// Selector for a family under its default parameters.
    pub fn named(name: &str) -> Self {
        SymbolSpec {
            name: name.to_string(),
            conjugate: false,
            params: BTreeMap::new(),
        }
    }

    /// Same family, conjugated.
    pub fn conjugated(name: &str) -> Self {
        SymbolSpec {
            name: name.to_string(),
            conjugate: true,
            params: BTreeMap::new(),
        }
    }
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_params(spec: &SymbolSpec, allowed: &[&str]) -> Result<()> {
    for key in spec.params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "symbol {} does not accept parameter {key:?} (allowed: {allowed:?})",
                spec.name
            )));
        }
    }
    Ok(())
}

/// Build a symbol from a selector, validating parameters and growth class.
pub fn build_symbol(spec: &SymbolSpec) -> Result<Symbol> {
    let base = match spec.name.as_str() {
        "one" => {
            check_params(spec, &[])?;
            Symbol::new("one", GrowthClass::Bounded, |_| Complex64::new(1.0, 0.0))
                .with_sup_bound(1.0)
        }
        "z" => {
            check_params(spec, &[])?;
            Symbol::new("z", GrowthClass::PolynomialGrowth, |z| z)
        }
        "zbar" => {
            check_params(spec, &[])?;
            Symbol::new("zbar", GrowthClass::PolynomialGrowth, |z| z.conj())
        }
        "abs2" => {
            check_params(spec, &[])?;
            Symbol::new("abs2", GrowthClass::PolynomialGrowth, |z| {
                Complex64::new(z.norm_sqr(), 0.0)
            })
        }
        "bump" | "cbump" => {
            let allowed: &[&str] = if spec.name == "bump" {
                &["center_re", "center_im", "width"]
            } else {
                &["center_re", "center_im", "width", "omega"]
            };
            check_params(spec, allowed)?;
            let center = Complex64::new(
                param(&spec.params, "center_re", 0.0),
                param(&spec.params, "center_im", 0.0),
            );
            let width = param(&spec.params, "width", 1.0);
            if !(width > 0.0) {
                return Err(Error::Config(format!(
                    "bump width must be positive, got {width}"
                )));
            }
            let omega = if spec.name == "cbump" {
                param(&spec.params, "omega", 2.0)
            } else {
                0.0
            };
            let name = if spec.name == "cbump" { "cbump" } else { "bump" };
            let radius = center.norm() + width;
            Symbol::new(name, GrowthClass::CompactlySupported, move |z| {
                let x = (z - center) / width;
                let amp = bump_profile(x.norm_sqr());
                if omega == 0.0 {
                    Complex64::new(amp, 0.0)
                } else {
                    Complex64::from_polar(amp, omega * z.re)
                }
            })
            .with_sup_bound(1.0)
            .with_support_radius(radius)
        }
        "step" => {
            check_params(spec, &["radius", "sharpness"])?;
            let radius = param(&spec.params, "radius", 2.0);
            let sharp = param(&spec.params, "sharpness", 8.0);
            if !(radius > 0.0) || !(sharp > 0.0) {
                return Err(Error::Config(format!(
                    "step wants radius > 0 and sharpness > 0, got {radius}, {sharp}"
                )));
            }
            Symbol::new("step", GrowthClass::Bounded, move |z| {
                Complex64::new(1.0 / (1.0 + (sharp * (z.norm() - radius)).exp()), 0.0)
            })
            .with_sup_bound(1.0)
        }
        "randfield" => {
            check_params(spec, &["seed", "period", "modes"])?;
            let seed = param(&spec.params, "seed", 424242.0);
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "randfield seed must be a non-negative integer, got {seed}"
                )));
            }
            let period = param(&spec.params, "period", 16.0);
            let modes = param(&spec.params, "modes", 4.0);
            if !(period > 0.0) || !(1.0..=16.0).contains(&modes) || modes.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "randfield wants period > 0 and integer modes in [1, 16], \
                     got period = {period}, modes = {modes}"
                )));
            }
            random_field(seed as u64, period, modes as i32)
        }
        "winrand" => {
            check_params(spec, &["seed", "period", "modes", "r_inner", "r_outer"])?;
            let seed = param(&spec.params, "seed", 424242.0);
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "winrand seed must be a non-negative integer, got {seed}"
                )));
            }
            let period = param(&spec.params, "period", 16.0);
            let modes = param(&spec.params, "modes", 4.0);
            if !(period > 0.0) || !(1.0..=16.0).contains(&modes) || modes.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "winrand wants period > 0 and integer modes in [1, 16], \
                     got period = {period}, modes = {modes}"
                )));
            }
            let r_inner = param(&spec.params, "r_inner", 5.0);
            let r_outer = param(&spec.params, "r_outer", 7.0);
            if !(r_inner > 0.0) || !(r_outer > r_inner) {
                return Err(Error::Config(format!(
                    "winrand wants 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
                )));
            }
            let field = random_field(seed as u64, period, modes as i32);
            let mut sym = field.times(&radial_window(r_inner, r_outer));
            sym.name = "winrand".to_string();
            sym
        }
        "gauss" => {
            check_params(spec, &[])?;
            Symbol::new("gauss", GrowthClass::Bounded, |z| {
                Complex64::new((-z.norm_sqr()).exp(), 0.0)
            })
            .with_sup_bound(1.0)
        }
        "zbar_gauss" => {
            check_params(spec, &[])?;
            Symbol::new("zbar_gauss", GrowthClass::Bounded, |z| {
                z.conj() * (-z.norm_sqr()).exp()
            })
            .with_sup_bound((0.5f64).sqrt() * (-0.5f64).exp() + 1e-12)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown symbol family {other:?}; see the catalog for valid names"
            )));
        }
    };
    let symbol = if spec.conjugate {
        base.conjugated()
    } else {
        base
    };
    symbol.validate_growth(8.0)?;
    Ok(symbol)
}
