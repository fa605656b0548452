//! Quadrature rules and grids for plane and disk integrals.
//!
//! All two-dimensional integration in the toolkit happens on polar grids:
//! composite Gauss-Legendre nodes in the radius tensored with uniform
//! (trapezoid) nodes in the angle. For radial weights this combination is
//! spectrally accurate — the trapezoid rule integrates the angular Fourier
//! modes e^{imθ} exactly for 0 < |m| < n_θ, so products of basis monomials
//! couple only through exact radial moments.
//!
//! Two domain shapes are supported: the full plane truncated to |z| ≤ R
//! (several radial panels) and a ball B(a, r) (a single panel). Weights are
//! genuine area weights, so `Σ wᵢ f(zᵢ)` approximates `∫ f dv`.

use num_complex::Complex64;

use crate::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [−1, 1].
///
/// Nodes are computed by Newton iteration on the Legendre recurrence from
/// the Chebyshev-based initial guess; for the orders used here (≤ 64) the
/// iteration converges to machine precision in a handful of steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess: Chebyshev-like angle, accurate to O(n^{-2}).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            // P'_n(x) = n (x P_n − P_{n−1}) / (x² − 1).
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A one-dimensional composite Gauss-Legendre rule on [a, b].
#[derive(Debug, Clone)]
pub struct RadialRule {
    /// Quadrature nodes, ascending.
    pub nodes: Vec<f64>,
    /// Matching weights (no Jacobian factors beyond the interval map).
    pub weights: Vec<f64>,
}

impl RadialRule {
    /// Composite rule: `panels` equal subintervals of [a, b], each carrying
    /// an n-point Gauss-Legendre rule.
    pub fn composite(a: f64, b: f64, panels: usize, points_per_panel: usize) -> Self {
        assert!(b > a && panels >= 1);
        let (gx, gw) = gauss_legendre(points_per_panel);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points_per_panel);
        let mut weights = Vec::with_capacity(panels * points_per_panel);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        RadialRule { nodes, weights }
    }

    /// Integrate a scalar function over the rule's interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Shape of the region a polar grid covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridDomain {
    /// The plane truncated to the disk |z| ≤ radius (centered at the origin).
    PlaneDisk {
        /// Truncation radius.
        radius: f64,
    },
    /// The ball B(center, radius).
    Ball {
        /// Ball center.
        center: Complex64,
        /// Ball radius.
        radius: f64,
    },
}

impl GridDomain {
    /// Center of the domain.
    pub fn center(&self) -> Complex64 {
        match *self {
            GridDomain::PlaneDisk { .. } => Complex64::new(0.0, 0.0),
            GridDomain::Ball { center, .. } => center,
        }
    }

    /// Radius of the domain.
    pub fn radius(&self) -> f64 {
        match *self {
            GridDomain::PlaneDisk { radius } => radius,
            GridDomain::Ball { radius, .. } => radius,
        }
    }
}

/// Polar quadrature grid: radial Gauss-Legendre × uniform angular nodes.
///
/// Node layout is radius-major: node (i, t) sits at index `i * n_theta + t`
/// and at the point `center + ρᵢ e^{iθ_t}` with θ_t = 2πt/n_θ. The `weights`
/// are area weights ρᵢ wᵢ Δθ, strictly positive.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// Domain descriptor.
    pub domain: GridDomain,
    /// Radial nodes ρᵢ, ascending, all > 0.
    pub radii: Vec<f64>,
    /// Radial quadrature weights wᵢ (without the ρ Jacobian).
    pub radial_weights: Vec<f64>,
    /// Number of angular nodes.
    pub n_theta: usize,
    /// Flattened node positions, radius-major.
    pub nodes: Vec<Complex64>,
    /// Flattened area weights aligned with `nodes`.
    pub weights: Vec<f64>,
}

impl PolarGrid {
    fn from_rule(domain: GridDomain, rule: RadialRule, n_theta: usize) -> Self {
        let center = domain.center();
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(rule.nodes.len() * n_theta);
        let mut weights = Vec::with_capacity(rule.nodes.len() * n_theta);
        for (&rho, &w) in rule.nodes.iter().zip(&rule.weights) {
            let area_w = rho * w * dtheta;
            for t in 0..n_theta {
                let theta = dtheta * t as f64;
                nodes.push(center + Complex64::from_polar(rho, theta));
                weights.push(area_w);
            }
        }
        PolarGrid {
            domain,
            radii: rule.nodes,
            radial_weights: rule.weights,
            n_theta,
            nodes,
            weights,
        }
    }

    /// Plane grid |z| ≤ radius with unit-width radial panels.
    ///
    /// `points_per_panel` Gauss-Legendre nodes per panel; the panel count is
    /// ⌈radius⌉ so each panel spans roughly one unit.
    pub fn plane(radius: f64, points_per_panel: usize, n_theta: usize) -> Result<Self> {
        if radius <= 0.0 || points_per_panel == 0 || n_theta == 0 {
            return Err(Error::InvalidParameter(format!(
                "plane grid wants radius > 0, nodes > 0 (got R = {radius}, \
                 {points_per_panel} per panel, n_theta = {n_theta})"
            )));
        }
        let panels = radius.ceil().max(1.0) as usize;
        let rule = RadialRule::composite(0.0, radius, panels, points_per_panel);
        Ok(Self::from_rule(
            GridDomain::PlaneDisk { radius },
            rule,
            n_theta,
        ))
    }

    /// Ball grid over B(center, radius) with a single radial panel.
    pub fn ball(center: Complex64, radius: f64, n_radial: usize, n_theta: usize) -> Result<Self> {
        if radius <= 0.0 || n_radial == 0 || n_theta == 0 {
            return Err(Error::InvalidParameter(format!(
                "ball grid wants radius > 0, nodes > 0 (got r = {radius}, \
                 {n_radial} radial, {n_theta} angular)"
            )));
        }
        let rule = RadialRule::composite(0.0, radius, 1, n_radial);
        Ok(Self::from_rule(
            GridDomain::Ball { center, radius },
            rule,
            n_theta,
        ))
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Whether the grid is empty (it never is for valid parameters).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Angular node θ_t.
    pub fn theta(&self, t: usize) -> f64 {
        2.0 * std::f64::consts::PI * t as f64 / self.n_theta as f64
    }

    /// Area of the covered domain, πR².
    pub fn domain_area(&self) -> f64 {
        let r = self.domain.radius();
        std::f64::consts::PI * r * r
    }

    /// Integrate a complex-valued function over the domain.
    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(z);
        }
        acc
    }

    /// Integrate pre-sampled complex values (aligned with `nodes`).
    pub fn integrate_values(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for (&v, &w) in values.iter().zip(&self.weights) {
            acc += w * v;
        }
        acc
    }

    /// Integrate pre-sampled real values (aligned with `nodes`).
    pub fn integrate_real(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(&v, &w)| w * v).sum()
    }

    /// Fraction of `Σ w |v|` carried by nodes in the outermost radial band
    /// [R − band, R]; used for insufficient-grid diagnostics.
    pub fn outer_band_fraction(&self, values: &[f64], band: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let r_edge = self.domain.radius() - band;
        let center = self.domain.center();
        let mut total = 0.0;
        let mut outer = 0.0;
        for ((&z, &w), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            let contrib = w * v.abs();
            total += contrib;
            if (z - center).norm() >= r_edge {
                outer += contrib;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

/// Tensor Gauss-Legendre grid on an axis-aligned square [a, b]², used for
/// cube-based functionals.
#[derive(Debug, Clone)]
pub struct SquareGrid {
    /// Flattened node positions (x-major).
    pub nodes: Vec<Complex64>,
    /// Flattened area weights.
    pub weights: Vec<f64>,
}

impl SquareGrid {
    /// Build an n × n tensor rule on [a, b]².
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        let (gx, gw) = gauss_legendre(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let xs: Vec<f64> = gx.iter().map(|x| mid + half * x).collect();
        let ws: Vec<f64> = gw.iter().map(|w| half * w).collect();
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (x, wx) in xs.iter().zip(&ws) {
            for (y, wy) in xs.iter().zip(&ws) {
                nodes.push(Complex64::new(*x, *y));
                weights.push(wx * wy);
            }
        }
        SquareGrid { nodes, weights }
    }

    /// Integrate a complex-valued function over the square.
    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(z);
        }
        acc
    }
}
