//! The weighted space F²(φ): weights, orthonormal bases, kernels, norms.
//!
//! Weights are radial, φ(z) = (α/2)|z|² or (α/2)|z|² + ψ(|z|) with ψ twice
//! differentiable and bounded, so the monomials z^k stay orthogonal and the
//! basis is e_k = z^k/√ν_k with ν_k = ‖z^k‖²_{L²(e^{−2φ})}. All evaluation
//! is done through the *weighted* basis values ẽ_k(z) = e_k(z) e^{−φ(z)},
//! which are uniformly bounded in k and z; this keeps every kernel, norm,
//! and matrix assembly free of overflow for truncation orders up to 200.
//!
//! The reproducing kernel of the truncated space is
//! K_N(z,w) = Σ_{k<N} e_k(z) conj(e_k(w)); for the standard weight it
//! converges to the closed form (α/π) e^{α z w̄}. The normalized kernel
//! k_z = K(·,z)/√K(z,z) is produced as a coefficient vector in the basis.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::quad::{PolarGrid, RadialRule};
use crate::symbols::Symbol;
use crate::{Error, Result};

/// Radial profile ψ(ρ) of a perturbed weight.
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The weight kind: standard quadratic or radially perturbed quadratic.
#[derive(Clone)]
pub enum WeightKind {
    /// φ(z) = (α/2)|z|², α > 0.
    Standard {
        /// Quadratic coefficient α.
        alpha: f64,
    },
    /// φ(z) = (α/2)|z|² + ψ(|z|) with ψ bounded and C².
    RadialPerturbed {
        /// Quadratic coefficient α.
        alpha: f64,
        /// Bounded radial perturbation ψ.
        psi: RadialFn,
    },
}

/// A weight function φ together with its curvature window [m, M]
/// (bounds on Δφ) and a closed-form-kernel marker.
#[derive(Clone)]
pub struct Weight {
    /// The functional form of φ.
    pub kind: WeightKind,
    /// Lower curvature bound, m ≤ Δφ; must be positive.
    pub m: f64,
    /// Upper curvature bound, Δφ ≤ M.
    pub big_m: f64,
    /// Whether the reproducing kernel has a closed form ((α/π) e^{α z w̄}).
    pub has_closed_form_kernel: bool,
}

impl std::fmt::Debug for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            WeightKind::Standard { alpha } => write!(f, "Weight::standard(alpha = {alpha})"),
            WeightKind::RadialPerturbed { alpha, .. } => {
                write!(f, "Weight::radial_perturbed(alpha = {alpha}, psi = <fn>)")
            }
        }
    }
}

impl Weight {
    /// The standard weight φ = (α/2)|z|²; curvature is exactly Δφ = 2α.
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight parameter alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Weight {
            kind: WeightKind::Standard { alpha },
            m: 2.0 * alpha,
            big_m: 2.0 * alpha,
            has_closed_form_kernel: true,
        })
    }

    /// A radially perturbed weight φ = (α/2)|z|² + ψ(|z|).
    ///
    /// The caller supplies the curvature window [m, M]; the constructor
    /// validates m > 0 and checks m ≤ Δφ ≤ M by central finite differences
    /// at sample radii in [0.25, 6] (the origin is excluded because ψ'(0) ≠ 0
    /// makes Δφ singular there for otherwise harmless perturbations).
    pub fn radial_perturbed(alpha: f64, psi: RadialFn, m: f64, big_m: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight parameter alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(m > 0.0) || !(big_m >= m) {
            return Err(Error::InvalidParameter(format!(
                "curvature window must satisfy 0 < m <= M, got m = {m}, M = {big_m}"
            )));
        }
        let weight = Weight {
            kind: WeightKind::RadialPerturbed { alpha, psi },
            m,
            big_m,
            has_closed_form_kernel: false,
        };
        let h = 1e-4;
        let slack = 1e-3;
        for i in 0..48 {
            let rho = 0.25 + 5.75 * i as f64 / 47.0;
            let z = Complex64::new(rho, 0.0);
            let lap = weight.laplacian_fd(z, h);
            if lap < m - slack || lap > big_m + slack {
                return Err(Error::InvalidParameter(format!(
                    "curvature bound violated at |z| = {rho:.3}: laplacian {lap:.6} \
                     outside [{m}, {big_m}]"
                )));
            }
        }
        Ok(weight)
    }

    /// Quadratic coefficient α of the weight.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            WeightKind::Standard { alpha } => alpha,
            WeightKind::RadialPerturbed { alpha, .. } => alpha,
        }
    }

    /// φ as a function of the radius.
    pub fn phi_radial(&self, rho: f64) -> f64 {
        match &self.kind {
            WeightKind::Standard { alpha } => 0.5 * alpha * rho * rho,
            WeightKind::RadialPerturbed { alpha, psi } => 0.5 * alpha * rho * rho + psi(rho),
        }
    }

    /// φ(z).
    pub fn phi(&self, z: Complex64) -> f64 {
        self.phi_radial(z.norm())
    }

    /// Central five-point finite-difference Laplacian of φ.
    pub fn laplacian_fd(&self, z: Complex64, h: f64) -> f64 {
        let e = Complex64::new(h, 0.0);
        let ie = Complex64::new(0.0, h);
        (self.phi(z + e) + self.phi(z - e) + self.phi(z + ie) + self.phi(z - ie)
            - 4.0 * self.phi(z))
            / (h * h)
    }

    /// Closed-form reproducing kernel, when one exists:
    /// K(z,w) = (α/π) e^{α z w̄} for the standard weight.
    pub fn closed_kernel(&self, z: Complex64, w: Complex64) -> Option<Complex64> {
        match self.kind {
            WeightKind::Standard { alpha } => {
                Some((alpha * z * w.conj()).exp() * (alpha / std::f64::consts::PI))
            }
            WeightKind::RadialPerturbed { .. } => None,
        }
    }
}

/// Extra basis functions kept beyond the section order; projections in the
/// operator layer run to this extended order so that finite-section products
/// of low-degree symbols are computed without corner defects.
pub const PROJECTION_MARGIN: usize = 16;

/// Largest supported extended order (f64 headroom for norms and kernels).
pub const MAX_EXTENDED_ORDER: usize = 200;

/// Truncated orthonormal basis of F²(φ) with evaluation and Gram metadata.
///
/// Holds the section order `n`, an extended order `n + margin` used for
/// buffered projections, the log-normalizations ln ν_k, and the shared
/// assembly grid every basis inner product is computed on.
pub struct Basis {
    weight: Weight,
    n: usize,
    n_ext: usize,
    log_norms: Vec<f64>,
    gram_residual: f64,
    radial_rule: RadialRule,
    n_theta: usize,
    assembly_radius: f64,
    grid: OnceLock<Arc<PolarGrid>>,
    table: OnceLock<Arc<WeightedTable>>,
}

/// Sampled weighted basis values on a grid, split into real and imaginary
/// parts so that products reduce to real matrix multiplication.
pub struct WeightedTable {
    /// Re ẽ_k(zᵢ), nodes × extended order.
    pub re: DMatrix<f64>,
    /// Im ẽ_k(zᵢ), nodes × extended order.
    pub im: DMatrix<f64>,
    /// e^{−φ(zᵢ)} per node.
    pub half_weight: Vec<f64>,
}

impl std::fmt::Debug for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Basis")
            .field("weight", &self.weight)
            .field("n", &self.n)
            .field("n_ext", &self.n_ext)
            .field("gram_residual", &self.gram_residual)
            .field("assembly_radius", &self.assembly_radius)
            .finish()
    }
}

/// Points per unit-width radial panel of the assembly rule.
const ASSEMBLY_POINTS_PER_PANEL: usize = 24;

impl Basis {
    /// Build the order-`n` basis with the default evaluation floor (suited
    /// to probe radii up to 8).
    pub fn build(weight: &Weight, n: usize) -> Result<Self> {
        Self::build_for_radius(weight, n, 8.0)
    }

    /// Build the order-`n` basis whose assembly grid also serves kernel
    /// probes out to `probe_radius` (the grid extends ~8 units beyond it to
    /// capture the Gaussian mass around every probe).
    pub fn build_for_radius(weight: &Weight, n: usize, probe_radius: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(format!(
                "basis order must be at least 1, got {n}"
            )));
        }
        let n_ext = n + PROJECTION_MARGIN;
        if n_ext > MAX_EXTENDED_ORDER {
            return Err(Error::InvalidParameter(format!(
                "basis order {n} (+{PROJECTION_MARGIN} margin) exceeds the supported \
                 maximum {MAX_EXTENDED_ORDER}"
            )));
        }
        if !(probe_radius > 0.0) || probe_radius > 40.0 {
            return Err(Error::InvalidParameter(format!(
                "probe radius must lie in (0, 40], got {probe_radius}"
            )));
        }
        let alpha = weight.alpha();

        // Radius such that every radial moment ∫ ρ^{2κ+1} e^{−αρ²} dρ used in
        // assembly (monomial products up to degree 2(n_ext−1), plus a few
        // orders of symbol growth) is captured to ~1e−16 relative:
        // in u = αρ² units the integrand is u^κ e^{−u} with κ ≈ k_count/2.
        let k_count = 2 * (n_ext - 1) + 8;
        let kappa = k_count as f64 / 2.0 + 1.0;
        let u_max = kappa + 12.0 * (kappa + 1.0).sqrt() + 30.0;
        let mut radius = (u_max / alpha).sqrt();
        if let WeightKind::RadialPerturbed { psi, .. } = &weight.kind {
            // A bounded ψ rescales the integrand by at most e^{2 sup|ψ|};
            // one extra unit of radius more than absorbs that for |ψ| ≤ 3.
            let sup = (0..64)
                .map(|i| psi(radius * i as f64 / 63.0).abs())
                .fold(0.0, f64::max);
            if sup > 3.0 {
                return Err(Error::UnsupportedWeight(format!(
                    "radial perturbation too large: sup|psi| ~ {sup:.3} > 3"
                )));
            }
            radius += 1.0;
        }
        radius = radius.max(probe_radius + 8.0);

        let panels = radius.ceil() as usize;
        let radial_rule = RadialRule::composite(0.0, radius, panels, ASSEMBLY_POINTS_PER_PANEL);
        let n_theta = 256usize.max((2 * n_ext + 16).next_power_of_two());

        let log_norms;
        let gram_residual;
        match &weight.kind {
            WeightKind::Standard { alpha } => {
                // Closed form ν_k = π k!/α^{k+1}, accumulated in log space.
                let mut norms = Vec::with_capacity(n_ext);
                let mut acc = std::f64::consts::PI.ln() - alpha.ln();
                norms.push(acc);
                for k in 1..n_ext {
                    acc += (k as f64 / alpha).ln();
                    norms.push(acc);
                }
                // The rule must reproduce the closed form: this residual is
                // the numerical Gram deviation from identity (off-diagonal
                // entries vanish exactly by angular orthogonality).
                let numeric = radial_log_moments(weight, &radial_rule, n);
                gram_residual = norms
                    .iter()
                    .take(n)
                    .zip(&numeric)
                    .map(|(a, b)| ((b - a).exp() - 1.0).abs())
                    .fold(0.0, f64::max);
                log_norms = norms;
            }
            WeightKind::RadialPerturbed { .. } => {
                // Norms by radial quadrature; the residual compares the
                // assembly rule against a doubled refinement.
                log_norms = radial_log_moments(weight, &radial_rule, n_ext);
                let refined_rule =
                    RadialRule::composite(0.0, radius, panels, 2 * ASSEMBLY_POINTS_PER_PANEL);
                let refined = radial_log_moments(weight, &refined_rule, n_ext);
                gram_residual = log_norms
                    .iter()
                    .zip(&refined)
                    .map(|(a, b)| ((b - a).exp() - 1.0).abs())
                    .fold(0.0, f64::max);
            }
        }
        if !gram_residual.is_finite() || gram_residual > 1e-6 {
            return Err(Error::QuadratureDiagnostic {
                residual: gram_residual,
                context: format!("orthonormalization at order {n} (radius {radius:.2})"),
            });
        }

        Ok(Basis {
            weight: weight.clone(),
            n,
            n_ext,
            log_norms,
            gram_residual,
            radial_rule,
            n_theta,
            assembly_radius: radius,
            grid: OnceLock::new(),
            table: OnceLock::new(),
        })
    }

    /// The weight the basis orthonormalizes against.
    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// Section order N: the space is span{e_0, …, e_{N−1}}.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Extended order used for buffered projections.
    pub fn extended_order(&self) -> usize {
        self.n_ext
    }

    /// Max deviation of the numerically integrated Gram matrix from the
    /// identity (diagonal only; off-diagonals vanish by angular exactness).
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// ln ν_k for k < extended order.
    pub fn log_norm(&self, k: usize) -> f64 {
        self.log_norms[k]
    }

    /// Radius of the assembly grid.
    pub fn assembly_radius(&self) -> f64 {
        self.assembly_radius
    }

    /// Angular resolution of the assembly grid.
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Radial rule underlying the assembly grid.
    pub fn radial_rule(&self) -> &RadialRule {
        &self.radial_rule
    }

    /// The shared polar grid every basis inner product is assembled on.
    pub fn assembly_grid(&self) -> Arc<PolarGrid> {
        self.grid
            .get_or_init(|| {
                Arc::new(PolarGrid::from_parts(
                    self.assembly_radius,
                    self.radial_rule.clone(),
                    self.n_theta,
                ))
            })
            .clone()
    }

    /// Weighted basis values sampled on the assembly grid (built lazily,
    /// cached; ~100 MB at the default orders, reused by every experiment).
    pub fn weighted_table(&self) -> Arc<WeightedTable> {
        self.table
            .get_or_init(|| {
                let grid = self.assembly_grid();
                Arc::new(self.sample_table(&grid))
            })
            .clone()
    }

    /// Sample the weighted basis values ẽ_k on an arbitrary grid.
    pub fn sample_table(&self, grid: &PolarGrid) -> WeightedTable {
        let nodes = grid.len();
        let mut re = DMatrix::zeros(nodes, self.n_ext);
        let mut im = DMatrix::zeros(nodes, self.n_ext);
        let mut half_weight = vec![0.0; nodes];
        for (i, &z) in grid.nodes.iter().enumerate() {
            half_weight[i] = (-self.weight.phi(z)).exp();
            let rho = z.norm();
            if rho == 0.0 {
                re[(i, 0)] = (-0.5 * self.log_norms[0] - self.weight.phi_radial(0.0)).exp();
                continue;
            }
            let log_rho = rho.ln();
            let phi = self.weight.phi_radial(rho);
            let theta = z.arg();
            for k in 0..self.n_ext {
                let amp = (k as f64 * log_rho - 0.5 * self.log_norms[k] - phi).exp();
                let (s, c) = (k as f64 * theta).sin_cos();
                re[(i, k)] = amp * c;
                im[(i, k)] = amp * s;
            }
        }
        WeightedTable {
            re,
            im,
            half_weight,
        }
    }

    /// Weighted basis value ẽ_k(z) = e_k(z) e^{−φ(z)}; bounded in k and z.
    pub fn weighted_eval(&self, k: usize, z: Complex64) -> Complex64 {
        let rho = z.norm();
        if rho == 0.0 {
            return if k == 0 {
                Complex64::new(
                    (-0.5 * self.log_norms[0] - self.weight.phi_radial(0.0)).exp(),
                    0.0,
                )
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let amp =
            (k as f64 * rho.ln() - 0.5 * self.log_norms[k] - self.weight.phi_radial(rho)).exp();
        Complex64::from_polar(amp, k as f64 * z.arg())
    }

    /// Raw basis value e_k(z) = z^k/√ν_k.
    ///
    /// Grows like e^{φ(z)}; safe in f64 for |z| ≲ 25 at the supported orders.
    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        let rho = z.norm();
        if rho == 0.0 {
            return if k == 0 {
                Complex64::new((-0.5 * self.log_norms[0]).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let amp = (k as f64 * rho.ln() - 0.5 * self.log_norms[k]).exp();
        Complex64::from_polar(amp, k as f64 * z.arg())
    }

    /// Weighted truncated kernel K_N(z,w) e^{−φ(z)−φ(w)} (stable everywhere).
    pub fn kernel_weighted(&self, z: Complex64, w: Complex64) -> Complex64 {
        let rz = z.norm();
        let rw = w.norm();
        let phi_sum = self.weight.phi_radial(rz) + self.weight.phi_radial(rw);
        if rz == 0.0 || rw == 0.0 {
            // Only the constant term survives.
            return Complex64::new((-self.log_norms[0] - phi_sum).exp(), 0.0);
        }
        let log_r = rz.ln() + rw.ln();
        let dtheta = z.arg() - w.arg();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.n {
            let amp = (k as f64 * log_r - self.log_norms[k] - phi_sum).exp();
            acc += Complex64::from_polar(amp, k as f64 * dtheta);
        }
        acc
    }

    /// Truncated kernel K_N(z,w) = Σ_{k<N} e_k(z) conj(e_k(w)).
    ///
    /// Conjugate-symmetric by construction. Overflows (returns ±inf) once
    /// φ(z)+φ(w) ≳ 700; use [`Basis::kernel_weighted`] in that regime.
    pub fn kernel_eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.kernel_weighted(z, w) * (self.weight.phi(z) + self.weight.phi(w)).exp()
    }

    /// Weighted diagonal K_N(z,z) e^{−2φ(z)} = Σ |ẽ_k(z)|².
    pub fn kernel_diag_weighted(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        if rho == 0.0 {
            return (-self.log_norms[0] - 2.0 * self.weight.phi_radial(0.0)).exp();
        }
        let log_r = rho.ln();
        let phi = self.weight.phi_radial(rho);
        (0..self.n)
            .map(|k| (2.0 * (k as f64 * log_r - 0.5 * self.log_norms[k] - phi)).exp())
            .sum()
    }

    /// Coefficients of the normalized kernel k_z = K(·,z)/√K(z,z) in the
    /// basis: c_k = conj(e_k(z))/√K_N(z,z). The vector has unit norm.
    pub fn normalized_kernel(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let diag = self.kernel_diag_weighted(z);
        if !(diag > 1e-280) {
            return Err(Error::TruncationTooSmall {
                value: diag,
                radius: z.norm(),
            });
        }
        let scale = 1.0 / diag.sqrt();
        let coeffs = (0..self.n)
            .map(|k| self.weighted_eval(k, z).conj() * scale)
            .collect();
        Ok(coeffs)
    }
}

/// ln of the radial moments ν_k = 2π ∫ ρ^{2k+1} e^{−2φ(ρ)} dρ for k < count,
/// evaluated in log space so that large orders neither overflow nor lose
/// relative precision.
fn radial_log_moments(weight: &Weight, rule: &RadialRule, count: usize) -> Vec<f64> {
    let log_integrand: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&rho, &w)| (rho.ln(), w.ln() - 2.0 * weight.phi_radial(rho)))
        .collect();
    (0..count)
        .map(|k| {
            let deg = (2 * k + 1) as f64;
            let max_log = log_integrand
                .iter()
                .map(|&(lr, lw)| deg * lr + lw)
                .fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = log_integrand
                .iter()
                .map(|&(lr, lw)| (deg * lr + lw - max_log).exp())
                .sum();
            (2.0 * std::f64::consts::PI).ln() + max_log + sum.ln()
        })
        .collect()
}

impl PolarGrid {
    /// Plane grid assembled from an existing radial rule (used by the basis
    /// so the grid and the normalization quadrature are the same rule).
    pub(crate) fn from_parts(radius: f64, rule: RadialRule, n_theta: usize) -> Self {
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(rule.nodes.len() * n_theta);
        let mut weights = Vec::with_capacity(rule.nodes.len() * n_theta);
        for (&rho, &w) in rule.nodes.iter().zip(&rule.weights) {
            let area_w = rho * w * dtheta;
            for t in 0..n_theta {
                nodes.push(Complex64::from_polar(rho, dtheta * t as f64));
                weights.push(area_w);
            }
        }
        PolarGrid {
            domain: crate::quad::GridDomain::PlaneDisk { radius },
            radii: rule.nodes,
            radial_weights: rule.weights,
            n_theta,
            nodes,
            weights,
        }
    }
}

/// Weighted L^p norm of sampled values: (∫ |f|^p e^{−pφ} dv)^{1/p}, or the
/// sup of |f e^{−φ}| over the nodes for p = ∞.
///
/// For finite p the outermost unit band of the grid must carry less than
/// `tail_tol` of the integral, otherwise the grid is declared insufficient.
pub fn weighted_lp_norm_values(
    values: &[Complex64],
    p: f64,
    weight: &Weight,
    grid: &PolarGrid,
    tail_tol: f64,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "value count {} does not match grid size {}",
            values.len(),
            grid.len()
        )));
    }
    let damped: Vec<f64> = values
        .iter()
        .zip(&grid.nodes)
        .map(|(&v, &z)| v.norm() * (-weight.phi(z)).exp())
        .collect();
    if p.is_infinite() {
        return Ok(damped.iter().fold(0.0, |a, &b| a.max(b)));
    }
    let powered: Vec<f64> = damped.iter().map(|&v| v.powf(p)).collect();
    let fraction = grid.outer_band_fraction(&powered, 1.0);
    if fraction > tail_tol {
        return Err(Error::InsufficientGrid {
            fraction,
            tolerance: tail_tol,
        });
    }
    Ok(grid.integrate_real(&powered).max(0.0).powf(1.0 / p))
}

/// Default tail tolerance for [`weighted_lp_norm`].
pub const NORM_TAIL_TOL: f64 = 1e-8;

/// Weighted L^p norm of a symbol (samples it on the grid first).
pub fn weighted_lp_norm(f: &Symbol, p: f64, weight: &Weight, grid: &PolarGrid) -> Result<f64> {
    let values: Vec<Complex64> = grid.nodes.iter().map(|&z| f.eval(z)).collect();
    weighted_lp_norm_values(&values, p, weight, grid, NORM_TAIL_TOL)
}

/// Output of the kernel decay/lower-bound diagnostic.
#[derive(Debug, Clone)]
pub struct DecayDiagnostic {
    /// Decay rate θ the envelope was fitted with.
    pub theta: f64,
    /// Smallest C with |K(z,w)| ≤ C e^{φ(z)+φ(w)} e^{−θ|z−w|} on the samples.
    pub c_est: f64,
    /// Smallest value of |K(z,w)| e^{−φ(z)−φ(w)} over close pairs
    /// (|z−w| ≤ r₀); `None` when no pair is that close.
    pub lower_const: Option<f64>,
    /// Number of close pairs that entered `lower_const`.
    pub close_pairs: usize,
}

/// Fit the kernel decay envelope and the close-pair lower bound on a sample
/// set. θ is an input (the bound holds for any θ on a bounded sample set,
/// with C depending on it); r₀ is the closeness radius for the lower bound.
pub fn kernel_decay_diagnostic(
    basis: &Basis,
    pairs: &[(Complex64, Complex64)],
    theta: f64,
    r0: f64,
) -> DecayDiagnostic {
    let mut c_est = 0.0f64;
    let mut lower: Option<f64> = None;
    let mut close = 0usize;
    for &(z, w) in pairs {
        let q = basis.kernel_weighted(z, w).norm();
        let sep = (z - w).norm();
        c_est = c_est.max(q * (theta * sep).exp());
        if sep <= r0 {
            close += 1;
            lower = Some(lower.map_or(q, |l: f64| l.min(q)));
        }
    }
    DecayDiagnostic {
        theta,
        c_est,
        lower_const: lower,
        close_pairs: close,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn standard_basis(n: usize) -> Basis {
        Basis::build(&Weight::standard(1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn standard_basis_matches_gaussian_moment_closed_form() {
        // ν_k = π k! for α = 1: e_0 = 1/√π, e_1 = z/√π, e_2 = z²/√(2π).
        let basis = standard_basis(3);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(
            basis.eval(0, Complex64::new(0.7, -0.3)).re,
            1.0 / pi.sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            basis.eval(1, Complex64::new(1.0, 0.0)).re,
            1.0 / pi.sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            basis.eval(2, Complex64::new(2.0, 0.0)).re,
            4.0 / (2.0 * pi).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn order_one_basis_is_a_normalized_constant() {
        let weight = Weight::standard(0.7).unwrap();
        let basis = Basis::build(&weight, 1).unwrap();
        // c² ∫ e^{−2φ} dv = 1 with c = e_0.
        let c = basis.eval(0, Complex64::new(3.0, 1.0)).re;
        let mass = basis
            .assembly_grid()
            .integrate(|z| Complex64::new((-2.0 * weight.phi(z)).exp(), 0.0))
            .re;
        assert_relative_eq!(c * c * mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn standard_gram_residual_is_tiny_at_order_60() {
        let basis = standard_basis(60);
        assert!(
            basis.gram_residual() <= 1e-10,
            "gram residual {:.3e}",
            basis.gram_residual()
        );
    }

    #[test]
    fn perturbed_weight_orthonormalizes_with_small_residual() {
        let psi: RadialFn = Arc::new(|rho: f64| 0.1 * rho.sin());
        let weight = Weight::radial_perturbed(1.0, psi, 1.5, 3.0).unwrap();
        let basis = Basis::build(&weight, 10).unwrap();
        assert!(
            basis.gram_residual() <= 1e-8,
            "gram residual {:.3e}",
            basis.gram_residual()
        );
        // The numerically normalized e_0 must have unit norm on the grid.
        let grid = basis.assembly_grid();
        let norm = grid
            .integrate(|z| {
                let v = basis.weighted_eval(0, z);
                Complex64::new(v.norm_sqr(), 0.0)
            })
            .re
            .sqrt();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn curvature_window_is_validated() {
        let psi: RadialFn = Arc::new(|rho: f64| 0.1 * rho.sin());
        // Wrong window: Δφ ≈ 2 ± 0.5 cannot fit inside [3, 4].
        assert!(Weight::radial_perturbed(1.0, psi, 3.0, 4.0).is_err());
    }

    #[test]
    fn kernel_closed_form_on_probe_pairs() {
        let basis = standard_basis(60);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let mut sample = || {
            // Uniform in the disk |z| ≤ 2.
            let r = 2.0 * rng.gen::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            Complex64::from_polar(r, t)
        };
        for _ in 0..100 {
            let (z, w) = (sample(), sample());
            let exact = basis.weight().closed_kernel(z, w).unwrap();
            let numeric = basis.kernel_eval(z, w);
            assert!(
                (numeric - exact).norm() <= 1e-8,
                "kernel mismatch at z = {z}, w = {w}: {:.3e}",
                (numeric - exact).norm()
            );
            // Conjugate symmetry.
            let flipped = basis.kernel_eval(w, z).conj();
            assert!((numeric - flipped).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_special_values() {
        let basis = standard_basis(40);
        let pi = std::f64::consts::PI;
        // K(z, 0) = 1/π for every z.
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.3, -0.4),
            Complex64::new(-2.0, 2.0),
        ] {
            let k = basis.kernel_eval(z, Complex64::new(0.0, 0.0));
            assert_relative_eq!(k.re, 1.0 / pi, epsilon = 1e-12);
            assert_abs_diff_eq!(k.im, 0.0, epsilon = 1e-14);
        }
        // K(1, 1) = e/π.
        let k11 = basis.kernel_eval(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(k11.re, 1.0_f64.exp() / pi, epsilon = 1e-12);
    }

    #[test]
    fn normalized_kernel_is_unit_and_explicit_at_origin() {
        let basis = standard_basis(60);
        let c0 = basis.normalized_kernel(Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(c0[0].re, 1.0, epsilon = 1e-14);
        for c in &c0[1..] {
            assert!(c.norm() < 1e-15);
        }
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 2.0),
        ] {
            let c = basis.normalized_kernel(z).unwrap();
            let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12, "norm(k_{z}) = {norm}");
            // Coefficient identity c_k = conj(e_k(z))/√K_N(z,z).
            let diag = basis.kernel_eval(z, z).re;
            for k in [0usize, 1, 5] {
                let expect = basis.eval(k, z).conj() / diag.sqrt();
                assert!((c[k] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weighted_norm_oracles() {
        let weight = Weight::standard(1.0).unwrap();
        let basis = Basis::build(&weight, 8).unwrap();
        let grid = basis.assembly_grid();
        let pi = std::f64::consts::PI;

        let one = vec![Complex64::new(1.0, 0.0); grid.len()];
        let norm = weighted_lp_norm_values(&one, 2.0, &weight, &grid, NORM_TAIL_TOL).unwrap();
        assert_relative_eq!(norm, pi.sqrt(), epsilon = 1e-12);

        let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
        for p in [0.5, 1.0, 2.0, f64::INFINITY] {
            let norm = weighted_lp_norm_values(&zero, p, &weight, &grid, NORM_TAIL_TOL).unwrap();
            assert_eq!(norm, 0.0);
        }

        let linear: Vec<Complex64> = grid.nodes.clone();
        let norm = weighted_lp_norm_values(&linear, 2.0, &weight, &grid, NORM_TAIL_TOL).unwrap();
        assert_relative_eq!(norm, pi.sqrt(), epsilon = 1e-12);

        // Sup norm of f ≡ 1 is max e^{−φ} ≈ 1, attained near the innermost node.
        let sup = weighted_lp_norm_values(&one, f64::INFINITY, &weight, &grid, NORM_TAIL_TOL)
            .unwrap();
        assert_relative_eq!(sup, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn insufficient_grid_is_detected() {
        let weight = Weight::standard(1.0).unwrap();
        let grid = PolarGrid::plane(3.0, 16, 32).unwrap();
        // e^{+|z|²/2} cancels the weight: the integrand of ‖·‖² is flat and
        // the outer band carries a visible fraction.
        let values: Vec<Complex64> = grid
            .nodes
            .iter()
            .map(|z| Complex64::new((0.5 * z.norm_sqr()).exp(), 0.0))
            .collect();
        let err = weighted_lp_norm_values(&values, 2.0, &weight, &grid, 1e-8).unwrap_err();
        assert!(matches!(err, Error::InsufficientGrid { .. }));
    }

    #[test]
    fn decay_diagnostic_matches_gaussian_envelope() {
        let basis = standard_basis(60);
        let pi = std::f64::consts::PI;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut pairs = Vec::new();
        for _ in 0..200 {
            let z = Complex64::new(3.0 * rng.gen::<f64>() - 1.5, 3.0 * rng.gen::<f64>() - 1.5);
            let w = Complex64::new(3.0 * rng.gen::<f64>() - 1.5, 3.0 * rng.gen::<f64>() - 1.5);
            pairs.push((z, w));
        }
        // Coincident pairs: ratio is exactly 1/π.
        let z = Complex64::new(1.2, 0.4);
        pairs.push((z, z));
        let diag = kernel_decay_diagnostic(&basis, &pairs, 1.0, 0.5);
        // |K(z,w)| e^{−φ(z)−φ(w)} = π^{−1} e^{−|z−w|²/2} ≤ 1/π, so C is finite
        // and the lower bound over |z−w| ≤ 1/2 is ≥ e^{−1/8}/π.
        assert!(diag.close_pairs > 0);
        assert!(diag.lower_const.unwrap() >= (-0.125f64).exp() / pi - 1e-12);
        assert!(diag.c_est >= 1.0 / pi && diag.c_est < 10.0);
    }

    #[test]
    fn reproducing_property_for_bounded_coefficient_polynomials() {
        // ⟨p, K_N(·,z)⟩ = p(z) for polynomials of moderate degree with
        // unit-disk coefficients, |z| ≤ 2.
        let basis = standard_basis(60);
        let grid = basis.assembly_grid();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for _ in 0..5 {
            let deg = rng.gen_range(0..=12);
            let coeffs: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0))
                .collect();
            let poly = |w: Complex64| {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * w + c;
                }
                acc
            };
            let z = Complex64::new(1.1, -0.9);
            // ⟨p, K_z⟩ = Σ_k e_k(z) ⟨p, e_k⟩ with grid inner products.
            let mut value = Complex64::new(0.0, 0.0);
            for k in 0..basis.order() {
                let mut ip = Complex64::new(0.0, 0.0);
                for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
                    let half = (-basis.weight().phi(w)).exp();
                    ip += wt * poly(w) * half * basis.weighted_eval(k, w).conj();
                }
                value += basis.eval(k, z) * ip;
            }
            assert!(
                (value - poly(z)).norm() <= 1e-8,
                "reproducing defect {:.3e} at degree {deg}",
                (value - poly(z)).norm()
            );
        }
    }
}
