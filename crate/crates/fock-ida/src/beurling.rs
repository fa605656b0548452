//! The Ahlfors-Beurling transform and Wirtinger derivatives as Fourier
//! multipliers on a periodized square grid.
//!
//! Fields live on [−L, L)² with a power-of-two resolution per side. In
//! frequency space with ζ = k_x + i k_y the operators are exact
//! multipliers: ∂ ↔ (i/2) ζ̄, ∂̄ ↔ (i/2) ζ, and the transform 𝔗 that
//! intertwines them (𝔗 ∂̄f = ∂f) is ζ̄/ζ with the zero mode annihilated.
//! 𝔗 is therefore an L² isometry on mean-zero fields. Every entry point
//! first checks that the field has died out at the boundary ring — a grid
//! that still carries mass there would alias through the periodization,
//! so it is rejected rather than silently wrapped.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::{Error, Result};

/// Uniform periodized grid on [−L, L)², n × n points, n a power of two.
#[derive(Debug, Clone)]
pub struct PlaneGrid {
    /// Half side length L.
    pub half_side: f64,
    /// Points per side.
    pub n: usize,
}

impl PlaneGrid {
    /// Create a grid; n must be a power of two ≥ 8 to keep the FFT fast
    /// and the boundary ring meaningful.
    pub fn new(half_side: f64, n: usize) -> Result<Self> {
        if !(half_side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid half side must be positive, got {half_side}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be a power of two ≥ 8, got {n}"
            )));
        }
        Ok(PlaneGrid { half_side, n })
    }

    /// Grid step h = 2L/n.
    pub fn step(&self) -> f64 {
        2.0 * self.half_side / self.n as f64
    }

    /// Number of samples n².
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    /// Whether the grid is empty (never true for a constructed grid).
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The point at column ix, row iy (x fastest in memory).
    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        let h = self.step();
        Complex64::new(
            -self.half_side + ix as f64 * h,
            -self.half_side + iy as f64 * h,
        )
    }

    /// Sample a function over the grid, x fastest.
    pub fn sample(&self, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.n {
            for ix in 0..self.n {
                out.push(f(self.point(ix, iy)));
            }
        }
        out
    }

    /// Signed angular frequency of bin m: (π/L)·m with m wrapped to
    /// (−n/2, n/2].
    pub fn freq(&self, m: usize) -> f64 {
        let half = self.n / 2;
        let signed = if m <= half {
            m as i64
        } else {
            m as i64 - self.n as i64
        };
        std::f64::consts::PI / self.half_side * signed as f64
    }

    /// ζ = k_x + i k_y for bin (ix, iy).
    pub fn zeta(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.freq(ix), self.freq(iy))
    }

    /// Largest |value| on the outermost ring of samples.
    pub fn boundary_magnitude(&self, values: &[Complex64]) -> f64 {
        let n = self.n;
        let mut max = 0.0f64;
        for ix in 0..n {
            max = max.max(values[ix].norm());
            max = max.max(values[(n - 1) * n + ix].norm());
        }
        for iy in 0..n {
            max = max.max(values[iy * n].norm());
            max = max.max(values[iy * n + n - 1].norm());
        }
        max
    }

    /// Reject fields that still carry mass at the boundary ring: spectral
    /// differentiation would alias them through the periodization.
    pub fn check_periodization(&self, values: &[Complex64]) -> Result<()> {
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let boundary = self.boundary_magnitude(values);
        if scale > 0.0 && boundary >= 1e-12 * scale {
            return Err(Error::Periodization { boundary, scale });
        }
        Ok(())
    }

    /// Riemann L^p norm over the square: (Σ |v|^p h²)^{1/p}, sup for p = ∞.
    pub fn lp_norm(&self, values: &[Complex64], p: f64) -> f64 {
        if p.is_infinite() {
            return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let cell = self.step() * self.step();
        values
            .iter()
            .map(|v| v.norm().powf(p) * cell)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// In-place 2D FFT, rows then columns. Forward is unnormalized; inverse
/// divides by n² so the pair round-trips.
pub fn fft2(grid: &PlaneGrid, values: &mut [Complex64], forward: bool) {
    let n = grid.n;
    assert_eq!(values.len(), n * n, "field size does not match the grid");
    let mut planner = FftPlanner::new();
    let fft = if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    };
    // Rows (x contiguous).
    for row in values.chunks_exact_mut(n) {
        fft.process(row);
    }
    // Columns via a strided scratch.
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = values[iy * n + ix];
        }
        fft.process(&mut col);
        for iy in 0..n {
            values[iy * n + ix] = col[iy];
        }
    }
    if !forward {
        let scale = 1.0 / (n * n) as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

fn apply_multiplier(
    grid: &PlaneGrid,
    values: &[Complex64],
    multiplier: impl Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let n = grid.n;
    let mut hat = values.to_vec();
    fft2(grid, &mut hat, true);
    for iy in 0..n {
        for ix in 0..n {
            hat[iy * n + ix] *= multiplier(grid.zeta(ix, iy));
        }
    }
    fft2(grid, &mut hat, false);
    hat
}

/// Wirtinger derivatives (∂f, ∂̄f) of a periodization-safe field.
pub fn wirtinger(
    grid: &PlaneGrid,
    values: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    grid.check_periodization(values)?;
    let half_i = Complex64::new(0.0, 0.5);
    let d = apply_multiplier(grid, values, |zeta| half_i * zeta.conj());
    let dbar = apply_multiplier(grid, values, |zeta| half_i * zeta);
    Ok((d, dbar))
}

/// The Ahlfors-Beurling transform: Fourier multiplier ζ̄/ζ (zero mode
/// annihilated). Satisfies 𝔗(∂̄f) = ∂f and preserves L² on mean-zero
/// fields.
pub fn ahlfors_beurling(grid: &PlaneGrid, values: &[Complex64]) -> Result<Vec<Complex64>> {
    grid.check_periodization(values)?;
    Ok(apply_multiplier(grid, values, |zeta| {
        if zeta.norm_sqr() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            zeta.conj() / zeta
        }
    }))
}

/// L^p comparison of the two Wirtinger derivatives of one field.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeComparison {
    /// Exponent p.
    pub p: f64,
    /// ‖∂f‖_p.
    pub d_norm: f64,
    /// ‖∂̄f‖_p.
    pub dbar_norm: f64,
    /// ‖∂f‖_p / ‖∂̄f‖_p when defined.
    pub ratio: Option<f64>,
    /// True when both derivatives vanish (constant field).
    pub degenerate: bool,
}

/// Compare ‖∂f‖_p against ‖∂̄f‖_p. Both vanishing is a degenerate but
/// valid outcome; ∂̄f vanishing alone leaves the ratio undefined and is
/// an error (on periodic fields it cannot happen with nonzero ∂f).
pub fn derivative_lp_check(
    grid: &PlaneGrid,
    values: &[Complex64],
    p: f64,
) -> Result<DerivativeComparison> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative comparison exponent must be positive, got {p}"
        )));
    }
    let (d, dbar) = wirtinger(grid, values)?;
    let d_norm = grid.lp_norm(&d, p);
    let dbar_norm = grid.lp_norm(&dbar, p);
    let floor = 1e-12 * (1.0 + grid.lp_norm(values, p) / grid.half_side);
    if dbar_norm <= floor {
        if d_norm <= floor {
            return Ok(DerivativeComparison {
                p,
                d_norm,
                dbar_norm,
                ratio: None,
                degenerate: true,
            });
        }
        return Err(Error::UndefinedInput(format!(
            "∂̄f vanishes (‖∂̄f‖_{p} = {dbar_norm:.3e}) while ‖∂f‖_{p} = {d_norm:.3e}: \
             the derivative ratio is undefined"
        )));
    }
    Ok(DerivativeComparison {
        p,
        d_norm,
        dbar_norm,
        ratio: Some(d_norm / dbar_norm),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{build_symbol, radial_window, SymbolSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rel_l2(grid: &PlaneGrid, a: &[Complex64], b: &[Complex64]) -> f64 {
        let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let denom = grid.lp_norm(b, 2.0);
        if denom == 0.0 {
            grid.lp_norm(&diff, 2.0)
        } else {
            grid.lp_norm(&diff, 2.0) / denom
        }
    }

    #[test]
    fn gaussian_derivatives_and_intertwining() {
        let grid = PlaneGrid::new(8.0, 256).unwrap();
        let f = grid.sample(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0));
        let (d, dbar) = wirtinger(&grid, &f).unwrap();
        let d_exact =
            grid.sample(|z| -z.conj() * (-z.norm_sqr()).exp());
        let dbar_exact = grid.sample(|z| -z * (-z.norm_sqr()).exp());
        assert!(rel_l2(&grid, &d, &d_exact) < 1e-9);
        assert!(rel_l2(&grid, &dbar, &dbar_exact) < 1e-9);
        // 𝔗(∂̄f) = ∂f.
        let t = ahlfors_beurling(&grid, &dbar).unwrap();
        assert!(rel_l2(&grid, &t, &d) < 1e-9);
    }

    #[test]
    fn conjugate_gaussian_derivative_closed_forms() {
        // f = z̄ e^{−|z|²}: ∂̄f = (1 − |z|²) e^{−|z|²}, ∂f = −z̄² e^{−|z|²}.
        let grid = PlaneGrid::new(8.0, 256).unwrap();
        let f = grid.sample(|z| z.conj() * (-z.norm_sqr()).exp());
        let (d, dbar) = wirtinger(&grid, &f).unwrap();
        let dbar_exact =
            grid.sample(|z| Complex64::new((1.0 - z.norm_sqr()) * (-z.norm_sqr()).exp(), 0.0));
        let d_exact = grid.sample(|z| -z.conj() * z.conj() * (-z.norm_sqr()).exp());
        assert!(rel_l2(&grid, &dbar, &dbar_exact) < 1e-9);
        assert!(rel_l2(&grid, &d, &d_exact) < 1e-9);
    }

    #[test]
    fn transform_is_isometric_on_mean_zero_fields() {
        // The multiplier is unimodular away from the annihilated zero mode,
        // so ‖𝔗f‖₂² = ‖f‖₂² − (DC energy): exact isometry on the mean-zero
        // component, checked via Parseval rather than by subtracting the
        // mean (which would break the decay the transform requires).
        let grid = PlaneGrid::new(8.0, 128).unwrap();
        let window = radial_window(5.0, 7.0);
        let noise = build_symbol(&SymbolSpec::named("randfield")).unwrap();
        let f = grid.sample(|z| noise.eval(z) * window.eval(z));
        let mean: Complex64 = f.iter().sum::<Complex64>() / f.len() as f64;
        let dc_norm = mean.norm() * 2.0 * grid.half_side;
        let full = grid.lp_norm(&f, 2.0);
        let mean_zero_part = (full * full - dc_norm * dc_norm).max(0.0).sqrt();
        let t = ahlfors_beurling(&grid, &f).unwrap();
        assert_relative_eq!(grid.lp_norm(&t, 2.0), mean_zero_part, epsilon = 1e-10);
    }

    #[test]
    fn transform_is_linear() {
        let grid = PlaneGrid::new(6.0, 64).unwrap();
        let f = grid.sample(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0));
        let g = grid.sample(|z| z * (-1.3 * z.norm_sqr()).exp());
        let a = Complex64::new(0.7, -0.4);
        let b = Complex64::new(-1.1, 0.2);
        let combo: Vec<Complex64> = f
            .iter()
            .zip(&g)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let tf = ahlfors_beurling(&grid, &f).unwrap();
        let tg = ahlfors_beurling(&grid, &g).unwrap();
        let tc = ahlfors_beurling(&grid, &combo).unwrap();
        let recombined: Vec<Complex64> =
            tf.iter().zip(&tg).map(|(x, y)| a * x + b * y).collect();
        assert!(rel_l2(&grid, &tc, &recombined) < 1e-12);
    }

    #[test]
    fn non_decaying_fields_are_rejected() {
        let grid = PlaneGrid::new(4.0, 64).unwrap();
        let f = grid.sample(|z| z);
        match wirtinger(&grid, &f) {
            Err(Error::Periodization { boundary, scale }) => {
                assert!(boundary > 0.0 && scale > 0.0);
            }
            other => panic!("expected a periodization error, got {other:?}"),
        }
    }

    #[test]
    fn derivative_ratio_is_unity_for_the_gaussian() {
        // |∂f| = |z̄| e^{−|z|²} and |∂̄f| = |z| e^{−|z|²} agree pointwise.
        let grid = PlaneGrid::new(8.0, 256).unwrap();
        let f = grid.sample(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0));
        for &p in &[1.5, 2.0, 3.0] {
            let cmp = derivative_lp_check(&grid, &f, p).unwrap();
            assert!(!cmp.degenerate);
            assert_relative_eq!(cmp.ratio.unwrap(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_zero_field_is_degenerate() {
        let grid = PlaneGrid::new(4.0, 32).unwrap();
        let f = vec![Complex64::new(0.0, 0.0); grid.len()];
        let cmp = derivative_lp_check(&grid, &f, 2.0).unwrap();
        assert!(cmp.degenerate);
        assert!(cmp.ratio.is_none());
        assert_abs_diff_eq!(cmp.d_norm, 0.0, epsilon = 1e-15);
    }
}
