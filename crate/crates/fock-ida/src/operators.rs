//! Finite sections of Toeplitz and Hankel operators on the weighted space.
//!
//! Matrix entries are quadrature sums over the assembly grid, organized
//! ring by ring: on each radius the angular sum against e^{i(k−j)θ} is one
//! bin of the ring's FFT, so a full rows × cols section costs one FFT per
//! ring plus a rank-1-style accumulation. All loops run in a fixed order,
//! so entries are reproducible bit for bit.
//!
//! Hankel quantities never form (I−P) directly: the Gram identity
//! ⟨H_f e_k, H_f e_j⟩ = T_{|f|²}[j,k] − (R^H R)[j,k], with R the rectangular
//! section ⟨f e_k, e_m⟩ over the extended range m < n_ext, keeps the
//! projection buffered well past the section so edge columns are exact.
//! Evaluating ‖H_f k_z‖ contracts the same grid sums against the kernel
//! coefficient vector; the unit tests verify that this equals the literal
//! node-by-node grid computation to machine precision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::ida::Measure;
use crate::space::Basis;
use crate::symbols::{GrowthClass, Symbol};
use crate::{Error, Result};

/// Rectangular Toeplitz section ⟨f e_k, e_j⟩ for j < rows, k < cols,
/// assembled by per-ring FFT over the basis' cached grid.
pub fn toeplitz_rect(
    basis: &Basis,
    f: &Symbol,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<Complex64>> {
    let n_ext = basis.extended_order();
    if rows == 0 || cols == 0 || rows > n_ext || cols > n_ext {
        return Err(Error::InvalidParameter(format!(
            "Toeplitz section {rows}×{cols} outside the assembled range 1..={n_ext}"
        )));
    }
    let grid = basis.assembly_grid();
    let n_theta = grid.n_theta;
    let dtheta = std::f64::consts::TAU / n_theta as f64;
    let max_order = rows.max(cols);

    // Weighted radial profiles exp(k ln ρ − ½ ln ν_k − φ(ρ)): the radial
    // part of ẽ_k, bounded for every k and ρ.
    let n_rings = grid.radii.len();
    let mut prof = DMatrix::<f64>::zeros(n_rings, max_order);
    for i in 0..n_rings {
        let rho = grid.radii[i];
        let log_rho = rho.ln();
        let phi = basis.weight().phi_radial(rho);
        for k in 0..max_order {
            prof[(i, k)] = (k as f64 * log_rho - 0.5 * basis.log_norm(k) - phi).exp();
        }
    }

    let fft = FftPlanner::new().plan_fft_forward(n_theta);
    let mut ring = vec![Complex64::new(0.0, 0.0); n_theta];
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for i in 0..n_rings {
        let rho = grid.radii[i];
        for (t, slot) in ring.iter_mut().enumerate() {
            *slot = f.eval(Complex64::from_polar(rho, t as f64 * dtheta));
        }
        fft.process(&mut ring);
        let ring_w = grid.radial_weights[i] * rho * dtheta;
        for k in 0..cols {
            let pk = prof[(i, k)] * ring_w;
            if pk == 0.0 {
                continue;
            }
            for j in 0..rows {
                // Σ_t f e^{i(k−j)θ_t} is the forward-FFT bin (n_θ−(k−j)) mod n_θ.
                let freq = (n_theta as i64 - (k as i64 - j as i64))
                    .rem_euclid(n_theta as i64) as usize;
                m[(j, k)] += ring[freq] * (pk * prof[(i, j)]);
            }
        }
    }
    Ok(m)
}

/// Square Toeplitz section T_f of order n.
pub fn toeplitz_matrix(basis: &Basis, f: &Symbol, n: usize) -> Result<DMatrix<Complex64>> {
    toeplitz_rect(basis, f, n, n)
}

/// Toeplitz section of a positive measure: ⟨T_μ e_k, e_j⟩ = ∫ ẽ_k ẽ̄_j dμ.
pub fn toeplitz_measure(basis: &Basis, mu: &Measure, n: usize) -> Result<DMatrix<Complex64>> {
    match mu {
        Measure::Lebesgue => {
            let one = Symbol::new("one", GrowthClass::Bounded, |_| Complex64::new(1.0, 0.0));
            toeplitz_matrix(basis, &one, n)
        }
        Measure::Density(g) => toeplitz_matrix(basis, g, n),
        Measure::PointMasses(masses) => {
            if n == 0 || n > basis.extended_order() {
                return Err(Error::InvalidParameter(format!(
                    "Toeplitz section order {n} outside the assembled range"
                )));
            }
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for &(a, mass) in masses {
                if mass < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "point mass {mass} at {a} is negative"
                    )));
                }
                let e: Vec<Complex64> = (0..n).map(|k| basis.weighted_eval(k, a)).collect();
                for j in 0..n {
                    for k in 0..n {
                        m[(j, k)] += e[k] * e[j].conj() * mass;
                    }
                }
            }
            Ok(m)
        }
    }
}

/// Coefficients ⟨g, e_m⟩ for m < n_ext of a function given by raw samples
/// on the assembly grid (analysis half of the projection P).
pub fn analyze_samples(basis: &Basis, samples: &[Complex64]) -> Result<DVector<Complex64>> {
    let grid = basis.assembly_grid();
    if samples.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "sample vector length {} does not match the assembly grid ({})",
            samples.len(),
            grid.len()
        )));
    }
    let table = basis.weighted_table();
    let n_ext = basis.extended_order();
    // Pre-weight the samples: w_i · g(z_i) · e^{−φ(z_i)}.
    let weighted: Vec<Complex64> = samples
        .iter()
        .zip(grid.weights.iter().zip(&table.half_weight))
        .map(|(&g, (&w, &h))| g * (w * h))
        .collect();
    let mut coeffs = DVector::<Complex64>::zeros(n_ext);
    for m in 0..n_ext {
        let re_col = table.re.column(m);
        let im_col = table.im.column(m);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &g) in weighted.iter().enumerate() {
            // conj(ẽ_m) = re − i·im.
            acc += g * Complex64::new(re_col[i], -im_col[i]);
        }
        coeffs[m] = acc;
    }
    Ok(coeffs)
}

/// Projection P f expressed in the basis: samples f on the assembly grid
/// and analyzes. Coefficients run over the extended range m < n_ext.
pub fn bergman_project(basis: &Basis, f: &Symbol) -> Result<DVector<Complex64>> {
    let grid = basis.assembly_grid();
    let samples: Vec<Complex64> = grid.nodes.iter().map(|&z| f.eval(z)).collect();
    analyze_samples(basis, &samples)
}

/// Evaluate Σ_m c_m e_m at z (synthesis). Safe for |z| within the
/// assembly radius; grows like e^{φ(z)}.
pub fn reconstruct(basis: &Basis, coeffs: &DVector<Complex64>, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, c) in coeffs.iter().enumerate() {
        acc += c * basis.eval(m, z);
    }
    acc
}

/// Hermitian Gram matrix ⟨H_f e_k, H_f e_j⟩ of the Hankel section:
/// T_{|f|²} − R^H R with the projection range buffered to n_ext.
pub fn hankel_gram(basis: &Basis, f: &Symbol, n: usize) -> Result<DMatrix<Complex64>> {
    let s = toeplitz_matrix(basis, &f.abs_squared(), n)?;
    let r = toeplitz_rect(basis, f, basis.extended_order(), n)?;
    let mut g = s - r.adjoint() * r;
    // Enforce exact Hermitian symmetry against quadrature roundoff.
    let gh = g.adjoint();
    g = (g + gh) * Complex64::new(0.5, 0.0);
    Ok(g)
}

/// The Berezin transform of a matrix section at z: ⟨M k_z, k_z⟩ with the
/// kernel coefficient vector truncated to the section size.
pub fn berezin(basis: &Basis, m: &DMatrix<Complex64>, z: Complex64) -> Result<Complex64> {
    if m.nrows() != m.ncols() || m.nrows() > basis.order() {
        return Err(Error::InvalidParameter(format!(
            "Berezin transform wants a square section within order {}, got {}×{}",
            basis.order(),
            m.nrows(),
            m.ncols()
        )));
    }
    let c = basis.normalized_kernel(z)?;
    let n = m.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let mut col = Complex64::new(0.0, 0.0);
        for j in 0..n {
            col += c[j].conj() * m[(j, k)];
        }
        acc += col * c[k];
    }
    Ok(acc)
}

/// Evaluator for z ↦ ‖H_f k_z‖: the grid estimator
/// ‖f k_z‖² − Σ_{m<n_ext} |⟨f k_z, e_m⟩|², contracted against the kernel
/// coefficients through the pre-assembled quadrature sums.
pub struct HankelKernelMap {
    gram: DMatrix<Complex64>,
}

impl HankelKernelMap {
    /// Assemble the quadrature sums for a symbol once.
    pub fn new(basis: &Basis, f: &Symbol) -> Result<Self> {
        Ok(HankelKernelMap {
            gram: hankel_gram(basis, f, basis.order())?,
        })
    }

    /// Wrap an already-assembled Hankel Gram section.
    pub fn from_gram(gram: DMatrix<Complex64>) -> Self {
        HankelKernelMap { gram }
    }

    /// The underlying Gram section ⟨H e_k, H e_j⟩.
    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// ‖H_f k_z‖ at one probe.
    pub fn norm_at(&self, basis: &Basis, z: Complex64) -> Result<f64> {
        let c = basis.normalized_kernel(z)?;
        let n = self.gram.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let col: Complex64 = c
                .iter()
                .take(n)
                .enumerate()
                .map(|(j, cj)| cj.conj() * self.gram[(j, k)])
                .sum();
            acc += col * c[k];
        }
        Ok(acc.re.max(0.0).sqrt())
    }

    /// ‖H_f k_z‖ over many probes, in probe order, in parallel.
    pub fn norms(&self, basis: &Basis, probes: &[Complex64]) -> Result<Vec<f64>> {
        probes
            .par_iter()
            .map(|&z| self.norm_at(basis, z))
            .collect()
    }
}

/// ‖H_f k_z‖ at a single probe (assembles the sums for just this call;
/// use [`HankelKernelMap`] for fields).
pub fn hankel_apply_to_kernel(basis: &Basis, f: &Symbol, z: Complex64) -> Result<f64> {
    HankelKernelMap::new(basis, f)?.norm_at(basis, z)
}

/// The Berezin-type transform of a measure,
/// μ̃(z) = ∫ |k_z|² e^{−2φ} dμ, evaluated through the measure's Toeplitz
/// section: μ̃(z) = ⟨T_μ k_z, k_z⟩.
pub struct MeasureTransform {
    section: DMatrix<Complex64>,
}

impl MeasureTransform {
    /// Assemble T_μ at the section order once.
    pub fn new(basis: &Basis, mu: &Measure) -> Result<Self> {
        Ok(MeasureTransform {
            section: toeplitz_measure(basis, mu, basis.order())?,
        })
    }

    /// μ̃ at one probe.
    pub fn at(&self, basis: &Basis, z: Complex64) -> Result<f64> {
        let c = basis.normalized_kernel(z)?;
        let n = self.section.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let col: Complex64 = c
                .iter()
                .take(n)
                .enumerate()
                .map(|(j, cj)| cj.conj() * self.section[(j, k)])
                .sum();
            acc += col * c[k];
        }
        Ok(acc.re.max(0.0))
    }

    /// μ̃ over many probes, in probe order, in parallel.
    pub fn values(&self, basis: &Basis, probes: &[Complex64]) -> Result<Vec<f64>> {
        probes.par_iter().map(|&z| self.at(basis, z)).collect()
    }

    /// The underlying Toeplitz section.
    pub fn section(&self) -> &DMatrix<Complex64> {
        &self.section
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Basis, Weight};
    use crate::symbols::{build_symbol, SymbolSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::sync::OnceLock;

    fn basis60() -> &'static Basis {
        static CELL: OnceLock<Basis> = OnceLock::new();
        CELL.get_or_init(|| Basis::build(&Weight::standard(1.0).unwrap(), 60).unwrap())
    }

    fn sym(name: &str) -> Symbol {
        build_symbol(&SymbolSpec::named(name)).unwrap()
    }

    #[test]
    fn annihilation_section_is_weighted_shift() {
        // ⟨z̄ e_k, e_j⟩ = δ_{k,j+1} √((j+1)/α).
        let basis = basis60();
        let t = toeplitz_matrix(basis, &sym("zbar"), 40).unwrap();
        for j in 0..40 {
            for k in 0..40 {
                let expect = if k == j + 1 { ((j + 1) as f64).sqrt() } else { 0.0 };
                assert_abs_diff_eq!(t[(j, k)].re, expect, epsilon = 1e-8);
                assert_abs_diff_eq!(t[(j, k)].im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn creation_section_at_general_alpha() {
        let basis = Basis::build(&Weight::standard(0.7).unwrap(), 24).unwrap();
        let t = toeplitz_matrix(&basis, &sym("z"), 20).unwrap();
        for k in 0..19 {
            let expect = ((k + 1) as f64 / 0.7).sqrt();
            assert_relative_eq!(t[(k + 1, k)].re, expect, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(t[(0, 5)].norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn radial_symbol_section_is_diagonal() {
        // ⟨|z|² e_k, e_k⟩ = ν_{k+1}/ν_k = (k+1)/α.
        let basis = basis60();
        let t = toeplitz_matrix(basis, &sym("abs2"), 50).unwrap();
        for j in 0..50 {
            for k in 0..50 {
                let expect = if j == k { (k + 1) as f64 } else { 0.0 };
                assert_abs_diff_eq!(t[(j, k)].re, expect, epsilon = 1e-8);
                assert_abs_diff_eq!(t[(j, k)].im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hankel_gram_of_conjugate_coordinate_is_identity() {
        let basis = basis60();
        let g = hankel_gram(basis, &sym("zbar"), 60).unwrap();
        for j in 0..60 {
            for k in 0..60 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(j, k)].re, expect, epsilon = 1e-8);
                assert_abs_diff_eq!(g[(j, k)].im, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn hankel_gram_of_holomorphic_coordinate_vanishes() {
        // z e_k stays inside the buffered projection range, so H_z ≡ 0
        // on the section — including the last columns.
        let basis = basis60();
        let g = hankel_gram(basis, &sym("z"), 60).unwrap();
        let max = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max < 1e-10, "corner defect {max:.3e}");
    }

    #[test]
    fn berezin_of_radial_section_shifts_by_one() {
        // The Berezin transform of T_{|z|²} is |z|² + 1 at α = 1.
        let basis = basis60();
        let t = toeplitz_matrix(basis, &sym("abs2"), 60).unwrap();
        for &z in &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, -1.8),
        ] {
            let b = berezin(basis, &t, z).unwrap();
            assert_abs_diff_eq!(b.re, z.norm_sqr() + 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(b.im, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn analysis_recovers_basis_vectors() {
        let basis = basis60();
        let grid = basis.assembly_grid();
        for &k in &[0usize, 5, 40] {
            let samples: Vec<Complex64> = grid.nodes.iter().map(|&z| basis.eval(k, z)).collect();
            let coeffs = analyze_samples(basis, &samples).unwrap();
            for (m, c) in coeffs.iter().enumerate() {
                let expect = if m == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c.re, expect, epsilon = 1e-10);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let basis = basis60();
        let p1 = bergman_project(basis, &sym("bump")).unwrap();
        // Synthesize P f on the grid and analyze again.
        let grid = basis.assembly_grid();
        let table = basis.weighted_table();
        let samples: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in p1.iter().enumerate() {
                    acc += c * Complex64::new(table.re[(i, m)], table.im[(i, m)]);
                }
                acc / table.half_weight[i]
            })
            .collect();
        let p2 = analyze_samples(basis, &samples).unwrap();
        let defect = (&p1 - &p2).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-10, "P² − P defect {defect:.3e}");
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // literal node-index sums are the oracle
    fn kernel_route_matches_literal_grid_sums() {
        // The contracted estimator ‖H_f k_z‖² must equal the node-by-node
        // computation ‖f k_z‖² − Σ_m |⟨f k_z, e_m⟩|² exactly.
        let basis = basis60();
        let f = sym("cbump");
        let map = HankelKernelMap::new(basis, &f).unwrap();
        let grid = basis.assembly_grid();
        let table = basis.weighted_table();
        for &z in &[Complex64::new(0.5, 0.3), Complex64::new(1.2, -0.8)] {
            let c = basis.normalized_kernel(z).unwrap();
            // Weighted samples of f·k_z at the nodes: f(node)·Σ_k c_k ẽ_k.
            let wv: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    let mut kz = Complex64::new(0.0, 0.0);
                    for (k, ck) in c.iter().enumerate() {
                        kz += ck * Complex64::new(table.re[(i, k)], table.im[(i, k)]);
                    }
                    f.eval(grid.nodes[i]) * kz
                })
                .collect();
            let norm_sq: f64 = wv
                .iter()
                .zip(&grid.weights)
                .map(|(v, &w)| w * v.norm_sqr())
                .sum();
            let mut proj_sq = 0.0;
            for m in 0..basis.extended_order() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..grid.len() {
                    acc += wv[i]
                        * grid.weights[i]
                        * Complex64::new(table.re[(i, m)], -table.im[(i, m)]);
                }
                proj_sq += acc.norm_sqr();
            }
            let literal = (norm_sq - proj_sq).max(0.0).sqrt();
            let contracted = map.norm_at(basis, z).unwrap();
            assert_abs_diff_eq!(contracted, literal, epsilon = 1e-10);
        }
    }

    #[test]
    fn hankel_energy_splits_against_berezin() {
        // ‖H_f k_z‖² + ‖P(f k_z)‖² = ⟨T_{|f|²} k_z, k_z⟩, with the
        // projection energy computed through the independent analysis path.
        let basis = basis60();
        let f = sym("bump");
        let map = HankelKernelMap::new(basis, &f).unwrap();
        let t_abs = toeplitz_matrix(basis, &f.abs_squared(), 60).unwrap();
        let grid = basis.assembly_grid();
        let table = basis.weighted_table();
        let z = Complex64::new(0.8, -0.4);
        let c = basis.normalized_kernel(z).unwrap();
        let samples: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let mut kz = Complex64::new(0.0, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    kz += ck * Complex64::new(table.re[(i, k)], table.im[(i, k)]);
                }
                f.eval(grid.nodes[i]) * kz / table.half_weight[i]
            })
            .collect();
        let coeffs = analyze_samples(basis, &samples).unwrap();
        let proj_sq: f64 = coeffs.iter().map(|v| v.norm_sqr()).sum();
        let hk = map.norm_at(basis, z).unwrap();
        let total = berezin(basis, &t_abs, z).unwrap().re;
        assert_abs_diff_eq!(hk * hk + proj_sq, total, epsilon = 1e-8);
    }

    #[test]
    fn lebesgue_measure_section_is_the_gram_identity() {
        let basis = basis60();
        let t = toeplitz_measure(basis, &Measure::Lebesgue, 40).unwrap();
        for j in 0..40 {
            for k in 0..40 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t[(j, k)].re, expect, epsilon = 1e-9);
                assert_abs_diff_eq!(t[(j, k)].im, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn measure_transform_matches_direct_integral() {
        let basis = basis60();
        let grid = basis.assembly_grid();
        let bump = sym("bump");
        let density = Measure::Density(bump.clone());
        let masses = Measure::PointMasses(vec![
            (Complex64::new(0.4, 0.1), 0.7),
            (Complex64::new(-0.3, 0.6), 1.2),
        ]);
        for (mu, probe) in [
            (&density, Complex64::new(0.5, -0.2)),
            (&density, Complex64::new(1.1, 0.7)),
            (&masses, Complex64::new(0.2, 0.3)),
        ] {
            let transform = MeasureTransform::new(basis, mu).unwrap();
            let via_section = transform.at(basis, probe).unwrap();
            // Direct route: ∫ |k_z|² e^{−2φ} dμ via the stable weighted kernel.
            let diag = basis.kernel_diag_weighted(probe);
            let direct = match mu {
                Measure::Density(g) => grid
                    .nodes
                    .iter()
                    .zip(&grid.weights)
                    .map(|(&w_node, &w)| {
                        let kw = basis.kernel_weighted(w_node, probe);
                        w * kw.norm_sqr() / diag * g.eval(w_node).re
                    })
                    .sum::<f64>(),
                Measure::PointMasses(ms) => ms
                    .iter()
                    .map(|&(a, mass)| {
                        mass * basis.kernel_weighted(a, probe).norm_sqr() / diag
                    })
                    .sum::<f64>(),
                Measure::Lebesgue => unreachable!(),
            };
            assert_abs_diff_eq!(via_section, direct, epsilon = 1e-8);
        }
    }
}
