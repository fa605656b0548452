//! Singular-value spectra of Hankel sections and the three norm families
//! built from them: Schatten p-norms, L^p norms of the local-distance
//! field G_r, and L^p norms of the kernel field z ↦ ‖H_f k_z‖.
//!
//! Singular values come from the Hermitian Gram matrix of the section via
//! a real symmetric embedding ([[A, −B], [B, A]] has each eigenvalue of
//! A + iB twice), which keeps the computation inside well-conditioned
//! symmetric eigensolvers. Divergence is never inferred from a finite
//! matrix alone: a spectral tail test and the field tail tests must agree,
//! and disagreement is reported, not silently resolved.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::ida::{self, LpOutcome, OscillationField, FIELD_FLOOR};
use crate::operators::{hankel_gram, HankelKernelMap};
use crate::quad::PolarGrid;
use crate::space::Basis;
use crate::symbols::Symbol;
use crate::{Error, Result};

/// Eigenvalues of a complex Hermitian matrix, descending, via the real
/// symmetric embedding.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter(format!(
            "eigenvalues of a non-square {}×{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let embed = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
        (true, true) => m[(r, c)].re,
        (true, false) => -m[(r, c - n)].im,
        (false, true) => m[(r - n, c)].im,
        (false, false) => m[(r - n, c - n)].re,
    });
    let mut eigs: Vec<f64> = nalgebra::SymmetricEigen::new(embed)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    // Each eigenvalue appears twice in the embedding; average the pairs.
    Ok((0..n).map(|k| 0.5 * (eigs[2 * k] + eigs[2 * k + 1])).collect())
}

/// Tolerance for negative Gram eigenvalues (relative to the largest).
pub const GRAM_EIGEN_TOL: f64 = 1e-10;

/// Aggregated Schatten norms of an effectively-zero section are not zero:
/// a full section of √roundoff singular values (each ~1e−6) sums to a few
/// 1e−5 at small p. Norm-level degeneracy tests use this floor; per-value
/// tests use [`FIELD_FLOOR`].
pub const ZERO_NORM_FLOOR: f64 = 1e-4;

/// Singular values of the section whose Gram matrix is given: descending
/// square roots of the Gram eigenvalues. A Gram eigenvalue below
/// −tolerance means the quadrature could not resolve the section.
pub fn singular_values(gram: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eigs = hermitian_eigenvalues(gram)?;
    let scale = eigs.first().copied().unwrap_or(0.0).max(1.0);
    let tolerance = GRAM_EIGEN_TOL * scale;
    if let Some(&min) = eigs.last() {
        if min < -tolerance {
            return Err(Error::TruncationError {
                min_eigenvalue: min,
                tolerance,
            });
        }
    }
    Ok(eigs.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

/// Singular values of a positive semidefinite Hermitian section: its
/// eigenvalues clamped at zero, descending. Unlike [`singular_values`],
/// which receives a Gram matrix and takes square roots, here the section
/// itself is the operator, so its eigenvalues already are its singular
/// values.
pub fn psd_singular_values(section: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eigs = hermitian_eigenvalues(section)?;
    let scale = eigs.first().copied().unwrap_or(0.0).max(1.0);
    let tolerance = GRAM_EIGEN_TOL * scale;
    if let Some(&min) = eigs.last() {
        if min < -tolerance {
            return Err(Error::TruncationError {
                min_eigenvalue: min,
                tolerance,
            });
        }
    }
    Ok(eigs.into_iter().map(|l| l.max(0.0)).collect())
}

/// (Σ s_j^p)^{1/p}; the largest value for p = ∞.
pub fn schatten_norm(singular: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Schatten exponent must be positive, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(singular.first().copied().unwrap_or(0.0));
    }
    Ok(singular.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Spectral tail test: a section whose 80th-percentile singular value still
/// carries more than 10⁻³ of the top one is not summable at finite p —
/// its Schatten norms grow without bound as the section grows.
pub fn diverges_spectrally(singular: &[f64]) -> bool {
    let Some(&s0) = singular.first() else {
        return false;
    };
    if s0 <= FIELD_FLOOR {
        return false;
    }
    let idx = ((0.8 * singular.len() as f64) as usize).min(singular.len() - 1);
    singular[idx] > 1e-3 * s0
}

/// Schatten norm wrapped in the shared finite/divergent outcome type.
pub fn schatten_outcome(singular: &[f64], p: f64) -> Result<LpOutcome> {
    if p.is_finite() && diverges_spectrally(singular) {
        let s0 = singular[0];
        let idx = ((0.8 * singular.len() as f64) as usize).min(singular.len() - 1);
        return Ok(LpOutcome::Divergent {
            tail_ratio: singular[idx] / s0,
        });
    }
    // A section whose top singular value sits at the eigenvalue-roundoff
    // floor is numerically zero; summing the noise spectrum would report a
    // spuriously positive norm (sixty ~1e-6 values add up to a few 1e-5),
    // so the norm is pinned to zero instead.
    if singular.first().is_none_or(|&s0| s0 <= FIELD_FLOOR) {
        return Ok(LpOutcome::Finite(0.0));
    }
    Ok(LpOutcome::Finite(schatten_norm(singular, p)?))
}

/// Singular values of the Hankel section of f at the basis order, with
/// the norms at a list of exponents.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Symbol name.
    pub symbol: String,
    /// Section order.
    pub order: usize,
    /// Singular values, descending.
    pub singular: Vec<f64>,
    /// Whether the spectral tail test flags divergence.
    pub spectral_divergence: bool,
    /// (p, Schatten p-norm) rows.
    pub norms: Vec<(f64, f64)>,
}

/// Compute the spectrum of the Hankel section and its Schatten norms.
pub fn spectral_report(basis: &Basis, f: &Symbol, ps: &[f64]) -> Result<SpectralReport> {
    let gram = hankel_gram(basis, f, basis.order())?;
    let singular = singular_values(&gram)?;
    let norms = ps
        .iter()
        .map(|&p| Ok((p, schatten_norm(&singular, p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralReport {
        symbol: f.name().to_string(),
        order: basis.order(),
        singular: singular.clone(),
        spectral_divergence: diverges_spectrally(&singular),
        norms,
    })
}

/// The field z ↦ ‖H_f k_z‖ sampled on a grid.
pub fn hankel_kernel_field(basis: &Basis, f: &Symbol, grid: &PolarGrid) -> Result<OscillationField> {
    let map = HankelKernelMap::new(basis, f)?;
    let values = map.norms(basis, &grid.nodes)?;
    Ok(OscillationField::from_plane_grid(
        format!("HK({})", f.name()),
        grid,
        values,
        None,
    ))
}

/// (∫ ‖H_f k_z‖^p dv)^{1/p} over the grid, with the shared tail-divergence
/// flagging.
pub fn condition_c_integral(
    basis: &Basis,
    f: &Symbol,
    p: f64,
    grid: &PolarGrid,
) -> Result<LpOutcome> {
    ida::ida_norm(&hankel_kernel_field(basis, f, grid)?, p)
}

/// Sup and decay profile of the kernel field.
#[derive(Debug, Clone)]
pub struct KernelFieldReport {
    /// The sampled field itself.
    pub field: OscillationField,
    /// sup_z ‖H_f k_z‖ over the grid.
    pub sup: f64,
    /// Radial max-profile in unit bins.
    pub profile: Vec<(f64, f64)>,
}

/// Kernel-field summary: sup and radial decay of z ↦ ‖H_f k_z‖.
pub fn stroethoff_quantities(
    basis: &Basis,
    f: &Symbol,
    grid: &PolarGrid,
) -> Result<KernelFieldReport> {
    let field = hankel_kernel_field(basis, f, grid)?;
    let sup = field.sup();
    let profile = field.radial_max_profile(1.0);
    Ok(KernelFieldReport {
        field,
        sup,
        profile,
    })
}

/// ‖H_{f∘τ_z} k_0‖: the Hankel norm at the origin of the translated
/// symbol. Unitary translation covariance makes this equal ‖H_f k_z‖,
/// but it is computed through an independently assembled section.
pub fn translate_norm(basis: &Basis, f: &Symbol, z: Complex64) -> Result<f64> {
    let shifted = f.translated(z);
    crate::operators::hankel_apply_to_kernel(basis, &shifted, Complex64::new(0.0, 0.0))
}

/// One row of the norm-equivalence comparison at a fixed symbol and p:
/// Q_A = ‖H_f‖_{S_p}, Q_B = ‖G_r f‖_{L^p}, Q_C = (∫‖H_f k_z‖^p)^{1/p}.
#[derive(Debug, Clone)]
pub struct EquivalenceEntry {
    /// Symbol name.
    pub symbol: String,
    /// Exponent p.
    pub p: f64,
    /// Ball radius of the G field.
    pub r: f64,
    /// Fit degree of the G field.
    pub d: usize,
    /// Section order used.
    pub order: usize,
    /// Singular values of the Hankel section.
    pub singular: Vec<f64>,
    /// Schatten outcome.
    pub q_a: LpOutcome,
    /// G-field L^p outcome.
    pub q_b: LpOutcome,
    /// Kernel-field L^p outcome.
    pub q_c: LpOutcome,
    /// Whether all three finiteness flags agree.
    pub coherent: bool,
    /// (Q_A/Q_B, Q_A/Q_C, Q_B/Q_C) when all three are finite and nonzero.
    pub ratios: Option<(f64, f64, f64)>,
    /// The G_r field (exportable).
    pub g_field: OscillationField,
    /// The kernel field (exportable).
    pub hk_field: OscillationField,
}

/// Assemble the three quantities for one symbol at one exponent. The same
/// probe grid carries both fields.
pub fn equivalence_entry(
    basis: &Basis,
    f: &Symbol,
    p: f64,
    r: f64,
    d: usize,
    grid: &PolarGrid,
) -> Result<EquivalenceEntry> {
    let gram = hankel_gram(basis, f, basis.order())?;
    let singular = singular_values(&gram)?;
    let q_a = schatten_outcome(&singular, p)?;
    let g_field = ida::g_field(f, r, d, grid)?;
    let q_b = ida::ida_norm(&g_field, p)?;
    let hk_field = hankel_kernel_field(basis, f, grid)?;
    let q_c = ida::ida_norm(&hk_field, p)?;
    let coherent =
        q_a.is_finite() == q_b.is_finite() && q_b.is_finite() == q_c.is_finite();
    let ratios = match (q_a.value(), q_b.value(), q_c.value()) {
        (Some(a), Some(b), Some(c))
            if a > FIELD_FLOOR && b > FIELD_FLOOR && c > FIELD_FLOOR =>
        {
            Some((a / b, a / c, b / c))
        }
        _ => None,
    };
    Ok(EquivalenceEntry {
        symbol: f.name().to_string(),
        p,
        r,
        d,
        order: basis.order(),
        singular,
        q_a,
        q_b,
        q_c,
        coherent,
        ratios,
        g_field,
        hk_field,
    })
}

/// The conjugate-symbol comparison ‖H_f̄‖_{S_p} vs ‖H_f‖_{S_p}.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugateRatioReport {
    /// Symbol name.
    pub symbol: String,
    /// Exponent p.
    pub p: f64,
    /// ‖H_f̄‖_{S_p}.
    pub numerator: f64,
    /// ‖H_f‖_{S_p}.
    pub denominator: f64,
    /// numerator/denominator when the denominator is meaningful.
    pub ratio: Option<f64>,
    /// Explanation when the ratio is undefined.
    pub note: String,
}

/// Compare the Schatten norms of H_f̄ and H_f at one exponent. A vanishing
/// denominator with a non-vanishing numerator is a reported outcome, not
/// an error: it is the boundedness asymmetry between a symbol and its
/// conjugate.
pub fn berger_coburn_ratio(basis: &Basis, f: &Symbol, p: f64) -> Result<ConjugateRatioReport> {
    let n = basis.order();
    let s_conj = singular_values(&hankel_gram(basis, &f.conjugated(), n)?)?;
    let s_plain = singular_values(&hankel_gram(basis, f, n)?)?;
    let numerator = schatten_norm(&s_conj, p)?;
    let denominator = schatten_norm(&s_plain, p)?;
    let (ratio, note) = if denominator > ZERO_NORM_FLOOR {
        (Some(numerator / denominator), String::new())
    } else if numerator > ZERO_NORM_FLOOR {
        (
            None,
            format!(
                "H_f vanishes on the section while ‖H_conj(f)‖ = {numerator:.6e}: \
                 no finite ratio bounds the conjugate norm by the plain one"
            ),
        )
    } else {
        (None, "both sections vanish".to_string())
    };
    Ok(ConjugateRatioReport {
        symbol: f.name().to_string(),
        p,
        numerator,
        denominator,
        ratio,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Weight;
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
    fn hermitian_embedding_recovers_known_spectrum() {
        // [[2, i], [−i, 2]] has eigenvalues 3 and 1.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(eigs[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conjugate_coordinate_spectrum_is_flat() {
        let basis = basis60();
        let report = spectral_report(basis, &sym("zbar"), &[1.0, 2.0]).unwrap();
        assert_eq!(report.singular.len(), 60);
        for &s in &report.singular {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-6);
        }
        assert!(report.spectral_divergence);
        let (_, s2) = report.norms[1];
        assert_relative_eq!(s2, 60.0_f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn holomorphic_coordinate_section_vanishes_without_divergence() {
        let basis = basis60();
        let s = singular_values(&hankel_gram(basis, &sym("z"), 60).unwrap()).unwrap();
        assert!(s[0] < 1e-5, "top singular value {:.3e}", s[0]);
        assert!(!diverges_spectrally(&s));
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // literal node-index sums are the oracle
    fn ring_assembly_matches_brute_force_quadrature() {
        // Independent check at a reduced order: every Gram entry summed
        // node by node over the grid, no ring factorization involved.
        let basis = Basis::build(&Weight::standard(1.0).unwrap(), 30).unwrap();
        let f = sym("cbump");
        let fast = hankel_gram(&basis, &f, 30).unwrap();

        let grid = basis.assembly_grid();
        let table = basis.weighted_table();
        let n = 30;
        let n_ext = basis.extended_order();
        let fvals: Vec<Complex64> = grid.nodes.iter().map(|&z| f.eval(z)).collect();
        let e = |i: usize, k: usize| Complex64::new(table.re[(i, k)], table.im[(i, k)]);
        let mut s = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..grid.len() {
                    acc += grid.weights[i] * fvals[i].norm_sqr() * e(i, k) * e(i, j).conj();
                }
                s[(j, k)] = acc;
            }
        }
        let mut r = DMatrix::<Complex64>::zeros(n_ext, n);
        for m in 0..n_ext {
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..grid.len() {
                    acc += grid.weights[i] * fvals[i] * e(i, k) * e(i, m).conj();
                }
                r[(m, k)] = acc;
            }
        }
        let slow = s - r.adjoint() * &r;
        let defect = (&fast - &slow).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-9, "assembly mismatch {defect:.3e}");
        let s_fast = singular_values(&fast).unwrap();
        let s_slow = singular_values(&slow).unwrap();
        for (a, b) in s_fast.iter().zip(&s_slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn translate_route_agrees_with_kernel_route() {
        let basis = basis60();
        let f = sym("bump");
        let map = HankelKernelMap::new(basis, &f).unwrap();
        for &z in &[Complex64::new(0.8, 0.0), Complex64::new(-0.5, 1.1)] {
            let direct = map.norm_at(basis, z).unwrap();
            let translated = translate_norm(basis, &f, z).unwrap();
            assert_abs_diff_eq!(direct, translated, epsilon = 1e-6);
        }
    }

    #[test]
    fn conjugate_ratio_is_unity_for_real_symbols() {
        let basis = basis60();
        let report = berger_coburn_ratio(basis, &sym("bump"), 2.0).unwrap();
        let ratio = report.ratio.expect("real symbol has nonzero section");
        assert_relative_eq!(ratio, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn conjugate_ratio_degenerates_for_holomorphic_coordinate() {
        let basis = basis60();
        let report = berger_coburn_ratio(basis, &sym("z"), 2.0).unwrap();
        assert!(report.ratio.is_none());
        assert!(report.numerator > 0.5, "numerator {:.3}", report.numerator);
        // The section of a holomorphic symbol is zero; its computed norm is
        // pure eigenvalue roundoff, bounded by the degenerate-norm floor.
        assert!(report.denominator < ZERO_NORM_FLOOR);
        assert!(!report.note.is_empty());
    }

    #[test]
    fn equivalence_entries_are_coherent() {
        let basis = basis60();
        let grid = PolarGrid::plane(6.0, 6, 24).unwrap();

        let bump = equivalence_entry(basis, &sym("bump"), 2.0, 0.5, 8, &grid).unwrap();
        assert!(bump.coherent, "bump flags disagree");
        let (ab, ac, bc) = bump.ratios.expect("bump is finite in all three");
        for ratio in [ab, ac, bc] {
            assert!(
                (0.1..=10.0).contains(&ratio),
                "bump ratio {ratio:.3} outside [1/10, 10]"
            );
        }

        let zbar = equivalence_entry(basis, &sym("zbar"), 2.0, 0.5, 8, &grid).unwrap();
        assert!(zbar.coherent, "zbar flags disagree");
        assert!(!zbar.q_a.is_finite());
        assert!(!zbar.q_b.is_finite());
        assert!(!zbar.q_c.is_finite());
    }

    #[test]
    fn section_growth_drift_is_small_for_localized_symbols() {
        let big = basis60();
        let small = Basis::build(&Weight::standard(1.0).unwrap(), 50).unwrap();
        let f = sym("bump");
        let s_big = singular_values(&hankel_gram(big, &f, 60).unwrap()).unwrap();
        let s_small = singular_values(&hankel_gram(&small, &f, 50).unwrap()).unwrap();
        let n_big = schatten_norm(&s_big, 2.0).unwrap();
        let n_small = schatten_norm(&s_small, 2.0).unwrap();
        let drift = (n_big - n_small).abs() / n_big;
        assert!(drift < 0.05, "S₂ drift {drift:.4}");
    }
}
