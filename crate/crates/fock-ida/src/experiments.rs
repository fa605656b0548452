//! Experiment drivers: each run turns a configuration into a CSV table with
//! one row per (symbol, exponent), a JSON summary with named threshold
//! checks, and an overall verdict.
//!
//! Every row carries convergence-delta columns (truncation order N against
//! N−10, or FFT resolution against its half) so the summary can reject rows
//! whose reported quantities are still drifting. Artifacts are deterministic:
//! rows are emitted in configuration order and all parallel reductions are
//! ordered, so a repeated run with the same configuration is byte-identical.

use std::path::PathBuf;
use std::sync::Once;

use num_complex::Complex64;
use serde::Serialize;

use crate::beurling::{ahlfors_beurling, derivative_lp_check, wirtinger, PlaneGrid};
use crate::config::{ExperimentId, RunConfig};
use crate::ida::{
    g_field, ida_norm, mu_hat_field, mu_hat_lattice, LpOutcome, Measure, OscillationField,
    FIELD_FLOOR,
};
use crate::io::{fmt_bool, fmt_int, fmt_value, sanitize, write_field_csv, write_json, CsvTable};
use crate::lattice::make_lattice;
use crate::operators::{hankel_gram, toeplitz_measure, MeasureTransform};
use crate::quad::PolarGrid;
use crate::schatten::{
    diverges_spectrally, hankel_kernel_field, psd_singular_values, schatten_norm,
    schatten_outcome, singular_values, translate_norm, ZERO_NORM_FLOOR,
};
use crate::space::Basis;
use crate::symbols::{GrowthClass, Symbol};
use crate::Result;

/// Relative drift above which a row's convergence delta is rejected.
pub const DELTA_TOLERANCE: f64 = 0.2;

/// How far the comparison truncation order sits below the configured one.
pub const ORDER_STEP: usize = 10;

/// Probes used for the translation-covariance identity.
pub fn translate_probes() -> [Complex64; 3] {
    [
        Complex64::new(0.8, 0.0),
        Complex64::new(-0.5, 1.1),
        Complex64::new(1.5, -0.6),
    ]
}

/// One named pass/fail verdict inside a run summary.
#[derive(Debug, Clone, Serialize)]
pub struct NamedCheck {
    /// Stable check name.
    pub name: String,
    /// Verdict.
    pub pass: bool,
    /// Human-readable evidence (worst offender, margins).
    pub detail: String,
}

impl NamedCheck {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        NamedCheck {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// The JSON summary written next to the CSV table.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    /// Experiment identifier.
    pub experiment: String,
    /// CSV file holding the rows, relative to the summary.
    pub rows_file: String,
    /// Number of data rows.
    pub row_count: usize,
    /// Tolerance applied to every `*_delta` column.
    pub delta_tolerance: f64,
    /// Rows whose convergence deltas exceed the tolerance.
    pub rows_exceeding_delta: Vec<String>,
    /// Named threshold checks of the experiment.
    pub checks: Vec<NamedCheck>,
    /// True when every check passes and no row exceeds the delta tolerance.
    pub all_pass: bool,
    /// The configuration that produced the artifacts.
    pub config: RunConfig,
}

/// Where a run left its artifacts, plus the parsed summary.
#[derive(Debug)]
pub struct RunArtifacts {
    /// The CSV table path.
    pub csv_path: PathBuf,
    /// The JSON summary path.
    pub summary_path: PathBuf,
    /// The summary itself.
    pub summary: RunSummary,
}

/// Size the global worker pool from `FOCK_IDA_WORKERS` once per process.
/// Absent or invalid values leave the default (one worker per core).
pub fn init_worker_pool() {
    static POOL: Once = Once::new();
    POOL.call_once(|| {
        if let Ok(raw) = std::env::var("FOCK_IDA_WORKERS") {
            if let Ok(n) = raw.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    });
}

/// A CSV cell: either a number (formatted with 17 significant digits) or
/// sanitized text.
#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(usize),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_value(*x),
            Cell::Int(k) => fmt_int(*k),
            Cell::Flag(b) => fmt_bool(*b),
            Cell::Text(t) => sanitize(t),
        }
    }
}

struct Row {
    label: String,
    cells: Vec<Cell>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Row>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, label: String, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len());
        self.rows.push(Row { label, cells });
    }

    /// Rows whose `*_delta` columns exceed the tolerance (or are undefined
    /// because the two truncations disagreed about divergence).
    fn delta_violations(&self, tolerance: f64) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (name, cell) in self.header.iter().zip(&row.cells) {
                if !name.ends_with("_delta") {
                    continue;
                }
                if let Cell::Num(delta) = cell {
                    if delta.is_nan() || *delta > tolerance {
                        out.push(format!("{}: {name} = {}", row.label, fmt_value(*delta)));
                    }
                }
            }
        }
        out
    }

    fn render(&self) -> CsvTable {
        let mut csv = CsvTable::new(&self.header);
        for row in &self.rows {
            csv.push_row(row.cells.iter().map(Cell::render).collect());
        }
        csv
    }
}

/// Relative drift between two scalar outcomes of the same quantity at two
/// truncations. Consistent divergence and consistent vanishing count as no
/// drift; disagreement about divergence is undefined (NaN) and rejected.
fn outcome_delta(big: &LpOutcome, small: &LpOutcome) -> f64 {
    match (big, small) {
        (LpOutcome::Finite(a), LpOutcome::Finite(b)) => norm_delta(*a, *b),
        (LpOutcome::Divergent { .. }, LpOutcome::Divergent { .. }) => 0.0,
        _ => f64::NAN,
    }
}

/// Convergence delta between two aggregated operator norms. An aggregated
/// norm of a numerically-zero section is roundoff noise (a full spectrum of
/// ~1e-6 singular values can sum to a few 1e-5); the gap between two such
/// noises carries no convergence information, so both sides at or below the
/// degeneracy floor count as converged at zero.
fn norm_delta(a: f64, b: f64) -> f64 {
    if a.abs() <= ZERO_NORM_FLOOR && b.abs() <= ZERO_NORM_FLOOR {
        0.0
    } else {
        scalar_delta(a, b)
    }
}

fn scalar_delta(a: f64, b: f64) -> f64 {
    if a.abs() <= FIELD_FLOOR && b.abs() <= FIELD_FLOOR {
        0.0
    } else {
        (a - b).abs() / a.abs().max(FIELD_FLOOR)
    }
}

fn ratio_or_nan(a: &LpOutcome, b: &LpOutcome) -> f64 {
    match (a.value(), b.value()) {
        (Some(x), Some(y)) if x > FIELD_FLOOR && y > FIELD_FLOOR => x / y,
        _ => f64::NAN,
    }
}

fn in_window(x: f64, lo: f64, hi: f64) -> bool {
    x.is_finite() && x >= lo && x <= hi
}

/// Format a worst-offender detail line.
fn worst(detail: Option<(String, f64)>, none_msg: &str) -> String {
    match detail {
        Some((who, value)) => format!("worst {who}: {}", fmt_value(value)),
        None => none_msg.to_string(),
    }
}

struct Context {
    config: RunConfig,
    symbols: Vec<Symbol>,
    basis_big: Basis,
    basis_small: Basis,
    grid: PolarGrid,
    p_list: Vec<f64>,
}

impl Context {
    fn build(config: &RunConfig) -> Result<Self> {
        let weight = config.build_weight()?;
        let symbols = config.build_symbols()?;
        let basis_big = Basis::build_for_radius(&weight, config.order, config.grid_radius)?;
        let basis_small =
            Basis::build_for_radius(&weight, config.order - ORDER_STEP, config.grid_radius)?;
        let grid = PolarGrid::plane(config.grid_radius, 12, 48)?;
        Ok(Context {
            config: config.clone(),
            symbols,
            basis_big,
            basis_small,
            grid,
            p_list: config.effective_p_list(),
        })
    }
}

/// Run one experiment end to end, writing the CSV table and JSON summary
/// into the configured output directory.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    init_worker_pool();
    let (table, checks, fields) = match config.experiment {
        ExperimentId::Beurling => run_beurling(config)?,
        _ => {
            let ctx = Context::build(config)?;
            match config.experiment {
                ExperimentId::Equivalence => run_equivalence(&ctx)?,
                ExperimentId::BergerCoburn => run_berger_coburn(&ctx)?,
                ExperimentId::HsIdentity => run_hs_identity(&ctx)?,
                ExperimentId::Compactness => run_compactness(&ctx)?,
                ExperimentId::Toeplitz => run_toeplitz(&ctx)?,
                ExperimentId::Beurling => unreachable!(),
            }
        }
    };

    let slug = config.experiment.slug();
    let csv_path = config.out_dir.join(format!("{slug}.csv"));
    let summary_path = config.out_dir.join(format!("{slug}-summary.json"));
    table.render().write(&csv_path)?;

    if config.export_fields {
        for field in &fields {
            let stem: String = field
                .label
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
                .collect();
            let path = config.out_dir.join("fields").join(format!("{stem}.csv"));
            write_field_csv(&path, field)?;
        }
    }

    let rows_exceeding_delta = table.delta_violations(DELTA_TOLERANCE);
    let all_pass = checks.iter().all(|c| c.pass) && rows_exceeding_delta.is_empty();
    let summary = RunSummary {
        experiment: slug.to_string(),
        rows_file: format!("{slug}.csv"),
        row_count: table.rows.len(),
        delta_tolerance: DELTA_TOLERANCE,
        rows_exceeding_delta,
        checks,
        all_pass,
        config: config.clone(),
    };
    write_json(&summary_path, &summary)?;
    Ok(RunArtifacts {
        csv_path,
        summary_path,
        summary,
    })
}

type ExperimentOutput = (Table, Vec<NamedCheck>, Vec<OscillationField>);

/// Norm-equivalence comparison: spectral, oscillation-field, and
/// kernel-field quantities per (symbol, p), with coherence of the three
/// divergence verdicts and a ratio window for finite rows.
fn run_equivalence(ctx: &Context) -> Result<ExperimentOutput> {
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "order",
        "r",
        "d",
        "q_spectral",
        "q_field",
        "q_kernel",
        "ratio_spectral_field",
        "ratio_spectral_kernel",
        "ratio_field_kernel",
        "coherent",
        "div_spectral",
        "div_field",
        "div_kernel",
        "fit_defect",
        "spectral_delta",
        "kernel_delta",
    ]);
    let r = ctx.config.ball_radius;
    let d = ctx.config.fit_degree;
    let mut fields = Vec::new();
    let mut incoherent: Option<(String, f64)> = None;
    let mut window_worst: Option<(String, f64)> = None;
    let mut window_ok = true;

    for symbol in &ctx.symbols {
        let s_big = singular_values(&hankel_gram(&ctx.basis_big, symbol, ctx.basis_big.order())?)?;
        let s_small = singular_values(&hankel_gram(
            &ctx.basis_small,
            symbol,
            ctx.basis_small.order(),
        )?)?;
        let spectral_div = diverges_spectrally(&s_big);
        let g = g_field(symbol, r, d, &ctx.grid)?;
        let hk_big = hankel_kernel_field(&ctx.basis_big, symbol, &ctx.grid)?;
        let hk_small = hankel_kernel_field(&ctx.basis_small, symbol, &ctx.grid)?;

        for &p in &ctx.p_list {
            let q_a = schatten_outcome(&s_big, p)?;
            let q_a_small = schatten_outcome(&s_small, p)?;
            let q_b = ida_norm(&g, p)?;
            let q_c = ida_norm(&hk_big, p)?;
            let q_c_small = ida_norm(&hk_small, p)?;
            let coherent =
                spectral_div == !q_b.is_finite() && spectral_div == !q_c.is_finite();
            let label = format!("{} p={p}", symbol.name());
            if !coherent {
                incoherent.get_or_insert((label.clone(), 1.0));
            }
            let ratios = [
                ratio_or_nan(&q_a, &q_b),
                ratio_or_nan(&q_a, &q_c),
                ratio_or_nan(&q_b, &q_c),
            ];
            for &ratio in &ratios {
                if !ratio.is_nan() && !in_window(ratio, 0.1, 10.0) {
                    window_ok = false;
                    let dev = ratio.max(1.0 / ratio);
                    if window_worst.as_ref().is_none_or(|w| dev > w.1) {
                        window_worst = Some((label.clone(), ratio));
                    }
                }
            }
            table.push(
                label,
                vec![
                    Cell::Text(symbol.name().to_string()),
                    Cell::Num(p),
                    Cell::Int(ctx.basis_big.order()),
                    Cell::Num(r),
                    Cell::Int(d),
                    Cell::Num(q_a.value_or_inf()),
                    Cell::Num(q_b.value_or_inf()),
                    Cell::Num(q_c.value_or_inf()),
                    Cell::Num(ratios[0]),
                    Cell::Num(ratios[1]),
                    Cell::Num(ratios[2]),
                    Cell::Flag(coherent),
                    Cell::Flag(spectral_div),
                    Cell::Flag(!q_b.is_finite()),
                    Cell::Flag(!q_c.is_finite()),
                    Cell::Num(g.convergence.unwrap_or(f64::NAN)),
                    Cell::Num(outcome_delta(&q_a, &q_a_small)),
                    Cell::Num(outcome_delta(&q_c, &q_c_small)),
                ],
            );
        }
        fields.push(g);
        fields.push(hk_big);
    }

    let checks = vec![
        NamedCheck::new(
            "divergence-coherence",
            incoherent.is_none(),
            worst(incoherent, "all rows coherent"),
        ),
        NamedCheck::new(
            "ratio-window",
            window_ok,
            worst(window_worst, "all finite ratios within [0.1, 10]"),
        ),
    ];
    Ok((table, checks, fields))
}

/// Conjugate-symbol comparison: ‖H_f̄‖_{S_p} against ‖H_f‖_{S_p}. The
/// holomorphic coordinate is the documented degenerate case: a positive
/// numerator over a vanishing denominator, reported but not failed.
fn run_berger_coburn(ctx: &Context) -> Result<ExperimentOutput> {
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "order",
        "conj_norm",
        "plain_norm",
        "ratio",
        "conj_delta",
        "plain_delta",
        "note",
    ]);
    let mut bound_ok = true;
    let mut bound_worst: Option<(String, f64)> = None;
    let mut exceptions = Vec::new();

    for symbol in &ctx.symbols {
        let conj = symbol.conjugated();
        let s_conj_big =
            singular_values(&hankel_gram(&ctx.basis_big, &conj, ctx.basis_big.order())?)?;
        let s_plain_big =
            singular_values(&hankel_gram(&ctx.basis_big, symbol, ctx.basis_big.order())?)?;
        let s_conj_small = singular_values(&hankel_gram(
            &ctx.basis_small,
            &conj,
            ctx.basis_small.order(),
        )?)?;
        let s_plain_small = singular_values(&hankel_gram(
            &ctx.basis_small,
            symbol,
            ctx.basis_small.order(),
        )?)?;

        for &p in &ctx.p_list {
            let num = schatten_norm(&s_conj_big, p)?;
            let den = schatten_norm(&s_plain_big, p)?;
            let num_small = schatten_norm(&s_conj_small, p)?;
            let den_small = schatten_norm(&s_plain_small, p)?;
            let label = format!("{} p={p}", symbol.name());
            let (ratio, note) = if den > ZERO_NORM_FLOOR {
                (num / den, String::new())
            } else if num > ZERO_NORM_FLOOR {
                exceptions.push(label.clone());
                (
                    f64::NAN,
                    "conjugate section positive while the original vanishes: \
                     no finite comparison constant"
                        .to_string(),
                )
            } else {
                (f64::NAN, "both sections vanish".to_string())
            };
            if !ratio.is_nan() && ratio > 10.0 {
                bound_ok = false;
                if bound_worst.as_ref().is_none_or(|w| ratio > w.1) {
                    bound_worst = Some((label.clone(), ratio));
                }
            }
            table.push(
                label,
                vec![
                    Cell::Text(symbol.name().to_string()),
                    Cell::Num(p),
                    Cell::Int(ctx.basis_big.order()),
                    Cell::Num(num),
                    Cell::Num(den),
                    Cell::Num(ratio),
                    Cell::Num(norm_delta(num, num_small)),
                    Cell::Num(norm_delta(den, den_small)),
                    Cell::Text(note),
                ],
            );
        }
    }

    let exception_detail = if exceptions.is_empty() {
        "no degenerate rows".to_string()
    } else {
        format!("degenerate rows (reported, not failed): {}", exceptions.join("; "))
    };
    let checks = vec![
        NamedCheck::new(
            "conjugate-ratio-bound",
            bound_ok,
            worst(bound_worst, "all finite ratios at most 10"),
        ),
        NamedCheck::new("degenerate-rows-documented", true, exception_detail),
    ];
    Ok((table, checks, Vec::new()))
}

/// Hilbert-Schmidt identity: the eigenvalue sum Σ s_j² of a Hankel section
/// against the kernel-field integral ∫‖H_f k_z‖² K(z,z) e^{−2φ(z)} dv(z)
/// (which reduces to π^{−1}∫‖H_f k_z‖² dv for the standard weight at α = 1).
fn run_hs_identity(ctx: &Context) -> Result<ExperimentOutput> {
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "order",
        "spectral_sq_sum",
        "kernel_integral",
        "weighted_integral",
        "identity_gap",
        "div_spectral",
        "spectral_delta",
        "integral_delta",
    ]);
    let mut fields = Vec::new();
    let mut gap_ok = true;
    let mut gap_worst: Option<(String, f64)> = None;

    for symbol in &ctx.symbols {
        let s_big = singular_values(&hankel_gram(&ctx.basis_big, symbol, ctx.basis_big.order())?)?;
        let s_small = singular_values(&hankel_gram(
            &ctx.basis_small,
            symbol,
            ctx.basis_small.order(),
        )?)?;
        let spectral_div = diverges_spectrally(&s_big);
        let hk_big = hankel_kernel_field(&ctx.basis_big, symbol, &ctx.grid)?;
        let hk_small = hankel_kernel_field(&ctx.basis_small, symbol, &ctx.grid)?;
        let sq_sum_big = schatten_norm(&s_big, 2.0)?.powi(2);
        let sq_sum_small = schatten_norm(&s_small, 2.0)?.powi(2);
        let (raw_big, weighted_big) = kernel_energy_integrals(&ctx.basis_big, &hk_big);
        let (_, weighted_small) = kernel_energy_integrals(&ctx.basis_small, &hk_small);
        let gap = scalar_delta(sq_sum_big, weighted_big);
        let label = format!("{} p=2", symbol.name());
        if !spectral_div && gap > 0.02 {
            gap_ok = false;
            if gap_worst.as_ref().is_none_or(|w| gap > w.1) {
                gap_worst = Some((label.clone(), gap));
            }
        }
        for &p in &ctx.p_list {
            table.push(
                label.clone(),
                vec![
                    Cell::Text(symbol.name().to_string()),
                    Cell::Num(p),
                    Cell::Int(ctx.basis_big.order()),
                    Cell::Num(sq_sum_big),
                    Cell::Num(raw_big),
                    Cell::Num(weighted_big),
                    Cell::Num(gap),
                    Cell::Flag(spectral_div),
                    Cell::Num(if spectral_div {
                        0.0
                    } else {
                        scalar_delta(sq_sum_big, sq_sum_small)
                    }),
                    Cell::Num(if spectral_div {
                        0.0
                    } else {
                        scalar_delta(weighted_big, weighted_small)
                    }),
                ],
            );
        }
        fields.push(hk_big);
    }

    let checks = vec![NamedCheck::new(
        "hilbert-schmidt-identity",
        gap_ok,
        worst(gap_worst, "all convergent rows agree within 2%"),
    )];
    Ok((table, checks, fields))
}

/// ∫‖H_f k_z‖² dv and ∫‖H_f k_z‖² K(z,z) e^{−2φ} dv over the sampling grid.
fn kernel_energy_integrals(basis: &Basis, field: &OscillationField) -> (f64, f64) {
    let mut raw = 0.0;
    let mut weighted = 0.0;
    for ((&z, &w), &v) in field.centers.iter().zip(&field.areas).zip(&field.values) {
        let energy = w * v * v;
        raw += energy;
        weighted += energy * basis.kernel_diag_weighted(z);
    }
    (raw, weighted)
}

/// Kernel-field decay and translation covariance: sup and outer-tail of
/// z ↦ ‖H_f k_z‖, a vanishing verdict, and the identity
/// ‖H_f k_z‖ = ‖H_{f∘τ_z} k_0‖ at fixed probes.
fn run_compactness(ctx: &Context) -> Result<ExperimentOutput> {
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "order",
        "sup_kernel",
        "min_kernel",
        "tail_start",
        "tail_max",
        "vanishing",
        "translate_defect",
        "sup_delta",
    ]);
    let tail_band = 2.0;
    let mut fields = Vec::new();
    let mut vanish_ok = true;
    let mut vanish_worst: Option<(String, f64)> = None;
    let mut translate_ok = true;
    let mut translate_worst: Option<(String, f64)> = None;

    for symbol in &ctx.symbols {
        let hk_big = hankel_kernel_field(&ctx.basis_big, symbol, &ctx.grid)?;
        let hk_small = hankel_kernel_field(&ctx.basis_small, symbol, &ctx.grid)?;
        let sup = hk_big.sup();
        let min = hk_big.values.iter().copied().fold(f64::INFINITY, f64::min);
        let tail_max = hk_big.outer_band_max(tail_band);
        let vanishing = tail_max < 1e-3;
        let label = symbol.name().to_string();

        let mut translate_defect = 0.0f64;
        for z in translate_probes() {
            let direct = crate::operators::hankel_apply_to_kernel(&ctx.basis_big, symbol, z)?;
            let translated = translate_norm(&ctx.basis_big, symbol, z)?;
            translate_defect = translate_defect.max((direct - translated).abs());
        }
        if translate_defect > 1e-6 {
            translate_ok = false;
            if translate_worst.as_ref().is_none_or(|w| translate_defect > w.1) {
                translate_worst = Some((label.clone(), translate_defect));
            }
        }
        if symbol.growth() == GrowthClass::CompactlySupported && !vanishing {
            vanish_ok = false;
            if vanish_worst.as_ref().is_none_or(|w| tail_max > w.1) {
                vanish_worst = Some((label.clone(), tail_max));
            }
        }

        table.push(
            label,
            vec![
                Cell::Text(symbol.name().to_string()),
                Cell::Text("inf".to_string()),
                Cell::Int(ctx.basis_big.order()),
                Cell::Num(sup),
                Cell::Num(min),
                Cell::Num(ctx.config.grid_radius - tail_band),
                Cell::Num(tail_max),
                Cell::Flag(vanishing),
                Cell::Num(translate_defect),
                Cell::Num(scalar_delta(sup, hk_small.sup())),
            ],
        );
        fields.push(hk_big);
    }

    let checks = vec![
        NamedCheck::new(
            "compact-symbol-kernel-decay",
            vanish_ok,
            worst(vanish_worst, "all compactly supported symbols decay below 1e-3"),
        ),
        NamedCheck::new(
            "translation-covariance",
            translate_ok,
            worst(translate_worst, "all translate defects at most 1e-6"),
        ),
    ];
    Ok((table, checks, fields))
}

/// Plane-FFT derivative comparison through the singular integral transform:
/// ‖∂f‖_p against ‖∂̄f‖_p per symbol with a resolution-halving delta per
/// row, plus the multiplier intertwining gap and the L² isometry gap
/// measured once on the Gaussian reference field.
///
/// The transform identities are certified on e^{-|z|²} rather than on each
/// configured symbol: spectral differentiation of a marginally resolved
/// symbol (a width-1 bump has visible spectrum at the Nyquist frequency of
/// every practical grid) leaves ringing on the boundary ring, and the
/// transform's periodization guard rightly rejects such a field. The
/// Gaussian's spectrum is far below the guard's floor at every grid size
/// used here, so it probes the multiplier itself, not sampling artifacts.
fn run_beurling(config: &RunConfig) -> Result<ExperimentOutput> {
    let symbols = config.build_symbols()?;
    let p_list = config.effective_p_list();
    let grid = PlaneGrid::new(config.fft_half_side, config.fft_resolution)?;
    let coarse = PlaneGrid::new(config.fft_half_side, config.fft_resolution / 2)?;
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "resolution",
        "half_side",
        "deriv_norm",
        "conj_deriv_norm",
        "deriv_ratio",
        "degenerate",
        "intertwine_gap",
        "isometry_gap",
        "ratio_delta",
    ]);

    let reference = grid.sample(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0));
    let (d_ref, dbar_ref) = wirtinger(&grid, &reference)?;
    let transformed = ahlfors_beurling(&grid, &dbar_ref)?;
    let diff: Vec<Complex64> = transformed
        .iter()
        .zip(&d_ref)
        .map(|(a, b)| a - b)
        .collect();
    let d_l2 = grid.lp_norm(&d_ref, 2.0);
    let intertwine_gap = if d_l2 > FIELD_FLOOR {
        grid.lp_norm(&diff, 2.0) / d_l2
    } else {
        0.0
    };
    let dbar_l2 = grid.lp_norm(&dbar_ref, 2.0);
    let isometry_gap = if dbar_l2 > FIELD_FLOOR {
        (grid.lp_norm(&transformed, 2.0) - dbar_l2).abs() / dbar_l2
    } else {
        0.0
    };
    let intertwine_ok = intertwine_gap <= 1e-6;
    let intertwine_worst =
        (!intertwine_ok).then(|| ("gaussian-reference".to_string(), intertwine_gap));
    let isometry_ok = isometry_gap <= 1e-10;
    let isometry_worst =
        (!isometry_ok).then(|| ("gaussian-reference".to_string(), isometry_gap));

    let mut ratio_ok = true;
    let mut ratio_worst: Option<(String, f64)> = None;

    for symbol in &symbols {
        let values = grid.sample(|z| symbol.eval(z));
        let values_coarse = coarse.sample(|z| symbol.eval(z));
        let label_base = symbol.name().to_string();

        for &p in &p_list {
            let fine = derivative_lp_check(&grid, &values, p)?;
            let rough = derivative_lp_check(&coarse, &values_coarse, p)?;
            let ratio = fine.ratio.unwrap_or(f64::NAN);
            let ratio_delta = match (fine.ratio, rough.ratio) {
                (Some(a), Some(b)) => scalar_delta(a, b),
                (None, None) => 0.0,
                _ => f64::NAN,
            };
            let label = format!("{label_base} p={p}");
            if !fine.degenerate && !(ratio <= 10.0) {
                ratio_ok = false;
                if ratio_worst.as_ref().is_none_or(|w| !(ratio <= w.1)) {
                    ratio_worst = Some((label.clone(), ratio));
                }
            }
            table.push(
                label,
                vec![
                    Cell::Text(label_base.clone()),
                    Cell::Num(p),
                    Cell::Int(grid.n),
                    Cell::Num(grid.half_side),
                    Cell::Num(fine.d_norm),
                    Cell::Num(fine.dbar_norm),
                    Cell::Num(ratio),
                    Cell::Flag(fine.degenerate),
                    Cell::Num(intertwine_gap),
                    Cell::Num(isometry_gap),
                    Cell::Num(ratio_delta),
                ],
            );
        }
    }

    let checks = vec![
        NamedCheck::new(
            "derivative-ratio-bound",
            ratio_ok,
            worst(ratio_worst, "all derivative ratios at most 10"),
        ),
        NamedCheck::new(
            "multiplier-intertwining",
            intertwine_ok,
            worst(intertwine_worst, "all intertwining gaps at most 1e-6"),
        ),
        NamedCheck::new(
            "l2-isometry",
            isometry_ok,
            worst(isometry_worst, "all isometry gaps at most 1e-10"),
        ),
    ];
    Ok((table, checks, Vec::new()))
}

/// Positive Toeplitz sections against averaged-measure fields: Schatten
/// norms of T_μ, the ball-average field μ̂_r, the transform field μ̃, and
/// lattice sums, with all pairwise ratios.
fn run_toeplitz(ctx: &Context) -> Result<ExperimentOutput> {
    let mut table = Table::new(vec![
        "symbol",
        "p",
        "order",
        "r",
        "schatten_measure",
        "avg_field_lp",
        "ratio_schatten_avg",
        "transform_lp",
        "lattice_lp",
        "ratio_transform_avg",
        "ratio_avg_lattice",
        "ratio_transform_lattice",
        "schatten_delta",
    ]);
    let r = ctx.config.ball_radius;
    let lattice = make_lattice(r / 2.0, ctx.config.grid_radius)?;
    let mut fields = Vec::new();
    let mut window_ok = true;
    let mut window_worst: Option<(String, f64)> = None;
    let mut triple_ok = true;
    let mut triple_worst: Option<(String, f64)> = None;

    for symbol in &ctx.symbols {
        let measure = Measure::Density(symbol.clone());
        let t_big = toeplitz_measure(&ctx.basis_big, &measure, ctx.basis_big.order())?;
        let t_small = toeplitz_measure(&ctx.basis_small, &measure, ctx.basis_small.order())?;
        let s_big = psd_singular_values(&t_big)?;
        let s_small = psd_singular_values(&t_small)?;
        let avg_field = mu_hat_field(&measure, r, &ctx.grid)?;
        let transform = MeasureTransform::new(&ctx.basis_big, &measure)?;
        let transform_values = transform.values(&ctx.basis_big, &ctx.grid.nodes)?;
        let transform_field = OscillationField::from_plane_grid(
            format!("transform({})", symbol.name()),
            &ctx.grid,
            transform_values,
            None,
        );
        let lattice_field = mu_hat_lattice(&measure, r, &lattice)?;

        for &p in &ctx.p_list {
            let schatten = schatten_outcome(&s_big, p)?;
            let schatten_small = schatten_outcome(&s_small, p)?;
            let avg = ida_norm(&avg_field, p)?;
            let trans = ida_norm(&transform_field, p)?;
            let latt = ida_norm(&lattice_field, p)?;
            let label = format!("{} p={p}", symbol.name());
            let main_ratio = ratio_or_nan(&schatten, &avg);
            let triple = [
                ratio_or_nan(&trans, &avg),
                ratio_or_nan(&avg, &latt),
                ratio_or_nan(&trans, &latt),
            ];
            if !main_ratio.is_nan() && !in_window(main_ratio, 0.1, 10.0) {
                window_ok = false;
                let dev = main_ratio.max(1.0 / main_ratio);
                if window_worst.as_ref().is_none_or(|w| dev > w.1) {
                    window_worst = Some((label.clone(), main_ratio));
                }
            }
            for &ratio in &triple {
                if ratio.is_nan() || !in_window(ratio, 0.1, 10.0) {
                    triple_ok = false;
                    let dev = if ratio.is_nan() {
                        f64::INFINITY
                    } else {
                        ratio.max(1.0 / ratio)
                    };
                    if triple_worst.as_ref().is_none_or(|w| dev > w.1) {
                        triple_worst = Some((label.clone(), ratio));
                    }
                }
            }
            table.push(
                label,
                vec![
                    Cell::Text(symbol.name().to_string()),
                    Cell::Num(p),
                    Cell::Int(ctx.basis_big.order()),
                    Cell::Num(r),
                    Cell::Num(schatten.value_or_inf()),
                    Cell::Num(avg.value_or_inf()),
                    Cell::Num(main_ratio),
                    Cell::Num(trans.value_or_inf()),
                    Cell::Num(latt.value_or_inf()),
                    Cell::Num(triple[0]),
                    Cell::Num(triple[1]),
                    Cell::Num(triple[2]),
                    Cell::Num(outcome_delta(&schatten, &schatten_small)),
                ],
            );
        }
        fields.push(avg_field);
        fields.push(transform_field);
        fields.push(lattice_field);
    }

    let checks = vec![
        NamedCheck::new(
            "section-vs-average-window",
            window_ok,
            worst(window_worst, "all section/average ratios within [0.1, 10]"),
        ),
        NamedCheck::new(
            "average-transform-lattice-window",
            triple_ok,
            worst(triple_worst, "all pairwise ratios within [0.1, 10]"),
        ),
    ];
    Ok((table, checks, fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn temp_out(tag: &str) -> PathBuf {
        std::env::temp_dir().join(format!("fock-ida-test-{tag}-{}", std::process::id()))
    }

    fn small_config(experiment: ExperimentId, tag: &str) -> RunConfig {
        let mut cfg = RunConfig::example(experiment);
        cfg.order = 40;
        cfg.grid_radius = 6.0;
        cfg.fft_resolution = 128;
        cfg.out_dir = temp_out(tag);
        cfg
    }

    #[test]
    fn equivalence_run_produces_coherent_deterministic_artifacts() {
        let mut cfg = small_config(ExperimentId::Equivalence, "e1");
        cfg.symbols = vec![
            crate::symbols::SymbolSpec::named("bump"),
            crate::symbols::SymbolSpec::named("zbar"),
            crate::symbols::SymbolSpec::named("z"),
        ];
        cfg.p_list = vec![2.0];
        let first = run(&cfg).unwrap();
        assert!(first.summary.all_pass, "{:#?}", first.summary.checks);
        assert_eq!(first.summary.row_count, 3);
        let bytes_one = std::fs::read(&first.csv_path).unwrap();
        // Header + one row per (symbol, p).
        let text = String::from_utf8(bytes_one.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("symbol,p,order,r,d,"));

        let second = run(&cfg).unwrap();
        let bytes_two = std::fs::read(&second.csv_path).unwrap();
        assert_eq!(bytes_one, bytes_two, "repeated runs must be byte-identical");
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }

    #[test]
    fn berger_coburn_degenerate_row_is_documented_not_failed() {
        let mut cfg = small_config(ExperimentId::BergerCoburn, "e2");
        cfg.symbols = vec![
            crate::symbols::SymbolSpec::named("z"),
            crate::symbols::SymbolSpec::named("bump"),
        ];
        cfg.p_list = vec![2.0];
        let artifacts = run(&cfg).unwrap();
        assert!(artifacts.summary.all_pass, "{:#?}", artifacts.summary.checks);
        let doc = artifacts
            .summary
            .checks
            .iter()
            .find(|c| c.name == "degenerate-rows-documented")
            .unwrap();
        assert!(doc.detail.contains("z p=2"), "{}", doc.detail);
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }

    #[test]
    fn hs_identity_run_agrees_for_compact_symbols() {
        let mut cfg = small_config(ExperimentId::HsIdentity, "e3");
        cfg.symbols = vec![crate::symbols::SymbolSpec::named("bump")];
        let artifacts = run(&cfg).unwrap();
        assert!(artifacts.summary.all_pass, "{:#?}", artifacts.summary.checks);
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }

    #[test]
    fn beurling_run_bounds_ratios_on_the_fft_grid() {
        let mut cfg = small_config(ExperimentId::Beurling, "e5");
        cfg.symbols = vec![
            crate::symbols::SymbolSpec::named("gauss"),
            crate::symbols::SymbolSpec::named("cbump"),
        ];
        cfg.p_list = vec![2.0];
        let artifacts = run(&cfg).unwrap();
        assert!(artifacts.summary.all_pass, "{:#?}", artifacts.summary.checks);
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }

    #[test]
    fn toeplitz_run_keeps_all_ratios_in_the_window() {
        let mut cfg = small_config(ExperimentId::Toeplitz, "e6");
        cfg.p_list = vec![1.0];
        let artifacts = run(&cfg).unwrap();
        assert!(artifacts.summary.all_pass, "{:#?}", artifacts.summary.checks);
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }

    #[test]
    fn compactness_run_flags_decay_and_translation() {
        let mut cfg = small_config(ExperimentId::Compactness, "e4");
        cfg.symbols = vec![
            crate::symbols::SymbolSpec::named("bump"),
            crate::symbols::SymbolSpec::named("zbar"),
        ];
        let artifacts = run(&cfg).unwrap();
        assert!(artifacts.summary.all_pass, "{:#?}", artifacts.summary.checks);
        std::fs::remove_dir_all(&cfg.out_dir).ok();
    }
}
