//! Convergence sweeps with exact errors, bounds, costs and rate fits.

use std::time::Instant;

use serde::Serialize;

use crate::approx1d::{build_ls_approx, spectral_lower_bound, worst_case_error_l2};
use crate::error::Result;
use crate::mdm::{
    assemble, calibrate, mdm_approximate, mdm_cost, mdm_cost_bound, mdm_error_bound, plan, worst_case_error_k,
    ApproxFamily, MdmPlan, PlanParams, QuadFamily,
};
use crate::quad1d::{build_an, worst_case_error_int};
use crate::weights::{decay_estimate, rho, SchemeKind, WeightScheme};

use super::config::{Problem, StudyConfig, ValidatedConfig};
use super::testfn::eval_test_function;

/// Tolerance on the squared Smolyak errors measured during calibration.
const CALIBRATION_TOL: f64 = 1e-8;

/// One sweep point. Absent values are written as `NA`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    /// `n` or `ε`.
    pub sweep_value: f64,
    pub err_exact: f64,
    /// Enclosure radius of `err_exact`.
    pub err_tail: f64,
    pub err_bound: Option<f64>,
    pub cost_exact: f64,
    pub cost_bound: Option<f64>,
    pub d_eps: Option<usize>,
    pub runtime_ms: Option<f64>,
    #[serde(flatten)]
    pub extra: RowExtra,
}

/// Diagnostics carried in the JSON-lines output only.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RowExtra {
    /// `α_m^{−1/2}` for `m` samples (approximation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_sets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_eps: Option<f64>,
    /// `|Q(f) − ∫f dμ|` (integration) or `‖f − A(f)‖_{L2}` (approximation)
    /// for the study's test function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_error: Option<f64>,
    /// `‖f‖_{H(K)}`; the worst-case bound scaled by it bounds `test_error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub problem: &'static str,
    pub scheme: String,
    pub seed: u64,
    /// Closed-form decay target; `None` when it is unbounded.
    pub target_rate: Option<f64>,
    /// Least-squares decay of `err_exact` against `rate_abscissa`.
    pub fitted_rate: Option<f64>,
    pub fit_intercept: Option<f64>,
    /// `n` for univariate studies, `cost` for MDM studies.
    pub rate_abscissa: &'static str,
    pub rows: usize,
    pub truncated: bool,
    pub aborted: Option<String>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub calibrated: bool,
    pub l_const: Option<f64>,
    pub c2: Option<f64>,
    pub c_up: Option<f64>,
    pub c_up_product: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// `dec` of the first coordinate for integration; `None` when unbounded.
fn first_kernel_decay(scheme: &WeightScheme) -> Option<f64> {
    match scheme.kind() {
        SchemeKind::Polynomial { r } => Some(r.first()),
        _ => None,
    }
}

/// Closed-form target rate of a study.
///
/// Univariate integration decays like `n^{−r}` and approximation like
/// `n^{−r/2}` for polynomial weights; the MDM rate is
/// `min(dec(k_1), (ρ − 1)/2)`.
pub fn target_rate(problem: Problem, scheme: &WeightScheme) -> Option<f64> {
    let dec = first_kernel_decay(scheme);
    let halve = |d: Option<f64>| d.map(|d| 0.5 * d);
    match problem {
        Problem::Int1D => dec,
        Problem::Approx1D => halve(dec),
        Problem::MdmInt | Problem::MdmApprox => {
            let dec = if problem == Problem::MdmApprox { halve(dec) } else { dec };
            let tail = rho(scheme).ok().filter(|r| r.is_finite()).map(|r| 0.5 * (r - 1.0));
            match (dec, tail) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            }
        }
    }
}

/// Rate fit of `(abscissa, err)` pairs; `None` when the data cannot be fitted.
pub fn fit_rate(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    decay_estimate(&s).ok().map(|f| (f.rate, f.intercept))
}

struct MdmContext {
    family: QuadFamily,
    approx: Option<ApproxFamily>,
    c0: f64,
    c1: f64,
    calibrated: bool,
}

fn mdm_context(v: &ValidatedConfig) -> Result<MdmContext> {
    let cfg = &v.raw;
    let family = QuadFamily::new(cfg.quad.r, cfg.quad.delta, cfg.mdm.anchor, cfg.quad.max_level)?;
    let (c0, c1, calibrated) = match (cfg.mdm.c0, cfg.mdm.c1) {
        (Some(c0), Some(c1)) => (c0, c1, false),
        _ => {
            let cal = calibrate(&v.scheme, &family, cfg.mdm.kappa, &cfg.mdm.calibration_budgets, CALIBRATION_TOL)?;
            (cal.c0, cal.c1, true)
        }
    };
    let approx = match cfg.problem {
        Problem::MdmApprox => Some(ApproxFamily::new(&v.scheme, cfg.seed, cfg.approx.max_level)?),
        _ => None,
    };
    Ok(MdmContext { family, approx, c0, c1, calibrated })
}

fn mdm_plan(v: &ValidatedConfig, ctx: &MdmContext, eps: f64) -> Result<MdmPlan> {
    let m = &v.raw.mdm;
    plan(&v.scheme, PlanParams { eps, kappa: m.kappa, delta: m.delta, a: m.anchor, c0: ctx.c0, c1: ctx.c1 })
}

fn int_1d_row(v: &ValidatedConfig, n: usize) -> Result<Row> {
    let rule = build_an(n, v.raw.quad.r, v.raw.quad.delta)?;
    let rep = worst_case_error_int(&rule, &v.scheme, 1, v.tol)?;
    Ok(Row {
        sweep_value: n as f64,
        err_exact: rep.err,
        err_tail: rep.tail_bound,
        err_bound: None,
        cost_exact: rule.len() as f64,
        cost_bound: None,
        d_eps: None,
        runtime_ms: None,
        extra: RowExtra::default(),
    })
}

fn approx_1d_row(v: &ValidatedConfig, n: usize) -> Result<Row> {
    let basis = ((n as f64 * v.raw.approx.basis_ratio).floor() as usize).max(1);
    let ap = build_ls_approx(n, basis, &v.scheme, 1, v.raw.seed)?;
    let rep = worst_case_error_l2(&ap, &v.scheme, 1, None, v.tol)?;
    Ok(Row {
        sweep_value: n as f64,
        err_exact: rep.err,
        err_tail: rep.tail_bound,
        err_bound: None,
        cost_exact: ap.len() as f64,
        cost_bound: None,
        d_eps: None,
        runtime_ms: None,
        extra: RowExtra { lower_bound: Some(spectral_lower_bound(&v.scheme, 1, ap.len())), ..RowExtra::default() },
    })
}

fn mdm_row(v: &ValidatedConfig, ctx: &MdmContext, eps: f64, summary: &mut Summary) -> Result<Row> {
    let p = mdm_plan(v, ctx, eps)?;
    let coarsest = match &ctx.approx {
        Some(fam) => fam.level(1).len(),
        None => ctx.family.evaluations(1),
    };
    let bound = mdm_error_bound(&p, &v.scheme, coarsest, v.zero_bound, 1e-10)?;
    summary.l_const = Some(p.l_const);
    summary.c2 = p.c2(&v.scheme).ok();
    summary.c_up = Some(bound.c_up);
    summary.c_up_product = Some(bound.c_up_product);
    let mut extra = RowExtra { active_sets: Some(p.active_set.len()), b_eps: Some(bound.b_eps), ..RowExtra::default() };
    let (err, tail, cost) = match &ctx.approx {
        None => {
            let rule = assemble(&p, &ctx.family)?;
            let rep = worst_case_error_k(&rule, &v.scheme, v.tol)?;
            if let Some(tf) = &v.test_function {
                extra.test_error = Some((rule.apply(|x| eval_test_function(tf, x)) - tf.integral()).abs());
                extra.test_norm = Some(tf.norm(&v.scheme));
            }
            extra.points = Some(rule.len());
            (rep.err, rep.tail_bound, mdm_cost(&p, &rule, &v.cost_model).exact)
        }
        Some(fam) => {
            // Worst-case L2 errors of the infinite-variate operator are out
            // of reach; the study reports the normalized error on its test
            // function, which the worst-case bound dominates.
            let tf = v.test_function.as_ref().expect("approximation studies always carry a test function");
            let out = mdm_approximate(&p, fam, |x| eval_test_function(tf, x))?;
            let l2 = out.expansion.l2_distance(&tf.expansion());
            let norm = tf.norm(&v.scheme);
            extra.test_error = Some(l2);
            extra.test_norm = Some(norm);
            extra.points = Some(out.points.len());
            let cost = out.points.iter().map(|x| v.cost_model.cost(x.act())).sum();
            (l2 / norm, 0.0, cost)
        }
    };
    Ok(Row {
        sweep_value: eps,
        err_exact: err,
        err_tail: tail,
        err_bound: Some(bound.bound),
        cost_exact: cost,
        cost_bound: Some(mdm_cost_bound(&p, &v.cost_model)),
        d_eps: Some(p.d_eps),
        runtime_ms: None,
        extra,
    })
}

/// Runs a study. Invalid configurations are errors; failures during the
/// sweep end it early and are recorded in `summary.aborted` so that the
/// rows computed so far can still be emitted.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    let v = cfg.validate()?;
    let start = Instant::now();
    let mut summary = Summary {
        problem: cfg.problem.name(),
        scheme: v.scheme.to_string(),
        seed: cfg.seed,
        target_rate: target_rate(cfg.problem, &v.scheme),
        fitted_rate: None,
        fit_intercept: None,
        rate_abscissa: if cfg.problem.is_mdm() { "cost" } else { "n" },
        rows: 0,
        truncated: false,
        aborted: None,
        c0: None,
        c1: None,
        calibrated: false,
        l_const: None,
        c2: None,
        c_up: None,
        c_up_product: None,
    };
    let ctx = if cfg.problem.is_mdm() {
        let ctx = mdm_context(&v)?;
        summary.c0 = Some(ctx.c0);
        summary.c1 = Some(ctx.c1);
        summary.calibrated = ctx.calibrated;
        Some(ctx)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(cfg.sweep.len());
    for &value in &cfg.sweep {
        if start.elapsed().as_secs_f64() > cfg.runtime_cap_s {
            summary.truncated = true;
            break;
        }
        let t = Instant::now();
        let row = match (cfg.problem, &ctx) {
            (Problem::Int1D, _) => int_1d_row(&v, value as usize),
            (Problem::Approx1D, _) => approx_1d_row(&v, value as usize),
            (_, Some(ctx)) => mdm_row(&v, ctx, value, &mut summary),
            (_, None) => unreachable!("MDM studies build their context"),
        };
        match row {
            Ok(mut row) => {
                if cfg.record_runtime {
                    row.runtime_ms = Some(t.elapsed().as_secs_f64() * 1e3);
                }
                rows.push(row);
            }
            Err(e) => {
                summary.aborted = Some(format!("sweep value {value}: {e}"));
                break;
            }
        }
    }
    let abscissa = |r: &Row| if cfg.problem.is_mdm() { r.cost_exact } else { r.sweep_value };
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (abscissa(r), r.err_exact)).collect();
    if let Some((rate, intercept)) = fit_rate(&samples) {
        summary.fitted_rate = Some(rate);
        summary.fit_intercept = Some(intercept);
    }
    summary.rows = rows.len();
    Ok(StudyReport { rows, summary })
}
