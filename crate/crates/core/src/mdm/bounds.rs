//! Cost accounting, the a-priori error bound and calibration of the Smolyak
//! constants.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::weights::{c_up_enclosure, c_up_product, gamma_u, WeightScheme};

use super::cost::CostModel;
use super::flat::FlatRule;
use super::gram::tensor_error;
use super::plan::{product_minus_one, MdmPlan};
use super::smolyak::{smolyak_error_bound, smolyak_rule, smolyak_shape, QuadFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    /// `Σ_i $(Act_a(x_i))` over the assembled rule.
    pub exact: f64,
    /// `$(0) + Σ_{u∈𝒜} n_u·2^{|u|}·$(|u|)`.
    pub bound: f64,
}

pub fn mdm_cost(plan: &MdmPlan, rule: &FlatRule, cm: &CostModel) -> CostReport {
    let exact = rule.points.iter().map(|p| cm.cost(p.act())).sum();
    CostReport { exact, bound: mdm_cost_bound(plan, cm) }
}

/// `$(0) + Σ_{u∈𝒜} n_u·2^{|u|}·$(|u|)`.
pub fn mdm_cost_bound(plan: &MdmPlan, cm: &CostModel) -> f64 {
    cm.cost(0)
        + plan.active_set.iter().map(|s| s.n_u as f64 * (1u64 << s.u.len()) as f64 * cm.cost(s.u.len())).sum::<f64>()
}

/// Bound used for `err(0, m↑_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum ZeroBound {
    /// `c↑(a)`, the integration bound.
    #[default]
    Integration,
    /// `c↑(a)·max(1, α_{1,1}^{−1/2})`, the L2-approximation bound.
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBound {
    pub bound: f64,
    /// Contribution of the active sets to the squared sum.
    pub active_part: f64,
    /// Contribution of all inactive sets (zero algorithm).
    pub inactive_part: f64,
    pub c_up: f64,
    pub c_up_product: f64,
    pub b_eps: f64,
}

/// `C↑(a)·(Σ_{u∈𝒜} γ_u S_u² + Σ_{u∉𝒜, u≠∅} γ_u z^{2|u|})^{1/2}`.
///
/// `S_u` is the Smolyak bound at `n_u`, or `z^{|u|}` when the budget cannot
/// afford the coarsest tensor grid (`coarsest^{|u|}` evaluations) and the
/// rule degenerates to zero; `z` bounds `err(0, m↑_a)`. The inactive sum is
/// `∏_j(1 + γ_j z²) − 1 − Σ_{u∈𝒜} γ_u z^{2|u|}`.
pub fn mdm_error_bound(
    plan: &MdmPlan,
    scheme: &WeightScheme,
    coarsest: usize,
    zero: ZeroBound,
    tol: f64,
) -> Result<ErrorBound> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let c = c_up_enclosure(scheme, plan.a, tol)?;
    let c_up = c.value + c.tail_bound;
    let z = match zero {
        ZeroBound::Integration => c_up,
        ZeroBound::Approximation => c_up * scheme.alpha(1, 1).powf(-0.5).max(1.0),
    };
    let big_c = c_up_product(scheme, plan.a, tol)?;
    let mut active = 0.0;
    let mut active_zero = 0.0;
    for s in &plan.active_set {
        let d = s.u.len();
        let g = gamma_u(scheme, &s.u)?;
        let zero_u = z.powi(d as i32);
        let degenerate = (coarsest as f64).powi(d as i32) > s.n_u as f64;
        let s_u = if degenerate { zero_u } else { smolyak_error_bound(d, s.n_u, plan.kappa, plan.c0, plan.c1) };
        active += g * s_u * s_u;
        active_zero += g * zero_u * zero_u;
    }
    let (all, width) = product_minus_one(scheme, 1.0, z * z)?;
    let inactive = (all - active_zero).max(0.0) + width;
    Ok(ErrorBound {
        bound: big_c * (active + inactive).sqrt(),
        active_part: active,
        inactive_part: inactive,
        c_up,
        c_up_product: big_c,
        b_eps: plan.b_eps(),
    })
}

/// One measured point of the calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationSample {
    pub dim: usize,
    pub budget: usize,
    pub evaluations: usize,
    /// `err(A, k_1^{⊗d})`.
    pub err: f64,
    /// `c↑(a)^d·err / shape(d, n)`.
    pub ratio: f64,
    /// The budget could not afford the coarsest grid.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub c0: f64,
    pub c1: f64,
    pub samples: Vec<CalibrationSample>,
}

/// Fits `C0`, `C1` so that the Smolyak bound dominates the measured
/// `c↑(a)^d·err(A_{d,n}, k_1^{⊗d}) ≥ err(A_{d,n}, m↑_{a,d})` for `d = 1, 2`.
///
/// With `A_d = max_n measured/shape(d, n)`, the choice `C1 = A_2/A_1`,
/// `C0 = A_1²/A_2` reproduces both maxima exactly. Budgets that leave the
/// rule empty are recorded but not fitted: [`mdm_error_bound`] charges
/// those sets the zero-algorithm bound instead.
pub fn calibrate(
    scheme: &WeightScheme,
    family: &QuadFamily,
    kappa: f64,
    budgets: &[usize],
    tol: f64,
) -> Result<Calibration> {
    if budgets.is_empty() {
        return Err(invalid("calibration needs at least one budget"));
    }
    let a = family.anchor;
    let c = c_up_enclosure(scheme, a, tol)?;
    let c_up = c.value + c.tail_bound;
    let mut samples = Vec::new();
    let mut best = [0.0f64; 2];
    for dim in 1..=2usize {
        let u: Vec<usize> = (1..=dim).collect();
        for &n in budgets {
            let rule = smolyak_rule(&u, n, family)?;
            let (points, weights): (Vec<_>, Vec<_>) = rule.anchored_points(a)?.into_iter().unzip();
            let report = tensor_error(scheme, &u, &points, &weights, a, tol)?;
            let err = report.err + report.tail_bound;
            let ratio = c_up.powi(dim as i32) * err / smolyak_shape(dim, n, kappa);
            if !rule.degenerate {
                best[dim - 1] = best[dim - 1].max(ratio);
            }
            samples.push(CalibrationSample {
                dim,
                budget: n,
                evaluations: rule.evaluations,
                err,
                ratio,
                degenerate: rule.degenerate,
            });
        }
    }
    if best.contains(&0.0) {
        return Err(invalid("calibration budgets never afford a two-dimensional grid"));
    }
    let c1 = best[1] / best[0];
    let c0 = best[0] * best[0] / best[1];
    Ok(Calibration { c0, c1, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdm::flat::{assemble, worst_case_error_k};
    use crate::mdm::plan::{plan, PlanParams};
    use crate::weights::Generator;

    fn scheme() -> WeightScheme {
        WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap()
    }

    fn family() -> QuadFamily {
        QuadFamily::new(2, 0.2, 0.0, 8).unwrap()
    }

    fn params(eps: f64) -> PlanParams {
        PlanParams { eps, kappa: 0.8, delta: 0.6, a: 0.0, c0: 0.6, c1: 0.95 }
    }

    #[test]
    fn cost_exact_within_bound() {
        let s = scheme();
        let fam = family();
        let models = [
            CostModel::default(),
            CostModel::affine(2.0, 0.5).unwrap(),
            CostModel::table(vec![1.0, 3.0, 3.5, 10.0]).unwrap(),
        ];
        for eps in [10.0, 1.0, 0.3, 0.1] {
            let p = plan(&s, params(eps)).unwrap();
            let rule = assemble(&p, &fam).unwrap();
            for cm in &models {
                let c = mdm_cost(&p, &rule, cm);
                assert!(c.exact <= c.bound, "eps={eps}: {c:?}");
                if p.active_set.is_empty() {
                    assert_eq!(c.exact, cm.cost(0));
                }
            }
        }
    }

    #[test]
    fn single_set_cost_bound() {
        let s = scheme();
        let mut p = plan(&s, params(0.3)).unwrap();
        p.active_set.truncate(1);
        assert_eq!(p.active_set[0].u, vec![1]);
        let rule = assemble(&p, &family()).unwrap();
        let cm = CostModel::affine(1.0, 2.0).unwrap();
        let c = mdm_cost(&p, &rule, &cm);
        assert_eq!(c.bound, 1.0 + p.active_set[0].n_u as f64 * 2.0 * 3.0);
    }

    #[test]
    fn empty_plan_bound_is_tail_only() {
        let s = scheme();
        let p = plan(&s, params(1e3)).unwrap();
        let b = mdm_error_bound(&p, &s, family().evaluations(1), ZeroBound::Integration, 1e-10).unwrap();
        assert_eq!(b.active_part, 0.0);
        // Σ_{u≠∅} γ_u c^{2|u|} = ∏(1 + γ_j c²) − 1 by partial products.
        let c2 = b.c_up * b.c_up;
        let partial = (1..=200_000).map(|j| (c2 * (j as f64).powi(-3)).ln_1p()).sum::<f64>().exp_m1();
        assert!(b.inactive_part >= partial);
        assert!(b.inactive_part <= partial * (1.0 + 1e-8));
        assert!((b.bound - b.c_up_product * b.inactive_part.sqrt()).abs() < 1e-12 * b.bound);
    }

    #[test]
    fn bound_decreases_and_dominates_exact_error() {
        let s = scheme();
        let fam = family();
        let mut last = f64::INFINITY;
        for eps in [1.0, 0.5, 0.25, 0.12] {
            let p = plan(&s, params(eps)).unwrap();
            let b = mdm_error_bound(&p, &s, fam.evaluations(1), ZeroBound::Integration, 1e-10).unwrap();
            assert!(b.bound <= last);
            last = b.bound;
            let rule = assemble(&p, &fam).unwrap();
            let e = worst_case_error_k(&rule, &s, 1e-8).unwrap();
            assert!(e.err <= b.bound + e.tail_bound);
        }
        let approx =
            mdm_error_bound(&plan(&s, params(0.5)).unwrap(), &s, fam.evaluations(1), ZeroBound::Approximation, 1e-10)
                .unwrap();
        // α_{1,1} = 4, so the L2 zero bound equals the integration one.
        let int =
            mdm_error_bound(&plan(&s, params(0.5)).unwrap(), &s, fam.evaluations(1), ZeroBound::Integration, 1e-10)
                .unwrap();
        assert_eq!(approx.bound, int.bound);
    }
}
