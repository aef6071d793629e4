//! The assembled MDM quadrature and its exact worst-case error.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hermite::{anchor_product, AnchoredPoint};
use crate::quad1d::ErrorReport;
use crate::weights::WeightScheme;

use super::decomposition::anchored_component_points;
use super::gram::ProductGram;
use super::plan::MdmPlan;
use super::smolyak::{smolyak_rule, QuadFamily};

/// A linear rule `Σ_i w_i f(x_i)` over anchored points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatRule {
    pub anchor: f64,
    #[serde(skip)]
    pub points: Vec<AnchoredPoint>,
    pub weights: Vec<f64>,
}

fn point_order(p: &AnchoredPoint, q: &AnchoredPoint) -> std::cmp::Ordering {
    p.act().cmp(&q.act()).then_with(|| {
        p.active()
            .iter()
            .zip(q.active())
            .map(|(x, y)| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

impl FlatRule {
    /// Merges duplicate points, drops zero weights and sorts by active
    /// count, then coordinates.
    pub fn from_terms(anchor: f64, terms: impl IntoIterator<Item = (AnchoredPoint, f64)>) -> Result<Self> {
        let mut merged: HashMap<AnchoredPoint, f64> = HashMap::new();
        for (p, w) in terms {
            if p.anchor().to_bits() != anchor.to_bits() && !(p.anchor() == 0.0 && anchor == 0.0) {
                return Err(Error::AnchorMismatch { left: anchor, right: p.anchor() });
            }
            *merged.entry(p).or_insert(0.0) += w;
        }
        let mut entries: Vec<(AnchoredPoint, f64)> = merged.into_iter().filter(|(_, w)| *w != 0.0).collect();
        entries.sort_by(|a, b| point_order(&a.0, &b.0));
        let (points, weights) = entries.into_iter().unzip();
        Ok(Self { anchor: AnchoredPoint::anchored(anchor).anchor(), points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn apply(&self, f: impl Fn(&AnchoredPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# mdm-flat v1\n");
        let _ = writeln!(out, "anchor {:e}", self.anchor);
        let _ = writeln!(out, "points {}", self.len());
        for (p, w) in self.points.iter().zip(&self.weights) {
            let _ = write!(out, "{w:e}");
            for &(j, x) in p.active() {
                let _ = write!(out, " {j}:{x:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: &str| Error::Parse { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "# mdm-flat v1")) => {}
            Some((n, _)) => return Err(err(n, "expected '# mdm-flat v1'")),
            None => return Err(err(0, "empty flat rule")),
        }
        let (n, line) = lines.next().ok_or_else(|| err(0, "missing anchor"))?;
        let anchor: f64 = line
            .strip_prefix("anchor ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(n, "expected 'anchor <value>'"))?;
        let (n, line) = lines.next().ok_or_else(|| err(0, "missing point count"))?;
        let count: usize = line
            .strip_prefix("points ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(n, "expected 'points <count>'"))?;
        let mut points = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = lines.next().ok_or_else(|| err(0, "missing point line"))?;
            let mut cells = line.split_whitespace();
            let w: f64 = cells.next().and_then(|v| v.parse().ok()).ok_or_else(|| err(n, "bad weight"))?;
            let entries = cells
                .map(|c| {
                    let (j, x) = c.split_once(':').ok_or_else(|| err(n, "expected 'j:x'"))?;
                    Ok((j.parse().map_err(|_| err(n, "bad index"))?, x.parse().map_err(|_| err(n, "bad value"))?))
                })
                .collect::<Result<Vec<(usize, f64)>>>()?;
            points.push(AnchoredPoint::new(anchor, entries)?);
            weights.push(w);
        }
        Ok(Self { anchor, points, weights })
    }
}

/// `A(f) = f(a) + Σ_{u∈𝒜} A_{u,n_u}(f_u)` as a single rule.
///
/// Smolyak points with a coordinate at the anchor are skipped: every
/// anchored component vanishes there.
pub fn assemble(plan: &MdmPlan, family: &QuadFamily) -> Result<FlatRule> {
    if family.anchor.to_bits() != plan.a.to_bits() {
        return Err(Error::AnchorMismatch { left: plan.a, right: family.anchor });
    }
    let mut terms: Vec<(AnchoredPoint, f64)> = vec![(AnchoredPoint::anchored(plan.a), 1.0)];
    for set in &plan.active_set {
        let rule = smolyak_rule(&set.u, set.n_u, family)?;
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            if x.contains(&plan.a) {
                continue;
            }
            let point = AnchoredPoint::new(plan.a, set.u.iter().copied().zip(x.iter().copied()))?;
            for (p, sign) in anchored_component_points(&set.u, &point)? {
                terms.push((p, sign * w));
            }
        }
    }
    FlatRule::from_terms(plan.a, terms)
}

/// Relative accuracy requested for the product of anchor factors.
const BASE_TOL: f64 = 1e-12;

/// Exact worst-case integration error of `rule` on the unit ball of
/// `H(K)`, `K = ∏_j k_j`.
///
/// The inactive factor `∏_j k_j(a, a)` is computed once and shared by all
/// pairs.
pub fn worst_case_error_k(rule: &FlatRule, scheme: &WeightScheme, tol: f64) -> Result<ErrorReport> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if rule.is_empty() {
        return Ok(ErrorReport { err: 1.0, tail_bound: 0.0, cost: 0 });
    }
    let base = anchor_product(scheme, rule.anchor, BASE_TOL.min(tol))?;
    let gram = ProductGram {
        scheme,
        anchor: rule.anchor,
        base: base.value,
        base_rel: base.tail_bound / base.value,
        kernel_of: &|j| j,
    };
    gram.error(&rule.points, &rule.weights, tol)
}
