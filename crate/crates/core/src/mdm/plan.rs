//! Active-set planning.
//!
//! With `q_j = C1²·γ_j^δ` and `τ = ε²/(L·C0²)`, a set `u` is active when
//! `p_u = ∏_{j∈u} q_j > τ`. Sets are enumerated depth-first as increasing
//! index sequences. Because `q_j` is non-increasing in `j`, the largest
//! product reachable by extending a prefix with indices `≥ j` is
//! `q_j·Q(j+1)` where `Q(j) = ∏_{i≥j} max(q_i, 1)`; a branch is cut as soon
//! as that falls to `τ`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::CompensatedSum;
use crate::weights::{gamma, gamma_power_tail, rho, WeightScheme};

use super::smolyak::smolyak_shape;

/// Upper limit on the number of active sets.
pub const MAX_ACTIVE_SETS: usize = 200_000;
/// Coordinates summed explicitly in the product for `L`.
const L_TERMS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveSet {
    pub u: Vec<usize>,
    pub p_u: f64,
    pub n_u: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdmPlan {
    /// Scheme description in its text form.
    pub scheme_id: String,
    pub eps: f64,
    pub kappa: f64,
    pub delta: f64,
    pub a: f64,
    pub c0: f64,
    pub c1: f64,
    pub l_const: f64,
    pub active_set: Vec<ActiveSet>,
    pub d_eps: usize,
}

/// Planner inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanParams {
    pub eps: f64,
    pub kappa: f64,
    pub delta: f64,
    pub a: f64,
    pub c0: f64,
    pub c1: f64,
}

/// `ρ`, or infinity for custom schemes with finitely many coordinates.
fn effective_rho(scheme: &WeightScheme) -> Result<f64> {
    match scheme.active_coordinates() {
        Some(_) => Ok(f64::INFINITY),
        None => rho(scheme),
    }
}

/// Checks `2κ/ρ < δ < (ρ−1)/ρ` and `ρ > 1`.
pub fn check_admissible(scheme: &WeightScheme, kappa: f64, delta: f64) -> Result<()> {
    if !(kappa > 0.0) {
        return Err(Error::Inadmissible(format!("kappa must be positive, got {kappa}")));
    }
    let rho = effective_rho(scheme)?;
    if !(rho > 1.0) {
        return Err(Error::Inadmissible(format!("rho = {rho} must exceed 1")));
    }
    let (lo, hi) = if rho.is_finite() { (2.0 * kappa / rho, (rho - 1.0) / rho) } else { (0.0, 1.0) };
    if !(delta > lo && delta < hi) {
        return Err(Error::Inadmissible(format!(
            "delta = {delta} outside ({lo}, {hi}) for kappa = {kappa}, rho = {rho}"
        )));
    }
    Ok(())
}

/// Upper bound for `∏_j(1 + γ_j^e) − 1`, with the bracket width.
pub(crate) fn product_minus_one(scheme: &WeightScheme, e: f64, scale: f64) -> Result<(f64, f64)> {
    let explicit = scheme.active_coordinates().unwrap_or(L_TERMS);
    let mut log_sum = CompensatedSum::new();
    for j in 1..=explicit {
        log_sum.add((scale * gamma(scheme, j)?.powf(e)).ln_1p());
    }
    let (tail_lo, tail_hi) = match scheme.active_coordinates() {
        Some(_) => (0.0, 0.0),
        None => {
            let (lo, hi) = gamma_power_tail(scheme, explicit, e)?;
            // ln(1+t) ≥ t − t²/2 and the largest omitted term is γ_{J+1}^e.
            let first = scale * gamma(scheme, explicit + 1)?.powf(e);
            (scale * lo * (1.0 - 0.5 * first), scale * hi)
        }
    };
    if !tail_hi.is_finite() {
        return Err(Error::Divergent("product over coordinates".into()));
    }
    let hi = (log_sum.value() + tail_hi).exp_m1();
    let lo = (log_sum.value() + tail_lo).exp_m1();
    Ok((hi, hi - lo))
}

/// `L = ∏_j(1 + γ_j^{1−δ}) − 1` (upper end of its certified bracket).
pub fn l_constant(scheme: &WeightScheme, delta: f64) -> Result<f64> {
    Ok(product_minus_one(scheme, 1.0 - delta, 1.0)?.0)
}

pub fn plan(scheme: &WeightScheme, params: PlanParams) -> Result<MdmPlan> {
    let PlanParams { eps, kappa, delta, a, c0, c1 } = params;
    if !(eps > 0.0) || !(c0 > 0.0) || !(c1 > 0.0) || !a.is_finite() {
        return Err(invalid(format!("plan needs eps, C0, C1 > 0 and a finite anchor (eps={eps}, C0={c0}, C1={c1})")));
    }
    if scheme.is_univariate() {
        return Err(Error::Unsupported("planning needs an infinite-variate scheme".into()));
    }
    check_admissible(scheme, kappa, delta)?;
    let l_const = l_constant(scheme, delta)?;
    let tau = eps * eps / (l_const * c0 * c0);

    let q = |j: usize| -> Result<f64> { Ok(c1 * c1 * gamma(scheme, j)?.powf(delta)) };
    // Q(j) = ∏_{i≥j} max(q_i, 1). For closed-form schemes q_j is
    // non-increasing, so only the leading coordinates with q_j > 1 enter.
    let finite = scheme.active_coordinates();
    let cut = match finite {
        Some(n) => n + 1,
        None => {
            let mut cut = 1usize;
            while q(cut)? > 1.0 {
                cut += 1;
                if cut > 1 << 20 {
                    return Err(Error::Divergent("C1²·γ_j^δ stays above 1".into()));
                }
            }
            cut
        }
    };
    let mut suffix = vec![1.0; cut + 1];
    for j in (1..cut).rev() {
        suffix[j] = suffix[j + 1] * q(j)?.max(1.0);
    }
    let reach = |j: usize| if j < cut { suffix[j] } else { 1.0 };
    let last = finite.unwrap_or(usize::MAX);

    let mut found: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut stack: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    while let Some((prefix, p)) = stack.pop() {
        let mut j = prefix.last().map_or(1, |&l| l + 1);
        let mut children = Vec::new();
        while j <= last {
            let qj = q(j)?;
            if p * qj * reach(j + 1) <= tau {
                if finite.is_some() {
                    j += 1;
                    continue;
                }
                break;
            }
            let mut u = prefix.clone();
            u.push(j);
            let pu = p * qj;
            if pu > tau {
                found.push((u.clone(), pu));
                if found.len() > MAX_ACTIVE_SETS {
                    return Err(invalid(format!("active set exceeds {MAX_ACTIVE_SETS} members at eps = {eps}")));
                }
            }
            children.push((u, pu));
            j += 1;
        }
        stack.extend(children.into_iter().rev());
    }
    found.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
    let active_set: Vec<ActiveSet> =
        found.into_iter().map(|(u, p_u)| ActiveSet { n_u: budget(p_u, l_const, c0, eps, kappa), u, p_u }).collect();
    let d_eps = active_set.iter().map(|s| s.u.len()).max().unwrap_or(0);
    Ok(MdmPlan { scheme_id: scheme.to_string(), eps, kappa, delta, a, c0, c1, l_const, active_set, d_eps })
}

/// `n_u = ⌊(p_u·L·C0²·ε^{−2})^{1/(2κ)}⌋`.
pub fn budget(p_u: f64, l_const: f64, c0: f64, eps: f64, kappa: f64) -> usize {
    let ratio = p_u * l_const * c0 * c0 / (eps * eps);
    let n = ratio.powf(0.5 / kappa).floor();
    // Guard against a representation of an exact integer just below it.
    let up = n + 1.0;
    if (up.powf(2.0 * kappa) - ratio).abs() <= 8.0 * f64::EPSILON * ratio {
        up as usize
    } else {
        n as usize
    }
}

impl MdmPlan {
    /// `B(ε) = sup_{u∈𝒜}(1 + ln(n_u+1)/max(|u|−1,1))^{(κ+1)(|u|−1)}`.
    pub fn b_eps(&self) -> f64 {
        self.active_set
            .iter()
            .map(|s| smolyak_shape(s.u.len(), s.n_u, self.kappa) * (s.n_u as f64 + 1.0).powf(self.kappa))
            .fold(1.0, f64::max)
    }

    /// `C2 = (C0·L^{1/2})^{1/κ}·exp(2·C1^{1/κ}·Σ_j γ_j^{δ/(2κ)})`.
    pub fn c2(&self, scheme: &WeightScheme) -> Result<f64> {
        let e = self.delta / (2.0 * self.kappa);
        let sum = match scheme.active_coordinates() {
            Some(n) => (1..=n).map(|j| gamma(scheme, j).map(|g| g.powf(e))).sum::<Result<f64>>()?,
            None => gamma_power_tail(scheme, 0, e)?.1,
        };
        Ok((self.c0 * self.l_const.sqrt()).powf(1.0 / self.kappa) * (2.0 * self.c1.powf(1.0 / self.kappa) * sum).exp())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# mdm-plan v1\n");
        let _ = writeln!(out, "scheme {}", self.scheme_id);
        for (key, v) in [
            ("eps", self.eps),
            ("kappa", self.kappa),
            ("delta", self.delta),
            ("a", self.a),
            ("C0", self.c0),
            ("C1", self.c1),
            ("L", self.l_const),
        ] {
            let _ = writeln!(out, "{key} {v:e}");
        }
        let _ = writeln!(out, "sets {}", self.active_set.len());
        for s in &self.active_set {
            let u: Vec<String> = s.u.iter().map(|j| j.to_string()).collect();
            let _ = writeln!(out, "{} {:e} {}", u.join(","), s.p_u, s.n_u);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "# mdm-plan v1")) => {}
            Some((n, other)) => return Err(parse_err(n, format!("unexpected header '{other}'"))),
            None => return Err(parse_err(0, "empty plan".into())),
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing '{key}'")))?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| parse_err(n, format!("expected '{key}'")))?;
            Ok((n, rest.to_string()))
        };
        let num = |(n, s): (usize, String)| -> Result<f64> { s.parse().map_err(|e| parse_err(n, format!("{e}"))) };
        let scheme_id = field("scheme")?.1;
        let eps = num(field("eps")?)?;
        let kappa = num(field("kappa")?)?;
        let delta = num(field("delta")?)?;
        let a = num(field("a")?)?;
        let c0 = num(field("C0")?)?;
        let c1 = num(field("C1")?)?;
        let l_const = num(field("L")?)?;
        let (n, count) = field("sets")?;
        let count: usize = count.parse().map_err(|e| parse_err(n, format!("{e}")))?;
        let mut active_set = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = lines.next().ok_or_else(|| parse_err(0, "missing active set line".into()))?;
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != 3 {
                return Err(parse_err(n, "expected 'indices p_u n_u'".into()));
            }
            let u = cells[0]
                .split(',')
                .map(|c| c.parse::<usize>().map_err(|e| parse_err(n, format!("{e}"))))
                .collect::<Result<Vec<_>>>()?;
            let p_u = cells[1].parse().map_err(|e| parse_err(n, format!("{e}")))?;
            let n_u = cells[2].parse().map_err(|e| parse_err(n, format!("{e}")))?;
            active_set.push(ActiveSet { u, p_u, n_u });
        }
        let d_eps = active_set.iter().map(|s| s.u.len()).max().unwrap_or(0);
        Ok(Self { scheme_id, eps, kappa, delta, a, c0, c1, l_const, active_set, d_eps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Generator;

    /// `r_j = 2 + 3·log2 j`, so `γ_j = j^{−3}` and `ρ = 3`.
    fn scheme() -> WeightScheme {
        WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap()
    }

    fn params(eps: f64) -> PlanParams {
        PlanParams { eps, kappa: 0.8, delta: 0.6, a: 0.0, c0: 0.6, c1: 0.95 }
    }

    #[test]
    fn budget_formula() {
        // p·L·C0²/ε² = 16 with κ = 1 gives n = 4.
        assert_eq!(budget(4.0, 2.0, 2.0, 2.0f64.sqrt(), 1.0), 4);
        assert_eq!(budget(1.0, 1.0, 1.0, 1.0, 0.5), 1);
    }

    #[test]
    fn l_constant_matches_partial_products() {
        let s = scheme();
        let l = l_constant(&s, 0.6).unwrap();
        // ∏_{j≤N}(1 + j^{−1.2}) − 1 increases towards L.
        let partial = |n: usize| (1..=n).map(|j| (j as f64).powf(-1.2).ln_1p()).sum::<f64>().exp_m1();
        assert!(partial(100_000) < l);
        // The omitted tail beyond N is about e^{L}·N^{−0.2}/0.2.
        let n = 100_000f64;
        assert!(l < (partial(100_000).ln_1p() + n.powf(-0.2) / 0.2 + 1e-3).exp_m1());
    }

    #[test]
    fn admissibility() {
        let s = scheme();
        assert!(check_admissible(&s, 0.8, 0.6).is_ok());
        assert!(matches!(check_admissible(&s, 0.8, 0.5), Err(Error::Inadmissible(_))));
        assert!(matches!(check_admissible(&s, 0.8, 0.7), Err(Error::Inadmissible(_))));
        // ρ = 1.5 leaves (2κ/ρ, 1 − 1/ρ) = (0.4, 1/3) empty for κ = 0.3.
        let slow = WeightScheme::polynomial(Generator::logarithmic(2.0, 1.5)).unwrap();
        assert!(check_admissible(&slow, 0.3, 0.35).is_err());
        assert!(check_admissible(&slow, 0.1, 0.2).is_ok());
    }

    #[test]
    fn huge_eps_gives_empty_plan() {
        let s = scheme();
        let p = plan(&s, params(1e3)).unwrap();
        assert!(p.active_set.is_empty());
        assert_eq!(p.d_eps, 0);
        assert_eq!(p.b_eps(), 1.0);
    }

    #[test]
    fn membership_and_monotone_growth() {
        let s = scheme();
        let mut previous: Vec<Vec<usize>> = Vec::new();
        let mut previous_d = 0;
        for eps in [1.0, 0.3, 0.1, 0.03, 0.01] {
            let p = plan(&s, params(eps)).unwrap();
            let threshold = eps * eps / (p.l_const * p.c0 * p.c0);
            for set in &p.active_set {
                assert!(set.p_u > threshold);
                assert!(set.n_u >= 1);
                let expect = p.c1.powi(2 * set.u.len() as i32) * crate::weights::gamma_u(&s, &set.u).unwrap().powf(0.6);
                assert!((set.p_u - expect).abs() <= 1e-12 * expect);
            }
            // Brute force over subsets of {1..12} with at most three elements.
            for a in 1..=12usize {
                for b in a..=12 {
                    for c in b..=12 {
                        let mut u = vec![a, b, c];
                        u.dedup();
                        let pu = p.c1.powi(2 * u.len() as i32) * crate::weights::gamma_u(&s, &u).unwrap().powf(0.6);
                        let listed = p.active_set.iter().any(|x| x.u == u);
                        assert_eq!(listed, pu > threshold, "eps={eps} u={u:?}");
                    }
                }
            }
            let sets: Vec<Vec<usize>> = p.active_set.iter().map(|x| x.u.clone()).collect();
            assert!(previous.iter().all(|u| sets.contains(u)));
            assert!(p.d_eps >= previous_d);
            previous = sets;
            previous_d = p.d_eps;
        }
    }

    #[test]
    fn text_round_trip() {
        let p = plan(&scheme(), params(0.1)).unwrap();
        let back = MdmPlan::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
    }
}
