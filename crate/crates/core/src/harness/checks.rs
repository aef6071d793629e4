//! Invariant suites shared by the `check` command and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hermite::{AnchoredPoint, Kernel1D};
use crate::mdm::anchored_component;
use crate::weights::{
    beta_sequence, c_up_enclosure, decay_estimate, domain_check, Domain, Generator, SequenceSpec, Verdict, WeightScheme,
};

use super::testfn::{eval_test_function, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// `k(x,x) ≤ k(y,y)` whenever `|x| ≤ |y|`, up to both enclosure radii, on
/// `pairs` random pairs from `[−4, 4]²`.
pub fn diagonal_monotonicity(scheme: &WeightScheme, pairs: usize, seed: u64) -> Result<CheckOutcome> {
    let k = Kernel1D::new(scheme, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..pairs {
        let (a, b): (f64, f64) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let (x, y) = if a.abs() <= b.abs() { (a, b) } else { (b, a) };
        let (kx, ky) = (k.eval(x, x)?, k.eval(y, y)?);
        let excess = kx.value - ky.value - kx.tail_bound - ky.tail_bound;
        worst = worst.max(excess);
        if excess > 0.0 {
            violations += 1;
        }
    }
    Ok(CheckOutcome::new(
        format!("diagonal monotonicity {scheme}"),
        violations == 0,
        format!("{pairs} pairs, {violations} violations, max certified excess {worst:.3e}"),
    ))
}

/// `c↑(0) ≤ c↑(a) + 1e-10` on 61 anchors in `[−3, 3]`, and
/// `c↑(0) ≤ 2 + Σ_{ν≥1} α_{2ν,1}^{−1}`.
pub fn anchor_optimality(scheme: &WeightScheme) -> Result<CheckOutcome> {
    let tol = 1e-11;
    let at0 = c_up_enclosure(scheme, 0.0, tol)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..61 {
        let a = -3.0 + 0.1 * i as f64;
        let c = c_up_enclosure(scheme, a, tol)?;
        // Compare certified lower end at 0 against the upper end at a.
        worst = worst.max((at0.value - at0.tail_bound) - (c.value + c.tail_bound));
    }
    let terms = 1usize << 20;
    let even: f64 = (1..=terms).map(|nu| scheme.inv_alpha(2 * nu, 1)).sum::<f64>() + scheme.nu_tail(1, 2 * terms).1;
    let ceiling = 2.0 + even;
    let grid_ok = worst <= 1e-10;
    let ceiling_ok = at0.value - at0.tail_bound <= ceiling;
    Ok(CheckOutcome::new(
        format!("anchor optimality {scheme}"),
        grid_ok && ceiling_ok,
        format!(
            "c_up(0) = {:.12}, max c_up(0) − c_up(a) = {worst:.3e}, ceiling 2 + Σα_2ν^-1 = {ceiling:.12}",
            at0.value
        ),
    ))
}

/// `β_n` and `α_n^{−1/2}` decay at the same rate (within `0.15`) over
/// dyadic `n ∈ [16, 4096]`.
pub fn stechkin_consistency(scheme: &WeightScheme) -> Result<CheckOutcome> {
    let ns: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let mut beta = Vec::with_capacity(ns.len());
    let mut inv = Vec::with_capacity(ns.len());
    for &n in &ns {
        beta.push((n as f64, beta_sequence(scheme, 1, n, 1e-14)?));
        inv.push((n as f64, scheme.inv_alpha(n, 1).sqrt()));
    }
    let (b, a) = (decay_estimate(&beta)?.rate, decay_estimate(&inv)?.rate);
    Ok(CheckOutcome::new(
        format!("Stechkin consistency {scheme}"),
        (b - a).abs() <= 0.15,
        format!("decay(beta) = {b:.4}, decay(alpha^-1/2) = {a:.4}"),
    ))
}

/// `x_j = j^{1/2}` lies in 𝒳 but not in 𝒳↑ for
/// `α_{ν,j} = 2^{3 log2(j+1)·ν}`.
pub fn domain_counterexample() -> Result<CheckOutcome> {
    let scheme = WeightScheme::exponential(Generator::logarithmic_shifted(0.0, 3.0, 1.0), Generator::constant(1.0))?;
    let x = SequenceSpec::Power { c: 1.0, p: 0.5 };
    let full = domain_check(&scheme, &x, Domain::X, 200);
    let up = domain_check(&scheme, &x, Domain::XUp, 200);
    Ok(CheckOutcome::new(
        "domain counterexample x_j = j^(1/2)",
        full.verdict == Verdict::In && up.verdict == Verdict::Out,
        format!("X: {:?}, X_up: {:?}", full.verdict, up.verdict),
    ))
}

/// Reconstruction `Σ_{v⊆u} f_v(x) = f(x)` and annihilation `f_v(x) = 0`
/// when a coordinate of `v` sits at the anchor, for random product
/// functions with `|u| ≤ 4`.
pub fn anchored_decomposition(cases: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rec = 0.0f64;
    let mut worst_ann = 0.0f64;
    for _ in 0..cases {
        let a = rng.random_range(-1.0..1.0);
        let size = rng.random_range(1..=4usize);
        let mut u: Vec<usize> = Vec::with_capacity(size);
        while u.len() < size {
            let j = rng.random_range(1..=10usize);
            if !u.contains(&j) {
                u.push(j);
            }
        }
        u.sort_unstable();
        let nu: Vec<usize> = u.iter().map(|_| rng.random_range(1..=4usize)).collect();
        let c: Vec<f64> = u.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let tf = TestFunction::new(u.clone(), nu, c)?;
        let f = |x: &AnchoredPoint| eval_test_function(&tf, x);
        let x = AnchoredPoint::new(a, u.iter().map(|&j| (j, rng.random_range(-2.5..2.5))))?;
        let fx = f(&x);
        let mut sum = 0.0;
        for mask in 0u64..1 << u.len() {
            let v: Vec<usize> = u.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 1).map(|(_, &j)| j).collect();
            sum += anchored_component(&v, &x.restricted_to(&v), f)?;
            if let Some(&pin) = v.first() {
                // Pin one coordinate of v to the anchor.
                let rest: Vec<usize> = v.iter().copied().filter(|&j| j != pin).collect();
                let pinned = x.restricted_to(&rest);
                worst_ann = worst_ann.max(anchored_component(&v, &pinned, f)?.abs());
            }
        }
        worst_rec = worst_rec.max((sum - fx).abs() / fx.abs().max(1.0));
    }
    Ok(CheckOutcome::new(
        "anchored decomposition",
        worst_rec <= 1e-12 && worst_ann <= 1e-12,
        format!("{cases} cases, max reconstruction error {worst_rec:.3e}, max annihilation residue {worst_ann:.3e}"),
    ))
}

/// The quick invariant suites, in a fixed order.
pub fn all_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let pg = |r: f64| WeightScheme::polynomial_1d(r);
    let eg = WeightScheme::exponential_1d(1.0, 1.0)?;
    let mut out = Vec::new();
    for s in [pg(1.5)?, pg(2.0)?, eg] {
        out.push(diagonal_monotonicity(&s, 1000, seed)?);
    }
    out.push(anchor_optimality(&pg(2.0)?)?);
    for r in [1.5, 2.0, 3.0] {
        out.push(stechkin_consistency(&pg(r)?)?);
    }
    out.push(domain_counterexample()?);
    out.push(anchored_decomposition(100, seed)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for outcome in all_checks(11).unwrap() {
            assert!(outcome.passed, "{}", outcome.line());
        }
    }
}
