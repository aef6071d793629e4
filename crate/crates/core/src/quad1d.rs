//! Univariate quadrature for `∫ f dμ0` on Hermite spaces.
//!
//! The base rule `A′_m` on `I = [−1/2, 1/2]` uses `m` equidistant cell
//! midpoints; each cell integrates the interpolant of degree
//! `min(r, m) − 1` through the nearest nodes. The shifted rule
//! `A_{L,m}` places copies of `A′_{m_ℓ}` on `I + ℓ`, `|ℓ| < L`, weighted by
//! the standard normal density.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hermite::{kernel_value, Kernel1D};
use crate::numerics::{gauss_legendre, scaled_normal_tail, std_normal_cdf, std_normal_pdf, CompensatedSum};
use crate::weights::{SchemeKind, WeightScheme};

/// Construction parameters of a scheduled rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleMeta {
    pub r: usize,
    pub shift_range: usize,
    pub m: Vec<usize>,
    pub delta: Option<f64>,
}

/// A quadrature rule `Σ_i w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub meta: Option<RuleMeta>,
}

impl Rule1D {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), found: weights.len() });
        }
        if let Some(&bad) = nodes.iter().chain(&weights).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "rule entry", value: bad });
        }
        Ok(Self { nodes, weights, meta: None })
    }

    /// The rule that always returns zero.
    pub fn zero() -> Self {
        Self { nodes: Vec::new(), weights: Vec::new(), meta: None }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect::<CompensatedSum>().value()
    }

    /// Versioned plain-text form: a header, then one `node weight` pair per
    /// line at 17 significant digits.
    pub fn to_text(&self, scheme: Option<&WeightScheme>) -> String {
        let mut out = String::from("# hermite-rule v1\n");
        if let Some(meta) = &self.meta {
            let _ = writeln!(out, "r {}", meta.r);
            let _ = writeln!(out, "L {}", meta.shift_range);
            if let Some(d) = meta.delta {
                let _ = writeln!(out, "delta {d}");
            }
            let m: Vec<String> = meta.m.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "m {}", m.join(" "));
        }
        if let Some(s) = scheme {
            let _ = writeln!(out, "scheme {s}");
        }
        let _ = writeln!(out, "nodes {}", self.len());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let _ = writeln!(out, "{x:.16e} {w:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "# hermite-rule v1")) => {}
            _ => return Err(Error::Parse { line: 1, message: "expected header '# hermite-rule v1'".into() }),
        }
        let parse_err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (mut r, mut shift_range, mut delta, mut m) = (None, None, None, None);
        let mut count = None;
        for (no, line) in lines.by_ref() {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "r" => r = Some(rest.trim().parse::<usize>().map_err(|e| parse_err(no, e.to_string()))?),
                "L" => shift_range = Some(rest.trim().parse::<usize>().map_err(|e| parse_err(no, e.to_string()))?),
                "delta" => delta = Some(rest.trim().parse::<f64>().map_err(|e| parse_err(no, e.to_string()))?),
                "m" => {
                    m = Some(
                        rest.split_whitespace()
                            .map(|v| v.parse::<usize>().map_err(|e| parse_err(no, e.to_string())))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "scheme" => {}
                "nodes" => {
                    count = Some(rest.trim().parse::<usize>().map_err(|e| parse_err(no, e.to_string()))?);
                    break;
                }
                _ => return Err(parse_err(no, format!("unknown key '{key}'"))),
            }
        }
        let count = count.ok_or_else(|| Error::Parse { line: 0, message: "missing 'nodes' line".into() })?;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for (no, line) in lines.take(count) {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| parse_err(no, "expected 'node weight'".into()))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(no, e.to_string()))
            };
            nodes.push(next()?);
            weights.push(next()?);
        }
        if nodes.len() != count {
            return Err(Error::LengthMismatch { expected: count, found: nodes.len() });
        }
        let mut rule = Rule1D::new(nodes, weights)?;
        if let (Some(r), Some(shift_range), Some(m)) = (r, shift_range, m) {
            rule.meta = Some(RuleMeta { r, shift_range, m, delta });
        }
        Ok(rule)
    }
}

/// Worst-case error with an enclosure radius and the cost of the rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub err: f64,
    pub tail_bound: f64,
    pub cost: usize,
}

impl ErrorReport {
    /// Converts a squared error with uncertainty `delta` into an error and
    /// its enclosure radius, clamping round-off negatives.
    pub(crate) fn from_squared(err2: f64, delta: f64, tol: f64, cost: usize) -> Result<Self> {
        let allowance = 10.0 * tol + delta;
        if err2 < -allowance {
            return Err(Error::NegativeGramForm { value: err2, allowance });
        }
        let e2 = err2.max(0.0);
        let err = e2.sqrt();
        let hi = (e2 + delta).sqrt() - err;
        let lo = err - (e2 - delta).max(0.0).sqrt();
        Ok(Self { err, tail_bound: hi.max(lo), cost })
    }
}

/// Weights of the base rule on `I` with `m` midpoint nodes and local degree
/// `min(r, m) − 1`.
pub fn base_rule(m: usize, r: usize) -> Result<Rule1D> {
    if m == 0 || r == 0 {
        return Err(invalid(format!("base rule needs m >= 1 and r >= 1, got m={m}, r={r}")));
    }
    let h = 1.0 / m as f64;
    let nodes: Vec<f64> = (0..m).map(|i| -0.5 + (i as f64 + 0.5) * h).collect();
    let q = r.min(m);
    let mut weights = vec![0.0; m];
    // On cell i, s = (x − t_i)/h ∈ [−1/2, 1/2]; the stencil consists of the
    // q nodes nearest to t_i, preferring the right neighbour on ties, clamped
    // at the ends.
    let (gx, gw) = gauss_legendre(q.div_ceil(2).max(1));
    for i in 0..m {
        let start = (i as isize - ((q - 1) / 2) as isize).clamp(0, (m - q) as isize) as usize;
        let offsets: Vec<f64> = (start..start + q).map(|k| k as f64 - i as f64).collect();
        for (k, &ok) in offsets.iter().enumerate() {
            // ∫_{−1/2}^{1/2} ℓ_k(s) ds, exact by Gauss–Legendre of sufficient order.
            let mut integral = 0.0;
            for (t, w) in gx.iter().zip(&gw) {
                let s = 0.5 * t;
                let mut l = 1.0;
                for (p, &op) in offsets.iter().enumerate() {
                    if p != k {
                        l *= (s - op) / (ok - op);
                    }
                }
                integral += 0.5 * w * l;
            }
            weights[start + k] += h * integral;
        }
    }
    if let Some(&bad) = weights.iter().find(|&&w| !(w > 0.0)) {
        return Err(invalid(format!("base rule (m={m}, r={r}) has a non-positive weight {bad}")));
    }
    Ok(Rule1D { nodes, weights, meta: None })
}

/// `A_{L,m}(f) = Σ_{|ℓ|<L} A′_{m_ℓ}((f·φ)(· + ℓ))`.
pub fn shifted_rule(shift_range: usize, m_vec: &[usize], r: usize) -> Result<Rule1D> {
    if shift_range == 0 {
        return Err(invalid("shift range L must be at least 1"));
    }
    let expected = 2 * shift_range - 1;
    if m_vec.len() != expected {
        return Err(Error::LengthMismatch { expected, found: m_vec.len() });
    }
    let mut nodes = Vec::with_capacity(m_vec.iter().sum());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (idx, &m) in m_vec.iter().enumerate() {
        let ell = idx as f64 - (shift_range - 1) as f64;
        let base = base_rule(m, r)?;
        for (t, w) in base.nodes.iter().zip(&base.weights) {
            let x = t + ell;
            nodes.push(x);
            weights.push(w * std_normal_pdf(x));
        }
    }
    Ok(Rule1D { nodes, weights, meta: Some(RuleMeta { r, shift_range, m: m_vec.to_vec(), delta: None }) })
}

/// Shift range and per-shift sizes `(L_n, (m_{ℓ,n})_{|ℓ|<L_n})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub shift_range: usize,
    pub m: Vec<usize>,
}

impl Schedule {
    pub fn total(&self) -> usize {
        self.m.iter().sum()
    }
}

/// `L_n = ⌈(r/δ · ln n)^{1/2}⌉`, `m_{ℓ,n} = ⌈n·e^{−δℓ²/(2r)}⌉`.
pub fn schedule(n: usize, r: usize, delta: f64) -> Result<Schedule> {
    if n < 2 || r == 0 {
        return Err(invalid(format!("schedule needs n >= 2 and r >= 1, got n={n}, r={r}")));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(invalid(format!("delta must lie in (0, 1/4), got {delta}")));
    }
    let rf = r as f64;
    let shift_range = ((rf / delta * (n as f64).ln()).sqrt()).ceil() as usize;
    let m = (-(shift_range as isize - 1)..shift_range as isize)
        .map(|ell| {
            let l2 = (ell * ell) as f64;
            ((n as f64) * (-delta * l2 / (2.0 * rf)).exp()).ceil() as usize
        })
        .collect();
    Ok(Schedule { shift_range, m })
}

/// `A_n = A_{L_n, m_n}`.
pub fn build_an(n: usize, r: usize, delta: f64) -> Result<Rule1D> {
    let s = schedule(n, r, delta)?;
    let mut rule = shifted_rule(s.shift_range, &s.m, r)?;
    if let Some(meta) = rule.meta.as_mut() {
        meta.delta = Some(delta);
    }
    Ok(rule)
}

/// Exact worst-case error of `rule` for `∫ · dμ0` on the unit ball of
/// `H(k_j)`.
///
/// Uses `err² = 1 − 2Σ w_i + Σ w_i w_l k(x_i, x_l)`; the first- and
/// second-order polynomial weights have linear-time closed forms.
pub fn worst_case_error_int(rule: &Rule1D, scheme: &WeightScheme, j: usize, tol: f64) -> Result<ErrorReport> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let cost = rule.len();
    if rule.is_empty() {
        return Ok(ErrorReport { err: 1.0, tail_bound: 0.0, cost });
    }
    let r = match scheme.kind() {
        SchemeKind::Polynomial { r } => Some(r.at(j)),
        _ => None,
    };
    let (err2, delta) = match r {
        Some(1.0) => first_order_gram(rule),
        Some(2.0) => second_order_representer(rule),
        _ => generic_gram(rule, scheme, j, tol)?,
    };
    if delta > tol {
        return Err(Error::ToleranceUnreachable { requested: tol, best: delta });
    }
    ErrorReport::from_squared(err2, delta, tol, cost)
}

fn sorted(rule: &Rule1D) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..rule.len()).collect();
    idx.sort_by(|&a, &b| rule.nodes[a].total_cmp(&rule.nodes[b]));
    (idx.iter().map(|&i| rule.nodes[i]).collect(), idx.iter().map(|&i| rule.weights[i]).collect())
}

/// `k(x,y) = 2π P(min) N(max)` with `P(z) = e^{z²/2}Φ(z)`, `N(z) = e^{z²/2}Φ(−z)`.
fn first_order_gram(rule: &Rule1D) -> (f64, f64) {
    let (x, w) = sorted(rule);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut quad = CompensatedSum::new();
    let mut prefix = 0.0; // Σ_{i<l} w_i P(x_i), compensated via the outer sum
    let mut prefix_c = CompensatedSum::new();
    let mut scale = 0.0;
    for (&xl, &wl) in x.iter().zip(&w) {
        let p = scaled_normal_tail(-xl);
        let n = scaled_normal_tail(xl);
        quad.add(two_pi * wl * wl * p * n);
        quad.add(2.0 * two_pi * wl * n * prefix);
        scale += two_pi * wl.abs() * n * (prefix.abs() + wl.abs() * p);
        prefix_c.add(wl * p);
        prefix = prefix_c.value();
    }
    let sum_w: f64 = w.iter().copied().collect::<CompensatedSum>().value();
    let err2 = 1.0 - 2.0 * sum_w + quad.value();
    (err2, 8.0 * f64::EPSILON * (1.0 + 2.0 * sum_w.abs() + scale))
}

/// For `α_ν = (ν+1)²`, `err² = ∫ g² dμ0` with `g = Σ_i w_i k^{[1]}(x_i, ·) − 1`.
///
/// Between consecutive sorted nodes `g(z) = 2π(N(z)·S + P(z)·T) − 1` with
/// `S = Σ_{x_i ≤ z} w_i P(x_i)` and `T = Σ_{x_i > z} w_i N(x_i)`, so the
/// integral splits into smooth pieces. Each piece is integrated with
/// 16-point Gauss–Legendre; the difference to an 8-point rule estimates the
/// quadrature error.
fn second_order_representer(rule: &Rule1D) -> (f64, f64) {
    let (x, w) = sorted(rule);
    let m = x.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let p: Vec<f64> = x.iter().map(|&z| scaled_normal_tail(-z)).collect();
    let nn: Vec<f64> = x.iter().map(|&z| scaled_normal_tail(z)).collect();
    // suffix[k] = Σ_{i≥k} w_i N(x_i)
    let mut suffix = vec![0.0; m + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..m).rev() {
        acc.add(w[k] * nn[k]);
        suffix[k] = acc.value();
    }
    let (g16x, g16w) = gauss_legendre(16);
    let (g8x, g8w) = gauss_legendre(8);
    // Largest magnitude of the terms cancelling in g, for the rounding bound.
    let mut magnitude: f64 = 1.0;
    let mut piece = |s: f64, t: f64, lo: f64, hi: f64, gx: &[f64], gw: &[f64]| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut sum = CompensatedSum::new();
        for (u, wt) in gx.iter().zip(gw) {
            let z = mid + half * u;
            let (a, b) = (scaled_normal_tail(z) * s, scaled_normal_tail(-z) * t);
            magnitude = magnitude.max(1.0 + two_pi * (a.abs() + b.abs()));
            let g = two_pi * (a + b) - 1.0;
            sum.add(half * wt * g * g * std_normal_pdf(z));
        }
        sum.value()
    };
    let mut total = CompensatedSum::new();
    let mut estimate = 0.0;
    let mut integrate = |s: f64, t: f64, lo: f64, hi: f64| {
        if hi <= lo {
            return;
        }
        // Long intervals are cut into panels of width at most 1/2.
        let pieces = (2.0 * (hi - lo)).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let a = lo + k as f64 * step;
            let b = if k + 1 == pieces { hi } else { a + step };
            let fine = piece(s, t, a, b, &g16x, &g16w);
            let coarse = piece(s, t, a, b, &g8x, &g8w);
            total.add(fine);
            estimate += (fine - coarse).abs();
        }
    };
    const REACH: f64 = 12.0;
    integrate(0.0, suffix[0], x[0] - REACH, x[0]);
    let mut prefix = CompensatedSum::new();
    for k in 0..m {
        prefix.add(w[k] * p[k]);
        let hi = if k + 1 < m { x[k + 1] } else { x[m - 1] + REACH };
        integrate(prefix.value(), suffix[k + 1], x[k], hi);
    }
    // Beyond the reach, |g| ≤ 1 + 2π max(|S|·N, |T|·P) and the omitted
    // Gaussian mass is Φ(−REACH) on each side.
    let s_all = prefix.value().abs();
    let bound_g = 1.0 + two_pi * (s_all + suffix[0].abs()) * scaled_normal_tail(REACH).max(0.5);
    let omitted = 2.0 * bound_g * bound_g * std_normal_cdf(-REACH);
    let value = total.value();
    // g carries an absolute error of a few ulps of `magnitude`, so g² is off
    // by at most 2|g|·that, which integrates to 2·that·∫|g|dμ0 ≤ 2·that·√value.
    let rounding = 8.0 * f64::EPSILON * magnitude * value.sqrt() + 4.0 * f64::EPSILON * value;
    (value, estimate + omitted + rounding)
}

fn generic_gram(rule: &Rule1D, scheme: &WeightScheme, j: usize, tol: f64) -> Result<(f64, f64)> {
    let m = rule.len();
    // Each entry may contribute at most tol/m² to the squared error.
    let budget = tol / (m * m) as f64;
    let kernel = Kernel1D::new(scheme, j);
    let mut quad = CompensatedSum::new();
    let mut delta = 0.0;
    let mut scale = 0.0;
    for i in 0..m {
        for l in i..m {
            let (x, y) = (rule.nodes[i], rule.nodes[l]);
            let factor = if i == l { 1.0 } else { 2.0 };
            let ww = factor * rule.weights[i] * rule.weights[l];
            let mut k = kernel.eval(x, y)?;
            if ww.abs() * k.tail_bound > budget {
                k = kernel_value(scheme, j, x, y, budget / ww.abs())?;
            }
            quad.add(ww * k.value);
            delta += ww.abs() * k.tail_bound;
            scale += (ww * k.value).abs();
        }
    }
    let sum_w: f64 = rule.weights.iter().copied().collect::<CompensatedSum>().value();
    let err2 = 1.0 - 2.0 * sum_w + quad.value();
    Ok((err2, delta + 8.0 * f64::EPSILON * (1.0 + 2.0 * sum_w.abs() + scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_column, kernel_eval_1d};
    use crate::numerics::gauss_hermite_normal;
    use crate::weights::{decay_estimate, CustomRow, TailRule};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `err² = Σ_ν α_ν^{−1} (δ_{ν0} − Σ_i w_i h_ν(x_i))²` truncated at `N`,
    /// plus the certified remainder.
    fn spectral_oracle(rule: &Rule1D, scheme: &WeightScheme, n_max: usize) -> (f64, f64) {
        let mut coeff = vec![0.0; n_max + 1];
        let mut envelope = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let col = hermite_column(n_max, x).unwrap();
            for (c, h) in coeff.iter_mut().zip(col) {
                *c += w * h;
            }
            envelope += w.abs() * (0.25 * x * x).exp();
        }
        coeff[0] -= 1.0;
        let err2: f64 = coeff.iter().enumerate().map(|(nu, c)| scheme.inv_alpha(nu, 1) * c * c).sum();
        let tail = envelope * envelope * scheme.nu_tail(1, n_max).1;
        (err2.sqrt(), (err2 + tail).sqrt() - err2.sqrt())
    }

    #[test]
    fn midpoint_special_case() {
        let r = base_rule(1, 1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn base_weights_sum_to_one_and_are_exact() {
        for r in 1..=6 {
            for m in [1usize, 2, 3, 5, 8, 17, 64] {
                let rule = base_rule(m, r).unwrap();
                assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
                // Exact for polynomials of degree < min(r, m).
                for p in 0..r.min(m) {
                    let exact = if p % 2 == 1 { 0.0 } else { 0.5f64.powi(p as i32) / (p as f64 + 1.0) };
                    let q = rule.apply(|x| x.powi(p as i32));
                    assert!((q - exact).abs() < 1e-14, "m={m} r={r} p={p}");
                }
            }
        }
    }

    #[test]
    fn second_order_base_rate() {
        let samples: Vec<(f64, f64)> = (1..=8)
            .map(|k| {
                let m = 1usize << k;
                let err = (1.0 / 12.0 - base_rule(m, 2).unwrap().apply(|x| x * x)).abs();
                (m as f64, err)
            })
            .collect();
        let fit = decay_estimate(&samples).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-6, "{}", fit.rate);
    }

    #[test]
    fn shifted_rule_examples() {
        let r = shifted_rule(1, &[1], 1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_relative_eq!(r.weights[0], 0.3989422804014327, epsilon = 1e-15);
        let wide = shifted_rule(5, &[64; 9], 4).unwrap();
        let mass = std_normal_cdf(4.5) - std_normal_cdf(-4.5);
        assert!((wide.weights.iter().sum::<f64>() - mass).abs() < 1e-6);
        assert!((mass - 0.999993).abs() < 1e-6);
        assert!(wide.weights.iter().all(|&w| w > 0.0));
        assert!(wide.nodes.iter().all(|&x| x.abs() <= 4.5));
        assert!(matches!(shifted_rule(2, &[1, 2], 1), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn schedule_examples() {
        let s = schedule(2, 1, 0.2).unwrap();
        assert_eq!(s.shift_range, 2);
        assert_eq!(s.m, vec![2, 2, 2]);
        assert!(schedule(2, 1, 0.25).is_err());
        assert!(schedule(2, 1, 0.0).is_err());
        for r in 1..=3 {
            let mut ratios = Vec::new();
            for k in 1..=12 {
                let n = 1usize << k;
                let s = schedule(n, r, 0.2).unwrap();
                let half = &s.m[s.shift_range - 1..];
                assert!(half.windows(2).all(|w| w[0] >= w[1]));
                ratios.push(s.total() as f64 / n as f64);
            }
            let max = ratios.iter().cloned().fold(0.0, f64::max);
            assert!(max < 12.0, "r={r}: {ratios:?}");
        }
        let composed = shifted_rule(2, &s.m, 1).unwrap();
        let built = build_an(2, 1, 0.2).unwrap();
        assert_eq!(composed.nodes, built.nodes);
        assert_eq!(composed.weights, built.weights);
        assert_eq!(built.len(), s.total());
    }

    #[test]
    fn error_examples() {
        let pg2 = WeightScheme::polynomial_1d(2.0).unwrap();
        let zero = worst_case_error_int(&Rule1D::zero(), &pg2, 1, 1e-10).unwrap();
        assert_eq!(zero.err, 1.0);
        let single = Rule1D::new(vec![0.0], vec![1.0]).unwrap();
        let rep = worst_case_error_int(&single, &pg2, 1, 1e-10).unwrap();
        let k00 = kernel_eval_1d(&pg2, 1, 0.0, 0.0, 1e-6).unwrap();
        assert!((rep.err.powi(2) - (k00.value - 1.0)).abs() <= k00.tail_bound + 1e-9);
    }

    #[test]
    fn fast_routes_match_generic_gram() {
        let rule = build_an(16, 2, 0.2).unwrap();
        for r in [1.0, 2.0] {
            let s = WeightScheme::polynomial_1d(r).unwrap();
            let fast = worst_case_error_int(&rule, &s, 1, 1e-12).unwrap();
            let (e2, d) = generic_gram(&rule, &s, 1, 1e-12).unwrap();
            assert!((fast.err - e2.sqrt()).abs() <= 1e-8, "r={r}: {} vs {} (±{d})", fast.err, e2.sqrt());
        }
    }

    #[test]
    fn spectral_oracle_on_random_rules() {
        let s = WeightScheme::polynomial_1d(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let nodes: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let weights: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..0.4)).collect();
            let rule = Rule1D::new(nodes, weights).unwrap();
            let rep = worst_case_error_int(&rule, &s, 1, 1e-12).unwrap();
            let (oracle, tail) = spectral_oracle(&rule, &s, 20_000);
            assert!((rep.err - oracle).abs() <= 1e-6 + tail + rep.tail_bound, "{} vs {oracle}", rep.err);
        }
    }

    #[test]
    fn finite_dimensional_space_is_exact() {
        let s = WeightScheme::custom(vec![CustomRow::new(vec![2.0, 5.0, 9.0, 20.0], TailRule::Vanishing)]).unwrap();
        let rule = Rule1D::new(vec![-1.3, -0.2, 0.4, 1.9], vec![0.2, 0.3, 0.3, 0.15]).unwrap();
        let rep = worst_case_error_int(&rule, &s, 1, 1e-13).unwrap();
        let (oracle, tail) = spectral_oracle(&rule, &s, 4);
        assert_eq!(tail, 0.0);
        assert!((rep.err - oracle).abs() <= 1e-10);
    }

    #[test]
    fn gauss_hermite_is_exact_on_polynomial_space() {
        // A 3-point Gauss rule integrates degrees ≤ 5, so on span{h_0..h_4}
        // its worst-case error vanishes.
        let (x, w) = gauss_hermite_normal(3);
        let rule = Rule1D::new(x, w).unwrap();
        let s = WeightScheme::custom(vec![CustomRow::new(vec![2.0, 3.0, 4.0, 5.0], TailRule::Vanishing)]).unwrap();
        assert!(worst_case_error_int(&rule, &s, 1, 1e-13).unwrap().err < 1e-7);
    }

    #[test]
    fn text_round_trip() {
        let rule = build_an(8, 2, 0.2).unwrap();
        let pg2 = WeightScheme::polynomial_1d(2.0).unwrap();
        let text = rule.to_text(Some(&pg2));
        assert!(text.starts_with("# hermite-rule v1\nr 2\nL "));
        let back = Rule1D::from_text(&text).unwrap();
        assert_eq!(back, rule);
        assert!(Rule1D::from_text("nonsense").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn error_is_nonincreasing_along_family(k in 3u32..8) {
            let s = WeightScheme::polynomial_1d(1.0).unwrap();
            let n = 1usize << k;
            let a = worst_case_error_int(&build_an(n, 1, 0.2).unwrap(), &s, 1, 1e-12).unwrap();
            let b = worst_case_error_int(&build_an(2 * n, 1, 0.2).unwrap(), &s, 1, 1e-12).unwrap();
            prop_assert!(b.err <= a.err + a.tail_bound + b.tail_bound);
        }
    }
}
