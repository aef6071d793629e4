//! Univariate and product Hermite kernels.
//!
//! Two evaluation paths exist. [`kernel_eval_1d`] sums the defining series
//! and certifies the omitted tail with Cramér's inequality; it is exact in
//! the sense of its enclosure but needs very many terms for slowly growing
//! weights. [`Kernel1D`] uses closed forms instead — the first-order
//! polynomial kernel in terms of the normal distribution function, the
//! Mehler kernel for exponential weights with `b = 1`, and a Mehler-type
//! integral representation for general polynomial weights — and reports an
//! a-posteriori accuracy estimate.

use std::f64::consts::PI;

use super::point::AnchoredPoint;
use super::polynomial::HermiteStream;
use crate::error::{invalid, Error, Result};
use crate::numerics::{gauss_legendre, scaled_normal_tail, upper_incomplete_gamma_bound, CompensatedSum};
use crate::weights::{SchemeKind, WeightScheme};

/// A kernel value with an enclosure radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvalResult {
    pub value: f64,
    /// The true value lies in `[value − tail_bound, value + tail_bound]`.
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Term cap for the certified series.
pub const DEFAULT_TERM_CAP: usize = 1 << 22;

fn check_args(x: f64, y: f64, tol: f64) -> Result<()> {
    for v in [x, y] {
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "kernel argument", value: v });
        }
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `k_j(x, y) = 1 + Σ_{ν≥1} α_{ν,j}^{−1} h_ν(x) h_ν(y)` by direct summation.
///
/// The tail beyond the last summed degree `N` is bounded by
/// `½(e^{x²/2} + e^{y²/2}) · Σ_{ν>N} α_{ν,j}^{−1}`.
pub fn kernel_eval_1d(scheme: &WeightScheme, j: usize, x: f64, y: f64, tol: f64) -> Result<KernelEvalResult> {
    kernel_eval_1d_capped(scheme, j, x, y, tol, DEFAULT_TERM_CAP)
}

pub fn kernel_eval_1d_capped(
    scheme: &WeightScheme,
    j: usize,
    x: f64,
    y: f64,
    tol: f64,
    cap: usize,
) -> Result<KernelEvalResult> {
    check_args(x, y, tol)?;
    let degree = series_degree(scheme, j, x, y, tol, cap)?;
    let envelope = 0.5 * ((0.5 * x * x).exp() + (0.5 * y * y).exp());
    let tail_bound = match scheme.nu_support(j) {
        Some(m) if degree >= m => 0.0,
        _ => envelope * scheme.nu_tail(j, degree).1,
    };
    let mut hx = HermiteStream::new(x);
    let mut hy = HermiteStream::new(y);
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for nu in 1..=degree {
        hx.advance();
        hy.advance();
        let w = scheme.inv_alpha(nu, j);
        if w != 0.0 {
            acc.add(w * hx.current().1 * hy.current().1);
        }
    }
    Ok(KernelEvalResult { value: acc.value(), tail_bound, terms_used: degree + 1 })
}

/// Smallest summation degree (up to doubling granularity) meeting `tol`.
fn series_degree(scheme: &WeightScheme, j: usize, x: f64, y: f64, tol: f64, cap: usize) -> Result<usize> {
    if let Some(m) = scheme.nu_support(j) {
        return Ok(m);
    }
    let envelope = 0.5 * ((0.5 * x * x).exp() + (0.5 * y * y).exp());
    let bound = |n: usize| envelope * scheme.nu_tail(j, n).1;
    let mut hi = 4usize;
    while bound(hi) > tol {
        if hi >= cap {
            return Err(Error::ToleranceUnreachable { requested: tol, best: bound(cap) });
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    if bound(lo) <= tol {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Quadrature for `(1/Γ(r)) ∫_0^∞ s^{r−1} e^{−s} M_{e^{−s}}(x, y) ds` after
/// the substitution `s = u²`, with panels graded geometrically towards
/// `u = 0` and uniform panels further out.
#[derive(Debug, Clone)]
struct MehlerRule {
    r: f64,
    log_w: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    /// Upper end of the truncated integration range in `s`.
    s_max: f64,
    /// Lower end in `s`; the omitted part is bounded in closed form.
    s_min: f64,
}

impl MehlerRule {
    fn new(r: f64, refine: usize) -> Self {
        let ln_gamma_r = libm::lgamma(r);
        // Omitted head: ≤ s_b^{r−1/2} e^{(x²+y²)/4} / (√2 (r−1/2) Γ(r)).
        let head_scale = std::f64::consts::SQRT_2 * (r - 0.5) * ln_gamma_r.exp();
        let s_min = (1e-18 * head_scale).powf(1.0 / (r - 0.5)).min(1e-4);
        let u_min = s_min.sqrt();
        let gamma_r = ln_gamma_r.exp();
        let mut s_max = r + 10.0;
        while upper_incomplete_gamma_bound(r, s_max) > 1e-18 * gamma_r {
            s_max += 1.0;
        }
        let u_max = s_max.sqrt();

        let mut edges = vec![u_min];
        let mut u = 1.0f64;
        let mut graded = Vec::new();
        while u > u_min {
            graded.push(u);
            u /= 4.0;
        }
        graded.reverse();
        edges.extend(graded);
        let mut u = 1.0 + 0.5;
        while u < u_max {
            edges.push(u);
            u += 0.5;
        }
        edges.push(u_max.max(1.0 + 1e-9));
        edges.dedup();

        let (gx, gw) = gauss_legendre(16);
        let mut log_w = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for pair in edges.windows(2) {
            let pieces = 1usize << refine;
            for p in 0..pieces {
                let lo = pair[0] + (pair[1] - pair[0]) * p as f64 / pieces as f64;
                let hi = pair[0] + (pair[1] - pair[0]) * (p + 1) as f64 / pieces as f64;
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (t, w) in gx.iter().zip(&gw) {
                    let u = mid + half * t;
                    let s = u * u;
                    let tt = (-s).exp();
                    let om = -(-2.0 * s).exp_m1();
                    log_w.push((w * half * 2.0 * u).ln() + (r - 1.0) * s.ln() - s - 0.5 * om.ln() - ln_gamma_r);
                    a.push(tt / (2.0 * (1.0 + tt)));
                    b.push(tt / (2.0 * om));
                }
            }
        }
        Self { r, log_w, a, b, s_max, s_min }
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        let q = x * x + y * y;
        let d2 = (x - y) * (x - y);
        let mut acc = CompensatedSum::new();
        for k in 0..self.log_w.len() {
            let e = self.log_w[k] + self.a[k] * q - self.b[k] * d2;
            if e > -745.0 {
                acc.add(e.exp());
            }
        }
        acc.value()
    }

    /// Bound on the two omitted ends of the integration range.
    fn truncation_bound(&self, x: f64, y: f64) -> f64 {
        let q = x * x + y * y;
        let r = self.r;
        let head =
            self.s_min.powf(r - 0.5) * (0.25 * q).exp() / (std::f64::consts::SQRT_2 * (r - 0.5) * libm::tgamma(r));
        let t = (-self.s_max).exp();
        let m_sup = (1.0 - t * t).powf(-0.5) * (t * q / (2.0 * (1.0 + t))).exp();
        let tail = upper_incomplete_gamma_bound(r, self.s_max) / libm::tgamma(r) * m_sup;
        head + tail
    }
}

#[derive(Debug, Clone)]
enum Route {
    /// `k(x,y) = 2π e^{(x²+y²)/2} Φ(min) Φ(−max)` for `α_ν = ν+1`.
    FirstOrder,
    Mehler {
        coarse: Box<MehlerRule>,
        fine: Box<MehlerRule>,
    },
    /// Mehler kernel with `α_ν = t^{−ν}`.
    ExpClosed {
        t: f64,
    },
    /// Finite sum `Σ_{ν≤M} α_ν^{−1} h_ν(x) h_ν(y)`.
    Finite {
        inv_alpha: Vec<f64>,
    },
    Series {
        scheme: WeightScheme,
        j: usize,
    },
}

/// Absolute accuracy requested from the series fallback.
const SERIES_TOL: f64 = 1e-13;

/// Evaluator for a single coordinate kernel `k_j`.
#[derive(Debug, Clone)]
pub struct Kernel1D {
    route: Route,
}

impl Kernel1D {
    pub fn new(scheme: &WeightScheme, j: usize) -> Self {
        let route = match scheme.kind() {
            SchemeKind::Polynomial { r } => {
                let r = r.at(j);
                if r == 1.0 {
                    Route::FirstOrder
                } else {
                    Route::Mehler { coarse: Box::new(MehlerRule::new(r, 0)), fine: Box::new(MehlerRule::new(r, 1)) }
                }
            }
            SchemeKind::Exponential { r, b } if b.at(j) == 1.0 => Route::ExpClosed { t: (-r.at(j)).exp2() },
            SchemeKind::Custom { .. } if scheme.nu_support(j).is_some() => {
                let m = scheme.nu_support(j).unwrap_or(0);
                Route::Finite { inv_alpha: (0..=m).map(|nu| scheme.inv_alpha(nu, j)).collect() }
            }
            _ => Route::Series { scheme: scheme.clone(), j },
        };
        Self { route }
    }

    /// Short description of the evaluation route.
    pub fn route_name(&self) -> &'static str {
        match self.route {
            Route::FirstOrder => "closed-form first order",
            Route::Mehler { .. } => "Mehler integral",
            Route::ExpClosed { .. } => "Mehler closed form",
            Route::Finite { .. } => "finite sum",
            Route::Series { .. } => "certified series",
        }
    }

    /// Kernel value without an accuracy estimate.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match &self.route {
            Route::FirstOrder => first_order(x, y),
            Route::Mehler { coarse, .. } => coarse.value(x, y),
            Route::ExpClosed { t } => mehler_closed(*t, x, y),
            Route::Finite { inv_alpha } => finite_sum(inv_alpha, x, y),
            Route::Series { scheme, j } => kernel_eval_1d(scheme, *j, x, y, SERIES_TOL)?.value,
        })
    }

    /// Kernel value with an accuracy estimate in `tail_bound`.
    pub fn eval(&self, x: f64, y: f64) -> Result<KernelEvalResult> {
        check_args(x, y, 1.0)?;
        let rounding = |v: f64, scale: f64| 32.0 * f64::EPSILON * (1.0 + scale) * v.abs();
        Ok(match &self.route {
            Route::FirstOrder => {
                let v = first_order(x, y);
                KernelEvalResult { value: v, tail_bound: rounding(v, x * x + y * y), terms_used: 1 }
            }
            Route::Mehler { coarse, fine } => {
                let v = coarse.value(x, y);
                let w = fine.value(x, y);
                let tail = (v - w).abs() + coarse.truncation_bound(x, y) + rounding(v, x * x + y * y);
                KernelEvalResult { value: v, tail_bound: tail, terms_used: coarse.log_w.len() }
            }
            Route::ExpClosed { t } => {
                let v = mehler_closed(*t, x, y);
                KernelEvalResult { value: v, tail_bound: rounding(v, (x * x + y * y) / (1.0 - t)), terms_used: 1 }
            }
            Route::Finite { inv_alpha } => {
                let v = finite_sum(inv_alpha, x, y);
                let envelope = 0.5 * ((0.5 * x * x).exp() + (0.5 * y * y).exp());
                let mass: f64 = inv_alpha.iter().sum();
                let tail = 4.0 * f64::EPSILON * inv_alpha.len() as f64 * envelope * mass;
                KernelEvalResult { value: v, tail_bound: tail, terms_used: inv_alpha.len() }
            }
            Route::Series { scheme, j } => kernel_eval_1d(scheme, *j, x, y, SERIES_TOL)?,
        })
    }
}

fn first_order(x: f64, y: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    2.0 * PI * scaled_normal_tail(-lo) * scaled_normal_tail(hi)
}

fn mehler_closed(t: f64, x: f64, y: f64) -> f64 {
    let om = 1.0 - t * t;
    let e = t * (x * x + y * y) / (2.0 * (1.0 + t)) - t * (x - y) * (x - y) / (2.0 * om);
    e.exp() / om.sqrt()
}

fn finite_sum(inv_alpha: &[f64], x: f64, y: f64) -> f64 {
    let mut hx = HermiteStream::new(x);
    let mut hy = HermiteStream::new(y);
    let mut acc = CompensatedSum::new();
    for (nu, w) in inv_alpha.iter().enumerate() {
        if nu > 0 {
            hx.advance();
            hy.advance();
        }
        acc.add(w * hx.current().1 * hy.current().1);
    }
    acc.value()
}

/// Most accurate available value of `k_j(x, y)` with an enclosure radius of
/// at most `tol`.
///
/// Short certified series are preferred; otherwise the closed-form route of
/// [`Kernel1D`] is used.
pub fn kernel_value(scheme: &WeightScheme, j: usize, x: f64, y: f64, tol: f64) -> Result<KernelEvalResult> {
    check_args(x, y, tol)?;
    if let Ok(res) = kernel_eval_1d_capped(scheme, j, x, y, tol, 256) {
        return Ok(res);
    }
    let res = Kernel1D::new(scheme, j).eval(x, y)?;
    if res.tail_bound <= tol {
        return Ok(res);
    }
    match kernel_eval_1d(scheme, j, x, y, tol) {
        Ok(series) => Ok(series),
        Err(_) => Err(Error::ToleranceUnreachable { requested: tol, best: res.tail_bound }),
    }
}

/// `∏_{j≥1} k_j(a, a)` with a two-sided relative certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorProduct {
    pub value: f64,
    pub tail_bound: f64,
    /// Number of factors evaluated explicitly.
    pub factors: usize,
}

/// Cap on the number of explicitly evaluated inactive factors.
pub const FACTOR_CAP: usize = 10_000_000;

/// Evaluates the infinite product `∏_j k_j(a, a)`.
///
/// Factors are computed up to `J`, chosen so that the analytic remainder
/// `e^{a²/2} Σ_{j>J} Σ_ν α_{ν,j}^{−1}` of the log-product is below
/// `tol/4`.
pub fn anchor_product(scheme: &WeightScheme, a: f64, tol: f64) -> Result<AnchorProduct> {
    if scheme.is_univariate() {
        return Err(Error::Unsupported("infinite products need an infinite-variate scheme".into()));
    }
    check_args(a, a, tol)?;
    let envelope = (0.5 * a * a).exp();
    let budget = 0.25 * tol;
    let big_j = match scheme.active_coordinates() {
        Some(rows) => rows,
        None => {
            let mut hi = 1usize;
            while envelope * scheme.mass_tail(hi)? > budget {
                if hi >= FACTOR_CAP {
                    return Err(Error::ToleranceUnreachable {
                        requested: tol,
                        best: envelope * scheme.mass_tail(FACTOR_CAP)?,
                    });
                }
                hi = (hi * 2).min(FACTOR_CAP);
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if envelope * scheme.mass_tail(mid)? <= budget {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    let remainder = match scheme.active_coordinates() {
        Some(_) => 0.0,
        None => envelope * scheme.mass_tail(big_j)?,
    };
    let mut log_sum = CompensatedSum::new();
    let mut rel_err = 0.0;
    for j in 1..=big_j {
        let f_tol = factor_tolerance(tol, j);
        let k = kernel_value(scheme, j, a, a, f_tol)?;
        log_sum.add(k.value.ln());
        rel_err += k.tail_bound / (k.value - k.tail_bound);
    }
    let center = log_sum.value() + 0.5 * remainder;
    let half_width = 0.5 * remainder + rel_err + 4.0 * f64::EPSILON * (big_j as f64).sqrt();
    let value = center.exp();
    Ok(AnchorProduct { value, tail_bound: value * half_width.exp_m1(), factors: big_j })
}

/// Per-factor tolerance `tol · 6/(4π² j²)`, summing to at most `tol/4`.
fn factor_tolerance(tol: f64, j: usize) -> f64 {
    tol * 6.0 / (4.0 * PI * PI * (j as f64).powi(2))
}

/// `K(x, y) = ∏_j k_j(x_j, y_j)` for anchored points sharing an anchor.
pub fn kernel_eval_product(
    scheme: &WeightScheme,
    x: &AnchoredPoint,
    y: &AnchoredPoint,
    tol: f64,
) -> Result<KernelEvalResult> {
    if x.anchor().to_bits() != y.anchor().to_bits() {
        return Err(Error::AnchorMismatch { left: x.anchor(), right: y.anchor() });
    }
    let a = x.anchor();
    let tail = anchor_product(scheme, a, 0.5 * tol)?;
    let mut coords: Vec<usize> = x.active_indices().chain(y.active_indices()).collect();
    coords.sort_unstable();
    coords.dedup();
    let mut ratio = 1.0;
    let mut rel = tail.tail_bound / tail.value;
    for (idx, &j) in coords.iter().enumerate() {
        let f_tol = factor_tolerance(0.5 * tol, idx + 1) / tail.value.max(1.0);
        let num = kernel_value(scheme, j, x.coordinate(j), y.coordinate(j), f_tol)?;
        let den = kernel_value(scheme, j, a, a, f_tol)?;
        ratio *= num.value / den.value;
        rel += num.tail_bound / num.value.abs().max(f64::MIN_POSITIVE) + den.tail_bound / den.value;
    }
    let value = tail.value * ratio;
    let tail_bound = value.abs() * rel.min(1e300) + 8.0 * f64::EPSILON * value.abs() * coords.len() as f64;
    if !(tail_bound <= tol) {
        return Err(Error::ToleranceUnreachable { requested: tol, best: tail_bound });
    }
    Ok(KernelEvalResult { value, tail_bound, terms_used: tail.factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{CustomRow, Generator, TailRule};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pg(r: f64) -> WeightScheme {
        WeightScheme::polynomial_1d(r).unwrap()
    }

    /// Brute-force truncated sum with a fixed number of terms.
    fn brute(scheme: &WeightScheme, x: f64, y: f64, terms: usize) -> f64 {
        let mut hx = HermiteStream::new(x);
        let mut hy = HermiteStream::new(y);
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for nu in 1..terms {
            hx.advance();
            hy.advance();
            acc.add(scheme.inv_alpha(nu, 1) * hx.current().1 * hy.current().1);
        }
        acc.value()
    }

    #[test]
    fn pg2_at_origin_matches_long_direct_sum() {
        let s = pg(2.0);
        let res = kernel_eval_1d(&s, 1, 0.0, 0.0, 1e-5).unwrap();
        let oracle = brute(&s, 0.0, 0.0, 100_000);
        assert!((res.value - oracle).abs() <= res.tail_bound + 1e-5);
        assert!(res.tail_bound <= 1e-5);
        // The closed route agrees with both.
        let exact = Kernel1D::new(&s, 1).eval(0.0, 0.0).unwrap();
        assert!((exact.value - oracle).abs() < 2e-5);
        assert!((exact.value - res.value).abs() <= res.tail_bound + exact.tail_bound);
    }

    #[test]
    fn closed_first_order_matches_series() {
        // k(0,0) = Σ_ν h_{2ν}(0)²/(2ν+1) = arcsin(1) = π/2.
        let k = Kernel1D::new(&pg(1.0), 1);
        assert_relative_eq!(k.value(0.0, 0.0).unwrap(), PI / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn mehler_matches_closed_first_order() {
        // Force the integral route at r = 1 and compare with the closed form.
        let rule = MehlerRule::new(1.0, 0);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.7), (1.2, 1.5), (2.0, 2.0), (-4.0, 3.5), (6.0, 6.0), (8.0, 7.9)] {
            let closed = first_order(x, y);
            assert_relative_eq!(rule.value(x, y), closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn mehler_matches_series_for_fast_decay() {
        // r = 6.5: the certified series converges quickly near the origin.
        let s = pg(6.5);
        let k = Kernel1D::new(&s, 1);
        for &(x, y) in &[(0.0, 0.0), (0.5, -1.0), (1.5, 1.5), (2.5, -0.5)] {
            let series = kernel_eval_1d(&s, 1, x, y, 1e-13).unwrap();
            let exact = k.eval(x, y).unwrap();
            assert!(
                (series.value - exact.value).abs() <= series.tail_bound + exact.tail_bound + 1e-14,
                "x={x} y={y}: {} vs {}",
                series.value,
                exact.value
            );
        }
    }

    #[test]
    fn exponential_closed_form_matches_series() {
        let s = WeightScheme::exponential_1d(1.0, 1.0).unwrap();
        let k = Kernel1D::new(&s, 1);
        for &(x, y) in &[(0.0, 0.0), (1.0, -2.0), (3.0, 3.0)] {
            let series = kernel_eval_1d(&s, 1, x, y, 1e-12).unwrap();
            assert!((series.value - k.value(x, y).unwrap()).abs() <= series.tail_bound + 1e-13);
        }
    }

    #[test]
    fn finite_custom_kernel_is_exact_sum() {
        let s = WeightScheme::custom(vec![CustomRow::new(vec![2.0, 4.0], TailRule::Vanishing)]).unwrap();
        let res = kernel_eval_1d(&s, 1, 0.5, -1.0, 1e-12).unwrap();
        let h2 = |x: f64| (x * x - 1.0) / 2f64.sqrt();
        let expected = 1.0 + -0.5 * 0.5 + 0.25 * h2(0.5) * h2(-1.0);
        assert_relative_eq!(res.value, expected, epsilon = 1e-15);
        assert_eq!(res.tail_bound, 0.0);
        // Beyond the table the kernel is identically one.
        assert_eq!(kernel_eval_1d(&s, 2, 0.5, -1.0, 1e-12).unwrap().value, 1.0);
    }

    #[test]
    fn unreachable_tolerance_reports_best_bound() {
        let err = kernel_eval_1d_capped(&pg(1.5), 1, 3.0, 3.0, 1e-12, 1024).unwrap_err();
        match err {
            Error::ToleranceUnreachable { best, requested } => {
                assert!(best > requested);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn anchored_product_matches_partial_product() {
        let s = WeightScheme::polynomial(Generator::affine(2.0, 3.0)).unwrap();
        let prod = anchor_product(&s, 0.0, 1e-12).unwrap();
        let mut direct = 1.0;
        for j in 1..=1000 {
            direct *= kernel_value(&s, j, 0.0, 0.0, 1e-13).unwrap().value;
        }
        assert!((prod.value - direct).abs() <= prod.tail_bound + 1e-12);
    }

    #[test]
    fn product_factorizes_over_single_active_coordinate() {
        let s = WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap();
        let x = AnchoredPoint::new(0.0, [(2, 1.3)]).unwrap();
        let y = AnchoredPoint::anchored(0.0);
        let kxy = kernel_eval_product(&s, &x, &y, 1e-9).unwrap();
        let tail = anchor_product(&s, 0.0, 1e-11).unwrap();
        let k2 = kernel_value(&s, 2, 1.3, 0.0, 1e-13).unwrap().value;
        let k2aa = kernel_value(&s, 2, 0.0, 0.0, 1e-13).unwrap().value;
        assert_relative_eq!(kxy.value, k2 * tail.value / k2aa, max_relative = 1e-9);
        let yx = kernel_eval_product(&s, &y, &x, 1e-9).unwrap();
        assert!((kxy.value - yx.value).abs() <= 2e-9);
        assert!(kernel_eval_product(&s, &x, &AnchoredPoint::anchored(1.0), 1e-9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn series_is_symmetric_and_diagonal_at_least_one(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let s = pg(3.0);
            let tol = 1e-8;
            let kxy = kernel_eval_1d(&s, 1, x, y, tol).unwrap();
            let kyx = kernel_eval_1d(&s, 1, y, x, tol).unwrap();
            prop_assert!((kxy.value - kyx.value).abs() <= 2.0 * tol);
            let kxx = kernel_eval_1d(&s, 1, x, x, tol).unwrap();
            prop_assert!(kxx.value >= 1.0 - tol);
        }

        #[test]
        fn enclosure_contains_refined_value(x in -2.5f64..2.5, y in -2.5f64..2.5) {
            let s = WeightScheme::exponential_1d(0.8, 0.7).unwrap();
            let coarse = kernel_eval_1d(&s, 1, x, y, 1e-6).unwrap();
            let fine = kernel_eval_1d(&s, 1, x, y, 1e-7).unwrap();
            prop_assert!((coarse.value - fine.value).abs() <= coarse.tail_bound);
            prop_assert!(coarse.tail_bound <= 1e-6);
        }

        #[test]
        fn mehler_estimate_encloses_fine_value(x in -5.0f64..5.0, y in -5.0f64..5.0, r in 1.2f64..7.0) {
            let k = Kernel1D::new(&pg(r), 1);
            let res = k.eval(x, y).unwrap();
            prop_assert!(res.tail_bound <= 1e-10 * res.value.abs().max(1.0));
        }
    }
}
