//! Fast pairwise values of the `α_ν = (ν+1)²` kernel on a fixed point set.
//!
//! The kernel is the Green's function of `(I + N)²` for the
//! Ornstein–Uhlenbeck number operator `N`, i.e. the `μ0`-composition of the
//! first-order kernel with itself. Writing `P(z) = e^{z²/2}Φ(z)` and
//! `N(z) = e^{z²/2}Φ(−z)`, for `x ≤ y`
//!
//! ```text
//! k(x,y) = 4π² [ N(x)N(y)·F1(x) + P(x)N(y)·(G(y) − G(x)) + P(x)P(y)·F3(y) ]
//! F1(x) = ∫_{−∞}^x P²φ,   G' = PNφ,   F3(y) = ∫_y^∞ N²φ.
//! ```
//!
//! The three integrals are accumulated once along the sorted points, after
//! which every pair costs O(1).

use std::f64::consts::PI;

use crate::numerics::{gauss_legendre, scaled_normal_tail, std_normal_pdf, CompensatedSum};

const PANEL: f64 = 0.25;
/// Distance beyond the extreme points where the outer integrands are
/// negligible (their decay is at least `φ(z)/z²`).
const REACH: f64 = 12.0;

#[derive(Debug, Clone)]
pub struct GreenPg2 {
    p: Vec<f64>,
    n: Vec<f64>,
    f1: Vec<f64>,
    g: Vec<f64>,
    f3: Vec<f64>,
    x: Vec<f64>,
}

fn p_fn(z: f64) -> f64 {
    scaled_normal_tail(-z)
}

fn n_fn(z: f64) -> f64 {
    scaled_normal_tail(z)
}

struct Integrator {
    gx: Vec<f64>,
    gw: Vec<f64>,
}

impl Integrator {
    fn new() -> Self {
        let (gx, gw) = gauss_legendre(16);
        Self { gx, gw }
    }

    fn integrate(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let pieces = ((hi - lo) / PANEL).ceil().max(1.0) as usize;
        let h = (hi - lo) / pieces as f64;
        let mut acc = CompensatedSum::new();
        for k in 0..pieces {
            let a = lo + k as f64 * h;
            let mid = a + 0.5 * h;
            for (t, w) in self.gx.iter().zip(&self.gw) {
                acc.add(0.5 * h * w * f(mid + 0.5 * h * t));
            }
        }
        acc.value()
    }
}

impl GreenPg2 {
    /// Precomputes the integrals at every point of `x` (any order,
    /// duplicates allowed).
    pub fn new(x: &[f64]) -> Self {
        let m = x.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let quad = Integrator::new();
        let f1_int = |z: f64| p_fn(z).powi(2) * std_normal_pdf(z);
        let g_int = |z: f64| p_fn(z) * n_fn(z) * std_normal_pdf(z);
        let f3_int = |z: f64| n_fn(z).powi(2) * std_normal_pdf(z);

        let mut f1 = vec![0.0; m];
        let mut g = vec![0.0; m];
        let mut f3 = vec![0.0; m];
        if m > 0 {
            let first = x[order[0]];
            let last = x[order[m - 1]];
            let mut acc1 = quad.integrate(f1_int, first - REACH, first);
            let mut acc_g = 0.0;
            let mut prev = first;
            for &i in &order {
                acc1 += quad.integrate(f1_int, prev, x[i]);
                acc_g += quad.integrate(g_int, prev, x[i]);
                f1[i] = acc1;
                g[i] = acc_g;
                prev = x[i];
            }
            let mut acc3 = quad.integrate(f3_int, last, last + REACH);
            let mut next = last;
            for &i in order.iter().rev() {
                acc3 += quad.integrate(f3_int, x[i], next);
                f3[i] = acc3;
                next = x[i];
            }
        }
        Self {
            p: x.iter().map(|&z| p_fn(z)).collect(),
            n: x.iter().map(|&z| n_fn(z)).collect(),
            f1,
            g,
            f3,
            x: x.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Kernel value between the `i`-th and `l`-th stored points.
    pub fn value(&self, i: usize, l: usize) -> f64 {
        let (i, l) = if self.x[i] <= self.x[l] { (i, l) } else { (l, i) };
        4.0 * PI
            * PI
            * (self.n[i] * self.n[l] * self.f1[i]
                + self.p[i] * self.n[l] * (self.g[l] - self.g[i])
                + self.p[i] * self.p[l] * self.f3[l])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::Kernel1D;
    use crate::weights::WeightScheme;

    #[test]
    fn matches_integral_route() {
        let pts = [-4.0, -1.3, -0.2, 0.0, 0.0, 0.7, 2.5, 5.5];
        let table = GreenPg2::new(&pts);
        let k = Kernel1D::new(&WeightScheme::polynomial_1d(2.0).unwrap(), 1);
        for i in 0..pts.len() {
            for l in 0..pts.len() {
                let exact = k.eval(pts[i], pts[l]).unwrap();
                let v = table.value(i, l);
                assert!(
                    (v - exact.value).abs() <= 1e-12 * exact.value + exact.tail_bound,
                    "({}, {}): {v} vs {}",
                    pts[i],
                    pts[l],
                    exact.value
                );
            }
        }
    }

    #[test]
    fn matches_high_precision_mehler_integral() {
        // 40-digit values of ∫_0^1 (−ln t) M_t(x, y) dt, M_t the Mehler kernel.
        let cases = [
            (0.0, 0.0, 1.0887930451518010653),
            (0.3, 6.0, 0.60361647776776746654),
            (-0.7, 1.5, 0.69757798515464437724),
            (-2.25, 3.0, 0.33041274673279384156),
            (-4.5, -4.5, 1221.5618335278417579),
            (6.0, -9.5, 0.079046479050246341639),
            (-8.0, -9.5, 4038319722244.9839228),
            (9.5, -9.5, 0.055432898876193766236),
        ];
        let pts: Vec<f64> = cases.iter().flat_map(|&(x, y, _)| [x, y]).collect();
        let table = GreenPg2::new(&pts);
        for (c, &(x, y, exact)) in cases.iter().enumerate() {
            let v = table.value(2 * c, 2 * c + 1);
            assert!((v - exact).abs() <= 5e-14 * exact, "({x}, {y}): {v} vs {exact}");
        }
    }

    #[test]
    fn origin_value() {
        // k(0,0) = Σ_ν h_{2ν}(0)²/(2ν+1)² with h_{2ν}(0)² = C(2ν,ν)·4^{−ν}.
        let table = GreenPg2::new(&[0.0]);
        let mut acc = 1.0;
        let mut h2 = 1.0; // h_{2ν}(0)²
        for nu in 1..200_000usize {
            h2 *= (2 * nu - 1) as f64 / (2 * nu) as f64;
            acc += h2 / ((2 * nu + 1) as f64).powi(2);
        }
        // h_{2ν}(0)² ≤ 1/√(πν) so the remainder is below ∫ t^{−5/2}/(4√π) dt
        let rem = (200_000f64).powf(-1.5) / (6.0 * PI.sqrt());
        assert!((table.value(0, 0) - acc).abs() <= rem + 1e-13);
    }
}
