//! The `L2`-approximation variant: Smolyak-tensorized least-squares
//! operators on the anchored components.
//!
//! Results are Hermite expansions `Σ_ν c_ν ∏_j h_{ν_j}(x_j)`, keyed by the
//! sorted `(j, ν_j)` pairs with `ν_j > 0`. Their `L2(μ)` distances are
//! plain coefficient distances because the products are orthonormal.

use std::collections::{BTreeMap, HashMap};

use crate::approx1d::{build_ls_approx, Approx1D};
use crate::error::{invalid, Result};
use crate::hermite::{hermite_unchecked, AnchoredPoint};
use crate::weights::WeightScheme;

use super::decomposition::anchored_component_points;
use super::plan::MdmPlan;
use super::smolyak::select_levels;

/// Sparse tensor-Hermite expansion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HermiteExpansion {
    pub coefficients: BTreeMap<Vec<(usize, usize)>, f64>,
}

impl HermiteExpansion {
    pub fn add(&mut self, key: Vec<(usize, usize)>, value: f64) {
        *self.coefficients.entry(key).or_insert(0.0) += value;
    }

    pub fn eval(&self, x: &AnchoredPoint) -> f64 {
        self.coefficients
            .iter()
            .map(|(key, c)| c * key.iter().map(|&(j, nu)| hermite_unchecked(nu, x.coordinate(j))).product::<f64>())
            .sum()
    }

    /// `‖self − other‖_{L2(μ)}`.
    pub fn l2_distance(&self, other: &HermiteExpansion) -> f64 {
        let mut sum = 0.0;
        for (key, c) in &self.coefficients {
            let d = c - other.coefficients.get(key).copied().unwrap_or(0.0);
            sum += d * d;
        }
        for (key, c) in &other.coefficients {
            if !self.coefficients.contains_key(key) {
                sum += c * c;
            }
        }
        sum.sqrt()
    }
}

/// Level `i ≥ 1`: least squares with `2^{i+1}` samples onto `2^{i−1}`
/// polynomials, seeded with `seed + i`.
#[derive(Debug, Clone)]
pub struct ApproxFamily {
    levels: Vec<Approx1D>,
}

impl ApproxFamily {
    pub fn new(scheme: &WeightScheme, seed: u64, max_level: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(invalid("approximation family needs at least one level"));
        }
        let levels = (1..=max_level)
            .map(|i| build_ls_approx(1 << (i + 1), 1 << (i - 1), scheme, 1, seed.wrapping_add(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { levels })
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &Approx1D {
        &self.levels[i - 1]
    }
}

/// Smolyak approximation of `g` on the sorted set `u` with at most `n`
/// samples; returns coefficients indexed by `(ν_j)_{j∈u}` and the number of
/// samples.
pub fn smolyak_approx(
    u: &[usize],
    n: usize,
    family: &ApproxFamily,
    mut g: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<(HashMap<Vec<usize>, f64>, usize)> {
    let d = u.len();
    let levels = select_levels(d, n, family.max_level(), |l| family.level(l).len());
    let mut out: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut samples = 0;
    for (k, c) in &levels.terms {
        let ops: Vec<&Approx1D> = k.iter().map(|&l| family.level(l)).collect();
        let shape: Vec<usize> = ops.iter().map(|o| o.len()).collect();
        let total: usize = shape.iter().product();
        samples += total;
        // Values on the grid, row-major with the last axis fastest.
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let x: Vec<f64> = (0..d).map(|t| ops[t].nodes[idx[t]]).collect();
            values.push(g(&x)?);
            for t in (0..d).rev() {
                idx[t] += 1;
                if idx[t] < shape[t] {
                    break;
                }
                idx[t] = 0;
            }
        }
        // Apply the output maps axis by axis.
        let mut dims = shape.clone();
        for t in 0..d {
            let map = &ops[t].output_map;
            let (outer, inner): (usize, usize) = (dims[..t].iter().product(), dims[t + 1..].iter().product());
            let (from, to) = (dims[t], map.nrows());
            let mut next = vec![0.0; outer * to * inner];
            for o in 0..outer {
                for nu in 0..to {
                    for i in 0..from {
                        let m = map[(nu, i)];
                        if m == 0.0 {
                            continue;
                        }
                        let src = (o * from + i) * inner;
                        let dst = (o * to + nu) * inner;
                        for r in 0..inner {
                            next[dst + r] += m * values[src + r];
                        }
                    }
                }
            }
            values = next;
            dims[t] = to;
        }
        let mut nu = vec![0usize; d];
        for v in values {
            *out.entry(nu.clone()).or_insert(0.0) += *c as f64 * v;
            for t in (0..d).rev() {
                nu[t] += 1;
                if nu[t] < dims[t] {
                    break;
                }
                nu[t] = 0;
            }
        }
    }
    Ok((out, samples))
}

/// Result of [`mdm_approximate`].
#[derive(Debug, Clone)]
pub struct ApproxOutcome {
    pub expansion: HermiteExpansion,
    /// Distinct points at which `f` was evaluated.
    pub points: Vec<AnchoredPoint>,
}

/// `f(a) + Σ_{u∈𝒜} S_{u,n_u}(f_u)` as a Hermite expansion.
pub fn mdm_approximate(
    plan: &MdmPlan,
    family: &ApproxFamily,
    f: impl Fn(&AnchoredPoint) -> f64,
) -> Result<ApproxOutcome> {
    let mut cache: HashMap<AnchoredPoint, f64> = HashMap::new();
    let mut order: Vec<AnchoredPoint> = Vec::new();
    let mut eval = |p: AnchoredPoint| -> f64 {
        if let Some(&v) = cache.get(&p) {
            return v;
        }
        let v = f(&p);
        cache.insert(p.clone(), v);
        order.push(p);
        v
    };
    let mut expansion = HermiteExpansion::default();
    expansion.add(Vec::new(), eval(AnchoredPoint::anchored(plan.a)));
    for set in &plan.active_set {
        let u = &set.u;
        let (coeffs, _) = smolyak_approx(u, set.n_u, family, |x| {
            let point = AnchoredPoint::new(plan.a, u.iter().copied().zip(x.iter().copied()))?;
            // Points on anchor lines are outside the support of f_u.
            if point.act() < u.len() {
                return Ok(0.0);
            }
            Ok(anchored_component_points(u, &point)?.into_iter().map(|(p, s)| s * eval(p)).sum())
        })?;
        let mut sorted: Vec<(Vec<usize>, f64)> = coeffs.into_iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (nu, c) in sorted {
            let key: Vec<(usize, usize)> = u.iter().copied().zip(nu).filter(|&(_, n)| n > 0).collect();
            expansion.add(key, c);
        }
    }
    Ok(ApproxOutcome { expansion, points: order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdm::plan::{plan, PlanParams};
    use crate::weights::Generator;

    fn scheme() -> WeightScheme {
        WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap()
    }

    #[test]
    fn one_coordinate_matches_univariate_operator() {
        let s = scheme();
        let fam = ApproxFamily::new(&s, 7, 6).unwrap();
        let g = |x: f64| (0.3 * x).sin() + 0.1 * x * x;
        let (coeffs, samples) = smolyak_approx(&[2], 70, &fam, |x| Ok(g(x[0]))).unwrap();
        // Level 5 has 64 samples and is the largest within 70.
        assert_eq!(samples, 64);
        let direct = fam.level(5).apply(g);
        for (nu, c) in direct.iter().enumerate() {
            assert!((coeffs[&vec![nu]] - c).abs() < 1e-12);
        }
    }

    #[test]
    fn reproduces_low_degree_tensor_polynomials() {
        let s = scheme();
        let fam = ApproxFamily::new(&s, 3, 6).unwrap();
        // h_1(x)·h_2(y) lies in the span of every tensor level ≥ (2, 3).
        let g = |x: &[f64]| Ok(x[0] * (x[1] * x[1] - 1.0) / 2f64.sqrt());
        let (coeffs, _) = smolyak_approx(&[1, 2], 4000, &fam, g).unwrap();
        for (nu, c) in &coeffs {
            let expect = if nu == &vec![1, 2] { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-9, "{nu:?}: {c}");
        }
    }

    #[test]
    fn mdm_recovers_sparse_product() {
        let s = scheme();
        let fam = ApproxFamily::new(&s, 11, 7).unwrap();
        let p = plan(&s, PlanParams { eps: 0.05, kappa: 0.8, delta: 0.6, a: 0.0, c0: 1.0, c1: 2.0 }).unwrap();
        // f = (1 + 0.5 h_1(x_1))(1 + 0.2 h_1(x_2)).
        let f = |x: &AnchoredPoint| (1.0 + 0.5 * x.coordinate(1)) * (1.0 + 0.2 * x.coordinate(2));
        let out = mdm_approximate(&p, &fam, f).unwrap();
        let mut exact = HermiteExpansion::default();
        exact.add(vec![], 1.0);
        exact.add(vec![(1, 1)], 0.5);
        exact.add(vec![(2, 1)], 0.2);
        exact.add(vec![(1, 1), (2, 1)], 0.1);
        assert!(p.active_set.iter().any(|s| s.u == vec![1, 2]));
        assert!(out.expansion.l2_distance(&exact) < 1e-9, "{}", out.expansion.l2_distance(&exact));
        let x = AnchoredPoint::new(0.0, [(1, 0.4), (2, -1.1)]).unwrap();
        assert!((out.expansion.eval(&x) - f(&x)).abs() < 1e-9);
    }
}
