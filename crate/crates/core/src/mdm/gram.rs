//! Gram forms of product kernels over anchored points.
//!
//! For points sharing the anchor `a`,
//! `K(x, y) = B · ∏_{j ∈ act(x) ∪ act(y)} s_j(x_j, y_j)` with
//! `s_j = k_j(·,·)/k_j(a,a)` and `B` the product of all anchor factors.
//! Each coordinate gets a table of `s_j` over its distinct values, so a
//! pair costs one merge of two short index lists.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::hermite::{kernel_value, AnchoredPoint, GreenPg2, Kernel1D};
use crate::numerics::CompensatedSum;
use crate::quad1d::ErrorReport;
use crate::weights::{SchemeKind, WeightScheme};

/// Relative accuracy credited to the `α_ν = (ν+1)²` Green-function route
/// for arguments within [`GREEN_RANGE`]; the observed error against a
/// 40-digit evaluation of `∫_0^1 (−ln t) M_t(x, y) dt` is below 3e-14.
const GREEN_REL: f64 = 1e-13;
const GREEN_RANGE: f64 = 9.5;
/// Relative accuracy requested from the other routes before escalating.
const TARGET_REL: f64 = 1e-12;

/// Worker threads for the pair loops; `HERMITE_THREADS` overrides.
pub(crate) fn thread_count() -> usize {
    std::env::var("HERMITE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// `f(i)` for `i < n`, computed on several threads, returned in order.
pub(crate) fn parallel_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = thread_count().min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads * 8).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let start = next.fetch_add(chunk, std::sync::atomic::Ordering::Relaxed);
                if start >= n {
                    break;
                }
                let end = (start + chunk).min(n);
                let local: Vec<T> = (start..end).map(&f).collect();
                let mut guard = slots_ref.lock().unwrap_or_else(|e| e.into_inner());
                for (i, v) in local.into_iter().enumerate() {
                    guard[start + i] = Some(v);
                }
            });
        }
    });
    slots.into_iter().map(|v| v.expect("every slot is filled")).collect()
}

/// Pairwise `s_j` values over the distinct values of one coordinate; index
/// 0 is the anchor.
struct Table {
    n: usize,
    s: Vec<f64>,
    rel: Vec<f64>,
    /// `k(a, a)` and its relative accuracy.
    diag: (f64, f64),
}

impl Table {
    fn build(scheme: &WeightScheme, kernel: usize, values: &[f64]) -> Result<Self> {
        let n = values.len();
        let green = matches!(scheme.kind(), SchemeKind::Polynomial { r } if r.at(kernel) == 2.0)
            && values.iter().all(|x| x.abs() <= GREEN_RANGE);
        let rows: Vec<Result<Vec<(f64, f64)>>> = if green {
            let g = GreenPg2::new(values);
            (0..n).map(|i| Ok((i..n).map(|l| (g.value(i, l), GREEN_REL)).collect())).collect()
        } else {
            let k1 = Kernel1D::new(scheme, kernel);
            parallel_map(n, |i| {
                (i..n)
                    .map(|l| {
                        let (x, y) = (values[i], values[l]);
                        let mut k = k1.eval(x, y)?;
                        if k.tail_bound > TARGET_REL * k.value.abs() {
                            if let Ok(better) = kernel_value(scheme, kernel, x, y, TARGET_REL * k.value.abs()) {
                                k = better;
                            }
                        }
                        Ok((k.value, k.tail_bound / k.value.abs().max(f64::MIN_POSITIVE)))
                    })
                    .collect()
            })
        };
        let mut raw = vec![0.0; n * n];
        let mut rel = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, (v, r)) in row?.into_iter().enumerate() {
                let l = i + off;
                raw[i * n + l] = v;
                raw[l * n + i] = v;
                rel[i * n + l] = r;
                rel[l * n + i] = r;
            }
        }
        let (diag, diag_rel) = (raw[0], rel[0]);
        if !(diag > 0.0) {
            return Err(Error::NonFinite { what: "anchor kernel value", value: diag });
        }
        let s = raw.iter().map(|v| v / diag).collect();
        let rel = rel.iter().map(|r| r + diag_rel).collect();
        Ok(Self { n, s, rel, diag: (diag, diag_rel) })
    }
}

/// `K = base·∏ s_j` where coordinate `j` uses the scheme's kernel
/// `kernel_of(j)`.
pub(crate) struct ProductGram<'a> {
    pub scheme: &'a WeightScheme,
    pub anchor: f64,
    pub base: f64,
    pub base_rel: f64,
    pub kernel_of: &'a (dyn Fn(usize) -> usize + Sync),
}

impl ProductGram<'_> {
    /// `1 − 2Σw + ΣΣ w_i w_l K(x_i, x_l)` with its accuracy estimate.
    pub fn error(&self, points: &[AnchoredPoint], weights: &[f64], tol: f64) -> Result<ErrorReport> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: points.len(), found: weights.len() });
        }
        if let Some(p) = points.iter().find(|p| p.anchor().to_bits() != self.anchor.to_bits()) {
            return Err(Error::AnchorMismatch { left: self.anchor, right: p.anchor() });
        }
        let m = points.len();
        if m == 0 {
            return Ok(ErrorReport { err: 1.0, tail_bound: 0.0, cost: 0 });
        }
        // Distinct values per coordinate, anchor first.
        let mut values: BTreeMap<usize, (Vec<f64>, HashMap<u64, u32>)> = BTreeMap::new();
        let mut encoded: Vec<Vec<(usize, u32)>> = Vec::with_capacity(m);
        for p in points {
            let mut row = Vec::with_capacity(p.act());
            for &(j, x) in p.active() {
                let (list, index) = values.entry(j).or_insert_with(|| {
                    let mut index = HashMap::new();
                    index.insert(self.anchor.to_bits(), 0);
                    (vec![self.anchor], index)
                });
                let next = list.len() as u32;
                let id = *index.entry(x.to_bits()).or_insert_with(|| {
                    list.push(x);
                    next
                });
                row.push((j, id));
            }
            encoded.push(row);
        }
        // Dense slots in coordinate order keep the merge below ordered.
        let slot: HashMap<usize, usize> = values.keys().enumerate().map(|(s, &j)| (j, s)).collect();
        for row in &mut encoded {
            for entry in row.iter_mut() {
                entry.0 = slot[&entry.0];
            }
        }
        let tables = values
            .iter()
            .map(|(&j, (list, _))| Table::build(self.scheme, (self.kernel_of)(j), list))
            .collect::<Result<Vec<_>>>()?;

        let pair = |x: &[(usize, u32)], y: &[(usize, u32)]| -> (f64, f64) {
            let (mut prod, mut rel) = (1.0, 0.0);
            let (mut a, mut b) = (0, 0);
            let mut factor = |j: usize, ix: u32, iy: u32| {
                let t = &tables[j];
                let at = ix as usize * t.n + iy as usize;
                prod *= t.s[at];
                rel += t.rel[at];
            };
            while a < x.len() || b < y.len() {
                match (x.get(a), y.get(b)) {
                    (Some(&(jx, ix)), Some(&(jy, iy))) if jx == jy => {
                        factor(jx, ix, iy);
                        a += 1;
                        b += 1;
                    }
                    (Some(&(jx, ix)), Some(&(jy, _))) if jx < jy => {
                        factor(jx, ix, 0);
                        a += 1;
                    }
                    (Some(&(jx, ix)), None) => {
                        factor(jx, ix, 0);
                        a += 1;
                    }
                    (_, Some(&(jy, iy))) => {
                        factor(jy, 0, iy);
                        b += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            (prod, rel)
        };

        // Row i holds w_i·(w_i K_ii + 2 Σ_{l>i} w_l K_il).
        let rows = parallel_map(m, |i| {
            let (k, r) = pair(&encoded[i], &encoded[i]);
            let mut sum = CompensatedSum::new();
            sum.add(weights[i] * k);
            let mut abs = (weights[i] * k).abs();
            let mut err = abs * r;
            for l in i + 1..m {
                let (k, r) = pair(&encoded[i], &encoded[l]);
                let t = 2.0 * weights[l] * k;
                sum.add(t);
                abs += t.abs();
                err += t.abs() * r;
            }
            (weights[i] * sum.value(), weights[i].abs() * abs, weights[i].abs() * err)
        });
        let mut quad = CompensatedSum::new();
        let (mut abs, mut delta) = (0.0, 0.0);
        for (q, a, e) in rows {
            quad.add(q);
            abs += a;
            delta += e;
        }
        let sum_w: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
        let err2 = 1.0 - 2.0 * sum_w + self.base * quad.value();
        let rounding = 16.0 * f64::EPSILON * (1.0 + 2.0 * sum_w.abs() + self.base * abs);
        // An error in the shared factor B scales the quadratic form as a
        // whole, so it is charged against |Σ w w K/B| rather than Σ |w w K/B|.
        let delta = self.base * (delta + self.base_rel * (quad.value().abs() + delta)) + rounding;
        if delta > tol {
            return Err(Error::ToleranceUnreachable { requested: tol, best: delta });
        }
        ErrorReport::from_squared(err2, delta, tol, m)
    }
}

/// Worst-case integration error of a rule on `H(k_1^{⊗d})` over the
/// coordinates of the points (`d` = number of coordinates of `u`).
pub fn tensor_error(
    scheme: &WeightScheme,
    u: &[usize],
    points: &[AnchoredPoint],
    weights: &[f64],
    anchor: f64,
    tol: f64,
) -> Result<ErrorReport> {
    let (kaa, rel) = Table::build(scheme, 1, &[anchor])?.diag;
    let d = u.len() as i32;
    let gram = ProductGram { scheme, anchor, base: kaa.powi(d), base_rel: d as f64 * rel, kernel_of: &|_| 1 };
    gram.error(points, weights, tol)
}
