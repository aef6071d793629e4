//! Smolyak tensorization of a univariate family over a finite variable set.
//!
//! Levels start at 1: the one-point rule at the anchor, which would be the
//! natural level 0, annihilates every anchored component and is omitted.
//! The combination technique writes the Smolyak operator over a
//! downward-closed set `S ⊂ {k ≥ 1}` as
//! `Σ_{k∈S} c_k ⊗_j U_{k_j}` with `c_k = Σ_{e∈{0,1}^d, k+e∈S} (−1)^{|e|}`.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::hermite::AnchoredPoint;
use crate::quad1d::{build_an, Rule1D};

/// A downward-closed level set with its combination coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSet {
    pub dim: usize,
    /// Multi-indices with non-zero coefficient, sorted.
    pub terms: Vec<(Vec<usize>, i64)>,
    /// Size of the full downward-closed set.
    pub size: usize,
}

fn combination_terms(dim: usize, set: &BTreeSet<Vec<usize>>) -> Vec<(Vec<usize>, i64)> {
    let mut terms = Vec::new();
    for k in set {
        let mut c = 0i64;
        for mask in 0..(1usize << dim) {
            let mut shifted = k.clone();
            for (b, s) in shifted.iter_mut().enumerate() {
                *s += mask >> b & 1;
            }
            if set.contains(&shifted) {
                c += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        if c != 0 {
            terms.push((k.clone(), c));
        }
    }
    terms
}

fn term_cost(terms: &[(Vec<usize>, i64)], level_cost: &impl Fn(usize) -> usize) -> usize {
    terms.iter().map(|(k, _)| k.iter().map(|&l| level_cost(l)).product::<usize>()).sum()
}

/// Greedy downward-closed level selection within an evaluation budget.
///
/// Starting from the empty set, the admissible candidate whose addition
/// gives the smallest evaluation count is added while that count stays
/// within `budget`; ties go to the smaller `|k|_1`, then lexicographic
/// order. The count of a set is `Σ_{c_k≠0} ∏_j level_cost(k_j)`, an upper
/// bound for the number of distinct points.
pub fn select_levels(dim: usize, budget: usize, max_level: usize, level_cost: impl Fn(usize) -> usize) -> LevelSet {
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    let root = vec![1usize; dim];
    if dim == 0 || max_level == 0 || term_cost(&[(root.clone(), 1)], &level_cost) > budget {
        return LevelSet { dim, terms: Vec::new(), size: 0 };
    }
    set.insert(root);
    loop {
        let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
        for k in &set {
            for j in 0..dim {
                let mut next = k.clone();
                next[j] += 1;
                if next[j] > max_level || set.contains(&next) {
                    continue;
                }
                let admissible = (0..dim).all(|i| {
                    if next[i] == 1 {
                        return true;
                    }
                    let mut below = next.clone();
                    below[i] -= 1;
                    set.contains(&below)
                });
                if admissible {
                    candidates.insert(next);
                }
            }
        }
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for k in candidates {
            set.insert(k.clone());
            let cost = term_cost(&combination_terms(dim, &set), &level_cost);
            set.remove(&k);
            if cost > budget {
                continue;
            }
            let key = (cost, k.iter().sum::<usize>(), k);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        match best {
            Some((_, _, k)) => {
                set.insert(k);
            }
            None => break,
        }
    }
    LevelSet { dim, terms: combination_terms(dim, &set), size: set.len() }
}

/// The univariate quadrature family `U_i = A_{2^i}`, `i ≥ 1`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadFamily {
    pub r: usize,
    pub delta: f64,
    pub anchor: f64,
    levels: Vec<Rule1D>,
}

/// Default number of precomputed levels (`2^12` nominal points).
pub const DEFAULT_MAX_LEVEL: usize = 12;

impl QuadFamily {
    pub fn new(r: usize, delta: f64, anchor: f64, max_level: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(invalid("quadrature family needs at least one level"));
        }
        let levels = (1..=max_level).map(|i| build_an(1 << i, r, delta)).collect::<Result<Vec<_>>>()?;
        Ok(Self { r, delta, anchor, levels })
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    /// `U_level`, `level ≥ 1`.
    pub fn rule(&self, level: usize) -> &Rule1D {
        &self.levels[level - 1]
    }

    /// Nodes of `U_level` that differ from the anchor.
    pub fn evaluations(&self, level: usize) -> usize {
        self.rule(level).nodes.iter().filter(|&&x| x != self.anchor).count()
    }
}

/// A Smolyak quadrature over the coordinates `u`.
#[derive(Debug, Clone, Serialize)]
pub struct SmolyakRule {
    pub u: Vec<usize>,
    /// Point coordinates, one entry per element of `u`.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Points with no coordinate at the anchor; the others vanish on
    /// anchored components.
    pub evaluations: usize,
    /// Set when the budget could not afford the coarsest tensor grid.
    pub degenerate: bool,
    pub levels: LevelSet,
}

impl SmolyakRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, &w)| w * f(x)).sum()
    }

    pub fn anchored_points(&self, anchor: f64) -> Result<Vec<(AnchoredPoint, f64)>> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| Ok((AnchoredPoint::new(anchor, self.u.iter().copied().zip(x.iter().copied()))?, w)))
            .collect()
    }
}

/// Smolyak rule on the sorted set `u` with at most `n` evaluations off the
/// anchor lines.
pub fn smolyak_rule(u: &[usize], n: usize, family: &QuadFamily) -> Result<SmolyakRule> {
    if u.is_empty() {
        return Err(invalid("Smolyak rules need a non-empty variable set"));
    }
    if u.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("variable set must be sorted and distinct"));
    }
    let d = u.len();
    let levels = select_levels(d, n, family.max_level(), |l| family.evaluations(l));
    let mut merged: HashMap<Vec<u64>, (Vec<f64>, f64)> = HashMap::new();
    for (k, c) in &levels.terms {
        let rules: Vec<&Rule1D> = k.iter().map(|&l| family.rule(l)).collect();
        let mut idx = vec![0usize; d];
        'grid: loop {
            let x: Vec<f64> = (0..d).map(|i| rules[i].nodes[idx[i]]).collect();
            let w: f64 = (0..d).map(|i| rules[i].weights[idx[i]]).product::<f64>() * *c as f64;
            let key: Vec<u64> = x.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect();
            merged.entry(key).or_insert_with(|| (x, 0.0)).1 += w;
            for i in (0..d).rev() {
                idx[i] += 1;
                if idx[i] < rules[i].len() {
                    continue 'grid;
                }
                idx[i] = 0;
            }
            break;
        }
    }
    let mut entries: Vec<(Vec<f64>, f64)> = merged.into_values().filter(|(_, w)| *w != 0.0).collect();
    entries.sort_by(|a, b| {
        a.0.iter().zip(&b.0).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let evaluations = entries.iter().filter(|(x, _)| x.iter().all(|&v| v != family.anchor)).count();
    let degenerate = levels.terms.is_empty();
    let (points, weights) = entries.into_iter().unzip();
    Ok(SmolyakRule { u: u.to_vec(), points, weights, evaluations, degenerate, levels })
}

/// `C0·C1^d·(1 + ln(n+1)/max(d−1,1))^{(κ+1)(d−1)}·(n+1)^{−κ}`.
pub fn smolyak_error_bound(d: usize, n: usize, kappa: f64, c0: f64, c1: f64) -> f64 {
    c0 * c1.powi(d as i32) * smolyak_shape(d, n, kappa)
}

/// The bound without its constants.
pub(crate) fn smolyak_shape(d: usize, n: usize, kappa: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    let dm1 = d.saturating_sub(1) as f64;
    let log_factor = 1.0 + np1.ln() / dm1.max(1.0);
    log_factor.powf((kappa + 1.0) * dm1) * np1.powf(-kappa)
}
