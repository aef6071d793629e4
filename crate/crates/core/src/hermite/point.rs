use std::hash::{Hash, Hasher};

use crate::error::{invalid, Error, Result};

/// A point of `𝒳_a`: finitely many active coordinates, all others equal to
/// the anchor `a`.
///
/// Entries equal to the anchor are dropped on construction, so the active
/// list is canonical and `act()` is the number of active variables.
#[derive(Debug, Clone)]
pub struct AnchoredPoint {
    anchor: f64,
    active: Vec<(usize, f64)>,
}

fn canonical(x: f64) -> f64 {
    // Fold -0.0 into 0.0 so that equal points hash identically.
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl AnchoredPoint {
    /// The fully anchored point `(a, a, …)`.
    pub fn anchored(anchor: f64) -> Self {
        Self { anchor: canonical(anchor), active: Vec::new() }
    }

    pub fn new(anchor: f64, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        if !anchor.is_finite() {
            return Err(Error::NonFinite { what: "anchor", value: anchor });
        }
        let mut active: Vec<(usize, f64)> = Vec::new();
        for (j, x) in entries {
            if j == 0 {
                return Err(invalid("coordinate indices start at 1"));
            }
            if !x.is_finite() {
                return Err(Error::NonFinite { what: "coordinate", value: x });
            }
            active.push((j, canonical(x)));
        }
        active.sort_by_key(|&(j, _)| j);
        if active.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate coordinate index in anchored point"));
        }
        active.retain(|&(_, x)| x != anchor);
        Ok(Self { anchor: canonical(anchor), active })
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Active `(j, x_j)` pairs sorted by `j`.
    pub fn active(&self) -> &[(usize, f64)] {
        &self.active
    }

    /// `Act_a(x)`: number of coordinates different from the anchor.
    pub fn act(&self) -> usize {
        self.active.len()
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        match self.active.binary_search_by_key(&j, |&(k, _)| k) {
            Ok(pos) => self.active[pos].1,
            Err(_) => self.anchor,
        }
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().map(|&(j, _)| j)
    }

    /// `(x_v, a_{v^c})`: keeps only the coordinates listed in `v`.
    pub fn restricted_to(&self, v: &[usize]) -> Self {
        let active = self.active.iter().copied().filter(|(j, _)| v.contains(j)).collect();
        Self { anchor: self.anchor, active }
    }

    /// Whether every active coordinate lies in `u`.
    pub fn is_supported_in(&self, u: &[usize]) -> bool {
        self.active.iter().all(|(j, _)| u.contains(j))
    }
}

impl PartialEq for AnchoredPoint {
    fn eq(&self, other: &Self) -> bool {
        self.anchor.to_bits() == other.anchor.to_bits()
            && self.active.len() == other.active.len()
            && self.active.iter().zip(&other.active).all(|(p, q)| p.0 == q.0 && p.1.to_bits() == q.1.to_bits())
    }
}

impl Eq for AnchoredPoint {}

impl Hash for AnchoredPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.anchor.to_bits().hash(state);
        for &(j, x) in &self.active {
            j.hash(state);
            x.to_bits().hash(state);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn normalizes_anchor_entries() {
        let p = AnchoredPoint::new(0.5, [(3, 0.5), (1, 2.0), (7, -1.0)]).unwrap();
        assert_eq!(p.act(), 2);
        assert_eq!(p.active(), &[(1, 2.0), (7, -1.0)]);
        assert_eq!(p.coordinate(3), 0.5);
        assert_eq!(p.coordinate(100), 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(AnchoredPoint::new(0.0, [(0, 1.0)]).is_err());
        assert!(AnchoredPoint::new(0.0, [(2, 1.0), (2, 3.0)]).is_err());
        assert!(AnchoredPoint::new(0.0, [(2, f64::NAN)]).is_err());
        assert!(AnchoredPoint::new(f64::INFINITY, []).is_err());
    }

    #[test]
    fn signed_zero_is_canonical() {
        let a = AnchoredPoint::new(1.0, [(2, -0.0)]).unwrap();
        let b = AnchoredPoint::new(1.0, [(2, 0.0)]).unwrap();
        let mut set = HashSet::new();
        set.insert(a);
        assert!(set.contains(&b));
    }

    #[test]
    fn restriction() {
        let p = AnchoredPoint::new(0.0, [(1, 1.0), (2, 2.0), (5, 3.0)]).unwrap();
        let q = p.restricted_to(&[2, 5]);
        assert_eq!(q.active(), &[(2, 2.0), (5, 3.0)]);
        assert!(q.is_supported_in(&[2, 5]));
        assert!(!p.is_supported_in(&[2, 5]));
    }
}
