//! Anchored decomposition `f_u(x) = Σ_{v⊆u} (−1)^{|u∖v|} f(x_v, a)`.

use crate::error::{Error, Result};
use crate::hermite::AnchoredPoint;

/// The `2^{|u|}` signed evaluation points whose combination is `f_u(x)`.
///
/// `u` must be sorted; `x` may only be active on `u`.
pub fn anchored_component_points(u: &[usize], x: &AnchoredPoint) -> Result<Vec<(AnchoredPoint, f64)>> {
    if let Some(j) = x.active_indices().find(|j| !u.contains(j)) {
        return Err(Error::ActiveOutsideSet { coordinate: j });
    }
    let d = u.len();
    let mut out = Vec::with_capacity(1 << d);
    for mask in 0..(1usize << d) {
        let v: Vec<usize> = (0..d).filter(|b| mask >> b & 1 == 1).map(|b| u[b]).collect();
        let sign = if (d - v.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        out.push((x.restricted_to(&v), sign));
    }
    Ok(out)
}

/// `f_u(x)` by inclusion–exclusion.
pub fn anchored_component(u: &[usize], x: &AnchoredPoint, f: impl Fn(&AnchoredPoint) -> f64) -> Result<f64> {
    Ok(anchored_component_points(u, x)?.iter().map(|(p, s)| s * f(p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_eval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_and_singleton_sets() {
        let a = AnchoredPoint::anchored(0.0);
        let pts = anchored_component_points(&[], &a).unwrap();
        assert_eq!(pts, vec![(a.clone(), 1.0)]);

        let x = AnchoredPoint::new(0.0, [(1, 0.7)]).unwrap();
        let pts = anchored_component_points(&[1], &x).unwrap();
        assert_eq!(pts, vec![(a, -1.0), (x, 1.0)]);
    }

    #[test]
    fn rejects_points_active_elsewhere() {
        let x = AnchoredPoint::new(0.0, [(1, 0.7), (3, 1.0)]).unwrap();
        assert!(matches!(anchored_component_points(&[1, 2], &x), Err(Error::ActiveOutsideSet { coordinate: 3 })));
    }

    /// `f(x) = ∏_{j∈w}(1 + c_j h_{ν_j}(x_j))` with random data.
    fn product_function(rng: &mut ChaCha8Rng, w: &[usize]) -> impl Fn(&AnchoredPoint) -> f64 {
        let data: Vec<(usize, usize, f64)> =
            w.iter().map(|&j| (j, rng.random_range(1..6), rng.random_range(-2.0..2.0))).collect();
        move |x: &AnchoredPoint| {
            data.iter().map(|&(j, nu, c)| 1.0 + c * hermite_eval(nu, x.coordinate(j)).unwrap()).product()
        }
    }

    fn subsets(u: &[usize]) -> Vec<Vec<usize>> {
        (0..1usize << u.len()).map(|m| (0..u.len()).filter(|b| m >> b & 1 == 1).map(|b| u[b]).collect()).collect()
    }

    #[test]
    fn reconstruction_and_annihilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let a = rng.random_range(-1.0..1.0);
            let d = rng.random_range(1..=4);
            let mut u: Vec<usize> = Vec::new();
            while u.len() < d {
                let j = rng.random_range(1..10);
                if !u.contains(&j) {
                    u.push(j);
                }
            }
            u.sort_unstable();
            let f = product_function(&mut rng, &u);
            let x = AnchoredPoint::new(a, u.iter().map(|&j| (j, rng.random_range(-3.0..3.0)))).unwrap();
            let total: f64 = subsets(&u).iter().map(|v| anchored_component(v, &x.restricted_to(v), &f).unwrap()).sum();
            assert!((total - f(&x)).abs() <= 1e-12 * f(&x).abs().max(1.0), "{total} vs {}", f(&x));

            // Pin one coordinate of u to the anchor: the component vanishes.
            let pinned = u[rng.random_range(0..u.len())];
            let y =
                AnchoredPoint::new(a, u.iter().map(|&j| (j, if j == pinned { a } else { x.coordinate(j) }))).unwrap();
            assert!(anchored_component(&u, &y, &f).unwrap().abs() <= 1e-12);
        }
    }
}
