//! Univariate `L2(μ0)`-approximation from function values.
//!
//! The estimator is a weighted least-squares projection onto
//! `span{h_0, …, h_{N−1}}` from points drawn from `ρ·μ0` with
//! `ρ = ½·(1/N)Σ_{ν<N} h_ν² + ½·Σ_{N≤ν<2N} α_ν^{−1} h_ν² / Σ_{N≤ν<2N} α_ν^{−1}`,
//! one point per quantile stratum, each weighted by `1/ρ`. Its worst-case error on the unit ball of `H(k)` is the largest
//! singular value of `Id − A` on the span of `α_ν^{−1/2} h_ν`, `ν ≤ N_trunc`.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::hermite::hermite_unchecked;
use crate::quad1d::ErrorReport;
use crate::weights::WeightScheme;

/// Largest admissible condition number of the least-squares Gram matrix.
pub const MAX_CONDITION: f64 = 1e8;

/// Cramér's constant squared: `h_ν(x)² e^{−x²/2} ≤ CRAMER` for all ν, x.
const CRAMER: f64 = 1.086_435 * 1.086_435;

/// Beyond `√(4ν+2) + MARGIN` the density `h_ν²φ` carries negligible mass.
const MARGIN: f64 = 6.0;

/// Resolution of the tabulated distribution function.
const GRID_STEP: f64 = 0.005;

/// Linear approximation `f ↦ Σ_ν c_ν h_ν` with `c = output_map · (f(x_i))_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Approx1D {
    pub nodes: Vec<f64>,
    pub node_weights: Vec<f64>,
    pub basis_dim: usize,
    /// `basis_dim × nodes.len()`.
    pub output_map: DMatrix<f64>,
}

impl Approx1D {
    /// The algorithm returning the zero function from `n` ignored samples.
    pub fn zero(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        Self { node_weights: vec![0.0; n], nodes, basis_dim: 0, output_map: DMatrix::zeros(0, n) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Hermite coefficients of the approximant for sampled `values`.
    pub fn coefficients(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: values.len() });
        }
        Ok((&self.output_map * DVector::from_column_slice(values)).as_slice().to_vec())
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        self.coefficients(&values).expect("lengths agree by construction")
    }

    /// Text form in the rule format family: header, basis size, node lines
    /// `x w`, then the output map row by row.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# hermite-approx v1\n");
        let _ = writeln!(out, "basis {}", self.basis_dim);
        let _ = writeln!(out, "nodes {}", self.len());
        for (x, w) in self.nodes.iter().zip(&self.node_weights) {
            let _ = writeln!(out, "{x:.16e} {w:.16e}");
        }
        for row in self.output_map.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        if lines.next().map(|(_, l)| l) != Some("# hermite-approx v1") {
            return Err(Error::Parse { line: 1, message: "expected header '# hermite-approx v1'".into() });
        }
        let mut header = |key: &str| -> Result<usize> {
            let (no, line) = lines.next().ok_or_else(|| err(0, format!("missing '{key}' line")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.trim().parse().ok())
                .ok_or_else(|| err(no, format!("expected '{key} <count>'")))
        };
        let basis_dim = header("basis")?;
        let n = header("nodes")?;
        let mut nodes = Vec::with_capacity(n);
        let mut node_weights = Vec::with_capacity(n);
        let mut map = Vec::with_capacity(basis_dim * n);
        for (no, line) in lines {
            let values = line
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| err(no, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if nodes.len() < n {
                if values.len() != 2 {
                    return Err(err(no, "expected 'node weight'".into()));
                }
                nodes.push(values[0]);
                node_weights.push(values[1]);
            } else {
                if values.len() != n {
                    return Err(Error::LengthMismatch { expected: n, found: values.len() });
                }
                map.extend(values);
            }
        }
        if nodes.len() != n || map.len() != basis_dim * n {
            return Err(Error::LengthMismatch { expected: basis_dim * n, found: map.len() });
        }
        Ok(Self { nodes, node_weights, basis_dim, output_map: DMatrix::from_row_slice(basis_dim, n, &map) })
    }
}

/// `ĥ_ν(x) = h_ν(x)·e^{−x²/4}` for `ν ≤ nu_max`; bounded by Cramér's
/// constant, so it neither overflows nor loses the oscillating region.
pub fn scaled_hermite_column(nu_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    let (mut prev, mut cur, mut log_scale) = (0.0f64, 1.0f64, -0.25 * x * x);
    out.push(log_scale.exp());
    for k in 1..=nu_max {
        let next = if k == 1 { x } else { (x * cur - ((k - 1) as f64).sqrt() * prev) / (k as f64).sqrt() };
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
        out.push(if cur == 0.0 { 0.0 } else { cur.signum() * (cur.abs().ln() + log_scale).exp() });
    }
}

/// `h_ν(x)²·φ(x)`.
fn hermite_density(nu: usize, x: f64) -> f64 {
    let mut col = Vec::with_capacity(nu + 1);
    scaled_hermite_column(nu, x, &mut col);
    col[nu] * col[nu] / (2.0 * std::f64::consts::PI).sqrt()
}

/// Draws one point from `h_ν² μ0` by rejection from a uniform proposal on
/// `[−R_ν, R_ν]` under the Cramér envelope.
fn sample_hermite_density(nu: usize, rng: &mut impl Rng) -> f64 {
    if nu == 0 {
        return rng.sample(StandardNormal);
    }
    let reach = (4.0 * nu as f64 + 2.0).sqrt() + MARGIN;
    let ceiling = CRAMER / (2.0 * std::f64::consts::PI).sqrt();
    loop {
        let x = rng.random_range(-reach..reach);
        if rng.random::<f64>() * ceiling <= hermite_density(nu, x) {
            return x;
        }
    }
}

/// Sampling density `ρ·μ0` with `ρ = Σ_ν p_ν h_ν²`: half of the mass spread
/// evenly over `ν < N`, half over `N ≤ ν < 2N` in proportion to `α_ν^{−1}`.
#[derive(Debug, Clone)]
pub struct SamplingDensity {
    probs: Vec<f64>,
}

impl SamplingDensity {
    pub fn new(basis_dim: usize, scheme: &WeightScheme, j: usize) -> Result<Self> {
        if basis_dim == 0 {
            return Err(invalid("basis dimension must be at least 1"));
        }
        let tail: Vec<f64> = (basis_dim..2 * basis_dim).map(|nu| scheme.inv_alpha(nu, j)).collect();
        let mass: f64 = tail.iter().sum();
        let mut probs = vec![0.5 / basis_dim as f64; basis_dim];
        if mass > 0.0 {
            probs.extend(tail.iter().map(|t| 0.5 * t / mass));
        } else {
            probs.iter_mut().for_each(|p| *p *= 2.0);
        }
        Ok(Self { probs })
    }

    /// `ρ(x)·e^{−x²/2}`.
    pub fn scaled_ratio(&self, x: f64) -> f64 {
        let mut col = Vec::with_capacity(self.probs.len());
        scaled_hermite_column(self.probs.len() - 1, x, &mut col);
        col.iter().zip(&self.probs).map(|(h, p)| p * h * h).sum()
    }

    /// One point per stratum `[(i−1)/n, i/n)` of the distribution function,
    /// placed uniformly at random within it; the result is sorted.
    pub fn sample_stratified(&self, count: usize, rng: &mut impl Rng) -> Vec<f64> {
        let top = self.probs.len() - 1;
        let reach = (4.0 * top as f64 + 2.0).sqrt() + MARGIN;
        let cells = ((2.0 * reach / GRID_STEP).ceil() as usize).max(2);
        let h = 2.0 * reach / cells as f64;
        let density: Vec<f64> = (0..=cells).map(|k| self.scaled_ratio(-reach + k as f64 * h)).collect();
        let mut cdf = Vec::with_capacity(cells + 1);
        cdf.push(0.0);
        for k in 0..cells {
            let last = cdf[k];
            cdf.push(last + 0.5 * h * (density[k] + density[k + 1]));
        }
        let total = cdf[cells];
        (0..count)
            .map(|i| {
                let t = (i as f64 + rng.random::<f64>()) / count as f64 * total;
                let k = cdf.partition_point(|&c| c <= t).clamp(1, cells) - 1;
                let (c0, c1) = (cdf[k], cdf[k + 1]);
                let frac = if c1 > c0 { (t - c0) / (c1 - c0) } else { 0.5 };
                -reach + (k as f64 + frac.clamp(0.0, 1.0)) * h
            })
            .collect()
    }

    pub fn sample(&self, count: usize, rng: &mut impl Rng) -> Vec<f64> {
        let cdf: Vec<f64> = self
            .probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let total = *cdf.last().expect("non-empty");
        (0..count)
            .map(|_| {
                let t = rng.random::<f64>() * total;
                let nu = cdf.partition_point(|&c| c <= t).min(cdf.len() - 1);
                sample_hermite_density(nu, rng)
            })
            .collect()
    }
}

/// Weighted least-squares approximation with `n` samples onto the first
/// `basis_dim` Hermite polynomials; identical seeds give identical results.
pub fn build_ls_approx(n: usize, basis_dim: usize, scheme: &WeightScheme, j: usize, seed: u64) -> Result<Approx1D> {
    if n < 2 * basis_dim {
        return Err(invalid(format!("need n >= 2N samples, got n={n}, N={basis_dim}")));
    }
    let density = SamplingDensity::new(basis_dim, scheme, j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = density.sample_stratified(n, &mut rng);
    let scaled: Vec<f64> = nodes.iter().map(|&x| density.scaled_ratio(x)).collect();
    let node_weights: Vec<f64> = nodes.iter().zip(&scaled).map(|(&x, r)| (-0.5 * x * x).exp() / r).collect();

    // Rows √(w_i/n)·h(x_i), formed from the scaled polynomials.
    let mut b = DMatrix::zeros(n, basis_dim);
    let mut col = Vec::with_capacity(basis_dim);
    for (i, &x) in nodes.iter().enumerate() {
        scaled_hermite_column(basis_dim - 1, x, &mut col);
        let s = 1.0 / (scaled[i] * n as f64).sqrt();
        for (nu, h) in col.iter().enumerate() {
            b[(i, nu)] = h * s;
        }
    }
    let gram = b.transpose() * &b;
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let chol = Cholesky::new(gram).ok_or(Error::IllConditioned { condition })?;
    let mut output_map = chol.solve(&b.transpose());
    for (i, mut c) in output_map.column_iter_mut().enumerate() {
        c *= (node_weights[i] / n as f64).sqrt();
    }
    Ok(Approx1D { nodes, node_weights, basis_dim, output_map })
}

/// `α_{n,j}^{−1/2}`: no algorithm using `n` function values does better.
pub fn spectral_lower_bound(scheme: &WeightScheme, j: usize, n: usize) -> f64 {
    scheme.inv_alpha(n, j).sqrt()
}

/// Default truncation degree for [`worst_case_error_l2`].
pub fn default_truncation(ap: &Approx1D) -> usize {
    (4 * ap.basis_dim).max(256).max(ap.len())
}

/// Worst-case `L2(μ0)` error over the unit ball of `H(k_j)`.
///
/// `err` is exact for the part of the ball spanned by `h_0, …, h_{N_trunc}`;
/// `tail_bound` adds `α_{N_trunc+1}^{−1/2}` for the remaining directions and
/// a round-off allowance. Fails when that tail alone exceeds `tol`.
pub fn worst_case_error_l2(
    ap: &Approx1D,
    scheme: &WeightScheme,
    j: usize,
    n_trunc: Option<usize>,
    tol: f64,
) -> Result<ErrorReport> {
    let nt = n_trunc.unwrap_or_else(|| default_truncation(ap));
    if nt + 1 < ap.basis_dim {
        return Err(invalid(format!("truncation degree {nt} below basis dimension {}", ap.basis_dim)));
    }
    // Images of h_0..h_nt under the algorithm, as coefficient columns.
    // h_ν(x_i) = ĥ_ν(x_i)·e^{x_i²/4}; the exponential is split between
    // both factors so that neither overflows for |x_i| up to about 75.
    let mut v = DMatrix::zeros(ap.len(), nt + 1);
    let mut map = ap.output_map.clone();
    let mut col = Vec::with_capacity(nt + 1);
    for (i, &x) in ap.nodes.iter().enumerate() {
        let half = (0.125 * x * x).exp();
        scaled_hermite_column(nt, x, &mut col);
        for (nu, h) in col.iter().enumerate() {
            v[(i, nu)] = h * half;
        }
        map.column_mut(i).scale_mut(half);
    }
    let image = map * v;
    let report = truncated_error(&image, scheme, j, nt, tol)?;
    Ok(ErrorReport { cost: ap.len(), ..report })
}

/// Error of `Id − A` where column `ν` of `image` holds the Hermite
/// coefficients of `A(h_ν)` (rows beyond `image.nrows()` are zero).
fn truncated_error(image: &DMatrix<f64>, scheme: &WeightScheme, j: usize, nt: usize, tol: f64) -> Result<ErrorReport> {
    let tail = scheme.inv_alpha(nt + 1, j).sqrt();
    if tail > tol {
        return Err(Error::ToleranceUnreachable { requested: tol, best: tail });
    }
    let size = nt + 1;
    let scale: Vec<f64> = (0..size).map(|nu| scheme.inv_alpha(nu, j).sqrt()).collect();
    let mut d = DMatrix::zeros(size, size);
    for nu in 0..size {
        d[(nu, nu)] = scale[nu];
        for mu in 0..image.nrows().min(size) {
            d[(mu, nu)] -= image[(mu, nu)] * scale[nu];
        }
    }
    let gram = d.transpose() * &d;
    let top = SymmetricEigen::new(gram).eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e));
    let rounding = 8.0 * f64::EPSILON * size as f64 * d.norm_squared();
    let err = top.max(0.0).sqrt();
    let radius = (top + rounding).sqrt() - err;
    Ok(ErrorReport { err, tail_bound: tail + radius, cost: 0 })
}

/// Hermite coefficients of a sampled function in span `{h_0..h_{N−1}}`,
/// evaluated back at `x`.
pub fn eval_expansion(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().enumerate().map(|(nu, c)| c * hermite_unchecked(nu, x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_hermite_normal;
    use crate::weights::beta_sequence;
    use proptest::prelude::*;

    fn pg(r: f64) -> WeightScheme {
        WeightScheme::polynomial_1d(r).unwrap()
    }

    #[test]
    fn reproduces_constants_and_span() {
        let ap = build_ls_approx(64, 16, &pg(2.0), 1, 3).unwrap();
        let c = ap.apply(|_| 1.0);
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
        for nu in 1..16 {
            let c = ap.apply(|x| hermite_unchecked(nu, x));
            for (mu, v) in c.iter().enumerate() {
                let target = if mu == nu { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-8, "nu={nu} mu={mu}: {v}");
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = build_ls_approx(40, 10, &pg(2.0), 1, 11).unwrap();
        let b = build_ls_approx(40, 10, &pg(2.0), 1, 11).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a.nodes, build_ls_approx(40, 10, &pg(2.0), 1, 12).unwrap().nodes);
    }

    #[test]
    fn importance_weights_integrate_against_mu0() {
        // E_mix[g/ρ] = E_μ0[g]; for g = x² and g = h_3² both equal 1.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let density = SamplingDensity::new(8, &pg(2.0), 1).unwrap();
        let xs = density.sample(200_000, &mut rng);
        let ratio = |x: f64| density.scaled_ratio(x) * (0.5 * x * x).exp();
        let mean = |g: &dyn Fn(f64) -> f64| xs.iter().map(|&x| g(x) / ratio(x)).sum::<f64>() / xs.len() as f64;
        assert!((mean(&|x| x * x) - 1.0).abs() < 0.02);
        assert!((mean(&|x| hermite_unchecked(3, x).powi(2)) - 1.0).abs() < 0.03);
        // Stratification keeps the marginal law and sharpens the average.
        let ys = density.sample_stratified(4096, &mut rng);
        assert!(ys.windows(2).all(|w| w[0] <= w[1]));
        let strat = ys.iter().map(|&x| hermite_unchecked(5, x).powi(2) / ratio(x)).sum::<f64>() / ys.len() as f64;
        assert!((strat - 1.0).abs() < 1e-3, "{strat}");
    }

    #[test]
    fn hermite_density_matches_direct_product() {
        for nu in [0usize, 1, 5, 30] {
            for x in [-3.0, -0.4, 0.0, 1.7, 6.0] {
                let direct = hermite_unchecked(nu, x).powi(2) * crate::numerics::std_normal_pdf(x);
                assert!((hermite_density(nu, x) - direct).abs() <= 1e-12 * direct.max(1e-300), "{nu} {x}");
            }
        }
    }

    #[test]
    fn spectral_lower_bound_examples() {
        assert!((spectral_lower_bound(&pg(2.0), 1, 3) - 0.25).abs() < 1e-15);
        assert_eq!(spectral_lower_bound(&pg(2.0), 1, 0), 1.0);
        let eg = WeightScheme::exponential_1d(1.0, 1.0).unwrap();
        assert!((spectral_lower_bound(&eg, 1, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_algorithm_has_unit_error() {
        let ap = Approx1D::zero(vec![0.0, 1.0, -1.0]);
        let rep = worst_case_error_l2(&ap, &pg(2.0), 1, None, 1e-2).unwrap();
        assert!((rep.err - 1.0).abs() < 1e-12);
        assert_eq!(rep.cost, 3);
    }

    #[test]
    fn ideal_projection_error_is_next_weight() {
        let s = pg(2.0);
        for big_n in [1usize, 4, 10] {
            let nt = 300;
            let mut image = DMatrix::zeros(big_n, nt + 1);
            for nu in 0..big_n {
                image[(nu, nu)] = 1.0;
            }
            let rep = truncated_error(&image, &s, 1, nt, 1e-2).unwrap();
            assert!((rep.err - s.inv_alpha(big_n, 1).sqrt()).abs() < 1e-12, "{big_n}");
        }
    }

    #[test]
    fn gauss_hermite_projection_aliases_only_high_degrees() {
        // An m-point Gauss rule reproduces coefficients exactly for degree
        // < m, so its error is at least the first untouched direction but
        // far below the zero algorithm.
        let (x, w) = gauss_hermite_normal(6);
        let mut map = DMatrix::zeros(3, 6);
        for nu in 0..3 {
            for i in 0..6 {
                map[(nu, i)] = w[i] * hermite_unchecked(nu, x[i]);
            }
        }
        let ap = Approx1D { nodes: x, node_weights: w, basis_dim: 3, output_map: map };
        let rep = worst_case_error_l2(&ap, &pg(2.0), 1, None, 1e-2).unwrap();
        assert!(rep.err >= spectral_lower_bound(&pg(2.0), 1, 3) - 1e-12);
        assert!(rep.err < 0.9);
    }

    #[test]
    fn least_squares_beats_beta() {
        let s = pg(2.0);
        let ap = build_ls_approx(64, 16, &pg(2.0), 1, 1).unwrap();
        let rep = worst_case_error_l2(&ap, &s, 1, None, 1e-2).unwrap();
        let beta8 = beta_sequence(&s, 1, 8, 1e-12).unwrap();
        assert!(rep.err < 1.5 * beta8, "{} vs {}", rep.err, beta8);
        assert!(rep.err >= spectral_lower_bound(&s, 1, 64) - 1e-12);
    }

    #[test]
    fn error_tracks_first_omitted_direction() {
        let s = pg(2.0);
        for n in [32usize, 128] {
            let ap = build_ls_approx(n, n / 4, &s, 1, 4).unwrap();
            let rep = worst_case_error_l2(&ap, &s, 1, None, 1e-2).unwrap();
            let ideal = s.inv_alpha(n / 4, 1).sqrt();
            assert!(rep.err >= ideal - 1e-12 && rep.err < 1.2 * ideal, "n={n}: {} vs {ideal}", rep.err);
        }
    }

    #[test]
    fn text_round_trip() {
        let ap = build_ls_approx(20, 5, &pg(2.0), 1, 9).unwrap();
        let back = Approx1D::from_text(&ap.to_text()).unwrap();
        assert_eq!(back, ap);
        assert!(Approx1D::from_text("# hermite-rule v1\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn reproduces_random_polynomials(seed in 0u64..1000, coeffs in prop::collection::vec(-2.0f64..2.0, 6)) {
            let ap = build_ls_approx(24, 6, &pg(2.0), 1, seed).unwrap();
            let got = ap.apply(|x| eval_expansion(&coeffs, x));
            for (g, c) in got.iter().zip(&coeffs) {
                prop_assert!((g - c).abs() < 1e-8);
            }
        }
    }
}
