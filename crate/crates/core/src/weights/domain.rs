//! Membership diagnostics for the maximal domains `𝒳`, `𝒳↑` and `𝒳↓`.
//!
//! A verdict is only issued when an analytic comparison test applies to the
//! closed forms of the sequence and of the weights; otherwise the check
//! reports `Undecided` together with the partial sums it computed.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::constants::gamma;
use super::generator::{parse_f64, Generator};
use super::scheme::{SchemeKind, WeightScheme};
use crate::error::{invalid, Error, Result};
use crate::hermite::{kernel_eval_1d_capped, Kernel1D};

/// A real sequence `x_j` in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SequenceSpec {
    /// `x_j = c`.
    Constant { c: f64 },
    /// `x_j = c·j^p`.
    Power { c: f64, p: f64 },
    /// `x_j = c·ln(1 + j)^p`.
    Logarithmic { c: f64, p: f64 },
}

impl SequenceSpec {
    pub fn at(&self, j: usize) -> f64 {
        match *self {
            SequenceSpec::Constant { c } => c,
            SequenceSpec::Power { c, p } => c * (j as f64).powf(p),
            SequenceSpec::Logarithmic { c, p } => c * (j as f64).ln_1p().powf(p),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match *self {
            SequenceSpec::Constant { .. } => true,
            SequenceSpec::Power { c, p } | SequenceSpec::Logarithmic { c, p } => c == 0.0 || p <= 0.0,
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SequenceSpec::Constant { c } => write!(f, "const:{c}"),
            SequenceSpec::Power { c, p } => write!(f, "power:{c},{p}"),
            SequenceSpec::Logarithmic { c, p } => write!(f, "log:{c},{p}"),
        }
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (form, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| invalid(format!("sequence '{s}' must look like const:c, power:c,p or log:c,p")))?;
        let nums = args.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        let spec = match (form.trim(), nums.as_slice()) {
            ("const", [c]) => SequenceSpec::Constant { c: *c },
            ("power", [c, p]) => SequenceSpec::Power { c: *c, p: *p },
            ("log", [c, p]) => SequenceSpec::Logarithmic { c: *c, p: *p },
            _ => return Err(invalid(format!("unrecognised sequence '{s}'"))),
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("sequence '{s}' has non-finite parameters")));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Domain {
    /// Maximal domain of `K`.
    X,
    /// Maximal domain of the upper-bound kernels.
    XUp,
    /// Maximal domain of the lower-bound kernel.
    XDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainVerdict {
    pub domain: Domain,
    pub verdict: Verdict,
    /// Sum of the defining series over `j ≤ j_max` (may be `+∞` when the
    /// kernel diagonal overflows).
    pub partial_sum: f64,
    pub certificate: String,
}

/// Lower bound `θ0` in `k(x,x) ≥ P(1 ≤ S ≤ 2)·e^{θ0 x²}` for polynomial
/// weights, from the Mehler representation with `S ~ Gamma(r, 1)`.
fn pg_theta0() -> f64 {
    let t = (-2.0f64).exp();
    t / (1.0 + t)
}

/// How the coordinate weights `w_j ∝ 2^{−r_j}` decay.
#[derive(Debug, Clone, Copy)]
enum WeightDecay {
    /// `w_j ∝ e^{−λ j}`.
    Geometric { lambda: f64 },
    /// `w_j ∝ (j + o)^{−s}`.
    Polynomial { s: f64 },
    /// Finitely many non-zero weights.
    Finite,
}

fn weight_decay(scheme: &WeightScheme) -> WeightDecay {
    match scheme.kind() {
        SchemeKind::Polynomial { r } | SchemeKind::Exponential { r, .. } => match *r {
            Generator::Affine { step, .. } => WeightDecay::Geometric { lambda: step * std::f64::consts::LN_2 },
            Generator::Logarithmic { scale, .. } => WeightDecay::Polynomial { s: scale },
            // Rejected at construction; kept total for safety.
            Generator::Constant { .. } => WeightDecay::Polynomial { s: 0.0 },
        },
        SchemeKind::Custom { .. } => WeightDecay::Finite,
    }
}

/// Growth exponent `θ` with `k_1(x,x) ≍ e^{θx²}` when known exactly, or a
/// lower bound `θ_lo` valid up to a positive constant factor.
fn first_diagonal_growth(scheme: &WeightScheme) -> Option<(f64, bool)> {
    match scheme.kind() {
        SchemeKind::Exponential { r, b } if b.first() == 1.0 => {
            let t = (-r.first()).exp2();
            Some((t / (1.0 + t), true))
        }
        SchemeKind::Polynomial { .. } => Some((pg_theta0(), false)),
        _ => None,
    }
}

fn x_down(scheme: &WeightScheme, x: &SequenceSpec) -> (Verdict, String) {
    if x.is_bounded() {
        return (Verdict::In, "bounded sequence: ℓ∞ ⊂ 𝒳↑ ⊆ 𝒳 ⊆ 𝒳↓".into());
    }
    match (weight_decay(scheme), *x) {
        (WeightDecay::Finite, _) => (Verdict::In, "finitely many non-zero terms".into()),
        (WeightDecay::Geometric { .. }, _) => {
            (Verdict::In, "geometric weights 2^{-r_j} dominate polynomial growth of x_j²".into())
        }
        (WeightDecay::Polynomial { s }, SequenceSpec::Power { p, .. }) => {
            let e = s - 2.0 * p;
            if e > 1.0 {
                (Verdict::In, format!("terms ≍ j^(-{e}), p-series with exponent > 1"))
            } else {
                (Verdict::Out, format!("terms ≍ j^(-{e}), p-series with exponent ≤ 1 diverges"))
            }
        }
        (WeightDecay::Polynomial { s }, _) => (Verdict::In, format!("terms ≍ j^(-{s})·polylog(j) with {s} > 1")),
    }
}

fn x_up(scheme: &WeightScheme, x: &SequenceSpec) -> (Verdict, String) {
    if x.is_bounded() {
        return (Verdict::In, "bounded sequence: Cramér bound and Σγ_j < ∞".into());
    }
    let growth = first_diagonal_growth(scheme);
    match (weight_decay(scheme), *x) {
        (WeightDecay::Finite, _) => (Verdict::In, "finitely many non-zero γ_j".into()),
        (WeightDecay::Polynomial { s }, SequenceSpec::Power { p, .. }) => {
            let nu = ((s - 1.0) / (2.0 * p)).ceil().max(1.0);
            (Verdict::Out, format!("γ_j·α_(ν,1)^(-1)·h_ν²(x_j) ≍ j^(2pν−{s}) with ν = {nu} is not summable"))
        }
        (WeightDecay::Polynomial { s }, SequenceSpec::Logarithmic { c, p }) => {
            let c2 = c * c;
            if 2.0 * p < 1.0 {
                (Verdict::In, "Cramér: terms ≤ j^(-s+o(1)) with s > 1".into())
            } else if 2.0 * p == 1.0 && s - 0.5 * c2 > 1.0 {
                (Verdict::In, format!("Cramér: terms ≤ C·j^(-{})", s - 0.5 * c2))
            } else {
                match growth {
                    Some((theta, _)) if 2.0 * p > 1.0 => {
                        (Verdict::Out, format!("k_1(x,x) ≥ C·e^({theta:.4}x²) grows faster than any power of j"))
                    }
                    Some((theta, _)) if s - theta * c2 <= 1.0 => {
                        (Verdict::Out, format!("k_1(x,x) ≥ C·e^({theta:.4}x²): terms ≥ C·j^(-{})", s - theta * c2))
                    }
                    _ => (Verdict::Undecided, "no comparison test applies".into()),
                }
            }
        }
        (WeightDecay::Geometric { .. }, SequenceSpec::Logarithmic { .. }) => {
            (Verdict::In, "Cramér: e^(x_j²/2) is subexponential in j against geometric γ_j".into())
        }
        (WeightDecay::Geometric { lambda }, SequenceSpec::Power { c, p }) => {
            let c2 = c * c;
            if 2.0 * p < 1.0 {
                (Verdict::In, "Cramér: e^(x_j²/2) is subexponential in j against geometric γ_j".into())
            } else if 2.0 * p == 1.0 {
                match growth {
                    Some((theta, true)) => {
                        if theta * c2 < lambda {
                            (Verdict::In, format!("k_1(x,x) ≍ e^({theta:.4}x²): ratio e^({}) < 1", theta * c2 - lambda))
                        } else {
                            (Verdict::Out, format!("k_1(x,x) ≍ e^({theta:.4}x²): terms do not tend to 0"))
                        }
                    }
                    _ if 0.5 * c2 < lambda => (Verdict::In, "Cramér: geometric comparison".into()),
                    Some((theta, false)) if theta * c2 >= lambda => {
                        (Verdict::Out, format!("k_1(x,x) ≥ C·e^({theta:.4}x²): terms do not tend to 0"))
                    }
                    _ => (Verdict::Undecided, "geometric comparison is inconclusive".into()),
                }
            } else {
                match growth {
                    Some((theta, _)) => (Verdict::Out, format!("k_1(x,x) ≥ C·e^({theta:.4}x²) outgrows geometric γ_j")),
                    None => (Verdict::Undecided, "no comparison test applies".into()),
                }
            }
        }
        (_, SequenceSpec::Constant { .. }) => unreachable!("constant sequences are bounded"),
    }
}

fn x_full(scheme: &WeightScheme, x: &SequenceSpec) -> (Verdict, String) {
    if let SchemeKind::Custom { .. } = scheme.kind() {
        return (Verdict::In, "finitely many non-trivial coordinates".into());
    }
    let (up, up_cert) = x_up(scheme, x);
    if up == Verdict::In {
        return (Verdict::In, format!("𝒳↑ ⊆ 𝒳 and {up_cert}"));
    }
    let (down, down_cert) = x_down(scheme, x);
    if down == Verdict::Out {
        return (Verdict::Out, format!("𝒳 ⊆ 𝒳↓ and {down_cert}"));
    }
    if let SchemeKind::Exponential { b, .. } = scheme.kind() {
        if b.first() >= 1.0 {
            return (down, format!("𝒳 = {{Σ 2^(-r_j) x_j² < ∞}} for b_1 ≥ 1: {down_cert}"));
        }
    }
    (Verdict::Undecided, "no comparison test applies".into())
}

/// `k_j(x, x) − 1`, or `+∞` if it cannot be represented.
fn diagonal_excess(scheme: &WeightScheme, kernels: &mut Vec<Option<Kernel1D>>, j: usize, x: f64) -> f64 {
    if let Ok(res) = kernel_eval_1d_capped(scheme, j, x, x, 1e-12, 4096) {
        return res.value - 1.0;
    }
    if kernels.len() < j {
        kernels.resize(j, None);
    }
    let k = kernels[j - 1].get_or_insert_with(|| Kernel1D::new(scheme, j));
    match k.value(x, x) {
        Ok(v) if v.is_finite() => v - 1.0,
        _ => f64::INFINITY,
    }
}

fn partial_sum(scheme: &WeightScheme, x: &SequenceSpec, domain: Domain, j_max: usize) -> f64 {
    let mut kernels = Vec::new();
    let mut acc = 0.0;
    for j in 1..=j_max {
        let xj = x.at(j);
        let term = match domain {
            Domain::XDown => scheme.inv_alpha(1, j) * xj * xj,
            Domain::XUp => match gamma(scheme, j) {
                Ok(0.0) => 0.0,
                Ok(g) => g * diagonal_excess(scheme, &mut kernels, 1, xj),
                Err(_) => f64::INFINITY,
            },
            Domain::X => diagonal_excess(scheme, &mut kernels, j, xj),
        };
        acc += term;
        if !acc.is_finite() {
            return f64::INFINITY;
        }
    }
    acc
}

/// Decides whether `x` lies in the given maximal domain when a comparison
/// test applies, and reports the partial sum over `j ≤ j_max`.
pub fn domain_check(scheme: &WeightScheme, x: &SequenceSpec, domain: Domain, j_max: usize) -> DomainVerdict {
    let (verdict, certificate) = if scheme.is_univariate() {
        (Verdict::Undecided, "domains are defined for infinite-variate schemes".to_string())
    } else {
        match domain {
            Domain::X => x_full(scheme, x),
            Domain::XUp => x_up(scheme, x),
            Domain::XDown => x_down(scheme, x),
        }
    };
    let partial = if scheme.is_univariate() { f64::NAN } else { partial_sum(scheme, x, domain, j_max.max(1)) };
    DomainVerdict { domain, verdict, partial_sum: partial, certificate }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample_scheme() -> WeightScheme {
        WeightScheme::exponential(Generator::logarithmic_shifted(0.0, 3.0, 1.0), Generator::constant(1.0)).unwrap()
    }

    #[test]
    fn square_root_sequence_separates_domains() {
        let s = counterexample_scheme();
        let x = SequenceSpec::Power { c: 1.0, p: 0.5 };
        let full = domain_check(&s, &x, Domain::X, 200);
        assert_eq!(full.verdict, Verdict::In);
        assert!(full.partial_sum.is_finite());
        let up = domain_check(&s, &x, Domain::XUp, 200);
        assert_eq!(up.verdict, Verdict::Out);
        assert_eq!(domain_check(&s, &x, Domain::XDown, 200).verdict, Verdict::In);
    }

    #[test]
    fn counterexample_partial_sums_behave() {
        // In 𝒳: Σ (j+1)^{-3} j converges; the 𝒳↑ partial sums keep growing
        // at least like the ν = 2 term 2^{-7} Σ (j−1)²/(j+1)³.
        let s = counterexample_scheme();
        let x = SequenceSpec::Power { c: 1.0, p: 0.5 };
        let a = domain_check(&s, &x, Domain::XUp, 100).partial_sum;
        let b = domain_check(&s, &x, Domain::XUp, 400).partial_sum;
        let lower: f64 = (101..=400).map(|j| ((j - 1) as f64).powi(2) / ((j + 1) as f64).powi(3)).sum::<f64>() / 128.0;
        assert!(b - a >= lower);
    }

    #[test]
    fn bounded_sequences_are_in_every_domain() {
        for s in [
            counterexample_scheme(),
            WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap(),
            WeightScheme::polynomial(Generator::affine(2.0, 1.0)).unwrap(),
        ] {
            for d in [Domain::X, Domain::XUp, Domain::XDown] {
                let v = domain_check(&s, &SequenceSpec::Constant { c: 1.0 }, d, 50);
                assert_eq!(v.verdict, Verdict::In, "{s} {d:?}");
                assert!(v.partial_sum.is_finite());
            }
        }
    }

    #[test]
    fn x_membership_implies_x_down() {
        let s = WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap();
        for x in [
            SequenceSpec::Power { c: 1.0, p: 0.5 },
            SequenceSpec::Power { c: 2.0, p: 1.5 },
            SequenceSpec::Logarithmic { c: 1.0, p: 2.0 },
        ] {
            let full = domain_check(&s, &x, Domain::X, 10).verdict;
            let down = domain_check(&s, &x, Domain::XDown, 10).verdict;
            if full == Verdict::In {
                assert_eq!(down, Verdict::In);
            }
            if down == Verdict::Out {
                assert_eq!(full, Verdict::Out);
            }
        }
        // s − 2p = 3 − 3 = 0 ≤ 1 rules the sequence out.
        let v = domain_check(&s, &SequenceSpec::Power { c: 2.0, p: 1.5 }, Domain::X, 10);
        assert_eq!(v.verdict, Verdict::Out);
    }

    #[test]
    fn geometric_weights() {
        let s = WeightScheme::exponential(Generator::affine(1.0, 1.0), Generator::constant(1.0)).unwrap();
        // θ = t/(1+t) with t = 1/2 gives θ = 1/3; λ = ln 2 ≈ 0.693.
        let inside = SequenceSpec::Power { c: 1.0, p: 0.5 };
        assert_eq!(domain_check(&s, &inside, Domain::XUp, 20).verdict, Verdict::In);
        let outside = SequenceSpec::Power { c: 2.0, p: 0.5 };
        assert_eq!(domain_check(&s, &outside, Domain::XUp, 20).verdict, Verdict::Out);
        let fast = SequenceSpec::Power { c: 1.0, p: 1.0 };
        assert_eq!(domain_check(&s, &fast, Domain::XUp, 20).verdict, Verdict::Out);
        assert_eq!(domain_check(&s, &fast, Domain::X, 20).verdict, Verdict::In);
    }

    #[test]
    fn parse_sequences() {
        assert_eq!("power:1,0.5".parse::<SequenceSpec>().unwrap(), SequenceSpec::Power { c: 1.0, p: 0.5 });
        let s = SequenceSpec::Logarithmic { c: 2.0, p: 1.0 };
        assert_eq!(s.to_string().parse::<SequenceSpec>().unwrap(), s);
        assert!("cubic:1".parse::<SequenceSpec>().is_err());
    }
}
