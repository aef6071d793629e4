//! Fourier-weight schemes `α_{ν,j}` and their analytic tail sums.

use std::fmt;
use std::str::FromStr;

use super::generator::{parse_f64, Generator};
use crate::error::{invalid, Error, Result};
use crate::numerics::upper_incomplete_gamma_bound;

/// Continuation of a custom weight row beyond its explicit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// `α_ν = ∞` beyond the table (finite-dimensional coordinate space).
    Vanishing,
    /// `α_ν = (ν+1)^r` beyond the table, `r > 1`.
    Polynomial { r: f64 },
}

/// One coordinate of a custom scheme: `α_1, …, α_M` plus a tail rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomRow {
    pub alpha: Vec<f64>,
    pub tail: TailRule,
}

impl CustomRow {
    pub fn new(alpha: Vec<f64>, tail: TailRule) -> Self {
        Self { alpha, tail }
    }

    fn alpha(&self, nu: usize) -> f64 {
        if nu == 0 {
            1.0
        } else if nu <= self.alpha.len() {
            self.alpha[nu - 1]
        } else {
            match self.tail {
                TailRule::Vanishing => f64::INFINITY,
                TailRule::Polynomial { r } => ((nu + 1) as f64).powf(r),
            }
        }
    }

    fn validate(&self, j: usize) -> Result<()> {
        let mut prev = 1.0;
        for (k, &a) in self.alpha.iter().enumerate() {
            if a.is_nan() || a < prev {
                return Err(invalid(format!(
                    "custom row {j}: weights must be non-decreasing from alpha_0 = 1 (entry {} = {a})",
                    k + 1
                )));
            }
            prev = a;
        }
        if let TailRule::Polynomial { r } = self.tail {
            if !(r > 1.0) || !r.is_finite() {
                return Err(invalid(format!("custom row {j}: polynomial tail needs finite r > 1, got {r}")));
            }
            let next = ((self.alpha.len() + 2) as f64).powf(r);
            if next < prev {
                return Err(invalid(format!("custom row {j}: polynomial tail breaks monotonicity")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    /// `α_{ν,j} = (ν+1)^{r_j}`.
    Polynomial { r: Generator },
    /// `α_{ν,j} = 2^{r_j ν^{b_j}}`.
    Exponential { r: Generator, b: Generator },
    /// Explicit table per coordinate; coordinates beyond the table have
    /// `α_{ν,j} = ∞` for `ν ≥ 1`.
    Custom { rows: Vec<CustomRow> },
}

/// A validated Fourier-weight scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    kind: SchemeKind,
    univariate: bool,
}

impl WeightScheme {
    /// Infinite-variate polynomial-growth weights.
    ///
    /// Requires `r_1 > 1`, `r_j` non-decreasing and `Σ_j 2^{−r_j} < ∞`.
    pub fn polynomial(r: Generator) -> Result<Self> {
        r.validate()?;
        if !(r.first() > 1.0) {
            return Err(invalid(format!("polynomial weights need r_1 > 1, got {}", r.first())));
        }
        check_sequence(&r, "r")?;
        Ok(Self { kind: SchemeKind::Polynomial { r }, univariate: false })
    }

    /// Infinite-variate (sub-)exponential weights.
    pub fn exponential(r: Generator, b: Generator) -> Result<Self> {
        r.validate()?;
        b.validate()?;
        if !(r.first() > 0.0) || !(b.first() > 0.0) {
            return Err(invalid("exponential weights need r_j > 0 and b_j > 0"));
        }
        check_sequence(&r, "r")?;
        if !b.is_nondecreasing() {
            return Err(invalid("b_j must be non-decreasing so that b_1 = inf b_j"));
        }
        Ok(Self { kind: SchemeKind::Exponential { r, b }, univariate: false })
    }

    /// Univariate polynomial weights `(ν+1)^r`; any `r > 1/2` is admissible.
    pub fn polynomial_1d(r: f64) -> Result<Self> {
        if !(r > 0.5) || !r.is_finite() {
            return Err(invalid(format!("univariate polynomial weights need finite r > 1/2, got {r}")));
        }
        Ok(Self { kind: SchemeKind::Polynomial { r: Generator::constant(r) }, univariate: true })
    }

    /// Univariate exponential weights `2^{r ν^b}`.
    pub fn exponential_1d(r: f64, b: f64) -> Result<Self> {
        if !(r > 0.0 && b > 0.0) || !r.is_finite() || !b.is_finite() {
            return Err(invalid(format!("univariate exponential weights need r, b > 0, got r={r}, b={b}")));
        }
        Ok(Self {
            kind: SchemeKind::Exponential { r: Generator::constant(r), b: Generator::constant(b) },
            univariate: true,
        })
    }

    /// Custom weights given row by row for coordinates `1..=rows.len()`.
    pub fn custom(rows: Vec<CustomRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("custom scheme needs at least one row"));
        }
        for (k, row) in rows.iter().enumerate() {
            row.validate(k + 1)?;
        }
        Ok(Self { kind: SchemeKind::Custom { rows }, univariate: false })
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn is_univariate(&self) -> bool {
        self.univariate
    }

    /// Fourier weight `α_{ν,j}`; overflow yields `+∞`.
    pub fn alpha(&self, nu: usize, j: usize) -> f64 {
        assert!(j >= 1, "coordinates are numbered from 1");
        if nu == 0 {
            return 1.0;
        }
        match &self.kind {
            SchemeKind::Polynomial { r } => ((nu + 1) as f64).powf(r.at(j)),
            SchemeKind::Exponential { r, b } => (r.at(j) * (nu as f64).powf(b.at(j))).exp2(),
            SchemeKind::Custom { rows } => rows.get(j - 1).map_or(f64::INFINITY, |row| row.alpha(nu)),
        }
    }

    /// `α_{ν,j}^{−1}`, zero for infinite weights.
    pub fn inv_alpha(&self, nu: usize, j: usize) -> f64 {
        if nu == 0 {
            return 1.0;
        }
        match &self.kind {
            SchemeKind::Polynomial { r } => (-r.at(j) * ((nu + 1) as f64).ln()).exp(),
            SchemeKind::Exponential { r, b } => (-r.at(j) * (nu as f64).powf(b.at(j))).exp2(),
            SchemeKind::Custom { .. } => {
                let a = self.alpha(nu, j);
                if a.is_infinite() {
                    0.0
                } else {
                    1.0 / a
                }
            }
        }
    }

    /// Smoothness parameter `r_j` for the closed-form families.
    pub fn r(&self, j: usize) -> Option<f64> {
        match &self.kind {
            SchemeKind::Polynomial { r } | SchemeKind::Exponential { r, .. } => Some(r.at(j)),
            SchemeKind::Custom { .. } => None,
        }
    }

    /// Number of coordinates whose space is non-trivial, if finite.
    pub fn active_coordinates(&self) -> Option<usize> {
        match &self.kind {
            SchemeKind::Custom { rows } => Some(rows.len()),
            _ if self.univariate => Some(1),
            _ => None,
        }
    }

    /// Largest `ν` with a finite weight in coordinate `j`, if finite.
    pub fn nu_support(&self, j: usize) -> Option<usize> {
        match &self.kind {
            SchemeKind::Custom { rows } => match rows.get(j - 1) {
                None => Some(0),
                Some(row) => match row.tail {
                    TailRule::Vanishing => Some(row.alpha.iter().take_while(|a| a.is_finite()).count()),
                    TailRule::Polynomial { .. } => None,
                },
            },
            _ => None,
        }
    }

    /// Bracket `[lo, hi]` for `Σ_{ν>N} α_{ν,j}^{−1}`; `hi = ∞` if the series
    /// diverges.
    pub fn nu_tail(&self, j: usize, big_n: usize) -> (f64, f64) {
        match &self.kind {
            SchemeKind::Polynomial { r } => pg_tail(r.at(j), big_n),
            SchemeKind::Exponential { r, b } => eg_tail(r.at(j), b.at(j), big_n),
            SchemeKind::Custom { rows } => {
                let Some(row) = rows.get(j - 1) else { return (0.0, 0.0) };
                let m = row.alpha.len();
                let explicit: f64 = (big_n + 1..=m).map(|nu| self.inv_alpha(nu, j)).sum();
                let (lo, hi) = match row.tail {
                    TailRule::Vanishing => (0.0, 0.0),
                    TailRule::Polynomial { r } => pg_tail(r, big_n.max(m)),
                };
                (explicit + lo, explicit + hi)
            }
        }
    }

    /// Upper bound on `Σ_{j>J} Σ_{ν≥1} α_{ν,j}^{−1}`.
    pub fn mass_tail(&self, big_j: usize) -> Result<f64> {
        if self.univariate {
            return Err(Error::Unsupported("coordinate tails of a univariate scheme".into()));
        }
        match &self.kind {
            SchemeKind::Polynomial { r } => {
                let rj = r.at(big_j + 1);
                let (_, geo) = r.pow2_tail(big_j, 1.0).ok_or_else(|| Error::Divergent("sum of 2^{-r_j}".into()))?;
                Ok((1.0 + 2.0 / (rj - 1.0)) * geo)
            }
            SchemeKind::Exponential { r, b } => {
                let rj = r.at(big_j + 1);
                let bj = b.at(big_j + 1);
                let (_, geo) = r.pow2_tail(big_j, 1.0).ok_or_else(|| Error::Divergent("sum of 2^{-r_j}".into()))?;
                // Σ_{ν≥1} 2^{−r_j ν^{b_j}} ≤ 2^{−r_j} · Σ_{ν≥1} 2^{−r'(ν^{b'}−1)}
                let s = 1.0 + rj.exp2() * eg_tail(rj, bj, 1).1;
                Ok(s * geo)
            }
            SchemeKind::Custom { rows } => Ok((big_j + 1..=rows.len()).map(|j| self.nu_tail(j, 0).1).sum()),
        }
    }
}

fn check_sequence(g: &Generator, name: &str) -> Result<()> {
    if !g.is_nondecreasing() {
        return Err(invalid(format!("{name}_j must be non-decreasing so that {name}_1 = inf {name}_j")));
    }
    if g.pow2_tail(0, 1.0).is_none() {
        return Err(Error::Divergent(format!("sum of 2^(-{name}_j) for generator {g}")));
    }
    Ok(())
}

/// Bracket for `Σ_{ν>N} (ν+1)^{−r}` using convexity of `t ↦ t^{−r}`.
pub(crate) fn pg_tail(r: f64, big_n: usize) -> (f64, f64) {
    let m = big_n as f64 + 2.0;
    if r <= 1.0 {
        return (m.powf(-r), f64::INFINITY);
    }
    let lo = m.powf(1.0 - r) / (r - 1.0) + 0.5 * m.powf(-r);
    let hi = (m - 0.5).powf(1.0 - r) / (r - 1.0);
    (lo, hi)
}

/// Bracket for `Σ_{ν>N} 2^{−r ν^b}`.
pub(crate) fn eg_tail(r: f64, b: f64, big_n: usize) -> (f64, f64) {
    let first = (-r * ((big_n + 1) as f64).powf(b)).exp2();
    if b >= 1.0 {
        // Consecutive ratios are at most 2^{−r}.
        (first, first / -(-r * std::f64::consts::LN_2).exp_m1())
    } else {
        let c = r * std::f64::consts::LN_2;
        let s = 1.0 / b;
        let x = c * (big_n as f64).powf(b);
        let hi = s * c.powf(-s) * upper_incomplete_gamma_bound(s, x);
        (first, hi.max(first))
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, self.univariate) {
            (SchemeKind::Polynomial { r }, true) => write!(f, "pg({})", r.first()),
            (SchemeKind::Polynomial { r }, false) => write!(f, "pg({r})"),
            (SchemeKind::Exponential { r, b }, true) => write!(f, "eg({},{})", r.first(), b.first()),
            (SchemeKind::Exponential { r, b }, false) => write!(f, "eg({r};{b})"),
            (SchemeKind::Custom { rows }, _) => {
                write!(f, "custom(")?;
                for (k, row) in rows.iter().enumerate() {
                    if k > 0 {
                        write!(f, "/")?;
                    }
                    let entries: Vec<String> = row.alpha.iter().map(|a| a.to_string()).collect();
                    write!(f, "{}", entries.join(","))?;
                    match row.tail {
                        TailRule::Vanishing => write!(f, ";zero")?,
                        TailRule::Polynomial { r } => write!(f, ";pg:{r}")?,
                    }
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    /// Parses `pg(2)`, `pg(log:2,3)`, `eg(1,1)`, `eg(log:0,3,1;const:1)`,
    /// `custom(4,9;zero/8,27;pg:3)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| invalid(format!("scheme '{s}' lacks '('")))?;
        if !s.ends_with(')') {
            return Err(invalid(format!("scheme '{s}' lacks closing ')'")));
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let body = &s[open + 1..s.len() - 1];
        match name.as_str() {
            "pg" => {
                if body.contains(':') {
                    WeightScheme::polynomial(body.parse()?)
                } else {
                    WeightScheme::polynomial_1d(parse_f64(body)?)
                }
            }
            "eg" => {
                if body.contains(':') {
                    let (r, b) = body
                        .split_once(';')
                        .ok_or_else(|| invalid("infinite-variate eg needs 'r-generator;b-generator'"))?;
                    WeightScheme::exponential(r.parse()?, b.parse()?)
                } else {
                    let (r, b) = body.split_once(',').ok_or_else(|| invalid("univariate eg needs 'r,b'"))?;
                    WeightScheme::exponential_1d(parse_f64(r)?, parse_f64(b)?)
                }
            }
            "custom" => {
                let rows = body
                    .split('/')
                    .map(|row| {
                        let (table, tail) = row.split_once(';').unwrap_or((row, "zero"));
                        let alpha = if table.trim().is_empty() {
                            Vec::new()
                        } else {
                            table.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?
                        };
                        let tail = match tail.trim() {
                            "zero" => TailRule::Vanishing,
                            t => match t.strip_prefix("pg:") {
                                Some(r) => TailRule::Polynomial { r: parse_f64(r)? },
                                None => return Err(invalid(format!("unknown tail rule '{t}'"))),
                            },
                        };
                        Ok(CustomRow::new(alpha, tail))
                    })
                    .collect::<Result<Vec<_>>>()?;
                WeightScheme::custom(rows)
            }
            _ => Err(invalid(format!("unknown scheme family '{name}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::compensated_sum;

    #[test]
    fn alpha_examples() {
        let pg = WeightScheme::polynomial_1d(2.0).unwrap();
        assert_eq!(pg.alpha(3, 1), 16.0);
        let eg = WeightScheme::exponential_1d(1.0, 1.0).unwrap();
        assert_eq!(eg.alpha(3, 1), 8.0);
        let c = WeightScheme::custom(vec![CustomRow::new(vec![2.0, 5.0], TailRule::Vanishing)]).unwrap();
        for s in [&pg, &eg, &c] {
            assert_eq!(s.alpha(0, 1), 1.0);
            assert_eq!(s.alpha(0, 7), 1.0);
        }
        assert_eq!(c.alpha(3, 1), f64::INFINITY);
        assert_eq!(c.inv_alpha(3, 1), 0.0);
        assert_eq!(c.alpha(1, 2), f64::INFINITY);
        let big = WeightScheme::exponential_1d(50.0, 2.0).unwrap();
        assert_eq!(big.alpha(40, 1), f64::INFINITY);
        assert_eq!(big.inv_alpha(40, 1), 0.0);
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(WeightScheme::polynomial(Generator::constant(2.0)).is_err());
        assert!(WeightScheme::polynomial(Generator::logarithmic(1.0, 3.0)).is_err());
        assert!(WeightScheme::polynomial(Generator::logarithmic(2.0, 1.0)).is_err());
        assert!(WeightScheme::polynomial(Generator::affine(2.0, -1.0)).is_err());
        assert!(WeightScheme::exponential(Generator::affine(1.0, 1.0), Generator::constant(0.0)).is_err());
        assert!(WeightScheme::polynomial_1d(0.5).is_err());
        assert!(WeightScheme::custom(vec![CustomRow::new(vec![3.0, 2.0], TailRule::Vanishing)]).is_err());
        assert!(WeightScheme::custom(vec![CustomRow::new(vec![0.5], TailRule::Vanishing)]).is_err());
        assert!(WeightScheme::custom(vec![CustomRow::new(vec![2.0], TailRule::Polynomial { r: 1.0 })]).is_err());
        assert!(WeightScheme::custom(vec![]).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for text in
            ["pg(2)", "pg(log:2,3)", "pg(affine:2,3)", "eg(1,1)", "eg(log:0,3,1;const:1)", "custom(4,9;zero/8,27;pg:3)"]
        {
            let s: WeightScheme = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
            let again: WeightScheme = s.to_string().parse().unwrap();
            assert_eq!(again, s);
        }
        assert!("pg(const:2)".parse::<WeightScheme>().is_err());
        assert!("zz(2)".parse::<WeightScheme>().is_err());
    }

    #[test]
    fn nu_tails_bracket_direct_sums() {
        let schemes = [
            WeightScheme::polynomial_1d(1.5).unwrap(),
            WeightScheme::polynomial_1d(3.0).unwrap(),
            WeightScheme::exponential_1d(1.0, 1.0).unwrap(),
            WeightScheme::exponential_1d(0.7, 0.5).unwrap(),
            WeightScheme::exponential_1d(0.5, 1.5).unwrap(),
        ];
        for s in &schemes {
            for big_n in [0usize, 3, 20, 100] {
                let (lo, hi) = s.nu_tail(1, big_n);
                let cut = 3_000_000;
                let direct = compensated_sum((big_n + 1..=cut).map(|nu| s.inv_alpha(nu, 1)));
                let rest = s.nu_tail(1, cut).1;
                assert!(lo <= direct + rest, "{s} N={big_n}: lo {lo} > {direct} + {rest}");
                assert!(direct <= hi, "{s} N={big_n}: direct {direct} > hi {hi}");
            }
        }
    }

    #[test]
    fn mass_tail_bounds_double_sum() {
        let s = WeightScheme::polynomial(Generator::logarithmic(2.0, 3.0)).unwrap();
        for big_j in [0usize, 2, 10] {
            let bound = s.mass_tail(big_j).unwrap();
            let direct: f64 = (big_j + 1..=400)
                .map(|j| {
                    let (lower, _) = s.nu_tail(j, 0);
                    lower
                })
                .sum();
            assert!(direct <= bound, "J={big_j}: {direct} > {bound}");
        }
        let e =
            WeightScheme::exponential(Generator::logarithmic_shifted(0.0, 3.0, 1.0), Generator::constant(1.0)).unwrap();
        let bound = e.mass_tail(3).unwrap();
        let direct: f64 = (4..=2000).map(|j| (1..60).map(|nu| e.inv_alpha(nu, j)).sum::<f64>()).sum();
        assert!(direct <= bound);
    }
}
