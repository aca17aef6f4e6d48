//! Continued fractions and rational approximation of a damping location ξ₀.
//!
//! Quotients are only ever reported when certified: exactly for rationals and
//! quadratic surds, by interval arithmetic for decimal input.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::RateFunction;

/// `e − 2` to 70 digits.
const E_MINUS_2: &str = "0.7182818284590452353602874713526624977572470936999595749669676277240766";
/// `π − 3` to 70 digits.
const PI_MINUS_3: &str = "0.1415926535897932384626433832795028841971693993751058209749445923078164";

/// Cor. 6.2's `ε` in `n log(n)^{1+ε}`.
pub const DEFAULT_LOG_EPSILON: f64 = 0.1;

/// Quotient size above which a finite expansion is taken as evidence of
/// unbounded quotients.
pub const QUOTIENT_BOUND: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Xi0 {
    Rational(BigRational),
    /// `(a + b√d)/c` with `d` not a perfect square.
    Quadratic { a: BigInt, b: BigInt, d: BigInt, c: BigInt },
    /// A decimal expansion trusted to one unit in its last digit.
    Decimal { text: String, value: BigRational, ulp: BigRational },
}

fn parse_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|_| Error::Config(format!("'{s}' is not an integer")))
}

fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

fn parse_decimal(text: &str) -> Result<Xi0> {
    let (whole, frac) = text.split_once('.').ok_or_else(|| Error::Config(format!("'{text}' is not a decimal")))?;
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || !whole.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Config(format!("'{text}' is not a decimal")));
    }
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let digits = parse_int(&format!("{}{frac}", if whole.is_empty() { "0" } else { whole }))?;
    Ok(Xi0::Decimal {
        text: text.to_string(),
        value: BigRational::new(digits, scale.clone()),
        ulp: BigRational::new(BigInt::one(), scale),
    })
}

/// Parses `(a ± b*sqrtD)/c`, `sqrtD - a`, `sqrt(D)` and similar.
fn parse_quadratic(s: &str) -> Result<Xi0> {
    let bad = || Error::Config(format!("cannot read '{s}' as (a + b*sqrtD)/c"));
    let (body, c) = match s.rfind('/') {
        Some(k) if !s[k + 1..].contains(')') => (&s[..k], parse_int(&s[k + 1..])?),
        _ => (s, BigInt::one()),
    };
    let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(body);
    let (mut a, mut b, mut d) = (BigInt::zero(), BigInt::zero(), None);
    let mut terms = Vec::new();
    let mut start = 0;
    for (k, ch) in body.char_indices() {
        if (ch == '+' || ch == '-') && k > 0 && !body[..k].ends_with('*') {
            terms.push(&body[start..k]);
            start = k;
        }
    }
    terms.push(&body[start..]);
    for term in terms {
        let (sign, t) = match term.as_bytes().first() {
            Some(b'-') => (-1, &term[1..]),
            Some(b'+') => (1, &term[1..]),
            _ => (1, term),
        };
        if let Some(k) = t.find("sqrt") {
            if d.is_some() {
                return Err(bad());
            }
            let coeff = t[..k].trim_end_matches('*');
            let coeff = if coeff.is_empty() { BigInt::one() } else { parse_int(coeff)? };
            let rad = t[k + 4..].trim_start_matches('(').trim_end_matches(')');
            d = Some(parse_int(rad)?);
            b = coeff * sign;
        } else if !t.is_empty() {
            a += parse_int(t)? * sign;
        } else {
            return Err(bad());
        }
    }
    let d = d.ok_or_else(bad)?;
    if c.is_zero() || !d.is_positive() {
        return Err(bad());
    }
    if b.is_zero() || is_square(&d) {
        let r = d.sqrt();
        return Ok(Xi0::Rational(BigRational::new(a + b * r, c)));
    }
    Ok(Xi0::Quadratic { a, b, d, c })
}

impl FromStr for Xi0 {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let x = match s.as_str() {
            "e-2" => parse_decimal(E_MINUS_2)?,
            "pi-3" => parse_decimal(PI_MINUS_3)?,
            _ if s.contains("sqrt") => parse_quadratic(&s)?,
            _ if s.contains('.') => parse_decimal(&s)?,
            _ => {
                let (p, q) = s.split_once('/').unwrap_or((&s, "1"));
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(Error::Config("zero denominator".into()));
                }
                Xi0::Rational(BigRational::new(parse_int(p)?, q))
            }
        };
        x.check_unit_interval()?;
        Ok(x)
    }
}

impl fmt::Display for Xi0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Xi0::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Xi0::Quadratic { a, b, d, c } => {
                let mut body = match b {
                    b if b.is_one() => format!("sqrt{d}"),
                    b if (-b).is_one() => format!("-sqrt{d}"),
                    b => format!("{b}*sqrt{d}"),
                };
                if a.is_positive() {
                    body += &format!("+{a}");
                } else if a.is_negative() {
                    body += &format!("-{}", a.abs());
                }
                if c.is_one() {
                    f.write_str(&body)
                } else {
                    write!(f, "({body})/{c}")
                }
            }
            Xi0::Decimal { text, .. } => f.write_str(text),
        }
    }
}

impl Serialize for Xi0 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Xi0 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(P + √N)/Q` with `Q | N − P²`, the state of the exact Gauss map.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Surd {
    p: BigInt,
    n: BigInt,
    q: BigInt,
}

impl Surd {
    fn new(a: &BigInt, b: &BigInt, d: &BigInt, c: &BigInt) -> Self {
        let n = b * b * d;
        let (mut p, mut q) = if b.is_positive() { (a.clone(), c.clone()) } else { (-a, -c) };
        let mut n = n;
        if !(&n - &p * &p).is_multiple_of(&q) {
            let aq = q.abs();
            p *= &aq;
            n *= &q * &q;
            q *= aq;
        }
        Surd { p, n, q }
    }

    /// Sign of `√N − m`.
    fn sqrt_cmp(&self, m: &BigInt) -> Ordering {
        if m.is_negative() {
            Ordering::Greater
        } else {
            self.n.cmp(&(m * m))
        }
    }

    /// Whether `(P + √N)/Q ≥ k`.
    fn at_least(&self, k: &BigInt) -> bool {
        let m = k * &self.q - &self.p;
        match self.sqrt_cmp(&m) {
            Ordering::Greater => self.q.is_positive(),
            Ordering::Less => self.q.is_negative(),
            Ordering::Equal => true,
        }
    }

    fn floor(&self) -> BigInt {
        let s = self.n.sqrt();
        let mut k = (&self.p + &s).div_floor(&self.q);
        while !self.at_least(&k) {
            k -= 1;
        }
        while self.at_least(&(&k + 1)) {
            k += 1;
        }
        k
    }

    /// `1/(x − a)`.
    fn step(&self, a: &BigInt) -> Surd {
        let p = a * &self.q - &self.p;
        let q = (&self.n - &p * &p) / &self.q;
        Surd { p, n: self.n.clone(), q }
    }
}

impl Xi0 {
    fn check_unit_interval(&self) -> Result<()> {
        let ok = match self {
            Xi0::Rational(r) => r.is_positive() && *r < BigRational::one(),
            Xi0::Quadratic { a, b, d, c } => {
                let s = Surd::new(a, b, d, c);
                s.floor().is_zero()
            }
            Xi0::Decimal { value, ulp, .. } => {
                let lo = value - ulp;
                let hi = value + ulp;
                lo.is_positive() && hi < BigRational::one()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("damping location {self} must lie in (0, 1)")))
        }
    }

    /// A rational within `2^-120` (exact for rationals, midpoint for decimals).
    fn approximation(&self) -> BigRational {
        match self {
            Xi0::Rational(r) => r.clone(),
            Xi0::Decimal { value, .. } => value.clone(),
            Xi0::Quadratic { .. } => {
                let cf = expand(self, 200);
                let conv = convergents_of(0, &cf.quotients);
                let target = BigInt::one() << 60;
                let (p, q) = conv.iter().find(|(_, q)| *q > target).or(conv.last()).cloned().unwrap();
                BigRational::new(p, q)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.approximation())
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Xi0::Rational(_))
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    let (num, den) = (r.numer(), r.denom());
    if num.is_zero() {
        return 0.0;
    }
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 { (num << shift as usize) / den } else { num / (den << (-shift) as usize) };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// `(hi, lo)` with `hi + lo` equal to `r` to about 106 bits.
fn double_double(r: &BigRational) -> (f64, f64) {
    let hi = ratio_to_f64(r);
    let exact = BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    (hi, ratio_to_f64(&(r - exact)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a0: u64,
    /// `a_1, a_2, ...`, all certified.
    pub quotients: Vec<u64>,
    /// The expansion ended exactly (rational input).
    pub terminated: bool,
    /// A repeated Gauss-map state was seen (quadratic input).
    pub periodic: bool,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }
}

struct Expansion {
    quotients: Vec<u64>,
    terminated: bool,
    exhausted: bool,
    periodic: bool,
}

fn to_quotient(a: &BigInt) -> Option<u64> {
    a.to_u64()
}

fn expand(xi0: &Xi0, depth: usize) -> Expansion {
    let mut out = Expansion { quotients: Vec::new(), terminated: false, exhausted: false, periodic: false };
    match xi0 {
        Xi0::Rational(r) => {
            let mut x = r.clone();
            while out.quotients.len() < depth {
                if x.is_zero() {
                    out.terminated = true;
                    break;
                }
                x = x.recip();
                let a = x.floor();
                match to_quotient(a.numer()) {
                    Some(v) => out.quotients.push(v),
                    None => {
                        out.exhausted = true;
                        break;
                    }
                }
                x -= a;
            }
            if x.is_zero() {
                out.terminated = true;
            }
        }
        Xi0::Quadratic { a, b, d, c } => {
            let mut s = Surd::new(a, b, d, c);
            let a0 = s.floor();
            s = s.step(&a0);
            let mut seen = std::collections::HashSet::new();
            while out.quotients.len() < depth {
                if !seen.insert((s.p.clone(), s.q.clone())) {
                    out.periodic = true;
                }
                let a = s.floor();
                match to_quotient(&a) {
                    Some(v) => out.quotients.push(v),
                    None => {
                        out.exhausted = true;
                        break;
                    }
                }
                s = s.step(&a);
            }
        }
        Xi0::Decimal { value, ulp, .. } => {
            let (mut lo, mut hi) = (value - ulp, value + ulp);
            while out.quotients.len() < depth {
                if !lo.is_positive() {
                    out.exhausted = true;
                    break;
                }
                let (rl, rh) = (hi.recip(), lo.recip());
                let (a, b) = (rl.floor(), rh.floor());
                if a != b {
                    out.exhausted = true;
                    break;
                }
                match to_quotient(a.numer()) {
                    Some(v) => out.quotients.push(v),
                    None => {
                        out.exhausted = true;
                        break;
                    }
                }
                lo = rl - &a;
                hi = rh - a;
            }
        }
    }
    out
}

/// The first `depth` partial quotients of `ξ₀ ∈ (0, 1)`, each certified.
pub fn continued_fraction(xi0: &Xi0, depth: usize) -> Result<ContinuedFraction> {
    let e = expand(xi0, depth);
    if e.exhausted {
        return Err(Error::PrecisionExhausted { prefix: e.quotients });
    }
    Ok(ContinuedFraction { a0: 0, quotients: e.quotients, terminated: e.terminated, periodic: e.periodic })
}

fn convergents_of(a0: u64, quotients: &[u64]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(a0), BigInt::one());
    let mut out = vec![(p1.clone(), q1.clone())];
    for &a in quotients {
        let a = BigInt::from(a);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2.clone(), q2.clone());
        out.push((p2, q2));
    }
    out
}

/// `p_k/q_k` for `k = 0, ..., depth`.
pub fn convergents(cf: &ContinuedFraction) -> Vec<(BigInt, BigInt)> {
    convergents_of(cf.a0, &cf.quotients)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxStats {
    pub n_max: u64,
    /// `min_{n ≤ n_max} n·dist(nξ₀, ℤ)`
    pub c_est: f64,
    pub argmin: u64,
    /// Same minimum restricted to `n ≥ ⌈√n_max⌉`.
    pub c_tail: f64,
    pub tail_start: u64,
    pub tail_argmin: u64,
    pub max_quotient: Option<u64>,
    pub certified_depth: usize,
    pub terminated: bool,
    pub periodic: bool,
    /// Periodic expansion, or no quotient of at least [`QUOTIENT_BOUND`]
    /// within the certified depth of a non-terminating expansion.
    pub bounded_quotients: bool,
}

#[derive(Clone, Copy)]
struct Best {
    c: f64,
    n: u64,
    tail: f64,
    tail_n: u64,
}

fn merge(a: Best, b: Best) -> Best {
    let pick = |x: (f64, u64), y: (f64, u64)| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x };
    let (c, n) = pick((a.c, a.n), (b.c, b.n));
    let (tail, tail_n) = pick((a.tail, a.tail_n), (b.tail, b.tail_n));
    Best { c, n, tail, tail_n }
}

/// Brute-force approximation constant plus certified quotient statistics.
pub fn constant_type_check(xi0: &Xi0, n_max: u64, depth: usize) -> Result<ApproxStats> {
    if n_max == 0 || n_max > 10_000_000 {
        return Err(Error::Domain(format!("n_max must lie in [1, 1e7], got {n_max}")));
    }
    let tail_start = (n_max as f64).sqrt().ceil() as u64;
    let small = match xi0 {
        Xi0::Rational(r) => match (r.numer().to_u64(), r.denom().to_u64()) {
            (Some(p), Some(q)) => Some((p as u128, q as u128)),
            _ => None,
        },
        _ => None,
    };
    let (hi, lo) = double_double(&xi0.approximation());
    let dist = |n: u64| -> f64 {
        if let Some((p, q)) = small {
            let r = (n as u128 * p) % q;
            return r.min(q - r) as f64 / q as f64;
        }
        let nf = n as f64;
        let prod = nf * hi;
        let err = nf.mul_add(hi, -prod);
        let d = (prod - prod.round()) + err + nf * lo;
        (d - d.round()).abs()
    };
    const CHUNK: u64 = 1 << 16;
    let chunks = n_max.div_ceil(CHUNK);
    let init = Best { c: f64::INFINITY, n: 0, tail: f64::INFINITY, tail_n: 0 };
    let best = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut b = init;
            for n in (k * CHUNK + 1)..=((k + 1) * CHUNK).min(n_max) {
                let v = n as f64 * dist(n);
                if v < b.c {
                    b.c = v;
                    b.n = n;
                }
                if n >= tail_start && v < b.tail {
                    b.tail = v;
                    b.tail_n = n;
                }
            }
            b
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(init, merge);
    let e = expand(xi0, depth);
    let max_quotient = e.quotients.iter().copied().max();
    let bounded_quotients =
        e.periodic || (!e.terminated && !e.quotients.is_empty() && max_quotient.unwrap_or(0) < QUOTIENT_BOUND);
    Ok(ApproxStats {
        n_max,
        c_est: best.c,
        argmin: best.n,
        c_tail: best.tail,
        tail_start,
        tail_argmin: best.tail_n,
        max_quotient,
        certified_depth: e.quotients.len(),
        terminated: e.terminated,
        periodic: e.periodic,
        bounded_quotients,
    })
}

/// `2√2·c/n ≤ √2|sin(nπξ₀)|`, from `sin(πr) ≥ 2r` on `[0, 1/2]`; `None` for `c = 0`.
pub fn sine_coupling_lower_bound(c_est: f64, n: u64) -> Option<f64> {
    (c_est > 0.0 && n > 0).then(|| 2.0 * std::f64::consts::SQRT_2 * c_est / n as f64)
}

/// `2√2/(n log(n)^{1+ε})`, the almost-everywhere branch; not certified for
/// any particular ξ₀.
pub fn log_coupling_lower_bound(n: u64, epsilon: f64) -> Option<f64> {
    (n >= 2).then(|| 2.0 * std::f64::consts::SQRT_2 / (n as f64 * (n as f64).ln().powf(1.0 + epsilon)))
}

/// Growth bound for pointwise wave damping implied by the coupling bound:
/// with `s = nπ`, `δ₀ = π/4` and `γ₀ = 2√2c/n`, `M(s) = 2s²/(π⁴c²)`.
pub fn implied_pointwise_rate(c_est: f64) -> Option<RateFunction> {
    (c_est > 0.0).then(|| {
        let pi4 = std::f64::consts::PI.powi(4);
        RateFunction::power(2.0 / (pi4 * c_est * c_est), 2.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::sin_pi;
    use proptest::prelude::*;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn golden() -> Xi0 {
        "(sqrt5-1)/2".parse().unwrap()
    }


    #[test]
    fn quadratic_display_round_trips() {
        for (input, shown) in [("(sqrt5-1)/2", "(sqrt5-1)/2"), ("sqrt2-1", "sqrt2-1"), ("(3-sqrt5)/2", "(-sqrt5+3)/2"), ("2*sqrt(19)-8", "2*sqrt19-8")] {
            let x: Xi0 = input.parse().unwrap();
            assert_eq!(x.to_string(), shown);
            assert_eq!(shown.parse::<Xi0>().unwrap(), x);
        }
    }
    #[test]
    fn parsing() {
        assert_eq!(golden(), Xi0::Quadratic { a: int(-1), b: int(1), d: int(5), c: int(2) });
        assert_eq!("sqrt2 - 1".parse::<Xi0>().unwrap(), Xi0::Quadratic { a: int(-1), b: int(1), d: int(2), c: int(1) });
        assert_eq!("2/7".parse::<Xi0>().unwrap(), Xi0::Rational(BigRational::new(int(2), int(7))));
        assert_eq!("(sqrt4-1)/2".parse::<Xi0>().unwrap(), Xi0::Rational(BigRational::new(int(1), int(2))));
        assert!("3/2".parse::<Xi0>().is_err());
        assert!("(1+sqrt5)/2".parse::<Xi0>().is_err());
        assert!("0.25".parse::<Xi0>().is_ok());
        for s in ["(sqrt5-1)/2", "2/7", "0.618", "(3-1*sqrt2)/4"] {
            let x: Xi0 = s.parse().unwrap();
            assert_eq!(x.to_string().parse::<Xi0>().unwrap(), x);
        }
        assert!((golden().to_f64() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-16);
    }

    fn gauss_oracle(mut x: f64, depth: usize) -> Vec<u64> {
        (0..depth)
            .map(|_| {
                x = 1.0 / x;
                let a = x.floor();
                x -= a;
                a as u64
            })
            .collect()
    }

    #[test]
    fn quadratic_expansions() {
        let cf = continued_fraction(&golden(), 30).unwrap();
        assert!(cf.quotients.iter().all(|&a| a == 1) && cf.depth() == 30 && cf.periodic);
        let cf = continued_fraction(&"sqrt2-1".parse().unwrap(), 30).unwrap();
        assert!(cf.quotients.iter().all(|&a| a == 2));
        // a long period against a floating Gauss map for its first few terms
        let x: Xi0 = "sqrt(19)-4".parse().unwrap();
        let cf = continued_fraction(&x, 12).unwrap();
        assert_eq!(cf.quotients, vec![2, 1, 3, 1, 2, 8, 2, 1, 3, 1, 2, 8]);
        assert_eq!(&cf.quotients[..8], &gauss_oracle(19f64.sqrt() - 4.0, 8)[..]);
        let x: Xi0 = "(7-sqrt13)/6".parse().unwrap();
        assert_eq!(&continued_fraction(&x, 6).unwrap().quotients[..], &gauss_oracle((7.0 - 13f64.sqrt()) / 6.0, 6)[..]);
    }

    #[test]
    fn rational_expansion() {
        let cf = continued_fraction(&"2/7".parse().unwrap(), 10).unwrap();
        assert_eq!(cf.quotients, vec![3, 2]);
        assert!(cf.terminated);
        let conv = convergents(&cf);
        assert_eq!(&conv[1..], &[(int(1), int(3)), (int(2), int(7))]);
    }

    #[test]
    fn decimal_expansions() {
        let e: Xi0 = "e-2".parse().unwrap();
        let cf = continued_fraction(&e, 20).unwrap();
        assert_eq!(cf.quotients, vec![1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1, 1, 10, 1, 1, 12, 1, 1, 14]);
        let pi: Xi0 = "pi-3".parse().unwrap();
        assert_eq!(&continued_fraction(&pi, 6).unwrap().quotients, &[7, 15, 1, 292, 1, 1]);
        match continued_fraction(&"0.6180339887".parse().unwrap(), 30) {
            Err(Error::PrecisionExhausted { prefix }) => {
                assert!(prefix.len() >= 8 && prefix.len() < 30);
                assert!(prefix.iter().all(|&a| a == 1), "{prefix:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let conv = convergents(&continued_fraction(&golden(), 8).unwrap());
        let q: Vec<u64> = conv.iter().map(|(_, q)| q.to_u64().unwrap()).collect();
        assert_eq!(q, vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
    }

    #[test]
    fn convergent_properties() {
        for s in ["(sqrt5-1)/2", "sqrt2-1", "e-2", "sqrt(19)-4"] {
            let x: Xi0 = s.parse().unwrap();
            let cf = continued_fraction(&x, 18).unwrap();
            let conv = convergents(&cf);
            let xr = x.approximation();
            for k in 1..conv.len() {
                let (p, q) = &conv[k];
                let (pp, qp) = &conv[k - 1];
                let det = p * qp - pp * q;
                assert_eq!(det, if k % 2 == 1 { int(1) } else { int(-1) });
                assert!(q > qp || k == 1);
                let err = (xr.clone() - BigRational::new(p.clone(), q.clone())).abs();
                assert!(err <= BigRational::new(int(1), q * q));
            }
        }
    }

    #[test]
    fn approximation_constants() {
        let s = constant_type_check(&golden(), 100_000, 30).unwrap();
        assert_eq!(s.argmin, 1);
        assert!((s.c_est - (1.5 - 5f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((0.44..=0.448).contains(&s.c_tail), "{s:?}");
        assert!(s.bounded_quotients && s.max_quotient == Some(1));

        let half = constant_type_check(&"1/2".parse().unwrap(), 1000, 30).unwrap();
        assert_eq!((half.c_est, half.argmin), (0.0, 2));
        assert!(!half.bounded_quotients);

        let e = constant_type_check(&"e-2".parse().unwrap(), 1000, 20).unwrap();
        assert!(e.max_quotient.unwrap() >= 10 && !e.bounded_quotients);
    }

    #[test]
    fn stabilises_for_constant_type() {
        let a = constant_type_check(&golden(), 10_000, 30).unwrap();
        let b = constant_type_check(&golden(), 100_000, 30).unwrap();
        assert!((a.c_est - b.c_est).abs() < 1e-3 * b.c_est);
        assert!((a.c_tail - b.c_tail).abs() < 1e-3 * b.c_tail);
    }

    #[test]
    fn tail_matches_exact_arithmetic() {
        // n·dist(nξ₀, ℤ) at Fibonacci n, evaluated with the exact surd
        let x = golden();
        let approx = x.approximation();
        let s = constant_type_check(&x, 100_000, 30).unwrap();
        let n = s.tail_argmin;
        let nx = approx * BigRational::from_integer(BigInt::from(n));
        let frac = nx.clone() - nx.round();
        let exact = ratio_to_f64(&frac.abs()) * n as f64;
        assert!((exact - s.c_tail).abs() < 1e-12);
    }

    #[test]
    fn sine_bounds() {
        let s = constant_type_check(&golden(), 100_000, 30).unwrap();
        let xi = golden().to_f64();
        for n in 1..=2000u64 {
            let lb = sine_coupling_lower_bound(s.c_est, n).unwrap();
            assert!(std::f64::consts::SQRT_2 * sin_pi(n as f64 * xi).abs() >= lb * (1.0 - 1e-12));
        }
        assert!(sine_coupling_lower_bound(s.c_est, 1).unwrap() <= std::f64::consts::SQRT_2);
        let lb = sine_coupling_lower_bound(1.0 / 5f64.sqrt(), 10).unwrap();
        assert!((lb - 0.12649).abs() < 1e-5);
        assert!(std::f64::consts::SQRT_2 * sin_pi(10.0 * xi).abs() > lb);
        assert!(sine_coupling_lower_bound(0.0, 3).is_none());
        assert!(log_coupling_lower_bound(1, DEFAULT_LOG_EPSILON).is_none());
        let m = implied_pointwise_rate(s.c_est).unwrap();
        assert!(matches!(m, RateFunction::Power { exponent, .. } if exponent == 2.0));
    }

    proptest! {
        #[test]
        fn rationals_hit_zero(p in 1u64..500, q in 2u64..500) {
            prop_assume!(p < q);
            let x = Xi0::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)));
            let red = q / num_integer::gcd(p, q);
            let s = constant_type_check(&x, 1000, 40).unwrap();
            prop_assert_eq!(s.c_est, 0.0);
            prop_assert_eq!(s.argmin, red);
            let cf = continued_fraction(&x, 64).unwrap();
            prop_assert!(cf.terminated);
            let (pk, qk) = convergents(&cf).pop().unwrap();
            prop_assert_eq!(BigRational::new(pk, qk), BigRational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
}
