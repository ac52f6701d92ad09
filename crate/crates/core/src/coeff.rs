//! Coefficient fields: exact Gaussian rationals and double-precision complex numbers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field operations shared by every coefficient kind a series may carry.
///
/// A series is homogeneous in its coefficient kind; the two kinds never mix
/// implicitly. Conversion from exact to float is explicit via [`Coefficient::to_complex`]
/// and [`crate::series::TruncatedSeries::to_float`].
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num/den` with `den != 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;

    fn is_zero(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `None` when `rhs` is zero.
    fn div_ref(&self, rhs: &Self) -> Option<Self>;

    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = self.add_ref(rhs);
    }

    fn scale_i64(&self, k: i64) -> Self {
        self.mul_ref(&Self::from_i64(k))
    }

    fn to_complex(&self) -> Complex64;

    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Exactly real (exact kind) or with an identically zero imaginary part (float kind).
    fn is_real(&self) -> bool;
}

/// Gaussian rational `re + i·im` with arbitrary-precision reduced fractions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRational {
            re: BigRational::new(re_num.into(), re_den.into()),
            im: BigRational::new(im_num.into(), im_den.into()),
        }
    }

    /// Squared modulus, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Best Gaussian-rational approximation of `z` with denominators at most `max_den`.
    pub fn approximate(z: Complex64, max_den: i64) -> Option<Self> {
        Some(GaussRational {
            re: approximate_real(z.re, max_den)?,
            im: approximate_real(z.im, max_den)?,
        })
    }
}

/// Continued-fraction approximation of `x` with denominator bounded by `max_den`.
pub(crate) fn approximate_real(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Coefficient for GaussRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        GaussRational::real(BigRational::one())
    }

    fn from_i64(v: i64) -> Self {
        GaussRational::real(BigRational::from_integer(v.into()))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational::real(BigRational::new(num.into(), den.into()))
    }

    fn imag_unit() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        GaussRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }

    fn add_assign_ref(&mut self, rhs: &Self) {
        if !rhs.re.is_zero() {
            self.re += &rhs.re;
        }
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        GaussRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRational::real(&self.re * &rhs.re);
        }
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    fn neg_ref(&self) -> Self {
        GaussRational {
            re: -&self.re,
            im: -&self.im,
        }
    }

    fn div_ref(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if rhs.im.is_zero() {
            return Some(GaussRational {
                re: &self.re / &rhs.re,
                im: &self.im / &rhs.re,
            });
        }
        let d = rhs.norm_sqr();
        let num = self.mul_ref(&rhs.conj());
        Some(GaussRational {
            re: num.re / &d,
            im: num.im / d,
        })
    }

    fn scale_i64(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        GaussRational {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Coefficient for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn div_ref(&self, rhs: &Self) -> Option<Self> {
        if Coefficient::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl Sub for GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Canonical text form `re_p/re_q,im_p/im_q`.
impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", fmt_ratio(&self.re), fmt_ratio(&self.im))
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(
                f,
                "({}{}{}i)",
                self.re,
                if self.im.is_negative() { "" } else { "+" },
                self.im
            )
        }
    }
}

/// Parses an exact rational: `p`, `p/q`, or a finite decimal such as `-0.125` or `1e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse {
        line: 0,
        column: 0,
        message: format!("invalid rational `{s}`"),
    };
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(p) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(p));
    }
    // decimal with optional exponent, converted exactly
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(&digits).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses `re,im` where each part is accepted by [`parse_rational`].
pub fn parse_gauss(s: &str) -> Result<GaussRational> {
    let (re, im) = s.split_once(',').ok_or_else(|| Error::Parse {
        line: 0,
        column: 0,
        message: format!("expected `re,im` coefficient, found `{s}`"),
    })?;
    Ok(GaussRational::new(parse_rational(re)?, parse_rational(im)?))
}

/// Parses a complex float written as `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // locate the sign that separates real and imaginary parts (not an exponent sign)
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(idx) => Some(Complex64::new(body[..idx].parse().ok()?, imag(&body[idx..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_is_exact() {
        let a = GaussRational::from_parts(1, 3, 2, 5);
        let b = GaussRational::from_parts(-7, 2, 1, 9);
        let q = a.div_ref(&b).unwrap();
        assert_eq!(q.mul_ref(&b), a);
        assert!(a.div_ref(&GaussRational::zero()).is_none());
    }

    #[test]
    fn fractions_are_reduced_with_positive_denominators() {
        let a = GaussRational::from_parts(4, -6, 0, 1);
        assert_eq!(a.to_string(), "-2/3,0/1");
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_rational("0.125").unwrap(), BigRational::new(1.into(), 8.into()));
        assert_eq!(
            parse_rational("-1e-3").unwrap(),
            BigRational::new((-1).into(), 1000.into())
        );
        assert_eq!(parse_rational("3/-6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("0.05"), Some(Complex64::new(0.05, 0.0)));
        assert_eq!(parse_complex("0.1-0.2i"), Some(Complex64::new(0.1, -0.2)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("1e-3+2e-2i"), Some(Complex64::new(1e-3, 2e-2)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn rational_approximation_recovers_small_fractions() {
        let z = Complex64::new(-2.0 / 3.0, 5.0 / 7.0);
        let g = GaussRational::approximate(z, 1000).unwrap();
        assert_eq!(g, GaussRational::from_parts(-2, 3, 5, 7));
    }
}
