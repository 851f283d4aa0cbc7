//! Extended-range real and complex scalars.
//!
//! Values are stored as a normalized mantissa times `2^exponent`, where the
//! exponent is an integer-valued `f64`. Inside the native range the mantissa
//! carries full double precision, so conversions are exact. Far outside it the
//! exponent keeps the value representable and the natural logarithm of the
//! modulus stays accurate to a relative `1e-15` or so, which is all the
//! push-out construction needs (its magnitudes reach `exp(1e40)` and beyond).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Exponent gap beyond which the smaller addend cannot change the larger one.
const ALIGN_LIMIT: f64 = 1100.0;

/// Past this exponent size the mantissa no longer carries information.
const EXACT_EXPONENT: f64 = 4_503_599_627_370_496.0; // 2^52

/// Splits `x` into `m * 2^e` with `|m|` in `[0.5, 1)`.
pub(crate) fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(x * 18_446_744_073_709_551_616.0);
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, biased - 1022)
}

/// `x * 2^k` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    let up = 2f64.powi(1000);
    let down = 2f64.powi(-1000);
    while k > 1000 {
        x *= up;
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= down;
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

fn exponent_as_i64(e: f64) -> i64 {
    e.clamp(-1.0e15, 1.0e15) as i64
}

/// Real number with an unbounded binary exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    mantissa: f64,
    exponent: f64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal { mantissa: 0.0, exponent: 0.0 };
    pub const ONE: ScaledReal = ScaledReal { mantissa: 0.5, exponent: 1.0 };

    fn normalized(mantissa: f64, exponent: f64) -> Self {
        debug_assert!(mantissa.is_finite() && exponent.is_finite());
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(mantissa);
        ScaledReal { mantissa: m, exponent: exponent + e as f64 }
    }

    /// Builds `mantissa * 2^exponent`; the exponent is rounded to an integer.
    pub fn from_parts(mantissa: f64, exponent: f64) -> Self {
        Self::normalized(mantissa, exponent.round())
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalized(x, 0.0)
    }

    /// The positive number `exp(ln_value)`; `-inf` gives zero.
    pub fn from_ln(ln_value: f64) -> Self {
        if ln_value == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (ln_value / LN_2).floor();
        if e.abs() < EXACT_EXPONENT {
            let frac = ln_value - e * LN_2;
            Self::normalized(frac.exp(), e)
        } else {
            Self::normalized(1.0, e)
        }
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > 0.0
    }

    /// Nearest `f64`; saturates to `±inf` or zero outside the native range.
    pub fn to_f64(&self) -> f64 {
        if self.exponent > 1100.0 {
            return self.mantissa.signum() * f64::INFINITY;
        }
        if self.exponent < -1100.0 {
            return 0.0;
        }
        ldexp(self.mantissa, self.exponent as i64)
    }

    /// Natural log of the absolute value.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.abs().ln() + self.exponent * LN_2
    }

    pub fn abs(&self) -> Self {
        ScaledReal { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    pub fn powu(&self, n: u64) -> Self {
        let mut acc = Self::ONE;
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self - other` when the difference is strictly positive.
    pub fn checked_sub_positive(&self, other: Self) -> Option<Self> {
        let d = *self - other;
        d.is_positive().then_some(d)
    }

    /// Multiplies a positive value by `exp(tol * max(1, |ln x|))`.
    ///
    /// Used as a one-sided rounding allowance when an inequality between
    /// huge magnitudes must hold for the true values, not just the computed ones.
    pub fn inflate(&self, tol: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        *self * Self::from_ln(tol * self.ln().abs().max(1.0))
    }

    /// Divides a positive value by `exp(tol * max(1, |ln x|))`.
    pub fn deflate(&self, tol: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        *self / Self::from_ln(tol * self.ln().abs().max(1.0))
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        let sa = self.mantissa.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        let sb = other.mantissa.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == Ordering::Equal {
            return Ordering::Equal;
        }
        let mag = self
            .exponent
            .partial_cmp(&other.exponent)
            .unwrap_or(Ordering::Equal)
            .then(
                self.mantissa
                    .abs()
                    .partial_cmp(&other.mantissa.abs())
                    .unwrap_or(Ordering::Equal),
            );
        if sa == Ordering::Greater {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl From<f64> for ScaledReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;
    fn div(self, rhs: Self) -> Self {
        Self::normalized(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledReal {
    type Output = ScaledReal;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let gap = lo.exponent - hi.exponent;
        if gap < -ALIGN_LIMIT {
            return hi;
        }
        Self::normalized(hi.mantissa + ldexp(lo.mantissa, gap as i64), hi.exponent)
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;
    fn neg(self) -> Self {
        ScaledReal { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl Sub for ScaledReal {
    type Output = ScaledReal;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}p{}", self.mantissa, self.exponent)
    }
}

impl FromStr for ScaledReal {
    type Err = Error;

    /// Parses either `"<mantissa>p<exponent>"` or a plain decimal number.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid scaled real {s:?}"));
        match s.split_once('p') {
            Some((m, e)) => {
                let m: f64 = m.trim().parse().map_err(|_| bad())?;
                let e: f64 = e.trim().parse().map_err(|_| bad())?;
                if !m.is_finite() || !e.is_finite() {
                    return Err(bad());
                }
                Ok(Self::from_parts(m, e))
            }
            None => {
                let x: f64 = s.trim().parse().map_err(|_| bad())?;
                if !x.is_finite() {
                    return Err(bad());
                }
                Ok(Self::from_f64(x))
            }
        }
    }
}

impl Serialize for ScaledReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScaledReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complex number with an unbounded binary exponent.
///
/// The mantissa is normalized so that its larger component lies in `[0.5, 1)`;
/// zero is the all-zero mantissa with exponent 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    mantissa: Complex64,
    exponent: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex =
        ScaledComplex { mantissa: Complex64 { re: 0.0, im: 0.0 }, exponent: 0.0 };

    fn normalized(mantissa: Complex64, exponent: f64) -> Self {
        let big = mantissa.re.abs().max(mantissa.im.abs());
        if big == 0.0 {
            return Self::ZERO;
        }
        let (_, e) = frexp(big);
        ScaledComplex {
            mantissa: Complex64::new(ldexp(mantissa.re, -e), ldexp(mantissa.im, -e)),
            exponent: exponent + e as f64,
        }
    }

    pub fn one() -> Self {
        Self::from_complex(Complex64::new(1.0, 0.0))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::normalized(z, 0.0)
    }

    pub fn from_real(x: ScaledReal) -> Self {
        Self::normalized(Complex64::new(x.mantissa, 0.0), x.exponent)
    }

    /// `exp(log_mag) * e^{i phase}`; `log_mag = -inf` gives zero.
    pub fn from_log_polar(log_mag: f64, phase: f64) -> Self {
        let r = ScaledReal::from_ln(log_mag);
        if r.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(Complex64::from_polar(r.mantissa, phase), r.exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// Nearest native complex; components saturate outside the native range.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.exponent > 1100.0 {
            return Complex64::new(
                self.mantissa.re.signum() * f64::INFINITY,
                self.mantissa.im.signum() * f64::INFINITY,
            );
        }
        let e = exponent_as_i64(self.exponent);
        Complex64::new(ldexp(self.mantissa.re, e), ldexp(self.mantissa.im, e))
    }

    /// Native complex if both components are finite.
    pub fn to_complex_checked(&self) -> Option<Complex64> {
        let z = self.to_complex();
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn log_mag(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.norm().ln() + self.exponent * LN_2
    }

    /// Argument in `(-pi, pi]`; zero has phase 0.
    pub fn phase(&self) -> f64 {
        let p = self.mantissa.im.atan2(self.mantissa.re);
        if p == -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            p
        }
    }

    pub fn norm(&self) -> ScaledReal {
        ScaledReal::normalized(self.mantissa.norm(), self.exponent)
    }

    pub fn scale(&self, s: ScaledReal) -> Self {
        Self::normalized(self.mantissa * s.mantissa, self.exponent + s.exponent)
    }

    pub fn powu(&self, n: u64) -> Self {
        let mut acc = Self::one();
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, rhs: Self) -> Self {
        Self::normalized(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let gap = lo.exponent - hi.exponent;
        if gap < -ALIGN_LIMIT {
            return hi;
        }
        let g = gap as i64;
        let shifted = Complex64::new(ldexp(lo.mantissa.re, g), ldexp(lo.mantissa.im, g));
        Self::normalized(hi.mantissa + shifted, hi.exponent)
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> Self {
        ScaledComplex { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// `(base_num / base_den)^exponent` in extended range.
pub fn scaled_pow(base_num: f64, base_den: f64, exponent: u64) -> Result<ScaledComplex> {
    if !(base_num > 0.0 && base_den > 0.0 && base_num.is_finite() && base_den.is_finite()) {
        return Err(Error::Domain(format!(
            "power base must be positive, got {base_num}/{base_den}"
        )));
    }
    let ratio = ScaledReal::from_f64(base_num) / ScaledReal::from_f64(base_den);
    Ok(ScaledComplex::from_real(ratio.powu(exponent)))
}

/// Sum of two extended-range complex numbers.
pub fn scaled_add(a: ScaledComplex, b: ScaledComplex) -> ScaledComplex {
    a + b
}

/// Largest coordinate modulus.
pub fn max_norm(point: &[ScaledComplex]) -> ScaledReal {
    point.iter().map(|z| z.norm()).fold(ScaledReal::ZERO, ScaledReal::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn frexp_matches_definition() {
        for &x in &[1.0, 0.75, -3.5, 1e-310, 6.02e23, f64::MAX] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m.abs()), "{x}: {m}");
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn pow_examples() {
        let a = scaled_pow(2.0, 3.0, 6).unwrap();
        // cross-check by repeated multiplication in native floats
        let mut direct = 1.0;
        for _ in 0..6 {
            direct *= 2.0 / 3.0;
        }
        assert!(rel(a.to_complex().re, direct) < 1e-14);
        assert!((a.to_complex().re - 0.08779).abs() < 1e-5);
        assert_eq!(a.phase(), 0.0);

        let b = scaled_pow(4.0, 3.0, 120).unwrap();
        let want = 120.0 * (4f64.ln() - 3f64.ln());
        assert!(rel(b.log_mag(), want) < 1e-13);
        assert!((b.log_mag() - 34.52).abs() < 0.01);
        assert!(rel(b.to_complex().re, (4.0f64 / 3.0).powi(120)) < 1e-12);

        assert_eq!(scaled_pow(7.0, 5.0, 0).unwrap().to_complex(), Complex64::new(1.0, 0.0));
        assert!(scaled_pow(0.0, 1.0, 2).is_err());
        assert!(scaled_pow(1.0, -2.0, 2).is_err());
    }

    #[test]
    fn add_examples() {
        let one = ScaledComplex::one();
        assert_eq!(scaled_add(one, ScaledComplex::ZERO), one);
        assert!(scaled_add(one, -one).is_zero());

        let big = ScaledComplex::from_log_polar(1000.0, 0.3);
        let sum = scaled_add(big, one);
        assert!(rel(sum.log_mag(), 1000.0) < 1e-13);
        let ratio = (sum / big).to_complex() - Complex64::new(1.0, 0.0);
        assert!(ratio.norm() <= (-999.0f64).exp());
    }

    #[test]
    fn zero_is_absorbing_and_identity() {
        let z = ScaledComplex::from_log_polar(5000.0, 1.0);
        assert!((z * ScaledComplex::ZERO).is_zero());
        assert_eq!(z + ScaledComplex::ZERO, z);
        assert_eq!(ScaledComplex::ZERO.log_mag(), f64::NEG_INFINITY);
    }

    #[test]
    fn multiplication_adds_logs_far_outside_native_range() {
        let a = ScaledComplex::from_log_polar(1.0e6, 0.5);
        let b = ScaledComplex::from_log_polar(-3.0e5, -2.0);
        let p = a * b;
        assert!(rel(p.log_mag(), a.log_mag() + b.log_mag()) < 1e-15);
        assert!((p.phase() - (-1.5)).abs() < 1e-12);
    }

    #[test]
    fn scaled_real_ordering_and_text() {
        let a = ScaledReal::from_ln(1e40);
        let b = ScaledReal::from_ln(2e40);
        assert!(a < b && -b < -a && ScaledReal::ZERO < a);
        assert!(ScaledReal::from_f64(-1.0) < ScaledReal::ZERO);
        for x in [a, b, ScaledReal::from_f64(0.1), ScaledReal::ZERO, ScaledReal::from_f64(-3.25)] {
            let back: ScaledReal = x.to_string().parse().unwrap();
            assert_eq!(back, x);
        }
        assert_eq!("2.5".parse::<ScaledReal>().unwrap().to_f64(), 2.5);
        assert!("abc".parse::<ScaledReal>().is_err());
    }

    #[test]
    fn inflate_and_deflate_bracket() {
        for x in [ScaledReal::from_f64(3.0), ScaledReal::from_ln(1e30), ScaledReal::from_f64(1e-5)] {
            assert!(x.deflate(1e-10) < x && x < x.inflate(1e-10));
        }
    }

    #[test]
    fn checked_sub_rejects_nonpositive() {
        let a = ScaledReal::from_f64(3.0);
        assert_eq!(a.checked_sub_positive(ScaledReal::from_f64(1.0)).unwrap().to_f64(), 2.0);
        assert!(a.checked_sub_positive(a).is_none());
        assert!(a.checked_sub_positive(ScaledReal::from_f64(4.0)).is_none());
    }
}
