//! Dense complex polynomials with exact rational coefficients.
//!
//! Every coefficient is held as a pair of `BigRational`s so that calculus
//! identities (derivative of antiderivative, horizontality of integrated disks)
//! hold exactly. A cached `f64` copy of the coefficients serves evaluation.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Exact complex rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite coefficient {x}")))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl QComplex {
    pub fn zero() -> Self {
        QComplex { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(k: i64) -> Self {
        QComplex { re: BigRational::from_integer(BigInt::from(k)), im: BigRational::zero() }
    }

    /// Exact conversion of a finite native complex.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        Ok(QComplex { re: rational_from_f64(z.re)?, im: rational_from_f64(z.im)? })
    }

    pub fn from_real(r: BigRational) -> Self {
        QComplex { re: r, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn add(&self, o: &Self) -> Self {
        QComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        QComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    /// Exact quotient; `None` for a zero divisor.
    pub fn div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        let den = &o.re * &o.re + &o.im * &o.im;
        Some(QComplex {
            re: (&self.re * &o.re + &self.im * &o.im) / &den,
            im: (&self.im * &o.re - &self.re * &o.im) / &den,
        })
    }

    pub fn neg(&self) -> Self {
        QComplex { re: -&self.re, im: -&self.im }
    }

    pub fn mul_int(&self, k: u64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        QComplex { re: &self.re * &k, im: &self.im * &k }
    }

    pub fn div_int(&self, k: u64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        QComplex { re: &self.re / &k, im: &self.im / &k }
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})+({})i", self.re, self.im)
    }
}

/// Dense polynomial in one complex variable.
///
/// Trailing zero coefficients are stripped, so the zero polynomial has no
/// coefficients at all.
#[derive(Clone, Debug)]
pub struct CPolynomial {
    exact: Vec<QComplex>,
    coeffs: Vec<Complex64>,
    cap: usize,
}

impl PartialEq for CPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for CPolynomial {}

impl CPolynomial {
    /// Builds from exact coefficients, lowest degree first.
    pub fn from_exact_with_cap(mut exact: Vec<QComplex>, cap: usize) -> Result<Self> {
        while exact.last().is_some_and(QComplex::is_zero) {
            exact.pop();
        }
        if exact.len() > cap + 1 {
            return Err(Error::DegreeOverflow { degree: exact.len() - 1, cap });
        }
        let coeffs = exact.iter().map(QComplex::to_complex).collect();
        Ok(CPolynomial { exact, coeffs, cap })
    }

    pub fn from_exact(exact: Vec<QComplex>) -> Result<Self> {
        Self::from_exact_with_cap(exact, DEFAULT_DEGREE_CAP)
    }

    /// Builds from native coefficients; the conversion is exact.
    pub fn from_coeffs(coeffs: &[Complex64]) -> Result<Self> {
        Self::from_coeffs_with_cap(coeffs, DEFAULT_DEGREE_CAP)
    }

    pub fn from_coeffs_with_cap(coeffs: &[Complex64], cap: usize) -> Result<Self> {
        let exact = coeffs.iter().map(|&c| QComplex::from_complex(c)).collect::<Result<Vec<_>>>()?;
        Self::from_exact_with_cap(exact, cap)
    }

    pub fn from_real_coeffs(coeffs: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_coeffs(&c)
    }

    pub fn zero() -> Self {
        CPolynomial { exact: Vec::new(), coeffs: Vec::new(), cap: DEFAULT_DEGREE_CAP }
    }

    pub fn constant(c: Complex64) -> Result<Self> {
        Self::from_coeffs(&[c])
    }

    pub fn constant_exact(c: QComplex) -> Self {
        Self::from_exact(vec![c]).expect("degree 0 is always within the cap")
    }

    /// Same coefficients under a different degree cap.
    pub fn with_cap(&self, cap: usize) -> Result<Self> {
        Self::from_exact_with_cap(self.exact.clone(), cap)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Native coefficients, lowest degree first.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> &[QComplex] {
        &self.exact
    }

    /// Exact coefficient `k` (zero past the degree).
    pub fn exact_coeff(&self, k: usize) -> QComplex {
        self.exact.get(k).cloned().unwrap_or_else(QComplex::zero)
    }

    /// Degree after stripping; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.exact.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner sweep.
    pub fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d = d * z + p;
            p = p * z + c;
        }
        (p, d)
    }

    pub fn derivative(&self) -> Self {
        let exact = self.exact.iter().enumerate().skip(1).map(|(k, c)| c.mul_int(k as u64)).collect();
        Self::from_exact_with_cap(exact, self.cap).expect("differentiation lowers the degree")
    }

    /// The antiderivative taking the value `constant` at 0.
    pub fn antiderivative(&self, constant: &QComplex) -> Result<Self> {
        let mut exact = Vec::with_capacity(self.exact.len() + 1);
        exact.push(constant.clone());
        exact.extend(self.exact.iter().enumerate().map(|(k, c)| c.div_int(k as u64 + 1)));
        Self::from_exact_with_cap(exact, self.cap)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.exact.len().max(other.exact.len());
        let exact = (0..len).map(|k| self.exact_coeff(k).add(&other.exact_coeff(k))).collect();
        Self::from_exact_with_cap(exact, self.cap.max(other.cap)).expect("sum keeps the degree")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let exact = self.exact.iter().map(QComplex::neg).collect();
        Self::from_exact_with_cap(exact, self.cap).expect("negation keeps the degree")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(CPolynomial { cap: self.cap, ..Self::zero() });
        }
        let cap = self.cap.min(other.cap);
        let degree = self.degree() + other.degree();
        if degree > cap {
            return Err(Error::DegreeOverflow { degree, cap });
        }
        let mut exact = vec![QComplex::zero(); degree + 1];
        for (i, a) in self.exact.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.exact.iter().enumerate() {
                if !b.is_zero() {
                    exact[i + j] = exact[i + j].add(&a.mul(b));
                }
            }
        }
        Self::from_exact_with_cap(exact, cap)
    }

    pub fn scale(&self, s: &QComplex) -> Self {
        let exact = self.exact.iter().map(|c| c.mul(s)).collect();
        Self::from_exact_with_cap(exact, self.cap).expect("scaling keeps the degree")
    }

    /// Exact reparametrization `p(s * zeta)`.
    pub fn compose_scale(&self, s: &QComplex) -> Self {
        let mut power = QComplex::one();
        let mut exact = Vec::with_capacity(self.exact.len());
        for c in &self.exact {
            exact.push(c.mul(&power));
            power = power.mul(s);
        }
        Self::from_exact_with_cap(exact, self.cap).expect("reparametrization keeps the degree")
    }

    /// Upper bound `sum |c_k| R^k` for the sup of `|p|` on the closed disk of radius `R`.
    ///
    /// The float sum is pushed up by a few ulps per term so that it bounds the
    /// true real-number sum.
    pub fn sup_bound(&self, radius: f64) -> f64 {
        let s = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * radius + c.norm());
        s * (1.0 + (2 * self.coeffs.len() + 4) as f64 * f64::EPSILON)
    }

    /// Native coefficients of `w -> p(center + w)`.
    pub fn taylor_shift(&self, center: Complex64) -> Vec<Complex64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += center * next;
            }
        }
        c
    }
}

impl fmt::Display for CPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> =
            self.coeffs.iter().enumerate().filter(|(_, c)| c.norm() != 0.0).map(|(k, c)| format!("({c})z^{k}")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Value and derivative of `p` at `z`.
pub fn poly_eval_deriv(p: &CPolynomial, z: Complex64) -> (Complex64, Complex64) {
    p.eval_deriv(z)
}

/// Antiderivative with `result(0) = constant`.
pub fn poly_antiderivative(p: &CPolynomial, constant: Complex64) -> Result<CPolynomial> {
    p.antiderivative(&QComplex::from_complex(constant)?)
}

/// Coefficient-sum bound for `sup_{|z| <= radius} |p(z)|`.
pub fn poly_sup_bound(p: &CPolynomial, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    Ok(p.sup_bound(radius))
}
