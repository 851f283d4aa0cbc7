use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ScaledComplex, ScaledReal};

/// Unit roundoff.
pub(crate) const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// One term `(zeta / radius)^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearTerm {
    pub radius: ScaledReal,
    pub exponent: u64,
}

impl ShearTerm {
    /// Upper bound for `(R / radius)^exponent` that covers all rounding in its evaluation.
    pub fn magnitude_hi(&self, r: ScaledReal) -> ScaledReal {
        let v = (r / self.radius).powu(self.exponent);
        v * ScaledReal::from_ln(power_rounding(self.exponent, v))
    }

    /// Lower bound counterpart of [`Self::magnitude_hi`].
    pub fn magnitude_lo(&self, r: ScaledReal) -> ScaledReal {
        let v = (r / self.radius).powu(self.exponent);
        v / ScaledReal::from_ln(power_rounding(self.exponent, v))
    }
}

/// Log-magnitude error allowance for a quotient raised to the power `n`.
///
/// The mantissa rounding grows with `n`; once binary exponents pass `2^53`
/// their sums round too, which costs a fixed fraction of `|ln v|`.
pub(crate) fn power_rounding(n: u64, v: ScaledReal) -> f64 {
    (4.0 * n as f64 + 256.0) * UNIT_ROUNDOFF * v.ln().abs().max(1.0)
}

/// Entire function `sum_j (zeta / r_j)^{N_j}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShearFunction {
    pub terms: Vec<ShearTerm>,
}

impl ShearFunction {
    pub fn new(terms: Vec<ShearTerm>) -> Self {
        ShearFunction { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The partial sum of the first `i` terms.
    pub fn prefix(&self, i: usize) -> Self {
        ShearFunction { terms: self.terms[..i.min(self.terms.len())].to_vec() }
    }

    pub fn eval(&self, zeta: ScaledComplex) -> ScaledComplex {
        self.terms.iter().fold(ScaledComplex::ZERO, |acc, t| {
            acc + (zeta / ScaledComplex::from_real(t.radius)).powu(t.exponent)
        })
    }

    pub fn eval_deriv(&self, zeta: ScaledComplex) -> (ScaledComplex, ScaledComplex) {
        let mut v = ScaledComplex::ZERO;
        let mut d = ScaledComplex::ZERO;
        for t in &self.terms {
            let r = ScaledComplex::from_real(t.radius);
            let q = zeta / r;
            v = v + q.powu(t.exponent);
            if t.exponent > 0 {
                let n = ScaledReal::from_f64(t.exponent as f64);
                d = d + (q.powu(t.exponent - 1) / r).scale(n);
            }
        }
        (v, d)
    }

    /// `sum (R / r_j)^{N_j}`: the sup of `|f|` on the closed disk of radius `R`
    /// (all coefficients are positive, so the sup is attained at `zeta = R`).
    pub fn sup_bound(&self, r: ScaledReal) -> ScaledReal {
        self.terms.iter().fold(ScaledReal::ZERO, |acc, t| acc + (r / t.radius).powu(t.exponent))
    }

    /// Certified upper bound for [`Self::sup_bound`].
    pub fn sup_bound_hi(&self, r: ScaledReal) -> ScaledReal {
        let s = self.terms.iter().fold(ScaledReal::ZERO, |acc, t| acc + t.magnitude_hi(r));
        s * ScaledReal::from_ln((2 * self.terms.len() + 2) as f64 * UNIT_ROUNDOFF)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShearKind {
    /// `z_m += f(z_{m-1})` for `m >= 1`, all at once.
    Phi,
    /// `z_m += g(z_{m+1})` for `m <= dim - 2`, all at once.
    Psi,
}

/// A shear-like automorphism of `C^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearMap {
    pub kind: ShearKind,
    pub dim: usize,
    pub function: ShearFunction,
}

fn check_len(dim: usize, got: usize) -> Result<()> {
    if dim != got {
        return Err(Error::DimensionMismatch { expected: dim, got });
    }
    Ok(())
}

impl ShearMap {
    pub fn new(kind: ShearKind, dim: usize, function: ShearFunction) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("shear maps need dimension >= 2, got {dim}")));
        }
        Ok(ShearMap { kind, dim, function })
    }

    /// Index pairs `(target, source)` in application order.
    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim - 1).map(move |m| match self.kind {
            ShearKind::Phi => (m + 1, m),
            ShearKind::Psi => (m, m + 1),
        })
    }

    pub fn apply(&self, p: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
        check_len(self.dim, p.len())?;
        let mut out = p.to_vec();
        for (t, s) in self.pairs() {
            out[t] = p[t] + self.function.eval(p[s]);
        }
        Ok(out)
    }

    /// The inverse map: subtracts the same values, sweeping from the fixed coordinate.
    pub fn apply_inverse(&self, w: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
        check_len(self.dim, w.len())?;
        let mut z = w.to_vec();
        match self.kind {
            ShearKind::Phi => {
                for m in 1..self.dim {
                    z[m] = w[m] - self.function.eval(z[m - 1]);
                }
            }
            ShearKind::Psi => {
                for m in (0..self.dim - 1).rev() {
                    z[m] = w[m] - self.function.eval(z[m + 1]);
                }
            }
        }
        Ok(z)
    }

    /// Image point and pushed-forward tangent.
    pub fn apply_with_tangent(
        &self,
        p: &[ScaledComplex],
        v: &[ScaledComplex],
    ) -> Result<(Vec<ScaledComplex>, Vec<ScaledComplex>)> {
        check_len(self.dim, p.len())?;
        check_len(self.dim, v.len())?;
        let mut out = p.to_vec();
        let mut dv = v.to_vec();
        for (t, s) in self.pairs() {
            let (f, df) = self.function.eval_deriv(p[s]);
            out[t] = p[t] + f;
            dv[t] = v[t] + df * v[s];
        }
        Ok((out, dv))
    }

    pub fn apply_inverse_with_tangent(
        &self,
        w: &[ScaledComplex],
        v: &[ScaledComplex],
    ) -> Result<(Vec<ScaledComplex>, Vec<ScaledComplex>)> {
        check_len(self.dim, w.len())?;
        check_len(self.dim, v.len())?;
        let mut z = w.to_vec();
        let mut dz = v.to_vec();
        let order: Vec<(usize, usize)> = match self.kind {
            ShearKind::Phi => (1..self.dim).map(|m| (m, m - 1)).collect(),
            ShearKind::Psi => (0..self.dim - 1).rev().map(|m| (m, m + 1)).collect(),
        };
        for (t, s) in order {
            let (f, df) = self.function.eval_deriv(z[s]);
            z[t] = w[t] - f;
            dz[t] = v[t] - df * dz[s];
        }
        Ok((z, dz))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearStep {
    pub map: ShearMap,
    pub inverse: bool,
}

/// A finite composition of shear maps, applied first to last.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShearComposition {
    pub steps: Vec<ShearStep>,
}

impl ShearComposition {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Ambient dimension, if any step is present.
    pub fn dim(&self) -> Option<usize> {
        self.steps.first().map(|s| s.map.dim)
    }

    pub fn then(mut self, map: ShearMap) -> Self {
        self.steps.push(ShearStep { map, inverse: false });
        self
    }

    pub fn inverse(&self) -> Self {
        let steps =
            self.steps.iter().rev().map(|s| ShearStep { map: s.map.clone(), inverse: !s.inverse }).collect();
        ShearComposition { steps }
    }

    pub fn apply(&self, p: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
        let mut cur = p.to_vec();
        for s in &self.steps {
            cur = if s.inverse { s.map.apply_inverse(&cur)? } else { s.map.apply(&cur)? };
        }
        Ok(cur)
    }

    pub fn apply_with_tangent(
        &self,
        p: &[ScaledComplex],
        v: &[ScaledComplex],
    ) -> Result<(Vec<ScaledComplex>, Vec<ScaledComplex>)> {
        let mut cur = (p.to_vec(), v.to_vec());
        for s in &self.steps {
            cur = if s.inverse {
                s.map.apply_inverse_with_tangent(&cur.0, &cur.1)?
            } else {
                s.map.apply_with_tangent(&cur.0, &cur.1)?
            };
        }
        Ok(cur)
    }

    pub fn apply_native(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        let s: Vec<ScaledComplex> = p.iter().map(|&z| z.into()).collect();
        to_native(&self.apply(&s)?)
    }
}

/// Converts back to native complex numbers; fails once a coordinate overflows.
pub fn to_native(p: &[ScaledComplex]) -> Result<Vec<Complex64>> {
    p.iter().map(|z| z.to_complex_checked().ok_or(Error::Escaped)).collect()
}

/// Determinant of the Jacobian of `phi` at a native point: the product over
/// the steps of each step's Jacobian determinant, each by LU with partial
/// pivoting. Factoring by steps avoids the cancellation an LU of the full
/// product suffers once its entries are large.
pub fn jacobian_determinant(phi: &ShearComposition, p: &[Complex64]) -> Result<Complex64> {
    let d = p.len();
    let mut cur: Vec<ScaledComplex> = p.iter().map(|&z| z.into()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for step in &phi.steps {
        let single = ShearComposition { steps: vec![step.clone()] };
        let mut cols = Vec::with_capacity(d);
        for e in 0..d {
            let mut v = vec![ScaledComplex::ZERO; d];
            v[e] = ScaledComplex::one();
            let (_, dv) = single.apply_with_tangent(&cur, &v)?;
            cols.push(to_native(&dv)?);
        }
        // a[row][col]
        let mut a: Vec<Vec<Complex64>> = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
        det *= lu_determinant(&mut a);
        cur = single.apply(&cur)?;
    }
    Ok(det)
}

pub(crate) fn lu_determinant(a: &mut [Vec<Complex64>]) -> Complex64 {
    let d = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap_or(col);
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..d {
            let factor = a[r][col] / a[col][col];
            for c in col..d {
                let sub = factor * a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Applies one shear to a scaled point.
pub fn shear_eval(map: &ShearMap, p: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
    map.apply(p)
}
