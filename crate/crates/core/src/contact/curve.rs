use num_complex::Complex64;

use super::point::{alpha0_eval, ContactPoint, TangentVector};
use crate::error::{Error, Result};
use crate::numeric::{CPolynomial, QComplex};

/// Absolute tolerance for the kernel test in [`legendrian_line`].
pub const KERNEL_TOLERANCE: f64 = 1e-12;

/// Polynomial map `C -> C^{2n+1}`, components ordered `(x1, y1, ..., xn, yn, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicCurve {
    components: Vec<CPolynomial>,
}

impl HolomorphicCurve {
    pub fn new(components: Vec<CPolynomial>) -> Result<Self> {
        if components.len() < 3 || components.len() % 2 == 0 {
            return Err(Error::Domain(format!("expected 2n+1 components, got {}", components.len())));
        }
        let cap = components.iter().map(CPolynomial::cap).min().unwrap_or(0);
        let components = components.iter().map(|c| c.with_cap(cap)).collect::<Result<Vec<_>>>()?;
        Ok(HolomorphicCurve { components })
    }

    /// The constant map at `p`.
    pub fn constant(p: &ContactPoint) -> Result<Self> {
        let comps = p.to_coords().into_iter().map(CPolynomial::constant).collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn n(&self) -> usize {
        (self.components.len() - 1) / 2
    }

    pub fn components(&self) -> &[CPolynomial] {
        &self.components
    }

    pub fn x(&self, j: usize) -> &CPolynomial {
        &self.components[2 * j]
    }

    pub fn y(&self, j: usize) -> &CPolynomial {
        &self.components[2 * j + 1]
    }

    pub fn z(&self) -> &CPolynomial {
        &self.components[2 * self.n()]
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(CPolynomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, zeta: Complex64) -> ContactPoint {
        let c: Vec<Complex64> = self.components.iter().map(|p| p.eval(zeta)).collect();
        ContactPoint::from_coords(&c).expect("component count is 2n+1")
    }

    pub fn derivative_at(&self, zeta: Complex64) -> TangentVector {
        let c: Vec<Complex64> = self.components.iter().map(|p| p.eval_deriv(zeta).1).collect();
        TangentVector::from_coords(&c).expect("component count is 2n+1")
    }

    /// Exact value at a rational parameter.
    pub fn eval_exact(&self, t: &QComplex) -> Vec<QComplex> {
        self.components
            .iter()
            .map(|p| {
                p.exact_coeffs().iter().rev().fold(QComplex::zero(), |acc, c| acc.mul(t).add(c))
            })
            .collect()
    }

    /// The reparametrized curve `zeta -> f(s * zeta)`, computed exactly.
    pub fn reparametrize(&self, s: &QComplex) -> Self {
        HolomorphicCurve { components: self.components.iter().map(|p| p.compose_scale(s)).collect() }
    }
}

/// The polynomial `z' + sum_j x_j y_j'`; zero exactly when `f` is horizontal.
pub fn horizontality_residual(f: &HolomorphicCurve) -> CPolynomial {
    let wide = |p: &CPolynomial| p.with_cap(usize::MAX / 4).expect("wide cap");
    let mut r = wide(&f.z().derivative());
    for j in 0..f.n() {
        let term = wide(f.x(j)).mul(&wide(&f.y(j).derivative())).expect("wide cap");
        r = r.add(&term);
    }
    r
}

/// Exact variant of [`legendrian_from_xy`] with a rational base value.
pub fn legendrian_from_xy_exact(x: &[CPolynomial], y: &[CPolynomial], z0: &QComplex) -> Result<HolomorphicCurve> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Domain("need at least one (x, y) pair".into()));
    }
    let cap = x.iter().chain(y).map(CPolynomial::cap).min().unwrap_or(0);
    let mut integrand = CPolynomial::zero().with_cap(cap)?;
    for (xj, yj) in x.iter().zip(y) {
        integrand = integrand.sub(&xj.mul(&yj.derivative())?);
    }
    let z = integrand.with_cap(cap)?.antiderivative(z0)?;
    let mut comps = Vec::with_capacity(2 * x.len() + 1);
    for (xj, yj) in x.iter().zip(y) {
        comps.push(xj.clone());
        comps.push(yj.clone());
    }
    comps.push(z);
    HolomorphicCurve::new(comps)
}

/// Horizontal curve with the given x and y components: `z` solves `z' = -sum x_j y_j'`, `z(0) = z0`.
pub fn legendrian_from_xy(x: &[CPolynomial], y: &[CPolynomial], z0: Complex64) -> Result<HolomorphicCurve> {
    legendrian_from_xy_exact(x, y, &QComplex::from_complex(z0)?)
}

/// The quadratic Legendrian line through `p` with initial velocity `nu`.
///
/// The linear coefficient of `z` is the exact kernel value `-sum x_j nu_{y,j}`,
/// which equals `nu_z` whenever `nu` is exactly horizontal at `p`.
pub fn legendrian_line(p: &ContactPoint, nu: &TangentVector) -> Result<HolomorphicCurve> {
    let residual = alpha0_eval(p, nu)?.norm();
    if !(residual <= KERNEL_TOLERANCE) {
        return Err(Error::NotHorizontal { residual });
    }
    let line = |a: Complex64, b: Complex64| CPolynomial::from_coeffs(&[a, b]);
    let x = p.x.iter().zip(&nu.x).map(|(&a, &b)| line(a, b)).collect::<Result<Vec<_>>>()?;
    let y = p.y.iter().zip(&nu.y).map(|(&a, &b)| line(a, b)).collect::<Result<Vec<_>>>()?;
    legendrian_from_xy(&x, &y, p.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> CPolynomial {
        CPolynomial::from_real_coeffs(c).unwrap()
    }

    #[test]
    fn residual_examples() {
        let f = HolomorphicCurve::new(vec![poly(&[0.0, 1.0]), poly(&[0.0, 1.0]), poly(&[0.0, 0.0, -0.5])]).unwrap();
        assert!(horizontality_residual(&f).is_zero());

        let g = HolomorphicCurve::new(vec![poly(&[0.0, 1.0]), poly(&[0.0, 1.0]), poly(&[0.0])]).unwrap();
        assert_eq!(horizontality_residual(&g), poly(&[0.0, 1.0]));

        let p = ContactPoint::from_real(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(horizontality_residual(&HolomorphicCurve::constant(&p).unwrap()).is_zero());
    }

    #[test]
    fn from_xy_examples() {
        let z = Complex64::new(0.0, 0.0);
        let f = legendrian_from_xy(&[poly(&[0.0, 1.0])], &[poly(&[0.0, 1.0])], z).unwrap();
        assert_eq!(f.z(), &poly(&[0.0, 0.0, -0.5]));

        let c = Complex64::new(2.0, -1.0);
        let g = legendrian_from_xy(&[poly(&[0.0])], &[poly(&[3.0, 1.0, 4.0])], c).unwrap();
        assert_eq!(g.z(), &CPolynomial::constant(c).unwrap());

        let h = legendrian_from_xy(&[poly(&[1.0])], &[poly(&[0.0, 1.0])], z).unwrap();
        assert_eq!(h.z(), &poly(&[0.0, -1.0]));
    }

    #[test]
    fn from_xy_respects_the_cap() {
        let x = CPolynomial::from_real_coeffs(&[0.0, 0.0, 1.0]).unwrap().with_cap(3).unwrap();
        let y = x.clone();
        // x y' has degree 3, its antiderivative degree 4 > 3
        assert!(matches!(legendrian_from_xy(&[x], &[y], Complex64::new(0.0, 0.0)), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn line_examples() {
        let o = ContactPoint::zero(1);
        let f = legendrian_line(&o, &TangentVector::from_real(&[1.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(f.components(), &[poly(&[0.0, 1.0]), poly(&[0.0, 1.0]), poly(&[0.0, 0.0, -0.5])]);

        let p = ContactPoint::from_real(&[2.0, 0.0, 0.0]).unwrap();
        let g = legendrian_line(&p, &TangentVector::zero(1)).unwrap();
        assert_eq!(g, HolomorphicCurve::constant(&p).unwrap());

        let p = ContactPoint::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let h = legendrian_line(&p, &TangentVector::from_real(&[0.0, 1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(h.components(), &[poly(&[1.0]), poly(&[0.0, 1.0]), poly(&[0.0, -1.0])]);
        assert!(horizontality_residual(&h).is_zero());

        let bad = TangentVector::from_real(&[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(legendrian_line(&p, &bad), Err(Error::NotHorizontal { .. })));
    }

    #[test]
    fn line_has_prescribed_jet() {
        let p = ContactPoint::from_real(&[0.5, -1.25, 3.0, 2.0, 0.75]).unwrap();
        let nu = TangentVector::from_real(&[1.0, 2.0, -0.5, 4.0, -(0.5 * 2.0 + 3.0 * 4.0)]).unwrap();
        let f = legendrian_line(&p, &nu).unwrap();
        assert_eq!(f.eval(Complex64::new(0.0, 0.0)), p);
        assert_eq!(f.derivative_at(Complex64::new(0.0, 0.0)), nu);
    }

    #[test]
    fn reparametrization_scales_velocity() {
        let f = legendrian_from_xy(&[poly(&[0.0, 1.0, 2.0])], &[poly(&[1.0, 3.0])], Complex64::new(0.0, 0.0)).unwrap();
        let s = QComplex::from_complex(Complex64::new(0.5, 0.0)).unwrap();
        let g = f.reparametrize(&s);
        assert!(horizontality_residual(&g).is_zero());
        assert_eq!(g.derivative_at(Complex64::new(0.0, 0.0)).x[0], Complex64::new(0.5, 0.0));
    }
}
