use num_complex::Complex64;

use super::point::{alpha0_eval, ContactPoint, TangentVector};
use crate::error::{Error, Result};
use crate::fatou_bieberbach::{to_native, ShearComposition};
use crate::numeric::ScaledComplex;

/// `(Phi^* alpha0)_p(v)`: the standard form at `Phi(p)` applied to `dPhi_p v`.
///
/// `phi` acts on the contact coordinates listed in `embedding` (indices into
/// the `(x1, y1, ..., xn, yn, z)` order) and fixes the others. The derivative
/// is propagated through each shear by the chain rule.
pub fn pullback_eval(
    phi: &ShearComposition,
    embedding: &[usize],
    p: &ContactPoint,
    v: &TangentVector,
) -> Result<Complex64> {
    v.check_dim(p.n())?;
    if phi.is_empty() {
        return alpha0_eval(p, v);
    }
    let (q, w) = push_forward(phi, embedding, p, v)?;
    alpha0_eval(&q, &w)
}

/// Image point and pushed-forward vector under the embedded composition.
pub fn push_forward(
    phi: &ShearComposition,
    embedding: &[usize],
    p: &ContactPoint,
    v: &TangentVector,
) -> Result<(ContactPoint, TangentVector)> {
    let mut pc = p.to_coords();
    let mut vc = v.to_coords();
    if let Some(d) = phi.dim() {
        if embedding.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: embedding.len() });
        }
    }
    if let Some(&bad) = embedding.iter().find(|&&i| i >= pc.len()) {
        return Err(Error::Domain(format!("embedding index {bad} out of range")));
    }
    let sp: Vec<ScaledComplex> = embedding.iter().map(|&i| pc[i].into()).collect();
    let sv: Vec<ScaledComplex> = embedding.iter().map(|&i| vc[i].into()).collect();
    let (fp, fv) = phi.apply_with_tangent(&sp, &sv)?;
    let (fp, fv) = (to_native(&fp)?, to_native(&fv)?);
    for (k, &i) in embedding.iter().enumerate() {
        pc[i] = fp[k];
        vc[i] = fv[k];
    }
    Ok((ContactPoint::from_coords(&pc)?, TangentVector::from_coords(&vc)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatou_bieberbach::{ShearFunction, ShearKind, ShearMap, ShearTerm};
    use crate::numeric::ScaledReal;

    #[test]
    fn identity_pullback_is_alpha0() {
        let p = ContactPoint::from_real(&[0.3, -1.0, 2.0]).unwrap();
        let v = TangentVector::from_real(&[1.0, 0.5, 0.25]).unwrap();
        let got = pullback_eval(&ShearComposition::identity(), &[], &p, &v).unwrap();
        assert_eq!(got, alpha0_eval(&p, &v).unwrap());
    }

    #[test]
    fn single_shear_matches_finite_differences() {
        let f = ShearFunction::new(vec![ShearTerm { radius: ScaledReal::from_f64(0.8), exponent: 3 }]);
        let phi = ShearComposition::identity().then(ShearMap::new(ShearKind::Phi, 2, f).unwrap());
        let emb = [0, 1];
        let p = ContactPoint::from_real(&[0.4, 0.2, -0.1]).unwrap();
        let v = TangentVector::from_real(&[0.3, -0.7, 1.1]).unwrap();
        let got = pullback_eval(&phi, &emb, &p, &v).unwrap();

        // alpha0 at Phi(p) applied to a central difference of Phi along v
        let h = 1e-6;
        let shift = |s: f64| {
            let c: Vec<Complex64> = p.to_coords().iter().zip(v.to_coords()).map(|(a, b)| a + b * s).collect();
            let sub: Vec<Complex64> = emb.iter().map(|&i| c[i]).collect();
            let img = phi.apply_native(&sub).unwrap();
            let mut out = c.clone();
            for (k, &i) in emb.iter().enumerate() {
                out[i] = img[k];
            }
            out
        };
        let (a, b) = (shift(h), shift(-h));
        let fd: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect();
        let center = shift(0.0);
        let want = alpha0_eval(&ContactPoint::from_coords(&center).unwrap(), &TangentVector::from_coords(&fd).unwrap())
            .unwrap();
        assert!((got - want).norm() <= 1e-6 * want.norm().max(1.0));
    }
}
