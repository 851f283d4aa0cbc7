use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::shells::ShellUnion;
use crate::contact::HolomorphicCurve;
use crate::error::{Error, Result};

/// Default limit on the number of parameter pieces examined by [`certify_avoidance`].
pub const DEFAULT_PIECE_BUDGET: usize = 20_000;

/// Derivative bounds at the center for horizontal disks that avoid the
/// standard obstacle and start in the polydisk of radius `2^{n0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub n0: u32,
    pub n: usize,
    /// `2^{n0+1}`, for every `x_j` and `y_j`.
    pub bound_xy: f64,
    /// `2^{2 n0 + 1}`, for `z`.
    pub bound_z: f64,
}

impl BoundCertificate {
    /// `n * 2^{2 n0 + 1}`: what the Cauchy argument gives for `z` when the
    /// `n` products `x_j y_j'` are summed separately.
    pub fn bound_z_any_dimension(&self) -> f64 {
        self.n as f64 * self.bound_z
    }
}

pub fn derivative_bound_certificate(n0: u32, n: usize) -> Result<BoundCertificate> {
    if n0 == 0 {
        return Err(Error::Domain("N0 must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if 2 * n0 + 1 > 1000 {
        return Err(Error::Domain(format!("N0 = {n0} is out of range")));
    }
    Ok(BoundCertificate {
        n0,
        n,
        bound_xy: 2f64.powi(n0 as i32 + 1),
        bound_z: 2f64.powi(2 * n0 as i32 + 1),
    })
}

/// Outcome of the subdivision certifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Avoidance {
    /// Every piece of the closed unit disk misses every shell by the margin.
    Certified { pieces: usize },
    /// Some piece could not be separated within the budget.
    Inconclusive { pieces: usize },
}

impl Avoidance {
    pub fn is_certified(&self) -> bool {
        matches!(self, Avoidance::Certified { .. })
    }
}

#[derive(Clone, Copy)]
struct Piece {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
}

impl Piece {
    fn center(&self) -> Complex64 {
        Complex64::from_polar(0.5 * (self.r0 + self.r1), 0.5 * (self.t0 + self.t1))
    }

    /// Radius of a disk around the center containing the polar rectangle.
    /// Distance to the center is largest at a corner while the angular width is at most pi.
    fn enclosing_radius(&self, c: Complex64) -> f64 {
        let corners = [
            Complex64::from_polar(self.r0, self.t0),
            Complex64::from_polar(self.r0, self.t1),
            Complex64::from_polar(self.r1, self.t0),
            Complex64::from_polar(self.r1, self.t1),
        ];
        let d = corners.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
        d * (1.0 + 8.0 * f64::EPSILON) + f64::MIN_POSITIVE
    }

    fn split(&self) -> [Piece; 4] {
        let rm = 0.5 * (self.r0 + self.r1);
        let tm = 0.5 * (self.t0 + self.t1);
        [
            Piece { r0: self.r0, r1: rm, t0: self.t0, t1: tm },
            Piece { r0: self.r0, r1: rm, t0: tm, t1: self.t1 },
            Piece { r0: rm, r1: self.r1, t0: self.t0, t1: tm },
            Piece { r0: rm, r1: self.r1, t0: tm, t1: self.t1 },
        ]
    }
}

/// Certified range `[lo, hi]` of `|p|` over the disk of radius `rho` about `c`.
fn modulus_range(p: &crate::numeric::CPolynomial, c: Complex64, rho: f64) -> (f64, f64) {
    let t = p.taylor_shift(c);
    if t.is_empty() {
        return (0.0, 0.0);
    }
    let val = t[0].norm();
    let mut delta = 0.0;
    let mut pow = rho;
    for coeff in &t[1..] {
        delta += coeff.norm() * pow;
        pow *= rho;
    }
    let err = 1e-12 * p.sup_bound(c.norm() + rho) + 1e-300;
    ((val - delta - err).max(0.0), val + delta + err)
}

/// Certifies that the closed unit disk maps outside every shell of `k`,
/// with each shell thickened by `margin`, by subdividing the parameter disk.
pub fn certify_avoidance(f: &HolomorphicCurve, k: &ShellUnion, margin: f64, budget: usize) -> Result<Avoidance> {
    if f.components().len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: f.components().len() });
    }
    if margin < 0.0 {
        return Err(Error::Domain(format!("margin must be nonnegative, got {margin}")));
    }
    let comps = f.components();
    let mut stack: Vec<Piece> = Vec::new();
    for ring in 0..4 {
        for sector in 0..16 {
            stack.push(Piece {
                r0: ring as f64 / 4.0,
                r1: (ring + 1) as f64 / 4.0,
                t0: sector as f64 * TAU / 16.0,
                t1: (sector + 1) as f64 * TAU / 16.0,
            });
        }
    }
    let mut pieces = 0;
    while let Some(piece) = stack.pop() {
        pieces += 1;
        if pieces > budget {
            return Ok(Avoidance::Inconclusive { pieces: pieces - 1 });
        }
        let c = piece.center();
        let rho = piece.enclosing_radius(c);
        let (mut s_lo, mut s_hi) = (0.0f64, 0.0f64);
        for &d in k.shell_dims() {
            let (lo, hi) = modulus_range(&comps[d], c, rho);
            s_lo = s_lo.max(lo);
            s_hi = s_hi.max(hi);
        }
        let (z_lo, _) = modulus_range(&comps[k.disk_dim()], c, rho);
        let separated = k.shells().iter().all(|s| {
            s_hi < s.inner.to_f64() - margin || s_lo > s.outer.to_f64() + margin || z_lo > s.height.to_f64() + margin
        });
        if !separated {
            stack.extend(piece.split());
        }
    }
    Ok(Avoidance::Certified { pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::legendrian_from_xy;
    use crate::numeric::CPolynomial;
    use crate::obstacle::{standard_obstacle, CRule};

    fn disk(cx: f64, cy: f64) -> HolomorphicCurve {
        let x = CPolynomial::from_real_coeffs(&[0.0, cx]).unwrap();
        let y = CPolynomial::from_real_coeffs(&[0.0, cy]).unwrap();
        legendrian_from_xy(&[x], &[y], Complex64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn certificate_examples() {
        let c1 = derivative_bound_certificate(1, 1).unwrap();
        assert_eq!((c1.bound_xy, c1.bound_z), (4.0, 8.0));
        let c3 = derivative_bound_certificate(3, 2).unwrap();
        assert_eq!((c3.bound_xy, c3.bound_z), (16.0, 128.0));
        assert_eq!(c3.bound_z_any_dimension(), 256.0);
        let c4 = derivative_bound_certificate(4, 2).unwrap();
        assert_eq!(c4.bound_xy, 2.0 * c3.bound_xy);
        assert_eq!(c4.bound_z, 4.0 * c3.bound_z);
        assert!(derivative_bound_certificate(0, 1).is_err());
    }

    #[test]
    fn small_disk_is_certified_and_large_one_is_not() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let small = certify_avoidance(&disk(0.5, 0.5), &k, 1e-6, DEFAULT_PIECE_BUDGET).unwrap();
        assert!(small.is_certified());
        let big = certify_avoidance(&disk(5.0, 5.0), &k, 1e-6, 2_000).unwrap();
        assert!(!big.is_certified());
    }

    #[test]
    fn disk_far_above_the_shells_is_certified() {
        // x = 1.5 zeta crosses the first shell only where |z| is near 1e3 > 16
        let k = standard_obstacle(1, 3, &CRule::Hyperbolic).unwrap();
        let x = CPolynomial::from_real_coeffs(&[0.0, 1.5]).unwrap();
        let y = CPolynomial::from_real_coeffs(&[0.0, 0.0]).unwrap();
        let f = legendrian_from_xy(&[x], &[y], Complex64::new(1000.0, 0.0)).unwrap();
        assert!(certify_avoidance(&f, &k, 1e-6, DEFAULT_PIECE_BUDGET).unwrap().is_certified());
    }
}
