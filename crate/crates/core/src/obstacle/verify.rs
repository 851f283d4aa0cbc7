use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{certify_avoidance, derivative_bound_certificate, BoundCertificate, DEFAULT_PIECE_BUDGET};
use super::shells::ShellUnion;
use crate::contact::{horizontality_residual, HolomorphicCurve};
use crate::error::{Error, Result};

/// Membership slack used when confirming a sampled intersection.
const HIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Avoidance proved by subdivision.
    Certified,
    /// No intersection found by sampling, but not proved.
    SampledOnly,
    /// The disk meets the obstacle at this parameter.
    Fails { re: f64, im: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskReport {
    pub verdict: Verdict,
    /// `|x_j'(0)|` for each block.
    pub dx: Vec<f64>,
    /// `|y_j'(0)|` for each block.
    pub dy: Vec<f64>,
    pub dz: f64,
    pub certificate: BoundCertificate,
    /// All derivatives strictly below their certificate bounds.
    pub bounds_hold: bool,
}

impl DiskReport {
    pub fn max_xy(&self) -> f64 {
        self.dx.iter().chain(&self.dy).copied().fold(0.0, f64::max)
    }
}

fn shell_norm(f: &HolomorphicCurve, k: &ShellUnion, zeta: Complex64) -> (f64, f64) {
    let comps = f.components();
    let m = k.shell_dims().iter().map(|&d| comps[d].eval(zeta).norm()).fold(0.0, f64::max);
    (m, comps[k.disk_dim()].eval(zeta).norm())
}

fn hits(f: &HolomorphicCurve, k: &ShellUnion, zeta: Complex64) -> bool {
    let p: Vec<Complex64> = f.components().iter().map(|c| c.eval(zeta)).collect();
    k.contains(&p, HIT_TOLERANCE).unwrap_or(false)
}

/// Walks one ray through the sample radii; at every crossing of a shell
/// boundary, bisects to the crossing and tests membership there.
fn search_ray(f: &HolomorphicCurve, k: &ShellUnion, theta: f64, radii: &[f64]) -> Option<Complex64> {
    let at = |r: f64| Complex64::from_polar(r, theta);
    let mut prev_r = 0.0;
    let (mut prev_m, _) = shell_norm(f, k, at(0.0));
    for &r in radii {
        let z = at(r);
        if hits(f, k, z) {
            return Some(z);
        }
        let (m, _) = shell_norm(f, k, z);
        for s in k.shells() {
            for level in [s.inner.to_f64(), s.outer.to_f64()] {
                if (prev_m - level) * (m - level) <= 0.0 {
                    let (mut lo, mut hi) = (prev_r, r);
                    let below = prev_m < level;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if (shell_norm(f, k, at(mid)).0 < level) == below {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    for t in [lo, hi] {
                        if hits(f, k, at(t)) {
                            return Some(at(t));
                        }
                    }
                }
            }
        }
        prev_r = r;
        prev_m = m;
    }
    None
}

/// Checks a horizontal disk against the derivative bounds at the center and
/// decides whether it avoids `k` on the closed unit disk.
///
/// `samples` is the number of rays; each is probed at radii `0.1, ..., 1.0`.
pub fn verify_disk_estimate(
    f: &HolomorphicCurve,
    k: &ShellUnion,
    n0: u32,
    samples: usize,
    margin: f64,
) -> Result<DiskReport> {
    if !horizontality_residual(f).is_zero() {
        return Err(Error::Precondition("disk is not horizontal".into()));
    }
    if f.components().len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: f.components().len() });
    }
    let certificate = derivative_bound_certificate(n0, f.n())?;
    let center = f.eval(Complex64::new(0.0, 0.0));
    if !(center.max_norm() < 2f64.powi(n0 as i32)) {
        return Err(Error::Precondition(format!("f(0) has max-norm {} >= 2^{n0}", center.max_norm())));
    }

    let verdict = if certify_avoidance(f, k, margin, DEFAULT_PIECE_BUDGET)?.is_certified() {
        Verdict::Certified
    } else {
        let radii: Vec<f64> = (1..=10).map(|j| j as f64 / 10.0).collect();
        let found = (0..samples.max(1))
            .into_par_iter()
            .filter_map(|j| search_ray(f, k, TAU * j as f64 / samples.max(1) as f64, &radii).map(|z| (j, z)))
            .min_by_key(|(j, _)| *j);
        match found {
            Some((_, z)) => Verdict::Fails { re: z.re, im: z.im },
            None => Verdict::SampledOnly,
        }
    };

    let v = f.derivative_at(Complex64::new(0.0, 0.0));
    let dx: Vec<f64> = v.x.iter().map(|c| c.norm()).collect();
    let dy: Vec<f64> = v.y.iter().map(|c| c.norm()).collect();
    let dz = v.z.norm();
    let bounds_hold = dx.iter().chain(&dy).all(|&d| d < certificate.bound_xy) && dz < certificate.bound_z;
    Ok(DiskReport { verdict, dx, dy, dz, certificate, bounds_hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{legendrian_from_xy, ContactPoint};
    use crate::numeric::CPolynomial;
    use crate::obstacle::{standard_obstacle, CRule};

    fn line(c: f64) -> HolomorphicCurve {
        let x = CPolynomial::from_real_coeffs(&[0.0, c]).unwrap();
        legendrian_from_xy(&[x.clone()], &[x], Complex64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn half_speed_disk_passes() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let r = verify_disk_estimate(&line(0.5), &k, 1, 64, 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert_eq!(r.dx, vec![0.5]);
        assert!(r.bounds_hold);
        assert_eq!(r.certificate.bound_xy, 4.0);
    }

    #[test]
    fn constant_disk_passes() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let f = HolomorphicCurve::constant(&ContactPoint::zero(1)).unwrap();
        let r = verify_disk_estimate(&f, &k, 1, 16, 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert_eq!(r.max_xy(), 0.0);
        assert!(r.bounds_hold);
    }

    #[test]
    fn fast_disk_meets_the_first_shell() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let r = verify_disk_estimate(&line(5.0), &k, 1, 4096, 1e-6).unwrap();
        let Verdict::Fails { re, im } = r.verdict else { panic!("expected a hit, got {:?}", r.verdict) };
        let z = Complex64::new(re, im);
        let p: Vec<Complex64> = line(5.0).components().iter().map(|c| c.eval(z)).collect();
        assert!(k.contains(&p, 1e-8).unwrap());
        assert!(!r.bounds_hold);
    }

    #[test]
    fn rejects_center_outside_the_polydisk() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let x = CPolynomial::from_real_coeffs(&[3.0]).unwrap();
        let f = legendrian_from_xy(&[x.clone()], &[x], Complex64::new(0.0, 0.0)).unwrap();
        assert!(verify_disk_estimate(&f, &k, 1, 8, 1e-6).is_err());
    }
}
