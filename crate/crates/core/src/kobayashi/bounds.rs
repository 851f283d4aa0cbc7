use serde::{Deserialize, Serialize};

use super::search::{directed_norm_upper, Domain, SearchBudget, UpperEstimate};
use crate::contact::{alpha0_eval, ContactPoint, TangentVector, KERNEL_TOLERANCE};
use crate::error::{Error, Result};
use crate::obstacle::{derivative_bound_certificate, BoundCertificate, Orientation, ShellUnion};

/// Lower bound for the directed norm from the derivative certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEstimate {
    pub lower: f64,
    /// Least `N0 >= 1` with `maxnorm(p) < 2^{N0}`.
    pub n0: u32,
    pub certificate: BoundCertificate,
    /// Coordinate (in `(x1, y1, ..., z)` order) attaining the bound, if any.
    pub binding: Option<usize>,
}

/// Least `N0 >= 1` with `maxnorm(p) < 2^{N0}`.
pub fn minimal_n0(p: &ContactPoint) -> Result<u32> {
    let m = p.max_norm();
    if !m.is_finite() {
        return Err(Error::Domain("point has a non-finite coordinate".into()));
    }
    let mut n0 = 1u32;
    while !(m < 2f64.powi(n0 as i32)) {
        n0 += 1;
    }
    Ok(n0)
}

/// Checks that `k` follows the standard schedule (`a_i = b_i = 2^{i-1}`,
/// `C_i >= n 2^{3i+1}`, vertical) on every shell it lists, and that it lists
/// at least `shells` of them.
fn check_standard(k: &ShellUnion, n: usize, shells: usize) -> Result<()> {
    if k.dim() != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, got: k.dim() });
    }
    if k.orientation() != Orientation::Vertical {
        return Err(Error::Precondition("obstacle must carry its shells on the (x, y) block".into()));
    }
    if k.len() < shells {
        return Err(Error::Precondition(format!("obstacle lists {} shells, need at least {shells}", k.len())));
    }
    for (idx, s) in k.shells().iter().enumerate() {
        let r = 2f64.powi(idx as i32);
        let c = n as f64 * 2f64.powi(3 * (idx as i32 + 1) + 1);
        if s.inner.to_f64() != r || s.outer.to_f64() != r || s.height.to_f64() < c {
            return Err(Error::InvalidSchedule {
                index: idx + 1,
                message: format!("expected radius {r} and height at least {c}"),
            });
        }
    }
    Ok(())
}

/// Any horizontal disk avoiding the untruncated standard obstacle with
/// `f(0) = p` and `f'(0) = lambda v` obeys the certificate bounds, so
/// `|v|` is at least `|v_c| / bound_c` for every coordinate `c`.
///
/// The `z` coordinate uses the dimension-safe bound `n 2^{2 N0 + 1}`.
/// `k` is checked against the standard schedule; the estimate itself
/// concerns the full infinite union.
pub fn directed_norm_lower(p: &ContactPoint, v: &TangentVector, k: &ShellUnion) -> Result<LowerEstimate> {
    let residual = alpha0_eval(p, v)?.norm();
    if !(residual <= KERNEL_TOLERANCE) {
        return Err(Error::NotHorizontal { residual });
    }
    let n0 = minimal_n0(p)?;
    check_standard(k, p.n(), n0 as usize + 1)?;
    let certificate = derivative_bound_certificate(n0, p.n())?;
    let coords = v.to_coords();
    let last = coords.len() - 1;
    let mut lower = 0.0;
    let mut binding = None;
    for (c, value) in coords.iter().enumerate() {
        let bound = if c == last { certificate.bound_z_any_dimension() } else { certificate.bound_xy };
        let ratio = value.norm() / bound;
        if ratio > lower {
            lower = ratio;
            binding = Some(c);
        }
    }
    Ok(LowerEstimate { lower, n0, certificate, binding })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormBracket {
    pub lower: LowerEstimate,
    pub upper: UpperEstimate,
}

impl NormBracket {
    pub fn is_consistent(&self) -> bool {
        self.lower.lower <= self.upper.upper
    }

    pub fn width(&self) -> f64 {
        self.upper.upper - self.lower.lower
    }
}

/// Lower and upper bound at `(p, v)` in the complement of the standard obstacle `k`.
pub fn norm_bracket(
    p: &ContactPoint,
    v: &TangentVector,
    k: &ShellUnion,
    budget: &SearchBudget,
    seed: u64,
) -> Result<NormBracket> {
    let lower = directed_norm_lower(p, v, k)?;
    let reach = 2f64.powi(k.len() as i32);
    let upper = directed_norm_upper(p, v, Domain::Complement { obstacle: k, reach }, budget, seed)?;
    Ok(NormBracket { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::{standard_obstacle, CRule};

    #[test]
    fn lower_examples() {
        let k = standard_obstacle(1, 6, &CRule::Hyperbolic).unwrap();
        let p = ContactPoint::zero(1);
        let e1 = TangentVector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let l = directed_norm_lower(&p, &e1, &k).unwrap();
        assert_eq!((l.lower, l.n0, l.binding), (0.25, 1, Some(0)));
        assert_eq!(directed_norm_lower(&p, &TangentVector::zero(1), &k).unwrap().lower, 0.0);
        let q = ContactPoint::from_real(&[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(directed_norm_lower(&q, &e1, &k).unwrap().n0, 2);
    }

    #[test]
    fn lower_rejects_nonstandard_obstacles() {
        let p = ContactPoint::zero(1);
        let e1 = TangentVector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let low = standard_obstacle(1, 3, &CRule::Explicit(vec![1.0, 1e9, 1e9])).unwrap();
        assert!(directed_norm_lower(&p, &e1, &low).is_err());
        let short = standard_obstacle(1, 1, &CRule::Hyperbolic).unwrap();
        assert!(directed_norm_lower(&p, &e1, &short).is_err());
    }

    #[test]
    fn bracket_at_the_origin() {
        let k = standard_obstacle(1, 8, &CRule::Hyperbolic).unwrap();
        let e1 = TangentVector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let budget = SearchBudget { restarts: 4, ..SearchBudget::default() };
        let b = norm_bracket(&ContactPoint::zero(1), &e1, &k, &budget, 2).unwrap();
        assert!(b.is_consistent());
        assert_eq!(b.lower.lower, 0.25);
        assert!(b.upper.upper <= 1.2);
    }
}
