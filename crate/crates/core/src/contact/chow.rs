use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curve::{legendrian_from_xy_exact, HolomorphicCurve};
use super::point::ContactPoint;
use crate::error::{Error, Result};
use crate::numeric::{CPolynomial, QComplex};

/// How the closing rectangle splits the z-correction `delta = s * t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopShape {
    /// `s = delta`, `t = 1`.
    #[default]
    UnitHeight,
    /// `|s| = |t| = sqrt|delta|` (up to rounding of the square root).
    Balanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// One horizontal arc, parametrized by `t` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSegment {
    pub block: usize,
    pub axis: Axis,
    pub curve: HolomorphicCurve,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathPlan {
    pub segments: Vec<PathSegment>,
}

impl PathPlan {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Exact endpoint of the last segment, if any.
    pub fn end_exact(&self) -> Option<Vec<QComplex>> {
        self.segments.last().map(|s| s.curve.eval_exact(&QComplex::one()))
    }
}

struct Planner {
    n: usize,
    state: Vec<QComplex>,
    segments: Vec<PathSegment>,
}

impl Planner {
    fn x_index(j: usize) -> usize {
        2 * j
    }

    fn y_index(j: usize) -> usize {
        2 * j + 1
    }

    /// Moves one coordinate of block `j` linearly by `delta`.
    fn push(&mut self, j: usize, axis: Axis, delta: &QComplex) -> Result<()> {
        if delta.is_zero() {
            return Ok(());
        }
        let moving = match axis {
            Axis::X => Self::x_index(j),
            Axis::Y => Self::y_index(j),
        };
        let mut xs = Vec::with_capacity(self.n);
        let mut ys = Vec::with_capacity(self.n);
        for b in 0..self.n {
            for (idx, out) in [(Self::x_index(b), &mut xs), (Self::y_index(b), &mut ys)] {
                let mut c = vec![self.state[idx].clone()];
                if idx == moving {
                    c.push(delta.clone());
                }
                out.push(CPolynomial::from_exact(c)?);
            }
        }
        let z0 = self.state[2 * self.n].clone();
        let curve = legendrian_from_xy_exact(&xs, &ys, &z0)?;
        self.state = curve.eval_exact(&QComplex::one());
        self.segments.push(PathSegment { block: j, axis, curve });
        Ok(())
    }
}

fn exact_point(p: &ContactPoint) -> Result<Vec<QComplex>> {
    p.to_coords().into_iter().map(QComplex::from_complex).collect()
}

/// Horizontal path from `p` to `q` with the default loop shape.
pub fn chow_path(p: &ContactPoint, q: &ContactPoint) -> Result<PathPlan> {
    chow_path_with(p, q, LoopShape::UnitHeight)
}

/// Horizontal path from `p` to `q`: per block an x move then a y move, then
/// one rectangle in the first block that fixes the remaining z offset.
pub fn chow_path_with(p: &ContactPoint, q: &ContactPoint, shape: LoopShape) -> Result<PathPlan> {
    let n = p.n();
    q.check_dim(n)?;
    let target = exact_point(q)?;
    let mut pl = Planner { n, state: exact_point(p)?, segments: Vec::new() };

    for j in 0..n {
        let dx = target[Planner::x_index(j)].sub(&pl.state[Planner::x_index(j)]);
        pl.push(j, Axis::X, &dx)?;
        let dy = target[Planner::y_index(j)].sub(&pl.state[Planner::y_index(j)]);
        pl.push(j, Axis::Y, &dy)?;
    }

    let delta = target[2 * n].sub(&pl.state[2 * n]);
    if !delta.is_zero() {
        let (s, t) = loop_sides(&delta, shape)?;
        // x: a -> a - s, y: b -> b + t, x back, y back; net z change s * t
        pl.push(0, Axis::X, &s.neg())?;
        pl.push(0, Axis::Y, &t)?;
        pl.push(0, Axis::X, &s)?;
        pl.push(0, Axis::Y, &t.neg())?;
    }
    debug_assert!(pl.state == target);
    Ok(PathPlan { segments: pl.segments })
}

fn loop_sides(delta: &QComplex, shape: LoopShape) -> Result<(QComplex, QComplex)> {
    let unit = || (delta.clone(), QComplex::one());
    match shape {
        LoopShape::UnitHeight => Ok(unit()),
        LoopShape::Balanced => {
            let root = delta.to_complex().sqrt();
            if root.norm() == 0.0 || !root.norm().is_finite() {
                return Ok(unit());
            }
            let s = QComplex::from_complex(root)?;
            let t = delta.div(&s).ok_or_else(|| Error::Domain("zero loop side".into()))?;
            Ok((s, t))
        }
    }
}

/// Native endpoint of a plan, or `start` for the empty plan.
pub fn plan_endpoint(plan: &PathPlan, start: &ContactPoint) -> ContactPoint {
    match plan.segments.last() {
        Some(s) => s.curve.eval(Complex64::new(1.0, 0.0)),
        None => start.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::curve::horizontality_residual;

    fn real(c: &[f64]) -> ContactPoint {
        ContactPoint::from_real(c).unwrap()
    }

    /// Independent oracle: integrate `z' = -x y'` over each linear segment by hand.
    fn replay(p: &ContactPoint, plan: &PathPlan) -> ContactPoint {
        let mut cur = p.to_coords();
        for seg in &plan.segments {
            let end = seg.curve.eval(Complex64::new(1.0, 0.0)).to_coords();
            let n = (cur.len() - 1) / 2;
            let mut dz = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let (x0, x1) = (cur[2 * j], end[2 * j]);
                let dy = end[2 * j + 1] - cur[2 * j + 1];
                // linear x and y: integral of x y' dt = dy * (x0 + x1) / 2
                dz -= dy * (x0 + x1) / 2.0;
            }
            for k in 0..2 * n {
                cur[k] = end[k];
            }
            cur[2 * n] += dz;
        }
        ContactPoint::from_coords(&cur).unwrap()
    }

    #[test]
    fn identical_endpoints_give_empty_plan() {
        let p = real(&[1.0, 2.0, 3.0]);
        assert!(chow_path(&p, &p).unwrap().is_empty());
    }

    #[test]
    fn pure_z_move_is_one_rectangle() {
        let w = 2.5;
        let plan = chow_path(&ContactPoint::zero(1), &real(&[0.0, 0.0, w])).unwrap();
        assert_eq!(plan.len(), 4);
        let ends: Vec<ContactPoint> = plan.segments.iter().map(|s| s.curve.eval(Complex64::new(1.0, 0.0))).collect();
        assert_eq!(ends[0], real(&[-w, 0.0, 0.0]));
        assert_eq!(ends[1], real(&[-w, 1.0, w]));
        assert_eq!(ends[2], real(&[0.0, 1.0, w]));
        assert_eq!(ends[3], real(&[0.0, 0.0, w]));
        assert_eq!(replay(&ContactPoint::zero(1), &plan), real(&[0.0, 0.0, w]));
    }

    #[test]
    fn diagonal_move_then_correction() {
        let q = real(&[1.0, 1.0, 0.0]);
        let plan = chow_path(&ContactPoint::zero(1), &q).unwrap();
        assert_eq!(plan.len(), 6);
        assert_eq!(plan.segments[1].curve.eval(Complex64::new(1.0, 0.0)), real(&[1.0, 1.0, -1.0]));
        assert_eq!(plan_endpoint(&plan, &ContactPoint::zero(1)), q);
        assert_eq!(replay(&ContactPoint::zero(1), &plan), q);
        assert!(plan.segments.iter().all(|s| horizontality_residual(&s.curve).is_zero()));
    }

    #[test]
    fn balanced_loop_reaches_the_target_exactly() {
        let p = real(&[0.3, -1.0, 0.2, 0.7, 1.1]);
        let q = real(&[-0.4, 0.9, 1.5, -0.25, -2.0]);
        let plan = chow_path_with(&p, &q, LoopShape::Balanced).unwrap();
        assert_eq!(plan.end_exact().unwrap(), exact_point(&q).unwrap());
        assert!(plan.len() <= 4 * 2 + 2);
    }
}
