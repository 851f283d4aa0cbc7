use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{directed_norm_upper, Domain, SearchBudget};
use crate::contact::{chow_path_with, ContactPoint, LoopShape, PathPlan, TangentVector};
use crate::error::Result;

/// Midpoint nodes per path segment.
pub const QUADRATURE_NODES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    /// Midpoint-rule value of the integrated upper norms, `+inf` if some node had no certified disk.
    pub value: f64,
    /// Loop shape of the path that gave `value`.
    pub shape: LoopShape,
    pub segments: usize,
    pub nodes_per_segment: usize,
    /// `|Q_64 - Q_32|` summed over segments, the usual midpoint error proxy.
    pub quadrature_error: f64,
}

fn integrate(plan: &PathPlan, domain: Domain, budget: &SearchBudget, seed: u64, nodes: usize) -> Result<Vec<f64>> {
    let jobs: Vec<(usize, usize)> = (0..plan.len()).flat_map(|s| (0..nodes).map(move |m| (s, m))).collect();
    let values: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(s, m)| {
            let curve = &plan.segments[s].curve;
            let t = Complex64::new((m as f64 + 0.5) / nodes as f64, 0.0);
            let point = curve.eval(t);
            let d = curve.derivative_at(t);
            let v = TangentVector::new(d.x, d.y, d.z)?;
            let node_seed = seed ^ ((s as u64) << 40) ^ m as u64;
            Ok(directed_norm_upper(&point, &v, domain, budget, node_seed)?.upper)
        })
        .collect();
    let mut per_segment = vec![0.0; plan.len()];
    for (&(s, _), v) in jobs.iter().zip(values) {
        per_segment[s] += v? / nodes as f64;
    }
    Ok(per_segment)
}

fn estimate_for(
    p: &ContactPoint,
    q: &ContactPoint,
    shape: LoopShape,
    domain: Domain,
    budget: &SearchBudget,
    seed: u64,
) -> Result<DistanceEstimate> {
    let plan = chow_path_with(p, q, shape)?;
    let fine = integrate(&plan, domain, budget, seed, QUADRATURE_NODES)?;
    let coarse = integrate(&plan, domain, budget, seed, QUADRATURE_NODES / 2)?;
    let value: f64 = fine.iter().sum();
    let quadrature_error = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).sum();
    Ok(DistanceEstimate { value, shape, segments: plan.len(), nodes_per_segment: QUADRATURE_NODES, quadrature_error })
}

/// Upper estimate of the integrated pseudodistance from `p` to `q`: the
/// directed-norm upper bounds integrated along planned horizontal paths,
/// taking the better of the two loop shapes.
pub fn cck_distance_upper(
    p: &ContactPoint,
    q: &ContactPoint,
    domain: Domain,
    budget: &SearchBudget,
    seed: u64,
) -> Result<DistanceEstimate> {
    let mut best: Option<DistanceEstimate> = None;
    for shape in [LoopShape::UnitHeight, LoopShape::Balanced] {
        let e = estimate_for(p, q, shape, domain, budget, seed)?;
        if best.as_ref().is_none_or(|b| e.value < b.value) {
            best = Some(e);
        }
    }
    Ok(best.expect("two shapes tried"))
}
