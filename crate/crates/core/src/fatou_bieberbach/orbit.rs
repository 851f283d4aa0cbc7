use serde::{Deserialize, Serialize};

use super::round::PushOutState;
use super::shear::ShearComposition;
use crate::error::{Error, Result};
use crate::numeric::{max_norm, ScaledComplex};

/// Relative allowance for rounding when comparing norms against radii.
const NORM_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    BoundedSoFar,
    Escaped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    /// `Theta_j(p)` for `j = 0..=k`.
    pub points: Vec<Vec<ScaledComplex>>,
    /// Log of the max-norm of each entry of `points`.
    pub log_norms: Vec<f64>,
    /// Least `j >= 1` with `|Theta_j(p)| > j + 1`.
    pub first_escape: Option<usize>,
    pub class: OrbitClass,
}

impl OrbitRecord {
    pub fn rounds(&self) -> usize {
        self.points.len() - 1
    }
}

/// Iterates the maps and records the max-norm after each one.
pub fn compose_orbit(maps: &[ShearComposition], p: &[ScaledComplex]) -> Result<OrbitRecord> {
    let mut points = Vec::with_capacity(maps.len() + 1);
    points.push(p.to_vec());
    for m in maps {
        let next = m.apply(points.last().expect("nonempty"))?;
        points.push(next);
    }
    let log_norms: Vec<f64> = points.iter().map(|q| max_norm(q).ln()).collect();
    let first_escape = (1..log_norms.len()).find(|&j| log_norms[j] > ((j + 1) as f64).ln());
    let class = if first_escape.is_some() { OrbitClass::Escaped } else { OrbitClass::BoundedSoFar };
    Ok(OrbitRecord { points, log_norms, first_escape, class })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OmegaVerdict {
    /// Bounded forever: from round `round` on, the orbit stays inside a polydisk.
    InOmegaCertified { round: usize },
    Escaped { round: usize },
    Undecided,
}

impl OmegaVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            OmegaVerdict::InOmegaCertified { .. } => "in_omega",
            OmegaVerdict::Escaped { .. } => "escaped",
            OmegaVerdict::Undecided => "undecided",
        }
    }
}

/// First round `j` with `|Theta_j(p)| + sum_{m > j} eps_m < j + 1`.
///
/// From there each later map moves the point by less than its tolerance, so
/// the orbit stays below `j + 1` forever.
fn certified_round(state: &PushOutState, orbit: &OrbitRecord) -> Option<usize> {
    (1..orbit.points.len()).find(|&j| {
        let norm = orbit.log_norms[j].exp() * (1.0 + NORM_SLACK);
        norm + state.eps.tail(j) < (j + 1) as f64
    })
}

pub fn omega_membership(state: &PushOutState, p: &[ScaledComplex]) -> Result<OmegaVerdict> {
    let orbit = compose_orbit(&state.thetas(), p)?;
    Ok(classify_orbit(state, &orbit))
}

pub fn classify_orbit(state: &PushOutState, orbit: &OrbitRecord) -> OmegaVerdict {
    if orbit.rounds() == 0 {
        return OmegaVerdict::Undecided;
    }
    if let Some(round) = certified_round(state, orbit) {
        return OmegaVerdict::InOmegaCertified { round };
    }
    match orbit.first_escape {
        Some(round) => OmegaVerdict::Escaped { round },
        None => OmegaVerdict::Undecided,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FbValue {
    pub value: Vec<ScaledComplex>,
    /// `sum_{m > k}` of the tolerances: distance bound to the limit map.
    pub error_bound: f64,
    pub certified_round: usize,
}

/// `Theta_k(p)` for the last built round, with its Cauchy tail.
pub fn fb_map_eval(state: &PushOutState, p: &[ScaledComplex]) -> Result<FbValue> {
    let orbit = compose_orbit(&state.thetas(), p)?;
    match classify_orbit(state, &orbit) {
        OmegaVerdict::InOmegaCertified { round } => Ok(FbValue {
            value: orbit.points.last().expect("nonempty").clone(),
            error_bound: state.eps.tail(state.rounds_built()),
            certified_round: round,
        }),
        other => Err(Error::Precondition(format!("point is not certified inside the domain ({})", other.label()))),
    }
}

/// Euclidean distance between two scaled points.
pub fn scaled_distance(p: &[ScaledComplex], q: &[ScaledComplex]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = (*a - *b).norm().to_f64();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatou_bieberbach::round::{desk_schedule, EpsSchedule};
    use crate::fatou_bieberbach::select::DEFAULT_EXPONENT_CAP;
    use num_complex::Complex64;

    fn pt(re: &[f64]) -> Vec<ScaledComplex> {
        re.iter().map(|&x| Complex64::new(x, 0.0).into()).collect()
    }

    #[test]
    fn empty_orbit_is_bounded() {
        let o = compose_orbit(&[], &pt(&[3.0, -4.0])).unwrap();
        assert_eq!(o.class, OrbitClass::BoundedSoFar);
        assert!((o.log_norms[0] - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn origin_and_shell_point() {
        let s = PushOutState::build(desk_schedule(2, 6).unwrap(), EpsSchedule::default(), 2, DEFAULT_EXPONENT_CAP)
            .unwrap();
        let o = compose_orbit(&s.thetas(), &pt(&[0.0, 0.0])).unwrap();
        assert!(o.log_norms[2].exp() < s.eps.partial_sum(2));
        assert!(matches!(omega_membership(&s, &pt(&[0.0, 0.0])).unwrap(), OmegaVerdict::InOmegaCertified { .. }));

        let e = compose_orbit(&s.thetas(), &pt(&[2.5, 0.0])).unwrap();
        assert_eq!(e.first_escape, Some(1));
        assert_eq!(omega_membership(&s, &pt(&[2.5, 0.0])).unwrap(), OmegaVerdict::Escaped { round: 1 });
        assert!(fb_map_eval(&s, &pt(&[2.5, 0.0])).is_err());
        let v = fb_map_eval(&s, &pt(&[0.1, 0.2])).unwrap();
        assert_eq!(v.error_bound, s.eps.tail(2));
    }
}
