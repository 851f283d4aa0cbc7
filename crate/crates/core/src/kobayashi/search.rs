use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::{alpha0_eval, legendrian_from_xy, ContactPoint, HolomorphicCurve, TangentVector, KERNEL_TOLERANCE};
use crate::error::{Error, Result};
use crate::numeric::{uniform_disk, CPolynomial};
use crate::obstacle::{certify_avoidance, indexed_rng, ShellUnion};

/// Parameters of the disk search behind [`directed_norm_upper`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBudget {
    /// Degree of the free `x_j`, `y_j` components.
    pub degree: usize,
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    /// Cap on `|lambda| * maxnorm(v)`.
    pub lambda_max: f64,
    /// Distance by which a certified disk misses every shell.
    pub margin: f64,
    /// Weight of the shell penalty against `ln lambda`.
    pub penalty_weight: f64,
    /// Rays and radii of the sampling grid used by the penalty.
    pub rays: usize,
    pub radii: usize,
    /// Piece budget of the avoidance certifier.
    pub piece_budget: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            degree: 4,
            restarts: 32,
            max_evals: 600,
            lambda_max: 1e3,
            margin: 1e-6,
            penalty_weight: 10.0,
            rays: 32,
            radii: 16,
            piece_budget: 4_000,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: &str| Err(Error::ConfigField { field: field.into(), message: message.into() });
        if self.degree == 0 || self.degree > 16 {
            return bad("degree", "must lie in 1..=16");
        }
        if self.restarts == 0 || self.max_evals == 0 || self.rays == 0 || self.radii == 0 || self.piece_budget == 0 {
            return bad("restarts", "restarts, max_evals, rays, radii and piece_budget must be at least 1");
        }
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) {
            return bad("lambda_max", "must be positive and finite");
        }
        if !(self.margin >= 0.0) || !(self.penalty_weight > 0.0) {
            return bad("margin", "margin must be nonnegative and penalty_weight positive");
        }
        Ok(())
    }
}

/// Where the disks have to live.
#[derive(Clone, Copy, Debug)]
pub enum Domain<'a> {
    FullSpace,
    /// Complement of `obstacle`. Disks must keep their `(x, y)` block below
    /// `reach` in max-norm, the radius up to which `obstacle` is complete.
    Complement { obstacle: &'a ShellUnion, reach: f64 },
}

/// Best certified disk found for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperEstimate {
    /// `1 / |lambda|`, or `+inf` when no disk was certified.
    pub upper: f64,
    /// Best `|lambda|` for the direction as given.
    pub lambda: f64,
    /// Disk with `f(0) = p`, `f'(0) = lambda * v / maxnorm(v)` scaled back to `v`.
    pub witness: Option<HolomorphicCurve>,
    /// Index of the restart that produced the witness.
    pub restart: Option<usize>,
    pub certified_restarts: usize,
    pub evaluations: usize,
    /// Largest certified `|lambda|` of every restart, `0` when uncertified.
    pub restart_lambdas: Vec<f64>,
}

impl UpperEstimate {
    pub fn is_finite(&self) -> bool {
        self.upper.is_finite()
    }
}

/// Candidate disk: `x_j = p_x + lambda u_x zeta + ...`, same for `y_j`.
struct Family<'a> {
    p: &'a ContactPoint,
    u: &'a TangentVector,
    degree: usize,
}

impl Family<'_> {
    fn n(&self) -> usize {
        self.p.n()
    }

    /// Variables: `ln lambda`, then re/im of coefficients `2..=degree` of `x_1, y_1, ..., x_n, y_n`.
    fn vars(&self) -> usize {
        1 + 2 * self.n() * 2 * (self.degree - 1)
    }

    fn xy(&self, lambda: f64, u: &[f64]) -> Vec<Vec<Complex64>> {
        let n = self.n();
        let higher = self.degree - 1;
        let mut out = Vec::with_capacity(2 * n);
        for c in 0..2 * n {
            let (base, vel) = if c % 2 == 0 { (self.p.x[c / 2], self.u.x[c / 2]) } else { (self.p.y[c / 2], self.u.y[c / 2]) };
            let mut co = vec![base, vel * lambda];
            for k in 0..higher {
                let at = 1 + 2 * (c * higher + k);
                co.push(Complex64::new(u[at], u[at + 1]));
            }
            out.push(co);
        }
        out
    }

    fn float_z(&self, xy: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); 2 * self.degree + 1];
        z[0] = self.p.z;
        for j in 0..self.n() {
            let (x, y) = (&xy[2 * j], &xy[2 * j + 1]);
            for (a, xa) in x.iter().enumerate() {
                for (b, yb) in y.iter().enumerate().skip(1) {
                    // x y' term of degree a + b - 1 integrates to degree a + b
                    z[a + b] -= xa * yb * b as f64 / (a + b) as f64;
                }
            }
        }
        z
    }

    fn exact(&self, lambda: f64, u: &[f64]) -> Result<HolomorphicCurve> {
        let xy = self.xy(lambda, u);
        let mut xs = Vec::with_capacity(self.n());
        let mut ys = Vec::with_capacity(self.n());
        for j in 0..self.n() {
            xs.push(CPolynomial::from_coeffs(&xy[2 * j])?);
            ys.push(CPolynomial::from_coeffs(&xy[2 * j + 1])?);
        }
        legendrian_from_xy(&xs, &ys, self.p.z)
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn coefficient_sum(c: &[Complex64]) -> f64 {
    c.iter().map(|a| a.norm()).sum()
}

struct Penalty<'a> {
    bands: Vec<(f64, f64, f64)>,
    reach: f64,
    grid: Vec<Vec<Complex64>>,
    family: &'a Family<'a>,
}

impl<'a> Penalty<'a> {
    fn new(family: &'a Family<'a>, domain: Domain, budget: &SearchBudget) -> Self {
        let (bands, reach) = match domain {
            Domain::FullSpace => (Vec::new(), f64::INFINITY),
            Domain::Complement { obstacle, reach } => (
                obstacle
                    .shells()
                    .iter()
                    .map(|s| {
                        (s.inner.to_f64() - budget.margin, s.outer.to_f64() + budget.margin, s.height.to_f64() + budget.margin)
                    })
                    .collect(),
                reach,
            ),
        };
        let grid = (0..budget.rays)
            .map(|a| {
                let theta = std::f64::consts::TAU * a as f64 / budget.rays as f64;
                (0..=budget.radii).map(|t| Complex64::from_polar(t as f64 / budget.radii as f64, theta)).collect()
            })
            .collect();
        Penalty { bands, reach, grid, family }
    }

    /// Relative shortfall of `|z|` below a shell height where the `(x, y)`
    /// block meets that shell's band: the worst one plus the mean over rays.
    /// `None` past the reach.
    fn eval(&self, lambda: f64, u: &[f64]) -> Option<f64> {
        let xy = self.family.xy(lambda, u);
        if xy.iter().any(|c| !(coefficient_sum(c) < self.reach)) {
            return None;
        }
        if self.bands.is_empty() {
            return Some(0.0);
        }
        let z = self.family.float_z(&xy);
        let mut worst: f64 = 0.0;
        let mut total = 0.0;
        for ray in &self.grid {
            let mut prev: Option<(f64, f64)> = None;
            for &zeta in ray {
                let s = xy.iter().map(|c| horner(c, zeta).norm()).fold(0.0, f64::max);
                let w = horner(&z, zeta).norm();
                for &(lo, hi, c) in &self.bands {
                    let mut w_est = f64::INFINITY;
                    if (lo..=hi).contains(&s) {
                        w_est = w;
                    }
                    if let Some((s0, w0)) = prev {
                        for level in [lo, hi] {
                            if (s0 - level) * (s - level) < 0.0 {
                                let tau = (level - s0) / (s - s0);
                                w_est = w_est.min(w0 + tau * (w - w0));
                            }
                        }
                    }
                    if w_est < c {
                        worst = worst.max((c - w_est) / c);
                        total += (c - w_est) / c;
                    }
                }
                prev = Some((s, w));
            }
        }
        Some(worst + total / self.grid.len() as f64)
    }
}

struct RestartOutcome {
    lambda: f64,
    disk: Option<HolomorphicCurve>,
    evaluations: usize,
}

fn certify(family: &Family, domain: Domain, budget: &SearchBudget, lambda: f64, u: &[f64]) -> Result<Option<HolomorphicCurve>> {
    let f = family.exact(lambda, u)?;
    match domain {
        Domain::FullSpace => Ok(Some(f)),
        Domain::Complement { obstacle, .. } => {
            Ok(certify_avoidance(&f, obstacle, budget.margin, budget.piece_budget)?.is_certified().then_some(f))
        }
    }
}

fn run_restart(
    family: &Family,
    penalty: &Penalty,
    domain: Domain,
    budget: &SearchBudget,
    seed: u64,
    index: usize,
) -> Result<RestartOutcome> {
    let ln_cap = budget.lambda_max.ln();
    let dim = family.vars();
    let mut rng = indexed_rng(seed, index as u64);
    let scale = if index == 0 { 0.0 } else { 2f64.powf(rng.gen_range(-3.0..2.0)) * family.p.xy_max_norm().max(1.0) };
    let mut u = vec![0.0; dim];
    u[0] = if index == 0 { 0.5f64.ln() } else { rng.gen_range(-2.0..1.0) * std::f64::consts::LN_2 }.min(ln_cap);
    for k in (1..dim).step_by(2) {
        let c = uniform_disk(&mut rng, scale);
        u[k] = c.re;
        u[k + 1] = c.im;
    }
    let mut h: Vec<f64> = (0..dim).map(|k| if k == 0 { 0.5 } else { 0.5 * scale.max(0.25) }).collect();

    if matches!(domain, Domain::FullSpace) {
        // nothing to avoid: the straight disk at the cap is admissible
        u.iter_mut().skip(1).for_each(|c| *c = 0.0);
        u[0] = ln_cap;
        h.iter_mut().for_each(|s| *s = 0.0);
    }

    let mut evaluations = 0;
    let objective = |u: &[f64], evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        match penalty.eval(u[0].exp(), u) {
            Some(p) => u[0] - budget.penalty_weight * p,
            None => f64::NEG_INFINITY,
        }
    };
    let mut best = objective(&u, &mut evaluations);
    while evaluations < budget.max_evals && h.iter().any(|&s| s > 1e-4) {
        let mut moved = false;
        for k in 0..dim {
            if h[k] <= 1e-4 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut trial = u.clone();
                trial[k] += sign * h[k];
                if k == 0 {
                    trial[0] = trial[0].min(ln_cap);
                }
                let val = objective(&trial, &mut evaluations);
                if val > best {
                    best = val;
                    u = trial;
                    moved = true;
                    break;
                }
            }
            if evaluations >= budget.max_evals {
                break;
            }
        }
        if !moved {
            h.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    // Back off lambda until the exact disk is certified.
    let mut lambda = if u[0] >= ln_cap { budget.lambda_max } else { u[0].exp() };
    for _ in 0..40 {
        if penalty.eval(lambda, &u) == Some(0.0) {
            if let Some(disk) = certify(family, domain, budget, lambda, &u)? {
                return Ok(RestartOutcome { lambda, disk: Some(disk), evaluations });
            }
        }
        lambda *= 0.97;
    }
    Ok(RestartOutcome { lambda: 0.0, disk: None, evaluations })
}

/// Upper bound for the directed norm of `v` at `p` from explicit horizontal
/// disks `f(0) = p`, `f'(0) = lambda v`. Only disks certified against the
/// domain count; with none the bound is `+inf`.
///
/// The search runs on `v / maxnorm(v)`, so doubling `v` returns the same
/// witness with half the `lambda`.
pub fn directed_norm_upper(
    p: &ContactPoint,
    v: &TangentVector,
    domain: Domain,
    budget: &SearchBudget,
    seed: u64,
) -> Result<UpperEstimate> {
    budget.validate()?;
    let residual = alpha0_eval(p, v)?.norm();
    if !(residual <= KERNEL_TOLERANCE) {
        return Err(Error::NotHorizontal { residual });
    }
    if let Domain::Complement { obstacle, reach } = domain {
        if obstacle.dim() != 2 * p.n() + 1 {
            return Err(Error::DimensionMismatch { expected: obstacle.dim(), got: 2 * p.n() + 1 });
        }
        if !(p.xy_max_norm() < reach) {
            return Err(Error::Precondition(format!("base point lies beyond the reach {reach}")));
        }
    }
    let norm = v.max_norm();
    if norm == 0.0 {
        return Ok(UpperEstimate {
            upper: 0.0,
            lambda: f64::INFINITY,
            witness: Some(HolomorphicCurve::constant(p)?),
            restart: None,
            certified_restarts: 0,
            evaluations: 0,
            restart_lambdas: Vec::new(),
        });
    }
    let u = v.scale(Complex64::new(1.0 / norm, 0.0));
    let family = Family { p, u: &u, degree: budget.degree.max(1) };
    let penalty = Penalty::new(&family, domain, budget);
    let restarts = if matches!(domain, Domain::FullSpace) { 1 } else { budget.restarts };

    let outcomes: Vec<Result<RestartOutcome>> =
        (0..restarts).into_par_iter().map(|i| run_restart(&family, &penalty, domain, budget, seed, i)).collect();
    let mut best: Option<(usize, f64, HolomorphicCurve)> = None;
    let mut evaluations = 0;
    let mut certified_restarts = 0;
    let mut restart_lambdas = Vec::with_capacity(restarts);
    for (i, o) in outcomes.into_iter().enumerate() {
        let o = o?;
        evaluations += o.evaluations;
        restart_lambdas.push(o.lambda);
        if let Some(disk) = o.disk {
            certified_restarts += 1;
            if best.as_ref().is_none_or(|b| o.lambda > b.1) {
                best = Some((i, o.lambda, disk));
            }
        }
    }
    Ok(match best {
        Some((i, lambda_hat, disk)) => UpperEstimate {
            upper: norm / lambda_hat,
            lambda: lambda_hat / norm,
            witness: Some(disk),
            restart: Some(i),
            certified_restarts,
            evaluations,
            restart_lambdas: restart_lambdas.iter().map(|l| l / norm).collect(),
        },
        None => UpperEstimate {
            upper: f64::INFINITY,
            lambda: 0.0,
            witness: None,
            restart: None,
            certified_restarts,
            evaluations,
            restart_lambdas: restart_lambdas.iter().map(|l| l / norm).collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::horizontality_residual;
    use crate::obstacle::{standard_obstacle, CRule};

    fn e1() -> TangentVector {
        TangentVector::from_real(&[1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn full_space_reaches_the_cap() {
        let p = ContactPoint::zero(1);
        let r = directed_norm_upper(&p, &e1(), Domain::FullSpace, &SearchBudget::default(), 1).unwrap();
        assert!(r.upper <= 1e-2, "{}", r.upper);
        let w = r.witness.unwrap();
        assert!(horizontality_residual(&w).is_zero());
        assert_eq!(w.eval(Complex64::new(0.0, 0.0)), p);
    }

    #[test]
    fn complement_finds_a_disk_near_the_unit_line() {
        let k = standard_obstacle(1, 8, &CRule::Hyperbolic).unwrap();
        let budget = SearchBudget { restarts: 8, ..SearchBudget::default() };
        let dom = Domain::Complement { obstacle: &k, reach: 256.0 };
        let r = directed_norm_upper(&ContactPoint::zero(1), &e1(), dom, &budget, 3).unwrap();
        assert!(r.upper <= 1.2, "{r:?}");
        assert!(r.lambda < 4.0);
        let w = r.witness.unwrap();
        assert!(certify_avoidance(&w, &k, 1e-6, 20_000).unwrap().is_certified());
        let d = w.derivative_at(Complex64::new(0.0, 0.0));
        assert!((d.x[0].norm() - r.lambda).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_and_bad_direction() {
        let p = ContactPoint::zero(1);
        let zero = TangentVector::zero(1);
        assert_eq!(directed_norm_upper(&p, &zero, Domain::FullSpace, &SearchBudget::default(), 0).unwrap().upper, 0.0);
        let q = ContactPoint::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let v = TangentVector::from_real(&[0.0, 1.0, 0.0]).unwrap();
        assert!(directed_norm_upper(&q, &v, Domain::FullSpace, &SearchBudget::default(), 0).is_err());
    }

    #[test]
    fn doubling_the_vector_halves_lambda_with_the_same_witness() {
        let k = standard_obstacle(1, 8, &CRule::Hyperbolic).unwrap();
        let budget = SearchBudget { restarts: 4, max_evals: 200, ..SearchBudget::default() };
        let dom = Domain::Complement { obstacle: &k, reach: 256.0 };
        let p = ContactPoint::from_real(&[0.5, 0.25, 0.0]).unwrap();
        let v = TangentVector::from_real(&[0.3, 0.2, -0.1]).unwrap();
        let a = directed_norm_upper(&p, &v, dom, &budget, 5).unwrap();
        let b = directed_norm_upper(&p, &v.scale(Complex64::new(2.0, 0.0)), dom, &budget, 5).unwrap();
        assert_eq!(a.witness, b.witness);
        assert_eq!(b.upper, 2.0 * a.upper);
    }
}
