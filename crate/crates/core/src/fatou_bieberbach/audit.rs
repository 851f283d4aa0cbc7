use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::orbit::scaled_distance;
use super::round::{PushOutState, Round, StepRecord};
use super::select::{revalidate, witness_at};
use super::shear::ShearFunction;
use crate::error::{Error, Result};
use crate::numeric::{sample_polydisk, ScaledComplex};
use crate::obstacle::ShellUnion;

/// Draws a point of shell `i` (0-based): the largest shell coordinate gets a
/// log-uniform modulus in `[inner, outer]`, the others and the disk
/// coordinate are uniform in their disks.
pub fn sample_shell_point<R: Rng>(k: &ShellUnion, i: usize, rng: &mut R) -> Result<Vec<ScaledComplex>> {
    let shell = k.shells().get(i).ok_or_else(|| Error::Domain(format!("no shell {}", i + 1)))?;
    let (lo, hi) = (shell.inner.ln(), shell.outer.ln());
    for _ in 0..64 {
        let mut p = vec![ScaledComplex::ZERO; k.dim()];
        let lead = k.shell_dims()[rng.gen_range(0..k.shell_dims().len())];
        let lm = lo + rng.gen::<f64>() * (hi - lo);
        for &d in k.shell_dims() {
            let l = if d == lead { lm } else { lm + 0.5 * rng.gen::<f64>().ln() };
            p[d] = ScaledComplex::from_log_polar(l, rng.gen::<f64>() * TAU);
        }
        let lh = shell.height.ln() + 0.5 * rng.gen::<f64>().ln();
        p[k.disk_dim()] = ScaledComplex::from_log_polar(lh, rng.gen::<f64>() * TAU);
        if k.shell_of_scaled(&p) == Some(i) {
            return Ok(p);
        }
    }
    Err(Error::Precondition(format!("could not sample shell {} within rounding", i + 1)))
}

/// Independent check of one built round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundAudit {
    pub k: usize,
    pub eps: f64,
    pub containment_samples: usize,
    /// Smallest log-margin of an image inside the next union.
    pub containment_min_margin: f64,
    pub containment_failures: usize,
    /// `ln` of the first inner radius of the next union.
    pub next_inner_ln: f64,
    pub avoidance_ok: bool,
    pub identity_samples: usize,
    pub identity_sampled_sup: f64,
    pub identity_certified: f64,
    pub witnesses_revalidated: bool,
    pub persistence_ok: bool,
}

impl RoundAudit {
    pub fn containment_ok(&self) -> bool {
        self.containment_failures == 0 && self.containment_min_margin > 0.0
    }

    pub fn identity_ok(&self) -> bool {
        self.identity_sampled_sup < self.eps && self.identity_certified < self.eps
    }

    pub fn passed(&self) -> bool {
        self.containment_ok()
            && self.avoidance_ok
            && self.identity_ok()
            && self.witnesses_revalidated
            && self.persistence_ok
    }
}

fn step_witnesses_hold(step: &StepRecord, bump: u64, cap: u64) -> (bool, bool) {
    let mut stored = true;
    let mut bumped = true;
    for (j, w) in step.witnesses.iter().enumerate() {
        let partial = ShearFunction::new(step.map.function.terms[..j].to_vec());
        stored &= revalidate(w, &partial).ok();
        bumped &= witness_at(&w.input, &partial, w.exponent + bump, cap.max(w.exponent + bump))
            .is_ok_and(|b| revalidate(&b, &partial).ok());
    }
    (stored, bumped)
}

fn round_of(state: &PushOutState, k: usize) -> Result<&Round> {
    if k == 0 || k > state.rounds_built() {
        return Err(Error::Domain(format!("round {k} has not been built ({} available)", state.rounds_built())));
    }
    Ok(&state.rounds[k - 1])
}

/// Audits round `k` against the three round conditions and the witness checks.
pub fn audit_round(
    state: &PushOutState,
    k: usize,
    samples_per_shell: usize,
    identity_samples: usize,
    seed: u64,
) -> Result<RoundAudit> {
    let round = round_of(state, k)?;
    let from = state.union(k);
    let theta = round.theta();

    let per_shell: Vec<Result<(f64, usize)>> = (0..from.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 32) ^ (i as u64 + 1));
            let mut min_margin = f64::INFINITY;
            let mut failures = 0;
            for _ in 0..samples_per_shell {
                let p = sample_shell_point(from, i, &mut rng)?;
                let q = theta.apply(&p)?;
                let m = round.next.membership_margin_scaled(&q)?;
                min_margin = min_margin.min(m);
                if round.next.shell_of_scaled(&q).is_none() {
                    failures += 1;
                }
            }
            Ok((min_margin, failures))
        })
        .collect();
    let mut containment_min_margin = f64::INFINITY;
    let mut containment_failures = 0;
    for r in per_shell {
        let (m, f) = r?;
        containment_min_margin = containment_min_margin.min(m);
        containment_failures += f;
    }

    let next_inner = round.next.inner_radius().expect("nonempty union");
    let avoidance_ok = round.psi.witnesses.first().is_some_and(|w| w.m.to_f64() >= (k + 1) as f64)
        && next_inner > crate::numeric::ScaledReal::from_f64((k + 1) as f64);

    let pts = sample_polydisk(state.dim, k as f64, identity_samples.max(1), seed.wrapping_add(k as u64))?;
    let sups: Vec<Result<f64>> = pts
        .par_iter()
        .map(|p| {
            let s: Vec<ScaledComplex> = p.iter().map(|&z| z.into()).collect();
            Ok(scaled_distance(&theta.apply(&s)?, &s))
        })
        .collect();
    let mut identity_sampled_sup: f64 = 0.0;
    for s in sups {
        identity_sampled_sup = identity_sampled_sup.max(s?);
    }

    let (phi_ok, phi_bump) = step_witnesses_hold(&round.phi, 5, state.exponent_cap);
    let (psi_ok, psi_bump) = step_witnesses_hold(&round.psi, 5, state.exponent_cap);

    Ok(RoundAudit {
        k,
        eps: round.eps,
        containment_samples: samples_per_shell * from.len(),
        containment_min_margin,
        containment_failures,
        next_inner_ln: next_inner.ln(),
        avoidance_ok,
        identity_samples: pts.len(),
        identity_sampled_sup,
        identity_certified: round.identity_bound.to_f64(),
        witnesses_revalidated: phi_ok && psi_ok,
        persistence_ok: phi_bump && psi_bump,
    })
}
