use serde::{Deserialize, Serialize};

use super::select::{select_exponent, witness_at, SelectionInput, SelectionWitness, CERT_TOL};
use super::shear::{ShearComposition, ShearFunction, ShearKind, ShearMap, ShearTerm, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::numeric::ScaledReal;
use crate::obstacle::{CRule, Shell, ShellUnion};

pub const STATE_VERSION: u32 = 1;

/// Placement parameters `t` tried for `r = b_prev * (a / b_prev)^t`.
const RADIUS_PARAMS: [f64; 13] = [0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 1e-4, 1e-5, 1e-6];

/// Summable sequence of per-round tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `eps_k = first * ratio^{k-1}`.
    Geometric { first: f64, ratio: f64 },
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule::Geometric { first: 0.25, ratio: 0.5 }
    }
}

impl EpsSchedule {
    pub fn validate(&self) -> Result<()> {
        let EpsSchedule::Geometric { first, ratio } = *self;
        if !(first > 0.0 && first < 1.0) {
            return Err(Error::Domain(format!("first tolerance must lie in (0, 1), got {first}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        Ok(())
    }

    /// Tolerance of round `k >= 1`.
    pub fn eps(&self, k: usize) -> f64 {
        let EpsSchedule::Geometric { first, ratio } = *self;
        first * ratio.powi(k as i32 - 1)
    }

    /// `sum_{m > k} eps_m`.
    pub fn tail(&self, k: usize) -> f64 {
        let EpsSchedule::Geometric { first, ratio } = *self;
        first * ratio.powi(k as i32) / (1.0 - ratio)
    }

    /// `sum_{m <= k} eps_m`.
    pub fn partial_sum(&self, k: usize) -> f64 {
        (1..=k).map(|m| self.eps(m)).sum()
    }
}

/// Shells `a_i = 2 * 4^{i-1}`, `b_i = 4^i`, `c_i = 1` in `C^dim`.
pub fn desk_schedule(dim: usize, i_max: usize) -> Result<ShellUnion> {
    let shells = (1..=i_max)
        .map(|i| {
            let b = 4f64.powi(i as i32);
            Shell::from_f64(b / 2.0, b, 1.0)
        })
        .collect();
    ShellUnion::vertical(shells, dim)
}

/// Thickened and dilated copy of the standard contact obstacle.
///
/// Shell `i` becomes `(1 - w) 2^{i-1} <= maxnorm <= (1 + w) 2^{i-1}` and the
/// whole set is scaled by `lambda` so that its first inner radius is 2.
/// Returns the union (in `C^{2n+1}`) and `lambda`.
pub fn enclose_standard(n: usize, i_max: usize, rule: &CRule, widen: f64) -> Result<(ShellUnion, f64)> {
    if !(widen > 0.0 && widen < 1.0 / 3.0) {
        return Err(Error::Domain(format!("widening must lie in (0, 1/3), got {widen}")));
    }
    let lambda = 2.0 / (1.0 - widen);
    let mut shells = Vec::with_capacity(i_max);
    for i in 1..=i_max {
        let r = 2f64.powi(i as i32 - 1);
        let h = rule.height(n, i)?;
        shells.push(Shell::from_f64(lambda * (1.0 - widen) * r, lambda * (1.0 + widen) * r, lambda * h));
    }
    Ok((ShellUnion::vertical(shells, 2 * n + 1)?, lambda))
}

/// One side (phi or psi) of a round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub map: ShearMap,
    pub witnesses: Vec<SelectionWitness>,
    /// The `t` used for each radius.
    pub radius_params: Vec<f64>,
    /// Outer band bound of the image shells, shell 1 first.
    pub betas: Vec<ScaledReal>,
}

impl StepRecord {
    pub fn alphas(&self) -> Vec<ScaledReal> {
        self.witnesses.iter().map(|w| w.alpha).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub k: usize,
    pub eps: f64,
    /// Tolerance fed to the selections (`eps / sqrt(dim - 1)`).
    pub eps_selection: f64,
    pub phi: StepRecord,
    pub psi: StepRecord,
    /// Intermediate union with the roles of the coordinates swapped.
    pub swapped: ShellUnion,
    /// `K_{k+1}`.
    pub next: ShellUnion,
    /// Certified bound for `sup |theta_k(z) - z|` over the closed `k`-polydisk.
    pub identity_bound: ScaledReal,
}

impl Round {
    /// `theta_k = psi_k o phi_k`.
    pub fn theta(&self) -> ShearComposition {
        ShearComposition::identity().then(self.phi.map.clone()).then(self.psi.map.clone())
    }
}

struct StepData {
    a: Vec<ScaledReal>,
    b: Vec<ScaledReal>,
    c: Vec<ScaledReal>,
    b0: ScaledReal,
    eps: f64,
    k: usize,
    cap: u64,
    kind: ShearKind,
    dim: usize,
}

fn build_step(d: StepData) -> Result<StepRecord> {
    let count = d.a.len();
    let mut f = ShearFunction::zero();
    let mut witnesses: Vec<SelectionWitness> = Vec::with_capacity(count);
    let mut params = Vec::with_capacity(count);
    for i in 1..=count {
        let (b_prev, c_prev) = if i == 1 { (d.b0, ScaledReal::ZERO) } else { (d.b[i - 2], d.c[i - 2]) };
        let (a, b) = (d.a[i - 1], d.b[i - 1]);
        let prev_n = witnesses.last().map_or(1, |w| w.exponent);
        let mut best: Option<(f64, f64, SelectionWitness)> = None;
        let mut last_err = None;
        for &t in &RADIUS_PARAMS {
            let r = ScaledReal::from_ln(b_prev.ln() + t * (a.ln() - b_prev.ln()));
            if !(b_prev < r && r < a) {
                continue;
            }
            let input = SelectionInput {
                index: i,
                b_prev,
                c_prev,
                radius: r,
                a,
                b,
                c: d.c[i - 1],
                eps: d.eps,
                m_floor: (i + d.k) as f64,
            };
            let chosen = select_exponent(&input, &f, d.cap).and_then(|w| {
                if w.exponent < prev_n {
                    witness_at(&input, &f, prev_n, d.cap)
                } else {
                    Ok(w)
                }
            });
            match chosen {
                Ok(w) => {
                    let score = w.exponent as f64 * (b.ln() - r.ln());
                    if best.as_ref().map_or(true, |(s, _, _)| score < *s) {
                        best = Some((score, t, w));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        let (_, t, w) = best.ok_or_else(|| {
            last_err.unwrap_or(Error::SelectionFailed {
                index: i,
                binding: "the radius placement b_prev < r < a".into(),
                cap: d.cap,
            })
        })?;
        f.terms.push(ShearTerm { radius: w.input.radius, exponent: w.exponent });
        params.push(t);
        witnesses.push(w);
    }
    let mut betas: Vec<ScaledReal> = Vec::with_capacity(count);
    for i in 1..=count {
        // beta_i bounds sup |f| on the disk of radius b_i, plus c_i
        let tail = ScaledReal::from_f64(d.eps) * ScaledReal::from_parts(1.0, -(i as f64 + 1.0));
        let mut beta = (f.prefix(i).sup_bound_hi(d.b[i - 1]) + d.c[i - 1] + tail)
            * ScaledReal::from_ln(8.0 * UNIT_ROUNDOFF);
        beta = beta.inflate(CERT_TOL);
        if i < count {
            beta = beta.max(witnesses[i].beta_prev);
        }
        betas.push(beta);
    }
    let map = ShearMap::new(d.kind, d.dim, f)?;
    Ok(StepRecord { map, witnesses, radius_params: params, betas })
}

/// Versioned, serializable state of the push-out recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushOutState {
    pub version: u32,
    pub dim: usize,
    pub eps: EpsSchedule,
    pub exponent_cap: u64,
    pub initial: ShellUnion,
    pub rounds: Vec<Round>,
}

impl PushOutState {
    pub fn new(initial: ShellUnion, eps: EpsSchedule, exponent_cap: u64) -> Result<Self> {
        eps.validate()?;
        let dim = initial.dim();
        if initial.shell_dims() != (0..dim - 1).collect::<Vec<_>>().as_slice() {
            return Err(Error::Precondition("initial union must carry its shells on the leading coordinates".into()));
        }
        match initial.inner_radius() {
            Some(a1) if a1 > ScaledReal::ONE => {}
            _ => return Err(Error::Precondition("initial union needs a_1 > 1 (dilate first)".into())),
        }
        Ok(PushOutState { version: STATE_VERSION, dim, eps, exponent_cap, initial, rounds: Vec::new() })
    }

    /// Builds `k_max` rounds starting from `initial`.
    pub fn build(initial: ShellUnion, eps: EpsSchedule, k_max: usize, exponent_cap: u64) -> Result<Self> {
        let mut s = Self::new(initial, eps, exponent_cap)?;
        for _ in 0..k_max {
            s.build_round()?;
        }
        Ok(s)
    }

    /// `K_k` for the next round to build.
    pub fn current(&self) -> &ShellUnion {
        self.rounds.last().map_or(&self.initial, |r| &r.next)
    }

    /// `K_k` for `k >= 1`.
    pub fn union(&self, k: usize) -> &ShellUnion {
        if k <= 1 {
            &self.initial
        } else {
            &self.rounds[k - 2].next
        }
    }

    pub fn rounds_built(&self) -> usize {
        self.rounds.len()
    }

    pub fn build_round(&mut self) -> Result<&Round> {
        let round = build_shear_round(self)?;
        self.rounds.push(round);
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// The maps `theta_1, ..., theta_k`.
    pub fn thetas(&self) -> Vec<ShearComposition> {
        self.rounds.iter().map(Round::theta).collect()
    }

    /// `Theta_k = theta_k o ... o theta_1` as one composition.
    pub fn prefix(&self, k: usize) -> ShearComposition {
        let mut c = ShearComposition::identity();
        for r in self.rounds.iter().take(k) {
            c = c.then(r.phi.map.clone()).then(r.psi.map.clone());
        }
        c
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: PushOutState = serde_json::from_str(text)?;
        if s.version != STATE_VERSION {
            return Err(Error::Parse(format!("unsupported state version {}", s.version)));
        }
        s.eps.validate()?;
        for u in std::iter::once(&s.initial).chain(s.rounds.iter().map(|r| &r.next)) {
            ShellUnion::new(u.shells().to_vec(), u.shell_dims().to_vec(), u.disk_dim(), u.dim(), u.orientation())?;
        }
        Ok(s)
    }
}

/// Builds `theta_k` and `K_{k+1}` for the next round of `state`.
pub fn build_shear_round(state: &PushOutState) -> Result<Round> {
    let k = state.rounds.len() + 1;
    let kk = state.current();
    let dim = state.dim;
    let kf = ScaledReal::from_f64(k as f64);
    if !kk.inner_radius().is_some_and(|a| a > kf) {
        return Err(Error::Precondition(format!("K_{k} meets the closed polydisk of radius {k}")));
    }
    let eps = state.eps.eps(k);
    let eps_sel = eps / ((dim - 1) as f64).sqrt();
    let wide = dim > 2;

    let a: Vec<ScaledReal> = kk.shells().iter().map(|s| s.inner).collect();
    let b: Vec<ScaledReal> = kk.shells().iter().map(|s| s.outer).collect();
    let c: Vec<ScaledReal> =
        kk.shells().iter().map(|s| if wide { s.height.max(s.outer) } else { s.height }).collect();
    let phi = build_step(StepData {
        a,
        b: b.clone(),
        c,
        b0: kf,
        eps: eps_sel,
        k,
        cap: state.exponent_cap,
        kind: ShearKind::Phi,
        dim,
    })?;

    let alphas = phi.alphas();
    let swapped_shells: Vec<Shell> = (0..alphas.len())
        .map(|i| Shell { inner: alphas[i], outer: phi.betas[i], height: b[i] })
        .collect();
    let swapped = ShellUnion::horizontal(swapped_shells, dim)?;

    let c2: Vec<ScaledReal> = (0..alphas.len()).map(|i| if wide { b[i].max(phi.betas[i]) } else { b[i] }).collect();
    let b0_psi = kf + ScaledReal::from_f64(eps_sel / 2.0);
    let psi = build_step(StepData {
        a: alphas,
        b: phi.betas.clone(),
        c: c2,
        b0: b0_psi,
        eps: eps_sel,
        k,
        cap: state.exponent_cap,
        kind: ShearKind::Psi,
        dim,
    })?;

    let next_shells: Vec<Shell> = psi
        .witnesses
        .iter()
        .zip(&psi.betas)
        .zip(&phi.betas)
        .map(|((w, &outer), &height)| Shell { inner: w.alpha, outer, height })
        .collect();
    let next = ShellUnion::vertical(next_shells, dim)?;

    let sum = (phi.map.function.sup_bound_hi(kf) + psi.map.function.sup_bound_hi(b0_psi))
        * ScaledReal::from_ln(4.0 * UNIT_ROUNDOFF);
    let identity_bound = sum * ScaledReal::from_f64(((dim - 1) as f64).sqrt() * (1.0 + 4.0 * UNIT_ROUNDOFF));
    if !(identity_bound < ScaledReal::from_f64(eps)) {
        return Err(Error::Precondition(format!("round {k}: identity bound {} not below eps", identity_bound.to_f64())));
    }
    let next_floor = ScaledReal::from_f64((k + 1) as f64);
    if !next.inner_radius().is_some_and(|a| a > next_floor) {
        return Err(Error::Precondition(format!("round {k}: K_{} meets the polydisk of radius {}", k + 1, k + 1)));
    }
    Ok(Round { k, eps, eps_selection: eps_sel, phi, psi, swapped, next, identity_bound })
}
