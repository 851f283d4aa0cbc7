use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{certify_avoidance, derivative_bound_certificate};
use super::shells::{standard_obstacle, CRule};
use crate::contact::{legendrian_from_xy, HolomorphicCurve};
use crate::error::{Error, Result};
use crate::numeric::{uniform_disk, CPolynomial};

/// Independent generator for item `index` of a seeded stream.
pub(crate) fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A random horizontal polynomial disk with `f(0)` in the open polydisk of
/// radius `2^{n0}`. Higher coefficients share one log-uniform scale between
/// `1/8` and `2^{n0+2}`, so a good share of the disks run into the obstacle
/// whatever `n` is.
pub fn random_horizontal_disk<R: Rng>(n: usize, n0: u32, degree: usize, rng: &mut R) -> Result<HolomorphicCurve> {
    if n == 0 || degree == 0 {
        return Err(Error::Domain("n and degree must be at least 1".into()));
    }
    let r0 = 2f64.powi(n0 as i32) * (1.0 - 1e-9);
    let scale = 2f64.powf(rng.gen_range(-3.0..(n0 as f64 + 2.0)));
    let poly = |rng: &mut R| -> Result<CPolynomial> {
        let d = rng.gen_range(1..=degree);
        let mut c = vec![uniform_disk(rng, r0)];
        for k in 1..=d {
            c.push(uniform_disk(rng, scale / k as f64));
        }
        CPolynomial::from_coeffs(&c)
    };
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(poly(rng)?);
        y.push(poly(rng)?);
    }
    let z0 = uniform_disk(rng, r0);
    legendrian_from_xy(&x, &y, z0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteConfig {
    pub n: usize,
    pub n0: u32,
    /// Number of certified-avoiding disks to collect.
    pub disks: usize,
    pub max_attempts: usize,
    pub degree: usize,
    pub i_max: usize,
    pub margin: f64,
    pub piece_budget: usize,
    pub seed: u64,
    /// Heights of the obstacle cylinders.
    pub rule: CRule,
}

impl LemmaSuiteConfig {
    pub fn new(n: usize, n0: u32, disks: usize, seed: u64) -> Self {
        LemmaSuiteConfig {
            n,
            n0,
            disks,
            max_attempts: 40 * disks,
            degree: 3,
            i_max: 8,
            margin: 1e-6,
            piece_budget: 4_000,
            seed,
            rule: CRule::Hyperbolic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteResult {
    pub n: usize,
    pub n0: u32,
    pub accepted: usize,
    pub attempts: usize,
    /// Largest `|x_j'(0)|` or `|y_j'(0)|` over the bound.
    pub max_xy_ratio: f64,
    /// Largest `|z'(0)|` over `2^{2 n0 + 1}`.
    pub max_z_ratio: f64,
    pub violations: usize,
}

impl LemmaSuiteResult {
    pub fn passed(&self, wanted: usize) -> bool {
        self.accepted >= wanted && self.violations == 0 && self.max_xy_ratio < 1.0 && self.max_z_ratio < 1.0
    }
}

/// Samples random horizontal disks, keeps those with certified avoidance of
/// the standard obstacle (truncated at `i_max`, with `x, y` bounded by
/// `2^{i_max}` on the closed disk so that the truncation is harmless), and
/// measures their derivatives at the center against the certificate.
pub fn lemma_suite(cfg: &LemmaSuiteConfig) -> Result<LemmaSuiteResult> {
    let k = standard_obstacle(cfg.n, cfg.i_max, &cfg.rule)?;
    let cert = derivative_bound_certificate(cfg.n0, cfg.n)?;
    let reach = 2f64.powi(cfg.i_max as i32);
    let batch = 256;
    let mut ratios: Vec<(f64, f64)> = Vec::with_capacity(cfg.disks);
    let mut attempts = 0;
    while ratios.len() < cfg.disks && attempts < cfg.max_attempts {
        let end = (attempts + batch).min(cfg.max_attempts);
        let found: Vec<Result<Option<(f64, f64)>>> = (attempts..end)
            .into_par_iter()
            .map(|idx| {
                let mut rng = indexed_rng(cfg.seed, idx as u64);
                let f = random_horizontal_disk(cfg.n, cfg.n0, cfg.degree, &mut rng)?;
                let bounded = f.components()[..2 * cfg.n].iter().all(|c| c.sup_bound(1.0) < reach);
                if !bounded || !certify_avoidance(&f, &k, cfg.margin, cfg.piece_budget)?.is_certified() {
                    return Ok(None);
                }
                let v = f.derivative_at(Complex64::new(0.0, 0.0));
                let xy = v.x.iter().chain(&v.y).map(|c| c.norm()).fold(0.0, f64::max);
                Ok(Some((xy / cert.bound_xy, v.z.norm() / cert.bound_z)))
            })
            .collect();
        for r in found {
            if let Some(pair) = r? {
                if ratios.len() < cfg.disks {
                    ratios.push(pair);
                }
            }
        }
        attempts = end;
    }
    let max_xy_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_z_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let violations = ratios.iter().filter(|r| r.0 >= 1.0 || r.1 >= 1.0).count();
    Ok(LemmaSuiteResult { n: cfg.n, n0: cfg.n0, accepted: ratios.len(), attempts, max_xy_ratio, max_z_ratio, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::horizontality_residual;

    #[test]
    fn generated_disks_are_horizontal_and_centered() {
        let mut rng = indexed_rng(5, 0);
        for _ in 0..50 {
            let f = random_horizontal_disk(2, 1, 3, &mut rng).unwrap();
            assert!(horizontality_residual(&f).is_zero());
            assert!(f.eval(Complex64::new(0.0, 0.0)).max_norm() < 2.0);
        }
    }

    #[test]
    fn small_suite_passes() {
        let cfg = LemmaSuiteConfig::new(1, 1, 40, 9);
        let r = lemma_suite(&cfg).unwrap();
        assert!(r.passed(40), "{r:?}");
    }
}
