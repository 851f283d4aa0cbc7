use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniform point of the closed disk of radius `r`.
pub fn uniform_disk<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho.min(r), rng.gen::<f64>() * TAU)
}

/// Seeded uniform samples of the closed polydisk of max-norm radius `radius`.
///
/// The first two samples are always the origin and the point whose
/// coordinates all equal `radius`.
pub fn sample_polydisk(dim: usize, radius: f64, count: usize, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    out.push(vec![Complex64::new(0.0, 0.0); dim]);
    if count > 1 {
        out.push(vec![Complex64::new(radius, 0.0); dim]);
    }
    while out.len() < count {
        out.push((0..dim).map(|_| uniform_disk(&mut rng, radius)).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_bounds_and_determinism() {
        let pts = sample_polydisk(2, 1.0, 2, 99).unwrap();
        assert_eq!(pts[0], vec![Complex64::new(0.0, 0.0); 2]);
        assert_eq!(pts[1], vec![Complex64::new(1.0, 0.0); 2]);

        let a = sample_polydisk(3, 2.5, 500, 7).unwrap();
        let b = sample_polydisk(3, 2.5, 500, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|z| z.norm() <= 2.5));
        assert!(sample_polydisk(2, 1.0, 0, 1).is_err());
    }
}
