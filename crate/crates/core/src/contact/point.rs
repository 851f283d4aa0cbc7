use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! coordinate_triple {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            pub x: Vec<Complex64>,
            pub y: Vec<Complex64>,
            pub z: Complex64,
        }

        impl $name {
            pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, z: Complex64) -> Result<Self> {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
                }
                if x.is_empty() {
                    return Err(Error::Domain("need at least one (x, y) pair".into()));
                }
                Ok($name { x, y, z })
            }

            pub fn zero(n: usize) -> Self {
                let o = Complex64::new(0.0, 0.0);
                $name { x: vec![o; n], y: vec![o; n], z: o }
            }

            /// Half the number of (x, y) coordinates.
            pub fn n(&self) -> usize {
                self.x.len()
            }

            /// From coordinates ordered `(x1, y1, ..., xn, yn, z)`.
            pub fn from_coords(c: &[Complex64]) -> Result<Self> {
                if c.len() < 3 || c.len() % 2 == 0 {
                    return Err(Error::Domain(format!(
                        "expected 2n+1 coordinates with n >= 1, got {}",
                        c.len()
                    )));
                }
                let n = (c.len() - 1) / 2;
                let x = (0..n).map(|j| c[2 * j]).collect();
                let y = (0..n).map(|j| c[2 * j + 1]).collect();
                Ok($name { x, y, z: c[2 * n] })
            }

            /// Real coordinates in the same order as [`Self::from_coords`].
            pub fn from_real(c: &[f64]) -> Result<Self> {
                let v: Vec<Complex64> = c.iter().map(|&t| Complex64::new(t, 0.0)).collect();
                Self::from_coords(&v)
            }

            pub fn to_coords(&self) -> Vec<Complex64> {
                let mut out = Vec::with_capacity(2 * self.n() + 1);
                for j in 0..self.n() {
                    out.push(self.x[j]);
                    out.push(self.y[j]);
                }
                out.push(self.z);
                out
            }

            pub fn max_norm(&self) -> f64 {
                self.to_coords().iter().map(|c| c.norm()).fold(0.0, f64::max)
            }

            /// Max-norm over the (x, y) block only.
            pub fn xy_max_norm(&self) -> f64 {
                self.x.iter().chain(&self.y).map(|c| c.norm()).fold(0.0, f64::max)
            }

            pub fn check_dim(&self, n: usize) -> Result<()> {
                if self.x.len() != n || self.y.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: self.x.len().max(self.y.len()) });
                }
                Ok(())
            }
        }
    };
}

coordinate_triple!(
    /// Point of `C^{2n+1}` with coordinates `(x1, y1, ..., xn, yn, z)`.
    ContactPoint
);

coordinate_triple!(
    /// Tangent vector at a point of `C^{2n+1}`, same layout as [`ContactPoint`].
    TangentVector
);

impl TangentVector {
    pub fn scale(&self, s: Complex64) -> Self {
        TangentVector {
            x: self.x.iter().map(|c| c * s).collect(),
            y: self.y.iter().map(|c| c * s).collect(),
            z: self.z * s,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.max_norm() == 0.0
    }
}

/// The standard contact form `dz + sum x_j dy_j` at `p`, applied to `v`.
pub fn alpha0_eval(p: &ContactPoint, v: &TangentVector) -> Result<Complex64> {
    v.check_dim(p.n())?;
    Ok(p.x.iter().zip(&v.y).fold(v.z, |acc, (x, vy)| acc + x * vy))
}
