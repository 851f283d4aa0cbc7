use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ScaledComplex, ScaledReal};

/// `inner <= maxnorm(shell block) <= outer` and `|disk coordinate| <= height`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub inner: ScaledReal,
    pub outer: ScaledReal,
    pub height: ScaledReal,
}

impl Shell {
    pub fn from_f64(inner: f64, outer: f64, height: f64) -> Self {
        Shell { inner: inner.into(), outer: outer.into(), height: height.into() }
    }
}

/// Which block carries the annular shells: the leading coordinates
/// (`Vertical`) or the trailing ones (`Horizontal`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// Finite union of shell-times-disk cylinders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellUnion {
    shells: Vec<Shell>,
    shell_dims: Vec<usize>,
    disk_dim: usize,
    dim: usize,
    orientation: Orientation,
}

impl ShellUnion {
    pub fn new(
        shells: Vec<Shell>,
        shell_dims: Vec<usize>,
        disk_dim: usize,
        dim: usize,
        orientation: Orientation,
    ) -> Result<Self> {
        validate_shells(&shells)?;
        let mut seen = vec![false; dim];
        for &d in shell_dims.iter().chain(std::iter::once(&disk_dim)) {
            if d >= dim || seen[d] {
                return Err(Error::Domain(format!("coordinate {d} repeated or outside 0..{dim}")));
            }
            seen[d] = true;
        }
        if seen.iter().any(|s| !s) || shell_dims.is_empty() {
            return Err(Error::Domain("shell and disk coordinates must partition the space".into()));
        }
        Ok(ShellUnion { shells, shell_dims, disk_dim, dim, orientation })
    }

    /// Shells on coordinates `0..dim-1`, disk on the last coordinate.
    pub fn vertical(shells: Vec<Shell>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        Self::new(shells, (0..dim - 1).collect(), dim - 1, dim, Orientation::Vertical)
    }

    /// Shells on coordinates `1..dim`, disk on the first coordinate.
    pub fn horizontal(shells: Vec<Shell>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        Self::new(shells, (1..dim).collect(), 0, dim, Orientation::Horizontal)
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn shell_dims(&self) -> &[usize] {
        &self.shell_dims
    }

    pub fn disk_dim(&self) -> usize {
        self.disk_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// Closed membership, with every bound relaxed by `eta`.
    pub fn contains(&self, p: &[Complex64], eta: f64) -> Result<bool> {
        self.check(p.len())?;
        if eta < 0.0 {
            return Err(Error::Domain(format!("tolerance must be nonnegative, got {eta}")));
        }
        let m = self.shell_dims.iter().map(|&d| p[d].norm()).fold(0.0, f64::max);
        let h = p[self.disk_dim].norm();
        Ok(self.shells.iter().any(|s| {
            s.inner.to_f64() - eta <= m && m <= s.outer.to_f64() + eta && h <= s.height.to_f64() + eta
        }))
    }

    /// Index of the shell containing a scaled point, if any.
    pub fn shell_of_scaled(&self, p: &[ScaledComplex]) -> Option<usize> {
        if p.len() != self.dim {
            return None;
        }
        let m = self.shell_dims.iter().map(|&d| p[d].norm()).fold(ScaledReal::ZERO, ScaledReal::max);
        let h = p[self.disk_dim].norm();
        self.shells.iter().position(|s| s.inner <= m && m <= s.outer && h <= s.height)
    }

    pub fn contains_scaled(&self, p: &[ScaledComplex]) -> bool {
        self.shell_of_scaled(p).is_some()
    }

    /// Largest over shells of the smallest log-gap to that shell's three bounds.
    ///
    /// Positive means the point lies inside some shell with that much room in
    /// log-magnitude; negative means it is outside every shell.
    pub fn membership_margin_scaled(&self, p: &[ScaledComplex]) -> Result<f64> {
        self.check(p.len())?;
        let lm = self.shell_dims.iter().map(|&d| p[d].log_mag()).fold(f64::NEG_INFINITY, f64::max);
        let lh = p[self.disk_dim].log_mag();
        Ok(self
            .shells
            .iter()
            .map(|s| {
                let below = lm - s.inner.ln();
                let above = s.outer.ln() - lm;
                let high = s.height.ln() - lh;
                below.min(above).min(high)
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Smallest inner radius; the union misses the open polydisk of that radius.
    pub fn inner_radius(&self) -> Option<ScaledReal> {
        self.shells.first().map(|s| s.inner)
    }
}

fn validate_shells(shells: &[Shell]) -> Result<()> {
    let mut prev_outer: Option<ScaledReal> = None;
    for (k, s) in shells.iter().enumerate() {
        let index = k + 1;
        let err = |message: String| Err(Error::InvalidSchedule { index, message });
        if !s.inner.is_positive() {
            return err(format!("inner radius must be positive, got {}", s.inner.to_f64()));
        }
        if s.outer < s.inner {
            return err("outer radius below inner radius".into());
        }
        if !s.height.is_positive() {
            return err("height must be positive".into());
        }
        if let Some(po) = prev_outer {
            if s.inner <= po {
                return err("inner radius does not exceed the previous outer radius".into());
            }
        }
        prev_outer = Some(s.outer);
    }
    Ok(())
}

/// Rule for the cylinder heights `C_N` of the standard obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CRule {
    /// `C_N = n * 2^{3N+1}`.
    Hyperbolic,
    /// Heights listed explicitly, shell 1 first.
    Explicit(Vec<f64>),
}

impl CRule {
    pub fn height(&self, n: usize, i: usize) -> Result<f64> {
        match self {
            CRule::Hyperbolic => Ok(hyperbolic_height(n, i)),
            CRule::Explicit(h) => {
                h.get(i - 1).copied().ok_or_else(|| Error::InvalidSchedule {
                    index: i,
                    message: format!("explicit rule lists only {} heights", h.len()),
                })
            }
        }
    }

    /// Whether every height through `i_max` reaches `n * 2^{3N+1}`.
    pub fn dominates_hyperbolic(&self, n: usize, i_max: usize) -> bool {
        (1..=i_max).all(|i| self.height(n, i).is_ok_and(|h| h >= hyperbolic_height(n, i)))
    }
}

fn hyperbolic_height(n: usize, i: usize) -> f64 {
    n as f64 * 2f64.powi(3 * i as i32 + 1)
}

/// Degenerate shells `maxnorm(x, y) = 2^{i-1}`, `|z| <= C_i` in `C^{2n+1}`.
pub fn standard_obstacle(n: usize, i_max: usize, rule: &CRule) -> Result<ShellUnion> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if i_max == 0 {
        return Err(Error::InvalidSchedule { index: 0, message: "i_max must be at least 1".into() });
    }
    let mut shells = Vec::with_capacity(i_max);
    for i in 1..=i_max {
        let r = 2f64.powi(i as i32 - 1);
        let h = rule.height(n, i)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidSchedule { index: i, message: format!("height must be positive, got {h}") });
        }
        shells.push(Shell::from_f64(r, r, h));
    }
    ShellUnion::vertical(shells, 2 * n + 1)
}
