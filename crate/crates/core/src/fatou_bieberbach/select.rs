//! Exponent selection for one term of a shear function.
//!
//! For shell `i` with data `b_{i-1} < r_i < a_i <= b_i` the exponent `N_i` must
//! make the new term small on the inner disk and large on the annulus:
//!
//! * small: `(b_{i-1}/r_i)^N < 2^{-i-1} eps`;
//! * large: `(a_i/r_i)^N - f_{i-1}(b_i) - c_i - eps > M_i`, where
//!   `M_i = max(floor, ceil(f_{i-1}(b_{i-1}) + c_{i-1} + eps) + 1)`.
//!
//! Every comparison is made between certified bounds: powers and sums are
//! widened by their worst-case rounding, and the final quantities are
//! additionally inflated or deflated by a relative log tolerance.

use serde::{Deserialize, Serialize};

use super::shear::{ShearFunction, ShearTerm, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::numeric::ScaledReal;

/// Relative log tolerance applied to every certified comparison.
pub const CERT_TOL: f64 = 1e-10;

pub const DEFAULT_EXPONENT_CAP: u64 = 1_000_000;

/// Values above this are no longer meaningfully integers.
const INTEGER_LIMIT: f64 = 4_503_599_627_370_496.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionInput {
    /// 1-based shell index.
    pub index: usize,
    pub b_prev: ScaledReal,
    pub c_prev: ScaledReal,
    pub radius: ScaledReal,
    pub a: ScaledReal,
    pub b: ScaledReal,
    pub c: ScaledReal,
    pub eps: f64,
    /// Lower bound imposed on `M_i`.
    pub m_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionWitness {
    pub input: SelectionInput,
    pub exponent: u64,
    pub m: ScaledReal,
    pub alpha: ScaledReal,
    pub beta_prev: ScaledReal,
    /// `ln(2^{-i-1} eps) - ln(term bound)`.
    pub slack_small: f64,
    /// `ln M - ln(left side bound)`.
    pub slack_lower: f64,
    /// `ln(right side bound) - ln M`.
    pub slack_upper: f64,
}

/// `a + b + ...` rounded upward.
///
/// Rounding is charged relative to `|ln s|` as well, since past `2^53` the
/// binary exponent itself is rounded.
fn sum_hi(terms: &[ScaledReal]) -> ScaledReal {
    let s = terms.iter().fold(ScaledReal::ZERO, |acc, &t| acc + t);
    (s * ScaledReal::from_ln((2 * terms.len() + 2) as f64 * UNIT_ROUNDOFF)).inflate(8.0 * UNIT_ROUNDOFF)
}

/// `a - b` rounded downward, for positive `a` and `b`.
///
/// A difference that cancels more than about 40 bits is reported as zero.
fn sub_lo(a: ScaledReal, b: ScaledReal) -> ScaledReal {
    let d = a - b;
    if !d.is_positive() {
        return d;
    }
    let ratio = ((a.abs() + b.abs()) / d).to_f64();
    if !(ratio < 1e12) {
        return ScaledReal::ZERO;
    }
    (d / ScaledReal::from_ln(4.0 * UNIT_ROUNDOFF * ratio)).deflate(8.0 * UNIT_ROUNDOFF)
}

fn ln_gap(hi: ScaledReal, lo: ScaledReal) -> f64 {
    if !lo.is_positive() {
        return f64::NEG_INFINITY;
    }
    hi.ln() - lo.ln()
}

struct Bounds {
    tol: f64,
    small_target: ScaledReal,
    tail: ScaledReal,
    f_prev_hi: ScaledReal,
    f_b_hi: ScaledReal,
    lhs_hi: ScaledReal,
    m: ScaledReal,
}

impl SelectionInput {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(format!("shell {}: {m}", self.index)));
        if self.index == 0 {
            return bad("index is 1-based");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        if !(self.b_prev < self.radius && self.radius < self.a) {
            return bad("need b_prev < r < a");
        }
        if self.b < self.a {
            return bad("need a <= b");
        }
        Ok(())
    }

    fn bounds(&self, partial: &ShearFunction, tol: f64) -> Bounds {
        let eps = ScaledReal::from_f64(self.eps);
        let small_target = eps * ScaledReal::from_parts(1.0, -(self.index as f64 + 1.0));
        let tail = eps * ScaledReal::from_parts(1.0, -(self.index as f64));
        let f_prev_hi = partial.sup_bound_hi(self.b_prev);
        let f_b_hi = partial.sup_bound_hi(self.b);
        let lhs_hi = sum_hi(&[f_prev_hi, self.c_prev, eps]).inflate(tol);
        let floor = ScaledReal::from_f64(self.m_floor);
        // M keeps room above the left side even when audited at a larger tolerance
        let lhs_m = lhs_hi.inflate(4.0 * tol);
        let m = if lhs_m.to_f64() < INTEGER_LIMIT {
            floor.max(ScaledReal::from_f64(lhs_m.to_f64().ceil() + 1.0))
        } else {
            floor.max(lhs_m)
        };
        Bounds { tol, small_target, tail, f_prev_hi, f_b_hi, lhs_hi, m }
    }

    fn term(&self) -> ShearTerm {
        ShearTerm { radius: self.radius, exponent: 0 }
    }

    fn small_hi(&self, n: u64, tol: f64) -> ScaledReal {
        ShearTerm { exponent: n, ..self.term() }.magnitude_hi(self.b_prev).inflate(tol)
    }

    fn small_ok(&self, n: u64, bd: &Bounds) -> bool {
        self.small_hi(n, bd.tol) < bd.small_target
    }

    /// Certified lower bound for `(a/r)^N - f_{i-1}(b) - c - minus`.
    fn large_lo(&self, n: u64, bd: &Bounds, minus: ScaledReal) -> ScaledReal {
        let p = ShearTerm { exponent: n, ..self.term() }.magnitude_lo(self.a).deflate(bd.tol);
        let d = sub_lo(sub_lo(sub_lo(p, bd.f_b_hi), self.c), minus);
        if d.is_positive() {
            d.deflate(bd.tol)
        } else {
            d
        }
    }

    fn large_ok(&self, n: u64, bd: &Bounds) -> bool {
        self.large_lo(n, bd, ScaledReal::from_f64(self.eps)) > bd.m
    }
}

/// Smallest `n >= 1` with `ok(n)` for a predicate that stays true once it
/// holds, by galloping from a closed-form guess and then bisecting.
fn minimal_from_guess(guess: f64, cap: u64, ok: impl Fn(u64) -> bool) -> Option<u64> {
    if !(guess <= cap as f64) {
        return None;
    }
    let start = (guess.max(1.0) as u64).min(cap);
    let (mut lo, mut hi) = if ok(start) {
        // ok(hi) holds; find a failing lo below it
        let mut hi = start;
        let mut step = 1;
        loop {
            if hi <= 1 {
                return Some(1);
            }
            let lo = hi.saturating_sub(step).max(1);
            if !ok(lo) {
                break (lo, hi);
            }
            if lo == 1 {
                return Some(1);
            }
            hi = lo;
            step *= 2;
        }
    } else {
        let mut lo = start;
        let mut step = 1;
        loop {
            if lo >= cap {
                return None;
            }
            let hi = lo.saturating_add(step).min(cap);
            if ok(hi) {
                break (lo, hi);
            }
            lo = hi;
            step = step.saturating_mul(2);
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Minimal exponent for shell `input.index` given the partial sum of earlier terms.
pub fn select_exponent(input: &SelectionInput, partial: &ShearFunction, cap: u64) -> Result<SelectionWitness> {
    input.validate()?;
    let bd = input.bounds(partial, CERT_TOL);
    let fail = |binding: &str| Error::SelectionFailed { index: input.index, binding: binding.into(), cap };

    // (b_prev / r)^N < target  <=>  N > ln(target) / ln(b_prev / r)
    let ln_small = input.b_prev.ln() - input.radius.ln();
    let guess_a = (bd.small_target.ln() / ln_small).floor() + 1.0;
    let n_a = minimal_from_guess(guess_a, cap, |n| input.small_ok(n, &bd))
        .ok_or_else(|| fail("the smallness estimate on the inner disk"))?;

    let ln_large = input.a.ln() - input.radius.ln();
    let need = sum_hi(&[bd.m, bd.f_b_hi, input.c, ScaledReal::from_f64(input.eps)]);
    let guess_b = (need.ln() / ln_large).floor() + 1.0;
    let n_b = minimal_from_guess(guess_b, cap, |n| input.large_ok(n, &bd))
        .ok_or_else(|| fail("the sandwich estimate on the annulus"))?;

    witness_at(input, partial, n_a.max(n_b), cap)
}

/// The witness for a given exponent, failing if any inequality is violated.
pub fn witness_at(input: &SelectionInput, partial: &ShearFunction, exponent: u64, cap: u64) -> Result<SelectionWitness> {
    input.validate()?;
    let bd = input.bounds(partial, CERT_TOL);
    let fail = |binding: &str| Error::SelectionFailed { index: input.index, binding: binding.into(), cap };
    if exponent == 0 || exponent > cap {
        return Err(fail("the exponent range"));
    }
    if !input.small_ok(exponent, &bd) {
        return Err(fail("the smallness estimate on the inner disk"));
    }
    if !input.large_ok(exponent, &bd) {
        return Err(fail("the sandwich estimate on the annulus"));
    }
    let alpha = input.large_lo(exponent, &bd, bd.tail);
    let beta_prev = sum_hi(&[bd.f_prev_hi, input.c_prev, bd.tail]).inflate(bd.tol);
    let upper = input.large_lo(exponent, &bd, ScaledReal::from_f64(input.eps));
    Ok(SelectionWitness {
        input: input.clone(),
        exponent,
        m: bd.m,
        alpha,
        beta_prev,
        slack_small: ln_gap(bd.small_target, input.small_hi(exponent, bd.tol)),
        slack_lower: ln_gap(bd.m, bd.lhs_hi),
        slack_upper: ln_gap(upper, bd.m),
    })
}

/// Audit of a stored witness with doubled tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Revalidation {
    pub small: bool,
    pub lower: bool,
    pub upper: bool,
    pub sandwich: bool,
    pub beta_bound: bool,
    pub alpha_bound: bool,
}

impl Revalidation {
    pub fn ok(&self) -> bool {
        self.small && self.lower && self.upper && self.sandwich && self.beta_bound && self.alpha_bound
    }
}

/// Re-checks every inequality of `w` with twice the construction tolerance.
pub fn revalidate(w: &SelectionWitness, partial: &ShearFunction) -> Revalidation {
    let input = &w.input;
    let bd = input.bounds(partial, 2.0 * CERT_TOL);
    let eps = ScaledReal::from_f64(input.eps);
    let untouched = Bounds { tol: 0.0, ..input.bounds(partial, 0.0) };
    Revalidation {
        small: input.small_hi(w.exponent, bd.tol) < bd.small_target,
        lower: bd.lhs_hi < w.m,
        upper: input.large_lo(w.exponent, &bd, eps) > w.m,
        sandwich: w.beta_prev < w.m && w.m < w.alpha,
        beta_bound: sum_hi(&[untouched.f_prev_hi, input.c_prev, untouched.tail]) <= w.beta_prev,
        alpha_bound: w.alpha <= input.large_lo(w.exponent, &untouched, untouched.tail),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(b_prev: f64, r: f64, a: f64, b: f64, c_prev: f64, c: f64, eps: f64, index: usize) -> SelectionInput {
        SelectionInput {
            index,
            b_prev: b_prev.into(),
            c_prev: c_prev.into(),
            radius: r.into(),
            a: a.into(),
            b: b.into(),
            c: c.into(),
            eps,
            m_floor: index as f64 + 1.0,
        }
    }

    #[test]
    fn first_shell_example() {
        let inp = input(1.0, 1.5, 2.0, 4.0, 0.0, 1.0, 0.5, 1);
        let w = select_exponent(&inp, &ShearFunction::zero(), DEFAULT_EXPONENT_CAP).unwrap();
        assert_eq!(w.exponent, 6);
        assert_eq!(w.m.to_f64(), 2.0);
        assert!(w.beta_prev < w.m && w.m < w.alpha);

        // brute force in native floats
        let ok = |n: i32| (1.0f64 / 1.5).powi(n) < 0.125 && (2.0f64 / 1.5).powi(n) - 1.0 - 0.5 > 2.0;
        let brute = (1..=10).find(|&n| ok(n)).unwrap();
        assert_eq!(brute, 6);
        assert!((2.0f64 / 3.0).powi(5) >= 0.125 && (4.0f64 / 3.0).powi(5) > 3.5 && (4.0f64 / 3.0).powi(4) < 3.5);
    }

    #[test]
    fn larger_exponents_persist() {
        let inp = input(1.0, 1.5, 2.0, 4.0, 0.0, 1.0, 0.5, 1);
        let w = select_exponent(&inp, &ShearFunction::zero(), DEFAULT_EXPONENT_CAP).unwrap();
        for extra in 1..=5 {
            let w2 = witness_at(&inp, &ShearFunction::zero(), w.exponent + extra, DEFAULT_EXPONENT_CAP).unwrap();
            assert!(revalidate(&w2, &ShearFunction::zero()).ok());
        }
        assert!(revalidate(&w, &ShearFunction::zero()).ok());
        assert!(witness_at(&inp, &ShearFunction::zero(), w.exponent - 1, DEFAULT_EXPONENT_CAP).is_err());
    }

    #[test]
    fn reports_the_binding_inequality() {
        // r almost equal to b_prev: the smallness estimate needs a huge exponent
        let inp = input(1.0, 1.0 + 1e-9, 2.0, 4.0, 0.0, 1.0, 0.5, 1);
        match select_exponent(&inp, &ShearFunction::zero(), 1000) {
            Err(Error::SelectionFailed { binding, index, .. }) => {
                assert_eq!(index, 1);
                assert!(binding.contains("smallness"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let inp = input(1.0, 2.0 - 1e-9, 2.0, 4.0, 0.0, 1.0, 0.5, 1);
        match select_exponent(&inp, &ShearFunction::zero(), 1000) {
            Err(Error::SelectionFailed { binding, .. }) => assert!(binding.contains("sandwich")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_misordered_radius() {
        let inp = input(1.0, 2.5, 2.0, 4.0, 0.0, 1.0, 0.5, 1);
        assert!(matches!(select_exponent(&inp, &ShearFunction::zero(), 100), Err(Error::Precondition(_))));
    }
}
