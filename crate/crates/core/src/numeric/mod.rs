//! Extended-range scalars, exact polynomial calculus and seeded sampling.

mod poly;
mod sample;
mod scaled;

pub use poly::{poly_antiderivative, poly_eval_deriv, poly_sup_bound, CPolynomial, QComplex, DEFAULT_DEGREE_CAP};
pub use sample::{sample_polydisk, uniform_disk};
pub use scaled::{max_norm, scaled_add, scaled_pow, ScaledComplex, ScaledReal};
