//! Magnitudes far outside the f64 range, as produced by high shear exponents.

use hypercontact::numeric::{scaled_pow, ScaledComplex, ScaledReal};
use num_complex::Complex64;

fn main() -> hypercontact::Result<()> {
    // (4/3)^100000 has about 12494 decimal digits
    let big = scaled_pow(4.0, 3.0, 100_000)?;
    println!("(4/3)^100000      = {}", big.norm());
    println!("ln of it          = {}", big.log_mag());

    let tiny = scaled_pow(1.0, 3.0, 100_000)?;
    println!("(1/3)^100000      = {}", tiny.norm());
    println!("product           = {}", (big * tiny).norm());

    let z = ScaledComplex::from(Complex64::new(3.0, 4.0));
    println!("|3+4i|^1000 / 5^1000 = {}", (z.powu(1000).norm() / ScaledReal::from_f64(5.0).powu(1000)).to_f64());
    println!("back to native    = {}", (z + ScaledComplex::one()).to_complex());
    Ok(())
}
