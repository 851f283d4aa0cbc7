//! Exactly horizontal disks for dz + x dy, checked on rational coefficients.

use hypercontact::contact::{horizontality_residual, legendrian_from_xy, legendrian_line, ContactPoint, TangentVector};
use hypercontact::numeric::CPolynomial;
use num_complex::Complex64;

fn main() -> hypercontact::Result<()> {
    let x = CPolynomial::from_real_coeffs(&[0.5, 1.0, 0.0, -0.25])?;
    let y = CPolynomial::from_real_coeffs(&[0.0, 2.0, 1.0])?;
    let f = legendrian_from_xy(&[x], &[y], Complex64::new(1.0, 0.0))?;
    println!("x = {}", f.x(0));
    println!("y = {}", f.y(0));
    println!("z = {}", f.z());
    println!("residual of f*alpha: {}", horizontality_residual(&f));

    let p = ContactPoint::from_real(&[1.0, 2.0, 0.0])?;
    // horizontal at p: v_z = -x v_y
    let v = TangentVector::from_real(&[1.0, 1.0, -1.0])?;
    let line = legendrian_line(&p, &v)?;
    println!("line through p: z = {}, residual {}", line.z(), horizontality_residual(&line));
    Ok(())
}
