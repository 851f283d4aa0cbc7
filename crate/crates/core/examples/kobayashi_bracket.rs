//! Lower and upper bounds for the directed norm in the complement of the obstacle.

use hypercontact::contact::{ContactPoint, TangentVector};
use hypercontact::kobayashi::{directed_norm_upper, norm_bracket, Domain, SearchBudget};
use hypercontact::obstacle::{standard_obstacle, CRule};

fn main() -> hypercontact::Result<()> {
    let k = standard_obstacle(1, 8, &CRule::Hyperbolic)?;
    let budget = SearchBudget { restarts: 8, ..SearchBudget::default() };
    for (p, v) in [([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]), ([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]), ([1.5, 0.0, 0.5], [0.0, 1.0, -1.5])] {
        let p = ContactPoint::from_real(&p)?;
        let v = TangentVector::from_real(&v)?;
        let b = norm_bracket(&p, &v, &k, &budget, 3)?;
        let show = |c: Vec<num_complex::Complex64>| c.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(", ");
        println!("p = ({}), v = ({}): {:.4} <= |v| <= {:.4}", show(p.to_coords()), show(v.to_coords()), b.lower.lower, b.upper.upper);
    }
    let p = ContactPoint::zero(1);
    let v = TangentVector::from_real(&[1.0, 0.0, 0.0])?;
    let free = directed_norm_upper(&p, &v, Domain::FullSpace, &budget, 3)?;
    println!("without the obstacle: upper {} (lambda budget {})", free.upper, budget.lambda_max);
    Ok(())
}
