//! Builds the push-out rounds on the desk schedule in C^2 and audits them.

use hypercontact::fatou_bieberbach::{audit_round, desk_schedule, EpsSchedule, PushOutState, DEFAULT_EXPONENT_CAP};

fn main() -> hypercontact::Result<()> {
    let k1 = desk_schedule(2, 6)?;
    let eps = EpsSchedule::Geometric { first: 0.25, ratio: 0.5 };
    let state = PushOutState::build(k1, eps, 6, DEFAULT_EXPONENT_CAP)?;
    for round in &state.rounds {
        let exps: Vec<u64> = round.phi.witnesses.iter().map(|w| w.exponent).collect();
        println!("round {}: phi exponents {:?}", round.k, exps);
    }
    for k in 1..=state.rounds_built() {
        let a = audit_round(&state, k, 200, 1000, 1)?;
        println!(
            "round {k}: containment margin {:.4}, identity sup {:.2e} < {}, passed {}",
            a.containment_min_margin, a.identity_sampled_sup, a.eps, a.passed()
        );
    }
    Ok(())
}
