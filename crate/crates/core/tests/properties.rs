use hypercontact::contact::{
    alpha0_eval, chow_path, horizontality_residual, legendrian_from_xy, legendrian_line, plan_endpoint,
    pullback_eval, ContactPoint, TangentVector,
};
use hypercontact::experiment::{random_horizontal_pair, ExperimentConfig};
use hypercontact::fatou_bieberbach::{
    jacobian_determinant, revalidate, select_exponent, witness_at, SelectionInput, ShearComposition,
    ShearFunction, ShearKind, ShearMap, ShearTerm, DEFAULT_EXPONENT_CAP,
};
use hypercontact::kobayashi::{directed_norm_lower, directed_norm_upper, Domain, SearchBudget};
use hypercontact::numeric::{CPolynomial, QComplex, ScaledComplex, ScaledReal};
use hypercontact::obstacle::{standard_obstacle, CRule};
use hypercontact::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn poly(max_degree: usize, r: f64) -> impl Strategy<Value = CPolynomial> {
    prop::collection::vec(complex(r), 1..=max_degree + 1).prop_map(|c| CPolynomial::from_coeffs(&c).unwrap())
}

/// Complex number with modulus `10^e` for `e` in the given range.
fn wide_complex(e: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (e, -3.1f64..3.1).prop_map(|(e, t)| Complex64::from_polar(10f64.powf(e), t))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scaled_round_trip(z in wide_complex(-300.0..300.0)) {
        prop_assert!(rel(ScaledComplex::from(z).to_complex(), z) <= 1e-14);
    }

    #[test]
    fn scaled_product_adds_logs(la in -5000.0f64..5000.0, lb in -5000.0f64..5000.0, ta in -3.1f64..3.1, tb in -3.1f64..3.1) {
        let (sa, sb) = (ScaledComplex::from_log_polar(la, ta), ScaledComplex::from_log_polar(lb, tb));
        let p = sa * sb;
        let sum = sa.log_mag() + sb.log_mag();
        // one rounding at the scale of the operands
        let scale = sa.log_mag().abs().max(sb.log_mag().abs()).max(1.0);
        prop_assert!((p.log_mag() - sum).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn scaled_zero_laws(a in wide_complex(-300.0..300.0)) {
        let s = ScaledComplex::from(a);
        prop_assert!((s * ScaledComplex::ZERO).is_zero());
        prop_assert_eq!(s + ScaledComplex::ZERO, s);
        prop_assert_eq!(ScaledComplex::ZERO + s, s);
    }

    #[test]
    fn scaled_matches_native(a in wide_complex(-100.0..100.0), b in wide_complex(-100.0..100.0)) {
        let (sa, sb) = (ScaledComplex::from(a), ScaledComplex::from(b));
        prop_assert!(rel((sa * sb).to_complex(), a * b) <= 1e-12);
        prop_assert!(rel((sa / sb).to_complex(), a / b) <= 1e-12);
        // sums are compared against the size of the operands
        let scale = a.norm() + b.norm();
        prop_assert!(((sa + sb).to_complex() - (a + b)).norm() <= 1e-12 * scale);
        prop_assert!(((sa - sb).to_complex() - (a - b)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn scaled_real_order_matches_native(a in -1e300f64..1e300, b in -1e300f64..1e300) {
        let (sa, sb) = (ScaledReal::from_f64(a), ScaledReal::from_f64(b));
        prop_assert_eq!(sa.partial_cmp(&sb), a.partial_cmp(&b));
    }

    #[test]
    fn poly_value_at_zero(p in poly(8, 3.0)) {
        prop_assert_eq!(p.eval(Complex64::new(0.0, 0.0)), p.coeffs()[0]);
    }

    #[test]
    fn antiderivative_and_derivative_are_inverse(p in poly(8, 3.0), c in complex(2.0)) {
        let c = QComplex::from_complex(c).unwrap();
        prop_assert_eq!(p.antiderivative(&c).unwrap().derivative(), p.clone());
        let back = p.derivative().antiderivative(&QComplex::zero()).unwrap();
        let mut expected = p.exact_coeffs().to_vec();
        expected[0] = QComplex::zero();
        prop_assert_eq!(back, CPolynomial::from_exact(expected).unwrap());
    }

    #[test]
    fn derivative_matches_central_differences(p in poly(8, 3.0), z in complex(1.4)) {
        let (_, d) = p.eval_deriv(z);
        let h = 1e-6;
        let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
        prop_assert!((fd - d).norm() <= 1e-5 * d.norm().max(1.0), "fd {} vs {}", fd, d);
    }

    #[test]
    fn sup_bound_dominates(p in poly(8, 3.0), r in 0.1f64..3.0, zs in prop::collection::vec((0.0f64..1.0, -3.2f64..3.2), 50)) {
        let bound = p.sup_bound(r);
        for (s, t) in zs {
            let z = Complex64::from_polar(r * s.sqrt(), t);
            prop_assert!(p.eval(z).norm() <= bound);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendrian_from_xy_is_horizontal(n in 1usize..=3, comps in prop::collection::vec(poly(8, 2.0), 6), z0 in complex(2.0)) {
        let f = legendrian_from_xy(&comps[..n], &comps[n..2 * n], z0).unwrap();
        prop_assert!(horizontality_residual(&f).is_zero());
    }

    #[test]
    fn legendrian_line_has_the_given_jet(n in 1usize..=3, c in prop::collection::vec((-16i32..=16, -16i32..=16), 20)) {
        // dyadic data keeps the kernel condition exact in floats
        let d: Vec<Complex64> = c.iter().map(|&(a, b)| Complex64::new(a as f64 / 8.0, b as f64 / 8.0)).collect();
        let p = ContactPoint::new(d[..n].to_vec(), d[3..3 + n].to_vec(), d[6]).unwrap();
        let (vx, vy) = (d[7..7 + n].to_vec(), d[10..10 + n].to_vec());
        let vz = -p.x.iter().zip(&vy).map(|(a, b)| a * b).sum::<Complex64>();
        let v = TangentVector::new(vx, vy, vz).unwrap();
        let f = legendrian_line(&p, &v).unwrap();
        prop_assert!(horizontality_residual(&f).is_zero());
        let q = |z: Complex64| QComplex::from_complex(z).unwrap();
        for j in 0..n {
            prop_assert_eq!(f.x(j).exact_coeff(0), q(p.x[j]));
            prop_assert_eq!(f.x(j).exact_coeff(1), q(v.x[j]));
            prop_assert_eq!(f.y(j).exact_coeff(0), q(p.y[j]));
            prop_assert_eq!(f.y(j).exact_coeff(1), q(v.y[j]));
        }
        prop_assert_eq!(f.z().exact_coeff(0), q(p.z));
        prop_assert_eq!(f.z().exact_coeff(1), q(v.z));
    }

    #[test]
    fn planned_paths_are_horizontal_and_connected(n in 1usize..=3, a in prop::collection::vec(complex(3.0), 7), b in prop::collection::vec(complex(3.0), 7)) {
        let p = ContactPoint::from_coords(&a[..2 * n + 1]).unwrap();
        let q = ContactPoint::from_coords(&b[..2 * n + 1]).unwrap();
        let plan = chow_path(&p, &q).unwrap();
        let mut cur = p.to_coords();
        for s in &plan.segments {
            prop_assert!(horizontality_residual(&s.curve).is_zero());
            let start = s.curve.eval(Complex64::new(0.0, 0.0)).to_coords();
            let gap = start.iter().zip(&cur).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-12);
            cur = s.curve.eval(Complex64::new(1.0, 0.0)).to_coords();
        }
        let end = plan_endpoint(&plan, &p).to_coords();
        let err = end.iter().zip(q.to_coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10);
    }

    #[test]
    fn empty_pullback_is_the_contact_form(n in 1usize..=3, a in prop::collection::vec(complex(3.0), 7), b in prop::collection::vec(complex(3.0), 7)) {
        let p = ContactPoint::from_coords(&a[..2 * n + 1]).unwrap();
        let v = TangentVector::from_coords(&b[..2 * n + 1]).unwrap();
        let got = pullback_eval(&ShearComposition::identity(), &[], &p, &v).unwrap();
        prop_assert_eq!(got, alpha0_eval(&p, &v).unwrap());
    }
}

fn random_shear() -> impl Strategy<Value = ShearComposition> {
    let term = (0.5f64..3.0, 1u64..8).prop_map(|(r, n)| ShearTerm { radius: r.into(), exponent: n });
    let map = (prop::bool::ANY, prop::collection::vec(term, 1..3), prop::bool::ANY);
    (2usize..=4, prop::collection::vec(map, 1..4)).prop_map(|(dim, maps)| {
        let mut c = ShearComposition::identity();
        for (phi, terms, inv) in maps {
            let kind = if phi { ShearKind::Phi } else { ShearKind::Psi };
            let m = ShearMap::new(kind, dim, ShearFunction::new(terms)).unwrap();
            c = if inv { c.then(m).inverse() } else { c.then(m) };
        }
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shears_invert_and_preserve_volume(phi in random_shear(), z in prop::collection::vec(complex(0.5), 4)) {
        let dim = phi.dim().unwrap();
        let p = &z[..dim];
        // native evaluation is only defined while the orbit stays in f64 range
        let (det, image) = match (jacobian_determinant(&phi, p), phi.apply_native(p)) {
            (Ok(d), Ok(w)) => (d, w),
            (Err(Error::Escaped), _) | (_, Err(Error::Escaped)) => return Err(TestCaseError::reject("overflow")),
            (d, w) => panic!("{:?} {:?}", d.err(), w.err()),
        };
        prop_assert!((det - 1.0).norm() <= 1e-10, "det {}", det);

        // round trips only hold to f64 accuracy where the inverse is well conditioned
        let inv = phi.inverse();
        let w: Vec<ScaledComplex> = image.iter().map(|&z| z.into()).collect();
        let mut rows = vec![0.0; dim];
        for j in 0..dim {
            let mut e = vec![ScaledComplex::from(Complex64::new(0.0, 0.0)); dim];
            e[j] = Complex64::new(1.0, 0.0).into();
            let (_, t) = inv.apply_with_tangent(&w, &e).unwrap();
            for (r, c) in rows.iter_mut().zip(&t) {
                *r += c.to_complex_checked().map_or(f64::INFINITY, |c| c.norm());
            }
        }
        prop_assume!(rows.iter().all(|&r| r <= 1e4));
        let back = inv.apply_native(&image).unwrap();
        let scale = image.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (x, y) in back.iter().zip(p) {
            prop_assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn selected_exponents_persist(b_prev in 0.5f64..4.0, ra in 1.1f64..4.0, t in 0.2f64..0.8, rb in 1.0f64..4.0, c in 0.5f64..20.0, eps in 0.01f64..0.5) {
        let a = b_prev * ra;
        let input = SelectionInput {
            index: 1,
            b_prev: b_prev.into(),
            c_prev: 0.0.into(),
            radius: (b_prev * ra.powf(t)).into(),
            a: a.into(),
            b: (a * rb).into(),
            c: c.into(),
            eps,
            m_floor: 2.0,
        };
        let partial = ShearFunction::zero();
        let w = select_exponent(&input, &partial, DEFAULT_EXPONENT_CAP).unwrap();
        prop_assert!(revalidate(&w, &partial).ok());
        let w5 = witness_at(&input, &partial, w.exponent + 5, DEFAULT_EXPONENT_CAP).unwrap();
        prop_assert!(revalidate(&w5, &partial).ok());
        if w.exponent > 1 {
            prop_assert!(witness_at(&input, &partial, w.exponent - 1, DEFAULT_EXPONENT_CAP).is_err());
        }
    }

    #[test]
    fn misordered_schedules_name_the_index(i in 2usize..=6, shrink in 0.5f64..0.99) {
        // desk schedule with a_i pushed below b_{i-1}
        let mut a: Vec<f64> = (1..=6).map(|k| 2.0 * 4f64.powi(k - 1)).collect();
        let b: Vec<f64> = (1..=6).map(|k| 4f64.powi(k)).collect();
        a[i - 1] = b[i - 2] * shrink;
        let text = serde_json::json!({"n": 1, "pushout": {"schedule": "explicit", "a": a, "b": b, "c": vec![1.0; 6]}});
        match ExperimentConfig::from_json(&text.to_string()) {
            Err(Error::InvalidSchedule { index, .. }) => prop_assert_eq!(index, i),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn norm_bounds_are_homogeneous(seed in any::<u64>(), e in -3i32..=3) {
        // powers of two scale floats exactly
        let s = 2f64.powi(e);
        let k = standard_obstacle(1, 8, &CRule::Hyperbolic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, v) = random_horizontal_pair(1, 0.9, &mut rng).unwrap();
        let sv = v.scale(Complex64::new(s, 0.0));
        let budget = SearchBudget { restarts: 2, max_evals: 150, ..SearchBudget::default() };
        let dom = Domain::Complement { obstacle: &k, reach: 256.0 };
        let u1 = directed_norm_upper(&p, &v, dom, &budget, seed).unwrap();
        let u2 = directed_norm_upper(&p, &sv, dom, &budget, seed).unwrap();
        prop_assert_eq!(&u1.witness, &u2.witness);
        if u1.is_finite() {
            prop_assert!((u2.upper - s * u1.upper).abs() <= 1e-12 * u2.upper);
        }
        let l1 = directed_norm_lower(&p, &v, &k).unwrap().lower;
        let l2 = directed_norm_lower(&p, &sv, &k).unwrap().lower;
        prop_assert!((l2 - s * l1).abs() <= 1e-12 * l2.max(1e-300));
        if u1.is_finite() {
            prop_assert!(l1 <= u1.upper);
        }
    }
}
