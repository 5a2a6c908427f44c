use dynbound_core::polyfield::{parse_system, Monomial, PolyField, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cubic_field(rng: &mut ChaCha8Rng) -> PolyField {
    let components = (0..3)
        .map(|_| {
            let terms = (0..8).map(|_| {
                let mut e = vec![0u32; 3];
                let mut budget: u32 = rng.gen_range(0..=3);
                while budget > 0 {
                    e[rng.gen_range(0..3)] += 1;
                    budget -= 1;
                }
                Monomial::new(rng.gen_range(-3.0..3.0), e)
            });
            Polynomial::from_terms(3, terms)
        })
        .collect();
    PolyField::new(components)
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    for _ in 0..50 {
        let f = random_cubic_field(&mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let jac = f.jacobian(&x).unwrap();
        for k in 0..3 {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[k] += h;
            lo[k] -= h;
            let (fp, fm) = (f.evaluate(&hi).unwrap(), f.evaluate(&lo).unwrap());
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let exact = jac[(i, k)];
                let scale = exact.abs().max(1.0);
                assert!((fd - exact).abs() / scale < 1e-6, "J[{i},{k}] {exact} vs {fd}");
            }
        }
    }
}

#[test]
fn certified_bound_is_sound_on_random_states() {
    let f = parse_system(
        "dx/dt = x^2 + 3*y^4*z^2 - 7\n\
         dy/dt = 0.5*x^2*y^2 + z^6 + 2\n\
         dz/dt = x^2 + y^2 - 1",
    )
    .unwrap();
    let alphas: Vec<f64> = f.components().iter().map(|p| p.certify_lower_bound().unwrap()).collect();
    assert_eq!(alphas, vec![-7.0, 2.0, -1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100_000 {
        let x = [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)];
        let v = f.evaluate(&x).unwrap();
        for (vi, a) in v.iter().zip(&alphas) {
            assert!(*vi >= *a - 1e-9, "{vi} < {a} at {x:?}");
        }
    }
}

#[test]
fn linear_field_is_additive_with_constant_jacobian() {
    let f = parse_system("dx/dt = 2*x - y\ndy/dt = 3*z\ndz/dt = -x + 4*y - z").unwrap();
    let a = [1.0, -2.0, 0.5];
    let b = [-0.25, 3.0, 7.0];
    let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
    let (fa, fb, fs) = (f.evaluate(&a).unwrap(), f.evaluate(&b).unwrap(), f.evaluate(&sum).unwrap());
    for i in 0..3 {
        assert!((fs[i] - fa[i] - fb[i]).abs() < 1e-12);
    }
    let expected = [2.0, -1.0, 0.0, 0.0, 0.0, 3.0, -1.0, 4.0, -1.0];
    for x in [a, b, [0.0; 3]] {
        let j = f.jacobian(&x).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(j[(r, c)], expected[r * 3 + c]);
            }
        }
    }
}

#[test]
fn zero_state_gives_constant_terms() {
    let f = parse_system("param c=2.5\ndx/dt = x*y - c\ndy/dt = 4 + y^2\ndz/dt = z").unwrap();
    assert_eq!(f.evaluate(&[0.0; 3]).unwrap(), vec![-2.5, 4.0, 0.0]);
}
