//! Rendering a state expression and parsing it back gives the same terms.

use disentangle_core::statelib::{parse_state_expr, Atom, StateExpr, Term};
use disentangle_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => rng.random_range(-1.0..1.0),
        2 => rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-12..4)),
        _ => f64::from(rng.random_range(-5i32..=5)),
    }
}

fn random_atom(rng: &mut ChaCha8Rng, ket_len: usize) -> Atom {
    match rng.random_range(0..3) {
        0 => Atom::Ket((0..ket_len).map(|_| rng.random_range(0..10)).collect()),
        1 => Atom::Ghz,
        _ => Atom::Bell {
            index: rng.random_range(1..=3),
            angle: random_real(rng) * core::f64::consts::PI,
        },
    }
}

fn random_expr(rng: &mut ChaCha8Rng) -> StateExpr {
    let ket_len = rng.random_range(2..=5);
    let count = rng.random_range(1..=6);
    let terms = (0..count)
        .map(|_| Term {
            coefficient: C64::new(random_real(rng), random_real(rng)),
            atom: random_atom(rng, ket_len),
        })
        .collect();
    StateExpr::new(terms).unwrap()
}

#[test]
fn seeded_expressions_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let expr = random_expr(&mut rng);
        let text = expr.to_string();
        let back = parse_state_expr(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, expr, "{text}");
    }
}

fn atom_strategy() -> impl Strategy<Value = Atom> {
    prop_oneof![
        proptest::collection::vec(0usize..10, 3).prop_map(Atom::Ket),
        Just(Atom::Ghz),
        (1usize..=3, -10.0f64..10.0).prop_map(|(index, angle)| Atom::Bell { index, angle }),
    ]
}

fn expr_strategy() -> impl Strategy<Value = StateExpr> {
    let term = (proptest::num::f64::NORMAL, proptest::num::f64::NORMAL, atom_strategy()).prop_map(|(re, im, atom)| {
        Term {
            coefficient: C64::new(re, im),
            atom,
        }
    });
    proptest::collection::vec(term, 1..6).prop_map(|terms| StateExpr::new(terms).unwrap())
}

proptest! {
    #[test]
    fn arbitrary_expressions_round_trip(expr in expr_strategy()) {
        let text = expr.to_string();
        prop_assert_eq!(parse_state_expr(&text).unwrap(), expr);
    }
}
