//! Named three-qubit reference states and linear combinations of them.
//!
//! Initial states are written the way they are printed in ket notation, for
//! example `ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)`. Combinations are
//! always normalized after summation. Ket literals are written `|σN…σ1⟩`,
//! subsystem 1 last.

mod parser;

use alloc::vec::Vec;
use core::fmt;


pub use parser::{ParseError, ParseErrorKind};

use crate::hilbert::{basis_index, StateVector, SubsystemDims};
use crate::{Error, Result, C64};

/// `(|000⟩ − |111⟩)/√2`.
pub fn ghz() -> StateVector {
    let dims = SubsystemDims::qubits(3).expect("three qubits");
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps = alloc::vec![C64::new(0.0, 0.0); 8];
    amps[0] = C64::new(h, 0.0);
    amps[7] = C64::new(-h, 0.0);
    StateVector::from_amplitudes(dims, amps).expect("length 8")
}

/// Two-qubit Bell state that leaves qubit `n` in `|0⟩`:
/// `(|000⟩ + e^{iθ}|x⟩)/√2` with `x` = `110`, `101`, `011` for `n` = 1, 2, 3.
pub fn bell(n: usize, theta: f64) -> Result<StateVector> {
    let partner = match n {
        1 => 0b110,
        2 => 0b101,
        3 => 0b011,
        _ => return Err(Error::BellIndex(n)),
    };
    let dims = SubsystemDims::qubits(3)?;
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps = alloc::vec![C64::new(0.0, 0.0); 8];
    amps[0] = C64::new(h, 0.0);
    amps[partner] = C64::from_polar(h, theta);
    StateVector::from_amplitudes(dims, amps)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    /// Digits in print order, subsystem N first.
    Ket(Vec<usize>),
    Ghz,
    Bell { index: usize, angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: C64,
    pub atom: Atom,
}

/// A flat linear combination of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct StateExpr {
    terms: Vec<Term>,
}

impl StateExpr {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(ParseError {
                position: 0,
                kind: ParseErrorKind::Empty,
            }
            .into());
        }
        Ok(Self { terms })
    }

    pub fn atom(atom: Atom) -> Self {
        Self {
            terms: alloc::vec![Term {
                coefficient: C64::new(1.0, 0.0),
                atom,
            }],
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `self + factor · other`.
    pub fn plus_scaled(&self, factor: C64, other: &StateExpr) -> StateExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term {
            coefficient: factor * t.coefficient,
            atom: t.atom.clone(),
        }));
        StateExpr { terms }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting of f64 is the shortest string that round-trips.
    write!(f, "{v:?}")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Ket(digits) => {
                f.write_str("|")?;
                for d in digits {
                    write!(f, "{d}")?;
                }
                f.write_str(">")
            }
            Atom::Ghz => f.write_str("ghz"),
            Atom::Bell { index, angle } => {
                write!(f, "bell{index}(")?;
                write_real(f, *angle)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for StateExpr {
    /// Renders every coefficient as an explicit complex literal, so that
    /// parsing the output reproduces the same terms exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let c = term.coefficient;
            f.write_str("(")?;
            write_real(f, c.re)?;
            f.write_str(if c.im.is_sign_negative() { "-" } else { "+" })?;
            write_real(f, c.im.abs())?;
            write!(f, "i)*{}", term.atom)?;
        }
        Ok(())
    }
}

/// Parses an expression without reference to any particular dimensions.
/// All kets in one expression must have the same length.
pub fn parse_state_expr(text: &str) -> Result<StateExpr, ParseError> {
    parser::Parser::new(text, None).parse()
}

/// Parses and checks ket literals against `dims`, reporting the offending
/// position.
pub fn parse_state_expr_for(text: &str, dims: &SubsystemDims) -> Result<StateExpr, ParseError> {
    let mut print_order: Vec<usize> = dims.as_slice().to_vec();
    print_order.reverse();
    parser::Parser::new(
        text,
        Some(parser::KetShape {
            print_order_dims: &print_order,
        }),
    )
    .parse()
}

fn atom_vector(atom: &Atom, dims: &SubsystemDims) -> Result<StateVector> {
    let needs_qubits = |name| {
        if dims.count() == 3 && dims.all_qubits() {
            Ok(())
        } else {
            Err(Error::NeedsThreeQubits(name))
        }
    };
    match atom {
        Atom::Ket(digits) => crate::hilbert::basis_ket(digits, dims),
        Atom::Ghz => {
            needs_qubits("ghz")?;
            Ok(ghz())
        }
        Atom::Bell { index, angle } => {
            needs_qubits("bell")?;
            bell(*index, *angle)
        }
    }
}

/// Coefficient-weighted sum of the atoms, before normalization.
pub fn superpose(expr: &StateExpr, dims: &SubsystemDims) -> Result<StateVector> {
    let mut sum = StateVector::zeros(dims.clone());
    for term in &expr.terms {
        if let Atom::Ket(digits) = &term.atom {
            // Cheap path, and it reports the bad digit precisely.
            let idx = basis_index(digits, dims)?;
            sum.amplitudes_mut()[idx] += term.coefficient;
            continue;
        }
        let v = atom_vector(&term.atom, dims)?;
        for (s, a) in sum.amplitudes_mut().iter_mut().zip(v.amplitudes()) {
            *s += term.coefficient * a;
        }
    }
    Ok(sum)
}

/// Normalized state for an expression.
pub fn build_state(expr: &StateExpr, dims: &SubsystemDims) -> Result<StateVector> {
    let sum = superpose(expr, dims)?;
    let norm = sum.norm();
    log::debug!("superposition norm before normalization: {norm:e}");
    if norm < 1e-14 || !norm.is_finite() {
        return Err(Error::DegenerateSuperposition(norm));
    }
    StateVector::normalized(dims.clone(), sum.into_amplitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::fidelity;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dims() -> SubsystemDims {
        SubsystemDims::qubits(3).unwrap()
    }

    #[test]
    fn ghz_amplitudes() {
        let g = ghz();
        assert_eq!(g.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0));
        assert_eq!(g.amplitudes()[7], c(-FRAC_1_SQRT_2, 0.0));
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_states() {
        let b3 = bell(3, PI).unwrap();
        assert_abs_diff_eq!(b3.amplitudes()[0].re, FRAC_1_SQRT_2);
        // |011⟩ is index 3
        assert_abs_diff_eq!(b3.amplitudes()[3].re, -FRAC_1_SQRT_2, epsilon = 1e-16);
        assert_abs_diff_eq!(b3.amplitudes()[3].im, 0.0, epsilon = 1e-16);

        let b2 = bell(2, -PI / 2.0).unwrap();
        // |101⟩ is index 5
        assert_abs_diff_eq!(b2.amplitudes()[5].re, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(b2.amplitudes()[5].im, -FRAC_1_SQRT_2, epsilon = 1e-16);

        let b1 = bell(1, 0.0).unwrap();
        assert_eq!(b1.amplitudes()[6], c(FRAC_1_SQRT_2, 0.0));
        assert_abs_diff_eq!(b1.norm(), 1.0, epsilon = 1e-15);

        assert_eq!(bell(4, 0.0), Err(Error::BellIndex(4)));
        assert_eq!(bell(0, 0.0), Err(Error::BellIndex(0)));
    }

    #[test]
    fn example_expressions_parse() {
        let first = parse_state_expr("ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)").unwrap();
        assert_eq!(first.terms().len(), 3);
        assert_eq!(first.terms()[0].atom, Atom::Ghz);
        assert_eq!(first.terms()[1].coefficient, c(-0.0, -1e-5));
        assert_eq!(first.terms()[2].atom, Atom::Bell { index: 2, angle: PI });
        assert_eq!(first.terms()[2].coefficient.im, -5.2e-4);

        let second = parse_state_expr("bell3(pi) + 9e-5*i*bell2(pi)").unwrap();
        assert_eq!(second.terms().len(), 2);
        assert_eq!(second.terms()[1].coefficient, c(0.0, 9e-5));

        let ket = parse_state_expr("|000>").unwrap();
        assert_eq!(
            ket.terms(),
            &[Term {
                coefficient: c(1.0, 0.0),
                atom: Atom::Ket(alloc::vec![0, 0, 0])
            }]
        );
    }

    #[test]
    fn coefficient_forms() {
        let e = parse_state_expr("2i|001> + 1i*|010> + (0.5-0.25i)*|100> + .5 * 3 |111> - (-1.5)*ghz").unwrap();
        let coeffs: Vec<C64> = e.terms().iter().map(|t| t.coefficient).collect();
        assert_eq!(coeffs, alloc::vec![c(0.0, 2.0), c(0.0, 1.0), c(0.5, -0.25), c(1.5, 0.0), c(1.5, -0.0)]);
    }

    #[test]
    fn angle_arithmetic() {
        let e = parse_state_expr("bell2(-pi/2) + bell1(3*pi/4) + bell3(0.5) + bell1(2*(pi-1)) + bell3(-(pi))").unwrap();
        let angles: Vec<f64> = e
            .terms()
            .iter()
            .map(|t| match t.atom {
                Atom::Bell { angle, .. } => angle,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(angles, alloc::vec![-PI / 2.0, 3.0 * PI / 4.0, 0.5, 2.0 * (PI - 1.0), -PI]);
    }

    #[test]
    fn groups_distribute() {
        let e = parse_state_expr("(|000> - |111>)").unwrap();
        assert_eq!(e.terms().len(), 2);
        let e = parse_state_expr("2*(|000> - i|111>) + |010>").unwrap();
        assert_eq!(e.terms()[1].coefficient, c(0.0, -2.0));
        assert_eq!(e.terms()[2].coefficient, c(1.0, 0.0));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_state_expr("ghz + * bell1(pi)").unwrap_err();
        assert_eq!(err.position, 6);
        let err = parse_state_expr("ghz + foo").unwrap_err();
        assert_eq!(
            err,
            ParseError {
                position: 6,
                kind: ParseErrorKind::UnknownAtom("foo".into())
            }
        );
        let err = parse_state_expr("|000> + |01>").unwrap_err();
        assert_eq!(err.position, 8);
        assert!(matches!(err.kind, ParseErrorKind::KetLength { expected: 3, got: 2 }));
        let err = parse_state_expr("|00").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        let err = parse_state_expr("bell1(pi").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse_state_expr("   ").unwrap_err().kind, ParseErrorKind::Empty);
        let err = parse_state_expr("ghz ghz").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('g'));
        assert!(alloc::format!("{err}").contains("position 4"));
    }

    #[test]
    fn dims_aware_parse() {
        let d = dims();
        assert!(parse_state_expr_for("|0000>", &d).is_err());
        let err = parse_state_expr_for("|020>", &d).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::KetDigit { digit: 2, dim: 2 });
        let qutrit = SubsystemDims::new(alloc::vec![2, 3]).unwrap();
        // print order: subsystem 2 (d = 3) first
        assert!(parse_state_expr_for("|21>", &qutrit).is_ok());
        assert!(parse_state_expr_for("|12>", &qutrit).is_err());
    }

    #[test]
    fn build_normalizes() {
        let d = dims();
        let g = build_state(&parse_state_expr("ghz").unwrap(), &d).unwrap();
        assert_abs_diff_eq!(fidelity(&g, &ghz()).unwrap(), 1.0, epsilon = 1e-15);
        let g2 = build_state(&parse_state_expr("|000> - |111>").unwrap(), &d).unwrap();
        assert!(g2.distance(&ghz()) <= 1e-15);
        let g3 = build_state(&parse_state_expr("(|000> - |111>)").unwrap(), &d).unwrap();
        assert!(g3.distance(&ghz()) <= 1e-15);
    }

    #[test]
    fn build_matches_hand_evaluation() {
        // ghz + 0.1 i bell1(0):
        //   |000⟩: 1/√2 + 0.1i/√2, |110⟩: 0.1i/√2, |111⟩: −1/√2
        let d = dims();
        let expr = parse_state_expr("ghz + 0.1*i*bell1(0)").unwrap();
        let raw = superpose(&expr, &d).unwrap();
        let h = FRAC_1_SQRT_2;
        let mut hand = [c(0.0, 0.0); 8];
        hand[0] = c(h, 0.1 * h);
        hand[6] = c(0.0, 0.1 * h);
        hand[7] = c(-h, 0.0);
        let hand_norm = hand.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert_abs_diff_eq!(hand_norm, (1.01f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(raw.norm(), hand_norm, epsilon = 1e-15);
        let built = build_state(&expr, &d).unwrap();
        assert_abs_diff_eq!(built.norm(), 1.0, epsilon = 1e-12);
        for (b, h) in built.amplitudes().iter().zip(hand) {
            assert!((b - h / hand_norm).norm() < 1e-15);
        }
    }

    #[test]
    fn build_errors() {
        let d = dims();
        let zero = parse_state_expr("|000> - |000>").unwrap();
        assert!(matches!(build_state(&zero, &d), Err(Error::DegenerateSuperposition(_))));
        let long = parse_state_expr("|0000>").unwrap();
        assert!(matches!(build_state(&long, &d), Err(Error::DigitCount { .. })));
        let qutrits = SubsystemDims::new(alloc::vec![3, 3, 3]).unwrap();
        assert!(matches!(
            build_state(&parse_state_expr("ghz").unwrap(), &qutrits),
            Err(Error::NeedsThreeQubits(_))
        ));
        assert!(build_state(&parse_state_expr("|012>").unwrap(), &qutrits).is_ok());
    }

    #[test]
    fn render_round_trip_examples() {
        for text in [
            "ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)",
            "bell3(pi) + 9e-5*i*bell2(pi)",
            "-|000> + (0.3-0.0i)*|101>",
        ] {
            let e = parse_state_expr(text).unwrap();
            let rendered = alloc::format!("{e}");
            assert_eq!(parse_state_expr(&rendered).unwrap(), e, "{rendered}");
        }
    }
}
