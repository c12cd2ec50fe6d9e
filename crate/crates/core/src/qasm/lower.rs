//! Lowering of the supported OpenQASM gate names to the kernel set
//! {H, X, RZ, Ph} with multi-controls.
//!
//! Every lowering is semantically equal to the source gate; gates that can
//! appear under control (all the controlled names, and `y` via its explicit
//! phase) are exact in global phase as well. `rz` follows the
//! phase-convention `diag(1, e^{i*theta})`, i.e. it differs from the
//! half-angle convention by a global phase, which is why `crz` carries its
//! own corrective rotation on the control.

use thiserror::Error;

use super::angle::DyadicAngle;
use crate::circuit::{Gate, GateApp, WireId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("unsupported gate '{0}'")]
    UnsupportedGate(String),
    #[error("gate '{name}' expects {params} parameter(s) and {operands} operand(s)")]
    Arity { name: String, params: usize, operands: usize },
}

/// Names that lower to kernel instructions.
pub const SUPPORTED: &[&str] = &[
    "h", "x", "y", "z", "s", "sdg", "t", "tdg", "rz", "ph", "crz", "cz", "cp", "cu1", "cx", "ccx",
    "c3x", "c4x", "ch", "swap", "cswap", "id",
];

fn arity(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "id" => (0, 1),
        "rz" | "ph" => (1, 1),
        "cx" | "cz" | "ch" | "swap" => (0, 2),
        "cp" | "cu1" | "crz" => (1, 2),
        "ccx" | "cswap" => (0, 3),
        "c3x" => (0, 4),
        "c4x" => (0, 5),
        _ => return None,
    })
}

/// Lowers one gate application to kernel instructions.
pub fn lower_gate(
    name: &str,
    params: &[DyadicAngle],
    operands: &[WireId],
) -> Result<Vec<GateApp>, LowerError> {
    let Some((n_params, n_operands)) = arity(name) else {
        return Err(LowerError::UnsupportedGate(name.to_string()));
    };
    if params.len() != n_params || operands.len() != n_operands {
        return Err(LowerError::Arity {
            name: name.to_string(),
            params: n_params,
            operands: n_operands,
        });
    }
    let gates = match name {
        "h" => vec![GateApp::single(Gate::H, operands[0])],
        "x" => vec![GateApp::single(Gate::X, operands[0])],
        // Y = i·X·Z, with the explicit phase so Y stays exact under control
        "y" => vec![
            GateApp::single(Gate::rz(1, 1), operands[0]),
            GateApp::single(Gate::X, operands[0]),
            GateApp::single(Gate::ph(1, 2), operands[0]),
        ],
        "z" => vec![GateApp::single(Gate::rz(1, 1), operands[0])],
        "s" => vec![GateApp::single(Gate::rz(1, 2), operands[0])],
        "sdg" => vec![GateApp::single(Gate::rz(-1, 2), operands[0])],
        "t" => vec![GateApp::single(Gate::rz(1, 3), operands[0])],
        "tdg" => vec![GateApp::single(Gate::rz(-1, 3), operands[0])],
        "rz" => {
            let a = params[0];
            vec![GateApp::single(Gate::rz(a.mult, a.denom_exp), operands[0])]
        }
        "ph" => {
            let a = params[0];
            vec![GateApp::single(Gate::ph(a.mult, a.denom_exp), operands[0])]
        }
        "cx" => vec![GateApp::controlled(Gate::X, vec![operands[0]], operands[1])],
        "cz" => vec![GateApp::controlled(Gate::rz(1, 1), vec![operands[0]], operands[1])],
        "cp" | "cu1" => {
            let a = params[0];
            vec![GateApp::controlled(Gate::rz(a.mult, a.denom_exp), vec![operands[0]], operands[1])]
        }
        // crz(l) = diag(e^{-il/2}, e^{il/2}) on the target when the control
        // fires: an uncontrolled -l/2 on the control plus a controlled l
        "crz" => {
            let a = params[0];
            vec![
                GateApp::single(Gate::rz(-a.mult, a.denom_exp + 1), operands[0]),
                GateApp::controlled(Gate::rz(a.mult, a.denom_exp), vec![operands[0]], operands[1]),
            ]
        }
        // the 7-gate exact decomposition: (S H T) X (Tdg H Sdg) around the CX
        "ch" => {
            let (c, t) = (operands[0], operands[1]);
            vec![
                GateApp::single(Gate::rz(1, 2), t),
                GateApp::single(Gate::H, t),
                GateApp::single(Gate::rz(1, 3), t),
                GateApp::controlled(Gate::X, vec![c], t),
                GateApp::single(Gate::rz(-1, 3), t),
                GateApp::single(Gate::H, t),
                GateApp::single(Gate::rz(-1, 2), t),
            ]
        }
        "swap" => {
            let (a, b) = (operands[0], operands[1]);
            vec![
                GateApp::controlled(Gate::X, vec![a], b),
                GateApp::controlled(Gate::X, vec![b], a),
                GateApp::controlled(Gate::X, vec![a], b),
            ]
        }
        "cswap" => {
            let (c, a, b) = (operands[0], operands[1], operands[2]);
            vec![
                GateApp::controlled(Gate::X, vec![b], a),
                GateApp::new(Gate::X, vec![c, a], vec![b]),
                GateApp::controlled(Gate::X, vec![b], a),
            ]
        }
        "ccx" => vec![GateApp::new(Gate::X, vec![operands[0], operands[1]], vec![operands[2]])],
        "c3x" => vec![GateApp::new(
            Gate::X,
            vec![operands[0], operands[1], operands[2]],
            vec![operands[3]],
        )],
        "c4x" => vec![GateApp::new(
            Gate::X,
            vec![operands[0], operands[1], operands[2], operands[3]],
            vec![operands[4]],
        )],
        "id" => vec![],
        _ => unreachable!("arity table covers the supported set"),
    };
    for g in &gates {
        for t in &g.targets {
            if g.controls.contains(t) {
                return Err(LowerError::Arity {
                    name: name.to_string(),
                    params: n_params,
                    operands: n_operands,
                });
            }
        }
    }
    Ok(gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{matrix_distance, matrix_distance_up_to_phase, simulate_unitary};
    use ndarray::Array2;
    use num_complex::Complex64;

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference(name: &str) -> Array2<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = c64(0.0, 1.0);
        let o = c64(1.0, 0.0);
        let z = c64(0.0, 0.0);
        match name {
            "h" => ndarray::arr2(&[[c64(s, 0.0), c64(s, 0.0)], [c64(s, 0.0), c64(-s, 0.0)]]),
            "x" => ndarray::arr2(&[[z, o], [o, z]]),
            "y" => ndarray::arr2(&[[z, -i], [i, z]]),
            "z" => ndarray::arr2(&[[o, z], [z, -o]]),
            "s" => ndarray::arr2(&[[o, z], [z, i]]),
            "sdg" => ndarray::arr2(&[[o, z], [z, -i]]),
            "t" => ndarray::arr2(&[[o, z], [z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]]),
            "tdg" => ndarray::arr2(&[[o, z], [z, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]]),
            _ => panic!("no reference for {name}"),
        }
    }

    #[test]
    fn single_qubit_gates_match_references_exactly() {
        for name in ["h", "x", "y", "z", "s", "sdg", "t", "tdg"] {
            let gates = lower_gate(name, &[], &[q(0)]).unwrap();
            let m = simulate_unitary(&gates, 1).unwrap();
            assert!(
                matrix_distance(&m, &reference(name)) < 1e-12,
                "{name} lowering is not phase-exact"
            );
        }
    }

    /// Embeds a 2x2 matrix as its controlled version on (control=wire0,
    /// target=wire1).
    fn controlled(u: &Array2<Complex64>) -> Array2<Complex64> {
        let mut m = Array2::eye(4);
        // wire 0 is bit 0: control set means odd basis indices
        m[(1, 1)] = u[(0, 0)];
        m[(1, 3)] = u[(0, 1)];
        m[(3, 1)] = u[(1, 0)];
        m[(3, 3)] = u[(1, 1)];
        m
    }

    #[test]
    fn controlled_hadamard_is_exact() {
        let gates = lower_gate("ch", &[], &[q(0), q(1)]).unwrap();
        assert_eq!(gates.len(), 7);
        let m = simulate_unitary(&gates, 2).unwrap();
        assert!(matrix_distance(&m, &controlled(&reference("h"))) < 1e-12);
    }

    #[test]
    fn crz_is_exact_in_phase() {
        // crz(pi/2) = diag(1, 1, e^{-i pi/4}, e^{i pi/4}) on (control, target)
        let angle = DyadicAngle::from_pi_rational(1, 2).unwrap();
        let gates = lower_gate("crz", &[angle], &[q(0), q(1)]).unwrap();
        let m = simulate_unitary(&gates, 2).unwrap();
        let mut expect: Array2<Complex64> = Array2::eye(4);
        expect[(1, 1)] = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        expect[(3, 3)] = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!(matrix_distance(&m, &expect) < 1e-12);
    }

    #[test]
    fn swap_and_cswap_permutations() {
        let swap = lower_gate("swap", &[], &[q(0), q(1)]).unwrap();
        let m = simulate_unitary(&swap, 2).unwrap();
        for (inp, out) in [(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
            assert!((m[(out, inp)] - c64(1.0, 0.0)).norm() < 1e-12);
        }
        let cswap = lower_gate("cswap", &[], &[q(0), q(1), q(2)]).unwrap();
        let m = simulate_unitary(&cswap, 3).unwrap();
        // control on wire 0: basis xyz with x least significant
        for (inp, out) in [(0usize, 0usize), (2, 2), (3, 5), (5, 3), (7, 7), (1, 1)] {
            assert!((m[(out, inp)] - c64(1.0, 0.0)).norm() < 1e-12, "cswap {inp}->{out}");
        }
    }

    #[test]
    fn rz_matches_u1_convention_and_is_exact_when_controlled() {
        let angle = DyadicAngle::from_pi_rational(3, 32).unwrap();
        let gates = lower_gate("rz", &[angle], &[q(0)]).unwrap();
        let m = simulate_unitary(&gates, 1).unwrap();
        let mut expect: Array2<Complex64> = Array2::eye(2);
        expect[(1, 1)] = Complex64::from_polar(1.0, 3.0 * std::f64::consts::PI / 32.0);
        assert!(matrix_distance(&m, &expect) < 1e-12);
        // the qelib1 rz differs from u1 only by a global phase
        let half = Complex64::from_polar(1.0, -3.0 * std::f64::consts::PI / 64.0);
        let qelib_rz = expect.map(|v| v * half);
        assert!(matrix_distance_up_to_phase(&m, &qelib_rz) < 1e-12);
    }

    #[test]
    fn unsupported_and_arity_errors() {
        assert_eq!(lower_gate("u3", &[], &[q(0)]), Err(LowerError::UnsupportedGate("u3".into())));
        assert!(matches!(lower_gate("cx", &[], &[q(0)]), Err(LowerError::Arity { .. })));
        // overlapping control and target
        assert!(lower_gate("cx", &[], &[q(0), q(0)]).is_err());
    }
}
