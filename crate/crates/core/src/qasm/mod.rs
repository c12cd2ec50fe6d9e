//! OpenQASM 2 interchange: parsing a defined subset into [`HybridCircuit`],
//! lowering foreign gates to the kernel set, and printing circuits back
//! out.
//!
//! OpenQASM 2 has no discard syntax, so discarded wires travel in a sidecar
//! (a small JSON document next to the program) or as `// @discard q[i]`
//! pragma comments; the sidecar wins when both are present. An optional
//! `inputs` list fixes the order of the primary inputs when it differs from
//! ascending wire order.

mod angle;
mod emit;
mod lexer;
mod lower;
mod parse;

pub use angle::{AngleError, DyadicAngle, Value};
pub use emit::{emit, EmitError};
pub use lower::{lower_gate, LowerError, SUPPORTED};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::HybridCircuit;
use lexer::Pos;

/// Discard / keep / input-order annotations carried next to a program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    /// Wire names (`q[3]` or a whole register name) whose final state is
    /// traced out.
    #[serde(default)]
    pub discard: Vec<String>,
    /// Optional complement check: must name exactly the non-discarded wires.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep: Option<Vec<String>>,
    /// Optional primary-input order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
}

impl Sidecar {
    pub fn is_empty(&self) -> bool {
        self.discard.is_empty() && self.keep.is_none() && self.inputs.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: u32, col: u32, message: String },
    #[error("line {line}: {source}")]
    Lower { line: u32, source: LowerError },
    #[error("line {line}: {source}")]
    NonDyadicAngle { line: u32, source: AngleError },
    #[error("unresolved sidecar name '{0}'")]
    UnresolvedSidecarName(String),
    #[error("sidecar conflict: {0}")]
    SidecarConflict(String),
    #[error("parsed circuit is not well-formed: {0}")]
    IllFormed(String),
}

impl QasmError {
    fn parse(pos: Pos, message: String) -> Self {
        QasmError::Parse { line: pos.line, col: pos.col, message }
    }
}

/// Parses OpenQASM 2 source text; see [`parse::parse`].
pub fn parse(src: &str, sidecar: Option<&Sidecar>) -> Result<HybridCircuit, QasmError> {
    parse::parse(src, sidecar)
}

/// The conventional sidecar path for a program path: `<stem>.sidecar.json`.
pub fn sidecar_path(program: &std::path::Path) -> std::path::PathBuf {
    program.with_extension("sidecar.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ClassicalBitId, Gate, GateApp, Instruction, WireId};
    use crate::oracle::oracle_equiv;

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    #[test]
    fn parses_a_three_statement_circuit() {
        let src = format!("{HEADER}qreg q[2];\ncreg c[1];\nh q[0];\ncx q[0],q[1];\nmeasure q[0] -> c[0];\n");
        let c = parse(&src, None).unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.n_cbits, 1);
        assert_eq!(c.body.len(), 3);
        assert!(c.discards.is_empty());
        assert_eq!(c.primary_inputs, vec![q(0), q(1)]);
    }

    #[test]
    fn teleport_source_parses_to_the_reference_circuit() {
        let src = format!(
            "{HEADER}qreg q[3];\ncreg c0[1];\ncreg c1[1];\n// @discard q[0] q[1]\n\
             reset q[1];\nreset q[2];\nh q[1];\ncx q[1],q[2];\ncx q[0],q[1];\nh q[0];\n\
             measure q[1] -> c1[0];\nmeasure q[0] -> c0[0];\nif(c1==1) x q[2];\nif(c0==1) z q[2];\n"
        );
        let c = parse(&src, None).unwrap();
        assert_eq!(c, crate::challenge::teleport_circuit());
    }

    #[test]
    fn sidecar_wins_over_pragma() {
        let src = format!("{HEADER}qreg q[2];\n// @discard q[0]\nh q[0];\n");
        let side = Sidecar { discard: vec!["q[1]".into()], keep: None, inputs: None };
        let c = parse(&src, Some(&side)).unwrap();
        assert!(c.discards.contains(&q(1)) && !c.discards.contains(&q(0)));
    }

    #[test]
    fn keep_list_must_complement() {
        let src = format!("{HEADER}qreg q[2];\nh q[0];\n");
        let side = Sidecar {
            discard: vec!["q[0]".into()],
            keep: Some(vec!["q[1]".into()]),
            inputs: None,
        };
        assert!(parse(&src, Some(&side)).is_ok());
        let bad = Sidecar {
            discard: vec!["q[0]".into()],
            keep: Some(vec!["q[0]".into()]),
            inputs: None,
        };
        assert!(matches!(parse(&src, Some(&bad)), Err(QasmError::SidecarConflict(_))));
    }

    #[test]
    fn unresolved_sidecar_name() {
        let src = format!("{HEADER}qreg q[1];\n");
        let side = Sidecar { discard: vec!["bogus[0]".into()], keep: None, inputs: None };
        assert_eq!(
            parse(&src, Some(&side)),
            Err(QasmError::UnresolvedSidecarName("bogus[0]".into()))
        );
    }

    #[test]
    fn float_angle_recovers_dyadic_or_fails() {
        let ok = format!("{HEADER}qreg q[1];\nrz(0.2945243112740431) q[0];\n");
        let c = parse(&ok, None).unwrap();
        assert_eq!(c.body[0], Instruction::Apply(GateApp::single(Gate::rz(3, 6), q(0))));
        let bad = format!("{HEADER}qreg q[1];\nrz(0.1) q[0];\n");
        assert!(matches!(parse(&bad, None), Err(QasmError::NonDyadicAngle { .. })));
        let pi3 = format!("{HEADER}qreg q[1];\nrz(pi/3) q[0];\n");
        assert!(matches!(parse(&pi3, None), Err(QasmError::NonDyadicAngle { .. })));
    }

    #[test]
    fn tiny_angle_parses_exactly() {
        let src = format!("{HEADER}qreg q[1];\nrz(pi/134217728) q[0];\n");
        let c = parse(&src, None).unwrap();
        assert_eq!(c.body[0], Instruction::Apply(GateApp::single(Gate::rz(1, 28), q(0))));
    }

    #[test]
    fn broadcast_over_registers() {
        let src = format!("{HEADER}qreg q[3];\ncreg c[3];\nh q;\nmeasure q -> c;\n");
        let c = parse(&src, None).unwrap();
        assert_eq!(c.body.len(), 6);
        assert_eq!(
            c.body[3],
            Instruction::Measure { wire: q(0), bit: ClassicalBitId(0) }
        );
    }

    #[test]
    fn gate_definitions_inline() {
        let src = format!(
            "{HEADER}qreg q[2];\ngate bell a,b {{ h a; cx a,b; }}\ngate twist(t) a {{ rz(t/2) a; bell a,a2q? }}\nbell q[0],q[1];\n"
        );
        // the malformed second definition must fail cleanly
        assert!(parse(&src, None).is_err());
        let good = format!(
            "{HEADER}qreg q[2];\ngate bell a,b {{ h a; cx a,b; }}\ngate halfz(t) a {{ rz(t/2) a; }}\nbell q[0],q[1];\nhalfz(pi/2) q[0];\n"
        );
        let c = parse(&good, None).unwrap();
        assert_eq!(c.body.len(), 3);
        assert_eq!(c.body[2], Instruction::Apply(GateApp::single(Gate::rz(1, 3), q(0))));
    }

    #[test]
    fn multibit_if_is_rejected_with_guidance() {
        let src = format!("{HEADER}qreg q[1];\ncreg c[2];\nif(c==1) x q[0];\n");
        match parse(&src, None) {
            Err(QasmError::Parse { message, .. }) => assert!(message.contains("one-bit")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn if_zero_wraps_with_flips() {
        let src = format!(
            "{HEADER}qreg q[2];\ncreg c[1];\nmeasure q[0] -> c[0];\nif(c==0) x q[1];\n"
        );
        let c = parse(&src, None).unwrap();
        assert_eq!(c.body.len(), 4);
        assert_eq!(c.body[1], Instruction::NotBit(ClassicalBitId(0)));
        assert_eq!(c.body[3], Instruction::NotBit(ClassicalBitId(0)));
    }

    #[test]
    fn reset_on_used_wire_reallocates() {
        let src = format!("{HEADER}qreg q[1];\nh q[0];\nreset q[0];\nx q[0];\n");
        let c = parse(&src, None).unwrap();
        assert_eq!(c.n_qubits, 2);
        assert!(c.discards.contains(&q(0)));
        assert_eq!(c.body[1], Instruction::Init(q(1)));
        assert_eq!(c.body[2], Instruction::Apply(GateApp::single(Gate::X, q(1))));
        // the reallocated circuit is channel-equal to an actual reset
        let mut manual = crate::circuit::HybridCircuit::new(2, 0);
        manual.body = vec![
            Instruction::Apply(GateApp::single(Gate::H, q(0))),
            Instruction::Init(q(1)),
            Instruction::Apply(GateApp::single(Gate::X, q(1))),
        ];
        manual.discards.insert(q(0));
        manual.infer_primary_inputs();
        assert!(oracle_equiv(&c, &manual, 1e-10).unwrap());
    }

    #[test]
    fn reset_after_measure_rejected() {
        let src = format!("{HEADER}qreg q[1];\ncreg c[1];\nmeasure q[0] -> c[0];\nreset q[0];\n");
        assert!(matches!(parse(&src, None), Err(QasmError::Parse { .. })));
    }

    #[test]
    fn unsupported_statements_carry_positions() {
        let src = format!("{HEADER}qreg q[1];\nopaque magic a;\n");
        match parse(&src, None) {
            Err(QasmError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_gate = format!("{HEADER}qreg q[1];\nu3(0,0,0) q[0];\n");
        assert!(matches!(bad_gate.parse_err(), QasmError::Lower { .. }));
    }

    trait ParseErrExt {
        fn parse_err(&self) -> QasmError;
    }

    impl ParseErrExt for String {
        fn parse_err(&self) -> QasmError {
            parse(self, None).unwrap_err()
        }
    }

    #[test]
    fn emit_round_trips_reference_circuits() {
        for c in [
            crate::challenge::teleport_circuit(),
            crate::challenge::teleport_deferred_circuit(),
            crate::challenge::ghz_circuit(3),
            crate::challenge::qpe_pair(3, 2).0,
            crate::challenge::qpe_pair(3, 2).1,
            crate::challenge::identity_circuit(1),
        ] {
            let (text, _sidecar) = emit(&c).unwrap();
            let back = parse(&text, None).unwrap();
            assert_eq!(back, c, "round-trip failed for:\n{text}");
        }
    }

    #[test]
    fn emit_identity_is_header_only() {
        let (text, sidecar) = emit(&crate::challenge::identity_circuit(1)).unwrap();
        assert_eq!(text, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\n");
        assert!(sidecar.is_empty());
    }

    #[test]
    fn emitted_teleport_carries_discard_pragma() {
        let (text, sidecar) = emit(&crate::challenge::teleport_circuit()).unwrap();
        assert!(text.contains("// @discard q[0] q[1]"));
        assert_eq!(sidecar.discard, vec!["q[0]", "q[1]"]);
    }

    #[test]
    fn sidecar_inputs_override_order() {
        let src = format!("{HEADER}qreg q[2];\n// @inputs q[1] q[0]\nh q[0];\n");
        let c = parse(&src, None).unwrap();
        assert_eq!(c.primary_inputs, vec![q(1), q(0)]);
        // and the order survives a round trip
        let (text, _) = emit(&c).unwrap();
        let back = parse(&text, None).unwrap();
        assert_eq!(back, c);
    }
}
