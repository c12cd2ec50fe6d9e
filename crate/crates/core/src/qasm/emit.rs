//! Deterministic OpenQASM 2 emission.
//!
//! The emitted text parses back to a structurally equal circuit: angles
//! print as exact `pi`-rational expressions, classical bits get one-bit
//! registers (`if` conditions only see single bits), discards and a
//! non-default primary-input order ride along as `@` pragmas (and in the
//! returned sidecar). Controlled Hadamards have no faithful statement and
//! are emitted as their exact kernel expansion.

use std::fmt::Write as _;

use thiserror::Error;

use super::angle::DyadicAngle;
use super::Sidecar;
use crate::circuit::{expand_controlled_h, Gate, GateApp, HybridCircuit, Instruction, WireId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("X with {0} controls has no supported statement (max 4)")]
    TooManyControls(usize),
    #[error("controlled rotation with {0} controls has no supported statement (max 1)")]
    ControlledRotation(usize),
    #[error("gate must have exactly one target to print, found {0}")]
    TargetCount(usize),
    #[error("a bare classical bit flip has no OpenQASM 2 form")]
    BareNotBit,
}

fn angle_text(mult: i64, denom_exp: u32) -> String {
    DyadicAngle { mult, denom_exp }.to_string()
}

fn gate_stmt(g: &GateApp) -> Result<String, EmitError> {
    if g.targets.len() != 1 && !matches!(g.gate, Gate::Ph(_)) {
        return Err(EmitError::TargetCount(g.targets.len()));
    }
    let t = g.targets.first().copied();
    let ops = |t: WireId| -> String {
        let mut parts: Vec<String> = g.controls.iter().map(|c| format!("q[{}]", c.0)).collect();
        parts.push(format!("q[{}]", t.0));
        parts.join(",")
    };
    match g.gate {
        Gate::X => {
            let name = match g.controls.len() {
                0 => "x",
                1 => "cx",
                2 => "ccx",
                3 => "c3x",
                4 => "c4x",
                n => return Err(EmitError::TooManyControls(n)),
            };
            Ok(format!("{name} {};", ops(t.expect("checked"))))
        }
        Gate::H => match g.controls.len() {
            0 => Ok(format!("h {};", ops(t.expect("checked")))),
            _ => unreachable!("controlled H expanded before emission"),
        },
        Gate::RZ(p) => match g.controls.len() {
            0 => Ok(format!("rz({}) {};", angle_text(p.mult, p.denom_exp), ops(t.expect("checked")))),
            1 => Ok(format!("cu1({}) {};", angle_text(p.mult, p.denom_exp), ops(t.expect("checked")))),
            n => Err(EmitError::ControlledRotation(n)),
        },
        Gate::Ph(p) => {
            // controls normalise away at construction; one marker target
            let Some(t) = t else { return Err(EmitError::TargetCount(0)) };
            if g.targets.len() != 1 {
                return Err(EmitError::TargetCount(g.targets.len()));
            }
            Ok(format!("ph({}) q[{}];", angle_text(p.mult, p.denom_exp), t.0))
        }
    }
}

/// Renders a circuit as OpenQASM 2 text plus its sidecar. The text also
/// carries the sidecar information as pragmas, so the single file
/// round-trips on its own.
pub fn emit(c: &HybridCircuit) -> Result<(String, Sidecar), EmitError> {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    if c.n_qubits > 0 {
        let _ = writeln!(out, "qreg q[{}];", c.n_qubits);
    }
    for b in 0..c.n_cbits {
        let _ = writeln!(out, "creg c{b}[1];");
    }

    let mut sidecar = Sidecar::default();
    if !c.discards.is_empty() {
        let names: Vec<String> = c.discards.iter().map(|w| format!("q[{}]", w.0)).collect();
        let _ = writeln!(out, "// @discard {}", names.join(" "));
        sidecar.discard = names;
    }
    let mut inferred = c.clone();
    inferred.infer_primary_inputs();
    if inferred.primary_inputs != c.primary_inputs {
        let names: Vec<String> = c.primary_inputs.iter().map(|w| format!("q[{}]", w.0)).collect();
        let _ = writeln!(out, "// @inputs {}", names.join(" "));
        sidecar.inputs = Some(names);
    }

    let mut i = 0usize;
    while i < c.body.len() {
        match &c.body[i] {
            Instruction::Apply(g) => {
                for piece in expand_controlled_h(std::slice::from_ref(g)) {
                    let _ = writeln!(out, "{}", gate_stmt(&piece)?);
                }
            }
            Instruction::ClassicallyControlled { bit, inner } => {
                for piece in expand_controlled_h(std::slice::from_ref(inner)) {
                    let _ = writeln!(out, "if(c{}==1) {}", bit.0, gate_stmt(&piece)?);
                }
            }
            Instruction::Measure { wire, bit } => {
                let _ = writeln!(out, "measure q[{}] -> c{}[0];", wire.0, bit.0);
            }
            Instruction::Init(w) => {
                let _ = writeln!(out, "reset q[{}];", w.0);
            }
            Instruction::NotBit(b) => {
                // only the if(c==0) wrap pattern has a statement form
                let wrapped = match (c.body.get(i + 1), c.body.get(i + 2)) {
                    (
                        Some(Instruction::ClassicallyControlled { bit, inner }),
                        Some(Instruction::NotBit(b2)),
                    ) if bit == b && b2 == b => Some(inner.clone()),
                    _ => None,
                };
                let Some(inner) = wrapped else { return Err(EmitError::BareNotBit) };
                for piece in expand_controlled_h(std::slice::from_ref(&inner)) {
                    let _ = writeln!(out, "if(c{}==0) {}", b.0, gate_stmt(&piece)?);
                }
                i += 2;
            }
        }
        i += 1;
    }
    Ok((out, sidecar))
}
