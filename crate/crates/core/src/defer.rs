//! The deferred-measurement transformation.
//!
//! A double rewriting pass normalises a hybrid circuit into init / unitary /
//! measure form: [`push_inits`] commutes every initialisation to the front,
//! [`defer_measures`] commutes every measurement to the back, turning the
//! classically controlled instructions a measurement crosses into quantum
//! controls on the measured wire. The composition [`deferred_measurement`]
//! leaves `l_init` and `e_meas` at zero and preserves the circuit's channel.
//!
//! Classical bits start at 0, so control and flip instructions sitting
//! before their bit's measurement act on a known constant: a flip toggles
//! the constant, a control on constant 0 never fires (the instruction is
//! dropped) and a control on constant 1 always fires (it becomes
//! unconditional). Resolving these first guarantees the measurement pass
//! rewrites every remaining classical instruction.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{ClassicalBitId, Gate, GateApp, HybridCircuit, Instruction, WireId};

/// Association of a classical bit with the quantum wire whose deferred
/// measurement feeds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasBinding {
    pub bit: ClassicalBitId,
    pub wire: WireId,
}

/// Rewrites one instruction as a measurement commutes past it: a classical
/// control on the bound bit becomes a quantum control on the bound wire, a
/// classical flip of the bound bit becomes an X on the bound wire, and
/// everything else is unchanged.
pub fn mc_rewrite(ins: &Instruction, binding: MeasBinding) -> Instruction {
    match ins {
        Instruction::ClassicallyControlled { bit, inner } if *bit == binding.bit => {
            let mut controls = inner.controls.clone();
            controls.push(binding.wire);
            Instruction::Apply(GateApp::new(inner.gate, controls, inner.targets.clone()))
        }
        Instruction::NotBit(bit) if *bit == binding.bit => {
            Instruction::Apply(GateApp::single(Gate::X, binding.wire))
        }
        other => other.clone(),
    }
}

/// Replaces classical instructions acting on not-yet-measured bits by their
/// constant-resolved forms; see the module docs.
pub fn resolve_classical_constants(c: &HybridCircuit) -> HybridCircuit {
    let mut bound: BTreeSet<ClassicalBitId> = BTreeSet::new();
    let mut constant: BTreeMap<ClassicalBitId, bool> = BTreeMap::new();
    let mut body = Vec::with_capacity(c.body.len());
    for ins in &c.body {
        match ins {
            Instruction::Measure { bit, .. } => {
                bound.insert(*bit);
                body.push(ins.clone());
            }
            Instruction::NotBit(bit) if !bound.contains(bit) => {
                let v = constant.entry(*bit).or_insert(false);
                *v = !*v;
            }
            Instruction::ClassicallyControlled { bit, inner } if !bound.contains(bit) => {
                if constant.get(bit).copied().unwrap_or(false) {
                    body.push(Instruction::Apply(inner.clone()));
                }
            }
            other => body.push(other.clone()),
        }
    }
    let mut out = c.clone();
    out.body = body;
    out
}

/// Commutes every initialisation to the front, preserving the relative
/// order of the inits and of everything else.
pub fn push_inits(c: &HybridCircuit) -> HybridCircuit {
    let mut inits = Vec::new();
    let mut rest = Vec::new();
    for ins in &c.body {
        if ins.is_init() {
            inits.push(ins.clone());
        } else {
            rest.push(ins.clone());
        }
    }
    inits.extend(rest);
    let mut out = c.clone();
    out.body = inits;
    out
}

/// Commutes every measurement to the back. Scanning left to right, each
/// measurement `meas(q, c)` binds `c` to `q`; every later instruction the
/// measurement commutes past is rewritten through [`mc_rewrite`] with that
/// binding. Requires classical constants to be resolved first so that every
/// classical instruction sits after its bit's measurement.
pub fn defer_measures(c: &HybridCircuit) -> HybridCircuit {
    let mut bindings: BTreeMap<ClassicalBitId, WireId> = BTreeMap::new();
    let mut gates: Vec<Instruction> = Vec::new();
    let mut measures: Vec<Instruction> = Vec::new();
    for ins in &c.body {
        match ins {
            Instruction::Measure { wire, bit } => {
                bindings.insert(*bit, *wire);
                measures.push(ins.clone());
            }
            other => {
                let mut rewritten = other.clone();
                // at most one binding can match: bits are unique per
                // classical wire and each instruction names one bit
                for (&bit, &wire) in &bindings {
                    rewritten = mc_rewrite(&rewritten, MeasBinding { bit, wire });
                }
                gates.push(rewritten);
            }
        }
    }
    gates.extend(measures);
    let mut out = c.clone();
    out.body = gates;
    out
}

/// The full transformation: constant resolution, then init hoisting, then
/// measurement deferral. The result has `l_init == 0`, `e_meas == 0`, no
/// classical instructions, the same register, discards, and measured
/// (wire, bit) pairs, and the same channel as the input.
///
/// Initialisation is treated as allocation of a fresh |0> wire: an `Init`
/// placed after gates on the same wire would not commute to the front
/// soundly, and the OpenQASM reader never produces one (a mid-circuit
/// `reset` re-allocates instead).
pub fn deferred_measurement(c: &HybridCircuit) -> HybridCircuit {
    defer_measures(&push_inits(&resolve_classical_constants(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction as I;
    use crate::oracle::oracle_equiv;

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    fn cb(i: u32) -> ClassicalBitId {
        ClassicalBitId(i)
    }

    fn meas(w: u32, b: u32) -> I {
        I::Measure { wire: q(w), bit: cb(b) }
    }

    fn cc(b: u32, inner: GateApp) -> I {
        I::ClassicallyControlled { bit: cb(b), inner }
    }

    #[test]
    fn mc_rewrite_classical_control() {
        let ins = cc(0, GateApp::single(Gate::X, q(2)));
        let out = mc_rewrite(&ins, MeasBinding { bit: cb(0), wire: q(0) });
        assert_eq!(out, I::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(2))));
    }

    #[test]
    fn mc_rewrite_not_bit() {
        let out = mc_rewrite(&I::NotBit(cb(0)), MeasBinding { bit: cb(0), wire: q(0) });
        assert_eq!(out, I::Apply(GateApp::single(Gate::X, q(0))));
    }

    #[test]
    fn mc_rewrite_leaves_other_instructions() {
        let ins = I::Apply(GateApp::single(Gate::H, q(1)));
        let out = mc_rewrite(&ins, MeasBinding { bit: cb(0), wire: q(0) });
        assert_eq!(out, ins);
        let unrelated = cc(1, GateApp::single(Gate::X, q(2)));
        assert_eq!(mc_rewrite(&unrelated, MeasBinding { bit: cb(0), wire: q(0) }), unrelated);
    }

    #[test]
    fn push_inits_single_commutation() {
        let mut c = HybridCircuit::new(2, 0);
        c.body = vec![I::Apply(GateApp::single(Gate::H, q(0))), I::Init(q(1))];
        c.infer_primary_inputs();
        let out = push_inits(&c);
        assert_eq!(out.body, vec![I::Init(q(1)), I::Apply(GateApp::single(Gate::H, q(0)))]);
        assert_eq!(out.l_init(), 0);
    }

    #[test]
    fn push_inits_fixpoint() {
        let mut c = HybridCircuit::new(2, 0);
        c.body = vec![I::Init(q(0)), I::Init(q(1)), I::Apply(GateApp::single(Gate::H, q(0)))];
        c.infer_primary_inputs();
        assert_eq!(push_inits(&c).body, c.body);
    }

    #[test]
    fn defer_measures_example() {
        // meas(q0,c0); if c0 X q1; meas(q1,c1)  ->  CX; meas; meas
        let mut c = HybridCircuit::new(2, 2);
        c.body = vec![meas(0, 0), cc(0, GateApp::single(Gate::X, q(1))), meas(1, 1)];
        c.infer_primary_inputs();
        let out = defer_measures(&c);
        assert_eq!(
            out.body,
            vec![
                I::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(1))),
                meas(0, 0),
                meas(1, 1),
            ]
        );
        assert_eq!(out.e_meas(), 0);
        assert!(oracle_equiv(&c, &out, 1e-10).unwrap());
    }

    #[test]
    fn defer_measures_fixpoint_when_measures_trail() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![I::Apply(GateApp::single(Gate::H, q(0))), meas(0, 0)];
        c.infer_primary_inputs();
        assert_eq!(defer_measures(&c).body, c.body);
    }

    #[test]
    fn unmeasured_control_on_zero_bit_is_dropped() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![cc(0, GateApp::single(Gate::X, q(1))), meas(0, 0)];
        c.infer_primary_inputs();
        let out = resolve_classical_constants(&c);
        assert_eq!(out.body, vec![meas(0, 0)]);
        assert!(oracle_equiv(&c, &out, 1e-10).unwrap());
    }

    #[test]
    fn not_bit_makes_unbound_control_unconditional() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![
            I::NotBit(cb(0)),
            cc(0, GateApp::single(Gate::X, q(1))),
            I::NotBit(cb(0)),
            cc(0, GateApp::single(Gate::H, q(0))),
        ];
        c.infer_primary_inputs();
        let out = resolve_classical_constants(&c);
        assert_eq!(out.body, vec![I::Apply(GateApp::single(Gate::X, q(1)))]);
    }

    #[test]
    fn not_bit_after_measure_becomes_x_before_it() {
        let mut c = HybridCircuit::new(1, 1);
        c.body = vec![meas(0, 0), I::NotBit(cb(0))];
        c.infer_primary_inputs();
        let out = deferred_measurement(&c);
        assert_eq!(out.body, vec![I::Apply(GateApp::single(Gate::X, q(0))), meas(0, 0)]);
        assert!(oracle_equiv(&c, &out, 1e-10).unwrap());
    }

    #[test]
    fn control_on_zero_resolved_by_surrounding_flips() {
        // the if(c == 0) encoding: NotBit; if c g; NotBit, after a measure
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![
            meas(0, 0),
            I::NotBit(cb(0)),
            cc(0, GateApp::single(Gate::X, q(1))),
            I::NotBit(cb(0)),
        ];
        c.infer_primary_inputs();
        let out = deferred_measurement(&c);
        assert_eq!(
            out.body,
            vec![
                I::Apply(GateApp::single(Gate::X, q(0))),
                I::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(1))),
                I::Apply(GateApp::single(Gate::X, q(0))),
                meas(0, 0),
            ]
        );
        assert!(oracle_equiv(&c, &out, 1e-10).unwrap());
        assert!(out.decompose_ium().is_ok());
    }

    #[test]
    fn deferred_measurement_is_idempotent_and_normalises() {
        let c = crate::challenge::teleport_circuit();
        let once = deferred_measurement(&c);
        assert_eq!(once.l_init(), 0);
        assert_eq!(once.e_meas(), 0);
        assert!(once.decompose_ium().is_ok());
        let twice = deferred_measurement(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn teleport_defers_to_its_unitary_form() {
        let c = crate::challenge::teleport_circuit();
        let out = deferred_measurement(&c);
        assert_eq!(out, crate::challenge::teleport_deferred_circuit());
        assert!(oracle_equiv(&c, &out, 1e-9).unwrap());
    }

    #[test]
    fn dm_preserves_register_discards_and_measured_pairs() {
        let c = crate::challenge::teleport_circuit();
        let out = deferred_measurement(&c);
        assert_eq!(out.n_qubits, c.n_qubits);
        assert_eq!(out.discards, c.discards);
        let pairs = |c: &HybridCircuit| {
            let mut v: Vec<(WireId, ClassicalBitId)> = c
                .body
                .iter()
                .filter_map(|i| match i {
                    I::Measure { wire, bit } => Some((*wire, *bit)),
                    _ => None,
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(pairs(&c), pairs(&out));
    }
}
