//! Challenge construction: reference circuits (teleportation, QFT, phase
//! estimation, GHZ preparation), the teleportation wire-threading
//! transformation, seeded random hybrid circuits, and mutant generation for
//! sanity suites.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{
    ClassicalBitId, Gate, GateApp, HybridCircuit, Instruction, PhaseExponent, WireId,
};
use crate::defer::deferred_measurement;
use crate::oracle;

fn q(i: u32) -> WireId {
    WireId(i)
}

fn cb(i: u32) -> ClassicalBitId {
    ClassicalBitId(i)
}

/// The one-qubit teleportation circuit in its dynamic form: Bell pair on two
/// fresh ancillas, entangling gates, two mid-circuit measurements, and
/// classically controlled X / Z corrections on the receiving wire. Wire 0
/// carries the input; wires 0 and 1 are measured and discarded; wire 2
/// carries the output.
pub fn teleport_circuit() -> HybridCircuit {
    let mut c = HybridCircuit::new(3, 2);
    c.body = vec![
        Instruction::Init(q(1)),
        Instruction::Init(q(2)),
        Instruction::Apply(GateApp::single(Gate::H, q(1))),
        Instruction::Apply(GateApp::controlled(Gate::X, vec![q(1)], q(2))),
        Instruction::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(1))),
        Instruction::Apply(GateApp::single(Gate::H, q(0))),
        Instruction::Measure { wire: q(1), bit: cb(1) },
        Instruction::Measure { wire: q(0), bit: cb(0) },
        Instruction::ClassicallyControlled { bit: cb(1), inner: GateApp::single(Gate::X, q(2)) },
        Instruction::ClassicallyControlled { bit: cb(0), inner: GateApp::single(Gate::rz(1, 1), q(2)) },
    ];
    c.discards.insert(q(0));
    c.discards.insert(q(1));
    c.infer_primary_inputs();
    c
}

/// Teleportation after deferred measurement: the corrections are quantum
/// controlled and both measurements trail.
pub fn teleport_deferred_circuit() -> HybridCircuit {
    let mut c = HybridCircuit::new(3, 2);
    c.body = vec![
        Instruction::Init(q(1)),
        Instruction::Init(q(2)),
        Instruction::Apply(GateApp::single(Gate::H, q(1))),
        Instruction::Apply(GateApp::controlled(Gate::X, vec![q(1)], q(2))),
        Instruction::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(1))),
        Instruction::Apply(GateApp::single(Gate::H, q(0))),
        Instruction::Apply(GateApp::controlled(Gate::X, vec![q(1)], q(2))),
        Instruction::Apply(GateApp::controlled(Gate::rz(1, 1), vec![q(0)], q(2))),
        Instruction::Measure { wire: q(1), bit: cb(1) },
        Instruction::Measure { wire: q(0), bit: cb(0) },
    ];
    c.discards.insert(q(0));
    c.discards.insert(q(1));
    c.infer_primary_inputs();
    c
}

/// The n-wire identity circuit.
pub fn identity_circuit(n: u32) -> HybridCircuit {
    HybridCircuit::new(n, 0)
}

/// Textbook QFT gate list (no terminal swaps): H on each wire followed by
/// controlled phase rotations from every later wire.
pub fn qft_gates(n: u32) -> Vec<GateApp> {
    let mut gates = Vec::new();
    for j in 0..n {
        gates.push(GateApp::single(Gate::H, q(j)));
        for l in j + 1..n {
            gates.push(GateApp::controlled(Gate::rz(1, l - j + 1), vec![q(l)], q(j)));
        }
    }
    gates
}

/// GHZ state preparation on fresh wires: H then a CX chain.
pub fn ghz_circuit(n: u32) -> HybridCircuit {
    let mut c = HybridCircuit::new(n, 0);
    for i in 0..n {
        c.body.push(Instruction::Init(q(i)));
    }
    c.body.push(Instruction::Apply(GateApp::single(Gate::H, q(0))));
    for i in 1..n {
        c.body.push(Instruction::Apply(GateApp::controlled(Gate::X, vec![q(i - 1)], q(i))));
    }
    c.infer_primary_inputs();
    c
}

/// Quantum phase estimation of the phase gate `RZ(1, phase_denom_exp)` on a
/// |1> eigenstate, with `k` counting wires, in two forms over the same
/// register: a deferred (unitary-readout) version with all measurements
/// trailing, and a dynamic version whose inverse-QFT readout measures one
/// wire at a time and steers the remaining rotations classically.
///
/// Counting wires are 0..k, the eigenstate wire is k; counting wire j is
/// measured into classical bit j in both versions. The two bodies apply the
/// same rotations in different orders, so their equivalence is not a purely
/// syntactic fact.
pub fn qpe_pair(k: u32, phase_denom_exp: u32) -> (HybridCircuit, HybridCircuit) {
    let eigen = q(k);
    let prefix = |c: &mut HybridCircuit| {
        for i in 0..=k {
            c.body.push(Instruction::Init(q(i)));
        }
        c.body.push(Instruction::Apply(GateApp::single(Gate::X, eigen)));
        for j in 0..k {
            c.body.push(Instruction::Apply(GateApp::single(Gate::H, q(j))));
        }
        // controlled powers U^(2^j): doubling the rotation shrinks the
        // denominator exponent by one; at zero the power is the identity
        for j in 0..k {
            let denom = phase_denom_exp as i64 - j as i64;
            if denom >= 1 {
                c.body.push(Instruction::Apply(GateApp::controlled(
                    Gate::rz(1, denom as u32),
                    vec![q(j)],
                    eigen,
                )));
            }
        }
    };

    let mut unitary = HybridCircuit::new(k + 1, k);
    prefix(&mut unitary);
    for j in (0..k).rev() {
        for l in j + 1..k {
            unitary.body.push(Instruction::Apply(GateApp::controlled(
                Gate::rz(-1, l - j + 1),
                vec![q(l)],
                q(j),
            )));
        }
        unitary.body.push(Instruction::Apply(GateApp::single(Gate::H, q(j))));
    }
    for j in 0..k {
        unitary.body.push(Instruction::Measure { wire: q(j), bit: cb(j) });
    }
    unitary.infer_primary_inputs();

    let mut dynamic = HybridCircuit::new(k + 1, k);
    prefix(&mut dynamic);
    for j in (0..k).rev() {
        for l in (j + 1..k).rev() {
            dynamic.body.push(Instruction::ClassicallyControlled {
                bit: cb(l),
                inner: GateApp::single(Gate::rz(-1, l - j + 1), q(j)),
            });
        }
        dynamic.body.push(Instruction::Apply(GateApp::single(Gate::H, q(j))));
        dynamic.body.push(Instruction::Measure { wire: q(j), bit: cb(j) });
    }
    dynamic.infer_primary_inputs();

    (unitary, dynamic)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TeleportifyError {
    #[error("wire {0} out of range")]
    WireOutOfRange(u32),
    #[error("wire {0} is discarded and cannot be teleported")]
    WireDiscarded(u32),
    #[error("wire {0} is measured and cannot be teleported")]
    WireMeasured(u32),
}

/// Threads each selected wire through the teleportation gadget at the end of
/// the circuit: two fresh ancillas per wire, Bell preparation, entangling
/// CX / H, the two measurements, and the corrections (classically
/// controlled when `dynamic`, deferred otherwise). The original wire and the
/// first ancilla are measured and discarded; the second ancilla carries the
/// state onward.
///
/// Kept outputs stay positionally aligned with the input circuit: when a
/// carrier would land out of index order, the register is renumbered.
pub fn teleportify(
    c: &HybridCircuit,
    wires: &[u32],
    dynamic: bool,
) -> Result<HybridCircuit, TeleportifyError> {
    let mut selected: Vec<u32> = wires.to_vec();
    selected.sort_unstable();
    selected.dedup();

    let measured: Vec<WireId> = c
        .body
        .iter()
        .filter_map(|i| match i {
            Instruction::Measure { wire, .. } => Some(*wire),
            _ => None,
        })
        .collect();
    for &w in &selected {
        if w >= c.n_qubits {
            return Err(TeleportifyError::WireOutOfRange(w));
        }
        if c.discards.contains(&q(w)) {
            return Err(TeleportifyError::WireDiscarded(w));
        }
        if measured.contains(&q(w)) {
            return Err(TeleportifyError::WireMeasured(w));
        }
    }

    let mut out = c.clone();
    let mut carrier: BTreeMap<u32, u32> = BTreeMap::new();
    for &w in &selected {
        let a1 = out.n_qubits;
        let a2 = out.n_qubits + 1;
        out.n_qubits += 2;
        let bz = out.n_cbits;
        let bx = out.n_cbits + 1;
        out.n_cbits += 2;
        out.body.extend([
            Instruction::Init(q(a1)),
            Instruction::Init(q(a2)),
            Instruction::Apply(GateApp::single(Gate::H, q(a1))),
            Instruction::Apply(GateApp::controlled(Gate::X, vec![q(a1)], q(a2))),
            Instruction::Apply(GateApp::controlled(Gate::X, vec![q(w)], q(a1))),
            Instruction::Apply(GateApp::single(Gate::H, q(w))),
            Instruction::Measure { wire: q(a1), bit: cb(bx) },
            Instruction::Measure { wire: q(w), bit: cb(bz) },
            Instruction::ClassicallyControlled { bit: cb(bx), inner: GateApp::single(Gate::X, q(a2)) },
            Instruction::ClassicallyControlled {
                bit: cb(bz),
                inner: GateApp::single(Gate::rz(1, 1), q(a2)),
            },
        ]);
        out.discards.insert(q(w));
        out.discards.insert(q(a1));
        carrier.insert(w, a2);
    }

    // positional alignment: the kept wires, in index order, must carry the
    // same states as the input circuit's kept wires in index order
    let desired: Vec<u32> = c
        .kept_wires()
        .iter()
        .map(|w| carrier.get(&w.0).copied().unwrap_or(w.0))
        .collect();
    if desired.windows(2).any(|p| p[0] > p[1]) {
        let mut slots: Vec<u32> = desired.clone();
        slots.sort_unstable();
        let mut perm = vec![u32::MAX; out.n_qubits as usize];
        for (logical, &wire) in desired.iter().enumerate() {
            perm[wire as usize] = slots[logical];
        }
        let mut free_slots: Vec<u32> =
            (0..out.n_qubits).filter(|s| !slots.contains(s)).collect();
        free_slots.reverse();
        for p in perm.iter_mut() {
            if *p == u32::MAX {
                *p = free_slots.pop().expect("slot per wire");
            }
        }
        out = out.permute_wires(&perm);
    }

    if dynamic {
        Ok(out)
    } else {
        Ok(deferred_measurement(&out))
    }
}

/// Parameters for seeded random hybrid circuits.
#[derive(Debug, Clone)]
pub struct RandomCircuitCfg {
    pub n_qubits: u32,
    pub n_cbits: u32,
    pub len: usize,
    /// Allow measurements (and the classical controls that follow them).
    pub hybrid: bool,
    /// Allow a random discard set.
    pub discards: bool,
}

impl Default for RandomCircuitCfg {
    fn default() -> Self {
        RandomCircuitCfg { n_qubits: 4, n_cbits: 3, len: 20, hybrid: true, discards: true }
    }
}

/// A random well-formed hybrid circuit. Inits are only placed on untouched
/// wires so the circuit stays within the fresh-allocation reading of
/// initialisation; measured wires are never re-addressed.
pub fn random_circuit(seed: u64, cfg: &RandomCircuitCfg) -> HybridCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = HybridCircuit::new(cfg.n_qubits, cfg.n_cbits);
    let mut touched = vec![false; cfg.n_qubits as usize];
    let mut measured = vec![false; cfg.n_qubits as usize];
    let mut bit_written = vec![false; cfg.n_cbits as usize];

    let live =
        |measured: &[bool]| (0..cfg.n_qubits).filter(|&i| !measured[i as usize]).collect::<Vec<_>>();

    for _ in 0..cfg.len {
        let wires = live(&measured);
        if wires.is_empty() {
            break;
        }
        let roll = rng.random_range(0..100u32);
        let pick = |rng: &mut ChaCha8Rng, pool: &[u32]| pool[rng.random_range(0..pool.len())];
        let random_gate = |rng: &mut ChaCha8Rng, pool: &[u32]| -> GateApp {
            let t = pick(rng, pool);
            match rng.random_range(0..5u32) {
                0 => GateApp::single(Gate::H, q(t)),
                1 => GateApp::single(Gate::X, q(t)),
                2 => GateApp::single(Gate::rz(1, rng.random_range(1..5)), q(t)),
                3 => {
                    let others: Vec<u32> = pool.iter().copied().filter(|&w| w != t).collect();
                    if others.is_empty() {
                        GateApp::single(Gate::X, q(t))
                    } else {
                        let ctl = pick(rng, &others);
                        GateApp::controlled(Gate::X, vec![q(ctl)], q(t))
                    }
                }
                _ => {
                    let others: Vec<u32> = pool.iter().copied().filter(|&w| w != t).collect();
                    if others.is_empty() {
                        GateApp::single(Gate::rz(1, 2), q(t))
                    } else {
                        let ctl = pick(rng, &others);
                        GateApp::controlled(Gate::rz(1, rng.random_range(1..4)), vec![q(ctl)], q(t))
                    }
                }
            }
        };
        match roll {
            0..=9 => {
                // init a fresh wire, if one is left
                let fresh: Vec<u32> =
                    (0..cfg.n_qubits).filter(|&i| !touched[i as usize]).collect();
                if let Some(&w) = fresh.first() {
                    touched[w as usize] = true;
                    c.body.push(Instruction::Init(q(w)));
                }
            }
            10..=21 if cfg.hybrid => {
                let free_bits: Vec<u32> =
                    (0..cfg.n_cbits).filter(|&b| !bit_written[b as usize]).collect();
                if !free_bits.is_empty() {
                    let w = pick(&mut rng, &wires);
                    let b = free_bits[rng.random_range(0..free_bits.len())];
                    touched[w as usize] = true;
                    measured[w as usize] = true;
                    bit_written[b as usize] = true;
                    c.body.push(Instruction::Measure { wire: q(w), bit: cb(b) });
                }
            }
            22..=31 if cfg.hybrid && cfg.n_cbits > 0 => {
                let b = rng.random_range(0..cfg.n_cbits);
                let g = random_gate(&mut rng, &wires);
                for w in g.wires() {
                    touched[w.0 as usize] = true;
                }
                c.body.push(Instruction::ClassicallyControlled { bit: cb(b), inner: g });
            }
            32..=35 if cfg.hybrid && cfg.n_cbits > 0 => {
                c.body.push(Instruction::NotBit(cb(rng.random_range(0..cfg.n_cbits))));
            }
            _ => {
                let g = random_gate(&mut rng, &wires);
                for w in g.wires() {
                    touched[w.0 as usize] = true;
                }
                c.body.push(Instruction::Apply(g));
            }
        }
    }
    if cfg.discards {
        for w in 0..cfg.n_qubits {
            if rng.random_range(0..4u32) == 0 {
                c.discards.insert(q(w));
            }
        }
    }
    c.infer_primary_inputs();
    debug_assert!(c.is_well_formed());
    c
}

/// One structural edit applied to a circuit body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationKind {
    InsertGate(GateApp),
    DeleteGate,
    /// Add a control to an uncontrolled rotation or drop one from a
    /// controlled gate (the RZ-versus-controlled-RZ discrimination case).
    FlipControl,
    /// Compose an extra dyadic rotation onto an RZ angle.
    PerturbAngle(PhaseExponent),
    SwapAdjacent,
}

#[derive(Debug, Clone)]
pub struct MutationOp {
    pub kind: MutationKind,
    pub site: usize,
}

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("could not find {wanted} confirmed mutants in {attempts} attempts")]
    MutationFailed { wanted: usize, attempts: usize },
}

fn gate_app_of(ins: &Instruction) -> Option<&GateApp> {
    match ins {
        Instruction::Apply(g) => Some(g),
        Instruction::ClassicallyControlled { inner, .. } => Some(inner),
        _ => None,
    }
}

fn with_gate_app(ins: &Instruction, g: GateApp) -> Instruction {
    match ins {
        Instruction::Apply(_) => Instruction::Apply(g),
        Instruction::ClassicallyControlled { bit, .. } => {
            Instruction::ClassicallyControlled { bit: *bit, inner: g }
        }
        _ => unreachable!("only gate instructions are rewritten"),
    }
}

/// Applies one mutation; `None` when the edit does not apply at the site or
/// would break well-formedness.
pub fn apply_mutation(c: &HybridCircuit, op: &MutationOp) -> Option<HybridCircuit> {
    let mut out = c.clone();
    match &op.kind {
        MutationKind::InsertGate(g) => {
            if op.site > out.body.len() {
                return None;
            }
            out.body.insert(op.site, Instruction::Apply(g.clone()));
        }
        MutationKind::DeleteGate => {
            if op.site >= out.body.len() || gate_app_of(&out.body[op.site]).is_none() {
                return None;
            }
            out.body.remove(op.site);
        }
        MutationKind::FlipControl => {
            let ins = out.body.get(op.site)?;
            let g = gate_app_of(ins)?;
            let new = if let Some(&ctl) = g.controls.first() {
                let rest: Vec<WireId> = g.controls[1..].to_vec();
                let _ = ctl;
                GateApp::new(g.gate, rest, g.targets.clone())
            } else {
                match g.gate {
                    Gate::RZ(_) => {
                        let t = *g.targets.first()?;
                        let ctl = (0..c.n_qubits).map(WireId).find(|w| *w != t)?;
                        GateApp::new(g.gate, vec![ctl], g.targets.clone())
                    }
                    _ => return None,
                }
            };
            let new_ins = with_gate_app(ins, new);
            out.body[op.site] = new_ins;
        }
        MutationKind::PerturbAngle(delta) => {
            let ins = out.body.get(op.site)?;
            let g = gate_app_of(ins)?;
            let Gate::RZ(p) = g.gate else { return None };
            let new = GateApp::new(Gate::RZ(p.add(*delta)), g.controls.clone(), g.targets.clone());
            let new_ins = with_gate_app(ins, new);
            out.body[op.site] = new_ins;
        }
        MutationKind::SwapAdjacent => {
            if op.site + 1 >= out.body.len() {
                return None;
            }
            out.body.swap(op.site, op.site + 1);
        }
    }
    if !out.is_well_formed() {
        return None;
    }
    out.infer_primary_inputs();
    if out.primary_inputs != c.primary_inputs {
        return None;
    }
    Some(out)
}

/// How a mutant was confirmed non-equivalent to its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutantEvidence {
    /// Channel distance above threshold on the dense oracle.
    Oracle,
    /// Structural argument only (circuit too large for the oracle): an odd
    /// dyadic angle perturbation.
    Structural,
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub circuit: HybridCircuit,
    pub op: MutationOp,
    pub evidence: MutantEvidence,
}

/// Deterministically generates `count` mutants confirmed non-equivalent to
/// `c`. Circuits within oracle range are confirmed by channel distance;
/// larger circuits admit only angle perturbations.
pub fn generate_mutants(c: &HybridCircuit, seed: u64, count: usize) -> Result<Vec<Mutant>, MutationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle_sized = c.n_qubits <= oracle::MAX_CHANNEL_QUBITS;
    let base = if oracle_sized { Some(oracle::simulate_channel(c).expect("within range")) } else { None };
    let mut out: Vec<Mutant> = Vec::new();
    let max_attempts = count * 200;
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let site = rng.random_range(0..c.body.len().max(1));
        let kind = if oracle_sized {
            match rng.random_range(0..5u32) {
                0 => {
                    let t = rng.random_range(0..c.n_qubits);
                    let g = match rng.random_range(0..3u32) {
                        0 => GateApp::single(Gate::X, q(t)),
                        1 => GateApp::single(Gate::H, q(t)),
                        _ => GateApp::single(Gate::rz(1, rng.random_range(1..4)), q(t)),
                    };
                    MutationKind::InsertGate(g)
                }
                1 => MutationKind::DeleteGate,
                2 => MutationKind::FlipControl,
                3 => MutationKind::PerturbAngle(PhaseExponent::new(1, rng.random_range(1..28))),
                _ => MutationKind::SwapAdjacent,
            }
        } else {
            MutationKind::PerturbAngle(PhaseExponent::new(1, rng.random_range(1..28)))
        };
        let op = MutationOp { kind, site };
        let Some(mutant) = apply_mutation(c, &op) else { continue };
        if mutant == *c {
            continue;
        }
        let evidence = if let Some(base) = &base {
            let Ok(m) = oracle::simulate_channel(&mutant) else { continue };
            let Ok(d) = oracle::channel_distance(base, &m) else { continue };
            if d <= 1e-6 {
                continue;
            }
            MutantEvidence::Oracle
        } else {
            MutantEvidence::Structural
        };
        out.push(Mutant { circuit: mutant, op, evidence });
    }
    if out.len() < count {
        return Err(MutationError::MutationFailed { wanted: count, attempts });
    }
    Ok(out)
}
