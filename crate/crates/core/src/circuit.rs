//! Hybrid-circuit intermediate representation.
//!
//! A [`HybridCircuit`] is an ordered list of instructions over quantum and
//! classical wires: gate applications (possibly classically controlled),
//! measurements, wire initialisations, and classical bit flips, plus a
//! circuit-level set of discarded wires whose final state is traced out.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Index of a quantum wire inside a circuit's register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WireId(pub u32);

/// Index of a classical wire (one bit) inside a circuit's classical register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ClassicalBitId(pub u32);

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for ClassicalBitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Exponent of a dyadic phase: the pair `(mult, denom_exp)` denotes the
/// angle `pi * mult / 2^(denom_exp - 1)`.
///
/// Kept in lowest terms and canonicalised modulo a full turn:
/// `0 <= mult < 2^denom_exp` with `mult` odd, or the zero angle. The
/// canonical representative keeps adjoints inside the kernel set
/// (`RZ(m,k)` inverts to `RZ(2^k - m, k)`) and makes gate equality textual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseExponent {
    pub mult: i64,
    pub denom_exp: u32,
}

impl PhaseExponent {
    /// Builds a phase exponent, reducing modulo 2*pi and to lowest terms.
    pub fn new(mult: i64, denom_exp: u32) -> Self {
        let mut mult = (mult as i128).rem_euclid(1i128 << denom_exp) as i64;
        let mut denom_exp = denom_exp;
        if mult == 0 {
            return PhaseExponent { mult: 0, denom_exp: 0 };
        }
        while mult % 2 == 0 && denom_exp > 0 {
            mult /= 2;
            denom_exp -= 1;
        }
        PhaseExponent { mult, denom_exp }
    }

    /// The inverse rotation: same axis, negated angle.
    pub fn adjoint(self) -> Self {
        PhaseExponent::new(-self.mult, self.denom_exp)
    }

    /// Angle addition modulo a full turn.
    pub fn add(self, other: PhaseExponent) -> PhaseExponent {
        let k = self.denom_exp.max(other.denom_exp);
        let a = (self.mult as i128) << (k - self.denom_exp);
        let b = (other.mult as i128) << (k - other.denom_exp);
        PhaseExponent::new((a + b).rem_euclid(1i128 << k) as i64, k)
    }

    /// Angle in radians, `pi * mult / 2^(denom_exp - 1)`.
    pub fn radians(self) -> f64 {
        std::f64::consts::PI * self.mult as f64 * 2f64.powi(1 - self.denom_exp as i32)
    }
}

/// The kernel gate set: Hadamard, NOT, Z-axis rotation, and global phase.
///
/// `RZ(m, k)` applies `exp(i*pi*m/2^(k-1))` to basis value 1 of its target;
/// `Ph(m, k)` applies the same factor as a global phase (to every amplitude
/// the instruction fires on). `Z`, `S` and `T` are `RZ(1,1)`, `RZ(1,2)` and
/// `RZ(1,3)` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    X,
    H,
    RZ(PhaseExponent),
    Ph(PhaseExponent),
}

impl Gate {
    pub fn rz(mult: i64, denom_exp: u32) -> Self {
        Gate::RZ(PhaseExponent::new(mult, denom_exp))
    }

    pub fn ph(mult: i64, denom_exp: u32) -> Self {
        Gate::Ph(PhaseExponent::new(mult, denom_exp))
    }

    /// The inverse gate. Stays inside the kernel set: X and H are
    /// self-inverse, rotations negate their multiplier.
    pub fn adjoint(self) -> Self {
        match self {
            Gate::X | Gate::H => self,
            Gate::RZ(p) => Gate::RZ(p.adjoint()),
            Gate::Ph(p) => Gate::Ph(p.adjoint()),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X => write!(f, "X"),
            Gate::H => write!(f, "H"),
            Gate::RZ(p) => write!(f, "RZ({},{})", p.mult, p.denom_exp),
            Gate::Ph(p) => write!(f, "Ph({},{})", p.mult, p.denom_exp),
        }
    }
}

/// One gate application: `gate` on each wire of `targets`, fired only when
/// every wire in `controls` is 1.
///
/// Controls are kept sorted; controls and targets are disjoint. A `Ph` with a
/// non-empty control list and no target is normalised to an `RZ` on its last
/// control (both denote the same diagonal operator), so that every
/// instruction has at least one operand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateApp {
    pub gate: Gate,
    pub controls: Vec<WireId>,
    pub targets: Vec<WireId>,
}

impl GateApp {
    pub fn new(gate: Gate, mut controls: Vec<WireId>, targets: Vec<WireId>) -> Self {
        controls.sort_unstable();
        controls.dedup();
        // a Ph fires on its controls and ignores its targets, so a
        // controlled Ph is the same diagonal as an RZ on its last control
        if let (Gate::Ph(p), Some(&last)) = (gate, controls.last()) {
            controls.pop();
            return GateApp { gate: Gate::RZ(p), controls, targets: vec![last] };
        }
        GateApp { gate, controls, targets }
    }

    pub fn single(gate: Gate, target: WireId) -> Self {
        GateApp::new(gate, vec![], vec![target])
    }

    pub fn controlled(gate: Gate, controls: Vec<WireId>, target: WireId) -> Self {
        GateApp::new(gate, controls, vec![target])
    }

    /// All wires touched by the application.
    pub fn wires(&self) -> impl Iterator<Item = WireId> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    pub fn adjoint(&self) -> GateApp {
        GateApp { gate: self.gate.adjoint(), controls: self.controls.clone(), targets: self.targets.clone() }
    }

    /// Remaps every wire through `f`, re-normalising the control order.
    pub fn map_wires(&self, mut f: impl FnMut(WireId) -> WireId) -> GateApp {
        GateApp::new(
            self.gate,
            self.controls.iter().map(|&w| f(w)).collect(),
            self.targets.iter().map(|&w| f(w)).collect(),
        )
    }
}

impl fmt::Display for GateApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gate)?;
        if !self.controls.is_empty() {
            write!(f, " ctrl[")?;
            for (i, c) in self.controls.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "]")?;
        }
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

/// Reversed gate list with every gate inverted; the adjoint of the composite.
pub fn adjoint_circuit(gates: &[GateApp]) -> Vec<GateApp> {
    gates.iter().rev().map(GateApp::adjoint).collect()
}

/// Rewrites controlled Hadamards into the kernel subset the path-sum engine
/// accepts, leaving everything else untouched.
///
/// `H = (Sdg·H·Tdg) · X · (T·H·S)` with the outer products multiplying to
/// the identity, so wrapping only the X with the controls is exact in phase
/// for any number of controls.
pub fn expand_controlled_h(gates: &[GateApp]) -> Vec<GateApp> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        if g.gate == Gate::H && !g.controls.is_empty() {
            for &t in &g.targets {
                out.push(GateApp::single(Gate::rz(1, 2), t));
                out.push(GateApp::single(Gate::H, t));
                out.push(GateApp::single(Gate::rz(1, 3), t));
                out.push(GateApp::new(Gate::X, g.controls.clone(), vec![t]));
                out.push(GateApp::single(Gate::rz(-1, 3), t));
                out.push(GateApp::single(Gate::H, t));
                out.push(GateApp::single(Gate::rz(-1, 2), t));
            }
        } else {
            out.push(g.clone());
        }
    }
    out
}

/// One instruction of a hybrid circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// Unitary gate application.
    Apply(GateApp),
    /// `inner` fires only if classical bit `bit` holds 1.
    ClassicallyControlled { bit: ClassicalBitId, inner: GateApp },
    /// Computational-basis measurement of `wire`, result stored in `bit`.
    Measure { wire: WireId, bit: ClassicalBitId },
    /// Initialisation of `wire` to |0>.
    Init(WireId),
    /// Classical bit flip.
    NotBit(ClassicalBitId),
}

impl Instruction {
    pub fn quantum_wires(&self) -> Vec<WireId> {
        match self {
            Instruction::Apply(g) | Instruction::ClassicallyControlled { inner: g, .. } => {
                g.wires().collect()
            }
            Instruction::Measure { wire, .. } | Instruction::Init(wire) => vec![*wire],
            Instruction::NotBit(_) => vec![],
        }
    }

    pub fn is_init(&self) -> bool {
        matches!(self, Instruction::Init(_))
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Instruction::Measure { .. })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Apply(g) => write!(f, "{g}"),
            Instruction::ClassicallyControlled { bit, inner } => write!(f, "if {bit} {{ {inner} }}"),
            Instruction::Measure { wire, bit } => write!(f, "meas {wire} -> {bit}"),
            Instruction::Init(w) => write!(f, "init {w}"),
            Instruction::NotBit(b) => write!(f, "not {b}"),
        }
    }
}

/// A hybrid circuit: quantum wires, classical wires, an instruction list,
/// the set of discarded wires, and the ordered list of primary inputs.
///
/// Primary inputs are the wires that carry caller-supplied states, i.e. the
/// wires that are never initialised inside the circuit. The order of the
/// list is the order in which two circuits' inputs are aligned when checking
/// equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridCircuit {
    pub n_qubits: u32,
    pub n_cbits: u32,
    pub body: Vec<Instruction>,
    pub discards: BTreeSet<WireId>,
    pub primary_inputs: Vec<WireId>,
}

/// A well-formedness violation, naming the offending instruction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("instruction {index}: classical bit {bit} receives a second measurement result")]
    DoubleMeasure { index: usize, bit: ClassicalBitId },
    #[error("instruction {index}: quantum wire {wire} addressed after its measurement")]
    WireUsedAfterMeasure { index: usize, wire: WireId },
    #[error("instruction {index}: wire index {wire} out of range (register has {n_qubits})")]
    QuantumWireOutOfRange { index: usize, wire: WireId, n_qubits: u32 },
    #[error("instruction {index}: classical bit {bit} out of range (register has {n_cbits})")]
    ClassicalBitOutOfRange { index: usize, bit: ClassicalBitId, n_cbits: u32 },
    #[error("instruction {index}: control and target lists overlap on {wire}")]
    OverlappingOperands { index: usize, wire: WireId },
    #[error("discard names wire {wire} outside the register")]
    DiscardOutOfRange { wire: WireId },
}

/// Raised by [`HybridCircuit::decompose_ium`] on circuits that are not in
/// init / unitary / measure normal form; run the deferred-measurement
/// transformation first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotInNormalForm {
    #[error("instruction {0}: initialisation after a non-init instruction (l_init > 0)")]
    InteriorInit(usize),
    #[error("instruction {0}: non-measure instruction after a measurement (e_meas > 0)")]
    InteriorMeasure(usize),
    #[error("instruction {0}: classically controlled instruction present")]
    ClassicalControl(usize),
    #[error("instruction {0}: classical bit flip present")]
    ClassicalNot(usize),
}

/// A circuit split into its three normal-form blocks: initialisations,
/// a unitary gate list, and trailing measurements, plus the discard set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IumDecomposition {
    /// Wires initialised at the head, in instruction order.
    pub init_order: Vec<WireId>,
    /// The unitary block.
    pub unitary: Vec<GateApp>,
    /// Trailing measurements, in instruction order.
    pub measured: Vec<(WireId, ClassicalBitId)>,
    /// Wires traced out at the end.
    pub discarded: BTreeSet<WireId>,
}

impl IumDecomposition {
    pub fn init_set(&self) -> BTreeSet<WireId> {
        self.init_order.iter().copied().collect()
    }

    pub fn measured_wires(&self) -> BTreeSet<WireId> {
        self.measured.iter().map(|&(w, _)| w).collect()
    }
}

/// Which of the two circuits of an equivalence instance carry discards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChallengeClass {
    /// Neither circuit discards a wire.
    DisFree,
    /// Exactly one circuit discards.
    Mix,
    /// Both circuits discard.
    Dis,
}

impl fmt::Display for ChallengeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChallengeClass::DisFree => write!(f, "DisFree"),
            ChallengeClass::Mix => write!(f, "Mix"),
            ChallengeClass::Dis => write!(f, "Dis"),
        }
    }
}

/// Classifies an equivalence instance by the presence of discards.
pub fn classify(c1: &HybridCircuit, c2: &HybridCircuit) -> ChallengeClass {
    match (c1.discards.is_empty(), c2.discards.is_empty()) {
        (true, true) => ChallengeClass::DisFree,
        (false, false) => ChallengeClass::Dis,
        _ => ChallengeClass::Mix,
    }
}

impl HybridCircuit {
    /// A circuit with `n_qubits` wires, all primary inputs, and no body.
    pub fn new(n_qubits: u32, n_cbits: u32) -> Self {
        HybridCircuit {
            n_qubits,
            n_cbits,
            body: Vec::new(),
            discards: BTreeSet::new(),
            primary_inputs: (0..n_qubits).map(WireId).collect(),
        }
    }

    /// Builds a purely unitary circuit from a gate list.
    pub fn from_gates(n_qubits: u32, gates: Vec<GateApp>) -> Self {
        let mut c = HybridCircuit::new(n_qubits, 0);
        c.body = gates.into_iter().map(Instruction::Apply).collect();
        c
    }

    /// Recomputes the primary-input list as the wires never initialised in
    /// the body, in index order.
    pub fn infer_primary_inputs(&mut self) {
        let inited: BTreeSet<WireId> = self
            .body
            .iter()
            .filter_map(|ins| match ins {
                Instruction::Init(w) => Some(*w),
                _ => None,
            })
            .collect();
        self.primary_inputs = (0..self.n_qubits).map(WireId).filter(|w| !inited.contains(w)).collect();
    }

    pub fn kept_wires(&self) -> Vec<WireId> {
        (0..self.n_qubits).map(WireId).filter(|w| !self.discards.contains(w)).collect()
    }

    /// Checks the two well-formedness constraints -- every classical bit is
    /// measured into at most once, and no quantum wire is addressed after its
    /// measurement -- along with structural index validity. Returns every
    /// violation found, in instruction order.
    pub fn well_formedness_violations(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut measured_wires: BTreeSet<WireId> = BTreeSet::new();
        let mut written_bits: BTreeSet<ClassicalBitId> = BTreeSet::new();

        for w in &self.discards {
            if w.0 >= self.n_qubits {
                violations.push(Violation::DiscardOutOfRange { wire: *w });
            }
        }

        for (index, ins) in self.body.iter().enumerate() {
            for wire in ins.quantum_wires() {
                if wire.0 >= self.n_qubits {
                    violations.push(Violation::QuantumWireOutOfRange { index, wire, n_qubits: self.n_qubits });
                }
                if measured_wires.contains(&wire) {
                    violations.push(Violation::WireUsedAfterMeasure { index, wire });
                }
            }
            if let Instruction::Apply(g) | Instruction::ClassicallyControlled { inner: g, .. } = ins {
                for t in &g.targets {
                    if g.controls.contains(t) {
                        violations.push(Violation::OverlappingOperands { index, wire: *t });
                    }
                }
            }
            let bit = match ins {
                Instruction::Measure { bit, .. } => Some(*bit),
                Instruction::ClassicallyControlled { bit, .. } => Some(*bit),
                Instruction::NotBit(bit) => Some(*bit),
                _ => None,
            };
            if let Some(b) = bit {
                if b.0 >= self.n_cbits {
                    violations.push(Violation::ClassicalBitOutOfRange { index, bit: b, n_cbits: self.n_cbits });
                }
            }
            if let Instruction::Measure { wire, bit } = ins {
                if !written_bits.insert(*bit) {
                    violations.push(Violation::DoubleMeasure { index, bit: *bit });
                }
                // recorded after the wire check above so that measuring an
                // already-measured wire reports WireUsedAfterMeasure
                measured_wires.insert(*wire);
            }
        }
        violations
    }

    pub fn is_well_formed(&self) -> bool {
        self.well_formedness_violations().is_empty()
    }

    /// Sum over initialisation commands of the number of non-init commands
    /// preceding each; zero exactly when every init leads the circuit.
    pub fn l_init(&self) -> usize {
        let mut non_init_seen = 0usize;
        let mut total = 0usize;
        for ins in &self.body {
            if ins.is_init() {
                total += non_init_seen;
            } else {
                non_init_seen += 1;
            }
        }
        total
    }

    /// Sum over measurement commands of the number of non-measure commands
    /// succeeding each; zero exactly when every measurement trails.
    pub fn e_meas(&self) -> usize {
        let mut non_meas_seen = 0usize;
        let mut total = 0usize;
        for ins in self.body.iter().rev() {
            if ins.is_measure() {
                total += non_meas_seen;
            } else {
                non_meas_seen += 1;
            }
        }
        total
    }

    /// Splits a normal-form circuit into its init / unitary / measure blocks.
    ///
    /// Requires `l_init == 0`, `e_meas == 0`, and a body free of classical
    /// control and classical bit flips; concatenating the returned blocks in
    /// order reproduces the body exactly.
    pub fn decompose_ium(&self) -> Result<IumDecomposition, NotInNormalForm> {
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        enum Block {
            Init,
            Unitary,
            Measure,
        }
        let mut block = Block::Init;
        let mut out = IumDecomposition {
            init_order: Vec::new(),
            unitary: Vec::new(),
            measured: Vec::new(),
            discarded: self.discards.clone(),
        };
        for (index, ins) in self.body.iter().enumerate() {
            match ins {
                Instruction::ClassicallyControlled { .. } => {
                    return Err(NotInNormalForm::ClassicalControl(index))
                }
                Instruction::NotBit(_) => return Err(NotInNormalForm::ClassicalNot(index)),
                Instruction::Init(w) => {
                    if block > Block::Init {
                        return Err(NotInNormalForm::InteriorInit(index));
                    }
                    out.init_order.push(*w);
                }
                Instruction::Apply(g) => {
                    if block > Block::Unitary {
                        return Err(NotInNormalForm::InteriorMeasure(index));
                    }
                    block = Block::Unitary;
                    out.unitary.push(g.clone());
                }
                Instruction::Measure { wire, bit } => {
                    block = Block::Measure;
                    out.measured.push((*wire, *bit));
                }
            }
        }
        Ok(out)
    }

    /// Renames every wire through the permutation `perm` (old index ->
    /// new index), preserving the order of the primary-input list.
    pub fn permute_wires(&self, perm: &[u32]) -> HybridCircuit {
        assert_eq!(perm.len(), self.n_qubits as usize);
        let map = |w: WireId| WireId(perm[w.0 as usize]);
        HybridCircuit {
            n_qubits: self.n_qubits,
            n_cbits: self.n_cbits,
            body: self
                .body
                .iter()
                .map(|ins| match ins {
                    Instruction::Apply(g) => Instruction::Apply(g.map_wires(map)),
                    Instruction::ClassicallyControlled { bit, inner } => {
                        Instruction::ClassicallyControlled { bit: *bit, inner: inner.map_wires(map) }
                    }
                    Instruction::Measure { wire, bit } => Instruction::Measure { wire: map(*wire), bit: *bit },
                    Instruction::Init(w) => Instruction::Init(map(*w)),
                    Instruction::NotBit(b) => Instruction::NotBit(*b),
                })
                .collect(),
            discards: self.discards.iter().map(|&w| map(w)).collect(),
            primary_inputs: self.primary_inputs.iter().map(|&w| map(w)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    fn cb(i: u32) -> ClassicalBitId {
        ClassicalBitId(i)
    }

    fn h(t: u32) -> Instruction {
        Instruction::Apply(GateApp::single(Gate::H, q(t)))
    }

    fn x(t: u32) -> Instruction {
        Instruction::Apply(GateApp::single(Gate::X, q(t)))
    }

    #[test]
    fn phase_exponent_lowest_terms() {
        assert_eq!(PhaseExponent::new(4, 3), PhaseExponent { mult: 1, denom_exp: 1 });
        assert_eq!(PhaseExponent::new(6, 1), PhaseExponent { mult: 0, denom_exp: 0 });
        assert_eq!(PhaseExponent::new(0, 7), PhaseExponent { mult: 0, denom_exp: 0 });
        assert_eq!(PhaseExponent::new(-1, 2), PhaseExponent { mult: 3, denom_exp: 2 });
        assert_eq!(PhaseExponent::new(-2, 1), PhaseExponent { mult: 0, denom_exp: 0 });
    }

    #[test]
    fn controlled_global_phase_normalises_to_rotation() {
        let g = GateApp::new(Gate::ph(1, 2), vec![q(0), q(2)], vec![]);
        assert_eq!(g, GateApp { gate: Gate::rz(1, 2), controls: vec![q(0)], targets: vec![q(2)] });
    }

    #[test]
    fn l_init_examples() {
        let mut c = HybridCircuit::new(3, 0);
        c.body = vec![Instruction::Init(q(0)), Instruction::Init(q(1)), h(0)];
        assert_eq!(c.l_init(), 0);

        c.body = vec![h(0), Instruction::Init(q(1))];
        assert_eq!(c.l_init(), 1);

        c.body = vec![h(0), x(0), Instruction::Init(q(1)), Instruction::Init(q(2))];
        assert_eq!(c.l_init(), 4);
    }

    #[test]
    fn e_meas_examples() {
        let mut c = HybridCircuit::new(2, 2);
        c.body = vec![h(0), Instruction::Measure { wire: q(0), bit: cb(0) }];
        assert_eq!(c.e_meas(), 0);

        c.body = vec![Instruction::Measure { wire: q(0), bit: cb(0) }, x(1)];
        assert_eq!(c.e_meas(), 1);
    }

    #[test]
    fn double_measure_is_flagged_at_offending_index() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![
            Instruction::Measure { wire: q(0), bit: cb(0) },
            Instruction::Measure { wire: q(1), bit: cb(0) },
        ];
        assert_eq!(c.well_formedness_violations(), vec![Violation::DoubleMeasure { index: 1, bit: cb(0) }]);
    }

    #[test]
    fn measured_wire_reuse_is_flagged() {
        let mut c = HybridCircuit::new(1, 1);
        c.body = vec![Instruction::Measure { wire: q(0), bit: cb(0) }, h(0)];
        assert_eq!(
            c.well_formedness_violations(),
            vec![Violation::WireUsedAfterMeasure { index: 1, wire: q(0) }]
        );
    }

    #[test]
    fn well_formedness_is_order_sensitive() {
        let mut c = HybridCircuit::new(1, 1);
        c.body = vec![h(0), Instruction::Measure { wire: q(0), bit: cb(0) }];
        assert!(c.is_well_formed());
        c.body.reverse();
        assert!(!c.is_well_formed());
    }

    #[test]
    fn decompose_pure_unitary() {
        let c = HybridCircuit::from_gates(2, vec![
            GateApp::single(Gate::H, q(0)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
        ]);
        let d = c.decompose_ium().unwrap();
        assert!(d.init_order.is_empty());
        assert_eq!(d.unitary.len(), 2);
        assert!(d.measured.is_empty());
        assert!(d.discarded.is_empty());
    }

    #[test]
    fn decompose_rejects_interior_init() {
        let mut c = HybridCircuit::new(2, 0);
        c.body = vec![h(0), Instruction::Init(q(1))];
        c.infer_primary_inputs();
        assert_eq!(c.decompose_ium(), Err(NotInNormalForm::InteriorInit(1)));
    }

    #[test]
    fn decompose_roundtrips_body() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![
            Instruction::Init(q(1)),
            h(0),
            x(1),
            Instruction::Measure { wire: q(0), bit: cb(0) },
        ];
        c.infer_primary_inputs();
        let d = c.decompose_ium().unwrap();
        let mut rebuilt: Vec<Instruction> = d.init_order.iter().map(|&w| Instruction::Init(w)).collect();
        rebuilt.extend(d.unitary.iter().cloned().map(Instruction::Apply));
        rebuilt.extend(d.measured.iter().map(|&(w, b)| Instruction::Measure { wire: w, bit: b }));
        assert_eq!(rebuilt, c.body);
    }

    #[test]
    fn classify_cases() {
        let free = HybridCircuit::new(1, 0);
        let mut dis = HybridCircuit::new(2, 0);
        dis.discards.insert(q(1));
        assert_eq!(classify(&free, &free), ChallengeClass::DisFree);
        assert_eq!(classify(&dis, &dis), ChallengeClass::Dis);
        assert_eq!(classify(&free, &dis), ChallengeClass::Mix);
        assert_eq!(classify(&dis, &free), ChallengeClass::Mix);
    }

    #[test]
    fn adjoint_circuit_inverts_and_reverses() {
        let u = vec![GateApp::single(Gate::H, q(0)), GateApp::single(Gate::rz(1, 3), q(0))];
        let adj = adjoint_circuit(&u);
        // -1/4 canonicalises to 7/4 of a half-turn
        assert_eq!(adj[0], GateApp::single(Gate::rz(7, 3), q(0)));
        assert_eq!(adj[0], GateApp::single(Gate::rz(-1, 3), q(0)));
        assert_eq!(adj[1], GateApp::single(Gate::H, q(0)));
    }
}
