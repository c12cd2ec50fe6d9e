//! Brute-force dense simulator, used as an independent test oracle.
//!
//! Gate blocks become explicit unitary matrices; full hybrid circuits become
//! Choi matrices of the channel from primary inputs to kept (non-discarded)
//! wires. Measurement is handled by deterministic Born-rule branching over
//! both projective outcomes, never by sampling, so oracle results are
//! reproducible.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{GateApp, Gate, HybridCircuit, Instruction, WireId};

/// Hard cap on unitary simulation size.
pub const MAX_UNITARY_QUBITS: u32 = 12;
/// Hard cap on channel simulation size (total qubits of the circuit).
pub const MAX_CHANNEL_QUBITS: u32 = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("circuit has {qubits} qubits, oracle limit is {limit}")]
    TooLarge { qubits: u32, limit: u32 },
    #[error("channel dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("gate addresses wire {0} outside a register of {1} qubits")]
    WireOutOfRange(u32, u32),
}

/// Dense `2^n x 2^n` unitary, row index = output basis state.
pub type DenseUnitary = Array2<Complex64>;

/// Choi matrix of a channel from `n_in` input qubits to `n_kept` output
/// qubits: the block at (input row i, input column j) is the channel applied
/// to the matrix unit |i><j|.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub n_in: u32,
    pub n_kept: u32,
    pub matrix: Array2<Complex64>,
}

fn phase_factor(mult: i64, denom_exp: u32) -> Complex64 {
    let angle = std::f64::consts::PI * mult as f64 * 2f64.powi(1 - denom_exp as i32);
    Complex64::from_polar(1.0, angle)
}

/// Applies one kernel gate application to every column of `m` (acting on the
/// left), using bit kernels rather than an explicit gate matrix.
fn apply_gateapp(m: &mut Array2<Complex64>, g: &GateApp, n: u32) -> Result<(), OracleError> {
    for w in g.wires() {
        if w.0 >= n {
            return Err(OracleError::WireOutOfRange(w.0, n));
        }
    }
    let dim = m.nrows();
    let cols = m.ncols();
    let ctrl_mask: usize = g.controls.iter().map(|w| 1usize << w.0).sum();
    if let Gate::Ph(p) = g.gate {
        // global phase on the control subspace, targets are irrelevant
        let f = phase_factor(p.mult, p.denom_exp);
        for col in 0..cols {
            for row in 0..dim {
                if row & ctrl_mask == ctrl_mask {
                    m[(row, col)] *= f;
                }
            }
        }
        return Ok(());
    }
    for &t in &g.targets {
        let tbit = 1usize << t.0;
        match g.gate {
            Gate::X => {
                for col in 0..cols {
                    for row in 0..dim {
                        if row & ctrl_mask == ctrl_mask && row & tbit == 0 {
                            let a = m[(row, col)];
                            m[(row, col)] = m[(row | tbit, col)];
                            m[(row | tbit, col)] = a;
                        }
                    }
                }
            }
            Gate::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for col in 0..cols {
                    for row in 0..dim {
                        if row & ctrl_mask == ctrl_mask && row & tbit == 0 {
                            let a = m[(row, col)];
                            let b = m[(row | tbit, col)];
                            m[(row, col)] = (a + b) * s;
                            m[(row | tbit, col)] = (a - b) * s;
                        }
                    }
                }
            }
            Gate::RZ(p) => {
                let f = phase_factor(p.mult, p.denom_exp);
                for col in 0..cols {
                    for row in 0..dim {
                        if row & ctrl_mask == ctrl_mask && row & tbit != 0 {
                            m[(row, col)] *= f;
                        }
                    }
                }
            }
            Gate::Ph(_) => unreachable!("handled above"),
        }
    }
    Ok(())
}

/// Product of the kernel gate matrices in order, exact in phase.
pub fn simulate_unitary(gates: &[GateApp], n: u32) -> Result<DenseUnitary, OracleError> {
    if n > MAX_UNITARY_QUBITS {
        return Err(OracleError::TooLarge { qubits: n, limit: MAX_UNITARY_QUBITS });
    }
    let dim = 1usize << n;
    let mut m = Array2::eye(dim);
    for g in gates {
        apply_gateapp(&mut m, g, n)?;
    }
    Ok(m)
}

/// Density-matrix branches keyed by the classical bit assignment, all
/// unnormalised (each branch carries its Born weight in its trace).
struct BranchState {
    n: u32,
    branches: BTreeMap<u64, Array2<Complex64>>,
}

impl BranchState {
    fn apply_unitary(&mut self, g: &GateApp) -> Result<(), OracleError> {
        let n = self.n;
        for rho in self.branches.values_mut() {
            // rho -> U rho U^dag; apply U to columns, then U^* to rows via
            // conjugate-transpose round trips
            apply_gateapp(rho, g, n)?;
            let mut rt = rho.t().map(|z| z.conj());
            apply_gateapp(&mut rt, g, n)?;
            *rho = rt.t().map(|z| z.conj());
        }
        Ok(())
    }

    fn measure(&mut self, wire: WireId, bit: u32) {
        let wbit = 1usize << wire.0;
        let dim = 1usize << self.n;
        let mut next: BTreeMap<u64, Array2<Complex64>> = BTreeMap::new();
        for (key, rho) in std::mem::take(&mut self.branches) {
            for outcome in 0..2u64 {
                let mut proj = Array2::zeros((dim, dim));
                let mut weight = 0.0f64;
                for r in 0..dim {
                    if ((r & wbit != 0) as u64) != outcome {
                        continue;
                    }
                    for c in 0..dim {
                        if ((c & wbit != 0) as u64) != outcome {
                            continue;
                        }
                        let v = rho[(r, c)];
                        proj[(r, c)] = v;
                        if r == c {
                            weight += v.re;
                        }
                    }
                }
                if weight.abs() < 1e-300 && proj.iter().all(|z| z.norm_sqr() < 1e-300) {
                    continue;
                }
                let new_key = if outcome == 1 { key | (1 << bit) } else { key & !(1 << bit) };
                match next.get_mut(&new_key) {
                    Some(acc) => *acc = &*acc + &proj,
                    None => {
                        next.insert(new_key, proj);
                    }
                }
            }
        }
        self.branches = next;
    }

    fn reset(&mut self, wire: WireId) {
        let wbit = 1usize << wire.0;
        let dim = 1usize << self.n;
        for rho in self.branches.values_mut() {
            let mut out = Array2::zeros((dim, dim));
            for r in 0..dim {
                if r & wbit != 0 {
                    continue;
                }
                for c in 0..dim {
                    if c & wbit != 0 {
                        continue;
                    }
                    // reset channel: |0><0| (x) Tr_wire
                    out[(r, c)] = rho[(r, c)] + rho[(r | wbit, c | wbit)];
                }
            }
            *rho = out;
        }
    }

    fn not_bit(&mut self, bit: u32) {
        let branches = std::mem::take(&mut self.branches);
        self.branches = branches.into_iter().map(|(k, v)| (k ^ (1 << bit), v)).collect();
    }
}

/// Partial trace over the wires NOT listed in `kept`; `kept` gives the
/// output wire order (ascending index order of the kept wires).
fn partial_trace(rho: &Array2<Complex64>, n: u32, kept: &[WireId]) -> Array2<Complex64> {
    let kept_dim = 1usize << kept.len();
    let traced: Vec<u32> = (0..n).filter(|i| !kept.iter().any(|w| w.0 == *i)).collect();
    let traced_dim = 1usize << traced.len();
    let expand = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0usize;
        for (pos, w) in kept.iter().enumerate() {
            if kept_idx & (1 << pos) != 0 {
                full |= 1 << w.0;
            }
        }
        for (pos, w) in traced.iter().enumerate() {
            if traced_idx & (1 << pos) != 0 {
                full |= 1 << w;
            }
        }
        full
    };
    let mut out = Array2::zeros((kept_dim, kept_dim));
    for r in 0..kept_dim {
        for c in 0..kept_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_dim {
                acc += rho[(expand(r, t), expand(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Runs the hybrid circuit on the input matrix unit |i><j| over its primary
/// inputs and returns the kept-wire reduced state.
fn run_on_matrix_unit(c: &HybridCircuit, i: usize, j: usize) -> Result<Array2<Complex64>, OracleError> {
    let n = c.n_qubits;
    let dim = 1usize << n;
    // embed E_ij over the primary inputs, |0..0> elsewhere
    let mut full_row = 0usize;
    let mut full_col = 0usize;
    for (pos, w) in c.primary_inputs.iter().enumerate() {
        if i & (1 << pos) != 0 {
            full_row |= 1 << w.0;
        }
        if j & (1 << pos) != 0 {
            full_col |= 1 << w.0;
        }
    }
    let mut rho = Array2::zeros((dim, dim));
    rho[(full_row, full_col)] = Complex64::new(1.0, 0.0);
    let mut state = BranchState { n, branches: BTreeMap::from([(0u64, rho)]) };
    let mut bound_wire: BTreeMap<u32, WireId> = BTreeMap::new();

    for ins in &c.body {
        match ins {
            Instruction::Apply(g) => state.apply_unitary(g)?,
            Instruction::ClassicallyControlled { bit, inner } => {
                let keys: Vec<u64> = state.branches.keys().copied().collect();
                for key in keys {
                    if key & (1 << bit.0) != 0 {
                        let rho = state.branches.remove(&key).unwrap();
                        let mut solo = BranchState { n, branches: BTreeMap::from([(key, rho)]) };
                        solo.apply_unitary(inner)?;
                        let back = solo.branches.remove(&key).unwrap();
                        state.branches.insert(key, back);
                    }
                }
            }
            Instruction::Measure { wire, bit } => {
                state.measure(*wire, bit.0);
                bound_wire.insert(bit.0, *wire);
            }
            Instruction::Init(w) => state.reset(*w),
            Instruction::NotBit(b) => {
                state.not_bit(b.0);
                // the measured wire is the physical carrier of its bit: a
                // post-measurement flip keeps the two in sync, so the
                // collapsed wire always reads the classical result
                if let Some(w) = bound_wire.get(&b.0) {
                    state.apply_unitary(&GateApp::single(Gate::X, *w))?;
                }
            }
        }
    }

    // classical results and discarded wires are traced out
    let kept = c.kept_wires();
    let mut total: Array2<Complex64> = Array2::zeros((1 << kept.len(), 1 << kept.len()));
    for rho in state.branches.values() {
        total = total + partial_trace(rho, n, &kept);
    }
    Ok(total)
}

/// Choi matrix of the channel induced by the circuit, from primary inputs to
/// kept wires, with classical results and discarded wires traced out.
pub fn simulate_channel(c: &HybridCircuit) -> Result<ChoiMatrix, OracleError> {
    if c.n_qubits > MAX_CHANNEL_QUBITS {
        return Err(OracleError::TooLarge { qubits: c.n_qubits, limit: MAX_CHANNEL_QUBITS });
    }
    let n_in = c.primary_inputs.len() as u32;
    let n_kept = c.kept_wires().len() as u32;
    let in_dim = 1usize << n_in;
    let out_dim = 1usize << n_kept;
    let dim = in_dim * out_dim;
    let mut choi = Array2::zeros((dim, dim));
    for i in 0..in_dim {
        for j in 0..in_dim {
            let block = run_on_matrix_unit(c, i, j)?;
            for r in 0..out_dim {
                for s in 0..out_dim {
                    choi[(i * out_dim + r, j * out_dim + s)] = block[(r, s)];
                }
            }
        }
    }
    Ok(ChoiMatrix { n_in, n_kept, matrix: choi })
}

/// Frobenius norm of the difference of two Choi matrices.
pub fn channel_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64, OracleError> {
    if a.matrix.dim() != b.matrix.dim() || a.n_in != b.n_in || a.n_kept != b.n_kept {
        return Err(OracleError::DimensionMismatch(a.matrix.nrows(), b.matrix.nrows()));
    }
    let mut acc = 0.0;
    for (x, y) in a.matrix.iter().zip(b.matrix.iter()) {
        acc += (x - y).norm_sqr();
    }
    Ok(acc.sqrt())
}

/// True when the two circuits induce the same channel within `tol`.
pub fn oracle_equiv(c1: &HybridCircuit, c2: &HybridCircuit, tol: f64) -> Result<bool, OracleError> {
    let a = simulate_channel(c1)?;
    let b = simulate_channel(c2)?;
    Ok(channel_distance(&a, &b)? <= tol)
}

/// Frobenius distance between two dense matrices.
pub fn matrix_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Distance up to global phase: minimises over a unit phase aligning the
/// largest entry.
pub fn matrix_distance_up_to_phase(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let mut pivot = None;
    let mut best = 0.0;
    for (idx, v) in b.indexed_iter() {
        if v.norm() > best {
            best = v.norm();
            pivot = Some(idx);
        }
    }
    let Some(idx) = pivot else {
        return matrix_distance(a, b);
    };
    if a[idx].norm() < 1e-300 {
        return matrix_distance(a, b);
    }
    let phase = a[idx] / b[idx];
    let phase = phase / Complex64::new(phase.norm(), 0.0);
    let adjusted = b.map(|z| z * phase);
    matrix_distance(a, &adjusted)
}

/// Partial trace of a Choi matrix over its output factor; equals the input
/// identity for trace-preserving channels.
pub fn choi_input_marginal(choi: &ChoiMatrix) -> Array2<Complex64> {
    let in_dim = 1usize << choi.n_in;
    let out_dim = 1usize << choi.n_kept;
    let mut out = Array2::zeros((in_dim, in_dim));
    for i in 0..in_dim {
        for j in 0..in_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..out_dim {
                acc += choi.matrix[(i * out_dim + r, j * out_dim + r)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Wires a gate list into a discard-free circuit and simulates it.
pub fn simulate_gateapps(gates: &[GateApp], n: u32) -> Result<DenseUnitary, OracleError> {
    simulate_unitary(gates, n)
}

pub fn wires_used(c: &HybridCircuit) -> BTreeSet<WireId> {
    c.body.iter().flat_map(|i| i.quantum_wires()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ClassicalBitId, GateApp, Gate, HybridCircuit, Instruction};

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hadamard_matrix() {
        let m = simulate_unitary(&[GateApp::single(Gate::H, q(0))], 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = ndarray::arr2(&[[c64(s, 0.0), c64(s, 0.0)], [c64(s, 0.0), c64(-s, 0.0)]]);
        assert!(matrix_distance(&m, &expect) < 1e-15);
    }

    #[test]
    fn cnot_is_a_permutation() {
        let m = simulate_unitary(&[GateApp::controlled(Gate::X, vec![q(0)], q(1))], 2).unwrap();
        // wire 0 is bit 0; basis order 00,01,10,11 with wire 0 least significant
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        let expect = ndarray::arr2(&[
            [one, zero, zero, zero],
            [zero, zero, zero, one],
            [zero, zero, one, zero],
            [zero, one, zero, zero],
        ]);
        assert!(matrix_distance(&m, &expect) < 1e-15);
    }

    #[test]
    fn t_gate_diagonal() {
        let m = simulate_unitary(&[GateApp::single(Gate::rz(1, 3), q(0))], 1).unwrap();
        assert!((m[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn unitary_blocks_are_unitary() {
        let gates = vec![
            GateApp::single(Gate::H, q(0)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
            GateApp::single(Gate::rz(3, 4), q(1)),
            GateApp::controlled(Gate::rz(1, 2), vec![q(1)], q(0)),
        ];
        let m = simulate_unitary(&gates, 2).unwrap();
        let mt = m.t().map(|z| z.conj());
        let prod = mt.dot(&m);
        let eye: Array2<Complex64> = Array2::eye(4);
        assert!(matrix_distance(&prod, &eye) < 1e-10);
    }

    #[test]
    fn identity_channel_choi() {
        let c = HybridCircuit::new(1, 0);
        let choi = simulate_channel(&c).unwrap();
        // sum_ij |i><j| (x) |i><j| = 2 |Phi+><Phi+|
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        let expect = ndarray::arr2(&[
            [one, zero, zero, one],
            [zero, zero, zero, zero],
            [zero, zero, zero, zero],
            [one, zero, zero, one],
        ]);
        assert!(matrix_distance(&choi.matrix, &expect) < 1e-12);
    }

    #[test]
    fn measured_fresh_ancilla_leaves_identity_on_kept_wire() {
        let mut c = HybridCircuit::new(2, 1);
        c.body = vec![
            Instruction::Init(q(1)),
            Instruction::Measure { wire: q(1), bit: ClassicalBitId(0) },
        ];
        c.discards.insert(q(1));
        c.infer_primary_inputs();
        let choi = simulate_channel(&c).unwrap();
        let id = simulate_channel(&HybridCircuit::new(1, 0)).unwrap();
        assert!(channel_distance(&choi, &id).unwrap() < 1e-12);
    }

    #[test]
    fn x_channel_distance_from_identity() {
        let id = simulate_channel(&HybridCircuit::new(1, 0)).unwrap();
        let x = simulate_channel(&HybridCircuit::from_gates(1, vec![GateApp::single(Gate::X, q(0))])).unwrap();
        assert_eq!(channel_distance(&x, &x).unwrap(), 0.0);
        let d = channel_distance(&id, &x).unwrap();
        assert!((d - 8f64.sqrt()).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn choi_is_hermitian_and_trace_preserving() {
        let mut c = HybridCircuit::new(3, 2);
        c.body = vec![
            Instruction::Init(q(1)),
            Instruction::Apply(GateApp::single(Gate::H, q(1))),
            Instruction::Apply(GateApp::controlled(Gate::X, vec![q(1)], q(2))),
            Instruction::Measure { wire: q(1), bit: ClassicalBitId(0) },
            Instruction::ClassicallyControlled {
                bit: ClassicalBitId(0),
                inner: GateApp::single(Gate::X, q(0)),
            },
        ];
        c.discards.insert(q(1));
        c.infer_primary_inputs();
        let choi = simulate_channel(&c).unwrap();
        let herm = choi.matrix.t().map(|z| z.conj());
        assert!(matrix_distance(&choi.matrix, &herm) < 1e-10);
        let marginal = choi_input_marginal(&choi);
        let eye: Array2<Complex64> = Array2::eye(marginal.nrows());
        assert!(matrix_distance(&marginal, &eye) < 1e-9);
    }

    #[test]
    fn classical_control_branches_like_quantum_control_after_measure() {
        // measure then classically-controlled X equals CX then measure
        let mut dynamic = HybridCircuit::new(2, 1);
        dynamic.body = vec![
            Instruction::Measure { wire: q(0), bit: ClassicalBitId(0) },
            Instruction::ClassicallyControlled {
                bit: ClassicalBitId(0),
                inner: GateApp::single(Gate::X, q(1)),
            },
        ];
        dynamic.infer_primary_inputs();
        let mut deferred = HybridCircuit::new(2, 1);
        deferred.body = vec![
            Instruction::Apply(GateApp::controlled(Gate::X, vec![q(0)], q(1))),
            Instruction::Measure { wire: q(0), bit: ClassicalBitId(0) },
        ];
        deferred.infer_primary_inputs();
        assert!(oracle_equiv(&dynamic, &deferred, 1e-10).unwrap());
    }

    #[test]
    fn size_limits_enforced() {
        let c = HybridCircuit::new(6, 0);
        assert!(matches!(simulate_channel(&c), Err(OracleError::TooLarge { .. })));
        assert!(matches!(simulate_unitary(&[], 13), Err(OracleError::TooLarge { .. })));
    }
}
