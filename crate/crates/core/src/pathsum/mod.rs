//! Symbolic path-sum representation of unitary blocks.
//!
//! A path-sum represents a linear map as
//!
//! ```text
//!   |x>  ->  2^(-s/2) · Σ_{y in {0,1}^m} exp(i·pi·P(x,y)) |f(x,y)>
//! ```
//!
//! with Boolean input variables `x`, path variables `y` introduced by
//! Hadamards, a dyadic phase polynomial `P` taken modulo 2, and one
//! multilinear Boolean output polynomial per output wire. Composition is
//! symbolic; a rewrite engine ([`PathSum::reduce`]) eliminates path
//! variables while preserving the represented operator exactly.

pub mod poly;
mod reduce;
mod separate;

pub use poly::{BoolPoly, Dyadic, Monomial, PhasePoly, Var};
pub use reduce::{ReduceStats, RuleKind};
pub use separate::{separate, Separation, SeparationFailure, SeparationResult};

use std::collections::BTreeSet;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Gate, GateApp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathSumError {
    #[error("controlled Hadamard reached the path-sum engine; lower it to the kernel set first")]
    ControlledHadamard,
    #[error("gate addresses wire {0} outside a register of {1} outputs")]
    WireOutOfRange(u32, usize),
}

/// Symbolic amplitude map; see the module docs for the semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSum {
    n_in: usize,
    n_out: usize,
    /// Input indices pinned to |0> by projection.
    zeroed: BTreeSet<u32>,
    /// Live path variables.
    path_vars: BTreeSet<u32>,
    /// Next fresh path-variable id.
    next_path: u32,
    /// Scale exponent: global factor 2^(-scale/2).
    scale: i64,
    phase: PhasePoly,
    outputs: Vec<BoolPoly>,
}

impl PathSum {
    /// The identity map on `n` wires: no path variables, empty phase,
    /// `f_j = x_j`.
    pub fn identity(n: usize) -> Self {
        PathSum {
            n_in: n,
            n_out: n,
            zeroed: BTreeSet::new(),
            path_vars: BTreeSet::new(),
            next_path: 0,
            scale: 0,
            phase: PhasePoly::zero(),
            outputs: (0..n).map(|i| BoolPoly::var(Var::Input(i as u32))).collect(),
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn phase(&self) -> &PhasePoly {
        &self.phase
    }

    pub fn outputs(&self) -> &[BoolPoly] {
        &self.outputs
    }

    pub fn output(&self, i: usize) -> &BoolPoly {
        &self.outputs[i]
    }

    pub fn zeroed(&self) -> &BTreeSet<u32> {
        &self.zeroed
    }

    pub fn path_var_count(&self) -> usize {
        self.path_vars.len()
    }

    pub fn path_vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.path_vars.iter().copied()
    }

    /// Free (non-projected) input variable indices, in order.
    pub fn free_inputs(&self) -> Vec<u32> {
        (0..self.n_in as u32).filter(|i| !self.zeroed.contains(i)).collect()
    }

    fn fresh_path_var(&mut self) -> Var {
        let id = self.next_path;
        self.next_path += 1;
        self.path_vars.insert(id);
        Var::Path(id)
    }

    /// Applies one kernel gate application, in place.
    ///
    /// Writing `g` for the AND of the control output polynomials (1 when
    /// uncontrolled) and `t` for a target index:
    ///
    /// - `X`:        `f_t <- f_t ⊕ g`
    /// - `RZ(m,k)`:  `phase += (m/2^(k-1)) · lift(g · f_t)`
    /// - `Ph(m,k)`:  `phase += (m/2^(k-1)) · lift(g)`
    /// - `H` (uncontrolled): fresh path variable `y`;
    ///   `phase += y · lift(f_t)`; `f_t <- y`; `scale += 1`
    ///
    /// Controlled Hadamards are rejected; they are lowered to the kernel
    /// set upstream.
    pub fn apply_gate(&mut self, app: &GateApp) -> Result<(), PathSumError> {
        for w in app.wires() {
            if w.0 as usize >= self.n_out {
                return Err(PathSumError::WireOutOfRange(w.0, self.n_out));
            }
        }
        let control_poly = |ps: &PathSum| -> BoolPoly {
            let mut g = BoolPoly::one();
            for c in &app.controls {
                g = g.and(&ps.outputs[c.0 as usize]);
            }
            g
        };
        match app.gate {
            Gate::X => {
                let g = control_poly(self);
                for t in &app.targets {
                    let f = self.outputs[t.0 as usize].clone().xor(&g);
                    self.outputs[t.0 as usize] = f;
                }
            }
            Gate::RZ(p) => {
                if p.denom_exp == 0 {
                    // exp(i*pi*2m) = 1
                    return Ok(());
                }
                let coeff = Dyadic::new(p.mult, p.denom_exp - 1);
                let g = control_poly(self);
                for t in &app.targets {
                    let gf = g.and(&self.outputs[t.0 as usize]);
                    self.phase.add_scaled_lift(&gf, coeff);
                }
            }
            Gate::Ph(p) => {
                if p.denom_exp == 0 {
                    return Ok(());
                }
                let coeff = Dyadic::new(p.mult, p.denom_exp - 1);
                let g = control_poly(self);
                self.phase.add_scaled_lift(&g, coeff);
            }
            Gate::H => {
                if !app.controls.is_empty() {
                    return Err(PathSumError::ControlledHadamard);
                }
                for t in &app.targets {
                    let y = self.fresh_path_var();
                    let f_t = std::mem::take(&mut self.outputs[t.0 as usize]);
                    self.phase.add_scaled_lift(&f_t.and(&BoolPoly::var(y)), Dyadic::ONE);
                    self.outputs[t.0 as usize] = BoolPoly::var(y);
                    self.scale += 1;
                }
            }
        }
        Ok(())
    }

    /// Left fold of [`PathSum::apply_gate`] over the identity, reducing
    /// every `reduce_every` gates (0 disables interleaved reduction).
    pub fn of_circuit_with(
        gates: &[GateApp],
        n: usize,
        reduce_every: usize,
        stats: &mut ReduceStats,
    ) -> Result<PathSum, PathSumError> {
        let mut ps = PathSum::identity(n);
        for (i, g) in gates.iter().enumerate() {
            ps.apply_gate(g)?;
            stats.note_path_vars(ps.path_var_count());
            if reduce_every > 0 && (i + 1) % reduce_every == 0 {
                ps = ps.reduce_with(stats);
            }
            if stats.timed_out {
                return Ok(ps);
            }
        }
        Ok(ps.reduce_with(stats))
    }

    /// [`PathSum::of_circuit_with`] at the default reduction interval of 1.
    pub fn of_circuit(gates: &[GateApp], n: usize) -> Result<PathSum, PathSumError> {
        let mut stats = ReduceStats::default();
        PathSum::of_circuit_with(gates, n, 1, &mut stats)
    }

    /// Substitutes 0 for each listed input: monomials containing it vanish.
    pub fn project(&self, zeroed_inputs: &BTreeSet<u32>) -> PathSum {
        let mut out = self.clone();
        for &i in zeroed_inputs {
            assert!((i as usize) < self.n_in, "projected input out of range");
            let v = Var::Input(i);
            out.phase = out.phase.zero_var(v);
            for f in &mut out.outputs {
                *f = f.zero_var(v);
            }
            out.zeroed.insert(i);
        }
        out
    }

    /// Fixpoint of the rewrite rules; see [`reduce`](Self::reduce_with).
    pub fn reduce(&self) -> PathSum {
        let mut stats = ReduceStats::default();
        self.reduce_with(&mut stats)
    }

    /// True when the sum is the identity on its free inputs: no path
    /// variables, zero scale, `f_j = x_j` on free wires and 0 on projected
    /// wires, and a phase that is empty (or constant, when
    /// `up_to_global_phase` is set).
    pub fn is_identity(&self, up_to_global_phase: bool) -> bool {
        if !self.path_vars.is_empty() || self.scale != 0 || self.n_in != self.n_out {
            return false;
        }
        let phase_ok = if up_to_global_phase {
            self.phase.without_constant().is_zero()
        } else {
            self.phase.is_zero()
        };
        if !phase_ok {
            return false;
        }
        self.outputs.iter().enumerate().all(|(i, f)| {
            if self.zeroed.contains(&(i as u32)) {
                f.is_zero()
            } else {
                *f == BoolPoly::var(Var::Input(i as u32))
            }
        })
    }

    /// Canonically renames path variables by first occurrence in a fixed
    /// traversal (outputs in order, then phase terms), producing a form
    /// comparable across sums built with different variable numberings.
    pub fn canonicalize(&self) -> PathSum {
        let mut order: Vec<u32> = Vec::new();
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let visit = |v: Var, order: &mut Vec<u32>, seen: &mut BTreeSet<u32>| {
            if let Var::Path(i) = v {
                if seen.insert(i) {
                    order.push(i);
                }
            }
        };
        for f in &self.outputs {
            for m in f.monomials() {
                for &v in m.vars() {
                    visit(v, &mut order, &mut seen);
                }
            }
        }
        for (m, _) in self.phase.terms() {
            for &v in m.vars() {
                visit(v, &mut order, &mut seen);
            }
        }
        // stragglers (path vars tracked but absent from the structure)
        for &v in &self.path_vars {
            if seen.insert(v) {
                order.push(v);
            }
        }
        let rename = |v: Var| -> Var {
            match v {
                Var::Path(i) => Var::Path(order.iter().position(|&o| o == i).unwrap() as u32),
                other => other,
            }
        };
        PathSum {
            n_in: self.n_in,
            n_out: self.n_out,
            zeroed: self.zeroed.clone(),
            path_vars: (0..order.len() as u32).collect(),
            next_path: order.len() as u32,
            scale: self.scale,
            phase: self.phase.rename(&rename),
            outputs: self.outputs.iter().map(|f| f.rename(&rename)).collect(),
        }
    }

    /// Structural equality after canonical renaming; with
    /// `up_to_global_phase`, a constant phase-term difference is tolerated.
    pub fn equal_syntactic(&self, other: &PathSum, up_to_global_phase: bool) -> bool {
        if self.n_in != other.n_in
            || self.n_out != other.n_out
            || self.zeroed != other.zeroed
            || self.scale != other.scale
        {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        if a.outputs != b.outputs {
            return false;
        }
        if up_to_global_phase {
            a.phase.without_constant() == b.phase.without_constant()
        } else {
            a.phase == b.phase
        }
    }

    /// Dense matrix of the represented map, summing over all path-variable
    /// assignments; rows are outputs, columns enumerate the free inputs.
    /// Intended for oracle cross-checks at small sizes.
    pub fn to_matrix(&self) -> Array2<Complex64> {
        let free: Vec<u32> = self.free_inputs();
        let paths: Vec<u32> = self.path_vars.iter().copied().collect();
        assert!(free.len() + paths.len() <= 24, "path-sum too large to evaluate densely");
        let rows = 1usize << self.n_out;
        let cols = 1usize << free.len();
        let amp = Complex64::from_polar(2f64.powf(-(self.scale as f64) / 2.0), 0.0);
        let mut m = Array2::zeros((rows, cols));
        for col in 0..cols {
            for pbits in 0..(1usize << paths.len()) {
                let assign = |v: Var| -> bool {
                    match v {
                        Var::Input(i) => {
                            if self.zeroed.contains(&i) {
                                false
                            } else {
                                let pos = free.iter().position(|&x| x == i).expect("free input");
                                col & (1 << pos) != 0
                            }
                        }
                        Var::Path(i) => {
                            let pos = paths.iter().position(|&y| y == i).expect("path var");
                            pbits & (1 << pos) != 0
                        }
                    }
                };
                let mut row = 0usize;
                for (j, f) in self.outputs.iter().enumerate() {
                    if f.eval(&assign) {
                        row |= 1 << j;
                    }
                }
                let phase = self.phase.eval(&assign).value() * std::f64::consts::PI;
                m[(row, col)] += amp * Complex64::from_polar(1.0, phase);
            }
        }
        m
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&mut BTreeSet<u32>, &mut i64, &mut PhasePoly, &mut Vec<BoolPoly>) {
        (&mut self.path_vars, &mut self.scale, &mut self.phase, &mut self.outputs)
    }

    pub(crate) fn from_parts(
        n_in: usize,
        n_out: usize,
        zeroed: BTreeSet<u32>,
        path_vars: BTreeSet<u32>,
        next_path: u32,
        scale: i64,
        phase: PhasePoly,
        outputs: Vec<BoolPoly>,
    ) -> PathSum {
        PathSum { n_in, n_out, zeroed, path_vars, next_path, scale, phase, outputs }
    }

    pub(crate) fn next_path_id(&self) -> u32 {
        self.next_path
    }
}

impl fmt::Display for PathSum {
    /// Deterministic text rendering
    /// `2^{-s/2} Σ_{y...} e^{iπ(...)} |...⟩`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale != 0 {
            write!(f, "2^{{-{}/2}} ", self.scale)?;
        }
        if !self.path_vars.is_empty() {
            write!(f, "Σ_{{")?;
            for (i, y) in self.path_vars.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", Var::Path(*y))?;
            }
            write!(f, "}} ")?;
        }
        if !self.phase.is_zero() {
            write!(f, "e^{{iπ({})}} ", self.phase)?;
        }
        write!(f, "|")?;
        for (i, out) in self.outputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{out}")?;
        }
        write!(f, "⟩")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateApp, WireId};
    use crate::oracle::{matrix_distance, simulate_unitary};

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    #[test]
    fn identity_examples() {
        let id0 = PathSum::identity(0);
        assert_eq!(id0.to_matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        let id1 = PathSum::identity(1);
        assert_eq!(*id1.output(0), BoolPoly::var(Var::Input(0)));
        let id3 = PathSum::identity(3);
        let eye: Array2<Complex64> = Array2::eye(8);
        assert!(matrix_distance(&id3.to_matrix(), &eye) < 1e-12);
    }

    #[test]
    fn hadamard_generator() {
        let mut ps = PathSum::identity(1);
        ps.apply_gate(&GateApp::single(Gate::H, q(0))).unwrap();
        let oracle = simulate_unitary(&[GateApp::single(Gate::H, q(0))], 1).unwrap();
        assert!(matrix_distance(&ps.to_matrix(), &oracle) < 1e-12);
        assert_eq!(ps.scale(), 1);
        assert_eq!(ps.path_var_count(), 1);
    }

    #[test]
    fn cnot_generator() {
        let mut ps = PathSum::identity(2);
        ps.apply_gate(&GateApp::controlled(Gate::X, vec![q(0)], q(1))).unwrap();
        let expect = BoolPoly::var(Var::Input(1)).xor(&BoolPoly::var(Var::Input(0)));
        assert_eq!(*ps.output(1), expect);
        let oracle = simulate_unitary(&[GateApp::controlled(Gate::X, vec![q(0)], q(1))], 2).unwrap();
        assert!(matrix_distance(&ps.to_matrix(), &oracle) < 1e-12);
    }

    #[test]
    fn pauli_z_generator() {
        let mut ps = PathSum::identity(1);
        ps.apply_gate(&GateApp::single(Gate::rz(1, 1), q(0))).unwrap();
        assert_eq!(ps.phase().coeff(&Monomial::var(Var::Input(0))), Dyadic::ONE);
        let oracle = simulate_unitary(&[GateApp::single(Gate::rz(1, 1), q(0))], 1).unwrap();
        assert!(matrix_distance(&ps.to_matrix(), &oracle) < 1e-12);
    }

    #[test]
    fn controlled_t_generator() {
        let mut ps = PathSum::identity(2);
        ps.apply_gate(&GateApp::controlled(Gate::rz(1, 3), vec![q(0)], q(1))).unwrap();
        let m = Monomial::from_vars(vec![Var::Input(0), Var::Input(1)]);
        assert_eq!(ps.phase().coeff(&m), Dyadic::new(1, 2));
        let oracle =
            simulate_unitary(&[GateApp::controlled(Gate::rz(1, 3), vec![q(0)], q(1))], 2).unwrap();
        assert!(matrix_distance(&ps.to_matrix(), &oracle) < 1e-12);
    }

    #[test]
    fn controlled_hadamard_rejected() {
        let mut ps = PathSum::identity(2);
        let err = ps.apply_gate(&GateApp::controlled(Gate::H, vec![q(0)], q(1))).unwrap_err();
        assert_eq!(err, PathSumError::ControlledHadamard);
    }

    #[test]
    fn wire_out_of_range_rejected() {
        let mut ps = PathSum::identity(1);
        let err = ps.apply_gate(&GateApp::single(Gate::X, q(3))).unwrap_err();
        assert_eq!(err, PathSumError::WireOutOfRange(3, 1));
    }

    #[test]
    fn all_kernel_gates_match_oracle_on_two_wires() {
        let gates = [
            GateApp::single(Gate::H, q(0)),
            GateApp::single(Gate::X, q(1)),
            GateApp::single(Gate::rz(1, 2), q(0)),
            GateApp::single(Gate::rz(-1, 3), q(1)),
            GateApp::single(Gate::ph(1, 2), q(0)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
            GateApp::controlled(Gate::rz(1, 1), vec![q(1)], q(0)),
            GateApp::controlled(Gate::rz(3, 3), vec![q(0)], q(1)),
        ];
        for g in &gates {
            let mut ps = PathSum::identity(2);
            ps.apply_gate(g).unwrap();
            let oracle = simulate_unitary(std::slice::from_ref(g), 2).unwrap();
            assert!(
                matrix_distance(&ps.to_matrix(), &oracle) < 1e-12,
                "pathsum disagrees with oracle on {g}"
            );
        }
    }

    #[test]
    fn project_zeroes_inputs() {
        let ps = PathSum::identity(2);
        let projected = ps.project(&BTreeSet::from([1]));
        assert_eq!(*projected.output(0), BoolPoly::var(Var::Input(0)));
        assert!(projected.output(1).is_zero());
        // matrix is the first column block of the identity
        let m = projected.to_matrix();
        assert_eq!(m.dim(), (4, 2));
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn projection_commutes_with_oracle_columns() {
        let gates = vec![
            GateApp::single(Gate::H, q(0)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
            GateApp::single(Gate::rz(1, 3), q(1)),
        ];
        let ps = PathSum::of_circuit(&gates, 2).unwrap();
        let full = ps.to_matrix();
        let projected = ps.project(&BTreeSet::from([1])).to_matrix();
        for row in 0..4 {
            for col in 0..2 {
                // zeroed input 1 fixes its bit to 0 in the column index
                assert!((projected[(row, col)] - full[(row, col)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn display_format() {
        let mut ps = PathSum::identity(1);
        ps.apply_gate(&GateApp::single(Gate::H, q(0))).unwrap();
        assert_eq!(format!("{ps}"), "2^{-1/2} Σ_{y1} e^{iπ(x1·y1)} |y1⟩");
        assert_eq!(format!("{}", PathSum::identity(2)), "|x1, x2⟩");
    }
}
