//! Separation: syntactic factorisation of a reduced path-sum into a factor
//! over kept outputs and a factor over discarded outputs.
//!
//! Path variables are grouped into connected components of the interaction
//! graph (variables co-occurring in a phase monomial or in one output
//! polynomial are joined). A component may feed only kept outputs or only
//! discarded outputs; anything spanning the cut makes the sum inseparable
//! and the caller must treat the check as inconclusive.
//!
//! A successful split alone is not enough: tracing out the discarded factor
//! leaves exactly the kept factor only when the discarded state is the same
//! unit vector for every input. That is verified symbolically by reducing
//! the inner product `<D(x)|D(x'')>` over two independent copies of the
//! inputs down to the scalar 1; output agreement between the copies is
//! encoded with one extra path variable per discarded output.

use std::collections::{BTreeMap, BTreeSet};

use super::poly::{BoolPoly, Dyadic, Monomial, PhasePoly, Var};
use super::reduce::ReduceStats;
use super::PathSum;

/// Successful factorisation.
#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Factor over the non-discarded outputs, in ascending original order.
    pub kept: PathSum,
    /// Original output indices of the kept factor's outputs.
    pub kept_positions: Vec<usize>,
    /// Factor over the discarded outputs.
    pub discarded: PathSum,
    /// True when the discarded factor was proven to be the same unit vector
    /// for every input assignment.
    pub residual_ok: bool,
}

/// Why a separation attempt failed; callers map any failure to an
/// inconclusive verdict, never to non-equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationFailure {
    /// A path-variable component feeds both kept and discarded outputs.
    EntangledAcrossCut,
    /// The inner-product reduction did not reach the constant scalar 1.
    ResidualCheckStalled,
}

#[derive(Debug, Clone)]
pub enum Separation {
    Separated(SeparationResult),
    Fail(SeparationFailure),
}

/// Union-find over path-variable ids.
struct Components {
    parent: BTreeMap<u32, u32>,
}

impl Components {
    fn new(vars: impl Iterator<Item = u32>) -> Self {
        Components { parent: vars.map(|v| (v, v)).collect() }
    }

    fn find(&mut self, v: u32) -> u32 {
        let p = self.parent[&v];
        if p == v {
            return v;
        }
        let root = self.find(p);
        self.parent.insert(v, root);
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent.insert(ra, rb);
        }
    }
}

fn path_vars_of(monomial: &Monomial) -> impl Iterator<Item = u32> + '_ {
    monomial.vars().iter().filter_map(|v| match v {
        Var::Path(i) => Some(*i),
        _ => None,
    })
}

/// Splits `ps` (assumed reduced) on the given discarded output indices.
pub fn separate(ps: &PathSum, discarded: &BTreeSet<usize>, stats: &mut ReduceStats) -> Separation {
    for &d in discarded {
        assert!(d < ps.n_out(), "discarded output index out of range");
    }
    if discarded.is_empty() {
        let empty = PathSum::from_parts(
            ps.n_in(),
            0,
            ps.zeroed().clone(),
            BTreeSet::new(),
            0,
            0,
            PhasePoly::zero(),
            Vec::new(),
        );
        return Separation::Separated(SeparationResult {
            kept: ps.clone(),
            kept_positions: (0..ps.n_out()).collect(),
            discarded: empty,
            residual_ok: true,
        });
    }

    // connected components of the interaction graph
    let mut comps = Components::new(ps.path_vars());
    for (m, _) in ps.phase().terms() {
        let vars: Vec<u32> = path_vars_of(m).collect();
        for pair in vars.windows(2) {
            comps.union(pair[0], pair[1]);
        }
    }
    for f in ps.outputs() {
        let vars: Vec<u32> = f
            .variables()
            .into_iter()
            .filter_map(|v| match v {
                Var::Path(i) => Some(i),
                _ => None,
            })
            .collect();
        for pair in vars.windows(2) {
            comps.union(pair[0], pair[1]);
        }
    }

    // classify components by the outputs they feed
    #[derive(Default, Clone, Copy, PartialEq)]
    struct Touch {
        kept: bool,
        discarded: bool,
    }
    let mut touch: BTreeMap<u32, Touch> = BTreeMap::new();
    for (idx, f) in ps.outputs().iter().enumerate() {
        for v in f.variables() {
            if let Var::Path(i) = v {
                let root = comps.find(i);
                let t = touch.entry(root).or_default();
                if discarded.contains(&idx) {
                    t.discarded = true;
                } else {
                    t.kept = true;
                }
            }
        }
    }
    if touch.values().any(|t| t.kept && t.discarded) {
        return Separation::Fail(SeparationFailure::EntangledAcrossCut);
    }
    let mut discarded_vars: BTreeSet<u32> = BTreeSet::new();
    for y in ps.path_vars() {
        let root = comps.find(y);
        // components feeding no output stay with the kept factor, like
        // pure-input phase terms
        if touch.get(&root).is_some_and(|t| t.discarded) {
            discarded_vars.insert(y);
        }
    }

    // split phase monomials: a term goes to the discarded factor exactly
    // when it mentions a discarded-component path variable
    let mut phase_kept = PhasePoly::zero();
    let mut phase_disc = PhasePoly::zero();
    for (m, c) in ps.phase().terms() {
        if path_vars_of(m).any(|y| discarded_vars.contains(&y)) {
            phase_disc.add_term(m.clone(), c);
        } else {
            phase_kept.add_term(m.clone(), c);
        }
    }

    let kept_positions: Vec<usize> = (0..ps.n_out()).filter(|i| !discarded.contains(i)).collect();
    let disc_positions: Vec<usize> = discarded.iter().copied().collect();
    let outputs_kept: Vec<BoolPoly> =
        kept_positions.iter().map(|&i| ps.output(i).clone()).collect();
    let outputs_disc: Vec<BoolPoly> =
        disc_positions.iter().map(|&i| ps.output(i).clone()).collect();

    // the discarded factor's scale is fixed by its own normalisation,
    // solved from the inner-product reduction below
    let residual_scale = match residual_inner_product_scale(
        ps,
        &outputs_disc,
        &phase_disc,
        &discarded_vars,
        stats,
    ) {
        Some(s) => s,
        None => return Separation::Fail(SeparationFailure::ResidualCheckStalled),
    };
    let s_disc = residual_scale;
    let s_kept = ps.scale() - s_disc;
    if s_disc < 0 || s_kept < 0 {
        return Separation::Fail(SeparationFailure::ResidualCheckStalled);
    }

    let kept_vars: BTreeSet<u32> = ps.path_vars().filter(|y| !discarded_vars.contains(y)).collect();
    let kept = PathSum::from_parts(
        ps.n_in(),
        outputs_kept.len(),
        ps.zeroed().clone(),
        kept_vars,
        ps.next_path_id(),
        s_kept,
        phase_kept,
        outputs_kept,
    );
    let discarded_factor = PathSum::from_parts(
        ps.n_in(),
        outputs_disc.len(),
        ps.zeroed().clone(),
        discarded_vars,
        ps.next_path_id(),
        s_disc,
        phase_disc,
        outputs_disc,
    );
    Separation::Separated(SeparationResult {
        kept,
        kept_positions,
        discarded: discarded_factor,
        residual_ok: true,
    })
}

/// Reduces `<D(x)|D(x'')>` over independent input copies `x`, `x''` with the
/// discarded factor taken at scale 0, and returns the scale `s_d` that makes
/// the inner product the constant 1 — i.e. proves `D` is one unit vector for
/// every input. `None` when the reduction stalls, keeps input dependence, or
/// leaves a nonzero phase.
fn residual_inner_product_scale(
    ps: &PathSum,
    outputs_disc: &[BoolPoly],
    phase_disc: &PhasePoly,
    discarded_vars: &BTreeSet<u32>,
    stats: &mut ReduceStats,
) -> Option<i64> {
    let n_in = ps.n_in() as u32;
    let off_copy = ps.next_path_id();
    let off_indicator = 2 * off_copy;

    let copy_inputs = |v: Var| -> Var {
        match v {
            Var::Input(i) => Var::Input(i + n_in),
            Var::Path(i) => Var::Path(i + off_copy),
        }
    };

    // conj(D(x)) · D(x''): negated phase on the original variables plus the
    // phase on fresh copies of every input and path variable
    let mut phase = PhasePoly::zero();
    for (m, c) in phase_disc.terms() {
        phase.add_term(m.clone(), c.neg());
    }
    phase.add_assign(&phase_disc.rename(&copy_inputs));

    let mut path_vars: BTreeSet<u32> = discarded_vars.clone();
    path_vars.extend(discarded_vars.iter().map(|y| y + off_copy));

    // one indicator variable per discarded output enforcing agreement of
    // the two copies: (1/2) Σ_z e^{iπ z (g(x,y) ⊕ g(x'',y'))}
    for (j, g) in outputs_disc.iter().enumerate() {
        let z = off_indicator + j as u32;
        path_vars.insert(z);
        let mismatch = g.clone().xor(&g.rename(&copy_inputs));
        phase.add_scaled_lift(&mismatch.and(&BoolPoly::var(Var::Path(z))), Dyadic::ONE);
    }

    let mut zeroed = ps.zeroed().clone();
    zeroed.extend(ps.zeroed().iter().map(|i| i + n_in));
    let g_sum = PathSum::from_parts(
        2 * ps.n_in(),
        0,
        zeroed,
        path_vars,
        off_indicator + outputs_disc.len() as u32,
        2 * outputs_disc.len() as i64,
        phase,
        Vec::new(),
    );
    let reduced = g_sum.reduce_with(stats);
    if reduced.path_var_count() != 0 || !reduced.phase().is_zero() {
        return None;
    }
    // <D|D> = 2^{-s_d} · 2^{-t/2} = 1
    let t = reduced.scale();
    if t > 0 || t % 2 != 0 {
        return None;
    }
    Some(-t / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateApp, WireId};
    use crate::oracle::matrix_distance;
    use ndarray::Array2;
    use num_complex::Complex64;

    fn q(i: u32) -> WireId {
        WireId(i)
    }

    fn separate_simple(ps: &PathSum, discarded: &[usize]) -> Separation {
        let mut stats = ReduceStats::default();
        separate(ps, &discarded.iter().copied().collect(), &mut stats)
    }

    /// Checks kept (x) discarded == original entrywise.
    fn assert_factorisation(ps: &PathSum, result: &SeparationResult, discarded: &BTreeSet<usize>) {
        let full = ps.to_matrix();
        let k = result.kept.to_matrix();
        let d = result.discarded.to_matrix();
        let kept_pos = &result.kept_positions;
        let disc_pos: Vec<usize> = discarded.iter().copied().collect();
        let cols = full.ncols();
        assert_eq!(k.ncols(), cols);
        assert_eq!(d.ncols(), cols);
        for col in 0..cols {
            for row in 0..full.nrows() {
                let mut rk = 0usize;
                for (pos, &orig) in kept_pos.iter().enumerate() {
                    if row & (1 << orig) != 0 {
                        rk |= 1 << pos;
                    }
                }
                let mut rd = 0usize;
                for (pos, &orig) in disc_pos.iter().enumerate() {
                    if row & (1 << orig) != 0 {
                        rd |= 1 << pos;
                    }
                }
                let expect = k[(rk, col)] * d[(rd, col)];
                let got = full[(row, col)];
                assert!(
                    (expect - got).norm() < 1e-12,
                    "entry ({row},{col}): {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn empty_discard_returns_input() {
        let ps = PathSum::of_circuit(&[GateApp::single(Gate::H, q(0))], 1).unwrap();
        match separate_simple(&ps, &[]) {
            Separation::Separated(r) => {
                assert!(r.residual_ok);
                assert!(r.kept.equal_syntactic(&ps, false));
            }
            Separation::Fail(_) => panic!("empty discard must separate"),
        }
    }

    #[test]
    fn teleport_shaped_sum_separates() {
        // H a1; CX a1->a2; CX in->a1; H in; CX a1->a2; CZ in->a2, with the
        // two ancilla inputs projected to zero: the kept wire carries x0
        let gates = vec![
            GateApp::single(Gate::H, q(1)),
            GateApp::controlled(Gate::X, vec![q(1)], q(2)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
            GateApp::single(Gate::H, q(0)),
            GateApp::controlled(Gate::X, vec![q(1)], q(2)),
            GateApp::controlled(Gate::rz(1, 1), vec![q(0)], q(2)),
        ];
        let ps = PathSum::of_circuit(&gates, 3)
            .unwrap()
            .project(&BTreeSet::from([1, 2]))
            .reduce();
        let discarded = BTreeSet::from([0usize, 1usize]);
        match separate_simple(&ps, &[0, 1]) {
            Separation::Separated(r) => {
                assert!(r.residual_ok);
                assert_eq!(r.kept_positions, vec![2]);
                assert_eq!(*r.kept.output(0), BoolPoly::var(Var::Input(0)));
                assert_eq!(r.kept.scale(), 0);
                assert!(r.kept.phase().is_zero());
                assert_factorisation(&ps, &r, &discarded);
            }
            Separation::Fail(f) => panic!("teleport sum must separate: {f:?}"),
        }
    }

    #[test]
    fn bell_pair_discard_half_fails() {
        let gates = vec![
            GateApp::single(Gate::H, q(0)),
            GateApp::controlled(Gate::X, vec![q(0)], q(1)),
        ];
        let ps = PathSum::of_circuit(&gates, 2).unwrap();
        match separate_simple(&ps, &[1]) {
            Separation::Fail(SeparationFailure::EntangledAcrossCut) => {}
            other => panic!("expected entanglement failure, got {other:?}"),
        }
    }

    #[test]
    fn input_dependent_discarded_state_fails_residual_check() {
        // T on the discarded wire: D(x) = e^{i pi x/4}|x> depends on x even
        // though it is unit norm for each input
        let gates = vec![GateApp::single(Gate::rz(1, 3), q(0))];
        let ps = PathSum::of_circuit(&gates, 1).unwrap();
        match separate_simple(&ps, &[0]) {
            Separation::Fail(SeparationFailure::ResidualCheckStalled) => {}
            other => panic!("expected residual failure, got {other:?}"),
        }
    }

    #[test]
    fn projected_constant_ancilla_separates() {
        // wire 1 projected to |0>, never touched: D = |0> constant
        let gates = vec![GateApp::single(Gate::H, q(0))];
        let ps = PathSum::of_circuit(&gates, 2).unwrap().project(&BTreeSet::from([1])).reduce();
        let discarded = BTreeSet::from([1usize]);
        match separate_simple(&ps, &[1]) {
            Separation::Separated(r) => {
                assert!(r.residual_ok);
                assert_eq!(r.discarded.scale(), 0);
                assert!(r.discarded.output(0).is_zero());
                assert_factorisation(&ps, &r, &discarded);
            }
            Separation::Fail(f) => panic!("constant ancilla must separate: {f:?}"),
        }
    }

    #[test]
    fn uniform_plus_state_on_discarded_wire_separates() {
        // H on a projected wire then discard it: D = |+>, constant
        let gates = vec![GateApp::single(Gate::H, q(1)), GateApp::single(Gate::X, q(0))];
        let ps = PathSum::of_circuit(&gates, 2).unwrap().project(&BTreeSet::from([1])).reduce();
        let discarded = BTreeSet::from([1usize]);
        match separate_simple(&ps, &[1]) {
            Separation::Separated(r) => {
                assert!(r.residual_ok);
                assert_eq!(r.discarded.scale(), 1);
                assert_eq!(r.kept.scale(), 0);
                assert_factorisation(&ps, &r, &discarded);
            }
            Separation::Fail(f) => panic!("|+> ancilla must separate: {f:?}"),
        }
    }

    #[test]
    fn identity_matrix_when_kept_everything() {
        let ps = PathSum::identity(2);
        let m = ps.to_matrix();
        let eye: Array2<Complex64> = Array2::eye(4);
        assert!(matrix_distance(&m, &eye) < 1e-12);
    }
}
