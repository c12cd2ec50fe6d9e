//! The path-sum rewrite engine.
//!
//! Three rules, each preserving the represented operator exactly and each
//! strictly decreasing the number of path variables, so reduction always
//! terminates:
//!
//! - **Elim** — a path variable absent from phase and outputs contributes a
//!   bare factor `Σ_y 1 = 2`: drop it, `s -= 2`.
//! - **HH** — `phase = y·(y' + Q) + R` with `y` appearing nowhere else and
//!   `y'` a distinct path variable not occurring in `Q`: the sum over `y`
//!   forces `y' = Q`; substitute `y' <- Q` in `R` and the outputs, drop both
//!   variables, `s -= 2`.
//! - **ω** — `phase = (1/2)·y + y·Q + R` (or with 3/2 in place of 1/2),
//!   `y` appearing nowhere else: `Σ_y i^y(-1)^(yQ)` is `sqrt(2)` times a
//!   phase; drop `y`, `s -= 1`, and fold the phase into the polynomial.
//!
//! The rule set is complete for Clifford circuits; on Clifford+T it may
//! stall, which callers surface as an inconclusive answer, never a wrong
//! one.

use super::poly::{BoolPoly, Dyadic, Monomial, PhasePoly, Var};
use super::PathSum;

/// Which rewrite rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Elim,
    HH,
    Omega,
}

/// Counters threaded through reduction; `rule_firings` feeds the CLI
/// metrics, `path_var_peak` tracks the largest live variable count seen.
/// Setting `deadline` makes long reductions stop early with `timed_out`
/// raised; the partially reduced sum surfaces as an inconclusive answer.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReduceStats {
    pub rule_firings: u64,
    pub path_var_peak: usize,
    pub elim: u64,
    pub hh: u64,
    pub omega: u64,
    pub deadline: Option<std::time::Instant>,
    pub timed_out: bool,
}

impl ReduceStats {
    pub fn note_path_vars(&mut self, n: usize) {
        self.path_var_peak = self.path_var_peak.max(n);
    }

    fn note_rule(&mut self, rule: RuleKind) {
        self.rule_firings += 1;
        match rule {
            RuleKind::Elim => self.elim += 1,
            RuleKind::HH => self.hh += 1,
            RuleKind::Omega => self.omega += 1,
        }
    }

    pub fn merge(&mut self, other: &ReduceStats) {
        self.rule_firings += other.rule_firings;
        self.elim += other.elim;
        self.hh += other.hh;
        self.omega += other.omega;
        self.path_var_peak = self.path_var_peak.max(other.path_var_peak);
        self.timed_out |= other.timed_out;
    }
}

/// The phase terms containing `y`, split into the coefficient of the bare
/// monomial `{y}` and the Boolean polynomial of the cofactors.
struct YSection {
    /// Coefficient of the singleton monomial {y}.
    singleton: Dyadic,
    /// XOR of the cofactor monomials of the non-singleton terms (each with
    /// its coefficient required to be 1 for the rules to apply).
    cofactors: BoolPoly,
    /// True when every non-singleton term containing y has coefficient 1.
    cofactors_integral: bool,
}

fn y_section(phase: &PhasePoly, y: Var) -> YSection {
    let mut singleton = Dyadic::ZERO;
    let mut cofactors = BoolPoly::zero();
    let mut cofactors_integral = true;
    for (m, c) in phase.terms() {
        if !m.contains(y) {
            continue;
        }
        if m.degree() == 1 {
            singleton = c;
        } else if c == Dyadic::ONE {
            cofactors.toggle(m.without(y));
        } else {
            cofactors_integral = false;
        }
    }
    YSection { singleton, cofactors, cofactors_integral }
}

fn output_vars(outputs: &[BoolPoly]) -> std::collections::BTreeSet<Var> {
    outputs.iter().flat_map(|f| f.variables()).collect()
}

impl PathSum {
    /// Attempts a single rule firing; returns the rule that applied.
    /// Deterministic: rules are tried in the order Elim, HH, ω, each over
    /// path variables in ascending id order (HH picks the smallest eligible
    /// partner variable).
    pub fn reduce_step(&mut self) -> Option<RuleKind> {
        let out_vars = output_vars(&self.outputs);
        let ys: Vec<u32> = self.path_vars().collect();

        // Elim
        for &y in &ys {
            let v = Var::Path(y);
            if !out_vars.contains(&v) && !self.phase.contains_var(v) {
                let (path_vars, scale, _, _) = self.parts_mut();
                path_vars.remove(&y);
                *scale -= 2;
                return Some(RuleKind::Elim);
            }
        }

        // HH
        for &y in &ys {
            let v = Var::Path(y);
            if out_vars.contains(&v) {
                continue;
            }
            let section = y_section(&self.phase, v);
            if !section.cofactors_integral {
                continue;
            }
            // an integer singleton coefficient folds into the linear form as
            // the constant 1; fractional singletons belong to omega
            let mut linear = section.cofactors.clone();
            match section.singleton {
                d if d.is_zero() => {}
                d if d == Dyadic::ONE => linear.toggle(Monomial::one()),
                _ => continue,
            }
            // pick smallest path variable occurring exactly once in the
            // linear form, as a singleton monomial
            let mut partner: Option<u32> = None;
            for m in linear.monomials() {
                if m.degree() == 1 {
                    if let Var::Path(p) = m.vars()[0] {
                        let occurrences =
                            linear.monomials().filter(|mm| mm.contains(Var::Path(p))).count();
                        if occurrences == 1 && p != y && partner.map_or(true, |b| p < b) {
                            partner = Some(p);
                        }
                    }
                }
            }
            let Some(p) = partner else { continue };
            let yp = Var::Path(p);
            let mut q = linear;
            q.toggle(Monomial::var(yp));

            let mut phase = self.phase.clone();
            phase.extract_terms_with(v);
            let phase = phase.substitute(yp, &q);
            let outputs: Vec<BoolPoly> =
                self.outputs.iter().map(|f| f.substitute(yp, &q)).collect();
            let (path_vars, scale, phase_ref, outputs_ref) = self.parts_mut();
            path_vars.remove(&y);
            path_vars.remove(&p);
            *scale -= 2;
            *phase_ref = phase;
            *outputs_ref = outputs;
            return Some(RuleKind::HH);
        }

        // omega
        for &y in &ys {
            let v = Var::Path(y);
            if out_vars.contains(&v) {
                continue;
            }
            let section = y_section(&self.phase, v);
            if !section.cofactors_integral || section.singleton.denom_exp() != 1 {
                continue;
            }
            let q = section.cofactors;
            let mut phase = self.phase.clone();
            phase.extract_terms_with(v);
            match section.singleton.num() {
                1 => {
                    // sum_y e^{i\pi(y/2 + yQ)} = sqrt2 · e^{i\pi(1/4 - Q/2)}
                    phase.add_constant(Dyadic::new(1, 2));
                    phase.add_scaled_lift(&q, Dyadic::new(-1, 1));
                }
                3 => {
                    // sum_y e^{i\pi(3y/2 + yQ)} = sqrt2 · e^{i\pi(7/4 + Q/2)}
                    phase.add_constant(Dyadic::new(7, 2));
                    phase.add_scaled_lift(&q, Dyadic::new(1, 1));
                }
                _ => unreachable!("normalised dyadic with denom_exp 1"),
            }
            let (path_vars, scale, phase_ref, _) = self.parts_mut();
            path_vars.remove(&y);
            *scale -= 1;
            *phase_ref = phase;
            return Some(RuleKind::Omega);
        }

        None
    }

    /// Applies [`reduce_step`](Self::reduce_step) to a fixpoint (or until
    /// the deadline passes).
    pub fn reduce_with(&self, stats: &mut ReduceStats) -> PathSum {
        let mut ps = self.clone();
        stats.note_path_vars(ps.path_var_count());
        loop {
            if let Some(deadline) = stats.deadline {
                if std::time::Instant::now() >= deadline {
                    stats.timed_out = true;
                    return ps;
                }
            }
            match ps.reduce_step() {
                Some(rule) => stats.note_rule(rule),
                None => return ps,
            }
        }
    }
}
