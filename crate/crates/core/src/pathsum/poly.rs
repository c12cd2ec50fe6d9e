//! Polynomial arithmetic underlying path-sums: multilinear Boolean
//! polynomials (XOR of AND monomials) and phase polynomials with dyadic
//! coefficients taken modulo 2.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A variable of a path-sum: either a circuit input or a path variable
/// introduced by a Hadamard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Input(u32),
    Path(u32),
}

impl Var {
    fn rank(self) -> (u8, u32) {
        match self {
            Var::Input(i) => (0, i),
            Var::Path(i) => (1, i),
        }
    }

    pub fn is_path(self) -> bool {
        matches!(self, Var::Path(_))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Input(i) => write!(f, "x{}", i + 1),
            Var::Path(i) => write!(f, "y{}", i + 1),
        }
    }
}

/// A multilinear monomial: the AND of a sorted, duplicate-free set of
/// variables. The empty monomial denotes the constant 1.
///
/// Ordered degree-first so that monomial order does not depend on how path
/// variables happen to be numbered more than necessary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[Var]>);

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial(Box::new([]))
    }

    pub fn var(v: Var) -> Self {
        Monomial(Box::new([v]))
    }

    pub fn from_vars(mut vars: Vec<Var>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        Monomial(vars.into_boxed_slice())
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Multilinear product: union of the variable sets.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        Monomial::from_vars(out)
    }

    pub fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&w| w != v).collect())
    }

    pub fn eval(&self, assignment: &dyn Fn(Var) -> bool) -> bool {
        self.0.iter().all(|&v| assignment(v))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Multilinear Boolean polynomial in algebraic normal form: the XOR of its
/// monomials. Canonical by construction (set of monomials, XOR-cancelled).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoolPoly {
    monomials: BTreeSet<Monomial>,
}

impl BoolPoly {
    pub fn zero() -> Self {
        BoolPoly::default()
    }

    pub fn one() -> Self {
        BoolPoly { monomials: BTreeSet::from([Monomial::one()]) }
    }

    pub fn var(v: Var) -> Self {
        BoolPoly { monomials: BTreeSet::from([Monomial::var(v)]) }
    }

    pub fn from_monomials(monos: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = BoolPoly::zero();
        for m in monos {
            p.toggle(m);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// XOR in a single monomial.
    pub fn toggle(&mut self, m: Monomial) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    pub fn xor_assign(&mut self, other: &BoolPoly) {
        for m in &other.monomials {
            self.toggle(m.clone());
        }
    }

    pub fn xor(mut self, other: &BoolPoly) -> BoolPoly {
        self.xor_assign(other);
        self
    }

    /// Multilinear product (pointwise AND on {0,1} assignments).
    pub fn and(&self, other: &BoolPoly) -> BoolPoly {
        let mut out = BoolPoly::zero();
        for a in &self.monomials {
            for b in &other.monomials {
                out.toggle(a.mul(b));
            }
        }
        out
    }

    pub fn and_monomial(&self, m: &Monomial) -> BoolPoly {
        let mut out = BoolPoly::zero();
        for a in &self.monomials {
            out.toggle(a.mul(m));
        }
        out
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.monomials.iter().any(|m| m.contains(v))
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.monomials.iter().flat_map(|m| m.vars().iter().copied()).collect()
    }

    /// Substitutes the polynomial `value` for the variable `v`.
    pub fn substitute(&self, v: Var, value: &BoolPoly) -> BoolPoly {
        let mut out = BoolPoly::zero();
        for m in &self.monomials {
            if m.contains(v) {
                out.xor_assign(&value.and_monomial(&m.without(v)));
            } else {
                out.toggle(m.clone());
            }
        }
        out
    }

    /// Substitutes the constant 0 for `v`: monomials containing it vanish.
    pub fn zero_var(&self, v: Var) -> BoolPoly {
        BoolPoly {
            monomials: self.monomials.iter().filter(|m| !m.contains(v)).cloned().collect(),
        }
    }

    pub fn eval(&self, assignment: &dyn Fn(Var) -> bool) -> bool {
        let mut acc = false;
        for m in &self.monomials {
            acc ^= m.eval(assignment);
        }
        acc
    }

    /// Renames variables through `f`.
    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> BoolPoly {
        BoolPoly::from_monomials(
            self.monomials.iter().map(|m| Monomial::from_vars(m.vars().iter().map(|&v| f(v)).collect())),
        )
    }

    /// An assignment on which the polynomial evaluates to 1, if any.
    ///
    /// Setting exactly the variables of a minimal-degree monomial makes that
    /// monomial the only one that fires, so nonzero polynomials always yield
    /// a witness.
    pub fn satisfying_assignment(&self) -> Option<BTreeSet<Var>> {
        let m = self.monomials.iter().min_by_key(|m| m.degree())?;
        Some(m.vars().iter().copied().collect())
    }
}

impl fmt::Display for BoolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, "⊕")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// A dyadic rational modulo 2: `num / 2^denom_exp` with
/// `0 <= num < 2^(denom_exp+1)` and `num` odd (or the canonical zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    denom_exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, denom_exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, denom_exp: 0 };

    /// `num / 2^denom_exp` reduced modulo 2 and to lowest terms.
    pub fn new(num: i64, denom_exp: u32) -> Self {
        let modulus = 1i128 << (denom_exp + 1);
        let mut n = (num as i128).rem_euclid(modulus) as u64;
        let mut k = denom_exp;
        while n != 0 && n % 2 == 0 && k > 0 {
            n /= 2;
            k -= 1;
        }
        if n == 0 {
            Dyadic::ZERO
        } else {
            Dyadic { num: n, denom_exp: k }
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn denom_exp(self) -> u32 {
        self.denom_exp
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_integer(self) -> bool {
        self.denom_exp == 0
    }

    pub fn add(self, other: Dyadic) -> Dyadic {
        let k = self.denom_exp.max(other.denom_exp);
        let a = (self.num as i64) << (k - self.denom_exp);
        let b = (other.num as i64) << (k - other.denom_exp);
        Dyadic::new(a + b, k)
    }

    pub fn neg(self) -> Dyadic {
        Dyadic::new(-(self.num as i64), self.denom_exp)
    }

    /// Multiplies by `(-2)^t`; vanishes mod 2 once the power of two
    /// outgrows the denominator.
    pub fn mul_pow_neg2(self, t: u32) -> Dyadic {
        if self.is_zero() {
            return self;
        }
        if t > self.denom_exp {
            // num odd: num * 2^(t-k) is even for t > k, hence 0 mod 2
            return Dyadic::ZERO;
        }
        let sign = if t % 2 == 0 { 1 } else { -1 };
        Dyadic::new(sign * self.num as i64, self.denom_exp - t)
    }

    pub fn half(self) -> Dyadic {
        Dyadic::new(self.num as i64, self.denom_exp + 1)
    }

    /// Value in [0, 2).
    pub fn value(self) -> f64 {
        self.num as f64 / 2f64.powi(self.denom_exp as i32)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom_exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.denom_exp)
        }
    }
}

/// Phase polynomial: a multilinear polynomial with dyadic coefficients
/// modulo 2, read as the exponent in `exp(i*pi*P)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhasePoly {
    terms: BTreeMap<Monomial, Dyadic>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        PhasePoly::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Dyadic)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Dyadic {
        self.terms.get(m).copied().unwrap_or(Dyadic::ZERO)
    }

    pub fn constant(&self) -> Dyadic {
        self.coeff(&Monomial::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Dyadic) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                let v = e.get().add(c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &PhasePoly) {
        for (m, c) in other.terms() {
            self.add_term(m.clone(), c);
        }
    }

    pub fn add_constant(&mut self, c: Dyadic) {
        self.add_term(Monomial::one(), c);
    }

    /// Adds `c * lift(b)`, the arithmetic multilinear extension of the
    /// Boolean polynomial `b` scaled by `c`.
    ///
    /// `lift(m1 ⊕ ... ⊕ mn)` expands by inclusion-exclusion into
    /// `sum over nonempty S of (-2)^(|S|-1) * prod(S)`; scaled by `c = u/2^k`
    /// every subset larger than `k+1` vanishes modulo 2, which keeps the
    /// expansion finite and small for the coefficients circuits produce.
    pub fn add_scaled_lift(&mut self, b: &BoolPoly, c: Dyadic) {
        if c.is_zero() || b.is_zero() {
            return;
        }
        let monos: Vec<&Monomial> = b.monomials().collect();
        let max_size = (c.denom_exp() as usize + 1).min(monos.len());
        // depth-first over subsets in index order, pruned at max_size
        fn walk(
            out: &mut PhasePoly,
            monos: &[&Monomial],
            c: Dyadic,
            max_size: usize,
            start: usize,
            acc: &Monomial,
            size: usize,
        ) {
            for (offset, m) in monos[start..].iter().enumerate() {
                let product = acc.mul(m);
                let coeff = c.mul_pow_neg2(size as u32);
                if !coeff.is_zero() {
                    out.add_term(product.clone(), coeff);
                }
                if size + 1 < max_size {
                    walk(out, monos, c, max_size, start + offset + 1, &product, size + 1);
                }
            }
        }
        walk(self, &monos, c, max_size, 0, &Monomial::one(), 0);
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.contains(v))
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().iter().copied()).collect()
    }

    /// Removes and returns all terms containing `v`.
    pub fn extract_terms_with(&mut self, v: Var) -> Vec<(Monomial, Dyadic)> {
        let keys: Vec<Monomial> = self.terms.keys().filter(|m| m.contains(v)).cloned().collect();
        keys.into_iter().map(|m| {
            let c = self.terms.remove(&m).unwrap();
            (m, c)
        }).collect()
    }

    /// Substitutes the Boolean polynomial `value` for `v`: each term
    /// `c * v * M` becomes `c * lift(value AND M)`.
    pub fn substitute(&self, v: Var, value: &BoolPoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (m, c) in self.terms() {
            if m.contains(v) {
                out.add_scaled_lift(&value.and_monomial(&m.without(v)), c);
            } else {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    pub fn zero_var(&self, v: Var) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (m, c) in self.terms() {
            if !m.contains(v) {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (m, c) in self.terms() {
            out.add_term(Monomial::from_vars(m.vars().iter().map(|&v| f(v)).collect()), c);
        }
        out
    }

    /// Phase value modulo 2 on a Boolean assignment.
    pub fn eval(&self, assignment: &dyn Fn(Var) -> bool) -> Dyadic {
        let mut acc = Dyadic::ZERO;
        for (m, c) in self.terms() {
            if m.eval(assignment) {
                acc = acc.add(c);
            }
        }
        acc
    }

    /// Drops the constant term.
    pub fn without_constant(&self) -> PhasePoly {
        let mut out = self.clone();
        out.terms.remove(&Monomial::one());
        out
    }
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c == Dyadic::ONE {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}·{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Var {
        Var::Input(i)
    }

    fn y(i: u32) -> Var {
        Var::Path(i)
    }

    #[test]
    fn dyadic_normalisation() {
        assert_eq!(Dyadic::new(4, 2), Dyadic::ONE);
        assert_eq!(Dyadic::new(8, 2), Dyadic::ZERO);
        assert_eq!(Dyadic::new(-1, 2), Dyadic::new(7, 2));
        assert_eq!(Dyadic::new(3, 1).add(Dyadic::new(1, 1)), Dyadic::ZERO);
        assert_eq!(Dyadic::new(1, 2).add(Dyadic::new(1, 2)), Dyadic::new(1, 1));
    }

    #[test]
    fn dyadic_pow_neg2() {
        // (1/4) * (-2) = -1/2 = 3/2 mod 2
        assert_eq!(Dyadic::new(1, 2).mul_pow_neg2(1), Dyadic::new(3, 1));
        // (1/4) * 4 = 1
        assert_eq!(Dyadic::new(1, 2).mul_pow_neg2(2), Dyadic::ONE);
        // (1/4) * (-8) = -2 = 0 mod 2
        assert_eq!(Dyadic::new(1, 2).mul_pow_neg2(3), Dyadic::ZERO);
    }

    #[test]
    fn xor_cancels() {
        let mut p = BoolPoly::var(x(0));
        p.xor_assign(&BoolPoly::var(x(0)));
        assert!(p.is_zero());
    }

    #[test]
    fn and_is_multilinear() {
        let p = BoolPoly::var(x(0)).xor(&BoolPoly::var(x(1)));
        let q = p.and(&BoolPoly::var(x(0)));
        // (x0 ^ x1) & x0 = x0 ^ x0 x1
        let expect = BoolPoly::from_monomials([
            Monomial::var(x(0)),
            Monomial::from_vars(vec![x(0), x(1)]),
        ]);
        assert_eq!(q, expect);
    }

    #[test]
    fn lift_of_single_variable_is_itself() {
        let mut p = PhasePoly::zero();
        p.add_scaled_lift(&BoolPoly::var(x(0)), Dyadic::new(1, 2));
        assert_eq!(p.coeff(&Monomial::var(x(0))), Dyadic::new(1, 2));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn lift_of_xor_pair() {
        // lift(x0 ^ x1) scaled by 1/2: x0/2 + x1/2 - x0 x1 -> 1/2,1/2,1
        let b = BoolPoly::var(x(0)).xor(&BoolPoly::var(x(1)));
        let mut p = PhasePoly::zero();
        p.add_scaled_lift(&b, Dyadic::new(1, 1));
        assert_eq!(p.coeff(&Monomial::var(x(0))), Dyadic::new(1, 1));
        assert_eq!(p.coeff(&Monomial::var(x(1))), Dyadic::new(1, 1));
        assert_eq!(p.coeff(&Monomial::from_vars(vec![x(0), x(1)])), Dyadic::ONE);
    }

    #[test]
    fn lift_integer_coefficient_keeps_only_singletons() {
        let b = BoolPoly::var(x(0)).xor(&BoolPoly::var(x(1))).xor(&BoolPoly::var(y(0)));
        let mut p = PhasePoly::zero();
        p.add_scaled_lift(&b, Dyadic::ONE);
        assert_eq!(p.len(), 3);
        for m in [x(0), x(1), y(0)] {
            assert_eq!(p.coeff(&Monomial::var(m)), Dyadic::ONE);
        }
    }

    #[test]
    fn lift_matches_truth_table() {
        // (x0 ^ x1) ^ x0 x1  =  OR(x0, x1)
        let b = BoolPoly::from_monomials([
            Monomial::var(x(0)),
            Monomial::var(x(1)),
            Monomial::from_vars(vec![x(0), x(1)]),
        ]);
        let mut p = PhasePoly::zero();
        // scale small enough that nothing truncates: 1/2^6
        p.add_scaled_lift(&b, Dyadic::new(1, 6));
        for bits in 0..4u32 {
            let assign = |v: Var| match v {
                Var::Input(i) => bits & (1 << i) != 0,
                _ => false,
            };
            let lhs = p.eval(&assign).value();
            let rhs = if b.eval(&assign) { Dyadic::new(1, 6).value() } else { 0.0 };
            assert!((lhs - rhs).abs() < 1e-12, "bits {bits}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn substitute_into_phase() {
        // P = (1/2) y0 x0, substitute y0 <- x0 ^ x1:
        // (1/2) lift((x0^x1) & x0) = (1/2) lift(x0 ^ x0x1) = x0/2 + x0x1/2 - x0x1 = x0/2 + 3/2 x0x1
        let mut p = PhasePoly::zero();
        p.add_term(Monomial::from_vars(vec![x(0), y(0)]), Dyadic::new(1, 1));
        let value = BoolPoly::var(x(0)).xor(&BoolPoly::var(x(1)));
        let q = p.substitute(y(0), &value);
        assert_eq!(q.coeff(&Monomial::var(x(0))), Dyadic::new(1, 1));
        assert_eq!(q.coeff(&Monomial::from_vars(vec![x(0), x(1)])), Dyadic::new(3, 1));
    }

    #[test]
    fn satisfying_assignment_minimal_monomial() {
        // x0x1 ^ x2: minimal-degree monomial {x2} gives assignment {x2}
        let b = BoolPoly::from_monomials([
            Monomial::from_vars(vec![x(0), x(1)]),
            Monomial::var(x(2)),
        ]);
        let sat = b.satisfying_assignment().unwrap();
        assert!(b.eval(&|v| sat.contains(&v)));
    }

    #[test]
    fn monomial_order_is_graded() {
        let a = Monomial::var(x(5));
        let b = Monomial::from_vars(vec![x(0), x(1)]);
        assert!(a < b);
    }
}
