//! Exact dyadic angles for gate parameters.
//!
//! Angles are only admitted as dyadic multiples of pi. Exact `pi`-rational
//! expressions convert losslessly; bare floating-point values are accepted
//! only when they sit within 2^-40 of a representable dyadic, and are never
//! silently rounded (in particular, tiny angles like pi/2^27 survive).

use std::fmt;

use thiserror::Error;

use crate::circuit::PhaseExponent;

/// An angle `pi * mult / 2^(denom_exp - 1)`, canonicalised into [0, 2*pi)
/// and kept in lowest terms (`mult` odd, or the zero angle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicAngle {
    pub mult: i64,
    pub denom_exp: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleError {
    #[error("angle {0} is not a dyadic multiple of pi (within 2^-40 of denominators up to 2^31)")]
    NonDyadic(String),
}

impl DyadicAngle {
    pub const ZERO: DyadicAngle = DyadicAngle { mult: 0, denom_exp: 0 };

    /// Canonicalises `pi * mult / 2^(denom_exp-1)` into [0, 2*pi), lowest
    /// terms.
    pub fn new(mult: i64, denom_exp: u32) -> Self {
        let p = PhaseExponent::new(mult, denom_exp);
        DyadicAngle { mult: p.mult, denom_exp: p.denom_exp }
    }

    /// Lossless conversion of the exact rational `num/den * pi`; the
    /// reduced denominator must be a power of two.
    pub fn from_pi_rational(num: i64, den: i64) -> Result<Self, AngleError> {
        if den == 0 {
            return Err(AngleError::NonDyadic(format!("{num}*pi/0")));
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den as u64);
        if g > 1 {
            num /= g as i64;
            den /= g as i64;
        }
        if den & (den - 1) != 0 {
            return Err(AngleError::NonDyadic(format!("{num}*pi/{den}")));
        }
        let k = den.trailing_zeros();
        Ok(DyadicAngle::new(num, k + 1))
    }

    /// Accepts a float only within absolute tolerance 2^-40 of some dyadic
    /// angle with denominator exponent at most 32, preferring the smallest
    /// denominator that fits.
    pub fn from_radians(value: f64) -> Result<Self, AngleError> {
        if !value.is_finite() {
            return Err(AngleError::NonDyadic(value.to_string()));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let reduced = value.rem_euclid(tau);
        let tol = 2f64.powi(-40);
        for k in 0..=32u32 {
            // angle = pi * m / 2^(k-1)
            let scale = 2f64.powi(k as i32 - 1) / std::f64::consts::PI;
            let m = (reduced * scale).round();
            if m.abs() > i64::MAX as f64 {
                continue;
            }
            let back = m / scale;
            if (reduced - back).abs() <= tol {
                return Ok(DyadicAngle::new(m as i64, k));
            }
        }
        Err(AngleError::NonDyadic(value.to_string()))
    }

    pub fn is_zero(self) -> bool {
        self.mult == 0
    }

    pub fn as_phase_exponent(self) -> PhaseExponent {
        PhaseExponent { mult: self.mult, denom_exp: self.denom_exp }
    }

    pub fn radians(self) -> f64 {
        self.as_phase_exponent().radians()
    }
}

impl fmt::Display for DyadicAngle {
    /// Exact OpenQASM expression text: `m*pi/2^(k-1)` with the denominator
    /// printed as an integer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mult == 0 {
            return write!(f, "0");
        }
        let denom: i128 = 1i128 << (self.denom_exp.max(1) - 1);
        match (self.mult, denom) {
            (1, 1) => write!(f, "pi"),
            (m, 1) => write!(f, "{m}*pi"),
            (1, d) => write!(f, "pi/{d}"),
            (m, d) => write!(f, "{m}*pi/{d}"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A partially evaluated OpenQASM parameter expression: exact rationals and
/// exact rational multiples of pi are tracked symbolically, anything else
/// collapses to a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Rational(i64, i64),
    PiRational(i64, i64),
    Float(f64),
}

impl Value {
    pub const PI: Value = Value::PiRational(1, 1);

    pub fn int(v: i64) -> Value {
        Value::Rational(v, 1)
    }

    fn as_f64(self) -> f64 {
        match self {
            Value::Rational(n, d) => n as f64 / d as f64,
            Value::PiRational(n, d) => std::f64::consts::PI * n as f64 / d as f64,
            Value::Float(f) => f,
        }
    }

    fn rational(n: i128, d: i128) -> Value {
        if d == 0 || n.unsigned_abs() > i64::MAX as u128 || d.unsigned_abs() > i64::MAX as u128 {
            return Value::Float(n as f64 / d as f64);
        }
        Value::Rational(n as i64, d as i64)
    }

    fn pi_rational(n: i128, d: i128) -> Value {
        if d == 0 || n.unsigned_abs() > i64::MAX as u128 || d.unsigned_abs() > i64::MAX as u128 {
            return Value::Float(std::f64::consts::PI * n as f64 / d as f64);
        }
        Value::PiRational(n as i64, d as i64)
    }

    pub fn add(self, o: Value) -> Value {
        match (self, o) {
            (Value::Rational(a, b), Value::Rational(c, d)) => {
                Value::rational(a as i128 * d as i128 + c as i128 * b as i128, b as i128 * d as i128)
            }
            (Value::PiRational(a, b), Value::PiRational(c, d)) => {
                Value::pi_rational(a as i128 * d as i128 + c as i128 * b as i128, b as i128 * d as i128)
            }
            _ => Value::Float(self.as_f64() + o.as_f64()),
        }
    }

    pub fn neg(self) -> Value {
        match self {
            Value::Rational(n, d) => Value::Rational(-n, d),
            Value::PiRational(n, d) => Value::PiRational(-n, d),
            Value::Float(f) => Value::Float(-f),
        }
    }

    pub fn sub(self, o: Value) -> Value {
        self.add(o.neg())
    }

    pub fn mul(self, o: Value) -> Value {
        match (self, o) {
            (Value::Rational(a, b), Value::Rational(c, d)) => {
                Value::rational(a as i128 * c as i128, b as i128 * d as i128)
            }
            (Value::Rational(a, b), Value::PiRational(c, d))
            | (Value::PiRational(c, d), Value::Rational(a, b)) => {
                Value::pi_rational(a as i128 * c as i128, b as i128 * d as i128)
            }
            _ => Value::Float(self.as_f64() * o.as_f64()),
        }
    }

    pub fn div(self, o: Value) -> Value {
        match (self, o) {
            (Value::Rational(a, b), Value::Rational(c, d)) => {
                Value::rational(a as i128 * d as i128, b as i128 * c as i128)
            }
            (Value::PiRational(a, b), Value::Rational(c, d)) => {
                Value::pi_rational(a as i128 * d as i128, b as i128 * c as i128)
            }
            _ => Value::Float(self.as_f64() / o.as_f64()),
        }
    }

    pub fn apply_fn(self, name: &str) -> Option<Value> {
        let x = self.as_f64();
        let out = match name {
            "sin" => x.sin(),
            "cos" => x.cos(),
            "tan" => x.tan(),
            "exp" => x.exp(),
            "ln" => x.ln(),
            "sqrt" => x.sqrt(),
            _ => return None,
        };
        Some(Value::Float(out))
    }

    /// Conversion to a dyadic angle: exact for pi-rationals with power-of-two
    /// denominators, tolerance-gated for anything numeric.
    pub fn to_dyadic(self) -> Result<DyadicAngle, AngleError> {
        match self {
            Value::Rational(0, _) => Ok(DyadicAngle::ZERO),
            Value::Rational(..) => DyadicAngle::from_radians(self.as_f64()),
            Value::PiRational(n, d) => DyadicAngle::from_pi_rational(n, d),
            Value::Float(f) => DyadicAngle::from_radians(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_pi_encoding() {
        // pi/4 = pi * 1 / 2^2
        let a = DyadicAngle::from_pi_rational(1, 4).unwrap();
        assert_eq!(a, DyadicAngle { mult: 1, denom_exp: 3 });
    }

    #[test]
    fn three_pi_over_32() {
        let a = DyadicAngle::from_pi_rational(3, 32).unwrap();
        assert_eq!(a, DyadicAngle { mult: 3, denom_exp: 6 });
        // the float that a compiler prints for 3*pi/32 recovers exactly
        let f = DyadicAngle::from_radians(0.2945243112740431).unwrap();
        assert_eq!(f, a);
    }

    #[test]
    fn tiny_angle_survives() {
        let a = DyadicAngle::from_pi_rational(1, 1 << 27).unwrap();
        assert_eq!(a, DyadicAngle { mult: 1, denom_exp: 28 });
        assert!(!a.is_zero());
        let f = DyadicAngle::from_radians(std::f64::consts::PI / 2f64.powi(27)).unwrap();
        assert_eq!(f, a);
    }

    #[test]
    fn non_dyadic_rejected() {
        assert!(DyadicAngle::from_pi_rational(1, 3).is_err());
        assert!(DyadicAngle::from_radians(0.1).is_err());
        assert!(DyadicAngle::from_radians(1.0).is_err());
    }

    #[test]
    fn canonical_range() {
        // -pi/4 = 7pi/4 mod 2pi
        let a = DyadicAngle::from_pi_rational(-1, 4).unwrap();
        assert_eq!(a, DyadicAngle { mult: 7, denom_exp: 3 });
        let b = DyadicAngle::from_pi_rational(9, 4).unwrap();
        assert_eq!(b, DyadicAngle { mult: 1, denom_exp: 3 });
    }

    #[test]
    fn display_round_trips_through_text() {
        for (m, k) in [(1i64, 3u32), (3, 6), (1, 1), (7, 3), (0, 0), (3, 0)] {
            let a = DyadicAngle::new(m, k);
            let text = a.to_string();
            assert!(!text.contains('.'), "exact text only: {text}");
        }
        assert_eq!(DyadicAngle::new(1, 3).to_string(), "pi/4");
        assert_eq!(DyadicAngle::new(3, 6).to_string(), "3*pi/32");
        assert_eq!(DyadicAngle::new(1, 1).to_string(), "pi");
        assert_eq!(DyadicAngle::ZERO.to_string(), "0");
    }

    #[test]
    fn value_arithmetic_stays_exact() {
        // 3*pi/32 built as 3 * pi / 32
        let v = Value::int(3).mul(Value::PI).div(Value::int(32));
        assert_eq!(v.to_dyadic().unwrap(), DyadicAngle { mult: 3, denom_exp: 6 });
        // 2*pi/8 reduces
        let v = Value::int(2).mul(Value::PI).div(Value::int(8));
        assert_eq!(v.to_dyadic().unwrap(), DyadicAngle { mult: 1, denom_exp: 3 });
        // pi/3 is not dyadic
        assert!(Value::PI.div(Value::int(3)).to_dyadic().is_err());
    }
}
