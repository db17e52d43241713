//! Scalar values and their arithmetic.
//!
//! A cell holds either an exact rational or the undefined marker. Undefined
//! stands for memory whose content we know nothing about, so it is absorbing
//! for the arithmetic operators, and division guards its own domain: any
//! division by zero is undefined too.
//!
//! Two division variants exist. Extended arithmetic is the plain absorbing
//! rule set. Controlled arithmetic differs in exactly two cells of the
//! division table: `0 / 0 == 0` and `0 / undefined == 0`. The controlled
//! variant is what the evaluator uses; it makes a zero numerator win even
//! when the denominator is garbage, which is what keeps zero-filled padding
//! closed under whole-tensor division.

use std::fmt;

use num::traits::Zero;
use num::BigRational;

use crate::syntax::BinOp;

/// One cell's content: an exact rational or the undefined marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Defined(BigRational),
    Undefined,
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Defined(BigRational::from_integer(n.into()))
    }

    /// Exact fraction `p / q`. Panics if `q == 0`; use `Value::Undefined`
    /// for values that are not numbers.
    pub fn ratio(p: i64, q: i64) -> Value {
        assert!(q != 0, "rational with zero denominator");
        Value::Defined(BigRational::new(p.into(), q.into()))
    }

    pub fn zero() -> Value {
        Value::int(0)
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Value::Defined(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Defined(r) if r.is_zero())
    }
}

impl fmt::Display for Value {
    /// Integers print bare, other rationals as `p/q`, undefined as `_`.
    /// This is the cell syntax of store files.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Defined(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Undefined => write!(f, "_"),
        }
    }
}

/// Which division table to use. The modes agree on `+`, `-`, `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithMode {
    Extended,
    Controlled,
}

/// Applies a binary operator to two cell values.
pub fn arith(op: BinOp, a: &Value, b: &Value, mode: ArithMode) -> Value {
    use Value::{Defined, Undefined};
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => match (a, b) {
            (Defined(x), Defined(y)) => Defined(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => unreachable!(),
            }),
            _ => Undefined,
        },
        BinOp::Div => {
            if mode == ArithMode::Controlled && a.is_zero() {
                // 0 / 0 and 0 / undefined included: a zero numerator wins.
                return Value::zero();
            }
            match (a, b) {
                (Defined(x), Defined(y)) => {
                    if y.is_zero() {
                        Undefined
                    } else {
                        Defined(x / y)
                    }
                }
                _ => Undefined,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controlled_division_special_cases() {
        let z = Value::int(0);
        let three = Value::int(3);
        let u = Value::Undefined;
        assert_eq!(arith(BinOp::Div, &z, &z, ArithMode::Controlled), Value::int(0));
        assert_eq!(arith(BinOp::Div, &z, &u, ArithMode::Controlled), Value::int(0));
        assert_eq!(arith(BinOp::Div, &three, &z, ArithMode::Controlled), Value::Undefined);
        assert_eq!(arith(BinOp::Div, &z, &three, ArithMode::Controlled), Value::int(0));
    }

    #[test]
    fn extended_division_is_strict() {
        let z = Value::int(0);
        let u = Value::Undefined;
        assert_eq!(arith(BinOp::Div, &z, &z, ArithMode::Extended), Value::Undefined);
        assert_eq!(arith(BinOp::Div, &z, &u, ArithMode::Extended), Value::Undefined);
    }

    #[test]
    fn undefined_absorbs() {
        let three = Value::int(3);
        let u = Value::Undefined;
        for op in [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div] {
            assert_eq!(arith(op, &three, &u, ArithMode::Extended), Value::Undefined);
            assert_eq!(arith(op, &u, &three, ArithMode::Extended), Value::Undefined);
        }
        assert_eq!(arith(BinOp::Add, &three, &u, ArithMode::Controlled), Value::Undefined);
    }

    #[test]
    fn exact_rationals() {
        let a = Value::ratio(1, 3);
        let b = Value::ratio(1, 6);
        assert_eq!(arith(BinOp::Add, &a, &b, ArithMode::Controlled), Value::ratio(1, 2));
        assert_eq!(arith(BinOp::Sub, &a, &b, ArithMode::Controlled), Value::ratio(1, 6));
        assert_eq!(arith(BinOp::Mul, &a, &b, ArithMode::Controlled), Value::ratio(1, 18));
        assert_eq!(arith(BinOp::Div, &a, &b, ArithMode::Controlled), Value::int(2));
    }

    /// Every (value, value, op, mode) combination over a small carrier set,
    /// checked against the definitional tables written out longhand.
    #[test]
    fn exhaustive_small_table() {
        let carrier: Vec<Value> = vec![
            Value::Undefined,
            Value::int(0),
            Value::int(1),
            Value::int(-1),
            Value::int(2),
            Value::int(-2),
        ];
        let expected = |op: BinOp, a: &Value, b: &Value, mode: ArithMode| -> Value {
            use Value::{Defined, Undefined};
            match (a, b) {
                (Defined(x), Defined(y)) => match op {
                    BinOp::Add => Defined(x + y),
                    BinOp::Sub => Defined(x - y),
                    BinOp::Mul => Defined(x * y),
                    BinOp::Div => {
                        if mode == ArithMode::Controlled && x.is_zero() {
                            Value::int(0)
                        } else if y.is_zero() {
                            Undefined
                        } else {
                            Defined(x / y)
                        }
                    }
                },
                _ => {
                    if op == BinOp::Div && mode == ArithMode::Controlled && a.is_zero() {
                        Value::int(0)
                    } else {
                        Undefined
                    }
                }
            }
        };
        for a in &carrier {
            for b in &carrier {
                for op in [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div] {
                    for mode in [ArithMode::Extended, ArithMode::Controlled] {
                        assert_eq!(
                            arith(op, a, b, mode),
                            expected(op, a, b, mode),
                            "{a} {op:?} {b} in {mode:?}"
                        );
                    }
                }
            }
        }
    }
}
