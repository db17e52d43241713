//! A second interpreter, kept deliberately naive.
//!
//! Tensors are flat arrays paired with a shape, coordinates are 0-based,
//! offsets come from explicit strides, and every operator materializes its
//! whole result before anything else happens. None of the evaluator's
//! machinery is reused: no typing context, no store, no shared index or
//! arithmetic helpers. Only the cell value type is common, so that results
//! can be compared exactly.

use std::collections::BTreeMap;

use num::traits::Zero;
use num::BigRational;

use tl_core::store::InitSpec;
use tl_core::syntax::{BinOp, Expr, ExprKind, Program, Qualifier};
use tl_core::typecheck::check_program;
use tl_core::value::Value;

/// A dense tensor: row-major cells behind a shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dense {
    shape: Vec<usize>,
    cells: Vec<Value>,
}

impl Dense {
    pub fn new(shape: Vec<usize>, cells: Vec<Value>) -> Dense {
        assert_eq!(cells.len(), shape.iter().product::<usize>(), "cell count");
        Dense { shape, cells }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn cells(&self) -> &[Value] {
        &self.cells
    }

    /// Cell at a 0-based coordinate.
    pub fn get(&self, at: &[usize]) -> &Value {
        &self.cells[self.offset(at)]
    }

    fn offset(&self, at: &[usize]) -> usize {
        assert_eq!(at.len(), self.shape.len(), "coordinate rank");
        let mut offset = 0;
        let mut stride = 1;
        for k in (0..self.shape.len()).rev() {
            assert!(at[k] < self.shape[k], "coordinate out of bounds");
            offset += at[k] * stride;
            stride *= self.shape[k];
        }
        offset
    }
}

/// All 0-based coordinates of a shape, in row-major order.
fn coordinates(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in shape {
        let mut next = Vec::with_capacity(out.len() * d);
        for prefix in &out {
            for v in 0..d {
                let mut coordinate = prefix.clone();
                coordinate.push(v);
                next.push(coordinate);
            }
        }
        out = next;
    }
    out
}

fn o_binary(a: &Value, b: &Value, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Value {
    match (a, b) {
        (Value::Defined(x), Value::Defined(y)) => Value::Defined(f(x, y)),
        _ => Value::Undefined,
    }
}

fn o_add(a: &Value, b: &Value) -> Value {
    o_binary(a, b, |x, y| x + y)
}

fn o_sub(a: &Value, b: &Value) -> Value {
    o_binary(a, b, |x, y| x - y)
}

fn o_mul(a: &Value, b: &Value) -> Value {
    o_binary(a, b, |x, y| x * y)
}

/// Division as the evaluator defines it: a zero numerator wins outright,
/// anything else divided by zero or by garbage is garbage.
fn o_div(a: &Value, b: &Value) -> Value {
    if matches!(a, Value::Defined(x) if x.is_zero()) {
        return Value::Defined(BigRational::zero());
    }
    match (a, b) {
        (Value::Defined(x), Value::Defined(y)) if !y.is_zero() => Value::Defined(x / y),
        _ => Value::Undefined,
    }
}

fn o_apply(op: BinOp, a: &Value, b: &Value) -> Value {
    match op {
        BinOp::Add => o_add(a, b),
        BinOp::Sub => o_sub(a, b),
        BinOp::Mul => o_mul(a, b),
        BinOp::Div => o_div(a, b),
    }
}

/// Runs a program over dense tensors and returns every variable's final
/// content. The program must typecheck and the init spec must fit the
/// declarations; this is a test oracle, so violations panic.
pub fn oracle_eval(program: &Program, init: &InitSpec) -> BTreeMap<String, Dense> {
    check_program(program).expect("oracle runs typechecked programs only");
    let mut env: BTreeMap<String, Dense> = BTreeMap::new();
    for decl in &program.declarations {
        let shape = decl.extents.clone();
        let count: usize = shape.iter().product();
        let cells: Vec<Value> = match init.get(&decl.name) {
            Some(entry) => {
                if let Some(declared) = &entry.declared_extents {
                    assert_eq!(declared, &shape, "init shape for '{}'", decl.name);
                }
                assert_eq!(entry.values.len(), count, "init cell count for '{}'", decl.name);
                entry.values.clone()
            }
            None => vec![Value::Undefined; count],
        };
        if decl.qualifier == Qualifier::Input {
            assert!(
                cells.iter().all(Value::is_defined),
                "input '{}' must be fully defined",
                decl.name
            );
        }
        env.insert(decl.name.clone(), Dense::new(shape, cells));
    }
    for stmt in &program.statements {
        let result = eval_dense(&env, &stmt.rhs);
        assert_eq!(result.shape, env[&stmt.lhs].shape, "assignment to '{}'", stmt.lhs);
        env.insert(stmt.lhs.clone(), result);
    }
    env
}

fn eval_dense(env: &BTreeMap<String, Dense>, expr: &Expr) -> Dense {
    match &expr.kind {
        ExprKind::Var(name) => env[name.as_str()].clone(),
        ExprKind::Paren(inner) => eval_dense(env, inner),
        ExprKind::Elem(op, lhs, rhs) => {
            let a = eval_dense(env, lhs);
            let b = eval_dense(env, rhs);
            apply_elem(*op, a, b)
        }
        ExprKind::OuterProduct(lhs, rhs) => {
            let a = eval_dense(env, lhs);
            let b = eval_dense(env, rhs);
            let mut shape = a.shape.clone();
            shape.extend(&b.shape);
            let mut cells = Vec::with_capacity(a.cells.len() * b.cells.len());
            for x in &a.cells {
                for y in &b.cells {
                    cells.push(o_mul(x, y));
                }
            }
            Dense::new(shape, cells)
        }
        ExprKind::Transpose(operand, pair) => {
            let a = eval_dense(env, operand);
            let (m, n) = (pair.m() - 1, pair.n() - 1);
            let mut shape = a.shape.clone();
            shape.swap(m, n);
            let cells = coordinates(&shape)
                .iter()
                .map(|at| {
                    let mut src = at.clone();
                    src.swap(m, n);
                    a.get(&src).clone()
                })
                .collect();
            Dense::new(shape, cells)
        }
        ExprKind::Contract(operand, pair) => {
            let a = eval_dense(env, operand);
            let (m, n) = pair.sorted();
            let (m, n) = (m - 1, n - 1);
            let d = a.shape[m];
            assert_eq!(d, a.shape[n], "contracted extents");
            let shape: Vec<usize> = a
                .shape
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != m && *k != n)
                .map(|(_, &v)| v)
                .collect();
            let cells = coordinates(&shape)
                .iter()
                .map(|at| {
                    let mut total: Option<Value> = None;
                    for l in 0..d {
                        let mut src = at.clone();
                        src.insert(m, l);
                        src.insert(n, l);
                        let v = a.get(&src).clone();
                        total = Some(match total {
                            None => v,
                            Some(acc) => o_add(&acc, &v),
                        });
                    }
                    total.expect("extents are positive")
                })
                .collect();
            Dense::new(shape, cells)
        }
    }
}

/// Element-wise application. Equal shapes zip; a scalar multiplies from
/// the left or divides from the right, never the other way around.
fn apply_elem(op: BinOp, a: Dense, b: Dense) -> Dense {
    if a.shape == b.shape {
        let cells = a.cells.iter().zip(&b.cells).map(|(x, y)| o_apply(op, x, y)).collect();
        return Dense::new(a.shape, cells);
    }
    if op == BinOp::Mul && a.shape.is_empty() {
        let s = &a.cells[0];
        let cells = b.cells.iter().map(|y| o_mul(s, y)).collect();
        return Dense::new(b.shape, cells);
    }
    if op == BinOp::Div && b.shape.is_empty() {
        let s = &b.cells[0];
        let cells = a.cells.iter().map(|x| o_div(x, s)).collect();
        return Dense::new(a.shape, cells);
    }
    panic!("element-wise shapes do not match: {:?} {} {:?}", a.shape, op.symbol(), b.shape);
}
