//! Exact evaluation.
//!
//! Evaluation is cell-driven: the value of an expression at one index is
//! computed recursively, consulting the typing context where the expression
//! shape alone does not determine how an index splits or how far a
//! contraction sums. A statement materializes the whole right-hand side
//! before writing any cell, so a statement may freely read the variable it
//! assigns; it always sees the pre-statement contents.
//!
//! Division uses the controlled table: a zero numerator yields zero even
//! over a zero or undefined denominator. Everything else involving an
//! undefined operand is undefined.

use thiserror::Error;

use crate::index::MultiIndex;
use crate::store::{AccessViolation, InitError, InitSpec, Store};
use crate::syntax::{BinOp, Expr, ExprKind, Program, Qualifier, Statement};
use crate::typecheck::{check_program, StaticContext, TypeError};
use crate::value::{arith, ArithMode, Value};

/// Everything that can stop a run: a program that does not typecheck, a bad
/// initial-value specification, or a trapped access (the last indicates an
/// evaluator bug, never a property of a well-typed program).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Access(#[from] AccessViolation),
}

/// Looks up the initial cell values for one declared variable: the init
/// entry if present (shape-checked), otherwise all undefined. Input
/// variables must come out fully defined.
pub(crate) fn initial_cells(
    ctx: &StaticContext,
    init: &InitSpec,
    id: &str,
) -> Result<Vec<Value>, InitError> {
    let ty = ctx.type_of(id).expect("caller iterates declared variables");
    let qualifier = ctx.qualifier_of(id).expect("caller iterates declared variables");
    let cells = match init.get(id) {
        Some(entry) => {
            if let Some(given) = &entry.declared_extents {
                if given.as_slice() != ty.extents() {
                    return Err(InitError::DeclaredShapeMismatch {
                        id: id.to_string(),
                        given: given.clone(),
                        declared: ty.clone(),
                    });
                }
            }
            if entry.values.len() != ty.num_cells() {
                return Err(InitError::CellCountMismatch {
                    id: id.to_string(),
                    declared: ty.clone(),
                    expected: ty.num_cells(),
                    actual: entry.values.len(),
                });
            }
            entry.values.clone()
        }
        None => vec![Value::Undefined; ty.num_cells()],
    };
    if qualifier == Qualifier::Input {
        if let Some(k) = cells.iter().position(|v| !v.is_defined()) {
            let index = ty
                .indices()
                .nth(k)
                .expect("position is within the cell count");
            return Err(InitError::InputUninitialized { id: id.to_string(), index });
        }
    }
    Ok(cells)
}

/// Checks that every init entry names a declared variable.
pub(crate) fn check_init_ids(ctx: &StaticContext, init: &InitSpec) -> Result<(), InitError> {
    for id in init.ids() {
        if !ctx.contains(id) {
            return Err(InitError::UnknownIdentifier { id: id.to_string() });
        }
    }
    Ok(())
}

/// Builds the initial store for a context: one box of cells per declared
/// variable, populated from the init spec.
pub fn init_store(ctx: &StaticContext, init: &InitSpec) -> Result<Store, InitError> {
    check_init_ids(ctx, init)?;
    let mut store = Store::empty();
    for (id, binding) in ctx.iter() {
        let cells = initial_cells(ctx, init, id)?;
        store.insert_tensor(id, binding.ty.clone(), cells);
    }
    Ok(store)
}

/// The value of `expr` at cell `index`, read against `store`.
///
/// The context must type the expression (callers have already checked the
/// program) and `index` must be a cell of that type. The same function
/// serves padded evaluation: handing it the rounded context makes every
/// lookup, index split, and contraction bound range over rounded extents.
pub fn eval_expr(
    ctx: &StaticContext,
    store: &Store,
    expr: &Expr,
    index: &MultiIndex,
) -> Result<Value, AccessViolation> {
    match &expr.kind {
        ExprKind::Var(name) => store.read(name, index).cloned(),
        ExprKind::Paren(inner) => eval_expr(ctx, store, inner, index),
        ExprKind::OuterProduct(lhs, rhs) => {
            let left_rank = type_of(ctx, lhs).rank();
            let (li, ri) = index.components().split_at(left_rank);
            let lv = eval_expr(ctx, store, lhs, &MultiIndex::from_raw(li.to_vec()))?;
            let rv = eval_expr(ctx, store, rhs, &MultiIndex::from_raw(ri.to_vec()))?;
            Ok(arith(BinOp::Mul, &lv, &rv, ArithMode::Controlled))
        }
        ExprKind::Transpose(operand, pair) => {
            let (m, n) = pair.sorted();
            let mut components = index.components().to_vec();
            components.swap(m - 1, n - 1);
            eval_expr(ctx, store, operand, &MultiIndex::from_raw(components))
        }
        ExprKind::Contract(operand, pair) => {
            let (m, n) = pair.sorted();
            let bound = type_of(ctx, operand).extents()[m - 1];
            let mut acc: Option<Value> = None;
            for l in 1..=bound {
                let mut components = Vec::with_capacity(index.rank() + 2);
                let mut rest = index.components().iter();
                for position in 1..=index.rank() + 2 {
                    if position == m || position == n {
                        components.push(l);
                    } else {
                        components.push(*rest.next().expect("index has rank k-2"));
                    }
                }
                let term = eval_expr(ctx, store, operand, &MultiIndex::from_raw(components))?;
                acc = Some(match acc {
                    None => term,
                    Some(sum) => arith(BinOp::Add, &sum, &term, ArithMode::Controlled),
                });
            }
            Ok(acc.expect("extents are at least 1, so the sum has a term"))
        }
        ExprKind::Elem(op, lhs, rhs) => {
            let scalar = MultiIndex::empty();
            if *op == BinOp::Mul && type_of(ctx, lhs).is_scalar() {
                let lv = eval_expr(ctx, store, lhs, &scalar)?;
                let rv = eval_expr(ctx, store, rhs, index)?;
                Ok(arith(BinOp::Mul, &lv, &rv, ArithMode::Controlled))
            } else if *op == BinOp::Div && type_of(ctx, rhs).is_scalar() {
                let lv = eval_expr(ctx, store, lhs, index)?;
                let rv = eval_expr(ctx, store, rhs, &scalar)?;
                Ok(arith(BinOp::Div, &lv, &rv, ArithMode::Controlled))
            } else {
                let lv = eval_expr(ctx, store, lhs, index)?;
                let rv = eval_expr(ctx, store, rhs, index)?;
                Ok(arith(*op, &lv, &rv, ArithMode::Controlled))
            }
        }
    }
}

/// The type of a subexpression of an already-checked statement.
fn type_of(ctx: &StaticContext, expr: &Expr) -> crate::index::TensorType {
    crate::typecheck::type_expr(ctx, expr)
        .expect("expression was typechecked before evaluation")
}

/// Runs one statement: evaluates the right-hand side at every cell of the
/// target's type under `ctx`, then commits all cells at once.
pub fn exec_stmt(
    ctx: &StaticContext,
    store: &mut Store,
    stmt: &Statement,
) -> Result<(), AccessViolation> {
    let target = ctx
        .type_of(&stmt.lhs)
        .expect("statement was typechecked before evaluation")
        .clone();
    let mut staged = Vec::with_capacity(target.num_cells());
    for index in target.indices() {
        let value = eval_expr(ctx, store, &stmt.rhs, &index)?;
        staged.push((index, value));
    }
    for (index, value) in staged {
        store.write(&stmt.lhs, &index, value)?;
    }
    Ok(())
}

/// Folds the statements over a store, in order.
pub fn run_statements(
    ctx: &StaticContext,
    store: &mut Store,
    statements: &[Statement],
) -> Result<(), AccessViolation> {
    for stmt in statements {
        exec_stmt(ctx, store, stmt)?;
    }
    Ok(())
}

/// Typechecks and runs a program from the given initial values, returning
/// the final store.
pub fn run(program: &Program, init: &InitSpec) -> Result<Store, RunError> {
    let ctx = check_program(program)?;
    let mut store = init_store(&ctx, init)?;
    run_statements(&ctx, &mut store, &program.statements)?;
    Ok(store)
}
