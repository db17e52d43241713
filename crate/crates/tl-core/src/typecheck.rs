//! Static typing.
//!
//! A variable's type is the tuple of extents it was declared with, and every
//! expression has exactly one type derivable from its shape: outer products
//! concatenate extents, contraction removes the two paired positions (which
//! must hold equal extents), transposition swaps them, and element-wise
//! arithmetic needs equal operand types except for the two scalar forms,
//! scalar * tensor and tensor / scalar. A program checks if every statement
//! assigns an expression of exactly the declared type.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::index::TensorType;
use crate::syntax::{BinOp, Declaration, Expr, ExprKind, IndexPair, Pos, Program, Qualifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeErrorKind {
    Redeclaration,
    AssignToUndeclared,
    AssignTypeMismatch,
    UseOfUndeclared,
    ExprTypeMismatch,
    BadIndexPair,
    ZeroExtent,
}

impl TypeErrorKind {
    /// Stable machine-readable tag, as printed in diagnostics.
    pub fn as_str(self) -> &'static str {
        match self {
            TypeErrorKind::Redeclaration => "redeclaration",
            TypeErrorKind::AssignToUndeclared => "assign-to-undeclared",
            TypeErrorKind::AssignTypeMismatch => "assign-type-mismatch",
            TypeErrorKind::UseOfUndeclared => "use-of-undeclared",
            TypeErrorKind::ExprTypeMismatch => "expr-type-mismatch",
            TypeErrorKind::BadIndexPair => "bad-index-pair",
            TypeErrorKind::ZeroExtent => "zero-extent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at {pos}: {message}", kind.as_str())]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub pos: Pos,
    /// The variable the error is about, when there is one.
    pub identifier: Option<String>,
    pub message: String,
}

impl TypeError {
    fn new(kind: TypeErrorKind, pos: Pos, message: impl Into<String>) -> TypeError {
        TypeError { kind, pos, identifier: None, message: message.into() }
    }

    fn about(mut self, identifier: &str) -> TypeError {
        self.identifier = Some(identifier.to_string());
        self
    }
}

/// A declared variable: its type plus its input/output role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub ty: TensorType,
    pub qualifier: Qualifier,
}

/// The typing context: every declared variable in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StaticContext {
    bindings: IndexMap<String, Binding>,
}

impl StaticContext {
    pub fn empty() -> StaticContext {
        StaticContext::default()
    }

    /// Adds a variable; a second declaration of the same name is an error.
    pub fn declare(
        &mut self,
        name: &str,
        ty: TensorType,
        qualifier: Qualifier,
        pos: Pos,
    ) -> Result<(), TypeError> {
        if self.bindings.contains_key(name) {
            return Err(TypeError::new(
                TypeErrorKind::Redeclaration,
                pos,
                format!("variable '{name}' is already declared"),
            )
            .about(name));
        }
        self.bindings.insert(name.to_string(), Binding { ty, qualifier });
        Ok(())
    }

    pub fn type_of(&self, name: &str) -> Option<&TensorType> {
        self.bindings.get(name).map(|b| &b.ty)
    }

    pub fn qualifier_of(&self, name: &str) -> Option<Qualifier> {
        self.bindings.get(name).map(|b| b.qualifier)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    /// Bindings in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Binding)> {
        self.bindings.iter().map(|(name, b)| (name.as_str(), b))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for StaticContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, binding)) in self.bindings.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name} : {}", binding.ty)?;
        }
        Ok(())
    }
}

/// Folds a declaration list into a context.
pub fn build_context(declarations: &[Declaration]) -> Result<StaticContext, TypeError> {
    let mut ctx = StaticContext::empty();
    for decl in declarations {
        let ty = TensorType::new(decl.extents.clone()).map_err(|_| {
            TypeError::new(
                TypeErrorKind::ZeroExtent,
                decl.pos,
                format!("variable '{}' declared with a zero extent", decl.name),
            )
            .about(&decl.name)
        })?;
        ctx.declare(&decl.name, ty, decl.qualifier, decl.pos)?;
    }
    Ok(ctx)
}

/// Checks an index pair against an operand rank: both positions in range
/// and distinct. Returns the pair as (smaller, larger).
fn checked_pair(pair: &IndexPair, rank: usize, pos: Pos) -> Result<(usize, usize), TypeError> {
    let (m, n) = (pair.m(), pair.n());
    if m > rank || n > rank {
        return Err(TypeError::new(
            TypeErrorKind::BadIndexPair,
            pos,
            format!("index pair {pair} out of range for an operand of rank {rank}"),
        ));
    }
    if m == n {
        return Err(TypeError::new(
            TypeErrorKind::BadIndexPair,
            pos,
            format!("index pair {pair} names the same position twice"),
        ));
    }
    Ok(pair.sorted())
}

/// Computes the unique type of an expression under a context.
pub fn type_expr(ctx: &StaticContext, expr: &Expr) -> Result<TensorType, TypeError> {
    match &expr.kind {
        ExprKind::Var(name) => ctx.type_of(name).cloned().ok_or_else(|| {
            TypeError::new(
                TypeErrorKind::UseOfUndeclared,
                expr.pos,
                format!("use of undeclared variable '{name}'"),
            )
            .about(name)
        }),
        ExprKind::Paren(inner) => type_expr(ctx, inner),
        ExprKind::OuterProduct(lhs, rhs) => {
            let lt = type_expr(ctx, lhs)?;
            let rt = type_expr(ctx, rhs)?;
            let mut extents = lt.extents().to_vec();
            extents.extend_from_slice(rt.extents());
            Ok(TensorType::new(extents).expect("operand extents are positive"))
        }
        ExprKind::Transpose(operand, pair) => {
            let t = type_expr(ctx, operand)?;
            let (m, n) = checked_pair(pair, t.rank(), expr.pos)?;
            let mut extents = t.extents().to_vec();
            extents.swap(m - 1, n - 1);
            Ok(TensorType::new(extents).expect("operand extents are positive"))
        }
        ExprKind::Contract(operand, pair) => {
            let t = type_expr(ctx, operand)?;
            let (m, n) = checked_pair(pair, t.rank(), expr.pos)?;
            let dm = t.extents()[m - 1];
            let dn = t.extents()[n - 1];
            if dm != dn {
                return Err(TypeError::new(
                    TypeErrorKind::ExprTypeMismatch,
                    expr.pos,
                    format!(
                        "contraction {pair} pairs unequal extents: position {m} has {dm}, position {n} has {dn}"
                    ),
                ));
            }
            let extents = t
                .extents()
                .iter()
                .enumerate()
                .filter(|(k, _)| k + 1 != m && k + 1 != n)
                .map(|(_, &d)| d)
                .collect();
            Ok(TensorType::new(extents).expect("operand extents are positive"))
        }
        // The two Ok(lt) branches are kept apart: they are different rules
        // and the chain's order is the rule order.
        #[allow(clippy::if_same_then_else)]
        ExprKind::Elem(op, lhs, rhs) => {
            let lt = type_expr(ctx, lhs)?;
            let rt = type_expr(ctx, rhs)?;
            // Rule order: scalar * tensor first, tensor / scalar second,
            // equal types last. The order is observable only in which rule
            // a derivation names; the resulting type agrees on overlaps.
            if *op == BinOp::Mul && lt.is_scalar() {
                Ok(rt)
            } else if *op == BinOp::Div && rt.is_scalar() {
                Ok(lt)
            } else if lt == rt {
                Ok(lt)
            } else {
                Err(TypeError::new(
                    TypeErrorKind::ExprTypeMismatch,
                    expr.pos,
                    format!("operand types differ for '{}': {lt} vs {rt}", op.symbol()),
                ))
            }
        }
    }
}

/// Typechecks a whole program, returning the context on success.
pub fn check_program(program: &Program) -> Result<StaticContext, TypeError> {
    let ctx = build_context(&program.declarations)?;
    for stmt in &program.statements {
        let declared = ctx.type_of(&stmt.lhs).cloned().ok_or_else(|| {
            TypeError::new(
                TypeErrorKind::AssignToUndeclared,
                stmt.pos,
                format!("assignment to undeclared variable '{}'", stmt.lhs),
            )
            .about(&stmt.lhs)
        })?;
        let actual = type_expr(&ctx, &stmt.rhs)?;
        if actual != declared {
            return Err(TypeError::new(
                TypeErrorKind::AssignTypeMismatch,
                stmt.pos,
                format!(
                    "variable '{}' has type {declared} but is assigned an expression of type {actual}",
                    stmt.lhs
                ),
            )
            .about(&stmt.lhs));
        }
    }
    Ok(ctx)
}
