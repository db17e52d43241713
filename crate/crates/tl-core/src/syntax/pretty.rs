//! Program printer.
//!
//! Prints one declaration or statement per line. The printer's contract is
//! that its output parses back to an equal tree. Operator chains print bare:
//! the parser reassembles them left to right, so a compound left operand or
//! postfix operand needs no brackets. Only a compound right operand of an
//! infix operator has no bare spelling; the printer parenthesizes it, which
//! for a tree that did not come from the parser records the grouping as an
//! explicit paren node on reparse without changing meaning.

use std::fmt::Write;

use super::{Expr, ExprKind, Program, Qualifier};

/// Renders a program as concrete syntax that parses back to an equal tree.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for decl in &program.declarations {
        let qualifier = match decl.qualifier {
            Qualifier::None => "",
            Qualifier::Input => "input ",
            Qualifier::Output => "output ",
        };
        write!(out, "var {qualifier}{} : [", decl.name).unwrap();
        for (k, d) in decl.extents.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{d}").unwrap();
        }
        out.push_str("]\n");
    }
    if !program.declarations.is_empty() && !program.statements.is_empty() {
        out.push('\n');
    }
    for stmt in &program.statements {
        write!(out, "{} = ", stmt.lhs).unwrap();
        write_expr(&mut out, &stmt.rhs);
        out.push('\n');
    }
    out
}

fn write_expr(out: &mut String, expr: &Expr) {
    match &expr.kind {
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Paren(inner) => {
            out.push('(');
            write_expr(out, inner);
            out.push(')');
        }
        ExprKind::Elem(op, lhs, rhs) => {
            write_expr(out, lhs);
            write!(out, " {} ", op.symbol()).unwrap();
            write_right_operand(out, rhs);
        }
        ExprKind::OuterProduct(lhs, rhs) => {
            write_expr(out, lhs);
            out.push_str(" # ");
            write_right_operand(out, rhs);
        }
        ExprKind::Contract(operand, pair) => {
            write_expr(out, operand);
            write!(out, " . {pair}").unwrap();
        }
        ExprKind::Transpose(operand, pair) => {
            write_expr(out, operand);
            write!(out, " ^ {pair}").unwrap();
        }
    }
}

/// A right operand must read as a single primary, so anything compound gets
/// wrapped.
fn write_right_operand(out: &mut String, expr: &Expr) {
    match expr.kind {
        ExprKind::Var(_) | ExprKind::Paren(_) => write_expr(out, expr),
        _ => {
            out.push('(');
            write_expr(out, expr);
            out.push(')');
        }
    }
}
