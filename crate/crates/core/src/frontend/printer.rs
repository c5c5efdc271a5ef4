//! Canonical source rendering. `parse(pretty_print(a)) == a` for every AST
//! the parser can produce.

use std::fmt::Write as _;

use super::ast::*;
use crate::value::{format_float, write_quoted, Value};

// Binding strength of each grammar level; a child printed below the level
// its position requires gets parenthesised.
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const SUM: u8 = 5;
const PROD: u8 = 6;
const UNARY: u8 = 7;
const PRIMARY: u8 = 8;

pub fn pretty_print(script: &Script) -> String {
    let mut out = String::new();
    for stmt in &script.statements {
        print_stmt(stmt, &mut out);
        out.push_str(";\n");
    }
    out
}

pub fn print_stmt(stmt: &Stmt, out: &mut String) {
    match stmt {
        Stmt::Assign { name, ttl, value } => {
            out.push_str(name);
            if let Some(ttl) = ttl {
                out.push('{');
                out.push_str(&format_ttl(*ttl));
                out.push('}');
            }
            out.push_str(" = ");
            print_top(value, out);
        }
        Stmt::Expr(e) => print_top(e, out),
    }
}

/// Renders one expression in canonical form.
pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    print_top(expr, &mut out);
    out
}

fn format_ttl(ttl: f64) -> String {
    if ttl.fract() == 0.0 && ttl.abs() < 1e15 {
        format!("{}", ttl as i64)
    } else {
        format_float(ttl)
    }
}

// Statement level: a query needs no parentheses here.
fn print_top(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Query(q) => print_query(q, out),
        e => print_at(e, OR, out),
    }
}

fn level(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary { op, .. } => match op {
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Add | BinOp::Sub => SUM,
            BinOp::Mul | BinOp::Div => PROD,
            _ => CMP,
        },
        Expr::Unary { op: UnOp::Not, .. } => NOT,
        Expr::Unary { op: UnOp::Neg, .. } => UNARY,
        Expr::Literal(v) if is_negative(v) => UNARY,
        // queries swallow trailing operators and commas, so always wrap them
        Expr::Query(_) => 0,
        _ => PRIMARY,
    }
}

fn is_negative(v: &Value) -> bool {
    match *v {
        Value::Int(i) => i < 0,
        Value::Float(f) => f.is_sign_negative(),
        _ => false,
    }
}

fn print_at(expr: &Expr, min: u8, out: &mut String) {
    if level(expr) < min {
        out.push('(');
        print_bare(expr, out);
        out.push(')');
    } else {
        print_bare(expr, out);
    }
}

fn print_bare(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Literal(v) => print_literal(v, out),
        Expr::List(items) => {
            out.push('[');
            print_list(items, out);
            out.push(']');
        }
        Expr::Var(name) => out.push_str(name),
        Expr::This(None) => out.push_str("this"),
        Expr::This(Some(src)) => {
            out.push_str(src);
            out.push_str(".this");
        }
        Expr::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            print_list(args, out);
            out.push(')');
        }
        Expr::Binary { op, lhs, rhs } => {
            let (l, r) = match level(expr) {
                CMP => (SUM, SUM),
                lvl => (lvl, lvl + 1),
            };
            print_at(lhs, l, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            print_at(rhs, r, out);
        }
        Expr::Unary { op: UnOp::Not, expr } => {
            out.push_str("NOT ");
            print_at(expr, NOT, out);
        }
        Expr::Unary { op: UnOp::Neg, expr } => {
            out.push('-');
            print_at(expr, UNARY, out);
        }
        Expr::If {
            cond,
            then,
            otherwise,
        } => {
            out.push_str("IF(");
            print_at(cond, OR, out);
            out.push_str("; ");
            print_list(then, out);
            if let Some(otherwise) = otherwise {
                out.push_str("; ");
                print_list(otherwise, out);
            }
            out.push(')');
        }
        Expr::Query(q) => print_query(q, out),
    }
}

fn print_list(items: &[Expr], out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        print_at(item, OR, out);
    }
}

fn print_literal(v: &Value, out: &mut String) {
    match v {
        Value::Bool(true) => out.push_str("True"),
        Value::Bool(false) => out.push_str("False"),
        Value::None => out.push_str("None"),
        Value::Float(f) if f.is_finite() => out.push_str(&format_float(*f)),
        Value::Str(s) => write_quoted(s, out),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_literal(item, out);
            }
            out.push(']');
        }
        // ints, and values with no literal syntax (dicts, entities, NaN)
        other => out.push_str(&other.serialize()),
    }
}

fn print_query(q: &Query, out: &mut String) {
    out.push_str("SELECT ");
    print_list(&q.select, out);
    out.push_str(" FROM ");
    for (i, item) in q.from.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(name) = &item.name {
            let _ = write!(out, "{name} = ");
        }
        print_at(&item.source, OR, out);
    }
    if let Some(filter) = &q.filter {
        out.push_str(" WHERE ");
        print_at(filter, OR, out);
    }
    if !q.group_by.is_empty() {
        out.push_str(" GROUP BY ");
        print_list(&q.group_by, out);
    }
    if !q.order_by.is_empty() {
        out.push_str(" ORDER BY ");
        for (i, item) in q.order_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            print_at(&item.expr, OR, out);
            if item.descending {
                out.push_str(" DESC");
            }
        }
    }
    if let Some(h) = &q.hierarchy {
        out.push_str(" START WITH ");
        print_bindings(&h.start, out);
        out.push_str(" CONNECT BY ");
        for s in &h.strategies {
            match s {
                Strategy::NoCycle => out.push_str("NO CYCLE "),
                Strategy::Unique => out.push_str("UNIQUE "),
                Strategy::Memorize(n) => {
                    let _ = write!(out, "MEMORIZE {n} ");
                }
                Strategy::Maximum(n) => {
                    let _ = write!(out, "MAXIMUM {n} ");
                }
            }
        }
        print_bindings(&h.connect, out);
        out.push_str(" STOP WITH ");
        print_at(&h.stop, OR, out);
    }
    if let Some(format) = &q.format {
        out.push_str(" AS ");
        out.push_str(&format.name);
        if let Some(args) = &format.args {
            out.push('(');
            print_list(args, out);
            out.push(')');
        }
    }
}

fn print_bindings(bindings: &[Binding], out: &mut String) {
    for (i, b) in bindings.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&b.name);
        out.push_str(" = ");
        print_at(&b.value, OR, out);
    }
}
