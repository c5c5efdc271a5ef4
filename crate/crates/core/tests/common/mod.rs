//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hquery::frontend::{
    BinOp, Binding, Expr, FormatSpec, FromItem, Hierarchy, OrderItem, Query, Script, Stmt, Strategy as Search, UnOp,
};
use hquery::recursion::{EdgeRef, StateGraph};
use hquery::worlds::{gridworld::GridMap, hanoi};
use hquery::Value;
use proptest::prelude::*;

// ---------------------------------------------------------------- ASTs

pub fn ident() -> impl Strategy<Value = String> {
    "[a-z_][a-z0-9_]{0,5}".prop_filter("reserved", |s| {
        !hquery::frontend::is_reserved(s) && !matches!(s.as_str(), "asc" | "desc")
    })
}

pub fn literal() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::None),
        any::<bool>().prop_map(Value::Bool),
        (0i64..=i64::MAX).prop_map(Value::Int),
        (0.0f64..1e12).prop_map(Value::Float),
        prop::num::f64::POSITIVE.prop_filter("finite", |f| f.is_finite()).prop_map(Value::Float),
        "[ -~\n\t\u{e9}\u{1f600}]{0,8}".prop_map(Value::Str),
    ]
}

const OPS: [BinOp; 12] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
];

fn list_of(e: impl Strategy<Value = Expr> + Clone, lo: usize, hi: usize) -> impl Strategy<Value = Vec<Expr>> {
    prop::collection::vec(e, lo..=hi)
}

fn strategies() -> impl Strategy<Value = Vec<Search>> {
    let mode = prop_oneof![
        Just(None),
        Just(Some(Search::NoCycle)),
        Just(Some(Search::Unique)),
        (1u64..50).prop_map(|n| Some(Search::Memorize(n))),
    ];
    (mode, prop::option::of(1u64..2000), any::<bool>()).prop_map(|(mode, max, flip)| {
        let mut out: Vec<Search> = mode.into_iter().chain(max.map(Search::Maximum)).collect();
        if flip {
            out.reverse();
        }
        out
    })
}

fn query(e: BoxedStrategy<Expr>) -> impl Strategy<Value = Query> {
    let binding = (ident(), e.clone()).prop_map(|(name, value)| Binding { name, value }).boxed();
    let hierarchy = (
        prop::collection::vec(binding.clone(), 1..3),
        strategies(),
        prop::collection::vec(binding, 1..3),
        e.clone(),
    )
        .prop_map(|(start, strategies, connect, stop)| Hierarchy {
            start,
            strategies,
            connect,
            stop,
        });
    let from = (prop::option::of(ident()), e.clone()).prop_map(|(name, source)| FromItem { name, source });
    let order = (e.clone(), any::<bool>()).prop_map(|(expr, descending)| OrderItem { expr, descending });
    let format = (ident(), prop::option::of(list_of(e.clone(), 0, 2))).prop_map(|(name, args)| FormatSpec { name, args });
    (
        list_of(e.clone(), 1, 3),
        prop::collection::vec(from, 1..3),
        prop::option::of(e.clone()),
        list_of(e, 0, 2),
        prop::collection::vec(order, 0..2),
        prop::option::of(hierarchy),
        prop::option::of(format),
    )
        .prop_map(|(select, from, filter, group_by, order_by, hierarchy, format)| Query {
            select,
            from,
            filter,
            group_by,
            order_by,
            hierarchy,
            format,
        })
}

pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        4 => literal().prop_map(Expr::Literal),
        2 => ident().prop_map(Expr::Var),
        1 => prop::option::of(ident()).prop_map(Expr::This),
    ];
    leaf.prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            3 => (prop::sample::select(&OPS[..]), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
            }),
            1 => (prop_oneof![Just(UnOp::Neg), Just(UnOp::Not)], inner.clone())
                .prop_map(|(op, e)| Expr::Unary { op, expr: Box::new(e) }),
            1 => list_of(inner.clone(), 0, 3).prop_map(Expr::List),
            1 => (ident(), list_of(inner.clone(), 0, 3)).prop_map(|(name, args)| Expr::Call { name, args }),
            1 => (inner.clone(), list_of(inner.clone(), 1, 2), prop::option::of(list_of(inner.clone(), 1, 2)))
                .prop_map(|(c, then, otherwise)| Expr::If { cond: Box::new(c), then, otherwise }),
            1 => query(inner).prop_map(|q| Expr::Query(Box::new(q))),
        ]
    })
    .boxed()
}

pub fn script() -> impl Strategy<Value = Script> {
    let stmt = prop_oneof![
        expr().prop_map(Stmt::Expr),
        (ident(), prop::option::of(prop_oneof![(0u32..1000).prop_map(f64::from), 0.0f64..100.0]), expr())
            .prop_map(|(name, ttl, value)| Stmt::Assign { name, ttl, value }),
    ];
    prop::collection::vec(stmt, 1..4).prop_map(Script::new)
}

/// Query-free, call-free expressions over the variables `a`, `b` and `c`.
pub fn pure_expr() -> BoxedStrategy<Expr> {
    let small = prop_oneof![
        (-5i64..20).prop_map(Value::Int),
        (-4.0f64..4.0).prop_map(|f| Value::Float((f * 4.0).round() / 4.0)),
        any::<bool>().prop_map(Value::Bool),
        Just(Value::None),
        Just(Value::str("s")),
    ];
    let leaf = prop_oneof![
        3 => small.prop_map(Expr::Literal),
        1 => prop::sample::select(vec!["a", "b", "c"]).prop_map(|n| Expr::Var(n.to_string())),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            4 => (prop::sample::select(&OPS[..]), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
            }),
            1 => (prop_oneof![Just(UnOp::Neg), Just(UnOp::Not)], inner.clone())
                .prop_map(|(op, e)| Expr::Unary { op, expr: Box::new(e) }),
            1 => list_of(inner.clone(), 0, 3).prop_map(Expr::List),
            1 => (inner.clone(), list_of(inner.clone(), 1, 2), prop::option::of(list_of(inner, 1, 2)))
                .prop_map(|(c, then, otherwise)| Expr::If { cond: Box::new(c), then, otherwise }),
        ]
    })
    .boxed()
}

/// Straightforward evaluation of the AST, without compiling it.
pub fn eval_ast(e: &Expr, vars: &BTreeMap<String, Value>) -> Result<Value, String> {
    let err = |e: hquery::value::ValueError| e.to_string();
    Ok(match e {
        Expr::Literal(v) => v.clone(),
        Expr::List(items) => Value::List(items.iter().map(|i| eval_ast(i, vars)).collect::<Result<_, _>>()?),
        Expr::Var(n) => vars.get(n).cloned().ok_or_else(|| format!("unknown variable `{n}`"))?,
        Expr::Unary { op: UnOp::Neg, expr } => eval_ast(expr, vars)?.neg().map_err(err)?,
        Expr::Unary { op: UnOp::Not, expr } => Value::Bool(!eval_ast(expr, vars)?.truthy()),
        Expr::Binary { op: BinOp::And, lhs, rhs } => {
            Value::Bool(eval_ast(lhs, vars)?.truthy() && eval_ast(rhs, vars)?.truthy())
        }
        Expr::Binary { op: BinOp::Or, lhs, rhs } => {
            Value::Bool(eval_ast(lhs, vars)?.truthy() || eval_ast(rhs, vars)?.truthy())
        }
        Expr::Binary { op, lhs, rhs } => {
            let (a, b) = (eval_ast(lhs, vars)?, eval_ast(rhs, vars)?);
            let ord = |want: &dyn Fn(std::cmp::Ordering) -> bool| -> Result<Value, String> {
                Ok(Value::Bool(a.compare(&b, op.symbol()).map_err(err)?.is_some_and(want)))
            };
            match op {
                BinOp::Add => a.add(&b).map_err(err)?,
                BinOp::Sub => a.sub(&b).map_err(err)?,
                BinOp::Mul => a.mul(&b).map_err(err)?,
                BinOp::Div => a.div(&b).map_err(err)?,
                BinOp::Eq => Value::Bool(a.deep_eq(&b)),
                BinOp::Ne => Value::Bool(!a.deep_eq(&b)),
                BinOp::Lt => ord(&|o| o.is_lt())?,
                BinOp::Le => ord(&|o| o.is_le())?,
                BinOp::Gt => ord(&|o| o.is_gt())?,
                BinOp::Ge => ord(&|o| o.is_ge())?,
                BinOp::And | BinOp::Or => unreachable!(),
            }
        }
        Expr::If { cond, then, otherwise } => {
            let c = eval_ast(cond, vars)?;
            let branch = if c.truthy() { Some(then) } else { otherwise.as_ref() };
            match branch {
                Some(items) => {
                    let mut last = Value::None;
                    for i in items {
                        last = eval_ast(i, vars)?;
                    }
                    last
                }
                None => c,
            }
        }
        other => return Err(format!("unsupported in the reference evaluator: {other:?}")),
    })
}

// ---------------------------------------------------------------- graphs

/// Every simple root-to-terminal hop sequence of at most `max_len` hops, by
/// exhaustive depth-first search.
pub fn brute_force_paths(g: &StateGraph, max_len: usize) -> Vec<Vec<EdgeRef>> {
    fn walk(g: &StateGraph, node: usize, max_len: usize, seen: &mut Vec<usize>, hops: &mut Vec<EdgeRef>, out: &mut Vec<Vec<EdgeRef>>) {
        if hops.len() >= max_len {
            return;
        }
        for (i, t) in g.terminals.iter().enumerate() {
            if t.from == node {
                let mut p = hops.clone();
                p.push(EdgeRef::Terminal(i));
                out.push(p);
            }
        }
        for (i, e) in g.edges.iter().enumerate() {
            if e.from == node && !seen.contains(&e.to) {
                seen.push(e.to);
                hops.push(EdgeRef::Edge(i));
                walk(g, e.to, max_len, seen, hops, out);
                hops.pop();
                seen.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, g.root(), max_len, &mut vec![g.root()], &mut Vec::new(), &mut out);
    out
}

/// Random graph description: node count, edges and goal nodes.
pub fn random_graph(max_nodes: usize) -> impl Strategy<Value = StateGraph> {
    (1..=max_nodes)
        .prop_flat_map(|n| {
            let edge = (0..n, 0..n);
            let degree = 3 * n / 2 + 1;
            (
                Just(n),
                prop::collection::vec(edge, 0..degree),
                prop::collection::vec(0..n, 0..=(n / 4 + 1)),
                prop::collection::vec(any::<u8>(), 0..(degree + 8)),
            )
        })
        .prop_map(|(n, edges, goals, shuffle)| {
            let mut g = StateGraph::new("root");
            for _ in 1..n {
                g.add_node();
            }
            // interleave edges and terminal hops so discovery order mixes them
            let mut ops: Vec<(bool, usize, usize)> = edges.into_iter().map(|(a, b)| (false, a, b)).collect();
            ops.extend(goals.into_iter().map(|a| (true, a, a)));
            for (k, s) in shuffle.into_iter().enumerate() {
                if !ops.is_empty() {
                    let (i, j) = (k % ops.len(), s as usize % ops.len());
                    ops.swap(i, j);
                }
            }
            for (i, (terminal, a, b)) in ops.into_iter().enumerate() {
                if terminal {
                    g.add_terminal(a, Value::str(format!("goal{a}")));
                } else {
                    g.add_edge(a, b, Value::Int(i as i64));
                }
            }
            g
        })
}

// ---------------------------------------------------------------- worlds

/// Move sequences of 1..=max_len steps whose final move first produces the
/// goal, exploring every sequence (no pruning of revisits).
pub fn hanoi_sequences(disks: usize, max_len: usize) -> Vec<Vec<[usize; 2]>> {
    fn walk(t: &hanoi::Towers, goal: &hanoi::Towers, left: usize, path: &mut Vec<[usize; 2]>, out: &mut Vec<Vec<[usize; 2]>>) {
        for m in hanoi::MOVES {
            let Some(next) = hanoi::apply(m, t) else { continue };
            path.push(m);
            if &next == goal {
                out.push(path.clone());
            }
            if left > 1 {
                walk(&next, goal, left - 1, path, out);
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(&hanoi::start(disks), &hanoi::goal(disks), max_len, &mut Vec::new(), &mut out);
    out
}

/// Simple 8-connected paths from start to goal of at most `max_len` steps
/// that avoid obstacles and do not pass through the goal.
pub fn grid_paths(map: &GridMap, dirs: &[[i64; 2]], max_len: usize) -> Vec<Vec<[i64; 2]>> {
    fn walk(map: &GridMap, dirs: &[[i64; 2]], left: usize, path: &mut Vec<[i64; 2]>, out: &mut Vec<Vec<[i64; 2]>>) {
        let here = *path.last().unwrap();
        for d in dirs {
            let p = [here[0] + d[0], here[1] + d[1]];
            if !map.in_bounds(p) || map.is_obstacle(p) || path.contains(&p) {
                continue;
            }
            path.push(p);
            if p == map.goal {
                out.push(path[1..].to_vec());
            } else if left > 1 {
                walk(map, dirs, left - 1, path, out);
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(map, dirs, max_len, &mut vec![map.start], &mut out);
    out
}

pub fn moves_value(seq: &[[usize; 2]]) -> Value {
    Value::list(seq.iter().map(|[a, b]| Value::list([Value::Int(*a as i64), Value::Int(*b as i64)])))
}
