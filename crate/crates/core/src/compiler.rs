//! Lowering from the AST to the tree-shaped IR that the evaluators walk.
//!
//! Names are interned, SELECT column labels are precomputed and literal-only
//! subtrees are folded. Nothing else is rewritten.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::frontend::ast::{self, BinOp, Expr, Position, Stmt, UnOp};
use crate::value::{Value, ValueError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

#[derive(Debug, Clone, Default)]
pub struct Interner {
    names: Vec<String>,
    ids: HashMap<String, Symbol>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> Symbol {
        if let Some(&sym) = self.ids.get(name) {
            return sym;
        }
        let sym = Symbol(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), sym);
        sym
    }

    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.names[sym.0 as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ir {
    Literal(Value),
    List(Vec<Ir>),
    Var(Symbol),
    This(Option<Symbol>),
    Call {
        name: Symbol,
        args: Vec<Ir>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Ir>,
        rhs: Box<Ir>,
    },
    Unary {
        op: UnOp,
        expr: Box<Ir>,
    },
    If {
        cond: Box<Ir>,
        then: Vec<Ir>,
        otherwise: Option<Vec<Ir>>,
    },
    Query(Box<QueryIr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryIr {
    pub select: Vec<Ir>,
    /// One label per SELECT item, used as dict keys.
    pub labels: Vec<String>,
    pub sources: Vec<SourceIr>,
    pub filter: Option<Ir>,
    pub group_by: Vec<Ir>,
    pub order_by: Vec<(Ir, bool)>,
    pub hierarchy: Option<HierarchyIr>,
    pub format: Option<FormatIr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceIr {
    pub name: Option<Symbol>,
    pub expr: Ir,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormatIr {
    pub name: String,
    pub args: Option<Vec<Ir>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    DefaultDfs,
    NoCycle,
    Unique,
    /// Materialise the state graph, then enumerate simple paths up to this length.
    Memorize(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStrategy {
    pub mode: SearchMode,
    pub maximum: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyIr {
    pub start: Vec<(Symbol, Ir)>,
    pub strategy: SearchStrategy,
    pub connect: Vec<(Symbol, Ir)>,
    pub stop: Ir,
    /// CONNECT BY variables updated as `v = v +/- <number>`; left out of state keys.
    pub counters: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrStmt {
    Assign {
        name: Symbol,
        ttl: Option<f64>,
        value: Ir,
    },
    Expr(Ir),
}

#[derive(Debug, Clone)]
pub struct Program {
    pub symbols: Interner,
    pub statements: Vec<IrStmt>,
    pub positions: Vec<Position>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("variable `{0}` bound twice in START WITH")]
    DuplicateStartBinding(String),
    #[error("variable `{0}` updated twice in CONNECT BY")]
    DuplicateConnectBinding(String),
    #[error("FROM source name `{0}` used twice")]
    DuplicateSource(String),
    #[error("{0} is not supported in hierarchical queries")]
    UnsupportedInHierarchy(&'static str),
}

pub fn compile(script: &ast::Script) -> Result<Program, CompileError> {
    let mut symbols = Interner::default();
    let mut statements = Vec::with_capacity(script.statements.len());
    for stmt in &script.statements {
        let lowered = match stmt {
            Stmt::Assign { name, ttl, value } => IrStmt::Assign {
                name: symbols.intern(name),
                ttl: *ttl,
                value: lower(value, &mut symbols)?,
            },
            Stmt::Expr(e) => IrStmt::Expr(lower(e, &mut symbols)?),
        };
        statements.push(lowered);
    }
    let mut positions = script.positions.clone();
    positions.resize(statements.len(), Position::default());
    Ok(Program {
        symbols,
        statements,
        positions,
    })
}

/// Lowers a single expression with a caller-owned interner.
pub fn compile_expr(expr: &Expr, symbols: &mut Interner) -> Result<Ir, CompileError> {
    lower(expr, symbols)
}

fn lower(expr: &Expr, syms: &mut Interner) -> Result<Ir, CompileError> {
    Ok(match expr {
        Expr::Literal(v) => Ir::Literal(v.clone()),
        Expr::List(items) => {
            let items = items.iter().map(|e| lower(e, syms)).collect::<Result<Vec<_>, _>>()?;
            if items.iter().all(|i| matches!(i, Ir::Literal(_))) {
                Ir::Literal(Value::List(
                    items
                        .into_iter()
                        .map(|i| match i {
                            Ir::Literal(v) => v,
                            _ => unreachable!(),
                        })
                        .collect(),
                ))
            } else {
                Ir::List(items)
            }
        }
        Expr::Var(name) => Ir::Var(syms.intern(name)),
        Expr::This(src) => Ir::This(src.as_deref().map(|s| syms.intern(s))),
        Expr::Call { name, args } => Ir::Call {
            name: syms.intern(name),
            args: args.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>()?,
        },
        Expr::Binary { op, lhs, rhs } => {
            let lhs = lower(lhs, syms)?;
            let rhs = lower(rhs, syms)?;
            if let (Ir::Literal(a), Ir::Literal(b)) = (&lhs, &rhs) {
                if let Ok(v) = apply_binary(*op, a, b) {
                    if foldable(&v) {
                        return Ok(Ir::Literal(v));
                    }
                }
            }
            Ir::Binary {
                op: *op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            }
        }
        Expr::Unary { op, expr } => {
            let inner = lower(expr, syms)?;
            if let Ir::Literal(v) = &inner {
                if let Ok(folded) = apply_unary(*op, v) {
                    if foldable(&folded) {
                        return Ok(Ir::Literal(folded));
                    }
                }
            }
            Ir::Unary {
                op: *op,
                expr: Box::new(inner),
            }
        }
        Expr::If {
            cond,
            then,
            otherwise,
        } => Ir::If {
            cond: Box::new(lower(cond, syms)?),
            then: then.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>()?,
            otherwise: otherwise
                .as_ref()
                .map(|es| es.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>())
                .transpose()?,
        },
        Expr::Query(q) => Ir::Query(Box::new(lower_query(q, syms)?)),
    })
}

// Non-finite floats have no literal syntax, so they stay unfolded.
fn foldable(v: &Value) -> bool {
    match v {
        Value::Float(f) => f.is_finite(),
        Value::List(items) => items.iter().all(foldable),
        _ => true,
    }
}

fn lower_query(q: &ast::Query, syms: &mut Interner) -> Result<QueryIr, CompileError> {
    let mut seen = HashSet::new();
    for item in &q.from {
        if let Some(name) = &item.name {
            if !seen.insert(name.as_str()) {
                return Err(CompileError::DuplicateSource(name.clone()));
            }
        }
    }

    let labels = q
        .select
        .iter()
        .enumerate()
        .map(|(i, e)| column_label(e, i))
        .collect();

    let hierarchy = match &q.hierarchy {
        Some(h) => {
            if !q.group_by.is_empty() {
                return Err(CompileError::UnsupportedInHierarchy("GROUP BY"));
            }
            if !q.order_by.is_empty() {
                return Err(CompileError::UnsupportedInHierarchy("ORDER BY"));
            }
            Some(lower_hierarchy(h, syms)?)
        }
        None => None,
    };

    Ok(QueryIr {
        select: q.select.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>()?,
        labels,
        sources: q
            .from
            .iter()
            .map(|item| {
                Ok(SourceIr {
                    name: item.name.as_deref().map(|n| syms.intern(n)),
                    expr: lower(&item.source, syms)?,
                })
            })
            .collect::<Result<_, CompileError>>()?,
        filter: q.filter.as_ref().map(|e| lower(e, syms)).transpose()?,
        group_by: q.group_by.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>()?,
        order_by: q
            .order_by
            .iter()
            .map(|o| Ok((lower(&o.expr, syms)?, o.descending)))
            .collect::<Result<_, CompileError>>()?,
        hierarchy,
        format: q
            .format
            .as_ref()
            .map(|f| {
                Ok::<_, CompileError>(FormatIr {
                    name: f.name.clone(),
                    args: f
                        .args
                        .as_ref()
                        .map(|a| a.iter().map(|e| lower(e, syms)).collect::<Result<_, _>>())
                        .transpose()?,
                })
            })
            .transpose()?,
    })
}

/// Label of the i-th SELECT item: function or variable name, source name for
/// `src.this`, `this` for a bare `this`, otherwise `col<i>`.
pub fn column_label(expr: &Expr, index: usize) -> String {
    match expr {
        Expr::Call { name, .. } | Expr::Var(name) => name.clone(),
        Expr::This(Some(src)) => src.clone(),
        Expr::This(None) => "this".to_string(),
        _ => format!("col{index}"),
    }
}

fn lower_hierarchy(h: &ast::Hierarchy, syms: &mut Interner) -> Result<HierarchyIr, CompileError> {
    let mut seen = HashSet::new();
    for b in &h.start {
        if !seen.insert(b.name.as_str()) {
            return Err(CompileError::DuplicateStartBinding(b.name.clone()));
        }
    }
    let mut seen = HashSet::new();
    for b in &h.connect {
        if !seen.insert(b.name.as_str()) {
            return Err(CompileError::DuplicateConnectBinding(b.name.clone()));
        }
    }

    let mut strategy = SearchStrategy {
        mode: SearchMode::DefaultDfs,
        maximum: None,
    };
    for s in &h.strategies {
        match *s {
            ast::Strategy::NoCycle => strategy.mode = SearchMode::NoCycle,
            ast::Strategy::Unique => strategy.mode = SearchMode::Unique,
            ast::Strategy::Memorize(n) => strategy.mode = SearchMode::Memorize(n),
            ast::Strategy::Maximum(n) => strategy.maximum = Some(n),
        }
    }

    let counters = h
        .connect
        .iter()
        .filter(|b| is_counter_update(&b.name, &b.value))
        .map(|b| syms.intern(&b.name))
        .collect();

    Ok(HierarchyIr {
        start: h
            .start
            .iter()
            .map(|b| Ok((syms.intern(&b.name), lower(&b.value, syms)?)))
            .collect::<Result<_, CompileError>>()?,
        strategy,
        connect: h
            .connect
            .iter()
            .map(|b| Ok((syms.intern(&b.name), lower(&b.value, syms)?)))
            .collect::<Result<_, CompileError>>()?,
        stop: lower(&h.stop, syms)?,
        counters,
    })
}

/// `v = v + <number>` or `v = v - <number>`.
fn is_counter_update(name: &str, value: &Expr) -> bool {
    match value {
        Expr::Binary {
            op: BinOp::Add | BinOp::Sub,
            lhs,
            rhs,
        } => {
            matches!(lhs.as_ref(), Expr::Var(v) if v == name)
                && matches!(rhs.as_ref(), Expr::Literal(Value::Int(_) | Value::Float(_)))
        }
        _ => false,
    }
}

/// Binary operator semantics shared by constant folding and evaluation.
/// `AND`/`OR` here are the strict forms; evaluators short-circuit themselves.
pub fn apply_binary(op: BinOp, a: &Value, b: &Value) -> Result<Value, ValueError> {
    use std::cmp::Ordering::*;
    let ordered = |want: fn(std::cmp::Ordering) -> bool| -> Result<Value, ValueError> {
        Ok(Value::Bool(a.compare(b, op.symbol())?.is_some_and(want)))
    };
    match op {
        BinOp::Add => a.add(b),
        BinOp::Sub => a.sub(b),
        BinOp::Mul => a.mul(b),
        BinOp::Div => a.div(b),
        BinOp::Eq => Ok(Value::Bool(a.deep_eq(b))),
        BinOp::Ne => Ok(Value::Bool(!a.deep_eq(b))),
        BinOp::Lt => ordered(|o| o == Less),
        BinOp::Le => ordered(|o| o != Greater),
        BinOp::Gt => ordered(|o| o == Greater),
        BinOp::Ge => ordered(|o| o != Less),
        BinOp::And => Ok(Value::Bool(a.truthy() && b.truthy())),
        BinOp::Or => Ok(Value::Bool(a.truthy() || b.truthy())),
    }
}

pub fn apply_unary(op: UnOp, v: &Value) -> Result<Value, ValueError> {
    match op {
        UnOp::Neg => v.neg(),
        UnOp::Not => Ok(Value::Bool(!v.truthy())),
    }
}

/// Rebuilds source-level syntax from IR, for printing compiled programs.
pub fn lift(ir: &Ir, syms: &Interner) -> Expr {
    let lift_all = |items: &[Ir]| items.iter().map(|i| lift(i, syms)).collect::<Vec<_>>();
    match ir {
        Ir::Literal(v) => Expr::Literal(v.clone()),
        Ir::List(items) => Expr::List(lift_all(items)),
        Ir::Var(s) => Expr::Var(syms.name(*s).to_string()),
        Ir::This(src) => Expr::This(src.map(|s| syms.name(s).to_string())),
        Ir::Call { name, args } => Expr::Call {
            name: syms.name(*name).to_string(),
            args: lift_all(args),
        },
        Ir::Binary { op, lhs, rhs } => Expr::Binary {
            op: *op,
            lhs: Box::new(lift(lhs, syms)),
            rhs: Box::new(lift(rhs, syms)),
        },
        Ir::Unary { op, expr } => Expr::Unary {
            op: *op,
            expr: Box::new(lift(expr, syms)),
        },
        Ir::If {
            cond,
            then,
            otherwise,
        } => Expr::If {
            cond: Box::new(lift(cond, syms)),
            then: lift_all(then),
            otherwise: otherwise.as_deref().map(lift_all),
        },
        Ir::Query(q) => Expr::Query(Box::new(lift_query(q, syms))),
    }
}

fn lift_query(q: &QueryIr, syms: &Interner) -> ast::Query {
    let name = |s: Symbol| syms.name(s).to_string();
    let bindings = |bs: &[(Symbol, Ir)]| {
        bs.iter()
            .map(|(s, ir)| ast::Binding {
                name: name(*s),
                value: lift(ir, syms),
            })
            .collect::<Vec<_>>()
    };
    ast::Query {
        select: q.select.iter().map(|i| lift(i, syms)).collect(),
        from: q
            .sources
            .iter()
            .map(|s| ast::FromItem {
                name: s.name.map(name),
                source: lift(&s.expr, syms),
            })
            .collect(),
        filter: q.filter.as_ref().map(|f| lift(f, syms)),
        group_by: q.group_by.iter().map(|i| lift(i, syms)).collect(),
        order_by: q
            .order_by
            .iter()
            .map(|(e, desc)| ast::OrderItem {
                expr: lift(e, syms),
                descending: *desc,
            })
            .collect(),
        hierarchy: q.hierarchy.as_ref().map(|h| {
            let mut strategies = Vec::new();
            match h.strategy.mode {
                SearchMode::DefaultDfs => {}
                SearchMode::NoCycle => strategies.push(ast::Strategy::NoCycle),
                SearchMode::Unique => strategies.push(ast::Strategy::Unique),
                SearchMode::Memorize(n) => strategies.push(ast::Strategy::Memorize(n)),
            }
            if let Some(n) = h.strategy.maximum {
                strategies.push(ast::Strategy::Maximum(n));
            }
            ast::Hierarchy {
                start: bindings(&h.start),
                strategies,
                connect: bindings(&h.connect),
                stop: lift(&h.stop, syms),
            }
        }),
        format: q.format.as_ref().map(|f| ast::FormatSpec {
            name: f.name.clone(),
            args: f
                .args
                .as_ref()
                .map(|a| a.iter().map(|i| lift(i, syms)).collect()),
        }),
    }
}

/// Canonical source text of a compiled program.
pub fn program_source(program: &Program) -> String {
    let statements = program
        .statements
        .iter()
        .map(|s| match s {
            IrStmt::Assign { name, ttl, value } => Stmt::Assign {
                name: program.symbols.name(*name).to_string(),
                ttl: *ttl,
                value: lift(value, &program.symbols),
            },
            IrStmt::Expr(e) => Stmt::Expr(lift(e, &program.symbols)),
        })
        .collect();
    crate::frontend::pretty_print(&ast::Script::new(statements))
}
