//! Flat (non-hierarchical) query evaluation and response formatting.

use std::collections::{BTreeMap, HashMap};

use crate::compiler::{FormatIr, Ir, QueryIr, Symbol};
use crate::error::EvalError;
use crate::interpreter::{EvalContext, Evaluator, Registry};
use crate::recursion;
use crate::value::Value;

/// Rows produced by a query before the AS formatting step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub fn eval_query(ev: &Evaluator<'_>, q: &QueryIr, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
    match &q.hierarchy {
        Some(h) => recursion::eval_hierarchical(ev, q, h, ctx),
        None => eval_select(ev, q, ctx),
    }
}

/// Elements a FROM source ranges over.
pub fn expand_source(v: Value, registry: &Registry) -> Vec<Value> {
    match v {
        Value::List(items) => items,
        Value::Dict(map) => map.into_values().collect(),
        Value::Entity(ref e) => registry
            .entity_source(&e.world)
            .and_then(|enumerate| enumerate(e.handle))
            .unwrap_or_else(|| vec![v]),
        scalar => vec![scalar],
    }
}

pub(crate) fn eval_sources(
    ev: &Evaluator<'_>,
    q: &QueryIr,
    ctx: &EvalContext<'_>,
) -> Result<Vec<Vec<Value>>, EvalError> {
    q.sources
        .iter()
        .map(|s| Ok(expand_source(ev.eval(&s.expr, ctx)?, ev.registry())))
        .collect()
}

/// Cartesian product of the sources, rightmost varying fastest.
pub(crate) struct Product<'s> {
    sources: &'s [Vec<Value>],
    names: Vec<Option<Symbol>>,
    index: usize,
    total: usize,
}

impl<'s> Product<'s> {
    pub(crate) fn new(q: &QueryIr, sources: &'s [Vec<Value>]) -> Self {
        let total = sources
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
            .unwrap_or(usize::MAX);
        Self {
            sources,
            names: q.sources.iter().map(|s| s.name).collect(),
            index: 0,
            total,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.total
    }

    /// Row `index` of the product.
    pub(crate) fn row(&self, mut index: usize) -> Vec<(Option<Symbol>, Value)> {
        let mut row = vec![(None, Value::None); self.sources.len()];
        for (k, src) in self.sources.iter().enumerate().rev() {
            row[k] = (self.names[k], src[index % src.len()].clone());
            index /= src.len();
        }
        row
    }
}

impl Iterator for Product<'_> {
    type Item = Vec<(Option<Symbol>, Value)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.index >= self.total {
            return None;
        }
        let row = self.row(self.index);
        self.index += 1;
        Some(row)
    }
}

struct Unit<'r> {
    representative: &'r [(Option<Symbol>, Value)],
    members: Option<Vec<Value>>,
}

pub fn eval_select(ev: &Evaluator<'_>, q: &QueryIr, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
    let sources = eval_sources(ev, q, ctx)?;
    let product = Product::new(q, &sources);
    ev.interp.bump_rows(product.len() as u64);

    let mut kept = Vec::new();
    for (i, row) in product.enumerate() {
        match &q.filter {
            Some(filter) => {
                let row_ctx = EvalContext::child(ctx, row, &[]);
                if ev.eval(filter, &row_ctx).map_err(|e| e.in_row(i))?.truthy() {
                    kept.push(row_ctx.this);
                }
            }
            None => kept.push(row),
        }
    }

    let units: Vec<Unit<'_>> = if q.group_by.is_empty() {
        kept.iter()
            .map(|row| Unit {
                representative: row,
                members: None,
            })
            .collect()
    } else {
        let mut order: Vec<(usize, Vec<Value>)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, row) in kept.iter().enumerate() {
            let row_ctx = EvalContext::child(ctx, row.clone(), &[]);
            let key = q
                .group_by
                .iter()
                .map(|k| ev.eval(k, &row_ctx))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.in_row(i))?;
            let member = row_ctx.this_value().unwrap_or(Value::None);
            let slot = *index
                .entry(Value::List(key).serialize())
                .or_insert_with(|| {
                    order.push((i, Vec::new()));
                    order.len() - 1
                });
            order[slot].1.push(member);
        }
        order
            .into_iter()
            .map(|(first, members)| Unit {
                representative: &kept[first],
                members: Some(members),
            })
            .collect()
    };

    let mut rows = Vec::with_capacity(units.len());
    for (i, unit) in units.iter().enumerate() {
        let row_ctx = EvalContext::child(ctx, unit.representative.to_vec(), &[]);
        let cells = q
            .select
            .iter()
            .map(|item| project_item(ev, item, &row_ctx, unit.members.as_deref()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.in_row(i))?;
        let keys = q
            .order_by
            .iter()
            .map(|(k, _)| ev.eval(k, &row_ctx))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.in_row(i))?;
        rows.push((keys, cells));
    }

    if !q.order_by.is_empty() {
        rows.sort_by(|(a, _), (b, _)| {
            for (k, (_, desc)) in q.order_by.iter().enumerate() {
                let ord = a[k].sort_cmp(&b[k]);
                let ord = if *desc { ord.reverse() } else { ord };
                if ord.is_ne() {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        });
    }

    let table = ResultTable {
        labels: q.labels.clone(),
        rows: rows.into_iter().map(|(_, cells)| cells).collect(),
    };
    format_result(ev, table, q.format.as_ref(), ctx)
}

/// Evaluates one SELECT item. A bare name that is a registered function is
/// called with `this` (or, for aggregates in a grouped query, with the group's
/// members) instead of being looked up as a variable.
pub fn project_item(
    ev: &Evaluator<'_>,
    item: &Ir,
    row_ctx: &EvalContext<'_>,
    members: Option<&[Value]>,
) -> Result<Value, EvalError> {
    if let Ir::Var(sym) = item {
        if let Some(entry) = ev.registry().function(ev.name(*sym)) {
            let arg = match members {
                Some(m) if entry.aggregate => Value::List(m.to_vec()),
                _ => row_ctx.this_value().ok_or(EvalError::ThisOutsideQuery)?,
            };
            return ev.call(*sym, &[arg]);
        }
    }
    ev.eval(item, row_ctx)
}

pub fn format_result(
    ev: &Evaluator<'_>,
    table: ResultTable,
    spec: Option<&FormatIr>,
    ctx: &EvalContext<'_>,
) -> Result<Value, EvalError> {
    let name = spec.map_or("list", |f| f.name.as_str());
    match name {
        "value" => Ok(table
            .rows
            .into_iter()
            .next()
            .and_then(|r| r.into_iter().next())
            .unwrap_or(Value::None)),
        "list" => Ok(Value::List(
            table
                .rows
                .into_iter()
                .map(|mut r| {
                    if r.len() == 1 {
                        r.pop().unwrap()
                    } else {
                        Value::List(r)
                    }
                })
                .collect(),
        )),
        "dict" => Ok(Value::List(
            table
                .rows
                .into_iter()
                .map(|r| {
                    Value::Dict(
                        table
                            .labels
                            .iter()
                            .cloned()
                            .zip(r)
                            .collect::<BTreeMap<_, _>>(),
                    )
                })
                .collect(),
        )),
        other => {
            let formatter = ev
                .registry()
                .formatter(other)
                .ok_or_else(|| EvalError::UnknownFormatter(other.to_string()))?;
            let args = spec
                .and_then(|f| f.args.as_ref())
                .map(|args| args.iter().map(|a| ev.eval(a, ctx)).collect::<Result<Vec<_>, _>>())
                .transpose()?
                .unwrap_or_default();
            formatter(&table, &args).map_err(|e| EvalError::Formatter {
                name: other.to_string(),
                message: e.0,
            })
        }
    }
}
