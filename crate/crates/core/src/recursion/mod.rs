//! Hierarchical (START WITH / CONNECT BY / STOP WITH) query evaluation.
//!
//! Depth-first modes walk the search tree directly with an explicit stack.
//! MEMORIZE first materialises a deduplicated state graph and then lists the
//! simple goal-reaching paths shortest first.

mod graph;
mod paths;

use std::collections::{BTreeMap, HashSet};

pub use graph::{build_state_graph, GraphEdge, StateGraph, TerminalEdge};
pub use paths::{enumerate_path_edges, enumerate_paths, EdgeRef};

use crate::compiler::{HierarchyIr, QueryIr, SearchMode, Symbol};
use crate::error::EvalError;
use crate::interpreter::{EvalContext, Evaluator};
use crate::query::{self, eval_sources, format_result, Product, ResultTable};
use crate::value::Value;

/// CONNECT BY variables of one search node, in first-binding order.
pub type Bindings = Vec<(Symbol, Value)>;

/// Which bindings take part in the state key.
#[derive(Debug, Clone)]
pub enum KeySelector {
    /// Every binding except the listed counters.
    ExcludeCounters(Vec<Symbol>),
    /// Only the named bindings.
    Only(Vec<String>),
}

impl KeySelector {
    fn includes(&self, sym: Symbol, name: &str) -> bool {
        match self {
            KeySelector::ExcludeCounters(counters) => !counters.contains(&sym),
            KeySelector::Only(names) => names.iter().any(|n| n == name),
        }
    }
}

/// Canonical key of a binding map: the serialised, name-sorted map of the
/// non-counter variables.
pub fn state_key(bindings: &BTreeMap<String, Value>, counters: &[&str]) -> String {
    let kept: BTreeMap<String, Value> = bindings
        .iter()
        .filter(|(k, _)| !counters.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Value::Dict(kept).serialize()
}

/// Shared per-query state for both search styles.
pub(crate) struct Search<'a, 'c> {
    pub ev: &'a Evaluator<'a>,
    pub q: &'a QueryIr,
    pub h: &'a HierarchyIr,
    pub ctx: &'a EvalContext<'c>,
    pub keys: KeySelector,
    pub budget: u64,
    pub expansions: u64,
}

/// Outcome of evaluating one FROM row at one node.
pub(crate) struct Step {
    /// Projection, present when the row emitted or continues the search.
    pub projection: Option<Value>,
    pub emitted: bool,
    /// Post-update bindings, absent when STOP WITH fired.
    pub next: Option<Bindings>,
}

impl<'a, 'c> Search<'a, 'c> {
    pub(crate) fn new(ev: &'a Evaluator<'a>, q: &'a QueryIr, h: &'a HierarchyIr, ctx: &'a EvalContext<'c>) -> Self {
        let keys = match &ev.interp.options().state_keys {
            Some(names) => KeySelector::Only(names.clone()),
            None => KeySelector::ExcludeCounters(h.counters.clone()),
        };
        Self {
            ev,
            q,
            h,
            ctx,
            keys,
            budget: ev.interp.options().max_nodes,
            expansions: 0,
        }
    }

    /// START WITH bindings; each may refer to the ones before it.
    pub(crate) fn root_bindings(&self) -> Result<Bindings, EvalError> {
        let mut bindings: Bindings = Vec::with_capacity(self.h.start.len());
        for (sym, expr) in &self.h.start {
            let v = {
                let ctx = EvalContext::child(self.ctx, Vec::new(), &bindings);
                self.ev.eval(expr, &ctx)?
            };
            bindings.push((*sym, v));
        }
        Ok(bindings)
    }

    pub(crate) fn key(&self, bindings: &Bindings) -> String {
        let map: BTreeMap<String, Value> = bindings
            .iter()
            .filter(|(sym, _)| self.keys.includes(*sym, self.ev.name(*sym)))
            .map(|(sym, v)| (self.ev.name(*sym).to_string(), v.clone()))
            .collect();
        Value::Dict(map).serialize()
    }

    pub(crate) fn expand(&mut self) -> Result<(), EvalError> {
        self.expansions += 1;
        self.ev.interp.bump_expansions();
        if self.expansions > self.budget {
            return Err(EvalError::BudgetExceeded {
                budget: self.budget,
            });
        }
        Ok(())
    }

    pub(crate) fn sources(&self, bindings: &Bindings) -> Result<Vec<Vec<Value>>, EvalError> {
        let ctx = EvalContext::child(self.ctx, Vec::new(), bindings);
        eval_sources(self.ev, self.q, &ctx)
    }

    /// WHERE and STOP WITH see the pre-update bindings plus `this`; the
    /// CONNECT BY right-hand sides are all evaluated before any is assigned.
    pub(crate) fn step(&self, bindings: &Bindings, row: Vec<(Option<Symbol>, Value)>) -> Result<Step, EvalError> {
        let ctx = EvalContext::child(self.ctx, row, bindings);
        let emitted = match &self.q.filter {
            Some(f) => self.ev.eval(f, &ctx)?.truthy(),
            None => true,
        };
        let stopped = self.ev.eval(&self.h.stop, &ctx)?.truthy();
        let projection = if emitted || !stopped {
            Some(self.project(&ctx)?)
        } else {
            None
        };
        let next = if stopped {
            None
        } else {
            let updates = self
                .h
                .connect
                .iter()
                .map(|(sym, e)| Ok((*sym, self.ev.eval(e, &ctx)?)))
                .collect::<Result<Vec<_>, EvalError>>()?;
            let mut post = bindings.clone();
            for (sym, v) in updates {
                match post.iter_mut().find(|(s, _)| *s == sym) {
                    Some(slot) => slot.1 = v,
                    None => post.push((sym, v)),
                }
            }
            Some(post)
        };
        Ok(Step {
            projection,
            emitted,
            next,
        })
    }

    fn project(&self, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
        let mut cells = self
            .q
            .select
            .iter()
            .map(|item| query::project_item(self.ev, item, ctx, None))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if cells.len() == 1 {
            cells.pop().unwrap()
        } else {
            Value::List(cells)
        })
    }
}

struct Frame {
    bindings: Bindings,
    sources: Vec<Vec<Value>>,
    next_row: usize,
    /// Key held in the ancestor set while this frame is on the stack.
    ancestor_key: Option<String>,
}

/// Depth-first search for the default, NO CYCLE and UNIQUE modes. Returns
/// the emitted paths in discovery order.
pub(crate) fn depth_first(search: &mut Search<'_, '_>, root: Bindings) -> Result<Vec<Value>, EvalError> {
    let mode = search.h.strategy.mode;
    let cap = search.h.strategy.maximum.map(|m| m as usize);
    let mut results = Vec::new();
    let mut path: Vec<Value> = Vec::new();
    let mut ancestors: HashSet<String> = HashSet::new();
    let mut visited: HashSet<String> = HashSet::new();

    let root_key = match mode {
        SearchMode::DefaultDfs => None,
        _ => Some(search.key(&root)),
    };
    let mut root_ancestor = None;
    match (mode, root_key) {
        (SearchMode::NoCycle, Some(k)) => {
            ancestors.insert(k.clone());
            root_ancestor = Some(k);
        }
        (SearchMode::Unique, Some(k)) => {
            visited.insert(k);
        }
        _ => {}
    }

    search.expand()?;
    let sources = search.sources(&root).map_err(|e| e.at_depth(0))?;
    let mut stack = vec![Frame {
        bindings: root,
        sources,
        next_row: 0,
        ancestor_key: root_ancestor,
    }];

    while !stack.is_empty() {
        let depth = stack.len() - 1;
        let top = &mut stack[depth];
        let product = Product::new(search.q, &top.sources);
        if top.next_row >= product.len() {
            let done = stack.pop().unwrap();
            if let Some(k) = done.ancestor_key {
                ancestors.remove(&k);
            }
            if depth > 0 {
                path.pop();
            }
            continue;
        }
        let row = product.row(top.next_row);
        top.next_row += 1;

        let step = search.step(&top.bindings, row).map_err(|e| e.at_depth(depth))?;
        if step.emitted {
            let mut emitted = path.clone();
            emitted.push(step.projection.clone().unwrap_or(Value::None));
            results.push(Value::List(emitted));
            if cap.is_some_and(|c| results.len() >= c) {
                return Ok(results);
            }
        }
        let Some(post) = step.next else { continue };

        let mut ancestor_key = None;
        match mode {
            SearchMode::NoCycle => {
                let k = search.key(&post);
                if ancestors.contains(&k) {
                    continue;
                }
                ancestors.insert(k.clone());
                ancestor_key = Some(k);
            }
            SearchMode::Unique => {
                if !visited.insert(search.key(&post)) {
                    continue;
                }
            }
            _ => {}
        }

        search.expand().map_err(|e| e.at_depth(depth + 1))?;
        let sources = search.sources(&post).map_err(|e| e.at_depth(depth + 1))?;
        path.push(step.projection.unwrap_or(Value::None));
        stack.push(Frame {
            bindings: post,
            sources,
            next_row: 0,
            ancestor_key,
        });
    }
    Ok(results)
}

/// Evaluates a hierarchical query. Each result row is one path: the list of
/// per-level projections.
pub fn eval_hierarchical(
    ev: &Evaluator<'_>,
    q: &QueryIr,
    h: &HierarchyIr,
    ctx: &EvalContext<'_>,
) -> Result<Value, EvalError> {
    let mut search = Search::new(ev, q, h, ctx);
    let root = search.root_bindings()?;
    let paths = match h.strategy.mode {
        SearchMode::Memorize(max_len) => {
            let graph = graph::build(&mut search, root, max_len as usize)?;
            enumerate_paths(&graph, max_len as usize, h.strategy.maximum.map(|m| m as usize))
                .into_iter()
                .map(Value::List)
                .collect()
        }
        _ => depth_first(&mut search, root)?,
    };
    let table = ResultTable {
        labels: vec!["path".to_string()],
        rows: paths.into_iter().map(|p| vec![p]).collect(),
    };
    format_result(ev, table, q.format.as_ref(), ctx)
}
