use std::collections::{HashMap, VecDeque};

use super::{Bindings, Search};
use crate::compiler::{HierarchyIr, QueryIr};
use crate::error::EvalError;
use crate::interpreter::{EvalContext, Evaluator};
use crate::query::Product;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub label: Value,
    /// Discovery position, shared with terminal edges.
    pub order: usize,
}

/// A transition at which WHERE fired.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEdge {
    pub from: usize,
    pub label: Value,
    pub order: usize,
}

/// Deduplicated state graph; node 0 is the root.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateGraph {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    pub edges: Vec<GraphEdge>,
    pub terminals: Vec<TerminalEdge>,
    next_order: usize,
}

impl StateGraph {
    /// A graph holding just the root node.
    pub fn new(root_key: impl Into<String>) -> Self {
        let mut g = StateGraph::default();
        g.node(root_key);
        g
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, id: usize) -> &str {
        &self.keys[id]
    }

    pub fn find(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Id of the node with `key`, creating it if needed. The flag is true
    /// when the node is new.
    pub fn node(&mut self, key: impl Into<String>) -> (usize, bool) {
        let key = key.into();
        if let Some(&id) = self.index.get(&key) {
            return (id, false);
        }
        let id = self.keys.len();
        self.index.insert(key.clone(), id);
        self.keys.push(key);
        (id, true)
    }

    /// Adds an unnamed node (for graphs built directly in tests).
    pub fn add_node(&mut self) -> usize {
        let key = format!("#{}", self.keys.len());
        self.node(key).0
    }

    pub fn add_edge(&mut self, from: usize, to: usize, label: Value) {
        let order = self.bump();
        self.edges.push(GraphEdge {
            from,
            to,
            label,
            order,
        });
    }

    pub fn add_terminal(&mut self, from: usize, label: Value) {
        let order = self.bump();
        self.terminals.push(TerminalEdge { from, label, order });
    }

    fn bump(&mut self) -> usize {
        self.next_order += 1;
        self.next_order - 1
    }
}

pub(crate) fn build(search: &mut Search<'_, '_>, root: Bindings, max_len: usize) -> Result<StateGraph, EvalError> {
    let mut graph = StateGraph::new(search.key(&root));
    let mut queue = VecDeque::from([(0usize, root, 0usize)]);
    while let Some((id, bindings, dist)) = queue.pop_front() {
        if dist >= max_len {
            continue;
        }
        search.expand().map_err(|e| e.at_depth(dist))?;
        let sources = search.sources(&bindings).map_err(|e| e.at_depth(dist))?;
        for row in Product::new(search.q, &sources) {
            let step = search.step(&bindings, row).map_err(|e| e.at_depth(dist))?;
            if step.emitted {
                graph.add_terminal(id, step.projection.clone().unwrap_or(Value::None));
            }
            if let Some(post) = step.next {
                let (to, fresh) = graph.node(search.key(&post));
                graph.add_edge(id, to, step.projection.unwrap_or(Value::None));
                if fresh {
                    queue.push_back((to, post, dist + 1));
                }
            }
        }
    }
    Ok(graph)
}

/// Materialises the MEMORIZE state graph of `q`, expanding nodes up to
/// `max_len` steps from the root.
pub fn build_state_graph(
    ev: &Evaluator<'_>,
    q: &QueryIr,
    h: &HierarchyIr,
    ctx: &EvalContext<'_>,
    max_len: usize,
) -> Result<StateGraph, EvalError> {
    let mut search = Search::new(ev, q, h, ctx);
    let root = search.root_bindings()?;
    build(&mut search, root, max_len)
}
