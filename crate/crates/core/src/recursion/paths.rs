use std::collections::VecDeque;

use super::graph::StateGraph;
use crate::value::Value;

/// One hop of an enumerated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeRef {
    Edge(usize),
    Terminal(usize),
}

/// Simple root-to-goal paths of at most `max_len` hops, shortest first and,
/// within one length, in lexicographic edge-discovery order. A path's final
/// hop is always a terminal edge.
pub fn enumerate_path_edges(g: &StateGraph, max_len: usize, cap: Option<usize>) -> Vec<Vec<EdgeRef>> {
    let n = g.node_count();
    let mut out = Vec::new();
    if n == 0 || cap == Some(0) {
        return out;
    }

    // outgoing hops per node, in discovery order
    let mut adj: Vec<Vec<(usize, EdgeRef)>> = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        adj[e.from].push((e.order, EdgeRef::Edge(i)));
    }
    for (i, t) in g.terminals.iter().enumerate() {
        adj[t.from].push((t.order, EdgeRef::Terminal(i)));
    }
    for hops in &mut adj {
        hops.sort_unstable_by_key(|(order, _)| *order);
    }

    // backward pass: fewest hops from each node to a goal emission
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &g.edges {
        reverse[e.to].push(e.from);
    }
    let mut to_goal = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for t in &g.terminals {
        if to_goal[t.from] == usize::MAX {
            to_goal[t.from] = 1;
            queue.push_back(t.from);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &reverse[v] {
            if to_goal[u] == usize::MAX {
                to_goal[u] = to_goal[v] + 1;
                queue.push_back(u);
            }
        }
    }

    let root = g.root();
    let mut on_path = vec![false; n];
    for len in 1..=max_len {
        if to_goal[root] > len {
            continue;
        }
        // forward pass for exactly `len` hops, pruned by the backward distances
        let mut hops: Vec<EdgeRef> = Vec::with_capacity(len);
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        on_path[root] = true;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let depth = hops.len();
            let Some(&(_, hop)) = adj[node].get(*next) else {
                on_path[node] = false;
                stack.pop();
                hops.pop();
                continue;
            };
            *next += 1;
            match hop {
                EdgeRef::Terminal(_) => {
                    if depth + 1 == len {
                        let mut path = hops.clone();
                        path.push(hop);
                        out.push(path);
                        if cap.is_some_and(|c| out.len() >= c) {
                            return out;
                        }
                    }
                }
                EdgeRef::Edge(i) => {
                    let to = g.edges[i].to;
                    let remaining = len - depth - 1;
                    if !on_path[to] && to_goal[to] <= remaining {
                        on_path[to] = true;
                        hops.push(hop);
                        stack.push((to, 0));
                    }
                }
            }
        }
    }
    out
}

/// Like [`enumerate_path_edges`], materialising each path as its sequence of
/// edge projections.
pub fn enumerate_paths(g: &StateGraph, max_len: usize, cap: Option<usize>) -> Vec<Vec<Value>> {
    enumerate_path_edges(g, max_len, cap)
        .into_iter()
        .map(|path| {
            path.into_iter()
                .map(|hop| match hop {
                    EdgeRef::Edge(i) => g.edges[i].label.clone(),
                    EdgeRef::Terminal(i) => g.terminals[i].label.clone(),
                })
                .collect()
        })
        .collect()
}
