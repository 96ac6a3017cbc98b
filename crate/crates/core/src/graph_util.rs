use std::collections::VecDeque;

use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components of an adjacency list.
pub(crate) fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(adj.len(), 0);
    for _ in 0..adj.len() {
        g.add_node(());
    }
    for (u, succ) in adj.iter().enumerate() {
        for &w in succ {
            g.add_edge(NodeIndex::new(u), NodeIndex::new(w), ());
        }
    }
    petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

pub(crate) fn reachable(adj: &[Vec<usize>], starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for s in starts {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

pub(crate) fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (u, succ) in adj.iter().enumerate() {
        for &w in succ {
            rev[w].push(u);
        }
    }
    rev
}

/// Bottom SCCs: components with no edge leaving them.
pub(crate) fn bottom_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = sccs(adj);
    let mut comp_of = vec![0; adj.len()];
    for (i, c) in comps.iter().enumerate() {
        for &u in c {
            comp_of[u] = i;
        }
    }
    comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&u| adj[u].iter().all(|&w| comp_of[w] == *i)))
        .map(|(_, c)| c.clone())
        .collect()
}
