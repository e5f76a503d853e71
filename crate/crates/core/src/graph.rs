//! Small directed-graph helpers: reachability, strongly connected
//! components, and bottom components of the condensation. Everything is
//! iterative; expanded machines can have hundreds of thousands of nodes.

use alloc::vec;
use alloc::vec::Vec;

/// Nodes reachable from `start`, including `start` itself.
pub fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Strongly connected components, Kosaraju style with explicit stacks.
/// Components come out in topological order of the condensation (sources
/// first), each sorted ascending.
pub fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    // First pass: finish order on the forward graph.
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        // Stack entries are (node, next child index).
        let mut stack = vec![(root, 0usize)];
        visited[root] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut radj = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }

    // Second pass: sweep the reverse graph in reverse finish order.
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &root in order.iter().rev() {
        if comp_of[root] != usize::MAX {
            continue;
        }
        let cid = comps.len();
        let mut comp = Vec::new();
        let mut stack = vec![root];
        comp_of[root] = cid;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &radj[v] {
                if comp_of[w] == usize::MAX {
                    comp_of[w] = cid;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Components with no edge leaving them; these are exactly the minimal
/// non-empty closed node sets. Sorted by their smallest member.
pub fn bottom_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = sccs(adj);
    let mut comp_of = vec![usize::MAX; adj.len()];
    for (cid, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = cid;
        }
    }
    let mut out: Vec<Vec<usize>> = comps
        .into_iter()
        .filter(|comp| {
            comp.iter()
                .all(|&v| adj[v].iter().all(|&w| comp_of[w] == comp_of[v]))
        })
        .collect();
    out.sort_by_key(|comp| comp[0]);
    out
}
