use super::graph::Graph;
use crate::error::{Error, Result};

/// Decides vertex-transitivity by exhibiting, for every vertex, an
/// automorphism that moves vertex 0 onto it (orbit closure skips repeats).
pub fn is_vertex_transitive(g: &Graph, node_budget: u64) -> Result<bool> {
    let n = g.vertex_count();
    let d0 = g.degree(0);
    if (0..n).any(|v| g.degree(v) != d0) {
        return Ok(false);
    }
    let order = bfs_order(g);
    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut orbit = vec![false; n];
    orbit[0] = true;
    let mut nodes = 0u64;
    for t in 1..n {
        if orbit[t] {
            continue;
        }
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        map[order[0]] = t;
        used[t] = true;
        match extend(g, &order, 1, &mut map, &mut used, &mut nodes, node_budget) {
            Some(true) => {
                generators.push(map);
                close_orbit(&generators, &mut orbit);
            }
            Some(false) => return Ok(false),
            None => return Err(Error::BudgetExhausted("automorphism search".into())),
        }
    }
    Ok(true)
}

fn close_orbit(generators: &[Vec<usize>], orbit: &mut [bool]) {
    let mut stack: Vec<usize> = (0..orbit.len()).filter(|&v| orbit[v]).collect();
    while let Some(v) = stack.pop() {
        for gen in generators {
            let w = gen[v];
            if !orbit[w] {
                orbit[w] = true;
                stack.push(w);
            }
        }
    }
}

fn bfs_order(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for u in g.neighbors(v).ones() {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

/// `None` on budget exhaustion.
fn extend(
    g: &Graph,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    if depth == order.len() {
        return Some(true);
    }
    let v = order[depth];
    for w in 0..g.vertex_count() {
        if used[w] || g.degree(w) != g.degree(v) {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| g.is_adjacent(v, u) == g.is_adjacent(w, map[u]));
        if !consistent {
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        map[v] = w;
        used[w] = true;
        match extend(g, order, depth + 1, map, used, nodes, budget) {
            Some(true) => return Some(true),
            None => return None,
            Some(false) => {}
        }
        map[v] = usize::MAX;
        used[w] = false;
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Provenance;

    #[test]
    fn transitive_examples() {
        assert!(is_vertex_transitive(&Graph::cycle(5), 10_000).unwrap());
        assert!(is_vertex_transitive(&Graph::complete(5), 10_000).unwrap());
        assert!(is_vertex_transitive(&Graph::single_edge(), 10_000).unwrap());
        let petersen = crate::graphs::generate_kneser_graph(5, 2, 100).unwrap();
        assert!(is_vertex_transitive(petersen.graph().unwrap(), 100_000).unwrap());
    }

    #[test]
    fn non_transitive_examples() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)], Provenance::Explicit).unwrap();
        assert!(!is_vertex_transitive(&path, 10_000).unwrap());
        // C3 + C4 is 2-regular but not transitive.
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6), (6, 3)];
        let g = Graph::from_edges(7, &edges, Provenance::Explicit).unwrap();
        assert!(!is_vertex_transitive(&g, 10_000).unwrap());
    }
}
