//! Connectivity of the bus graph.

use alloc::vec;
use alloc::vec::Vec;

/// Union-find over `n` nodes.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Component label per node; labels are the smallest node index in each
/// component.
pub fn components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut d = Dsu::new(n);
    for (a, b) in edges {
        d.union(a, b);
    }
    (0..n).map(|i| d.find(i)).collect()
}

pub fn is_connected(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    n == 0 || components(n, edges).iter().all(|&c| c == 0)
}

/// Nodes not in the component of `root`.
pub fn cut_off_from(
    n: usize,
    root: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<usize> {
    let c = components(n, edges);
    (0..n).filter(|&i| c[i] != c[root]).collect()
}

/// Edges whose single removal disconnects the graph. Parallel edges are
/// listed separately, so a double circuit never shows up here.
pub fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut out = Vec::new();
    let mut timer = 0;
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, parent edge, next adjacency index)
        let mut stack = vec![(start, usize::MAX, 0usize)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(&mut (u, pe, ref mut idx)) = stack.last_mut() {
            if *idx < adj[u].len() {
                let (v, k) = adj[u][*idx];
                *idx += 1;
                if k == pe {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, k, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        out.push(pe);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ring_with_tail() {
        let e = [(0, 1), (1, 2), (2, 0), (2, 3)];
        assert_eq!(bridges(4, &e), vec![3]);
        assert!(is_connected(4, e));
        assert_eq!(cut_off_from(4, 0, e[..3].iter().copied()), vec![3]);
    }

    #[test]
    fn parallel_edges_are_not_bridges() {
        assert!(bridges(2, &[(0, 1), (0, 1)]).is_empty());
    }

    proptest! {
        #[test]
        fn bridges_match_brute_force(
            n in 2usize..8,
            raw in proptest::collection::vec((0usize..8, 0usize..8), 0..14),
        ) {
            let edges: Vec<(usize, usize)> =
                raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let base = components(n, edges.iter().copied());
            let count = |c: &[usize]| { let mut v = c.to_vec(); v.sort(); v.dedup(); v.len() };
            let expected: Vec<usize> = (0..edges.len())
                .filter(|&k| {
                    let rest = edges.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, e)| *e);
                    count(&components(n, rest)) > count(&base)
                })
                .collect();
            prop_assert_eq!(bridges(n, &edges), expected);
        }
    }
}
