//! Node-valued filter functions and geodesic distances.
//!
//! Closeness and betweenness use unit edge lengths even on weighted graphs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Sum of incident edge weights.
pub fn weighted_degree(adj: &[Vec<(usize, f64)>]) -> Vec<f64> {
    adj.iter().map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum()).collect()
}

fn bfs(adj: &[Vec<(usize, f64)>], src: usize, dist: &mut [Option<usize>]) {
    dist.iter_mut().for_each(|d| *d = None);
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &(w, _) in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
}

/// `(r - 1) / sum of hop distances`, where `r` is the size of the node's
/// connected component. Isolated nodes get 0.
pub fn closeness(adj: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![None; n];
    (0..n)
        .map(|v| {
            bfs(adj, v, &mut dist);
            let (reached, total) = dist
                .iter()
                .flatten()
                .fold((0usize, 0usize), |(c, s), &d| (c + 1, s + d));
            if total == 0 {
                0.0
            } else {
                (reached - 1) as f64 / total as f64
            }
        })
        .collect()
}

/// Unnormalized shortest-path betweenness of an undirected graph (Brandes),
/// each unordered pair counted once.
pub fn betweenness(adj: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = adj.len();
    let mut cb = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist: Vec<i64> = vec![-1; n];
    let mut delta = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        let mut order = Vec::with_capacity(n);
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = -1);
        delta.iter_mut().for_each(|x| *x = 0.0);
        preds.iter_mut().for_each(Vec::clear);
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = order.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb.iter_mut().for_each(|x| *x /= 2.0);
    cb
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapDist(f64);

impl Eq for HeapDist {}
impl PartialOrd for HeapDist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapDist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Weighted geodesic distances from `src` (edge weights as lengths);
/// `None` for unreachable nodes.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<Option<f64>> {
    let mut dist: Vec<Option<f64>> = vec![None; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(0.0);
    heap.push(Reverse((HeapDist(0.0), src)));
    while let Some(Reverse((HeapDist(d), v))) = heap.pop() {
        if dist[v].is_some_and(|best| d > best) {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if dist[w].is_none_or(|cur| nd < cur) {
                dist[w] = Some(nd);
                heap.push(Reverse((HeapDist(nd), w)));
            }
        }
    }
    dist
}
