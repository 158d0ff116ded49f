//! Augmenting-path perfect matching on dense `n x n` bipartite graphs,
//! with warm restarts after edges disappear.

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

/// A (partial) matching between left vertices (columns) and right vertices
/// (symbols). Search order over right vertices is fixed by `order`.
#[derive(Clone, Debug)]
pub struct Matcher {
    n: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    order: Vec<usize>,
    // BFS scratch
    parent: Vec<usize>,
    visited_right: Vec<bool>,
}

impl Matcher {
    pub fn new(n: usize) -> Self {
        Self::with_order(n, (0..n).collect())
    }

    /// `order` is the sequence in which right vertices are tried.
    pub fn with_order(n: usize, order: Vec<usize>) -> Self {
        debug_assert_eq!(order.len(), n);
        Matcher {
            n,
            left: vec![FREE; n],
            right: vec![FREE; n],
            order,
            parent: vec![FREE; n],
            visited_right: vec![false; n],
        }
    }

    pub fn mate_of_left(&self, u: usize) -> Option<usize> {
        (self.left[u] != FREE).then_some(self.left[u])
    }

    pub fn is_perfect(&self) -> bool {
        self.left.iter().all(|&v| v != FREE)
    }

    /// Removes the edge `(u, v)` from the matching if present.
    pub fn unmatch_edge(&mut self, u: usize, v: usize) {
        if self.left[u] == v {
            self.left[u] = FREE;
            self.right[v] = FREE;
        }
    }

    /// Left-to-right assignment; only meaningful when perfect.
    pub fn assignment(&self) -> &[usize] {
        &self.left
    }

    /// BFS for an augmenting path from free left vertex `root`.
    fn augment_from<F>(&mut self, root: usize, adj: &F) -> bool
    where
        F: Fn(usize, usize) -> bool,
    {
        self.visited_right.iter_mut().for_each(|b| *b = false);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for idx in 0..self.n {
                let v = self.order[idx];
                if self.visited_right[v] || !adj(u, v) {
                    continue;
                }
                self.visited_right[v] = true;
                self.parent[v] = u;
                if self.right[v] == FREE {
                    // Flip the alternating path ending at v.
                    let mut v = v;
                    loop {
                        let u = self.parent[v];
                        let prev = self.left[u];
                        self.left[u] = v;
                        self.right[v] = u;
                        if u == root {
                            return true;
                        }
                        v = prev;
                    }
                }
                queue.push_back(self.right[v]);
            }
        }
        false
    }

    /// Grows the matching to a perfect one using edges accepted by `adj`.
    /// Returns false if some left vertex cannot be matched.
    pub fn complete<F>(&mut self, adj: F) -> bool
    where
        F: Fn(usize, usize) -> bool,
    {
        for u in 0..self.n {
            if self.left[u] == FREE && !self.augment_from(u, &adj) {
                return false;
            }
        }
        true
    }
}

/// A perfect matching as a left-to-right assignment, or `None`.
pub fn perfect_matching<F>(n: usize, adj: F) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    let mut m = Matcher::new(n);
    m.complete(adj).then_some(m.left)
}
