//! Dinic max-flow (shortest augmenting paths via BFS levels) over a generic
//! scalar. Edges whose residual capacity is dust are treated as saturated.

use std::collections::VecDeque;

use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Edge<S> {
    to: usize,
    rev: usize,
    cap: S,
    flow: S,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork<S> {
    graph: Vec<Vec<Edge<S>>>,
    level: Vec<usize>,
    iter: Vec<usize>,
}

/// Handle to a forward edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRef {
    from: usize,
    idx: usize,
}

const UNSEEN: usize = usize::MAX;

impl<S: Scalar> FlowNetwork<S> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            graph: vec![Vec::new(); nodes],
            level: vec![UNSEEN; nodes],
            iter: vec![0; nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: S) -> EdgeRef {
        let idx = self.graph[from].len();
        let rev = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Edge {
            to,
            rev,
            cap,
            flow: S::zero(),
        });
        self.graph[to].push(Edge {
            to: from,
            rev: idx,
            cap: S::zero(),
            flow: S::zero(),
        });
        EdgeRef { from, idx }
    }

    /// Raises (or lowers) the capacity of a forward edge, keeping its flow.
    pub fn set_capacity(&mut self, e: EdgeRef, cap: S) {
        self.graph[e.from][e.idx].cap = cap;
    }

    pub fn flow(&self, e: EdgeRef) -> &S {
        &self.graph[e.from][e.idx].flow
    }

    fn residual(e: &Edge<S>) -> S {
        e.cap.clone() - e.flow.clone()
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = UNSEEN);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if self.level[e.to] == UNSEEN && Self::residual(e) > S::dust() {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[t] != UNSEEN
    }

    fn dfs(&mut self, u: usize, t: usize, limit: S) -> S {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.graph[u].len() {
            let i = self.iter[u];
            let (to, res) = {
                let e = &self.graph[u][i];
                (e.to, Self::residual(e))
            };
            if self.level[to] == self.level[u] + 1 && res > S::dust() {
                let pushed = self.dfs(to, t, S::min_of(limit.clone(), res));
                if pushed > S::zero() {
                    let rev = self.graph[u][i].rev;
                    let e = &mut self.graph[u][i];
                    e.flow = e.flow.clone() + pushed.clone();
                    let r = &mut self.graph[to][rev];
                    r.flow = r.flow.clone() - pushed.clone();
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        S::zero()
    }

    /// Augments from the current flow to a maximum flow; returns the amount added.
    pub fn augment(&mut self, s: usize, t: usize, cap_hint: S) -> S {
        let mut total = S::zero();
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, cap_hint.clone());
                if pushed <= S::zero() {
                    break;
                }
                total = total + pushed;
            }
        }
        total
    }

    /// Current flow out of `s`.
    pub fn value(&self, s: usize) -> S {
        self.graph[s]
            .iter()
            .fold(S::zero(), |acc, e| acc + e.flow.clone())
    }
}
