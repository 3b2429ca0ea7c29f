//! Integral max-flow by blocking flows on BFS level graphs.

use super::HarnessError;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Arc {
    to: usize,
    cap: i64,
    flow: i64,
}

/// Arcs come in pairs `(i, i ^ 1)`; flow on `i ^ 1` is the negation of flow
/// on `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    n: usize,
    source: usize,
    sink: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize, source: usize, sink: usize) -> Result<Self, HarnessError> {
        if source >= n || sink >= n || source == sink {
            return Err(HarnessError::InvalidNetwork(format!(
                "need distinct source and sink below {n}, got {source} and {sink}"
            )));
        }
        Ok(Self {
            n,
            source,
            sink,
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    fn push_pair(&mut self, u: usize, v: usize, cap: u64, back: u64) -> usize {
        assert!(u < self.n && v < self.n, "arc endpoint out of range");
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap: cap as i64, flow: 0 });
        self.arcs.push(Arc { to: u, cap: back as i64, flow: 0 });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Directed arc `u → v`; returns its id.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> usize {
        self.push_pair(u, v, cap, 0)
    }

    /// Capacity `cap` in each direction; the net flow is at most `cap`.
    pub fn add_edge_undirected(&mut self, u: usize, v: usize, cap: u64) -> usize {
        self.push_pair(u, v, cap, cap)
    }

    /// Net flow on arc `id` in its forward direction.
    pub fn flow(&self, id: usize) -> i64 {
        self.arcs[id].flow
    }

    /// Endpoints of arc `id`.
    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        (self.arcs[id ^ 1].to, self.arcs[id].to)
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    fn levels(&self) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.n];
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > arc.flow && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[self.sink] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, limit: i64, level: &[usize], next: &mut [usize]) -> i64 {
        if u == self.sink {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let a = self.adj[u][next[u]];
            let (to, room) = (self.arcs[a].to, self.arcs[a].cap - self.arcs[a].flow);
            if room > 0 && level[to] == level[u] + 1 {
                let pushed = self.augment(to, limit.min(room), level, next);
                if pushed > 0 {
                    self.arcs[a].flow += pushed;
                    self.arcs[a ^ 1].flow -= pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Maximizes the flow in place and returns its value.
    pub fn max_flow(&mut self) -> u64 {
        let mut total = 0;
        while let Some(level) = self.levels() {
            let mut next = vec![0; self.n];
            loop {
                let pushed = self.augment(self.source, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total as u64
    }

    /// Current flow value out of the source.
    pub fn value(&self) -> i64 {
        self.adj[self.source].iter().map(|&a| self.arcs[a].flow).sum()
    }

    /// Vertices reachable from the source in the residual network.
    pub fn source_side(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > arc.flow && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }

    /// Total capacity of arcs leaving `side`.
    pub fn cut_capacity(&self, side: &[bool]) -> u64 {
        (0..self.arcs.len())
            .filter(|&a| {
                let (u, v) = self.endpoints(a);
                side[u] && !side[v]
            })
            .map(|a| self.arcs[a].cap as u64)
            .sum()
    }

    /// Checks capacity and conservation at every arc and vertex.
    pub fn is_feasible(&self) -> bool {
        let caps = self.arcs.iter().all(|a| a.flow <= a.cap);
        let mut excess = vec![0i64; self.n];
        for (id, arc) in self.arcs.iter().enumerate() {
            excess[arc.to] += arc.flow;
            excess[self.arcs[id ^ 1].to] -= arc.flow;
        }
        caps && (0..self.n).all(|v| v == self.source || v == self.sink || excess[v] == 0)
    }

    /// Peels unit `s → t` paths off the current flow. Each path is a list of
    /// arc ids; flow cycles are left out.
    pub fn path_decomposition(&self) -> Vec<Vec<usize>> {
        let mut rest: Vec<i64> = self.arcs.iter().map(|a| a.flow.max(0)).collect();
        let mut paths = Vec::new();
        loop {
            let mut parent = vec![usize::MAX; self.n];
            let mut seen = vec![false; self.n];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let to = self.arcs[a].to;
                    if rest[a] > 0 && !seen[to] {
                        seen[to] = true;
                        parent[to] = a;
                        queue.push_back(to);
                    }
                }
            }
            if !seen[self.sink] {
                break;
            }
            let mut path = Vec::new();
            let mut v = self.sink;
            while v != self.source {
                let a = parent[v];
                rest[a] -= 1;
                path.push(a);
                v = self.arcs[a ^ 1].to;
            }
            path.reverse();
            paths.push(path);
        }
        paths
    }

    /// Vertex sequence of an arc path.
    pub fn path_vertices(&self, path: &[usize]) -> Vec<usize> {
        let mut out = vec![self.source];
        out.extend(path.iter().map(|&a| self.arcs[a].to));
        out
    }
}
