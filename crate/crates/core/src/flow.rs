//! Dinic max-flow on small dense-ish graphs.

use std::collections::VecDeque;

pub(crate) struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<u64>,
    original: Vec<u64>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            residual: Vec::new(),
            original: Vec::new(),
            level: vec![0; nodes],
            cursor: vec![0; nodes],
        }
    }

    /// Adds `from -> to` and returns its handle for [`flow`](Self::flow).
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let id = self.to.len();
        self.to.push(to);
        self.residual.push(cap);
        self.original.push(cap);
        self.head[from].push(id);
        self.to.push(from);
        self.residual.push(0);
        self.original.push(0);
        self.head[to].push(id + 1);
        id
    }

    pub(crate) fn flow(&self, edge: usize) -> u64 {
        self.original[edge] - self.residual[edge]
    }

    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0;
        while self.bfs(source, sink) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.dfs(source, sink, u64::MAX);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = u32::MAX);
        self.level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.residual[e] > 0 && self.level[v] == u32::MAX {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] != u32::MAX
    }

    fn dfs(&mut self, u: usize, sink: usize, limit: u64) -> u64 {
        if u == sink {
            return limit;
        }
        while self.cursor[u] < self.head[u].len() {
            let e = self.head[u][self.cursor[u]];
            let v = self.to[e];
            if self.residual[e] > 0 && self.level[v] == self.level[u] + 1 {
                let pushed = self.dfs(v, sink, limit.min(self.residual[e]));
                if pushed > 0 {
                    self.residual[e] -= pushed;
                    self.residual[e ^ 1] += pushed;
                    return pushed;
                }
            }
            self.cursor[u] += 1;
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_flow() {
        // s=0, a=1, b=2, x=3, y=4, t=5
        let mut net = FlowNetwork::new(6);
        net.add_edge(0, 1, 3);
        net.add_edge(0, 2, 2);
        let ax = net.add_edge(1, 3, u64::MAX);
        net.add_edge(1, 4, u64::MAX);
        net.add_edge(2, 4, u64::MAX);
        net.add_edge(3, 5, 2);
        net.add_edge(4, 5, 2);
        assert_eq!(net.max_flow(0, 5), 4);
        assert_eq!(net.flow(ax), 2);
    }
}
