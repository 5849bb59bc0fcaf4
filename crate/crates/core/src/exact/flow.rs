use std::collections::VecDeque;

/// Residual amounts at or below this are treated as saturated.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    orig: f64,
}

/// Directed network solved by Dinic's shortest-augmenting-path method.
///
/// Capacities are stored as `f64`; integral capacities stay exactly integral
/// through every augmentation, so integral inputs yield integral flows.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n_nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds an arc and returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, orig: cap });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            orig: 0.0,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge: usize) -> f64 {
        self.edges[edge].orig - self.edges[edge].cap
    }

    /// Pushes `amount` along a single arc, e.g. to warm-start from a known flow.
    /// The caller keeps conservation intact.
    pub fn push(&mut self, edge: usize, amount: f64) {
        self.edges[edge].cap -= amount;
        self.edges[edge ^ 1].cap += amount;
    }

    pub fn residual(&self, edge: usize) -> f64 {
        self.edges[edge].cap
    }

    /// Augments until no `source -> sink` path remains; returns the added flow.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.n_nodes();
        let mut total = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        loop {
            level.fill(usize::MAX);
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let Edge { to, cap, .. } = self.edges[e];
                    if cap > EPS && level[to] == usize::MAX {
                        level[to] = level[u] + 1;
                        queue.push_back(to);
                    }
                }
            }
            if level[sink] == usize::MAX {
                return total;
            }
            next.fill(0);
            loop {
                let pushed = self.augment(source, sink, f64::INFINITY, &level, &mut next);
                if pushed <= EPS {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, sink: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let Edge { to, cap, .. } = self.edges[e];
            if cap > EPS && level[to] == level[u] + 1 {
                let got = self.augment(to, sink, limit.min(cap), level, next);
                if got > EPS {
                    self.push(e, got);
                    return got;
                }
            }
            next[u] += 1;
        }
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS figure 26.1, max flow 23.
        let mut g = FlowNetwork::new(6);
        for &(u, v, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 23.0);
    }

    #[test]
    fn warm_start_is_respected() {
        let mut g = FlowNetwork::new(3);
        let a = g.add_edge(0, 1, 2.0);
        let b = g.add_edge(1, 2, 2.0);
        g.push(a, 1.0);
        g.push(b, 1.0);
        assert_eq!(g.max_flow(0, 2), 1.0);
        assert_eq!(g.flow_on(a), 2.0);
    }
}
