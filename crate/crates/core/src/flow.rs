//! Integer max-flow (Edmonds-Karp) on a small directed network.
//!
//! Augmenting paths are found by breadth-first search scanning arcs in
//! insertion order, so results depend only on how the network was built.

use std::collections::VecDeque;

pub(crate) const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    out: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    orig: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            out: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            orig: Vec::new(),
        }
    }

    /// Adds the arc `u -> v`; returns its id. The reverse arc is `id ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.orig.push(cap);
        self.out[u].push(id);
        self.to.push(u);
        self.cap.push(0);
        self.orig.push(0);
        self.out[v].push(id + 1);
        id
    }

    /// Flow currently on a forward arc.
    pub fn flow(&self, arc: usize) -> i64 {
        self.orig[arc] - self.cap[arc]
    }

    pub fn is_forward(&self, arc: usize) -> bool {
        arc.is_multiple_of(2)
    }

    /// Pushes flow from `s` to `t` until the value reaches `limit` or no
    /// augmenting path remains. Returns the value pushed by this call.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let mut total = 0;
        let n = self.out.len();
        let mut pred = vec![usize::MAX; n];
        while total < limit {
            pred.iter_mut().for_each(|p| *p = usize::MAX);
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.out[u] {
                    let v = self.to[a];
                    if self.cap[a] > 0 && !seen[v] {
                        seen[v] = true;
                        pred[v] = a;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut bottleneck = limit - total;
            let mut v = t;
            while v != s {
                let a = pred[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = pred[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
        total
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.out[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Splits the flow into unit `s`-`t` walks, each given as its node list
    /// (including `s` and `t`). Assumes an integral flow of unit paths.
    pub fn decompose(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut left: Vec<i64> = (0..self.to.len())
            .map(|a| if self.is_forward(a) { self.flow(a).max(0) } else { 0 })
            .collect();
        let mut paths = Vec::new();
        loop {
            let mut path = vec![s];
            let mut u = s;
            let mut steps = 0;
            while u != t {
                let Some(&a) = self.out[u].iter().find(|&&a| left[a] > 0) else {
                    break;
                };
                left[a] -= 1;
                u = self.to[a];
                path.push(u);
                steps += 1;
                if steps > self.to.len() {
                    break;
                }
            }
            if u != t {
                break;
            }
            paths.push(path);
        }
        paths
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond_flow() {
        let mut f = FlowNetwork::new(4);
        f.add_arc(0, 1, 1);
        f.add_arc(0, 2, 1);
        f.add_arc(1, 3, 1);
        f.add_arc(2, 3, 1);
        f.add_arc(1, 2, 1);
        assert_eq!(f.max_flow(0, 3, INF), 2);
        assert_eq!(f.decompose(0, 3).len(), 2);
        let r = f.residual_reachable(0);
        assert!(!r[3]);
    }

    #[test]
    fn limit_stops_early() {
        let mut f = FlowNetwork::new(2);
        f.add_arc(0, 1, 5);
        assert_eq!(f.max_flow(0, 1, 3), 3);
        assert_eq!(f.max_flow(0, 1, INF), 2);
    }
}
