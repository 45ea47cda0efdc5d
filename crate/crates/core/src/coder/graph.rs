use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use super::CoderError;

/// A finite simple graph on vertices 0..n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    pub n: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph, CoderError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(CoderError::Input(format!("bad edge {u} {v} for {n} vertices")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn empty(n: usize) -> Graph {
        Graph { n, edges: BTreeSet::new() }
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).tuple_combinations()).unwrap()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Vertex count on the first line, then one "u v" pair per line with u < v. Blank lines and
    /// lines starting with '#' are skipped.
    pub fn parse(text: &str) -> Result<Graph, CoderError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| CoderError::Input("missing vertex count".into()))?
            .parse()
            .map_err(|e| CoderError::Input(format!("vertex count: {e}")))?;
        let mut edges = Vec::new();
        for l in lines {
            let nums: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| CoderError::Input(format!("edge line {l:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            let [u, v] = nums[..] else {
                return Err(CoderError::Input(format!("edge line {l:?} needs two vertices")));
            };
            if u >= v {
                return Err(CoderError::Input(format!("edge line {l:?} needs u < v")));
            }
            edges.push((u, v));
        }
        Graph::new(n, edges)
    }

    pub fn is_isomorphism(&self, other: &Graph, h: &[usize]) -> bool {
        self.n == other.n
            && h.len() == self.n
            && h.iter().collect::<BTreeSet<_>>().len() == self.n
            && h.iter().all(|&x| x < other.n)
            && self.edges.len() == other.edges.len()
            && self.edges.iter().all(|&(u, v)| other.has_edge(h[u], h[v]))
    }

    /// Brute force over all vertex bijections.
    pub fn isomorphism(&self, other: &Graph) -> Option<Vec<usize>> {
        if self.n != other.n || self.edges.len() != other.edges.len() {
            return None;
        }
        (0..self.n).permutations(self.n).find(|h| self.is_isomorphism(other, h))
    }

    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        self.isomorphism(other).is_some()
    }

    /// Every labelled graph on n vertices, edges ordered lexicographically and switched on by
    /// the bits of a counter.
    pub fn all_on(n: usize) -> Vec<Graph> {
        let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
        (0..1usize << pairs.len())
            .map(|mask| Graph::new(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p)).unwrap())
            .collect()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}
