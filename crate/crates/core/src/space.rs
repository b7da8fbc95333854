//! Finite graphs standing in for compact spaces.
//!
//! Vertices are sample points, edges record adjacency. Connected components
//! of the graph play the role of connected components of the space.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct DiscretizedSpace {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    component_of: Vec<usize>,
    components: usize,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    vertices: usize,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
}

impl TryFrom<SpaceRepr> for DiscretizedSpace {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        DiscretizedSpace::new(r.vertices, r.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<DiscretizedSpace> for SpaceRepr {
    fn from(s: DiscretizedSpace) -> Self {
        SpaceRepr {
            vertices: s.vertices,
            edges: s.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

/// BFS spanning forest: one root per component, tree edges oriented
/// parent -> child in discovery order, plus the remaining (cycle-closing) edges.
#[derive(Debug, Clone)]
pub struct SpanningForest {
    pub roots: Vec<usize>,
    /// `(parent, child)` pairs in BFS order.
    pub tree_edges: Vec<(usize, usize)>,
    /// Edges not in the forest; each closes exactly one fundamental cycle.
    pub cycle_edges: Vec<(usize, usize)>,
}

impl DiscretizedSpace {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::Shape("a space needs at least one vertex".into()));
        }
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(Error::Shape(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{vertices}"
                )));
            }
            if a == b {
                return Err(Error::Shape(format!("self-loop at vertex {a}")));
            }
        }
        let mut uf = UnionFind::new(vertices);
        for &(a, b) in &edges {
            uf.union(a, b);
        }
        // Label components by smallest vertex, in increasing order.
        let mut label = vec![usize::MAX; vertices];
        let mut component_of = vec![0; vertices];
        let mut components = 0;
        for v in 0..vertices {
            let r = uf.find(v);
            if label[r] == usize::MAX {
                label[r] = components;
                components += 1;
            }
            component_of[v] = label[r];
        }
        Ok(Self {
            vertices,
            edges,
            component_of,
            components,
        })
    }

    /// Graph with no edges: every vertex is its own component.
    pub fn discrete(vertices: usize) -> Result<Self> {
        Self::new(vertices, Vec::new())
    }

    pub fn path(vertices: usize) -> Result<Self> {
        Self::new(vertices, (1..vertices).map(|v| (v - 1, v)).collect())
    }

    pub fn cycle(vertices: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..vertices).map(|v| (v - 1, v)).collect();
        if vertices > 2 {
            edges.push((vertices - 1, 0));
        }
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// Number of vertices in each component.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.components];
        for &c in &self.component_of {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn spanning_forest(&self) -> SpanningForest {
        let mut adj = vec![Vec::new(); self.vertices];
        for (idx, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, idx));
            adj[b].push((a, idx));
        }
        let mut seen = vec![false; self.vertices];
        let mut used = vec![false; self.edges.len()];
        let mut roots = Vec::new();
        let mut tree_edges = Vec::new();
        let mut queue = VecDeque::new();
        for root in 0..self.vertices {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            roots.push(root);
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &(w, idx) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        used[idx] = true;
                        tree_edges.push((v, w));
                        queue.push_back(w);
                    }
                }
            }
        }
        let cycle_edges = self
            .edges
            .iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .map(|(&e, _)| e)
            .collect();
        SpanningForest {
            roots,
            tree_edges,
            cycle_edges,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
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
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_of_two_paths() {
        let s = DiscretizedSpace::new(5, vec![(0, 1), (3, 4)]).unwrap();
        assert_eq!(s.components(), 3);
        assert_eq!(s.component_of(1), 0);
        assert_eq!(s.component_of(2), 1);
        assert_eq!(s.component_of(4), 2);
        assert_eq!(s.component_sizes(), vec![2, 1, 2]);
    }

    #[test]
    fn cycle_has_one_fundamental_cycle() {
        let s = DiscretizedSpace::cycle(6).unwrap();
        let f = s.spanning_forest();
        assert_eq!(f.roots, vec![0]);
        assert_eq!(f.tree_edges.len(), 5);
        assert_eq!(f.cycle_edges.len(), 1);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(DiscretizedSpace::new(2, vec![(0, 2)]).is_err());
        assert!(DiscretizedSpace::new(2, vec![(1, 1)]).is_err());
        assert!(DiscretizedSpace::new(0, vec![]).is_err());
    }

    #[test]
    fn json_round_trip_recomputes_components() {
        let s = DiscretizedSpace::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"vertices":4,"edges":[[0,1],[2,3]]}"#);
        let back: DiscretizedSpace = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
