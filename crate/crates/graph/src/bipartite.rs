use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Part};

/// Bipartite graph on local sides `[0, nl)` and `[0, nr)`.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    nl: usize,
    nr: usize,
    words: usize,
    bits: Vec<u64>,
    adj_l: Vec<Vec<usize>>,
    adj_r: Vec<Vec<usize>>,
    m: usize,
}

impl PartialEq for BipartiteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nl == other.nl && self.nr == other.nr && self.bits == other.bits
    }
}

/// Edge list form used for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BipartiteEdges {
    pub nl: usize,
    pub nr: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(nl: usize, nr: usize) -> Self {
        let words = nr.div_ceil(64).max(1);
        BipartiteGraph {
            nl,
            nr,
            words,
            bits: vec![0; nl * words],
            adj_l: vec![Vec::new(); nl],
            adj_r: vec![Vec::new(); nr],
            m: 0,
        }
    }

    pub fn complete(nl: usize, nr: usize) -> Self {
        let mut g = BipartiteGraph::new(nl, nr);
        for a in 0..nl {
            for b in 0..nr {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn from_edges(nl: usize, nr: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = BipartiteGraph::new(nl, nr);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn left_count(&self) -> usize {
        self.nl
    }

    pub fn right_count(&self) -> usize {
        self.nr
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.nl && b < self.nr && self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        assert!(a < self.nl && b < self.nr, "bad edge {a}-{b}");
        if self.has_edge(a, b) {
            return false;
        }
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
        self.adj_l[a].push(b);
        self.adj_r[b].push(a);
        self.m += 1;
        true
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if !self.has_edge(a, b) {
            return false;
        }
        self.bits[a * self.words + b / 64] &= !(1 << (b % 64));
        let i = self.adj_l[a].iter().position(|&x| x == b).unwrap();
        self.adj_l[a].swap_remove(i);
        let j = self.adj_r[b].iter().position(|&x| x == a).unwrap();
        self.adj_r[b].swap_remove(j);
        self.m -= 1;
        true
    }

    #[inline]
    pub fn left_neighbors(&self, a: usize) -> &[usize] {
        &self.adj_l[a]
    }

    #[inline]
    pub fn right_neighbors(&self, b: usize) -> &[usize] {
        &self.adj_r[b]
    }

    #[inline]
    pub fn left_degree(&self, a: usize) -> usize {
        self.adj_l[a].len()
    }

    #[inline]
    pub fn right_degree(&self, b: usize) -> usize {
        self.adj_r[b].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj_l
            .iter()
            .chain(&self.adj_r)
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj_l
            .iter()
            .chain(&self.adj_r)
            .map(Vec::len)
            .min()
            .unwrap_or(0)
    }

    /// `Some(d)` if every vertex on both sides has degree `d`.
    pub fn is_regular(&self) -> Option<usize> {
        let d = self
            .adj_l
            .first()
            .or(self.adj_r.first())
            .map_or(0, Vec::len);
        self.adj_l
            .iter()
            .chain(&self.adj_r)
            .all(|a| a.len() == d)
            .then_some(d)
    }

    /// Sorted edge list.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for (a, nb) in self.adj_l.iter().enumerate() {
            for &b in nb {
                out.push((a, b));
            }
        }
        out.sort_unstable();
        out
    }

    /// `e(X, Y)` for `X` on the left and `Y` on the right.
    pub fn e_between(&self, xs: &[usize], ys: &[usize]) -> usize {
        let mut mask = vec![false; self.nr];
        for &y in ys {
            mask[y] = true;
        }
        xs.iter()
            .map(|&x| self.adj_l[x].iter().filter(|&&y| mask[y]).count())
            .sum()
    }

    pub fn union_with(&mut self, other: &BipartiteGraph) {
        for (a, b) in other.edges() {
            self.add_edge(a, b);
        }
    }

    /// `self` minus the edges of `other`.
    pub fn difference(&self, other: &BipartiteGraph) -> BipartiteGraph {
        let mut g = self.clone();
        for (a, b) in other.edges() {
            g.remove_edge(a, b);
        }
        g
    }

    pub fn is_edge_disjoint(&self, other: &BipartiteGraph) -> bool {
        self.bits.iter().zip(&other.bits).all(|(x, y)| x & y == 0)
    }

    /// Sorts adjacency lists; makes traversal order canonical.
    pub fn sort_adjacency(&mut self) {
        for a in &mut self.adj_l {
            a.sort_unstable();
        }
        for b in &mut self.adj_r {
            b.sort_unstable();
        }
    }

    /// Randomizes adjacency order so traversal-based algorithms break ties
    /// at random.
    pub fn shuffle_adjacency<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for a in &mut self.adj_l {
            a.shuffle(rng);
        }
        for b in &mut self.adj_r {
            b.shuffle(rng);
        }
    }

    /// Global graph with left vertices `0..nl` and right `nl..nl+nr`.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.nl + self.nr);
        for (a, b) in self.edges() {
            g.add_edge(a, self.nl + b);
        }
        g.set_parts(vec![
            Part::new("A", (0..self.nl).collect()),
            Part::new("B", (self.nl..self.nl + self.nr).collect()),
        ])
        .expect("sides partition the vertex set");
        g
    }

    /// Bipartite view of `g` between vertex lists `left` and `right`.
    pub fn from_graph_sides(g: &Graph, left: &[usize], right: &[usize]) -> BipartiteGraph {
        let mut pos = vec![usize::MAX; g.vertex_count()];
        for (i, &v) in right.iter().enumerate() {
            pos[v] = i;
        }
        let mut h = BipartiteGraph::new(left.len(), right.len());
        for (a, &u) in left.iter().enumerate() {
            for &v in g.neighbors(u) {
                if pos[v] != usize::MAX {
                    h.add_edge(a, pos[v]);
                }
            }
        }
        h
    }

    pub fn to_edges(&self) -> BipartiteEdges {
        BipartiteEdges {
            nl: self.nl,
            nr: self.nr,
            edges: self.edges(),
        }
    }

    pub fn from_edge_record(rec: &BipartiteEdges) -> BipartiteGraph {
        BipartiteGraph::from_edges(rec.nl, rec.nr, &rec.edges)
    }
}
