use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// Three distinct vertices, stored sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle([usize; 3]);

impl Triangle {
    pub fn new(a: usize, b: usize, c: usize) -> Triangle {
        assert!(a != b && b != c && a != c, "degenerate triangle {a} {b} {c}");
        let mut v = [a, b, c];
        v.sort_unstable();
        Triangle(v)
    }

    /// Builds the triangle only if all three edges are present in `g`.
    pub fn in_graph(g: &Graph, a: usize, b: usize, c: usize) -> Option<Triangle> {
        (a != b
            && b != c
            && a != c
            && g.has_edge(a, b)
            && g.has_edge(b, c)
            && g.has_edge(a, c))
        .then(|| Triangle::new(a, b, c))
    }

    #[inline]
    pub fn vertices(&self) -> [usize; 3] {
        self.0
    }

    /// The three edges, each as a sorted pair.
    pub fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.0;
        [(a, b), (a, c), (b, c)]
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    /// The vertex opposite to edge `uv`, if `uv` is an edge of the triangle.
    pub fn apex(&self, u: usize, v: usize) -> Option<usize> {
        if !self.contains(u) || !self.contains(v) || u == v {
            return None;
        }
        self.0.iter().copied().find(|&x| x != u && x != v)
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

/// Selects triangles by the multiset of part labels their vertices touch.
#[derive(Debug, Clone)]
pub struct PartPattern(pub [String; 3]);

impl PartPattern {
    pub fn new(a: &str, b: &str, c: &str) -> Self {
        PartPattern([a.to_string(), b.to_string(), c.to_string()])
    }
}

/// Every triangle of `g`, optionally restricted by a part pattern, in
/// lexicographic order.
pub fn enumerate_triangles(g: &Graph, restriction: Option<&PartPattern>) -> Vec<Triangle> {
    match restriction {
        None => enumerate_triangles_where(g, |_| true),
        Some(pat) => {
            let idx = g.part_index();
            let mut want: Vec<usize> = pat
                .0
                .iter()
                .map(|l| {
                    g.parts()
                        .iter()
                        .position(|p| &p.label == l)
                        .unwrap_or(usize::MAX - 1)
                })
                .collect();
            want.sort_unstable();
            enumerate_triangles_where(g, |t| {
                let mut got = t.vertices().map(|v| idx[v]);
                got.sort_unstable();
                got[..] == want[..]
            })
        }
    }
}

/// Every triangle of `g` accepted by `keep`, in lexicographic order.
pub fn enumerate_triangles_where(g: &Graph, mut keep: impl FnMut(&Triangle) -> bool) -> Vec<Triangle> {
    let n = g.vertex_count();
    let mut sorted: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            let mut a: Vec<usize> = g.neighbors(u).iter().copied().filter(|&v| v > u).collect();
            a.sort_unstable();
            a
        })
        .collect();
    let mut out = Vec::new();
    for u in 0..n {
        let up = std::mem::take(&mut sorted[u]);
        for (i, &v) in up.iter().enumerate() {
            for &w in &up[i + 1..] {
                if g.has_edge(v, w) {
                    let t = Triangle::new(u, v, w);
                    if keep(&t) {
                        out.push(t);
                    }
                }
            }
        }
        sorted[u] = up;
    }
    out
}

/// All triangles of `g` that contain the edge `uv`, ordered by apex.
pub fn triangles_on_edge(g: &Graph, u: usize, v: usize) -> Vec<Triangle> {
    let mut apexes: Vec<usize> = g
        .neighbors(u)
        .iter()
        .copied()
        .filter(|&w| w != v && g.has_edge(v, w))
        .collect();
    apexes.sort_unstable();
    apexes.into_iter().map(|w| Triangle::new(u, v, w)).collect()
}
