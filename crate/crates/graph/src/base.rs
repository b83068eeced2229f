//! Base instances for each construction.

use crate::bipartite::BipartiteGraph;
use crate::graph::{Graph, GraphError, Part};

/// Which base instance to build.
#[derive(Debug, Clone)]
pub enum BaseKind {
    /// `K_{n,n}` with parts `A`, `B`.
    CompleteBipartite,
    /// `K_n` with the single part `V`.
    Complete,
    /// Complete graph on `V1 ∪ V2 ∪ V3` minus every edge between
    /// `V1 ∪ V2` and `V3 ∖ W3`, with `|W3| = ⌊εn⌋`.
    StsBase { eps: f64 },
    /// Vertex set `[4n−1] = V1 ∪ V2 ∪ C1 ∪ C2` with `|C1| = n−1`, all edges
    /// `xy` with `x ∈ V1 ∪ V2`, and `C2' ⊆ C2` of size `⌊εn⌋`.
    JoinBase { eps: f64 },
    /// `V1`, `V2` of size `n`, `V3` of size `d`; the `d`-regular bipartite
    /// graph `h` between `V1` and `V2` plus every edge from `V1 ∪ V2` to `V3`.
    LsBase { d: usize, h: BipartiteGraph },
}

/// Part sizes `(|V1|, |V2|, |V3|)` of the equitable partition of `[n]`.
pub fn sts_part_sizes(n: usize) -> (usize, usize, usize) {
    let a = n / 3;
    (a, a, n - 2 * a)
}

fn check_eps(eps: f64) -> Result<(), GraphError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(GraphError::Epsilon(eps))
    }
}

/// `⌊εn⌋` guarded against representation error just below an integer.
pub fn floor_eps(eps: f64, n: usize) -> usize {
    (eps * n as f64 + 1e-9).floor() as usize
}

pub fn build_base_graph(kind: &BaseKind, n: usize) -> Result<Graph, GraphError> {
    match kind {
        BaseKind::CompleteBipartite => Ok(BipartiteGraph::complete(n, n).to_graph()),
        BaseKind::Complete => {
            let mut g = Graph::complete(n);
            g.set_parts(vec![Part::new("V", (0..n).collect())])?;
            Ok(g)
        }
        BaseKind::StsBase { eps } => sts_base(n, *eps),
        BaseKind::JoinBase { eps } => join_base(n, *eps),
        BaseKind::LsBase { d, h } => ls_base(n, *d, h),
    }
}

fn sts_base(n: usize, eps: f64) -> Result<Graph, GraphError> {
    let rem = n % 6;
    if rem != 1 && rem != 3 {
        return Err(GraphError::Divisibility { n, rem });
    }
    check_eps(eps)?;
    let (a, b, c) = sts_part_sizes(n);
    let w = floor_eps(eps, n);
    if w > c {
        return Err(GraphError::Size(format!("|W3| = {w} exceeds |V3| = {c}")));
    }
    let v1: Vec<usize> = (0..a).collect();
    let v2: Vec<usize> = (a..a + b).collect();
    let v3: Vec<usize> = (a + b..n).collect();
    let w3: Vec<usize> = v3[..w].to_vec();
    let mut g = Graph::complete(n);
    for &x in v1.iter().chain(&v2) {
        for &y in &v3[w..] {
            g.remove_edge(x, y);
        }
    }
    g.set_parts(vec![
        Part::new("V1", v1),
        Part::new("V2", v2),
        Part::new("V3", v3),
    ])?;
    g.add_marked(Part::new("W3", w3))?;
    Ok(g)
}

fn join_base(n: usize, eps: f64) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::Size(format!("join base needs n ≥ 2, got {n}")));
    }
    check_eps(eps)?;
    let total = 4 * n - 1;
    let v1: Vec<usize> = (0..n).collect();
    let v2: Vec<usize> = (n..2 * n).collect();
    let c1: Vec<usize> = (2 * n..3 * n - 1).collect();
    let c2: Vec<usize> = (3 * n - 1..total).collect();
    let k = floor_eps(eps, n);
    let c2p: Vec<usize> = c2[..k].to_vec();
    let mut g = Graph::new(total);
    for x in 0..2 * n {
        for y in x + 1..total {
            g.add_edge(x, y);
        }
    }
    g.set_parts(vec![
        Part::new("V1", v1),
        Part::new("V2", v2),
        Part::new("C1", c1),
        Part::new("C2", c2),
    ])?;
    g.add_marked(Part::new("C2'", c2p))?;
    Ok(g)
}

fn ls_base(n: usize, d: usize, h: &BipartiteGraph) -> Result<Graph, GraphError> {
    if h.left_count() != n || h.right_count() != n {
        return Err(GraphError::Shape(format!(
            "H has sides {}×{}, expected {n}×{n}",
            h.left_count(),
            h.right_count()
        )));
    }
    if n > 0 && h.is_regular() != Some(d) {
        return Err(GraphError::NotRegular(d));
    }
    let total = 2 * n + d;
    let mut g = Graph::new(total);
    for (a, b) in h.edges() {
        g.add_edge(a, n + b);
    }
    for x in 0..2 * n {
        for s in 2 * n..total {
            g.add_edge(x, s);
        }
    }
    g.set_parts(vec![
        Part::new("V1", (0..n).collect()),
        Part::new("V2", (n..2 * n).collect()),
        Part::new("V3", (2 * n..total).collect()),
    ])?;
    Ok(g)
}
