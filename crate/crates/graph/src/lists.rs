use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::ledger::{ExposureLedger, LedgerError};
use crate::triangle::Triangle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ListError {
    #[error("k = {k} exceeds the {n} available colours")]
    TooManyColours { k: usize, n: usize },
    #[error("need at least one colour")]
    NoColours,
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("graph is not an ls-base instance: {0}")]
    Shape(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ListMode {
    /// Each colour kept independently with probability `p`.
    Binomial(f64),
    /// A uniformly random `k`-subset of the colours.
    Uniform(usize),
    /// Built from exposed triangles.
    Derived,
}

/// Per-edge colour lists. Colours are indices in `[0, n_colours)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListAssignment {
    pub edges: Vec<(usize, usize)>,
    pub lists: Vec<Vec<usize>>,
    pub n_colours: usize,
    pub mode: ListMode,
}

impl ListAssignment {
    /// Position of `(u, v)` in `edges`; edges are kept sorted.
    pub fn index_of(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn list(&self, u: usize, v: usize) -> Option<&[usize]> {
        self.index_of(u, v).map(|i| self.lists[i].as_slice())
    }

    pub fn allows(&self, edge: usize, colour: usize) -> bool {
        self.lists[edge].binary_search(&colour).is_ok()
    }

    pub fn mean_len(&self) -> f64 {
        if self.lists.is_empty() {
            return 0.0;
        }
        self.lists.iter().map(Vec::len).sum::<usize>() as f64 / self.lists.len() as f64
    }

    /// First edge with an empty list.
    pub fn empty_edge(&self) -> Option<(usize, usize)> {
        self.lists
            .iter()
            .position(Vec::is_empty)
            .map(|i| self.edges[i])
    }
}

fn canonical_edges(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    e.sort_unstable();
    e.dedup();
    e
}

/// Random list assignment on the given edges.
pub fn sample_lists<R: Rng + ?Sized>(
    edges: &[(usize, usize)],
    mode: ListMode,
    n_colours: usize,
    rng: &mut R,
) -> Result<ListAssignment, ListError> {
    if n_colours == 0 {
        return Err(ListError::NoColours);
    }
    let edges = canonical_edges(edges);
    let lists = match mode {
        ListMode::Binomial(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(ListError::Probability(p));
            }
            edges
                .iter()
                .map(|_| (0..n_colours).filter(|_| rng.gen::<f64>() < p).collect())
                .collect()
        }
        ListMode::Uniform(k) => {
            if k > n_colours {
                return Err(ListError::TooManyColours { k, n: n_colours });
            }
            edges
                .iter()
                .map(|_| {
                    let mut l = sample(rng, n_colours, k).into_vec();
                    l.sort_unstable();
                    l
                })
                .collect()
        }
        ListMode::Derived => vec![(0..n_colours).collect(); edges.len()],
    };
    Ok(ListAssignment {
        edges,
        lists,
        n_colours,
        mode,
    })
}

/// Lists `L(xy) = { c : triangle x y colours[c] is present }`.
pub fn lists_from_triangles(
    edges: &[(usize, usize)],
    colours: &[usize],
    mut present: impl FnMut(&Triangle) -> bool,
) -> ListAssignment {
    let edges = canonical_edges(edges);
    let lists = edges
        .iter()
        .map(|&(x, y)| {
            (0..colours.len())
                .filter(|&c| present(&Triangle::new(x, y, colours[c])))
                .collect()
        })
        .collect();
    ListAssignment {
        edges,
        lists,
        n_colours: colours.len(),
        mode: ListMode::Derived,
    }
}

/// Inverse map: one triangle `x y colours[c]` per list entry, sorted.
pub fn triangles_from_lists(lists: &ListAssignment, colours: &[usize]) -> Vec<Triangle> {
    let mut out: Vec<Triangle> = lists
        .edges
        .iter()
        .zip(&lists.lists)
        .flat_map(|(&(x, y), l)| l.iter().map(move |&c| Triangle::new(x, y, colours[c])))
        .collect();
    out.sort_unstable();
    out
}

/// Lists on the `V1`–`V2` edges of an ls-base graph, colours indexing `V3`.
///
/// Every triangle `x y s` with `x ∈ V1`, `y ∈ V2`, `s ∈ V3` is exposed.
pub fn triangle_list_correspondence(
    g: &Graph,
    ledger: &mut ExposureLedger,
) -> Result<ListAssignment, ListError> {
    let (v1, v2, v3) = match (g.part("V1"), g.part("V2"), g.part("V3")) {
        (Some(a), Some(b), Some(c)) if g.parts().len() == 3 => (a, b, c),
        _ => return Err(ListError::Shape("parts V1, V2, V3 required".into())),
    };
    let mask1 = g.mask(v1);
    let mask2 = g.mask(v2);
    for &x in v1.iter().chain(v2) {
        if let Some(&s) = v3.iter().find(|&&s| !g.has_edge(x, s)) {
            return Err(ListError::Shape(format!("missing edge {x}-{s}")));
        }
    }
    for &x in v1 {
        if g.neighbors(x).iter().any(|&y| mask1[y]) {
            return Err(ListError::Shape("edge inside V1".into()));
        }
    }
    for &x in v2 {
        if g.neighbors(x).iter().any(|&y| mask2[y]) {
            return Err(ListError::Shape("edge inside V2".into()));
        }
    }
    let edges: Vec<(usize, usize)> = v1
        .iter()
        .flat_map(|&x| {
            g.neighbors(x)
                .iter()
                .filter(|&&y| mask2[y])
                .map(move |&y| (x, y))
        })
        .collect();
    let mut err = None;
    let la = lists_from_triangles(&edges, v3, |t| match ledger.expose(t) {
        Ok(b) => b,
        Err(e) => {
            err.get_or_insert(e);
            false
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(la),
    }
}
