use designforge_graph::BipartiteGraph;
use designforge_matching::{f_factor, DegreeSpec, FFactorError, FFactorWitness};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum RegularizeError {
    #[error("H is {h:?} but L is {l:?}")]
    Shape { h: (usize, usize), l: (usize, usize) },
    #[error("sides differ in size ({0} vs {1})")]
    Unequal(usize, usize),
    #[error("edge ({0}, {1}) lies in both H and L")]
    Overlap(usize, usize),
    #[error("no regular R ⊇ L with degree in [{low}, {high}]")]
    Infeasible {
        low: usize,
        high: usize,
        /// Last cut witness and the degree it refutes.
        witness: Option<(usize, FFactorWitness)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularized {
    /// `R = L ∪ H'`.
    pub r: BipartiteGraph,
    /// `H' ⊆ H`.
    pub added: BipartiteGraph,
    pub degree: usize,
}

/// Smallest `D*` such that `H` has a subgraph `H'` with
/// `d_{H'}(v) = D* − d_L(v)`, searched from `max d_L` up to
/// `max d_L + Δ(H)`; `R = L ∪ H'` is then `D*`-regular.
///
/// With `target = Some(D)` only that degree is tried.
pub fn regularize(
    h: &BipartiteGraph,
    l: &BipartiteGraph,
    target: Option<usize>,
) -> Result<Regularized, RegularizeError> {
    let (nl, nr) = (h.left_count(), h.right_count());
    if (l.left_count(), l.right_count()) != (nl, nr) {
        return Err(RegularizeError::Shape {
            h: (nl, nr),
            l: (l.left_count(), l.right_count()),
        });
    }
    if nl != nr {
        return Err(RegularizeError::Unequal(nl, nr));
    }
    for (a, b) in l.edges() {
        if h.has_edge(a, b) {
            return Err(RegularizeError::Overlap(a, b));
        }
    }
    let dl: Vec<usize> = (0..nl)
        .map(|a| l.left_degree(a))
        .chain((0..nr).map(|b| l.right_degree(b)))
        .collect();
    let dh: Vec<usize> = (0..nl)
        .map(|a| h.left_degree(a))
        .chain((0..nr).map(|b| h.right_degree(b)))
        .collect();
    let floor = dl.iter().copied().max().unwrap_or(0);
    let (low, high) = match target {
        Some(d) => (d, d),
        None => (floor, floor + h.max_degree()),
    };
    // Beyond this some vertex cannot reach D even using all of H.
    let cap = dl.iter().zip(&dh).map(|(x, y)| x + y).min().unwrap_or(0);
    let mut witness = None;
    for d in low..=high {
        if d < floor || d > cap {
            if witness.is_none() && d >= floor {
                witness = try_degree(h, &dl, d).err().flatten().map(|w| (d, w));
            }
            continue;
        }
        match try_degree(h, &dl, d) {
            Ok(added) => {
                let mut r = added.clone();
                r.union_with(l);
                return Ok(Regularized { r, added, degree: d });
            }
            Err(w) => witness = w.map(|w| (d, w)).or(witness),
        }
    }
    Err(RegularizeError::Infeasible {
        low,
        high,
        witness,
    })
}

fn try_degree(h: &BipartiteGraph, dl: &[usize], d: usize) -> Result<BipartiteGraph, Option<FFactorWitness>> {
    let n = h.left_count();
    let f = DegreeSpec {
        left: dl[..n].iter().map(|&x| d - x).collect(),
        right: dl[n..].iter().map(|&x| d - x).collect(),
    };
    match f_factor(h, &f) {
        Ok(sub) => Ok(sub),
        Err(FFactorError::Infeasible(w)) => Err(Some(w)),
        Err(_) => Err(None),
    }
}
