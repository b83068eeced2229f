use designforge_graph::{ExposureLedger, Graph, LedgerError, Triangle};
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hypergraph::TriangleHypergraph;
use crate::nibble::{measured_degree, pseudo_matching, NibbleConfig, NibbleError, PseudoMatching};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlmostError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Nibble(#[from] NibbleError),
    #[error("auxiliary degrees span [{min}, {max}] around mean {mean:.2}, beyond tolerance {tolerance}")]
    Irregular { min: usize, max: usize, mean: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityScan {
    pub pairs: usize,
    pub density: f64,
    /// Largest `| |N(u) ∩ N(v)| / (p²n) − 1 |` over sampled pairs.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostDecomposition {
    pub triangles: Vec<Triangle>,
    pub leftover: Graph,
    /// Edge density of the input.
    pub density: f64,
    /// `[3γpn/4, γpn]`.
    pub band: (f64, f64),
    pub leftover_min_degree: usize,
    pub leftover_max_degree: usize,
    pub in_band_fraction: f64,
    pub aux_edges: usize,
    pub aux_mean_degree: f64,
    pub typicality: TypicalityScan,
    pub nibble: Option<PseudoMatching>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostConfig {
    pub gamma: f64,
    pub nibble: NibbleConfig,
    /// Fail when `(max − min)/mean` of auxiliary degrees exceeds this.
    pub aux_tolerance: Option<f64>,
    pub typicality_pairs: usize,
    /// Stage name for ledger claims.
    pub stage: String,
}

impl Default for AlmostConfig {
    fn default() -> Self {
        AlmostConfig {
            gamma: 0.1,
            nibble: NibbleConfig::default(),
            aux_tolerance: None,
            typicality_pairs: 200,
            stage: "almost".into(),
        }
    }
}

fn typicality<R: Rng + ?Sized>(g: &Graph, support: &[usize], pairs: usize, rng: &mut R) -> TypicalityScan {
    let n = support.len();
    let density = if n < 2 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / (n * (n - 1)) as f64
    };
    let expect = density * density * n as f64;
    let mut max_deviation: f64 = 0.0;
    let mut done = 0;
    if n >= 2 && expect > 0.0 {
        for _ in 0..pairs {
            let uv = sample(rng, n, 2);
            let c = g.codegree(support[uv.index(0)], support[uv.index(1)]) as f64;
            max_deviation = max_deviation.max((c / expect - 1.0).abs());
            done += 1;
        }
    }
    TypicalityScan {
        pairs: done,
        density,
        max_deviation,
    }
}

/// Edge-disjoint exposed triangles covering all but a `γ`-fraction of each
/// edge-star. Candidates are exposed through the ledger; the present ones
/// form the auxiliary hypergraph (vertices = edges of `g`), which is
/// matched by [`pseudo_matching`] with tracked sets `{E_v} ∪ {E(g)}` and
/// `0.99γ` as the target. Chosen triangles are claimed in the ledger.
///
/// Density, typicality and the degree band are taken over the vertices of
/// positive degree, so a part embedded in a larger vertex set is measured
/// on its own.
pub fn almost_triangle_decomposition<R: Rng + ?Sized>(
    g: &Graph,
    ledger: &mut ExposureLedger,
    candidates: &[Triangle],
    cfg: &AlmostConfig,
    rng: &mut R,
) -> Result<AlmostDecomposition, AlmostError> {
    let n = g.vertex_count();
    let support: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
    let typ = typicality(g, &support, cfg.typicality_pairs, rng);
    let mut present = Vec::new();
    for t in candidates {
        if ledger.expose(t)? {
            present.push(*t);
        }
    }
    let aux = TriangleHypergraph::new(g, present);
    let h = &aux.hypergraph;
    let degrees: Vec<usize> = (0..h.vertex_count()).map(|v| h.degree(v)).collect();
    let mean = measured_degree(h, &vec![true; h.vertex_count()]);
    if let Some(tol) = cfg.aux_tolerance {
        let (min, max) = (
            degrees.iter().copied().min().unwrap_or(0),
            degrees.iter().copied().max().unwrap_or(0),
        );
        if mean > 0.0 && (max - min) as f64 / mean > tol {
            return Err(AlmostError::Irregular { min, max, mean, tolerance: tol });
        }
    }
    let mut chosen = Vec::new();
    let mut report = None;
    if h.edge_count() > 0 {
        let mut family: Vec<Vec<usize>> = (0..n).map(|v| aux.star(v)).filter(|s| !s.is_empty()).collect();
        family.push((0..h.vertex_count()).collect());
        let ncfg = NibbleConfig {
            gamma: 0.99 * cfg.gamma,
            ..cfg.nibble.clone()
        };
        let pm = pseudo_matching(h, mean, &family, &ncfg, rng)?;
        chosen = pm.matching.iter().map(|&k| aux.triangles[k]).collect();
        report = Some(pm);
    }
    chosen.sort_unstable();
    for t in &chosen {
        ledger.claim(t, &cfg.stage)?;
    }
    let mut leftover = g.clone();
    for t in &chosen {
        for (u, v) in t.edges() {
            leftover.remove_edge(u, v);
        }
    }
    let p = typ.density;
    let m = support.len() as f64;
    let band = (0.75 * cfg.gamma * p * m, cfg.gamma * p * m);
    let ld: Vec<usize> = support.iter().map(|&v| leftover.degree(v)).collect();
    let in_band = ld
        .iter()
        .filter(|&&d| d as f64 >= band.0 - 1e-9 && d as f64 <= band.1 + 1e-9)
        .count();
    Ok(AlmostDecomposition {
        triangles: chosen,
        density: p,
        band,
        leftover_min_degree: ld.iter().copied().min().unwrap_or(0),
        leftover_max_degree: ld.iter().copied().max().unwrap_or(0),
        in_band_fraction: if ld.is_empty() { 1.0 } else { in_band as f64 / ld.len() as f64 },
        leftover,
        aux_edges: h.edge_count(),
        aux_mean_degree: mean,
        typicality: typ,
        nibble: report,
    })
}
