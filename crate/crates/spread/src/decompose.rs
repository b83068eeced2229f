use designforge_graph::{rng_from_seed, substream, BipartiteGraph};
use designforge_vortex::{index_of, label_of, slots, VortexDecomposition};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regularize::{regularize, RegularizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// `e ∈ H_{i,j}` stayed in `R_{i,j}`.
    Own,
    /// `e ∈ H_{i,j}` moved to `R_{i+1, X_{e,i}}`.
    Inherited,
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum DecomposeError {
    #[error("host graph is not regular")]
    NotRegular,
    #[error("vortex does not match the host edge set")]
    VortexMismatch,
    #[error("regularize failed at level {level}, slot {slot}: {source}")]
    Regularize {
        level: u32,
        slot: u32,
        source: RegularizeError,
    },
    #[error("cover-down at level {level} failed after {attempts} attempts")]
    RetriesExhausted { level: u32, attempts: u32, last: Box<DecomposeError> },
    #[error("absorber R_(ell,1) is not regular")]
    AbsorberIrregular,
    #[error("split label {label} outside [1, {m}]")]
    SplitLabel { label: u32, m: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    PartLabel { edge: (usize, usize), label: u32 },
    Irregular { i: u32, j: u32 },
    Containment { edge: (usize, usize), from: (u32, u32), to: (u32, u32) },
    Tag { edge: (usize, usize) },
    DegreeSum { sum: usize, d: usize },
}

/// Parts `R_{i,j}` stored per edge of the host, with the same label
/// numbering as the vortex (`label = 2^{ℓ−i} + j − 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularDecomposition {
    pub ell: u32,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub part: Vec<u32>,
    pub tag: Vec<Provenance>,
    /// `d_{i,j}`, indexed by label − 1.
    pub degrees: Vec<usize>,
}

/// Outcome of one cover-down level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverDown {
    pub parts: Vec<BipartiteGraph>,
    pub degrees: Vec<usize>,
    pub leftover: BipartiteGraph,
}

/// Splits `l` by `labels` (aligned with `l.edges()`, values in `[m]`,
/// `m = h_next.len()`) and regularizes each piece with its `H_{i+1,j}`.
/// The new leftover is `⋃_j (H_j − E(R_j))`.
pub fn cover_down_level(
    h_next: &[BipartiteGraph],
    l: &BipartiteGraph,
    labels: &[u32],
    level: u32,
) -> Result<CoverDown, DecomposeError> {
    let n = l.left_count();
    let m = h_next.len() as u32;
    let mut pieces = vec![BipartiteGraph::new(n, n); h_next.len()];
    for ((a, b), &x) in l.edges().into_iter().zip(labels) {
        if x == 0 || x > m {
            return Err(DecomposeError::SplitLabel { label: x, m });
        }
        pieces[(x - 1) as usize].add_edge(a, b);
    }
    let mut out = CoverDown {
        parts: Vec::with_capacity(h_next.len()),
        degrees: Vec::with_capacity(h_next.len()),
        leftover: BipartiteGraph::new(n, n),
    };
    for (j, (h, piece)) in h_next.iter().zip(&pieces).enumerate() {
        let reg = regularize(h, piece, None).map_err(|source| DecomposeError::Regularize {
            level: level + 1,
            slot: j as u32 + 1,
            source,
        })?;
        out.leftover.union_with(&h.difference(&reg.added));
        out.degrees.push(reg.degree);
        out.parts.push(reg.r);
    }
    Ok(out)
}

/// Per-edge split labels: `X_{e,i}` for the level `i` of `e` (0 on the top level).
pub type SplitLabels = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeTrace {
    pub xi: SplitLabels,
    /// Failed attempts per cover-down level `1..=ℓ−2`.
    pub retries: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub stage_retries: u32,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig { stage_retries: 5 }
    }
}

fn level_of(ell: u32, label: u32) -> u32 {
    index_of(ell, label).0
}

struct State {
    ell: u32,
    n: usize,
    part: Vec<u32>,
    tag: Vec<Provenance>,
    degrees: Vec<usize>,
    /// Edge indices of the current leftover `L_{ℓ'}`.
    leftover: Vec<usize>,
}

fn check_inputs(g: &BipartiteGraph, vortex: &VortexDecomposition) -> Result<usize, DecomposeError> {
    let d = g.is_regular().ok_or(DecomposeError::NotRegular)?;
    if g.left_count() != g.right_count() {
        return Err(DecomposeError::NotRegular);
    }
    if vortex.n_left != g.left_count() || vortex.edges != g.edges() {
        return Err(DecomposeError::VortexMismatch);
    }
    Ok(d)
}

fn start(vortex: &VortexDecomposition) -> State {
    let ell = vortex.ell;
    let m = vortex.edges.len();
    let mut st = State {
        ell,
        n: vortex.n_left,
        part: vec![0; m],
        tag: vec![Provenance::Own; m],
        degrees: vec![0; vortex.part_count()],
        leftover: Vec::new(),
    };
    if ell == 1 {
        st.part.iter_mut().for_each(|p| *p = 1);
    } else {
        // R_{1,j} are empty; L_1 is all of level 1.
        st.leftover = (0..m).filter(|&k| level_of(ell, vortex.labels[k]) == 1).collect();
    }
    st
}

/// Runs cover-down level `lv` (`L_{lv}` → `R_{lv+1,·}`, `L_{lv+1}`).
fn step(st: &mut State, vortex: &VortexDecomposition, xi: &[u32], lv: u32) -> Result<(), DecomposeError> {
    let ell = st.ell;
    let n = st.n;
    let m = slots(ell, lv + 1);
    let h_next: Vec<BipartiteGraph> = (1..=m)
        .map(|j| {
            let want = label_of(ell, lv + 1, j);
            let mut h = BipartiteGraph::new(n, n);
            for (k, &(a, b)) in vortex.edges.iter().enumerate() {
                if vortex.labels[k] == want {
                    h.add_edge(a, b);
                }
            }
            h
        })
        .collect();
    let mut lidx = st.leftover.clone();
    lidx.sort_unstable();
    let mut l = BipartiteGraph::new(n, n);
    for &k in &lidx {
        let (a, b) = vortex.edges[k];
        l.add_edge(a, b);
    }
    // `l.edges()` is sorted and so is `lidx`, since host edges are sorted.
    let labels: Vec<u32> = lidx.iter().map(|&k| xi[k]).collect();
    let out = cover_down_level(&h_next, &l, &labels, lv)?;
    for &k in &lidx {
        st.part[k] = label_of(ell, lv + 1, xi[k]);
        st.tag[k] = Provenance::Inherited;
    }
    let mut next = Vec::new();
    for (k, &(a, b)) in vortex.edges.iter().enumerate() {
        let lab = vortex.labels[k];
        if level_of(ell, lab) != lv + 1 {
            continue;
        }
        let j = index_of(ell, lab).1;
        if out.parts[(j - 1) as usize].has_edge(a, b) {
            st.part[k] = lab;
            st.tag[k] = Provenance::Own;
        } else {
            next.push(k);
        }
    }
    for (j, &d) in out.degrees.iter().enumerate() {
        st.degrees[(label_of(ell, lv + 1, j as u32 + 1) - 1) as usize] = d;
    }
    st.leftover = next;
    Ok(())
}

fn finish(mut st: State, vortex: &VortexDecomposition, d: usize) -> Result<RegularDecomposition, DecomposeError> {
    let ell = st.ell;
    if ell == 1 {
        st.degrees[0] = d;
    } else {
        for &k in &st.leftover {
            st.part[k] = 1;
            st.tag[k] = Provenance::Inherited;
        }
        for k in 0..vortex.edges.len() {
            if vortex.labels[k] == 1 {
                st.part[k] = 1;
                st.tag[k] = Provenance::Own;
            }
        }
    }
    let mut dec = RegularDecomposition {
        ell,
        n: st.n,
        edges: vortex.edges.clone(),
        part: st.part,
        tag: st.tag,
        degrees: st.degrees,
    };
    let absorber = dec.part(ell, 1);
    match absorber.is_regular() {
        Some(r) => dec.degrees[0] = r,
        None => return Err(DecomposeError::AbsorberIrregular),
    }
    Ok(dec)
}

/// Deterministic decomposition for given split labels `xi`.
pub fn decompose_with_labels(
    g: &BipartiteGraph,
    vortex: &VortexDecomposition,
    xi: &[u32],
) -> Result<RegularDecomposition, DecomposeError> {
    let d = check_inputs(g, vortex)?;
    let mut st = start(vortex);
    for lv in 1..vortex.ell.saturating_sub(1) {
        step(&mut st, vortex, xi, lv)?;
    }
    finish(st, vortex, d)
}

/// Draws `X_{e,i}` for every edge on level `lv`, uniform on `[2^{ℓ−lv−1}]`.
fn draw_level<R: Rng + ?Sized>(vortex: &VortexDecomposition, xi: &mut [u32], lv: u32, rng: &mut R) {
    let ell = vortex.ell;
    let m = slots(ell, lv + 1);
    for (k, &lab) in vortex.labels.iter().enumerate() {
        if level_of(ell, lab) == lv {
            xi[k] = rng.gen_range(1..=m);
        }
    }
}

/// Randomized cover-down over a vortex of a regular `g`. Each level is
/// retried with fresh split labels up to `stage_retries` times.
pub fn decompose_regular<R: Rng + ?Sized>(
    g: &BipartiteGraph,
    vortex: &VortexDecomposition,
    cfg: &DecomposeConfig,
    rng: &mut R,
) -> Result<(RegularDecomposition, DecomposeTrace), DecomposeError> {
    decompose_seeded(g, vortex, cfg, rng.gen())
}

pub fn decompose_seeded(
    g: &BipartiteGraph,
    vortex: &VortexDecomposition,
    cfg: &DecomposeConfig,
    seed: u64,
) -> Result<(RegularDecomposition, DecomposeTrace), DecomposeError> {
    let d = check_inputs(g, vortex)?;
    let ell = vortex.ell;
    let mut xi = vec![0u32; vortex.edges.len()];
    let mut retries = Vec::new();
    let mut st = start(vortex);
    for lv in 1..ell {
        let level_seed = substream(seed, u64::from(lv));
        let mut attempt = 0u32;
        loop {
            let mut rng = rng_from_seed(substream(level_seed, u64::from(attempt)));
            draw_level(vortex, &mut xi, lv, &mut rng);
            if lv + 1 >= ell {
                break;
            }
            let saved = (st.part.clone(), st.tag.clone(), st.degrees.clone(), st.leftover.clone());
            match step(&mut st, vortex, &xi, lv) {
                Ok(()) => break,
                Err(e) => {
                    (st.part, st.tag, st.degrees, st.leftover) = saved;
                    if attempt >= cfg.stage_retries {
                        return Err(DecomposeError::RetriesExhausted {
                            level: lv,
                            attempts: attempt + 1,
                            last: Box::new(e),
                        });
                    }
                    attempt += 1;
                }
            }
        }
        if lv + 1 < ell {
            retries.push(attempt);
        }
    }
    let dec = finish(st, vortex, d)?;
    Ok((dec, DecomposeTrace { xi, retries }))
}

impl RegularDecomposition {
    pub fn part_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn part(&self, i: u32, j: u32) -> BipartiteGraph {
        self.part_by_label(label_of(self.ell, i, j))
    }

    pub fn part_by_label(&self, label: u32) -> BipartiteGraph {
        let mut h = BipartiteGraph::new(self.n, self.n);
        for (&(a, b), &p) in self.edges.iter().zip(&self.part) {
            if p == label {
                h.add_edge(a, b);
            }
        }
        h
    }

    pub fn degree(&self, i: u32, j: u32) -> usize {
        self.degrees[(label_of(self.ell, i, j) - 1) as usize]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a, b)).ok()
    }

    /// Full check: labels in range, every part `d_{i,j}`-regular, the
    /// degrees sum to the host degree, and every `e ∈ H_{i,j}` with `i < ℓ`
    /// lies in `R_{i,j}` or `R_{i+1, X_{e,i}}` with a matching tag.
    pub fn verify(&self, vortex: &VortexDecomposition, xi: &[u32]) -> Result<(), Violation> {
        let ell = self.ell;
        let max = (1u32 << ell) - 1;
        for (k, &p) in self.part.iter().enumerate() {
            if p == 0 || p > max {
                return Err(Violation::PartLabel { edge: self.edges[k], label: p });
            }
        }
        let mut deg = vec![vec![0usize; 2 * self.n]; max as usize];
        for (&(a, b), &p) in self.edges.iter().zip(&self.part) {
            deg[(p - 1) as usize][a] += 1;
            deg[(p - 1) as usize][self.n + b] += 1;
        }
        for (l, row) in deg.iter().enumerate() {
            if row.iter().any(|&x| x != self.degrees[l]) {
                let (i, j) = index_of(ell, l as u32 + 1);
                return Err(Violation::Irregular { i, j });
            }
        }
        let sum: usize = self.degrees.iter().sum();
        let host = self.edges.len().checked_div(self.n).unwrap_or(0);
        if sum != host {
            return Err(Violation::DegreeSum { sum, d: host });
        }
        for k in 0..self.edges.len() {
            let from = index_of(ell, vortex.labels[k]);
            let to = index_of(ell, self.part[k]);
            let i = from.0;
            let own = to == from;
            let inherited = i < ell && to == (i + 1, xi[k]);
            if !(own || inherited) {
                return Err(Violation::Containment { edge: self.edges[k], from, to });
            }
            let tag_ok = match self.tag[k] {
                Provenance::Own => own,
                Provenance::Inherited => inherited,
            };
            if !tag_ok {
                return Err(Violation::Tag { edge: self.edges[k] });
            }
        }
        Ok(())
    }
}

/// `e ∈ R_{i,j}` only if `X_{e,0} = 2^{ℓ−i}+j−1`, or `X_{e,0}` lies on level
/// `i − 1` and `X_{e,i−1} = j`.
pub fn dominated(ell: u32, label0: u32, xi: u32, i: u32, j: u32) -> bool {
    if label0 == label_of(ell, i, j) {
        return true;
    }
    i >= 2 && level_of(ell, label0) == i - 1 && xi == j
}
