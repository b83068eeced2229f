use designforge_graph::Graph;
use serde::Serialize;
use thiserror::Error;

const NONE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquitableError {
    #[error("k = {k} colours but Δ + 1 = {needed}")]
    TooFewColours { k: usize, needed: usize },
    #[error("supplied colouring has {colours} entries for {edges} edges")]
    Length { edges: usize, colours: usize },
    #[error("edge {edge:?} has colour {colour}, outside [0, {k})")]
    Range {
        edge: (usize, usize),
        colour: usize,
        k: usize,
    },
    #[error("supplied colouring is not proper at vertex {vertex}")]
    NotProper { vertex: usize },
}

/// `k` matchings partitioning the edges of a host graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColourClasses {
    pub classes: Vec<Vec<(usize, usize)>>,
}

impl ColourClasses {
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Class sizes all in `{⌊e/k⌋, ⌈e/k⌉}`.
    pub fn is_equitable(&self) -> bool {
        let k = self.k();
        if k == 0 {
            return true;
        }
        let e = self.edge_count();
        let (lo, hi) = (e / k, e.div_ceil(k));
        self.classes.iter().all(|c| c.len() == lo || c.len() == hi)
    }

    /// Flattened `(edges, colours)` in sorted edge order.
    pub fn flatten(&self) -> (Vec<(usize, usize)>, Vec<usize>) {
        let mut all: Vec<((usize, usize), usize)> = self
            .classes
            .iter()
            .enumerate()
            .flat_map(|(c, es)| es.iter().map(move |&e| (e, c)))
            .collect();
        all.sort_unstable();
        all.into_iter().unzip()
    }
}

/// Colour state: `at[v][c]` is the neighbour of `v` along colour `c`.
struct Palette {
    k: usize,
    at: Vec<Vec<usize>>,
}

impl Palette {
    fn new(n: usize, k: usize) -> Self {
        Palette {
            k,
            at: vec![vec![NONE; k]; n],
        }
    }

    fn colour(&self, u: usize, v: usize) -> Option<usize> {
        self.at[u].iter().position(|&x| x == v)
    }

    fn is_free(&self, v: usize, c: usize) -> bool {
        self.at[v][c] == NONE
    }

    fn free(&self, v: usize) -> usize {
        (0..self.k)
            .find(|&c| self.is_free(v, c))
            .expect("Δ + 1 colours leave one free")
    }

    fn set(&mut self, u: usize, v: usize, c: usize) {
        self.at[u][c] = v;
        self.at[v][c] = u;
    }

    fn clear(&mut self, u: usize, v: usize, c: usize) {
        self.at[u][c] = NONE;
        self.at[v][c] = NONE;
    }

    /// Maximal alternating `a`/`b` path from `start`, beginning with colour `a`.
    fn path(&self, start: usize, a: usize, b: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let (mut cur, mut want, mut other) = (start, a, b);
        while self.at[cur][want] != NONE {
            let nxt = self.at[cur][want];
            out.push((cur, nxt, want));
            cur = nxt;
            std::mem::swap(&mut want, &mut other);
            if cur == start {
                break;
            }
        }
        out
    }

    /// Swaps colours `a` and `b` along the path.
    fn flip(&mut self, path: &[(usize, usize, usize)], a: usize, b: usize) {
        for &(u, v, c) in path {
            self.clear(u, v, c);
        }
        for &(u, v, c) in path {
            self.set(u, v, if c == a { b } else { a });
        }
    }

    /// Misra–Gries step: colours the uncoloured edge `uv`.
    fn insert(&mut self, u: usize, v: usize) {
        let mut fan = vec![v];
        let mut in_fan = vec![v];
        loop {
            let last = *fan.last().unwrap();
            let next = (0..self.k)
                .filter(|&c| self.is_free(last, c))
                .find_map(|c| {
                    let x = self.at[u][c];
                    (x != NONE && !in_fan.contains(&x)).then_some(x)
                });
            match next {
                Some(x) => {
                    fan.push(x);
                    in_fan.push(x);
                }
                None => break,
            }
        }
        let c = self.free(u);
        let d = self.free(*fan.last().unwrap());
        if c != d {
            let p = self.path(u, d, c);
            self.flip(&p, d, c);
        }
        // First fan prefix that is still a fan and ends at a vertex with d free.
        let mut end = fan.len() - 1;
        for i in 0..fan.len() {
            if self.is_free(fan[i], d) {
                end = i;
                break;
            }
            if i + 1 == fan.len() {
                break;
            }
            let ok = self
                .colour(u, fan[i + 1])
                .is_some_and(|col| self.is_free(fan[i], col));
            if !ok {
                break;
            }
        }
        for i in 0..end {
            let col = self.colour(u, fan[i + 1]).expect("fan edge coloured");
            self.clear(u, fan[i + 1], col);
            self.set(u, fan[i], col);
        }
        self.set(u, fan[end], d);
    }

    fn classes(&self, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.k];
        for &(u, v) in edges {
            out[self.colour(u, v).expect("every edge coloured")].push((u, v));
        }
        out
    }

    /// Kempe exchanges until sizes differ by at most one.
    fn balance(&mut self, edges: &[(usize, usize)]) {
        let n = self.at.len();
        let mut sizes = vec![0usize; self.k];
        for &(u, v) in edges {
            sizes[self.colour(u, v).unwrap()] += 1;
        }
        loop {
            let a = (0..self.k)
                .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
                .unwrap();
            let b = (0..self.k).min_by_key(|&c| (sizes[c], c)).unwrap();
            if sizes[a] < sizes[b] + 2 {
                return;
            }
            // A component with more a-edges than b-edges is a path that
            // starts and ends with a.
            let start = (0..n)
                .filter(|&x| !self.is_free(x, a) && self.is_free(x, b))
                .find(|&x| self.path(x, a, b).len() % 2 == 1)
                .expect("an a-heavy alternating path exists");
            let p = self.path(start, a, b);
            self.flip(&p, a, b);
            sizes[a] -= 1;
            sizes[b] += 1;
        }
    }
}

/// Backtracking nodes spent looking for a `Δ`-edge-colouring when `k = Δ`.
const EXACT_BUDGET: usize = 200_000;

/// Proper `k`-edge-colouring with class sizes in `{⌊e/k⌋, ⌈e/k⌉}`.
///
/// A Misra–Gries fan rotation colours `G` with `Δ + 1 ≤ k` colours; Kempe
/// exchanges on two-coloured paths then move edges from the largest class
/// to the smallest. With `k = Δ` a bounded exact search is tried first and
/// the error is returned only if it finds nothing.
pub fn equitable_edge_colouring(g: &Graph, k: usize) -> Result<ColourClasses, EquitableError> {
    let needed = g.max_degree() + 1;
    if k + 1 == needed && k > 0 {
        if let Some(colours) = exact_colouring(g, k, EXACT_BUDGET) {
            return balance_colouring(g, &colours, k);
        }
    }
    if k < needed {
        return Err(EquitableError::TooFewColours { k, needed });
    }
    let edges = g.edges();
    let mut pal = Palette::new(g.vertex_count(), k);
    for &(u, v) in &edges {
        pal.insert(u, v);
    }
    pal.balance(&edges);
    Ok(ColourClasses {
        classes: pal.classes(&edges),
    })
}

/// Balances a supplied proper colouring (colours in `[0, k)`, one per edge of
/// `g.edges()`), for when `k < Δ + 1` is still colourable.
pub fn balance_colouring(
    g: &Graph,
    colours: &[usize],
    k: usize,
) -> Result<ColourClasses, EquitableError> {
    let edges = g.edges();
    if colours.len() != edges.len() {
        return Err(EquitableError::Length {
            edges: edges.len(),
            colours: colours.len(),
        });
    }
    let mut pal = Palette::new(g.vertex_count(), k);
    for (&(u, v), &c) in edges.iter().zip(colours) {
        if c >= k {
            return Err(EquitableError::Range {
                edge: (u, v),
                colour: c,
                k,
            });
        }
        for x in [u, v] {
            if !pal.is_free(x, c) {
                return Err(EquitableError::NotProper { vertex: x });
            }
        }
        pal.set(u, v, c);
    }
    pal.balance(&edges);
    Ok(ColourClasses {
        classes: pal.classes(&edges),
    })
}

/// Proper `k`-edge-colouring by backtracking, edges taken in order of
/// fewest free colours. Gives up after `budget` nodes.
pub(crate) fn exact_colouring(g: &Graph, k: usize, budget: usize) -> Option<Vec<usize>> {
    let edges = g.edges();
    let mut pal = Palette::new(g.vertex_count(), k);
    let mut colour = vec![NONE; edges.len()];
    let mut nodes = 0usize;
    fn go(
        edges: &[(usize, usize)],
        pal: &mut Palette,
        colour: &mut [usize],
        nodes: &mut usize,
        budget: usize,
    ) -> bool {
        let options = |pal: &Palette, (u, v): (usize, usize)| {
            (0..pal.k).filter(|&c| pal.is_free(u, c) && pal.is_free(v, c)).count()
        };
        let pick = (0..edges.len())
            .filter(|&i| colour[i] == NONE)
            .min_by_key(|&i| options(pal, edges[i]));
        let Some(i) = pick else { return true };
        let (u, v) = edges[i];
        for c in 0..pal.k {
            if !(pal.is_free(u, c) && pal.is_free(v, c)) {
                continue;
            }
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            pal.set(u, v, c);
            colour[i] = c;
            if go(edges, pal, colour, nodes, budget) {
                return true;
            }
            pal.clear(u, v, c);
            colour[i] = NONE;
        }
        false
    }
    go(&edges, &mut pal, &mut colour, &mut nodes, budget).then_some(colour)
}
