//! List edge colouring of regular bipartite graphs.

use std::time::Instant;

use designforge_graph::{validate_proper_edge_colouring, BipartiteGraph, Graph, ListAssignment};
use designforge_matching::{perfect_matching, MatchingError};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("host is not bipartite: odd cycle through {0}")]
    NotBipartite(usize),
    #[error("host is not regular on its support")]
    NotRegular,
    #[error("host is {d}-regular but lists draw from {n_colours} colours")]
    ColourCount { d: usize, n_colours: usize },
    #[error("list edges differ from host edges")]
    EdgeMismatch,
    #[error("search produced an invalid colouring: {0}")]
    Unsound(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveBudget {
    /// Colour-by-colour restarts.
    pub restarts: usize,
    /// Class un-assignments allowed within one restart.
    pub backtracks: usize,
    /// Node limit of the exact search.
    pub exhaustive_nodes: u64,
    /// The exact search runs when each side has at most this many vertices.
    pub exhaustive_max_side: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            restarts: 200,
            backtracks: 64,
            exhaustive_nodes: 2_000_000,
            exhaustive_max_side: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    EmptyList { edge: (usize, usize) },
    /// `left` has fewer admissible neighbours for `colour` than its size,
    /// so that colour class cannot be a perfect matching.
    HallViolator {
        colour: usize,
        left: Vec<usize>,
        neighbourhood: Vec<usize>,
    },
    /// The exact search visited every branch.
    Exhaustive { nodes: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// `colours[i]` is the colour of `edges[i]`.
    Success(Vec<usize>),
    Exhausted,
    Infeasible(Certificate),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub restarts: usize,
    pub backtracks: usize,
    pub exhaustive_nodes: u64,
    pub time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColouringResult {
    pub edges: Vec<(usize, usize)>,
    pub outcome: Outcome,
    pub stats: SolveStats,
}

impl ColouringResult {
    pub fn is_success(&self) -> bool {
        matches!(self.outcome, Outcome::Success(_))
    }

    pub fn colouring(&self) -> Option<&[usize]> {
        match &self.outcome {
            Outcome::Success(c) => Some(c),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            Outcome::Success(_) => "success",
            Outcome::Exhausted => "exhausted",
            Outcome::Infeasible(_) => "infeasible",
        }
    }

    /// `{status, colouring, stats}`; the colouring is a list of `[u, v, colour]`.
    pub fn to_json(&self) -> serde_json::Value {
        let colouring = self.colouring().map(|c| {
            self.edges
                .iter()
                .zip(c)
                .map(|(&(u, v), &k)| [u, v, k])
                .collect::<Vec<_>>()
        });
        let certificate = match &self.outcome {
            Outcome::Infeasible(c) => Some(c),
            _ => None,
        };
        json!({
            "status": self.status(),
            "colouring": colouring,
            "certificate": certificate,
            "stats": self.stats,
        })
    }
}

/// Bipartite view of `h` on its non-isolated vertices.
struct Instance {
    edges: Vec<(usize, usize)>,
    /// Local endpoints; left indices in `[0, side)`, right in `[0, side)`.
    ends: Vec<(usize, usize)>,
    left_global: Vec<usize>,
    right_global: Vec<usize>,
    side: usize,
    d: usize,
    lists: Vec<Vec<usize>>,
    allowed: Vec<Vec<bool>>,
}

impl Instance {
    fn new(h: &Graph, lists: &ListAssignment) -> Result<Instance, SolveError> {
        let n = h.vertex_count();
        let mut side = vec![u8::MAX; n];
        for s in 0..n {
            if side[s] != u8::MAX || h.degree(s) == 0 {
                continue;
            }
            side[s] = 0;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &y in h.neighbors(x) {
                    if side[y] == u8::MAX {
                        side[y] = 1 - side[x];
                        stack.push(y);
                    } else if side[y] == side[x] {
                        return Err(SolveError::NotBipartite(y));
                    }
                }
            }
        }
        let support: Vec<usize> = (0..n).filter(|&v| h.degree(v) > 0).collect();
        let d = support.first().map_or(0, |&v| h.degree(v));
        if support.iter().any(|&v| h.degree(v) != d) {
            return Err(SolveError::NotRegular);
        }
        if d != lists.n_colours && !support.is_empty() {
            return Err(SolveError::ColourCount {
                d,
                n_colours: lists.n_colours,
            });
        }
        if lists.edges != h.edges() {
            return Err(SolveError::EdgeMismatch);
        }
        let left_global: Vec<usize> = support.iter().copied().filter(|&v| side[v] == 0).collect();
        let right_global: Vec<usize> = support.iter().copied().filter(|&v| side[v] == 1).collect();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in left_global.iter().enumerate() {
            local[v] = i;
        }
        for (i, &v) in right_global.iter().enumerate() {
            local[v] = i;
        }
        let ends = lists
            .edges
            .iter()
            .map(|&(u, v)| if side[u] == 0 { (local[u], local[v]) } else { (local[v], local[u]) })
            .collect();
        let allowed = lists
            .lists
            .iter()
            .map(|l| {
                let mut a = vec![false; lists.n_colours];
                for &c in l {
                    a[c] = true;
                }
                a
            })
            .collect();
        Ok(Instance {
            edges: lists.edges.clone(),
            ends,
            side: left_global.len(),
            left_global,
            right_global,
            d: lists.n_colours,
            lists: lists.lists.clone(),
            allowed,
        })
    }

    /// Hall violator for the first colour whose admissible edges have no
    /// perfect matching.
    fn hall_certificate(&self) -> Option<Certificate> {
        for c in 0..self.d {
            let mut b = BipartiteGraph::new(self.side, self.side);
            for (e, &(l, r)) in self.ends.iter().enumerate() {
                if self.allowed[e][c] {
                    b.add_edge(l, r);
                }
            }
            if let Err(MatchingError::HallViolator { left, neighbourhood }) = perfect_matching(&b) {
                return Some(Certificate::HallViolator {
                    colour: c,
                    left: left.iter().map(|&x| self.left_global[x]).collect(),
                    neighbourhood: neighbourhood.iter().map(|&x| self.right_global[x]).collect(),
                });
            }
        }
        None
    }
}

/// Search state of one colour-by-colour run.
struct Run<'a> {
    inst: &'a Instance,
    colour: Vec<Option<usize>>,
    used: Vec<bool>,
    stack: Vec<(usize, Vec<usize>)>,
}

impl<'a> Run<'a> {
    fn new(inst: &'a Instance) -> Self {
        Run {
            inst,
            colour: vec![None; inst.edges.len()],
            used: vec![false; inst.d],
            stack: Vec::new(),
        }
    }

    fn slack(&self, e: usize) -> usize {
        self.inst.lists[e].iter().filter(|&&c| !self.used[c]).count()
    }

    fn admissible(&self, e: usize, c: usize) -> bool {
        self.colour[e].is_none() && self.inst.allowed[e][c]
    }

    /// Unused colour with the fewest admissible edges; ties at random.
    fn pick_colour<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let mut count = vec![0usize; self.inst.d];
        for e in 0..self.colour.len() {
            if self.colour[e].is_none() {
                for &c in &self.inst.lists[e] {
                    count[c] += 1;
                }
            }
        }
        (0..self.inst.d)
            .filter(|&c| !self.used[c])
            .min_by_key(|&c| (count[c], rng.gen::<u32>()))
    }

    /// Perfect matching of the admissible edges for `c`, preferring edges
    /// with few remaining colours.
    fn matching<R: Rng + ?Sized>(&self, c: usize, tabu: Option<usize>, rng: &mut R) -> Option<Vec<usize>> {
        let side = self.inst.side;
        let mut adj: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); side];
        for (e, &(l, r)) in self.inst.ends.iter().enumerate() {
            if self.admissible(e, c) && Some(e) != tabu {
                adj[l].push((self.slack(e), r, e));
            }
        }
        for a in &mut adj {
            a.shuffle(rng);
            a.sort_by_key(|x| x.0);
        }
        let mut order: Vec<usize> = (0..side).collect();
        order.shuffle(rng);
        order.sort_by_key(|&l| adj[l].len());
        let mut match_r: Vec<Option<(usize, usize)>> = vec![None; side];
        let mut match_l: Vec<Option<usize>> = vec![None; side];
        // Greedy pass, then augmenting paths.
        for &l in &order {
            if let Some(&(_, r, e)) = adj[l].iter().find(|x| match_r[x.1].is_none()) {
                match_r[r] = Some((l, e));
                match_l[l] = Some(e);
            }
        }
        for &l in &order {
            if match_l[l].is_some() {
                continue;
            }
            let mut seen = vec![false; side];
            if !augment(l, &adj, &mut seen, &mut match_r, &mut match_l) {
                return None;
            }
        }
        Some(match_l.into_iter().map(|e| e.expect("perfect")).collect())
    }

    fn assign(&mut self, c: usize, class: Vec<usize>) {
        for &e in &class {
            self.colour[e] = Some(c);
        }
        self.used[c] = true;
        self.stack.push((c, class));
    }

    fn undo(&mut self) -> Option<(usize, Vec<usize>)> {
        let (c, class) = self.stack.pop()?;
        for &e in &class {
            self.colour[e] = None;
        }
        self.used[c] = false;
        Some((c, class))
    }

    /// Every uncoloured edge keeps a colour and every vertex still sees
    /// each unused colour.
    fn lookahead(&self) -> bool {
        let d = self.inst.d;
        let side = self.inst.side;
        let mut seen_l = vec![false; side * d];
        let mut seen_r = vec![false; side * d];
        for (e, &(l, r)) in self.inst.ends.iter().enumerate() {
            if self.colour[e].is_some() {
                continue;
            }
            let mut any = false;
            for &c in &self.inst.lists[e] {
                if !self.used[c] {
                    any = true;
                    seen_l[l * d + c] = true;
                    seen_r[r * d + c] = true;
                }
            }
            if !any {
                return false;
            }
        }
        (0..d).filter(|&c| !self.used[c]).all(|c| {
            (0..side).all(|x| seen_l[x * d + c] && seen_r[x * d + c])
        })
    }

    fn result(&self) -> Vec<usize> {
        self.colour.iter().map(|c| c.expect("complete")).collect()
    }
}

fn augment(
    l: usize,
    adj: &[Vec<(usize, usize, usize)>],
    seen: &mut [bool],
    match_r: &mut [Option<(usize, usize)>],
    match_l: &mut [Option<usize>],
) -> bool {
    for &(_, r, e) in &adj[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match match_r[r] {
            None => true,
            Some((l2, _)) => augment(l2, adj, seen, match_r, match_l),
        };
        if free {
            match_r[r] = Some((l, e));
            match_l[l] = Some(e);
            return true;
        }
    }
    false
}

/// One restart: colour classes one at a time, un-assigning the latest class
/// on a dead end while backtracks remain.
fn colour_run<R: Rng + ?Sized>(inst: &Instance, budget: &SolveBudget, stats: &mut SolveStats, rng: &mut R) -> Option<Vec<usize>> {
    let mut run = Run::new(inst);
    let mut retry: Option<(usize, usize)> = None;
    let mut backtracks = 0;
    loop {
        let (c, tabu) = match retry.take() {
            Some((c, e)) => (c, Some(e)),
            None => match run.pick_colour(rng) {
                Some(c) => (c, None),
                None => return Some(run.result()),
            },
        };
        let ok = match run.matching(c, tabu, rng) {
            Some(class) => {
                run.assign(c, class);
                if run.lookahead() {
                    true
                } else {
                    run.undo();
                    false
                }
            }
            None => false,
        };
        if ok {
            continue;
        }
        if backtracks >= budget.backtracks {
            return None;
        }
        let (c2, class) = run.undo()?;
        backtracks += 1;
        stats.backtracks += 1;
        // Retry the popped colour without one of its old edges.
        retry = Some((c2, *class.choose(rng).expect("nonempty class")));
    }
}

/// Result of the exact search.
#[derive(Debug, Clone, PartialEq)]
pub enum Exhaustive {
    Found { colouring: Vec<usize>, nodes: u64 },
    NoColouring { nodes: u64 },
    Budget { nodes: u64 },
}

/// Exact backtracking over edges, most constrained edge first.
pub fn exhaustive_list_colouring(
    h: &Graph,
    lists: &ListAssignment,
    node_budget: u64,
) -> Result<Exhaustive, SolveError> {
    let inst = Instance::new(h, lists)?;
    Ok(exhaustive(&inst, node_budget))
}

fn exhaustive(inst: &Instance, node_budget: u64) -> Exhaustive {
    let side = inst.side;
    let d = inst.d;
    let mut used_l = vec![vec![false; d]; side];
    let mut used_r = vec![vec![false; d]; side];
    let mut colour = vec![usize::MAX; inst.edges.len()];
    let mut nodes = 0u64;

    fn go(
        inst: &Instance,
        used_l: &mut [Vec<bool>],
        used_r: &mut [Vec<bool>],
        colour: &mut [usize],
        nodes: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (e, &(l, r)) in inst.ends.iter().enumerate() {
            if colour[e] != usize::MAX {
                continue;
            }
            let opts: Vec<usize> = inst.lists[e]
                .iter()
                .copied()
                .filter(|&c| !used_l[l][c] && !used_r[r][c])
                .collect();
            if best.as_ref().map_or(true, |b| opts.len() < b.1.len()) {
                let done = opts.is_empty();
                best = Some((e, opts));
                if done {
                    break;
                }
            }
        }
        let Some((e, opts)) = best else {
            return Some(true);
        };
        let (l, r) = inst.ends[e];
        for c in opts {
            colour[e] = c;
            used_l[l][c] = true;
            used_r[r][c] = true;
            let sub = go(inst, used_l, used_r, colour, nodes, budget);
            colour[e] = usize::MAX;
            used_l[l][c] = false;
            used_r[r][c] = false;
            match sub {
                Some(true) => {
                    colour[e] = c;
                    return Some(true);
                }
                Some(false) => {}
                None => return None,
            }
        }
        Some(false)
    }

    match go(inst, &mut used_l, &mut used_r, &mut colour, &mut nodes, node_budget) {
        Some(true) => Exhaustive::Found { colouring: colour, nodes },
        Some(false) => Exhaustive::NoColouring { nodes },
        None => Exhaustive::Budget { nodes },
    }
}

/// Colours the edges of the regular bipartite graph `h` from their lists.
///
/// `h` may carry isolated vertices; on its support it must be `d`-regular
/// with `d = lists.n_colours`, so every colour class is a perfect matching.
/// `Infeasible` is reported only with a certificate: an empty list, a
/// colour whose admissible edges have no perfect matching, or a completed
/// exact search. Running out of budget gives `Exhausted`. Every success is
/// checked with the design validator before it is returned.
pub fn solve_list_edge_colouring<R: Rng + ?Sized>(
    h: &Graph,
    lists: &ListAssignment,
    budget: &SolveBudget,
    rng: &mut R,
) -> Result<ColouringResult, SolveError> {
    let start = Instant::now();
    let inst = Instance::new(h, lists)?;
    let mut stats = SolveStats::default();
    let outcome = solve_instance(&inst, budget, &mut stats, rng);
    if let Outcome::Success(c) = &outcome {
        let report = validate_proper_edge_colouring(&inst.edges, c, inst.d, Some(lists));
        if !report.valid || c.len() != inst.edges.len() {
            return Err(SolveError::Unsound(format!("{} violations", report.violations.len())));
        }
    }
    stats.time_ms = start.elapsed().as_millis() as u64;
    Ok(ColouringResult {
        edges: inst.edges,
        outcome,
        stats,
    })
}

fn solve_instance<R: Rng + ?Sized>(inst: &Instance, budget: &SolveBudget, stats: &mut SolveStats, rng: &mut R) -> Outcome {
    if let Some(i) = inst.lists.iter().position(Vec::is_empty) {
        return Outcome::Infeasible(Certificate::EmptyList { edge: inst.edges[i] });
    }
    if inst.edges.is_empty() {
        return Outcome::Success(Vec::new());
    }
    if let Some(cert) = inst.hall_certificate() {
        return Outcome::Infeasible(cert);
    }
    for _ in 0..budget.restarts.max(1) {
        stats.restarts += 1;
        if let Some(c) = colour_run(inst, budget, stats, rng) {
            return Outcome::Success(c);
        }
    }
    if inst.side <= budget.exhaustive_max_side {
        match exhaustive(inst, budget.exhaustive_nodes) {
            Exhaustive::Found { colouring, nodes } => {
                stats.exhaustive_nodes = nodes;
                return Outcome::Success(colouring);
            }
            Exhaustive::NoColouring { nodes } => {
                stats.exhaustive_nodes = nodes;
                return Outcome::Infeasible(Certificate::Exhaustive { nodes });
            }
            Exhaustive::Budget { nodes } => stats.exhaustive_nodes = nodes,
        }
    }
    Outcome::Exhausted
}
