use designforge_graph::BipartiteGraph;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest side size accepted by exact mode.
pub const EXACT_LIMIT: usize = 14;

pub const DELTA_NOTE: &str =
    "δ is a desk-scale calibration choice (default 0.3); no numeric value is derived for it";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QrMode {
    Exact,
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Qr1,
    Qr2,
    Qr3,
    Qr4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrConfig {
    /// Sampled mode tests `δ' = f·δ` for each fraction `f`.
    pub fractions: Vec<f64>,
}

impl Default for QrConfig {
    fn default() -> Self {
        QrConfig {
            fractions: vec![0.125, 0.25, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qr1Result {
    pub pass: bool,
    pub lower: f64,
    pub upper: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    /// First vertex outside the band.
    pub witness: Option<(Side, usize, usize)>,
}

/// A pair `(X, Y)` violating one of QR2–QR4 for the size threshold
/// `t = ⌈δ'n⌉` (so `|S| ≥ δ'n ⇔ |S| ≥ t` and `|S| < δ'n ⇔ |S| < t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub condition: Condition,
    pub delta_prime: f64,
    pub threshold: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub edges: usize,
    pub bound: f64,
}

impl Counterexample {
    /// Recomputes `e(X, Y)` and the size conditions from scratch.
    pub fn recheck(&self, h: &BipartiteGraph, delta: f64, p: f64) -> bool {
        let n = h.left_count() as f64;
        let (sx, sy) = (self.x.len(), self.y.len());
        let e = h.e_between(&self.x, &self.y);
        let t = self.threshold;
        match self.condition {
            Condition::Qr1 => false,
            Condition::Qr2 => {
                sx >= t && sy >= t && (e as f64) < (1.0 - delta) * p * (sx * sy) as f64
            }
            Condition::Qr3 => sx < t && 2 * sx > sy && e as f64 > p * n * sx as f64 / 3.0,
            Condition::Qr4 => sy < t && 2 * sy > sx && e as f64 > p * n * sy as f64 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPrimeResult {
    pub delta_prime: f64,
    pub threshold: usize,
    pub qr2: bool,
    pub qr3: bool,
    pub qr4: bool,
    pub counterexamples: Vec<Counterexample>,
}

impl DeltaPrimeResult {
    pub fn pass(&self) -> bool {
        self.qr2 && self.qr3 && self.qr4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrReport {
    pub n: usize,
    pub delta: f64,
    pub p: f64,
    /// Mode actually run; exact requests above [`EXACT_LIMIT`] fall back to sampling.
    pub mode: QrMode,
    pub qr1: Qr1Result,
    pub delta_primes: Vec<DeltaPrimeResult>,
    pub note: String,
}

impl QrReport {
    pub fn passed(&self) -> bool {
        self.qr1.pass && self.delta_primes.iter().any(|r| r.pass())
    }

    pub fn chosen_delta_prime(&self) -> Option<f64> {
        self.delta_primes.iter().find(|r| r.pass()).map(|r| r.delta_prime)
    }
}

/// Adjacency of one side, viewed as rows over the other side.
struct View<'a> {
    rows: Vec<&'a [usize]>,
    other: usize,
}

impl<'a> View<'a> {
    fn of(h: &'a BipartiteGraph, side: Side) -> Self {
        match side {
            Side::A => View {
                rows: (0..h.left_count()).map(|a| h.left_neighbors(a)).collect(),
                other: h.right_count(),
            },
            Side::B => View {
                rows: (0..h.right_count()).map(|b| h.right_neighbors(b)).collect(),
                other: h.left_count(),
            },
        }
    }

    fn degrees_into(&self, xs: &[usize], d: &mut [usize]) {
        d.iter_mut().for_each(|v| *v = 0);
        for &x in xs {
            for &y in self.rows[x] {
                d[y] += 1;
            }
        }
    }
}

/// Other-side vertices sorted by `d_X`, ascending.
fn order_by(d: &[usize]) -> Vec<usize> {
    let mut ys: Vec<usize> = (0..d.len()).collect();
    ys.sort_by_key(|&y| d[y]);
    ys
}

/// Worst `Y` for QR2 given `X`: the `k` smallest `d_X(y)` minimize
/// `e(X, Y)` among `|Y| = k`, so scan every `k ≥ max(t, 1)`.
fn qr2_worst(d: &[usize], order: &[usize], sx: usize, t: usize, delta: f64, p: f64) -> Option<(usize, usize, f64)> {
    let mut sum = 0usize;
    for (i, &y) in order.iter().enumerate() {
        sum += d[y];
        let k = i + 1;
        if k < t.max(1) {
            continue;
        }
        let bound = (1.0 - delta) * p * (sx * k) as f64;
        if (sum as f64) < bound {
            return Some((k, sum, bound));
        }
    }
    None
}

/// Worst `Y` for QR3 given `X`: the `2|X| − 1` largest `d_X(y)`; `e` is
/// monotone in `|Y|` so the largest admissible size suffices.
fn qr3_worst(d: &[usize], order: &[usize], sx: usize, p: f64, n: usize) -> Option<(usize, usize, f64)> {
    let k = (2 * sx - 1).min(order.len());
    let sum: usize = order.iter().rev().take(k).map(|&y| d[y]).sum();
    let bound = p * n as f64 * sx as f64 / 3.0;
    (sum as f64 > bound).then_some((k, sum, bound))
}

fn qr1(h: &BipartiteGraph, delta: f64, p: f64) -> Qr1Result {
    let n = h.left_count() as f64;
    let lower = (1.0 - delta) * p * n;
    let upper = (1.0 + delta) * p * n;
    let degs = (0..h.left_count())
        .map(|a| (Side::A, a, h.left_degree(a)))
        .chain((0..h.right_count()).map(|b| (Side::B, b, h.right_degree(b))));
    let mut res = Qr1Result {
        pass: true,
        lower,
        upper,
        min_degree: usize::MAX,
        max_degree: 0,
        witness: None,
    };
    for (side, v, d) in degs {
        res.min_degree = res.min_degree.min(d);
        res.max_degree = res.max_degree.max(d);
        if ((d as f64) < lower || d as f64 > upper) && res.witness.is_none() {
            res.pass = false;
            res.witness = Some((side, v, d));
        }
    }
    if res.min_degree == usize::MAX {
        res.min_degree = 0;
    }
    res
}

fn threshold_of(delta_prime: f64, n: usize) -> usize {
    (delta_prime * n as f64 - 1e-9).ceil().max(0.0) as usize
}

fn make_cx(
    condition: Condition,
    delta_prime: f64,
    t: usize,
    side: Side,
    xs: &[usize],
    order: &[usize],
    k: usize,
    edges: usize,
    bound: f64,
) -> Counterexample {
    let mut ys: Vec<usize> = match condition {
        Condition::Qr3 | Condition::Qr4 => order.iter().rev().take(k).copied().collect(),
        _ => order[..k].to_vec(),
    };
    ys.sort_unstable();
    let mut xs = xs.to_vec();
    xs.sort_unstable();
    let (x, y) = match side {
        Side::A => (xs, ys),
        Side::B => (ys, xs),
    };
    Counterexample {
        condition,
        delta_prime,
        threshold: t,
        x,
        y,
        edges,
        bound,
    }
}

/// Checks `(δ, p)`-quasirandomness of `h` (sides of equal size `n`).
///
/// QR1 is a full degree scan. For QR2–QR4, fixing `X` determines the worst
/// `Y` of each size from the sorted values `d_X(y)`, so exact mode
/// enumerates `X` only and is exact for every `δ' ∈ [0, δ]` (all thresholds
/// `⌈δ'n⌉` are tried). Sampled mode draws `X` near the size thresholds of
/// the configured `δ'` grid.
pub fn qr_check<R: Rng + ?Sized>(
    h: &BipartiteGraph,
    delta: f64,
    p: f64,
    mode: QrMode,
    rng: &mut R,
) -> QrReport {
    qr_check_with(h, delta, p, mode, &QrConfig::default(), rng)
}

pub fn qr_check_with<R: Rng + ?Sized>(
    h: &BipartiteGraph,
    delta: f64,
    p: f64,
    mode: QrMode,
    cfg: &QrConfig,
    rng: &mut R,
) -> QrReport {
    let n = h.left_count();
    let mut note = DELTA_NOTE.to_string();
    let mode = match mode {
        QrMode::Exact if n > EXACT_LIMIT || h.right_count() > EXACT_LIMIT => {
            note.push_str("; exact mode unavailable above 14 vertices per side, sampled instead");
            QrMode::Sampled(256)
        }
        m => m,
    };
    let delta_primes = match mode {
        QrMode::Exact => exact(h, delta, p),
        QrMode::Sampled(trials) => cfg
            .fractions
            .iter()
            .map(|&f| sampled(h, delta, p, f * delta, trials, rng))
            .collect(),
    };
    QrReport {
        n,
        delta,
        p,
        mode,
        qr1: qr1(h, delta, p),
        delta_primes,
        note,
    }
}

fn exact(h: &BipartiteGraph, delta: f64, p: f64) -> Vec<DeltaPrimeResult> {
    let n = h.left_count();
    let t_max = threshold_of(delta, n);
    let mut results: Vec<DeltaPrimeResult> = (0..=t_max)
        .map(|t| DeltaPrimeResult {
            delta_prime: if n == 0 { 0.0 } else { t as f64 / n as f64 },
            threshold: t,
            qr2: true,
            qr3: true,
            qr4: true,
            counterexamples: Vec::new(),
        })
        .collect();
    for side in [Side::A, Side::B] {
        let view = View::of(h, side);
        let m = view.rows.len();
        let mut d = vec![0usize; view.other];
        let mut inside = vec![false; m];
        let mut xs: Vec<usize> = Vec::with_capacity(m);
        for code in 1u64..(1u64 << m) {
            let bit = code.trailing_zeros() as usize;
            inside[bit] = !inside[bit];
            let step = if inside[bit] { 1isize } else { -1 };
            for &y in view.rows[bit] {
                d[y] = (d[y] as isize + step) as usize;
            }
            xs.clear();
            xs.extend((0..m).filter(|&x| inside[x]));
            let sx = xs.len();
            let order = order_by(&d);
            for r in results.iter_mut() {
                let t = r.threshold;
                if side == Side::A && r.qr2 && sx >= t {
                    if let Some((k, e, b)) = qr2_worst(&d, &order, sx, t, delta, p) {
                        r.qr2 = false;
                        r.counterexamples
                            .push(make_cx(Condition::Qr2, r.delta_prime, t, side, &xs, &order, k, e, b));
                    }
                }
                let (flag, cond) = match side {
                    Side::A => (&mut r.qr3, Condition::Qr3),
                    Side::B => (&mut r.qr4, Condition::Qr4),
                };
                if *flag && sx < t {
                    if let Some((k, e, b)) = qr3_worst(&d, &order, sx, p, n) {
                        *flag = false;
                        r.counterexamples
                            .push(make_cx(cond, r.delta_prime, t, side, &xs, &order, k, e, b));
                    }
                }
            }
        }
    }
    results
}

/// `s` vertices of `view` chosen greedily to share neighbours.
fn clustered<R: Rng + ?Sized>(view: &View, s: usize, rng: &mut R) -> Vec<usize> {
    let m = view.rows.len();
    let mut d = vec![0usize; view.other];
    let mut inside = vec![false; m];
    let mut xs = vec![rng.gen_range(0..m)];
    inside[xs[0]] = true;
    for &y in view.rows[xs[0]] {
        d[y] += 1;
    }
    while xs.len() < s {
        let best = (0..m)
            .filter(|&x| !inside[x])
            .max_by_key(|&x| view.rows[x].iter().map(|&y| d[y]).sum::<usize>())
            .expect("s ≤ side size");
        inside[best] = true;
        xs.push(best);
        for &y in view.rows[best] {
            d[y] += 1;
        }
    }
    xs
}

fn sampled<R: Rng + ?Sized>(
    h: &BipartiteGraph,
    delta: f64,
    p: f64,
    delta_prime: f64,
    trials: usize,
    rng: &mut R,
) -> DeltaPrimeResult {
    let n = h.left_count();
    let t = threshold_of(delta_prime, n);
    let mut r = DeltaPrimeResult {
        delta_prime,
        threshold: t,
        qr2: true,
        qr3: true,
        qr4: true,
        counterexamples: Vec::new(),
    };
    for side in [Side::A, Side::B] {
        let view = View::of(h, side);
        let m = view.rows.len();
        if m == 0 {
            continue;
        }
        let mut d = vec![0usize; view.other];
        // QR2 near |X| = t, from the low-degree end first.
        let lo = t.max(1);
        if side == Side::A && lo <= m {
            let hi = (2 * lo).min(m);
            for trial in 0..trials {
                let s = rng.gen_range(lo..=hi);
                let xs: Vec<usize> = if trial == 0 {
                    let mut by_deg: Vec<usize> = (0..m).collect();
                    by_deg.sort_by_key(|&x| view.rows[x].len());
                    by_deg.truncate(s);
                    by_deg
                } else {
                    sample(rng, m, s).into_vec()
                };
                view.degrees_into(&xs, &mut d);
                let order = order_by(&d);
                if let Some((k, e, b)) = qr2_worst(&d, &order, s, t, delta, p) {
                    r.qr2 = false;
                    r.counterexamples
                        .push(make_cx(Condition::Qr2, delta_prime, t, side, &xs, &order, k, e, b));
                    break;
                }
            }
        }
        // QR3 / QR4 for 1 ≤ |X| < t.
        if t >= 2 {
            let cond = if side == Side::A { Condition::Qr3 } else { Condition::Qr4 };
            let top = (t - 1).min(m);
            for trial in 0..trials {
                let s = if trial == 0 { top } else { rng.gen_range(1..=top) };
                let xs = if trial < 2 {
                    clustered(&view, s, rng)
                } else {
                    sample(rng, m, s).into_vec()
                };
                view.degrees_into(&xs, &mut d);
                let order = order_by(&d);
                if let Some((k, e, b)) = qr3_worst(&d, &order, s, p, n) {
                    match side {
                        Side::A => r.qr3 = false,
                        Side::B => r.qr4 = false,
                    }
                    r.counterexamples
                        .push(make_cx(cond, delta_prime, t, side, &xs, &order, k, e, b));
                    break;
                }
            }
        }
    }
    r
}
