use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("def({index}) = {value} is odd")]
    OddDeficiency { index: usize, value: i64 },
    #[error("deficiencies sum to {0}, not 0")]
    Unbalanced(i64),
    #[error("class size {h} exceeds the {size} tracked vertices")]
    ClassTooLarge { h: usize, size: usize },
    #[error("no valid choice for h = {h} with |U+| = {plus}, |U−| = {minus}, |U0| = {zero}")]
    NoChoice {
        h: usize,
        plus: usize,
        minus: usize,
        zero: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Disjoint `C ⊆ U+`, `C' ⊆ U−`.
    One,
    /// One sign class is smaller than `h` but nonempty.
    Two,
    /// All zero; `C = C'`.
    Three,
}

/// Centre choice for one class pair: `C` (j-type centres) and `C'`
/// (k-type centres), as indices into the tracked vertex list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Choice {
    pub case: Case,
    pub c: Vec<usize>,
    pub c_prime: Vec<usize>,
}

/// `w_r(u) = def(u)/2 − t_j(u) + t_k(u)` over the vertices of one `U_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyTracker {
    pub w: Vec<i64>,
    pub history: Vec<Case>,
    /// `‖w_r‖` for `r = 0, 1, …`.
    pub norms: Vec<i64>,
}

impl DeficiencyTracker {
    pub fn new(def: &[i64]) -> Result<Self, TrackerError> {
        if let Some((index, &value)) = def.iter().enumerate().find(|(_, d)| *d % 2 != 0) {
            return Err(TrackerError::OddDeficiency { index, value });
        }
        let sum: i64 = def.iter().sum();
        if sum != 0 {
            return Err(TrackerError::Unbalanced(sum));
        }
        let w: Vec<i64> = def.iter().map(|d| d / 2).collect();
        let norm = w.iter().map(|x| x.abs()).sum();
        Ok(DeficiencyTracker {
            w,
            history: Vec::new(),
            norms: vec![norm],
        })
    }

    pub fn norm(&self) -> i64 {
        *self.norms.last().unwrap()
    }

    pub fn sum(&self) -> i64 {
        self.w.iter().sum()
    }

    /// Picks `C`, `C'` of size `h` by cases (1)–(3), lowest index first.
    pub fn choose(&self, h: usize) -> Result<Choice, TrackerError> {
        self.choose_by(h, |u| u)
    }

    /// As [`choose`](Self::choose), but candidates are taken in increasing
    /// `key` order (ties by index).
    pub fn choose_by<K: Ord>(
        &self,
        h: usize,
        key: impl Fn(usize) -> K,
    ) -> Result<Choice, TrackerError> {
        let size = self.w.len();
        if h > size {
            return Err(TrackerError::ClassTooLarge { h, size });
        }
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&u| (key(u), u));
        let plus: Vec<usize> = order.iter().copied().filter(|&u| self.w[u] > 0).collect();
        let minus: Vec<usize> = order.iter().copied().filter(|&u| self.w[u] < 0).collect();
        let zero: Vec<usize> = order.iter().copied().filter(|&u| self.w[u] == 0).collect();
        let none = || TrackerError::NoChoice {
            h,
            plus: plus.len(),
            minus: minus.len(),
            zero: zero.len(),
        };
        if plus.is_empty() && minus.is_empty() {
            let mut c: Vec<usize> = zero[..h].to_vec();
            c.sort_unstable();
            return Ok(Choice {
                case: Case::Three,
                c_prime: c.clone(),
                c,
            });
        }
        if plus.len() >= h && minus.len() >= h {
            let (mut c, mut c_prime) = (plus[..h].to_vec(), minus[..h].to_vec());
            c.sort_unstable();
            c_prime.sort_unstable();
            return Ok(Choice {
                case: Case::One,
                c,
                c_prime,
            });
        }
        // Case (2): the smaller sign class moves entirely; shared centres
        // come from the larger sign class or the zeros.
        let flip = plus.len() > minus.len();
        let (small, large) = if flip {
            (&minus, &plus)
        } else {
            (&plus, &minus)
        };
        let moved = small.len().min(h);
        let shared_pool: Vec<usize> = large[moved..].iter().chain(&zero).copied().collect();
        if moved > large.len() || h - moved > shared_pool.len() {
            return Err(none());
        }
        let shared = &shared_pool[..h - moved];
        let mut mine: Vec<usize> = small[..moved].iter().chain(shared).copied().collect();
        let mut theirs: Vec<usize> = large[..moved].iter().chain(shared).copied().collect();
        mine.sort_unstable();
        theirs.sort_unstable();
        let (c, c_prime) = if flip { (theirs, mine) } else { (mine, theirs) };
        Ok(Choice {
            case: Case::Two,
            c,
            c_prime,
        })
    }

    /// `w − 1` on `C ∖ C'`, `w + 1` on `C' ∖ C`.
    pub fn apply(&mut self, choice: &Choice) {
        for &u in &choice.c {
            if !choice.c_prime.contains(&u) {
                self.w[u] -= 1;
            }
        }
        for &u in &choice.c_prime {
            if !choice.c.contains(&u) {
                self.w[u] += 1;
            }
        }
        self.history.push(choice.case);
        let norm = self.w.iter().map(|x| x.abs()).sum();
        self.norms.push(norm);
    }

    /// `Σw = 0` and `‖w‖` non-increasing over the recorded history.
    pub fn laws_hold(&self) -> bool {
        self.sum() == 0 && self.norms.windows(2).all(|p| p[1] <= p[0])
    }
}
