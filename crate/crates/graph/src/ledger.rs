use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::rng::{splitmix64, unit_from_hash};
use crate::triangle::Triangle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("triangle {0} is outside the universe")]
    OutsideUniverse(Triangle),
    #[error("triangle {triangle} already belongs to family `{existing}`")]
    Overlap { triangle: Triangle, existing: String },
    #[error("triangle {0} is not exposed-present")]
    NotPresent(Triangle),
    #[error("triangle {triangle} already used by stage `{stage}`")]
    AlreadyClaimed { triangle: Triangle, stage: String },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Exposure {
    Unexposed,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    family: u32,
    state: Exposure,
    queries: u32,
    claimed: Option<u32>,
}

pub type FamilyId = u32;

/// Per-triangle one-shot Bernoulli(p) exposure over a registered universe.
///
/// A draw is a pure function of `(seed, triangle)`, so outcomes do not depend
/// on query order. The first query records the state; later queries return it.
#[derive(Debug, Clone)]
pub struct ExposureLedger {
    seed: u64,
    p: f64,
    slots: HashMap<Triangle, Slot>,
    families: Vec<String>,
    stages: Vec<String>,
}

/// Result of auditing a triangle collection against the ledger.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LedgerAudit {
    pub outside: Vec<Triangle>,
    pub unexposed: Vec<Triangle>,
    pub absent: Vec<Triangle>,
    pub duplicated: Vec<Triangle>,
}

impl LedgerAudit {
    pub fn is_clean(&self) -> bool {
        self.outside.is_empty()
            && self.unexposed.is_empty()
            && self.absent.is_empty()
            && self.duplicated.is_empty()
    }
}

impl ExposureLedger {
    pub fn new(seed: u64, p: f64) -> Result<Self, LedgerError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(LedgerError::Probability(p));
        }
        Ok(ExposureLedger {
            seed,
            p,
            slots: HashMap::new(),
            families: Vec::new(),
            stages: Vec::new(),
        })
    }

    /// Ledger whose universe is a single family.
    pub fn with_universe(
        seed: u64,
        p: f64,
        universe: impl IntoIterator<Item = Triangle>,
    ) -> Result<Self, LedgerError> {
        let mut l = ExposureLedger::new(seed, p)?;
        l.register_family("universe", universe)?;
        Ok(l)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn universe_size(&self) -> usize {
        self.slots.len()
    }

    /// Adds a class family. Families must be pairwise disjoint.
    pub fn register_family(
        &mut self,
        name: &str,
        triangles: impl IntoIterator<Item = Triangle>,
    ) -> Result<FamilyId, LedgerError> {
        let id = self.families.len() as u32;
        let tris: Vec<Triangle> = triangles.into_iter().collect();
        for t in &tris {
            if let Some(s) = self.slots.get(t) {
                return Err(LedgerError::Overlap {
                    triangle: *t,
                    existing: self.families[s.family as usize].clone(),
                });
            }
        }
        self.families.push(name.to_string());
        for t in tris {
            // Duplicates inside one family collapse to one slot.
            self.slots.entry(t).or_insert(Slot {
                family: id,
                state: Exposure::Unexposed,
                queries: 0,
                claimed: None,
            });
        }
        Ok(id)
    }

    pub fn family_name(&self, id: FamilyId) -> &str {
        &self.families[id as usize]
    }

    pub fn family_of(&self, t: &Triangle) -> Option<&str> {
        self.slots
            .get(t)
            .map(|s| self.families[s.family as usize].as_str())
    }

    pub fn contains(&self, t: &Triangle) -> bool {
        self.slots.contains_key(t)
    }

    /// The Bernoulli outcome that exposing `t` would record.
    #[inline]
    pub fn draw(&self, t: &Triangle) -> bool {
        let [a, b, c] = t.vertices();
        let h = splitmix64(
            self.seed
                ^ splitmix64(a as u64 ^ splitmix64(b as u64 ^ splitmix64(c as u64 ^ 0x5851_F42D))),
        );
        unit_from_hash(h) < self.p
    }

    /// Exposes `t` (once) and returns whether it is present.
    pub fn expose(&mut self, t: &Triangle) -> Result<bool, LedgerError> {
        let drawn = self.draw(t);
        let slot = self
            .slots
            .get_mut(t)
            .ok_or(LedgerError::OutsideUniverse(*t))?;
        slot.queries += 1;
        if slot.state == Exposure::Unexposed {
            slot.state = if drawn {
                Exposure::Present
            } else {
                Exposure::Absent
            };
        }
        Ok(slot.state == Exposure::Present)
    }

    pub fn expose_all(&mut self, ts: &[Triangle]) -> Result<Vec<bool>, LedgerError> {
        ts.iter().map(|t| self.expose(t)).collect()
    }

    pub fn state(&self, t: &Triangle) -> Option<Exposure> {
        self.slots.get(t).map(|s| s.state)
    }

    /// How many times `t` has been queried.
    pub fn queries(&self, t: &Triangle) -> u32 {
        self.slots.get(t).map_or(0, |s| s.queries)
    }

    /// Marks an exposed-present triangle as used by a pipeline stage.
    pub fn claim(&mut self, t: &Triangle, stage: &str) -> Result<(), LedgerError> {
        let stage_id = match self.stages.iter().position(|s| s == stage) {
            Some(i) => i as u32,
            None => {
                self.stages.push(stage.to_string());
                (self.stages.len() - 1) as u32
            }
        };
        let slot = self
            .slots
            .get_mut(t)
            .ok_or(LedgerError::OutsideUniverse(*t))?;
        if slot.state != Exposure::Present {
            return Err(LedgerError::NotPresent(*t));
        }
        if let Some(s) = slot.claimed {
            return Err(LedgerError::AlreadyClaimed {
                triangle: *t,
                stage: self.stages[s as usize].clone(),
            });
        }
        slot.claimed = Some(stage_id);
        Ok(())
    }

    /// Releases a claim (used when a stage is rolled back).
    pub fn unclaim(&mut self, t: &Triangle) {
        if let Some(s) = self.slots.get_mut(t) {
            s.claimed = None;
        }
    }

    pub fn claimed_by(&self, t: &Triangle) -> Option<&str> {
        self.slots
            .get(t)
            .and_then(|s| s.claimed)
            .map(|i| self.stages[i as usize].as_str())
    }

    /// Checks that every triangle is in the universe, exposed-present and
    /// listed once.
    pub fn audit(&self, triangles: &[Triangle]) -> LedgerAudit {
        let mut audit = LedgerAudit::default();
        let mut seen = HashMap::with_capacity(triangles.len());
        for t in triangles {
            if seen.insert(*t, ()).is_some() {
                audit.duplicated.push(*t);
            }
            match self.slots.get(t).map(|s| s.state) {
                None => audit.outside.push(*t),
                Some(Exposure::Unexposed) => audit.unexposed.push(*t),
                Some(Exposure::Absent) => audit.absent.push(*t),
                Some(Exposure::Present) => {}
            }
        }
        audit
    }

    /// Present triangles among those already exposed, sorted.
    pub fn present(&self) -> Vec<Triangle> {
        let mut v: Vec<Triangle> = self
            .slots
            .iter()
            .filter(|(_, s)| s.state == Exposure::Present)
            .map(|(t, _)| *t)
            .collect();
        v.sort_unstable();
        v
    }
}
