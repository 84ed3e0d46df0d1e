//! Candidate memory and the filter deciding which candidates keep being
//! processed, which are snapshotted into the reserve pool and which are
//! replaced by reserve snapshots.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, ConstraintSet, Mass};
use crate::state::State;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PoolError {
    #[error("best cost is zero, fitness distance is undefined")]
    ZeroBestCost,
    #[error("gradient window {window} needs more than {steps} processing steps")]
    InsufficientHistory { window: u64, steps: u64 },
}

/// A live search state together with its processing memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Identifies the random stream of this candidate; revivals get a fresh one.
    pub lineage: u64,
    pub state: State,
    /// `(step, cost)` at every step where the cost changed, starting at step 0.
    history: Vec<(u64, Mass)>,
    pub n_ps: u64,
    pub n_rb: u64,
    pub n_lr: u64,
    pub rw_done: bool,
    /// Step from which the good-standing early-stage window is counted.
    pub grace_start: u64,
    /// A cheaper admissible assignment passed through during the last visit.
    pub checkpoint: Option<(Mass, Assignment)>,
}

impl Candidate {
    pub fn new(lineage: u64, state: State) -> Self {
        let rw_done = state.is_admissible(ConstraintSet::ALL);
        Self {
            lineage,
            history: vec![(0, state.cost())],
            state,
            n_ps: 0,
            n_rb: 0,
            n_lr: 0,
            rw_done,
            grace_start: 0,
            checkpoint: None,
        }
    }

    pub fn cost(&self) -> Mass {
        self.state.cost()
    }

    pub fn history(&self) -> &[(u64, Mass)] {
        &self.history
    }

    /// Closes one processing step: bumps the counters and records the cost
    /// if it changed.
    pub fn record_step(&mut self) {
        self.n_ps += 1;
        self.n_rb += 1;
        self.n_lr += 1;
        let cost = self.state.cost();
        if self.history.last().map(|&(_, c)| c) != Some(cost) {
            self.history.push((self.n_ps, cost));
        }
    }

    /// Cost at `step`, i.e. the latest recorded cost at or before it.
    pub fn cost_at(&self, step: u64) -> Mass {
        let k = self.history.partition_point(|&(s, _)| s <= step);
        self.history[k.max(1) - 1].1
    }

    pub fn is_admissible(&self) -> bool {
        self.state.is_admissible(ConstraintSet::ALL)
    }
}

/// `(g - g_best) / g_best`.
pub fn fitness_distance(cost: Mass, best_cost: Mass) -> Result<BigRational, PoolError> {
    if best_cost == 0 {
        return Err(PoolError::ZeroBestCost);
    }
    Ok(BigRational::new(
        BigInt::from(cost - best_cost),
        BigInt::from(best_cost),
    ))
}

/// Relative cost reduction per step over the last `window` steps.
pub fn gradient(c: &Candidate, window: u64) -> Result<BigRational, PoolError> {
    if window == 0 || c.n_ps <= window {
        return Err(PoolError::InsufficientHistory {
            window,
            steps: c.n_ps,
        });
    }
    let old = c.cost_at(c.n_ps - window);
    if old == 0 {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(
        BigInt::from(old - c.cost()),
        BigInt::from(old) * BigInt::from(window),
    ))
}

/// Thresholds of the two filter assessments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    pub n_gs: u64,
    pub d_gs: Decimal,
    pub g_gs: Decimal,
    pub n_hp: u64,
    pub d_hp: Decimal,
    pub g_hp: Decimal,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            n_gs: 25,
            d_gs: Decimal::new(10, 2),
            g_gs: Decimal::new(1, 4),
            n_hp: 25,
            d_hp: Decimal::new(5, 2),
            g_hp: Decimal::new(1, 3),
        }
    }
}

pub fn ratio(d: Decimal) -> BigRational {
    BigRational::new(
        BigInt::from(d.mantissa()),
        num_traits::pow(BigInt::from(10), d.scale() as usize),
    )
}

/// Candidates are kept while young (relative to their grace start) or while
/// close to the best, recently involved in improving it and still making
/// progress.
pub fn good_standing(c: &Candidate, best_cost: Mass, p: &FilterParams) -> bool {
    if c.n_ps.saturating_sub(c.grace_start) <= p.n_gs {
        return true;
    }
    match (fitness_distance(c.cost(), best_cost), gradient(c, p.n_gs)) {
        (Ok(d), Ok(g)) => standing_rule(&d, c.n_rb, &g, p),
        _ => false,
    }
}

/// The late-stage good-standing test on precomputed values.
pub fn standing_rule(
    distance: &BigRational,
    n_rb: u64,
    grad: &BigRational,
    p: &FilterParams,
) -> bool {
    *distance < ratio(p.d_gs) && n_rb < p.n_gs && *grad > ratio(p.g_gs)
}

pub fn high_potential(c: &Candidate, best_cost: Mass, p: &FilterParams) -> bool {
    if c.n_ps <= p.n_hp {
        return true;
    }
    match (fitness_distance(c.cost(), best_cost), gradient(c, p.n_hp)) {
        (Ok(d), Ok(g)) => potential_rule(&d, c.n_lr, &g, p),
        _ => false,
    }
}

/// The late-stage high-potential test on precomputed values.
pub fn potential_rule(
    distance: &BigRational,
    n_lr: u64,
    grad: &BigRational,
    p: &FilterParams,
) -> bool {
    *distance < ratio(p.d_hp) && n_lr > p.n_hp && *grad > ratio(p.g_hp)
}

/// Best fully admissible assignment seen so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incumbent {
    pub assignment: Assignment,
    pub cost: Mass,
    pub lineage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolPair {
    pub main: Vec<Candidate>,
    pub reserve: VecDeque<Candidate>,
    pub main_cap: usize,
    pub reserve_cap: usize,
    next_lineage: u64,
}

/// A reservation made during a filter step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reservation {
    pub lineage: u64,
    pub distance: BigRational,
    pub evicted: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    /// Lineages dropped from the main pool.
    pub removed: Vec<u64>,
    /// `(snapshot lineage, new lineage)` for every revival.
    pub revived: Vec<(u64, u64)>,
    pub reservations: Vec<Reservation>,
    /// Whether the incumbent improved.
    pub improved: bool,
}

impl PoolPair {
    /// Builds the main pool, assigning lineages `0..main.len()`.
    pub fn new(states: Vec<State>, main_cap: usize, reserve_cap: usize) -> Self {
        assert!(states.len() <= main_cap, "main pool over capacity");
        let main: Vec<Candidate> = states
            .into_iter()
            .enumerate()
            .map(|(k, s)| Candidate::new(k as u64, s))
            .collect();
        let next_lineage = main.len() as u64;
        Self {
            main,
            reserve: VecDeque::with_capacity(reserve_cap),
            main_cap,
            reserve_cap,
            next_lineage,
        }
    }

    pub fn next_lineage(&self) -> u64 {
        self.next_lineage
    }

    /// Appends a snapshot, evicting the oldest entry when full. Returns the
    /// evicted lineage.
    pub fn reserve_push(&mut self, snapshot: Candidate) -> Option<u64> {
        if self.reserve_cap == 0 {
            return Some(snapshot.lineage);
        }
        let evicted = if self.reserve.len() >= self.reserve_cap {
            self.reserve.pop_front().map(|c| c.lineage)
        } else {
            None
        };
        self.reserve.push_back(snapshot);
        evicted
    }

    /// Takes the oldest snapshot and turns it into a fresh live candidate.
    fn revive(&mut self) -> Option<(u64, Candidate)> {
        let mut c = self.reserve.pop_front()?;
        let origin = c.lineage;
        c.lineage = self.next_lineage;
        self.next_lineage += 1;
        c.n_rb = 0;
        c.n_lr = 0;
        c.grace_start = c.n_ps;
        Some((origin, c))
    }

    /// Updates the incumbent from the main pool, then assesses every
    /// candidate in order: failing ones are replaced by the oldest reserve
    /// snapshot (or dropped if the reserve is empty), promising ones are
    /// snapshotted.
    pub fn filter_step(
        &mut self,
        incumbent: &mut Option<Incumbent>,
        p: &FilterParams,
    ) -> FilterOutcome {
        let mut outcome = FilterOutcome::default();
        for c in &mut self.main {
            let beats =
                |inc: &Option<Incumbent>, cost: Mass| inc.as_ref().map_or(true, |b| cost < b.cost);
            if let Some((cost, x)) = c.checkpoint.take() {
                if beats(incumbent, cost) {
                    *incumbent = Some(Incumbent {
                        assignment: x,
                        cost,
                        lineage: c.lineage,
                    });
                    c.n_rb = 0;
                    outcome.improved = true;
                }
            }
            if c.is_admissible() && beats(incumbent, c.cost()) {
                *incumbent = Some(Incumbent {
                    assignment: c.state.assignment().clone(),
                    cost: c.cost(),
                    lineage: c.lineage,
                });
                c.n_rb = 0;
                outcome.improved = true;
            }
        }
        let Some(reference) = incumbent
            .as_ref()
            .map(|inc| inc.cost)
            .or_else(|| self.main.iter().map(Candidate::cost).min())
        else {
            return outcome;
        };
        let d_hp = ratio(p.d_hp);

        let main = std::mem::take(&mut self.main);
        let mut kept = Vec::with_capacity(main.len());
        for mut c in main {
            if !good_standing(&c, reference, p) {
                outcome.removed.push(c.lineage);
                if let Some((origin, r)) = self.revive() {
                    outcome.revived.push((origin, r.lineage));
                    kept.push(r);
                }
                continue;
            }
            if high_potential(&c, reference, p) {
                if let Ok(distance) = fitness_distance(c.cost(), reference) {
                    if distance < d_hp {
                        let evicted = self.reserve_push(c.clone());
                        c.n_lr = 0;
                        outcome.reservations.push(Reservation {
                            lineage: c.lineage,
                            distance,
                            evicted,
                        });
                    }
                }
            }
            kept.push(c);
        }
        self.main = kept;
        outcome
    }
}
