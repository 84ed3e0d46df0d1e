//! The search loop: seed the main pool, then alternate a parallel processing
//! epoch over K shards with a serial filter barrier until the pool empties or
//! the time budget runs out.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::init::{seed_pool, InfeasibleStock, InitCriterion};
use crate::model::{Assignment, Instance, Mass, ModelError, Units};
use crate::pool::{Candidate, FilterParams, Incumbent, PoolPair};
use crate::state::State;
use crate::workers::{visit, ParamError, WorkerParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Number of parallel lanes.
    pub k: usize,
    /// Wall-clock budget in seconds, checked at every barrier.
    pub t_max_secs: f64,
    pub main_capacity: usize,
    pub reserve_capacity: usize,
    pub worker: WorkerParams,
    pub filter: FilterParams,
    pub criteria: Vec<InitCriterion>,
    pub seed: u64,
    /// Optional cap on the number of epochs.
    pub max_epochs: Option<u64>,
    /// Stop as soon as an admissible assignment of at most this cost is found.
    pub target_cost: Option<Decimal>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            k: 1,
            t_max_secs: 60.0,
            main_capacity: 24,
            reserve_capacity: 48,
            worker: WorkerParams::default(),
            filter: FilterParams::default(),
            criteria: InitCriterion::ALL.to_vec(),
            seed: 0,
            max_epochs: None,
            target_cost: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("k must be at least 1")]
    ZeroLanes,
    #[error("t_max must be positive, got {0}")]
    TimeBudget(f64),
    #[error("main pool capacity must be at least 1")]
    ZeroCapacity,
    #[error("at least one init criterion is required")]
    NoCriteria,
    #[error(transparent)]
    Worker(#[from] ParamError),
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroLanes);
        }
        if !(self.t_max_secs > 0.0) {
            return Err(ConfigError::TimeBudget(self.t_max_secs));
        }
        if self.main_capacity == 0 {
            return Err(ConfigError::ZeroCapacity);
        }
        if self.criteria.is_empty() {
            return Err(ConfigError::NoCriteria);
        }
        self.worker.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Infeasible(#[from] InfeasibleStock),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeBudget,
    EmptyPool,
    EpochLimit,
    TargetReached,
}

/// The best cost after an epoch in which it improved; epoch 0 is the seeded pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePoint {
    pub epoch: u64,
    pub cost: Mass,
}

/// Wall-clock data, kept apart so reports can be compared without it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    /// Elapsed seconds at each trace point.
    pub trace_secs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub instance: String,
    pub terminated_by: Termination,
    /// Best fully admissible assignment, if any was found.
    pub best: Option<Assignment>,
    pub best_cost: Option<Mass>,
    /// When no admissible assignment was found: the bad rolls of the
    /// candidate with fewest of them.
    pub unresolved_rolls: Vec<usize>,
    pub epochs: u64,
    pub cost_trace: Vec<TracePoint>,
    pub total_demand: Mass,
    pub units: Units,
    pub config: EngineConfig,
    pub timing: Timing,
}

/// Deals `pool` round-robin into `k` shards.
pub fn partition<T>(pool: Vec<T>, k: usize) -> Vec<Vec<T>> {
    assert!(k >= 1, "k must be at least 1");
    let mut shards: Vec<Vec<T>> = (0..k)
        .map(|_| Vec::with_capacity(pool.len() / k + 1))
        .collect();
    for (idx, c) in pool.into_iter().enumerate() {
        shards[idx % k].push(c);
    }
    shards
}

/// Random stream of one candidate for one epoch. Depends only on its
/// arguments, not on how candidates are spread over lanes.
pub fn derive_rng(master_seed: u64, lineage: u64, epoch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(lineage);
    rng.set_word_pos((epoch as u128) << 48);
    rng
}

/// Snapshot of the main pool handed to observers after each epoch, before
/// filtering.
pub struct EpochView<'a> {
    pub epoch: u64,
    pub candidates: &'a [Candidate],
}

pub fn solve(instance: &Instance, config: &EngineConfig) -> Result<SolveReport, SolveError> {
    solve_observed(instance, config, |_| {})
}

pub fn solve_observed<F>(
    instance: &Instance,
    config: &EngineConfig,
    mut observe: F,
) -> Result<SolveReport, SolveError>
where
    F: FnMut(&EpochView<'_>),
{
    let start = Instant::now();
    config.validate()?;
    let zeta = config
        .worker
        .zeta_mass(instance)
        .map_err(ConfigError::from)?;
    let target = config
        .target_cost
        .map(|t| floor_mass(t, instance.units()))
        .transpose()?;

    let seeds = seed_pool(instance, &config.criteria, config.main_capacity)?;
    let states = seeds
        .into_iter()
        .map(|x| State::new(instance, x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pools = PoolPair::new(states, config.main_capacity, config.reserve_capacity);

    let mut incumbent: Option<Incumbent> = None;
    for c in &pools.main {
        if c.is_admissible() && incumbent.as_ref().map_or(true, |b| c.cost() < b.cost) {
            incumbent = Some(Incumbent {
                assignment: c.state.assignment().clone(),
                cost: c.cost(),
                lineage: c.lineage,
            });
        }
    }
    let mut trace = Vec::new();
    let mut timing = Timing::default();
    if let Some(inc) = &incumbent {
        trace.push(TracePoint {
            epoch: 0,
            cost: inc.cost,
        });
        timing.trace_secs.push(start.elapsed().as_secs_f64());
    }

    let lanes = rayon::ThreadPoolBuilder::new()
        .num_threads(config.k)
        .build()
        .expect("thread pool");
    let mut epoch = 0u64;
    let terminated_by = loop {
        epoch += 1;
        let indexed: Vec<(usize, Candidate)> = std::mem::take(&mut pools.main)
            .into_iter()
            .enumerate()
            .collect();
        let shards = partition(indexed, config.k);
        let processed: Vec<Vec<(usize, Candidate)>> = lanes.install(|| {
            shards
                .into_par_iter()
                .map(|shard| {
                    shard
                        .into_iter()
                        .map(|(idx, mut c)| {
                            let mut rng = derive_rng(config.seed, c.lineage, epoch);
                            c.checkpoint = visit(
                                instance,
                                &mut c.state,
                                &mut c.rw_done,
                                &config.worker,
                                zeta,
                                &mut rng,
                            );
                            c.record_step();
                            (idx, c)
                        })
                        .collect()
                })
                .collect()
        });
        let mut merged: Vec<(usize, Candidate)> = processed.into_iter().flatten().collect();
        merged.sort_by_key(|&(idx, _)| idx);
        pools.main = merged.into_iter().map(|(_, c)| c).collect();
        observe(&EpochView {
            epoch,
            candidates: &pools.main,
        });

        let outcome = pools.filter_step(&mut incumbent, &config.filter);
        if outcome.improved {
            let cost = incumbent.as_ref().expect("improved incumbent").cost;
            trace.push(TracePoint { epoch, cost });
            timing.trace_secs.push(start.elapsed().as_secs_f64());
        }

        if let (Some(t), Some(inc)) = (target, &incumbent) {
            if inc.cost <= t {
                break Termination::TargetReached;
            }
        }
        if pools.main.is_empty() {
            break Termination::EmptyPool;
        }
        if config.max_epochs.is_some_and(|m| epoch >= m) {
            break Termination::EpochLimit;
        }
        if start.elapsed().as_secs_f64() >= config.t_max_secs {
            break Termination::TimeBudget;
        }
    };

    let unresolved_rolls = if incumbent.is_some() {
        Vec::new()
    } else {
        pools
            .main
            .iter()
            .chain(pools.reserve.iter())
            .map(|c| c.state.bad_rolls())
            .min_by_key(|b| b.len())
            .unwrap_or_default()
    };
    timing.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        instance: instance.name().to_string(),
        terminated_by,
        best_cost: incumbent.as_ref().map(|b| b.cost),
        best: incumbent.map(|b| b.assignment),
        unresolved_rolls,
        epochs: epoch,
        cost_trace: trace,
        total_demand: instance.total_demand(),
        units: instance.units(),
        config: config.clone(),
        timing,
    })
}

fn floor_mass(value: Decimal, units: Units) -> Result<Mass, ModelError> {
    let scale = Decimal::from_i128_with_scale(10i128.pow(units.mass_decimals), 0);
    value
        .checked_mul(scale)
        .and_then(|v| v.floor().to_i128())
        .ok_or(ModelError::Overflow)
}
