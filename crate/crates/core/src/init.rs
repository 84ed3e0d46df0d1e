//! Weight-optimizing greedy construction of job-admissible starting points.
//!
//! Items and rolls are visited in descending width order (ties by ascending
//! id). For an item that still has positive rest weight, every roll with a
//! residual strictly wider than the band receives a tentative band, which is
//! kept only if it raises the best fitness seen in the current scan. Scans of
//! the roll list repeat until the item is covered or a scan places nothing.
//! The rest-width constraint is not considered here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, Instance, Mass};
use crate::state::{Delta, State};

/// Fitness used to rank tentative placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitCriterion {
    /// `-r_j α_j`: prefer rolls left with the lightest residual strip.
    ResidualWeight,
    /// `-|y_i| - r_j α_j`: also penalize overshooting the item's demand.
    RestPlusResidual,
    /// `α_j b_i - α_j r_j`: band weight against residual strip weight.
    BandMinusResidual,
}

impl InitCriterion {
    pub const ALL: [InitCriterion; 3] = [
        InitCriterion::ResidualWeight,
        InitCriterion::RestPlusResidual,
        InitCriterion::BandMinusResidual,
    ];
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("stock exhausted with {} item type(s) still short: {uncovered:?}", uncovered.len())]
pub struct InfeasibleStock {
    /// Item ids whose rest weight stayed positive.
    pub uncovered: Vec<usize>,
    /// The assignment reached before giving up.
    pub partial: Assignment,
}

/// Fitness of having item `i` on roll `j`, evaluated on an assignment that
/// already holds the tentative band.
pub fn fitness(
    criterion: InitCriterion,
    instance: &Instance,
    state: &State,
    i: usize,
    j: usize,
) -> Mass {
    let alpha = instance.rolls()[j].alpha;
    let residual_weight = state.residual(j) * alpha;
    match criterion {
        InitCriterion::ResidualWeight => -residual_weight,
        InitCriterion::RestPlusResidual => -state.rest_weight(i).abs() - residual_weight,
        InitCriterion::BandMinusResidual => alpha * instance.items()[i].width - residual_weight,
    }
}

fn descending_by_width(widths: impl Iterator<Item = i128>) -> Vec<usize> {
    let mut order: Vec<(usize, i128)> = widths.enumerate().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().map(|(id, _)| id).collect()
}

pub fn greedy_init(
    instance: &Instance,
    criterion: InitCriterion,
) -> Result<Assignment, InfeasibleStock> {
    let mut state = State::new(instance, Assignment::for_instance(instance))
        .expect("fresh assignment matches its instance");
    let items = descending_by_width(instance.items().iter().map(|it| it.width));
    let rolls = descending_by_width(instance.rolls().iter().map(|r| r.width));

    let mut uncovered = Vec::new();
    for &i in &items {
        let band = instance.items()[i].width;
        while state.rest_weight(i) > 0 {
            let mut best: Option<Mass> = None;
            let mut placed = false;
            for &j in &rolls {
                if state.rest_weight(i) <= 0 {
                    break;
                }
                if state.residual(j) <= band {
                    continue;
                }
                let delta = [Delta::add(i, j)];
                state
                    .apply(instance, &delta)
                    .expect("adding never underflows");
                let f = fitness(criterion, instance, &state, i, j);
                if best.map_or(true, |b| f > b) {
                    best = Some(f);
                    placed = true;
                } else {
                    state.revert(instance, &delta);
                }
            }
            if !placed {
                break;
            }
        }
        if state.rest_weight(i) > 0 {
            uncovered.push(i);
        }
    }

    if uncovered.is_empty() {
        Ok(state.into_assignment())
    } else {
        uncovered.sort_unstable();
        Err(InfeasibleStock {
            uncovered,
            partial: state.into_assignment(),
        })
    }
}

/// Fills a main pool of `capacity` independent copies, cycling through the
/// criteria so each is equally represented.
pub fn seed_pool(
    instance: &Instance,
    criteria: &[InitCriterion],
    capacity: usize,
) -> Result<Vec<Assignment>, InfeasibleStock> {
    assert!(
        !criteria.is_empty(),
        "at least one init criterion is required"
    );
    let starts = criteria
        .iter()
        .map(|&c| greedy_init(instance, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..capacity)
        .map(|k| starts[k % starts.len()].clone())
        .collect())
}
