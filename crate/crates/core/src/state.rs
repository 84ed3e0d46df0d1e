//! Incrementally evaluated assignment.
//!
//! `State` keeps the per-item rest weights, per-roll residual widths, band
//! loads, the cost and the violation counters in sync with the underlying
//! [`Assignment`] under single-band updates. Every cached value must agree
//! with the from-scratch functions in [`crate::model`].

use thiserror::Error;

use crate::model::{Assignment, ConstraintSet, Instance, Mass, ModelError, Width};

/// One band added to or removed from a cell; `change` is `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Delta {
    pub item: usize,
    pub roll: usize,
    pub change: i32,
}

impl Delta {
    pub fn add(item: usize, roll: usize) -> Self {
        Self {
            item,
            roll,
            change: 1,
        }
    }

    pub fn remove(item: usize, roll: usize) -> Self {
        Self {
            item,
            roll,
            change: -1,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("move removes a band of item {item} from roll {roll}, which holds none")]
pub struct UnderflowMove {
    pub item: usize,
    pub roll: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    x: Assignment,
    rest: Vec<Mass>,
    residual: Vec<Width>,
    load: Vec<u32>,
    bad: Vec<bool>,
    cost: Mass,
    unmet: usize,
    bad_count: usize,
}

impl State {
    pub fn new(instance: &Instance, x: Assignment) -> Result<Self, ModelError> {
        instance.check_dims(&x)?;
        let n = instance.n_items();
        let m = instance.n_rolls();
        let mut rest: Vec<Mass> = instance
            .items()
            .iter()
            .map(|it| it.desired_weight)
            .collect();
        let mut residual: Vec<Width> = instance.rolls().iter().map(|r| r.width).collect();
        let mut load = vec![0u32; m];
        for j in 0..m {
            for i in 0..n {
                let c = x.get(i, j);
                if c > 0 {
                    rest[i] -= c as i128 * instance.band_weight(i, j);
                    residual[j] -= c as i128 * instance.items()[i].width;
                    load[j] += c;
                }
            }
        }
        let bad: Vec<bool> = (0..m)
            .map(|j| load[j] > 0 && !instance.rolls()[j].rest_widths.contains(residual[j]))
            .collect();
        let cost = (0..m)
            .filter(|&j| load[j] > 0)
            .map(|j| instance.rolls()[j].weight)
            .sum();
        let unmet = rest.iter().filter(|&&y| y > 0).count();
        let bad_count = bad.iter().filter(|&&b| b).count();
        Ok(Self {
            x,
            rest,
            residual,
            load,
            bad,
            cost,
            unmet,
            bad_count,
        })
    }

    pub fn assignment(&self) -> &Assignment {
        &self.x
    }

    pub fn into_assignment(self) -> Assignment {
        self.x
    }

    #[inline]
    pub fn cost(&self) -> Mass {
        self.cost
    }

    #[inline]
    pub fn rest_weight(&self, i: usize) -> Mass {
        self.rest[i]
    }

    #[inline]
    pub fn residual(&self, j: usize) -> Width {
        self.residual[j]
    }

    /// Number of bands on roll `j`.
    #[inline]
    pub fn load(&self, j: usize) -> u32 {
        self.load[j]
    }

    #[inline]
    pub fn is_used(&self, j: usize) -> bool {
        self.load[j] > 0
    }

    #[inline]
    pub fn is_bad(&self, j: usize) -> bool {
        self.bad[j]
    }

    /// Items whose rest weight is still positive.
    pub fn unmet_count(&self) -> usize {
        self.unmet
    }

    pub fn bad_count(&self) -> usize {
        self.bad_count
    }

    pub fn bad_rolls(&self) -> Vec<usize> {
        (0..self.bad.len()).filter(|&j| self.bad[j]).collect()
    }

    pub fn used_rolls(&self) -> Vec<usize> {
        (0..self.load.len()).filter(|&j| self.load[j] > 0).collect()
    }

    pub fn is_admissible(&self, constraints: ConstraintSet) -> bool {
        (!constraints.job || self.unmet == 0) && (!constraints.rest_width || self.bad_count == 0)
    }

    /// `(item, count)` for every item type present on roll `j`.
    pub fn items_on(&self, j: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.x
            .column(j)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
    }

    /// Applies `deltas` in order. On underflow the already-applied prefix is
    /// rolled back and the state is left unchanged.
    pub fn apply(&mut self, instance: &Instance, deltas: &[Delta]) -> Result<(), UnderflowMove> {
        for (k, d) in deltas.iter().enumerate() {
            if d.change < 0 && self.x.get(d.item, d.roll) == 0 {
                for undo in deltas[..k].iter().rev() {
                    self.bump(instance, undo.item, undo.roll, -undo.change);
                }
                return Err(UnderflowMove {
                    item: d.item,
                    roll: d.roll,
                });
            }
            self.bump(instance, d.item, d.roll, d.change);
        }
        Ok(())
    }

    /// Undoes a successful [`State::apply`] of the same deltas.
    pub fn revert(&mut self, instance: &Instance, deltas: &[Delta]) {
        for d in deltas.iter().rev() {
            self.bump(instance, d.item, d.roll, -d.change);
        }
    }

    /// Cost after applying `deltas`, computed from load changes alone.
    pub fn cost_after(&self, instance: &Instance, deltas: &[Delta]) -> Mass {
        let mut net: [(usize, i64); 8] = [(usize::MAX, 0); 8];
        let mut spill: Vec<(usize, i64)> = Vec::new();
        let mut used = 0;
        for d in deltas {
            if let Some(slot) = net[..used].iter_mut().find(|(j, _)| *j == d.roll) {
                slot.1 += d.change as i64;
            } else if used < net.len() {
                net[used] = (d.roll, d.change as i64);
                used += 1;
            } else if let Some(slot) = spill.iter_mut().find(|(j, _)| *j == d.roll) {
                slot.1 += d.change as i64;
            } else {
                spill.push((d.roll, d.change as i64));
            }
        }
        let mut cost = self.cost;
        for &(j, change) in net[..used].iter().chain(spill.iter()) {
            let before = self.load[j] as i64;
            let after = before + change;
            if before == 0 && after > 0 {
                cost += instance.rolls()[j].weight;
            } else if before > 0 && after <= 0 {
                cost -= instance.rolls()[j].weight;
            }
        }
        cost
    }

    /// Residual width and band count of roll `j` after `deltas`, without
    /// applying them.
    pub fn preview_roll(&self, instance: &Instance, deltas: &[Delta], j: usize) -> (Width, i64) {
        let mut residual = self.residual[j];
        let mut load = self.load[j] as i64;
        for d in deltas.iter().filter(|d| d.roll == j) {
            residual -= d.change as i128 * instance.items()[d.item].width;
            load += d.change as i64;
        }
        (residual, load)
    }

    /// Whether roll `j` would violate its rest-width set after `deltas`.
    pub fn preview_bad(&self, instance: &Instance, deltas: &[Delta], j: usize) -> bool {
        let (residual, load) = self.preview_roll(instance, deltas, j);
        load > 0 && !instance.rolls()[j].rest_widths.contains(residual)
    }

    /// Rest weight of item `i` after `deltas`, without applying them.
    pub fn preview_rest(&self, instance: &Instance, deltas: &[Delta], i: usize) -> Mass {
        let mut rest = self.rest[i];
        for d in deltas.iter().filter(|d| d.item == i) {
            rest -= d.change as i128 * instance.band_weight(i, d.roll);
        }
        rest
    }

    fn bump(&mut self, instance: &Instance, i: usize, j: usize, change: i32) {
        let count = self.x.get(i, j) as i64 + change as i64;
        debug_assert!(count >= 0);
        self.x.set(i, j, count as u32);

        let was_unmet = self.rest[i] > 0;
        self.rest[i] -= change as i128 * instance.band_weight(i, j);
        match (was_unmet, self.rest[i] > 0) {
            (true, false) => self.unmet -= 1,
            (false, true) => self.unmet += 1,
            _ => {}
        }

        self.residual[j] -= change as i128 * instance.items()[i].width;
        let was_used = self.load[j] > 0;
        self.load[j] = (self.load[j] as i64 + change as i64) as u32;
        let now_used = self.load[j] > 0;
        match (was_used, now_used) {
            (false, true) => self.cost += instance.rolls()[j].weight,
            (true, false) => self.cost -= instance.rolls()[j].weight,
            _ => {}
        }

        let now_bad = now_used && !instance.rolls()[j].rest_widths.contains(self.residual[j]);
        if now_bad != self.bad[j] {
            if now_bad {
                self.bad_count += 1;
            } else {
                self.bad_count -= 1;
            }
            self.bad[j] = now_bad;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{item, roll};
    use crate::model::{self, RollSpec};
    use proptest::prelude::*;

    fn instance() -> Instance {
        let rolls: Vec<RollSpec> = vec![
            roll("1.0", "100", &[("0", Some("0.1")), ("0.5", None)]),
            roll("1.2", "80", &[("0", Some("0.05"))]),
            roll("0.9", "120", &[("0", None)]),
            roll("1.1", "90", &[("0", Some("0.2")), ("0.6", Some("0.7"))]),
        ];
        Instance::new(
            "state",
            &[item("0.3", "60"), item("0.25", "40"), item("0.45", "90")],
            &rolls,
        )
        .unwrap()
    }

    fn assert_consistent(inst: &Instance, s: &State) {
        let x = s.assignment();
        assert_eq!(s.cost(), model::cost(inst, x).unwrap());
        for i in 0..inst.n_items() {
            assert_eq!(s.rest_weight(i), model::rest_weight(inst, x, i).unwrap());
        }
        for j in 0..inst.n_rolls() {
            assert_eq!(s.residual(j), model::residual_width(inst, x, j).unwrap());
        }
        assert_eq!(s.bad_rolls(), model::bad_rolls(inst, x).unwrap());
        assert_eq!(s.used_rolls(), model::used_rolls(inst, x).unwrap());
        for cs in [
            ConstraintSet::JOB,
            ConstraintSet::REST_WIDTH,
            ConstraintSet::ALL,
        ] {
            assert_eq!(
                s.is_admissible(cs),
                model::is_admissible(inst, x, cs).unwrap()
            );
        }
    }

    #[test]
    fn underflow_leaves_state_untouched() {
        let inst = instance();
        let x = Assignment::from_triples(3, 4, &[(0, 0, 1)]).unwrap();
        let mut s = State::new(&inst, x).unwrap();
        let before = s.clone();
        let err = s
            .apply(
                &inst,
                &[Delta::remove(0, 0), Delta::add(0, 1), Delta::remove(0, 0)],
            )
            .unwrap_err();
        assert_eq!(err, UnderflowMove { item: 0, roll: 0 });
        assert_eq!(s, before);
    }

    proptest! {
        #[test]
        fn incremental_matches_from_scratch(
            start in proptest::collection::vec(0u32..3, 12),
            steps in proptest::collection::vec((0usize..3, 0usize..4, any::<bool>()), 0..40),
        ) {
            let inst = instance();
            let mut x = Assignment::for_instance(&inst);
            for (k, c) in start.iter().enumerate() {
                x.set(k % 3, k / 3, *c);
            }
            let mut s = State::new(&inst, x).unwrap();
            assert_consistent(&inst, &s);
            for (i, j, add) in steps {
                let d = if add { Delta::add(i, j) } else { Delta::remove(i, j) };
                let predicted = s.cost_after(&inst, &[d]);
                let rest = s.preview_rest(&inst, &[d], i);
                let bad = s.preview_bad(&inst, &[d], j);
                if s.apply(&inst, &[d]).is_ok() {
                    prop_assert_eq!(predicted, s.cost());
                    prop_assert_eq!(rest, s.rest_weight(i));
                    prop_assert_eq!(bad, s.is_bad(j));
                }
                assert_consistent(&inst, &s);
            }
        }

        #[test]
        fn revert_restores_state(
            start in proptest::collection::vec(1u32..3, 12),
            moves in proptest::collection::vec((0usize..3, 0usize..4, any::<bool>()), 1..10),
        ) {
            let inst = instance();
            let mut x = Assignment::for_instance(&inst);
            for (k, c) in start.iter().enumerate() {
                x.set(k % 3, k / 3, *c);
            }
            let mut s = State::new(&inst, x).unwrap();
            let before = s.clone();
            let deltas: Vec<Delta> = moves
                .into_iter()
                .map(|(i, j, add)| if add { Delta::add(i, j) } else { Delta::remove(i, j) })
                .collect();
            if s.apply(&inst, &deltas).is_ok() {
                s.revert(&inst, &deltas);
            }
            prop_assert_eq!(s, before);
        }
    }
}
