//! The three processing units applied to a candidate on each visit.

use rand::Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, ConstraintSet, Instance, Mass, ModelError};
use crate::ops::{better_reply, constr_reply, random_reply, Budget, OpKind};
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkerParams {
    /// Rest-width repair passes per visit.
    pub n_con: usize,
    /// Better-reply steps per visit.
    pub n_loc: usize,
    /// Random-reply steps per perturbation.
    pub n_per: usize,
    /// Probability of perturbing on a visit.
    pub lambda: f64,
    pub budget: Budget,
    /// Cost allowance for better replies, in mass units.
    pub zeta: Decimal,
}

impl Default for WorkerParams {
    fn default() -> Self {
        Self {
            n_con: 5,
            n_loc: 10,
            n_per: 3,
            lambda: 0.1,
            budget: Budget::default(),
            zeta: Decimal::ZERO,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("lambda must lie in [0, 1], got {0}")]
    Lambda(f64),
    #[error("zeta must be non-negative, got {0}")]
    NegativeZeta(Decimal),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl WorkerParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("n_con", self.n_con),
            ("n_loc", self.n_loc),
            ("n_per", self.n_per),
        ] {
            if v == 0 {
                return Err(ParamError::ZeroCount(name));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ParamError::Lambda(self.lambda));
        }
        if self.zeta.is_sign_negative() && !self.zeta.is_zero() {
            return Err(ParamError::NegativeZeta(self.zeta));
        }
        Ok(())
    }

    /// The allowance on the instance's mass scale.
    pub fn zeta_mass(&self, instance: &Instance) -> Result<Mass, ParamError> {
        Ok(instance.units().mass_allowance(self.zeta)?)
    }
}

/// Repairs rolls whose residual width is not allowed. Stops as soon as no
/// bad roll is left; otherwise returns after `n_con` passes over all kinds.
pub fn rest_width_worker<R: Rng + ?Sized>(
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    params: &WorkerParams,
    rng: &mut R,
) {
    for _ in 0..params.n_con {
        for kind in OpKind::ALL {
            let bad = state.bad_rolls();
            if bad.is_empty() {
                return;
            }
            constr_reply(
                kind,
                instance,
                state,
                constraints,
                &bad,
                &params.budget,
                rng,
            );
        }
    }
}

/// `n_loc` better-reply steps with uniformly drawn operation kinds.
pub fn local_opt_worker<R: Rng + ?Sized>(
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    params: &WorkerParams,
    zeta: Mass,
    rng: &mut R,
) {
    for _ in 0..params.n_loc {
        let kind = OpKind::random(rng);
        better_reply(
            kind,
            instance,
            state,
            constraints,
            &params.budget,
            zeta,
            rng,
        );
    }
}

/// With probability `lambda`, `n_per` random-reply steps.
pub fn perturb_worker<R: Rng + ?Sized>(
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    params: &WorkerParams,
    rng: &mut R,
) {
    let t: f64 = rng.gen();
    if t < params.lambda {
        for _ in 0..params.n_per {
            let kind = OpKind::random(rng);
            random_reply(kind, instance, state, constraints, &params.budget, rng);
        }
    }
}

/// One pass through the worker chain. Candidates whose rest widths have not
/// been fixed yet go through repair first and only continue to local
/// optimization and perturbation once fully admissible. `rw_done` records
/// that the repair stage is no longer needed.
///
/// When perturbation raised the cost, the cheaper assignment reached by
/// local optimization is returned so it is not lost.
pub fn visit<R: Rng + ?Sized>(
    instance: &Instance,
    state: &mut State,
    rw_done: &mut bool,
    params: &WorkerParams,
    zeta: Mass,
    rng: &mut R,
) -> Option<(Mass, Assignment)> {
    let all = ConstraintSet::ALL;
    if !*rw_done {
        rest_width_worker(instance, state, all, params, rng);
        if !state.is_admissible(all) {
            return None;
        }
        *rw_done = true;
    }
    local_opt_worker(instance, state, all, params, zeta, rng);
    let optimized = state.cost();
    let t: f64 = rng.gen();
    if t < params.lambda {
        let before = state.assignment().clone();
        for _ in 0..params.n_per {
            let kind = OpKind::random(rng);
            random_reply(kind, instance, state, all, &params.budget, rng);
        }
        if state.cost() > optimized {
            return Some((optimized, before));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{item, roll};
    use crate::model::RollSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open() -> Vec<(&'static str, Option<&'static str>)> {
        vec![("0", None)]
    }

    fn state(inst: &Instance, triples: &[(usize, usize, u32)]) -> State {
        State::new(
            inst,
            Assignment::from_triples(inst.n_items(), inst.n_rolls(), triples).unwrap(),
        )
        .unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn loose() -> Instance {
        let rolls: Vec<RollSpec> = ["1.0", "1.2", "0.9", "1.1", "1.3", "1.0"]
            .iter()
            .map(|w| roll(w, "100", &open()))
            .collect();
        Instance::new(
            "loose",
            &[item("0.2", "30"), item("0.3", "40"), item("0.15", "20")],
            &rolls,
        )
        .unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(WorkerParams::default().validate().is_ok());
        let p = WorkerParams {
            n_loc: 0,
            ..WorkerParams::default()
        };
        assert_eq!(p.validate(), Err(ParamError::ZeroCount("n_loc")));
        let p = WorkerParams {
            lambda: 1.5,
            ..WorkerParams::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::Lambda(_))));
        let p = WorkerParams {
            zeta: Decimal::NEGATIVE_ONE,
            ..WorkerParams::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::NegativeZeta(_))));
    }

    #[test]
    fn rest_width_worker_leaves_clean_input() {
        let inst = loose();
        let mut s = state(&inst, &[(0, 0, 2), (1, 1, 2), (2, 2, 2)]);
        let before = s.clone();
        rest_width_worker(
            &inst,
            &mut s,
            ConstraintSet::ALL,
            &WorkerParams::default(),
            &mut rng(0),
        );
        assert_eq!(s, before);
    }

    #[test]
    fn rest_width_worker_fixes_single_bad_roll() {
        let inst = Instance::new(
            "fix",
            &[item("0.4", "20")],
            &[
                roll("1", "100", &[("0", Some("0.1"))]),
                roll("0.5", "100", &[("0", Some("0.1"))]),
            ],
        )
        .unwrap();
        let mut s = state(&inst, &[(0, 0, 1)]);
        rest_width_worker(
            &inst,
            &mut s,
            ConstraintSet::ALL,
            &WorkerParams::default(),
            &mut rng(1),
        );
        assert!(s.bad_rolls().is_empty());
        assert!(s.is_admissible(ConstraintSet::ALL));
    }

    #[test]
    fn rest_width_worker_gives_up_on_unfixable_roll() {
        let inst = Instance::new(
            "nofix",
            &[item("0.4", "20")],
            &[roll("1", "100", &[("0", Some("0.1"))])],
        )
        .unwrap();
        let mut s = state(&inst, &[(0, 0, 1)]);
        let before = s.clone();
        rest_width_worker(
            &inst,
            &mut s,
            ConstraintSet::ALL,
            &WorkerParams::default(),
            &mut rng(1),
        );
        assert_eq!(s, before);
        assert_eq!(s.bad_rolls(), vec![0]);
    }

    #[test]
    fn local_opt_consolidates() {
        let inst = Instance::new(
            "consolidate",
            &[item("0.4", "20"), item("0.3", "15")],
            &[roll("1", "100", &open()), roll("1", "60", &open())],
        )
        .unwrap();
        // Moving either band next to the other drops one roll. Both rolls
        // alone are local optima under single moves.
        let optima = [inst.rolls()[0].weight, inst.rolls()[1].weight];
        let mut hits = 0;
        for seed in 0..20 {
            let mut s = state(&inst, &[(0, 0, 1), (1, 1, 1)]);
            let start = s.cost();
            local_opt_worker(
                &inst,
                &mut s,
                ConstraintSet::ALL,
                &WorkerParams::default(),
                0,
                &mut rng(seed),
            );
            assert!(s.is_admissible(ConstraintSet::ALL));
            assert!(s.cost() <= start);
            hits += optima.contains(&s.cost()) as usize;
        }
        assert!(hits >= 15, "cost dropped in {hits}/20 runs");
    }

    #[test]
    fn local_opt_is_stepwise_non_increasing() {
        let inst = loose();
        let x =
            crate::init::greedy_init(&inst, crate::init::InitCriterion::ResidualWeight).unwrap();
        let mut s = State::new(&inst, x).unwrap();
        let params = WorkerParams {
            n_loc: 1,
            ..WorkerParams::default()
        };
        let mut r = rng(5);
        for _ in 0..5 {
            let before = s.cost();
            local_opt_worker(&inst, &mut s, ConstraintSet::ALL, &params, 0, &mut r);
            assert!(s.cost() <= before);
        }
    }

    #[test]
    fn perturb_respects_lambda() {
        let inst = loose();
        let x =
            crate::init::greedy_init(&inst, crate::init::InitCriterion::ResidualWeight).unwrap();
        let start = State::new(&inst, x).unwrap();
        let off = WorkerParams {
            lambda: 0.0,
            ..WorkerParams::default()
        };
        let on = WorkerParams {
            lambda: 1.0,
            ..WorkerParams::default()
        };
        let mut changed = 0;
        for seed in 0..30 {
            let mut s = start.clone();
            perturb_worker(&inst, &mut s, ConstraintSet::ALL, &off, &mut rng(seed));
            assert_eq!(s, start);
            let mut s = start.clone();
            perturb_worker(&inst, &mut s, ConstraintSet::ALL, &on, &mut rng(seed));
            assert!(s.is_admissible(ConstraintSet::ALL));
            // At most three moves of at most three bands changed each.
            let diff: u32 = (0..inst.n_items())
                .flat_map(|i| (0..inst.n_rolls()).map(move |j| (i, j)))
                .map(|(i, j)| {
                    s.assignment()
                        .get(i, j)
                        .abs_diff(start.assignment().get(i, j))
                })
                .sum();
            assert!(diff <= 3 * 2 * 3);
            changed += (s != start) as usize;
        }
        assert!(changed > 0);
    }

    #[test]
    fn perturb_on_empty_neighborhood_is_no_op() {
        let inst =
            Instance::new("one", &[item("0.5", "40")], &[roll("1.2", "100", &open())]).unwrap();
        let mut s = state(&inst, &[(0, 0, 1)]);
        let before = s.clone();
        let params = WorkerParams {
            lambda: 1.0,
            n_per: 1,
            ..WorkerParams::default()
        };
        perturb_worker(&inst, &mut s, ConstraintSet::ALL, &params, &mut rng(3));
        assert_eq!(s, before);
    }

    #[test]
    fn visit_skips_optimization_while_bad() {
        let inst = Instance::new(
            "stuck",
            &[item("0.4", "20")],
            &[
                roll("1", "100", &[("0", Some("0.1"))]),
                roll("1", "50", &[("0", None)]),
            ],
        )
        .unwrap();
        // Roll 0 is bad; moving the band to roll 1 fixes it and also lowers
        // cost. The visit must repair first, then may optimize.
        let mut s = state(&inst, &[(0, 0, 1)]);
        let mut rw_done = false;
        visit(
            &inst,
            &mut s,
            &mut rw_done,
            &WorkerParams::default(),
            0,
            &mut rng(2),
        );
        assert!(rw_done);
        assert!(s.is_admissible(ConstraintSet::ALL));

        let inst = Instance::new(
            "nofix",
            &[item("0.4", "20")],
            &[roll("1", "100", &[("0", Some("0.1"))])],
        )
        .unwrap();
        let mut s = state(&inst, &[(0, 0, 1)]);
        let before = s.clone();
        let mut rw_done = false;
        visit(
            &inst,
            &mut s,
            &mut rw_done,
            &WorkerParams::default(),
            0,
            &mut rng(2),
        );
        assert!(!rw_done);
        assert_eq!(s, before);
    }

    #[test]
    fn visit_keeps_the_pre_perturbation_optimum() {
        let inst = loose();
        let x =
            crate::init::greedy_init(&inst, crate::init::InitCriterion::ResidualWeight).unwrap();
        let params = WorkerParams {
            lambda: 1.0,
            ..WorkerParams::default()
        };
        let mut seen = 0;
        for seed in 0..40 {
            let mut s = State::new(&inst, x.clone()).unwrap();
            let mut done = true;
            if let Some((cost, kept)) = visit(&inst, &mut s, &mut done, &params, 0, &mut rng(seed))
            {
                assert!(cost < s.cost());
                assert_eq!(crate::model::cost(&inst, &kept).unwrap(), cost);
                assert!(crate::model::is_admissible(&inst, &kept, ConstraintSet::ALL).unwrap());
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn visit_is_deterministic() {
        let inst = loose();
        let x =
            crate::init::greedy_init(&inst, crate::init::InitCriterion::RestPlusResidual).unwrap();
        let params = WorkerParams {
            lambda: 0.5,
            ..WorkerParams::default()
        };
        let run = |seed| {
            let mut s = State::new(&inst, x.clone()).unwrap();
            let mut done = false;
            for _ in 0..5 {
                visit(&inst, &mut s, &mut done, &params, 0, &mut rng(seed));
            }
            s
        };
        assert_eq!(run(9), run(9));
    }
}
