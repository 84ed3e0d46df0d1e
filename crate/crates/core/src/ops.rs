//! Neighborhood operations and their three acceptance modes.
//!
//! Every operation knows how to enumerate candidate moves in two styles:
//!
//! * a *nested* scan (used by `better_reply` and `constr_reply`): a random
//!   source roll, then the items or item combinations on it, then random
//!   destinations, each level repeated up to the trial budget;
//! * a *flat* scan (used by `random_reply`): every trial draws all of its
//!   rolls and items at once.
//!
//! Scans hand each candidate move to an acceptance closure, which applies it
//! to the [`State`], keeps it on success and reverts it otherwise. The first
//! accepted move ends the scan, so a reply changes the assignment by at most
//! one move.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, ConstraintSet, Instance, Mass};
use crate::state::{Delta, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    MoveItem,
    SwapItems,
    SplitItem,
    RemoveObject,
    ReverseRemoveObject,
    RemoveItem,
}

impl OpKind {
    pub const ALL: [OpKind; 6] = [
        OpKind::MoveItem,
        OpKind::SwapItems,
        OpKind::SplitItem,
        OpKind::RemoveObject,
        OpKind::ReverseRemoveObject,
        OpKind::RemoveItem,
    ];

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }
}

/// A neighborhood step as a list of single-band changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: OpKind,
    pub deltas: Vec<Delta>,
}

impl Move {
    fn reset(&mut self, kind: OpKind) {
        self.kind = kind;
        self.deltas.clear();
    }

    fn transfer(&mut self, item: usize, from: usize, to: usize) {
        self.deltas.push(Delta::remove(item, from));
        self.deltas.push(Delta::add(item, to));
    }

    /// Rolls touched by the move, in first-touch order.
    pub fn rolls(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for d in &self.deltas {
            if !out.contains(&d.roll) {
                out.push(d.roll);
            }
        }
        out
    }

    pub fn items(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for d in &self.deltas {
            if !out.contains(&d.item) {
                out.push(d.item);
            }
        }
        out
    }
}

/// Trial counts bounding each nested level of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub br_trials: usize,
    pub con_trials: usize,
    pub rand_trials: usize,
    /// Largest item combination taken from one roll by `SwapItems` and
    /// `RemoveObject`.
    pub combo_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            br_trials: 20,
            con_trials: 20,
            rand_trials: 20,
            combo_cap: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Better,
    Constr,
    Random,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("move removes a band of item {item} from roll {roll}, which holds none")]
    Underflow { item: usize, roll: usize },
    #[error("move touches cell ({item}, {roll}) outside the assignment")]
    OutOfRange { item: usize, roll: usize },
}

/// Returns a copy of `x` with the move applied.
pub fn apply_move(x: &Assignment, mv: &Move) -> Result<Assignment, MoveError> {
    let mut out = x.clone();
    for d in &mv.deltas {
        if d.item >= x.n_items() || d.roll >= x.n_rolls() {
            return Err(MoveError::OutOfRange {
                item: d.item,
                roll: d.roll,
            });
        }
        let c = out.get(d.item, d.roll) as i64 + d.change as i64;
        if c < 0 {
            return Err(MoveError::Underflow {
                item: d.item,
                roll: d.roll,
            });
        }
        out.set(d.item, d.roll, c as u32);
    }
    Ok(out)
}

/// Collects the moves a scan of `kind` in `mode` would propose, without
/// accepting any of them.
pub fn sample_moves<R: Rng + ?Sized>(
    kind: OpKind,
    mode: Mode,
    instance: &Instance,
    state: &State,
    focus: Option<&[usize]>,
    budget: &Budget,
    rng: &mut R,
) -> Vec<Move> {
    let mut scratch = state.clone();
    let mut out = Vec::new();
    let (trials, nested) = match mode {
        Mode::Better => (budget.br_trials, true),
        Mode::Constr => (budget.con_trials, true),
        Mode::Random => (budget.rand_trials, false),
    };
    let mut scan = Scan::new(kind, instance, trials, budget.combo_cap, rng);
    let mut collect = |_: &mut State, mv: &Move, _: usize| {
        out.push(mv.clone());
        false
    };
    if nested {
        scan.nested(&mut scratch, focus, &mut collect);
    } else {
        scan.flat(&mut scratch, &mut collect);
    }
    out
}

/// Applies the first sampled move that keeps `constraints` and satisfies
/// `g(X') < g(X) + zeta`. Returns whether the state changed.
pub fn better_reply<R: Rng + ?Sized>(
    kind: OpKind,
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    budget: &Budget,
    zeta: Mass,
    rng: &mut R,
) -> bool {
    // A swap keeps both rolls in use, so it never lowers the cost.
    if kind == OpKind::SwapItems && zeta <= 0 {
        return false;
    }
    let threshold = state.cost() + zeta;
    let mut accept = |s: &mut State, mv: &Move, _: usize| {
        if s.cost_after(instance, &mv.deltas) >= threshold {
            return false;
        }
        s.apply(instance, &mv.deltas)
            .expect("sampled moves are valid");
        if s.is_admissible(constraints) {
            true
        } else {
            s.revert(instance, &mv.deltas);
            false
        }
    };
    Scan::new(kind, instance, budget.br_trials, budget.combo_cap, rng).nested(
        state,
        None,
        &mut accept,
    )
}

/// Tries to repair one of the `bad` rolls. A move is kept when the sampled
/// bad roll becomes rest-width admissible, every touched item stays covered
/// (if the job constraint is enforced) and no touched roll that was fine
/// before turns bad.
pub fn constr_reply<R: Rng + ?Sized>(
    kind: OpKind,
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    bad: &[usize],
    budget: &Budget,
    rng: &mut R,
) -> bool {
    if bad.is_empty() {
        return false;
    }
    let mut accept = |s: &mut State, mv: &Move, anchor: usize| {
        if s.preview_bad(instance, &mv.deltas, anchor) {
            return false;
        }
        for (k, d) in mv.deltas.iter().enumerate() {
            let first_touch = |pred: &dyn Fn(&Delta) -> bool| !mv.deltas[..k].iter().any(pred);
            if first_touch(&|e| e.roll == d.roll)
                && !s.is_bad(d.roll)
                && s.preview_bad(instance, &mv.deltas, d.roll)
            {
                return false;
            }
            if constraints.job
                && first_touch(&|e| e.item == d.item)
                && s.preview_rest(instance, &mv.deltas, d.item) > 0
            {
                return false;
            }
        }
        s.apply(instance, &mv.deltas).is_ok()
    };
    Scan::new(kind, instance, budget.con_trials, budget.combo_cap, rng).nested(
        state,
        Some(bad),
        &mut accept,
    )
}

/// Applies the first sampled move that keeps `constraints`, whatever its
/// effect on cost.
pub fn random_reply<R: Rng + ?Sized>(
    kind: OpKind,
    instance: &Instance,
    state: &mut State,
    constraints: ConstraintSet,
    budget: &Budget,
    rng: &mut R,
) -> bool {
    let mut accept = |s: &mut State, mv: &Move, _: usize| {
        s.apply(instance, &mv.deltas)
            .expect("sampled moves are valid");
        if s.is_admissible(constraints) {
            true
        } else {
            s.revert(instance, &mv.deltas);
            false
        }
    };
    Scan::new(kind, instance, budget.rand_trials, budget.combo_cap, rng).flat(state, &mut accept)
}

type Accept<'f> = dyn FnMut(&mut State, &Move, usize) -> bool + 'f;

struct Scan<'a, R: ?Sized> {
    kind: OpKind,
    instance: &'a Instance,
    trials: usize,
    combo_cap: usize,
    rng: &'a mut R,
    mv: Move,
}

impl<'a, R: Rng + ?Sized> Scan<'a, R> {
    fn new(
        kind: OpKind,
        instance: &'a Instance,
        trials: usize,
        combo_cap: usize,
        rng: &'a mut R,
    ) -> Self {
        Self {
            kind,
            instance,
            trials,
            combo_cap: combo_cap.max(1),
            rng,
            mv: Move {
                kind,
                deltas: Vec::with_capacity(16),
            },
        }
    }

    fn m(&self) -> usize {
        self.instance.n_rolls()
    }

    /// Offers the current buffered move; `true` ends the scan.
    fn offer(&mut self, state: &mut State, anchor: usize, accept: &mut Accept<'_>) -> bool {
        accept(state, &self.mv, anchor)
    }

    fn nested(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        match self.kind {
            OpKind::MoveItem => self.nested_move(state, focus, accept),
            OpKind::SwapItems => self.nested_swap(state, focus, accept),
            OpKind::SplitItem => self.nested_split(state, focus, accept),
            OpKind::RemoveObject => self.nested_remove_object(state, focus, accept),
            OpKind::ReverseRemoveObject => self.nested_reverse_remove(state, focus, accept),
            OpKind::RemoveItem => self.nested_remove_item(state, focus, accept),
        }
    }

    fn flat(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        match self.kind {
            OpKind::MoveItem => self.flat_move(state, accept),
            OpKind::SwapItems => self.flat_swap(state, accept),
            OpKind::SplitItem => self.flat_split(state, accept),
            OpKind::RemoveObject => self.flat_remove_object(state, accept),
            OpKind::ReverseRemoveObject => self.flat_reverse_remove(state, accept),
            OpKind::RemoveItem => self.flat_remove_item(state, accept),
        }
    }

    // Nested scans.

    fn nested_move(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let sources = sources(state, focus, 1);
        if sources.is_empty() || self.m() < 2 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *sources.choose(self.rng).unwrap();
            for i in item_types(state, o1) {
                for _ in 0..self.trials {
                    let o2 = pick_excluding(self.rng, self.m(), &[o1]).unwrap();
                    self.mv.reset(OpKind::MoveItem);
                    self.mv.transfer(i, o1, o2);
                    if self.offer(state, o1, accept) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn nested_swap(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let sources = sources(state, focus, 1);
        let used = state.used_rolls();
        if sources.is_empty() || used.len() < 2 {
            return false;
        }
        let mut combos: Vec<Option<Vec<Vec<usize>>>> = vec![None; self.m()];
        let cap = self.combo_cap;
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for _ in 0..self.trials {
            let o1 = *sources.choose(self.rng).unwrap();
            let partners: Vec<usize> = used.iter().copied().filter(|&j| j != o1).collect();
            if partners.is_empty() {
                continue;
            }
            let n1 = combos[o1]
                .get_or_insert_with(|| sub_multisets(state, o1, 1, cap))
                .len();
            shuffled_prefix(self.rng, n1, self.trials, &mut first);
            for &a in &first {
                for _ in 0..self.trials {
                    let o2 = *partners.choose(self.rng).unwrap();
                    let n2 = combos[o2]
                        .get_or_insert_with(|| sub_multisets(state, o2, 1, cap))
                        .len();
                    shuffled_prefix(self.rng, n2, self.trials, &mut second);
                    for &b in &second {
                        let c1 = &combos[o1].as_ref().unwrap()[a];
                        let c2 = &combos[o2].as_ref().unwrap()[b];
                        if c1 == c2 {
                            continue;
                        }
                        self.build_swap(o1, c1, o2, c2);
                        if self.offer(state, o1, accept) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn nested_split(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let sources = sources(state, focus, 1);
        if sources.is_empty() || self.m() < 3 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *sources.choose(self.rng).unwrap();
            for _ in 0..self.trials {
                let pair = index::sample(self.rng, self.m(), 2);
                let (o2, o3) = (pair.index(0), pair.index(1));
                if o1 == o2 || o1 == o3 {
                    continue;
                }
                for i in item_types(state, o1) {
                    self.build_split(i, o1, o2, o3);
                    if self.offer(state, o1, accept) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn nested_remove_object(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let sources = sources(state, focus, 2);
        if sources.is_empty() || self.m() < 3 {
            return false;
        }
        let mut dests = Vec::new();
        for _ in 0..self.trials {
            let o1 = *sources.choose(self.rng).unwrap();
            for _ in 0..self.trials {
                let comb = random_combination(self.rng, state, o1, 2, self.combo_cap);
                for _ in 0..self.trials {
                    if !pick_distinct_into(self.rng, self.m(), comb.len(), &[o1], &mut dests) {
                        break;
                    }
                    self.build_scatter(o1, &comb, &dests);
                    if self.offer(state, o1, accept) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn nested_reverse_remove(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let used = state.used_rolls();
        let anchors = sources(state, focus, 1);
        if used.len() < 2 || anchors.is_empty() || self.m() < 3 {
            return false;
        }
        for _ in 0..self.trials {
            let (s1, s2) = if focus.is_some() {
                let s1 = *anchors.choose(self.rng).unwrap();
                let rest: Vec<usize> = used.iter().copied().filter(|&j| j != s1).collect();
                match rest.choose(self.rng) {
                    Some(&s2) => (s1, s2),
                    None => continue,
                }
            } else {
                let pair = index::sample(self.rng, used.len(), 2);
                (used[pair.index(0)], used[pair.index(1)])
            };
            for _ in 0..self.trials {
                let dest = pick_excluding(self.rng, self.m(), &[s1, s2]).unwrap();
                let i1 = *item_types(state, s1).choose(self.rng).unwrap();
                let i2 = *item_types(state, s2).choose(self.rng).unwrap();
                self.mv.reset(OpKind::ReverseRemoveObject);
                self.mv.transfer(i1, s1, dest);
                self.mv.transfer(i2, s2, dest);
                if self.offer(state, s1, accept) {
                    return true;
                }
            }
        }
        false
    }

    fn nested_remove_item(
        &mut self,
        state: &mut State,
        focus: Option<&[usize]>,
        accept: &mut Accept<'_>,
    ) -> bool {
        let sources = sources(state, focus, 1);
        if sources.is_empty() {
            return false;
        }
        for _ in 0..self.trials {
            let o = *sources.choose(self.rng).unwrap();
            for i in item_types(state, o) {
                self.mv.reset(OpKind::RemoveItem);
                self.mv.deltas.push(Delta::remove(i, o));
                if self.offer(state, o, accept) {
                    return true;
                }
            }
        }
        false
    }

    // Flat scans.

    fn flat_move(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let used = state.used_rolls();
        if used.len() < 2 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *used.choose(self.rng).unwrap();
            let o2 = *used.choose(self.rng).unwrap();
            if o1 == o2 {
                continue;
            }
            let i = *item_types(state, o1).choose(self.rng).unwrap();
            self.mv.reset(OpKind::MoveItem);
            self.mv.transfer(i, o1, o2);
            if self.offer(state, o1, accept) {
                return true;
            }
        }
        false
    }

    fn flat_swap(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let used = state.used_rolls();
        if used.len() < 2 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *used.choose(self.rng).unwrap();
            let o2 = *used.choose(self.rng).unwrap();
            if o1 == o2 {
                continue;
            }
            let c1 = random_combination(self.rng, state, o1, 1, self.combo_cap);
            let c2 = random_combination(self.rng, state, o2, 1, self.combo_cap);
            if c1 == c2 {
                continue;
            }
            self.build_swap(o1, &c1, o2, &c2);
            if self.offer(state, o1, accept) {
                return true;
            }
        }
        false
    }

    fn flat_split(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let used = state.used_rolls();
        if used.is_empty() || self.m() < 3 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *used.choose(self.rng).unwrap();
            let dests = pick_distinct_excluding(self.rng, self.m(), 2, &[o1]).unwrap();
            let i = *item_types(state, o1).choose(self.rng).unwrap();
            self.build_split(i, o1, dests[0], dests[1]);
            if self.offer(state, o1, accept) {
                return true;
            }
        }
        false
    }

    fn flat_remove_object(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let sources = sources(state, None, 2);
        if sources.is_empty() || self.m() < 3 {
            return false;
        }
        for _ in 0..self.trials {
            let o1 = *sources.choose(self.rng).unwrap();
            let comb = random_combination(self.rng, state, o1, 2, self.combo_cap);
            let Some(dests) = pick_distinct_excluding(self.rng, self.m(), comb.len(), &[o1]) else {
                continue;
            };
            self.build_scatter(o1, &comb, &dests);
            if self.offer(state, o1, accept) {
                return true;
            }
        }
        false
    }

    fn flat_reverse_remove(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let used = state.used_rolls();
        if used.len() < 2 || self.m() < 3 {
            return false;
        }
        for _ in 0..self.trials {
            let pair = index::sample(self.rng, used.len(), 2);
            let (s1, s2) = (used[pair.index(0)], used[pair.index(1)]);
            let dest = pick_excluding(self.rng, self.m(), &[s1, s2]).unwrap();
            let i1 = *item_types(state, s1).choose(self.rng).unwrap();
            let i2 = *item_types(state, s2).choose(self.rng).unwrap();
            self.mv.reset(OpKind::ReverseRemoveObject);
            self.mv.transfer(i1, s1, dest);
            self.mv.transfer(i2, s2, dest);
            if self.offer(state, s1, accept) {
                return true;
            }
        }
        false
    }

    fn flat_remove_item(&mut self, state: &mut State, accept: &mut Accept<'_>) -> bool {
        let used = state.used_rolls();
        if used.is_empty() {
            return false;
        }
        for _ in 0..self.trials {
            let o = *used.choose(self.rng).unwrap();
            let i = *item_types(state, o).choose(self.rng).unwrap();
            self.mv.reset(OpKind::RemoveItem);
            self.mv.deltas.push(Delta::remove(i, o));
            if self.offer(state, o, accept) {
                return true;
            }
        }
        false
    }

    // Move builders.

    fn build_swap(&mut self, o1: usize, c1: &[usize], o2: usize, c2: &[usize]) {
        self.mv.reset(OpKind::SwapItems);
        for &i in c1 {
            self.mv.transfer(i, o1, o2);
        }
        for &i in c2 {
            self.mv.transfer(i, o2, o1);
        }
    }

    fn build_split(&mut self, item: usize, from: usize, to_a: usize, to_b: usize) {
        self.mv.reset(OpKind::SplitItem);
        self.mv.deltas.push(Delta::remove(item, from));
        self.mv.deltas.push(Delta::add(item, to_a));
        self.mv.deltas.push(Delta::add(item, to_b));
    }

    fn build_scatter(&mut self, from: usize, comb: &[usize], dests: &[usize]) {
        self.mv.reset(OpKind::RemoveObject);
        for (&i, &d) in comb.iter().zip(dests) {
            self.mv.transfer(i, from, d);
        }
    }
}

/// Used rolls with at least `min_load` bands, restricted to `focus` if given.
fn sources(state: &State, focus: Option<&[usize]>, min_load: u32) -> Vec<usize> {
    match focus {
        Some(f) => f
            .iter()
            .copied()
            .filter(|&j| state.load(j) >= min_load)
            .collect(),
        None => state
            .used_rolls()
            .into_iter()
            .filter(|&j| state.load(j) >= min_load)
            .collect(),
    }
}

fn item_types(state: &State, j: usize) -> Vec<usize> {
    state.items_on(j).map(|(i, _)| i).collect()
}

/// Uniform roll in `0..m` outside `exclude`.
fn pick_excluding<R: Rng + ?Sized>(rng: &mut R, m: usize, exclude: &[usize]) -> Option<usize> {
    if exclude.iter().filter(|&&j| j < m).count() >= m {
        return None;
    }
    loop {
        let j = rng.gen_range(0..m);
        if !exclude.contains(&j) {
            return Some(j);
        }
    }
}

/// `k` distinct rolls in `0..m` outside `exclude`, uniformly at random.
fn pick_distinct_excluding<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    k: usize,
    exclude: &[usize],
) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(k);
    pick_distinct_into(rng, m, k, exclude, &mut out).then_some(out)
}

/// Fills `out` with `k` distinct rolls outside `exclude` by rejection.
/// `exclude` must hold distinct entries.
/// Returns false when fewer than `k` rolls are available.
fn pick_distinct_into<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    k: usize,
    exclude: &[usize],
    out: &mut Vec<usize>,
) -> bool {
    out.clear();
    let blocked = exclude.iter().filter(|&&j| j < m).count();
    if m < blocked + k {
        return false;
    }
    while out.len() < k {
        let j = rng.gen_range(0..m);
        if !exclude.contains(&j) && !out.contains(&j) {
            out.push(j);
        }
    }
    true
}

/// A uniformly random ordering of `min(len, t)` distinct indices in `0..len`.
fn shuffled_prefix<R: Rng + ?Sized>(rng: &mut R, len: usize, t: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend(0..len);
    let (prefix, _) = out.partial_shuffle(rng, t.min(len));
    let n = prefix.len();
    out.rotate_left(len - n);
    out.truncate(n);
}

/// All sub-multisets of the bands on roll `j` with size in `min..=max`, each
/// as a sorted item list.
fn sub_multisets(state: &State, j: usize, min: usize, max: usize) -> Vec<Vec<usize>> {
    fn walk(
        types: &[(usize, u32)],
        at: usize,
        current: &mut Vec<usize>,
        min: usize,
        max: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == types.len() {
            if current.len() >= min {
                out.push(current.clone());
            }
            return;
        }
        let (item, count) = types[at];
        let room = max - current.len();
        for take in 0..=(count as usize).min(room) {
            for _ in 0..take {
                current.push(item);
            }
            walk(types, at + 1, current, min, max, out);
            for _ in 0..take {
                current.pop();
            }
        }
    }
    let types: Vec<(usize, u32)> = state.items_on(j).collect();
    let mut out = Vec::new();
    walk(&types, 0, &mut Vec::new(), min, max, &mut out);
    out
}

/// A uniformly sized random sub-multiset of roll `j`'s bands, size in
/// `min..=min(max, load)`.
fn random_combination<R: Rng + ?Sized>(
    rng: &mut R,
    state: &State,
    j: usize,
    min: usize,
    max: usize,
) -> Vec<usize> {
    let mut bands: Vec<usize> = state
        .items_on(j)
        .flat_map(|(i, c)| std::iter::repeat(i).take(c as usize))
        .collect();
    let hi = max.min(bands.len());
    let k = if hi <= min {
        hi
    } else {
        rng.gen_range(min..=hi)
    };
    let (chosen, _) = bands.partial_shuffle(rng, k);
    let mut chosen = chosen.to_vec();
    chosen.sort_unstable();
    chosen
}
