//! Problem data, assignments, the cost function and the two constraint
//! predicates (job admissibility and rest width).
//!
//! All quantities are exact. Decimal inputs are rescaled at construction to
//! two fixed denominators per instance: one for widths and one for masses.
//! A roll's `alpha` (mass per unit of width) is stored so that
//! `band_width * alpha` lands directly on the mass scale.

use std::cmp::Ordering;
use std::fmt;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A width on the instance's width scale (`value / 10^width_decimals`).
pub type Width = i128;
/// A mass on the instance's mass scale (`value / 10^mass_decimals`).
pub type Mass = i128;

/// Totals above this bound are rejected so that every intermediate sum stays
/// far away from `i128` overflow.
const MAGNITUDE_LIMIT: i128 = 1 << 100;
const MAX_DECIMALS: u32 = 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance has no item types")]
    NoItems,
    #[error("instance has no rolls")]
    NoRolls,
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: String, value: Decimal },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: String, value: Decimal },
    #[error("interval [{lo}, {hi}] has hi < lo")]
    InvertedInterval { lo: Decimal, hi: Decimal },
    #[error(
        "numbers need more than {MAX_DECIMALS} decimal places or exceed the supported magnitude"
    )]
    Overflow,
    #[error("{kind} index {index} out of range (len {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },
    #[error("assignment is {got_items}x{got_rolls}, instance is {items}x{rolls}")]
    DimensionMismatch {
        items: usize,
        rolls: usize,
        got_items: usize,
        got_rolls: usize,
    },
}

/// Decimal places of the two internal fixed-point scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub width_decimals: u32,
    pub mass_decimals: u32,
}

impl Units {
    pub fn width_to_decimal(&self, value: Width) -> Decimal {
        to_decimal(value, self.width_decimals)
    }

    pub fn mass_to_decimal(&self, value: Mass) -> Decimal {
        to_decimal(value, self.mass_decimals)
    }

    /// Smallest mass integer `z` such that `d < z` iff `d < value` for every
    /// integer `d` on the mass scale.
    pub fn mass_allowance(&self, value: Decimal) -> Result<Mass, ModelError> {
        value
            .checked_mul(Decimal::from_i128_with_scale(
                10i128.pow(self.mass_decimals),
                0,
            ))
            .and_then(|scaled| scaled.ceil().to_i128())
            .ok_or(ModelError::Overflow)
    }
}

fn to_decimal(value: i128, decimals: u32) -> Decimal {
    Decimal::try_from_i128_with_scale(value, decimals)
        .map(|d| d.normalize())
        .unwrap_or_else(|_| {
            // Fall back to a lossy but readable value for extreme magnitudes.
            Decimal::from_f64_retain(value as f64 / 10f64.powi(decimals as i32)).unwrap_or_default()
        })
}

/// Rescales `value` to exactly `decimals` places. Fails if that would lose
/// digits or overflow.
pub(crate) fn scale_decimal(value: Decimal, decimals: u32) -> Result<i128, ModelError> {
    let value = value.normalize();
    let scale = value.scale();
    if scale > decimals {
        return Err(ModelError::Overflow);
    }
    let factor = 10i128
        .checked_pow(decimals - scale)
        .ok_or(ModelError::Overflow)?;
    value
        .mantissa()
        .checked_mul(factor)
        .filter(|v| v.abs() < MAGNITUDE_LIMIT)
        .ok_or(ModelError::Overflow)
}

fn decimals_of(value: Decimal) -> u32 {
    value.normalize().scale()
}

/// One closed interval of allowed residual widths; `hi == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: Width,
    pub hi: Option<Width>,
}

impl Interval {
    fn contains(&self, value: Width) -> bool {
        value >= self.lo && self.hi.map_or(true, |hi| value <= hi)
    }
}

/// Finite union of closed intervals in `[0, ∞)`, kept sorted and disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RestWidthSet {
    intervals: Vec<Interval>,
}

impl RestWidthSet {
    /// Sorts and merges overlapping or touching intervals.
    pub fn new(intervals: Vec<Interval>) -> Self {
        let pairs = intervals.into_iter().map(|iv| (iv.lo, iv.hi)).collect();
        Self {
            intervals: merge_intervals(pairs)
                .into_iter()
                .map(|(lo, hi)| Interval { lo, hi })
                .collect(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, value: Width) -> bool {
        if value < 0 {
            return false;
        }
        // Index of the first interval starting strictly after `value`.
        let idx = self.intervals.partition_point(|iv| iv.lo <= value);
        idx > 0 && self.intervals[idx - 1].contains(value)
    }
}

/// `(lo, hi)` pairs, `hi = None` meaning unbounded, sorted and merged.
fn merge_intervals<T: Ord + Copy>(mut pairs: Vec<(T, Option<T>)>) -> Vec<(T, Option<T>)> {
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| cmp_hi(a.1, b.1)));
    let mut merged: Vec<(T, Option<T>)> = Vec::with_capacity(pairs.len());
    for next in pairs {
        match merged.last_mut() {
            Some(last) if last.1.map_or(true, |hi| next.0 <= hi) => {
                last.1 = match (last.1, next.1) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
            _ => merged.push(next),
        }
    }
    merged
}

fn cmp_hi<T: Ord>(a: Option<T>, b: Option<T>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.cmp(&b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Decimal description of an item type, as read from an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemSpec {
    pub width: Decimal,
    pub desired_weight: Decimal,
}

/// Decimal description of a stock roll. `None` as an upper bound means ∞.
#[derive(Debug, Clone, PartialEq)]
pub struct RollSpec {
    pub width: Decimal,
    pub length: Decimal,
    pub specific_weight: Decimal,
    pub rest_widths: Vec<(Decimal, Option<Decimal>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemType {
    pub id: usize,
    pub width: Width,
    pub desired_weight: Mass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roll {
    pub id: usize,
    pub width: Width,
    pub length: Decimal,
    pub specific_weight: Decimal,
    /// Mass per width unit, `length * specific_weight` on the mixed scale.
    pub alpha: i128,
    /// `width * alpha`, the roll's total mass.
    pub weight: Mass,
    pub rest_widths: RestWidthSet,
}

/// One optimization problem: item demands plus the available stock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    items: Vec<ItemType>,
    rolls: Vec<Roll>,
    units: Units,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        items: &[ItemSpec],
        rolls: &[RollSpec],
    ) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::NoItems);
        }
        if rolls.is_empty() {
            return Err(ModelError::NoRolls);
        }
        for (i, it) in items.iter().enumerate() {
            positive(it.width, || format!("width of item {i}"))?;
            positive(it.desired_weight, || format!("desired weight of item {i}"))?;
        }
        for (j, r) in rolls.iter().enumerate() {
            positive(r.width, || format!("width of roll {j}"))?;
            positive(r.length, || format!("length of roll {j}"))?;
            positive(r.specific_weight, || format!("specific weight of roll {j}"))?;
            for &(lo, hi) in &r.rest_widths {
                if lo.is_sign_negative() && !lo.is_zero() {
                    return Err(ModelError::Negative {
                        what: format!("rest-width bound of roll {j}"),
                        value: lo,
                    });
                }
                if let Some(hi) = hi {
                    if hi < lo {
                        return Err(ModelError::InvertedInterval { lo, hi });
                    }
                }
            }
        }

        // Bounds absorbed by a merge must not widen the scale.
        let rest_widths: Vec<Vec<(Decimal, Option<Decimal>)>> = rolls
            .iter()
            .map(|r| {
                merge_intervals(
                    r.rest_widths
                        .iter()
                        .map(|&(lo, hi)| (lo.normalize(), hi.map(|h| h.normalize())))
                        .collect(),
                )
            })
            .collect();
        let width_decimals = items
            .iter()
            .map(|it| decimals_of(it.width))
            .chain(rolls.iter().map(|r| decimals_of(r.width)))
            .chain(rest_widths.iter().flat_map(|set| {
                set.iter()
                    .flat_map(|&(lo, hi)| std::iter::once(lo).chain(hi))
                    .map(decimals_of)
            }))
            .max()
            .unwrap_or(0);
        let length_decimals = rolls
            .iter()
            .map(|r| decimals_of(r.length))
            .max()
            .unwrap_or(0);
        let density_decimals = rolls
            .iter()
            .map(|r| decimals_of(r.specific_weight))
            .max()
            .unwrap_or(0);
        let product_decimals = width_decimals + length_decimals + density_decimals;
        let mass_decimals = items
            .iter()
            .map(|it| decimals_of(it.desired_weight))
            .max()
            .unwrap_or(0)
            .max(product_decimals);
        if mass_decimals > MAX_DECIMALS {
            return Err(ModelError::Overflow);
        }
        let alpha_factor = 10i128.pow(mass_decimals - product_decimals);

        let items = items
            .iter()
            .enumerate()
            .map(|(id, it)| {
                Ok(ItemType {
                    id,
                    width: scale_decimal(it.width, width_decimals)?,
                    desired_weight: scale_decimal(it.desired_weight, mass_decimals)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;

        let mut total: i128 = 0;
        let rolls = rolls
            .iter()
            .enumerate()
            .map(|(id, r)| {
                let width = scale_decimal(r.width, width_decimals)?;
                let alpha = scale_decimal(r.length, length_decimals)?
                    .checked_mul(scale_decimal(r.specific_weight, density_decimals)?)
                    .and_then(|a| a.checked_mul(alpha_factor))
                    .filter(|a| *a < MAGNITUDE_LIMIT)
                    .ok_or(ModelError::Overflow)?;
                let weight = width
                    .checked_mul(alpha)
                    .filter(|w| *w < MAGNITUDE_LIMIT)
                    .ok_or(ModelError::Overflow)?;
                total = total
                    .checked_add(weight)
                    .filter(|t| *t < MAGNITUDE_LIMIT)
                    .ok_or(ModelError::Overflow)?;
                let intervals = rest_widths[id]
                    .iter()
                    .map(|&(lo, hi)| {
                        Ok(Interval {
                            lo: scale_decimal(lo, width_decimals)?,
                            hi: hi.map(|h| scale_decimal(h, width_decimals)).transpose()?,
                        })
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                Ok(Roll {
                    id,
                    width,
                    length: r.length.normalize(),
                    specific_weight: r.specific_weight.normalize(),
                    alpha,
                    weight,
                    rest_widths: RestWidthSet::new(intervals),
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;

        let widest = items.iter().map(|it| it.width).max().unwrap_or(0);
        let heaviest = rolls.iter().map(|r| r.alpha).max().unwrap_or(0);
        if widest
            .checked_mul(heaviest)
            .map_or(true, |w| w >= MAGNITUDE_LIMIT)
        {
            return Err(ModelError::Overflow);
        }
        let demand: i128 = items.iter().map(|it| it.desired_weight).sum();
        if demand >= MAGNITUDE_LIMIT {
            return Err(ModelError::Overflow);
        }

        Ok(Self {
            name: name.into(),
            items,
            rolls,
            units: Units {
                width_decimals,
                mass_decimals,
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[ItemType] {
        &self.items
    }

    pub fn rolls(&self) -> &[Roll] {
        &self.rolls
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_rolls(&self) -> usize {
        self.rolls.len()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    /// Total demanded item weight, `W = Σ w_i`.
    pub fn total_demand(&self) -> Mass {
        self.items.iter().map(|it| it.desired_weight).sum()
    }

    /// Total weight of all stock rolls.
    pub fn total_stock(&self) -> Mass {
        self.rolls.iter().map(|r| r.weight).sum()
    }

    /// Mass of a single band of item `i` slit from roll `j`.
    #[inline]
    pub fn band_weight(&self, i: usize, j: usize) -> Mass {
        self.items[i].width * self.rolls[j].alpha
    }

    /// Largest count of item `i` that physically fits on roll `j`.
    pub fn max_bands(&self, i: usize, j: usize) -> u32 {
        (self.rolls[j].width / self.items[i].width) as u32
    }

    pub fn item_spec(&self, i: usize) -> ItemSpec {
        let it = &self.items[i];
        ItemSpec {
            width: self.units.width_to_decimal(it.width),
            desired_weight: self.units.mass_to_decimal(it.desired_weight),
        }
    }

    pub fn roll_spec(&self, j: usize) -> RollSpec {
        let r = &self.rolls[j];
        RollSpec {
            width: self.units.width_to_decimal(r.width),
            length: r.length,
            specific_weight: r.specific_weight,
            rest_widths: r
                .rest_widths
                .intervals()
                .iter()
                .map(|iv| {
                    (
                        self.units.width_to_decimal(iv.lo),
                        iv.hi.map(|h| self.units.width_to_decimal(h)),
                    )
                })
                .collect(),
        }
    }

    pub(crate) fn check_dims(&self, x: &Assignment) -> Result<(), ModelError> {
        if x.n_items() != self.n_items() || x.n_rolls() != self.n_rolls() {
            return Err(ModelError::DimensionMismatch {
                items: self.n_items(),
                rolls: self.n_rolls(),
                got_items: x.n_items(),
                got_rolls: x.n_rolls(),
            });
        }
        Ok(())
    }
}

fn positive(value: Decimal, what: impl FnOnce() -> String) -> Result<(), ModelError> {
    if value.is_sign_negative() || value.is_zero() {
        return Err(ModelError::NonPositive {
            what: what(),
            value,
        });
    }
    Ok(())
}

/// The band-count matrix `x_ij`, stored roll-major so that the items of one
/// roll are contiguous.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    n_items: usize,
    n_rolls: usize,
    counts: Vec<u32>,
}

impl Assignment {
    pub fn zeros(n_items: usize, n_rolls: usize) -> Self {
        Self {
            n_items,
            n_rolls,
            counts: vec![0; n_items * n_rolls],
        }
    }

    pub fn for_instance(instance: &Instance) -> Self {
        Self::zeros(instance.n_items(), instance.n_rolls())
    }

    /// Builds an assignment from sparse `(item, roll, count)` triples.
    /// Repeated cells accumulate.
    pub fn from_triples(
        n_items: usize,
        n_rolls: usize,
        triples: &[(usize, usize, u32)],
    ) -> Result<Self, ModelError> {
        let mut x = Self::zeros(n_items, n_rolls);
        for &(i, j, c) in triples {
            if i >= n_items {
                return Err(ModelError::IndexOutOfRange {
                    kind: "item",
                    index: i,
                    len: n_items,
                });
            }
            if j >= n_rolls {
                return Err(ModelError::IndexOutOfRange {
                    kind: "roll",
                    index: j,
                    len: n_rolls,
                });
            }
            x.counts[j * n_items + i] += c;
        }
        Ok(x)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_rolls(&self) -> usize {
        self.n_rolls
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[j * self.n_items + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, count: u32) {
        self.counts[j * self.n_items + i] = count;
    }

    /// Counts of every item type on roll `j`.
    #[inline]
    pub fn column(&self, j: usize) -> &[u32] {
        &self.counts[j * self.n_items..(j + 1) * self.n_items]
    }

    /// Non-zero cells as `(item, roll, count)`, sorted by item then roll.
    pub fn triples(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for i in 0..self.n_items {
            for j in 0..self.n_rolls {
                let c = self.get(i, j);
                if c > 0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    pub fn total_bands(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Assignment")
            .field("n_items", &self.n_items)
            .field("n_rolls", &self.n_rolls)
            .field("triples", &self.triples())
            .finish()
    }
}

/// Which of the two constraints an admissibility check enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub job: bool,
    pub rest_width: bool,
}

impl ConstraintSet {
    pub const ALL: Self = Self {
        job: true,
        rest_width: true,
    };
    pub const JOB: Self = Self {
        job: true,
        rest_width: false,
    };
    pub const REST_WIDTH: Self = Self {
        job: false,
        rest_width: true,
    };

    pub fn is_empty(&self) -> bool {
        !self.job && !self.rest_width
    }
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self::ALL
    }
}

fn check_item(instance: &Instance, i: usize) -> Result<(), ModelError> {
    if i >= instance.n_items() {
        return Err(ModelError::IndexOutOfRange {
            kind: "item",
            index: i,
            len: instance.n_items(),
        });
    }
    Ok(())
}

fn check_roll(instance: &Instance, j: usize) -> Result<(), ModelError> {
    if j >= instance.n_rolls() {
        return Err(ModelError::IndexOutOfRange {
            kind: "roll",
            index: j,
            len: instance.n_rolls(),
        });
    }
    Ok(())
}

/// Demanded weight of item `i` not yet produced: `w_i - b_i Σ_j x_ij α_j`.
/// Non-positive means the item is covered.
pub fn rest_weight(instance: &Instance, x: &Assignment, i: usize) -> Result<Mass, ModelError> {
    check_item(instance, i)?;
    instance.check_dims(x)?;
    let produced: Mass = (0..instance.n_rolls())
        .map(|j| x.get(i, j) as i128 * instance.band_weight(i, j))
        .sum();
    Ok(instance.items[i].desired_weight - produced)
}

/// Unused width of roll `j`: `b_j - Σ_i x_ij b_i`. Negative when over-full.
pub fn residual_width(instance: &Instance, x: &Assignment, j: usize) -> Result<Width, ModelError> {
    check_roll(instance, j)?;
    instance.check_dims(x)?;
    let used: Width = x
        .column(j)
        .iter()
        .zip(&instance.items)
        .map(|(&c, it)| c as i128 * it.width)
        .sum();
    Ok(instance.rolls[j].width - used)
}

fn roll_is_used(x: &Assignment, j: usize) -> bool {
    x.column(j).iter().any(|&c| c > 0)
}

/// Rolls with at least one band.
pub fn used_rolls(instance: &Instance, x: &Assignment) -> Result<Vec<usize>, ModelError> {
    instance.check_dims(x)?;
    Ok((0..instance.n_rolls())
        .filter(|&j| roll_is_used(x, j))
        .collect())
}

/// Used rolls whose residual width is outside the allowed set. Untouched
/// rolls are exempt: their stock is returned as is.
pub fn bad_rolls(instance: &Instance, x: &Assignment) -> Result<Vec<usize>, ModelError> {
    instance.check_dims(x)?;
    let mut bad = Vec::new();
    for j in 0..instance.n_rolls() {
        if roll_is_used(x, j)
            && !instance.rolls[j]
                .rest_widths
                .contains(residual_width(instance, x, j)?)
        {
            bad.push(j);
        }
    }
    Ok(bad)
}

/// Total weight of the rolls used by `x`.
pub fn cost(instance: &Instance, x: &Assignment) -> Result<Mass, ModelError> {
    instance.check_dims(x)?;
    Ok((0..instance.n_rolls())
        .filter(|&j| roll_is_used(x, j))
        .map(|j| instance.rolls[j].weight)
        .sum())
}

pub fn is_admissible(
    instance: &Instance,
    x: &Assignment,
    constraints: ConstraintSet,
) -> Result<bool, ModelError> {
    instance.check_dims(x)?;
    if constraints.job {
        for i in 0..instance.n_items() {
            if rest_weight(instance, x, i)? > 0 {
                return Ok(false);
            }
        }
    }
    if constraints.rest_width && !bad_rolls(instance, x)?.is_empty() {
        return Ok(false);
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::str::FromStr;

    pub(crate) fn dec(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    pub(crate) fn item(width: &str, weight: &str) -> ItemSpec {
        ItemSpec {
            width: dec(width),
            desired_weight: dec(weight),
        }
    }

    /// Roll with `length = 1` so that alpha equals the specific weight.
    pub(crate) fn roll(width: &str, alpha: &str, rest: &[(&str, Option<&str>)]) -> RollSpec {
        RollSpec {
            width: dec(width),
            length: dec("1"),
            specific_weight: dec(alpha),
            rest_widths: rest
                .iter()
                .map(|&(lo, hi)| (dec(lo), hi.map(dec)))
                .collect(),
        }
    }

    fn open() -> Vec<(&'static str, Option<&'static str>)> {
        vec![("0", None)]
    }

    fn mass(inst: &Instance, s: &str) -> Mass {
        scale_decimal(dec(s), inst.units().mass_decimals).unwrap()
    }

    fn width(inst: &Instance, s: &str) -> Width {
        scale_decimal(dec(s), inst.units().width_decimals).unwrap()
    }

    #[test]
    fn rest_weight_of_empty_assignment_is_full_demand() {
        let inst =
            Instance::new("t", &[item("0.1", "50")], &[roll("1.2", "100", &open())]).unwrap();
        let x = Assignment::for_instance(&inst);
        assert_eq!(rest_weight(&inst, &x, 0).unwrap(), mass(&inst, "50"));
    }

    #[test]
    fn rest_weight_after_two_bands() {
        let inst =
            Instance::new("t", &[item("0.1", "50")], &[roll("1.2", "100", &open())]).unwrap();
        let x = Assignment::from_triples(1, 1, &[(0, 0, 2)]).unwrap();
        assert_eq!(rest_weight(&inst, &x, 0).unwrap(), mass(&inst, "30"));
    }

    #[test]
    fn rest_weight_can_go_negative() {
        let inst =
            Instance::new("t", &[item("0.5", "25")], &[roll("1.2", "100", &open())]).unwrap();
        let x = Assignment::from_triples(1, 1, &[(0, 0, 1)]).unwrap();
        assert_eq!(rest_weight(&inst, &x, 0).unwrap(), mass(&inst, "-25"));
        assert!(is_admissible(&inst, &x, ConstraintSet::JOB).unwrap());
    }

    #[test]
    fn rest_weight_rejects_bad_index() {
        let inst =
            Instance::new("t", &[item("0.1", "50")], &[roll("1.2", "100", &open())]).unwrap();
        let x = Assignment::for_instance(&inst);
        assert!(matches!(
            rest_weight(&inst, &x, 1),
            Err(ModelError::IndexOutOfRange { kind: "item", .. })
        ));
        assert!(matches!(
            residual_width(&inst, &x, 3),
            Err(ModelError::IndexOutOfRange { kind: "roll", .. })
        ));
    }

    #[test]
    fn residual_width_examples() {
        let inst = Instance::new(
            "t",
            &[item("0.5", "1"), item("0.3", "1")],
            &[roll("1.2", "100", &open())],
        )
        .unwrap();
        let empty = Assignment::for_instance(&inst);
        assert_eq!(
            residual_width(&inst, &empty, 0).unwrap(),
            width(&inst, "1.2")
        );
        let x = Assignment::from_triples(2, 1, &[(0, 0, 1), (1, 0, 2)]).unwrap();
        assert_eq!(residual_width(&inst, &x, 0).unwrap(), width(&inst, "0.1"));

        let inst = Instance::new("t", &[item("0.6", "1")], &[roll("1.0", "100", &open())]).unwrap();
        let x = Assignment::from_triples(1, 1, &[(0, 0, 2)]).unwrap();
        assert_eq!(residual_width(&inst, &x, 0).unwrap(), width(&inst, "-0.2"));
        assert_eq!(bad_rolls(&inst, &x).unwrap(), vec![0]);
    }

    #[test]
    fn merged_away_bounds_do_not_set_the_scale() {
        let inst = Instance::new(
            "t",
            &[item("1", "1")],
            &[roll("1", "1", &[("0.20", None), ("0.10", Some("0.21"))])],
        )
        .unwrap();
        assert_eq!(inst.units().width_decimals, 1);
        assert_eq!(inst.roll_spec(0).rest_widths, vec![(dec("0.1"), None)]);
    }

    #[test]
    fn admissibility_per_flag() {
        // 1x1 with R = [0, 0.2] ∪ [1.0, ∞)
        let inst = Instance::new(
            "t",
            &[item("0.5", "25")],
            &[roll("1.2", "100", &[("0", Some("0.2")), ("1.0", None)])],
        )
        .unwrap();
        let empty = Assignment::for_instance(&inst);
        assert!(is_admissible(&inst, &empty, ConstraintSet::REST_WIDTH).unwrap());
        assert!(!is_admissible(&inst, &empty, ConstraintSet::JOB).unwrap());

        // one band: y = -25, r = 0.7 (not allowed)
        let one = Assignment::from_triples(1, 1, &[(0, 0, 1)]).unwrap();
        assert!(is_admissible(&inst, &one, ConstraintSet::JOB).unwrap());
        assert!(!is_admissible(&inst, &one, ConstraintSet::REST_WIDTH).unwrap());
        assert!(!is_admissible(&inst, &one, ConstraintSet::ALL).unwrap());

        // two bands: r = 0.2 (allowed, closed bound)
        let two = Assignment::from_triples(1, 1, &[(0, 0, 2)]).unwrap();
        assert!(is_admissible(&inst, &two, ConstraintSet::ALL).unwrap());
    }

    #[test]
    fn cost_counts_used_rolls_once() {
        let inst = Instance::new(
            "t",
            &[item("0.1", "1"), item("0.2", "1")],
            &[
                roll("1", "100", &open()),
                roll("1", "80", &open()),
                roll("1", "60", &open()),
            ],
        )
        .unwrap();
        let empty = Assignment::for_instance(&inst);
        assert_eq!(cost(&inst, &empty).unwrap(), 0);
        let x = Assignment::from_triples(2, 3, &[(0, 0, 1), (1, 0, 3), (1, 2, 1)]).unwrap();
        assert_eq!(cost(&inst, &x).unwrap(), mass(&inst, "160"));
        assert_eq!(used_rolls(&inst, &x).unwrap(), vec![0, 2]);
    }

    #[test]
    fn used_rolls_examples() {
        let inst = Instance::new(
            "t",
            &[item("0.1", "1")],
            (0..4)
                .map(|_| roll("1", "1", &open()))
                .collect::<Vec<_>>()
                .as_slice(),
        )
        .unwrap();
        let x = Assignment::for_instance(&inst);
        assert!(used_rolls(&inst, &x).unwrap().is_empty());
        let x = Assignment::from_triples(1, 4, &[(0, 3, 1)]).unwrap();
        assert_eq!(used_rolls(&inst, &x).unwrap(), vec![3]);
    }

    #[test]
    fn bad_rolls_detects_disallowed_residual() {
        let inst = Instance::new(
            "t",
            &[item("0.5", "1")],
            &[roll("1.0", "1", &[("0", Some("0.2"))])],
        )
        .unwrap();
        let x = Assignment::from_triples(1, 1, &[(0, 0, 1)]).unwrap();
        assert_eq!(bad_rolls(&inst, &x).unwrap(), vec![0]);
        let x = Assignment::from_triples(1, 1, &[(0, 0, 2)]).unwrap();
        assert!(bad_rolls(&inst, &x).unwrap().is_empty());
    }

    #[test]
    fn intervals_are_merged() {
        let set = RestWidthSet::new(vec![
            Interval {
                lo: 5,
                hi: Some(20),
            },
            Interval {
                lo: 0,
                hi: Some(10),
            },
            Interval {
                lo: 30,
                hi: Some(40),
            },
            Interval { lo: 40, hi: None },
        ]);
        assert_eq!(
            set.intervals(),
            &[
                Interval {
                    lo: 0,
                    hi: Some(20)
                },
                Interval { lo: 30, hi: None }
            ]
        );
        assert!(set.contains(0));
        assert!(set.contains(20));
        assert!(!set.contains(21));
        assert!(set.contains(1_000_000));
        assert!(!set.contains(-1));
    }

    #[test]
    fn constructor_rejects_bad_values() {
        assert_eq!(
            Instance::new("t", &[], &[roll("1", "1", &open())]),
            Err(ModelError::NoItems)
        );
        assert!(matches!(
            Instance::new("t", &[item("-1", "1")], &[roll("1", "1", &open())]),
            Err(ModelError::NonPositive { .. })
        ));
        assert!(matches!(
            Instance::new(
                "t",
                &[item("1", "1")],
                &[roll("1", "1", &[("0.3", Some("0.1"))])]
            ),
            Err(ModelError::InvertedInterval { .. })
        ));
    }

    #[test]
    fn alpha_and_weight_are_exact() {
        let spec = RollSpec {
            width: dec("1.25"),
            length: dec("120.5"),
            specific_weight: dec("7.65"),
            rest_widths: vec![(dec("0"), None)],
        };
        let inst = Instance::new("t", &[item("0.1", "0.001")], &[spec]).unwrap();
        let u = inst.units();
        let r = &inst.rolls()[0];
        // 1.25 * 120.5 * 7.65 = 1152.28125
        assert_eq!(u.mass_to_decimal(r.weight), dec("1152.28125"));
        assert_eq!(r.weight, r.width * r.alpha);
        assert_eq!(u.mass_to_decimal(inst.band_weight(0, 0)), dec("92.1825"));
    }

    #[test]
    fn mass_allowance_rounds_up() {
        let inst = Instance::new("t", &[item("0.1", "1.5")], &[roll("1", "1", &open())]).unwrap();
        let u = inst.units();
        assert_eq!(u.mass_decimals, 1);
        assert_eq!(u.mass_allowance(dec("0")).unwrap(), 0);
        assert_eq!(u.mass_allowance(dec("0.01")).unwrap(), 1);
        assert_eq!(u.mass_allowance(dec("0.3")).unwrap(), 3);
    }
}
