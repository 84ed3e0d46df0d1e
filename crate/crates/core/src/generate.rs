//! Seeded random instances.
//!
//! Widths, lengths and specific weights are drawn uniformly from grids. Item
//! demands are random shares of `tightness` times the total stock weight, so
//! the stock always carries at least `1 / tightness` times the demand. Every
//! roll accepts a trim residual up to `trim_cap` and, if `store_min` is set,
//! any residual of at least `store_min` (a strip wide enough to store).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{instance_doc, InstanceDoc};
use crate::model::{Instance, ItemSpec, ModelError, RollSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub name: String,
    pub n_items: usize,
    pub n_rolls: usize,
    pub item_width: (Decimal, Decimal),
    pub roll_width: (Decimal, Decimal),
    pub roll_length: (Decimal, Decimal),
    pub specific_weight: (Decimal, Decimal),
    /// Grid step for widths.
    pub width_step: Decimal,
    /// Demand as a fraction of total stock weight, in (0, 1].
    pub tightness: Decimal,
    pub trim_cap: Decimal,
    pub store_min: Option<Decimal>,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            name: "generated".into(),
            n_items: 10,
            n_rolls: 20,
            item_width: (Decimal::new(5, 2), Decimal::new(40, 2)),
            roll_width: (Decimal::new(80, 2), Decimal::new(150, 2)),
            roll_length: (Decimal::new(100, 0), Decimal::new(300, 0)),
            specific_weight: (Decimal::new(760, 2), Decimal::new(780, 2)),
            width_step: Decimal::new(1, 2),
            tightness: Decimal::new(6, 1),
            trim_cap: Decimal::new(3, 2),
            store_min: Some(Decimal::new(20, 2)),
        }
    }
}

impl GeneratorSpec {
    /// A family member with about 30 item types and 60 rolls.
    pub fn medium(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            n_items: 30,
            n_rolls: 60,
            ..Self::default()
        }
    }

    /// At most 3 item types and 4 rolls, with at most 3 bands of one type
    /// fitting on any roll.
    pub fn tiny(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            n_items: 3,
            n_rolls: 4,
            item_width: (Decimal::new(30, 2), Decimal::new(50, 2)),
            roll_width: (Decimal::new(90, 2), Decimal::new(110, 2)),
            roll_length: (Decimal::new(50, 0), Decimal::new(150, 0)),
            specific_weight: (Decimal::ONE, Decimal::new(2, 0)),
            width_step: Decimal::new(1, 2),
            tightness: Decimal::new(35, 2),
            trim_cap: Decimal::new(5, 2),
            store_min: Some(Decimal::new(25, 2)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("n_items and n_rolls must be positive")]
    EmptyCounts,
    #[error("tightness must lie in (0, 1], got {0}")]
    Tightness(Decimal),
    #[error("range {what} is empty or not positive: [{lo}, {hi}]")]
    Range {
        what: &'static str,
        lo: Decimal,
        hi: Decimal,
    },
    #[error("width step must be positive")]
    Step,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn draw_grid<R: Rng>(rng: &mut R, (lo, hi): (Decimal, Decimal), step: Decimal) -> Decimal {
    let steps = ((hi - lo) / step).floor().to_u64().unwrap_or(0);
    lo + step * Decimal::from(rng.gen_range(0..=steps))
}

fn check_range(what: &'static str, (lo, hi): (Decimal, Decimal)) -> Result<(), GenError> {
    if lo <= Decimal::ZERO || hi < lo {
        return Err(GenError::Range { what, lo, hi });
    }
    Ok(())
}

pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<Instance, GenError> {
    if spec.n_items == 0 || spec.n_rolls == 0 {
        return Err(GenError::EmptyCounts);
    }
    if spec.tightness <= Decimal::ZERO || spec.tightness > Decimal::ONE {
        return Err(GenError::Tightness(spec.tightness));
    }
    if spec.width_step <= Decimal::ZERO {
        return Err(GenError::Step);
    }
    check_range("item_width", spec.item_width)?;
    check_range("roll_width", spec.roll_width)?;
    check_range("roll_length", spec.roll_length)?;
    check_range("specific_weight", spec.specific_weight)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cent = Decimal::new(1, 2);

    let mut rolls = Vec::with_capacity(spec.n_rolls);
    let mut stock = Decimal::ZERO;
    for _ in 0..spec.n_rolls {
        let width = draw_grid(&mut rng, spec.roll_width, spec.width_step);
        let length = draw_grid(&mut rng, spec.roll_length, Decimal::ONE);
        let specific_weight = draw_grid(&mut rng, spec.specific_weight, cent);
        stock += width * length * specific_weight;
        let mut rest_widths = vec![(Decimal::ZERO, Some(spec.trim_cap))];
        if let Some(store) = spec.store_min {
            rest_widths.push((store, None));
        }
        rolls.push(RollSpec {
            width,
            length,
            specific_weight,
            rest_widths,
        });
    }

    let widths: Vec<Decimal> = (0..spec.n_items)
        .map(|_| draw_grid(&mut rng, spec.item_width, spec.width_step))
        .collect();
    let shares: Vec<Decimal> = (0..spec.n_items)
        .map(|_| Decimal::from(rng.gen_range(50u32..=150)))
        .collect();
    let share_sum: Decimal = shares.iter().sum();
    let demand = stock * spec.tightness;
    let items: Vec<ItemSpec> = widths
        .into_iter()
        .zip(&shares)
        .map(|(width, share)| ItemSpec {
            width,
            desired_weight: (demand * share / share_sum)
                .round_dp_with_strategy(2, rust_decimal::RoundingStrategy::ToZero)
                .max(cent),
        })
        .collect();

    Ok(Instance::new(&spec.name, &items, &rolls)?)
}

pub fn generate_document(spec: &GeneratorSpec, seed: u64) -> Result<InstanceDoc, GenError> {
    Ok(instance_doc(&generate_instance(spec, seed)?))
}
