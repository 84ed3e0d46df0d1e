//! JSON documents: instances, assignments and solve reports.
//!
//! Numbers may be given as strings (exact) or JSON numbers. Serialization
//! always writes normalized decimal strings.

use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineConfig, SolveReport, Termination, Timing};
use crate::model::{Assignment, Instance, ItemSpec, ModelError, RollSpec, Units};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("interval error: {0}")]
    Interval(String),
}

impl From<ModelError> for ParseError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvertedInterval { .. } => ParseError::Interval(e.to_string()),
            ModelError::NoItems | ModelError::NoRolls => ParseError::Schema(e.to_string()),
            other => ParseError::Value(other.to_string()),
        }
    }
}

/// A number as it appears in a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    pub fn decimal(d: Decimal) -> Self {
        Num::Text(d.normalize().to_string())
    }

    fn text(&self) -> String {
        match self {
            Num::Text(s) => s.trim().to_string(),
            Num::Number(n) => n.to_string(),
        }
    }

    fn is_infinite(&self) -> bool {
        matches!(self, Num::Text(s) if matches!(s.trim().to_ascii_lowercase().as_str(), "inf" | "+inf" | "infinity"))
    }

    pub fn parse(&self, field: &str) -> Result<Decimal, ParseError> {
        parse_decimal(&self.text())
            .ok_or_else(|| ParseError::Value(format!("{field}: cannot parse {:?}", self.text())))
    }
}

fn parse_decimal(s: &str) -> Option<Decimal> {
    if s.contains(['e', 'E']) {
        Decimal::from_scientific(s).ok()
    } else {
        Decimal::from_str(s).ok()
    }
    .map(|d| d.normalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDoc {
    pub width: Num,
    pub desired_weight: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollDoc {
    pub width: Num,
    pub length: Num,
    pub specific_weight: Num,
    /// `[lo, hi]` pairs; `hi` may be `null` or `"inf"` for an open upper end.
    pub rest_width_intervals: Vec<(Num, Option<Num>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub name: String,
    pub items: Vec<ItemDoc>,
    pub rolls: Vec<RollDoc>,
}

pub fn parse_instance(doc: &InstanceDoc) -> Result<Instance, ParseError> {
    let items = doc
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            Ok(ItemSpec {
                width: it.width.parse(&format!("items[{i}].width"))?,
                desired_weight: it
                    .desired_weight
                    .parse(&format!("items[{i}].desired_weight"))?,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let rolls = doc
        .rolls
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let rest_widths = r
                .rest_width_intervals
                .iter()
                .enumerate()
                .map(|(k, (lo, hi))| {
                    let field = format!("rolls[{j}].rest_width_intervals[{k}]");
                    let lo = lo.parse(&field)?;
                    let hi = match hi {
                        None => None,
                        Some(h) if h.is_infinite() => None,
                        Some(h) => Some(h.parse(&field)?),
                    };
                    Ok((lo, hi))
                })
                .collect::<Result<Vec<_>, ParseError>>()?;
            Ok(RollSpec {
                width: r.width.parse(&format!("rolls[{j}].width"))?,
                length: r.length.parse(&format!("rolls[{j}].length"))?,
                specific_weight: r
                    .specific_weight
                    .parse(&format!("rolls[{j}].specific_weight"))?,
                rest_widths,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Instance::new(&doc.name, &items, &rolls)?)
}

pub fn parse_instance_str(text: &str) -> Result<Instance, ParseError> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| ParseError::Schema(e.to_string()))?;
    parse_instance(&doc)
}

/// The canonical document of an instance: normalized numbers, merged intervals.
pub fn instance_doc(instance: &Instance) -> InstanceDoc {
    InstanceDoc {
        name: instance.name().to_string(),
        items: (0..instance.n_items())
            .map(|i| {
                let s = instance.item_spec(i);
                ItemDoc {
                    width: Num::decimal(s.width),
                    desired_weight: Num::decimal(s.desired_weight),
                }
            })
            .collect(),
        rolls: (0..instance.n_rolls())
            .map(|j| {
                let s = instance.roll_spec(j);
                RollDoc {
                    width: Num::decimal(s.width),
                    length: Num::decimal(s.length),
                    specific_weight: Num::decimal(s.specific_weight),
                    rest_width_intervals: s
                        .rest_widths
                        .into_iter()
                        .map(|(lo, hi)| (Num::decimal(lo), hi.map(Num::decimal)))
                        .collect(),
                }
            })
            .collect(),
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&instance_doc(instance)).expect("instance documents serialize")
}

/// Sparse `[item, roll, count]` triples in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub counts: Vec<(usize, usize, u32)>,
}

impl AssignmentDoc {
    pub fn from_assignment(x: &Assignment) -> Self {
        Self {
            counts: x.triples(),
        }
    }

    pub fn to_assignment(&self, instance: &Instance) -> Result<Assignment, ParseError> {
        Assignment::from_triples(instance.n_items(), instance.n_rolls(), &self.counts)
            .map_err(ParseError::from)
    }
}

/// Reads an assignment file, or the `best` field of a report.
pub fn parse_assignment_str(text: &str, instance: &Instance) -> Result<Assignment, ParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ParseError::Schema(e.to_string()))?;
    let doc = if value.get("counts").is_some() {
        value
    } else if let Some(best) = value.get("best") {
        if best.is_null() {
            return Err(ParseError::Schema(
                "report has no admissible best assignment".into(),
            ));
        }
        best.clone()
    } else {
        return Err(ParseError::Schema(
            "expected a `counts` array or a report with `best`".into(),
        ));
    };
    let doc: AssignmentDoc =
        serde_json::from_value(doc).map_err(|e| ParseError::Schema(e.to_string()))?;
    doc.to_assignment(instance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub epoch: u64,
    pub cost: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub instance: String,
    pub terminated_by: Termination,
    pub best_cost: Option<String>,
    pub total_demand: String,
    pub best: Option<AssignmentDoc>,
    pub unresolved_rolls: Vec<usize>,
    pub epochs: u64,
    pub cost_trace: Vec<TraceDoc>,
    pub units: Units,
    pub config: EngineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReportDoc {
    pub fn new(report: &SolveReport, with_timing: bool) -> Self {
        let mass = |m| report.units.mass_to_decimal(m).normalize().to_string();
        Self {
            instance: report.instance.clone(),
            terminated_by: report.terminated_by,
            best_cost: report.best_cost.map(mass),
            total_demand: mass(report.total_demand),
            best: report.best.as_ref().map(AssignmentDoc::from_assignment),
            unresolved_rolls: report.unresolved_rolls.clone(),
            epochs: report.epochs,
            cost_trace: report
                .cost_trace
                .iter()
                .map(|t| TraceDoc {
                    epoch: t.epoch,
                    cost: mass(t.cost),
                })
                .collect(),
            units: report.units,
            config: report.config.clone(),
            timing: with_timing.then(|| report.timing.clone()),
        }
    }
}

pub fn report_to_json(report: &SolveReport, with_timing: bool) -> String {
    serde_json::to_string_pretty(&ReportDoc::new(report, with_timing)).expect("reports serialize")
}
