//! Size-normalized benchmark metric over a family of instances.
//!
//! For instance π with best cost g_π and total demand W_π,
//! `G(π) = (g_π / W_π) · (g_π / Σ g)`. The first factor is the weight
//! utilization ratio, the second weights it by the instance's share of all
//! used stock. All values are exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SolveReport;
use crate::model::Mass;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("no reports given")]
    Empty,
    #[error("instance {0} has no admissible solution")]
    NoSolution(String),
    #[error("instance {0} has zero demand")]
    ZeroDemand(String),
    #[error("total cost over all instances is zero")]
    ZeroTotal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub name: String,
    pub g_best: BigRational,
    pub demand: BigRational,
    pub metric: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkMetric {
    pub rows: Vec<MetricRow>,
    pub total: BigRational,
}

/// `value / 10^decimals` as an exact rational.
pub fn scaled(value: Mass, decimals: u32) -> BigRational {
    BigRational::new(
        BigInt::from(value),
        num_traits::pow(BigInt::from(10), decimals as usize),
    )
}

/// Computes the metric from `(name, g_best, W)` triples.
pub fn metric_from_values(
    values: &[(String, BigRational, BigRational)],
) -> Result<BenchmarkMetric, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty);
    }
    let sum: BigRational = values.iter().map(|(_, g, _)| g.clone()).sum();
    if sum.is_zero() {
        return Err(MetricError::ZeroTotal);
    }
    let mut rows = Vec::with_capacity(values.len());
    for (name, g, w) in values {
        if w.is_zero() {
            return Err(MetricError::ZeroDemand(name.clone()));
        }
        let metric = (g / w) * (g / &sum);
        rows.push(MetricRow {
            name: name.clone(),
            g_best: g.clone(),
            demand: w.clone(),
            metric,
        });
    }
    let total = rows.iter().map(|r| r.metric.clone()).sum();
    Ok(BenchmarkMetric { rows, total })
}

pub fn metric(reports: &[SolveReport]) -> Result<BenchmarkMetric, MetricError> {
    let values = reports
        .iter()
        .map(|r| {
            let g = r
                .best_cost
                .ok_or_else(|| MetricError::NoSolution(r.instance.clone()))?;
            let md = r.units.mass_decimals;
            Ok((
                r.instance.clone(),
                scaled(g, md),
                scaled(r.total_demand, md),
            ))
        })
        .collect::<Result<Vec<_>, MetricError>>()?;
    metric_from_values(&values)
}

/// Exact text form: `n` or `n/d`.
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Inverse of [`rational_string`], also accepting plain decimals.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let digits: BigInt = format!("{int}{frac}").parse().ok()?;
        return Some(BigRational::new(
            digits,
            num_traits::pow(BigInt::from(10), frac.len()),
        ));
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Decimal rendering of an exact rational, for human reading.
pub fn approx(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRowDoc {
    pub name: String,
    pub g_best: String,
    #[serde(rename = "W")]
    pub demand: String,
    pub metric: String,
    pub metric_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDoc {
    pub rows: Vec<MetricRowDoc>,
    pub total: String,
    pub total_approx: f64,
}

impl From<&BenchmarkMetric> for MetricDoc {
    fn from(m: &BenchmarkMetric) -> Self {
        Self {
            rows: m
                .rows
                .iter()
                .map(|r| MetricRowDoc {
                    name: r.name.clone(),
                    g_best: rational_string(&r.g_best),
                    demand: rational_string(&r.demand),
                    metric: rational_string(&r.metric),
                    metric_approx: approx(&r.metric),
                })
                .collect(),
            total: rational_string(&m.total),
            total_approx: approx(&m.total),
        }
    }
}

/// CSV table with header `name,g_best,W,metric`.
pub fn to_csv(m: &BenchmarkMetric) -> String {
    let mut out = String::from("name,g_best,W,metric\n");
    for r in &m.rows {
        let name = if r.name.contains([',', '"', '\n']) {
            format!("\"{}\"", r.name.replace('"', "\"\""))
        } else {
            r.name.clone()
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            name,
            rational_string(&r.g_best),
            rational_string(&r.demand),
            rational_string(&r.metric)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn row(name: &str, g: i64, w: i64) -> (String, BigRational, BigRational) {
        (name.to_string(), q(g, 1), q(w, 1))
    }

    #[test]
    fn single_instance() {
        let m = metric_from_values(&[row("a", 120, 100)]).unwrap();
        assert_eq!(m.rows[0].metric, q(6, 5));
        assert_eq!(m.total, q(6, 5));
    }

    #[test]
    fn two_equal_instances() {
        let m = metric_from_values(&[row("a", 100, 100), row("b", 100, 100)]).unwrap();
        assert_eq!(m.rows[0].metric, q(1, 2));
        assert_eq!(m.rows[1].metric, q(1, 2));
        assert_eq!(m.total, q(1, 1));
    }

    #[test]
    fn perfect_utilization() {
        let m = metric_from_values(&[row("a", 77, 77)]).unwrap();
        assert_eq!(m.total, q(1, 1));
    }

    #[test]
    fn errors() {
        assert_eq!(metric_from_values(&[]), Err(MetricError::Empty));
        assert_eq!(
            metric_from_values(&[row("a", 0, 5)]),
            Err(MetricError::ZeroTotal)
        );
        assert_eq!(
            metric_from_values(&[row("a", 5, 0)]),
            Err(MetricError::ZeroDemand("a".into()))
        );
    }

    #[test]
    fn scaled_values() {
        assert_eq!(scaled(12345, 2), q(12345, 100));
        assert_eq!(scaled(-5, 0), q(-5, 1));
    }

    #[test]
    fn rational_text_round_trip() {
        for v in [q(6, 5), q(1, 1), q(-3, 7), q(0, 1)] {
            assert_eq!(parse_rational(&rational_string(&v)), Some(v));
        }
        assert_eq!(parse_rational("1.25"), Some(q(5, 4)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn csv_rows_sum_to_total() {
        let m = metric_from_values(&[row("a", 130, 100), row("b,c", 70, 60)]).unwrap();
        let csv = to_csv(&m);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("name,g_best,W,metric"));
        let sum: BigRational = lines
            .map(|l| parse_rational(l.rsplit(',').next().unwrap()).unwrap())
            .sum();
        assert_eq!(sum, m.total);
        assert!(csv.contains("\"b,c\""));
    }
}
