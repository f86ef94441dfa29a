use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{AlignError, Result};
use crate::pointset::{squared_distance, WeightedPointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub source: usize,
    pub target: usize,
    pub flow: f64,
}

/// A feasible flow between two weighted point sets with its cost.
///
/// Only strictly positive flows are stored. `normalized_distance` is the
/// cost divided by the shipped mass `lambda * min(W_A, W_B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub entries: Vec<FlowEntry>,
    pub total_flow: f64,
    pub cost: f64,
    pub normalized_distance: f64,
}

impl TransportPlan {
    pub fn empty() -> Self {
        Self { entries: Vec::new(), total_flow: 0.0, cost: 0.0, normalized_distance: 0.0 }
    }

    /// Builds a plan from raw entries, recomputing cost against the given sets.
    pub fn from_entries(
        a: &WeightedPointSet,
        b: &WeightedPointSet,
        entries: Vec<FlowEntry>,
        normalizer: f64,
    ) -> Self {
        let entries: Vec<FlowEntry> = entries.into_iter().filter(|e| e.flow > 0.0).collect();
        let total_flow = entries.iter().map(|e| e.flow).sum();
        let cost = entries
            .iter()
            .map(|e| e.flow * squared_distance(a.point(e.source), b.point(e.target)))
            .sum();
        let normalized_distance = if normalizer > 0.0 { cost / normalizer } else { 0.0 };
        Self { entries, total_flow, cost, normalized_distance }
    }

    pub fn row_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.source] += e.flow;
        }
        s
    }

    pub fn col_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.target] += e.flow;
        }
        s
    }

    /// Largest capacity violation relative to the total weight of the
    /// violated side. Zero for a feasible plan.
    pub fn capacity_violation(&self, a: &WeightedPointSet, b: &WeightedPointSet) -> f64 {
        let rows = self.row_sums(a.len());
        let cols = self.col_sums(b.len());
        let over_a = rows
            .iter()
            .zip(a.weights())
            .map(|(s, w)| (s - w).max(0.0) / a.total_weight())
            .fold(0.0, f64::max);
        let over_b = cols
            .iter()
            .zip(b.weights())
            .map(|(s, w)| (s - w).max(0.0) / b.total_weight())
            .fold(0.0, f64::max);
        over_a.max(over_b)
    }

    /// Text form: `total_flow cost normalized_distance` then `i j f` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.total_flow, self.cost, self.normalized_distance);
        for e in &self.entries {
            writeln!(out, "{} {} {}", e.source, e.target, e.flow).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or(AlignError::Parse { line: 1, message: "missing header".into() })?;
        let h: Vec<f64> = parse_fields(header, 1)?;
        if h.len() != 3 {
            return Err(AlignError::Parse { line: 1, message: "header needs three values".into() });
        }
        let mut entries = Vec::new();
        for (i, l) in lines {
            let f = l.split_whitespace().collect::<Vec<_>>();
            let bad = || AlignError::Parse { line: i + 1, message: format!("bad flow entry `{l}`") };
            if f.len() != 3 {
                return Err(bad());
            }
            entries.push(FlowEntry {
                source: f[0].parse().map_err(|_| bad())?,
                target: f[1].parse().map_err(|_| bad())?,
                flow: f[2].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self { entries, total_flow: h[0], cost: h[1], normalized_distance: h[2] })
    }
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| AlignError::Parse { line: lineno, message: format!("cannot parse `{t}`") })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let plan = TransportPlan {
            entries: vec![
                FlowEntry { source: 0, target: 1, flow: 0.5 },
                FlowEntry { source: 2, target: 0, flow: 1.0 / 3.0 },
            ],
            total_flow: 0.8333333333333334,
            cost: 1.25,
            normalized_distance: 1.5,
        };
        assert_eq!(TransportPlan::parse(&plan.to_text()).unwrap(), plan);
    }

    #[test]
    fn violation_is_zero_for_feasible() {
        let a = WeightedPointSet::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let b = WeightedPointSet::uniform(vec![vec![0.0], vec![2.0]]).unwrap();
        let ok = TransportPlan::from_entries(
            &a,
            &b,
            vec![FlowEntry { source: 0, target: 0, flow: 1.0 }, FlowEntry { source: 1, target: 1, flow: 1.0 }],
            2.0,
        );
        assert_eq!(ok.capacity_violation(&a, &b), 0.0);
        assert_eq!(ok.cost, 1.0);
        assert_eq!(ok.normalized_distance, 0.5);
        let bad = TransportPlan::from_entries(&a, &b, vec![FlowEntry { source: 0, target: 0, flow: 1.5 }], 2.0);
        assert!(bad.capacity_violation(&a, &b) > 0.2);
    }
}
