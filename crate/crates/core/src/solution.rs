use serde::{Deserialize, Serialize};

use crate::instance::MetricInstance;

/// An integral cover: chosen balls, their realized expansion, and a
/// point-to-ball assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedSolution {
    /// Ball ids, ascending.
    pub selected: Vec<usize>,
    /// Realized serving factor of each selected ball, parallel to `selected`.
    pub expansion: Vec<f64>,
    /// Ball id per point.
    pub assignment: Vec<usize>,
    pub cost: u64,
    pub lp_value: f64,
    /// Copies opened per selected ball (soft capacities only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<Vec<u64>>,
}

impl RoundedSolution {
    /// Builds a solution and computes each ball's realized expansion, the
    /// largest `d(c, p) / r` over its assigned points and never below 1.
    pub fn new(
        inst: &MetricInstance,
        mut selected: Vec<usize>,
        assignment: Vec<usize>,
        lp_value: f64,
        copies: Option<Vec<u64>>,
    ) -> Self {
        let mut copies = copies;
        if let Some(c) = copies.as_mut() {
            let mut pairs: Vec<(usize, u64)> = selected.iter().copied().zip(c.iter().copied()).collect();
            pairs.sort_unstable();
            selected = pairs.iter().map(|p| p.0).collect();
            *c = pairs.iter().map(|p| p.1).collect();
        } else {
            selected.sort_unstable();
        }
        let expansion = realized_expansion(inst, &selected, &assignment);
        let cost = match &copies {
            Some(c) => c.iter().sum(),
            None => selected.len() as u64,
        };
        RoundedSolution {
            selected,
            expansion,
            assignment,
            cost,
            lp_value,
            copies,
        }
    }

    pub fn max_expansion(&self) -> f64 {
        self.expansion.iter().copied().fold(1.0, f64::max)
    }

    /// Per selected ball, the number of points assigned to it.
    pub fn loads(&self) -> Vec<usize> {
        self.selected
            .iter()
            .map(|&b| self.assignment.iter().filter(|&&a| a == b).count())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn realized_expansion(inst: &MetricInstance, selected: &[usize], assignment: &[usize]) -> Vec<f64> {
    let mut worst = vec![1.0f64; selected.len()];
    for (j, &b) in assignment.iter().enumerate() {
        if let Ok(k) = selected.binary_search(&b) {
            worst[k] = worst[k].max(inst.stretch(b, j));
        }
    }
    worst
}
