use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
}

/// An allocation with its cost. Infeasible results carry an empty `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    #[serde(with = "finite_or_null")]
    pub objective: f64,
    pub status: Status,
    /// Accuracy the continuous solve targeted; `None` in integer mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Solution {
    pub fn infeasible(epsilon: Option<f64>) -> Self {
        Solution {
            x: Vec::new(),
            objective: f64::INFINITY,
            status: Status::Infeasible,
            epsilon,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub rap_calls: usize,
    pub recursion_levels: usize,
    pub active_constraints: usize,
    pub wall_ms: f64,
}

/// JSON has no infinity; infeasible objectives travel as `null`.
mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
