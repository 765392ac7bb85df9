use serde::{Deserialize, Serialize};

use super::GraphError;

/// Proportionality bounds, either shared by every color or given per color.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bounds {
    Global { alpha: f64, beta: f64 },
    PerColor(Vec<(f64, f64)>),
}

/// `(alpha, beta)` proportionality requirements plus the perturbation
/// parameter used by the exact one-sided mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub bounds: Bounds,
    pub epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 0.1;

fn check_pair(alpha: f64, beta: f64) -> Result<(), GraphError> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha > beta {
        return Err(GraphError::InvalidParameter(format!(
            "bounds must satisfy 0 <= alpha <= beta <= 1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

impl FairnessSpec {
    pub fn global(alpha: f64, beta: f64) -> Result<Self, GraphError> {
        check_pair(alpha, beta)?;
        Ok(Self {
            bounds: Bounds::Global { alpha, beta },
            epsilon: DEFAULT_EPSILON,
        })
    }

    pub fn per_color(bounds: Vec<(f64, f64)>) -> Result<Self, GraphError> {
        for &(a, b) in &bounds {
            check_pair(a, b)?;
        }
        Ok(Self {
            bounds: Bounds::PerColor(bounds),
            epsilon: DEFAULT_EPSILON,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, GraphError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GraphError::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Re-checks every bound pair and epsilon (useful after deserializing).
    pub fn validate(&self) -> Result<(), GraphError> {
        match &self.bounds {
            Bounds::Global { alpha, beta } => check_pair(*alpha, *beta)?,
            Bounds::PerColor(list) => {
                for &(a, b) in list {
                    check_pair(a, b)?;
                }
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(GraphError::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Expands the bounds to one `(alpha_c, beta_c)` pair per color.
    pub fn resolve(&self, num_colors: usize) -> Result<Vec<(f64, f64)>, GraphError> {
        match &self.bounds {
            Bounds::Global { alpha, beta } => Ok(vec![(*alpha, *beta); num_colors]),
            Bounds::PerColor(list) if list.len() == num_colors => Ok(list.clone()),
            Bounds::PerColor(list) => Err(GraphError::InvalidParameter(format!(
                "per-color bounds list has {} entries, graph has {num_colors} colors",
                list.len()
            ))),
        }
    }

    /// True when every lower bound is zero.
    pub fn is_one_sided(&self) -> bool {
        match &self.bounds {
            Bounds::Global { alpha, .. } => *alpha == 0.0,
            Bounds::PerColor(list) => list.iter().all(|&(a, _)| a == 0.0),
        }
    }

    /// Same spec with every `beta` multiplied by `factor`.
    pub fn scale_beta(&self, factor: f64) -> Self {
        let bounds = match &self.bounds {
            Bounds::Global { alpha, beta } => Bounds::Global {
                alpha: *alpha,
                beta: beta * factor,
            },
            Bounds::PerColor(list) => {
                Bounds::PerColor(list.iter().map(|&(a, b)| (a, b * factor)).collect())
            }
        };
        Self {
            bounds,
            epsilon: self.epsilon,
        }
    }
}
