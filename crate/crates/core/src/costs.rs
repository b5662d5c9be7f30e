//! Local objectives held privately by each agent.

use crate::error::{Error, Result};

/// A smooth convex local objective as seen by the optimizer.
pub trait SmoothCost {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> Result<f64>;
    fn grad(&self, y: &[f64]) -> Result<Vec<f64>>;
    /// Lipschitz constant of the gradient map.
    fn lipschitz(&self) -> f64;
}

/// `f(y) = ‖y − r‖²` for a private reference point `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticTrackingCost {
    reference: Vec<f64>,
}

impl QuadraticTrackingCost {
    pub fn new(reference: Vec<f64>) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::InvalidCost("reference must have dimension >= 1".into()));
        }
        if reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reference"));
        }
        Ok(Self { reference })
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.reference.len() {
            return Err(Error::DimensionMismatch {
                context: "cost argument",
                expected: self.reference.len(),
                found: y.len(),
            });
        }
        Ok(())
    }
}

impl SmoothCost for QuadraticTrackingCost {
    fn dim(&self) -> usize {
        self.reference.len()
    }

    fn eval(&self, y: &[f64]) -> Result<f64> {
        self.check(y)?;
        Ok(y.iter().zip(&self.reference).map(|(a, r)| (a - r) * (a - r)).sum())
    }

    fn grad(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        Ok(y.iter().zip(&self.reference).map(|(a, r)| 2.0 * (a - r)).collect())
    }

    fn lipschitz(&self) -> f64 {
        2.0
    }
}

/// One local cost per agent, all of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSet<C = QuadraticTrackingCost> {
    costs: Vec<C>,
    dim: usize,
}

impl<C: SmoothCost> CostSet<C> {
    pub fn new(costs: Vec<C>) -> Result<Self> {
        let dim = costs
            .first()
            .map(SmoothCost::dim)
            .ok_or_else(|| Error::InvalidCost("cost set needs at least one agent".into()))?;
        if let Some(bad) = costs.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "cost set member dimension",
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { costs, dim })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn costs(&self) -> &[C] {
        &self.costs
    }

    pub fn get(&self, agent: usize) -> Option<&C> {
        self.costs.get(agent)
    }

    /// Largest member Lipschitz constant; the constant of the stacked gradient map.
    pub fn lipschitz_constant(&self) -> f64 {
        self.costs.iter().map(SmoothCost::lipschitz).fold(0.0, f64::max)
    }

    /// `Σ_i f_i(y)` evaluated at a common point.
    pub fn total(&self, y: &[f64]) -> Result<f64> {
        self.costs.iter().map(|c| c.eval(y)).sum()
    }
}

impl CostSet<QuadraticTrackingCost> {
    pub fn from_references<R: AsRef<[f64]>>(references: &[R]) -> Result<Self> {
        let costs = references
            .iter()
            .map(|r| QuadraticTrackingCost::new(r.as_ref().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(costs)
    }

    pub fn references(&self) -> Vec<Vec<f64>> {
        self.costs.iter().map(|c| c.reference.clone()).collect()
    }

    /// The unique minimizer of `Σ ‖y − r_i‖²`: the mean of the references.
    pub fn global_optimum(&self) -> Vec<f64> {
        let n = self.costs.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for c in &self.costs {
            for (m, r) in mean.iter_mut().zip(&c.reference) {
                *m += r;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Returns a copy with agent `agent`'s reference replaced.
    pub fn reschedule(&self, agent: usize, new_reference: Vec<f64>) -> Result<Self> {
        if agent >= self.costs.len() {
            return Err(Error::InvalidCost(format!(
                "reschedule targets agent {agent}, but only {} agents exist",
                self.costs.len()
            )));
        }
        let replacement = QuadraticTrackingCost::new(new_reference)?;
        if replacement.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "rescheduled reference",
                expected: self.dim,
                found: replacement.dim(),
            });
        }
        let mut out = self.clone();
        out.costs[agent] = replacement;
        Ok(out)
    }
}
