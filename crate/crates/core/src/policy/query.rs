//! Plan queries and the fixed projection that builds them.

use crate::error::{Error, Result};
use crate::rng::{indexed, Stream};
use crate::world::SUMMARY_DIM;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Fixed-dimension plan query vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanQuery(pub Vec<f64>);

impl PlanQuery {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `‖q_s − q_t‖₂`.
pub fn policy_distill_loss(q_s: &PlanQuery, q_t: &PlanQuery) -> Result<f64> {
    if q_s.dim() != q_t.dim() {
        return Err(Error::Shape(format!("query dims {} vs {}", q_s.dim(), q_t.dim())));
    }
    Ok(q_s.0.iter().zip(&q_t.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Seeded `dq × (2T + summary)` matrix with orthonormal columns. Projecting
/// `[offsets ⊕ summary]` gives a query; the transpose of the offset columns
/// reads offsets back out of any query exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryProjection {
    pub dq: usize,
    pub steps: usize,
    pub seed: u64,
    /// Column-major: `cols[j]` has length `dq`.
    cols: Vec<Vec<f64>>,
}

impl QueryProjection {
    pub fn new(dq: usize, steps: usize, seed: u64) -> Result<Self> {
        let n = 2 * steps + SUMMARY_DIM;
        if dq < n {
            return Err(Error::Config(format!(
                "query dimension {dq} is smaller than the projected input {n}"
            )));
        }
        let mut rng = indexed(seed, Stream::Projection, dq as u64 * 1000 + steps as u64);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v: Vec<f64> = (0..dq).map(|_| StandardNormal.sample(&mut rng)).collect();
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= norm);
            cols.push(v);
        }
        Ok(Self { dq, steps, seed, cols })
    }

    pub fn input_dim(&self) -> usize {
        self.cols.len()
    }

    pub fn project(&self, offsets: &[f64], summary: &[f64; SUMMARY_DIM]) -> Result<PlanQuery> {
        if offsets.len() != 2 * self.steps {
            return Err(Error::Shape(format!(
                "expected {} offsets, got {}",
                2 * self.steps,
                offsets.len()
            )));
        }
        let mut q = vec![0.0; self.dq];
        for (c, x) in self.cols.iter().zip(offsets.iter().chain(summary.iter())) {
            q.iter_mut().zip(c).for_each(|(a, b)| *a += x * b);
        }
        Ok(PlanQuery(q))
    }

    /// Offsets encoded in a query (the plan head).
    pub fn offsets(&self, q: &[f64]) -> Vec<f64> {
        self.cols[..2 * self.steps]
            .iter()
            .map(|c| c.iter().zip(q).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Column `j` of the offset block.
    pub fn offset_col(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_distance() {
        let mut a = PlanQuery::zeros(8);
        let b = PlanQuery::zeros(8);
        a.0[0] = 3.0;
        a.0[1] = 4.0;
        assert_eq!(policy_distill_loss(&a, &b).unwrap(), 5.0);
        assert_eq!(policy_distill_loss(&a, &a).unwrap(), 0.0);
        assert!(policy_distill_loss(&a, &PlanQuery::zeros(7)).is_err());
    }

    #[test]
    fn head_inverts_projection() {
        let p = QueryProjection::new(64, 6, 3).unwrap();
        let off: Vec<f64> = (0..12).map(|i| i as f64 * 0.7 - 3.0).collect();
        let q = p.project(&off, &[0.1, 0.2, 0.0, 0.4, 0.9, 0.5]).unwrap();
        for (a, b) in p.offsets(&q.0).iter().zip(&off) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(QueryProjection::new(10, 6, 3).is_err());
    }
}
