use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::preprocess::EncodedPool;
use crate::ranking::{Choice, Question};

/// Source of answers to preference questions.
pub trait Oracle {
    fn answer(&mut self, pool: &EncodedPool, question: &Question) -> Result<Choice>;

    /// Optional 0..=5 rating of a pool candidate.
    fn rate(&mut self, _pool: &EncodedPool, _row: usize) -> Option<u8> {
        None
    }
}

/// Simulated user holding a fixed random priority for every
/// (attribute, value) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoOracle {
    priorities: Vec<Vec<f64>>,
}

impl AutoOracle {
    pub fn new(pool: &EncodedPool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let priorities = pool
            .scheme()
            .attributes
            .iter()
            .map(|a| (0..a.arity()).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Self { priorities }
    }

    /// `priorities[attribute][code]`.
    pub fn from_priorities(priorities: Vec<Vec<f64>>) -> Result<Self> {
        if priorities.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(contract("priorities must lie in [0, 1]"));
        }
        Ok(Self { priorities })
    }

    pub fn priorities(&self) -> &[Vec<f64>] {
        &self.priorities
    }

    fn mass(&self, values: &[crate::ranking::AttrValue]) -> f64 {
        values.iter().map(|v| self.priorities[v.attribute][v.code]).sum()
    }
}

impl Oracle for AutoOracle {
    fn answer(&mut self, _pool: &EncodedPool, question: &Question) -> Result<Choice> {
        if self.mass(&question.option_a) >= self.mass(&question.option_b) {
            Ok(Choice::A)
        } else {
            Ok(Choice::B)
        }
    }

    fn rate(&mut self, pool: &EncodedPool, row: usize) -> Option<u8> {
        let best: f64 = self
            .priorities
            .iter()
            .map(|p| p.iter().copied().fold(0.0, f64::max))
            .sum();
        if best <= 0.0 {
            return Some(0);
        }
        let have: f64 = (0..pool.num_attributes())
            .map(|a| self.priorities[a][pool.code(row, a)])
            .sum();
        Some((5.0 * have / best).round() as u8)
    }
}
