//! The two-pass interactive search.
//!
//! Pass 1 ([`Search`]) asks an [`Oracle`] preference questions about
//! high-scoring subtrees of the cluster tree and prunes the worse half after
//! each answer. It is a resumable state machine: callers pull the pending
//! question, supply an answer, and repeat, so the same code serves automatic
//! oracles, terminal prompts and HTTP sessions. Pass 2 ([`pass2_sway`])
//! prunes the survivors automatically.

mod oracle;
mod pass1;
mod sway;

use std::sync::Arc;

use serde::Serialize;

pub use oracle::{AutoOracle, Oracle};
pub use pass1::{subtree_score, Search, SearchConfig, SubtreeScore};
pub use sway::pass2_sway;

use crate::error::Result;
use crate::preprocess::EncodedPool;
use crate::ranking::{Answer, Question};

/// One reported candidate. `pool_index` is `None` for candidates created
/// outside the pool (genetic offspring).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub pool_index: Option<usize>,
    pub decisions: Vec<f64>,
    pub goals: Vec<f64>,
    pub valid: bool,
}

impl Solution {
    pub fn from_pool(pool: &crate::model_io::CandidatePool, i: usize) -> Self {
        let c = pool.candidate(i);
        Self {
            pool_index: Some(i),
            decisions: (0..c.decisions.len()).map(|a| c.decisions.value(a)).collect(),
            goals: pool.true_goals(i).to_vec(),
            valid: pool.is_valid(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Interaction {
    pub question: Question,
    pub answer: Answer,
    /// Candidates removed by this answer.
    pub pruned: usize,
    pub live_after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InteractionLog {
    pub interactions: Vec<Interaction>,
    #[serde(rename = "I")]
    pub questions: usize,
    pub sizes: Vec<usize>,
    pub y_evaluations: usize,
}

impl InteractionLog {
    pub(crate) fn push(&mut self, interaction: Interaction) {
        self.sizes.push(interaction.question.size());
        self.interactions.push(interaction);
        self.questions = self.interactions.len();
    }

    /// Median question size; 0 when nothing was asked.
    pub fn median_size(&self) -> f64 {
        let v: Vec<f64> = self.sizes.iter().map(|&s| s as f64).collect();
        crate::evalkit::median(&v).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub algorithm: String,
    pub model: String,
    pub seed: u64,
    /// Best first under the continuous domination comparator.
    pub selected: Vec<Solution>,
    pub best: Option<Solution>,
    pub log: InteractionLog,
    pub valid_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl RunResult {
    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn without_timing(&self) -> Self {
        Self {
            wall_ms: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run results serialize")
    }

    pub fn y_evaluations(&self) -> usize {
        self.log.y_evaluations
    }
}

/// Runs both passes to completion against `oracle`.
pub fn run_isneak(pool: Arc<EncodedPool>, oracle: &mut dyn Oracle, config: SearchConfig) -> Result<RunResult> {
    let mut search = Search::new(pool.clone(), config)?;
    while let Some(question) = search.next_question() {
        let question = question.clone();
        let choice = oracle.answer(&pool, &question)?;
        search.answer(choice)?;
    }
    search.finish()
}
