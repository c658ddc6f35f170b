use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::{pass2_sway, Interaction, InteractionLog, RunResult, Solution};
use crate::error::{contract, Result};
use crate::geometry::{build_tree, node_entropy, ClusterTree};
use crate::model_io::YEvaluator;
use crate::preprocess::EncodedPool;
use crate::ranking::{
    build_question, differing_attributes, half_support, pref_worse, zitzler_cmp, Answer, Choice, GoalView,
    Question, DEFAULT_QUESTION_SIZE,
};
use crate::sort::stable_sort_by;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Most attributes shown per question.
    pub question_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            question_cap: DEFAULT_QUESTION_SIZE,
        }
    }
}

impl SearchConfig {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubtreeScore {
    pub node: usize,
    pub s_term: usize,
    pub gain_east: f64,
    pub gain_west: f64,
    pub open: f64,
    pub depth: usize,
    pub score: f64,
}

/// `S * (e0 - e1) * (e0 - e2) * open / d`, with both gains clamped at 0.
pub fn subtree_score(s_term: usize, gain_east: f64, gain_west: f64, open: f64, depth: usize) -> f64 {
    s_term as f64 * gain_east.max(0.0) * gain_west.max(0.0) * open / depth.max(1) as f64
}

#[derive(Clone, Debug)]
struct Pending {
    question: Question,
    east: usize,
    west: usize,
    reps: (usize, usize),
}

/// Pass-1 state machine over one encoded pool.
#[derive(Clone, Debug)]
pub struct Search {
    pool: Arc<EncodedPool>,
    tree: ClusterTree,
    config: SearchConfig,
    weights: Vec<f64>,
    live: Vec<bool>,
    live_total: usize,
    node_live: Vec<usize>,
    node_entropy: Vec<f64>,
    asked: Vec<bool>,
    stop: f64,
    evaluator: YEvaluator,
    log: InteractionLog,
    pending: Option<Pending>,
    done: bool,
    started: Instant,
}

impl Search {
    pub fn new(pool: Arc<EncodedPool>, config: SearchConfig) -> Result<Self> {
        if pool.len() < 16 {
            return Err(contract("interactive search needs at least 16 candidates"));
        }
        if config.question_cap == 0 {
            return Err(contract("question size cap must be positive"));
        }
        let started = Instant::now();
        let tree = build_tree(pool.matrix(), config.seed)?;
        let node_live = tree.nodes.iter().map(|n| n.members.len()).collect();
        let node_entropy = tree.nodes.iter().map(|n| n.entropy).collect();
        Ok(Self {
            weights: pool.pool().objectives().weights(),
            live: vec![true; pool.len()],
            live_total: pool.len(),
            node_live,
            node_entropy,
            asked: vec![false; pool.num_attributes()],
            stop: (pool.len() as f64).sqrt(),
            evaluator: YEvaluator::new(pool.pool()),
            log: InteractionLog::default(),
            pending: None,
            done: false,
            tree,
            config,
            pool,
            started,
        })
    }

    pub fn pool(&self) -> &Arc<EncodedPool> {
        &self.pool
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn log(&self) -> &InteractionLog {
        &self.log
    }

    pub fn live_count(&self) -> usize {
        self.live_total
    }

    pub fn survivors(&self) -> Vec<usize> {
        (0..self.live.len()).filter(|&r| self.live[r]).collect()
    }

    pub fn is_asked(&self, attribute: usize) -> bool {
        self.asked[attribute]
    }

    /// Excludes attributes from future questions.
    pub fn mark_asked(&mut self, attributes: impl IntoIterator<Item = usize>) {
        for a in attributes {
            self.asked[a] = true;
        }
    }

    pub fn pending(&self) -> Option<&Question> {
        self.pending.as_ref().map(|p| &p.question)
    }

    /// True once pass 1 has nothing more to ask.
    pub fn is_done(&self) -> bool {
        self.done
    }

    fn representative(&self, node: usize) -> usize {
        let n = self.tree.node(node);
        if self.live[n.east] {
            n.east
        } else if self.live[n.west] {
            n.west
        } else {
            *n.members.iter().find(|&&r| self.live[r]).expect("scored children have live members")
        }
    }

    fn live_members(&self, node: usize) -> Vec<usize> {
        self.tree.node(node).members.iter().copied().filter(|&r| self.live[r]).collect()
    }

    fn score(&self, id: usize) -> Option<SubtreeScore> {
        let node = self.tree.node(id);
        let (e, w) = node.children?;
        if self.node_live[e] == 0 || self.node_live[w] == 0 {
            return None;
        }
        let diff = differing_attributes(&self.pool, self.representative(e), self.representative(w));
        let open_count = diff.iter().filter(|&&a| !self.asked[a]).count();
        let open = if diff.is_empty() {
            0.0
        } else {
            open_count as f64 / diff.len() as f64
        };
        let s_term = open_count.min(self.config.question_cap);
        let gain_east = (self.node_entropy[id] - self.node_entropy[e]).max(0.0);
        let gain_west = (self.node_entropy[id] - self.node_entropy[w]).max(0.0);
        let score = subtree_score(s_term, gain_east, gain_west, open, node.depth);
        Some(SubtreeScore {
            node: id,
            s_term,
            gain_east,
            gain_west,
            open,
            depth: node.depth,
            score,
        })
    }

    /// Every internal node with two live children, best first (ties by
    /// node id).
    pub fn scores(&self) -> Vec<SubtreeScore> {
        let mut out: Vec<SubtreeScore> = (0..self.tree.nodes.len()).filter_map(|id| self.score(id)).collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
        out
    }

    /// The question awaiting an answer, computing the next one if needed.
    /// `None` once pass 1 is finished.
    pub fn next_question(&mut self) -> Option<&Question> {
        if self.pending.is_none() && !self.done {
            self.pending = self.plan();
            if self.pending.is_none() {
                self.done = true;
            }
        }
        self.pending()
    }

    fn plan(&mut self) -> Option<Pending> {
        if (self.live_total as f64) < self.stop {
            return None;
        }
        let best = self.scores().into_iter().next().filter(|s| s.score > 0.0)?;
        let (e, w) = self.tree.node(best.node).children.expect("scored nodes are internal");
        let reps = (self.representative(e), self.representative(w));
        let mut question = build_question(
            &self.pool,
            best.node,
            &self.live_members(e),
            &self.live_members(w),
            reps,
            &self.asked,
            self.config.question_cap,
        )?;
        question.id = self.log.interactions.len();
        for a in question.attributes().collect::<Vec<_>>() {
            self.asked[a] = true;
        }
        Some(Pending {
            question,
            east: e,
            west: w,
            reps,
        })
    }

    /// Applies the oracle's choice to the pending question and prunes the
    /// worse half.
    pub fn answer(&mut self, choice: Choice) -> Result<&Interaction> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| contract("no question is awaiting an answer"))?;
        let selected = pending.question.option(choice);
        let east_live = self.live_members(pending.east);
        let west_live = self.live_members(pending.west);
        let p_east = half_support(&self.pool, &east_live, selected);
        let p_west = half_support(&self.pool, &west_live, selected);
        let bounds = self.pool.pool().goal_bounds();
        let ve = GoalView::new(self.evaluator.evaluate(self.pool.pool(), pending.reps.0), bounds, &self.weights);
        let vw = GoalView::new(self.evaluator.evaluate(self.pool.pool(), pending.reps.1), bounds, &self.weights);
        let prune_east = if pref_worse(&ve, &vw, p_east, p_west) {
            true
        } else if pref_worse(&vw, &ve, p_west, p_east) {
            false
        } else {
            choice == Choice::B
        };
        let pruned = self.prune(if prune_east { pending.east } else { pending.west });
        self.log.y_evaluations = self.evaluator.count();
        self.log.push(Interaction {
            question: pending.question,
            answer: Answer { choice, p_east, p_west },
            pruned,
            live_after: self.live_total,
        });
        Ok(self.log.interactions.last().expect("just pushed"))
    }

    fn prune(&mut self, node: usize) -> usize {
        let mut removed = 0;
        for &r in &self.tree.node(node).members {
            if self.live[r] {
                self.live[r] = false;
                removed += 1;
            }
        }
        for id in self.tree.subtree(node) {
            self.node_live[id] = 0;
        }
        self.live_total -= removed;
        let mut up = self.tree.node(node).parent;
        while let Some(id) = up {
            let members = self.live_members(id);
            self.node_live[id] = members.len();
            self.node_entropy[id] = node_entropy(self.pool.matrix(), &members);
            up = self.tree.node(id).parent;
        }
        removed
    }

    /// Runs pass 2 on the survivors and reports the run.
    pub fn finish(mut self) -> Result<RunResult> {
        if self.pending.is_some() {
            return Err(contract("a question is still awaiting an answer"));
        }
        let survivors = self.survivors();
        let selected = if survivors.len() >= 2 {
            let seed = self.config.seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
            pass2_sway(&self.pool, &survivors, seed, &mut self.evaluator)?
        } else {
            survivors
        };
        let bounds = self.pool.pool().goal_bounds();
        let mut ranked: Vec<(usize, GoalView)> = selected
            .iter()
            .map(|&i| {
                let g = self.evaluator.evaluate(self.pool.pool(), i);
                (i, GoalView::new(g, bounds, &self.weights))
            })
            .collect();
        stable_sort_by(&mut ranked, |a, b| zitzler_cmp(&a.1, &b.1));
        let solutions: Vec<Solution> = ranked.iter().map(|(i, _)| Solution::from_pool(self.pool.pool(), *i)).collect();
        self.log.y_evaluations = self.evaluator.count();
        let valid = solutions.iter().filter(|s| s.valid).count();
        Ok(RunResult {
            algorithm: "isneak".into(),
            model: String::new(),
            seed: self.config.seed,
            best: solutions.first().cloned(),
            valid_fraction: if solutions.is_empty() {
                0.0
            } else {
                valid as f64 / solutions.len() as f64
            },
            selected: solutions,
            log: self.log,
            wall_ms: Some(self.started.elapsed().as_secs_f64() * 1e3),
        })
    }
}
