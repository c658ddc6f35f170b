use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cart::cart_fit;
use crate::engine::{InteractionLog, RunResult, Solution};
use crate::error::{contract, Result};
use crate::model_io::YEvaluator;
use crate::preprocess::EncodedPool;
use crate::ranking::{zitzler_cmp, GoalView};
use crate::sort::stable_sort_by;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlashConfig {
    pub m0: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for FlashConfig {
    fn default() -> Self {
        Self {
            m0: 60,
            budget: 120,
            seed: 0,
        }
    }
}

impl FlashConfig {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Index into `unevaluated` maximizing `sum_i g_i * w_i * r_i`, where `g` are
/// predictions normalized to 0..1 over the unevaluated set. Ties go to the
/// earliest position.
pub fn acquire(predictions: &[Vec<f64>], weights: &[f64], r: &[f64]) -> usize {
    let goals = weights.len();
    let mut lo = vec![f64::INFINITY; goals];
    let mut hi = vec![f64::NEG_INFINITY; goals];
    for p in predictions {
        for g in 0..goals {
            lo[g] = lo[g].min(p[g]);
            hi[g] = hi[g].max(p[g]);
        }
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (k, p) in predictions.iter().enumerate() {
        let score: f64 = (0..goals)
            .map(|g| {
                let norm = if hi[g] > lo[g] { (p[g] - lo[g]) / (hi[g] - lo[g]) } else { 0.5 };
                norm * weights[g] * r[g]
            })
            .sum();
        if score > best.1 {
            best = (k, score);
        }
    }
    best.0
}

/// Sequential model-based optimization with one regression tree per goal
/// and a randomly weighted acquisition function.
pub fn flash_run(pool: &EncodedPool, config: FlashConfig) -> Result<RunResult> {
    let started = std::time::Instant::now();
    if config.m0 == 0 || config.m0 >= config.budget {
        return Err(contract("FLASH needs 0 < m0 < budget"));
    }
    let base = pool.pool();
    let weights = base.objectives().weights();
    let bounds = base.goal_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluator = YEvaluator::new(base);
    let mut evaluated: Vec<usize> = sample(&mut rng, pool.len(), config.m0.min(pool.len())).into_vec();
    let mut is_evaluated = vec![false; pool.len()];
    for &i in &evaluated {
        evaluator.evaluate(base, i);
        is_evaluated[i] = true;
    }
    while evaluated.len() < config.budget && evaluated.len() < pool.len() {
        let trees = (0..weights.len())
            .map(|g| {
                let targets: Vec<f64> = evaluated.iter().map(|&i| base.true_goals(i)[g]).collect();
                cart_fit(pool.matrix(), &evaluated, &targets)
            })
            .collect::<Result<Vec<_>>>()?;
        let open: Vec<usize> = (0..pool.len()).filter(|&i| !is_evaluated[i]).collect();
        let predictions: Vec<Vec<f64>> = open
            .iter()
            .map(|&i| trees.iter().map(|t| t.predict(pool.matrix(), i)).collect())
            .collect();
        let r: Vec<f64> = (0..weights.len()).map(|_| rng.gen::<f64>()).collect();
        let pick = open[acquire(&predictions, &weights, &r)];
        evaluator.evaluate(base, pick);
        is_evaluated[pick] = true;
        evaluated.push(pick);
    }
    let mut ranked: Vec<(usize, GoalView)> = evaluated
        .iter()
        .map(|&i| (i, GoalView::new(base.true_goals(i), bounds, &weights)))
        .collect();
    stable_sort_by(&mut ranked, |a, b| zitzler_cmp(&a.1, &b.1));
    let best = Solution::from_pool(base, ranked[0].0);
    Ok(RunResult {
        algorithm: "flash".into(),
        model: String::new(),
        seed: config.seed,
        valid_fraction: if best.valid { 1.0 } else { 0.0 },
        selected: vec![best.clone()],
        best: Some(best),
        log: InteractionLog {
            y_evaluations: evaluator.count(),
            ..InteractionLog::default()
        },
        wall_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_maximized_goal_picks_highest_prediction() {
        let preds = vec![vec![0.3], vec![2.5], vec![1.0]];
        assert_eq!(acquire(&preds, &[1.0], &[1.0]), 1);
        assert_eq!(acquire(&preds, &[-1.0], &[1.0]), 0);
    }

    #[test]
    fn positive_rescaling_keeps_the_pick() {
        let preds = vec![vec![0.3, 5.0], vec![2.5, 1.0], vec![1.0, 3.0]];
        let w = [1.0, -1.0];
        let r = [0.4, 0.9];
        let scaled: Vec<f64> = r.iter().map(|x| x / 37.0).collect();
        assert_eq!(acquire(&preds, &w, &r), acquire(&preds, &w, &scaled));
    }
}
