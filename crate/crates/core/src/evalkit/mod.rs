//! Ground-truth ranking, d2h scoring and multi-seed benchmarks.

mod bench;

pub use bench::{bench, sweep_s, Algorithm, BenchModel, BenchReport, BenchRow, SweepRow};

use serde::Serialize;

use crate::engine::RunResult;
use crate::error::{contract, Result};
use crate::model_io::CandidatePool;
use crate::ranking::{zitzler_cmp, zitzler_worse, GoalView};
use crate::sort::stable_sort_by;

/// Median of `values`; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { (v[k - 1] + v[k]) / 2.0 })
}

/// Pool indices sorted best to worst, plus the inverse permutation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedPool {
    pub order: Vec<usize>,
    pub index_of: Vec<usize>,
    #[serde(skip)]
    views: Vec<GoalView>,
}

impl RankedPool {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Stable sort of the whole pool under the continuous domination
/// comparator, using ground-truth goals (never charged to any run).
pub fn rank_all(pool: &CandidatePool) -> Result<RankedPool> {
    let weights = pool.objectives().weights();
    let bounds = pool.goal_bounds();
    let mut views = Vec::with_capacity(pool.len());
    for (i, c) in pool.candidates().iter().enumerate() {
        let goals = c
            .goals
            .as_deref()
            .ok_or_else(|| contract(format!("candidate {i} has no goals")))?;
        views.push(GoalView::new(goals, bounds, &weights));
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    stable_sort_by(&mut order, |&a, &b| zitzler_cmp(&views[a], &views[b]));
    let mut index_of = vec![0; order.len()];
    for (k, &i) in order.iter().enumerate() {
        index_of[i] = k;
    }
    Ok(RankedPool { order, index_of, views })
}

/// Normalized 0-based rank of pool member `i`.
pub fn d2h(i: usize, ranked: &RankedPool) -> Result<f64> {
    let k = ranked
        .index_of
        .get(i)
        .ok_or_else(|| contract(format!("candidate {i} is not in the ranked pool")))?;
    Ok(*k as f64 / ranked.len() as f64)
}

/// d2h of a goal vector that is not a pool member: the position where it
/// would be inserted into the ranked order.
pub fn d2h_of_goals(goals: &[f64], pool: &CandidatePool, ranked: &RankedPool) -> f64 {
    let view = GoalView::new(goals, pool.goal_bounds(), &pool.objectives().weights());
    let k = ranked.order.partition_point(|&z| zitzler_worse(&view, &ranked.views[z]));
    k as f64 / ranked.len() as f64
}

/// d2h of a run's best candidate; 1.0 when the run produced none.
pub fn run_d2h(run: &RunResult, pool: &CandidatePool, ranked: &RankedPool) -> Result<f64> {
    match &run.best {
        None => Ok(1.0),
        Some(s) => match s.pool_index {
            Some(i) => d2h(i, ranked),
            None => Ok(d2h_of_goals(&s.goals, pool, ranked)),
        },
    }
}

/// Samples needed to see, with confidence `confidence`, at least one event
/// of probability `p`: `ceil(log(1 - c) / log(1 - p))`.
pub fn hamlet_samples(confidence: f64, p: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&confidence) || !(p > 0.0 && p < 1.0) {
        return Err(contract("need 0 <= confidence < 1 and 0 < p < 1"));
    }
    if confidence == 0.0 {
        return Ok(0);
    }
    Ok(((1.0 - confidence).ln() / (1.0 - p).ln()).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_io::{load_candidate_table, Direction, Goal, ObjectiveSpec};

    fn one_goal_pool(ys: &[f64]) -> CandidatePool {
        let mut csv = String::from("a,y\n");
        for (i, y) in ys.iter().enumerate() {
            csv.push_str(&format!("{},{y}\n", i % 2));
        }
        let spec = ObjectiveSpec::new(vec![Goal {
            name: "y".into(),
            direction: Direction::Minimize,
        }])
        .unwrap();
        load_candidate_table(&csv, spec).unwrap()
    }

    #[test]
    fn hamlet_examples() {
        assert_eq!(hamlet_samples(0.999, 0.01).unwrap(), 688);
        assert_eq!(hamlet_samples(0.95, 0.05).unwrap(), 59);
        assert_eq!(hamlet_samples(0.0, 0.05).unwrap(), 0);
        assert!(hamlet_samples(1.0, 0.05).is_err());
        assert!(hamlet_samples(0.5, 0.0).is_err());
    }

    #[test]
    fn single_goal_ranks_ascending() {
        let pool = one_goal_pool(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        let r = rank_all(&pool).unwrap();
        assert_eq!(r.order, vec![1, 3, 2, 4, 0]);
        assert_eq!(d2h(1, &r).unwrap(), 0.0);
        assert_eq!(d2h(0, &r).unwrap(), 0.8);
        assert!(d2h(9, &r).is_err());
    }

    #[test]
    fn identical_candidates_keep_pool_order() {
        let pool = one_goal_pool(&[2.0; 6]);
        assert_eq!(rank_all(&pool).unwrap().order, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn middle_of_a_thousand() {
        let ys: Vec<f64> = (0..1000).map(f64::from).collect();
        let pool = one_goal_pool(&ys);
        let r = rank_all(&pool).unwrap();
        assert_eq!(d2h(500, &r).unwrap(), 0.5);
        let mean: f64 = (0..1000).map(|i| d2h(i, &r).unwrap()).sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() <= 1.0 / 1000.0);
    }

    #[test]
    fn outside_goals_insert_by_rank() {
        let pool = one_goal_pool(&[0.0, 1.0, 2.0, 3.0]);
        let r = rank_all(&pool).unwrap();
        assert_eq!(d2h_of_goals(&[1.5], &pool, &r), 0.5);
        assert_eq!(d2h_of_goals(&[-1.0], &pool, &r), 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
