use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::geometry::{pick_poles, project_and_split, Split};
use crate::model_io::YEvaluator;
use crate::preprocess::EncodedPool;
use crate::ranking::{zitzler_worse, GoalView};

/// Automatic pruning: re-cluster `survivors` from scratch, evaluate both
/// poles at each split and descend into the half whose pole is not worse,
/// until at most `ceil(sqrt(survivors))` members remain.
pub fn pass2_sway(
    pool: &EncodedPool,
    survivors: &[usize],
    seed: u64,
    evaluator: &mut YEvaluator,
) -> Result<Vec<usize>> {
    if survivors.len() < 2 {
        return Err(contract("pass 2 needs at least two survivors"));
    }
    let stop = (survivors.len() as f64).sqrt().ceil() as usize;
    let weights = pool.pool().objectives().weights();
    let bounds = pool.pool().goal_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = survivors.to_vec();
    while members.len() > stop {
        let poles = pick_poles(&members, pool.matrix(), &mut rng)?;
        let Split::Halves(east, west) = project_and_split(&members, &poles, pool.matrix()) else {
            break;
        };
        let ve = GoalView::new(evaluator.evaluate(pool.pool(), poles.east), bounds, &weights);
        let vw = GoalView::new(evaluator.evaluate(pool.pool(), poles.west), bounds, &weights);
        members = if zitzler_worse(&ve, &vw) { west } else { east };
    }
    Ok(members)
}
