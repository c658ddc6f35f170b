use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{InteractionLog, RunResult, Solution};
use crate::error::{contract, Error, Result};
use crate::model_io::{check_validity, CandidatePool, YEvaluator};
use crate::ranking::{zitzler_cmp, zitzler_worse, GoalView};
use crate::sort::stable_sort_by;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NgaConfig {
    pub population: usize,
    /// Generations including the initial one.
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means 1 / attribute count.
    pub mutation_rate: Option<f64>,
    pub seed: u64,
}

impl Default for NgaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: None,
            seed: 0,
        }
    }
}

impl NgaConfig {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
struct Individual {
    bits: Vec<bool>,
    view: GoalView,
    goals: Vec<f64>,
    origin: Option<usize>,
}

/// Uniform-probability bit flips.
pub fn mutate<R: Rng>(bits: &mut [bool], rate: f64, rng: &mut R) -> usize {
    let mut flips = 0;
    for b in bits.iter_mut() {
        if rng.gen_bool(rate) {
            *b = !*b;
            flips += 1;
        }
    }
    flips
}

/// Child takes `a` before `point` and `b` from `point` on.
pub fn single_point_crossover(a: &[bool], b: &[bool], point: usize) -> Vec<bool> {
    a[..point].iter().chain(&b[point..]).copied().collect()
}

/// Generational genetic algorithm over the model's boolean decisions,
/// seeded from valid pool members. Invalid offspring stay in the
/// population; only the final report filters them.
pub fn nga_run(pool: &CandidatePool, config: NgaConfig) -> Result<RunResult> {
    let started = std::time::Instant::now();
    let model = pool
        .model()
        .ok_or_else(|| Error::Unsupported("the genetic baseline needs a CNF model".into()))?;
    if config.population < 2 || config.generations == 0 {
        return Err(contract("population must be at least 2 and generations positive"));
    }
    if !(0.0..=1.0).contains(&config.crossover_rate) {
        return Err(contract("crossover rate outside [0, 1]"));
    }
    let width = model.num_vars;
    let mutation = config.mutation_rate.unwrap_or(1.0 / width as f64);
    if !(0.0..=1.0).contains(&mutation) {
        return Err(contract("mutation rate outside [0, 1]"));
    }
    let spec = pool.objectives();
    let weights = spec.weights();
    let bounds = pool.goal_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluator = YEvaluator::new(pool);

    let size = config.population.min(pool.len());
    let mut population: Vec<Individual> = sample(&mut rng, pool.len(), size)
        .into_iter()
        .map(|i| {
            let goals = evaluator.evaluate(pool, i).to_vec();
            Individual {
                bits: pool.candidate(i).decisions.bits().expect("model pools hold bits").to_vec(),
                view: GoalView::new(&goals, bounds, &weights),
                goals,
                origin: Some(i),
            }
        })
        .collect();

    let tournament = |pop: &[Individual], rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0..pop.len());
        let b = rng.gen_range(0..pop.len());
        if zitzler_worse(&pop[a].view, &pop[b].view) {
            b
        } else {
            a
        }
    };
    for _ in 1..config.generations {
        let mut ranked = population.clone();
        stable_sort_by(&mut ranked, |a, b| zitzler_cmp(&a.view, &b.view));
        let elite = ranked.swap_remove(0);
        let mut offspring = Vec::with_capacity(size);
        for _ in 0..size {
            let pa = tournament(&population, &mut rng);
            let pb = tournament(&population, &mut rng);
            let mut bits = if rng.gen_bool(config.crossover_rate) && width > 1 {
                let point = rng.gen_range(1..width);
                single_point_crossover(&population[pa].bits, &population[pb].bits, point)
            } else {
                population[pa].bits.clone()
            };
            mutate(&mut bits, mutation, &mut rng);
            let goals = evaluator.evaluate_bits(&bits, spec)?;
            offspring.push(Individual {
                view: GoalView::new(&goals, bounds, &weights),
                goals,
                bits,
                origin: None,
            });
        }
        // the previous generation's best replaces the worst offspring
        let worst = (0..offspring.len())
            .reduce(|w, k| if zitzler_worse(&offspring[k].view, &offspring[w].view) { k } else { w })
            .expect("offspring are non-empty");
        offspring[worst] = elite;
        population = offspring;
    }

    let mut valid: Vec<&Individual> = Vec::new();
    for ind in &population {
        if check_validity(model, &ind.bits)? {
            valid.push(ind);
        }
    }
    let valid_fraction = valid.len() as f64 / population.len() as f64;
    stable_sort_by(&mut valid, |a, b| zitzler_cmp(&a.view, &b.view));
    let best = valid.first().map(|ind| Solution {
        pool_index: ind.origin,
        decisions: ind.bits.iter().map(|&b| f64::from(u8::from(b))).collect(),
        goals: ind.goals.clone(),
        valid: true,
    });
    Ok(RunResult {
        algorithm: "nga".into(),
        model: String::new(),
        seed: config.seed,
        selected: best.iter().cloned().collect(),
        best,
        log: InteractionLog {
            y_evaluations: evaluator.count(),
            ..InteractionLog::default()
        },
        valid_fraction,
        wall_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_examples() {
        let a = [true, true, true, true];
        let b = [false, false, false, false];
        assert_eq!(single_point_crossover(&a, &b, 1), vec![true, false, false, false]);
        assert_eq!(single_point_crossover(&a, &b, 3), vec![true, true, true, false]);
    }

    #[test]
    fn mutation_rate_one_over_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut bits = vec![false; 128];
        let trials = 4000;
        let flips: usize = (0..trials).map(|_| mutate(&mut bits, 1.0 / 128.0, &mut rng)).sum();
        // expected one flip per call; binomial sd over 512k draws is ~0.016 per call
        let mean = flips as f64 / trials as f64;
        assert!((mean - 1.0).abs() < 0.08, "mean flips {mean}");
    }
}
