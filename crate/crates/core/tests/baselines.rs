mod common;

use std::sync::Arc;

use isneak::baselines::{flash_run, nga_run, FlashConfig, NgaConfig};
use isneak::model_io::{
    enumerate_valid, load_candidate_table, CnfModel, Direction,
};
use isneak::preprocess::encode_pool;

use common::{goals, synthetic_pool};

#[test]
fn flash_spends_exactly_its_budget() {
    let pool = synthetic_pool(60, 0.25, 2, 1500);
    let r = flash_run(&pool, FlashConfig::seeded(4)).unwrap();
    assert_eq!(r.log.y_evaluations, 120);
    assert_eq!(r.selected.len(), 1);
    assert!(r.best.as_ref().unwrap().valid);
}

#[test]
fn flash_stops_when_the_pool_runs_out() {
    let pool = synthetic_pool(12, 0.0, 2, 90);
    assert!(pool.len() < 120);
    let r = flash_run(&pool, FlashConfig::seeded(1)).unwrap();
    assert_eq!(r.log.y_evaluations, pool.len());
    let bad = FlashConfig {
        m0: 120,
        budget: 120,
        seed: 0,
    };
    assert!(flash_run(&pool, bad).is_err());
}

#[test]
fn nga_spends_ten_thousand_evaluations_and_loses_validity() {
    let pool = synthetic_pool(60, 0.25, 3, 500);
    let r = nga_run(pool.pool(), NgaConfig::seeded(2)).unwrap();
    assert_eq!(r.log.y_evaluations, 10_000);
    assert!(r.valid_fraction < 1.0);
}

#[test]
fn nga_on_an_unconstrained_model_stays_valid() {
    let model = Arc::new(CnfModel::new(16, vec![], CnfModel::default_names(16)).unwrap());
    let table: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64, (16 - i) as f64]).collect();
    let spec = goals(&[("a", Direction::Minimize), ("b", Direction::Maximize)])
        .with_feature_values(table)
        .unwrap();
    let pool = enumerate_valid(model, spec, 300, 1).unwrap();
    let r = nga_run(&pool, NgaConfig::seeded(5)).unwrap();
    assert_eq!(r.valid_fraction, 1.0);
    assert!(r.best.is_some());
}

#[test]
fn nga_needs_a_model() {
    let spec = goals(&[("y", Direction::Minimize)]);
    let csv = "a,b,y\n0,1,3\n1,0,2\n1,1,1\n0,0,4\n";
    let pool = load_candidate_table(csv, spec).unwrap();
    assert!(nga_run(&pool, NgaConfig::seeded(0)).is_err());
}

#[test]
fn baselines_are_deterministic() {
    let pool = synthetic_pool(40, 0.5, 9, 800);
    let f = |s| flash_run(&pool, FlashConfig::seeded(s)).unwrap().without_timing().to_json();
    assert_eq!(f(3), f(3));
    let small = NgaConfig {
        generations: 10,
        ..NgaConfig::seeded(3)
    };
    let g = || nga_run(pool.pool(), small).unwrap().without_timing().to_json();
    assert_eq!(g(), g());
}

#[test]
fn baselines_leave_the_pool_untouched() {
    let pool = synthetic_pool(40, 0.5, 9, 300);
    let before = pool.pool().to_csv().unwrap();
    flash_run(&pool, FlashConfig::seeded(1)).unwrap();
    nga_run(pool.pool(), NgaConfig { generations: 5, ..NgaConfig::seeded(1) }).unwrap();
    assert_eq!(pool.pool().to_csv().unwrap(), before);
    let re = encode_pool(pool.pool().clone()).unwrap();
    assert_eq!(re.matrix(), pool.matrix());
}
