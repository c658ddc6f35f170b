#![allow(dead_code)]

use std::sync::Arc;

use isneak::model_io::{
    enumerate_valid, generate_synthetic_model, load_candidate_table, Direction, Goal, ObjectiveSpec,
};
use isneak::preprocess::{encode_pool, EncodedPool};

/// Enumerated and encoded pool over a synthetic feature model.
pub fn synthetic_pool(features: usize, ratio: f64, seed: u64, count: usize) -> Arc<EncodedPool> {
    let s = generate_synthetic_model(features, ratio, seed).expect("model generates");
    let pool = enumerate_valid(Arc::new(s.model), s.objectives, count, seed).expect("model enumerates");
    Arc::new(encode_pool(pool).expect("pool encodes"))
}

pub fn goals(spec: &[(&str, Direction)]) -> ObjectiveSpec {
    ObjectiveSpec::new(
        spec.iter()
            .map(|(n, d)| Goal {
                name: n.to_string(),
                direction: *d,
            })
            .collect(),
    )
    .expect("goal list is valid")
}

/// Pool from boolean decision rows and goal rows.
pub fn table_pool(rows: &[Vec<bool>], goal_rows: &[Vec<f64>], spec: ObjectiveSpec) -> Arc<EncodedPool> {
    let width = rows[0].len();
    let mut csv: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    csv.extend(spec.goals().iter().map(|g| g.name.clone()));
    let mut text = csv.join(",") + "\n";
    for (r, g) in rows.iter().zip(goal_rows) {
        let mut cells: Vec<String> = r.iter().map(|&b| u8::from(b).to_string()).collect();
        cells.extend(g.iter().map(|v| v.to_string()));
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    Arc::new(encode_pool(load_candidate_table(&text, spec).expect("table parses")).expect("pool encodes"))
}
