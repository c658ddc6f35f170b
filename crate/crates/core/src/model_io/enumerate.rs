use std::sync::Arc;

use super::cnf::CnfModel;
use super::objectives::ObjectiveSpec;
use super::pool::CandidatePool;
use super::sat::{CdclSolver, SatBackend};
use crate::error::{contract, Error, Result};

/// Enumerates up to `count` distinct satisfying assignments by repeatedly
/// solving and adding a clause that blocks the assignment just found.
pub fn enumerate_assignments(model: &CnfModel, count: usize, seed: u64) -> Result<Vec<Vec<bool>>> {
    enumerate_with(CdclSolver::new(model.num_vars, seed), model, count)
}

/// Same as [`enumerate_assignments`] over any backend.
pub fn enumerate_with<S: SatBackend>(mut solver: S, model: &CnfModel, count: usize) -> Result<Vec<Vec<bool>>> {
    if count == 0 {
        return Err(contract("count must be at least 1"));
    }
    for clause in &model.clauses {
        solver.add_clause(clause);
    }
    let mut out = Vec::with_capacity(count.min(1 << 16));
    while out.len() < count {
        let Some(bits) = solver.solve() else { break };
        let block: Vec<i32> = bits
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let v = i as i32 + 1;
                if b {
                    -v
                } else {
                    v
                }
            })
            .collect();
        solver.add_clause(&block);
        out.push(bits);
    }
    if out.is_empty() {
        return Err(Error::EmptyPool(describe(model)));
    }
    Ok(out)
}

/// Enumerates valid configurations and attaches their goals.
pub fn enumerate_valid(
    model: Arc<CnfModel>,
    objectives: ObjectiveSpec,
    count: usize,
    seed: u64,
) -> Result<CandidatePool> {
    let assignments = enumerate_assignments(&model, count, seed)?;
    CandidatePool::from_assignments(model, objectives, assignments)
}

fn describe(model: &CnfModel) -> String {
    format!("p cnf {} {}", model.num_vars, model.clauses.len())
}
