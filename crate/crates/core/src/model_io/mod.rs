//! Model ingestion, satisfiability-backed enumeration, synthetic feature
//! models and candidate pools.

mod cnf;
mod enumerate;
mod objectives;
mod pool;
pub mod sat;
mod synth;

pub use cnf::{check_validity, parse_dimacs, CnfModel};
pub use enumerate::{enumerate_assignments, enumerate_valid, enumerate_with};
pub use objectives::{Direction, Goal, ObjectiveSpec};
pub use pool::{
    evaluate_goals, feature_goals, load_candidate_table, Attribute, AttributeKind, Candidate,
    CandidatePool, Decisions, GoalBounds, YEvaluator,
};
pub use synth::{generate_synthetic_model, SyntheticModel};
