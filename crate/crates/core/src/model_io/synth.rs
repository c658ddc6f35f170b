//! Random feature models of controlled size and cross-tree constraint
//! density.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cnf::CnfModel;
use super::objectives::ObjectiveSpec;
use super::sat::{CdclSolver, SatBackend};
use crate::error::{contract, Error, Result};

const MAX_ATTEMPTS: usize = 32;
const REFERENCE_PRODUCTS: usize = 32;

/// A generated model together with its objectives.
#[derive(Clone, Debug)]
pub struct SyntheticModel {
    pub model: CnfModel,
    pub objectives: ObjectiveSpec,
    /// Number of cross-tree clauses appended after the tree encoding.
    pub cross_tree: usize,
}

#[derive(Clone, Copy)]
enum Group {
    Mandatory,
    Optional,
    Alternative,
    Or,
}

/// Generates a random feature tree encoded as CNF, plus
/// `ceil(constraint_ratio * features)` requires/excludes constraints, and
/// per-feature values for effort, cost, defects and success.
pub fn generate_synthetic_model(features: usize, constraint_ratio: f64, seed: u64) -> Result<SyntheticModel> {
    if features < 4 {
        return Err(contract("synthetic models need at least 4 features"));
    }
    if !(0.0..=1.5).contains(&constraint_ratio) {
        return Err(contract(format!("constraint ratio {constraint_ratio} outside [0, 1.5]")));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let perturbed = seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(perturbed);
        let (clauses, cross_tree) = random_model(features, constraint_ratio, &mut rng);
        let mut solver = CdclSolver::new(features, perturbed);
        for c in &clauses {
            solver.add_clause(c);
        }
        if solver.solve().is_none() {
            continue;
        }
        let names = (1..=features).map(|i| format!("F{i}")).collect();
        let model = CnfModel::new(features, clauses, names)?;
        let table = (0..features)
            .map(|_| {
                vec![
                    rng.gen_range(1.0..=10.0),
                    rng.gen_range(0.0..=5.0),
                    rng.gen_range(0.0..=4.0),
                    rng.gen_range(0.0..=10.0),
                ]
            })
            .collect();
        let objectives = ObjectiveSpec::feature_model_goals().with_feature_values(table)?;
        return Ok(SyntheticModel {
            model,
            objectives,
            cross_tree,
        });
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
    })
}

struct TreeGroup {
    parent: usize,
    kind: Group,
    children: Vec<usize>,
}

fn random_tree(features: usize, rng: &mut ChaCha8Rng) -> Vec<TreeGroup> {
    let mut groups = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut next = 1;
    while next < features {
        let parent = queue.pop_front().expect("every created feature is queued");
        for _ in 0..rng.gen_range(1..=3) {
            if next >= features {
                break;
            }
            let remaining = features - next;
            let mut kind = match rng.gen_range(0..20) {
                0..=4 => Group::Mandatory,
                5..=11 => Group::Optional,
                12..=15 => Group::Alternative,
                _ => Group::Or,
            };
            let size = match kind {
                Group::Mandatory | Group::Optional => 1,
                Group::Alternative | Group::Or => rng.gen_range(2..=4).min(remaining),
            };
            if size < 2 && matches!(kind, Group::Alternative | Group::Or) {
                kind = Group::Optional;
            }
            let children: Vec<usize> = (next..next + size).collect();
            next += size;
            queue.extend(&children);
            groups.push(TreeGroup { parent, kind, children });
        }
    }
    groups
}

/// A uniformly chosen product of the tree alone. Groups are stored in
/// creation order, so a parent is always decided before its children.
fn sample_product(features: usize, groups: &[TreeGroup], rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut on = vec![false; features];
    on[0] = true;
    for g in groups {
        if !on[g.parent] {
            continue;
        }
        match g.kind {
            Group::Mandatory => on[g.children[0]] = true,
            Group::Optional => on[g.children[0]] = rng.gen_bool(0.5),
            Group::Alternative => on[*g.children.choose(rng).expect("groups are non-empty")] = true,
            Group::Or => loop {
                for &c in &g.children {
                    on[c] = rng.gen_bool(0.5);
                }
                if g.children.iter().any(|&c| on[c]) {
                    break;
                }
            },
        }
    }
    on
}

fn random_model(features: usize, ratio: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<i32>>, usize) {
    let var = |f: usize| f as i32 + 1;
    let groups = random_tree(features, rng);
    let mut clauses = vec![vec![var(0)]];
    for g in &groups {
        for &c in &g.children {
            clauses.push(vec![-var(c), var(g.parent)]);
        }
        match g.kind {
            Group::Mandatory => clauses.push(vec![-var(g.parent), var(g.children[0])]),
            Group::Optional => {}
            Group::Alternative | Group::Or => {
                let mut c = vec![-var(g.parent)];
                c.extend(g.children.iter().map(|&ch| var(ch)));
                clauses.push(c);
                if matches!(g.kind, Group::Alternative) {
                    for (i, &a) in g.children.iter().enumerate() {
                        for &b in &g.children[i + 1..] {
                            clauses.push(vec![-var(a), -var(b)]);
                        }
                    }
                }
            }
        }
    }

    // Cross-tree constraints are kept only when every reference product
    // satisfies them, which keeps the model satisfiable and its space large.
    let references: Vec<Vec<bool>> = (0..REFERENCE_PRODUCTS)
        .map(|_| sample_product(features, &groups, rng))
        .collect();
    let wanted = (ratio * features as f64).ceil() as usize;
    let mut seen: HashSet<(usize, usize, bool)> = HashSet::new();
    let mut added = 0;
    let mut tries = 0;
    while added < wanted && tries < wanted * 1000 {
        tries += 1;
        let a = rng.gen_range(1..features);
        let b = rng.gen_range(1..features);
        if a == b {
            continue;
        }
        let requires = rng.gen_bool(0.5);
        let key = if requires { (a, b, true) } else { (a.min(b), a.max(b), false) };
        let holds = |p: &Vec<bool>| !p[a] || (p[b] == requires);
        if seen.contains(&key) || !references.iter().all(holds) {
            continue;
        }
        seen.insert(key);
        let rhs = if requires { var(b) } else { -var(b) };
        clauses.push(vec![-var(a), rhs]);
        added += 1;
    }
    (clauses, added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_io::cnf::check_validity;
    use crate::model_io::enumerate::enumerate_assignments;

    #[test]
    fn table_row_shapes() {
        let s = generate_synthetic_model(125, 0.25, 1).unwrap();
        assert_eq!(s.model.num_vars, 125);
        assert_eq!(s.objectives.len(), 4);
        assert_eq!(s.cross_tree, 32);
        let s = generate_synthetic_model(500, 1.0, 2).unwrap();
        assert_eq!(s.model.num_vars, 500);
        assert_eq!(s.cross_tree, 500);
        assert!(s.model.clauses.len() >= 500);
    }

    #[test]
    fn zero_ratio_is_tree_only() {
        let s = generate_synthetic_model(12, 0.0, 4).unwrap();
        assert_eq!(s.cross_tree, 0);
        let sols = enumerate_assignments(&s.model, 100_000, 0).unwrap();
        // brute force: count tree-consistent assignments
        let brute = (0..1u32 << 12)
            .filter(|m| {
                let bits: Vec<bool> = (0..12).map(|i| m >> i & 1 == 1).collect();
                check_validity(&s.model, &bits).unwrap()
            })
            .count();
        assert_eq!(sols.len(), brute);
    }

    #[test]
    fn generation_is_seeded() {
        let a = generate_synthetic_model(40, 0.5, 9).unwrap();
        let b = generate_synthetic_model(40, 0.5, 9).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.objectives, b.objectives);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_synthetic_model(3, 0.1, 0).is_err());
        assert!(generate_synthetic_model(10, 2.0, 0).is_err());
    }

    #[test]
    fn value_ranges() {
        let s = generate_synthetic_model(200, 0.25, 5).unwrap();
        for row in s.objectives.per_feature_values().unwrap() {
            assert!((1.0..=10.0).contains(&row[0]));
            assert!((0.0..=5.0).contains(&row[1]));
            assert!((0.0..=4.0).contains(&row[2]));
            assert!((0.0..=10.0).contains(&row[3]));
        }
    }
}
