//! Domination predicates, information-gain attribute ranking and the
//! construction of preference questions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::model_io::GoalBounds;
use crate::preprocess::EncodedPool;

/// Default cap on the number of attributes shown per question.
pub const DEFAULT_QUESTION_SIZE: usize = 6;

/// A goal vector normalized to 0..1 by pool bounds, with its direction
/// weights (+1 maximize, -1 minimize).
#[derive(Clone, Debug, PartialEq)]
pub struct GoalView {
    pub normalized: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GoalView {
    /// Normalizes `raw` against `bounds`. Constant goals map to 0.5; values
    /// outside the bounds are clamped.
    pub fn new(raw: &[f64], bounds: &[GoalBounds], weights: &[f64]) -> Self {
        debug_assert_eq!(raw.len(), bounds.len());
        let normalized = raw
            .iter()
            .zip(bounds)
            .map(|(&v, b)| {
                if b.max > b.min {
                    ((v - b.min) / (b.max - b.min)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect();
        Self {
            normalized,
            weights: weights.to_vec(),
        }
    }

    pub fn n_goals(&self) -> usize {
        self.normalized.len()
    }
}

/// Classical Pareto dominance: `x` is no worse on every goal and strictly
/// better on at least one.
pub fn boolean_dominates(x: &GoalView, y: &GoalView) -> Result<bool> {
    if x.n_goals() != y.n_goals() || x.weights != y.weights {
        return Err(contract("goal views differ in dimension or weights"));
    }
    let mut strictly = false;
    for ((a, b), w) in x.normalized.iter().zip(&y.normalized).zip(&x.weights) {
        let (a, b) = (a * w, b * w);
        if a < b {
            return Ok(false);
        }
        if a > b {
            strictly = true;
        }
    }
    Ok(strictly)
}

/// `sum_j -exp(w_j (x_j - y_j) / divisor)`; more negative means `x` loses
/// more by moving to `y`, i.e. `x` is better.
pub fn loss(x: &GoalView, y: &GoalView, divisor: f64) -> f64 {
    x.normalized
        .iter()
        .zip(&y.normalized)
        .zip(&x.weights)
        .map(|((a, b), w)| -(w * (a - b) / divisor).exp())
        .sum()
}

/// Continuous domination: true when `x` is worse than `y`.
pub fn zitzler_worse(x: &GoalView, y: &GoalView) -> bool {
    let n = x.n_goals() as f64;
    loss(x, y, n) > loss(y, x, n)
}

/// Sort order under [`zitzler_worse`]: better candidates first.
pub fn zitzler_cmp(x: &GoalView, y: &GoalView) -> Ordering {
    if zitzler_worse(x, y) {
        Ordering::Greater
    } else if zitzler_worse(y, x) {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Continuous domination with an extra, maximized preference-support term.
/// `p_x`, `p_y` are the fractions of each side carrying the values the
/// oracle picked. Every term is divided by `n + 1`.
pub fn pref_worse(x: &GoalView, y: &GoalView, p_x: f64, p_y: f64) -> bool {
    let d = x.n_goals() as f64 + 1.0;
    let lx = loss(x, y, d) - ((p_x - p_y) / d).exp();
    let ly = loss(y, x, d) - ((p_y - p_x) / d).exp();
    lx > ly
}

fn entropy_of(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of each attribute about a binary label over `members`,
/// sorted by descending gain (ties by ascending attribute id).
pub fn infogain_rank(
    pool: &EncodedPool,
    members: &[usize],
    labels: &[bool],
    attributes: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if members.len() != labels.len() {
        return Err(contract("one label per member is required"));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(contract("information gain needs both labels present"));
    }
    let base = entropy_of(&[positives, labels.len() - positives]);
    let n = members.len() as f64;
    let mut ranked: Vec<(usize, f64)> = attributes
        .iter()
        .map(|&attr| {
            let arity = pool.scheme().attributes[attr].arity();
            let mut table = vec![[0usize; 2]; arity];
            for (&r, &l) in members.iter().zip(labels) {
                table[pool.code(r, attr)][usize::from(l)] += 1;
            }
            let conditional: f64 = table
                .iter()
                .map(|cell| {
                    let nv = (cell[0] + cell[1]) as f64;
                    nv / n * entropy_of(cell)
                })
                .sum();
            (attr, (base - conditional).max(0.0))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttrValue {
    pub attribute: usize,
    pub code: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
}

/// Two sets of attribute values, taken from one representative of each half
/// of a cluster node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Question {
    pub id: usize,
    /// Arena id of the questioned tree node.
    pub node: usize,
    pub option_a: Vec<AttrValue>,
    pub option_b: Vec<AttrValue>,
}

impl Question {
    pub fn size(&self) -> usize {
        self.option_a.len()
    }

    pub fn attributes(&self) -> impl Iterator<Item = usize> + '_ {
        self.option_a.iter().map(|v| v.attribute)
    }

    pub fn option(&self, choice: Choice) -> &[AttrValue] {
        match choice {
            Choice::A => &self.option_a,
            Choice::B => &self.option_b,
        }
    }

    /// Wire form with human-readable attribute names and value labels.
    pub fn to_view(&self, pool: &EncodedPool) -> QuestionView {
        let render = |vals: &[AttrValue]| {
            vals.iter()
                .map(|v| OptionRow {
                    attr: pool.attribute_name(v.attribute).to_string(),
                    value: pool.label(v.attribute, v.code),
                })
                .collect()
        };
        QuestionView {
            id: self.id,
            option_a: render(&self.option_a),
            option_b: render(&self.option_b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionRow {
    pub attr: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub id: usize,
    #[serde(rename = "optionA")]
    pub option_a: Vec<OptionRow>,
    #[serde(rename = "optionB")]
    pub option_b: Vec<OptionRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub choice: Choice,
    pub p_east: f64,
    pub p_west: f64,
}

/// Attributes on which two rows take different values.
pub fn differing_attributes(pool: &EncodedPool, item1: usize, item2: usize) -> Vec<usize> {
    (0..pool.num_attributes())
        .filter(|&a| pool.code(item1, a) != pool.code(item2, a))
        .collect()
}

/// Builds the question for a node whose halves are `east` and `west`, with
/// representatives `item1` (east) and `item2` (west). Shows the `cap` most
/// informative attributes that differ between the representatives and have
/// not been asked yet; `None` when no such attribute remains.
pub fn build_question(
    pool: &EncodedPool,
    node: usize,
    east: &[usize],
    west: &[usize],
    (item1, item2): (usize, usize),
    asked: &[bool],
    cap: usize,
) -> Option<Question> {
    let open: Vec<usize> = differing_attributes(pool, item1, item2)
        .into_iter()
        .filter(|&a| !asked[a])
        .collect();
    if open.is_empty() || cap == 0 {
        return None;
    }
    let members: Vec<usize> = east.iter().chain(west).copied().collect();
    let labels: Vec<bool> = east.iter().map(|_| false).chain(west.iter().map(|_| true)).collect();
    let ranked = match infogain_rank(pool, &members, &labels, &open) {
        Ok(r) => r.into_iter().map(|p| p.0).collect(),
        // a one-sided node carries no label information; keep attribute order
        Err(_) => open,
    };
    let chosen: Vec<usize> = ranked.into_iter().take(cap).collect();
    let value = |row: usize| {
        chosen
            .iter()
            .map(|&a| AttrValue {
                attribute: a,
                code: pool.code(row, a),
            })
            .collect()
    };
    Some(Question {
        id: 0,
        node,
        option_a: value(item1),
        option_b: value(item2),
    })
}

/// Fraction of `members` carrying at least one of `selected`; 0 for an
/// empty half.
pub fn half_support(pool: &EncodedPool, members: &[usize], selected: &[AttrValue]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let hits = members
        .iter()
        .filter(|&&r| selected.iter().any(|v| pool.code(r, v.attribute) == v.code))
        .count();
    hits as f64 / members.len() as f64
}
