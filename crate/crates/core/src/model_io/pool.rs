use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cnf::{check_validity, CnfModel};
use super::objectives::ObjectiveSpec;
use crate::error::{contract, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Boolean,
    Numeric,
    /// Distinct symbols; candidate values index into this list.
    Symbolic(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Decision assignment of one candidate.
#[derive(Clone, Debug, PartialEq)]
pub enum Decisions {
    /// One boolean per model variable.
    Bits(Vec<bool>),
    /// Raw attribute values; booleans as 0/1, symbols as indices.
    Values(Vec<f64>),
}

impl Decisions {
    pub fn len(&self) -> usize {
        match self {
            Decisions::Bits(b) => b.len(),
            Decisions::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, attr: usize) -> f64 {
        match self {
            Decisions::Bits(b) => f64::from(u8::from(b[attr])),
            Decisions::Values(v) => v[attr],
        }
    }

    pub fn bits(&self) -> Option<&[bool]> {
        match self {
            Decisions::Bits(b) => Some(b),
            Decisions::Values(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub decisions: Decisions,
    pub goals: Option<Vec<f64>>,
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalBounds {
    pub min: f64,
    pub max: f64,
}

/// The universe of candidates a search prunes. Immutable once built.
#[derive(Clone, Debug)]
pub struct CandidatePool {
    attributes: Vec<Attribute>,
    model: Option<Arc<CnfModel>>,
    objectives: ObjectiveSpec,
    candidates: Vec<Candidate>,
    goal_bounds: Vec<GoalBounds>,
}

impl CandidatePool {
    /// Builds a pool, checking that every candidate matches the schema and
    /// carries a full goal vector.
    pub fn new(
        attributes: Vec<Attribute>,
        model: Option<Arc<CnfModel>>,
        objectives: ObjectiveSpec,
        candidates: Vec<Candidate>,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(contract("pool has no candidates"));
        }
        for (i, c) in candidates.iter().enumerate() {
            if c.decisions.len() != attributes.len() {
                return Err(contract(format!(
                    "candidate {i} has {} attributes, schema has {}",
                    c.decisions.len(),
                    attributes.len()
                )));
            }
            match &c.goals {
                Some(g) if g.len() == objectives.len() => {}
                _ => return Err(contract(format!("candidate {i} lacks a full goal vector"))),
            }
        }
        let goal_bounds = (0..objectives.len())
            .map(|j| {
                let (min, max) = candidates.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    let v = c.goals.as_ref().expect("checked")[j];
                    (lo.min(v), hi.max(v))
                });
                GoalBounds { min, max }
            })
            .collect();
        Ok(Self {
            attributes,
            model,
            objectives,
            candidates,
            goal_bounds,
        })
    }

    /// Pool over assignments of a feature model; goals come from the
    /// per-feature value table and validity from the clauses.
    pub fn from_assignments(
        model: Arc<CnfModel>,
        objectives: ObjectiveSpec,
        assignments: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let attributes = model
            .var_names
            .iter()
            .map(|n| Attribute {
                name: n.clone(),
                kind: AttributeKind::Boolean,
            })
            .collect();
        let candidates = assignments
            .into_iter()
            .map(|bits| {
                let goals = feature_goals(&bits, &objectives)?;
                let valid = check_validity(&model, &bits)?;
                Ok(Candidate {
                    decisions: Decisions::Bits(bits),
                    goals: Some(goals),
                    valid,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(attributes, Some(model), objectives, candidates)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn model(&self) -> Option<&Arc<CnfModel>> {
        self.model.as_ref()
    }

    pub fn objectives(&self) -> &ObjectiveSpec {
        &self.objectives
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, i: usize) -> &Candidate {
        &self.candidates[i]
    }

    pub fn goal_bounds(&self) -> &[GoalBounds] {
        &self.goal_bounds
    }

    /// Ground-truth goals of candidate `i`, bypassing evaluation accounting.
    /// Only scoring code (ranking the whole pool) should call this.
    pub fn true_goals(&self, i: usize) -> &[f64] {
        self.candidates[i].goals.as_deref().expect("pool candidates carry goals")
    }

    /// Validity of candidate `i`: re-checked against the model when there is
    /// one, otherwise the stored flag.
    pub fn is_valid(&self, i: usize) -> bool {
        let c = &self.candidates[i];
        match (&self.model, c.decisions.bits()) {
            (Some(m), Some(bits)) => check_validity(m, bits).unwrap_or(false),
            _ => c.valid,
        }
    }

    /// Human-readable value of attribute `attr` for candidate `i`.
    pub fn value_label(&self, i: usize, attr: usize) -> String {
        let v = self.candidates[i].decisions.value(attr);
        match &self.attributes[attr].kind {
            AttributeKind::Boolean => (v != 0.0).to_string(),
            AttributeKind::Numeric => format!("{v}"),
            AttributeKind::Symbolic(symbols) => symbols[v as usize].clone(),
        }
    }

    /// Writes the pool as CSV: decision columns, then goal columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.attributes.iter().map(|a| a.name.clone()).collect();
        header.extend(self.objectives.goals().iter().map(|g| g.name.clone()));
        wtr.write_record(&header)?;
        for (i, c) in self.candidates.iter().enumerate() {
            let mut rec: Vec<String> = (0..self.attributes.len())
                .map(|a| match &self.attributes[a].kind {
                    AttributeKind::Boolean => format!("{}", c.decisions.value(a) as u8),
                    _ => self.value_label(i, a),
                })
                .collect();
            rec.extend(self.true_goals(i).iter().map(|g| format!("{g}")));
            wtr.write_record(&rec)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Sum of per-feature goal contributions over the variables set true.
pub fn feature_goals(bits: &[bool], spec: &ObjectiveSpec) -> Result<Vec<f64>> {
    let table = spec.per_feature_values().ok_or_else(|| {
        Error::Unsupported(
            "no per-feature value table; supply pre-evaluated goals through a candidate CSV".into(),
        )
    })?;
    if table.len() != bits.len() {
        return Err(contract(format!(
            "feature table covers {} variables, assignment has {}",
            table.len(),
            bits.len()
        )));
    }
    let mut goals = vec![0.0; spec.len()];
    for (row, _) in table.iter().zip(bits).filter(|(_, &b)| b) {
        for (g, v) in goals.iter_mut().zip(row) {
            *g += v;
        }
    }
    Ok(goals)
}

/// Goals of a candidate computed from the per-feature table.
pub fn evaluate_goals(candidate: &Candidate, spec: &ObjectiveSpec) -> Result<Vec<f64>> {
    match &candidate.decisions {
        Decisions::Bits(bits) => feature_goals(bits, spec),
        Decisions::Values(_) => Err(Error::Unsupported(
            "goals of table candidates come from their CSV row".into(),
        )),
    }
}

/// Per-run y-evaluation accounting. Evaluating a pool member is charged once
/// (later calls hit the cache); evaluating an off-pool assignment is always
/// charged.
#[derive(Clone, Debug)]
pub struct YEvaluator {
    seen: Vec<bool>,
    count: usize,
}

impl YEvaluator {
    pub fn new(pool: &CandidatePool) -> Self {
        Self {
            seen: vec![false; pool.len()],
            count: 0,
        }
    }

    pub fn evaluate<'p>(&mut self, pool: &'p CandidatePool, i: usize) -> &'p [f64] {
        if !self.seen[i] {
            self.seen[i] = true;
            self.count += 1;
        }
        pool.true_goals(i)
    }

    pub fn evaluate_bits(&mut self, bits: &[bool], spec: &ObjectiveSpec) -> Result<Vec<f64>> {
        let goals = feature_goals(bits, spec)?;
        self.count += 1;
        Ok(goals)
    }

    pub fn is_evaluated(&self, i: usize) -> bool {
        self.seen[i]
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

enum ColumnKind {
    Boolean,
    Numeric,
    Symbolic,
}

fn parse_bool(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "0" | "false" | "f" => Some(false),
        "1" | "true" | "t" => Some(true),
        _ => None,
    }
}

/// Loads a pre-evaluated candidate table. Columns named by `spec` are goals;
/// every other column is a decision attribute.
pub fn load_candidate_table(csv_text: &str, spec: ObjectiveSpec) -> Result<CandidatePool> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = rdr.headers()?.clone();
    let goal_cols = spec
        .goals()
        .iter()
        .map(|g| {
            headers
                .iter()
                .position(|h| h == g.name)
                .ok_or_else(|| Error::Schema(format!("missing goal column `{}`", g.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let decision_cols: Vec<usize> = (0..headers.len()).filter(|c| !goal_cols.contains(c)).collect();
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;

    let kinds: Vec<ColumnKind> = decision_cols
        .iter()
        .map(|&c| {
            if rows.iter().all(|r| parse_bool(&r[c]).is_some()) {
                ColumnKind::Boolean
            } else if rows.iter().all(|r| r[c].parse::<f64>().is_ok()) {
                ColumnKind::Numeric
            } else {
                ColumnKind::Symbolic
            }
        })
        .collect();
    let mut attributes: Vec<Attribute> = decision_cols
        .iter()
        .zip(&kinds)
        .map(|(&c, k)| Attribute {
            name: headers[c].to_string(),
            kind: match k {
                ColumnKind::Boolean => AttributeKind::Boolean,
                ColumnKind::Numeric => AttributeKind::Numeric,
                ColumnKind::Symbolic => AttributeKind::Symbolic(Vec::new()),
            },
        })
        .collect();
    let all_bool = kinds.iter().all(|k| matches!(k, ColumnKind::Boolean));

    let mut candidates = Vec::with_capacity(rows.len());
    for (row_idx, rec) in rows.iter().enumerate() {
        let goals = goal_cols
            .iter()
            .map(|&c| {
                rec[c].parse::<f64>().map_err(|_| Error::Parse {
                    line: row_idx + 2,
                    message: format!("row {row_idx}: non-numeric goal `{}` in `{}`", &rec[c], &headers[c]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let decisions = if all_bool {
            Decisions::Bits(
                decision_cols
                    .iter()
                    .map(|&c| parse_bool(&rec[c]).expect("checked"))
                    .collect(),
            )
        } else {
            let mut vals = Vec::with_capacity(decision_cols.len());
            for (a, &c) in decision_cols.iter().enumerate() {
                let cell = &rec[c];
                let v = match (&kinds[a], &mut attributes[a].kind) {
                    (ColumnKind::Boolean, _) => f64::from(u8::from(parse_bool(cell).expect("checked"))),
                    (ColumnKind::Numeric, _) => cell.parse::<f64>().expect("checked"),
                    (ColumnKind::Symbolic, AttributeKind::Symbolic(symbols)) => {
                        match symbols.iter().position(|s| s == cell) {
                            Some(p) => p as f64,
                            None => {
                                symbols.push(cell.to_string());
                                (symbols.len() - 1) as f64
                            }
                        }
                    }
                    _ => unreachable!("kind mirrors column kind"),
                };
                vals.push(v);
            }
            Decisions::Values(vals)
        };
        candidates.push(Candidate {
            decisions,
            goals: Some(goals),
            valid: true,
        });
    }
    CandidatePool::new(attributes, None, spec, candidates)
}
