use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// `+1` when maximizing, `-1` when minimizing.
    pub fn weight(self) -> f64 {
        match self {
            Direction::Minimize => -1.0,
            Direction::Maximize => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub name: String,
    pub direction: Direction,
}

/// Named goals plus, for feature models, the per-variable contribution to
/// each goal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    goals: Vec<Goal>,
    /// `per_feature_values[v][j]`: contribution of variable `v + 1` to goal `j`.
    per_feature_values: Option<Vec<Vec<f64>>>,
}

impl ObjectiveSpec {
    pub fn new(goals: Vec<Goal>) -> Result<Self> {
        if goals.is_empty() {
            return Err(contract("at least one goal is required"));
        }
        let mut names = HashSet::new();
        for g in &goals {
            if !names.insert(g.name.as_str()) {
                return Err(Error::Schema(format!("duplicate goal `{}`", g.name)));
            }
        }
        Ok(Self {
            goals,
            per_feature_values: None,
        })
    }

    pub fn with_feature_values(mut self, table: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(row) = table.iter().find(|r| r.len() != self.goals.len()) {
            return Err(contract(format!(
                "feature value row has {} entries for {} goals",
                row.len(),
                self.goals.len()
            )));
        }
        self.per_feature_values = Some(table);
        Ok(self)
    }

    /// The four goals attached to synthetic feature models.
    pub fn feature_model_goals() -> Self {
        let g = |name: &str, direction| Goal {
            name: name.to_string(),
            direction,
        };
        Self::new(vec![
            g("effort", Direction::Minimize),
            g("cost", Direction::Minimize),
            g("defects", Direction::Minimize),
            g("success", Direction::Maximize),
        ])
        .expect("static goal list")
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.goals.iter().map(|g| g.direction.weight()).collect()
    }

    pub fn per_feature_values(&self) -> Option<&[Vec<f64>]> {
        self.per_feature_values.as_deref()
    }

    /// Parses the objective sidecar:
    /// `{"objectives":[{"column":"cost","goal":"minimize"}, ...]}`.
    pub fn from_sidecar_json(text: &str) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(text)?;
        Self::new(
            sidecar
                .objectives
                .into_iter()
                .map(|o| Goal {
                    name: o.column,
                    direction: o.goal,
                })
                .collect(),
        )
    }

    pub fn to_sidecar_json(&self) -> String {
        let sidecar = Sidecar {
            objectives: self
                .goals
                .iter()
                .map(|g| SidecarEntry {
                    column: g.name.clone(),
                    goal: g.direction,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes")
    }

    /// Parses a per-feature value table with header `feature,<goal>...`.
    /// Rows are matched to model variables by name.
    pub fn parse_feature_table(&self, csv_text: &str, var_names: &[String]) -> Result<Vec<Vec<f64>>> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(csv_text.as_bytes());
        let headers = rdr.headers()?.clone();
        let feature_col = headers
            .iter()
            .position(|h| h == "feature")
            .ok_or_else(|| Error::Schema("feature table lacks a `feature` column".into()))?;
        let goal_cols = self
            .goals
            .iter()
            .map(|g| {
                headers
                    .iter()
                    .position(|h| h == g.name)
                    .ok_or_else(|| Error::Schema(format!("feature table lacks goal column `{}`", g.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table: Vec<Option<Vec<f64>>> = vec![None; var_names.len()];
        for (row_idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let name = &rec[feature_col];
            let v = var_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Schema(format!("unknown feature `{name}`")))?;
            let vals = goal_cols
                .iter()
                .map(|&c| {
                    rec[c].parse::<f64>().map_err(|_| Error::Parse {
                        line: row_idx + 2,
                        message: format!("non-numeric value `{}`", &rec[c]),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table[v] = Some(vals);
        }
        let zeros = vec![0.0; self.goals.len()];
        Ok(table.into_iter().map(|r| r.unwrap_or_else(|| zeros.clone())).collect())
    }

    pub fn feature_table_csv(&self, var_names: &[String]) -> Option<String> {
        let table = self.per_feature_values.as_ref()?;
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["feature".to_string()];
        header.extend(self.goals.iter().map(|g| g.name.clone()));
        wtr.write_record(&header).ok()?;
        for (name, row) in var_names.iter().zip(table) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            wtr.write_record(&rec).ok()?;
        }
        String::from_utf8(wtr.into_inner().ok()?).ok()
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    objectives: Vec<SidecarEntry>,
}

#[derive(Serialize, Deserialize)]
struct SidecarEntry {
    column: String,
    goal: Direction,
}
