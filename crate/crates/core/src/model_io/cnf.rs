use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// A boolean model in conjunctive normal form.
///
/// Literals use the DIMACS convention: `v` means variable `v` is true, `-v`
/// means it is false, variables are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfModel {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    pub var_names: Vec<String>,
}

impl CnfModel {
    /// Builds a model and checks its invariants.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>, var_names: Vec<String>) -> Result<Self> {
        if num_vars == 0 {
            return Err(contract("model must declare at least one variable"));
        }
        if var_names.len() != num_vars {
            return Err(contract(format!(
                "{} variable names for {} variables",
                var_names.len(),
                num_vars
            )));
        }
        let mut seen = HashSet::with_capacity(num_vars);
        for name in &var_names {
            if name.is_empty() || !seen.insert(name.as_str()) {
                return Err(contract(format!("variable name `{name}` is empty or repeated")));
            }
        }
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(contract(format!("clause {i} is empty")));
            }
            if let Some(&lit) = clause.iter().find(|l| !literal_in_range(**l, num_vars)) {
                return Err(contract(format!("clause {i}: literal {lit} out of range")));
            }
        }
        Ok(Self {
            num_vars,
            clauses,
            var_names,
        })
    }

    /// Default names `x1..xn`.
    pub fn default_names(num_vars: usize) -> Vec<String> {
        (1..=num_vars).map(|i| format!("x{i}")).collect()
    }

    /// Renders the model as DIMACS, including `c var` naming lines.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.var_names.iter().enumerate() {
            let _ = writeln!(out, "c var {} {}", i + 1, name);
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

fn literal_in_range(lit: i32, num_vars: usize) -> bool {
    lit != 0 && (lit.unsigned_abs() as usize) <= num_vars
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses DIMACS CNF text.
///
/// Comment lines `c var <i> <name>` name variable `i`; all other comments are
/// ignored.
pub fn parse_dimacs(text: &str) -> Result<CnfModel> {
    let mut header: Option<(usize, usize)> = None;
    let mut named: Vec<(usize, usize, String)> = Vec::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('c') {
            let mut toks = line.split_whitespace();
            if toks.next() == Some("c") && toks.next() == Some("var") {
                let i = toks
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(lineno, "malformed `c var` line"))?;
                let name = toks.collect::<Vec<_>>().join(" ");
                if name.is_empty() {
                    return Err(parse_err(lineno, "missing variable name"));
                }
                named.push((lineno, i, name));
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(parse_err(lineno, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = toks[2]
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("bad variable count `{}`", toks[2])))?;
            let ncl = toks[3]
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("bad clause count `{}`", toks[3])))?;
            if vars == 0 {
                return Err(parse_err(lineno, "variable count must be positive"));
            }
            header = Some((vars, ncl));
            continue;
        }
        let (vars, _) = header.ok_or_else(|| parse_err(lineno, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(parse_err(lineno, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else if !literal_in_range(lit, vars) {
                return Err(parse_err(
                    lineno,
                    format!("literal {lit} out of range 1..={vars}"),
                ));
            } else {
                current.push(lit);
            }
        }
    }

    let (vars, ncl) = header.ok_or_else(|| parse_err(last_line, "missing problem line"))?;
    if !current.is_empty() {
        return Err(parse_err(last_line, "unterminated clause at end of input"));
    }
    if clauses.len() != ncl {
        return Err(parse_err(
            last_line,
            format!("header declares {ncl} clauses, found {}", clauses.len()),
        ));
    }

    let mut names = CnfModel::default_names(vars);
    for (lineno, i, name) in named {
        if i == 0 || i > vars {
            return Err(parse_err(lineno, format!("variable {i} out of range")));
        }
        names[i - 1] = name;
    }
    CnfModel::new(vars, clauses, names).map_err(|e| parse_err(last_line, e.to_string()))
}

/// True iff every clause has at least one satisfied literal.
pub fn check_validity(model: &CnfModel, bits: &[bool]) -> Result<bool> {
    if bits.len() != model.num_vars {
        return Err(contract(format!(
            "assignment has {} bits, model has {} variables",
            bits.len(),
            model.num_vars
        )));
    }
    Ok(model.clauses.iter().all(|clause| {
        clause
            .iter()
            .any(|&lit| bits[lit.unsigned_abs() as usize - 1] == (lit > 0))
    }))
}
