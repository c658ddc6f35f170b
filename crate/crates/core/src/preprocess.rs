//! Discretization of numeric attributes and one-hot encoding of a pool.
//!
//! Numeric columns start as equal-width bins that are then merged wherever
//! combining two neighbours does not increase their pooled spread. Every
//! attribute then maps onto a block of boolean columns in a packed
//! [`BitMatrix`]; boolean attributes take a single column (true is 1).

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::model_io::{AttributeKind, CandidatePool};

pub const DEFAULT_BINS: usize = 16;

/// One range of a discretized attribute. `lo` is inclusive, `hi` exclusive
/// except for the last bin of an attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation of the member values.
    pub sd: f64,
}

impl Bin {
    fn empty(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            n: 0,
            mean: 0.0,
            sd: 0.0,
        }
    }

    fn from_values(lo: f64, hi: f64, values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::empty(lo, hi);
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        Self {
            lo,
            hi,
            n,
            mean,
            sd: var.sqrt(),
        }
    }

    /// The bin holding the union of both members, from pooled statistics.
    pub fn combine(&self, other: &Bin) -> Bin {
        let n = self.n + other.n;
        let (lo, hi) = (self.lo.min(other.lo), self.hi.max(other.hi));
        if n == 0 {
            return Bin::empty(lo, hi);
        }
        let (ni, nj, nk) = (self.n as f64, other.n as f64, n as f64);
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nj / nk;
        let m2 = self.sd.powi(2) * ni + other.sd.powi(2) * nj + delta * delta * ni * nj / nk;
        Bin {
            lo,
            hi,
            n,
            mean,
            sd: (m2 / nk).max(0.0).sqrt(),
        }
    }

    fn contains(&self, v: f64, last: bool) -> bool {
        v >= self.lo && (v < self.hi || (last && v <= self.hi))
    }
}

/// Splits `[min, max]` of `values` into `count` equal-width bins; a constant
/// column yields a single degenerate bin.
pub fn equal_width_bins_with(values: &[f64], count: usize) -> Result<Vec<Bin>> {
    if values.is_empty() {
        return Err(contract("cannot bin an empty column"));
    }
    if count == 0 {
        return Err(contract("bin count must be positive"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(contract("column holds non-finite values"));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min == max {
        return Ok(vec![Bin::from_values(min, max, values)]);
    }
    let width = (max - min) / count as f64;
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); count];
    for &v in values {
        let idx = (((v - min) / width).floor() as usize).min(count - 1);
        members[idx].push(v);
    }
    Ok(members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let lo = min + width * i as f64;
            let hi = if i + 1 == count { max } else { min + width * (i + 1) as f64 };
            Bin::from_values(lo, hi, m)
        })
        .collect())
}

/// [`equal_width_bins_with`] at the default 16 bins.
pub fn equal_width_bins(values: &[f64]) -> Result<Vec<Bin>> {
    equal_width_bins_with(values, DEFAULT_BINS)
}

fn should_merge(a: &Bin, b: &Bin) -> bool {
    if a.n == 0 || b.n == 0 {
        return true;
    }
    let k = a.combine(b);
    let nk = k.n as f64;
    let bound = (a.n as f64 / nk) * a.sd + (b.n as f64 / nk) * b.sd;
    k.sd <= bound + 1e-12 * bound.abs().max(1.0)
}

/// Merges adjacent bins until no neighbouring pair satisfies
/// `sd_k <= (n_i/n_k) sd_i + (n_j/n_k) sd_j`. Empty bins always merge. The scan
/// runs left to right and restarts after every merge.
pub fn merge_bins(mut bins: Vec<Bin>) -> Vec<Bin> {
    'scan: loop {
        for i in 0..bins.len().saturating_sub(1) {
            if should_merge(&bins[i], &bins[i + 1]) {
                let right = bins.remove(i + 1);
                bins[i] = bins[i].combine(&right);
                continue 'scan;
            }
        }
        return bins;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ValueEncoding {
    /// One column, set when the attribute is true.
    Boolean,
    Bins(Vec<Bin>),
    Symbols(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeEncoding {
    pub name: String,
    pub encoding: ValueEncoding,
    pub first_column: usize,
}

impl AttributeEncoding {
    pub fn width(&self) -> usize {
        match &self.encoding {
            ValueEncoding::Boolean => 1,
            ValueEncoding::Bins(b) => b.len(),
            ValueEncoding::Symbols(s) => s.len(),
        }
    }

    /// Number of distinct value codes.
    pub fn arity(&self) -> usize {
        match &self.encoding {
            ValueEncoding::Boolean => 2,
            _ => self.width(),
        }
    }

    /// Maps a raw value to its code: 0/1 for booleans, bin or symbol index
    /// otherwise.
    pub fn code_of(&self, value: f64) -> Result<usize> {
        let out_of_range = || Error::OutOfRange {
            attribute: self.name.clone(),
            value,
        };
        match &self.encoding {
            ValueEncoding::Boolean => Ok(usize::from(value != 0.0)),
            ValueEncoding::Symbols(s) => {
                let i = value as usize;
                if value >= 0.0 && i < s.len() && i as f64 == value {
                    Ok(i)
                } else {
                    Err(out_of_range())
                }
            }
            ValueEncoding::Bins(bins) => {
                let last = bins.len() - 1;
                bins.iter()
                    .position(|b| b.contains(value, false))
                    .or_else(|| bins[last].contains(value, true).then_some(last))
                    .ok_or_else(out_of_range)
            }
        }
    }

    pub fn label(&self, code: usize) -> String {
        match &self.encoding {
            ValueEncoding::Boolean => (code == 1).to_string(),
            ValueEncoding::Symbols(s) => s[code].clone(),
            ValueEncoding::Bins(bins) => {
                let b = &bins[code];
                if code + 1 == bins.len() {
                    format!("[{}, {}]", b.lo, b.hi)
                } else {
                    format!("[{}, {})", b.lo, b.hi)
                }
            }
        }
    }
}

/// Per-attribute encodings and the column layout they induce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingScheme {
    pub attributes: Vec<AttributeEncoding>,
    pub total_columns: usize,
}

impl EncodingScheme {
    /// Derives a scheme from the pool's observed values.
    pub fn fit(pool: &CandidatePool, initial_bins: usize) -> Result<Self> {
        let mut attributes = Vec::with_capacity(pool.attributes().len());
        let mut next = 0;
        for (a, attr) in pool.attributes().iter().enumerate() {
            let encoding = match &attr.kind {
                AttributeKind::Boolean => ValueEncoding::Boolean,
                AttributeKind::Symbolic(s) => ValueEncoding::Symbols(s.clone()),
                AttributeKind::Numeric => {
                    let column: Vec<f64> = pool.candidates().iter().map(|c| c.decisions.value(a)).collect();
                    ValueEncoding::Bins(merge_bins(equal_width_bins_with(&column, initial_bins)?))
                }
            };
            let enc = AttributeEncoding {
                name: attr.name.clone(),
                encoding,
                first_column: next,
            };
            next += enc.width();
            attributes.push(enc);
        }
        Ok(Self {
            attributes,
            total_columns: next,
        })
    }

    /// `(attribute, code)` of a column.
    pub fn column_owner(&self, column: usize) -> (usize, usize) {
        let a = self
            .attributes
            .partition_point(|e| e.first_column <= column)
            .saturating_sub(1);
        let enc = &self.attributes[a];
        match enc.encoding {
            ValueEncoding::Boolean => (a, 1),
            _ => (a, column - enc.first_column),
        }
    }

    /// Encodes every candidate of `pool`.
    pub fn encode(&self, pool: &CandidatePool) -> Result<BitMatrix> {
        if pool.attributes().len() != self.attributes.len() {
            return Err(contract("pool schema does not match the encoding scheme"));
        }
        let mut m = BitMatrix::zeros(pool.len(), self.total_columns);
        for (r, c) in pool.candidates().iter().enumerate() {
            for (a, enc) in self.attributes.iter().enumerate() {
                let code = enc.code_of(c.decisions.value(a))?;
                match enc.encoding {
                    ValueEncoding::Boolean => {
                        if code == 1 {
                            m.set(r, enc.first_column);
                        }
                    }
                    _ => m.set(r, enc.first_column + code),
                }
            }
        }
        Ok(m)
    }
}

/// Row-major packed boolean matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &b) in row.iter().enumerate() {
                if b {
                    m.set(r, c);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] |= 1 << (c % 64);
    }

    pub fn row_bools(&self, r: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }
}

/// A pool together with its encoding. This is what the search operates on.
#[derive(Clone, Debug)]
pub struct EncodedPool {
    pool: CandidatePool,
    scheme: EncodingScheme,
    matrix: BitMatrix,
}

impl EncodedPool {
    pub fn pool(&self) -> &CandidatePool {
        &self.pool
    }

    pub fn scheme(&self) -> &EncodingScheme {
        &self.scheme
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn num_attributes(&self) -> usize {
        self.scheme.attributes.len()
    }

    /// Value code of attribute `attr` for row `r`.
    pub fn code(&self, r: usize, attr: usize) -> usize {
        let enc = &self.scheme.attributes[attr];
        match enc.encoding {
            ValueEncoding::Boolean => usize::from(self.matrix.get(r, enc.first_column)),
            _ => (0..enc.width())
                .find(|&k| self.matrix.get(r, enc.first_column + k))
                .expect("one column set per attribute"),
        }
    }

    pub fn label(&self, attr: usize, code: usize) -> String {
        self.scheme.attributes[attr].label(code)
    }

    pub fn attribute_name(&self, attr: usize) -> &str {
        &self.scheme.attributes[attr].name
    }
}

/// Encodes a pool with the default initial bin count.
pub fn encode_pool(pool: CandidatePool) -> Result<EncodedPool> {
    encode_pool_with(pool, DEFAULT_BINS)
}

pub fn encode_pool_with(pool: CandidatePool, initial_bins: usize) -> Result<EncodedPool> {
    let scheme = EncodingScheme::fit(&pool, initial_bins)?;
    let matrix = scheme.encode(&pool)?;
    Ok(EncodedPool { pool, scheme, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_io::{load_candidate_table, Direction, Goal, ObjectiveSpec};
    use proptest::prelude::*;

    fn one_goal() -> ObjectiveSpec {
        ObjectiveSpec::new(vec![Goal {
            name: "y".into(),
            direction: Direction::Minimize,
        }])
        .unwrap()
    }

    #[test]
    fn sixteen_integers_one_per_bin() {
        let values: Vec<f64> = (0..16).map(f64::from).collect();
        let bins = equal_width_bins(&values).unwrap();
        assert_eq!(bins.len(), 16);
        for (i, b) in bins.iter().enumerate() {
            assert_eq!(b.n, 1, "bin {i}");
            assert_eq!(b.sd, 0.0);
            assert_eq!(b.mean, i as f64);
        }
        // distinct singletons never merge
        assert_eq!(merge_bins(bins).len(), 16);
    }

    #[test]
    fn constant_column_single_bin() {
        let bins = equal_width_bins(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].n, 3);
        assert_eq!(bins[0].sd, 0.0);
    }

    #[test]
    fn always_sixteen_initial_bins() {
        let values = [0.3, 9.1, 2.2, 2.2, 7.7];
        assert_eq!(equal_width_bins(&values).unwrap().len(), 16);
        assert!(equal_width_bins(&[]).is_err());
    }

    #[test]
    fn identical_constant_bins_merge() {
        let a = Bin::from_values(3.0, 3.5, &[3.0, 3.0]);
        let b = Bin::from_values(3.5, 4.0, &[3.0]);
        assert!(should_merge(&a, &b));
        assert_eq!(merge_bins(vec![a, b]).len(), 1);
    }

    #[test]
    fn separated_constants_do_not_merge() {
        let a = Bin::from_values(0.0, 3.0, &[1.0, 1.0]);
        let b = Bin::from_values(3.0, 6.0, &[5.0, 5.0]);
        // pooled sd of {1,1,5,5} is 2
        assert!((a.combine(&b).sd - 2.0).abs() < 1e-12);
        assert_eq!(merge_bins(vec![a, b]).len(), 2);
    }

    #[test]
    fn empty_bins_collapse() {
        let bins = equal_width_bins(&[0.0, 0.1, 9.9, 10.0]).unwrap();
        let merged = merge_bins(bins);
        assert!(merged.iter().all(|b| b.n > 0));
        assert_eq!(merged.iter().map(|b| b.n).sum::<usize>(), 4);
        assert_eq!(merged.first().unwrap().lo, 0.0);
        assert_eq!(merged.last().unwrap().hi, 10.0);
        for w in merged.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }

    #[test]
    fn three_attributes_two_bins_each() {
        let csv = "a,b,c,y\n0,0,0,1\n10,10,10,2\n0,10,0,3\n";
        let enc = encode_pool(load_candidate_table(csv, one_goal()).unwrap()).unwrap();
        assert_eq!(enc.scheme().total_columns, 6);
        for r in 0..3 {
            let ones = (0..6).filter(|&c| enc.matrix().get(r, c)).count();
            assert_eq!(ones, 3);
        }
    }

    #[test]
    fn boolean_model_is_identity_encoded() {
        let mut csv = (0..128).map(|i| format!("v{i}")).collect::<Vec<_>>().join(",");
        csv.push_str(",y\n");
        for r in 0..3 {
            let row: Vec<String> = (0..128).map(|i| ((i + r) % 2).to_string()).collect();
            csv.push_str(&row.join(","));
            csv.push_str(",1\n");
        }
        let enc = encode_pool(load_candidate_table(&csv, one_goal()).unwrap()).unwrap();
        assert_eq!(enc.scheme().total_columns, 128);
        for r in 0..3 {
            for i in 0..128 {
                assert_eq!(enc.matrix().get(r, i), (i + r) % 2 == 1);
                assert_eq!(enc.code(r, i), (i + r) % 2);
            }
        }
    }

    #[test]
    fn unmerged_attribute_takes_sixteen_columns() {
        let mut csv = String::from("a,y\n");
        for i in 0..16 {
            csv.push_str(&format!("{i},0\n"));
        }
        let enc = encode_pool(load_candidate_table(&csv, one_goal()).unwrap()).unwrap();
        assert_eq!(enc.scheme().total_columns, 16);
        assert_eq!(enc.scheme().column_owner(7), (0, 7));
    }

    #[test]
    fn reused_scheme_rejects_out_of_range_values() {
        let pool = load_candidate_table("a,y\n0,1\n4,1\n", one_goal()).unwrap();
        let scheme = EncodingScheme::fit(&pool, 16).unwrap();
        let wider = load_candidate_table("a,y\n0,1\n9,1\n", one_goal()).unwrap();
        assert!(matches!(scheme.encode(&wider), Err(Error::OutOfRange { .. })));
        let json = serde_json::to_string(&scheme).unwrap();
        let back: EncodingScheme = serde_json::from_str(&json).unwrap();
        assert_eq!(back.encode(&pool).unwrap(), scheme.encode(&pool).unwrap());
    }

    proptest! {
        #[test]
        fn merge_never_grows_and_is_idempotent(values in prop::collection::vec(-50.0f64..50.0, 1..200)) {
            let bins = equal_width_bins(&values).unwrap();
            let merged = merge_bins(bins.clone());
            prop_assert!(merged.len() <= bins.len());
            prop_assert_eq!(merge_bins(merged.clone()), merged.clone());
            prop_assert_eq!(merged.iter().map(|b| b.n).sum::<usize>(), values.len());
        }

        #[test]
        fn exactly_one_column_per_multivalued_attribute(
            rows in prop::collection::vec((0.0f64..100.0, 0usize..4, -5.0f64..5.0), 2..60)
        ) {
            let mut csv = String::from("num,sym,num2,y\n");
            for (a, s, b) in &rows {
                csv.push_str(&format!("{a},s{s},{b},0\n"));
            }
            let enc = encode_pool(load_candidate_table(&csv, one_goal()).unwrap()).unwrap();
            let again = enc.scheme().encode(enc.pool()).unwrap();
            prop_assert_eq!(&again, enc.matrix());
            for r in 0..rows.len() {
                for attr in &enc.scheme().attributes {
                    let set = (0..attr.width())
                        .filter(|&k| enc.matrix().get(r, attr.first_column + k))
                        .count();
                    prop_assert_eq!(set, 1);
                }
            }
        }
    }
}
