//! Observation matrices and their column-wise rank reduction.
//!
//! Everything downstream of [`rank_transform`] depends on the data only
//! through the ranks, so the [`RankMatrix`] is the working representation for
//! the statistics and the tests.

use crate::error::{Error, Result};

/// An `n x p` matrix of finite observations: rows are observations, columns
/// are variables. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from column vectors, all of equal length.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let values = columns.into_iter().flatten().collect();
        Self::from_column_major(n, p, values)
    }

    /// Builds a matrix from observation rows, all of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Shape("rows have different lengths".into()));
        }
        let mut values = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        Self::from_column_major(n, p, values)
    }

    pub fn from_column_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::Shape(format!(
                "{} values do not fill a {n} x {p} matrix",
                values.len()
            )));
        }
        if n < 1 {
            return Err(Error::SampleTooSmall { n, min: 1 });
        }
        if p < 2 {
            return Err(Error::DimensionTooSmall { p });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx % n,
                column: idx / n,
            });
        }
        Ok(Self { n, p, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.values[column * self.n + row]
    }

    /// Applies `f` to every entry of column `j`.
    pub fn map_column(&mut self, j: usize, f: impl Fn(f64) -> f64) {
        for v in &mut self.values[j * self.n..(j + 1) * self.n] {
            *v = f(*v);
        }
    }

    /// Applies `f` to every entry, rejecting the result if it is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_column_major(self.n, self.p, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Column-wise ranks `1..=n` of a tie-free [`DataMatrix`]. Stored column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    n: usize,
    p: usize,
    ranks: Vec<u32>,
}

impl RankMatrix {
    /// Wraps column-major ranks after checking every column is a permutation.
    pub fn from_column_major(n: usize, p: usize, ranks: Vec<u32>) -> Result<Self> {
        if ranks.len() != n * p {
            return Err(Error::Shape(format!(
                "{} ranks do not fill a {n} x {p} matrix",
                ranks.len()
            )));
        }
        if p < 2 {
            return Err(Error::DimensionTooSmall { p });
        }
        for col in ranks.chunks(n.max(1)) {
            check_permutation(col)?;
        }
        Ok(Self { n, p, ranks })
    }

    /// Trusted constructor for ranks produced inside the crate.
    pub(crate) fn from_parts_unchecked(n: usize, p: usize, ranks: Vec<u32>) -> Self {
        debug_assert_eq!(ranks.len(), n * p);
        Self { n, p, ranks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.ranks[j * self.n..(j + 1) * self.n]
    }

    /// The paired ranks of columns `j` and `k`.
    pub fn pair(&self, j: usize, k: usize) -> PairedRanks {
        PairedRanks {
            r: self.column(j).to_vec(),
            s: self.column(k).to_vec(),
        }
    }
}

/// Ranks a single slice. Returns the row indices of the first tied pair found.
pub fn rank_slice(values: &[f64]) -> std::result::Result<Vec<u32>, (usize, usize)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u32; values.len()];
    for (pos, w) in order.windows(2).enumerate() {
        // total_cmp separates -0.0 from 0.0; those still count as a tie
        if values[w[0]] == values[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err((a, b));
        }
        ranks[w[0]] = pos as u32 + 1;
    }
    if let Some(&last) = order.last() {
        ranks[last] = values.len() as u32;
    }
    Ok(ranks)
}

/// Replaces every column by its ranks `1..=n`.
///
/// Any exact duplicate within a column is rejected with
/// [`Error::TiesPresent`]; the statistics assume continuous margins and
/// midranks are not supported.
pub fn rank_transform(data: &DataMatrix) -> Result<RankMatrix> {
    let (n, p) = (data.n(), data.p());
    let mut ranks = Vec::with_capacity(n * p);
    for j in 0..p {
        let col =
            rank_slice(data.column(j)).map_err(|rows| Error::TiesPresent { column: j, rows })?;
        ranks.extend(col);
    }
    Ok(RankMatrix::from_parts_unchecked(n, p, ranks))
}

fn check_permutation(values: &[u32]) -> Result<()> {
    let n = values.len();
    let mut seen = vec![false; n];
    for &v in values {
        let idx = v as usize;
        if idx == 0 || idx > n {
            return Err(Error::NotPermutation {
                n,
                reason: format!("entry {v} out of range"),
            });
        }
        if std::mem::replace(&mut seen[idx - 1], true) {
            return Err(Error::NotPermutation {
                n,
                reason: format!("entry {v} repeated"),
            });
        }
    }
    Ok(())
}

/// Two rank vectors of a bivariate sample, each a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedRanks {
    r: Vec<u32>,
    s: Vec<u32>,
}

impl PairedRanks {
    pub fn new(r: Vec<u32>, s: Vec<u32>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::Shape(format!(
                "rank vectors have lengths {} and {}",
                r.len(),
                s.len()
            )));
        }
        check_permutation(&r)?;
        check_permutation(&s)?;
        Ok(Self { r, s })
    }

    /// Ranks two raw samples. Ties are reported against column 0 (`x`) or 1 (`y`).
    pub fn from_values(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "samples have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        let r = rank_slice(x).map_err(|rows| Error::TiesPresent { column: 0, rows })?;
        let s = rank_slice(y).map_err(|rows| Error::TiesPresent { column: 1, rows })?;
        Ok(Self { r, s })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn s(&self) -> &[u32] {
        &self.s
    }

    pub fn swapped(&self) -> Self {
        Self {
            r: self.s.clone(),
            s: self.r.clone(),
        }
    }

    /// The `s` ranks listed in increasing order of `r`.
    pub fn s_by_r(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.n()];
        for (&ri, &si) in self.r.iter().zip(&self.s) {
            out[ri as usize - 1] = si;
        }
        out
    }
}
