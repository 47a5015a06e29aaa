use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::EigenvalueVector;

/// Flat storage for many ascending spectra of one dimension.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    n: usize,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(n: usize) -> Self {
        Self { n, values: Vec::new() }
    }

    pub fn with_capacity(n: usize, rows: usize) -> Self {
        Self { n, values: Vec::with_capacity(n * rows) }
    }

    /// Builds from rows, sorting each one.
    pub fn from_rows<I, R>(n: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut set = Self::new(n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "sample row has {} entries, expected {n}",
                    row.len()
                )));
            }
            set.push_unsorted(row);
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.values.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn push_sorted(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.n);
        self.values.extend_from_slice(row);
    }

    pub fn push_unsorted(&mut self, row: &[f64]) {
        let start = self.values.len();
        self.values.extend_from_slice(row);
        self.values[start..].sort_by(f64::total_cmp);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n.max(1))
    }

    /// The `k`-th smallest eigenvalue of every sample.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn extend(&mut self, other: &SampleSet) {
        debug_assert_eq!(self.n, other.n);
        self.values.extend_from_slice(&other.values);
    }

    /// Rows `range` as a new set.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SampleSet {
        SampleSet { n: self.n, values: self.values[range.start * self.n..range.end * self.n].to_vec() }
    }

    pub fn to_vectors(&self) -> Vec<EigenvalueVector> {
        self.rows().map(|r| EigenvalueVector::from_sorted_trusted(r.to_vec())).collect()
    }
}
