//! Recorded simulation signals.

/// Uniformly sampled signals, one row per recorded step. The first column
/// is always time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SimTrace {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let i = self.column_index(name)?;
        self.rows.last().map(|r| r[i])
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }
}
