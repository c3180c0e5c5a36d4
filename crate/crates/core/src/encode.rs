//! Predictor encoding shared by the model families.
//!
//! Numeric predictors pass through by name. The integer class column is
//! either dropped, expanded to K−1 dummies (baseline = lowest level, for
//! linear regression) or to K indicators (trees and networks). Levels are
//! learned from the training table; a level unseen at fit time encodes as
//! all zeros.

use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassCoding {
    Omit,
    Dummies,
    Indicators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    numeric: Vec<String>,
    class_name: Option<String>,
    class_levels: Vec<u32>,
    coding: ClassCoding,
}

impl FeatureEncoder {
    pub fn fit(t: &Table, coding: ClassCoding) -> Self {
        let (class_name, class_levels) = match (coding, t.class_name()) {
            (ClassCoding::Omit, _) | (_, None) => (None, Vec::new()),
            (_, Some(name)) => (Some(name.to_string()), t.class_levels()),
        };
        FeatureEncoder {
            numeric: t.predictor_names(),
            class_name,
            class_levels,
            coding,
        }
    }

    fn encoded_levels(&self) -> &[u32] {
        match self.coding {
            ClassCoding::Omit => &[],
            ClassCoding::Dummies => self.class_levels.get(1..).unwrap_or(&[]),
            ClassCoding::Indicators => &self.class_levels,
        }
    }

    pub fn numeric_names(&self) -> &[String] {
        &self.numeric
    }

    pub fn n_features(&self) -> usize {
        self.numeric.len() + self.encoded_levels().len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.numeric.clone();
        if let Some(c) = &self.class_name {
            names.extend(self.encoded_levels().iter().map(|k| format!("{c}={k}")));
        }
        names
    }

    pub fn transform(&self, t: &Table) -> Result<Matrix> {
        let idx: Vec<usize> = self
            .numeric
            .iter()
            .map(|n| t.column_index(n).ok_or_else(|| Error::ColumnMismatch(n.clone())))
            .collect::<Result<_>>()?;
        let levels = self.encoded_levels();
        let class_idx = match &self.class_name {
            Some(c) if !levels.is_empty() => {
                Some(t.column_index(c).ok_or_else(|| Error::ColumnMismatch(c.clone()))?)
            }
            _ => None,
        };
        let width = self.n_features();
        let mut data = Vec::with_capacity(t.n_rows() * width);
        for i in 0..t.n_rows() {
            let r = t.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
            if let Some(c) = class_idx {
                let label = r[c] as u32;
                data.extend(levels.iter().map(|&k| if k == label { 1.0 } else { 0.0 }));
            }
        }
        Matrix::from_row_major(t.n_rows(), width, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table::new(
            vec!["a".into(), "class".into(), "y".into()],
            vec![
                vec![0.5, 1.0, 1.0],
                vec![0.1, 3.0, 2.0],
                vec![0.2, 2.0, 3.0],
            ],
            2,
            Some(1),
        )
        .unwrap()
    }

    #[test]
    fn dummy_and_indicator_widths() {
        let t = table();
        let d = FeatureEncoder::fit(&t, ClassCoding::Dummies);
        assert_eq!(d.feature_names(), vec!["a", "class=2", "class=3"]);
        let x = d.transform(&t).unwrap();
        assert_eq!(x.row(0), &[0.5, 0.0, 0.0]);
        assert_eq!(x.row(1), &[0.1, 0.0, 1.0]);
        let ind = FeatureEncoder::fit(&t, ClassCoding::Indicators);
        assert_eq!(ind.n_features(), 4);
        assert_eq!(ind.transform(&t).unwrap().row(2), &[0.2, 0.0, 1.0, 0.0]);
        let omit = FeatureEncoder::fit(&t, ClassCoding::Omit);
        assert_eq!(omit.feature_names(), vec!["a"]);
    }

    #[test]
    fn missing_column_is_a_mismatch() {
        let t = table();
        let enc = FeatureEncoder::fit(&t, ClassCoding::Indicators);
        let other = t.without_class();
        assert!(matches!(enc.transform(&other), Err(Error::ColumnMismatch(_))));
    }
}
