use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::generator::{min_max_scale, CLASS_COLUMN, TRANSFORMED_PREDICTORS};
use super::Table;
use crate::error::{Error, Result};
use crate::rng::substream;

/// The four dataset views: raw or transformed predictors, each with or
/// without the debtor-class column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetVariant {
    A,
    B,
    C,
    D,
}

impl DatasetVariant {
    pub const ALL: [DatasetVariant; 4] = [Self::A, Self::B, Self::C, Self::D];

    pub fn uses_raw(self) -> bool {
        matches!(self, Self::A | Self::C)
    }

    pub fn has_class(self) -> bool {
        matches!(self, Self::C | Self::D)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
        }
    }
}

impl fmt::Display for DatasetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DatasetVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            "D" | "d" => Ok(Self::D),
            other => Err(Error::InvalidConfig(format!(
                "unknown dataset variant '{other}' (expected A, B, C or D)"
            ))),
        }
    }
}

/// How a transformed column maps onto observed raw columns. `levels` of
/// `None` means the raw column stays continuous.
struct RawSpec {
    name: &'static str,
    source: &'static str,
    levels: Option<usize>,
}

const fn raw(name: &'static str, source: &'static str, levels: Option<usize>) -> RawSpec {
    RawSpec {
        name,
        source,
        levels,
    }
}

const RAW_COLUMNS: [RawSpec; 24] = [
    raw("age", "x", Some(6)),
    raw("mstat", "x", Some(3)),
    raw("empstat", "x", Some(4)),
    raw("male", "x", Some(2)),
    raw("hstatus", "y", Some(3)),
    raw("ndep", "y", Some(4)),
    raw("nadults", "y", Some(3)),
    raw("hvalue", "housingfactor", None),
    raw("mortdebt", "housingfactor", None),
    raw("income", "financialfactor1", None),
    raw("finasset", "financialfactor1", None),
    raw("carvalue", "financialfactor2", None),
    raw("ndebtitems", "financialfactor2", None),
    raw("food", "Necessity", None),
    raw("services", "Necessity", None),
    raw("priority", "Necessity", None),
    raw("housing", "Household", None),
    raw("clothing", "Household", None),
    raw("travel", "Excessive", None),
    raw("sundries", "Excessive", None),
    raw("other", "Excessive", None),
    raw("leisure", "Leisure", None),
    raw("motoring", "Leisure", None),
    raw("sempspend", "Leisure", None),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpandConfig {
    /// Standard deviation of the independent noise added to each observed
    /// column, relative to its standardized source.
    pub noise_amp: f64,
    /// Bin demographic columns into categorical codes.
    pub quantize: bool,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            noise_amp: 0.8,
            quantize: true,
        }
    }
}

fn standardize(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    v.iter()
        .map(|x| if sd > 0.0 { (x - mean) / sd } else { 0.0 })
        .collect()
}

/// Bins a roughly standard-normal value into `levels` equiprobable codes.
fn quantize(v: f64, levels: usize) -> f64 {
    let normal = statrs::distribution::Normal::standard();
    let p = statrs::distribution::ContinuousCDF::cdf(&normal, v);
    ((p * levels as f64).floor() as usize).min(levels - 1) as f64
}

/// Expands the nine transformed predictors into a noisier raw view with 24
/// observed columns. Response and class columns are carried through.
pub fn expand_raw(t: &Table, seed: u64) -> Result<Table> {
    expand_raw_with(t, seed, &ExpandConfig::default())
}

pub fn expand_raw_with(t: &Table, seed: u64, config: &ExpandConfig) -> Result<Table> {
    if !(config.noise_amp.is_finite() && config.noise_amp >= 0.0) {
        return Err(Error::InvalidConfig("noise_amp must be finite and >= 0".into()));
    }
    let n = t.n_rows();
    let mut sources = std::collections::HashMap::new();
    for name in TRANSFORMED_PREDICTORS {
        sources.insert(name, standardize(&t.column_by_name(name)?));
    }
    let spread = (1.0 + config.noise_amp * config.noise_amp).sqrt();

    let mut columns: Vec<Vec<f64>> = RAW_COLUMNS
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let src = &sources[spec.source];
            let mut rng = substream(seed, "expand.noise", j as u64);
            src.iter()
                .map(|&s| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    let v = s + config.noise_amp * e;
                    match (config.quantize, spec.levels) {
                        (true, Some(levels)) => quantize(v / spread, levels),
                        _ => v,
                    }
                })
                .collect()
        })
        .collect();
    for c in columns.iter_mut() {
        min_max_scale(c);
    }

    let mut names: Vec<String> = RAW_COLUMNS.iter().map(|s| s.name.to_string()).collect();
    let class = t.class_col().map(|c| t.column(c));
    if class.is_some() {
        names.push(t.class_name().unwrap_or(CLASS_COLUMN).to_string());
    }
    names.push(t.response_name().to_string());
    let response = t.response();

    let mut data = Vec::with_capacity(n * names.len());
    for i in 0..n {
        data.extend(columns.iter().map(|c| c[i]));
        if let Some(cl) = &class {
            data.push(cl[i]);
        }
        data.push(response[i]);
    }
    let width = names.len();
    let class_col = class.as_ref().map(|_| width - 2);
    Table::from_row_major(names, n, data, width - 1, class_col)
}

/// Assembles one of the A–D views from a transformed table with classes.
pub fn make_variant(t: &Table, variant: DatasetVariant, seed: u64) -> Result<Table> {
    make_variant_with(t, variant, seed, &ExpandConfig::default())
}

pub fn make_variant_with(
    t: &Table,
    variant: DatasetVariant,
    seed: u64,
    expand: &ExpandConfig,
) -> Result<Table> {
    let class = t
        .class_name()
        .ok_or_else(|| Error::Precondition("dataset variants need a class column".into()))?
        .to_string();
    let response = t.response_name().to_string();
    let base = if variant.uses_raw() {
        expand_raw_with(t, seed, expand)?
    } else {
        let mut cols: Vec<&str> = TRANSFORMED_PREDICTORS.to_vec();
        cols.push(&class);
        cols.push(&response);
        t.select_columns(&cols)?
    };
    Ok(if variant.has_class() {
        base
    } else {
        base.without_class()
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, GeneratorConfig};

    #[test]
    fn variant_tags_parse() {
        assert_eq!("c".parse::<DatasetVariant>().unwrap(), DatasetVariant::C);
        assert!("E".parse::<DatasetVariant>().is_err());
    }

    #[test]
    fn variant_shapes() {
        let t = generate(&GeneratorConfig::with_rows(200, 1)).unwrap();
        let a = make_variant(&t, DatasetVariant::A, 9).unwrap();
        let b = make_variant(&t, DatasetVariant::B, 9).unwrap();
        let c = make_variant(&t, DatasetVariant::C, 9).unwrap();
        let d = make_variant(&t, DatasetVariant::D, 9).unwrap();
        assert_eq!(b.predictor_names().len(), 9);
        assert_eq!(b.n_cols(), 10);
        assert!(b.class_col().is_none());
        assert_eq!(d.n_cols(), 11);
        assert!(d.class_col().is_some());
        assert!(a.predictor_names().len() >= 20);
        assert_eq!(c.n_cols(), a.n_cols() + 1);
        assert_eq!(a.response(), t.response());
    }

    #[test]
    fn needs_class_and_source_columns() {
        let t = generate(&GeneratorConfig::with_rows(50, 1)).unwrap();
        assert!(make_variant(&t.without_class(), DatasetVariant::B, 1).is_err());
        let missing = t.select_columns(&["x", "y", "udebt"]).unwrap();
        assert!(matches!(expand_raw(&missing, 1), Err(Error::UnknownColumn { .. })));
    }

    #[test]
    fn quantized_columns_are_categorical() {
        let t = generate(&GeneratorConfig::with_rows(300, 2)).unwrap();
        let a = expand_raw(&t, 4).unwrap();
        let age = a.column_by_name("age").unwrap();
        let mut levels: Vec<f64> = age.clone();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert!(levels.len() <= 6);
    }
}
