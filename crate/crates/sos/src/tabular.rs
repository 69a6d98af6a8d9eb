//! Typed tabular data: CSV loading against a declared schema, a class
//! partition over the label column, and a reversible encoding of rows into
//! real-valued feature vectors (min-max to [-1, 1] for continuous columns,
//! one-hot for categorical ones). The label column never enters the features.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};

/// Widening applied to a constant continuous column so the affine map is defined.
const CONSTANT_COLUMN_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Continuous column that holds integer values; decoded cells are rounded.
    #[serde(default, skip_serializing_if = "is_false")]
    pub integer: bool,
}

fn is_false(b: &bool) -> bool {
    !b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<Column>,
    #[serde(rename = "label")]
    pub label_column: String,
}

impl Schema {
    pub fn new(columns: Vec<Column>, label_column: impl Into<String>) -> Result<Self> {
        let schema = Schema { columns, label_column: label_column.into() };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for col in &self.columns {
            if seen.insert(col.name.clone(), ()).is_some() {
                return Err(SosError::BadSchema(format!("duplicate column `{}`", col.name)));
            }
        }
        let label = self
            .columns
            .iter()
            .find(|c| c.name == self.label_column)
            .ok_or_else(|| {
                SosError::BadSchema(format!("label column `{}` not declared", self.label_column))
            })?;
        if label.kind != ColumnKind::Categorical {
            return Err(SosError::BadSchema(format!(
                "label column `{}` must be categorical",
                self.label_column
            )));
        }
        if self.columns.len() < 2 {
            return Err(SosError::BadSchema("need at least one non-label column".into()));
        }
        Ok(())
    }

    pub fn label_index(&self) -> usize {
        self.columns.iter().position(|c| c.name == self.label_column).expect("validated")
    }

    pub fn from_json_file(path: &Path) -> Result<Schema> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })?;
        let schema: Schema = serde_json::from_str(&text)
            .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })?;
        schema.validate()?;
        Ok(schema)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Continuous(f64),
    Categorical(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Continuous(v) => write!(f, "{v}"),
            Cell::Categorical(s) => write!(f, "{s}"),
        }
    }
}

/// Class identifier: index into `Table::class_labels`, first-seen order.
pub type ClassId = usize;

#[derive(Debug, Clone)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
    /// Label values in first-seen order; `ClassId` indexes this.
    pub class_labels: Vec<String>,
    /// Row indices per class, same order as `class_labels`.
    pub class_index: Vec<Vec<usize>>,
}

impl Table {
    pub fn new(schema: Schema, rows: Vec<Vec<Cell>>) -> Result<Table> {
        schema.validate()?;
        if rows.is_empty() {
            return Err(SosError::EmptyTable);
        }
        let width = schema.columns.len();
        let label_idx = schema.label_index();
        let mut class_labels: Vec<String> = Vec::new();
        let mut class_index: Vec<Vec<usize>> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(SosError::RowWidth { row: r, got: row.len(), want: width });
            }
            for (cell, col) in row.iter().zip(&schema.columns) {
                match (cell, col.kind) {
                    (Cell::Continuous(v), ColumnKind::Continuous) => {
                        if !v.is_finite() {
                            return Err(SosError::NonNumericValue {
                                column: col.name.clone(),
                                value: v.to_string(),
                            });
                        }
                    }
                    (Cell::Categorical(_), ColumnKind::Categorical) => {}
                    _ => {
                        return Err(SosError::BadSchema(format!(
                            "row {r} cell for `{}` has the wrong kind",
                            col.name
                        )))
                    }
                }
            }
            let label = match &row[label_idx] {
                Cell::Categorical(s) => s.clone(),
                Cell::Continuous(_) => unreachable!("label kind checked above"),
            };
            let class = match class_labels.iter().position(|l| *l == label) {
                Some(c) => c,
                None => {
                    class_labels.push(label);
                    class_index.push(Vec::new());
                    class_labels.len() - 1
                }
            };
            class_index[class].push(r);
        }
        Ok(Table { schema, rows, class_labels, class_index })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn class_of_row(&self, row: usize) -> ClassId {
        let label_idx = self.schema.label_index();
        match &self.rows[row][label_idx] {
            Cell::Categorical(s) => {
                self.class_labels.iter().position(|l| l == s).expect("indexed at construction")
            }
            Cell::Continuous(_) => unreachable!(),
        }
    }

    /// Append rows that all belong to `class` (label cell filled in here).
    pub fn append_labeled(&mut self, class: ClassId, mut rows: Vec<Vec<Cell>>) {
        let label_idx = self.schema.label_index();
        let label = self.class_labels[class].clone();
        for mut row in rows.drain(..) {
            row.insert(label_idx, Cell::Categorical(label.clone()));
            self.class_index[class].push(self.rows.len());
            self.rows.push(row);
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let names: Vec<&str> = self.schema.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)
            .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })
    }
}

/// Load a comma-separated, header-first, UTF-8 file against `schema`. Schema
/// columns are located in the header by name; extra CSV columns are ignored.
pub fn load_table(path: &Path, schema: &Schema) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: &Schema) -> Result<Table> {
    schema.validate()?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(SosError::EmptyTable)?;
    let header: Vec<&str> = header.split(',').map(|h| h.trim()).collect();

    let mut positions = Vec::with_capacity(schema.columns.len());
    for col in &schema.columns {
        let pos = header
            .iter()
            .position(|h| *h == col.name)
            .ok_or_else(|| SosError::MissingColumn(col.name.clone()))?;
        positions.push(pos);
    }

    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        let mut row = Vec::with_capacity(schema.columns.len());
        for (col, &pos) in schema.columns.iter().zip(&positions) {
            let raw = fields.get(pos).copied().unwrap_or("");
            match col.kind {
                ColumnKind::Continuous => {
                    let v: f64 = raw.parse().map_err(|_| SosError::NonNumericValue {
                        column: col.name.clone(),
                        value: raw.to_string(),
                    })?;
                    if !v.is_finite() {
                        return Err(SosError::NonNumericValue {
                            column: col.name.clone(),
                            value: raw.to_string(),
                        });
                    }
                    row.push(Cell::Continuous(v));
                }
                ColumnKind::Categorical => row.push(Cell::Categorical(raw.to_string())),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(SosError::EmptyTable);
    }
    Table::new(schema.clone(), rows)
}

/// Reversible mapping between raw rows and feature vectors. The label column
/// is excluded from the features; its vocabulary is kept for class ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Encoder {
    pub schema: Schema,
    /// (min, max) per continuous column, schema order.
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    /// Vocabulary per non-label categorical column, schema order, first-seen.
    pub vocabularies: Vec<Vec<String>>,
    pub label_classes: Vec<String>,
    pub dim: usize,
}

impl Encoder {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn continuous_idx(&self, col: usize) -> usize {
        self.schema.columns[..col].iter().filter(|c| c.kind == ColumnKind::Continuous).count()
    }

    fn categorical_idx(&self, col: usize) -> usize {
        let label_idx = self.schema.label_index();
        self.schema.columns[..col]
            .iter()
            .enumerate()
            .filter(|(i, c)| c.kind == ColumnKind::Categorical && *i != label_idx)
            .count()
    }
}

pub fn fit_encoder(table: &Table) -> Result<Encoder> {
    if table.rows.is_empty() {
        return Err(SosError::EmptyTable);
    }
    let schema = table.schema.clone();
    let label_idx = schema.label_index();
    let mut mins = Vec::new();
    let mut maxs = Vec::new();
    let mut vocabularies = Vec::new();
    let mut dim = 0;
    for (i, col) in schema.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Continuous => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for row in &table.rows {
                    if let Cell::Continuous(v) = &row[i] {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
                if lo == hi {
                    hi += CONSTANT_COLUMN_EPS;
                }
                mins.push(lo);
                maxs.push(hi);
                dim += 1;
            }
            ColumnKind::Categorical => {
                if i == label_idx {
                    continue;
                }
                let mut vocab: Vec<String> = Vec::new();
                for row in &table.rows {
                    if let Cell::Categorical(s) = &row[i] {
                        if !vocab.iter().any(|v| v == s) {
                            vocab.push(s.clone());
                        }
                    }
                }
                dim += vocab.len();
                vocabularies.push(vocab);
            }
        }
    }
    Ok(Encoder {
        schema,
        mins,
        maxs,
        vocabularies,
        label_classes: table.class_labels.clone(),
        dim,
    })
}

/// Encode one row (without its label slot) into a `dim`-wide feature vector.
pub fn encode_row(enc: &Encoder, row: &[Cell]) -> Result<Vec<f64>> {
    let label_idx = enc.schema.label_index();
    let mut out = Vec::with_capacity(enc.dim);
    for (i, col) in enc.schema.columns.iter().enumerate() {
        if i == label_idx {
            continue;
        }
        match (&row[i], col.kind) {
            (Cell::Continuous(v), ColumnKind::Continuous) => {
                let c = enc.continuous_idx(i);
                let (lo, hi) = (enc.mins[c], enc.maxs[c]);
                out.push(2.0 * (v - lo) / (hi - lo) - 1.0);
            }
            (Cell::Categorical(s), ColumnKind::Categorical) => {
                let c = enc.categorical_idx(i);
                let vocab = &enc.vocabularies[c];
                let hit = vocab.iter().position(|v| v == s).ok_or_else(|| {
                    SosError::UnseenCategory { column: col.name.clone(), value: s.clone() }
                })?;
                for k in 0..vocab.len() {
                    out.push(if k == hit { 1.0 } else { 0.0 });
                }
            }
            _ => {
                return Err(SosError::BadSchema(format!(
                    "cell kind mismatch in column `{}`",
                    col.name
                )))
            }
        }
    }
    Ok(out)
}

/// Encode all rows; returns the feature matrix and per-row class ids.
pub fn encode(enc: &Encoder, table: &Table) -> Result<(Vec<Vec<f64>>, Vec<ClassId>)> {
    let mut features = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    let label_idx = enc.schema.label_index();
    for row in &table.rows {
        features.push(encode_row(enc, row)?);
        let label = match &row[label_idx] {
            Cell::Categorical(s) => s,
            Cell::Continuous(_) => unreachable!(),
        };
        let class = enc.label_classes.iter().position(|l| l == label).ok_or_else(|| {
            SosError::UnseenCategory { column: enc.schema.label_column.clone(), value: label.clone() }
        })?;
        labels.push(class);
    }
    Ok((features, labels))
}

/// Decode feature vectors back to rows without the label cell. Total on real
/// inputs: continuous features clamp to [min, max], one-hot blocks decode by
/// argmax with ties to the lowest index.
pub fn decode(enc: &Encoder, features: &[Vec<f64>]) -> Result<Vec<Vec<Cell>>> {
    let label_idx = enc.schema.label_index();
    let mut rows = Vec::with_capacity(features.len());
    for feat in features {
        if feat.len() != enc.dim {
            return Err(SosError::DimensionMismatch { want: enc.dim, got: feat.len() });
        }
        let mut row = Vec::new();
        let mut pos = 0;
        for (i, col) in enc.schema.columns.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            match col.kind {
                ColumnKind::Continuous => {
                    let c = enc.continuous_idx(i);
                    let (lo, hi) = (enc.mins[c], enc.maxs[c]);
                    let mut v = (feat[pos] + 1.0) / 2.0 * (hi - lo) + lo;
                    v = v.clamp(lo, hi);
                    if col.integer {
                        v = v.round();
                    }
                    row.push(Cell::Continuous(v));
                    pos += 1;
                }
                ColumnKind::Categorical => {
                    let c = enc.categorical_idx(i);
                    let vocab = &enc.vocabularies[c];
                    let block = &feat[pos..pos + vocab.len()];
                    let mut best = 0;
                    for (k, v) in block.iter().enumerate() {
                        if *v > block[best] {
                            best = k;
                        }
                    }
                    row.push(Cell::Categorical(vocab[best].clone()));
                    pos += vocab.len();
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    /// (class id, row count) in class-id order.
    pub counts: Vec<(ClassId, usize)>,
    pub major: ClassId,
    pub minors: Vec<ClassId>,
}

/// Count rows per class and split major (largest, ties to the lowest class id)
/// from minors. A single-class table is an error for oversampling.
pub fn partition_classes(table: &Table) -> Result<ClassPartition> {
    let counts: Vec<(ClassId, usize)> =
        table.class_index.iter().enumerate().map(|(c, rows)| (c, rows.len())).collect();
    if counts.len() < 2 {
        return Err(SosError::SingleClass);
    }
    let major = counts
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| *c)
        .expect("non-empty");
    let minors = counts.iter().filter(|(c, _)| *c != major).map(|(c, _)| *c).collect();
    Ok(ClassPartition { counts, major, minors })
}

pub fn save_encoder(enc: &Encoder, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(enc)
        .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })?;
    std::fs::write(path, text)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })
}

pub fn load_encoder(path: &Path) -> Result<Encoder> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text)
        .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_schema() -> Schema {
        Schema::new(
            vec![
                Column { name: "age".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "pet".into(), kind: ColumnKind::Categorical, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap()
    }

    fn toy_csv() -> &'static str {
        "age,pet,cls\n0,cat,A\n5,dog,A\n10,cat,A\n5,cat,B\n"
    }

    #[test]
    fn load_counts_classes() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        assert_eq!(table.n_rows(), 4);
        assert_eq!(table.class_labels, vec!["A", "B"]);
        assert_eq!(table.class_index[0].len(), 3);
        assert_eq!(table.class_index[1].len(), 1);
    }

    #[test]
    fn continuous_parse_error_names_column() {
        let csv = "age,pet,cls\nabc,cat,A\n";
        match parse_csv(csv, &toy_schema()) {
            Err(SosError::NonNumericValue { column, .. }) => assert_eq!(column, "age"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_body_is_an_error() {
        assert!(matches!(parse_csv("age,pet,cls\n", &toy_schema()), Err(SosError::EmptyTable)));
        assert!(matches!(parse_csv("", &toy_schema()), Err(SosError::EmptyTable)));
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "age,cls\n1,A\n";
        match parse_csv(csv, &toy_schema()) {
            Err(SosError::MissingColumn(c)) => assert_eq!(c, "pet"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fit_extrema_and_vocab() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        assert_eq!(enc.mins, vec![0.0]);
        assert_eq!(enc.maxs, vec![10.0]);
        assert_eq!(enc.vocabularies, vec![vec!["cat".to_string(), "dog".to_string()]]);
        // 1 continuous + one-hot width 2
        assert_eq!(enc.dim, 3);
    }

    #[test]
    fn dim_sums_widths() {
        let schema = Schema::new(
            vec![
                Column { name: "a".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "b".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "c".into(), kind: ColumnKind::Categorical, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let csv = "a,b,c,cls\n1,2,x,A\n3,4,y,B\n5,6,z,A\n";
        let enc = fit_encoder(&parse_csv(csv, &schema).unwrap()).unwrap();
        assert_eq!(enc.dim, 5);
    }

    #[test]
    fn encode_midpoint_endpoints_onehot() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let (feats, labels) = encode(&enc, &table).unwrap();
        // v=0 -> -1, v=5 -> 0, v=10 -> +1
        assert_eq!(feats[0][0], -1.0);
        assert_eq!(feats[1][0], 0.0);
        assert_eq!(feats[2][0], 1.0);
        // dog -> [0,1]
        assert_eq!(&feats[1][1..], &[0.0, 1.0]);
        assert_eq!(labels, vec![0, 0, 0, 1]);
    }

    #[test]
    fn unseen_category_errors() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let row = vec![
            Cell::Continuous(1.0),
            Cell::Categorical("bird".into()),
            Cell::Categorical("A".into()),
        ];
        match encode_row(&enc, &row) {
            Err(SosError::UnseenCategory { column, value }) => {
                assert_eq!(column, "pet");
                assert_eq!(value, "bird");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decode_inverse_argmax_clamp() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let rows = decode(&enc, &[vec![0.0, 0.2, 0.7], vec![1.7, 0.5, 0.5]]).unwrap();
        assert_eq!(rows[0][0], Cell::Continuous(5.0));
        assert_eq!(rows[0][1], Cell::Categorical("dog".into()));
        // 1.7 clamps to max=10; one-hot tie breaks to the lowest index
        assert_eq!(rows[1][0], Cell::Continuous(10.0));
        assert_eq!(rows[1][1], Cell::Categorical("cat".into()));
    }

    #[test]
    fn round_trip_rows() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let (feats, _) = encode(&enc, &table).unwrap();
        let decoded = decode(&enc, &feats).unwrap();
        for (orig, dec) in table.rows.iter().zip(&decoded) {
            match (&orig[0], &dec[0]) {
                (Cell::Continuous(a), Cell::Continuous(b)) => assert!((a - b).abs() < 1e-9),
                _ => panic!("kind drift"),
            }
            assert_eq!(orig[1], dec[1]);
        }
    }

    #[test]
    fn encoded_features_stay_in_unit_box() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let (feats, _) = encode(&enc, &table).unwrap();
        for row in &feats {
            for v in row {
                assert!((-1.0..=1.0).contains(v), "feature {v} escaped [-1,1]");
            }
        }
    }

    #[test]
    fn constant_column_widened() {
        let schema = Schema::new(
            vec![
                Column { name: "k".into(), kind: ColumnKind::Continuous, integer: false },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let enc = fit_encoder(&parse_csv("k,cls\n7,A\n7,B\n", &schema).unwrap()).unwrap();
        assert!(enc.maxs[0] > enc.mins[0]);
        let feats = vec![vec![-1.0]];
        let rows = decode(&enc, &feats).unwrap();
        assert_eq!(rows[0][0], Cell::Continuous(7.0));
    }

    #[test]
    fn integer_column_rounds_on_decode() {
        let schema = Schema::new(
            vec![
                Column { name: "n".into(), kind: ColumnKind::Continuous, integer: true },
                Column { name: "cls".into(), kind: ColumnKind::Categorical, integer: false },
            ],
            "cls",
        )
        .unwrap();
        let enc = fit_encoder(&parse_csv("n,cls\n0,A\n10,B\n", &schema).unwrap()).unwrap();
        let rows = decode(&enc, &[vec![0.26]]).unwrap(); // 6.3 -> 6
        assert_eq!(rows[0][0], Cell::Continuous(6.0));
    }

    #[test]
    fn partition_major_minor_and_ties() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let part = partition_classes(&table).unwrap();
        assert_eq!(part.major, 0);
        assert_eq!(part.minors, vec![1]);
        assert_eq!(part.counts.iter().map(|(_, n)| n).sum::<usize>(), table.n_rows());

        let tied = parse_csv("age,pet,cls\n1,cat,A\n2,cat,B\n3,cat,B\n4,cat,A\n", &toy_schema())
            .unwrap();
        let part = partition_classes(&tied).unwrap();
        assert_eq!(part.major, 0, "tie breaks to the lowest class id");
    }

    #[test]
    fn single_class_partition_errors() {
        let table = parse_csv("age,pet,cls\n1,cat,A\n2,dog,A\n", &toy_schema()).unwrap();
        assert!(matches!(partition_classes(&table), Err(SosError::SingleClass)));
    }

    #[test]
    fn satimage_shaped_counts() {
        let counts = [2282usize, 1336, 1080, 562, 573, 539];
        let mut csv = String::from("age,pet,cls\n");
        for (c, n) in counts.iter().enumerate() {
            for _ in 0..*n {
                csv.push_str(&format!("1,cat,c{c}\n"));
            }
        }
        let table = parse_csv(&csv, &toy_schema()).unwrap();
        let part = partition_classes(&table).unwrap();
        assert_eq!(part.major, 0);
        assert_eq!(part.minors.len(), 5);
    }

    #[test]
    fn encoder_round_trips_through_json() {
        let table = parse_csv(toy_csv(), &toy_schema()).unwrap();
        let enc = fit_encoder(&table).unwrap();
        let json = serde_json::to_string(&enc).unwrap();
        let back: Encoder = serde_json::from_str(&json).unwrap();
        assert_eq!(back.mins, enc.mins);
        assert_eq!(back.maxs, enc.maxs);
        assert_eq!(back.vocabularies, enc.vocabularies);
        assert_eq!(back.dim, enc.dim);
    }
}
