use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::Literal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Integer,
    Real,
    String,
    Date,
}

impl ColumnType {
    fn name(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Real => "real",
            ColumnType::String => "string",
            ColumnType::Date => "date",
        }
    }
}

/// Typed cell. Reals compare by `total_cmp`, so values are totally ordered
/// and hashable.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Real(f64),
    Str(String),
    Date(NaiveDate),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(x) => Some(*x),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) | Value::Real(_) => 0,
            Value::Str(_) => 1,
            Value::Date(_) => 2,
        }
    }

    pub fn parse(raw: &str, ty: ColumnType) -> Option<Value> {
        let s = raw.trim();
        match ty {
            ColumnType::Integer => s.parse().ok().map(Value::Int),
            ColumnType::Real => s.parse().ok().map(Value::Real),
            ColumnType::String => Some(Value::Str(raw.to_string())),
            ColumnType::Date => NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(Value::Date),
        }
    }

    /// Types a config literal against a column.
    pub fn from_literal(lit: &Literal, ty: ColumnType) -> Option<Value> {
        match (lit, ty) {
            (Literal::Number(x), ColumnType::Integer) if x.fract() == 0.0 => Some(Value::Int(*x as i64)),
            (Literal::Number(x), ColumnType::Integer | ColumnType::Real) => Some(Value::Real(*x)),
            (Literal::Number(x), ColumnType::String) => Some(Value::Str(x.to_string())),
            (Literal::Number(_), ColumnType::Date) => None,
            (Literal::Text(s), ty) => Value::parse(s, ty),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (a, b) if a.rank() == 0 && b.rank() == 0 => {
                a.as_f64().unwrap().total_cmp(&b.as_f64().unwrap())
            }
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            // Int and Real compare across variants, so hash through f64.
            Value::Int(i) => (*i as f64).to_bits().hash(state),
            Value::Real(x) => x.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
            Value::Date(d) => d.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn new(cols: &[(&str, ColumnType)]) -> Self {
        Self {
            columns: cols
                .iter()
                .map(|(n, t)| Column {
                    name: n.to_string(),
                    ty: *t,
                })
                .collect(),
        }
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column_type(&self, idx: usize) -> ColumnType {
        self.columns[idx].ty
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Immutable typed table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    /// Appends a row after checking arity and types.
    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::Arity {
                row: self.rows.len() + 1,
                expected: self.schema.len(),
                found: row.len(),
            });
        }
        for (v, col) in row.iter().zip(&self.schema.columns) {
            let ok = matches!(
                (v, col.ty),
                (Value::Int(_), ColumnType::Integer)
                    | (Value::Real(_), ColumnType::Real)
                    | (Value::Str(_), ColumnType::String)
                    | (Value::Date(_), ColumnType::Date)
            );
            if !ok {
                return Err(Error::TypeConversion {
                    row: self.rows.len() + 1,
                    column: col.name.clone(),
                    value: v.to_string(),
                    expected: col.ty.name(),
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.schema.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads a headed CSV file against a schema. Header names must match the
/// schema in order; row numbers in errors are 1-based data rows.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    for col in &schema.columns {
        if !headers.iter().any(|h| h == col.name) {
            return Err(Error::UnknownColumn(col.name.clone()));
        }
    }
    let positions: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| headers.iter().position(|h| h == c.name).unwrap())
        .collect();
    let mut data = Dataset::new(schema.clone());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row_no = i + 1;
        let mut row = Vec::with_capacity(positions.len());
        for (col, &p) in schema.columns.iter().zip(&positions) {
            let raw = rec.get(p).unwrap_or("");
            let v = Value::parse(raw, col.ty).ok_or_else(|| Error::TypeConversion {
                row: row_no,
                column: col.name.clone(),
                value: raw.to_string(),
                expected: col.ty.name(),
            })?;
            row.push(v);
        }
        data.rows.push(row);
    }
    Ok(data)
}

/// Reads only the header and guesses each column's type from its values:
/// integer, then real, then ISO date, else string.
pub fn infer_schema(path: impl AsRef<Path>) -> Result<Schema> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut candidates = vec![[true; 3]; headers.len()];
    for rec in rdr.records() {
        let rec = rec?;
        for (j, cell) in rec.iter().enumerate().take(headers.len()) {
            let c = &mut candidates[j];
            let s = cell.trim();
            c[0] &= s.parse::<i64>().is_ok();
            c[1] &= s.parse::<f64>().is_ok();
            c[2] &= NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok();
        }
    }
    let columns = headers
        .into_iter()
        .zip(candidates)
        .map(|(name, c)| Column {
            name,
            ty: if c[0] {
                ColumnType::Integer
            } else if c[1] {
                ColumnType::Real
            } else if c[2] {
                ColumnType::Date
            } else {
                ColumnType::String
            },
        })
        .collect();
    Ok(Schema { columns })
}
