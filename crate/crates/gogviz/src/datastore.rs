//! Data layer: load tabular datasets from CSV/TSV and JSON sources, keep
//! them in a named registry with CRUD operations, and serve typed columns
//! to the layers above.
//!
//! Tables are immutable once loaded and shared via `Arc`; a compilation run
//! works on a snapshot of the registry, so concurrent compilations never
//! observe each other's CRUD.

use crate::value::{ColumnType, DataValue};
use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("malformed json: {0}")]
    MalformedJson(String),
    #[error("json root must be an array of objects")]
    NonArrayRoot,
    #[error("row {row}, key {key:?}: nested objects and arrays are not supported")]
    NestedObjectValue { row: usize, key: String },
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("dataset {0:?} already exists")]
    DuplicateDataset(String),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("field {0:?} is not numeric")]
    NonNumericField(String),
    #[error("field {0:?} has no non-null values")]
    AllNull(String),
}

/// A named column with its inferred type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

/// A named, column-typed, immutable table.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    name: String,
    columns: Vec<Column>,
    rows: Vec<Vec<DataValue>>,
}

impl DataTable {
    /// Builds a table from raw cells, inferring each column's type as the
    /// narrowest of number/text/bool covering its non-null cells.
    ///
    /// Cells that were classified ambiguously (e.g. the text `"true"` in a
    /// column that widens to text) are re-materialized under the final
    /// column type, so inference is independent of row order.
    pub fn from_cells(
        name: impl Into<String>,
        fields: Vec<String>,
        cells: Vec<Vec<DataValue>>,
    ) -> DataTable {
        let types: Vec<ColumnType> = (0..fields.len())
            .map(|c| {
                cells
                    .iter()
                    .filter_map(|row| row[c].column_type())
                    .fold(None, |acc: Option<ColumnType>, t| {
                        Some(acc.map_or(t, |a| a.widen(t)))
                    })
                    .unwrap_or(ColumnType::Text)
            })
            .collect();
        let rows = cells
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .zip(&types)
                    .map(|(v, ty)| coerce(v, *ty))
                    .collect()
            })
            .collect();
        let columns = fields
            .into_iter()
            .zip(types)
            .map(|(name, ty)| Column { name, ty })
            .collect();
        DataTable {
            name: name.into(),
            columns,
            rows,
        }
    }

    /// Builds a table with known column types. Used by transform
    /// operations so rebuilt tables keep their input types (re-inference
    /// on an empty or all-null column would widen to text).
    pub fn with_columns(
        name: impl Into<String>,
        columns: Vec<Column>,
        rows: Vec<Vec<DataValue>>,
    ) -> DataTable {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        DataTable { name: name.into(), columns, rows }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<DataValue>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, field: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == field)
    }

    pub fn column_type(&self, field: &str) -> Option<ColumnType> {
        self.columns
            .iter()
            .find(|c| c.name == field)
            .map(|c| c.ty)
    }

    /// Iterates a column's values in row order.
    pub fn column_values<'a>(
        &'a self,
        field: &str,
    ) -> Result<impl Iterator<Item = &'a DataValue> + 'a, DataError> {
        let idx = self
            .column_index(field)
            .ok_or_else(|| DataError::UnknownField(field.to_string()))?;
        Ok(self.rows.iter().map(move |r| &r[idx]))
    }

    /// Non-null numeric values of a numeric column, in row order.
    pub fn numeric_values(&self, field: &str) -> Result<Vec<f64>, DataError> {
        let idx = self
            .column_index(field)
            .ok_or_else(|| DataError::UnknownField(field.to_string()))?;
        if self.columns[idx].ty != ColumnType::Number {
            return Err(DataError::NonNumericField(field.to_string()));
        }
        Ok(self
            .rows
            .iter()
            .filter_map(|r| r[idx].as_number())
            .collect())
    }

    /// Minimum and maximum over the non-null values of a numeric column.
    /// An all-null column reports `AllNull` (there is no type evidence to
    /// call it non-numeric).
    pub fn column_extent(&self, field: &str) -> Result<(f64, f64), DataError> {
        let idx = self
            .column_index(field)
            .ok_or_else(|| DataError::UnknownField(field.to_string()))?;
        if self.rows.iter().all(|r| r[idx].is_null()) {
            return Err(DataError::AllNull(field.to_string()));
        }
        if self.columns[idx].ty != ColumnType::Number {
            return Err(DataError::NonNumericField(field.to_string()));
        }
        let mut it = self.rows.iter().filter_map(|r| r[idx].as_number());
        let first = it.next().ok_or_else(|| DataError::AllNull(field.to_string()))?;
        Ok(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Distinct non-null values of a column in first-occurrence order.
    pub fn distinct_values(&self, field: &str) -> Result<Vec<DataValue>, DataError> {
        let idx = self
            .column_index(field)
            .ok_or_else(|| DataError::UnknownField(field.to_string()))?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for row in &self.rows {
            let v = &row[idx];
            if !v.is_null() && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        Ok(out)
    }

    /// Same data under a different registry name.
    pub fn renamed(&self, name: impl Into<String>) -> DataTable {
        DataTable {
            name: name.into(),
            columns: self.columns.clone(),
            rows: self.rows.clone(),
        }
    }
}

fn coerce(v: DataValue, ty: ColumnType) -> DataValue {
    match (&v, ty) {
        (DataValue::Null, _) => DataValue::Null,
        (DataValue::Number(_), ColumnType::Number)
        | (DataValue::Text(_), ColumnType::Text)
        | (DataValue::Bool(_), ColumnType::Bool) => v,
        // Widened column: keep the cell's textual form.
        (_, ColumnType::Text) => DataValue::Text(v.to_string()),
        // Cannot happen: widen() only ever produces Text for mixed columns.
        _ => v,
    }
}

/// Named registry of loaded tables. Mutation is single-writer; compilations
/// take a read-only [`DataRegistry::snapshot`].
#[derive(Debug, Clone, Default)]
pub struct DataRegistry {
    tables: BTreeMap<String, Arc<DataTable>>,
}

impl DataRegistry {
    pub fn new() -> DataRegistry {
        DataRegistry::default()
    }

    pub fn create(&mut self, table: DataTable) -> Result<(), DataError> {
        if self.tables.contains_key(table.name()) {
            return Err(DataError::DuplicateDataset(table.name().to_string()));
        }
        self.tables.insert(table.name().to_string(), Arc::new(table));
        Ok(())
    }

    pub fn read(&self, name: &str) -> Result<Arc<DataTable>, DataError> {
        self.tables
            .get(name)
            .cloned()
            .ok_or_else(|| DataError::UnknownDataset(name.to_string()))
    }

    pub fn update(&mut self, table: DataTable) -> Result<(), DataError> {
        let name = table.name().to_string();
        if !self.tables.contains_key(&name) {
            return Err(DataError::UnknownDataset(name));
        }
        self.tables.insert(name, Arc::new(table));
        Ok(())
    }

    pub fn delete(&mut self, name: &str) -> Result<(), DataError> {
        self.tables
            .remove(name)
            .map(|_| ())
            .ok_or_else(|| DataError::UnknownDataset(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tables.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    /// Cheap copy for an isolated compilation run.
    pub fn snapshot(&self) -> DataRegistry {
        self.clone()
    }

    /// Insert-or-replace, used by transform steps that rewrite their input.
    pub fn put(&mut self, table: DataTable) {
        self.tables.insert(table.name().to_string(), Arc::new(table));
    }
}

/// Classifies one raw text cell the way the CSV loader sees it.
///
/// Trims surrounding whitespace first. Empty cells are null; `true`/`false`
/// are booleans; anything that fully parses as a decimal float is numeric,
/// except non-finite spellings (`NaN`, `inf`), which become null and push a
/// warning. Everything else is text.
fn classify_cell(raw: &str, warnings: &mut Vec<String>, context: &str) -> DataValue {
    let t = raw.trim();
    if t.is_empty() {
        return DataValue::Null;
    }
    if t == "true" {
        return DataValue::Bool(true);
    }
    if t == "false" {
        return DataValue::Bool(false);
    }
    if let Ok(n) = t.parse::<f64>() {
        return match DataValue::number(n) {
            Some(v) => v,
            None => {
                warnings.push(format!("{context}: non-finite number {t:?} stored as null"));
                DataValue::Null
            }
        };
    }
    DataValue::Text(t.to_string())
}

/// Parses RFC 4180 CSV (or TSV via `delimiter`) with a mandatory header row
/// into a typed table. Reports malformed rows with their 1-based line number.
pub fn load_delimited(
    source: &[u8],
    name: &str,
    delimiter: u8,
    warnings: &mut Vec<String>,
) -> Result<DataTable, DataError> {
    let text = std::str::from_utf8(source).map_err(|_| DataError::MalformedCsv {
        line: 1,
        reason: "input is not valid UTF-8".into(),
    })?;
    let records = split_records(text, delimiter as char)?;
    let mut it = records.into_iter();
    let (_, header) = it.next().ok_or(DataError::MalformedCsv {
        line: 1,
        reason: "missing header row".into(),
    })?;
    let mut seen = HashSet::new();
    for field in &header {
        if !seen.insert(field.clone()) {
            return Err(DataError::MalformedCsv {
                line: 1,
                reason: format!("duplicate field name {field:?} in header"),
            });
        }
    }
    let mut cells = Vec::new();
    for (line, record) in it {
        if record.len() != header.len() {
            return Err(DataError::MalformedCsv {
                line,
                reason: format!(
                    "expected {} fields, found {}",
                    header.len(),
                    record.len()
                ),
            });
        }
        cells.push(
            record
                .iter()
                .map(|raw| classify_cell(raw, warnings, &format!("{name} line {line}")))
                .collect(),
        );
    }
    Ok(DataTable::from_cells(name, header, cells))
}

pub fn load_csv(
    source: &[u8],
    name: &str,
    warnings: &mut Vec<String>,
) -> Result<DataTable, DataError> {
    load_delimited(source, name, b',', warnings)
}

pub fn load_tsv(
    source: &[u8],
    name: &str,
    warnings: &mut Vec<String>,
) -> Result<DataTable, DataError> {
    load_delimited(source, name, b'\t', warnings)
}

/// Splits text into records of fields, tracking the 1-based line each record
/// starts on. Quoted fields may contain the delimiter, newlines, and `""`
/// escapes; stray or unterminated quotes are errors.
fn split_records(text: &str, delim: char) -> Result<Vec<(usize, Vec<String>)>, DataError> {
    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut line = 1usize;
    let mut record_line = 1usize;
    let mut in_quotes = false;
    let mut quoted_field = false;
    let mut field_started = false;
    let mut chars = text.chars().peekable();

    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' => {
                    if chars.peek() == Some(&'"') {
                        chars.next();
                        field.push('"');
                    } else {
                        in_quotes = false;
                    }
                }
                '\n' => {
                    line += 1;
                    field.push(c);
                }
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if !field_started => {
                in_quotes = true;
                quoted_field = true;
                field_started = true;
            }
            '"' => {
                return Err(DataError::MalformedCsv {
                    line,
                    reason: "unexpected quote inside unquoted field".into(),
                });
            }
            c if c == delim => {
                record.push(std::mem::take(&mut field));
                quoted_field = false;
                field_started = false;
            }
            '\r' => {
                // only meaningful as part of CRLF; a bare CR is kept literally
                if chars.peek() == Some(&'\n') {
                    chars.next();
                    line += 1;
                    end_record(&mut records, &mut record, &mut field, record_line, field_started, quoted_field);
                    record_line = line;
                    quoted_field = false;
                    field_started = false;
                } else {
                    field.push('\r');
                    field_started = true;
                }
            }
            '\n' => {
                line += 1;
                end_record(&mut records, &mut record, &mut field, record_line, field_started, quoted_field);
                record_line = line;
                quoted_field = false;
                field_started = false;
            }
            c => {
                // after a closing quote only the delimiter or EOL may follow
                if quoted_field && !in_quotes {
                    return Err(DataError::MalformedCsv {
                        line,
                        reason: "data after closing quote".into(),
                    });
                }
                field.push(c);
                field_started = true;
            }
        }
    }
    if in_quotes {
        return Err(DataError::MalformedCsv {
            line: record_line,
            reason: "unbalanced quote".into(),
        });
    }
    end_record(&mut records, &mut record, &mut field, record_line, field_started, quoted_field);
    Ok(records)
}

fn end_record(
    records: &mut Vec<(usize, Vec<String>)>,
    record: &mut Vec<String>,
    field: &mut String,
    record_line: usize,
    field_started: bool,
    quoted_field: bool,
) {
    // skip fully empty trailing lines (no delimiter seen, nothing typed)
    if record.is_empty() && field.is_empty() && !field_started && !quoted_field {
        return;
    }
    record.push(std::mem::take(field));
    records.push((record_line, std::mem::take(record)));
}

/// Loads a JSON array of flat objects. The column set is the union of keys
/// in first-occurrence order; absent keys become null.
pub fn load_json(
    source: &[u8],
    name: &str,
    warnings: &mut Vec<String>,
) -> Result<DataTable, DataError> {
    let value: serde_json::Value =
        serde_json::from_slice(source).map_err(|e| DataError::MalformedJson(e.to_string()))?;
    load_json_value(&value, name, warnings)
}

/// Same as [`load_json`] but from an already-parsed value (inline `values`).
pub fn load_json_value(
    value: &serde_json::Value,
    name: &str,
    warnings: &mut Vec<String>,
) -> Result<DataTable, DataError> {
    let rows = value.as_array().ok_or(DataError::NonArrayRoot)?;
    let mut fields: Vec<String> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let obj = row.as_object().ok_or(DataError::NonArrayRoot)?;
        for (k, v) in obj {
            if v.is_object() || v.is_array() {
                return Err(DataError::NestedObjectValue {
                    row: i,
                    key: k.clone(),
                });
            }
            if !fields.iter().any(|f| f == k) {
                fields.push(k.clone());
            }
        }
    }
    let cells = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let obj = row.as_object().expect("checked above");
            fields
                .iter()
                .map(|f| match obj.get(f) {
                    None | Some(serde_json::Value::Null) => DataValue::Null,
                    Some(serde_json::Value::Bool(b)) => DataValue::Bool(*b),
                    Some(serde_json::Value::Number(n)) => {
                        let v = n.as_f64().unwrap_or(f64::NAN);
                        DataValue::number(v).unwrap_or_else(|| {
                            warnings.push(format!(
                                "{name} row {i}, key {f:?}: non-finite number stored as null"
                            ));
                            DataValue::Null
                        })
                    }
                    Some(serde_json::Value::String(s)) => DataValue::Text(s.clone()),
                    Some(_) => DataValue::Null,
                })
                .collect()
        })
        .collect();
    Ok(DataTable::from_cells(name, fields, cells))
}
