//! Transformation layer: filtering, grouping with aggregates, the table
//! algebra (join, cross, nest), per-field variable functions, and table
//! generators. Every operation is a pure function from immutable inputs to
//! a new table.

pub mod expr;
pub mod stats;

use crate::datastore::{Column, DataError, DataRegistry, DataTable};
use crate::value::{ColumnType, DataValue};
use std::collections::HashMap;
use thiserror::Error;

pub use expr::{parse_predicate, Expr, PredicateError};
pub use stats::{compute_stat, quantile_type7, Stat, StatError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("bad properties for {function}: {reason}")]
    BadProperties { function: String, reason: String },
    #[error("domain error in {function}: {reason}")]
    DomainError { function: String, reason: String },
    #[error("at most 9 glyph fields are supported, got {0}")]
    TooManyGlyphFields(usize),
    #[error("output dataset name {0:?} collides with an existing dataset")]
    OutputNameCollision(String),
}

/// One step of the spec's `transform` block.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformStep {
    Filter {
        data: String,
        predicate: String,
        output: Option<String>,
    },
    Group {
        data: String,
        keys: Vec<String>,
        aggregates: Vec<AggregateSpec>,
        output: Option<String>,
    },
    Join {
        left: String,
        right: String,
        key: String,
        side: JoinSide,
        output: String,
    },
    Cross {
        left: String,
        right: String,
        output: String,
    },
    Nest {
        data: String,
        x: String,
        y: String,
        fields: Vec<String>,
        output: String,
    },
    /// `{"function": ..., "properties": ...}` form: either a table generator
    /// (fibonacci, linspace) creating a dataset named `properties.name`, or a
    /// variable function (pow, log, identity) appending a column named
    /// `properties.name` to `properties.data`.
    Function {
        function: String,
        properties: serde_json::Map<String, serde_json::Value>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSpec {
    pub field: String,
    pub stat: Stat,
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinSide {
    Left,
    Right,
}

/// Keeps rows satisfying the predicate, in their original order. Rows where
/// any referenced field is null are dropped.
pub fn apply_filter(table: &DataTable, predicate: &str) -> Result<DataTable, TransformError> {
    let expr = expr::parse_predicate(predicate)?;
    expr::check_predicate(&expr, table)?;
    let cells = table
        .rows()
        .iter()
        .filter(|row| expr::eval_predicate(&expr, table, row) == Some(true))
        .cloned()
        .collect();
    Ok(DataTable::with_columns(table.name(), table.columns().to_vec(), cells))
}

/// Groups by the key fields (first-occurrence order of key tuples) and
/// appends one aggregate column per spec. `count` counts rows in the group;
/// every other statistic sees the group's non-null values of its field.
pub fn apply_group(
    table: &DataTable,
    keys: &[String],
    aggregates: &[AggregateSpec],
) -> Result<DataTable, TransformError> {
    let key_idx: Vec<usize> = keys
        .iter()
        .map(|k| {
            table
                .column_index(k)
                .ok_or_else(|| DataError::UnknownField(k.clone()))
        })
        .collect::<Result<_, _>>()?;
    let agg_idx: Vec<usize> = aggregates
        .iter()
        .map(|a| {
            table
                .column_index(&a.field)
                .ok_or_else(|| DataError::UnknownField(a.field.clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut order: Vec<Vec<DataValue>> = Vec::new();
    let mut groups: HashMap<Vec<DataValue>, Vec<usize>> = HashMap::new();
    for (r, row) in table.rows().iter().enumerate() {
        let key: Vec<DataValue> = key_idx.iter().map(|&i| row[i].clone()).collect();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }

    let mut columns: Vec<Column> = key_idx
        .iter()
        .map(|&i| table.columns()[i].clone())
        .collect();
    columns.extend(aggregates.iter().map(|a| Column {
        name: a.output.clone(),
        ty: ColumnType::Number,
    }));
    let mut cells = Vec::with_capacity(order.len());
    for key in &order {
        let rows = &groups[key];
        let mut out = key.clone();
        for (a, &col) in aggregates.iter().zip(&agg_idx) {
            let v = if a.stat == Stat::Count {
                rows.len() as f64
            } else {
                let values: Vec<f64> = rows
                    .iter()
                    .filter_map(|&r| table.rows()[r][col].as_number())
                    .collect();
                compute_stat(&values, a.stat)?
            };
            out.push(DataValue::number(v).unwrap_or(DataValue::Null));
        }
        cells.push(out);
    }
    Ok(DataTable::with_columns(table.name(), columns, cells))
}

/// Left or right join on a single key. Keeps every row of the anchor side,
/// attaching the first matching row's non-key columns from the other side
/// (nulls when unmatched). Null keys never match. Duplicate keys on the
/// looked-up side attach their first row and push a warning.
pub fn algebra_join(
    left: &DataTable,
    right: &DataTable,
    key: &str,
    side: JoinSide,
    warnings: &mut Vec<String>,
) -> Result<DataTable, TransformError> {
    match side {
        JoinSide::Left => join_impl(left, right, key, "_r", warnings),
        JoinSide::Right => join_impl(right, left, key, "_l", warnings),
    }
}

fn join_impl(
    anchor: &DataTable,
    lookup: &DataTable,
    key: &str,
    suffix: &str,
    warnings: &mut Vec<String>,
) -> Result<DataTable, TransformError> {
    let anchor_key = anchor
        .column_index(key)
        .ok_or_else(|| DataError::UnknownField(key.to_string()))?;
    let lookup_key = lookup
        .column_index(key)
        .ok_or_else(|| DataError::UnknownField(key.to_string()))?;

    let mut first_match: HashMap<DataValue, usize> = HashMap::new();
    let mut dup_keys = 0usize;
    for (r, row) in lookup.rows().iter().enumerate() {
        let k = &row[lookup_key];
        if k.is_null() {
            continue;
        }
        if first_match.contains_key(k) {
            dup_keys += 1;
        } else {
            first_match.insert(k.clone(), r);
        }
    }
    if dup_keys > 0 {
        warnings.push(format!(
            "join key {key:?}: {dup_keys} duplicate key row(s) in {}; first match attached",
            lookup.name()
        ));
    }

    let attach: Vec<usize> = (0..lookup.columns().len())
        .filter(|&c| c != lookup_key)
        .collect();
    let mut columns: Vec<Column> = anchor.columns().to_vec();
    for &c in &attach {
        let col = &lookup.columns()[c];
        let name = if columns.iter().any(|f| f.name == col.name) {
            format!("{}{suffix}", col.name)
        } else {
            col.name.clone()
        };
        columns.push(Column { name, ty: col.ty });
    }

    let cells = anchor
        .rows()
        .iter()
        .map(|row| {
            let mut out = row.clone();
            match first_match.get(&row[anchor_key]) {
                Some(&m) => {
                    for &c in &attach {
                        out.push(lookup.rows()[m][c].clone());
                    }
                }
                None => out.extend(attach.iter().map(|_| DataValue::Null)),
            }
            out
        })
        .collect();
    Ok(DataTable::with_columns(anchor.name(), columns, cells))
}

/// Cartesian product in left row-major order; right column names that
/// collide are suffixed `_r`.
pub fn algebra_cross(left: &DataTable, right: &DataTable) -> DataTable {
    let mut columns: Vec<Column> = left.columns().to_vec();
    for c in right.columns() {
        let name = if columns.iter().any(|f| f.name == c.name) {
            format!("{}_r", c.name)
        } else {
            c.name.clone()
        };
        columns.push(Column { name, ty: c.ty });
    }
    let mut cells = Vec::with_capacity(left.row_count() * right.row_count());
    for l in left.rows() {
        for r in right.rows() {
            let mut row = l.clone();
            row.extend(r.iter().cloned());
            cells.push(row);
        }
    }
    DataTable::with_columns(left.name(), columns, cells)
}

/// Per-record 3×3 greyscale glyph: block levels in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct NestGlyph {
    pub x: f64,
    pub y: f64,
    /// Grey levels in [0, 1], row-major. Blocks beyond the provided fields
    /// sit at mid-grey 0.5.
    pub levels: [f64; 9],
}

/// Reduces every row to an (x, y, glyph) triple. Each glyph block carries
/// one field's value normalized over that field's whole column; a constant
/// column maps to 0.5, as does a null cell. Rows with null x or y are
/// skipped with a warning.
pub fn algebra_nest(
    table: &DataTable,
    x: &str,
    y: &str,
    glyph_fields: &[String],
    warnings: &mut Vec<String>,
) -> Result<Vec<NestGlyph>, TransformError> {
    if glyph_fields.len() > 9 {
        return Err(TransformError::TooManyGlyphFields(glyph_fields.len()));
    }
    for f in [x, y] {
        if table.column_type(f).is_none() {
            return Err(DataError::UnknownField(f.to_string()).into());
        }
        if table.column_type(f) != Some(ColumnType::Number) {
            return Err(DataError::NonNumericField(f.to_string()).into());
        }
    }
    let extents: Vec<(usize, f64, f64)> = glyph_fields
        .iter()
        .map(|f| {
            let idx = table
                .column_index(f)
                .ok_or_else(|| DataError::UnknownField(f.clone()))?;
            if table.columns()[idx].ty != ColumnType::Number {
                return Err(DataError::NonNumericField(f.clone()).into());
            }
            let (lo, hi) = table.column_extent(f)?;
            Ok((idx, lo, hi))
        })
        .collect::<Result<_, TransformError>>()?;
    let xi = table.column_index(x).unwrap();
    let yi = table.column_index(y).unwrap();

    let mut out = Vec::new();
    for (r, row) in table.rows().iter().enumerate() {
        let (px, py) = match (row[xi].as_number(), row[yi].as_number()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                warnings.push(format!("nest: row {r} skipped (null x or y)"));
                continue;
            }
        };
        let mut levels = [0.5f64; 9];
        for (block, &(idx, lo, hi)) in extents.iter().enumerate() {
            levels[block] = match row[idx].as_number() {
                Some(v) if hi > lo => (v - lo) / (hi - lo),
                _ => 0.5,
            };
        }
        out.push(NestGlyph { x: px, y: py, levels });
    }
    Ok(out)
}

/// Materializes nest output as a table with columns `x`, `y`, `g0`..`g8`,
/// the interchange format the picture geometry consumes.
pub fn nest_to_table(name: &str, glyphs: &[NestGlyph]) -> DataTable {
    let mut columns = vec![
        Column { name: "x".into(), ty: ColumnType::Number },
        Column { name: "y".into(), ty: ColumnType::Number },
    ];
    columns.extend((0..9).map(|i| Column { name: format!("g{i}"), ty: ColumnType::Number }));
    let cells = glyphs
        .iter()
        .map(|g| {
            let mut row = vec![
                DataValue::number(g.x).unwrap_or(DataValue::Null),
                DataValue::number(g.y).unwrap_or(DataValue::Null),
            ];
            row.extend(
                g.levels
                    .iter()
                    .map(|&l| DataValue::number(l).unwrap_or(DataValue::Null)),
            );
            row
        })
        .collect();
    DataTable::with_columns(name, columns, cells)
}

/// The per-field variable functions of the transform layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariableFn {
    Pow(f64),
    Log,
    Identity,
}

impl VariableFn {
    pub fn parse(function: &str, power: Option<f64>) -> Result<VariableFn, TransformError> {
        match function {
            "pow" => Ok(VariableFn::Pow(power.unwrap_or(1.0))),
            "log" => Ok(VariableFn::Log),
            "identity" => Ok(VariableFn::Identity),
            other => Err(TransformError::UnknownFunction(other.to_string())),
        }
    }

    pub fn apply(&self, v: f64) -> Result<f64, TransformError> {
        match self {
            VariableFn::Pow(k) => Ok(v.powf(*k)),
            VariableFn::Log => {
                if v <= 0.0 {
                    Err(TransformError::DomainError {
                        function: "log".into(),
                        reason: format!("log of non-positive value {v}"),
                    })
                } else {
                    Ok(v.ln())
                }
            }
            VariableFn::Identity => Ok(v),
        }
    }
}

/// Appends a column named `output` holding `f(field)` per row; nulls pass
/// through as nulls.
pub fn apply_variable_transform(
    table: &DataTable,
    f: VariableFn,
    field: &str,
    output: &str,
) -> Result<DataTable, TransformError> {
    let idx = table
        .column_index(field)
        .ok_or_else(|| DataError::UnknownField(field.to_string()))?;
    if table.columns()[idx].ty != ColumnType::Number {
        return Err(DataError::NonNumericField(field.to_string()).into());
    }
    let mut columns: Vec<Column> = table.columns().to_vec();
    columns.push(Column { name: output.to_string(), ty: ColumnType::Number });
    let cells = table
        .rows()
        .iter()
        .map(|row| {
            let mut out = row.clone();
            let v = match row[idx].as_number() {
                Some(v) => DataValue::number(f.apply(v)?).unwrap_or(DataValue::Null),
                None => DataValue::Null,
            };
            out.push(v);
            Ok(out)
        })
        .collect::<Result<Vec<_>, TransformError>>()?;
    Ok(DataTable::with_columns(table.name(), columns, cells))
}

/// Runs a table generator. Built-ins:
///
/// * `fibonacci`: properties `length`, `field` — the first `length`
///   Fibonacci numbers starting 1, 1.
/// * `linspace`: properties `start`, `stop`, `length`, `field` — `length`
///   evenly spaced values from `start` to `stop` inclusive.
pub fn run_generator(
    function: &str,
    name: &str,
    properties: &serde_json::Map<String, serde_json::Value>,
) -> Result<DataTable, TransformError> {
    let get_usize = |key: &str| -> Result<usize, TransformError> {
        properties
            .get(key)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| TransformError::BadProperties {
                function: function.to_string(),
                reason: format!("missing or non-integer {key:?}"),
            })
    };
    let get_f64 = |key: &str| -> Result<f64, TransformError> {
        properties
            .get(key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| TransformError::BadProperties {
                function: function.to_string(),
                reason: format!("missing or non-numeric {key:?}"),
            })
    };
    let field = properties
        .get("field")
        .and_then(|v| v.as_str())
        .unwrap_or("x")
        .to_string();

    let values: Vec<f64> = match function {
        "fibonacci" => {
            let n = get_usize("length")?;
            let mut out = Vec::with_capacity(n);
            let (mut a, mut b) = (1.0f64, 1.0f64);
            for _ in 0..n {
                out.push(a);
                let next = a + b;
                a = b;
                b = next;
            }
            out
        }
        "linspace" => {
            let n = get_usize("length")?;
            let start = get_f64("start")?;
            let stop = get_f64("stop")?;
            match n {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            }
        }
        other => return Err(TransformError::UnknownFunction(other.to_string())),
    };
    let cells = values
        .into_iter()
        .map(|v| vec![DataValue::number(v).unwrap_or(DataValue::Null)])
        .collect();
    Ok(DataTable::with_columns(
        name,
        vec![Column { name: field, ty: ColumnType::Number }],
        cells,
    ))
}

/// Table-producing steps land in the working registry: under `output` when
/// given (collision is an error), otherwise replacing their input dataset.
pub fn execute_step(
    step: &TransformStep,
    registry: &mut DataRegistry,
    warnings: &mut Vec<String>,
) -> Result<(), TransformError> {
    match step {
        TransformStep::Filter { data, predicate, output } => {
            let table = registry.read(data)?;
            let result = apply_filter(&table, predicate)?;
            store(registry, result, data, output.as_deref())
        }
        TransformStep::Group { data, keys, aggregates, output } => {
            let table = registry.read(data)?;
            let result = apply_group(&table, keys, aggregates)?;
            store(registry, result, data, output.as_deref())
        }
        TransformStep::Join { left, right, key, side, output } => {
            let l = registry.read(left)?;
            let r = registry.read(right)?;
            let result = algebra_join(&l, &r, key, *side, warnings)?;
            store(registry, result, left, Some(output))
        }
        TransformStep::Cross { left, right, output } => {
            let l = registry.read(left)?;
            let r = registry.read(right)?;
            let result = algebra_cross(&l, &r);
            store(registry, result, left, Some(output))
        }
        TransformStep::Nest { data, x, y, fields, output } => {
            let table = registry.read(data)?;
            let glyphs = algebra_nest(&table, x, y, fields, warnings)?;
            store(registry, nest_to_table(output, &glyphs), data, Some(output))
        }
        TransformStep::Function { function, properties } => {
            let name = properties
                .get("name")
                .and_then(|v| v.as_str())
                .ok_or_else(|| TransformError::BadProperties {
                    function: function.clone(),
                    reason: "missing \"name\"".into(),
                })?;
            match function.as_str() {
                "fibonacci" | "linspace" => {
                    let table = run_generator(function, name, properties)?;
                    if registry.contains(name) {
                        return Err(TransformError::OutputNameCollision(name.to_string()));
                    }
                    registry.put(table);
                    Ok(())
                }
                "pow" | "log" | "identity" => {
                    let data = properties
                        .get("data")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| TransformError::BadProperties {
                            function: function.clone(),
                            reason: "missing \"data\"".into(),
                        })?;
                    let field = properties
                        .get("field")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| TransformError::BadProperties {
                            function: function.clone(),
                            reason: "missing \"field\"".into(),
                        })?;
                    let power = properties.get("power").and_then(|v| v.as_f64());
                    let f = VariableFn::parse(function, power)?;
                    let table = registry.read(data)?;
                    let result = apply_variable_transform(&table, f, field, name)?;
                    let out = properties.get("output").and_then(|v| v.as_str());
                    store(registry, result, data, out)
                }
                other => Err(TransformError::UnknownFunction(other.to_string())),
            }
        }
    }
}

fn store(
    registry: &mut DataRegistry,
    table: DataTable,
    input: &str,
    output: Option<&str>,
) -> Result<(), TransformError> {
    match output {
        Some(name) if name != input => {
            if registry.contains(name) {
                return Err(TransformError::OutputNameCollision(name.to_string()));
            }
            registry.put(table.renamed(name));
        }
        _ => registry.put(table.renamed(input)),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datastore::load_csv;
    use proptest::prelude::*;

    fn table(src: &str) -> DataTable {
        load_csv(src.as_bytes(), "t", &mut Vec::new()).unwrap()
    }

    #[test]
    fn filter_keeps_matching_rows_in_order() {
        let t = table("a\n1\n2\n3");
        let f = apply_filter(&t, "a > 1").unwrap();
        assert_eq!(f.numeric_values("a").unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn filter_conjunction() {
        let t = table("a\n1\n2\n3");
        let f = apply_filter(&t, "a > 1 and a < 3").unwrap();
        assert_eq!(f.numeric_values("a").unwrap(), vec![2.0]);
    }

    #[test]
    fn filter_type_mismatch() {
        let t = table("b\n1\n2");
        assert!(matches!(
            apply_filter(&t, "b == \"x\"").unwrap_err(),
            TransformError::Predicate(PredicateError::TypeMismatch(_))
        ));
    }

    #[test]
    fn group_mean() {
        let t = table("k,v\na,1\na,3\nb,5");
        let g = apply_group(
            &t,
            &["k".into()],
            &[AggregateSpec { field: "v".into(), stat: Stat::Mean, output: "m".into() }],
        )
        .unwrap();
        assert_eq!(g.row_count(), 2);
        assert_eq!(g.rows()[0][0], DataValue::Text("a".into()));
        assert_eq!(g.rows()[0][1], DataValue::Number(2.0));
        assert_eq!(g.rows()[1][1], DataValue::Number(5.0));
    }

    #[test]
    fn group_count_is_group_size() {
        let t = table("k,v\na,1\na,3\nb,5");
        let g = apply_group(
            &t,
            &["k".into()],
            &[AggregateSpec { field: "v".into(), stat: Stat::Count, output: "n".into() }],
        )
        .unwrap();
        assert_eq!(g.rows()[0][1], DataValue::Number(2.0));
        assert_eq!(g.rows()[1][1], DataValue::Number(1.0));
    }

    #[test]
    fn group_quantile_aggregate() {
        let t = table("k,v\na,1\na,2\na,3\na,10");
        let g = apply_group(
            &t,
            &["k".into()],
            &[AggregateSpec {
                field: "v".into(),
                stat: Stat::Quantile(0.5),
                output: "q".into(),
            }],
        )
        .unwrap();
        assert_eq!(g.rows()[0][1], DataValue::Number(2.5));
    }

    #[test]
    fn group_empty_table() {
        let t = table("k,v\n");
        let g = apply_group(
            &t,
            &["k".into()],
            &[AggregateSpec { field: "v".into(), stat: Stat::Count, output: "n".into() }],
        )
        .unwrap();
        assert_eq!(g.row_count(), 0);
        assert_eq!(g.columns().len(), 2);
    }

    #[test]
    fn left_join_attaches_or_nulls() {
        let l = table("k\n1\n2");
        let r = table("k,v\n2,20\n3,30");
        let mut w = Vec::new();
        let j = algebra_join(&l, &r, "k", JoinSide::Left, &mut w).unwrap();
        assert_eq!(j.row_count(), 2);
        assert_eq!(j.rows()[0][1], DataValue::Null);
        assert_eq!(j.rows()[1][1], DataValue::Number(20.0));
        assert!(w.is_empty());
    }

    #[test]
    fn right_join_is_mirror() {
        let l = table("k\n1\n2");
        let r = table("k,v\n2,20\n3,30");
        let mut w = Vec::new();
        let j = algebra_join(&l, &r, "k", JoinSide::Right, &mut w).unwrap();
        assert_eq!(j.row_count(), 2);
        // anchored on right rows: (2,20) matched, (3,30) unmatched
        assert_eq!(j.rows()[0][0], DataValue::Number(2.0));
        assert_eq!(j.rows()[1][0], DataValue::Number(3.0));
    }

    #[test]
    fn duplicate_right_keys_warn_and_take_first() {
        let l = table("k\n2");
        let r = table("k,v\n2,20\n2,99");
        let mut w = Vec::new();
        let j = algebra_join(&l, &r, "k", JoinSide::Left, &mut w).unwrap();
        assert_eq!(j.rows()[0][1], DataValue::Number(20.0));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn join_column_collision_suffixed() {
        let l = table("k,v\n1,10");
        let r = table("k,v\n1,20");
        let mut w = Vec::new();
        let j = algebra_join(&l, &r, "k", JoinSide::Left, &mut w).unwrap();
        let names: Vec<&str> = j.columns().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["k", "v", "v_r"]);
    }

    #[test]
    fn cross_cardinality_and_order() {
        let l = table("a\n1\n2");
        let r = table("b\nx\ny\nz");
        let c = algebra_cross(&l, &r);
        assert_eq!(c.row_count(), 6);
        // left row-major: first three rows share a=1
        assert_eq!(c.rows()[0][0], DataValue::Number(1.0));
        assert_eq!(c.rows()[2][0], DataValue::Number(1.0));
        assert_eq!(c.rows()[3][0], DataValue::Number(2.0));
    }

    #[test]
    fn cross_with_empty_is_empty() {
        let l = table("a\n1\n2");
        let r = table("b\n");
        assert_eq!(algebra_cross(&l, &r).row_count(), 0);
    }

    #[test]
    fn nest_normalization_endpoints() {
        // row 0 holds every column's min, row 1 every max
        let mut src = String::from("x,y,f1,f2,f3,f4,f5,f6,f7,f8,f9\n");
        src.push_str("0,0,1,1,1,1,1,1,1,1,1\n");
        src.push_str("1,1,5,5,5,5,5,5,5,5,5\n");
        let t = table(&src);
        let fields: Vec<String> = (1..=9).map(|i| format!("f{i}")).collect();
        let mut w = Vec::new();
        let glyphs = algebra_nest(&t, "x", "y", &fields, &mut w).unwrap();
        assert!(glyphs[0].levels.iter().all(|&l| l == 0.0));
        assert!(glyphs[1].levels.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn nest_degenerate_column_is_mid_grey() {
        let t = table("x,y,c\n0,0,7\n1,1,7");
        let mut w = Vec::new();
        let glyphs = algebra_nest(&t, "x", "y", &["c".into()], &mut w).unwrap();
        assert_eq!(glyphs[0].levels[0], 0.5);
        // blocks without a field also sit at 0.5
        assert_eq!(glyphs[0].levels[8], 0.5);
    }

    #[test]
    fn nest_too_many_fields() {
        let t = table("x,y\n0,0");
        let fields: Vec<String> = (0..10).map(|i| format!("f{i}")).collect();
        assert!(matches!(
            algebra_nest(&t, "x", "y", &fields, &mut Vec::new()).unwrap_err(),
            TransformError::TooManyGlyphFields(10)
        ));
    }

    #[test]
    fn pow_transform() {
        let t = table("a\n3");
        let r = apply_variable_transform(&t, VariableFn::Pow(2.0), "a", "power").unwrap();
        assert_eq!(r.rows()[0][1], DataValue::Number(9.0));
    }

    #[test]
    fn identity_copies_column() {
        let t = table("a\n1\n2");
        let r = apply_variable_transform(&t, VariableFn::Identity, "a", "b").unwrap();
        assert_eq!(r.numeric_values("b").unwrap(), r.numeric_values("a").unwrap());
    }

    #[test]
    fn log_rejects_non_positive() {
        let t = table("a\n0");
        assert!(matches!(
            apply_variable_transform(&t, VariableFn::Log, "a", "l").unwrap_err(),
            TransformError::DomainError { .. }
        ));
    }

    #[test]
    fn fibonacci_generator() {
        let props = serde_json::json!({"length": 5, "field": "x"});
        let t = run_generator("fibonacci", "fib", props.as_object().unwrap()).unwrap();
        assert_eq!(t.numeric_values("x").unwrap(), vec![1.0, 1.0, 2.0, 3.0, 5.0]);
    }

    #[test]
    fn linspace_generator() {
        let props = serde_json::json!({"start": 0, "stop": 1, "length": 3, "field": "x"});
        let t = run_generator("linspace", "ls", props.as_object().unwrap()).unwrap();
        assert_eq!(t.numeric_values("x").unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_length_generator_is_empty() {
        let props = serde_json::json!({"length": 0, "field": "x"});
        let t = run_generator("fibonacci", "fib", props.as_object().unwrap()).unwrap();
        assert_eq!(t.row_count(), 0);
    }

    #[test]
    fn unknown_generator() {
        let props = serde_json::json!({"length": 1});
        assert!(matches!(
            run_generator("primes", "p", props.as_object().unwrap()).unwrap_err(),
            TransformError::UnknownFunction(_)
        ));
    }

    /// Brute-force nested-loop join oracle: for each anchor row scan the
    /// whole lookup table for the first equal non-null key.
    fn join_oracle(l: &DataTable, r: &DataTable, key: &str) -> Vec<Option<usize>> {
        let lk = l.column_index(key).unwrap();
        let rk = r.column_index(key).unwrap();
        l.rows()
            .iter()
            .map(|row| {
                if row[lk].is_null() {
                    return None;
                }
                r.rows().iter().position(|rr| rr[rk] == row[lk])
            })
            .collect()
    }

    proptest! {
        #[test]
        fn join_matches_nested_loop_oracle(
            lkeys in proptest::collection::vec(0i32..5, 0..8),
            rkeys in proptest::collection::vec(0i32..5, 0..8),
        ) {
            let mk = |name: &str, keys: &[i32], with_v: bool| {
                let fields = if with_v { vec!["k".to_string(), "v".to_string()] } else { vec!["k".to_string()] };
                let cells = keys.iter().enumerate().map(|(i, &k)| {
                    let mut row = vec![DataValue::Number(k as f64)];
                    if with_v { row.push(DataValue::Number(i as f64)); }
                    row
                }).collect();
                DataTable::from_cells(name, fields, cells)
            };
            let l = mk("l", &lkeys, false);
            let r = mk("r", &rkeys, true);
            let mut w = Vec::new();
            let j = algebra_join(&l, &r, "k", JoinSide::Left, &mut w).unwrap();
            prop_assert_eq!(j.row_count(), l.row_count());
            let expect = join_oracle(&l, &r, "k");
            for (row, m) in j.rows().iter().zip(expect) {
                match m {
                    Some(idx) => prop_assert_eq!(&row[1], &r.rows()[idx][1]),
                    None => prop_assert!(row[1].is_null()),
                }
            }
        }

        #[test]
        fn cross_equals_double_loop(
            a in proptest::collection::vec(-10i32..10, 0..6),
            b in proptest::collection::vec(-10i32..10, 0..6),
        ) {
            let mk = |name: &str, field: &str, vals: &[i32]| DataTable::from_cells(
                name,
                vec![field.to_string()],
                vals.iter().map(|&v| vec![DataValue::Number(v as f64)]).collect(),
            );
            let l = mk("l", "a", &a);
            let r = mk("r", "b", &b);
            let c = algebra_cross(&l, &r);
            prop_assert_eq!(c.row_count(), a.len() * b.len());
            let mut i = 0;
            for &x in &a {
                for &y in &b {
                    prop_assert_eq!(&c.rows()[i][0], &DataValue::Number(x as f64));
                    prop_assert_eq!(&c.rows()[i][1], &DataValue::Number(y as f64));
                    i += 1;
                }
            }
        }

        #[test]
        fn filter_is_idempotent(vals in proptest::collection::vec(-100i32..100, 0..30), cut in -100i32..100) {
            let t = DataTable::from_cells(
                "t",
                vec!["a".to_string()],
                vals.iter().map(|&v| vec![DataValue::Number(v as f64)]).collect(),
            );
            let pred = format!("a > {cut}");
            let once = apply_filter(&t, &pred).unwrap();
            let twice = apply_filter(&once, &pred).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn group_by_whole_row_counts_ones(vals in proptest::collection::vec(0i32..50, 1..20)) {
            let t = DataTable::from_cells(
                "t",
                vec!["a".to_string()],
                vals.iter().map(|&v| vec![DataValue::Number(v as f64)]).collect(),
            );
            // whole row = every column as key; counts are all ones only when
            // rows are distinct, so group by a synthetic unique key
            let unique = DataTable::from_cells(
                "t",
                vec!["a".to_string(), "i".to_string()],
                vals.iter().enumerate().map(|(i, &v)| vec![
                    DataValue::Number(v as f64),
                    DataValue::Number(i as f64),
                ]).collect(),
            );
            let g = apply_group(
                &unique,
                &["a".into(), "i".into()],
                &[AggregateSpec { field: "a".into(), stat: Stat::Count, output: "n".into() }],
            ).unwrap();
            prop_assert_eq!(g.row_count(), t.row_count());
            for row in g.rows() {
                prop_assert_eq!(&row[2], &DataValue::Number(1.0));
            }
        }

        #[test]
        fn nest_levels_invariant_under_affine_rescale(
            vals in proptest::collection::vec(-50i32..50, 2..12),
            scale in 0.1f64..10.0,
            shift in -100.0f64..100.0,
        ) {
            let mk = |vals: &[f64]| DataTable::from_cells(
                "t",
                vec!["x".to_string(), "y".to_string(), "c".to_string()],
                vals.iter().enumerate().map(|(i, &v)| vec![
                    DataValue::Number(i as f64),
                    DataValue::Number(i as f64),
                    DataValue::Number(v),
                ]).collect(),
            );
            let base: Vec<f64> = vals.iter().map(|&v| v as f64).collect();
            let scaled: Vec<f64> = base.iter().map(|v| v * scale + shift).collect();
            let g1 = algebra_nest(&mk(&base), "x", "y", &["c".into()], &mut Vec::new()).unwrap();
            let g2 = algebra_nest(&mk(&scaled), "x", "y", &["c".into()], &mut Vec::new()).unwrap();
            for (a, b) in g1.iter().zip(&g2) {
                prop_assert!((a.levels[0] - b.levels[0]).abs() < 1e-9);
            }
        }
    }
}
