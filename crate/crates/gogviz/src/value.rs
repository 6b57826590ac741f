//! The cell value type shared by every layer.

use std::fmt;
use std::hash::{Hash, Hasher};

/// A single cell of a table: a finite number, text, boolean, or null.
///
/// Non-finite numbers cannot be constructed; loaders map NaN and infinities
/// to [`DataValue::Null`] and emit a warning instead.
#[derive(Debug, Clone, PartialEq)]
pub enum DataValue {
    Number(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl DataValue {
    /// Builds a numeric value, returning `None` for NaN or infinities.
    /// Negative zero is normalized to zero so equality and hashing agree.
    pub fn number(v: f64) -> Option<DataValue> {
        if v.is_finite() {
            Some(DataValue::Number(if v == 0.0 { 0.0 } else { v }))
        } else {
            None
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, DataValue::Null)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            DataValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            DataValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            DataValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// The column type this single value would demand, `None` for null.
    pub fn column_type(&self) -> Option<ColumnType> {
        match self {
            DataValue::Number(_) => Some(ColumnType::Number),
            DataValue::Text(_) => Some(ColumnType::Text),
            DataValue::Bool(_) => Some(ColumnType::Bool),
            DataValue::Null => None,
        }
    }
}

// No NaN can exist (enforced by `number`), so equality is an equivalence
// relation and hashing by bit pattern is consistent with it.
impl Eq for DataValue {}

impl Hash for DataValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            DataValue::Number(v) => {
                0u8.hash(state);
                v.to_bits().hash(state);
            }
            DataValue::Text(s) => {
                1u8.hash(state);
                s.hash(state);
            }
            DataValue::Bool(b) => {
                2u8.hash(state);
                b.hash(state);
            }
            DataValue::Null => 3u8.hash(state),
        }
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataValue::Number(v) => write!(f, "{v}"),
            DataValue::Text(s) => write!(f, "{s}"),
            DataValue::Bool(b) => write!(f, "{b}"),
            DataValue::Null => write!(f, "null"),
        }
    }
}

/// Inferred type of a column: the narrowest of number/text/bool covering
/// every non-null cell. Mixing incompatible kinds widens to text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Number,
    Text,
    Bool,
}

impl ColumnType {
    /// The narrowest type covering both operands.
    pub fn widen(self, other: ColumnType) -> ColumnType {
        if self == other {
            self
        } else {
            ColumnType::Text
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnType::Number => write!(f, "number"),
            ColumnType::Text => write!(f, "text"),
            ColumnType::Bool => write!(f, "boolean"),
        }
    }
}
