//! Filter predicate expressions: comparisons and boolean connectives over
//! field names and literals.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! expr   := and ("or" and)*
//! and    := not ("and" not)*
//! not    := "not" not | cmp
//! cmp    := primary (("<"|"<="|"=="|"!="|">="|">") primary)?
//! primary:= "(" expr ")" | number | string | "true" | "false" | field
//! ```
//!
//! Field names may contain dashes (`economy-mpg`); there is no arithmetic,
//! so the dash is unambiguous.

use crate::datastore::DataTable;
use crate::value::{ColumnType, DataValue};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredicateError {
    #[error("predicate parse error at byte {at}: {reason}")]
    Parse { at: usize, reason: String },
    #[error("unknown field {0:?} in predicate")]
    UnknownField(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Field(String),
    Number(f64),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Text(String),
    Op(CmpOp),
    LParen,
    RParen,
    And,
    Or,
    Not,
    True,
    False,
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>, PredicateError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                tokens.push((start, Token::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((start, Token::RParen));
                i += 1;
            }
            '<' | '>' | '=' | '!' => {
                let two = &src[i..(i + 2).min(src.len())];
                let (tok, len) = match two {
                    "<=" => (Token::Op(CmpOp::Le), 2),
                    ">=" => (Token::Op(CmpOp::Ge), 2),
                    "==" => (Token::Op(CmpOp::Eq), 2),
                    "!=" => (Token::Op(CmpOp::Ne), 2),
                    _ if c == '<' => (Token::Op(CmpOp::Lt), 1),
                    _ if c == '>' => (Token::Op(CmpOp::Gt), 1),
                    _ => {
                        return Err(PredicateError::Parse {
                            at: start,
                            reason: format!("unexpected character {c:?}"),
                        })
                    }
                };
                tokens.push((start, tok));
                i += len;
            }
            '"' | '\'' => {
                let quote = c;
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(PredicateError::Parse {
                            at: start,
                            reason: "unterminated string literal".into(),
                        });
                    }
                    let ch = src[i..].chars().next().unwrap();
                    i += ch.len_utf8();
                    if ch == quote {
                        break;
                    }
                    s.push(ch);
                }
                tokens.push((start, Token::Text(s)));
            }
            c if c.is_ascii_digit() || (c == '-' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit()) => {
                let mut j = i + 1;
                while j < bytes.len() {
                    let d = bytes[j] as char;
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E'
                        || ((d == '+' || d == '-') && matches!(bytes[j - 1] as char, 'e' | 'E'))
                    {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let n: f64 = src[i..j].parse().map_err(|_| PredicateError::Parse {
                    at: start,
                    reason: format!("bad number {:?}", &src[i..j]),
                })?;
                tokens.push((start, Token::Number(n)));
                i = j;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() {
                    let d = bytes[j] as char;
                    if d.is_alphanumeric() || d == '_' || d == '-' {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let word = &src[i..j];
                let tok = match word {
                    "and" => Token::And,
                    "or" => Token::Or,
                    "not" => Token::Not,
                    "true" => Token::True,
                    "false" => Token::False,
                    _ => Token::Ident(word.to_string()),
                };
                tokens.push((start, tok));
                i = j;
            }
            other => {
                return Err(PredicateError::Parse {
                    at: start,
                    reason: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(at, _)| *at)
    }

    fn expr(&mut self) -> Result<Expr, PredicateError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.next();
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, PredicateError> {
        let mut lhs = self.not()?;
        while self.peek() == Some(&Token::And) {
            self.next();
            let rhs = self.not()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, PredicateError> {
        if self.peek() == Some(&Token::Not) {
            self.next();
            Ok(Expr::Not(Box::new(self.not()?)))
        } else {
            self.cmp()
        }
    }

    fn cmp(&mut self) -> Result<Expr, PredicateError> {
        let lhs = self.primary()?;
        if let Some(Token::Op(op)) = self.peek().cloned() {
            self.next();
            let rhs = self.primary()?;
            return Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, PredicateError> {
        let at = self.at();
        match self.next() {
            Some((_, Token::LParen)) => {
                let e = self.expr()?;
                match self.next() {
                    Some((_, Token::RParen)) => Ok(e),
                    _ => Err(PredicateError::Parse {
                        at,
                        reason: "missing closing parenthesis".into(),
                    }),
                }
            }
            Some((_, Token::Number(n))) => Ok(Expr::Number(n)),
            Some((_, Token::Text(s))) => Ok(Expr::Text(s)),
            Some((_, Token::True)) => Ok(Expr::Bool(true)),
            Some((_, Token::False)) => Ok(Expr::Bool(false)),
            Some((_, Token::Ident(name))) => Ok(Expr::Field(name)),
            other => Err(PredicateError::Parse {
                at,
                reason: format!("expected a value, found {other:?}"),
            }),
        }
    }
}

/// Parses a predicate source string into an expression tree.
pub fn parse_predicate(src: &str) -> Result<Expr, PredicateError> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(PredicateError::Parse {
            at: p.at(),
            reason: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ExprType {
    Number,
    Text,
    Bool,
    /// A column with no non-null cells: its type is unknowable, and no row
    /// can ever reach evaluation, so it unifies with anything.
    Unknown,
}

impl From<ColumnType> for ExprType {
    fn from(t: ColumnType) -> ExprType {
        match t {
            ColumnType::Number => ExprType::Number,
            ColumnType::Text => ExprType::Text,
            ColumnType::Bool => ExprType::Bool,
        }
    }
}

/// Type-checks the expression against a table's column types and collects
/// the referenced fields. The whole expression must be boolean-valued.
pub fn check_predicate(expr: &Expr, table: &DataTable) -> Result<Vec<String>, PredicateError> {
    let mut fields = Vec::new();
    let ty = check(expr, table, &mut fields)?;
    if !matches!(ty, ExprType::Bool | ExprType::Unknown) {
        return Err(PredicateError::TypeMismatch(
            "predicate must evaluate to a boolean".into(),
        ));
    }
    Ok(fields)
}

fn check(expr: &Expr, table: &DataTable, fields: &mut Vec<String>) -> Result<ExprType, PredicateError> {
    match expr {
        Expr::Or(a, b) | Expr::And(a, b) => {
            for side in [a, b] {
                if !matches!(check(side, table, fields)?, ExprType::Bool | ExprType::Unknown) {
                    return Err(PredicateError::TypeMismatch(
                        "and/or operands must be boolean".into(),
                    ));
                }
            }
            Ok(ExprType::Bool)
        }
        Expr::Not(a) => {
            if !matches!(check(a, table, fields)?, ExprType::Bool | ExprType::Unknown) {
                return Err(PredicateError::TypeMismatch("not operand must be boolean".into()));
            }
            Ok(ExprType::Bool)
        }
        Expr::Cmp(op, a, b) => {
            let ta = check(a, table, fields)?;
            let tb = check(b, table, fields)?;
            if ta != tb && ta != ExprType::Unknown && tb != ExprType::Unknown {
                return Err(PredicateError::TypeMismatch(format!(
                    "cannot compare {ta:?} to {tb:?}"
                )));
            }
            if ta == ExprType::Bool && tb == ExprType::Bool && !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                return Err(PredicateError::TypeMismatch(
                    "booleans support only == and !=".into(),
                ));
            }
            Ok(ExprType::Bool)
        }
        Expr::Field(name) => {
            let idx = table
                .column_index(name)
                .ok_or_else(|| PredicateError::UnknownField(name.clone()))?;
            if !fields.contains(name) {
                fields.push(name.clone());
            }
            if table.rows().iter().all(|r| r[idx].is_null()) {
                return Ok(ExprType::Unknown);
            }
            Ok(table.columns()[idx].ty.into())
        }
        Expr::Number(_) => Ok(ExprType::Number),
        Expr::Text(_) => Ok(ExprType::Text),
        Expr::Bool(_) => Ok(ExprType::Bool),
    }
}

/// Evaluates a checked predicate against one row. Returns `None` when any
/// referenced field is null in this row (such rows are dropped).
pub fn eval_predicate(expr: &Expr, table: &DataTable, row: &[DataValue]) -> Option<bool> {
    match eval(expr, table, row)? {
        DataValue::Bool(b) => Some(b),
        _ => Some(false), // unreachable on checked expressions
    }
}

fn eval(expr: &Expr, table: &DataTable, row: &[DataValue]) -> Option<DataValue> {
    match expr {
        Expr::Or(a, b) => {
            let a = eval(a, table, row)?.as_bool()?;
            let b = eval(b, table, row)?.as_bool()?;
            Some(DataValue::Bool(a || b))
        }
        Expr::And(a, b) => {
            let a = eval(a, table, row)?.as_bool()?;
            let b = eval(b, table, row)?.as_bool()?;
            Some(DataValue::Bool(a && b))
        }
        Expr::Not(a) => {
            let a = eval(a, table, row)?.as_bool()?;
            Some(DataValue::Bool(!a))
        }
        Expr::Cmp(op, a, b) => {
            let a = eval(a, table, row)?;
            let b = eval(b, table, row)?;
            let ord = match (&a, &b) {
                (DataValue::Number(x), DataValue::Number(y)) => x.partial_cmp(y)?,
                (DataValue::Text(x), DataValue::Text(y)) => x.cmp(y),
                (DataValue::Bool(x), DataValue::Bool(y)) => x.cmp(y),
                _ => return None,
            };
            let b = match op {
                CmpOp::Lt => ord.is_lt(),
                CmpOp::Le => ord.is_le(),
                CmpOp::Eq => ord.is_eq(),
                CmpOp::Ne => ord.is_ne(),
                CmpOp::Ge => ord.is_ge(),
                CmpOp::Gt => ord.is_gt(),
            };
            Some(DataValue::Bool(b))
        }
        Expr::Field(name) => {
            let idx = table.column_index(name)?;
            let v = &row[idx];
            if v.is_null() {
                None
            } else {
                Some(v.clone())
            }
        }
        Expr::Number(n) => Some(DataValue::Number(*n)),
        Expr::Text(s) => Some(DataValue::Text(s.clone())),
        Expr::Bool(b) => Some(DataValue::Bool(*b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datastore::load_csv;

    fn table(src: &str) -> DataTable {
        load_csv(src.as_bytes(), "t", &mut Vec::new()).unwrap()
    }

    #[test]
    fn parses_precedence() {
        let e = parse_predicate("a > 1 and b < 2 or not c == 3").unwrap();
        // or at the top
        assert!(matches!(e, Expr::Or(_, _)));
    }

    #[test]
    fn comparison_against_text_literal() {
        let t = table("b\nx\ny");
        let e = parse_predicate("b == \"x\"").unwrap();
        check_predicate(&e, &t).unwrap();
        assert_eq!(eval_predicate(&e, &t, &t.rows()[0]), Some(true));
        assert_eq!(eval_predicate(&e, &t, &t.rows()[1]), Some(false));
    }

    #[test]
    fn number_vs_text_is_type_mismatch() {
        let t = table("b\n1\n2");
        let e = parse_predicate("b == \"x\"").unwrap();
        assert!(matches!(
            check_predicate(&e, &t).unwrap_err(),
            PredicateError::TypeMismatch(_)
        ));
    }

    #[test]
    fn unknown_field() {
        let t = table("a\n1");
        let e = parse_predicate("z > 1").unwrap();
        assert_eq!(
            check_predicate(&e, &t).unwrap_err(),
            PredicateError::UnknownField("z".into())
        );
    }

    #[test]
    fn null_field_drops_row() {
        let t = table("a,b\n1,x\n,x\n3,x");
        let e = parse_predicate("a > 0").unwrap();
        assert_eq!(eval_predicate(&e, &t, &t.rows()[1]), None);
        assert_eq!(eval_predicate(&e, &t, &t.rows()[2]), Some(true));
    }

    #[test]
    fn dashed_field_names() {
        let t = table("economy-mpg\n10\n30");
        let e = parse_predicate("economy-mpg >= 20").unwrap();
        check_predicate(&e, &t).unwrap();
        assert_eq!(eval_predicate(&e, &t, &t.rows()[1]), Some(true));
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(matches!(
            parse_predicate("a > 1 1").unwrap_err(),
            PredicateError::Parse { .. }
        ));
    }
}
