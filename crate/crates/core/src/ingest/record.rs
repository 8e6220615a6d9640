use std::fmt;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::event::{Decider, DecisionEvent, EventPhase, LaborRole};

const REQUIRED: [&str; 4] = ["task_id", "timestamp", "decider", "phase"];
const KNOWN: [&str; 9] = [
    "ai_confidence",
    "ai_decision",
    "decider",
    "human_decision",
    "human_role",
    "phase",
    "reviewed_async",
    "task_id",
    "timestamp",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingField(String),
    InvalidEnum { key: String, value: String },
    InvalidValue { key: String, detail: String },
    SyntaxError(String),
}

impl ParseErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::MissingField(_) => "missing_field",
            ParseErrorKind::InvalidEnum { .. } => "invalid_enum",
            ParseErrorKind::InvalidValue { .. } => "invalid_value",
            ParseErrorKind::SyntaxError(_) => "syntax_error",
        }
    }

    /// The offending key, when the error is tied to one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ParseErrorKind::MissingField(k) => Some(k),
            ParseErrorKind::InvalidEnum { key, .. } | ParseErrorKind::InvalidValue { key, .. } => {
                Some(key)
            }
            ParseErrorKind::SyntaxError(_) => None,
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingField(k) => write!(f, "missing required field {k:?}"),
            ParseErrorKind::InvalidEnum { key, value } => {
                write!(f, "invalid token {value:?} for {key:?}")
            }
            ParseErrorKind::InvalidValue { key, detail } => {
                write!(f, "invalid value for {key:?}: {detail}")
            }
            ParseErrorKind::SyntaxError(msg) => write!(f, "syntax error: {msg}"),
        }
    }
}

/// A record that failed to parse, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn invalid(line: usize, key: &str, detail: impl Into<String>) -> ParseError {
    ParseError {
        line,
        kind: ParseErrorKind::InvalidValue {
            key: key.to_string(),
            detail: detail.into(),
        },
    }
}

fn take_token<T>(
    obj: &mut Map<String, Value>,
    key: &str,
    line: usize,
    from_token: fn(&str) -> Option<T>,
) -> Result<Option<T>, ParseError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => from_token(&s).map(Some).ok_or(ParseError {
            line,
            kind: ParseErrorKind::InvalidEnum {
                key: key.to_string(),
                value: s,
            },
        }),
        Some(other) => Err(ParseError {
            line,
            kind: ParseErrorKind::InvalidEnum {
                key: key.to_string(),
                value: other.to_string(),
            },
        }),
    }
}

fn take_string(
    obj: &mut Map<String, Value>,
    key: &str,
    line: usize,
) -> Result<Option<String>, ParseError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(invalid(
            line,
            key,
            format!("expected a string, found {other}"),
        )),
    }
}

/// Parses one record. `line` is the 1-based line number reported in errors.
pub fn parse_event_line(text: &str, line: usize) -> Result<DecisionEvent, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError {
        line,
        kind: ParseErrorKind::SyntaxError(e.to_string()),
    })?;
    let Value::Object(mut obj) = value else {
        return Err(ParseError {
            line,
            kind: ParseErrorKind::SyntaxError("record is not an object".into()),
        });
    };
    for key in REQUIRED {
        if obj.get(key).is_none_or(Value::is_null) {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::MissingField(key.to_string()),
            });
        }
    }

    let task_id = take_string(&mut obj, "task_id", line)?.expect("checked above");
    let timestamp = match obj.remove("timestamp") {
        Some(Value::Number(n)) => n.as_u64().ok_or_else(|| {
            invalid(
                line,
                "timestamp",
                format!("{n} is not a non-negative integer"),
            )
        })?,
        Some(other) => {
            return Err(invalid(
                line,
                "timestamp",
                format!("expected an integer, found {other}"),
            ))
        }
        None => unreachable!(),
    };
    let decider =
        take_token(&mut obj, "decider", line, Decider::from_token)?.expect("checked above");
    let phase =
        take_token(&mut obj, "phase", line, EventPhase::from_token)?.expect("checked above");
    let human_role = take_token(&mut obj, "human_role", line, LaborRole::from_token)?;
    let ai_confidence = match obj.remove("ai_confidence") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => n.as_f64(),
        Some(other) => {
            return Err(invalid(
                line,
                "ai_confidence",
                format!("expected a number, found {other}"),
            ))
        }
    };
    let ai_decision = take_string(&mut obj, "ai_decision", line)?;
    let human_decision = take_string(&mut obj, "human_decision", line)?;
    let reviewed_async = match obj.remove("reviewed_async") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => b,
        Some(other) => {
            return Err(invalid(
                line,
                "reviewed_async",
                format!("expected a boolean, found {other}"),
            ))
        }
    };

    let event = DecisionEvent {
        task_id,
        timestamp,
        decider,
        ai_confidence,
        ai_decision,
        human_decision,
        reviewed_async,
        human_role,
        phase,
        extra: obj.into_iter().collect(),
    };
    event
        .validate()
        .map_err(|v| invalid(line, v.key, v.detail))?;
    Ok(event)
}

/// Parses every non-blank line independently, keeping per-line outcomes.
pub fn parse_event_lines(text: &str) -> Vec<Result<DecisionEvent, ParseError>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_event_line(l, i + 1))
        .collect()
}

/// Parses a whole log, failing on the first bad line.
pub fn parse_event_log(text: &str) -> Result<Vec<DecisionEvent>, ParseError> {
    parse_event_lines(text).into_iter().collect()
}

/// Renders any serializable value as one line of JSON with keys in
/// alphabetical order.
pub fn canonical_line<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&value).expect("JSON value renders")
}

/// Canonical record text (no trailing newline). Unknown keys are merged back
/// in; absent optional fields are omitted.
pub fn serialize_event(event: &DecisionEvent) -> String {
    let mut obj: Map<String, Value> = event
        .extra
        .iter()
        .filter(|(k, _)| !KNOWN.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    obj.insert("task_id".into(), Value::String(event.task_id.clone()));
    obj.insert("timestamp".into(), Value::from(event.timestamp));
    obj.insert("decider".into(), Value::from(event.decider.as_token()));
    obj.insert("phase".into(), Value::from(event.phase.as_token()));
    obj.insert("reviewed_async".into(), Value::Bool(event.reviewed_async));
    if let Some(c) = event.ai_confidence {
        obj.insert("ai_confidence".into(), Value::from(c));
    }
    if let Some(d) = &event.ai_decision {
        obj.insert("ai_decision".into(), Value::String(d.clone()));
    }
    if let Some(d) = &event.human_decision {
        obj.insert("human_decision".into(), Value::String(d.clone()));
    }
    if let Some(r) = event.human_role {
        obj.insert("human_role".into(), Value::from(r.as_token()));
    }
    canonical_line(&obj)
}

pub fn write_event_log<W: Write>(mut out: W, events: &[DecisionEvent]) -> std::io::Result<()> {
    for e in events {
        out.write_all(serialize_event(e).as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
