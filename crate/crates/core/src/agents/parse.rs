//! Validation of agent replies. Every reply is checked against the schema of its request
//! kind before anything enters the pipeline.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::esl::Constant;
use crate::logic::Truth;

/// The JSON payload of a reply: the first fenced block (```json or bare ```), or the
/// whole text when there is no fence.
pub fn extract_json_block(text: &str) -> Result<Value, String> {
    let body = match text.find("```") {
        Some(start) => {
            let rest = &text[start + 3..];
            let rest = rest.strip_prefix("json").unwrap_or(rest);
            match rest.find("```") {
                Some(end) => &rest[..end],
                None => return Err("unterminated code fence".into()),
            }
        }
        None => text,
    };
    serde_json::from_str(body.trim()).map_err(|e| format!("invalid JSON: {e}"))
}

fn constant(v: &Value) -> Result<Constant, String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Ok(Constant::from_rendering(s)),
        Value::Number(n) => Ok(Constant::from_rendering(&n.to_string())),
        other => Err(format!(
            "expected a non-empty string or number, found {other}"
        )),
    }
}

pub fn parse_objects(text: &str) -> Result<Vec<Constant>, String> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Reply {
        objects: Vec<Value>,
    }
    let reply: Reply = serde_json::from_value(extract_json_block(text)?)
        .map_err(|e| format!("objects reply: {e}"))?;
    reply.objects.iter().map(constant).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactReply {
    pub predicate: String,
    pub args: Vec<Constant>,
    pub truth: Truth,
}

pub fn parse_facts(text: &str) -> Result<Vec<FactReply>, String> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Fact {
        predicate: String,
        #[serde(default)]
        args: Vec<Value>,
        truth: String,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Reply {
        facts: Vec<Fact>,
    }
    let reply: Reply = serde_json::from_value(extract_json_block(text)?)
        .map_err(|e| format!("facts reply: {e}"))?;
    reply
        .facts
        .into_iter()
        .map(|f| {
            Ok(FactReply {
                args: f.args.iter().map(constant).collect::<Result<_, _>>()?,
                truth: f
                    .truth
                    .parse()
                    .map_err(|e| format!("fact `{}`: {e}", f.predicate))?,
                predicate: f.predicate,
            })
        })
        .collect()
}

pub fn parse_witness(text: &str) -> Result<Option<BTreeMap<String, Constant>>, String> {
    let value = extract_json_block(text)?;
    let Value::Object(map) = value else {
        return Err("witness reply must be a JSON object".into());
    };
    if map.len() != 1 {
        return Err("witness reply must have exactly the key `witness`".into());
    }
    match map.get("witness") {
        Some(Value::Null) => Ok(None),
        Some(Value::Object(w)) => w
            .iter()
            .map(|(k, v)| Ok((k.clone(), constant(v)?)))
            .collect::<Result<_, String>>()
            .map(Some),
        Some(other) => Err(format!("witness must be an object or null, found {other}")),
        None => Err("missing key `witness`".into()),
    }
}

/// `{"answer": "..."}` in a fence, or a bare truth token such as `UNKNOWN` or `no.`.
pub fn parse_answer(text: &str) -> Result<Truth, String> {
    let bare = text.trim().trim_end_matches(['.', '!']);
    if let Ok(t) = bare.parse::<Truth>() {
        return Ok(t);
    }
    let value = extract_json_block(text)?;
    match value.get("answer") {
        Some(Value::String(s)) => s.parse().map_err(|e| format!("answer: {e}")),
        Some(Value::Bool(b)) => Ok(Truth::from_bool(*b)),
        _ => Err("expected {\"answer\": \"True\" | \"False\" | \"Unknown\"}".into()),
    }
}
