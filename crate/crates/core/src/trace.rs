//! Canonical JSON-lines trace format.
//!
//! One record per line with fields `args`, `block`, `function`, `post`,
//! `pre`, `sender`, `status`, `tx` — all object keys, including mapping
//! keys, in lexicographic order. Numbers encode as decimal strings,
//! addresses as `a<k>`, bytes as `0x<hex>`; mappings serialize only their
//! non-default entries. Decoding is schema-directed by the contract and
//! strict, so encode ∘ decode is the identity on bytes.

use crate::interp::{Call, ExecutionRecord, TraceSet, TxStatus};
use crate::lang::ast::{Contract, Type};
use crate::value::{ContractState, MapKey, Value};
use num_bigint::{BigInt, BigUint};
use serde_json::{json, Map as JsonMap, Value as Json};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: schema mismatch: {msg}")]
    Schema { line: usize, msg: String },
}

pub fn encode_traces(traces: &[ExecutionRecord]) -> String {
    let mut out = String::new();
    for r in traces {
        out.push_str(&encode_record(r));
        out.push('\n');
    }
    out
}

pub fn encode_record(r: &ExecutionRecord) -> String {
    let mut obj = JsonMap::new();
    let args: JsonMap<String, Json> = r
        .call
        .args
        .iter()
        .map(|(k, v)| (k.clone(), encode_value(v)))
        .collect();
    obj.insert("args".into(), Json::Object(args));
    obj.insert("block".into(), json!(r.call.block));
    obj.insert("function".into(), Json::String(r.call.function.clone()));
    obj.insert("post".into(), encode_state(&r.post));
    obj.insert("pre".into(), encode_state(&r.pre));
    obj.insert("sender".into(), Json::String(format!("a{}", r.call.sender)));
    obj.insert(
        "status".into(),
        Json::String(
            match r.status {
                TxStatus::Success => "success",
                TxStatus::Reverted => "reverted",
            }
            .to_string(),
        ),
    );
    obj.insert("tx".into(), json!(r.tx));
    serde_json::to_string(&Json::Object(obj)).expect("trace records serialize")
}

fn encode_state(state: &ContractState) -> Json {
    Json::Object(
        state
            .iter()
            .map(|(k, v)| (k.clone(), encode_value(v)))
            .collect(),
    )
}

pub fn encode_value(v: &Value) -> Json {
    match v {
        Value::Uint(n) => Json::String(n.to_string()),
        Value::Int(n) => Json::String(n.to_string()),
        Value::Bool(b) => Json::Bool(*b),
        Value::Addr(k) => Json::String(format!("a{k}")),
        Value::Str(s) => Json::String(s.clone()),
        Value::Bytes(b) => {
            let hex: String = b.iter().map(|x| format!("{x:02x}")).collect();
            Json::String(format!("0x{hex}"))
        }
        Value::Array(items) => Json::Array(items.iter().map(encode_value).collect()),
        Value::Map(entries) => Json::Object(
            entries
                .iter()
                .map(|(k, v)| (k.to_string(), encode_value(v)))
                .collect(),
        ),
        Value::Struct(fields) => Json::Object(
            fields
                .iter()
                .map(|(k, v)| (k.clone(), encode_value(v)))
                .collect(),
        ),
    }
}

/// Decodes one contract state from a JSON object (the `pre`/`post` encoding,
/// also used standalone for initial-state files).
pub fn decode_state_str(src: &str, contract: &Contract) -> Result<ContractState, TraceError> {
    let json: Json =
        serde_json::from_str(src).map_err(|e| parse_err(1, format!("invalid JSON: {e}")))?;
    decode_state(&json, contract, 1)
}

pub fn decode_traces(src: &str, contract: &Contract) -> Result<TraceSet, TraceError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        out.push(decode_record(line, line_no, contract)?);
    }
    Ok(out)
}

fn parse_err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        msg: msg.into(),
    }
}

fn schema_err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Schema {
        line,
        msg: msg.into(),
    }
}

fn decode_record(line: &str, ln: usize, contract: &Contract) -> Result<ExecutionRecord, TraceError> {
    let json: Json =
        serde_json::from_str(line).map_err(|e| parse_err(ln, format!("invalid JSON: {e}")))?;
    let obj = json
        .as_object()
        .ok_or_else(|| parse_err(ln, "record is not an object"))?;

    const FIELDS: [&str; 8] = [
        "args", "block", "function", "post", "pre", "sender", "status", "tx",
    ];
    for f in FIELDS {
        if !obj.contains_key(f) {
            return Err(parse_err(ln, format!("missing field `{f}`")));
        }
    }
    for k in obj.keys() {
        if !FIELDS.contains(&k.as_str()) {
            return Err(parse_err(ln, format!("unknown field `{k}`")));
        }
    }

    let function = obj["function"]
        .as_str()
        .ok_or_else(|| parse_err(ln, "`function` must be a string"))?
        .to_string();
    let fdecl = contract
        .function(&function)
        .ok_or_else(|| schema_err(ln, format!("unknown function `{function}`")))?;

    let tx = obj["tx"]
        .as_u64()
        .ok_or_else(|| parse_err(ln, "`tx` must be an unsigned integer"))?;
    let block = obj["block"]
        .as_u64()
        .ok_or_else(|| parse_err(ln, "`block` must be an unsigned integer"))?;
    let status = match obj["status"].as_str() {
        Some("success") => TxStatus::Success,
        Some("reverted") => TxStatus::Reverted,
        _ => return Err(parse_err(ln, "`status` must be \"success\" or \"reverted\"")),
    };
    let sender_str = obj["sender"]
        .as_str()
        .ok_or_else(|| parse_err(ln, "`sender` must be a string"))?;
    let sender = decode_addr(sender_str)
        .ok_or_else(|| parse_err(ln, format!("bad sender address `{sender_str}`")))?;

    let args_obj = obj["args"]
        .as_object()
        .ok_or_else(|| parse_err(ln, "`args` must be an object"))?;
    let mut args = BTreeMap::new();
    for p in &fdecl.params {
        let raw = args_obj
            .get(&p.name)
            .ok_or_else(|| schema_err(ln, format!("missing argument `{}`", p.name)))?;
        args.insert(p.name.clone(), decode_value(raw, &p.ty, contract, ln)?);
    }
    for k in args_obj.keys() {
        if !fdecl.params.iter().any(|p| p.name == *k) {
            return Err(schema_err(ln, format!("unknown argument `{k}`")));
        }
    }

    let pre = decode_state(&obj["pre"], contract, ln)?;
    let post = decode_state(&obj["post"], contract, ln)?;

    Ok(ExecutionRecord {
        tx,
        status,
        call: Call {
            function,
            args,
            sender,
            block,
        },
        pre,
        post,
    })
}

fn decode_state(json: &Json, contract: &Contract, ln: usize) -> Result<ContractState, TraceError> {
    let obj = json
        .as_object()
        .ok_or_else(|| parse_err(ln, "state must be an object"))?;
    let mut state = BTreeMap::new();
    for v in &contract.state_vars {
        let raw = obj
            .get(&v.name)
            .ok_or_else(|| schema_err(ln, format!("missing state variable `{}`", v.name)))?;
        state.insert(v.name.clone(), decode_value(raw, &v.ty, contract, ln)?);
    }
    for k in obj.keys() {
        if !contract.state_vars.iter().any(|v| v.name == *k) {
            return Err(schema_err(ln, format!("unknown state variable `{k}`")));
        }
    }
    Ok(state)
}

fn decode_addr(s: &str) -> Option<u32> {
    let rest = s.strip_prefix('a')?;
    if rest.is_empty() || (rest.len() > 1 && rest.starts_with('0')) {
        return None;
    }
    rest.parse().ok()
}

fn decode_value(json: &Json, ty: &Type, contract: &Contract, ln: usize) -> Result<Value, TraceError> {
    match ty {
        Type::Uint => {
            let s = expect_str(json, "uint", ln)?;
            let n: BigUint = s
                .parse()
                .map_err(|_| schema_err(ln, format!("bad uint `{s}`")))?;
            if n.to_string() != s {
                return Err(schema_err(ln, format!("non-canonical uint `{s}`")));
            }
            Ok(Value::Uint(n))
        }
        Type::Int => {
            let s = expect_str(json, "int", ln)?;
            let n: BigInt = s
                .parse()
                .map_err(|_| schema_err(ln, format!("bad int `{s}`")))?;
            if n.to_string() != s {
                return Err(schema_err(ln, format!("non-canonical int `{s}`")));
            }
            Ok(Value::Int(n))
        }
        Type::Bool => json
            .as_bool()
            .map(Value::Bool)
            .ok_or_else(|| schema_err(ln, "expected bool")),
        Type::Address => {
            let s = expect_str(json, "address", ln)?;
            decode_addr(s)
                .map(Value::Addr)
                .ok_or_else(|| schema_err(ln, format!("bad address `{s}`")))
        }
        Type::Str => Ok(Value::Str(expect_str(json, "string", ln)?.to_string())),
        Type::Bytes => {
            let s = expect_str(json, "bytes", ln)?;
            let hex = s
                .strip_prefix("0x")
                .ok_or_else(|| schema_err(ln, format!("bytes must start with 0x: `{s}`")))?;
            if hex.len() % 2 != 0 {
                return Err(schema_err(ln, "odd-length bytes literal"));
            }
            let mut out = Vec::with_capacity(hex.len() / 2);
            for i in (0..hex.len()).step_by(2) {
                let b = u8::from_str_radix(&hex[i..i + 2], 16)
                    .map_err(|_| schema_err(ln, format!("bad bytes literal `{s}`")))?;
                out.push(b);
            }
            Ok(Value::Bytes(out))
        }
        Type::Array(elem) => {
            let items = json
                .as_array()
                .ok_or_else(|| schema_err(ln, "expected array"))?;
            items
                .iter()
                .map(|v| decode_value(v, elem, contract, ln))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        Type::Mapping(kty, vty) => {
            let obj = json
                .as_object()
                .ok_or_else(|| schema_err(ln, "expected mapping object"))?;
            let mut entries = BTreeMap::new();
            for (ks, raw) in obj {
                let key = match &**kty {
                    Type::Address => MapKey::Addr(
                        decode_addr(ks)
                            .ok_or_else(|| schema_err(ln, format!("bad mapping key `{ks}`")))?,
                    ),
                    Type::Uint => {
                        let n: BigUint = ks
                            .parse()
                            .map_err(|_| schema_err(ln, format!("bad mapping key `{ks}`")))?;
                        if n.to_string() != *ks {
                            return Err(schema_err(ln, format!("non-canonical mapping key `{ks}`")));
                        }
                        MapKey::Uint(n)
                    }
                    other => return Err(schema_err(ln, format!("bad mapping key type {other}"))),
                };
                let value = decode_value(raw, vty, contract, ln)?;
                if value.is_default_for(vty, contract) {
                    return Err(schema_err(
                        ln,
                        format!("mapping stores default value at key `{ks}`"),
                    ));
                }
                entries.insert(key, value);
            }
            Ok(Value::Map(entries))
        }
        Type::Struct(name) => {
            let obj = json
                .as_object()
                .ok_or_else(|| schema_err(ln, "expected struct object"))?;
            let decl = contract
                .struct_decl(name)
                .ok_or_else(|| schema_err(ln, format!("unknown struct `{name}`")))?;
            let mut fields = BTreeMap::new();
            for f in &decl.fields {
                let raw = obj
                    .get(&f.name)
                    .ok_or_else(|| schema_err(ln, format!("missing struct field `{}`", f.name)))?;
                fields.insert(f.name.clone(), decode_value(raw, &f.ty, contract, ln)?);
            }
            if obj.len() != decl.fields.len() {
                return Err(schema_err(ln, format!("extra fields on struct `{name}`")));
            }
            Ok(Value::Struct(fields))
        }
        Type::Unknown => unreachable!("unknown type survived type checking"),
    }
}

fn expect_str<'j>(json: &'j Json, what: &str, ln: usize) -> Result<&'j str, TraceError> {
    json.as_str()
        .ok_or_else(|| schema_err(ln, format!("expected {what} as string")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{execute_call, RunConfig};
    use crate::lang::parse_contract;
    use crate::value::default_state;

    fn token() -> Contract {
        parse_contract(
            "t.mc",
            r#"contract T {
                uint totalSupply;
                mapping(address => uint) balances;
                mapping(address => mapping(address => uint)) allows;
                function transferFrom(address from, address to, uint tokens) public returns (bool) {
                    require(msg.sender != address(0));
                    if (to == address(0)) { return false; }
                    allows[from][msg.sender] = allows[from][msg.sender].sub(tokens);
                    balances[from] = balances[from].sub(tokens);
                    balances[to] = balances[to].add(tokens);
                    return true;
                }
            }"#,
        )
        .unwrap()
    }

    fn sample_record() -> ExecutionRecord {
        let c = token();
        let mut state = default_state(&c);
        state.insert("totalSupply".into(), Value::uint(100));
        let mut bal = BTreeMap::new();
        bal.insert(MapKey::Addr(1), Value::uint(60));
        bal.insert(MapKey::Addr(2), Value::uint(40));
        state.insert("balances".into(), Value::Map(bal));
        let mut inner = BTreeMap::new();
        inner.insert(MapKey::Addr(3), Value::uint(10));
        let mut allows = BTreeMap::new();
        allows.insert(MapKey::Addr(1), Value::Map(inner));
        state.insert("allows".into(), Value::Map(allows));

        let call = Call {
            function: "transferFrom".into(),
            args: [
                ("from".to_string(), Value::Addr(1)),
                ("to".to_string(), Value::Addr(2)),
                ("tokens".to_string(), Value::uint(5)),
            ]
            .into_iter()
            .collect(),
            sender: 3,
            block: 3,
        };
        execute_call(&c, &RunConfig::default(), &state, &call, 2)
            .unwrap()
            .record
    }

    #[test]
    fn golden_line_format() {
        let line = encode_record(&sample_record());
        assert_eq!(
            line,
            r#"{"args":{"from":"a1","to":"a2","tokens":"5"},"block":3,"function":"transferFrom","post":{"allows":{"a1":{"a3":"5"}},"balances":{"a1":"55","a2":"45"},"totalSupply":"100"},"pre":{"allows":{"a1":{"a3":"10"}},"balances":{"a1":"60","a2":"40"},"totalSupply":"100"},"sender":"a3","status":"success","tx":2}"#
        );
    }

    #[test]
    fn decode_inverts_encode() {
        let c = token();
        let r = sample_record();
        let text = encode_traces(&[r.clone()]);
        let back = decode_traces(&text, &c).unwrap();
        assert_eq!(back, vec![r]);
        // Re-encoding is byte-identical.
        assert_eq!(encode_traces(&back), text);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let c = token();
        let good = encode_record(&sample_record());
        let text = format!("{good}\nnot json\n");
        let err = decode_traces(&text, &c).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }

    #[test]
    fn schema_mismatch_detected() {
        let c = token();
        let line = encode_record(&sample_record()).replace("\"tokens\":\"5\"", "\"tokens\":\"x\"");
        let err = decode_traces(&line, &c).unwrap_err();
        assert!(matches!(err, TraceError::Schema { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_stored_default_entry() {
        let c = token();
        let line =
            encode_record(&sample_record()).replace(r#""a2":"45""#, r#""a2":"45","a4":"0""#);
        let err = decode_traces(&line, &c).unwrap_err();
        assert!(err.to_string().contains("default value"), "{err}");
    }

    #[test]
    fn rejects_non_canonical_numbers() {
        let c = token();
        let line = encode_record(&sample_record()).replace(r#""tokens":"5""#, r#""tokens":"05""#);
        let err = decode_traces(&line, &c).unwrap_err();
        assert!(err.to_string().contains("non-canonical"), "{err}");
    }

    #[test]
    fn reverted_record_keeps_pre_equal_post() {
        let c = token();
        let state = default_state(&c);
        let call = Call {
            function: "transferFrom".into(),
            args: [
                ("from".to_string(), Value::Addr(1)),
                ("to".to_string(), Value::Addr(2)),
                ("tokens".to_string(), Value::uint(5)),
            ]
            .into_iter()
            .collect(),
            sender: 0,
            block: 1,
        };
        let r = execute_call(&c, &RunConfig::default(), &state, &call, 0)
            .unwrap()
            .record;
        let line = encode_record(&r);
        assert!(line.contains(r#""status":"reverted""#));
        let back = decode_traces(&line, &c).unwrap();
        assert_eq!(back[0].pre, back[0].post);
    }
}
