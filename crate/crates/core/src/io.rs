//! JSON encodings for capacities, measures, functions, partitions, countable models and
//! convergence experiments. Rationals travel as `"p/q"` strings; subsets as decimal masks.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::capacity::{check_null_additive, Capacity, ProbabilityMeasure, Witness};
use crate::convergence::{counterexample_null_additivity, FunctionSequence, IntegralKind};
use crate::countable::{CountableMeasure, CountableModel, CountablePartition, TailBlocks, TailRule};
use crate::error::{Error, Result};
use crate::generators::{random_capacity, Profile};
use crate::integrals::SimpleFunction;
use crate::rational::{self, Rational};
use crate::sets::{Partition, StateSpace, SubsetMask};

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Format(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    match v {
        Value::Number(x) => x.as_u64().map(|x| x as usize),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::Format(format!("{what}: expected a nonnegative integer, got {v}")))
}

fn as_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => rational::parse(s),
        Value::Number(x) => rational::parse(&x.to_string()),
        _ => Err(Error::BadRational(v.to_string())),
    }
}

fn as_rationals(v: &Value, what: &str) -> Result<Vec<Rational>> {
    v.as_array().ok_or_else(|| Error::Format(format!("{what}: expected an array")))?.iter().map(as_rational).collect()
}

fn strings(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(|r| Value::String(rational::format(r))).collect())
}

fn space_of(v: &Value) -> Result<StateSpace> {
    StateSpace::new(as_usize(field(v, "n")?, "n")?)
}

pub fn parse_json(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a JSON file, or stdin when the path is `-`.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path)?
    };
    parse_json(&text)
}

pub fn capacity_from_json(v: &Value) -> Result<Capacity> {
    let space = space_of(v)?;
    let table = field(v, "values")?
        .as_object()
        .ok_or_else(|| Error::Format("capacity values must be an object keyed by mask".into()))?;
    if table.len() != space.size() {
        return Err(Error::TableSize { expected: space.size(), got: table.len() });
    }
    let mut values = vec![None; space.size()];
    for (key, value) in table {
        let mask: usize = key.parse().map_err(|_| Error::Format(format!("bad mask key {key:?}")))?;
        if mask >= space.size() {
            return Err(Error::MaskOutOfRange { bits: mask as u64, n: space.n() });
        }
        values[mask] = Some(as_rational(value)?);
    }
    let values: Vec<Rational> = values.into_iter().map(|x| x.expect("all keys distinct and in range")).collect();
    Capacity::new(space, values)
}

pub fn capacity_to_json(c: &Capacity) -> Value {
    let table: Map<String, Value> =
        c.values().iter().enumerate().map(|(i, r)| (i.to_string(), Value::String(rational::format(r)))).collect();
    json!({"n": c.n(), "values": table})
}

pub fn measure_from_json(v: &Value) -> Result<ProbabilityMeasure> {
    let space = space_of(v)?;
    let weights = as_rationals(field(v, "weights")?, "weights")?;
    if weights.len() != space.n() {
        return Err(Error::TableSize { expected: space.n(), got: weights.len() });
    }
    ProbabilityMeasure::new(space, weights)
}

pub fn measure_to_json(p: &ProbabilityMeasure) -> Value {
    json!({"n": p.space().n(), "weights": strings(p.weights())})
}

pub fn function_from_json(v: &Value) -> Result<SimpleFunction> {
    let space = space_of(v)?;
    let values = as_rationals(field(v, "values")?, "values")?;
    if values.len() != space.n() {
        return Err(Error::TableSize { expected: space.n(), got: values.len() });
    }
    SimpleFunction::new(space, values)
}

pub fn function_to_json(f: &SimpleFunction) -> Value {
    json!({"n": f.space().n(), "values": strings(f.values())})
}

fn states_of(v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| Error::Format("expected an array of states".into()))?
        .iter()
        .map(|s| as_usize(s, "state"))
        .collect()
}

pub fn partition_from_json(v: &Value) -> Result<Partition> {
    let space = space_of(v)?;
    let blocks = field(v, "blocks")?
        .as_array()
        .ok_or_else(|| Error::Format("blocks must be an array".into()))?
        .iter()
        .map(states_of)
        .collect::<Result<Vec<_>>>()?;
    Partition::from_states(&space, &blocks)
}

pub fn partition_to_json(p: &Partition) -> Value {
    let blocks: Vec<Value> =
        p.blocks().iter().map(|b| Value::Array(b.states().map(|k| Value::String(k.to_string())).collect())).collect();
    json!({"n": p.n(), "blocks": blocks})
}

/// A family of functions: either `{"n", "functions": [[...], ...]}` or an array of function objects.
pub fn family_from_json(v: &Value) -> Result<Vec<SimpleFunction>> {
    if let Some(items) = v.as_array() {
        return items.iter().map(function_from_json).collect();
    }
    let n = field(v, "n")?.clone();
    field(v, "functions")?
        .as_array()
        .ok_or_else(|| Error::Format("functions must be an array".into()))?
        .iter()
        .map(|values| function_from_json(&json!({"n": n, "values": values})))
        .collect()
}

fn tail_rule_from_json(v: Option<&Value>) -> Result<TailRule> {
    let Some(v) = v else { return Ok(TailRule::None) };
    let s = v.as_str().ok_or_else(|| Error::Format("tail rule must be a string".into()))?;
    match s.split_once(':') {
        None if s == "none" => Ok(TailRule::None),
        Some(("geometric", r)) => Ok(TailRule::Geometric(rational::parse(r)?)),
        _ => Err(Error::Format(format!("unknown tail rule {s:?}; expected \"none\" or \"geometric:p/q\""))),
    }
}

pub fn countable_measure_from_json(v: &Value) -> Result<CountableMeasure> {
    match v {
        Value::String(s) if s == "telescoping" => Ok(CountableMeasure::telescoping()),
        Value::Object(_) => {
            let weights = as_rationals(field(v, "weights")?, "weights")?;
            CountableMeasure::explicit(weights, tail_rule_from_json(v.get("tail"))?)
        }
        _ => Err(Error::Format(format!("unknown countable measure {v}"))),
    }
}

pub fn countable_measure_to_json(m: &CountableMeasure) -> Value {
    match m.weights() {
        None => json!("telescoping"),
        Some((w, tail)) => {
            let tail = match tail {
                TailRule::None => "none".to_string(),
                TailRule::Geometric(r) => format!("geometric:{}", rational::format(r)),
            };
            json!({"weights": strings(w), "tail": tail})
        }
    }
}

fn param_u64(params: Option<&Value>, key: &str) -> Result<Option<u64>> {
    match params.and_then(|p| p.get(key)) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => as_usize(x, key).map(|x| Some(x as u64)),
    }
}

pub fn countable_partition_from_json(v: &Value) -> Result<CountablePartition> {
    let family = field(v, "family")?.as_str().ok_or_else(|| Error::Format("family must be a string".into()))?;
    let params = v.get("params");
    match family {
        "pairs" => Ok(CountablePartition::pairs()),
        "trivial" => Ok(CountablePartition::trivial()),
        "singletons" => Ok(CountablePartition::singletons()),
        "chunks" => {
            let size = param_u64(params, "size")?.ok_or_else(|| Error::Format("chunks needs params.size".into()))?;
            Ok(CountablePartition::chunks(size))
        }
        "prefix" => {
            let m = param_u64(params, "m")?.ok_or_else(|| Error::Format("prefix needs params.m".into()))?;
            CountablePartition::prefix(m, param_u64(params, "infinite_from")?)
        }
        "custom" => {
            let head = field(params.unwrap_or(&Value::Null), "head")?
                .as_array()
                .ok_or_else(|| Error::Format("params.head must be an array of blocks".into()))?
                .iter()
                .map(|b| states_of(b).map(|s| s.into_iter().map(|k| k as u64).collect()))
                .collect::<Result<Vec<Vec<u64>>>>()?;
            let tail = match param_u64(params, "chunk")? {
                Some(s) => TailBlocks::Chunks(s),
                None => TailBlocks::Infinite,
            };
            CountablePartition::new(head, tail)
        }
        other => Err(Error::Format(format!("unknown partition family {other:?}"))),
    }
}

pub fn countable_partition_to_json(p: &CountablePartition) -> Value {
    let head: Vec<Value> =
        p.head().iter().map(|b| Value::Array(b.iter().map(|k| Value::String(k.to_string())).collect())).collect();
    let chunk = match p.tail() {
        TailBlocks::Chunks(s) => json!(s),
        TailBlocks::Infinite => Value::Null,
    };
    json!({"family": "custom", "params": {"head": head, "chunk": chunk}})
}

pub fn model_from_json(v: &Value) -> Result<CountableModel> {
    Ok(CountableModel::new(
        countable_measure_from_json(field(v, "measure")?)?,
        countable_partition_from_json(field(v, "partition")?)?,
    ))
}

pub fn model_to_json(m: &CountableModel) -> Value {
    json!({
        "measure": countable_measure_to_json(&m.measure),
        "partition": countable_partition_to_json(&m.partition),
    })
}

/// `"file.json"`, `{"profile": "general", "n": 4, "seed": 7}` or an inline capacity object.
/// Relative paths resolve against `base`.
pub fn capacity_source(v: &Value, base: Option<&Path>) -> Result<Capacity> {
    match v {
        Value::String(path) => {
            let path = match base {
                Some(dir) => dir.join(path),
                None => path.into(),
            };
            capacity_from_json(&read_json(&path)?)
        }
        Value::Object(o) if o.contains_key("profile") => {
            let profile: Profile = field(v, "profile")?
                .as_str()
                .ok_or_else(|| Error::Format("profile must be a string".into()))?
                .parse()?;
            let n = as_usize(field(v, "n")?, "n")?;
            let seed = as_usize(v.get("seed").unwrap_or(&json!(0)), "seed")? as u64;
            random_capacity(n, seed, profile)
        }
        _ => capacity_from_json(v),
    }
}

fn mask_from_states(space: &StateSpace, v: &Value) -> Result<SubsetMask> {
    space.from_states(&states_of(v)?)
}

/// Sequence kinds:
/// * `{"kind": "ramp", "target": [...], "steps": k}`
/// * `{"kind": "con_equi", "null": [...], "base": [...]}`; both sets default to the
///   null-additivity witness of `v`
/// * `{"kind": "custom", "terms": [[...], ...], "limit": [...]}` (the `kind` may be omitted)
pub fn sequence_from_json(v: &Value, capacity: &Capacity) -> Result<FunctionSequence> {
    let space = capacity.space();
    let function = |values: &Value| SimpleFunction::new(space.clone(), as_rationals(values, "function")?);
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("custom");
    match kind {
        "ramp" => {
            let steps = as_usize(v.get("steps").unwrap_or(&json!(4)), "steps")?;
            FunctionSequence::ramp(&function(field(v, "target")?)?, steps)
        }
        "con_equi" => {
            let (null, base) = match (v.get("null"), v.get("base")) {
                (Some(z), Some(b)) => (mask_from_states(space, z)?, mask_from_states(space, b)?),
                _ => match check_null_additive(capacity).witness {
                    Some(Witness::NullAdditive { null, base }) => (null, base),
                    _ => {
                        return Err(Error::Precondition(
                            "capacity is null-additive; con_equi needs explicit null and base sets".into(),
                        ))
                    }
                },
            };
            counterexample_null_additivity(capacity, null, base)
        }
        "custom" => {
            let terms = field(v, "terms")?
                .as_array()
                .ok_or_else(|| Error::Format("terms must be an array".into()))?
                .iter()
                .map(function)
                .collect::<Result<Vec<_>>>()?;
            FunctionSequence::new(terms, function(field(v, "limit")?)?)
        }
        other => Err(Error::Format(format!("unknown sequence kind {other:?}"))),
    }
}

pub fn sequence_to_json(s: &FunctionSequence) -> Value {
    let terms: Vec<Value> = s.terms().iter().map(|f| strings(f.values())).collect();
    json!({"kind": "custom", "terms": terms, "limit": strings(s.limit().values())})
}

pub fn integral_kind_from_json(v: Option<&Value>) -> Result<IntegralKind> {
    match v.and_then(Value::as_str).unwrap_or("choquet") {
        "choquet" => Ok(IntegralKind::Choquet),
        "cav" => Ok(IntegralKind::Concave),
        other => Err(Error::Format(format!("unknown integral {other:?}"))),
    }
}

/// A convergence experiment: capacity, sequence and the integral to trace.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub capacity: Capacity,
    pub sequence: FunctionSequence,
    pub integral: IntegralKind,
}

pub fn experiment_from_json(v: &Value, base: Option<&Path>) -> Result<Experiment> {
    let capacity = capacity_source(field(v, "capacity")?, base)?;
    let sequence = sequence_from_json(field(v, "sequence")?, &capacity)?;
    Ok(Experiment { integral: integral_kind_from_json(v.get("integral"))?, capacity, sequence })
}

/// SHA-256 over the canonical encodings of the named inputs, in name order.
pub fn inputs_digest(inputs: &BTreeMap<String, Value>) -> String {
    let mut hasher = Sha256::new();
    for (name, value) in inputs {
        hasher.update(name.as_bytes());
        hasher.update([0]);
        hasher.update(serde_json::to_vec(value).expect("values serialize"));
        hasher.update([0]);
    }
    hex::encode(hasher.finalize())
}
