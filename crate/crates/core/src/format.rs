//! JSON reading and writing for instances, allocations and results.
//!
//! Values are exact: JSON integers or decimal/fraction strings. Binary
//! floating-point numbers are rejected. Agents appear 1-based in every
//! document. Objects serialize with sorted keys.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::fairness::{FairnessReport, FairnessVerdict, MmsShare, ReportEntry, Witness};
use crate::mechanisms::{MechanismConfig, StepAction, Trace};
use crate::model::{Allocation, GoodSet, Instance, TableValuation, Valuation};
use crate::strategy::{ImpossibilityReport, ManipulationWitness, MisreportSpace, StrategyVerdict};
use crate::value::Value;

fn parse_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn object<'a>(json: &'a Json, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Json>> {
    let map = json.as_object().ok_or_else(|| parse_err(path, "expected an object"))?;
    if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(parse_err(path, format!("unknown key `{key}`")));
    }
    Ok(map)
}

fn field<'a>(map: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json> {
    map.get(key).ok_or_else(|| parse_err(path, format!("missing key `{key}`")))
}

fn array<'a>(json: &'a Json, path: &str) -> Result<&'a Vec<Json>> {
    json.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

fn string<'a>(json: &'a Json, path: &str) -> Result<&'a str> {
    json.as_str().ok_or_else(|| parse_err(path, "expected a string"))
}

/// A number literal must be a non-negative integer; anything else goes in a string.
pub fn parse_value(json: &Json, path: &str) -> Result<Value> {
    match json {
        Json::Number(n) => match n.as_i64() {
            Some(i) => Value::new(i, 1).map_err(|e| parse_err(path, e)),
            None => Err(parse_err(
                path,
                format!("`{n}` is not an exact integer; write fractional values as strings such as \"5/2\""),
            )),
        },
        Json::String(s) => s.parse().map_err(|e| parse_err(path, e)),
        _ => Err(parse_err(path, "expected a number or a decimal string")),
    }
}

/// Integers as JSON numbers, everything else as `n/d` strings.
pub fn value_to_json(value: Value) -> Json {
    if value.is_integer() {
        json!(value.numer())
    } else {
        json!(value.to_string())
    }
}

/// Exact rational string, used for computed quantities in results.
pub fn value_string(value: Value) -> Json {
    json!(value.to_string())
}

fn label_index(goods: &[String], label: &str, path: &str) -> Result<usize> {
    goods
        .iter()
        .position(|g| g == label)
        .ok_or_else(|| parse_err(path, format!("unknown good label `{label}`")))
}

fn label_list(json: &Json, goods: &[String], path: &str) -> Result<GoodSet> {
    let mut set = GoodSet::EMPTY;
    for (k, item) in array(json, path)?.iter().enumerate() {
        let item_path = format!("{path}[{k}]");
        let good = label_index(goods, string(item, &item_path)?, &item_path)?;
        if set.contains(good) {
            return Err(parse_err(&item_path, format!("good `{}` listed twice", goods[good])));
        }
        set.insert(good);
    }
    Ok(set)
}

/// Per-good map; goods left out are worth zero.
fn value_map(json: &Json, goods: &[String], path: &str) -> Result<Vec<Value>> {
    let map = json.as_object().ok_or_else(|| parse_err(path, "expected an object"))?;
    let mut values = vec![Value::ZERO; goods.len()];
    for (label, v) in map {
        let entry = format!("{path}.{label}");
        values[label_index(goods, label, &entry)?] = parse_value(v, &entry)?;
    }
    Ok(values)
}

pub fn valuation_from_json(json: &Json, goods: &[String], path: &str) -> Result<Valuation> {
    let kind = json
        .get("type")
        .and_then(Json::as_str)
        .ok_or_else(|| parse_err(path, "missing string key `type`"))?;
    match kind {
        "additive" => {
            let map = object(json, path, &["type", "values"])?;
            let values = value_map(field(map, "values", path)?, goods, &format!("{path}.values"))?;
            Ok(Valuation::Additive(values))
        }
        "table" => {
            let map = object(json, path, &["type", "base", "overrides"])?;
            let base = value_map(field(map, "base", path)?, goods, &format!("{path}.base"))?;
            let mut overrides = BTreeMap::new();
            if let Some(raw) = map.get("overrides") {
                let raw = raw.as_object().ok_or_else(|| parse_err(&format!("{path}.overrides"), "expected an object"))?;
                for (key, v) in raw {
                    let entry = format!("{path}.overrides.{key}");
                    let mut set = GoodSet::EMPTY;
                    for label in key.split(',').filter(|l| !l.is_empty()) {
                        set.insert(label_index(goods, label, &entry)?);
                    }
                    if overrides.insert(set, parse_value(v, &entry)?).is_some() {
                        return Err(parse_err(&entry, "subset overridden twice"));
                    }
                }
            }
            Ok(Valuation::Table(TableValuation::new(base, overrides)))
        }
        "single_minded" => {
            let map = object(json, path, &["type", "bundle", "value"])?;
            let bundle = label_list(field(map, "bundle", path)?, goods, &format!("{path}.bundle"))?;
            let value = parse_value(field(map, "value", path)?, &format!("{path}.value"))?;
            Ok(Valuation::SingleMinded { bundle, value })
        }
        other => Err(parse_err(path, format!("unknown valuation type `{other}`"))),
    }
}

fn set_key(goods: &[String], set: GoodSet) -> String {
    set.iter().map(|g| goods[g].as_str()).collect::<Vec<_>>().join(",")
}

pub fn valuation_to_json(valuation: &Valuation, goods: &[String]) -> Json {
    let per_good = |values: &[Value]| -> Json {
        Json::Object(goods.iter().cloned().zip(values.iter().map(|&v| value_to_json(v))).collect())
    };
    match valuation {
        Valuation::Additive(values) => json!({"type": "additive", "values": per_good(values)}),
        Valuation::Table(table) => {
            let overrides: Map<String, Json> = table
                .overrides()
                .iter()
                .map(|(set, v)| (set_key(goods, *set), value_to_json(*v)))
                .collect();
            json!({"type": "table", "base": per_good(table.base()), "overrides": overrides})
        }
        Valuation::SingleMinded { bundle, value } => json!({
            "type": "single_minded",
            "bundle": bundle.iter().map(|g| goods[g].clone()).collect::<Vec<_>>(),
            "value": value_to_json(*value),
        }),
    }
}

pub fn instance_from_json(json: &Json) -> Result<Instance> {
    let map = object(json, "instance", &["agents", "goods", "valuations"])?;
    let goods: Vec<String> = array(field(map, "goods", "instance")?, "goods")?
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let label = string(g, &format!("goods[{k}]"))?;
            if label.is_empty() || label.contains(',') {
                return Err(parse_err(&format!("goods[{k}]"), "labels must be nonempty and free of commas"));
            }
            Ok(label.to_string())
        })
        .collect::<Result<_>>()?;
    let raw = array(field(map, "valuations", "instance")?, "valuations")?;
    let agents = field(map, "agents", "instance")?
        .as_u64()
        .ok_or_else(|| parse_err("agents", "expected a non-negative integer"))?;
    if agents != raw.len() as u64 {
        return Err(parse_err("agents", format!("{agents} agents but {} valuations", raw.len())));
    }
    let valuations = raw
        .iter()
        .enumerate()
        .map(|(i, v)| valuation_from_json(v, &goods, &format!("valuations[{i}]")))
        .collect::<Result<_>>()?;
    Instance::new(goods, valuations)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let json: Json = serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance JSON: {e}")))?;
    instance_from_json(&json)
}

pub fn instance_to_json(instance: &Instance) -> Json {
    json!({
        "agents": instance.agents(),
        "goods": instance.goods(),
        "valuations": instance
            .valuations()
            .iter()
            .map(|v| valuation_to_json(v, instance.goods()))
            .collect::<Vec<_>>(),
    })
}

fn set_to_json(instance: &Instance, set: GoodSet) -> Json {
    json!(instance.labels(set))
}

pub fn allocation_to_json(instance: &Instance, allocation: &Allocation) -> Json {
    Json::Array(allocation.bundles().iter().map(|&b| set_to_json(instance, b)).collect())
}

/// Reads `{"allocation": [[labels…], …]}`; the result must be complete for `instance`.
pub fn allocation_from_json(json: &Json, instance: &Instance) -> Result<Allocation> {
    let map = object(json, "allocation file", &["allocation"])?;
    let rows = array(field(map, "allocation", "allocation file")?, "allocation")?;
    if rows.len() != instance.agents() {
        return Err(parse_err(
            "allocation",
            format!("{} bundles for {} agents", rows.len(), instance.agents()),
        ));
    }
    let bundles: Vec<GoodSet> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| label_list(row, instance.goods(), &format!("allocation[{i}]")))
        .collect::<Result<_>>()?;
    let allocation = Allocation::new(bundles);
    if !crate::model::is_complete(instance, &allocation) {
        return Err(Error::IncompleteAllocation);
    }
    Ok(allocation)
}

pub fn parse_allocation(text: &str, instance: &Instance) -> Result<Allocation> {
    let json: Json = serde_json::from_str(text).map_err(|e| Error::Parse(format!("allocation JSON: {e}")))?;
    allocation_from_json(&json, instance)
}

pub fn allocation_file(instance: &Instance, allocation: &Allocation) -> Json {
    json!({"allocation": allocation_to_json(instance, allocation)})
}

pub fn config_to_json(instance: &Instance, config: &MechanismConfig) -> Json {
    let agent_order = config
        .agent_order
        .as_ref()
        .map(|o| json!(o.iter().map(|a| a + 1).collect::<Vec<_>>()));
    let item_order = config
        .item_order
        .as_ref()
        .map(|o| json!(o.iter().map(|&g| instance.label(g)).collect::<Vec<_>>()));
    let overrides: Map<String, Json> = config
        .source_tie_overrides
        .iter()
        .map(|(&g, t)| (instance.label(g).to_string(), json!(t.key())))
        .collect();
    json!({
        "agent_order": agent_order,
        "item_order": item_order,
        "tie_break": config.good_tie_break.key(),
        "source_tie_break": config.source_tie_break.key(),
        "source_tie_at": overrides,
    })
}

pub fn trace_to_json(instance: &Instance, trace: &Trace) -> Json {
    let steps: Vec<Json> = trace
        .steps
        .iter()
        .map(|step| {
            let mut entry = Map::new();
            match &step.action {
                StepAction::Pick { agent, goods } => {
                    entry.insert("action".into(), json!("pick"));
                    entry.insert("agent".into(), json!(agent + 1));
                    entry.insert("goods".into(), set_to_json(instance, *goods));
                }
                StepAction::Pass { agent } => {
                    entry.insert("action".into(), json!("pass"));
                    entry.insert("agent".into(), json!(agent + 1));
                }
                StepAction::Rotate { cycle } => {
                    entry.insert("action".into(), json!("rotate"));
                    entry.insert("cycle".into(), json!(cycle.iter().map(|a| a + 1).collect::<Vec<_>>()));
                }
            }
            entry.insert(
                "bundles".into(),
                Json::Array(step.bundles.iter().map(|&b| set_to_json(instance, b)).collect()),
            );
            if let Some(edges) = &step.envy_edges {
                let edges: Vec<Json> = edges.iter().map(|(i, j)| json!([i + 1, j + 1])).collect();
                entry.insert("envy_edges".into(), Json::Array(edges));
            }
            Json::Object(entry)
        })
        .collect();
    Json::Array(steps)
}

fn witness_to_json(instance: &Instance, witness: &Witness) -> Json {
    json!({
        "agent": witness.agent + 1,
        "other": witness.other.map(|j| j + 1),
        "good": witness.good.map(|g| instance.label(g)),
        "lhs": value_string(witness.lhs),
        "rhs": value_string(witness.rhs),
    })
}

pub fn verdict_to_json(instance: &Instance, verdict: &FairnessVerdict) -> Json {
    json!({
        "criterion": verdict.criterion.key(),
        "holds": verdict.holds,
        "witness": verdict.witness.as_ref().map(|w| witness_to_json(instance, w)),
    })
}

pub fn report_to_json(instance: &Instance, report: &FairnessReport) -> Json {
    Json::Array(
        report
            .entries
            .iter()
            .map(|entry| match entry {
                ReportEntry::Checked(v) => verdict_to_json(instance, v),
                ReportEntry::Skipped { criterion, reason } => json!({
                    "criterion": criterion.key(),
                    "holds": null,
                    "skipped": reason,
                }),
            })
            .collect(),
    )
}

pub fn mms_share_to_json(instance: &Instance, share: &MmsShare) -> Json {
    json!({
        "agent": share.agent + 1,
        "mms": value_string(share.value),
        "partition": share.partition.iter().map(|&b| set_to_json(instance, b)).collect::<Vec<_>>(),
    })
}

pub fn space_to_json(instance: &Instance, space: &MisreportSpace) -> Json {
    match space {
        MisreportSpace::AdditiveGrid { lo, hi, step } => {
            json!({"type": "additive-grid", "lo": lo, "hi": hi, "step": step})
        }
        MisreportSpace::SingleMinded => json!({"type": "single-minded"}),
        MisreportSpace::Explicit(list) => json!({
            "type": "explicit",
            "candidates": list.iter().map(|v| valuation_to_json(v, instance.goods())).collect::<Vec<_>>(),
        }),
    }
}

pub fn manipulation_to_json(witness: &ManipulationWitness) -> Json {
    let inst = &witness.profile;
    json!({
        "agent": witness.agent + 1,
        "true_valuation": valuation_to_json(&witness.true_valuation, inst.goods()),
        "misreport": valuation_to_json(&witness.misreport, inst.goods()),
        "reports": instance_to_json(inst)["valuations"].clone(),
        "truthful_allocation": allocation_to_json(inst, &witness.truthful_allocation),
        "deviated_allocation": allocation_to_json(inst, &witness.deviated_allocation),
        "truthful_utility": value_string(witness.truthful_utility),
        "deviated_utility": value_string(witness.deviated_utility),
    })
}

pub fn strategy_verdict_to_json(verdict: &StrategyVerdict) -> Json {
    json!({
        "holds_on_space": verdict.holds,
        "instance": verdict.instance,
        "runs": verdict.runs,
        "witness": verdict.witness.as_ref().map(manipulation_to_json),
    })
}

pub fn impossibility_to_json(instance: &Instance, report: &ImpossibilityReport) -> Json {
    json!({
        "holds": report.holds,
        "truthful_fair_set": report
            .truthful_fair_set
            .iter()
            .map(|a| allocation_to_json(instance, a))
            .collect::<Vec<_>>(),
        "checks": report.checks.iter().map(|c| json!({
            "allocation": allocation_to_json(instance, &c.allocation),
            "deviation": c.deviation,
            "truthful_value": value_string(c.truthful_value),
            "deviated_fair_set": c.deviated_fair_set.iter().map(|a| allocation_to_json(instance, a)).collect::<Vec<_>>(),
            "worst_deviated_value": c.worst_deviated_value.map(value_string),
            "dominates": c.dominates,
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(json: &Json) -> String {
    let mut text = serde_json::to_string_pretty(json).expect("JSON values always serialize");
    text.push('\n');
    text
}
