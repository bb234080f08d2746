use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value as Json;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Json {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn fairdiv(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fairdiv")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn with_instance(command: &str, name: &str, rest: &[&str]) -> Run {
    let path = fixture(name);
    let mut args = vec![command, "--instance", path.to_str().unwrap()];
    args.extend_from_slice(rest);
    fairdiv(&args)
}

fn bundles(json: &Json) -> Vec<String> {
    json.as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_array().unwrap().iter().map(|g| g.as_str().unwrap()).collect())
        .collect()
}

fn temp_json(contents: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    std::io::Write::write_all(&mut file, contents.as_bytes()).unwrap();
    file
}

#[test]
fn allocate_greedy_on_table4() {
    let run = with_instance("allocate", "table4a", &["--mechanism", "greedy-rr", "--agent-order", "1,2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json();
    assert_eq!(bundles(&doc["result"]["allocation"]), ["acd", "be"]);
    assert_eq!(doc["command"], "allocate");
    assert_eq!(doc["tool"], "fairdiv");
    assert_eq!(doc["config"]["mechanism_config"]["agent_order"], serde_json::json!([1, 2]));
    assert!(doc["result"].get("trace").is_none());
}

#[test]
fn sd_rejects_non_single_minded_input() {
    let run = with_instance("allocate", "table4a", &["--mechanism", "sd"]);
    assert_eq!(run.code, 3);
    assert!(run.stdout.is_empty());
    assert!(run.stderr.starts_with("error:"));
}

#[test]
fn allocate_sd_example() {
    let run = with_instance("allocate", "sd_example", &["--mechanism", "sd", "--trace"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json();
    let trace = doc["result"]["trace"].as_array().unwrap();
    assert!(!trace.is_empty());
    assert_eq!(trace.last().unwrap()["bundles"], doc["result"]["allocation"]);
}

#[test]
fn check_mms_allocations() {
    let good = fixture("alloc_c_ab");
    let run = with_instance("check", "mms_example", &["--allocation", good.to_str().unwrap(), "--criteria", "mms"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.json()["result"]["all_hold"], true);

    let bad = fixture("alloc_a_bc");
    let run = with_instance("check", "mms_example", &["--allocation", bad.to_str().unwrap(), "--criteria", "mms"]);
    assert_eq!(run.code, 1);
    let verdict = &run.json()["result"]["verdicts"][0];
    assert_eq!(verdict["holds"], false);
    assert!(!verdict["witness"].is_null());
}

#[test]
fn check_all_criteria_by_default() {
    let good = fixture("alloc_c_ab");
    let run = with_instance("check", "mms_example", &["--allocation", good.to_str().unwrap()]);
    let verdicts = run.json()["result"]["verdicts"].as_array().unwrap().len();
    assert_eq!(verdicts, 5);
}

#[test]
fn incomplete_allocation_is_an_input_error() {
    let file = temp_json(r#"{"allocation": [["a"], ["b"]]}"#);
    let run = with_instance("check", "mms_example", &["--allocation", file.path().to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("error:"));
}

#[test]
fn malformed_instances_are_input_errors() {
    for text in ["{", r#"{"agents": 1, "goods": ["a"], "valuations": [{"type": "additive", "values": {"a": 1.5}}]}"#] {
        let file = temp_json(text);
        let run = fairdiv(&["mms", "--instance", file.path().to_str().unwrap()]);
        assert_eq!(run.code, 2, "{text}");
    }
    let run = fairdiv(&["mms", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(run.code, 2);
}

#[test]
fn decimal_strings_are_exact() {
    let file = temp_json(r#"{"agents": 2, "goods": ["a", "b"], "valuations": [
        {"type": "additive", "values": {"a": "0.5", "b": "1/3"}},
        {"type": "additive", "values": {"a": 1, "b": 1}}]}"#);
    let run = fairdiv(&["mms", "--instance", file.path().to_str().unwrap(), "--agent", "1"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.json()["result"]["shares"][0]["mms"], "1/3");
}

#[test]
fn mms_shares_of_the_example() {
    let run = with_instance("mms", "mms_example", &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json();
    let shares: Vec<&str> = doc["result"]["shares"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["mms"].as_str().unwrap())
        .collect();
    assert_eq!(shares, ["30", "30"]);
}

#[test]
fn enumerate_counts() {
    let count = |name: &str, criterion: &str| {
        let run = with_instance("enumerate", name, &["--criterion", criterion]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        run.json()["result"]["count"].as_u64().unwrap()
    };
    assert_eq!(count("table2a", "prop"), 2);
    assert_eq!(count("table3a", "efx"), 4);
    assert_eq!(count("ef_example", "ef"), 1);

    let single = temp_json(r#"{"agents": 2, "goods": ["a"], "valuations": [
        {"type": "additive", "values": {"a": 1}}, {"type": "additive", "values": {"a": 1}}]}"#);
    let run = fairdiv(&["enumerate", "--instance", single.path().to_str().unwrap(), "--criterion", "ef"]);
    assert_eq!(run.json()["result"]["count"], 0);
}

#[test]
fn enumeration_beyond_the_cap_is_a_capacity_error() {
    let goods: Vec<String> = (0..13).map(|g| format!("\"g{g}\"")).collect();
    let values: Vec<String> = (0..13).map(|g| format!("\"g{g}\": 1")).collect();
    let valuation = format!(r#"{{"type": "additive", "values": {{{}}}}}"#, values.join(","));
    let text = format!(r#"{{"agents": 2, "goods": [{}], "valuations": [{valuation}, {valuation}]}}"#, goods.join(","));
    let file = temp_json(&text);
    let run = fairdiv(&["enumerate", "--instance", file.path().to_str().unwrap(), "--criterion", "ef1"]);
    assert_eq!(run.code, 4, "{}", run.stderr);
}

#[test]
fn manipulate_greedy_finds_a_gain() {
    let run = with_instance(
        "manipulate",
        "table4a",
        &["--mechanism", "greedy-rr", "--agent-order", "1,2", "--agent", "1", "--grid", "0:15:1"],
    );
    assert_eq!(run.code, 1, "{}", run.stderr);
    let doc = run.json();
    assert_eq!(doc["result"]["manipulable"], true);
    let witness = &doc["result"]["searches"][0]["witness"];
    assert_eq!(witness["agent"], 1);
    assert!(!witness["misreport"].is_null());
}

#[test]
fn manipulate_sd_is_clean() {
    let run = with_instance("manipulate", "sd_example", &["--mechanism", "sd", "--agent", "1", "--space", "single-minded"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.json()["result"]["manipulable"], false);
}

#[test]
fn manipulate_over_budget_is_a_capacity_error() {
    let run = with_instance(
        "manipulate",
        "table4a",
        &["--mechanism", "greedy-rr", "--agent", "1", "--grid", "0:15:1", "--max-runs", "10"],
    );
    assert_eq!(run.code, 4, "{}", run.stderr);
}

#[test]
fn manipulate_envy_cycle_across_tie_breaks() {
    let run = with_instance(
        "manipulate",
        "cycle_additive",
        &["--mechanism", "envy-cycle", "--agent", "2", "--grid", "0:12:1", "--quantify-tie-breaks"],
    );
    assert_eq!(run.code, 1, "{}", run.stderr);
    let searches = run.json()["result"]["searches"].as_array().unwrap().clone();
    assert_eq!(searches.len(), 6);
    let gains: Vec<(&str, &str)> = searches
        .iter()
        .filter_map(|s| {
            let w = &s["witness"];
            Some((w["truthful_utility"].as_str()?, w["deviated_utility"].as_str()?))
        })
        .collect();
    assert!(gains.contains(&("5", "17")), "{gains:?}");
}

#[test]
fn bad_arguments_are_input_errors() {
    let bad_grid = with_instance("manipulate", "table4a", &["--mechanism", "greedy-rr", "--agent", "1", "--grid", "5:1:1"]);
    assert_eq!(bad_grid.code, 2);
    let bad_order = with_instance("allocate", "table4a", &["--mechanism", "greedy-rr", "--agent-order", "1,1"]);
    assert_eq!(bad_order.code, 2);
    let bad_agent = with_instance("mms", "mms_example", &["--agent", "3"]);
    assert_eq!(bad_agent.code, 2);
    let unknown = fairdiv(&["allocate", "--mechanism", "nope"]);
    assert_eq!(unknown.code, 2);
}

#[test]
fn repro_case_passes() {
    let run = fairdiv(&["repro", "--case", "efx-table"]);
    assert_eq!(run.code, 0, "{}", run.stdout);
    let doc = run.json();
    assert_eq!(doc["result"]["passed"], true);
    assert!(doc["result"]["assertions"].as_array().unwrap().iter().all(|a| a["status"] == "PASS"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["--mechanism", "envy-cycle", "--agent", "2", "--grid", "0:12:1", "--quantify-tie-breaks"];
    let first = with_instance("manipulate", "cycle_additive", &args);
    let second = with_instance("manipulate", "cycle_additive", &args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn envy_cycle_trace_matches_golden() {
    let run = with_instance(
        "allocate",
        "table5_misreport",
        &["--mechanism", "envy-cycle", "--item-order", "d,a,b,c", "--source-tie-at", "b=highest", "--trace"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let golden = include_str!("golden/table5_misreport_trace.json");
    assert_eq!(run.stdout, golden);
    assert_eq!(bundles(&run.json()["result"]["allocation"]), ["ac", "bd"]);
}
