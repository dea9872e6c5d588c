//! The `lightpath` binary: exit codes and output shapes.

use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::io::Write;

const CASE1: &str = "We need a high-availability optical network connecting SITE1 (core), SITE2 (edge) and SITE3 (hub) support continuous operation with at least 3 geographically disjoint fiber paths between each pair of sites Maximum acceptable latency per path is 10 milliseconds Our total budget for components is $1500000";
const CASE2: &str = "Build optical network with ROADM equipment and regulatory compliance";
const CASE3: &str = "Connect 15 sites across continental US with sub-millisecond latency";

fn lightpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightpath"))
        .args(args)
        .env_remove("LIGHTPATH_API_KEY")
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lightpath"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn pipeline_exit_codes_follow_the_outcome() {
    let ok = lightpath(&["pipeline", CASE1]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("$1,400,000"));

    let clarify = lightpath(&["pipeline", CASE2]);
    assert_eq!(code(&clarify), 2);
    assert!(stdout(&clarify).contains("Please specify which sites/facilities you want to connect."));

    let degraded = lightpath(&["pipeline", CASE3]);
    assert_eq!(code(&degraded), 3, "{}", stderr(&degraded));

    let miss = lightpath(&["pipeline", "something the mock has never seen"]);
    assert_eq!(code(&miss), 5);
}

#[test]
fn pipeline_json_is_the_session_view() {
    let o = lightpath(&["pipeline", "--json", CASE1]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["state"], "DesignReady");
}

#[test]
fn parse_plan_and_design_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let parsed = with_stdin(&["parse", "--bypass-llm", "-"], CASE1);
    assert_eq!(code(&parsed), 0, "{}", stderr(&parsed));
    let intent = write(dir.path(), "intent.json", &stdout(&parsed));

    let plan = lightpath(&["plan", &intent]);
    assert_eq!(code(&plan), 0, "{}", stderr(&plan));
    assert!(stdout(&plan).contains("(define (problem"));

    let design = lightpath(&["design", "--json", &intent]);
    assert_eq!(code(&design), 0, "{}", stderr(&design));
    let v: serde_json::Value = serde_json::from_slice(&design.stdout).unwrap();
    assert_eq!(v["cost_breakdown"]["grand_total"], 1_400_000);
}

#[test]
fn parse_reports_grammar_errors_with_code_2() {
    let o = with_stdin(&["parse", "--bypass-llm", "-"], CASE2);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "SyntaxMalformation");
    assert_eq!(v["error"]["offending_token"], "Build");
    assert_eq!(v["route"], "UserRequired");
}

#[test]
fn config_file_with_a_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lightpath.toml", "[gateway]\napi_key = \"sk-live\"\n");
    let o = lightpath(&["--config", &cfg, "pipeline", CASE1]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("secrets are not accepted"));
    assert!(!stderr(&o).contains("sk-live"));
}

#[test]
fn unreachable_endpoint_exits_with_transport_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lightpath.toml",
        "[gateway]\nmode = \"http\"\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\napi_key_env = \"LIGHTPATH_CLI_TEST_UNSET_KEY\"\n",
    );
    let o = lightpath(&["--config", &cfg, "pipeline", CASE1]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn grammar_lists_the_productions() {
    let o = lightpath(&["grammar"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("optical network connecting"));
    assert!(out.contains("availability →"));
}

#[test]
fn eval_bypass_is_clean() {
    let o = lightpath(&["eval", "--bypass-llm", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cases"].as_array().unwrap().len(), 90);
}

#[test]
fn validate_accepts_a_plan_wrapper() {
    let dir = tempfile::tempdir().unwrap();
    let domain = write(
        dir.path(),
        "domain.pddl",
        "(define (domain d) (:requirements :strips :typing) (:types site)
           (:predicates (up ?s - site))
           (:action light :parameters (?s - site) :precondition () :effect (up ?s)))",
    );
    let problem = write(
        dir.path(),
        "problem.pddl",
        "(define (problem p) (:domain d) (:objects a - site) (:init) (:goal (and (up a))))",
    );
    let good = write(
        dir.path(),
        "good.json",
        r#"{"plan":{"steps":[{"action":"light","args":["a"],"cumulative_cost":0}],"total_cost":0,"feasible":true}}"#,
    );
    let bad = write(dir.path(), "bad.json", r#"{"steps":[],"total_cost":0,"feasible":true}"#);
    let o = lightpath(&["validate", &domain, &problem, &good]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = lightpath(&["validate", &domain, &problem, &bad]);
    assert_eq!(code(&o), 3);
}
