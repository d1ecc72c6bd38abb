use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn fks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fks")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn all() -> String {
    fixture("all.fks").display().to_string()
}

#[test]
fn parse_and_fmt_accept_fixtures() {
    let o = fks(&["parse", &all(), &fixture("squarer.fks").display().to_string()]);
    assert!(o.status.success(), "{o:?}");
    let o = fks(&["fmt", "--check", &fixture("types.fks").display().to_string()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fmt_output_is_a_fixpoint() {
    let once = stdout(&fks(&["fmt", &fixture("signal.fks").display().to_string()]));
    let path = std::env::temp_dir().join(format!("fks-fmt-{}.fks", std::process::id()));
    std::fs::write(&path, &once).unwrap();
    let twice = stdout(&fks(&["fmt", &path.display().to_string()]));
    let check = fks(&["fmt", "--check", &path.display().to_string()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(once, twice);
    assert!(check.status.success());
}

#[test]
fn check_is_clean_on_fixtures() {
    let o = fks(&["check", &all()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o), "");
}

#[test]
fn lint_exit_codes() {
    let o = fks(&["lint", "--rules", "all", &all()]);
    assert_eq!(o.status.code(), Some(0));
    let o = fks(&["lint", "--rules", "C-ZZ-01", &all()]);
    assert_eq!(o.status.code(), Some(2));

    let path = std::env::temp_dir().join(format!("fks-lint-{}.fks", std::process::id()));
    std::fs::write(
        &path,
        "datatype N = int[0..3]\ndatatype Unused = int[0..1]\n\
         component C {\n  in In: N\n  out Out: N\n  behavior automaton Gone\n}\n",
    )
    .unwrap();
    let p = path.display().to_string();
    let errors = fks(&["lint", "--rules", "C-IF-02", "--json", &p]);
    let warnings = fks(&["lint", "--rules", "W-DT-01", &p]);
    std::fs::remove_file(&path).ok();
    assert_eq!(errors.status.code(), Some(1));
    let finding: serde_json::Value = serde_json::from_str(stdout(&errors).lines().next().unwrap()).unwrap();
    assert_eq!(finding["code"], "C-IF-02");
    assert_eq!(warnings.status.code(), Some(0));
    assert!(stdout(&warnings).contains("W-DT-01"));
}

#[test]
fn refine_reports_each_claim() {
    let o = fks(&["refine", &all(), "--claim", "SqRefinesNdup"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("SqRefinesNdup: holds at horizon 3"));

    let o = fks(&["refine", &all(), "--claim", "NdupRefinesSq", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(record["claim"], "NdupRefinesSq");
    assert_eq!(record["result"]["verdict"], "fails");
    assert_eq!(record["result"]["horizon"], 2);

    let o = fks(&["refine", &all(), "--json"]);
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn trace_check_and_gen() {
    let o = fks(&["trace", "check", &all()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches(": member").count(), 5);

    let o = fks(&[
        "trace", "gen", &all(), "--network", "SqNet", "--input", "In = [3] [] []", "--policy", "strict",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("trace Generated1 on SqNet"), "{text}");
    assert!(text.contains("sq -> env : Out!9 @2"), "{text}");
    assert!(!text.contains("Generated2"));
}

#[test]
fn sim_run_prints_each_interval() {
    let o = fks(&[
        "sim", "run", &all(), "--network", "Pipe", "--input", "In = [2]", "--steps", "3", "--policy", "strict",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[2].starts_with("@3") && lines[2].contains("16"), "{text}");

    let o = fks(&["sim", "run", &all(), "--network", "Nope", "--input", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compile_writes_the_ir() {
    let path = std::env::temp_dir().join(format!("fks-ir-{}.json", std::process::id()));
    let o = fks(&["compile", &all(), "--network", "QuadNet", "-o", &path.display().to_string()]);
    assert!(o.status.success(), "{o:?}");
    let ir: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(ir["format"], "fks-ir");
    assert_eq!(ir["nodes"].as_array().unwrap().len(), 2);
}
