use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_virolab");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn virolab(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("HOME", dir.join("home"))
        .env("TMPDIR", dir.join("tmp"))
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn trace(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn hex_len(v: &Value) -> usize {
    v.as_str().unwrap().len() / 2
}

#[test]
fn build_is_deterministic() {
    let d = TempDir::new().unwrap();
    let bp = fixtures().join("blueprints/overwriter.json");
    let bp = bp.to_str().unwrap();
    assert_eq!(code(&virolab(d.path(), &["build", "--params", bp, "--out", "a.json"])), 0);
    assert_eq!(code(&virolab(d.path(), &["build", "--params", bp, "--out", "b.json"])), 0);
    let a = fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.json")).unwrap());
    let v = serde_json::from_slice::<Value>(&a).unwrap();
    assert_eq!(v["class"], "overwriter");
    assert!(v["equations"].as_array().unwrap().len() >= 2);
}

#[test]
fn invalid_blueprints_exit_2() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("doc.json"), r#"{"class":"document"}"#).unwrap();
    let o = virolab(d.path(), &["build", "--params", "doc.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`t`"));
    fs::write(d.path().join("junk.json"), r#"{"class":"overwriter","bogus":1}"#).unwrap();
    assert_eq!(code(&virolab(d.path(), &["build", "--params", "junk.json"])), 2);
    assert_eq!(code(&virolab(d.path(), &["build", "--class", "worm"])), 2);
}

#[test]
fn polymorphic_build_records_pad() {
    let d = TempDir::new().unwrap();
    let o = virolab(d.path(), &["build", "--class", "polymorphic"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let labels: Vec<&str> = v["transcript"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["label"].as_str().unwrap())
        .collect();
    assert!(labels.contains(&"code(Pad)"), "{labels:?}");
}

#[test]
fn polymorphic_generations_grow_by_one_nop() {
    let d = TempDir::new().unwrap();
    let sc = fixtures().join("scenarios/polymorphic_5.json");
    let o = virolab(d.path(), &["run", sc.to_str().unwrap(), "--out", "t.jsonl"]);
    assert_eq!(code(&o), 0);
    let lines = trace(&d.path().join("t.jsonl"));
    assert_eq!(lines.len(), 5);
    let sizes: Vec<usize> = lines
        .iter()
        .map(|l| hex_len(&l["delta"]["replaced"][0]["after"]))
        .collect();
    for w in sizes.windows(2) {
        assert_eq!(w[1] - w[0], "(nop) ".len() * 2, "{sizes:?}");
    }
}

#[test]
fn zero_generations_echo_the_env() {
    let d = TempDir::new().unwrap();
    let sc = fixtures().join("scenarios/overwriter_0.json");
    let o = virolab(d.path(), &["run", sc.to_str().unwrap(), "--out", "t.jsonl"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(d.path().join("t.jsonl")).unwrap().is_empty());
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out, json(&fixtures().join("envs/two_hosts.json")));
}

#[test]
fn duplicator_population_grows() {
    let d = TempDir::new().unwrap();
    let sc = fixtures().join("scenarios/duplicator_2.json");
    let o = virolab(d.path(), &["run", sc.to_str().unwrap(), "--out", "t.jsonl"]);
    assert_eq!(code(&o), 0);
    let lines = trace(&d.path().join("t.jsonl"));
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert!(!l["delta"]["added"].as_array().unwrap().is_empty());
    }
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(out["programs"].as_array().unwrap().len() > 4);
}

#[test]
fn runs_replay_byte_identically() {
    let d = TempDir::new().unwrap();
    let sc = fixtures().join("scenarios/generation_counter_3.json");
    let sc = sc.to_str().unwrap();
    let a = virolab(d.path(), &["run", sc, "--out", "a.jsonl"]);
    let b = virolab(d.path(), &["run", sc, "--out", "b.jsonl"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        fs::read(d.path().join("a.jsonl")).unwrap(),
        fs::read(d.path().join("b.jsonl")).unwrap()
    );
}

#[test]
fn out_of_fuel_run_exits_3_with_partial_trace() {
    let d = TempDir::new().unwrap();
    let poly = fixtures().join("scenarios/polymorphic_5.json");
    let mut sc = json(&poly);
    sc["env"] = Value::String(fixtures().join("envs/two_hosts.json").display().to_string());
    sc["blueprint"] = Value::String(fixtures().join("blueprints/polymorphic.json").display().to_string());
    sc["fuel"] = Value::from(50);
    fs::write(d.path().join("sc.json"), sc.to_string()).unwrap();
    let o = virolab(d.path(), &["run", "sc.json", "--out", "t.jsonl"]);
    assert_eq!(code(&o), 3);
    assert!(d.path().join("t.jsonl").exists());
}

fn build_fixture(dir: &Path, class: &str) -> PathBuf {
    let bp = fixtures().join(format!("blueprints/{class}.json"));
    let out = dir.join(format!("{class}.forged.json"));
    let o = virolab(dir, &["build", "--params", bp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn shipped_fixtures_verify() {
    let d = TempDir::new().unwrap();
    let classes = [
        "overwriter",
        "ecto_symbiote",
        "duplicator",
        "document",
        "source",
        "companion",
        "launcher",
        "multipartite",
        "generation_counter",
        "polymorphic",
    ];
    for class in classes {
        let f = build_fixture(d.path(), class);
        let o = virolab(d.path(), &["verify", f.to_str().unwrap(), "--probes", "8"]);
        assert_eq!(code(&o), 0, "{class}: {}", String::from_utf8_lossy(&o.stdout));
        let r: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn corrupted_fixture_fails_and_starved_run_is_inconclusive() {
    let d = TempDir::new().unwrap();
    let f = build_fixture(d.path(), "ecto_symbiote");
    let mut art = json(&f);
    let v = art["v"].as_str().unwrap().to_string();
    // "(snd" -> "(sxd" somewhere inside a literal slot
    let at = v.match_indices(&hex_of("(snd")).map(|(i, _)| i).find(|i| i % 2 == 0).unwrap();
    let bad = format!("{}{}{}", &v[..at + 4], hex_of("x"), &v[at + 6..]);
    art["v"] = Value::String(bad);
    let corrupt = d.path().join("bad.json");
    fs::write(&corrupt, art.to_string()).unwrap();
    let o = virolab(d.path(), &["verify", corrupt.to_str().unwrap(), "--probes", "5"]);
    assert_eq!(code(&o), 1);

    let o = virolab(d.path(), &["verify", f.to_str().unwrap(), "--probes", "5", "--fuel", "10"]);
    assert_eq!(code(&o), 3);
}

fn hex_of(s: &str) -> String {
    s.bytes().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn verify_reads_a_corpus_directory() {
    let d = TempDir::new().unwrap();
    let f = build_fixture(d.path(), "overwriter");
    let corpus = d.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::copy(fixtures().join("envs/two_hosts.json"), corpus.join("a.json")).unwrap();
    let o = virolab(d.path(), &["verify", f.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["equations"][0]["verdicts"].as_array().unwrap().len(), 1);
}

#[test]
fn classify_companion() {
    let d = TempDir::new().unwrap();
    let f = build_fixture(d.path(), "companion");
    let o = virolab(d.path(), &["classify", f.to_str().unwrap(), "--probes", "8"]);
    assert_eq!(code(&o), 0);
    let t: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(t["target_type"], "program");
    assert_eq!(t["host_modification"], "preservative");
    assert_eq!(t["spread_count"], 2);
}

#[test]
fn fix_builds_a_quine() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("f.src"), "(fst in)").unwrap();
    let o = virolab(d.path(), &["fix", "f.src"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = virolab::Word::from_hex(v["e"].as_str().unwrap()).unwrap();
    let out = virolab::interp(&e, b"anything", virolab::Fuel::DEFAULT);
    assert_eq!(out.value(), Some(&e));

    fs::write(d.path().join("bad.src"), "#not a program").unwrap();
    assert_eq!(code(&virolab(d.path(), &["fix", "bad.src"])), 2);
    assert_eq!(code(&virolab(d.path(), &["fix", "f.src", "--explicit"])), 0);
}

#[test]
fn counterexample_reports_both_hosts() {
    let d = TempDir::new().unwrap();
    let o = virolab(d.path(), &["demo-bonfante"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let cases = r["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 8);
    for c in cases {
        let want = if c["host"] == "P_DEL" { "unequal" } else { "equal" };
        assert_eq!(c["verdict"]["verdict"], want);
    }
}

/// Path → (length, contents) for every file under `root`.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn cli_writes_only_declared_outputs() {
    let work = TempDir::new().unwrap();
    let inputs = TempDir::new().unwrap();
    for sub in ["home", "tmp"] {
        fs::create_dir(work.path().join(sub)).unwrap();
    }
    let copy_tree = |from: &Path, to: &Path| {
        for (rel, bytes) in snapshot(from) {
            let dst = to.join(rel);
            fs::create_dir_all(dst.parent().unwrap()).unwrap();
            fs::write(dst, bytes).unwrap();
        }
    };
    copy_tree(&fixtures(), inputs.path());
    fs::write(inputs.path().join("f.src"), "(fst in)").unwrap();
    let before_inputs = snapshot(inputs.path());
    let before_work = snapshot(work.path());

    let i = |rel: &str| inputs.path().join(rel).display().to_string();
    let w = |rel: &str| work.path().join(rel).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["build".into(), "--params".into(), i("blueprints/launcher.json"), "--out".into(), w("launcher.json")],
        vec!["verify".into(), w("launcher.json"), "--probes".into(), "5".into(), "--out".into(), w("report.json")],
        vec!["classify".into(), w("launcher.json"), "--probes".into(), "8".into(), "--out".into(), w("traits.json")],
        vec!["run".into(), i("scenarios/polymorphic_5.json"), "--out".into(), w("trace.jsonl")],
        vec!["fix".into(), i("f.src"), "--out".into(), w("fix.json")],
        vec!["demo-bonfante".into(), "--out".into(), w("counterexample.json")],
    ];
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = virolab(work.path(), &args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }

    assert_eq!(snapshot(inputs.path()), before_inputs);
    let after_work = snapshot(work.path());
    let touched: Vec<&PathBuf> = after_work
        .iter()
        .filter(|(p, b)| before_work.get(*p) != Some(b))
        .map(|(p, _)| p)
        .collect();
    let declared = ["counterexample.json", "fix.json", "launcher.json", "report.json", "trace.jsonl", "traits.json"];
    let declared: Vec<PathBuf> = declared.iter().map(PathBuf::from).collect();
    assert_eq!(touched, declared.iter().collect::<Vec<_>>());
}
