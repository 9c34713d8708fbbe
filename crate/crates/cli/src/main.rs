//! Batch front end: forge viruses from blueprints, run them inside virtual
//! environments, verify their equations and classify their traits.
//!
//! Everything happens in memory. The only files written are the ones named
//! with `--out`; without it results go to stdout.
//!
//! Exit codes: 0 pass, 1 fail, 2 invalid blueprint, 3 inconclusive or out of
//! fuel.

#![forbid(unsafe_code)]

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use virolab::envmodel::{diff, run_external, Env, EnvOutcome, SlotKind, TraceLine};
use virolab::recursion::{explicit_fix, kleene_fix, TranscriptStep};
use virolab::verifier::{
    bonfante_demo, classify_traits, probe_corpus, verify_class, ClassReport, Status,
};
use virolab::virusforge::{forge, Blueprint, Class, EquationId, Forged};
use virolab::{Fuel, Word};

#[derive(Parser)]
#[command(name = "virolab", version, about = "Forge, run and verify toy viruses in a virtual environment")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Step budget per evaluation.
    #[arg(long, global = true, default_value_t = Fuel::DEFAULT.0)]
    fuel: u64,
    /// Seed of the probe corpus.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of probe environments.
    #[arg(long, global = true, default_value_t = 20)]
    probes: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Forge a virus from a blueprint file or a standard class.
    Build {
        /// Standard class name, e.g. `overwriter`.
        #[arg(long)]
        class: Option<String>,
        /// Blueprint JSON file.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Run generations of a scenario and write the delta trace.
    Run { scenario: PathBuf },
    /// Check every class equation of a forged artifact.
    Verify {
        artifact: PathBuf,
        /// Directory of environment JSON files used instead of the seeded corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Infer the trait row of a forged artifact from behaviour.
    Classify {
        artifact: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Build a fixed point of a program transformer given as source.
    Fix {
        source: PathBuf,
        /// Use the explicit form `φ_Φ(y)(x) = f(e, y, x)`.
        #[arg(long)]
        explicit: bool,
    },
    /// Show that a virus and its infected form are different functions.
    DemoBonfante,
}

/// Failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Fail { code, msg: msg.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Fail::new(1, format!("{}: {e}", path.display()))
    }
}

type Res<T> = Result<T, Fail>;

#[derive(Serialize, Deserialize)]
struct Artifact {
    class: Class,
    v: Word,
    transcript: Vec<TranscriptStep>,
    equations: Vec<EquationId>,
    blueprint: Blueprint,
}

/// Either a path relative to the scenario file or the value itself.
#[derive(Deserialize)]
#[serde(untagged)]
enum FileRef<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    env: FileRef<Env>,
    blueprint: FileRef<Blueprint>,
    #[serde(default)]
    generations: usize,
    fuel: Option<u64>,
    #[allow(dead_code)]
    seed: Option<u64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path).map_err(|e| Fail::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Fail::io(path, e))
}

fn resolve<T: for<'de> Deserialize<'de>>(r: FileRef<T>, base: &Path) -> Res<T> {
    match r {
        FileRef::Inline(v) => Ok(v),
        FileRef::Path(p) => read_json(&base.join(p)),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::io(p, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn forge_checked(bp: &Blueprint) -> Res<Forged> {
    forge(bp).map_err(|e| Fail::new(2, format!("invalid blueprint: {e}")))
}

fn load_artifact(path: &Path) -> Res<Forged> {
    let a: Artifact = read_json(path)?;
    if a.blueprint.class != a.class {
        return Err(Fail::new(2, "artifact class does not match its blueprint"));
    }
    Ok(forge_checked(&a.blueprint)?.with_v(a.v))
}

fn load_corpus(dir: &Option<PathBuf>, c: &Common) -> Res<Vec<Env>> {
    let Some(dir) = dir else {
        return Ok(probe_corpus(c.seed, c.probes));
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Fail::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 3,
    }
}

fn cmd_build(c: &Common, class: Option<String>, params: Option<PathBuf>) -> Res<u8> {
    let bp = match (params, class) {
        (Some(p), _) => read_json::<Blueprint>(&p).map_err(|f| Fail::new(2, f.msg))?,
        (None, Some(name)) => {
            let class = Class::from_name(&name).ok_or_else(|| Fail::new(2, format!("unknown class `{name}`")))?;
            Blueprint::standard(class)
        }
        (None, None) => return Err(Fail::new(2, "need --class or --params")),
    };
    let f = forge_checked(&bp)?;
    let artifact = Artifact {
        class: f.class,
        v: f.v.clone(),
        transcript: f.transcript.clone(),
        equations: f.equations.clone(),
        blueprint: f.blueprint.clone(),
    };
    emit(&c.out, &to_json(&artifact))?;
    Ok(0)
}

fn cmd_run(c: &Common, scenario: &Path) -> Res<u8> {
    let sc: Scenario = read_json(scenario)?;
    let base = scenario.parent().unwrap_or(Path::new("."));
    let mut env = resolve(sc.env, base)?;
    let bp = resolve(sc.blueprint, base).map_err(|f| Fail::new(2, f.msg))?;
    let fuel = Fuel(sc.fuel.unwrap_or(c.fuel));
    if fuel.0 == 0 {
        return Err(Fail::new(2, "fuel must be at least 1"));
    }
    let forged = forge_checked(&bp)?;

    let mut trace: Box<dyn std::io::Write> = match &c.out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Fail::io(p, e))?),
        None => Box::new(std::io::stderr()),
    };
    let mut actor = forged.v.clone();
    let mut code = 0;
    for step in 0..sc.generations {
        let after = match run_external(&actor, &env, fuel) {
            EnvOutcome::Env(e) => e,
            EnvOutcome::OutOfFuel(n) => {
                eprintln!("step {step}: out of fuel after {n} steps");
                code = 3;
                break;
            }
            other => {
                eprintln!("step {step}: run failed: {other:?}");
                code = 1;
                break;
            }
        };
        let delta = diff(&env, &after);
        let next = delta
            .touched()
            .find(|(s, _)| s.kind == SlotKind::Program)
            .map(|(_, w)| w.clone());
        let line = TraceLine { step, actor: actor.clone(), delta };
        writeln!(trace, "{}", serde_json::to_string(&line).expect("serializable"))
            .map_err(|e| Fail::new(1, e.to_string()))?;
        env = after;
        if let Some(next) = next {
            actor = next;
        }
    }
    trace.flush().map_err(|e| Fail::new(1, e.to_string()))?;
    println!("{}", to_json(&env));
    Ok(code)
}

fn cmd_verify(c: &Common, artifact: &Path, corpus: &Option<PathBuf>) -> Res<u8> {
    let forged = load_artifact(artifact)?;
    let probes = load_corpus(corpus, c)?;
    let fuel = Fuel(c.fuel);
    let mut report: ClassReport =
        verify_class(&forged, &probes, fuel).map_err(|e| Fail::new(1, e.to_string()))?;
    if report.status == Status::Pass && forged.class != Class::Multipartite {
        report.traits = classify_traits(&forged.v, &probes, fuel).ok();
    }
    emit(&c.out, &to_json(&report))?;
    Ok(status_code(report.status))
}

fn cmd_classify(c: &Common, artifact: &Path, corpus: &Option<PathBuf>) -> Res<u8> {
    let forged = load_artifact(artifact)?;
    let probes = load_corpus(corpus, c)?;
    let traits = classify_traits(&forged.v, &probes, Fuel(c.fuel)).map_err(|e| Fail::new(1, e.to_string()))?;
    emit(&c.out, &to_json(&traits))?;
    Ok(0)
}

#[derive(Serialize)]
struct FixOutput {
    e: Word,
    transcript: Vec<TranscriptStep>,
}

fn cmd_fix(c: &Common, source: &Path, explicit: bool) -> Res<u8> {
    let code_f = fs::read(source).map_err(|e| Fail::io(source, e))?;
    let fixed = if explicit { explicit_fix(&code_f) } else { kleene_fix(&code_f) };
    let fp = fixed.map_err(|e| Fail::new(2, format!("{}: {e}", source.display())))?;
    let out = FixOutput {
        e: fp.word().clone(),
        transcript: fp.transcript,
    };
    emit(&c.out, &to_json(&out))?;
    Ok(0)
}

fn cmd_demo_bonfante(c: &Common) -> Res<u8> {
    let report = bonfante_demo(&[1, 2, 3, 4], Fuel(c.fuel));
    for case in &report.cases {
        let verdict = if case.verdict.is_equal() {
            "equal"
        } else if case.verdict.is_inconclusive() {
            "inconclusive"
        } else {
            "unequal"
        };
        eprintln!("host {} n={}: {verdict}", case.host, case.n);
    }
    emit(&c.out, &to_json(&report))?;
    Ok(if report.reproduced() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::Build { class, params } => cmd_build(c, class.clone(), params.clone()),
        Command::Run { scenario } => cmd_run(c, scenario),
        Command::Verify { artifact, corpus } => cmd_verify(c, artifact, corpus),
        Command::Classify { artifact, corpus } => cmd_classify(c, artifact, corpus),
        Command::Fix { source, explicit } => cmd_fix(c, source, *explicit),
        Command::DemoBonfante => cmd_demo_bonfante(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
