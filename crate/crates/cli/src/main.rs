//! `fnq`: batch front end for solving and verifying functional equations
//! over small finite rings.
//!
//! Exit status: 0 when the run succeeds (and a verification holds), 1 when a
//! verification produces counterexamples, 2 on usage, parse or budget errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fnq_core::algebra::{build_ring, Elem, Ring, RingError, RingSpec};
use fnq_core::eqdsl::{parse_equation, EqError, EquationAst};
use fnq_core::maps::{classify_map, enumerate_maps, enumeration_size, FnTable, FunctionClass, MapError};
use fnq_core::solver::{plan, solve, SolveError, SolveTask, DEFAULT_BUDGET};
use fnq_core::symbolic::{
    check_identity, derive_constraints, family_substitute, preset, presets, render_constraints,
    SolutionFamily, SymError,
};
use fnq_core::theorems::{
    self, classify_pexider, family_name, verify_alien, verify_mp, verify_pexider, verify_sofy,
    verify_thm5_symbolic, PexiderError, RingSummary, Settings, TheoremError, TheoremReport,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "fnq",
    version,
    about = "Exhaustive and symbolic checks of functional equations over finite rings"
)]
struct Cli {
    /// Format of error messages on stderr.
    #[arg(long, value_enum, global = true, default_value_t = ErrorFormat::Text)]
    error_format: ErrorFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ErrorFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ring spec as inline JSON or a path to a JSON file.
    #[arg(long)]
    ring: Option<String>,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    out: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Candidate budget; overrides FNQ_BUDGET.
    #[arg(long)]
    budget: Option<u128>,
    /// Print the resolved task without running it.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find every binding of the unknowns satisfying an equation.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "eq_file")]
        eq: Option<String>,
        #[arg(long)]
        eq_file: Option<PathBuf>,
        /// Class of an unknown, `name=class` (arbitrary, additive, multiplicative,
        /// homomorphism, leibniz, derivation, logarithmic, sofy:N, mp).
        #[arg(long = "class")]
        classes: Vec<String>,
        /// Parameter value `name=n`, taken as n·1 in the ring.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Search the left-hand unknown instead of computing it at y = 1.
        #[arg(long)]
        no_pivot: bool,
    },
    /// Check one of the characterization results on a ring.
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<i64>,
    },
    /// Report the classes of given tables, and the family of an (f, h, k) triple.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Table `name=v0,v1,...` listed in domain order.
        #[arg(long = "table")]
        tables: Vec<String>,
    },
    /// Derive parameter constraints for a solution family.
    Symbolic {
        #[command(flatten)]
        common: Common,
        /// Built-in family.
        #[arg(long, conflicts_with = "family")]
        preset: Option<String>,
        /// Family as a JSON file; needs --eq.
        #[arg(long, requires = "eq")]
        family: Option<PathBuf>,
        #[arg(long)]
        eq: Option<String>,
        /// Parameter value `name=p/q` for an identity check.
        #[arg(long = "param")]
        params: Vec<String>,
        /// List the built-in families.
        #[arg(long)]
        list: bool,
    },
    /// List every table of a function class.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        class: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum Theorem {
    #[value(name = "thm4")]
    #[serde(rename = "thm4")]
    Thm4,
    #[value(name = "prop1")]
    #[serde(rename = "prop1")]
    Prop1,
    #[value(name = "pexider")]
    #[serde(rename = "pexider")]
    Pexider,
    #[value(name = "alien")]
    #[serde(rename = "alien")]
    Alien,
    #[value(name = "thm5-symbolic")]
    #[serde(rename = "thm5-symbolic")]
    Thm5Symbolic,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Ring(RingError),
    Equation(EqError),
    Solve(SolveError),
    Theorem(TheoremError),
    Symbolic(SymError),
    Map(MapError),
    Pexider(PexiderError),
}

macro_rules! from_error {
    ($($t:ty => $v:ident),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::$v(e)
            }
        })*
    };
}

from_error!(RingError => Ring, EqError => Equation, SolveError => Solve, TheoremError => Theorem,
    SymError => Symbolic, MapError => Map, PexiderError => Pexider);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Ring(e) => write!(f, "{e}"),
            CliError::Equation(e) => write!(f, "{e}"),
            CliError::Solve(e) => write!(f, "{e}"),
            CliError::Theorem(e) => write!(f, "{e}"),
            CliError::Symbolic(e) => write!(f, "{e}"),
            CliError::Map(e) => write!(f, "{e}"),
            CliError::Pexider(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn to_json(&self) -> Value {
        let tagged = match self {
            CliError::Equation(e) => serde_json::to_value(e).ok(),
            CliError::Solve(e) => serde_json::to_value(e).ok(),
            CliError::Theorem(e) => serde_json::to_value(e).ok(),
            CliError::Symbolic(e) => serde_json::to_value(e).ok(),
            CliError::Pexider(e) => serde_json::to_value(e).ok(),
            _ => None,
        };
        let kind = match self {
            CliError::Usage(_) => "UsageError",
            CliError::Io(_) => "IoError",
            CliError::Ring(_) => "RingError",
            CliError::Map(_) => "MapError",
            _ => "Error",
        };
        let mut v = tagged.filter(Value::is_object).unwrap_or_else(|| json!({ "error": kind }));
        // errors wrapping another error carry the inner tag
        while let Some(inner) = v.get("error").and_then(|e| e.as_object()).cloned() {
            v = Value::Object(inner);
        }
        v["message"] = Value::String(self.to_string());
        v
    }
}

/// Result of a subcommand: the rendered artifact and whether it holds.
struct Outcome {
    body: String,
    holds: bool,
}

fn main() -> ExitCode {
    let json_errors = {
        let args: Vec<String> = std::env::args().collect();
        args.windows(2).any(|w| w[0] == "--error-format" && w[1] == "json")
            || args.iter().any(|a| a == "--error-format=json")
    };
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            if json_errors {
                eprintln!("{}", json!({ "error": "UsageError", "message": e.to_string().trim() }));
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    let format = cli.error_format;
    match run(cli.command) {
        Ok(outcome) => {
            if outcome.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            match format {
                ErrorFormat::Json => eprintln!("{}", e.to_json()),
                ErrorFormat::Text => eprintln!("error: {e}"),
            }
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    let common = match &command {
        Command::Solve { common, .. }
        | Command::Verify { common, .. }
        | Command::Classify { common, .. }
        | Command::Symbolic { common, .. }
        | Command::Enumerate { common, .. } => common.clone(),
    };
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match command {
        Command::Solve { common, eq, eq_file, classes, params, no_pivot } => {
            cmd_solve(&common, eq, eq_file, &classes, &params, no_pivot)?
        }
        Command::Verify { theorem, common, eps, lambda, mu } => {
            cmd_verify(theorem, &common, eps, lambda, mu)?
        }
        Command::Classify { common, tables } => cmd_classify(&common, &tables)?,
        Command::Symbolic { common, preset, family, eq, params, list } => {
            cmd_symbolic(&common, preset, family, eq, &params, list)?
        }
        Command::Enumerate { common, class } => cmd_enumerate(&common, &class)?,
    };
    match &common.output {
        Some(path) => std::fs::write(path, &outcome.body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome)
}

fn resolve_budget(flag: Option<u128>) -> Result<u128, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("FNQ_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("FNQ_BUDGET is not a number: {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn load_ring(arg: Option<&str>) -> Result<(Ring, Value), CliError> {
    let arg = arg.ok_or_else(|| CliError::Usage("missing --ring".into()))?;
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("cannot read ring spec {arg}: {e}")))?
    };
    let spec: RingSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid ring spec: {e}")))?;
    let ring = build_ring(&spec)?;
    let echo = serde_json::to_value(&spec).expect("specs serialize");
    Ok((ring, echo))
}

/// `n·1` in the ring.
fn ring_integer(ring: &Ring, n: i64, what: &str) -> Result<Elem, CliError> {
    ring.integer(n).ok_or_else(|| CliError::Usage(format!("{what} needs a unital ring")))
}

fn split_assignment(s: &str) -> Result<(&str, &str), CliError> {
    s.split_once('=')
        .map(|(a, b)| (a.trim(), b.trim()))
        .filter(|(a, _)| !a.is_empty())
        .ok_or_else(|| CliError::Usage(format!("expected name=value, got {s:?}")))
}

fn parse_int(s: &str, what: &str) -> Result<i64, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("{what}: {s:?} is not an integer")))
}

fn parse_class(ring: &Ring, s: &str) -> Result<FunctionClass, CliError> {
    let lower = s.trim().to_ascii_lowercase();
    if let Some(n) = lower.strip_prefix("sofy:") {
        let eps = ring_integer(ring, parse_int(n, "sofy epsilon")?, "sofy epsilon")?;
        return Ok(FunctionClass::HomoDerivSofy { eps });
    }
    lower.parse().map_err(CliError::Usage)
}

/// Resolved configuration embedded in every report. Worker count and
/// output path are left out so reports do not depend on them.
fn config_json(subcommand: &str, common: &Common, ring: Option<&Value>, extra: Value) -> Value {
    let mut v = json!({
        "subcommand": subcommand,
        "ring": ring.cloned().unwrap_or(Value::Null),
        "out": common.out,
        "budget": resolve_budget(common.budget).unwrap_or(DEFAULT_BUDGET).to_string(),
        "dry_run": common.dry_run,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn envelope(config: Value, result: impl Serialize) -> String {
    let v = json!({ "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
    s.push('\n');
    s
}

fn reject_csv(common: &Common, what: &str) -> Result<(), CliError> {
    if common.out == OutFormat::Csv {
        return Err(CliError::Usage(format!("{what} has no CSV form")));
    }
    Ok(())
}

fn cmd_solve(
    common: &Common,
    eq: Option<String>,
    eq_file: Option<PathBuf>,
    classes: &[String],
    params: &[String],
    no_pivot: bool,
) -> Result<Outcome, CliError> {
    let text = match (eq, eq_file) {
        (Some(t), _) => t,
        (None, Some(p)) => std::fs::read_to_string(&p)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?
            .trim()
            .to_string(),
        (None, None) => return Err(CliError::Usage("missing --eq or --eq-file".into())),
    };
    let ast = parse_equation(&text)?;
    let (ring, ring_echo) = load_ring(common.ring.as_deref())?;
    let mut task = SolveTask::new(ast, ring.clone()).budget(resolve_budget(common.budget)?).pivot(!no_pivot);
    let mut class_echo = BTreeMap::new();
    for c in classes {
        let (name, class) = split_assignment(c)?;
        let class = parse_class(&ring, class)?;
        class_echo.insert(name.to_string(), class.to_string());
        task = task.class(name, class);
    }
    let mut param_echo = BTreeMap::new();
    for p in params {
        let (name, value) = split_assignment(p)?;
        let n = parse_int(value, name)?;
        param_echo.insert(name.to_string(), n);
        task = task.param(name, ring_integer(&ring, n, "parameters")?);
    }
    let config = config_json(
        "solve",
        common,
        Some(&ring_echo),
        json!({ "equation": text, "classes": class_echo, "params": param_echo, "pivot": !no_pivot }),
    );

    if common.dry_run {
        let p = plan(&task)?;
        let body = match common.out {
            OutFormat::Json => envelope(config, &p),
            OutFormat::Csv => {
                let mut s = String::from("function,class,position,choices\n");
                for st in &p.steps {
                    let pos = st.position.map(|x| x.to_string()).unwrap_or_default();
                    let _ = writeln!(s, "{},{},{},{}", st.function, st.class, pos, st.choices);
                }
                s
            }
            OutFormat::Text => {
                let mut s = String::new();
                let _ = writeln!(s, "equation: {}", p.task.equation);
                let _ = writeln!(
                    s,
                    "ring: {} (size {}, domain {} of size {})",
                    p.task.ring, p.task.ring_size, p.task.domain, p.task.domain_size
                );
                let _ = writeln!(s, "pivot: {}", p.pivot.as_deref().unwrap_or("none"));
                let _ = writeln!(s, "steps: {}", p.steps.len());
                let _ = writeln!(s, "candidate space: {}", p.candidate_space);
                let _ = writeln!(s, "budget: {}", p.task.budget);
                s
            }
        };
        return Ok(Outcome { body, holds: true });
    }

    let set = solve(&task)?;
    let body = match common.out {
        OutFormat::Json => envelope(config, &set),
        OutFormat::Csv => set.to_csv(ring.domain()),
        OutFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "equation: {}", set.task.equation);
            let _ = writeln!(s, "ring: {} (hash {})", set.task.ring, set.task.ring_hash);
            let _ = writeln!(s, "pivot: {}", set.pivot.as_deref().unwrap_or("none"));
            let _ = writeln!(s, "candidate space: {}", set.candidate_space);
            let _ = writeln!(s, "solutions: {}", set.len());
            for b in &set.solutions {
                let parts: Vec<String> =
                    b.functions.iter().map(|(n, t)| format!("{n}={:?}", t.values)).collect();
                let _ = writeln!(s, "  {}", parts.join(" "));
            }
            s
        }
    };
    Ok(Outcome { body, holds: true })
}

fn theorem_plan(
    theorem: Theorem,
    ring: &Ring,
    eps: Option<Elem>,
    lm: Option<(Elem, Elem)>,
    budget: u128,
) -> Result<Value, CliError> {
    let task =
        |src: &str| SolveTask::new(parse_equation(src).expect("built-in"), ring.clone()).budget(budget);
    let p = match theorem {
        Theorem::Thm4 => plan(&task(theorems::EQ_SOFY).param("eps", eps.unwrap_or(0)))?,
        Theorem::Prop1 => plan(&task(theorems::EQ_LEIBNIZ))?,
        Theorem::Pexider => plan(&task(theorems::EQ_PEXIDER))?,
        Theorem::Alien => {
            let (l, m) = lm.unwrap_or((0, 0));
            plan(&task(theorems::EQ_ALIEN).param("lambda", l).param("mu", m))?
        }
        Theorem::Thm5Symbolic => unreachable!("no ring search"),
    };
    Ok(serde_json::to_value(p).expect("plans serialize"))
}

fn report_csv(rep: &TheoremReport) -> String {
    format!(
        "theorem,solutions_found,predicted_count,forward_ok,backward_ok,backward_asserted,counterexamples,holds\n{},{},{},{},{},{},{},{}\n",
        rep.theorem,
        rep.solutions_found,
        rep.predicted_count,
        rep.forward_ok as u8,
        rep.backward_ok as u8,
        rep.backward_asserted as u8,
        rep.counterexample_count,
        rep.holds() as u8
    )
}

fn cmd_verify(
    theorem: Theorem,
    common: &Common,
    eps: Option<i64>,
    lambda: Option<i64>,
    mu: Option<i64>,
) -> Result<Outcome, CliError> {
    let settings = Settings { budget: resolve_budget(common.budget)?, workers: 0 };
    let extra = json!({ "theorem": theorem, "eps": eps, "lambda": lambda, "mu": mu });
    if theorem == Theorem::Thm5Symbolic {
        let config = config_json("verify", common, None, extra);
        if common.dry_run {
            let pre = preset("thm5").expect("built-in");
            let v = json!({ "equation": pre.equation, "family": pre.family });
            return Ok(Outcome {
                body: match common.out {
                    OutFormat::Json => envelope(config, v),
                    _ => format!("equation: {}\nfamily: thm5\n", pre.equation),
                },
                holds: true,
            });
        }
        let rep = verify_thm5_symbolic()?;
        return Ok(render_report(common, config, rep));
    }

    let (ring, ring_echo) = load_ring(common.ring.as_deref())?;
    let config = config_json("verify", common, Some(&ring_echo), extra);
    let need = |v: Option<i64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")));
    let eps_e = match theorem {
        Theorem::Thm4 => Some(ring_integer(&ring, need(eps, "eps")?, "--eps")?),
        _ => None,
    };
    let lm = match theorem {
        Theorem::Alien => Some((
            ring_integer(&ring, need(lambda, "lambda")?, "--lambda")?,
            ring_integer(&ring, need(mu, "mu")?, "--mu")?,
        )),
        _ => None,
    };
    if common.dry_run {
        let p = theorem_plan(theorem, &ring, eps_e, lm, settings.budget)?;
        let body = match common.out {
            OutFormat::Json => envelope(config, p),
            _ => format!(
                "theorem: {:?}\nring: {} (size {})\ncandidate space: {}\n",
                theorem,
                ring.label(),
                ring.size(),
                p["candidate_space"]
            ),
        };
        return Ok(Outcome { body, holds: true });
    }
    let rep = match theorem {
        Theorem::Thm4 => verify_sofy(&ring, eps_e.expect("set above"), &settings)?,
        Theorem::Prop1 => verify_mp(&ring, &settings)?,
        Theorem::Pexider => verify_pexider(&ring, &settings)?,
        Theorem::Alien => {
            let (l, m) = lm.expect("set above");
            verify_alien(&ring, l, m, &settings)?
        }
        Theorem::Thm5Symbolic => unreachable!("handled above"),
    };
    Ok(render_report(common, config, rep))
}

fn render_report(common: &Common, config: Value, rep: TheoremReport) -> Outcome {
    let holds = rep.holds();
    let body = match common.out {
        OutFormat::Json => envelope(config, &rep),
        OutFormat::Csv => report_csv(&rep),
        OutFormat::Text => rep.render_text(),
    };
    Outcome { body, holds }
}

fn parse_table(ring: &Ring, s: &str) -> Result<(String, FnTable), CliError> {
    let (name, values) = split_assignment(s)?;
    let values: Vec<Elem> = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<Elem>()
                .ok()
                .filter(|&e| e < ring.size())
                .ok_or_else(|| CliError::Usage(format!("table {name}: {v:?} is not an element index")))
        })
        .collect::<Result<_, _>>()?;
    if values.len() != ring.domain_len() {
        return Err(CliError::Usage(format!(
            "table {name} has {} values, the domain has {}",
            values.len(),
            ring.domain_len()
        )));
    }
    Ok((name.to_string(), FnTable::new(values)))
}

fn cmd_classify(common: &Common, tables: &[String]) -> Result<Outcome, CliError> {
    reject_csv(common, "classify")?;
    let (ring, ring_echo) = load_ring(common.ring.as_deref())?;
    let parsed: BTreeMap<String, FnTable> =
        tables.iter().map(|t| parse_table(&ring, t)).collect::<Result<_, _>>()?;
    if parsed.is_empty() {
        return Err(CliError::Usage("give at least one --table".into()));
    }
    let echo: BTreeMap<&String, &Vec<Elem>> = parsed.iter().map(|(k, v)| (k, &v.values)).collect();
    let config = config_json("classify", common, Some(&ring_echo), json!({ "tables": echo }));
    if common.dry_run {
        let body = match common.out {
            OutFormat::Json => envelope(config, RingSummary::of(&ring)),
            _ => format!("ring: {} (size {})\ntables: {}\n", ring.label(), ring.size(), parsed.len()),
        };
        return Ok(Outcome { body, holds: true });
    }

    let classes: BTreeMap<&String, Vec<String>> = parsed
        .iter()
        .map(|(n, t)| (n, classify_map(&ring, t).iter().map(|c| c.to_string()).collect()))
        .collect();
    let mut holds = true;
    let family = match (parsed.get("f"), parsed.get("h"), parsed.get("k")) {
        (Some(f), Some(h), Some(k)) => Some(match classify_pexider(f, h, k, &ring) {
            Ok(tag) => json!({ "family": family_name(&tag), "tag": tag }),
            Err(e @ (PexiderError::Unclassifiable { .. } | PexiderError::ResidualNonzero { .. })) => {
                holds = false;
                let mut v = serde_json::to_value(&e).expect("errors serialize");
                v["message"] = Value::String(e.to_string());
                v
            }
            Err(e) => return Err(e.into()),
        }),
        _ => None,
    };
    let result = json!({ "ring": RingSummary::of(&ring), "classes": classes, "pexider": family });
    let body = match common.out {
        OutFormat::Json => envelope(config, result),
        _ => {
            let mut s = String::new();
            for (n, cs) in &classes {
                let _ = writeln!(s, "{n}: {}", cs.join(", "));
            }
            if let Some(f) = &result["pexider"].as_object() {
                let _ = writeln!(s, "pexider: {}", Value::Object((*f).clone()));
            }
            s
        }
    };
    Ok(Outcome { body, holds })
}

fn parse_rational(s: &str) -> Result<num::BigRational, CliError> {
    let bad = || CliError::Usage(format!("{s:?} is not a rational number"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: num::BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: num::BigInt = d.trim().parse().map_err(|_| bad())?;
    if d == num::BigInt::from(0) {
        return Err(bad());
    }
    Ok(num::BigRational::new(n, d))
}

fn cmd_symbolic(
    common: &Common,
    preset_name: Option<String>,
    family_path: Option<PathBuf>,
    eq: Option<String>,
    params: &[String],
    list: bool,
) -> Result<Outcome, CliError> {
    reject_csv(common, "symbolic")?;
    if list {
        let mut s = String::new();
        for p in presets() {
            let _ = writeln!(s, "{}: {}", p.name, p.equation);
        }
        return Ok(Outcome { body: s, holds: true });
    }
    let (name, family, ast): (String, SolutionFamily, EquationAst) = match family_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let fam: SolutionFamily =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid family: {e}")))?;
            let ast = parse_equation(eq.as_deref().expect("clap requires --eq"))?;
            (path.display().to_string(), fam, ast)
        }
        None => {
            let name = preset_name.unwrap_or_else(|| "thm5".into());
            let pre = preset(&name).ok_or_else(|| {
                let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
                CliError::Usage(format!("unknown preset {name:?}; known: {}", names.join(", ")))
            })?;
            let ast = match &eq {
                Some(e) => parse_equation(e)?,
                None => pre.ast(),
            };
            (name, pre.family, ast)
        }
    };
    let values: BTreeMap<String, num::BigRational> = params
        .iter()
        .map(|p| {
            let (k, v) = split_assignment(p)?;
            Ok((k.to_string(), parse_rational(v)?))
        })
        .collect::<Result<_, CliError>>()?;
    let echo: BTreeMap<&String, String> = values.iter().map(|(k, v)| (k, v.to_string())).collect();
    let config = config_json(
        "symbolic",
        common,
        None,
        json!({ "family": name, "equation": ast.to_string(), "params": echo }),
    );
    if common.dry_run {
        let body = match common.out {
            OutFormat::Json => envelope(config, json!({ "family": family })),
            _ => format!("family: {name}\nequation: {ast}\n"),
        };
        return Ok(Outcome { body, holds: true });
    }
    let (lhs, rhs) = family_substitute(&family, &ast)?;
    let constraints = render_constraints(&derive_constraints(&family, &ast)?);
    let identity = if values.is_empty() { None } else { Some(check_identity(&family, &ast, &values)?) };
    let holds = identity.unwrap_or(true);
    let body = match common.out {
        OutFormat::Json => envelope(
            config,
            json!({
                "lhs": lhs.to_string(),
                "rhs": rhs.to_string(),
                "constraints": constraints,
                "annotations": family.annotations,
                "identity": identity,
            }),
        ),
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "family: {name}");
            let _ = writeln!(s, "equation: {ast}");
            let _ = writeln!(s, "lhs: {lhs}");
            let _ = writeln!(s, "rhs: {rhs}");
            let _ = writeln!(s, "constraints: {}", constraints.len());
            for c in &constraints {
                let _ = writeln!(s, "  {c} = 0");
            }
            for a in &family.annotations {
                let _ = writeln!(s, "side condition: {a}");
            }
            if let Some(ok) = identity {
                let _ = writeln!(s, "identity: {}", if ok { "holds" } else { "fails" });
            }
            s
        }
    };
    Ok(Outcome { body, holds })
}

fn cmd_enumerate(common: &Common, class: &str) -> Result<Outcome, CliError> {
    let (ring, ring_echo) = load_ring(common.ring.as_deref())?;
    let class = parse_class(&ring, class)?;
    let budget = resolve_budget(common.budget)?;
    let config = config_json("enumerate", common, Some(&ring_echo), json!({ "class": class.to_string() }));
    if common.dry_run {
        let size = enumeration_size(&ring, class);
        let body = match common.out {
            OutFormat::Json => envelope(config, json!({ "candidates": size.to_string() })),
            _ => {
                format!("class: {class}\nring: {} (size {})\ncandidates: {size}\n", ring.label(), ring.size())
            }
        };
        return Ok(Outcome { body, holds: true });
    }
    let tables: Vec<FnTable> = enumerate_maps(&ring, class, budget)?.collect();
    let body = match common.out {
        OutFormat::Json => {
            let rows: Vec<&Vec<Elem>> = tables.iter().map(|t| &t.values).collect();
            envelope(config, json!({ "class": class.to_string(), "count": tables.len(), "tables": rows }))
        }
        OutFormat::Csv => {
            let header: Vec<String> = ring.domain().iter().map(|e| format!("f({e})")).collect();
            let mut s = header.join(",") + "\n";
            for t in &tables {
                let row: Vec<String> = t.values.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{}", row.join(","));
            }
            s
        }
        OutFormat::Text => {
            let mut s = format!("{class} maps on {}: {}\n", ring.label(), tables.len());
            for t in &tables {
                let _ = writeln!(s, "  {:?}", t.values);
            }
            s
        }
    };
    Ok(Outcome { body, holds: true })
}
