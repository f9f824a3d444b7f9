use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use stopgame_core::dynkin::{closed_loop, DynkinSpec, Tie};
use stopgame_core::instance::{self, Instance, BUILTIN_NAMES};
use stopgame_core::oracle::{all_dvalues, brute_game_values, enumerate_stopping_times, Caps};
use stopgame_core::refine::{abs_time_diff_study, w_process_study, RefineRow, DEFAULT_EXHAUSTIVE_LIMIT};
use stopgame_core::report::{self, CsvRow};
use stopgame_core::strategy::{check_nonanticipativity, half_switch_map, NonAnticipativity};
use stopgame_core::{fixtures, verify, Error, Payoff, Rational, Scalar, ValueFamilies};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_VERIFY: u8 = 4;

/// Stopper-vs-stopper stopping games on finite event trees.
#[derive(Debug, Parser)]
#[command(name = "stopgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Instance JSON file or built-in fixture name; repeat for several.
    #[arg(long, global = true)]
    instance: Vec<String>,

    /// Arithmetic mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,

    #[arg(long, global = true, default_value_t = Caps::default().stopping_times)]
    cap_stopping_times: usize,

    #[arg(long, global = true, default_value_t = Caps::default().maps)]
    cap_maps: usize,

    /// Seed for random built-in instances and the W-process study.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Value families, closed-loop and open-loop Dynkin values.
    Solve,
    /// Exhaustive game values over all non-anticipative maps.
    Oracle,
    /// Full invariant suite; exit code 4 on any failure.
    Verify,
    /// The three-point counterexample, end to end.
    Counterexample,
    /// Grid-refinement study.
    Refine {
        #[arg(long, value_enum, default_value_t = StudyPayoff::AbsTimeDiff)]
        payoff: StudyPayoff,
        /// Number of halvings; defaults to 3 for abs_time_diff and 2 for w_process.
        #[arg(long)]
        levels: Option<usize>,
        /// Enumerate maps only up to this many stopping times.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_LIMIT)]
        exhaustive_limit: usize,
    },
    /// Aggregate JSON reports of earlier runs.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum StudyPayoff {
    AbsTimeDiff,
    WProcess,
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

struct Outcome {
    result: Value,
    rows: Vec<CsvRow>,
    pass: bool,
}

impl Cli {
    fn caps(&self) -> Caps {
        Caps {
            stopping_times: self.cap_stopping_times,
            maps: self.cap_maps,
        }
    }

    fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Rational)
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::Verify => "verify",
            Command::Counterexample => "counterexample",
            Command::Refine { .. } => "refine",
            Command::Report { .. } => "report",
        }
    }
}

fn load_instance(spec: &str, seed: u64) -> Result<Instance> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Ok(instance::from_str(spec, &text)?);
    }
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(instance::builtin(spec, seed)?);
    }
    Err(Error::Parse(format!(
        "{spec:?} is neither a file nor a built-in fixture ({})",
        BUILTIN_NAMES.join(", ")
    ))
    .into())
}

fn solve_rows<S: Scalar>(name: &str, inst: &Instance, u: &Payoff<S>, caps: Caps) -> Vec<CsvRow> {
    let space = &inst.space;
    let fam = ValueFamilies::compute(space, u);
    let mut rows = Vec::new();
    for f in [&fam.v1, &fam.v1_strict, &fam.v2, &fam.v2_strict] {
        for (n, v) in f.values.iter().enumerate() {
            rows.push(CsvRow::new(name, format!("{}[{n}]", f.label()), v, ""));
        }
    }
    for strict_lower in [false, true] {
        for strict_upper in [false, true] {
            for tie in [Tie::Low, Tie::High] {
                let spec = DynkinSpec::new(fam.lower(strict_lower), fam.upper(strict_upper), tie);
                if let Ok(sol) = closed_loop(space, &spec) {
                    let tie = if tie == Tie::Low { "low" } else { "high" };
                    let quantity = format!("closed_loop({},{},{tie})", spec.lower.label(), spec.upper.label());
                    rows.push(CsvRow::new(name, quantity, &sol.root_value, ""));
                }
            }
        }
    }
    if let Ok(set) = enumerate_stopping_times(space, caps.stopping_times) {
        for d in all_dvalues(space, &set, &fam) {
            rows.push(CsvRow::new(name, d.name(), &d.value, format!("st:{}", d.optimizer)));
        }
    }
    rows
}

fn run_instance<S: Scalar>(cli: &Cli, inst: &Instance, u: &Payoff<S>) -> Result<Outcome> {
    let (space, caps, name) = (&inst.space, cli.caps(), inst.name.as_str());
    Ok(match cli.command {
        Command::Solve => Outcome {
            result: report::solve(space, u, caps),
            rows: solve_rows(name, inst, u, caps),
            pass: true,
        },
        Command::Oracle => {
            let g = brute_game_values(space, u, caps)?;
            Outcome {
                result: report::game_values(&g),
                rows: report::game_value_rows(name, &g),
                pass: true,
            }
        }
        Command::Verify => {
            let v = verify(space, u, caps)?;
            let mut rows = report::sandwich_rows(name, &v.sandwich);
            for c in &v.checks {
                rows.push(CsvRow::new(name, format!("check:{}", c.id), &S::from_i64(c.pass as i64), ""));
            }
            Outcome {
                result: report::verification(&v),
                rows,
                pass: v.all_pass(),
            }
        }
        _ => unreachable!("per-instance commands only"),
    })
}

fn per_instance(cli: &Cli) -> Result<Vec<(String, Outcome)>> {
    if cli.instance.is_empty() {
        bail!(Usage(format!("{} needs at least one --instance", cli.command_name())));
    }
    let instances = cli
        .instance
        .iter()
        .map(|spec| load_instance(spec, cli.seed))
        .collect::<Result<Vec<_>>>()?;
    instances
        .par_iter()
        .map(|inst| {
            let outcome = match cli.mode() {
                Mode::Rational => run_instance(cli, inst, &inst.payoff),
                Mode::Float => run_instance(cli, inst, &inst.payoff.to_float()),
            };
            outcome.map(|o| (inst.name.clone(), o)).with_context(|| format!("instance {}", inst.name))
        })
        .collect()
}

fn counterexample<S: Scalar>() -> Result<Outcome> {
    let space = fixtures::cex();
    let u: Payoff<S> = fixtures::cex_payoff().convert(S::from_rational);
    let g = brute_game_values(&space, &u, Caps::default())?;
    let expected = [1, 0, 0, 1].map(S::from_i64);
    let got = [&g.a_upper, &g.a_lower, &g.b_upper, &g.b_lower];
    let pass = got.iter().zip(&expected).all(|(a, b)| a.approx_eq(b));
    let set = enumerate_stopping_times(&space, Caps::default().stopping_times)?;
    let switch = half_switch_map(&space, &set)?.to_table(&space, &set)?;
    let type_i = check_nonanticipativity(&space, &set, &switch, NonAnticipativity::TypeI)?;
    let type_ii = check_nonanticipativity(&space, &set, &switch, NonAnticipativity::TypeII)?;
    Ok(Outcome {
        result: json!({
            "game_values": report::game_values(&g),
            "expected": {"A_upper": "1", "A_lower": "0", "B_upper": "0", "B_lower": "1"},
            "matches": pass,
            "half_switch_map": {
                "table": switch,
                "type_i": type_i.as_ref().map(|c| json!({"violation": c.to_string(), "detail": c})),
                "type_ii": type_ii.is_none(),
            },
        }),
        rows: report::game_value_rows("cex", &g),
        pass: pass && type_ii.is_none(),
    })
}

fn to_float(rows: Vec<RefineRow<Rational>>) -> Vec<RefineRow<f64>> {
    let f = |x: &Rational| f64::from_rational(x);
    rows.into_iter()
        .map(|r| RefineRow {
            level: r.level,
            steps: r.steps,
            delta: f(&r.delta),
            game: r.game.map(|g| g.each_ref().map(f)),
            dvalues: r.dvalues.iter().map(|(n, v)| (n.clone(), f(v))).collect(),
            dvalue_spread: f(&r.dvalue_spread),
            spread: f(&r.spread),
        })
        .collect()
}

fn refine_outcome<S: Scalar>(name: &str, rows: &[RefineRow<S>]) -> Outcome {
    Outcome {
        result: report::refine_rows(rows),
        rows: report::refine_csv_rows(name, rows),
        pass: true,
    }
}

fn refine(cli: &Cli, payoff: StudyPayoff, levels: Option<usize>, exhaustive_limit: usize) -> Result<(String, Outcome)> {
    match payoff {
        StudyPayoff::AbsTimeDiff => {
            let rows = abs_time_diff_study(levels.unwrap_or(3), cli.caps(), exhaustive_limit)?;
            let name = "abs_time_diff".to_string();
            Ok(match cli.mode() {
                Mode::Rational => (name.clone(), refine_outcome(&name, &rows)),
                Mode::Float => (name.clone(), refine_outcome(&name, &to_float(rows))),
            })
        }
        StudyPayoff::WProcess => {
            if cli.mode == Some(Mode::Rational) {
                bail!(Usage("the w_process study runs in float mode".into()));
            }
            let depths: Vec<usize> = (1..=levels.unwrap_or(2)).map(|l| 1 << l).collect();
            let rows = w_process_study(cli.seed, &depths, cli.caps())?;
            let name = format!("w_process/seed{}", cli.seed);
            Ok((name.clone(), refine_outcome(&name, &rows)))
        }
    }
}

fn aggregate(inputs: &[PathBuf]) -> Result<Outcome> {
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let command = doc["command"]
            .as_str()
            .ok_or_else(|| Error::Parse(format!("{}: not a stopgame JSON report", path.display())))?;
        let part: Vec<CsvRow> = serde_json::from_value::<Vec<Value>>(doc["rows"].clone())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            .into_iter()
            .map(|r| CsvRow {
                instance: r["instance"].as_str().unwrap_or_default().into(),
                quantity: r["quantity"].as_str().unwrap_or_default().into(),
                value_num: r["value_num"].as_str().unwrap_or_default().into(),
                value_den: r["value_den"].as_str().unwrap_or_default().into(),
                mode: if r["mode"] == "float" { "float" } else { "rational" },
                witness_id: r["witness_id"].as_str().unwrap_or_default().into(),
            })
            .collect();
        runs.push(json!({
            "source": path.display().to_string(),
            "command": command,
            "mode": doc["mode"],
            "seed": doc["seed"],
            "status": doc["status"],
            "instances": doc["instances"].as_array().map(|a| a.iter().map(|i| i["name"].clone()).collect::<Vec<_>>()),
            "rows": part.len(),
        }));
        rows.extend(part);
    }
    let failed: Vec<&Value> = runs.iter().filter(|r| r["status"] == "FAIL").map(|r| &r["source"]).collect();
    Ok(Outcome {
        result: json!({"runs": runs, "failed_runs": failed}),
        rows,
        pass: true,
    })
}

fn render(cli: &Cli, results: &[(String, Outcome)]) -> Result<Vec<u8>> {
    match cli.format {
        Format::Json => {
            let pass = results.iter().all(|(_, o)| o.pass);
            let rows: Vec<&CsvRow> = results.iter().flat_map(|(_, o)| &o.rows).collect();
            let doc = json!({
                "command": cli.command_name(),
                "mode": match cli.command {
                    Command::Refine { payoff: StudyPayoff::WProcess, .. } => "float",
                    _ if cli.mode() == Mode::Float => "float",
                    _ => "rational",
                },
                "seed": cli.seed,
                "caps": {"stopping_times": cli.cap_stopping_times, "maps": cli.cap_maps},
                "status": if pass { "PASS" } else { "FAIL" },
                "instances": results.iter().map(|(name, o)| json!({"name": name, "result": o.result})).collect::<Vec<_>>(),
                "rows": rows,
            });
            let mut out = serde_json::to_vec_pretty(&doc)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for (_, o) in results {
                for row in &o.rows {
                    w.serialize(row)?;
                }
            }
            if results.iter().all(|(_, o)| o.rows.is_empty()) {
                w.write_record(["instance", "quantity", "value_num", "value_den", "mode", "witness_id"])?;
            }
            Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let results = match &cli.command {
        Command::Solve | Command::Oracle | Command::Verify => per_instance(cli)?,
        Command::Counterexample => vec![(
            "cex".to_string(),
            match cli.mode() {
                Mode::Rational => counterexample::<Rational>()?,
                Mode::Float => counterexample::<f64>()?,
            },
        )],
        Command::Refine {
            payoff,
            levels,
            exhaustive_limit,
        } => vec![refine(cli, *payoff, *levels, *exhaustive_limit)?],
        Command::Report { inputs } => vec![("report".to_string(), aggregate(inputs)?)],
    };
    let bytes = render(cli, &results)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            for (name, o) in &results {
                println!("{} {name}: {}", cli.command_name(), if o.pass { "PASS" } else { "FAIL" });
            }
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(results.iter().all(|(_, o)| o.pass))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            e if e.is_capacity() => EXIT_CAPACITY,
            e if e.is_data() => EXIT_DATA,
            Error::Lipschitz(_) => EXIT_DATA,
            _ => EXIT_VERIFY,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<csv::Error>().is_some() {
        return EXIT_DATA;
    }
    EXIT_USAGE
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var("STOPGAME_THREADS") {
        let n: usize = value
            .parse()
            .map_err(|_| Usage(format!("STOPGAME_THREADS must be a positive integer, got {value:?}")))?;
        if n == 0 {
            bail!(Usage("STOPGAME_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
