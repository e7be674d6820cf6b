//! `agdmm` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 scheme build
//! error, 3 runtime error (I/O, decoding, too few survivors, failed selftest).

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use agdmm::acceptance::{run_criterion, Status};
use agdmm::rr::semigroup;
use agdmm::schemes::{cost_report, verify_conditions, SchemeSpec};
use agdmm::sim::{
    compare_prior, run_round, threshold_sweep, write_compare_csv, write_sweep_csv, RunRecord,
    StragglerModel, SUBSET_CAP,
};
use agdmm::{CurveModel, Matrix, SchemeInstance};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;

const CURVES: [&str; 9] = [
    "rational:q=5",
    "rational:q=11",
    "rational:q=16",
    "elliptic:q=5,a=1,b=1",
    "elliptic:q=7,a=1,b=3",
    "elliptic:q=13,a=2,b=5",
    "hermitian:u=2",
    "hermitian:u=3",
    "hermitian:u=4",
];

#[derive(Parser)]
#[command(
    name = "agdmm",
    version,
    about = "Coded distributed matrix multiplication over algebraic curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Scheme specification, e.g. `kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4;p=2;N=6;seed=7`.
    #[arg(long)]
    spec: Option<String>,
    /// Experiment file of key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Round seed (straggler draws and sweep sampling).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// List the supported curves with genus, rational places and semigroup data.
    Curves,
    /// Build a scheme and print its parameters, condition report and costs.
    Build {
        #[command(flatten)]
        common: Common,
        /// Print a config file that rebuilds this instance instead of the summary.
        #[arg(long)]
        emit_config: bool,
    },
    /// Run one straggler round and report the result.
    Run {
        #[command(flatten)]
        common: Common,
        /// Straggler model: `adversarial:i,j`, `random:count@seed` or `delay:shift,rate@seed`.
        #[arg(long)]
        model: Option<String>,
        /// Seed for random inputs when no matrix files are given.
        #[arg(long)]
        input_seed: Option<u64>,
        /// Matrix files in the `q rows cols` text format.
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Decoding success rate over worker subsets of every size from K to N.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sampled subsets per size when exhaustive enumeration is too large.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        input_seed: Option<u64>,
    },
    /// Threshold comparison against earlier constructions.
    Compare {
        /// Curve specification.
        #[arg(long)]
        curve: String,
        /// Inclusive range of p, as `lo..hi` or a single value.
        #[arg(long, default_value = "1..4")]
        p: String,
        /// Comma separated `m x n` pairs, e.g. `2x2,2x3`.
        #[arg(long, default_value = "2x2")]
        mn: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the acceptance checks.
    Selftest {
        /// Also fail on criteria whose parameters are contradictory.
        #[arg(long)]
        strict: bool,
    },
}

enum Failure {
    Usage(String),
    Build(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Build(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Build(m) | Failure::Runtime(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))
        }
        None => io::stdout().write_all(bytes).map_err(runtime),
    }
}

/// Config file merged with command-line overrides.
fn resolve(common: &Common, extra: ExperimentConfig) -> Result<ExperimentConfig, Failure> {
    let base = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    let cli = ExperimentConfig {
        spec: common.spec.clone(),
        seed: common.seed,
        out: common.out.clone(),
        ..extra
    };
    Ok(base.overridden_by(cli))
}

fn build_from(cfg: &ExperimentConfig) -> Result<SchemeInstance, Failure> {
    let text = cfg
        .spec
        .as_deref()
        .ok_or_else(|| Failure::Usage("a scheme spec is required (--spec or spec=)".into()))?;
    let spec: SchemeSpec = text.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
    spec.build()
        .map_err(|e| Failure::Build(format!("build failed: {e}")))
}

fn inputs(inst: &SchemeInstance, cfg: &ExperimentConfig) -> Result<(Matrix, Matrix), Failure> {
    match (&cfg.a, &cfg.b) {
        (Some(pa), Some(pb)) => {
            let field = inst.curve().field();
            let read = |p: &PathBuf| -> Result<Matrix, Failure> {
                let text =
                    fs::read_to_string(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
                Matrix::parse_text(field, &text)
                    .map_err(|e| runtime(format!("{}: {e}", p.display())))
            };
            Ok((read(pa)?, read(pb)?))
        }
        (None, None) => Ok(agdmm::schemes::random_inputs(
            inst,
            cfg.input_seed.unwrap_or(0),
        )),
        _ => Err(Failure::Usage("give both matrix files or neither".into())),
    }
}

fn cmd_curves() -> Outcome {
    let mut out = String::from("curve\tq\tg\tplaces\tsemigroup\tconductor\tgaps\n");
    for spec in CURVES {
        let c = CurveModel::parse(spec).map_err(runtime)?;
        let sg = semigroup(&c);
        let gens: Vec<String> = sg.generators.iter().map(u32::to_string).collect();
        let gaps: Vec<String> = sg.gaps.iter().map(u32::to_string).collect();
        out.push_str(&format!(
            "{spec}\t{}\t{}\t{}\t<{}>\t{}\t{{{}}}\n",
            c.field().order(),
            c.genus(),
            c.rational_places().len(),
            gens.join(","),
            sg.conductor,
            gaps.join(",")
        ));
    }
    emit(&None, out.as_bytes())
}

fn cmd_build(common: &Common, emit_config: bool) -> Outcome {
    let cfg = resolve(common, ExperimentConfig::default())?;
    let inst = build_from(&cfg)?;
    if emit_config {
        let text = format!(
            "# rebuilds {}\n{}",
            inst.summary(),
            ExperimentConfig {
                spec: Some(inst.spec().to_string()),
                out: None,
                ..cfg.clone()
            }
            .to_text()
        );
        return emit(&cfg.out, text.as_bytes());
    }
    let report = verify_conditions(&inst);
    let cost = cost_report(&inst);
    let mut s = String::new();
    s.push_str(&format!("{}\n", inst.spec()));
    s.push_str(&format!(
        "R={} K={} N={}\n",
        inst.threshold(),
        inst.dimension(),
        inst.workers()
    ));
    s.push_str(&format!(
        "genus={} G={}\n",
        inst.curve().genus(),
        inst.ambient_divisor()
    ));
    if let Some(d) = inst.nonspecial_divisor() {
        s.push_str(&format!("D={d}\n"));
    }
    if let Some(q) = inst.auxiliary_place() {
        s.push_str(&format!("Q={q}\n"));
    }
    s.push_str(&format!("orientation={:?}\n", inst.orientation()));
    let places: Vec<String> = inst.eval_places().iter().map(ToString::to_string).collect();
    s.push_str(&format!("places={}\n", places.join(" ")));
    s.push_str(&format!(
        "conditions: {} checks, {}\n",
        report.checks,
        if report.passed() {
            "all hold".to_string()
        } else {
            format!("violations {:?}", report.violations)
        }
    ));
    s.push_str(&format!(
        "cost: upload={} download={} worker_multiplies={} decode_ops={}\n",
        cost.upload, cost.download, cost.worker_multiplies, cost.decode_ops
    ));
    emit(&cfg.out, s.as_bytes())
}

fn record_csv(rec: &RunRecord) -> String {
    let survivors: Vec<String> = rec.survivors.iter().map(usize::to_string).collect();
    format!(
        "scheme,seed,survivors,decode_status,decoded_equals_oracle,upload,download,worker_multiplies,decode_ops,makespan\n\
         \"{}\",{},{},\"{}\",{},{},{},{},{},{}\n",
        rec.scheme,
        rec.seed,
        survivors.join(" "),
        rec.decode_status.replace('"', "'"),
        rec.decoded_equals_oracle,
        rec.cost.upload,
        rec.cost.download,
        rec.cost.worker_multiplies,
        rec.cost.decode_ops,
        rec.makespan
    )
}

fn cmd_run(common: &Common, extra: ExperimentConfig) -> Outcome {
    let cfg = resolve(common, extra)?;
    let inst = build_from(&cfg)?;
    let model = StragglerModel::parse(cfg.model.as_deref().unwrap_or("none"))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (a, b) = inputs(&inst, &cfg)?;
    let rec = run_round(&inst, &a, &b, &model, cfg.seed.unwrap_or(0)).map_err(runtime)?;
    let body = match common.format.unwrap_or(Format::Json) {
        Format::Json => rec.to_json().map_err(runtime)? + "\n",
        Format::Csv => record_csv(&rec),
    };
    emit(&cfg.out, body.as_bytes())?;
    if !rec.decoded_equals_oracle {
        return Err(runtime(format!("decode failed: {}", rec.decode_status)));
    }
    Ok(())
}

fn cmd_sweep(common: &Common, extra: ExperimentConfig) -> Outcome {
    let cfg = resolve(common, extra)?;
    let inst = build_from(&cfg)?;
    let (a, b) = inputs(&inst, &cfg)?;
    let trials = cfg.trials.unwrap_or(SUBSET_CAP as usize);
    let rows = threshold_sweep(&inst, &a, &b, trials, cfg.seed.unwrap_or(0)).map_err(runtime)?;
    let body = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf).map_err(runtime)?;
            buf
        }
        Format::Json => (serde_json::to_string_pretty(&rows).map_err(runtime)? + "\n").into_bytes(),
    };
    emit(&cfg.out, &body)
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let bad = || Failure::Usage(format!("bad range {text:?}; use lo..hi or a number"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?,
        ),
        None => {
            let v = text.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let bad = || Failure::Usage(format!("bad pair {s:?}; use MxN"));
            let (m, n) = s.trim().split_once('x').ok_or_else(bad)?;
            let (m, n): (usize, usize) =
                (m.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?);
            if m == 0 || n == 0 {
                return Err(bad());
            }
            Ok((m, n))
        })
        .collect()
}

fn cmd_compare(
    curve: &str,
    p: &str,
    mn: &str,
    out: &Option<PathBuf>,
    format: Option<Format>,
) -> Outcome {
    let c = CurveModel::parse(curve).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = compare_prior(&c, parse_range(p)?, &parse_pairs(mn)?);
    let body = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_compare_csv(&rows, &mut buf).map_err(runtime)?;
            buf
        }
        Format::Json => (serde_json::to_string_pretty(&rows).map_err(runtime)? + "\n").into_bytes(),
    };
    emit(out, &body)
}

fn cmd_selftest(strict: bool) -> Outcome {
    let mut failed = Vec::new();
    let mut stdout = io::stdout().lock();
    for id in 1..=12 {
        let r = run_criterion(id);
        writeln!(stdout, "{r}").map_err(runtime)?;
        if r.status == Status::Fail || (strict && !r.passed()) {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(runtime(format!("criteria failed: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Curves => cmd_curves(),
        Command::Build {
            common,
            emit_config,
        } => cmd_build(&common, emit_config),
        Command::Run {
            common,
            model,
            input_seed,
            a,
            b,
        } => cmd_run(
            &common,
            ExperimentConfig {
                model,
                input_seed,
                a,
                b,
                ..Default::default()
            },
        ),
        Command::Sweep {
            common,
            trials,
            input_seed,
        } => cmd_sweep(
            &common,
            ExperimentConfig {
                trials,
                input_seed,
                ..Default::default()
            },
        ),
        Command::Compare {
            curve,
            p,
            mn,
            out,
            format,
        } => cmd_compare(&curve, &p, &mn, &out, format),
        Command::Selftest { strict } => cmd_selftest(strict),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("agdmm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
