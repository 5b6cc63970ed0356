//! `iml`: command line for the invariant metric laboratory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use iml_core::driver::{
    execute_with_threads, exit_code, threads_from_env, CurveKind, ExperimentConfig, Format, LengthMode, Method,
    Operation,
};
use iml_core::{DomainDescriptor, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "iml", version, about = "Invariant metrics on domains in C^n: bounds, oracles and checks")]
struct Cli {
    /// TOML config; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_defaults: bool,
    /// Shorthand (unit-disc, polydisc, ball, max-geo, geo-mean, example3) or an
    /// inline table such as '{ kind = "balanced", h = "max-geo", c = 2.0 }'.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Base point, comma separated complex coordinates (e.g. 0.1,0.2i).
    #[arg(long, global = true, allow_hyphen_values = true)]
    z: Option<String>,
    /// Tangent vector.
    #[arg(long = "X", global = true, allow_hyphen_values = true)]
    x: Option<String>,
    /// Second point.
    #[arg(long, global = true, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Oracle,
    Search,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Check {
    Prop2,
    Theorem1,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CurveArg {
    Gamma,
    Segment,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Distance,
    Metric,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kobayashi-Royden metric at (z, X).
    Metric,
    /// Lempert function between z and w.
    Lempert,
    /// m-th Kobayashi metric ladder at (z, X), or the m-th Lempert ladder when w is given.
    Higher,
    /// Gauge, convex-hull gauge and Kobayashi-Buseman metric at the origin of a balanced domain.
    Hull,
    /// Difference-quotient trace of the m-th Lempert function at (z, X).
    Derivative,
    /// Randomized verification suites.
    Verify {
        #[arg(value_enum)]
        check: Check,
        /// Random inputs per domain and m.
        #[arg(long)]
        directions: Option<usize>,
    },
    /// Chain bound along the test curve of the example domain.
    Example3 {
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long = "J")]
        j: Option<usize>,
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Singular-set first coordinates of the example domain.
    Example3Dump {
        #[arg(long = "J")]
        j: Option<usize>,
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Length of the test curve or of the segment z to w.
    CurveLength {
        #[arg(long, value_enum)]
        curve: Option<CurveArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

fn apply(cli: &Cli, cfg: &mut ExperimentConfig) -> Result<Option<Operation>> {
    if let Some(d) = &cli.domain {
        cfg.domain = d.parse::<DomainDescriptor>()?;
        cfg.verify.prop2_domains = vec![d.clone()];
        cfg.verify.theorem1_domains = vec![d.clone()];
    }
    for (dst, src) in [(&mut cfg.z, &cli.z), (&mut cfg.x, &cli.x), (&mut cfg.w, &cli.w)] {
        if src.is_some() {
            *dst = src.clone();
        }
    }
    if let Some(m) = cli.m {
        cfg.m = m;
        cfg.verify.m = vec![m];
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(m) = cli.method {
        cfg.method = match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Oracle => Method::Oracle,
            MethodArg::Search => Method::Search,
        };
    }
    let op = match &cli.command {
        None => cfg.operation,
        Some(Command::Metric) => Some(Operation::Metric),
        Some(Command::Lempert) => Some(Operation::Lempert),
        Some(Command::Higher) => Some(Operation::Higher),
        Some(Command::Hull) => Some(Operation::Hull),
        Some(Command::Derivative) => Some(Operation::Derivative),
        Some(Command::Verify { check, directions }) => {
            if let Some(d) = directions {
                cfg.verify.directions = *d;
            }
            Some(match check {
                Check::Prop2 => Operation::VerifyProp2,
                Check::Theorem1 => Operation::VerifyTheorem1,
                Check::All => Operation::VerifyAll,
            })
        }
        Some(Command::Example3 { t0, t1, j, k }) => {
            let e = &mut cfg.example3;
            e.t0 = t0.unwrap_or(e.t0);
            e.t1 = t1.unwrap_or(e.t1);
            e.j_terms = j.unwrap_or(e.j_terms);
            e.k_terms = k.unwrap_or(e.k_terms);
            Some(Operation::Example3)
        }
        Some(Command::Example3Dump { j, k }) => {
            let e = &mut cfg.example3;
            e.j_terms = j.unwrap_or(e.j_terms);
            e.k_terms = k.unwrap_or(e.k_terms);
            Some(Operation::Example3Dump)
        }
        Some(Command::CurveLength { curve, mode }) => {
            if let Some(c) = curve {
                cfg.curve.curve = match c {
                    CurveArg::Gamma => CurveKind::Gamma,
                    CurveArg::Segment => CurveKind::Segment,
                };
            }
            if let Some(m) = mode {
                cfg.curve.mode = match m {
                    ModeArg::Distance => LengthMode::Distance,
                    ModeArg::Metric => LengthMode::Metric,
                    ModeArg::Both => LengthMode::Both,
                };
            }
            Some(Operation::CurveLength)
        }
    };
    if op.is_some() {
        cfg.operation = op;
    }
    Ok(op)
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let op = apply(&cli, &mut cfg)?;
    if cli.print_defaults {
        print!("{}", cfg.to_toml());
        return Ok(0);
    }
    let op = op.ok_or_else(|| Error::Parse("no operation given; see --help".into()))?;
    let report = execute_with_threads(op, &cfg, threads_from_env()?)?;
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    if let Some(false) = report.passed {
        let failed = report.column("pass").map_or(0, |c| {
            report.rows.iter().filter(|r| matches!(r[c], iml_core::driver::Cell::Bool(false))).count()
        });
        eprintln!("{failed} of {} checks failed", report.rows.len());
    }
    Ok(report.exit_status())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
