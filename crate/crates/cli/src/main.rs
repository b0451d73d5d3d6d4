use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use circlelab::exponent::{derive_section, Section};
use circlelab::harness::{self, PlotSpec};
use circlelab::{chain, fourier, lattice, Error, Rational};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "circlelab",
    version,
    about = "Lattice points in the circle: counts, sums and exponents"
)]
struct Cli {
    /// Output format; `csv` applies to `sweep` only.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Plain `key = value` file; command-line flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// P(t) and P(t) - pi t.
    Count {
        #[arg(long)]
        t: u64,
    },
    /// The octant saw-tooth sum, optionally with its truncated Fourier series.
    Psi {
        #[arg(long)]
        t: u64,
        /// Truncation point of the Fourier series.
        #[arg(long = "big-r")]
        big_r: Option<u64>,
    },
    /// Log-spaced sweep over t.
    Sweep {
        #[arg(long)]
        t_min: Option<u64>,
        #[arg(long)]
        t_max: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        /// Worker threads (defaults to CIRCLELAB_JOBS, then the core count).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// The exponential sum at (r, t) in every representation.
    Expsum {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        t: u64,
        #[arg(long = "order", short = 'N')]
        order: Option<usize>,
        /// Skip the oscillatory-integral side.
        #[arg(long)]
        no_poisson: bool,
    },
    /// Scripted exponent derivation with its audit trail.
    Exponents {
        /// 3, 4a, 4b, 5, 6 or 6-whatif.
        #[arg(long)]
        section: String,
        /// Sum exponent fed to section 5, as p/q.
        #[arg(long)]
        beta: Option<String>,
    },
    /// Least-squares line through two CSV columns.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long, default_value = "delta")]
        y: String,
        /// Fit ln x and ln |y|.
        #[arg(long)]
        loglog: bool,
    },
    /// SVG scatter plot of two CSV columns.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long, default_value = "delta")]
        y: String,
        #[arg(long)]
        loglog: bool,
        #[arg(long)]
        title: Option<String>,
    },
}

struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, Error> {
        let file = match path {
            Some(p) => harness::read_config(p)?,
            None => BTreeMap::new(),
        };
        Ok(Settings { file })
    }

    fn pick<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Data(format!("config value for '{key}' is not valid: {raw}"))),
            None => Ok(default),
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let settings = Settings::load(cli.config.as_ref())?;
    match &cli.command {
        Command::Count { t } => Ok(Output::Json(to_json(&lattice::count_lattice_points(*t)?))),
        Command::Psi { t, big_r } => {
            let s = lattice::psi_sum(*t)?;
            let mut v = to_json(&s);
            if let Some(big_r) = big_r {
                let f = fourier::truncated_fourier_sum(*t, *big_r)?;
                v["big_r"] = json!(big_r);
                v["fourier"] = json!(f);
                v["fourier_gap"] = json!((s.sum - f).abs());
            }
            Ok(Output::Json(v))
        }
        Command::Sweep {
            t_min,
            t_max,
            points,
            jobs,
        } => {
            let t_min = settings.pick(*t_min, "t-min", 1000)?;
            let t_max = settings.pick(*t_max, "t-max", 1_000_000)?;
            let points = settings.pick(*points, "points", 10)?;
            let jobs = settings.pick(*jobs, "jobs", harness::default_jobs())?;
            let rows = harness::sweep(t_min, t_max, points, jobs)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    harness::write_sweep_csv(&mut buf, &rows)?;
                    Ok(Output::Text(
                        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))?,
                    ))
                }
                Format::Json => Ok(Output::Json(to_json(&rows))),
            }
        }
        Command::Expsum {
            r,
            t,
            order,
            no_poisson,
        } => {
            let order = settings.pick(*order, "order", chain::DEFAULT_ORDER)?;
            let res = chain::chain_residuals(*r, *t, order, !no_poisson)?;
            Ok(Output::Json(to_json(&res)))
        }
        Command::Exponents { section, beta } => {
            let mut s: Section = section.parse()?;
            if let Some(b) = beta {
                let b: Rational = b.parse().map_err(|_| {
                    Error::Precondition(format!("beta '{b}' is not a fraction p/q"))
                })?;
                match s {
                    Section::Five(_) => s = Section::Five(b),
                    _ => {
                        return Err(Error::Precondition(
                            "--beta only applies to section 5".into(),
                        ))
                    }
                }
            }
            Ok(Output::Json(derive_section(s)?.to_json()))
        }
        Command::Fit { csv, x, y, loglog } => {
            let f = harness::fit_csv(csv, x, y, *loglog, *loglog)?;
            Ok(Output::Json(to_json(&f)))
        }
        Command::Plot {
            csv,
            x,
            y,
            loglog,
            title,
        } => {
            let mut spec = PlotSpec::new(x, y);
            if *loglog {
                spec = spec.log_log();
            }
            if let Some(t) = title {
                spec.title = t.clone();
            }
            Ok(Output::Text(harness::plot_csv(csv, &spec)?))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut h = std::io::stdout().lock();
            h.write_all(text.as_bytes())?;
            h.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| {
        let text = match o {
            Output::Json(v) => serde_json::to_string_pretty(&v).expect("json") + "\n",
            Output::Text(s) => s,
        };
        emit(cli.out.as_ref(), &text)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let obj = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            println!("{}", serde_json::to_string(&obj).expect("json"));
            ExitCode::FAILURE
        }
    }
}
