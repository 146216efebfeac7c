//! Argument parsing and command dispatch for the `cutlab` binary.
//!
//! Every command reads its potential from a JSON config, runs one
//! computation and writes a single report: JSON for scalar results, CSV for
//! grids and sweeps.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use cutlab_core::critical::{curvature_c, detect_singular_with, scaling_J};
use cutlab_core::equilibrium::{solve_with, SolveOptions};
use cutlab_core::experiments::{
    best_single_index, compare_to_gue, convergence_sweep, expected_count, gue_grid, lambda_fit,
    rescaled_kernel_with, KernelOptions,
};
use cutlab_core::gue::{psi_asymptotic_coefficients, psi_matrix};
use cutlab_core::make_scaling;
use cutlab_core::report::{fmt_f64, Csv, Json};
use cutlab_core::{Error, GridSpec, Potential, PotentialConfig};
use num_complex::Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_GRID: &str = "-3,3,0.25";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Eqm,
    Detect,
    Kernel,
    Gue,
    Psi,
    Compare,
    Sweep,
    LambdaFit,
    Count,
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "cutlab",
    version,
    about = "Equilibrium measures, singular exterior points and GUE kernel comparisons",
    disable_help_subcommand = true
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// JSON potential config, {"type":"poly","coeffs":[...]} or {"type":"eynard","e":...}
    #[arg(long, value_name = "PATH")]
    pub potential: Option<PathBuf>,

    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,

    #[arg(long, default_value_t = 1.0)]
    pub t: f64,

    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,

    /// GUE index; defaults depend on the command
    #[arg(long)]
    pub k: Option<usize>,

    /// Half-width of the count window around x*
    #[arg(long)]
    pub delta: Option<f64>,

    #[arg(long, value_name = "MIN,MAX,STEP", allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,

    #[arg(long, value_name = "N1,N2,...", value_delimiter = ',')]
    pub n_list: Vec<usize>,

    #[arg(long, value_name = "S1,S2,...", value_delimiter = ',', allow_hyphen_values = true)]
    pub s_list: Vec<f64>,

    /// Quadrature override (equilibrium nodes)
    #[arg(long)]
    pub nodes: Option<usize>,

    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Center the kernel rescaling at x*_(n,t) instead of x*
    #[arg(long)]
    pub center_nt: bool,

    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse_zeta)]
    pub zeta: Option<Complex64>,
}

fn parse_grid(text: &str) -> Result<GridSpec, String> {
    GridSpec::parse(text).map_err(|e| e.to_string())
}

fn parse_zeta(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts[..] {
        [re, im] => match (re.trim().parse(), im.trim().parse()) {
            (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
            _ => Err(format!("zeta must be RE,IM, got {text:?}")),
        },
        _ => Err(format!("zeta must be RE,IM, got {text:?}")),
    }
}

/// Outcome of argument parsing that does not yield a config.
#[derive(Debug)]
pub enum ParseOutcome {
    /// --help or --version: print to stdout and exit 0.
    Info(String),
    /// Bad arguments: usage text for stderr.
    Usage(String),
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("cutlab"))
        .chain(argv.into_iter().map(Into::into));
    RunConfig::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let text = e.render().to_string();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ParseOutcome::Info(text),
            _ => {
                let usage = <RunConfig as clap::CommandFactory>::command().render_usage();
                ParseOutcome::Usage(format!("{}\n{usage}\n", text.trim_end()))
            }
        }
    })
}

/// Single-line error record for standard error.
pub fn error_json(kind: &str, message: &str) -> String {
    Json::object()
        .str("error", kind)
        .str("message", message)
        .build()
        .render()
}

/// The report text a command produces.
pub fn execute(cfg: &RunConfig) -> Result<String, Error> {
    let opts = SolveOptions {
        nodes: cfg.nodes.unwrap_or(SolveOptions::default().nodes),
    };
    let grid = || -> Result<GridSpec, Error> {
        cfg.grid.map_or_else(|| GridSpec::parse(DEFAULT_GRID), Ok)
    };
    match cfg.command {
        Command::Eqm => {
            let v = load_potential(cfg)?;
            Ok(line(solve_with(&v, cfg.t, cfg.mass, &opts)?.to_json()))
        }
        Command::Detect => {
            let v = load_potential(cfg)?;
            let x_star = detect_singular_with(&v, &opts)?;
            let eq = solve_with(&v, 1.0, 1.0, &opts)?;
            let c = curvature_c(&v, x_star)?;
            let report = Json::object()
                .num("x_star", x_star)
                .num("a", eq.a)
                .num("b", eq.b)
                .num("phi", eq.phi(x_star))
                .num("c", c)
                .num("J", scaling_J(eq.a, eq.b, x_star))
                .build();
            Ok(line(report))
        }
        Command::Kernel => {
            let v = load_potential(cfg)?;
            let kopts = KernelOptions {
                center_nt: cfg.center_nt,
            };
            let kg = rescaled_kernel_with(&v, need(cfg.n, "n")?, need(cfg.s, "s")?, &grid()?, &kopts)?;
            Ok(kg.to_csv())
        }
        Command::Gue => {
            let grid = grid()?;
            let values = gue_grid(&grid, need(cfg.k, "k")?);
            let pts = grid.points();
            let mut csv = Csv::new(&["u", "v", "value"]);
            for (i, u) in pts.iter().enumerate() {
                for (j, w) in pts.iter().enumerate() {
                    csv.push(vec![fmt_f64(*u), fmt_f64(*w), fmt_f64(values[i][j])]);
                }
            }
            Ok(csv.render())
        }
        Command::Psi => {
            let k = need(cfg.k, "k")?;
            let zeta = need(cfg.zeta, "zeta")?;
            let psi = psi_matrix(zeta, k)?;
            let coeffs = psi_asymptotic_coefficients(zeta, k)?;
            let report = Json::object()
                .int("k", k as i64)
                .field("zeta", complex(zeta))
                .field("psi", matrix(&psi.entries))
                .field("det", complex(psi.det()))
                .field("asymptotic", matrix(&coeffs))
                .build();
            Ok(line(report))
        }
        Command::Compare => {
            let v = load_potential(cfg)?;
            let kopts = KernelOptions {
                center_nt: cfg.center_nt,
            };
            let grid = grid()?;
            let kg = rescaled_kernel_with(&v, need(cfg.n, "n")?, need(cfg.s, "s")?, &grid, &kopts)?;
            let k = cfg.k.unwrap_or(kg.params.k);
            let (best, best_sup) = best_single_index(&kg.values, &grid);
            let mut report = compare_to_gue(&kg, k).to_json();
            if let Json::Obj(map) = &mut report {
                map.insert("best_index".into(), Json::Int(best as i64));
                map.insert("best_sup_error".into(), Json::Num(best_sup));
            }
            Ok(line(report))
        }
        Command::Sweep => {
            let v = load_potential(cfg)?;
            if cfg.n_list.is_empty() || cfg.s_list.is_empty() {
                return Err(Error::InvalidParameter(
                    "sweep needs --n-list and --s-list".into(),
                ));
            }
            let table = convergence_sweep(&v, &cfg.n_list, &cfg.s_list, &grid()?);
            for f in &table.failures {
                let msg = format!("n = {}, s = {}: {}", f.n, f.s, f.error);
                eprintln!("{}", error_json(f.error.kind(), &msg));
            }
            if table.rows.is_empty() {
                return Err(Error::NoConvergence("every sweep row failed".into()));
            }
            Ok(table.to_csv())
        }
        Command::LambdaFit => {
            let v = load_potential(cfg)?;
            let grid = grid()?;
            let kopts = KernelOptions {
                center_nt: cfg.center_nt,
            };
            let kg = rescaled_kernel_with(&v, need(cfg.n, "n")?, need(cfg.s, "s")?, &grid, &kopts)?;
            let k = cfg.k.unwrap_or(kg.params.nu.floor() as usize);
            let mut report = lambda_fit(&kg.values, &grid, k).to_json();
            if let Json::Obj(map) = &mut report {
                map.insert("k".into(), Json::Int(k as i64));
                map.insert("n".into(), Json::Int(kg.params.n as i64));
                map.insert("s".into(), Json::Num(kg.params.s));
            }
            Ok(line(report))
        }
        Command::Count => {
            let v = load_potential(cfg)?;
            let (n, s) = (need(cfg.n, "n")?, need(cfg.s, "s")?);
            let params = make_scaling(&v, n, s)?;
            let count = expected_count(&v, n, s, cfg.delta)?;
            let window = match cfg.delta {
                Some(d) => d,
                None => 0.25 * (params.x_star - solve_with(&v, 1.0, 1.0, &opts)?.b),
            };
            let mut report = params.to_json();
            if let Json::Obj(map) = &mut report {
                map.insert("count".into(), Json::Num(count));
                map.insert("window".into(), Json::Num(window));
            }
            Ok(line(report))
        }
    }
}

/// Runs a parsed config, writing output and errors, and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = execute(cfg).and_then(|text| match &cfg.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_COMPUTE
            }
        }
    }
}

/// Parses and runs; the whole process in one call.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(ParseOutcome::Usage(text)) => {
            eprint!("{text}");
            let first = text.lines().next().unwrap_or("usage error");
            eprintln!("{}", error_json("usage", first.trim_start_matches("error: ")));
            EXIT_USAGE
        }
    }
}

fn load_potential(cfg: &RunConfig) -> Result<Potential, Error> {
    let path = need(cfg.potential.clone(), "potential")?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    PotentialConfig::from_json(&text)?.build()
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidParameter(format!("missing --{flag}")))
}

fn line(json: Json) -> String {
    let mut text = json.render();
    text.push('\n');
    text
}

fn complex(z: Complex64) -> Json {
    Json::nums(&[z.re, z.im])
}

fn matrix(m: &[[Complex64; 2]; 2]) -> Json {
    Json::Arr(
        m.iter()
            .map(|row| Json::Arr(row.iter().map(|&z| complex(z)).collect()))
            .collect(),
    )
}
