use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsys_core::calculus::{
    char_from_livsic, livsic_from_weyl, transfer_from_impedance, weyl_from_livsic, POLE_TOL,
};
use lsys_core::examples::{bundle, Boundary, IntervalOperatorParams};
use lsys_core::measures::{stieltjes_invert, stieltjes_invert_samples, InversionTable};
use lsys_core::model::build_model;
use lsys_core::suites::{run_suite, Status, SUITES};
use lsys_core::{
    AnalyticFn, Complex64, DiscreteModel, Error, GridSpec, MeasureSpec, QuadratureConfig, Role,
    VonNeumannKappa, I,
};

mod output;

use output::{parse_samples, write_inversion, write_rows, Format};

#[derive(Parser)]
#[command(
    name = "lsys",
    version,
    about = "Evaluate and verify the function theory of scalar L-systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function on a grid in the upper half-plane.
    Eval(EvalArgs),
    /// Run verification suites.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Build a finite model from a measure file.
    Model {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover atoms and density from boundary values.
    Invert(InvertArgs),
    /// Print the interval examples and their normalizations.
    Examples {
        #[command(flatten)]
        params: ExampleArgs,
    },
}

#[derive(Args, Clone)]
struct ExampleArgs {
    /// Interval length.
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Boundary phase of example 3, as the angle of mu in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu_angle: f64,
    /// Boundary ratio of example 4.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    rho: f64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Example number 1-4.
    #[arg(long)]
    example: Option<u8>,
    /// Measure JSON file.
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Model JSON file.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    params: ExampleArgs,
    #[arg(long, value_enum)]
    role: RoleArg,
    /// "default" or re_min,re_max,im_min,im_max,n_re,n_im.
    #[arg(long, default_value = "default", allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct InvertArgs {
    /// CSV with columns lambda,eps,re_f,im_f.
    #[arg(long, conflicts_with_all = ["example", "measure"])]
    samples: Option<PathBuf>,
    /// Invert the impedance function of an example.
    #[arg(long)]
    example: Option<u8>,
    /// Invert the Weyl function of a measure file.
    #[arg(long)]
    measure: Option<PathBuf>,
    #[command(flatten)]
    params: ExampleArgs,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Comma-separated ladder of distances to the real axis, decreasing.
    #[arg(long, default_value = "0.05,0.02,0.01")]
    eps: String,
    /// Number of grid points on the window.
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Weyl,
    Livsic,
    Characteristic,
    Transfer,
    Impedance,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const VERIFY: u8 = 1;
    const PARSE: u8 = 2;
    const POLES: u8 = 3;
    const IO: u8 = 4;
    const NORMALIZATION: u8 = 5;

    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self::new(Self::IO, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Normalization { .. } => Self::NORMALIZATION,
            Error::InvalidKappa(_)
            | Error::NotUnimodular(_)
            | Error::InvalidMeasure(_)
            | Error::InvalidArgument(_)
            | Error::InadmissibleRho { .. }
            | Error::TooFewNodes { .. } => Self::PARSE,
            _ => Self::VERIFY,
        };
        Self::new(code, e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(Failure::IO, e.to_string())),
    }
}

fn parse_grid(text: &str) -> Outcome<GridSpec> {
    if text == "default" {
        return Ok(GridSpec::cli_default());
    }
    let bad = || {
        Failure::new(
            Failure::PARSE,
            format!("bad grid {text:?}; expected re_min,re_max,im_min,im_max,n_re,n_im"),
        )
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let n = |s: &str| s.parse::<usize>().map_err(|_| bad());
    GridSpec::new(
        (f(parts[0])?, f(parts[1])?),
        (f(parts[2])?, f(parts[3])?),
        n(parts[4])?,
        n(parts[5])?,
    )
    .map_err(|e| Failure::new(Failure::PARSE, e.to_string()))
}

fn example_params(number: u8, a: &ExampleArgs) -> Outcome<IntervalOperatorParams> {
    let p = match number {
        1 => IntervalOperatorParams::example1(a.ell),
        2 => IntervalOperatorParams::example2(a.ell),
        3 => IntervalOperatorParams::example3(a.ell, Complex64::from_polar(1.0, a.mu_angle)),
        4 => IntervalOperatorParams::example4(a.ell, a.rho),
        n => {
            return Err(Failure::new(
                Failure::PARSE,
                format!("no example {n}; choose 1-4"),
            ))
        }
    };
    Ok(p?)
}

fn load_measure(path: &Path) -> Outcome<MeasureSpec> {
    MeasureSpec::from_json(&read(path)?).map_err(|e| Failure::new(Failure::PARSE, e.to_string()))
}

fn load_model(path: &Path) -> Outcome<DiscreteModel> {
    DiscreteModel::from_json(&read(path)?).map_err(|e| match e {
        Error::Normalization { .. } => e.into(),
        e => Failure::new(Failure::PARSE, e.to_string()),
    })
}

fn example_fn(number: u8, params: &ExampleArgs, role: RoleArg) -> Outcome<AnalyticFn> {
    let b = bundle(&example_params(number, params)?)?;
    Ok(match role {
        RoleArg::Weyl => weyl_from_livsic(&b.s)?,
        RoleArg::Livsic => b.s,
        RoleArg::Characteristic => b.big_s.ok_or_else(|| {
            Failure::new(
                Failure::PARSE,
                "example 3 has no characteristic function with nu = 1",
            )
        })?,
        RoleArg::Transfer => b.w,
        RoleArg::Impedance => b.v,
    })
}

/// Functions of a measure `μ`: `M` and `V` are its Weyl function, the
/// others go through the reference measure `μ₀ = μ/L`, `κ = (1 - L)/(1 + L)`.
fn measure_fn(m: MeasureSpec, role: RoleArg) -> Outcome<AnalyticFn> {
    let cfg = QuadratureConfig::default();
    let weyl = m.weyl_fn(cfg);
    let reference = || -> Outcome<(AnalyticFn, VonNeumannKappa)> {
        let l = m.normalization();
        let kappa = VonNeumannKappa::new((1.0 - l) / (1.0 + l)).map_err(|_| {
            Failure::from(Error::Normalization {
                measured: l,
                required: 1.0,
            })
        })?;
        let w = weyl.clone();
        let m0 = AnalyticFn::new(Role::Weyl, move |z| Ok(w.eval(z)? / l));
        Ok((m0, kappa))
    };
    Ok(match role {
        RoleArg::Weyl => weyl,
        RoleArg::Impedance => {
            let w = weyl.clone();
            AnalyticFn::new(Role::Impedance, move |z| w.eval(z))
        }
        RoleArg::Livsic => livsic_from_weyl(&reference()?.0)?,
        RoleArg::Characteristic => {
            let (m0, kappa) = reference()?;
            char_from_livsic(&livsic_from_weyl(&m0)?, kappa)?
        }
        RoleArg::Transfer => {
            let w = weyl.clone();
            transfer_from_impedance(&AnalyticFn::new(Role::Impedance, move |z| w.eval(z)))?
        }
    })
}

fn model_fn(m: &DiscreteModel, role: RoleArg) -> Outcome<AnalyticFn> {
    Ok(match role {
        RoleArg::Weyl => m.reference_weyl_fn(),
        RoleArg::Livsic => livsic_from_weyl(&m.reference_weyl_fn())?,
        RoleArg::Characteristic => m.characteristic_fn(),
        RoleArg::Transfer => m.transfer_resolvent_fn(POLE_TOL),
        RoleArg::Impedance => m.impedance_fn(),
    })
}

fn run_eval(a: EvalArgs) -> Outcome {
    let grid = parse_grid(&a.grid)?;
    let f = if let Some(n) = a.source.example {
        example_fn(n, &a.params, a.role)?
    } else if let Some(p) = &a.source.measure {
        measure_fn(load_measure(p)?, a.role)?
    } else if let Some(p) = &a.source.model {
        model_fn(&load_model(p)?, a.role)?
    } else {
        unreachable!("clap requires one source")
    };
    let rows = lsys_core::grid::evaluate(&f, &grid.points());
    let mut values = Vec::with_capacity(rows.len());
    let mut poles = 0;
    for (z, r) in rows {
        match r {
            Ok(v) => values.push((z, Some(v))),
            Err(e) if e.is_pole() => {
                poles += 1;
                values.push((z, None));
            }
            Err(e) => {
                return Err(Failure::new(
                    Failure::VERIFY,
                    format!("evaluation failed at {z}: {e}"),
                ))
            }
        }
    }
    emit(a.out.as_deref(), &write_rows(&values, a.format))?;
    if 2 * poles > values.len() {
        return Err(Failure::new(
            Failure::POLES,
            format!("{poles} of {} grid points are poles", values.len()),
        ));
    }
    Ok(())
}

fn run_verify(suite: &str) -> Outcome {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite]
    };
    let mut failed = false;
    for name in names {
        let report = run_suite(name).map_err(|e| Failure::new(Failure::PARSE, e.to_string()))?;
        for c in &report.checks {
            failed |= c.status == Status::Fail;
            print!(
                "[{:5}] {}: {}: residual {:.3e} (threshold {:.1e})",
                c.status.label(),
                report.suite,
                c.name,
                c.residual,
                c.threshold
            );
            match &c.note {
                Some(n) => println!("; {n}"),
                None => println!(),
            }
        }
    }
    if failed {
        Err(Failure::new(Failure::VERIFY, "verification failed"))
    } else {
        Ok(())
    }
}

fn run_model(measure: &Path, kappa: f64, n: usize, out: Option<&Path>) -> Outcome {
    let m = load_measure(measure)?;
    let kappa = VonNeumannKappa::new(kappa)?;
    let model = build_model(&m, kappa, n, &QuadratureConfig::default())?;
    emit(out, &(model.to_json() + "\n"))
}

fn run_invert(a: InvertArgs) -> Outcome {
    let table: InversionTable = if let Some(p) = &a.samples {
        stieltjes_invert_samples(&parse_samples(&read(p)?)?)?
    } else {
        let f = if let Some(n) = a.example {
            example_fn(n, &a.params, RoleArg::Impedance)?
        } else if let Some(p) = &a.measure {
            load_measure(p)?.weyl_fn(QuadratureConfig::default())
        } else {
            return Err(Failure::new(
                Failure::PARSE,
                "invert needs --samples, --example or --measure",
            ));
        };
        let w = a
            .window
            .as_deref()
            .ok_or_else(|| Failure::new(Failure::PARSE, "--window A B is required"))?;
        let eps = a
            .eps
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure::new(Failure::PARSE, format!("bad eps ladder {:?}", a.eps)))?;
        stieltjes_invert(&f, (w[0], w[1]), &eps, a.points)?
    };
    emit(a.out.as_deref(), &write_inversion(&table))
}

fn run_examples(a: &ExampleArgs) -> Outcome {
    let mut text = String::from("example,boundary,kappa,re_v_i,im_v_i\n");
    for n in 1..=4 {
        let p = example_params(n, a)?;
        let b = bundle(&p)?;
        let v = b.v.eval(I).map_err(Error::from)?;
        let boundary = match p.boundary() {
            Boundary::Dirichlet => "x(0)=0".to_string(),
            Boundary::ExpT0 => "x(l)=e^l x(0)".to_string(),
            Boundary::PhaseFamily { mu } => format!("phase mu={:.6}{:+.6}i", mu.re, mu.im),
            Boundary::RhoFamily { rho } => format!("x(l)=rho x(0) rho={rho}"),
        };
        text += &format!(
            "{n},{boundary},{:.16e},{:.16e},{:.16e}\n",
            b.kappa.value(),
            v.re,
            v.im
        );
    }
    emit(None, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => run_eval(a),
        Command::Verify { suite } => run_verify(&suite),
        Command::Model {
            measure,
            kappa,
            n,
            out,
        } => run_model(&measure, kappa, n, out.as_deref()),
        Command::Invert(a) => run_invert(a),
        Command::Examples { params } => run_examples(&params),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lsys: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
