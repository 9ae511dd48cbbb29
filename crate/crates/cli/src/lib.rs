//! The `hsfc` command line: coefficient dumps, extension sampling, norms,
//! operator application, verification against the eigen-oracle and growth
//! estimation.
//!
//! Exit codes: 0 success, 1 usage error, 2 precondition failure (bad input,
//! refused matrix), 3 numerical non-convergence, 4 `verify` discrepancy above
//! the threshold.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use hsfc::{
    an_norm, choose_taylor_order, default_cutoff, fit_growth, format_complex, format_matrix, format_real,
    gamma_apply_with_cutoff, hs_apply_detailed, make_builtin, make_seeley_coefficients, matrix_function_oracle,
    parse_matrix, seeley_extend, Builtin, Domain, Error, HsOutput, Jet, Line, OperatorHandle, QuadratureConfig,
    Result,
};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "hsfc", version, about = "Helffer-Sjostrand functional calculus for matrices with real spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the truncated Seeley coefficients a_k, b_k exactly and as decimals.
    Coeffs {
        #[arg(long = "K")]
        k: usize,
    },
    /// Sample the Seeley extension of a half-line function.
    Extend {
        #[arg(long = "f")]
        f: String,
        #[arg(long = "K")]
        k: usize,
        /// File of x values, whitespace separated; `#` starts a comment.
        #[arg(long)]
        samples: PathBuf,
        /// Highest derivative to print (default: all available).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Weighted norm sum_{r<=n} int |f^(r)| <x>^(r-1) dx.
    Norm {
        #[arg(long = "f")]
        f: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "whole")]
        line: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Compute f(H) and write it in the matrix format.
    Apply {
        #[command(flatten)]
        common: ApplyArgs,
        /// Print quadrature statistics to stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Compare f(H) against the eigen-oracle.
    Verify {
        #[command(flatten)]
        common: ApplyArgs,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
    /// Fit the resolvent growth constants c, alpha.
    EstimateAlpha {
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long = "f")]
    f: String,
    /// Treat f as a half-line function and extend it first.
    #[arg(long)]
    half_line: bool,
    /// Seeley truncation (default n + 2).
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Taylor order, or `auto` for ceil(alpha) + 1.
    #[arg(long, default_value = "auto")]
    n: Order,
}

#[derive(Debug, Clone, Copy)]
enum Order {
    Auto,
    Fixed(usize),
}

impl FromStr for Order {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Order::Auto);
        }
        s.parse()
            .map(Order::Fixed)
            .map_err(|_| format!("expected a non-negative integer or `auto`, got `{s}`"))
    }
}

/// Runs the command line with `args[0]` the program name. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let threads = match std::env::var("HSFC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                let _ = writeln!(err, "error: HSFC_THREADS must be a non-negative integer, got `{v}`");
                return EXIT_USAGE;
            }
        },
        Err(_) => 0,
    };
    // buffered so the work can move onto the pool's threads
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let result = if threads == 0 {
        dispatch(cli.command, &mut out_buf, &mut err_buf)
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &mut out_buf, &mut err_buf)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot start {threads} threads: {e}");
                return EXIT_USAGE;
            }
        }
    };
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NONCONVERGENCE
            } else {
                EXIT_PRECONDITION
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32> {
    match cmd {
        Command::Coeffs { k } => coeffs(k, out),
        Command::Extend { f, k, samples, order } => extend(&f, k, &samples, order, out),
        Command::Norm { f, n, line, tol } => norm(&f, n, &line, tol, out),
        Command::Apply { common, verbose } => {
            let (res, elapsed) = apply(&common)?;
            out.write_all(format_matrix(&res.output.matrix).as_bytes())?;
            if verbose {
                writeln!(
                    err,
                    "n = {}\nestimated_error = {}\nstrip_bound = {}\ncells = {}\nresolvent_evaluations = {}\nseconds = {:.3}",
                    res.n,
                    format_real(res.output.estimated_error),
                    format_real(res.output.strip_bound),
                    res.output.cells,
                    res.output.resolvent_evaluations,
                    elapsed
                )?;
            }
            Ok(0)
        }
        Command::Verify { common, threshold } => verify(&common, threshold, out),
        Command::EstimateAlpha { matrix } => estimate_alpha(&matrix, out),
    }
}

fn builtin(spec: &str, domain: Domain) -> Result<Jet> {
    make_builtin(&spec.parse::<Builtin>()?, domain)
}

fn read_matrix(path: &Path) -> Result<OperatorHandle> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    OperatorHandle::new(parse_matrix(&text)?)
}

fn coeffs(k: usize, out: &mut dyn Write) -> Result<i32> {
    let s = make_seeley_coefficients(k)?;
    for (i, a) in s.a().iter().enumerate() {
        writeln!(out, "a[{i}] = {a}")?;
    }
    for (i, b) in s.b().iter().enumerate() {
        writeln!(out, "b[{i}] = {b}")?;
    }
    for i in 0..s.len() {
        writeln!(out, "a[{i}] ~ {}", format_real(s.a_f64(i)))?;
    }
    Ok(0)
}

fn extend(spec: &str, k: usize, samples: &Path, order: Option<usize>, out: &mut dyn Write) -> Result<i32> {
    let f = builtin(spec, Domain::HalfLine)?;
    let e = seeley_extend(&f, &default_cutoff(), &make_seeley_coefficients(k)?)?;
    let top = e.max_order().unwrap_or(usize::MAX);
    let order = match order {
        Some(r) if r > top => return Err(Error::OrderOverflow { requested: r, max: top }),
        Some(r) => r,
        None => top,
    };
    let text = std::fs::read_to_string(samples)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", samples.display())))?;
    let xs = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{t}` is not a sample point")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut header = vec!["# x".to_string()];
    header.extend((0..=order).map(|r| format!("d{r}")));
    writeln!(out, "{}", header.join("\t"))?;
    for x in xs {
        let d = e.derivatives(x, order)?;
        let mut row = vec![format_real(x)];
        row.extend(d.into_iter().map(format_complex));
        writeln!(out, "{}", row.join("\t"))?;
    }
    Ok(0)
}

fn norm(spec: &str, n: usize, line: &str, tol: f64, out: &mut dyn Write) -> Result<i32> {
    let line: Line = line.parse()?;
    let domain = match line {
        Line::Whole => Domain::WholeLine,
        Line::Half => Domain::HalfLine,
    };
    let r = an_norm(&builtin(spec, domain)?, n, line, tol)?;
    writeln!(out, "value = {}", format_real(r.value))?;
    writeln!(out, "error = {}", format_real(r.estimated_error))?;
    writeln!(out, "r\tterm\terror")?;
    for (i, (t, e)) in r.terms.iter().zip(&r.term_errors).enumerate() {
        writeln!(out, "{i}\t{}\t{}", format_real(*t), format_real(*e))?;
    }
    Ok(0)
}

struct Applied {
    output: HsOutput,
    n: usize,
    jet: Jet,
    handle: OperatorHandle,
}

fn apply(args: &ApplyArgs) -> Result<(Applied, f64)> {
    let mut h = read_matrix(&args.matrix)?;
    if args.half_line {
        h = h.with_spectral_floor(0.0)?;
    }
    let h = h.with_fitted_growth()?;
    let n = match args.n {
        Order::Auto => choose_taylor_order(&h.growth().expect("growth was just fitted")),
        Order::Fixed(n) => n,
    };
    let cfg = QuadratureConfig::new(args.tol, n);
    let started = Instant::now();
    let (output, jet) = if args.half_line {
        let f = builtin(&args.f, Domain::HalfLine)?;
        let k = args.k.unwrap_or(n + 2);
        (gamma_apply_with_cutoff(&f, &h, &cfg, k, &default_cutoff())?, f)
    } else {
        if args.k.is_some() {
            return Err(Error::InvalidParameter("--K only applies with --half-line".into()));
        }
        let f = builtin(&args.f, Domain::WholeLine)?;
        (hs_apply_detailed(&f, &h, &cfg)?, f)
    };
    let elapsed = started.elapsed().as_secs_f64();
    Ok((
        Applied {
            output,
            n,
            jet,
            handle: h,
        },
        elapsed,
    ))
}

fn verify(args: &ApplyArgs, threshold: f64, out: &mut dyn Write) -> Result<i32> {
    let (res, _) = apply(args)?;
    let want = matrix_function_oracle(&res.handle, &res.jet)?;
    let d = hsfc::numeric::frobenius(&(&res.output.matrix - want));
    writeln!(out, "discrepancy = {}", format_real(d))?;
    writeln!(out, "estimated_error = {}", format_real(res.output.estimated_error))?;
    writeln!(out, "threshold = {}", format_real(threshold))?;
    let pass = d <= threshold;
    writeln!(out, "status = {}", if pass { "pass" } else { "fail" })?;
    Ok(if pass { 0 } else { EXIT_VERIFY_FAILED })
}

fn estimate_alpha(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let h = read_matrix(path)?;
    let fit = fit_growth(&h, &hsfc::default_grid(&h))?;
    writeln!(out, "c = {}", format_real(fit.estimate.c))?;
    writeln!(out, "alpha = {}", format_real(fit.estimate.alpha))?;
    writeln!(out, "worst_z = {}", format_complex(fit.worst))?;
    writeln!(out, "worst_resolvent_norm = {}", format_real(fit.worst_norm))?;
    writeln!(out, "samples = {}", fit.samples)?;
    Ok(0)
}
