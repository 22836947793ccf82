//! `hiw`: command-line driver for the coefficient experiments.
//!
//! Exit codes: 0 ok, 1 runtime error, 2 configuration error, 3 a `--check`
//! assertion failed.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{CliError, FormSource, PRule};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "hiw",
    version,
    about = "Numerical experiments on half-integral weight cusp forms"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output path. Reports go to PATH as JSON, per-class tables to PATH
    /// with a .csv extension; `form` writes its q-expansion here. Without
    /// it the JSON report is printed on stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-check the module-level assertions and exit with status 3 if any
    /// fails.
    #[arg(long, global = true)]
    check: bool,
    /// Also write two-column .dat files for plotting.
    #[arg(long, global = true)]
    gnuplot: bool,
    /// Seed for the randomized spot checks of `--check`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads.
    #[arg(long, global = true, env = "HIW_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct FormArgs {
    /// Built-in form name (theta_delta, eta8_cubed, theta_delta_fricke) or
    /// a path to a QEXP file.
    #[arg(long, default_value = "theta_delta")]
    form: String,
    /// Truncation for built-in forms; defaults to what the run needs.
    #[arg(long)]
    trunc: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct PArgs {
    /// Explicit prime modulus.
    #[arg(long, conflicts_with = "p_exp")]
    p: Option<u64>,
    /// Use the prime nearest x^E (ties broken downward).
    #[arg(long = "p-exp", value_name = "E")]
    p_exp: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a q-expansion and write it as a QEXP file.
    Form {
        /// Built-in form: theta_delta, eta8_cubed or theta_delta_fricke.
        #[arg(long)]
        name: String,
        /// Number of coefficients.
        #[arg(long)]
        trunc: u64,
    },
    /// Class sums E(x,p,a) for every a mod p.
    Sums {
        #[command(flatten)]
        form: FormArgs,
        /// Length parameter x; the window is evaluated at n/x.
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        p: PArgs,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
    },
    /// Second and fourth moments of E against the c_f estimate.
    Moments {
        #[command(flatten)]
        form: FormArgs,
        /// One or more x values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        p: PArgs,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
        /// x values for the c_f estimate; defaults to the moment xs.
        #[arg(long = "cf-x", value_delimiter = ',')]
        cf_x: Vec<f64>,
    },
    /// Check the Voronoi formula for θΔ at one twist u/q.
    Voronoi {
        /// Odd modulus of the twist, coprime to the level.
        #[arg(long)]
        q: u64,
        /// Numerator of the twist, coprime to q.
        #[arg(long)]
        u: i64,
        /// Length parameter x; the window is evaluated at n/x.
        #[arg(long)]
        x: f64,
        /// Largest dual index tried.
        #[arg(long, default_value_t = 400_000)]
        m_cap: u64,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
    },
    /// Compare E(x,p,a) for θΔ with its Salié-sum rearrangement.
    Rearrange {
        /// Length parameter x; the window is evaluated at n/x.
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        p: PArgs,
        /// Truncate the dual sum at m ≤ Y^(1+eta).
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Classes a; defaults to 24 classes spread over 1..p.
        #[arg(long, value_delimiter = ',')]
        classes: Vec<u64>,
        /// Length of the untruncated dual sum.
        #[arg(long = "m-full", default_value_t = 400_000)]
        m_full: u64,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
    },
    /// Eigenvalue of T_{p²}.
    Hecke {
        #[command(flatten)]
        form: FormArgs,
        /// Odd prime not dividing the level.
        #[arg(long)]
        p: u64,
        /// Probe indices n ≤ this bound.
        #[arg(long, default_value_t = 200)]
        n_probe: u64,
    },
    /// Check the Shimura relation c(tn²) = c(t)Σ... exactly.
    Shimura {
        #[command(flatten)]
        form: FormArgs,
        /// Squarefree index t.
        #[arg(long)]
        t: u64,
        /// Check n = 1..nmax.
        #[arg(long)]
        nmax: u64,
        /// λ(p) for primes dividing the level, as p=value (repeatable).
        #[arg(long = "lambda", value_name = "P=VALUE")]
        lambdas: Vec<String>,
    },
    /// Sign counts T± per residue class.
    Signs {
        #[command(flatten)]
        form: FormArgs,
        /// Count n ≤ x.
        #[arg(long)]
        x: f64,
        /// Count n with ±a(n) > n^(−alpha).
        #[arg(long)]
        alpha: f64,
        /// Modulus; 1 counts everything.
        #[arg(long, default_value_t = 1)]
        p: u64,
        /// Window for the smoothed count; omitted means the sharp count.
        #[arg(long)]
        window: Option<String>,
    },
    /// Class survey (plain) or eigenform survey (eigen).
    Survey {
        /// `plain` class survey or `eigen` eigenform survey.
        #[arg(long, value_parser = ["plain", "eigen"], default_value = "plain")]
        mode: String,
        #[command(flatten)]
        form: FormArgs,
        /// Length parameter x; the window is evaluated at n/x.
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        p: PArgs,
        /// Defaults: 0.23 (plain), 0.14 (eigen).
        #[arg(long)]
        alpha: Option<f64>,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// T±(x; 3/14+ε) against r·x^{4/7−2ε}.
    Corollary {
        #[command(flatten)]
        form: FormArgs,
        /// Length parameter x; the window is evaluated at n/x.
        #[arg(long)]
        x: f64,
        /// Exponent slack ε.
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        /// `standard` or `a,b` for a bump on (a,b).
        #[arg(long, default_value = "standard")]
        window: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    /// Target fraction of classes with T⁺ ≥ 1 (default 0.01).
    #[arg(long)]
    r: Option<f64>,
    /// Lower threshold on |E| (default 0.02·√(c_f‖w‖²)).
    #[arg(long)]
    m1: Option<f64>,
    /// Upper threshold on the class second moment (default 200·c_f‖w‖²).
    #[arg(long)]
    m2: Option<f64>,
    /// Second moment threshold for the A set (default 0.1·c_f‖w‖²).
    #[arg(long)]
    m: Option<f64>,
    /// Slack δ in the A and B thresholds (default 0.05).
    #[arg(long)]
    delta: Option<f64>,
    /// Use this c_f instead of estimating it.
    #[arg(long)]
    cf: Option<f64>,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::Config(
                "HIW_THREADS / --threads must be at least 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let c = &cli.common;
    let out = match cli.command {
        Command::Form { name, trunc } => commands::form(&name, trunc, c)?,
        Command::Sums { form, x, p, window } => {
            let cfg =
                config::Experiment::new(FormSource::from(&form), &[x], PRule::from(&p)?, &window)?;
            commands::sums(&cfg)?
        }
        Command::Moments {
            form,
            x,
            p,
            window,
            cf_x,
        } => {
            let cfg =
                config::Experiment::new(FormSource::from(&form), &x, PRule::from(&p)?, &window)?;
            commands::moments(&cfg, &cf_x)?
        }
        Command::Voronoi {
            q,
            u,
            x,
            m_cap,
            window,
        } => commands::voronoi(q, u, x, m_cap, &window)?,
        Command::Rearrange {
            x,
            p,
            eta,
            classes,
            m_full,
            window,
        } => commands::rearrange(x, PRule::from(&p)?, eta, &classes, m_full, &window)?,
        Command::Hecke { form, p, n_probe } => {
            commands::hecke(&FormSource::from(&form), p, n_probe)?
        }
        Command::Shimura {
            form,
            t,
            nmax,
            lambdas,
        } => commands::shimura(&FormSource::from(&form), t, nmax, &lambdas)?,
        Command::Signs {
            form,
            x,
            alpha,
            p,
            window,
        } => commands::signs(
            &FormSource::from(&form),
            x,
            alpha,
            p,
            window.as_deref(),
            c.seed,
        )?,
        Command::Survey {
            mode,
            form,
            x,
            p,
            alpha,
            window,
            thresholds,
        } => {
            let cfg =
                config::Experiment::new(FormSource::from(&form), &[x], PRule::from(&p)?, &window)?;
            commands::survey(&cfg, &mode, alpha, &thresholds, c.seed)?
        }
        Command::Corollary {
            form,
            x,
            epsilon,
            window,
            thresholds,
        } => {
            let cfg = config::Experiment::new(
                FormSource::from(&form),
                &[x],
                PRule::Exponent(0.55),
                &window,
            )?;
            commands::corollary(&cfg, epsilon, &thresholds)?
        }
    };
    output::emit(&out, c)?;
    Ok(out.checks.iter().all(|(_, ok)| *ok) || !c.check)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(CliError::Config(msg)) => {
            eprintln!("hiw: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("hiw: {msg}");
            ExitCode::from(1)
        }
    }
}
