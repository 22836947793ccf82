use crate::{FormArgs, PArgs};
use hiw_core::modarith::{is_prime, nearest_prime_to_power};
use hiw_core::qseries::read_qexp;
use hiw_core::{builtin_form, BuiltinForm, Error, QSeries, Window};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::UnknownForm(_)
            | Error::NotPrime(_)
            | Error::Parse { .. }
            | Error::Unsupported(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

/// A built-in name or a QEXP file.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FormSource {
    Builtin { name: String, trunc: Option<u64> },
    File(PathBuf),
}

impl From<&FormArgs> for FormSource {
    fn from(a: &FormArgs) -> Self {
        if a.form.parse::<BuiltinForm>().is_ok() {
            FormSource::Builtin {
                name: a.form.clone(),
                trunc: a.trunc,
            }
        } else {
            FormSource::File(PathBuf::from(&a.form))
        }
    }
}

impl FormSource {
    /// Load the form with at least `need` coefficients.
    pub fn load(&self, need: u64) -> Result<QSeries, CliError> {
        let s = match self {
            FormSource::Builtin { name, trunc } => {
                let t = trunc.unwrap_or(need);
                if t < need {
                    return config_err(format!(
                        "--trunc {t} is below the {need} coefficients this run needs"
                    ));
                }
                builtin_form(name, t)?
            }
            FormSource::File(path) => {
                if !path.exists() {
                    return config_err(format!(
                        "--form `{}` is neither a built-in form nor an existing file",
                        path.display()
                    ));
                }
                read_qexp(path)?.series
            }
        };
        if s.truncation() < need {
            return config_err(format!(
                "form has {} coefficients, the run needs {need}",
                s.truncation()
            ));
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum PRule {
    Explicit(u64),
    Exponent(f64),
}

impl PRule {
    pub fn from(a: &PArgs) -> Result<Self, CliError> {
        match (a.p, a.p_exp) {
            (Some(p), None) => {
                if !(p > 2 && is_prime(p)) {
                    return config_err(format!("--p {p} is not an odd prime"));
                }
                Ok(PRule::Explicit(p))
            }
            (None, Some(e)) => {
                if !(e > 0.0 && e < 1.0) {
                    return config_err(format!("--p-exp must lie in (0, 1), got {e}"));
                }
                Ok(PRule::Exponent(e))
            }
            (None, None) => Ok(PRule::Exponent(0.55)),
            (Some(_), Some(_)) => config_err("give either --p or --p-exp, not both"),
        }
    }

    pub fn prime_for(self, x: f64) -> u64 {
        match self {
            PRule::Explicit(p) => p,
            PRule::Exponent(e) => nearest_prime_to_power(x, e),
        }
    }
}

pub fn parse_window(spec: &str) -> Result<Window, CliError> {
    spec.parse::<Window>()
        .map_err(|e| CliError::Config(format!("--window: {e}")))
}

pub fn check_x(x: f64) -> Result<(), CliError> {
    if !(10.0..=1e8).contains(&x) {
        return config_err(format!("--x must lie in [10, 1e8], got {x}"));
    }
    Ok(())
}

/// Validated settings shared by the statistics subcommands.
#[derive(Clone, Debug, Serialize)]
pub struct Experiment {
    pub form: FormSource,
    pub xs: Vec<f64>,
    pub p_rule: PRule,
    pub window: Window,
}

impl Experiment {
    pub fn new(
        form: FormSource,
        xs: &[f64],
        p_rule: PRule,
        window: &str,
    ) -> Result<Self, CliError> {
        if xs.is_empty() {
            return config_err("at least one --x is required");
        }
        for &x in xs {
            check_x(x)?;
        }
        Ok(Self {
            form,
            xs: xs.to_vec(),
            p_rule,
            window: parse_window(window)?,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.xs.iter().copied().fold(0.0, f64::max)
    }

    pub fn load(&self) -> Result<QSeries, CliError> {
        self.form.load(self.x_max().floor() as u64)
    }
}
