//! Flag and config-file resolution shared by every subcommand.
//!
//! All flags are optional at the clap level so that a `--config` file can
//! fill in whatever the command line leaves out; explicit flags always win.
//! The merged result is validated once, here, and commands consume the
//! [`Resolved`] form.

use std::collections::BTreeMap;
use std::path::PathBuf;

use isochrone::expr::{parse_expr, Bindings, ExprAst};
use isochrone::period::{lin_spaced, log_spaced};
use isochrone::scalar_fn::ScalarFn;

use crate::CliError;

/// Command-line arguments shared by all subcommands.
#[derive(Debug, clap::Args)]
pub struct Args {
    /// Angular frequency of the center (verify derives sqrt(g'(0)) if omitted)
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Characteristic f as an expression in x, e.g. "0.5" or "cos(x)"
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,

    /// Restoring force g as an expression in x
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,

    /// Urabe function h as an odd expression in x
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,

    /// Bind an expression parameter, e.g. --param a=0.5 (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,

    /// Half-width of the x-interval to construct or sample [default: 0.8]
    #[arg(long)]
    pub half_width: Option<f64>,

    /// Tolerance for the solver and the conversions [default: 1e-10]
    #[arg(long)]
    pub tol: Option<f64>,

    /// Largest |T - 2*pi/lambda| still accepted as isochronous [default: 1e-6]
    #[arg(long)]
    pub period_tol: Option<f64>,

    /// Energy grid "lo:hi:n:log" or "lo:hi:n:lin"; hi may be "auto"
    /// [default: 1e-4:auto:16:log]
    #[arg(long)]
    pub energies: Option<String>,

    /// Truncation order for series output [default: 8]
    #[arg(long)]
    pub order: Option<usize>,

    /// Basename for artifacts: writes <OUT>.csv and <OUT>.json
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// What to print to stdout when --out is absent [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// JSON file with the same keys as the flags; explicit flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `--config` file contents: the same keys as the flags, plus a `params` map.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lambda: Option<f64>,
    f: Option<String>,
    g: Option<String>,
    h: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    half_width: Option<f64>,
    tol: Option<f64>,
    period_tol: Option<f64>,
    energies: Option<String>,
    order: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Which of f/g/h the invocation provided; this picks the pipeline direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Characteristic,
    Force,
    Urabe,
}

impl Kind {
    fn flag(self) -> &'static str {
        match self {
            Kind::Characteristic => "--f",
            Kind::Force => "--g",
            Kind::Urabe => "--h",
        }
    }
}

/// Energy grid specification; `hi = None` means "auto", which stops at the
/// lower of 0.3 and half the well rim so every orbit closes.
#[derive(Debug, Clone)]
pub struct EnergyGrid {
    pub lo: f64,
    pub hi: Option<f64>,
    pub n: usize,
    pub log: bool,
}

impl EnergyGrid {
    fn parse(spec: Option<&str>) -> Result<Self, CliError> {
        let Some(spec) = spec else {
            return Ok(EnergyGrid { lo: 1e-4, hi: None, n: 16, log: true });
        };
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, n, scale] = parts[..] else {
            return Err(CliError::Invalid(format!(
                "energy grid `{spec}` is not of the form lo:hi:n:log|lin"
            )));
        };
        let bad = |what: &str| CliError::Invalid(format!("energy grid `{spec}`: bad {what}"));
        let lo: f64 = lo.parse().map_err(|_| bad("lower bound"))?;
        let hi = match hi {
            "auto" => None,
            text => Some(text.parse::<f64>().map_err(|_| bad("upper bound"))?),
        };
        let n: usize = n.parse().map_err(|_| bad("sample count"))?;
        let log = match scale {
            "log" => true,
            "lin" => false,
            _ => return Err(bad("scale (want log or lin)")),
        };
        if !(lo > 0.0) || n == 0 || hi.is_some_and(|h| h <= lo) {
            return Err(bad("range (need 0 < lo < hi, n >= 1)"));
        }
        Ok(EnergyGrid { lo, hi, n, log })
    }

    /// Concrete energies for a well whose rim (lowest escape energy) is `rim`.
    pub fn materialize(&self, rim: f64) -> Result<Vec<f64>, CliError> {
        let hi = self.hi.unwrap_or_else(|| 0.3f64.min(rim / 2.0));
        if !(hi < rim) {
            return Err(CliError::Invalid(format!(
                "energy grid top {hi} reaches the well rim {rim}; no closed orbit there"
            )));
        }
        if hi <= self.lo {
            return Err(CliError::Invalid(format!(
                "energy grid [{}, {hi}] is empty; the well rim is only {rim}",
                self.lo
            )));
        }
        Ok(if self.log { log_spaced(self.lo, hi, self.n) } else { lin_spaced(self.lo, hi, self.n) })
    }
}

/// Fully merged settings with defaults applied.
pub struct Resolved {
    pub lambda: Option<f64>,
    function: Option<(Kind, ExprAst)>,
    pub params: Bindings,
    pub half_width: f64,
    pub tol: f64,
    pub period_tol: f64,
    pub energies: EnergyGrid,
    pub order: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Resolved {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Invalid(format!("config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| {
                    CliError::Invalid(format!("config {}: {e}", path.display()))
                })?
            }
            None => FileConfig::default(),
        };

        // The function slot is all-or-nothing: any f/g/h flag replaces every
        // function the file provides, so the pipeline direction never mixes
        // sources.  Whatever survives must be exactly one expression.
        let from_flags = [
            (Kind::Characteristic, &args.f),
            (Kind::Force, &args.g),
            (Kind::Urabe, &args.h),
        ];
        let from_file = [
            (Kind::Characteristic, &file.f),
            (Kind::Force, &file.g),
            (Kind::Urabe, &file.h),
        ];
        let pick = |set: [(Kind, &Option<String>); 3]| -> Vec<(Kind, String)> {
            set.iter()
                .filter_map(|(k, text)| text.as_ref().map(|t| (*k, t.clone())))
                .collect()
        };
        let mut chosen = pick(from_flags);
        if chosen.is_empty() {
            chosen = pick(from_file);
        }
        if chosen.len() > 1 {
            let names: Vec<&str> = chosen.iter().map(|(k, _)| k.flag()).collect();
            return Err(CliError::Invalid(format!(
                "provide exactly one of --f, --g, --h (got {})",
                names.join(" and ")
            )));
        }
        let function = match chosen.pop() {
            Some((kind, text)) => {
                let ast = parse_expr(&text)
                    .map_err(|e| CliError::Invalid(format!("{} `{text}`: {e}", kind.flag())))?;
                Some((kind, ast))
            }
            None => None,
        };

        // Parameters merge per name; a --param flag overrides the file's entry.
        let mut params: Bindings = file.params.into_iter().collect();
        for spec in &args.params {
            let (name, value) = parse_param(spec)?;
            params.insert(name, value);
        }

        let half_width = args.half_width.or(file.half_width).unwrap_or(0.8);
        let tol = args.tol.or(file.tol).unwrap_or(1e-10);
        let period_tol = args.period_tol.or(file.period_tol).unwrap_or(1e-6);
        for (name, value) in
            [("--half-width", half_width), ("--tol", tol), ("--period-tol", period_tol)]
        {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CliError::Invalid(format!("{name} must be positive, got {value}")));
            }
        }

        Ok(Resolved {
            lambda: args.lambda.or(file.lambda),
            function,
            params,
            half_width,
            tol,
            period_tol,
            energies: EnergyGrid::parse(args.energies.or(file.energies).as_deref())?,
            order: args.order.or(file.order).unwrap_or(8),
            out: args.out.or(file.out),
            format: args.format.or(file.format).unwrap_or(Format::Json),
        })
    }

    /// The provided function, required to be of kind `want`.
    pub fn function(&self, want: Kind, command: &str) -> Result<ScalarFn, CliError> {
        let (kind, ast) = self.function_of_any(&[want], command)?;
        debug_assert_eq!(kind, want);
        Ok(ast)
    }

    /// The provided function, required to be one of `allowed`.
    pub fn function_of_any(
        &self,
        allowed: &[Kind],
        command: &str,
    ) -> Result<(Kind, ScalarFn), CliError> {
        let names: Vec<&str> = allowed.iter().map(|k| k.flag()).collect();
        let wanted = names.join(" or ");
        let Some((kind, ast)) = &self.function else {
            return Err(CliError::Invalid(format!("{command} needs {wanted}")));
        };
        if !allowed.contains(kind) {
            return Err(CliError::Invalid(format!(
                "{command} needs {wanted}, got {}",
                kind.flag()
            )));
        }
        let func = ScalarFn::from_expr(ast.clone(), self.params.clone())?;
        Ok((*kind, func))
    }

    /// The raw syntax tree of the provided function (for polynomial checks).
    pub fn function_ast(&self) -> Option<&ExprAst> {
        self.function.as_ref().map(|(_, ast)| ast)
    }

    /// Lambda, for commands where it has no derivable default.
    pub fn lambda_required(&self, command: &str) -> Result<f64, CliError> {
        self.lambda
            .ok_or_else(|| CliError::Invalid(format!("{command} needs --lambda")))
    }
}

fn parse_param(spec: &str) -> Result<(String, f64), CliError> {
    let bad = || {
        CliError::Invalid(format!("--param `{spec}` is not of the form name=value"))
    };
    let (name, value) = spec.split_once('=').ok_or_else(bad)?;
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(bad());
    }
    let value: f64 = value.parse().map_err(|_| bad())?;
    Ok((name.to_owned(), value))
}
