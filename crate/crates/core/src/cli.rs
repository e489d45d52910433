//! Command-line driver: argument parsing, dispatch and csv/json emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::constants::{cnr_sweep, interp_constant, theorem_bounds, BoundReport, ConstantOptions, SweepOptions};
use crate::discfun::{CoeffSeries, SigmaSet, C64};
use crate::error::{Error, Result};
use crate::extremal::{carleson_constant, cs_min_norm, pick_min_norm, quotient_norm, Certificate, PickProblem};
use crate::modelspace::{bernstein_bound, derivative_operator_norm, malmquist_basis, t_operator_norm};
use crate::spaces::SpaceSpec;

#[derive(Debug, Parser)]
#[command(
    name = "discinterp",
    version,
    about = "Interpolation constants on finite subsets of the unit disc"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for every randomized search
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Relative tolerance for bisection and search termination
    #[arg(long, global = true, default_value_t = crate::extremal::DEFAULT_TOL)]
    pub tol: f64,

    /// Omit the timestamp from the provenance header
    #[arg(long, global = true)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Hardy,
    Seq,
    Bergman,
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    #[arg(long, value_enum, default_value_t = Family::Hardy)]
    pub space: Family,
    /// Exponent p in [1, inf]
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Weight exponent of the sequence spaces
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Radial weight exponent of the Bergman spaces
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
}

impl SpaceArgs {
    pub fn spec(&self) -> Result<SpaceSpec> {
        let spec = match self.space {
            Family::Hardy => SpaceSpec::Hardy { p: self.p },
            Family::Seq => SpaceSpec::SeqWeighted {
                p: self.p,
                alpha: self.alpha,
            },
            Family::Bergman => SpaceSpec::BergmanRadial {
                p: self.p,
                beta: self.beta,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SigmaArgs {
    /// Points of σ, comma separated (repeat a point for multiplicity)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex_arg, conflicts_with = "sigma_file")]
    pub sigma: Vec<C64>,
    /// File with one `re im [multiplicity]` point per line
    #[arg(long)]
    pub sigma_file: Option<PathBuf>,
}

impl SigmaArgs {
    pub fn load(&self) -> Result<SigmaSet> {
        let points = match &self.sigma_file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
                parse_sigma_file(&text)?
            }
            None => self.sigma.clone(),
        };
        if points.is_empty() {
            return Err(Error::InvalidInput("σ is empty: pass --sigma or --sigma-file".into()));
        }
        SigmaSet::new(points)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients of the Malmquist basis of K_B
    Basis {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Series truncation (adaptive when omitted)
        #[arg(long)]
        truncation: Option<usize>,
        /// Number of leading coefficients to print per basis function
        #[arg(long, default_value_t = 16)]
        coeffs: usize,
    },
    /// Norm of the k-th derivative on K_B against k!(5n/(2(1-r)))^k
    Bernstein {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Minimal H∞ norm of an interpolant of values at distinct nodes
    Pick {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex_arg)]
        nodes: Vec<C64>,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex_arg)]
        values: Vec<C64>,
    },
    /// Minimal H∞ norm with prescribed leading Taylor coefficients
    Cs {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex_arg)]
        coeffs: Vec<C64>,
    },
    /// Quotient norm of f modulo B H∞
    Quotient {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Taylor coefficients of f
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex_arg)]
        f: Vec<C64>,
    },
    /// Multistart estimate of the Carleson interpolation constant
    Carleson {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = crate::extremal::DEFAULT_CARLESON_BUDGET)]
        budget: usize,
    },
    /// Estimate of c(σ, X, H∞) for a Hilbert space X
    Constant {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = crate::constants::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Closed-form bounds on C_{n,r}(X, H∞)
    Bounds {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
    },
    /// Bounds, witnesses and estimates over an (n, r) grid
    Sweep {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, required = true, value_delimiter = ',')]
        n_grid: Vec<usize>,
        #[arg(long, required = true, value_delimiter = ',')]
        r_grid: Vec<f64>,
        #[arg(long, default_value_t = crate::constants::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = crate::constants::DEFAULT_ESTIMATE_MAX_N)]
        estimate_max_n: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Basis { .. } => "basis",
            Command::Bernstein { .. } => "bernstein",
            Command::Pick { .. } => "pick",
            Command::Cs { .. } => "cs",
            Command::Quotient { .. } => "quotient",
            Command::Carleson { .. } => "carleson",
            Command::Constant { .. } => "constant",
            Command::Bounds { .. } => "bounds",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`); `i` alone is the unit.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse complex number `{s}`");
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return f64::from_str(&t).map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that does not belong to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => f64::from_str(other).map_err(|_| bad())?,
    };
    let re = f64::from_str(re).map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn parse_complex_arg(s: &str) -> std::result::Result<C64, String> {
    parse_complex(s)
}

/// Sigma file: one `re im [multiplicity]` point per line, `#` starts a comment.
pub fn parse_sigma_file(text: &str) -> Result<Vec<C64>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::InvalidInput(format!("sigma file line {}: `{line}`", lineno + 1));
        if !(2..=3).contains(&fields.len()) {
            return Err(bad());
        }
        let re = f64::from_str(fields[0]).map_err(|_| bad())?;
        let im = f64::from_str(fields[1]).map_err(|_| bad())?;
        let mult = match fields.get(2) {
            Some(m) => usize::from_str(m).map_err(|_| bad())?,
            None => 1,
        };
        if mult == 0 {
            return Err(bad());
        }
        points.extend(std::iter::repeat_n(C64::new(re, im), mult));
    }
    Ok(points)
}

/// Provenance block: csv comment lines or the json `metadata` object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<R> {
    pub metadata: Provenance,
    pub records: Vec<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRow {
    pub k: usize,
    pub degree: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinRow {
    pub n: usize,
    pub r: f64,
    pub order: usize,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRow {
    pub n: usize,
    pub r: f64,
    pub value: f64,
    /// Smallest eigenvalue of the certifying Pick matrix (Pick problems only).
    pub certificate: Option<f64>,
    /// Search starts used (randomized commands only).
    pub starts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub n: usize,
    pub r: f64,
    pub value: f64,
    pub starts: usize,
    pub t_norm: f64,
}

enum Records {
    Basis(Vec<BasisRow>),
    Bernstein(Vec<BernsteinRow>),
    Value(Vec<ValueRow>),
    Constant(Vec<ConstantRow>),
    Bounds(Vec<BoundReport>),
}

fn as_json<T: Serialize>(v: T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn single(n: usize, r: f64, value: f64, certificate: Option<f64>, starts: Option<usize>) -> Records {
    Records::Value(vec![ValueRow {
        n,
        r,
        value,
        certificate,
        starts,
    }])
}

fn pick_certificate(c: &Certificate) -> Option<f64> {
    match c {
        Certificate::Pick { min_eigenvalue, .. } => Some(*min_eigenvalue),
        Certificate::Toeplitz { .. } => None,
    }
}

fn execute(cli: &Cli, extra: &mut BTreeMap<String, serde_json::Value>) -> Result<Records> {
    Ok(match &cli.command {
        Command::Basis {
            sigma,
            truncation,
            coeffs,
        } => {
            let sigma = sigma.load()?;
            let basis = malmquist_basis(&sigma, *truncation)?;
            let gram = basis.gram();
            let n = gram.nrows();
            let defect = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (gram[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm())
                .fold(0.0, f64::max);
            extra.insert("truncation".into(), as_json(basis.truncation()));
            extra.insert("orthonormality_defect".into(), as_json(defect));
            let rows = basis
                .basis()
                .iter()
                .enumerate()
                .flat_map(|(k, e)| {
                    (0..*coeffs).map(move |d| {
                        let c = e.coeff(d);
                        BasisRow {
                            k: k + 1,
                            degree: d,
                            re: c.re,
                            im: c.im,
                        }
                    })
                })
                .collect();
            Records::Basis(rows)
        }
        Command::Bernstein { sigma, order } => {
            let sigma = sigma.load()?;
            let norm = derivative_operator_norm(&sigma, *order)?;
            Records::Bernstein(vec![BernsteinRow {
                n: sigma.n(),
                r: sigma.r(),
                order: *order,
                norm,
                bound: bernstein_bound(sigma.n(), sigma.r(), *order),
            }])
        }
        Command::Pick { nodes, values } => {
            let problem = PickProblem::new(nodes.clone(), values.clone())?;
            let res = pick_min_norm(&problem, cli.tol)?;
            let r = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max);
            single(nodes.len(), r, res.value, pick_certificate(&res.certificate), None)
        }
        Command::Cs { coeffs } => single(coeffs.len(), 0.0, cs_min_norm(coeffs)?.value, None, None),
        Command::Quotient { sigma, f } => {
            let sigma = sigma.load()?;
            let res = quotient_norm(&CoeffSeries::new(f.clone()), &sigma, cli.tol)?;
            single(
                sigma.n(),
                sigma.r(),
                res.value,
                pick_certificate(&res.certificate),
                None,
            )
        }
        Command::Carleson { sigma, budget } => {
            let sigma = sigma.load()?;
            let est = carleson_constant(&sigma, cli.tol, *budget, cli.seed)?;
            single(sigma.n(), sigma.r(), est.value, None, Some(est.starts))
        }
        Command::Constant { space, sigma, budget } => {
            let space = space.spec()?;
            let sigma = sigma.load()?;
            extra.insert("space".into(), as_json(space));
            let opts = ConstantOptions {
                budget: *budget,
                tol: cli.tol,
                seed: cli.seed,
            };
            let est = interp_constant(&space, &sigma, &opts)?;
            Records::Constant(vec![ConstantRow {
                n: sigma.n(),
                r: sigma.r(),
                value: est.value,
                starts: est.starts,
                t_norm: t_operator_norm(&space, &sigma)?,
            }])
        }
        Command::Bounds { space, n, r } => {
            let space = space.spec()?;
            extra.insert("space".into(), as_json(space));
            Records::Bounds(vec![theorem_bounds(&space, *n, *r)?])
        }
        Command::Sweep {
            space,
            n_grid,
            r_grid,
            budget,
            estimate_max_n,
        } => {
            let space = space.spec()?;
            extra.insert("space".into(), as_json(space));
            let opts = SweepOptions {
                budget: *budget,
                tol: cli.tol,
                seed: cli.seed,
                estimate_max_n: *estimate_max_n,
            };
            let report = cnr_sweep(&space, n_grid, r_grid, &opts)?;
            extra.insert("slope_witness".into(), as_json(report.slope_witness));
            extra.insert("slope_estimate".into(), as_json(report.slope_estimate));
            Records::Bounds(report.rows)
        }
    })
}

fn csv_body<R: Serialize>(records: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn render<R: Serialize>(format: Format, meta: &Provenance, records: &[R]) -> Result<String> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "metadata": meta, "records": records });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = format!(
                "# {} {}\n# command: {}\n# seed: {}\n# tol: {:e}\n",
                meta.tool, meta.version, meta.command, meta.seed, meta.tol
            );
            if let Some(t) = meta.generated_unix {
                s.push_str(&format!("# generated_unix: {t}\n"));
            }
            for (k, v) in &meta.extra {
                s.push_str(&format!("# {k}: {v}\n"));
            }
            s.push_str(&csv_body(records)?);
            Ok(s)
        }
    }
}

/// Runs a parsed command and returns the rendered artifact.
pub fn run(cli: &Cli) -> Result<String> {
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Error::InvalidInput(format!("--tol {} must lie in (0, 1)", cli.tol)));
    }
    let mut extra = BTreeMap::new();
    let records = execute(cli, &mut extra)?;
    let meta = Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        seed: cli.seed,
        tol: cli.tol,
        generated_unix: (!cli.reproducible).then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
        extra,
    };
    match records {
        Records::Basis(r) => render(cli.format, &meta, &r),
        Records::Bernstein(r) => render(cli.format, &meta, &r),
        Records::Value(r) => render(cli.format, &meta, &r),
        Records::Constant(r) => render(cli.format, &meta, &r),
        Records::Bounds(r) => render(cli.format, &meta, &r),
    }
}

/// Process entry point; returns the exit code (0 ok, 1 invalid input, 2 numerical failure).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let text = match run(&cli) {
        Ok(text) => text,
        Err(e) => {
            let code = if e.is_numerical() { 2 } else { 1 };
            eprintln!(
                "error: {e} [command={} seed={} tol={:e}]",
                cli.command.name(),
                cli.seed,
                cli.tol
            );
            return code;
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        let cases = [
            ("0.3+0.2i", C64::new(0.3, 0.2)),
            ("0.3-0.2i", C64::new(0.3, -0.2)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("0.5", C64::new(0.5, 0.0)),
            ("-2.5j", C64::new(0.0, -2.5)),
            ("1e-3+2E-1i", C64::new(1e-3, 0.2)),
            (" 0.1 - i ", C64::new(0.1, -1.0)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        for s in ["", "abc", "1+", "0.3+0.2k", "i+1"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn sigma_file_parsing() {
        let pts = parse_sigma_file("# nodes\n0.5 0 2\n\n-0.1 0.2 # inline\n").unwrap();
        assert_eq!(pts, vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(-0.1, 0.2)]);
        assert!(parse_sigma_file("0.5\n").is_err());
        assert!(parse_sigma_file("0.5 0 0\n").is_err());
    }

    #[test]
    fn unknown_flags_rejected() {
        assert!(Cli::try_parse_from(["discinterp", "cs", "--coeffs", "1", "--bogus"]).is_err());
        assert_eq!(main_with_args(["discinterp", "cs", "--coeffs", "1", "--bogus"]), 1);
    }

    #[test]
    fn exit_codes() {
        let out = tempfile::NamedTempFile::new().unwrap();
        let path = out.path().to_str().unwrap();
        assert_eq!(
            main_with_args(["discinterp", "cs", "--coeffs", "1,1", "--output", path]),
            0
        );
        assert_eq!(
            main_with_args(["discinterp", "pick", "--nodes", "1.5", "--values", "1"]),
            1
        );
        assert_eq!(main_with_args(["discinterp", "bounds", "--n", "0", "--r", "0.5"]), 1);
    }
}
