//! `mqg validate | verify | example`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::examples::{gen_product_pair_groupoid, gen_transformation_matched_pair, GroupMatchedPair, ProductSpace};
use crate::matched_pair::MatchedPairDesc;
use crate::report::Report;
use crate::suite::{axiom_suite, is_input_error, validation_stages, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "mqg", version, about = "Build and check measured quantum groupoids of finite matched pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Groupoid, Haar system and matched-pair validation only.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// The full staged axiom suite.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Modular flow sample times.
        #[arg(long, value_delimiter = ',', default_value = "0.37,1.0")]
        times: Vec<f64>,
        /// Stages, check names or name components to keep.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Write a generated matched-pair file.
    Example {
        name: String,
        #[command(flatten)]
        params: ExampleParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct ExampleParams {
    #[arg(long, default_value_t = 2)]
    pub x1: usize,
    #[arg(long, default_value_t = 2)]
    pub x2: usize,
    #[arg(long, default_value = "s3")]
    pub group: String,
    /// Size of the space acted on: 1, 3 or 6.
    #[arg(long, default_value_t = 3)]
    pub space: usize,
    /// Unit weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
}

pub fn read_desc(path: &Path) -> Result<MatchedPairDesc> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))
}

pub fn example_desc(name: &str, p: &ExampleParams) -> Result<MatchedPairDesc> {
    let nu = (!p.nu.is_empty()).then(|| p.nu.clone());
    let s3 = |space| {
        if p.group != "s3" {
            return Err(Error::UnknownExample(format!("group `{}`", p.group)));
        }
        GroupMatchedPair::s3(space, nu.clone())
    };
    match name {
        "trivial" => gen_transformation_matched_pair(&GroupMatchedPair::trivial()),
        "group-pair" => gen_transformation_matched_pair(&s3(1)?),
        "transformation" => gen_transformation_matched_pair(&s3(p.space)?),
        "product-pair" => {
            let mut ps = ProductSpace::letters(p.x1, p.x2)?;
            if let Some(nu) = nu {
                if nu.len() != p.x1 + p.x2 {
                    return Err(Error::ParseError(format!("expected {} weights for X1 then X2, got {}", p.x1 + p.x2, nu.len())));
                }
                ps.nu1 = nu[..p.x1].to_vec();
                ps.nu2 = nu[p.x1..].to_vec();
            }
            Ok(gen_product_pair_groupoid(&ps))
        }
        other => Err(Error::UnknownExample(other.into())),
    }
}

fn render(rep: &Report, format: Format) -> String {
    match format {
        Format::Text => rep.to_string(),
        Format::Json => serde_json::to_string_pretty(rep).expect("report serializes") + "\n",
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::ParseError(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::ParseError(e.to_string())),
    }
}

fn exit_for(rep: &Report) -> i32 {
    if rep.pass() {
        0
    } else {
        1
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::ParseError(format!("tolerance must be positive, got {tol}")))
    }
}

/// Runs a parsed command; returns the process exit code. Input errors are reported on `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Validate { input, out, tol } => check_tol(tol).and_then(|_| read_desc(&input)).and_then(|d| {
            let (stages, _) = validation_stages(&d, tol);
            let rep = Report::from_stages(stages);
            emit(&render(&rep, out.format), out.out.as_deref(), stdout).map(|_| exit_for(&rep))
        }),
        Command::Verify { input, out, tol, times, checks } => check_tol(tol).and_then(|_| read_desc(&input)).and_then(|d| {
            let cfg = SuiteConfig { tol, times, select: checks };
            let rep = axiom_suite(&d, &cfg);
            if rep.stages.is_empty() {
                return Err(Error::ParseError(format!("no check matches {:?}", cfg.select)));
            }
            emit(&render(&rep, out.format), out.out.as_deref(), stdout).map(|_| exit_for(&rep))
        }),
        Command::Example { name, params, out } => example_desc(&name, &params).and_then(|d| {
            let text = serde_json::to_string_pretty(&d).expect("description serializes") + "\n";
            emit(&text, out.as_deref(), stdout).map(|_| 0)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if is_input_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, stdout, stderr),
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            2
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("mqg").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn example_round_trips_through_validate() {
        let dir = tempfile::tempdir().unwrap();
        for (name, extra) in [("trivial", vec![]), ("product-pair", vec!["--x1", "2", "--x2", "1"]), ("group-pair", vec![])] {
            let path = dir.path().join(format!("{name}.json"));
            let mut args = vec!["example", name, "--out", path.to_str().unwrap()];
            args.extend(extra);
            assert_eq!(call(&args).0, 0);
            let (code, out, _) = call(&["validate", path.to_str().unwrap()]);
            assert_eq!(code, 0, "{out}");
        }
    }

    #[test]
    fn unknown_example_is_input_error() {
        let (code, _, err) = call(&["example", "moebius"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown example"));
    }

    #[test]
    fn bad_tolerance_rejected() {
        assert_eq!(call(&["verify", "missing.json", "--tol", "-1"]).0, 2);
    }
}
