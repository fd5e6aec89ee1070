use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use symnef::combinatorics::Partition;
use symnef::cone::{extremal_rays_with_limit, DEFAULT_RAY_LIMIT};
use symnef::divisor::{f_from_symmetric, is_fnef, FNefVerdict, SymmetricDivisor};
use symnef::io;
use symnef::pipeline::{certify, certify_exhaustive, conjecture_bound, verify, Mode};
use symnef::pullback::{pullback, Pullback};

#[derive(Parser)]
#[command(name = "symnef", version, about = "Certify nefness of symmetric divisors on M_{0,n}")]
struct Cli {
    /// Report format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check every F-inequality of a divisor.
    CheckFnef { divisor: PathBuf },
    /// Build a nefness certificate.
    Certify {
        divisor: PathBuf,
        #[arg(long, default_value = "all")]
        mode: Mode,
        /// Certificate path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Report every failing partition instead of the first.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Independently check a certificate file.
    Verify { certificate: PathBuf },
    /// Enumerate the extremal rays of the symmetric F-nef cone.
    Rays {
        #[arg(long)]
        n: usize,
        /// Rays file path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Abort once this many intermediate rays are held.
        #[arg(long, default_value_t = DEFAULT_RAY_LIMIT)]
        max_rays: usize,
    },
    /// Print the boundary coefficients of a stratum pullback.
    Pullback {
        divisor: PathBuf,
        #[arg(long)]
        lambda: Partition,
    },
    /// Largest n covered when strict partitions have length at most k.
    Bound {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: symnef::Error },
    #[error(transparent)]
    Core(#[from] symnef::Error),
}

/// A report for stdout plus its exit status.
struct Outcome {
    ok: bool,
    json: Value,
    text: String,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome { ok: true, json, text }
    }

    fn failure(json: Value, text: String) -> Self {
        Outcome { ok: false, json, text }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

fn read_divisor(path: &Path) -> Result<SymmetricDivisor, CliError> {
    io::parse_divisor(&read(path)?).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, contents).map_err(|source| CliError::Write { path: path.to_owned(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn run(command: Command) -> Result<Option<Outcome>, CliError> {
    match command {
        Command::CheckFnef { divisor } => {
            let d = read_divisor(&divisor)?;
            let verdict = is_fnef(&d);
            let json = io::fnef_value(&verdict);
            Ok(Some(match verdict {
                FNefVerdict::Yes => Outcome::ok(json, "F-nef".into()),
                FNefVerdict::No { witness, value } => {
                    Outcome::failure(json, format!("not F-nef: F-curve {witness} has degree {value}"))
                }
            }))
        }
        Command::Certify { divisor, mode, output, exhaustive } => {
            let d = read_divisor(&divisor)?;
            let result = if exhaustive { certify_exhaustive(&d, mode) } else { certify(&d, mode) };
            match result {
                Ok(cert) => {
                    let emitted = io::emit_certificate(&cert);
                    write_output(output.as_deref(), &emitted)?;
                    match output {
                        Some(path) => {
                            let text = format!("certified {} entries ({} mode) to {}", cert.entries.len(), mode, path.display());
                            let json = json!({
                                "status": "ok",
                                "mode": mode.as_str(),
                                "entries": cert.entries.len(),
                                "output": path.display().to_string(),
                            });
                            Ok(Some(Outcome::ok(json, text)))
                        }
                        None => Ok(None),
                    }
                }
                Err(report) => {
                    let text = report.failures.iter().map(|f| format!("{}: {f}", f.stage())).collect::<Vec<_>>().join("\n");
                    Ok(Some(Outcome::failure(io::failure_report_value(&report), text)))
                }
            }
        }
        Command::Verify { certificate } => {
            let cert = io::parse_certificate(&read(&certificate)?)
                .map_err(|source| CliError::Parse { path: certificate.clone(), source })?;
            Ok(Some(match verify(&cert) {
                Ok(()) => Outcome::ok(
                    json!({"status": "ok", "entries": cert.entries.len()}),
                    format!("ok: {} entries verified", cert.entries.len()),
                ),
                Err(d) => Outcome::failure(
                    json!({"status": "failure", "discrepancy": io::discrepancy_value(&d)}),
                    format!("discrepancy: {d}"),
                ),
            }))
        }
        Command::Rays { n, output, max_rays } => {
            let cone = extremal_rays_with_limit(n, max_rays)?;
            let count = cone.rays.as_ref().map_or(0, Vec::len);
            let value = io::rays_value(&cone);
            match output {
                Some(path) => {
                    write_output(Some(&path), &io::to_pretty(&value))?;
                    let json = json!({
                        "status": "ok",
                        "n": n,
                        "rays": count,
                        "facets": cone.facets.len(),
                        "output": path.display().to_string(),
                    });
                    let text = format!("{count} rays, {} facets for n = {n} written to {}", cone.facets.len(), path.display());
                    Ok(Some(Outcome::ok(json, text)))
                }
                None => {
                    let text = value["rays"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join("\n");
                    Ok(Some(Outcome::ok(value, text)))
                }
            }
        }
        Command::Pullback { divisor, lambda } => {
            let d = read_divisor(&divisor)?;
            let f = f_from_symmetric(&d);
            Ok(Some(match pullback(&f, &lambda)? {
                Pullback::Degenerate => Outcome::ok(json!({}), format!("stratum {lambda} is degenerate")),
                Pullback::Expression(expr) => {
                    let text = expr.splits().map(|(s, b)| format!("{s}\t{b}")).collect::<Vec<_>>().join("\n");
                    Outcome::ok(io::pullback_value(&expr), text)
                }
            }))
        }
        Command::Bound { k } => {
            let n = conjecture_bound(k)?;
            Ok(Some(Outcome::ok(json!({"k": k, "n": n}), format!("strict partitions of length at most {k} cover n <= {n}"))))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            if let Some(outcome) = &outcome {
                match cli.format {
                    Format::Json => print!("{}", io::to_pretty(&outcome.json)),
                    Format::Text => println!("{}", outcome.text),
                }
            }
            if outcome.is_none_or(|o| o.ok) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
