use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use simplex_tensor::basins::{self, Parametrization};
use simplex_tensor::dynamics::{canonical_table, classify_all, tpi_run, CanonicalTable, Classification, TpiOptions};
use simplex_tensor::eigenstructure::{enumerate_barycentric, enumerate_eigenpairs, EigenStructure, SolutionKind};
use simplex_tensor::oracle::{brute_force_zeros, compare_with_enumeration, DEFAULT_GRID};
use simplex_tensor::output::{float, to_json};
use simplex_tensor::verify::verify;
use simplex_tensor::{Error, SimplexFrame, SimplexTensor};

const EXIT_INVALID: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_IO: u8 = 4;

/// Eigenstructure, robustness and basins of regular simplex tensors.
#[derive(Debug, Parser)]
#[command(name = "simplex-tensor", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Seed for every randomized check.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Shape {
    /// Ambient dimension (number of frame vectors is n + 1).
    #[arg(long)]
    n: usize,
    /// Tensor order.
    #[arg(long)]
    d: usize,
}

#[derive(Debug, Args)]
struct Iteration {
    /// Convergence tolerance on successive iterates.
    #[arg(long, default_value_t = simplex_tensor::dynamics::DEFAULT_TOL)]
    tol: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = simplex_tensor::dynamics::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the simplex frame vectors and their Gramian.
    Frame {
        #[arg(long)]
        n: usize,
    },
    /// List every normalized eigenpair.
    Enumerate(Shape),
    /// Spectral radius and robustness class of every canonical eigenvector.
    Classify(Shape),
    /// Run one tensor power iteration.
    Tpi {
        #[command(flatten)]
        shape: Shape,
        /// Start vector, comma separated; normalized before use.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        start: Vec<f64>,
        #[command(flatten)]
        iteration: Iteration,
    },
    /// Brute-force zeros of the barycentric system, matched against the enumeration.
    Oracle {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Rasterize basins of attraction on the circle (n = 2) or sphere (n = 3).
    Basins {
        #[command(flatten)]
        shape: Shape,
        /// Cells on the circle, or polar rows on the sphere.
        #[arg(long)]
        resolution: usize,
        /// Azimuth columns on the sphere (default 2 × resolution).
        #[arg(long)]
        res_phi: Option<usize>,
        /// PPM output path.
        #[arg(long)]
        out: PathBuf,
        /// CSV sidecar path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also render a circle map as a square annulus image of this size.
        #[arg(long)]
        disk: Option<usize>,
        #[command(flatten)]
        iteration: Iteration,
    },
    /// Run all consistency checks and report PASS/FAIL per check.
    Verify(Shape),
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Verification { report: String, message: String },
    Io(io::Error),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::Io(io),
            Error::InvalidDimension(_)
            | Error::InvalidOrder(_)
            | Error::InvalidInput(_)
            | Error::Domain(_)
            | Error::Capacity { .. } => Failure::Invalid(e.to_string()),
            other => Failure::Library(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Verification { .. } | Failure::Library(_) => EXIT_VERIFY,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

fn check_shape(shape: &Shape) -> std::result::Result<(), Failure> {
    if shape.n < 2 {
        return Err(Failure::Invalid(format!("--n must be at least 2, got {}", shape.n)));
    }
    if shape.d < 2 {
        return Err(Failure::Invalid(format!("--d must be at least 2, got {}", shape.d)));
    }
    Ok(())
}

fn options(iteration: &Iteration) -> std::result::Result<TpiOptions, Failure> {
    if !(iteration.tol > 0.0) {
        return Err(Failure::Invalid(format!("--tol must be positive, got {}", iteration.tol)));
    }
    if iteration.max_iter == 0 {
        return Err(Failure::Invalid("--max-iter must be positive".into()));
    }
    Ok(TpiOptions {
        tol: iteration.tol,
        max_iter: iteration.max_iter,
    })
}

fn unsupported(format: Format, command: &str) -> Failure {
    Failure::Invalid(format!("--format {format:?} is not available for {command}").to_lowercase())
}

fn floats(v: impl IntoIterator<Item = f64>) -> Vec<String> {
    v.into_iter().map(float).collect()
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn support_json(kind: &SolutionKind) -> Value {
    match kind {
        SolutionKind::UniformOnK { support } => json!({"kind": "uniform", "indices": one_based(support)}),
        SolutionKind::TwoLevel {
            low,
            high,
            s_low,
            s_high,
        } => json!({
            "kind": "two_level",
            "low": one_based(low),
            "high": one_based(high),
            "s_low": s_low,
            "s_high": s_high,
        }),
    }
}

fn support_label(kind: &SolutionKind) -> String {
    let list = |v: &[usize]| {
        one_based(v)
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    match kind {
        SolutionKind::UniformOnK { support } => format!("{{{}}}", list(support)),
        SolutionKind::TwoLevel { low, high, .. } => format!("{{{}}}<{{{}}}", list(low), list(high)),
    }
}

fn frame(n: usize, format: Format) -> Outcome {
    let frame = SimplexFrame::new(n)?;
    let vectors: Vec<Vec<f64>> = (0..frame.len())
        .map(|k| frame.vector(k).iter().copied().collect())
        .collect();
    let gram = frame.gramian();
    Ok(match format {
        Format::Json => {
            let gramian: Vec<Vec<f64>> = gram.row_iter().map(|r| r.iter().copied().collect()).collect();
            to_json(&json!({"n": n, "vectors": vectors, "gramian": gramian}))? + "\n"
        }
        Format::Csv => vectors
            .iter()
            .map(|v| floats(v.iter().copied()).join(",") + "\n")
            .collect(),
        Format::Table => {
            let mut out = format!("simplex frame, n = {n}\n");
            for (k, v) in vectors.iter().enumerate() {
                out += &format!("v{:<3} {}\n", k + 1, floats(v.iter().copied()).join("  "));
            }
            out += "gramian\n";
            for row in gram.row_iter() {
                out += &format!("     {}\n", floats(row.iter().copied()).join("  "));
            }
            out
        }
    })
}

fn enumerate(shape: &Shape, format: Format) -> Outcome {
    let structure = enumerate_eigenpairs(shape.n, shape.d)?;
    let pairs = structure.pairs();
    Ok(match format {
        Format::Json => {
            let value = match &structure {
                EigenStructure::WholeSphere { eigenvalue } => {
                    json!({"kind": "whole_sphere", "mu": eigenvalue, "pairs": []})
                }
                EigenStructure::Discrete { families, .. } => {
                    let pairs: Vec<Value> = pairs
                        .iter()
                        .map(|p| {
                            json!({
                                "vector": p.vector.as_slice(),
                                "mu": p.eigenvalue,
                                "support": support_json(&p.source.kind),
                                "residual": p.residual,
                            })
                        })
                        .collect();
                    let mut value = json!({"kind": "discrete", "pairs": pairs});
                    if !families.is_empty() {
                        let curves: Vec<Value> = families
                            .iter()
                            .map(|f| {
                                let (lo, hi) = f.range();
                                json!({"low": one_based(f.low()), "high": one_based(f.high()), "s_low_range": [lo, hi]})
                            })
                            .collect();
                        value["curves"] = Value::Array(curves);
                    }
                    value
                }
            };
            to_json(&value)? + "\n"
        }
        Format::Csv => pairs
            .iter()
            .map(|p| {
                let mut fields = floats(p.vector.iter().copied());
                fields.push(float(p.eigenvalue));
                fields.push(float(p.residual));
                fields.join(",") + "\n"
            })
            .collect(),
        Format::Table => match &structure {
            EigenStructure::WholeSphere { eigenvalue } => format!(
                "n = {}, d = {}: every unit vector is an eigenvector, mu = {}\n",
                shape.n,
                shape.d,
                float(*eigenvalue)
            ),
            EigenStructure::Discrete { families, .. } => {
                let mut out = format!(
                    "n = {}, d = {}: {} eigenvector lines, {} normalized eigenpairs\n",
                    shape.n,
                    shape.d,
                    pairs.len(),
                    2 * pairs.len()
                );
                for (i, p) in pairs.iter().enumerate() {
                    out += &format!(
                        "{:>4}  mu {:>24}  residual {}  support {}  v = ({})\n",
                        i,
                        float(p.eigenvalue),
                        float(p.residual),
                        support_label(&p.source.kind),
                        floats(p.vector.iter().copied()).join(", ")
                    );
                }
                for f in families {
                    let (lo, hi) = f.range();
                    out += &format!(
                        "curve: levels {} < {}, s_low in ({}, {})\n",
                        support_label(&SolutionKind::UniformOnK { support: f.low().to_vec() }),
                        support_label(&SolutionKind::UniformOnK { support: f.high().to_vec() }),
                        float(lo),
                        float(hi)
                    );
                }
                out
            }
        },
    })
}

fn classify(shape: &Shape, format: Format) -> Outcome {
    let table = canonical_table(shape.n, shape.d)?;
    let radius = |r: Option<f64>| r.map(float).unwrap_or_else(|| "--".into());
    Ok(match (&table, format) {
        (CanonicalTable::Continuum { eigenvalue, spectral_radius }, Format::Json) => {
            to_json(&json!({"kind": "whole_sphere", "mu": eigenvalue, "rho": spectral_radius, "class": "marginal"}))? + "\n"
        }
        (CanonicalTable::Continuum { eigenvalue, spectral_radius }, Format::Csv) => {
            format!("label,mu,rho,class\nwhole sphere,{},{},marginal\n", float(*eigenvalue), float(*spectral_radius))
        }
        (CanonicalTable::Continuum { eigenvalue, spectral_radius }, Format::Table) => format!(
            "n = {}, d = {}: every unit vector is an eigenvector, mu = {}, rho = {}\n",
            shape.n,
            shape.d,
            float(*eigenvalue),
            float(*spectral_radius)
        ),
        (CanonicalTable::Rows(rows), Format::Json) => {
            let Classification::Discrete { records, .. } = classify_all(shape.n, shape.d)? else {
                unreachable!("canonical table and classification disagree on the continuum")
            };
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| json!({"label": r.label, "mu": r.eigenvalue, "rho": r.spectral_radius, "class": r.class.as_str()}))
                .collect();
            let lines: Vec<Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "vector": r.pair.vector.as_slice(),
                        "mu": r.pair.eigenvalue,
                        "rho": r.spectral_radius,
                        "class": r.class.as_str(),
                    })
                })
                .collect();
            to_json(&json!({"kind": "discrete", "rows": rows, "lines": lines}))? + "\n"
        }
        (CanonicalTable::Rows(rows), Format::Csv) => {
            let mut out = String::from("label,mu,rho,class\n");
            for r in rows {
                out += &format!(
                    "\"{}\",{},{},{}\n",
                    r.label,
                    float(r.eigenvalue),
                    r.spectral_radius.map(float).unwrap_or_default(),
                    r.class.as_str()
                );
            }
            out
        }
        (CanonicalTable::Rows(rows), Format::Table) => {
            let width = rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(0).max(5);
            let mut out = format!("{:<width$}  {:>24}  {:>24}  class\n", "s", "mu", "rho");
            for r in rows {
                out += &format!(
                    "{:<width$}  {:>24}  {:>24}  {}\n",
                    r.label,
                    float(r.eigenvalue),
                    radius(r.spectral_radius),
                    r.class.as_str()
                );
            }
            out
        }
    })
}

fn tpi(shape: &Shape, start: &[f64], iteration: &Iteration, format: Format) -> Outcome {
    let options = options(iteration)?;
    if start.len() != shape.n {
        return Err(Failure::Invalid(format!(
            "--start has {} components, expected {}",
            start.len(),
            shape.n
        )));
    }
    let x0 = DVector::from_column_slice(start);
    let norm = x0.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Failure::Invalid("--start must be a nonzero finite vector".into()));
    }
    let tensor = SimplexTensor::regular(shape.n, shape.d)?;
    let structure = enumerate_eigenpairs(shape.n, shape.d)?;
    let run = tpi_run(&tensor, Some(&structure), &(x0 / norm), options)?;
    let matched = run.matched.map(|m| {
        let pair = &structure.pairs()[m.pair];
        (m, if m.negated && shape.d % 2 == 1 { -pair.eigenvalue } else { pair.eigenvalue })
    });
    let status = serde_json::to_value(run.status)?;
    let status = status.as_str().unwrap_or_default().to_string();
    Ok(match format {
        Format::Json => {
            let value = json!({
                "status": status,
                "iterations": run.iterations,
                "limit": run.limit.as_ref().map(|l| l.as_slice().to_vec()),
                "pair": matched.map(|(m, _)| m.pair),
                "limit_index": matched.map(|(m, _)| m.limit_index()),
                "mu": matched.map(|(_, mu)| mu),
            });
            to_json(&value)? + "\n"
        }
        Format::Csv => return Err(unsupported(format, "tpi")),
        Format::Table => {
            let mut out = format!("status {status}\niterations {}\n", run.iterations);
            if let Some(limit) = &run.limit {
                out += &format!("limit ({})\n", floats(limit.iter().copied()).join(", "));
            }
            match matched {
                Some((m, mu)) => {
                    out += &format!(
                        "eigenpair {} ({}), limit index {}, mu {}\n",
                        m.pair,
                        if m.negated { "-v" } else { "+v" },
                        m.limit_index(),
                        float(mu)
                    )
                }
                None if structure.is_whole_sphere() => out += "every unit vector is an eigenvector\n",
                None => out += "no enumerated eigenpair matched\n",
            }
            out
        }
    })
}

fn oracle(shape: &Shape, grid: usize, seed: u64, format: Format) -> Outcome {
    let zeros = brute_force_zeros(shape.n, shape.d, grid, seed)?;
    let enumeration = enumerate_barycentric(shape.n, shape.d)?;
    let report = compare_with_enumeration(&zeros, &enumeration);
    Ok(match format {
        Format::Json => {
            let value = json!({
                "n": shape.n,
                "d": shape.d,
                "grid": grid,
                "continuum": zeros.continuum,
                "zeros": zeros.zeros,
                "residuals": zeros.residuals,
                "candidates": zeros.candidates,
                "warnings": zeros.warnings,
                "report": {
                    "matched": report.matched.iter().map(|m| json!({"oracle": m.0, "enumeration": m.1, "distance": m.2})).collect::<Vec<_>>(),
                    "unmatched_oracle": report.unmatched_oracle,
                    "unmatched_enumeration": report.unmatched_enumeration,
                    "continuum_agrees": report.continuum_agrees,
                    "clean": report.is_clean(),
                },
            });
            to_json(&value)? + "\n"
        }
        Format::Csv => {
            let mut out = String::new();
            for (z, r) in zeros.zeros.iter().zip(&zeros.residuals) {
                let mut fields = floats(z.iter().copied());
                fields.push(float(*r));
                out += &(fields.join(",") + "\n");
            }
            out
        }
        Format::Table => {
            let mut out = format!(
                "n = {}, d = {}, grid {}: {} candidates, {} zeros, {} dropped\n",
                shape.n,
                shape.d,
                grid,
                zeros.candidates,
                zeros.zeros.len(),
                zeros.warnings
            );
            if zeros.continuum {
                out += "h vanishes at every sample: continuum\n";
            }
            for (z, r) in zeros.zeros.iter().zip(&zeros.residuals) {
                out += &format!("({})  |h| {}\n", floats(z.iter().copied()).join(", "), float(*r));
            }
            out += &format!(
                "matched {}, unmatched oracle {}, unmatched enumeration {}, continuum agrees {}\n",
                report.matched.len(),
                report.unmatched_oracle.len(),
                report.unmatched_enumeration.len(),
                report.continuum_agrees
            );
            out
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn basins_command(
    shape: &Shape,
    resolution: usize,
    res_phi: Option<usize>,
    out: &PathBuf,
    csv: Option<&PathBuf>,
    disk: Option<usize>,
    iteration: &Iteration,
    format: Format,
) -> Outcome {
    let options = options(iteration)?;
    let parametrization = match shape.n {
        2 => Parametrization::Circle { resolution },
        3 => Parametrization::Sphere {
            res_theta: resolution,
            res_phi: res_phi.unwrap_or(2 * resolution),
        },
        n => return Err(Failure::Invalid(format!("basins need --n 2 or --n 3, got {n}"))),
    };
    let map = basins::rasterize(shape.n, shape.d, parametrization, options)?;
    basins::write_image(&map, out)?;
    if let Some(path) = csv {
        basins::write_csv(&map, path)?;
    }
    if let Some(size) = disk {
        let mut path = out.clone().into_os_string();
        path.push(".disk.ppm");
        basins::write_disk_image(&map, std::path::Path::new(&path), size)?;
    }
    let limits = map.limits();
    let counts: Vec<(usize, usize)> = limits
        .iter()
        .map(|&l| (l, map.cells.iter().filter(|c| c.outcome.limit_index() == Some(l)).count()))
        .collect();
    Ok(match format {
        Format::Json => {
            let value = json!({
                "n": shape.n,
                "d": shape.d,
                "cells": map.cells.len(),
                "converged_fraction": map.converged_fraction(),
                "limits": counts.iter().map(|&(l, c)| json!({
                    "limit_index": l,
                    "cells": c,
                    "vector": map.limit_vector(l).map(|v| v.as_slice().to_vec()),
                })).collect::<Vec<_>>(),
            });
            to_json(&value)? + "\n"
        }
        Format::Csv => return Err(unsupported(format, "basins (use --csv PATH)")),
        Format::Table => {
            let mut text = format!(
                "{} cells, converged fraction {}, {} basins\n",
                map.cells.len(),
                float(map.converged_fraction()),
                limits.len()
            );
            for (l, c) in counts {
                let v = map.limit_vector(l).expect("limit indices come from the structure");
                text += &format!("limit {:>3}  cells {:>8}  v = ({})\n", l, c, floats(v.iter().copied()).join(", "));
            }
            text
        }
    })
}

fn verify_command(shape: &Shape, seed: u64, format: Format) -> Outcome {
    let report = verify(shape.n, shape.d, seed)?;
    let text = match format {
        Format::Table => report.render(),
        Format::Json => {
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "status": c.status.as_str(), "detail": c.detail, "notes": c.notes}))
                .collect();
            to_json(&json!({"n": report.n, "d": report.d, "seed": report.seed, "passed": report.passed(), "checks": checks}))?
                + "\n"
        }
        Format::Csv => return Err(unsupported(format, "verify")),
    };
    if report.passed() {
        Ok(text)
    } else {
        Err(Failure::Verification {
            report: text,
            message: format!("failing checks: {}", report.failures().join(", ")),
        })
    }
}

fn print_out(text: &str) -> io::Result<()> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    match &cli.command {
        Command::Frame { n } => frame(*n, format),
        Command::Enumerate(shape) => {
            check_shape(shape)?;
            enumerate(shape, format)
        }
        Command::Classify(shape) => {
            check_shape(shape)?;
            classify(shape, format)
        }
        Command::Tpi { shape, start, iteration } => {
            check_shape(shape)?;
            tpi(shape, start, iteration, format)
        }
        Command::Oracle { shape, grid } => {
            check_shape(shape)?;
            oracle(shape, *grid, cli.seed, format)
        }
        Command::Basins {
            shape,
            resolution,
            res_phi,
            out,
            csv,
            disk,
            iteration,
        } => {
            check_shape(shape)?;
            basins_command(shape, *resolution, *res_phi, out, csv.as_ref(), *disk, iteration, format)
        }
        Command::Verify(shape) => {
            check_shape(shape)?;
            verify_command(shape, cli.seed, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    let result = run(cli).and_then(|text| print_out(&text).map_err(Failure::Io));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Invalid(msg) => eprintln!("error: {msg}"),
                Failure::Verification { report, message } => {
                    let _ = print_out(report);
                    eprintln!("verification failed: {message}");
                }
                Failure::Io(e) => eprintln!("i/o error: {e}"),
                Failure::Library(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(failure.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        let mut argv = vec!["simplex-tensor"];
        argv.extend_from_slice(args);
        run(Cli::try_parse_from(argv).unwrap())
    }

    fn json_of(args: &[&str]) -> Value {
        serde_json::from_str(&run_args(args).unwrap()).unwrap()
    }

    fn code_of(args: &[&str]) -> u8 {
        run_args(args).unwrap_err().code()
    }

    #[test]
    fn bad_arguments_are_rejected_by_the_parser() {
        for argv in [
            vec!["simplex-tensor", "enumerate", "--n", "x", "--d", "3"],
            vec!["simplex-tensor", "nonsense"],
            vec!["simplex-tensor", "--format", "xml", "frame", "--n", "2"],
        ] {
            assert!(Cli::try_parse_from(argv).unwrap_err().use_stderr());
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(code_of(&["enumerate", "--n", "1", "--d", "3"]), EXIT_INVALID);
        assert_eq!(code_of(&["classify", "--n", "3", "--d", "1"]), EXIT_INVALID);
        assert_eq!(code_of(&["tpi", "--n", "2", "--d", "3", "--start", "1,2,3"]), EXIT_INVALID);
        assert_eq!(code_of(&["--format", "csv", "verify", "--n", "2", "--d", "3"]), EXIT_INVALID);
        assert_eq!(code_of(&["verify", "--n", "3", "--d", "4"]), EXIT_VERIFY);
        let missing = std::env::temp_dir().join("no-such-dir-for-basins").join("map.ppm");
        let out = missing.to_str().unwrap();
        assert_eq!(code_of(&["basins", "--n", "2", "--d", "5", "--resolution", "64", "--out", out]), EXIT_IO);
        assert!(run_args(&["verify", "--n", "2", "--d", "5"]).is_ok());
    }

    #[test]
    fn enumerate_json_schema() {
        let v = json_of(&["--format", "json", "enumerate", "--n", "3", "--d", "4"]);
        assert_eq!(v["kind"], "discrete");
        let pairs = v["pairs"].as_array().unwrap();
        assert!(!pairs.is_empty());
        for p in pairs {
            assert_eq!(p["vector"].as_array().unwrap().len(), 3);
            assert!(p["mu"].is_f64());
            assert!(p["residual"].as_f64().unwrap() <= 1e-10);
            assert!(p["support"]["kind"].is_string());
        }
        let sphere = json_of(&["--format", "json", "enumerate", "--n", "4", "--d", "2"]);
        assert_eq!(sphere["kind"], "whole_sphere");
        assert!((sphere["mu"].as_f64().unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn frame_json_matches_library() {
        let v = json_of(&["--format", "json", "frame", "--n", "3"]);
        let gram = v["gramian"].as_array().unwrap();
        assert_eq!(gram.len(), 4);
        assert!((gram[0][1].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v["vectors"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn verify_json_reports_every_check() {
        let v = json_of(&["--format", "json", "--seed", "5", "verify", "--n", "2", "--d", "6"]);
        assert_eq!(v["passed"], true);
        assert_eq!(v["seed"], 5);
        let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        assert!(names.contains(&"jacobian") && names.contains(&"oracle"));
    }

    #[test]
    fn outputs_are_deterministic() {
        for args in [
            &["--seed", "9", "verify", "--n", "4", "--d", "5"][..],
            &["--format", "csv", "classify", "--n", "3", "--d", "6"][..],
            &["--format", "json", "oracle", "--n", "3", "--d", "5"][..],
        ] {
            assert_eq!(run_args(args).unwrap(), run_args(args).unwrap());
        }
    }

    #[test]
    fn tpi_reaches_a_vertex() {
        let v = json_of(&["--format", "json", "tpi", "--n", "2", "--d", "7", "--start", "1,0.1"]);
        assert_eq!(v["status"], "converged");
        assert!((v["mu"].as_f64().unwrap() - 63.0 / 64.0).abs() < 1e-12);
        let limit: Vec<f64> = v["limit"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((limit[0].hypot(limit[1]) - 1.0).abs() < 1e-12);
    }
}
