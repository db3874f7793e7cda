mod problem;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qteig::nep::BasisKind;
use qteig::solver::{basins, eig_all, eig_single, winding_map, Raster, SolverConfig};
use qteig::QtError;

use output::{BasinSidecar, EigAllOutput, EigSingleOutput};
use problem::ProblemFile;

/// Isolated eigenvalues of quasi-Toeplitz operators T(a) + E.
#[derive(Parser)]
#[command(name = "qteig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All isolated eigenvalues reachable from a finite section.
    EigAll {
        problem: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Newton's iteration from one starting point.
    EigSingle {
        problem: PathBuf,
        /// Starting point as `re,im`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        lambda0: Complex64,
        /// Number of eigenvector components to report.
        #[arg(long, default_value_t = 100)]
        vec_len: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Winding numbers or Newton basins over a box, as CSV.
    Map {
        problem: PathBuf,
        /// `re0,re1,im0,im1`.
        #[arg(long = "box", allow_hyphen_values = true, value_parser = parse_box)]
        bbox: [f64; 4],
        /// Cells per axis.
        #[arg(long)]
        res: usize,
        #[arg(long, value_enum, default_value_t = MapKind::Winding)]
        kind: MapKind,
        /// Output CSV; `curve.csv` and the basin labels go next to it.
        #[arg(long, default_value = "map.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        curve_samples: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Winding,
    Basins,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Frobenius,
    Vandermonde,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Method::Frobenius)]
    method: Method,
    /// Finite-section size factor.
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 20)]
    maxit: usize,
    /// Residual tolerance for accepting an eigenvalue.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl SolverArgs {
    fn config(&self, vec_len: usize) -> SolverConfig {
        SolverConfig {
            method: match self.method {
                Method::Frobenius => BasisKind::Frobenius,
                Method::Vandermonde => BasisKind::Vandermonde,
            },
            gamma: self.gamma,
            maxit: self.maxit,
            residual_tol: self.tol,
            vec_len,
            ..SolverConfig::default()
        }
    }
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers"));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    parse_floats::<2>(s).map(|[re, im]| Complex64::new(re, im))
}

fn parse_box(s: &str) -> Result<[f64; 4], String> {
    parse_floats::<4>(s)
}

/// Exit codes: 2 for bad input, 3 for numerical failure.
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<QtError> for Failure {
    fn from(e: QtError) -> Self {
        match e {
            QtError::InvalidInput(_) | QtError::InvalidSymbol(_) | QtError::InconsistentConstant | QtError::Domain(_) => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<qteig::qt::QTMatrix, Failure> {
    ProblemFile::load(path)
        .and_then(|p| p.build())
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::EigAll { problem, solver } => {
            let a = load(&problem)?;
            let rep = eig_all(&a, &solver.config(0))?;
            print!(
                "{}",
                output::to_json(&EigAllOutput {
                    section_size: rep.section_size,
                    eigenvalues: rep.records.iter().map(Into::into).collect(),
                    continuous_components_detected: rep.continuous_detected,
                })
            );
        }
        Command::EigSingle {
            problem,
            lambda0,
            vec_len,
            solver,
        } => {
            let a = load(&problem)?;
            let cfg = solver.config(vec_len);
            cfg.validate()?;
            let rec = eig_single(&a, lambda0, &cfg);
            print!("{}", output::to_json(&EigSingleOutput::from(&rec)));
        }
        Command::Map {
            problem,
            bbox,
            res,
            kind,
            out,
            curve_samples,
            solver,
        } => {
            let a = load(&problem)?;
            let raster = Raster::new((bbox[0], bbox[1]), (bbox[2], bbox[3]), res, res)?;
            let grid = match kind {
                MapKind::Winding => winding_map(&a, &raster),
                MapKind::Basins => {
                    let map = basins(&a, &raster, &solver.config(0))?;
                    let sidecar = BasinSidecar {
                        labels: output::labels(&map.eigenvalues),
                        nonconverged: qteig::solver::LABEL_NONCONV,
                        continuous_set: qteig::solver::LABEL_CONTINUOUS,
                    };
                    write_file(&out.with_extension("labels.json"), output::to_json(&sidecar).as_bytes())?;
                    map.grid
                }
            };
            let mut csv = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Numerical(e.to_string());
            csv.write_record(["re", "im", "value"]).map_err(io)?;
            for iy in 0..raster.ny {
                for ix in 0..raster.nx {
                    let z = raster.point(ix, iy);
                    csv.write_record([output::sci(z.re), output::sci(z.im), grid.get(ix, iy).to_string()])
                        .map_err(io)?;
                }
            }
            write_file(&out, &csv.into_inner().map_err(|e| Failure::Numerical(e.to_string()))?)?;

            let mut curve = csv::Writer::from_writer(Vec::new());
            curve.write_record(["re", "im"]).map_err(io)?;
            for z in a.symbol_curve(curve_samples)? {
                curve.write_record([output::sci(z.re), output::sci(z.im)]).map_err(io)?;
            }
            let curve_path = out.parent().unwrap_or(Path::new(".")).join("curve.csv");
            write_file(&curve_path, &curve.into_inner().map_err(|e| Failure::Numerical(e.to_string()))?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
