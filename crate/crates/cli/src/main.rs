//! `convgraph` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 parse error, 3 validation
//! error, 4 method/semantics mismatch, 5 size cap exceeded. Results go to
//! standard output; diagnostics go to standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use convgraph::io::{
    resolve_names, CovarianceFile, GaussianDecomposition, IfFile, InferResult, LatentSumFile,
    ModelFile, QueryFile,
};
use convgraph::models::{
    build_if_model, build_latent_sum, covariance_graph, export_chain_graph, gaussian_decompose,
    gaussian_sample_check,
};
use convgraph::speedup::{run_bench, Template};
use convgraph::{
    answer, answer_traced, resolve_method, Error, FactorGraph, Method, Semantics, DEFAULT_JOINT_CAP,
};

#[derive(Parser)]
#[command(
    name = "convgraph",
    version,
    about = "Exact inference on convolutional and multiplicative factor graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer a query on a model; prints the result table as JSON.
    Infer {
        model: PathBuf,
        query: PathBuf,
        /// Overrides the method named in the query file.
        #[arg(long)]
        method: Option<Method>,
        /// Largest joint table the oracle may build.
        #[arg(long, default_value_t = DEFAULT_JOINT_CAP)]
        oracle_cap: usize,
        /// Print the elimination steps to standard error.
        #[arg(long)]
        verbose_trace: bool,
    },
    /// Check graph separation and marginal independence of two variable sets.
    CheckIndep {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_JOINT_CAP)]
        oracle_cap: usize,
    },
    /// Write the dual model (transformed factors, opposite semantics).
    Dualize { model: PathBuf, out: PathBuf },
    /// Graphviz rendering of a model, a latent-sum chain graph or a covariance graph.
    ExportDot {
        #[arg(long, group = "source")]
        model: Option<PathBuf>,
        #[arg(long, group = "source")]
        latent_sum: Option<PathBuf>,
        #[arg(long, group = "source")]
        covariance: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time direct convolution against the FFT-dual pipeline.
    Bench {
        #[arg(long, default_value = "chain")]
        template: Template,
        #[arg(long, default_value_t = 4)]
        factors: usize,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the rows as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a model from a specification file.
    BuildModel {
        kind: ModelKind,
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gaussian only: validate the factorization by sampling.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    LatentSum,
    Gaussian,
    If,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MethodMismatch { .. } => 4,
            Error::SizeCapExceeded { .. } | Error::VertexCapExceeded(..) => 5,
            _ => 3,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(2, format!("cannot parse {}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn load_model(path: &Path) -> Outcome<FactorGraph> {
    let file: ModelFile = read_json(path)?;
    Ok(file.to_graph()?)
}

fn infer(model: &Path, query: &Path, method: Option<Method>, cap: usize, verbose: bool) -> Outcome {
    let g = load_model(model)?;
    let qf: QueryFile = read_json(query)?;
    let method = match method {
        Some(m) => m,
        None => qf.method()?,
    };
    let q = qf.resolve(&g)?;
    let method = resolve_method(g.semantics(), &q, method)?;
    let mut steps = Vec::new();
    let result = answer_traced(&g, &q, method, cap, verbose.then_some(&mut steps))?;
    if verbose {
        let trace: Vec<_> = steps
            .iter()
            .map(|s| {
                json!({
                    "variable": g.name_of(s.variable),
                    "absorbed": s.absorbed,
                    "created": s.created,
                    "scope": s.scope.iter().map(|&v| g.name_of(v)).collect::<Vec<_>>(),
                })
            })
            .collect();
        eprintln!(
            "{}",
            serde_json::to_string(&trace).expect("trace is serializable")
        );
    }
    let deviation = if qf.check_against_oracle {
        match answer(&g, &q, Method::Oracle, cap) {
            Ok(oracle) => {
                let d = result.relative_linf(&oracle)?;
                if d > 1e-9 {
                    eprintln!("warning: result deviates from the oracle by {d:e}");
                }
                Some(d)
            }
            Err(Error::SizeCapExceeded { size, cap }) => {
                eprintln!("oracle check skipped: joint of {size} entries exceeds cap {cap}");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    write_text(
        None,
        &to_json(&InferResult::new(&g, &result, method, deviation)),
    )
}

fn check_indep(model: &Path, a: &[String], b: &[String], s: &[String], cap: usize) -> Outcome {
    let g = load_model(model)?;
    if g.semantics() != Semantics::Convolutional {
        return Err(Error::MethodMismatch {
            method: "check-indep".into(),
            semantics: g.semantics().to_string(),
        }
        .into());
    }
    let (a, b, s) = (
        resolve_names(&g, a)?,
        resolve_names(&g, b)?,
        resolve_names(&g, s)?,
    );
    let separated = g.separates(&a, &b, &s)?;
    let check = g.check_marginal_independence(&a, &b, cap)?;
    let out = json!({
        "separated_by_empty_or_given_S": separated,
        "independent": check.independent,
        "max_deviation": check.max_deviation,
    });
    write_text(None, &to_json(&out))
}

fn export_dot(
    model: Option<&Path>,
    latent_sum: Option<&Path>,
    covariance: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let dot = if let Some(p) = model {
        load_model(p)?.to_dot()
    } else if let Some(p) = latent_sum {
        let file: LatentSumFile = read_json(p)?;
        export_chain_graph(&file.to_spec()?)?
    } else if let Some(p) = covariance {
        let file: CovarianceFile = read_json(p)?;
        let model = file.to_model()?;
        covariance_graph(&model).to_dot(&model.names)
    } else {
        return Err(Failure::new(
            2,
            "one of --model, --latent-sum or --covariance is required",
        ));
    };
    write_text(out, &dot)
}

fn build_model(
    kind: ModelKind,
    spec: &Path,
    out: Option<&Path>,
    samples: Option<usize>,
    seed: u64,
) -> Outcome {
    let text = match kind {
        ModelKind::LatentSum => {
            let file: LatentSumFile = read_json(spec)?;
            let g = build_latent_sum(&file.to_spec()?)?;
            to_json(&ModelFile::from_graph(&g, false))
        }
        ModelKind::If => {
            let file: IfFile = read_json(spec)?;
            let g = build_if_model(&file.into())?;
            to_json(&ModelFile::from_graph(&g, false))
        }
        ModelKind::Gaussian => {
            let file: CovarianceFile = read_json(spec)?;
            let model = file.to_model()?;
            let factors = gaussian_decompose(&model)?;
            let deviation = samples.map(|n| gaussian_sample_check(&model, &factors, n, seed));
            to_json(&GaussianDecomposition::new(&model, &factors, deviation))
        }
    };
    write_text(out, &text)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Infer {
            model,
            query,
            method,
            oracle_cap,
            verbose_trace,
        } => infer(&model, &query, method, oracle_cap, verbose_trace),
        Command::CheckIndep {
            model,
            a,
            b,
            s,
            oracle_cap,
        } => check_indep(&model, &a, &b, &s, oracle_cap),
        Command::Dualize { model, out } => {
            let dual = load_model(&model)?.dualize();
            write_text(Some(&out), &to_json(&ModelFile::from_graph(&dual, true)))
        }
        Command::ExportDot {
            model,
            latent_sum,
            covariance,
            out,
        } => export_dot(
            model.as_deref(),
            latent_sum.as_deref(),
            covariance.as_deref(),
            out.as_deref(),
        ),
        Command::Bench {
            template,
            factors,
            sizes,
            reps,
            seed,
            csv,
        } => {
            let report = run_bench(template, factors, &sizes, reps, seed)?;
            if let Some(path) = csv {
                write_text(Some(&path), &report.to_csv())?;
            }
            write_text(None, &report.to_table())
        }
        Command::BuildModel {
            kind,
            spec,
            out,
            samples,
            seed,
        } => build_model(kind, &spec, out.as_deref(), samples, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
