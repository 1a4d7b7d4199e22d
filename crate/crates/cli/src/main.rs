//! Batch command-line surface over the finite metric space toolkit.
//!
//! Reads distance matrices (JSON or CSV, `-` for stdin), runs one analysis
//! per invocation and prints a deterministic JSON report to standard output.
//! Errors go to standard error as a machine-readable JSON object.
//!
//! Exit codes: 0 success, 2 invalid input, 3 analysis error, 4 usage error.

mod input;
mod report;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use finmetric::{
    embed_euclidean, find_polygonal_equality, generalized_roundness, lbk_for_target, lbk_params,
    make_lbk, negative_type_status, random_ultrametric, roundness_exponent_check,
    roundness_profile, tree_path_metric, EmbedError, FiniteMetricSpace, GeneratorError,
    GrOptions, GrValue, MetricError, NegTypeStatus, PolygonalError, ProfileOptions, WeightedTree,
};

use input::LoadedInput;
use report::{float, float_array, index_array, matrix, weighted_side, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    InvalidMetric,
    Analysis,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Stable machine-readable error name.
    pub name: &'static str,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage | ErrorKind::Io => 4,
            ErrorKind::Parse | ErrorKind::InvalidMetric => 2,
            ErrorKind::Analysis => 3,
        }
    }

    pub fn io(message: String) -> Self {
        CliError {
            kind: ErrorKind::Io,
            name: "Io",
            message,
        }
    }

    pub fn parse(message: String) -> Self {
        CliError {
            kind: ErrorKind::Parse,
            name: "ParseError",
            message,
        }
    }

    pub fn usage(message: String) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            name: "Usage",
            message,
        }
    }

    fn analysis(name: &'static str, message: String) -> Self {
        CliError {
            kind: ErrorKind::Analysis,
            name,
            message,
        }
    }

    fn from_metric(error: MetricError) -> Self {
        let name = match &error {
            MetricError::NotSquare { .. } => "NotSquare",
            MetricError::TooFewPoints(_) => "TooFewPoints",
            MetricError::LabelCountMismatch { .. } => "LabelCountMismatch",
            MetricError::NonFiniteEntry { .. } => "NonFiniteEntry",
            MetricError::AsymmetricEntry { .. } => "AsymmetricEntry",
            MetricError::NonzeroDiagonal { .. } => "NonzeroDiagonal",
            MetricError::NonpositiveOffDiagonal { .. } => "NonpositiveOffDiagonal",
            MetricError::TriangleViolation { .. } => "TriangleViolation",
            MetricError::TransformNotMetric { .. } => "TransformNotMetric",
        };
        CliError {
            kind: ErrorKind::InvalidMetric,
            name,
            message: error.to_string(),
        }
    }

    fn from_generator(error: GeneratorError) -> Self {
        let (kind, name) = match &error {
            GeneratorError::ParamOutOfRange(_) => (ErrorKind::Usage, "ParamOutOfRange"),
            GeneratorError::TargetOutOfRange(_) => (ErrorKind::Usage, "TargetOutOfRange"),
            GeneratorError::DisconnectedTree => (ErrorKind::InvalidMetric, "DisconnectedTree"),
            GeneratorError::CycleDetected => (ErrorKind::InvalidMetric, "CycleDetected"),
            GeneratorError::EdgeLengthNotPositive { .. } => {
                (ErrorKind::InvalidMetric, "EdgeLengthNotPositive")
            }
            GeneratorError::VertexOutOfRange(_) => {
                (ErrorKind::InvalidMetric, "VertexOutOfRange")
            }
            _ => (ErrorKind::InvalidMetric, "InvalidDendrogram"),
        };
        CliError {
            kind,
            name,
            message: error.to_string(),
        }
    }

    fn from_embed(error: EmbedError) -> Self {
        let name = match &error {
            EmbedError::NotNegativeType { .. } => "NotNegativeType",
            EmbedError::ExponentOutOfRange(_) => "ExponentOutOfRange",
            EmbedError::DimensionMismatch { .. } => "DimensionMismatch",
        };
        CliError::analysis(name, error.to_string())
    }

    fn from_polygonal(error: PolygonalError) -> Self {
        let name = match &error {
            PolygonalError::NoKernelVector { .. } => "NoKernelVector",
            PolygonalError::WeightSumInvalid { .. } => "WeightSumInvalid",
            PolygonalError::NonpositiveWeight { .. } => "NonpositiveWeight",
            PolygonalError::IndexOverlap(_) => "IndexOverlap",
            PolygonalError::IndexOutOfRange { .. } => "IndexOutOfRange",
            PolygonalError::Roundness(_) => "CapReachedNonUltrametric",
        };
        CliError::analysis(name, error.to_string())
    }

    pub fn render(&self) -> String {
        let mut inner = Map::new();
        inner.insert("kind".into(), Value::from(self.name));
        inner.insert("message".into(), Value::from(self.message.as_str()));
        inner.insert("exit_code".into(), Value::from(self.exit_code()));
        let mut outer = Map::new();
        outer.insert("error".into(), Value::Object(inner));
        let mut text = serde_json::to_string_pretty(&Value::Object(outer)).unwrap();
        text.push('\n');
        text
    }
}

#[derive(Parser)]
#[command(
    name = "finmetric",
    version,
    about = "Analyze finite metric spaces: classification, negative type, roundness, embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a distance matrix
    Validate {
        /// Input file (JSON or CSV); - reads standard input
        file: String,
    },
    /// Decide ultrametric and four-point (tree) structure
    Classify { file: String },
    /// Spectral p-negative type status at one exponent
    Negtype {
        file: String,
        /// Exponent p >= 0
        #[arg(long)]
        p: f64,
    },
    /// Generalized roundness: the supremal p-negative type exponent
    Genround {
        file: String,
        /// Cap for the doubling search
        #[arg(long, default_value_t = 64.0)]
        pmax: f64,
        /// Bisection bracket width
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Quadruple roundness: single-exponent check or critical profile
    Roundness {
        file: String,
        #[command(flatten)]
        mode: RoundnessMode,
    },
    /// Isometric Euclidean embedding of (X, d^(p/2)) of minimal dimension
    Embed {
        file: String,
        /// Negative-type exponent in [0, 2]
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Also write the coordinates to this file
        #[arg(long)]
        out: Option<String>,
    },
    /// Polygonal equality at the supremal exponent
    Polygonal { file: String },
    /// Generate metric families with known properties
    Generate {
        /// Also write the generated matrix document to this file
        #[arg(long, global = true)]
        out: Option<String>,
        #[command(subcommand)]
        what: GenerateCmd,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RoundnessMode {
    /// Exponent to check (p >= 1)
    #[arg(long)]
    p: Option<f64>,
    /// Scan per-quadruple critical exponents instead
    #[arg(long)]
    profile: bool,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Star leaf space with distances 1 and 2b/(b+1)
    Lbk {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        k: usize,
    },
    /// Star leaf space designed for a target generalized roundness
    LbkTarget {
        #[arg(long)]
        gr: f64,
    },
    /// Random dendrogram ultrametric
    Ultrametric {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Path metric of a weighted tree specification file
    Tree {
        #[arg(long)]
        spec: String,
    },
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    let parsed = Cli::try_parse_from(
        std::iter::once("finmetric".to_owned()).chain(args.iter().cloned()),
    );
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as ClapKind;
            if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::usage(e.to_string());
            eprint!("{}", err.render());
            return err.exit_code();
        }
    };
    match execute(&cli, args) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(err) => {
            eprint!("{}", err.render());
            err.exit_code()
        }
    }
}

fn load_space(file: &str) -> Result<(FiniteMetricSpace, LoadedInput), CliError> {
    let loaded = input::read_input(file)?;
    let tol = input::env_tolerance()?;
    let space = FiniteMetricSpace::validate(loaded.matrix.clone(), loaded.labels.clone(), tol)
        .map_err(CliError::from_metric)?;
    Ok((space, loaded))
}

fn status_name(status: NegTypeStatus) -> &'static str {
    match status {
        NegTypeStatus::Strict => "strict",
        NegTypeStatus::Boundary => "boundary",
        NegTypeStatus::Fails => "fails",
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate { file } => {
            let (space, loaded) = load_space(file)?;
            let mut results = Map::new();
            results.insert("valid".into(), Value::Bool(true));
            results.insert("points".into(), Value::from(space.n_points()));
            results.insert("max_distance".into(), float(space.max_distance()));
            results.insert(
                "labels".into(),
                Value::Array(
                    space
                        .labels()
                        .iter()
                        .map(|l| Value::from(l.as_str()))
                        .collect(),
                ),
            );
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Classify { file } => {
            let (space, loaded) = load_space(file)?;
            let report = space.classify(input::env_tolerance()?);
            let mut results = Map::new();
            results.insert("is_ultrametric".into(), Value::Bool(report.is_ultrametric));
            results.insert("is_additive".into(), Value::Bool(report.is_additive));
            results.insert(
                "ultra_witness".into(),
                report
                    .ultra_witness
                    .map(|(i, j, k)| index_array([i, j, k]))
                    .unwrap_or(Value::Null),
            );
            results.insert(
                "additive_witness".into(),
                report
                    .additive_witness
                    .map(|(i, j, k, l)| index_array([i, j, k, l]))
                    .unwrap_or(Value::Null),
            );
            results.insert("tol".into(), float(report.tol));
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Negtype { file, p } => {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(CliError::usage(format!(
                    "--p must be a finite nonnegative number, got {p}"
                )));
            }
            let (space, loaded) = load_space(file)?;
            let result = negative_type_status(&space, *p, None);
            let mut results = Map::new();
            results.insert("p".into(), float(*p));
            results.insert("status".into(), Value::from(status_name(result.status)));
            results.insert("min_eigenvalue".into(), float(result.min_eigenvalue));
            results.insert(
                "certificate".into(),
                result
                    .certificate
                    .as_deref()
                    .map(float_array)
                    .unwrap_or(Value::Null),
            );
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Genround { file, pmax, tol } => {
            if !(*pmax > 1.0 && pmax.is_finite()) {
                return Err(CliError::usage(format!(
                    "--pmax must be a finite number above 1, got {pmax}"
                )));
            }
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(CliError::usage(format!(
                    "--tol must be a finite positive number, got {tol}"
                )));
            }
            let (space, loaded) = load_space(file)?;
            let opts = GrOptions {
                p_max: *pmax,
                bis_tol: *tol,
                spectral_tol: None,
            };
            let result = generalized_roundness(&space, &opts)
                .map_err(|e| CliError::analysis("CapReachedNonUltrametric", e.to_string()))?;
            let mut results = Map::new();
            match result.value {
                GrValue::Finite(v) => {
                    results.insert("value".into(), float(v));
                }
                GrValue::Infinite => {
                    results.insert("value".into(), Value::from("infinite"));
                }
            }
            results.insert(
                "bracket".into(),
                result
                    .bracket
                    .map(|(lo, hi)| Value::Array(vec![float(lo), float(hi)]))
                    .unwrap_or(Value::Null),
            );
            results.insert(
                "method".into(),
                Value::Array(
                    result
                        .methods
                        .iter()
                        .map(|m| Value::from(m.as_str()))
                        .collect(),
                ),
            );
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Roundness { file, mode } => {
            let (space, loaded) = load_space(file)?;
            let mut results = Map::new();
            if let Some(p) = mode.p {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(CliError::usage(format!(
                        "--p must be a finite number >= 1, got {p}"
                    )));
                }
                let check = roundness_exponent_check(&space, p, None);
                results.insert("p".into(), float(p));
                results.insert("holds".into(), Value::Bool(check.holds));
                results.insert(
                    "witness".into(),
                    check
                        .witness
                        .map(|w| {
                            let (a, b, c, d) = w.quadruple;
                            let mut obj = Map::new();
                            obj.insert("quadruple".into(), index_array([a, b, c, d]));
                            obj.insert("margin".into(), float(w.margin));
                            Value::Object(obj)
                        })
                        .unwrap_or(Value::Null),
                );
            } else {
                let profile = roundness_profile(&space, &ProfileOptions::default());
                results.insert("global_lower".into(), float(profile.global_lower));
                let mut grid = Map::new();
                grid.insert("start".into(), float(profile.grid.start));
                grid.insert("step".into(), float(profile.grid.step));
                grid.insert("max".into(), float(profile.grid.max));
                results.insert("grid".into(), Value::Object(grid));
                results.insert("shape_count".into(), Value::from(profile.records.len()));
                if let Some(worst) = profile.records.first() {
                    let (a, b, c, d) = worst.quadruple;
                    let mut obj = Map::new();
                    obj.insert("quadruple".into(), index_array([a, b, c, d]));
                    obj.insert("sup_contiguous".into(), float(worst.sup_contiguous));
                    results.insert("worst".into(), Value::Object(obj));
                }
            }
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Embed { file, p, out } => {
            let (space, loaded) = load_space(file)?;
            let embedding =
                embed_euclidean(&space, *p, 0, None).map_err(CliError::from_embed)?;
            let mut results = Map::new();
            results.insert("p".into(), float(embedding.p));
            results.insert("rank".into(), Value::from(embedding.rank));
            results.insert("residual".into(), float(embedding.residual));
            results.insert("coords".into(), matrix(&embedding.coords));
            if let Some(path) = out {
                let mut doc = Map::new();
                doc.insert("p".into(), float(embedding.p));
                doc.insert("rank".into(), Value::from(embedding.rank));
                doc.insert("coords".into(), matrix(&embedding.coords));
                let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
                text.push('\n');
                std::fs::write(path, text)
                    .map_err(|e| CliError::io(format!("writing {path}: {e}")))?;
            }
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Polygonal { file } => {
            let (space, loaded) = load_space(file)?;
            let equality =
                find_polygonal_equality(&space, None).map_err(CliError::from_polygonal)?;
            let mut results = Map::new();
            results.insert(
                "equality".into(),
                equality
                    .map(|eq| {
                        let mut obj = Map::new();
                        obj.insert("p".into(), float(eq.p));
                        obj.insert("a_side".into(), weighted_side(&eq.a_side));
                        obj.insert("b_side".into(), weighted_side(&eq.b_side));
                        obj.insert("residual".into(), float(eq.residual));
                        Value::Object(obj)
                    })
                    .unwrap_or(Value::Null),
            );
            Ok(Report::new(args)
                .digest(&loaded.digest)
                .results(Value::Object(results))
                .render())
        }
        Command::Generate { out, what } => {
            let (space, results, seed) = match what {
                GenerateCmd::Lbk { b, k } => {
                    let params = lbk_params(*b, *k).map_err(CliError::from_generator)?;
                    let space = make_lbk(*b, *k).map_err(CliError::from_generator)?;
                    let mut results = Map::new();
                    results.insert("kind".into(), Value::from("lbk"));
                    results.insert("b".into(), float(params.b));
                    results.insert("k".into(), Value::from(params.k));
                    results.insert("z".into(), float(params.z));
                    results.insert("closed_form_gr".into(), float(params.closed_form_gr));
                    (space, results, None)
                }
                GenerateCmd::LbkTarget { gr } => {
                    let params = lbk_for_target(*gr).map_err(CliError::from_generator)?;
                    let space =
                        make_lbk(params.b, params.k).map_err(CliError::from_generator)?;
                    let mut results = Map::new();
                    results.insert("kind".into(), Value::from("lbk-target"));
                    results.insert("target".into(), float(*gr));
                    results.insert("b".into(), float(params.b));
                    results.insert("k".into(), Value::from(params.k));
                    results.insert("z".into(), float(params.z));
                    results.insert("closed_form_gr".into(), float(params.closed_form_gr));
                    (space, results, None)
                }
                GenerateCmd::Ultrametric { n, seed } => {
                    if *n < 2 {
                        return Err(CliError::usage(format!(
                            "--n must be at least 2, got {n}"
                        )));
                    }
                    let space = random_ultrametric(*n, *seed, None);
                    let mut results = Map::new();
                    results.insert("kind".into(), Value::from("ultrametric"));
                    results.insert("n".into(), Value::from(*n));
                    (space, results, Some(*seed))
                }
                GenerateCmd::Tree { spec } => {
                    let tree_spec = input::read_tree_spec(spec)?;
                    let tree = WeightedTree {
                        n_vertices: tree_spec.vertices,
                        edges: tree_spec.edges,
                        subset: tree_spec.subset,
                    };
                    let space = tree_path_metric(&tree).map_err(CliError::from_generator)?;
                    let mut results = Map::new();
                    results.insert("kind".into(), Value::from("tree"));
                    results.insert("vertices".into(), Value::from(tree.n_vertices));
                    (space, results, None)
                }
            };
            let rows = space.rows();
            let labels = Value::Array(
                space
                    .labels()
                    .iter()
                    .map(|l| Value::from(l.as_str()))
                    .collect::<Vec<_>>(),
            );
            if let Some(path) = out {
                let mut doc = Map::new();
                doc.insert("labels".into(), labels.clone());
                doc.insert("matrix".into(), matrix(&rows));
                let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
                text.push('\n');
                std::fs::write(path, text)
                    .map_err(|e| CliError::io(format!("writing {path}: {e}")))?;
            }
            let mut report = Report::new(args)
                .digest(&input::matrix_digest(&rows))
                .top("labels", labels)
                .top("matrix", matrix(&rows))
                .results(Value::Object(results));
            if let Some(seed) = seed {
                report = report.seed(seed);
            }
            Ok(report.render())
        }
    }
}
