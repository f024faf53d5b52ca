//! Command-line front end. Every file the tool writes is paired with a
//! `<file>.manifest.json` recording how to regenerate it.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dag_extract::{best_dag, extract_dag_from};
use crate::error::Error;
use crate::eval::{
    fr_curve, json_count, oracle, CurveOptions, PlacementResult, DEFAULT_ORACLE_BUDGET,
};
use crate::graph::{add_super_source, is_acyclic, parse_edge_list, CGraph};
use crate::placement::{place, Algorithm, CTree, FilterSet};
use crate::propagation::Propagator;
use crate::synth::{layered_graph, random_ctree, random_dag, LayeredConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "flowfilter",
    version,
    about = "Filter placement for redundant propagation in directed graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Edge list, one `u<TAB>v` per line.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Source node. Defaults to every node without incoming edges.
    #[arg(long)]
    pub source: Option<String>,
    /// Join multiple sources under a single added super-source.
    #[arg(long)]
    pub super_source: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic graph.
    Generate {
        #[arg(long, default_value = "layered", value_parser = ["layered", "dag", "ctree"])]
        model: String,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, default_value_t = 100)]
        width: usize,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long, default_value_t = 4.0)]
        y: f64,
        /// Node count for `dag` and `ctree`.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Edge probability (`dag`) or source-edge probability (`ctree`).
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Extract a maximal acyclic subgraph reachable from a root.
    ExtractDag {
        #[command(flatten)]
        input: InputArgs,
        #[arg(
            long,
            conflicts_with = "best_root",
            required_unless_present = "best_root"
        )]
        root: Option<String>,
        /// Try every root and keep the largest result.
        #[arg(long)]
        best_root: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Choose up to k filters with one algorithm.
    Place {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Report Φ and F for a given filter list.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated filter labels.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        filters: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Exhaustive optimum over all sets of at most k filters.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u128,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Filter Ratio for each algorithm and k.
    FrCurve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        algos: Vec<Algorithm>,
        #[arg(long)]
        kmax: usize,
        /// Trials per cell for randomized algorithms.
        #[arg(long, default_value_t = crate::eval::DEFAULT_RANDOM_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u128,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check an edge list and describe the graph.
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Re-run the command recorded in a manifest and compare its outputs.
    Replay { manifest: PathBuf },
}

/// Sidecar describing how an output was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub cwd: String,
    pub input: Option<String>,
    /// FNV-1a of the input bytes, hex.
    pub input_digest: Option<String>,
    pub generator: Option<Value>,
    pub algorithms: Vec<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn fnv1a(bytes: &[u8]) -> String {
    let h = bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    format!("{h:016x}")
}

#[derive(Debug)]
enum CliError {
    Data(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CycleDetected { .. } => CliError::Data(format!(
                "{e}\nhint: this command needs an acyclic graph; run `flowfilter extract-dag` first"
            )),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Loaded {
    graph: CGraph,
    path: String,
    digest: String,
}

fn load(args: &InputArgs) -> CliResult<Loaded> {
    let bytes = fs::read(&args.input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.input.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Data(format!("{} is not UTF-8", args.input.display())))?;
    let mut graph = parse_edge_list(&text, args.source.as_deref())?;
    if args.super_source {
        graph = add_super_source(&graph)?;
    }
    Ok(Loaded {
        graph,
        path: args.input.display().to_string(),
        digest: fnv1a(&bytes),
    })
}

struct Run<'a> {
    stdout: &'a mut dyn Write,
    manifest: RunManifest,
}

impl Run<'_> {
    fn with_input(&mut self, l: &Loaded) {
        self.manifest.input = Some(l.path.clone());
        self.manifest.input_digest = Some(l.digest.clone());
    }

    /// Write `body` to `path`, or to stdout when no path was given.
    fn emit(&mut self, path: Option<&Path>, body: &str) -> CliResult<()> {
        match path {
            Some(p) => {
                fs::write(p, body)
                    .map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display())))?;
                self.manifest.outputs.push(p.display().to_string());
            }
            None => self.stdout.write_all(body.as_bytes())?,
        }
        Ok(())
    }

    fn finish(self) -> CliResult<()> {
        let text =
            serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        for out in &self.manifest.outputs {
            fs::write(manifest_path(Path::new(out)), &text)?;
        }
        Ok(())
    }
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn require_acyclic(g: &CGraph) -> CliResult<Propagator<'_>> {
    Ok(Propagator::new(g)?)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Generate { .. } => "generate",
        Command::ExtractDag { .. } => "extract-dag",
        Command::Place { .. } => "place",
        Command::Evaluate { .. } => "evaluate",
        Command::Oracle { .. } => "oracle",
        Command::FrCurve { .. } => "fr-curve",
        Command::Validate { .. } => "validate",
        Command::Replay { .. } => "replay",
    }
}

/// Parse `args` (program name first) and execute. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli.command, argv, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(CliError::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(
    command: Command,
    argv: Vec<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let cwd = std::env::current_dir()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    let name = command_name(&command);
    let mut run = Run {
        stdout,
        manifest: RunManifest {
            tool: "flowfilter".into(),
            version: crate::VERSION.into(),
            command: name.into(),
            argv,
            cwd,
            input: None,
            input_digest: None,
            generator: None,
            algorithms: Vec::new(),
            k: None,
            seed: None,
            outputs: Vec::new(),
        },
    };

    match command {
        Command::Generate {
            model,
            levels,
            width,
            x,
            y,
            n,
            p,
            seed,
            out,
        } => {
            let (g, config) = match model.as_str() {
                "layered" => {
                    let cfg = LayeredConfig::new(levels, width, x, y, seed);
                    (
                        layered_graph(&cfg)?,
                        serde_json::to_value(&cfg).expect("config serializes"),
                    )
                }
                "dag" => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CliError::Usage("--p must lie in [0, 1]".into()));
                    }
                    (
                        random_dag(n, p, seed),
                        json!({ "model": "dag", "n": n, "p": p, "seed": seed }),
                    )
                }
                _ => (
                    random_ctree(n, p, seed).graph().clone(),
                    json!({ "model": "ctree", "n": n, "p": p, "seed": seed }),
                ),
            };
            run.manifest.generator = Some(config);
            run.manifest.seed = Some(seed);
            run.emit(out.as_deref(), &g.to_edge_list())?;
            writeln!(
                stderr,
                "generated {} nodes, {} edges",
                g.node_count(),
                g.edge_count()
            )?;
        }

        Command::ExtractDag {
            input,
            root,
            best_root,
            out,
        } => {
            let l = load(&input)?;
            run.with_input(&l);
            let (dag, root) = if best_root {
                let (dag, r) = best_dag(&l.graph)?;
                (dag, l.graph.label(r).to_string())
            } else {
                let root = root.expect("clap enforces --root or --best-root");
                (extract_dag_from(&l.graph, &root)?, root)
            };
            run.emit(out.as_deref(), &dag.to_edge_list())?;
            writeln!(
                stderr,
                "root {root}: kept {} of {} nodes, {} of {} edges",
                dag.node_count(),
                l.graph.node_count(),
                dag.edge_count(),
                l.graph.edge_count()
            )?;
        }

        Command::Place {
            input,
            algo,
            k,
            seed,
            json,
        } => {
            if algo == Algorithm::Given {
                return Err(CliError::Usage(
                    "`given` is not a selection algorithm; use `evaluate`".into(),
                ));
            }
            let l = load(&input)?;
            run.with_input(&l);
            let p = require_acyclic(&l.graph)?;
            let filters = match algo {
                Algorithm::TreeDp => {
                    crate::placement::tree_dp(&CTree::certify(&l.graph)?, k).filters
                }
                a => place(&l.graph, a, k, seed)?,
            };
            let result = PlacementResult::evaluate(&p, &filters, &crate::eval::max_objective(&p));
            run.manifest.algorithms = vec![algo.name().into()];
            run.manifest.k = Some(k);
            run.manifest.seed = algo.is_randomized().then_some(seed);
            run.emit(json.as_deref(), &pretty(&result))?;
        }

        Command::Evaluate {
            input,
            filters,
            json,
        } => {
            let l = load(&input)?;
            run.with_input(&l);
            let p = require_acyclic(&l.graph)?;
            let fs = FilterSet::from_labels(&l.graph, &filters)?;
            let result = PlacementResult::evaluate(&p, &fs, &crate::eval::max_objective(&p));
            run.manifest.algorithms = vec![Algorithm::Given.name().into()];
            run.manifest.k = Some(fs.len());
            run.emit(json.as_deref(), &pretty(&result))?;
        }

        Command::Oracle {
            input,
            k,
            budget,
            json,
        } => {
            let l = load(&input)?;
            run.with_input(&l);
            let p = require_acyclic(&l.graph)?;
            let out = oracle(&l.graph, k, budget)?;
            let result =
                PlacementResult::evaluate(&p, &out.filters, &crate::eval::max_objective(&p));
            let mut value = serde_json::to_value(&result).expect("serializable");
            value["evaluated"] = json!(out.evaluated);
            run.manifest.algorithms = vec![Algorithm::Oracle.name().into()];
            run.manifest.k = Some(k);
            run.emit(json.as_deref(), &pretty(&value))?;
        }

        Command::FrCurve {
            input,
            algos,
            kmax,
            runs,
            seed,
            jobs,
            budget,
            csv,
            json,
        } => {
            if runs == 0 {
                return Err(CliError::Usage("--runs must be at least 1".into()));
            }
            if algos.contains(&Algorithm::Given) {
                return Err(CliError::Usage(
                    "`given` is not a selection algorithm".into(),
                ));
            }
            let l = load(&input)?;
            run.with_input(&l);
            require_acyclic(&l.graph)?;
            let opts = CurveOptions {
                runs,
                seed,
                jobs,
                oracle_budget: budget,
            };
            let curve = fr_curve(&l.graph, &algos, kmax, &opts)?;
            run.manifest.algorithms = algos.iter().map(|a| a.name().to_string()).collect();
            run.manifest.k = Some(kmax);
            run.manifest.seed = Some(seed);
            if json.is_none() || csv.is_some() {
                run.emit(csv.as_deref(), &curve.to_csv(true))?;
            }
            if let Some(path) = json.as_deref() {
                run.emit(Some(path), &pretty(&curve))?;
            }
        }

        Command::Validate { input } => {
            let l = load(&input)?;
            let g = &l.graph;
            let acyclic = is_acyclic(g);
            let mut report = json!({
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "sources": g.sources().iter().map(|&s| g.label(s)).collect::<Vec<_>>(),
                "acyclic": acyclic,
                "c_tree": CTree::certify(g).is_ok(),
            });
            if acyclic {
                let p = Propagator::new(g)?;
                report["phi_empty"] = json!(json_count(p.baseline()));
                report["f_max"] = json!(json_count(&crate::eval::max_objective(&p)));
            } else if let Err(Error::CycleDetected { cycle }) = crate::graph::topological_order(g) {
                report["cycle"] = json!(cycle);
            }
            run.stdout.write_all(pretty(&report).as_bytes())?;
            return Ok(());
        }

        Command::Replay { manifest } => return replay(&manifest, run.stdout),
    }
    run.finish()
}

/// Flags whose values are file paths.
const OUTPUT_FLAGS: [&str; 3] = ["--out", "--json", "--csv"];
const PATH_FLAGS: [&str; 4] = ["--input", "--out", "--json", "--csv"];

/// Wall-clock columns vary between runs and are blanked before comparing.
fn normalize(command: &str, path: &str, bytes: &[u8]) -> Vec<u8> {
    if command != "fr-curve" {
        return bytes.to_vec();
    }
    let text = String::from_utf8_lossy(bytes);
    if path.ends_with(".csv") || text.starts_with("algorithm,") {
        text.lines()
            .map(|line| match line.rfind(',') {
                Some(pos) if !line.starts_with("algorithm,") => format!("{},0\n", &line[..pos]),
                _ => format!("{line}\n"),
            })
            .collect::<String>()
            .into_bytes()
    } else {
        match serde_json::from_str::<Value>(&text) {
            Ok(mut v) => {
                strip_key(&mut v, "wall_ms");
                v.to_string().into_bytes()
            }
            Err(_) => bytes.to_vec(),
        }
    }
}

fn strip_key(v: &mut Value, key: &str) {
    match v {
        Value::Object(map) => {
            map.remove(key);
            map.values_mut().for_each(|x| strip_key(x, key));
        }
        Value::Array(items) => items.iter_mut().for_each(|x| strip_key(x, key)),
        _ => {}
    }
}

fn replay(manifest_file: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(manifest_file)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", manifest_file.display())))?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad manifest: {e}")))?;
    if m.command == "replay" {
        return Err(CliError::Data("manifest records a replay".into()));
    }
    if m.version != crate::VERSION {
        writeln!(
            stdout,
            "warning: manifest from version {}, running {}",
            m.version,
            crate::VERSION
        )?;
    }
    let base = PathBuf::from(&m.cwd);
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let scratch = std::env::temp_dir().join(format!(
        "flowfilter-replay-{}-{}",
        std::process::id(),
        fnv1a(text.as_bytes())
    ));
    fs::create_dir_all(&scratch)?;
    let mut argv = m.argv.clone();
    let mut pairs = Vec::new();
    let mut i = 1;
    while i < argv.len() {
        let flag = argv[i].split('=').next().unwrap_or_default().to_string();
        let inline = argv[i].contains('=');
        if PATH_FLAGS.contains(&flag.as_str()) {
            let (slot, value) = if inline {
                (i, argv[i][flag.len() + 1..].to_string())
            } else {
                (i + 1, argv.get(i + 1).cloned().unwrap_or_default())
            };
            let original = resolve(&value);
            let replacement = if OUTPUT_FLAGS.contains(&flag.as_str()) {
                let name = original
                    .file_name()
                    .map(|n| n.to_os_string())
                    .unwrap_or_else(|| "out".into());
                let fresh = scratch.join(format!("{}-{}", pairs.len(), name.to_string_lossy()));
                pairs.push((original.clone(), fresh.clone()));
                fresh
            } else {
                original
            };
            argv[slot] = if inline {
                format!("{flag}={}", replacement.display())
            } else {
                replacement.display().to_string()
            };
            i = slot + 1;
        } else {
            i += 1;
        }
    }

    if let (Some(input), Some(digest)) = (&m.input, &m.input_digest) {
        let bytes = fs::read(resolve(input))?;
        if &fnv1a(&bytes) != digest {
            return Err(CliError::Data(format!(
                "input {input} changed since the manifest was written"
            )));
        }
    }

    let mut sink_out = Vec::new();
    let mut sink_err = Vec::new();
    let code = run(&argv, &mut sink_out, &mut sink_err);
    if code != EXIT_OK {
        let _ = fs::remove_dir_all(&scratch);
        return Err(CliError::Data(format!(
            "replayed command failed: {}",
            String::from_utf8_lossy(&sink_err)
        )));
    }
    let mut mismatched = Vec::new();
    for (original, fresh) in &pairs {
        let want = fs::read(original)?;
        let got = fs::read(fresh)?;
        let key = original.display().to_string();
        if normalize(&m.command, &key, &want) != normalize(&m.command, &key, &got) {
            mismatched.push(key);
        } else {
            writeln!(stdout, "identical: {key}")?;
        }
    }
    let _ = fs::remove_dir_all(&scratch);
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!(
            "outputs differ: {}",
            mismatched.join(", ")
        )))
    }
}
