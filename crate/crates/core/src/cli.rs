//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_benchmark, write_csv, BenchConfig};
use crate::blowup::build_blowup_complex;
use crate::complex::SimplicialComplex;
use crate::cover::{
    cover_stats, load_partition, one_skeleton_graph, partition_based_cover, partition_graph,
    write_partition, CoverStats, GraphPartition,
};
use crate::error::{Error, Result};
use crate::generators::{
    diagonal_embed, erdos_renyi, flag_complex, full_simplex_complex, multiblob, path_complex,
    sphere_sample, vietoris_rips,
};
use crate::io::{load_complex, load_points, save_complex, save_points};
use crate::parallel::{run, Algorithm, PipelineOptions};
use crate::verify::{verify, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mvhom",
    version,
    about = "Parallel Z/2 homology with Mayer-Vietoris blowup complexes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a complex (.cplx) or a point cloud (.pts).
    Generate(GenerateArgs),
    /// Partition the 1-skeleton of a complex and write the part of each vertex.
    Partition(PartitionArgs),
    /// Cover statistics of the partition-based cover.
    Stats(StatsArgs),
    /// Betti numbers over Z/2.
    Homology(HomologyArgs),
    /// Time the algorithms and write a CSV report.
    Bench(BenchArgs),
    /// Check all algorithms against the rank oracle on random flag complexes.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Path,
    Simplex,
    Multiblob,
    Rips,
    Flag,
    Sphere,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Vertex count (path, simplex, flag) or point count (sphere, rips).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of blob copies (multiblob).
    #[arg(long)]
    pub copies: Option<usize>,
    /// Number of disjoint groups inside each blob (multiblob).
    #[arg(long)]
    pub groups: Option<usize>,
    /// Vertices per blob (multiblob).
    #[arg(long, default_value_t = 7)]
    pub blob_vertices: usize,
    /// Distance threshold (rips).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest cell dimension (rips, flag).
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    /// Edge probability (flag).
    #[arg(long)]
    pub prob: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sphere dimension (sphere, rips without --points).
    #[arg(long, default_value_t = 1)]
    pub sphere_dim: usize,
    /// Point cloud to build the Rips complex on, instead of fresh sphere samples.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Embed sphere samples diagonally in twice the dimension.
    #[arg(long)]
    pub diagonal: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub parts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Plain,
    Csv,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub parts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, conflicts_with = "parts")]
    pub partition_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Plain)]
    pub format: StatsFormat,
}

#[derive(Args, Debug)]
pub struct HomologyArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Serial)]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Part count; defaults to the thread count.
    #[arg(long)]
    pub parts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, conflicts_with = "parts")]
    pub partition_file: Option<PathBuf>,
    /// Write the blowup cells as `<base vertices>|<nerve indices>` lines (mv only).
    #[arg(long)]
    pub dump_blowup: Option<PathBuf>,
    /// Write the persistence pairing, one `creator destroyer` or `creator -` per line.
    #[arg(long)]
    pub pairing_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Serial,
    Mv,
    Heuristic,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Serial => Algorithm::Serial,
            AlgorithmArg::Mv => Algorithm::Multicore,
            AlgorithmArg::Heuristic => Algorithm::Heuristic,
        }
    }
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgorithmArg::Serial, AlgorithmArg::Mv, AlgorithmArg::Heuristic])]
    pub algorithms: Vec<AlgorithmArg>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    pub threads_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn required<T>(v: Option<T>, flag: &str, kind: Kind) -> Result<T> {
    v.ok_or_else(|| usage(format!("--kind {kind:?} requires {flag}").to_lowercase()))
}

fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    if a.kind == Kind::Sphere {
        let cloud = sphere_sample(required(a.n, "--n", a.kind)?, a.sphere_dim, a.seed)?;
        let cloud = if a.diagonal {
            diagonal_embed(&cloud)
        } else {
            cloud
        };
        save_points(&cloud, &a.out)?;
        return Ok(format!(
            "wrote {} points to {}",
            cloud.len(),
            a.out.display()
        ));
    }
    let k = match a.kind {
        Kind::Path => path_complex(required(a.n, "--n", a.kind)?)?,
        Kind::Simplex => full_simplex_complex(required(a.n, "--n", a.kind)?)?,
        Kind::Multiblob => multiblob(
            required(a.copies, "--copies", a.kind)?,
            a.blob_vertices,
            required(a.groups, "--groups", a.kind)?,
        )?,
        Kind::Flag => {
            let g = erdos_renyi(
                required(a.n, "--n", a.kind)?,
                required(a.prob, "--prob", a.kind)?,
                a.seed,
            )?;
            flag_complex(&g, a.max_dim)
        }
        Kind::Rips => {
            let cloud = match &a.points {
                Some(path) => load_points(path)?,
                None => {
                    let c = sphere_sample(
                        required(a.n, "--n or --points", a.kind)?,
                        a.sphere_dim,
                        a.seed,
                    )?;
                    if a.diagonal {
                        diagonal_embed(&c)
                    } else {
                        c
                    }
                }
            };
            vietoris_rips(&cloud, required(a.epsilon, "--epsilon", a.kind)?, a.max_dim)?
        }
        Kind::Sphere => unreachable!(),
    };
    save_complex(&k, &a.out)?;
    Ok(format!("wrote {} cells to {}", k.len(), a.out.display()))
}

fn read_partition_file(path: &Path, k: &SimplicialComplex) -> Result<GraphPartition> {
    load_partition(BufReader::new(File::open(path)?), k.vertex_count(), None)
}

fn obtain_partition(
    k: &SimplicialComplex,
    parts: Option<usize>,
    file: Option<&Path>,
    seed: u64,
    default_parts: usize,
) -> Result<GraphPartition> {
    match file {
        Some(path) => read_partition_file(path, k),
        None => partition_graph(&one_skeleton_graph(k), parts.unwrap_or(default_parts), seed),
    }
}

fn cmd_partition(a: &PartitionArgs) -> Result<String> {
    let k = load_complex(&a.input)?;
    let p = partition_graph(&one_skeleton_graph(&k), a.parts, a.seed)?;
    match &a.out {
        Some(path) => write_partition(&p, BufWriter::new(File::create(path)?))?,
        None => write_partition(&p, io::stdout().lock())?,
    }
    Ok(String::new())
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn format_stats(s: &CoverStats, format: StatsFormat) -> String {
    let graph = fmt_opt(s.graph_balance_ratio.map(|x| format!("{x:.6}")));
    let cover = format!("{:.6}", s.cover_balance_ratio);
    let cut = fmt_opt(s.edgecut);
    let blowup = format!("{:.6}", s.predicted_blowup_f64());
    match format {
        StatsFormat::Csv => format!(
            "graph_balance_ratio,cover_balance_ratio,edgecut,blowup_factor\n{graph},{cover},{cut},{blowup}"
        ),
        StatsFormat::Plain => format!(
            "graph_balance_ratio {graph}\ncover_balance_ratio {cover}\nedgecut {cut}\nblowup_factor {blowup} ({})",
            s.predicted_blowup
        ),
    }
}

fn cmd_stats(a: &StatsArgs) -> Result<String> {
    let k = load_complex(&a.input)?;
    if a.parts.is_none() && a.partition_file.is_none() {
        return Err(usage("stats requires --parts or --partition-file"));
    }
    let p = obtain_partition(&k, a.parts, a.partition_file.as_deref(), a.seed, 1)?;
    let c = partition_based_cover(&k, &p)?;
    Ok(format_stats(&cover_stats(&c, &k, Some(&p)), a.format))
}

fn cmd_homology(a: &HomologyArgs) -> Result<String> {
    let algorithm = Algorithm::from(a.algorithm);
    if a.dump_blowup.is_some() && algorithm != Algorithm::Multicore {
        return Err(usage("--dump-blowup requires --algorithm mv"));
    }
    let k = load_complex(&a.input)?;
    let mut opts = PipelineOptions::new(a.threads).seed(a.seed);
    if let Some(q) = a.parts {
        opts = opts.parts(q);
    }
    if algorithm != Algorithm::Serial {
        if let Some(path) = &a.partition_file {
            opts = opts.partition(read_partition_file(path, &k)?);
        }
    }
    let report = run(algorithm, &k, &opts)?;

    if let (Some(path), Some(p)) = (&a.dump_blowup, &report.partition) {
        let b = build_blowup_complex(&k, &partition_based_cover(&k, p)?)?;
        let mut out = BufWriter::new(File::create(path)?);
        b.dump(&k, &mut out)?;
        out.flush()?;
    }
    if let Some(path) = &a.pairing_out {
        let mut out = BufWriter::new(File::create(path)?);
        for (c, d) in &report.pairing.pairs {
            writeln!(out, "{c} {d}")?;
        }
        for c in &report.pairing.unpaired {
            writeln!(out, "{c} -")?;
        }
        out.flush()?;
    }
    Ok(report.betti.to_string())
}

fn cmd_bench(a: &BenchArgs) -> Result<String> {
    let inputs = a
        .inputs
        .iter()
        .map(|p| Ok((p.display().to_string(), load_complex(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let config = BenchConfig {
        algorithms: a.algorithms.iter().map(|&x| x.into()).collect(),
        worker_list: a.threads_list.clone(),
        trials: a.trials,
        seed: a.seed,
    };
    let rows = run_benchmark(&inputs, &config)?;
    match &a.csv {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_csv(&rows, &mut out)?;
            out.flush()?;
            Ok(format!("wrote {} rows to {}", rows.len(), path.display()))
        }
        None => {
            write_csv(&rows, io::stdout().lock())?;
            Ok(String::new())
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<(i32, String)> {
    if a.max_vertices == 0 {
        return Err(usage("--max-vertices must be at least 1"));
    }
    let outcome = verify(&VerifyConfig {
        trials: a.trials,
        max_vertices: a.max_vertices,
        seed: a.seed,
        inject_fault: a.inject_fault,
    })?;
    let mut text = String::new();
    for f in &outcome.failures {
        text.push_str(&format!("# counterexample: instance {}\n", f.instance));
        for (name, beta) in &f.results {
            text.push_str(&format!("# {name}: {beta}\n"));
        }
        let mut buf = Vec::new();
        crate::io::write_complex(&f.complex, &mut buf)?;
        text.push_str(&String::from_utf8_lossy(&buf));
    }
    text.push_str(&format!(
        "{} instances, {} disagreements",
        outcome.instances,
        outcome.failures.len()
    ));
    let code = if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    };
    Ok((code, text))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::TooManyParts { .. } | Error::OracleTooLarge { .. } => {
            EXIT_USAGE
        }
        Error::Format { .. } | Error::Io(_) => EXIT_IO,
        Error::Structural(_) | Error::BettiMismatch(_) => EXIT_VERIFY,
    }
}

pub fn execute(cli: &Cli) -> Result<(i32, String)> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|s| (EXIT_OK, s)),
        Command::Partition(a) => cmd_partition(a).map(|s| (EXIT_OK, s)),
        Command::Stats(a) => cmd_stats(a).map(|s| (EXIT_OK, s)),
        Command::Homology(a) => cmd_homology(a).map(|s| (EXIT_OK, s)),
        Command::Bench(a) => cmd_bench(a).map(|s| (EXIT_OK, s)),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((code, text)) => {
            if !text.is_empty() {
                println!("{text}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parse_errors_are_usage_errors() {
        assert_eq!(main_with_args(["mvhom", "homology"]), EXIT_USAGE);
        assert_eq!(main_with_args(["mvhom", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn missing_kind_flag_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.cplx");
        let code = main_with_args([
            "mvhom",
            "generate",
            "--kind",
            "path",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_input_is_io_error() {
        assert_eq!(
            main_with_args(["mvhom", "homology", "/nonexistent/k.cplx"]),
            EXIT_IO
        );
    }
}
