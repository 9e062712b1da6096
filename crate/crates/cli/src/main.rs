//! `rbc`: encode images as binary barcodes, build and search barcode
//! indexes, and score retrieval runs.
//!
//! Exit status is 0 on success, 1 on a domain error (bad barcode, empty
//! query set, incompatible encoders) and 2 on I/O or usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use radon_barcode::report::{build_report, format_table, parse_runs_jsonl, to_jsonl};
use radon_barcode::store::{encode_queries, load_gray};
use radon_barcode::{
    build_index, crop_roi, evaluate_run, ingest, load_index, save_index, top_k, Barcode,
    BarcodeIndex, EncoderConfig, Error, EvalOptions, LbpConfig, Query, RbcConfig, Roi, RunResult,
};

#[derive(Parser)]
#[command(name = "rbc", version, about = "Binary barcodes for image retrieval")]
struct Cli {
    /// Worker threads for encoding and search (default: logical CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print `<TAG> <bits> <hex>` for one image.
    Encode {
        image: PathBuf,
        #[command(flatten)]
        encoder: EncoderArgs,
        /// Encode only the region x,y,w,h.
        #[arg(long, value_parser = parse_roi)]
        roi: Option<Roi>,
    },
    /// Index operations.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Nearest index records for one image.
    Query {
        #[arg(long)]
        index: PathBuf,
        image: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Skip this record id.
        #[arg(long)]
        exclude: Option<String>,
        #[arg(long, value_parser = parse_roi)]
        roi: Option<Roi>,
    },
    /// Score one or more indexes against labelled queries.
    Evaluate {
        /// Repeat for several runs; η and rank need at least one.
        #[arg(long = "index", required = true)]
        indexes: Vec<PathBuf>,
        /// Image directory, or an index file of precomputed query barcodes.
        #[arg(long)]
        queries: PathBuf,
        /// `id;code` rows for the query images.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Never retrieve the record whose id equals the query id.
        #[arg(long)]
        exclude_self: bool,
        /// Count a wildcard position as half a mismatch.
        #[arg(long)]
        wildcard_half: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Draw a barcode as vertical stripes, 1 = black.
    Render {
        #[arg(long)]
        hex: String,
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        stripe_width: u32,
        #[arg(long, default_value_t = 32)]
        height: u32,
    },
    /// Rank saved runs (JSON lines) by suitability.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Encode every image in a directory into an index file.
    Build {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        encoder: EncoderArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Rbc,
    Lbp,
    Lrbp,
}

#[derive(Args)]
struct EncoderArgs {
    #[arg(long, value_enum, default_value = "rbc")]
    encoder: Kind,
    /// Projection angles (RBC, LRBP).
    #[arg(long = "np")]
    n_p: Option<u32>,
    /// Side of the normalized image.
    #[arg(long)]
    size: Option<usize>,
    /// Bits per projection (RBC).
    #[arg(long)]
    bins: Option<usize>,
}

/// Reports a bad flag combination the way clap reports parse errors.
fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

impl EncoderArgs {
    fn config(&self) -> EncoderConfig {
        let config = match self.encoder {
            Kind::Rbc => {
                let d = RbcConfig::default();
                EncoderConfig::Rbc(RbcConfig {
                    n_p: self.n_p.unwrap_or(d.n_p),
                    normalized_size: self.size.unwrap_or(d.normalized_size),
                    bins_per_angle: self.bins.unwrap_or(d.bins_per_angle),
                })
            }
            Kind::Lbp | Kind::Lrbp => {
                if self.bins.is_some() {
                    usage_error("--bins applies to rbc only");
                }
                let d = LbpConfig::default();
                let lbp = LbpConfig {
                    normalized_size: self.size.unwrap_or(d.normalized_size),
                    lrbp_n_p: self.n_p.unwrap_or(d.lrbp_n_p),
                };
                if matches!(self.encoder, Kind::Lbp) {
                    if self.n_p.is_some() {
                        usage_error("--np does not apply to lbp");
                    }
                    EncoderConfig::Lbp(lbp)
                } else {
                    EncoderConfig::Lrbp(lbp)
                }
            }
        };
        if let Err(e) = config.validate() {
            usage_error(e);
        }
        config
    }
}

fn parse_roi(s: &str) -> Result<Roi, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x,y,w,h: {e}"))?;
    match parts[..] {
        [x, y, w, h] => Ok(Roi { x, y, w, h }),
        _ => Err("expected four numbers x,y,w,h".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Encode { image, encoder, roi } => {
            let config = encoder.config();
            let code = config.encode(&read_image(&image, roi)?)?;
            println!("{} {} {}", config.method_name(), code.bit_len(), code.to_hex());
        }
        Command::Index {
            command: IndexCommand::Build { images, labels, encoder, out },
        } => index_build(&images, labels.as_deref(), &encoder.config(), &out)?,
        Command::Query { index, image, k, exclude, roi } => {
            let index = load_index(&index)?;
            let code = index.config().encode(&read_image(&image, roi)?)?;
            for m in top_k(&code, &index, k, exclude.as_deref())? {
                let label = index
                    .get(&m.id)
                    .and_then(|r| r.code)
                    .map_or_else(|| "-".to_string(), |c| c.to_string());
                println!("{}\t{}\t{:.6}\t{}", m.rank, m.id, m.similarity, label);
            }
        }
        Command::Evaluate {
            indexes,
            queries,
            labels,
            exclude_self,
            wildcard_half,
            out_dir,
        } => {
            let opts = EvalOptions {
                method_name: None,
                exclude_self,
                wildcard_half,
            };
            evaluate(&indexes, &queries, labels.as_deref(), &opts, &out_dir)?
        }
        Command::Render { hex, bits, out, stripe_width, height } => {
            render(&Barcode::from_hex(hex.trim(), bits)?, stripe_width, height, &out)?
        }
        Command::Report { runs, out_dir } => {
            let mut all = Vec::new();
            for path in &runs {
                let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
                all.extend(parse_runs_jsonl(&text).map_err(|e| in_file(path, e))?);
            }
            if all.is_empty() {
                return Err(Error::NothingToEvaluate("no runs in the given files"));
            }
            write_report(&all, out_dir.as_deref())?;
        }
    }
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::RunLine { line, reason } => Error::RunLine {
            line,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    }
}

fn read_image(path: &Path, roi: Option<Roi>) -> Result<radon_barcode::GrayImage, Error> {
    let img = load_gray(path)?;
    match roi {
        Some(r) => crop_roi(&img, r),
        None => Ok(img),
    }
}

fn index_build(images: &Path, labels: Option<&Path>, config: &EncoderConfig, out: &Path) -> Result<(), Error> {
    let ingested = ingest(images, labels)?;
    for issue in &ingested.skipped {
        eprintln!("warning: labels line {}: {}", issue.line, issue.reason);
    }
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    let built = build_index(&ingested.manifest, config)?;
    for f in &built.failures {
        eprintln!("warning: skipped {}: {}", f.path.display(), f.error);
    }
    save_index(&built.index, out)?;
    println!(
        "{} records ({} labelled, {} failed) {} {} bits -> {}",
        built.index.len(),
        built.index.records().iter().filter(|r| r.code.is_some()).count(),
        built.failures.len(),
        config.method_name(),
        config.bit_len(),
        out.display()
    );
    Ok(())
}

fn evaluate(
    index_paths: &[PathBuf],
    queries: &Path,
    labels: Option<&Path>,
    opts: &EvalOptions,
    out_dir: &Path,
) -> Result<(), Error> {
    // Query images are ingested once and encoded per index configuration.
    let query_source = if queries.is_file() {
        QuerySource::Index(load_index(queries)?)
    } else {
        let ingested = ingest(queries, labels)?;
        for issue in &ingested.skipped {
            eprintln!("warning: labels line {}: {}", issue.line, issue.reason);
        }
        QuerySource::Images(ingested.manifest)
    };

    let mut runs: Vec<RunResult> = Vec::new();
    let mut retrievals = String::from("method\tquery\tquery_code\tretrieved\tretrieved_code\tsimilarity\terror\n");
    for path in index_paths {
        let index = load_index(path)?;
        let qs = query_source.queries(&index)?;
        let ev = evaluate_run(&index, &qs, opts)?;
        for r in &ev.retrievals {
            retrievals.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\n",
                ev.run.method_name, r.query_id, r.query_code, r.retrieved_id, r.retrieved_code, r.similarity, r.error
            ));
        }
        runs.push(ev.run);
    }
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let path = out_dir.join("retrievals.tsv");
    fs::write(&path, retrievals).map_err(|e| io_error(&path, e))?;
    write_report(&runs, Some(out_dir))
}

enum QuerySource {
    Images(radon_barcode::DatasetManifest),
    Index(BarcodeIndex),
}

impl QuerySource {
    fn queries(&self, index: &BarcodeIndex) -> Result<Vec<Query>, Error> {
        match self {
            QuerySource::Images(manifest) => {
                let (queries, failures) = encode_queries(manifest, index.config())?;
                for f in &failures {
                    eprintln!("warning: skipped query {}: {}", f.path.display(), f.error);
                }
                Ok(queries)
            }
            QuerySource::Index(q) => {
                if q.bit_len() != index.bit_len() {
                    return Err(Error::LengthMismatch { left: q.bit_len(), right: index.bit_len() });
                }
                if q.config().tag() != index.config().tag() {
                    return Err(Error::Incompatible(format!(
                        "queries are {} barcodes, index is {}",
                        q.config().method_name(),
                        index.config().method_name()
                    )));
                }
                Ok(q.records()
                    .iter()
                    .filter_map(|r| {
                        r.code.map(|code| Query { id: r.id.clone(), code, barcode: r.barcode.clone() })
                    })
                    .collect())
            }
        }
    }
}

fn write_report(runs: &[RunResult], out_dir: Option<&Path>) -> Result<(), Error> {
    let rows = build_report(runs);
    let table = format_table(&rows);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for (name, body) in [("report.txt", table.clone()), ("report.jsonl", to_jsonl(&rows))] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        }
    }
    print!("{table}");
    Ok(())
}

fn render(code: &Barcode, stripe_width: u32, height: u32, out: &Path) -> Result<(), Error> {
    if stripe_width == 0 || height == 0 {
        return Err(Error::InvalidConfig("stripe width and height must be positive".into()));
    }
    let width = u32::try_from(code.bit_len())
        .ok()
        .and_then(|n| n.checked_mul(stripe_width))
        .ok_or_else(|| Error::InvalidConfig("image too wide".into()))?;
    let img = image::GrayImage::from_fn(width, height, |x, _| {
        image::Luma([if code.get((x / stripe_width) as usize) == Some(true) { 0 } else { 255 }])
    });
    img.save_with_format(out, image::ImageFormat::Png)
        .map_err(|e| Error::Io { path: out.to_path_buf(), source: std::io::Error::other(e) })
}
