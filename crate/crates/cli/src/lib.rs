//! Implementation of the `stpz` command-line tool.
//!
//! Every subcommand returns a JSON value for stdout or a [`CliError`] that
//! carries the process exit code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};
use stpz_core::codec::{self, tsvd_count_per_slice};
use stpz_core::decomp::{t_svd_trunc, tensor_stp_svd_trunc, SplitDims};
use stpz_core::imaging::{self, ImageBuffer};
use stpz_core::{BlockRank, Error, Tensor3};

#[derive(Debug, Parser)]
#[command(name = "stpz", version, about = "Tensor STP-SVD image compression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a PPM/PGM image and write an STPZ container.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m2: u32,
        #[arg(long)]
        n2: u32,
        /// `full`, a single rank for every slice, or one rank per slice.
        #[arg(long, default_value = "full")]
        rank: RankSpec,
        #[arg(long)]
        output: PathBuf,
    },
    /// Reconstruct an image from an STPZ container.
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare two images.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Time a decomposition and report quality and storage.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: BenchMethod,
        #[arg(long)]
        m2: u32,
        #[arg(long)]
        n2: u32,
        #[arg(long, default_value = "full")]
        rank: RankSpec,
    },
    /// Print the header of an STPZ container.
    Info {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMethod {
    Stpsvd,
    Tsvd,
}

/// Requested ranks, before the image shape is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankSpec {
    Full,
    Uniform(usize),
    PerSlice(Vec<usize>),
}

impl FromStr for RankSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(RankSpec::Full);
        }
        let parse = |t: &str| -> Result<usize, String> {
            match t.trim().parse::<usize>() {
                Ok(0) => Err("ranks must be positive".into()),
                Ok(v) => Ok(v),
                Err(_) => Err(format!(
                    "invalid rank {t:?}; expected `full`, `r` or `r1,r2,...`"
                )),
            }
        };
        if s.contains(',') {
            Ok(RankSpec::PerSlice(
                s.split(',').map(parse).collect::<Result<_, _>>()?,
            ))
        } else {
            Ok(RankSpec::Uniform(parse(s)?))
        }
    }
}

impl RankSpec {
    /// Expands to one rank per slice, each in `1..=max`.
    pub fn resolve(&self, l: usize, max: usize) -> Result<BlockRank, CliError> {
        let ranks = match self {
            RankSpec::Full => vec![max; l],
            RankSpec::Uniform(r) => vec![*r; l],
            RankSpec::PerSlice(v) if v.len() == l => v.clone(),
            RankSpec::PerSlice(v) => {
                return Err(CliError::Domain(format!(
                    "rank list has {} entries but the image has {l} channels",
                    v.len()
                )))
            }
        };
        if let Some(&r) = ranks.iter().find(|&&r| r > max) {
            return Err(CliError::Domain(format!(
                "rank {r} exceeds the maximum {max}"
            )));
        }
        BlockRank::new(ranks).map_err(CliError::from)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid parameters (exit 2).
    Domain(String),
    /// File system failure (exit 3).
    Io(String),
    /// Malformed input file (exit 4).
    Format(String),
    /// Numerical failure (exit 1).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
            CliError::Format(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
            CliError::Format(m) => write!(f, "malformed input: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Domain(m),
            Error::Numeric(m) => CliError::Numeric(m),
            e @ Error::Format { .. } => CliError::Format(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_image(path: &Path) -> Result<ImageBuffer, CliError> {
    imaging::load_ppm(&read(path)?)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Checks that `m2` divides the height and `n2` the width.
pub fn split_for(img: &ImageBuffer, m2: u32, n2: u32) -> Result<SplitDims, CliError> {
    for (what, factor, dim, extent) in [
        ("m2", m2, "height", img.height),
        ("n2", n2, "width", img.width),
    ] {
        let factor = factor as usize;
        if factor == 0 || extent % factor != 0 {
            let list: Vec<String> = divisors(extent).iter().map(|d| d.to_string()).collect();
            return Err(CliError::Domain(format!(
                "{what} = {factor} does not divide the image {dim} {extent}; valid choices: {}",
                list.join(", ")
            )));
        }
    }
    Ok(SplitDims::new(
        img.height,
        img.width,
        m2 as usize,
        n2 as usize,
    )?)
}

/// Decimal rendering of a ratio with six fractional digits.
pub fn ratio_decimal(r: Ratio<u64>) -> String {
    let scaled =
        (u128::from(*r.numer()) * 1_000_000 + u128::from(*r.denom()) / 2) / u128::from(*r.denom());
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

fn db(x: f64) -> Value {
    if x.is_infinite() {
        Value::from("inf")
    } else {
        json!(x)
    }
}

fn rasterize(t: &Tensor3) -> Result<ImageBuffer, CliError> {
    let out = imaging::tensor_to_image(t)?;
    if out.imag_warning {
        eprintln!(
            "warning: discarded imaginary parts up to {:.3e}",
            out.max_imag
        );
    }
    Ok(out.image)
}

pub fn compress(
    input: &Path,
    m2: u32,
    n2: u32,
    rank: &RankSpec,
    output: &Path,
) -> Result<Value, CliError> {
    let img = load_image(input)?;
    let dims = split_for(&img, m2, n2)?;
    let ranks = rank.resolve(img.channels, dims.max_rank())?;
    let tensor = imaging::image_to_tensor(&img);
    let start = Instant::now();
    let f = tensor_stp_svd_trunc(&tensor, dims.m2, dims.n2, &ranks)?;
    let secs = start.elapsed().as_secs_f64();
    write(output, &codec::serialize(&f)?)?;
    let count = codec::factor_count(&f);
    let cr = Ratio::new(count, (dims.rows() * dims.cols() * f.l()) as u64);
    Ok(json!({
        "storage_count": count,
        "cr": ratio_decimal(cr),
        "cr_fraction": cr.to_string(),
        "wall_time_seconds": secs,
    }))
}

pub fn decompress(input: &Path, output: &Path) -> Result<Value, CliError> {
    let f = codec::deserialize(&read(input)?)?;
    let img = rasterize(&f.reconstruct())?;
    write(output, &imaging::save_ppm(&img))?;
    Ok(json!({
        "width": img.width,
        "height": img.height,
        "channels": img.channels,
    }))
}

pub fn metrics(reference: &Path, test: &Path) -> Result<Value, CliError> {
    let a = load_image(reference)?;
    let b = load_image(test)?;
    Ok(json!({
        "psnr": db(imaging::psnr(&a, &b)?),
        "ssim": imaging::ssim(&a, &b)?,
        "related_error": imaging::relative_error(&a, &b)?,
    }))
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub method: &'static str,
    pub m2: u32,
    pub n2: u32,
    #[serde(rename = "R")]
    pub ranks: Vec<usize>,
    pub wall_time_seconds: f64,
    pub related_error: f64,
    pub psnr_db: Value,
    pub ssim: f64,
    pub storage_count: u64,
    pub cr: String,
    pub cr_fraction: String,
}

pub fn bench(
    input: &Path,
    method: BenchMethod,
    m2: u32,
    n2: u32,
    rank: &RankSpec,
) -> Result<Value, CliError> {
    let img = load_image(input)?;
    let dims = split_for(&img, m2, n2)?;
    let tensor = imaging::image_to_tensor(&img);
    let l = img.channels;
    let (name, ranks, secs, rec, count) = match method {
        BenchMethod::Stpsvd => {
            let ranks = rank.resolve(l, dims.max_rank())?;
            let start = Instant::now();
            let rec = tensor_stp_svd_trunc(&tensor, dims.m2, dims.n2, &ranks)?.reconstruct();
            let secs = start.elapsed().as_secs_f64();
            let count = codec::stp_count_per_slice(dims, &ranks);
            ("stpsvd", ranks, secs, rec, count)
        }
        BenchMethod::Tsvd => {
            let ranks = rank.resolve(l, img.height.min(img.width))?;
            let start = Instant::now();
            let rec = t_svd_trunc(&tensor, &ranks)?.reconstruct();
            let secs = start.elapsed().as_secs_f64();
            let count = tsvd_count_per_slice(img.height, img.width, &ranks);
            ("tsvd", ranks, secs, rec, count)
        }
    };
    let out = rasterize(&rec)?;
    let cr = Ratio::new(count, (img.height * img.width * l) as u64);
    let report = BenchReport {
        method: name,
        m2,
        n2,
        ranks: ranks.as_slice().to_vec(),
        wall_time_seconds: secs,
        related_error: imaging::relative_error(&img, &out)?,
        psnr_db: db(imaging::psnr(&img, &out)?),
        ssim: imaging::ssim(&img, &out)?,
        storage_count: count,
        cr: ratio_decimal(cr),
        cr_fraction: cr.to_string(),
    };
    serde_json::to_value(report).map_err(|e| CliError::Numeric(e.to_string()))
}

pub fn info(input: &Path) -> Result<Value, CliError> {
    let h = codec::read_container_header(&read(input)?)?;
    let cr = h.compression_rate();
    Ok(json!({
        "m1": h.dims.m1,
        "m2": h.dims.m2,
        "n1": h.dims.n1,
        "n2": h.dims.n2,
        "l": h.l(),
        "R": h.block_rank.as_slice(),
        "flags": h.flags,
        "real_input": h.real_input(),
        "storage_count": h.storage_count(),
        "cr": ratio_decimal(cr),
        "cr_fraction": cr.to_string(),
    }))
}

/// Applies `STPZ_THREADS` (unset or 0 = one thread per core).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STPZ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Domain(format!(
            "STPZ_THREADS = {raw:?} is not a non-negative integer"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Domain(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<Value, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Compress {
            input,
            m2,
            n2,
            rank,
            output,
        } => compress(&input, m2, n2, &rank, &output),
        Command::Decompress { input, output } => decompress(&input, &output),
        Command::Metrics { reference, test } => metrics(&reference, &test),
        Command::Bench {
            input,
            method,
            m2,
            n2,
            rank,
        } => bench(&input, method, m2, n2, &rank),
        Command::Info { input } => info(&input),
    }
}
