//! Corpus runs and parameter sweeps over directories of PGM images.

pub mod synthetic;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rdhei::{CodecParams, Container, GrayImage, HidingKey, ImageKey};

const IMAGE_KEY: &str = "bench image key";
const HIDING_KEY: &str = "bench hiding key";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Ok,
    /// The pipeline refused the image (incompressible, bad file and so on).
    Failed(String),
    /// The pipeline ran but did not give back the cover or the payload.
    NotReversible(String),
}

#[derive(Clone, Debug)]
pub struct ImageRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub capacity: usize,
    pub bpp: f64,
    pub mse: f64,
    pub ssim: f64,
    pub payload_bytes: usize,
    pub elapsed: Duration,
    pub outcome: Outcome,
}

impl ImageRecord {
    fn failed(name: String, rows: usize, cols: usize, elapsed: Duration, why: String) -> Self {
        ImageRecord {
            name,
            rows,
            cols,
            capacity: 0,
            bpp: 0.0,
            mse: f64::NAN,
            ssim: f64::NAN,
            payload_bytes: 0,
            elapsed,
            outcome: Outcome::Failed(why),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.outcome == Outcome::Ok
    }
}

#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    pub records: Vec<ImageRecord>,
}

impl CorpusReport {
    /// Mean bpp over the images that went through.
    pub fn mean_bpp(&self) -> f64 {
        let ok: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.is_ok())
            .map(|r| r.bpp)
            .collect();
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn reversibility_failures(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::NotReversible(_)))
            .count()
    }

    pub fn total_elapsed(&self) -> Duration {
        self.records.iter().map(|r| r.elapsed).sum()
    }
}

/// Deterministic payload of `len` bytes derived from the image name.
pub fn test_payload(name: &str, len: usize) -> Vec<u8> {
    let seed = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    });
    let mut out = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut out);
    out
}

/// Runs encode, a full-capacity embed, extract and recover on one image, and
/// checks that both the cover and the payload come back exactly.
pub fn run_image(name: &str, cover: &GrayImage, params: &CodecParams) -> ImageRecord {
    let start = Instant::now();
    let (rows, cols) = (cover.rows(), cover.cols());
    let fail = |why: String| ImageRecord::failed(name.to_owned(), rows, cols, start.elapsed(), why);
    let ke = ImageKey::new(IMAGE_KEY);
    let kh = HidingKey::new(HIDING_KEY);

    let encrypted = match rdhei::owner_encode(cover, &ke, params) {
        Ok(e) => e,
        Err(e) => return fail(e.to_string()),
    };
    let layout = match rdhei::room_layout(&encrypted.image) {
        Ok(l) => l,
        Err(e) => return fail(e.to_string()),
    };
    let payload = test_payload(name, layout.max_payload_bytes());
    let marked = match rdhei::embed(&encrypted.image, &payload, &kh) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let extracted = rdhei::extract(&marked, &kh);
    let recovered = rdhei::recover(&marked, &ke);
    let elapsed = start.elapsed();

    let mut record = ImageRecord {
        name: name.to_owned(),
        rows,
        cols,
        capacity: encrypted.capacity,
        bpp: rdhei::embedding_rate(encrypted.capacity, rows, cols),
        mse: f64::NAN,
        ssim: f64::NAN,
        payload_bytes: payload.len(),
        elapsed,
        outcome: Outcome::Ok,
    };
    let recovered = match recovered {
        Ok(img) => img,
        Err(e) => {
            record.outcome = Outcome::NotReversible(format!("recovery failed: {e}"));
            return record;
        }
    };
    record.mse = rdhei::mse(cover, &recovered).unwrap_or(f64::NAN);
    record.ssim = rdhei::ssim(cover, &recovered).unwrap_or(f64::NAN);
    record.outcome = match extracted {
        _ if recovered != *cover => {
            Outcome::NotReversible("recovered image differs from cover".into())
        }
        Ok(data) if data == payload => Outcome::Ok,
        Ok(_) => Outcome::NotReversible("extracted payload differs".into()),
        Err(e) => Outcome::NotReversible(format!("extraction failed: {e}")),
    };
    record
}

/// Runs [`run_image`] over named images in parallel; records keep the input order.
pub fn run_images(images: &[(String, GrayImage)], params: &CodecParams) -> CorpusReport {
    CorpusReport {
        records: images
            .par_iter()
            .map(|(name, img)| run_image(name, img, params))
            .collect(),
    }
}

/// Lists `*.pgm` files in `dir`, sorted by file name.
pub fn list_pgms(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| BenchError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

enum Loaded {
    Image(String, GrayImage),
    Broken(String, String),
}

fn load_corpus(dir: &Path) -> Result<Vec<Loaded>> {
    let files = list_pgms(dir)?;
    if files.is_empty() {
        return Err(BenchError::Usage(format!(
            "no PGM images in {}",
            dir.display()
        )));
    }
    Ok(files
        .par_iter()
        .map(|path| match rdhei::read_pgm(path) {
            Ok(img) => Loaded::Image(file_name(path), img),
            Err(e) => Loaded::Broken(file_name(path), e.to_string()),
        })
        .collect())
}

/// Full pipeline over every PGM in `dir`, ordered by file name. Unreadable
/// files are recorded as failures.
pub fn run_corpus(dir: &Path, params: &CodecParams) -> Result<CorpusReport> {
    params
        .validate()
        .map_err(|e| BenchError::Usage(e.to_string()))?;
    let records = load_corpus(dir)?
        .into_par_iter()
        .map(|item| match item {
            Loaded::Image(name, img) => run_image(&name, &img, params),
            Loaded::Broken(name, why) => ImageRecord::failed(name, 0, 0, Duration::ZERO, why),
        })
        .collect();
    Ok(CorpusReport { records })
}

/// Writes one CSV row per image.
pub fn write_records_csv(path: &Path, report: &CorpusReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "name",
        "rows",
        "cols",
        "c",
        "bpp",
        "mse",
        "ssim",
        "elapsed_ms",
        "status",
    ])?;
    for r in &report.records {
        let status = match &r.outcome {
            Outcome::Ok => "ok".to_owned(),
            Outcome::Failed(why) => format!("failed: {why}"),
            Outcome::NotReversible(why) => format!("not reversible: {why}"),
        };
        w.write_record([
            r.name.clone(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.capacity.to_string(),
            format!("{:.6}", r.bpp),
            r.mse.to_string(),
            r.ssim.to_string(),
            format!("{:.3}", r.elapsed.as_secs_f64() * 1e3),
            status,
        ])?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub corpus: PathBuf,
    pub t: Vec<usize>,
    pub l_fix: Vec<u8>,
    pub l_run: Vec<u8>,
    pub output: PathBuf,
    /// Seeds the choice of the cross-checked cell.
    pub seed: u64,
}

impl SweepSpec {
    pub fn cells(&self) -> Vec<CodecParams> {
        let mut cells = Vec::new();
        for &t in &self.t {
            for &l_fix in &self.l_fix {
                for &l_run in &self.l_run {
                    cells.push(CodecParams { t, l_fix, l_run });
                }
            }
        }
        cells
    }

    fn validate(&self) -> Result<()> {
        if self.t.is_empty() || self.l_fix.is_empty() || self.l_run.is_empty() {
            return Err(BenchError::Usage(
                "every parameter list needs at least one value".into(),
            ));
        }
        for cell in self.cells() {
            cell.validate()
                .map_err(|e| BenchError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub params: CodecParams,
    pub mean_bpp: f64,
    pub images: usize,
    pub failures: usize,
}

fn capacity(img: &GrayImage, params: &CodecParams) -> Option<usize> {
    let err = rdhei::predictor::compute_error_image(img);
    Container::build(&err, params).ok().map(|c| c.capacity())
}

/// Evaluates the mean embedding rate of every parameter cell over the corpus
/// and writes `t,lfix,lrun,mean_bpp,images,failures` rows to the output CSV.
///
/// One randomly chosen (cell, image) pair is re-encoded through the public
/// owner pipeline and must report the same capacity.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let images: Vec<(String, GrayImage)> = load_corpus(&spec.corpus)?
        .into_iter()
        .filter_map(|item| match item {
            Loaded::Image(name, img) => Some((name, img)),
            Loaded::Broken(..) => None,
        })
        .collect();
    let unreadable = list_pgms(&spec.corpus)?.len() - images.len();

    let cells = spec.cells();
    let per_cell: Vec<Vec<Option<usize>>> = cells
        .iter()
        .map(|params| {
            images
                .par_iter()
                .map(|(_, img)| capacity(img, params))
                .collect()
        })
        .collect();

    let rows: Vec<SweepRow> = cells
        .iter()
        .zip(&per_cell)
        .map(|(params, caps)| {
            let rates: Vec<f64> = images
                .iter()
                .zip(caps)
                .filter_map(|((_, img), c)| {
                    c.map(|c| rdhei::embedding_rate(c, img.rows(), img.cols()))
                })
                .collect();
            let mean_bpp = if rates.is_empty() {
                0.0
            } else {
                rates.iter().sum::<f64>() / rates.len() as f64
            };
            SweepRow {
                params: *params,
                mean_bpp,
                images: images.len() + unreadable,
                failures: images.len() - rates.len() + unreadable,
            }
        })
        .collect();

    if !images.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let ci = rng.random_range(0..cells.len());
        let ii = rng.random_range(0..images.len());
        cross_check(&images[ii], &cells[ci], per_cell[ci][ii])?;
    }

    write_sweep_csv(&spec.output, &rows)?;
    Ok(rows)
}

fn cross_check(
    (name, img): &(String, GrayImage),
    params: &CodecParams,
    expected: Option<usize>,
) -> Result<()> {
    let direct = rdhei::owner_encode(img, &ImageKey::new(IMAGE_KEY), params)
        .map(|e| e.capacity)
        .ok();
    if direct != expected {
        return Err(BenchError::CrossCheck(format!(
            "{name} with {params:?}: sweep gave {expected:?}, encoder gave {direct:?}"
        )));
    }
    Ok(())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "lfix", "lrun", "mean_bpp", "images", "failures"])?;
    for r in rows {
        w.write_record([
            r.params.t.to_string(),
            r.params.l_fix.to_string(),
            r.params.l_run.to_string(),
            format!("{:.6}", r.mean_bpp),
            r.images.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_owned(),
        source,
    })
}
