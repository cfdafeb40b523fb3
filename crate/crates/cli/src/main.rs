//! `rdhei` command-line tool.
//!
//! Results are printed to stdout as `key=value` lines; everything else goes
//! to stderr. Exit codes: 0 success, 2 usage, 3 capacity, 4 corruption or
//! wrong key, 5 I/O or file format.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdhei::codec::{DEFAULT_BLOCK_SIZE, DEFAULT_FIXED_LEN, DEFAULT_RUN_BITS};
use rdhei::{CodecParams, Error, GrayImage, HidingKey, ImageKey, MarkedImage};

const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_CORRUPT: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "rdhei",
    version,
    about = "Reversible data hiding in encrypted grayscale images"
)]
struct Cli {
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reserve room in a cover image and encrypt it.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        key: ImageKeyArgs,
        /// Rearrangement block size.
        #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
        t: usize,
        /// Fixed window length of the Huffman-coded part.
        #[arg(long, default_value_t = DEFAULT_FIXED_LEN)]
        lfix: u8,
        /// Width of run-length fields.
        #[arg(long, default_value_t = DEFAULT_RUN_BITS)]
        lrun: u8,
    },
    /// Write an encrypted payload into the reserved room.
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        key: DataKeyArgs,
    },
    /// Read the payload back with the data-hiding key.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        key: DataKeyArgs,
    },
    /// Rebuild the original cover with the image key.
    Recover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        key: ImageKeyArgs,
    },
    /// Show the room size of an encrypted or marked image.
    Capacity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Compare two images.
    Metrics {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

/// Image encryption key: a UTF-8 string, a file of raw bytes, or hex.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ImageKeyArgs {
    #[arg(long = "key-image")]
    string: Option<String>,
    #[arg(long = "key-image-file")]
    file: Option<PathBuf>,
    #[arg(long = "key-image-hex")]
    hex: Option<String>,
}

/// Data-hiding key: a UTF-8 string, a file of raw bytes, or hex.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct DataKeyArgs {
    #[arg(long = "key-data")]
    string: Option<String>,
    #[arg(long = "key-data-file")]
    file: Option<PathBuf>,
    #[arg(long = "key-data-hex")]
    hex: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Capacity { .. } | Error::Incompressible(_) => EXIT_CAPACITY,
            Error::Corruption(_) => EXIT_CORRUPT,
            Error::Parameter(_) => EXIT_USAGE,
            Error::Io(_) | Error::Format(_) | Error::UnsupportedDepth(_) | Error::Size(_) => {
                EXIT_IO
            }
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn raw_key(
    string: Option<String>,
    file: Option<PathBuf>,
    hex_value: Option<String>,
) -> Result<Vec<u8>, Failure> {
    match (string, file, hex_value) {
        (Some(s), _, _) => Ok(s.into_bytes()),
        (_, Some(path), _) => fs::read(&path).map_err(|e| Failure::io(&path, e)),
        (_, _, Some(h)) => {
            hex::decode(h.trim()).map_err(|e| Failure::usage(format!("bad hex key: {e}")))
        }
        _ => Err(Failure::usage("no key given")),
    }
}

impl ImageKeyArgs {
    fn resolve(self) -> Result<ImageKey, Failure> {
        raw_key(self.string, self.file, self.hex).map(ImageKey::new)
    }
}

impl DataKeyArgs {
    fn resolve(self) -> Result<HidingKey, Failure> {
        raw_key(self.string, self.file, self.hex).map(HidingKey::new)
    }
}

fn load(path: &Path) -> Result<GrayImage, Failure> {
    rdhei::read_pgm(path).map_err(|e| match e {
        Error::Io(io) => Failure::io(path, io),
        other => {
            let f = Failure::from(other);
            Failure {
                message: format!("{}: {}", path.display(), f.message),
                ..f
            }
        }
    })
}

fn save(path: &Path, img: &GrayImage) -> Result<(), Failure> {
    rdhei::write_pgm(img, path).map_err(|e| match e {
        Error::Io(io) => Failure::io(path, io),
        other => other.into(),
    })
}

fn print_capacity(capacity: usize, img: &GrayImage) {
    println!("c={capacity}");
    println!(
        "bpp={:.6}",
        rdhei::embedding_rate(capacity, img.rows(), img.cols())
    );
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Encode {
            input,
            out,
            key,
            t,
            lfix,
            lrun,
        } => {
            let params = CodecParams::new(t, lfix, lrun)?;
            let key = key.resolve()?;
            let cover = load(&input)?;
            if verbose {
                eprintln!(
                    "encoding {}x{} image with {params:?}",
                    cover.rows(),
                    cover.cols()
                );
            }
            let encrypted = rdhei::owner_encode(&cover, &key, &params)?;
            save(&out, &encrypted.image)?;
            print_capacity(encrypted.capacity, &cover);
        }
        Command::Embed {
            input,
            payload,
            out,
            key,
        } => {
            let key = key.resolve()?;
            let encrypted = load(&input)?;
            let data = fs::read(&payload).map_err(|e| Failure::io(&payload, e))?;
            if verbose {
                eprintln!("embedding {} bytes", data.len());
            }
            let marked = rdhei::embed(&encrypted, &data, &key)?;
            save(&out, marked.as_image())?;
        }
        Command::Extract { input, out, key } => {
            let key = key.resolve()?;
            let marked = MarkedImage::from(load(&input)?);
            let data = rdhei::extract(&marked, &key)?;
            if verbose {
                eprintln!("extracted {} bytes", data.len());
            }
            fs::write(&out, &data).map_err(|e| Failure::io(&out, e))?;
        }
        Command::Recover { input, out, key } => {
            let key = key.resolve()?;
            let marked = MarkedImage::from(load(&input)?);
            let cover = rdhei::recover(&marked, &key)?;
            save(&out, &cover)?;
        }
        Command::Capacity { input } => {
            let img = load(&input)?;
            print_capacity(rdhei::read_capacity(&img)?, &img);
        }
        Command::Metrics { a, b } => {
            let a = load(&a)?;
            let b = load(&b)?;
            println!("mse={}", rdhei::mse(&a, &b)?);
            println!("ssim={}", rdhei::ssim(&a, &b)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rdhei: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
