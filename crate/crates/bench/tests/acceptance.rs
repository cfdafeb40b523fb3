//! Acceptance suite. Runs every exit criterion, prints one PASS/FAIL line
//! each and exits non-zero if any failed.
//!
//! Run with `cargo test -p rdhei-bench --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdhei::bitplane::RearrangeMode;
use rdhei::codec::{self, build_huffman, count_symbols, CompressedPlane, HuffmanTable};
use rdhei::container::AuxInfo;
use rdhei::crypto::{encrypt_image, xor_encrypt, SecretKey};
use rdhei::predictor::compute_error_image;
use rdhei::{BitBuffer, CodecParams, Container, GrayImage, HidingKey, ImageKey, MarkedImage};
use rdhei_bench::synthetic::{gradient, overlay_noise};
use rdhei_bench::{list_pgms, run_images, sweep, SweepRow, SweepSpec};

const REVERSIBILITY_IMAGES: usize = 50;
const REVERSIBILITY_BUDGET: Duration = Duration::from_secs(60);

const LENA_BPP: f64 = 3.15;
const LENA_BPP_TOL: f64 = 0.15;
// Planes 7, 6, 5, 4.
const LENA_PLANES: [usize; 4] = [3907, 16443, 53336, 148255];
const BABOON_BPP: f64 = 1.526;
const BABOON_BPP_TOL: f64 = 0.08;
// Planes 7, 6, 5.
const BABOON_PLANES: [usize; 3] = [37337, 129710, 218774];
const PLANE_TOL: f64 = 0.05;
const ARITHMETIC_TOL: f64 = 0.01;

const FUZZ_CASES: usize = 10_000;

const SWEEP_MIN_IMAGES: usize = 20;
const SWEEP_TOL: f64 = 0.02;

// Upper 0.1% point of chi-square with 255 degrees of freedom.
const CHI_SQUARE_THRESHOLD: f64 = 330.52;
const WRONG_KEY_TRIALS: usize = 100;
const WRONG_KEY_MIN_DETECTED: usize = 95;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> PathBuf {
    workspace_root().join("data").join(name)
}

fn load(path: &Path) -> GrayImage {
    rdhei::read_pgm(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn reversibility() -> Verdict {
    let naturals = list_pgms(&data("natural")).expect("data/natural");
    let mut images: Vec<(String, GrayImage)> = Vec::new();
    for (i, (rows, cols)) in [(64, 64), (96, 160), (128, 128), (200, 120), (256, 256)]
        .into_iter()
        .cycle()
        .take(10)
        .enumerate()
    {
        images.push((
            format!("gradient{i}"),
            gradient(rows, cols, 1000 + i as u64),
        ));
    }
    for (i, path) in naturals.iter().take(10).enumerate() {
        let noisy = overlay_noise(&load(path), 2, 2000 + i as u64);
        images.push((
            format!("noisy-{}", path.file_name().unwrap().to_string_lossy()),
            noisy,
        ));
    }
    for path in [data("lena.pgm"), data("baboon.pgm")]
        .iter()
        .chain(&naturals)
    {
        if images.len() == REVERSIBILITY_IMAGES {
            break;
        }
        images.push((
            path.file_name().unwrap().to_string_lossy().into_owned(),
            load(path),
        ));
    }
    if images.len() < REVERSIBILITY_IMAGES {
        return verdict(false, format!("only {} images available", images.len()));
    }

    let start = Instant::now();
    let report = run_images(&images, &CodecParams::default());
    let wall = start.elapsed();
    let bad: Vec<String> = report
        .records
        .iter()
        .filter(|r| !r.is_ok() || r.mse != 0.0 || r.ssim != 1.0)
        .map(|r| format!("{}: {:?}", r.name, r.outcome))
        .collect();
    let pass = bad.is_empty() && wall < REVERSIBILITY_BUDGET;
    verdict(
        pass,
        format!(
            "{}/{} images exact (mean {:.3} bpp), {:.1} s wall (budget {} s){}",
            images.len() - bad.len(),
            images.len(),
            report.mean_bpp(),
            wall.as_secs_f64(),
            REVERSIBILITY_BUDGET.as_secs(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; deviations: {}", bad.join(", "))
            }
        ),
    )
}

struct PlaneProfile {
    bpp: f64,
    // Payload bits per plane index 1..=8, `None` when stored raw.
    payload: Vec<Option<usize>>,
}

fn profile(path: &Path) -> PlaneProfile {
    let img = load(path);
    let container =
        Container::build(&compute_error_image(&img), &CodecParams::default()).expect("encodes");
    PlaneProfile {
        bpp: rdhei::embedding_rate(container.capacity(), img.rows(), img.cols()),
        payload: (1..=8).map(|k| container.plane_payload_len(k)).collect(),
    }
}

fn within(actual: usize, expected: usize, rel: f64) -> bool {
    (actual as f64 - expected as f64).abs() <= rel * expected as f64
}

fn plane_check(
    p: &PlaneProfile,
    expected: &[usize],
    first_plane: u8,
    raw_plane: u8,
) -> (bool, String) {
    let mut ok = p.payload[raw_plane as usize - 1].is_none();
    let mut parts = vec![format!(
        "plane {raw_plane} {}",
        if ok {
            "raw"
        } else {
            "compressed (expected raw)"
        }
    )];
    for (i, &want) in expected.iter().enumerate() {
        let k = first_plane - i as u8;
        let got = p.payload[k as usize - 1];
        let hit = got.is_some_and(|g| within(g, want, PLANE_TOL));
        ok &= hit;
        parts.push(format!(
            "plane {k} {} vs {want}",
            got.map_or("raw".to_owned(), |g| g.to_string())
        ));
    }
    (ok, parts.join(", "))
}

fn lena_capacity() -> Verdict {
    let p = profile(&data("lena.pgm"));
    let bpp_ok = (p.bpp - LENA_BPP).abs() <= LENA_BPP_TOL;
    let (planes_ok, planes) = plane_check(&p, &LENA_PLANES, 7, 8);
    verdict(
        bpp_ok && planes_ok,
        format!(
            "{:.4} bpp (want {LENA_BPP} +/- {LENA_BPP_TOL}); {planes}",
            p.bpp
        ),
    )
}

fn baboon_capacity() -> Verdict {
    let p = profile(&data("baboon.pgm"));
    let bpp_ok = (p.bpp - BABOON_BPP).abs() <= BABOON_BPP_TOL;
    let (planes_ok, planes) = plane_check(&p, &BABOON_PLANES, 7, 4);
    verdict(
        bpp_ok && planes_ok,
        format!(
            "{:.4} bpp (want {BABOON_BPP} +/- {BABOON_BPP_TOL}); {planes}",
            p.bpp
        ),
    )
}

fn rate_from_sizes(compressed: &[(u8, usize)]) -> f64 {
    let (rows, cols) = (512, 512);
    let planes: Vec<CompressedPlane> = (1..=8u8)
        .map(|k| match compressed.iter().find(|(p, _)| *p == k) {
            Some(&(_, len)) => CompressedPlane::Compressed {
                mode: RearrangeMode::RASTER,
                payload: BitBuffer::zeros(len),
            },
            None => CompressedPlane::Raw {
                bits: BitBuffer::zeros(rows * cols),
            },
        })
        .collect();
    let params = CodecParams::default();
    let aux = AuxInfo {
        params,
        code_lengths: vec![0; params.symbol_count()],
        overflow_positions: Vec::new(),
    };
    let c = rdhei::compute_capacity(&planes, &aux, rows, cols).expect("fits");
    rdhei::embedding_rate(c, rows, cols)
}

fn capacity_arithmetic() -> Verdict {
    let lena = rate_from_sizes(&[(7, 3907), (6, 16443), (5, 53336), (4, 148255)]);
    let baboon = rate_from_sizes(&[(7, 37337), (6, 129710), (5, 218774)]);
    let pass =
        (lena - LENA_BPP).abs() <= ARITHMETIC_TOL && (baboon - BABOON_BPP).abs() <= ARITHMETIC_TOL;
    verdict(
        pass,
        format!("Lena {lena:.4} bpp vs {LENA_BPP}, Baboon {baboon:.4} bpp vs {BABOON_BPP} (tol {ARITHMETIC_TOL})"),
    )
}

fn golden_vector() -> Verdict {
    let params = CodecParams::new(1, 3, 5).unwrap();
    let table = HuffmanTable::from_codewords(3, &[(0b101, "11"), (0b010, "010")]).unwrap();
    let input = BitBuffer::from_bit_str("00000000000000000101010");
    let coded = codec::encode(input.as_slice(), &params, &table).unwrap();
    let decoded = codec::decode(coded.as_slice(), &params, &table, input.len()).unwrap();
    let pass = coded.to_bit_string() == "01000101111010" && decoded == input.as_slice();
    verdict(
        pass,
        format!(
            "encoded {} (want 01000101111010), decode inverts: {}",
            coded.to_bit_string(),
            decoded == input.as_slice()
        ),
    )
}

fn random_sequence(rng: &mut ChaCha8Rng) -> Vec<bool> {
    let len = rng.random_range(0..2048);
    let mut bit = rng.random::<bool>();
    let mut out = Vec::with_capacity(len);
    match rng.random_range(0..3) {
        0 => out.extend((0..len).map(|_| rng.random::<bool>())),
        1 => {
            let p = rng.random_range(0.0..0.2);
            out.extend((0..len).map(|_| rng.random_bool(p)));
        }
        _ => {
            while out.len() < len {
                let run = rng.random_range(1..200).min(len - out.len());
                out.extend(std::iter::repeat_n(bit, run));
                bit = !bit;
            }
        }
    }
    out
}

fn codec_fuzz() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    for case in 0..FUZZ_CASES {
        let params =
            CodecParams::new(1, rng.random_range(2..=8), rng.random_range(2..=16)).unwrap();
        let seq = random_sequence(&mut rng);
        let table = build_huffman(&count_symbols([&seq[..]], &params));
        let ok = codec::encode(&seq, &params, &table)
            .and_then(|c| codec::decode(c.as_slice(), &params, &table, seq.len()))
            .is_ok_and(|d| d == seq);
        if !ok {
            failures.push(case);
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{FUZZ_CASES} cases, {} failures{}",
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" (first: case {})", failures[0])
            }
        ),
    )
}

fn best(rows: &[SweepRow]) -> &SweepRow {
    rows.iter()
        .max_by(|a, b| a.mean_bpp.total_cmp(&b.mean_bpp))
        .expect("non-empty")
}

fn describe(r: &SweepRow) -> String {
    format!(
        "(t={}, {}, {}) {:.4}",
        r.params.t, r.params.l_fix, r.params.l_run, r.mean_bpp
    )
}

fn sweep_trends() -> Verdict {
    let corpus = data("natural");
    let images = list_pgms(&corpus).map(|v| v.len()).unwrap_or(0);
    if images < SWEEP_MIN_IMAGES {
        return verdict(
            false,
            format!("corpus has {images} images, need {SWEEP_MIN_IMAGES}"),
        );
    }
    let out = tempfile::tempdir().unwrap();
    let grid = sweep(&SweepSpec {
        corpus: corpus.clone(),
        t: vec![4],
        l_fix: vec![3, 4, 5, 6],
        l_run: vec![3, 4, 5, 6],
        output: out.path().join("grid.csv"),
        seed: 11,
    })
    .expect("grid sweep");
    let blocks = sweep(&SweepSpec {
        corpus,
        t: vec![2, 3, 4, 8],
        l_fix: vec![6],
        l_run: vec![5],
        output: out.path().join("blocks.csv"),
        seed: 12,
    })
    .expect("block sweep");

    let default = |rows: &[SweepRow]| -> f64 {
        rows.iter()
            .find(|r| r.params == CodecParams::default())
            .expect("default cell")
            .mean_bpp
    };
    let grid_gap = best(&grid).mean_bpp - default(&grid);
    let block_gap = best(&blocks).mean_bpp - default(&blocks);
    let failures: usize = grid.iter().chain(&blocks).map(|r| r.failures).sum();
    verdict(
        grid_gap <= SWEEP_TOL && block_gap <= SWEEP_TOL,
        format!(
            "{images} images; (6,5) is {grid_gap:.4} below grid max {}; t=4 is {block_gap:.4} below block max {}; tol {SWEEP_TOL}; {failures} failed encodes",
            describe(best(&grid)),
            describe(best(&blocks)),
        ),
    )
}

fn chi_square(img: &GrayImage) -> f64 {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let expected = img.len() as f64 / 256.0;
    hist.iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum()
}

fn encryption() -> Verdict {
    let lena = load(&data("lena.pgm"));
    let key = SecretKey::from("acceptance key");
    let involution = encrypt_image(&encrypt_image(&lena, &key), &key) == lena
        && xor_encrypt(&xor_encrypt(lena.pixels(), &key), &key) == lena.pixels();

    let ke = ImageKey::new("acceptance image key");
    let encrypted = rdhei::owner_encode(&lena, &ke, &CodecParams::default()).expect("encodes");
    let chi2 = chi_square(&encrypted.image);

    let layout = rdhei::room_layout(&encrypted.image).unwrap();
    let payload = rdhei_bench::test_payload("acceptance", layout.max_payload_bytes());
    let marked = rdhei::embed(
        &encrypted.image,
        &payload,
        &HidingKey::new("acceptance hiding key"),
    )
    .unwrap();
    let mut detected = 0;
    let mut silent = 0;
    for trial in 0..WRONG_KEY_TRIALS {
        match rdhei::recover(&marked, &ImageKey::new(format!("wrong key {trial}"))) {
            Err(_) => detected += 1,
            Ok(img) if img != lena => silent += 1,
            Ok(_) => {}
        }
    }
    let right = rdhei::recover(&MarkedImage::from(marked.as_image().clone()), &ke)
        .is_ok_and(|img| img == lena);

    verdict(
        involution && chi2 < CHI_SQUARE_THRESHOLD && detected >= WRONG_KEY_MIN_DETECTED && right,
        format!(
            "involution {involution}; chi-square {chi2:.1} (threshold {CHI_SQUARE_THRESHOLD}); wrong key detected {detected}/{WRONG_KEY_TRIALS}, silent wrong images {silent}; right key recovers {right}"
        ),
    )
}

fn run_example(name: &str, feature: &str, target: &Path) -> Result<String, String> {
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let out = Command::new(cargo)
        .current_dir(workspace_root())
        .env("CARGO_TARGET_DIR", target)
        .args([
            "run",
            "-q",
            "-p",
            "rdhei",
            "--no-default-features",
            "--features",
            feature,
            "--example",
            name,
        ])
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_owned())
    } else {
        Err(String::from_utf8_lossy(&out.stderr)
            .lines()
            .last()
            .unwrap_or("")
            .to_owned())
    }
}

fn separability() -> Verdict {
    let target = workspace_root().join("target").join("separability");
    let extract = run_example("extract_only", "extract", &target);
    let recover = run_example("recover_only", "recover", &target);
    verdict(
        extract.is_ok() && recover.is_ok(),
        format!("extract-only build: {extract:?}; recover-only build: {recover:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("reversibility on a mixed corpus", reversibility),
        ("Lena capacity and plane sizes", lena_capacity),
        ("Baboon capacity and plane sizes", baboon_capacity),
        (
            "capacity accounting from reference plane sizes",
            capacity_arithmetic,
        ),
        ("joint coding golden vector", golden_vector),
        ("codec round-trip fuzz", codec_fuzz),
        ("parameter sweep trends", sweep_trends),
        ("encryption properties", encryption),
        ("extract/recover separability", separability),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));

    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {title}: {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
