use std::path::Path;

use rdhei::CodecParams;
use rdhei_bench::synthetic::{gradient, noise};
use rdhei_bench::{run_corpus, sweep, BenchError, Outcome, SweepSpec};

fn write_corpus(dir: &Path, images: &[(String, rdhei::GrayImage)]) {
    for (name, img) in images {
        rdhei::write_pgm(img, dir.join(name)).unwrap();
    }
}

#[test]
fn smooth_corpus_exceeds_three_bpp() {
    let dir = tempfile::tempdir().unwrap();
    let images: Vec<_> = (0..10)
        .map(|i| (format!("g{i:02}.pgm"), gradient(128, 128, i)))
        .collect();
    write_corpus(dir.path(), &images);
    let report = run_corpus(dir.path(), &CodecParams::default()).unwrap();
    assert_eq!(report.records.len(), 10);
    assert_eq!(report.failures(), 0, "{:?}", report.records);
    for r in &report.records {
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.ssim, 1.0);
        assert!(r.payload_bytes > 0);
    }
    assert!(report.mean_bpp() > 3.0, "mean bpp {}", report.mean_bpp());
    let names: Vec<_> = report.records.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn noise_images_are_recorded_as_failures() {
    let dir = tempfile::tempdir().unwrap();
    let mut images: Vec<_> = (0..3)
        .map(|i| (format!("n{i}.pgm"), noise(64, 64, i)))
        .collect();
    images.push(("smooth.pgm".into(), gradient(64, 64, 9)));
    write_corpus(dir.path(), &images);
    std::fs::write(dir.path().join("broken.pgm"), b"P5\n4 4\n255\n").unwrap();
    let report = run_corpus(dir.path(), &CodecParams::default()).unwrap();
    assert_eq!(report.records.len(), 5);
    assert_eq!(report.failures(), 4);
    assert_eq!(report.reversibility_failures(), 0);
    for r in &report.records {
        match r.name.as_str() {
            "smooth.pgm" => assert_eq!(r.outcome, Outcome::Ok),
            "broken.pgm" => assert!(matches!(r.outcome, Outcome::Failed(_))),
            _ => assert!(
                matches!(&r.outcome, Outcome::Failed(why) if why.contains("incompressible"))
            ),
        }
    }
}

#[test]
fn empty_corpus_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        run_corpus(dir.path(), &CodecParams::default()),
        Err(BenchError::Usage(_))
    ));
    let spec = SweepSpec {
        corpus: dir.path().to_owned(),
        t: vec![4],
        l_fix: vec![6],
        l_run: vec![5],
        output: dir.path().join("out.csv"),
        seed: 1,
    };
    assert!(matches!(sweep(&spec), Err(BenchError::Usage(_))));
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let images: Vec<_> = (0..3)
        .map(|i| (format!("g{i}.pgm"), gradient(64, 64, i)))
        .collect();
    write_corpus(dir.path(), &images);
    let out = dir.path().join("sweep.csv");
    let spec = SweepSpec {
        corpus: dir.path().to_owned(),
        t: vec![2, 4],
        l_fix: vec![5, 6],
        l_run: vec![5],
        output: out.clone(),
        seed: 3,
    };
    let rows = sweep(&spec).unwrap();
    assert_eq!(rows.len(), 4);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "t,lfix,lrun,mean_bpp,images,failures");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2,5,5,"));
    for row in &rows {
        assert_eq!(row.images, 3);
        assert_eq!(row.failures, 0);
        assert!(row.mean_bpp > 1.0);
    }
}

#[test]
fn sweep_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), &[("g.pgm".into(), gradient(32, 32, 0))]);
    let spec = SweepSpec {
        corpus: dir.path().to_owned(),
        t: vec![4],
        l_fix: vec![9],
        l_run: vec![],
        output: dir.path().join("x.csv"),
        seed: 0,
    };
    assert!(matches!(sweep(&spec), Err(BenchError::Usage(_))));
}
