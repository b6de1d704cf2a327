//! Runs the built binary on the bundled fixture.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use newsimpact::csvio::load_coefficients;
use newsimpact::emb1::load_embeddings;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn newsimpact(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsimpact"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn with_fixture<'a>(sub: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut v = vec![
        sub.to_string(),
        "--prices".into(),
        fixture("prices.csv").display().to_string(),
        "--news".into(),
        fixture("news.csv").display().to_string(),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(sub: &str, extra: &[&str], out: &Path) -> Output {
    let args = with_fixture(sub, extra);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    newsimpact(&refs, out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("pipeline", &[], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "report.md",
        "clusters.csv",
        "regression.csv",
        "importance.csv",
        "clusters.svg",
        "silhouette.csv",
        "diagnostics.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
    let k = fs::read_to_string(dir.path().join("importance.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let coef_rows = report
        .lines()
        .filter(|l| l.starts_with("| Topic_") && l.matches('|').count() == 8)
        .count();
    assert_eq!(coef_rows, k);
    assert!(report.contains(
        "| Variable | Coefficient | Std. Error | t-value | P-value | 95% CI Lower | 95% CI Upper |"
    ));
    assert!(report.contains("- Seed: 42"));
    let svg = fs::read_to_string(dir.path().join("clusters.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 200);
}

#[test]
fn missing_prices_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsimpact(
        &[
            "pipeline",
            "--prices",
            "/nonexistent/prices.csv",
            "--news",
            &fixture("news.csv").display().to_string(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/prices.csv"), "{}", stderr(&o));
}

#[test]
fn k_of_one_fails_in_cluster_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("pipeline", &["--k", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: cluster:"), "{}", stderr(&o));
}

#[test]
fn zero_topics_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("lda", &["--topics", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--topics"));
}

#[test]
fn top_k_beyond_vocabulary_names_both_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("lda", &["--top-k", "5000"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("5000") && msg.contains("vocabulary size"), "{msg}");
}

#[test]
fn empty_vocabulary_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("lda", &["--min-count", "100000"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn lda_is_stable_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run("lda", &["--topics", "2", "--iters", "200"], d.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["lda_keywords.csv", "lda_keywords.md"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
    let csv = fs::read_to_string(a.path().join("lda_keywords.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 10);
}

#[test]
fn every_subcommand_is_deterministic() {
    for sub in ["ingest-prices", "ingest-news", "embed", "cluster", "regress", "importance", "plot"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let oa = run(sub, &[], a.path());
        let ob = run(sub, &[], b.path());
        assert!(oa.status.success(), "{sub}: {}", stderr(&oa));
        assert_eq!(oa.stdout, ob.stdout, "{sub} stdout");
        let mut files: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(!files.is_empty(), "{sub} wrote nothing");
        for f in files {
            assert_eq!(
                fs::read(a.path().join(&f)).unwrap(),
                fs::read(b.path().join(&f)).unwrap(),
                "{sub}: {f:?}"
            );
        }
    }
}

#[test]
fn file_provider_reproduces_hashing_run() {
    let dir = tempfile::tempdir().unwrap();
    let emb_dir = dir.path().join("emb");
    assert!(run("embed", &[], &emb_dir).status.success());
    let emb = emb_dir.join("embeddings.emb1");
    let m = load_embeddings(&emb).unwrap();
    assert_eq!((m.len(), m.dim()), (200, 256));
    assert_eq!(m.ids()[0], "0");

    let hashed = dir.path().join("hashed");
    let filed = dir.path().join("filed");
    assert!(run("regress", &[], &hashed).status.success());
    let o = run(
        "regress",
        &["--provider", "file", "--embeddings", &emb.display().to_string()],
        &filed,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(hashed.join("regression.csv")).unwrap(),
        fs::read(filed.join("regression.csv")).unwrap()
    );
}

#[test]
fn precomputed_tables_feed_later_stages() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    assert!(run("pipeline", &[], &full).status.success());

    let reg = dir.path().join("reg");
    let clusters = full.join("clusters.csv").display().to_string();
    assert!(run("regress", &["--clusters", &clusters], &reg).status.success());
    assert_eq!(
        fs::read(full.join("regression.csv")).unwrap(),
        fs::read(reg.join("regression.csv")).unwrap()
    );

    let imp = dir.path().join("imp");
    let table = full.join("regression.csv").display().to_string();
    let o = newsimpact(&["importance", "--regression", &table], &imp);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(full.join("importance.csv")).unwrap(),
        fs::read(imp.join("importance.csv")).unwrap()
    );
    assert!(load_coefficients(&full.join("regression.csv")).unwrap()[0].0 == "const");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("prices.csv"), dir.path().join("p.csv")).unwrap();
    fs::copy(fixture("news.csv"), dir.path().join("n.csv")).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "prices = \"p.csv\"\nnews = \"n.csv\"\nk = 2\nlag = 0\nseed = 5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = newsimpact(
        &["pipeline", "--config", &cfg.display().to_string(), "--k", "3"],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(report.contains("K = 3 fixed"), "{report}");
    assert!(report.contains("lag 0"));
    assert!(report.contains("- Seed: 5"));

    fs::write(&cfg, "seeed = 5\n").unwrap();
    let o = newsimpact(&["pipeline", "--config", &cfg.display().to_string()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: config:"));
}

#[test]
fn fixture_command_matches_bundled_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(newsimpact(&["fixture"], dir.path()).status.success());
    for f in ["prices.csv", "news.csv"] {
        assert_eq!(fs::read(dir.path().join(f)).unwrap(), fs::read(fixture(f)).unwrap(), "{f}");
    }
}
