use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mvhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvhom"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path4.cplx");
    let o = mvhom(&["generate", "--kind", "path", "--n", "4", "--out", p(&out)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 7);
}

#[test]
fn generate_full_simplex_20() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.cplx");
    let o = mvhom(&[
        "generate",
        "--kind",
        "simplex",
        "--n",
        "20",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1_048_575);
}

#[test]
fn generate_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.cplx");
    let o = mvhom(&[
        "generate",
        "--kind",
        "simplex",
        "--n",
        "0",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = mvhom(&[
        "generate",
        "--kind",
        "flag",
        "--n",
        "5",
        "--prob",
        "1.5",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn circle_samples_recover_one_loop() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("circle.pts");
    let rips = dir.path().join("circle.cplx");
    let o = mvhom(&[
        "generate",
        "--kind",
        "sphere",
        "--n",
        "100",
        "--sphere-dim",
        "1",
        "--seed",
        "7",
        "--out",
        p(&pts),
    ]);
    assert!(o.status.success());
    let o = mvhom(&[
        "generate",
        "--kind",
        "rips",
        "--points",
        p(&pts),
        "--epsilon",
        "0.5",
        "--out",
        p(&rips),
    ]);
    assert!(o.status.success());
    let o = mvhom(&["homology", p(&rips)]);
    // the 2-skeleton has spurious 2-cycles, so only the low dimensions are meaningful
    let text = stdout(&o);
    let low: Vec<&str> = text.split_whitespace().take(2).collect();
    assert_eq!(low, ["β0=1", "β1=1"], "{text}");
}

fn write_path4(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("path4.cplx");
    fs::write(&path, "0 1\n1 2\n2 3\n").unwrap();
    path
}

fn write_sphere3(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("sphere3.cplx");
    let facets: Vec<String> = (0..5)
        .map(|skip| {
            (0..5)
                .filter(|&v| v != skip)
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    fs::write(&path, facets.join("\n")).unwrap();
    path
}

#[test]
fn stats_on_path() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_path4(dir.path());
    let o = mvhom(&["stats", "--parts", "2", p(&input)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("blowup_factor 1.571429 (11/7)"), "{text}");
    assert!(text.contains("edgecut 1"), "{text}");
    let o = mvhom(&["stats", "--parts", "2", "--format", "csv", p(&input)]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("graph_balance_ratio,cover_balance_ratio,edgecut,blowup_factor")
    );
    assert_eq!(lines.next(), Some("0.500000,0.428571,1,1.571429"));
}

#[test]
fn stats_with_partition_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_path4(dir.path());
    let part = dir.path().join("path4.part");
    let o = mvhom(&["partition", "--parts", "2", "--out", p(&part), p(&input)]);
    assert!(o.status.success());
    let o = mvhom(&["stats", "--partition-file", p(&part), p(&input)]);
    assert!(stdout(&o).contains("(11/7)"));
    fs::write(&part, "0\n1\n").unwrap();
    let o = mvhom(&["stats", "--partition-file", p(&part), p(&input)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn homology_of_three_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sphere3(dir.path());
    for alg in ["serial", "mv", "heuristic"] {
        let o = mvhom(&["homology", "--algorithm", alg, "--threads", "4", p(&input)]);
        assert!(o.status.success(), "{alg}");
        assert_eq!(stdout(&o).trim(), "β0=1 β3=1", "{alg}");
    }
}

#[test]
fn too_many_parts_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_path4(dir.path());
    let o = mvhom(&["homology", "--algorithm", "mv", "--threads", "5", p(&input)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dump_blowup_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_path4(dir.path());
    let dump = dir.path().join("blowup.txt");
    let part = dir.path().join("path4.part");
    fs::write(&part, "0\n0\n1\n1\n").unwrap();
    let o = mvhom(&[
        "homology",
        "--algorithm",
        "mv",
        "--threads",
        "2",
        "--partition-file",
        p(&part),
        "--dump-blowup",
        p(&dump),
        p(&input),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert_eq!(text.lines().next(), Some("0|0"));
    assert_eq!(text.lines().last(), Some("2|1 2"));
    let o = mvhom(&[
        "homology",
        "--algorithm",
        "serial",
        "--dump-blowup",
        p(&dump),
        p(&input),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.cplx");
    fs::write(&input, "0 1\n3 2\n").unwrap();
    let o = mvhom(&["homology", p(&input)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_exit_codes() {
    let o = mvhom(&["verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 instances"));
    let o = mvhom(&["verify", "--trials", "100", "--max-vertices", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = mvhom(&[
        "verify",
        "--trials",
        "5",
        "--max-vertices",
        "8",
        "--inject-fault",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("# counterexample"), "{text}");
    assert!(text.contains("# oracle"), "{text}");
}

#[test]
fn bench_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sphere3(dir.path());
    let csv = dir.path().join("bench.csv");
    let o = mvhom(&[
        "bench",
        "--threads-list",
        "1,2",
        "--trials",
        "2",
        "--csv",
        p(&csv),
        p(&input),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "input,algorithm,num_partitions,num_threads,graph_balance_ratio,cover_balance_ratio,edgecut,\
         blowup_factor,build_blowup,re-filter,persistence,speedup,max_memory_mb"
    );
    assert_eq!(lines.len(), 6);
    let serial: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(serial[1], "serial");
    assert_eq!(serial[8], "");
    assert_eq!(serial[9], "");
}

#[test]
fn homology_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flag.cplx");
    let o = mvhom(&[
        "generate",
        "--kind",
        "flag",
        "--n",
        "40",
        "--prob",
        "0.2",
        "--max-dim",
        "3",
        "--seed",
        "5",
        "--out",
        p(&input),
    ]);
    assert!(o.status.success());
    for alg in ["serial", "mv", "heuristic"] {
        let a = dir.path().join(format!("{alg}.a"));
        let b = dir.path().join(format!("{alg}.b"));
        for out in [&a, &b] {
            let o = mvhom(&[
                "homology",
                "--algorithm",
                alg,
                "--threads",
                "3",
                "--seed",
                "9",
                "--pairing-out",
                p(out),
                p(&input),
            ]);
            assert!(o.status.success());
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{alg}");
    }
}

#[test]
fn help_documents_subcommands() {
    let o = mvhom(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for sub in [
        "generate",
        "partition",
        "stats",
        "homology",
        "bench",
        "verify",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
}
