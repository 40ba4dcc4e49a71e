use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn artevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_artevo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn tiny_config(dir: &Path, seed: u64) -> String {
    let path = dir.join("run.conf");
    fs::write(
        &path,
        format!(
            "# small smoke run\npopulation_size = 4\ngenerations = 2\nwidth = 32\nheight = 32\n\
             budget_ms = 5000\nseed = {seed}\nexclude = flow-field\n"
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&artevo(&["frobnicate"])), 1);
    assert_eq!(code(&artevo(&[])), 1);
    assert_eq!(code(&artevo(&["--help"])), 0);
    assert_eq!(code(&artevo(&["render", "--genome", "x"])), 1);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "population_size = 1\n").unwrap();
    let out = artevo(&["evolve", "--config", conf.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("population_size"));
}

#[test]
fn evolve_twice_gives_identical_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let conf = tiny_config(dir.path(), 11);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = artevo(&["--jobs", "2", "evolve", "--config", &conf, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = |d: &Path| fs::read_to_string(d.join("run_manifest.txt")).unwrap();
    assert_eq!(manifest(&a), manifest(&b));
    assert!(manifest(&a).ends_with("status = complete\n"));

    let out = artevo(&["sweeps", "--run", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(a.join("sweeps.csv")).unwrap().starts_with("generation,technique"));
}

#[test]
fn experiment_resume_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let conf = tiny_config(dir.path(), 2);
    let results = dir.path().join("results");
    let results = results.to_str().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["experiment", "--config", &conf, "--masks", "ut,ac", "--replicates", "1", "--out", results];
        args.extend_from_slice(extra);
        artevo(&args)
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(Path::new(results).join("ec36/rep00/run_manifest.txt").exists());
    let entries: Vec<_> = fs::read_dir(results).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, ["ec36"]);
    assert_eq!(code(&run(&[])), 1);
    let resumed = run(&["--resume"]);
    assert_eq!(code(&resumed), 0);
    assert!(String::from_utf8_lossy(&resumed.stdout).contains("completed 0, skipped 1"));

    assert_eq!(code(&artevo(&["aggregate", "--results", results])), 0);
    let heatmap = fs::read_to_string(Path::new(results).join("heatmap.csv")).unwrap();
    assert_eq!(heatmap, "config,pc,gc,ut,cd,ns,ac\n36,1,1,1,1,1,1\n");

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&artevo(&["aggregate", "--results", empty.to_str().unwrap()])), 2);
}

#[test]
fn render_from_stdin_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let render = |name: &str, genome: &str| {
        let out = dir.path().join(name);
        let mut child = Command::new(env!("CARGO_BIN_EXE_artevo"))
            .args(["render", "--genome", "-", "--size", "40x30", "--seed", "3", "--out"])
            .arg(&out)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(genome.as_bytes()).unwrap();
        (child.wait_with_output().unwrap(), out)
    };
    let genome = "circle-packing:2,200,2,20\nbasic-trig:1,3,0.2,2,1,0.5,2\n";
    let (o1, p1) = render("a.png", genome);
    let (o2, p2) = render("b.png", genome);
    assert_eq!(code(&o1), 0);
    assert!(String::from_utf8_lossy(&o1.stdout).contains("genes_expressed = 2"));
    assert_eq!(code(&o2), 0);
    assert_eq!(fs::read(p1).unwrap(), fs::read(p2).unwrap());

    let (bad, _) = render("c.png", "basic-trig:1,2\n");
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
}

#[test]
fn classifier_round_trip_and_collage() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    assert_eq!(
        code(&artevo(&["classifier", "gen-noise", "--count", "3", "--size", "32x32", "--seed", "1", "--out", &p("noise")])),
        0
    );
    assert_eq!(
        code(&artevo(&["classifier", "gen-noise", "--count", "0", "--out", &p("none")])),
        1
    );
    let art = dir.path().join("art");
    fs::create_dir(&art).unwrap();
    for seed in 0..2 {
        let o = artevo(&[
            "render",
            "--genome",
            &{
                let g = p(&format!("g{seed}.txt"));
                fs::write(&g, format!("basic-trig:{seed},4,0.3,2,0.5,0.5,3\n")).unwrap();
                g
            },
            "--size",
            "32x32",
            "--out",
            art.join(format!("a{seed}.png")).to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let train = artevo(&["classifier", "train", "--art", &p("art"), "--not-art", &p("noise"), "--out", &p("model.txt")]);
    assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));

    let score = artevo(&["classifier", "score", "--model", &p("model.txt"), &p("noise/noise_0000.png"), &p("art/a0.png")]);
    assert_eq!(code(&score), 0);
    let text = String::from_utf8_lossy(&score.stdout).to_string();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "path,score,label");
    assert!(lines[1].ends_with(",not-art") && lines[2].ends_with(",art"), "{text}");

    let batch = artevo(&["classifier", "batch", "--model", &p("model.txt"), "--dir", &p("noise")]);
    assert_eq!(code(&batch), 0);
    assert!(String::from_utf8_lossy(&batch.stderr).contains("art = 0, not-art = 3"));

    let out = artevo(&["collage", "--dir", &p("noise"), "--columns", "2", "--cell-size", "16x16", "--out", &p("c.png")]);
    assert_eq!(code(&out), 0);
    let img = fs::read(p("c.png")).unwrap();
    assert_eq!(&img[1..4], b"PNG");
}

#[test]
fn timing_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = artevo(&["timing", "--invocations", "1", "--size", "32", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("technique,invocations,total_ms,mean_ms\n"));
    assert_eq!(csv.lines().count(), 5);
}
