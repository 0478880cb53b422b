use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eonjam"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(dir: &Path, body: &str) -> PathBuf {
    named(dir, "scenario.toml", body)
}

fn named(dir: &Path, name: &str, body: &str) -> PathBuf {
    let topo = repo().join("data/nsfnet.topo");
    let path = dir.join(name);
    std::fs::write(
        &path,
        format!("topology = {:?}\n{body}", topo.to_str().unwrap()),
    )
    .unwrap();
    path
}

const SMALL: &str = r#"
modes = ["no_jamming", "unaware", "aware"]
seed = 3
output_dir = "from-file"

[jammer]
target = "most_used"

[sweep]
start = 0.0
stop = 1.0
step = 0.5

[traffic]
requests = 300
replications = 2
"#;

#[test]
fn shipped_scenarios_validate() {
    let dir = repo().join("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = bin().arg("validate").arg(&path).output().unwrap();
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario(
        tmp.path(),
        "modes = [\"aware\"]\n[jammer]\ntarget = \"most_used\"\nranges = [[315, 10]]\n[sweep]\nstart = 0.0\nstop = 1.0\nstep = 0.0\n",
    );
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sweep.step"), "{err}");
    assert!(err.contains("exceeds grid"), "{err}");

    let out = bin().arg("simulate").arg(tmp.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario(tmp.path(), SMALL);
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = bin()
        .arg("simulate")
        .arg(&path)
        .env("EONJAM_OUTPUT_DIR", blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_reproducible_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario(tmp.path(), SMALL);
    let run = |out: &Path| {
        let o = bin()
            .arg("simulate")
            .arg(&path)
            .env("EONJAM_OUTPUT_DIR", out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.join("blocking.csv")).unwrap(),
            std::fs::read(out.join("slots.csv")).unwrap(),
        )
    };
    let a = run(&tmp.path().join("a"));
    let b = run(&tmp.path().join("b"));
    assert_eq!(a, b);
    assert!(!tmp.path().join("from-file").exists());

    let blocking = String::from_utf8(a.0).unwrap();
    let mut lines = blocking.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mode,target,epsilon_db,replication,blocking_probability,blocked_no_spectrum,blocked_qot,blocked_jammed"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // one no_jamming row set, then 3 epsilons x 2 replications per jamming mode
    assert_eq!(rows.len(), 2 + 2 * 3 * 2);
    assert!(rows[..2].iter().all(|r| r[0] == "no_jamming" && r[1] == "NA" && r[2] == "NA"));
    assert!(rows[2..].iter().all(|r| r[1] != "NA" && r[2] != "NA"));
    for r in &rows {
        let p: f64 = r[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
        let digits = r[4].chars().filter(|c| c.is_ascii_digit()).skip_while(|c| *c == '0').count();
        assert!(p == 0.0 || digits == 10, "{}", r[4]);
    }

    let slots = String::from_utf8(a.1).unwrap();
    assert_eq!(slots.lines().next().unwrap(), "mode,target,epsilon_db,slot_index,mean_utilization");
    assert_eq!(slots.lines().count(), 1 + (1 + 2 * 3) * 320);
}

#[test]
fn rank_links_then_reuse() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario(tmp.path(), SMALL);
    let out = bin()
        .arg("rank-links")
        .arg(&path)
        .env("EONJAM_OUTPUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let ranking = std::fs::read_to_string(tmp.path().join("ranking.csv")).unwrap();
    assert_eq!(ranking.lines().count(), 1 + 42);

    let reuse = named(tmp.path(), "reuse.toml", &format!("ranking = \"ranking.csv\"\n{SMALL}"));
    let o1 = bin().arg("simulate").arg(&reuse).env("EONJAM_OUTPUT_DIR", tmp.path().join("r")).output().unwrap();
    let o2 = bin().arg("simulate").arg(&path).env("EONJAM_OUTPUT_DIR", tmp.path().join("p")).output().unwrap();
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(
        std::fs::read(tmp.path().join("r/blocking.csv")).unwrap(),
        std::fs::read(tmp.path().join("p/blocking.csv")).unwrap()
    );
}
