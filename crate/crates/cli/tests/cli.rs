use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

const SMALL: &str = r#"
svr_fixed = true

[forest]
n_trees = 5

[mlp]
hidden_layers = [16]
epochs = 3

[sweep]
n_users = 20
repetitions = 2
m_values = [0.0, 0.2]
"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(rows: usize) -> Self {
        let ws = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        std::fs::write(ws.path("small.toml"), SMALL).unwrap();
        let out = ws.run(&["synth", "--rows", &rows.to_string(), "--out", ws.path("").to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn data(&self) -> String {
        self.path("synthetic_cqi.csv").display().to_string()
    }

    fn command(&self, args: &[&str]) -> Command {
        let mut c = Command::new(env!("CARGO_BIN_EXE_beanrec"));
        c.current_dir(self.dir.path()).args(args).env_remove("RUST_LOG");
        c
    }

    fn run(&self, args: &[&str]) -> Output {
        self.command(args).output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn read(&self, rel: &str) -> Vec<u8> {
        std::fs::read(self.path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ingest_writes_cleaned_file_and_diagnostics() {
    let ws = Workspace::new(200);
    let stdout = ws.ok(&["ingest", &ws.data(), "--out", "ing"]);
    assert!(stdout.contains("200 rows read"), "{stdout}");
    for f in ["cleaned.csv", "cleaning_log.tsv", "cleaning_log.json", "correlation.tsv", "feature_selection.tsv"] {
        assert!(ws.path("ing").join(f).exists(), "missing {f}");
    }
    let fs = String::from_utf8(ws.read("ing/feature_selection.tsv")).unwrap();
    assert!(fs.starts_with("feature\tunivariate_f\timportance\tretained\n"));
    assert!(fs.contains("altitude_mean_meters"));

    // the cleaned file is itself valid input
    let again = ws.ok(&["ingest", "ing/cleaned.csv", "--out", "ing2"]);
    assert!(again.contains("0 dropped"), "{again}");
    assert_eq!(ws.read("ing/cleaned.csv"), ws.read("ing2/cleaned.csv"));
}

#[test]
fn ingest_of_header_only_file_warns_and_succeeds() {
    let ws = Workspace::new(20);
    let csv = String::from_utf8(ws.read("synthetic_cqi.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    std::fs::write(ws.path("empty.csv"), format!("{header}\n")).unwrap();
    let out = ws.run(&["ingest", "empty.csv", "--out", "e"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("no valid rows"));
    assert!(ws.path("e/cleaned.csv").exists());
}

#[test]
fn training_is_byte_identical_per_seed() {
    let ws = Workspace::new(150);
    for family in ["rf", "mlp", "svr"] {
        let data = ws.data();
        let args = |out: &'static str, seed: &'static str| {
            vec!["train", family, "--data", &data, "--config", "small.toml", "--seed", seed, "--out", out]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>()
        };
        let run = |a: Vec<String>| ws.ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
        run(args("a", "7"));
        run(args("b", "7"));
        let name = match family {
            "rf" => "model-forest.json",
            "mlp" => "model-mlp.json",
            _ => "model-svr.json",
        };
        let a = ws.read(&format!("a/{name}"));
        assert_eq!(a, ws.read(&format!("b/{name}")), "{family}");
        if family != "svr" {
            run(args("c", "8"));
            assert_ne!(a, ws.read(&format!("c/{name}")), "{family}");
        }
    }
}

#[test]
fn simulate_is_byte_identical_and_unhidden_row_is_perfect() {
    let ws = Workspace::new(150);
    let data = ws.data();
    let base = ["simulate", "--data", &data, "--config", "small.toml", "--seed", "3"];
    let a = ws.ok(&[&base[..], &["--out", "a"]].concat());
    ws.ok(&[&base[..], &["--out", "b"]].concat());
    assert_eq!(ws.read("a/accuracy.json"), ws.read("b/accuracy.json"));
    assert_eq!(ws.read("a/accuracy.tsv"), ws.read("b/accuracy.tsv"));
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("prediction_size\taccuracy_mean\taccuracy_std"));
    assert_eq!(lines.next(), Some("0%\t1.000000\t0.000000"));
    assert!(lines.next().unwrap().starts_with("20%\t"));
}

#[test]
fn evaluate_writes_tables() {
    let ws = Workspace::new(120);
    let stdout = ws.ok(&["evaluate", "rf", "--data", &ws.data(), "--config", "small.toml", "--folds", "3", "--out", "ev"]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("model\taverage_rmse"));
    let row = lines.next().unwrap();
    let rmse: f64 = row.strip_prefix("rf\t").unwrap().parse().unwrap();
    assert!(rmse > 0.0 && rmse < 2.0, "{row}");
    assert!(ws.path("ev/cv.json").exists());
    let attrs = String::from_utf8(ws.read("ev/cv_attributes.tsv")).unwrap();
    assert!(attrs.lines().next().unwrap().contains("aftertaste"));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let ws = Workspace::new(20);
    let data = ws.data();
    let cases: [(&[&str], &str); 4] = [
        (&["evaluate", "rf", "--data", &data, "--folds", "1"], "folds"),
        (&["simulate", "--data", &data, "--users", "0"], "users"),
        (&["train", "gbm", "--data", &data], "gbm"),
        (&["simulate", "--data", &data, "--m", "0.1,1.5"], "1.5"),
    ];
    for (args, needle) in cases {
        let out = ws.run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn runtime_errors_exit_with_code_one() {
    let ws = Workspace::new(20);
    let out = ws.run(&["evaluate", "rf", "--data", "nope.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: ") && err.contains("nope.csv"), "{err}");

    std::fs::write(ws.path("bad.toml"), "[forest]\nn_tres = 3\n").unwrap();
    let out = ws.run(&["evaluate", "rf", "--data", &ws.data(), "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("n_tres"), "{}", stderr(&out));

    let out = ws.run(&["train", "rf", "--data", &ws.data(), "--search", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn start_server(ws: &Workspace, model: &Path) -> (Server, String) {
    let port = free_port();
    let bind = format!("127.0.0.1:{port}");
    let mut child = ws
        .command(&["serve", "--data", &ws.data(), "--model", model.to_str().unwrap(), "--bind", &bind, "--hidden-fraction", "0.2"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let server = Server(child);
    let deadline = Instant::now() + Duration::from_secs(60);
    loop {
        let line = lines.next().expect("server exited").unwrap();
        if line.starts_with("serving ") {
            assert!(line.contains("predicted"), "{line}");
            break;
        }
        assert!(Instant::now() < deadline, "server did not start");
    }
    std::thread::spawn(move || for _ in lines {});
    (server, format!("http://{bind}"))
}

#[test]
fn recommend_queries_a_running_service() {
    let ws = Workspace::new(150);
    ws.ok(&["train", "rf", "--data", &ws.data(), "--config", "small.toml", "--out", "m"]);
    let (_server, url) = start_server(&ws, &ws.path("m/model-forest.json"));

    let mut stdout = String::new();
    for _ in 0..50 {
        let out = ws.run(&["recommend", "--url", &url, "--k", "3", "--aroma", "8.0"]);
        if out.status.success() {
            assert!(stderr(&out).contains("aroma=8"));
            stdout = String::from_utf8(out.stdout).unwrap();
            break;
        }
        std::thread::sleep(Duration::from_millis(100));
    }
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4, "{stdout}");
    assert!(lines[0].starts_with("rank\tbean_id\tmatch"));
    assert!(lines[1].starts_with("1\t"));

    let out = ws.run(&["recommend", "--url", &url, "--aroma", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("preferences.aroma"), "{}", stderr(&out));
}
