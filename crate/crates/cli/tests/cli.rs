use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TWO_LEVEL: [&str; 12] = [
    "--param",
    "eps1=-1",
    "--param",
    "eps2=1",
    "--param",
    "omega1=-0.2",
    "--param",
    "omega2=-0.6",
    "--param",
    "phi1=-2",
    "--param",
    "phi2=45",
];
const OSCILLATORS: [&str; 8] = [
    "--param",
    "omega1=10",
    "--param",
    "omega2=10",
    "--param",
    "k1=0.2",
    "--param",
    "k2=0.1",
];
const EP_COUPLING: [&str; 4] = ["--param", "f=1.0051136444", "--param", "g=7.5008438888e-4"];

fn exe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exceptional"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = exe(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> (i32, String) {
    let out = exe(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn cat<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.concat()
}

/// Parses CSV output (comments skipped), checking every non-boolean field is finite.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<Vec<String>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    for row in &rows {
        assert_eq!(row.len(), headers.len());
        for cell in row {
            if cell != "true" && cell != "false" {
                assert!(cell.parse::<f64>().unwrap().is_finite(), "{cell}");
            }
        }
    }
    (headers, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn column(headers: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = headers.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| num(&r[k])).collect()
}

fn cplx(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn window_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("window.csv");
    let p = path.to_str().unwrap();
    ok(&cat(&[
        &["twolevel", "sweep"],
        &TWO_LEVEL,
        &["--from", "0", "--to", "10", "--samples", "1001", "--out", p],
    ]));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# ep_plus.lambda=3.42")));
    let (headers, rows) = table(&text);
    assert_eq!(headers, ["lambda", "re_E1", "im_E1", "re_E2", "im_E2", "is_real_pair"]);
    assert_eq!(rows.len(), 1001);
    for r in &rows {
        let l = num(&r[0]);
        let inside = l > 3.4255155159 && l < 7.2981715843;
        assert_eq!(r[5] == "false", inside, "lambda {l}");
    }
}

#[test]
fn sweep_above_both_eps_is_real() {
    let text = ok(&cat(&[
        &["twolevel", "sweep"],
        &TWO_LEVEL,
        &["--from", "7.4", "--to", "20", "--samples", "50"],
    ]));
    let (_, rows) = table(&text);
    assert!(rows.iter().all(|r| r[5] == "true"));
}

#[test]
fn two_level_eps_from_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two_level.json");
    std::fs::write(
        &cfg,
        r#"{"model": "two-level",
            "params": {"eps1": -1, "eps2": {"re": 1, "im": 0}, "omega1": "-0.2", "omega2": -0.6, "phi1": -2, "phi2": 45}}"#,
    )
    .unwrap();
    let v: Value = serde_json::from_str(&ok(&["twolevel", "ep", "--config", cfg.to_str().unwrap()])).unwrap();
    let (plus, minus) = (cplx(&v["plus"]["lambda"]).0, cplx(&v["minus"]["lambda"]).0);
    let mut l = [plus, minus];
    l.sort_by(f64::total_cmp);
    assert!((l[0] - 3.4).abs() < 0.05 && (l[1] - 7.3).abs() < 0.05, "{l:?}");
    assert_eq!(v["plus"]["defect"]["geometric_multiplicity"], 1);
    assert_eq!(v["both_real"], true);
}

#[test]
fn oscillator_find_ep() {
    let v: Value = serde_json::from_str(&ok(&cat(&[&["osc", "find-ep"], &OSCILLATORS]))).unwrap();
    let (f, g) = (v["params"]["f"].as_f64().unwrap(), v["params"]["g"].as_f64().unwrap());
    assert!((f - 1.005).abs() < 0.01 && (g - 0.00075).abs() < 0.0002, "{f} {g}");
    let (wr, wi) = cplx(&v["omega_ep"]["normalized"]);
    assert!((wr - 10.05).abs() < 0.02 && (wi + 0.15).abs() < 0.02);
    let (rr, ri) = cplx(&v["omega_ep"]["raw"]);
    assert_eq!((rr, ri), (-wr, -wi));
    let (qr, qi) = cplx(&v["amplitude_ratio"]["value"]);
    assert!((qr - 0.0049).abs() < 0.005 && (qi - 1.0).abs() < 0.005, "{qr} {qi}");
    assert!(v["quintic"]["newton_difference"]["f"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["defect"]["is_defective"], true);
}

#[test]
fn seeded_find_ep_skips_the_scan() {
    let args = cat(&[&["osc", "find-ep", "--seed-f", "1.0", "--seed-g", "7e-4"], &OSCILLATORS]);
    let v: Value = serde_json::from_str(&ok(&args)).unwrap();
    assert!((v["params"]["f"].as_f64().unwrap() - 1.0051136442).abs() < 1e-8);
    assert!((v["params"]["g"].as_f64().unwrap() - 7.5008438924e-4).abs() < 1e-10);
    assert!(v.get("quintic").is_none());
    let csv = ok(&cat(&[&args, &["--format", "csv"]]));
    assert!(csv.starts_with("key,value\n") && csv.contains("params.f,"));
}

#[test]
fn g_sweep_has_cusp_near_ep() {
    let text = ok(&cat(&[
        &[
            "osc",
            "sweep",
            "--variable",
            "g",
            "--from",
            "0",
            "--to",
            "0.002",
            "--samples",
            "401",
        ],
        &OSCILLATORS,
        &["--param", "f=1.005"],
    ]));
    let (h, rows) = table(&text);
    let g = column(&h, &rows, "sweep_value");
    let re: Vec<Vec<f64>> = (1..=4).map(|k| column(&h, &rows, &format!("re_E{k}"))).collect();
    // the two branches with positive real frequency
    let pos: Vec<usize> = (0..4).filter(|&b| re[b][0] > 0.0).collect();
    assert_eq!(pos.len(), 2);
    let gap: Vec<f64> = (0..g.len()).map(|k| (re[pos[0]][k] - re[pos[1]][k]).abs()).collect();
    let at = (0..g.len()).min_by(|&a, &b| gap[a].total_cmp(&gap[b])).unwrap();
    assert!((g[at] - 0.00075).abs() < 1e-4, "{}", g[at]);
}

#[test]
fn f_sweep_branch_point_near_one() {
    let text = ok(&cat(&[
        &[
            "osc",
            "sweep",
            "--variable",
            "f",
            "--from",
            "0.8",
            "--to",
            "1.2",
            "--samples",
            "401",
            "--param",
            "g=0.00075",
        ],
        &OSCILLATORS,
    ]));
    let (h, rows) = table(&text);
    let f = column(&h, &rows, "sweep_value");
    let re: Vec<Vec<f64>> = (1..=4).map(|k| column(&h, &rows, &format!("re_E{k}"))).collect();
    let im: Vec<Vec<f64>> = (1..=4).map(|k| column(&h, &rows, &format!("im_E{k}"))).collect();
    let pos: Vec<usize> = (0..4).filter(|&b| re[b][0] > 0.0).collect();
    let dist: Vec<f64> = (0..f.len())
        .map(|k| (re[pos[0]][k] - re[pos[1]][k]).hypot(im[pos[0]][k] - im[pos[1]][k]))
        .collect();
    let at = (0..f.len()).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
    assert!((f[at] - 1.005).abs() < 0.01, "{}", f[at]);
    assert!(dist[at] < 0.1 * dist[0]);
}

#[test]
fn zero_width_sweep_gives_uncoupled_frequencies() {
    let text = ok(&cat(&[
        &[
            "osc",
            "sweep",
            "--variable",
            "g",
            "--from",
            "0",
            "--to",
            "0",
            "--samples",
            "1",
            "--param",
            "f=0",
        ],
        &OSCILLATORS,
    ]));
    let (h, rows) = table(&text);
    assert_eq!(rows.len(), 1);
    let mut got: Vec<(f64, f64)> = (1..=4)
        .map(|k| {
            (
                column(&h, &rows, &format!("re_E{k}"))[0],
                column(&h, &rows, &format!("im_E{k}"))[0],
            )
        })
        .collect();
    got.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (a, b) = ((100.0f64 - 0.04).sqrt(), (100.0f64 - 0.01).sqrt());
    let want = [(-b, -0.1), (-a, -0.2), (a, -0.2), (b, -0.1)];
    let mut want = want.to_vec();
    want.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (g, w) in got.iter().zip(&want) {
        assert!((g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10, "{got:?}");
    }
}

#[test]
fn drive_responses_at_ep() {
    let range = ["--from", "9.5", "--to", "10.6", "--samples", "1101"];
    let left = ok(&cat(&[
        &["osc", "response", "--c1", "i", "--c2", "1"],
        &range,
        &OSCILLATORS,
        &EP_COUPLING,
    ]));
    let (h, rows) = table(&left);
    assert_eq!(
        h,
        [
            "omega",
            "abs_q1",
            "abs_q2",
            "phase_q1_deg",
            "phase_q2_deg",
            "phase_diff_deg"
        ]
    );
    let (a1, a2) = (column(&h, &rows, "abs_q1"), column(&h, &rows, "abs_q2"));
    assert!(a1.iter().zip(&a2).all(|(x, y)| (x / y - 1.0).abs() <= 0.05));

    let right = ok(&cat(&[
        &["osc", "response", "--c1", "-i", "--c2", "1"],
        &range,
        &OSCILLATORS,
        &EP_COUPLING,
    ]));
    let (h, rows) = table(&right);
    let (a1, a2) = (column(&h, &rows, "abs_q1"), column(&h, &rows, "abs_q2"));
    assert!(a1.iter().zip(&a2).any(|(x, y)| (x / y - 1.0).abs() > 0.2));
}

#[test]
fn json_table_output_round_trips() {
    let text = ok(&cat(&[
        &[
            "twolevel",
            "sweep",
            "--format",
            "json",
            "--from",
            "0",
            "--to",
            "10",
            "--samples",
            "21",
        ],
        &TWO_LEVEL,
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r["re_E1"].as_f64().unwrap().is_finite()));
    assert_eq!(v["metadata"]["model"], "two-level");
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full = args.to_vec();
    full.extend(["--out", path.to_str().unwrap()]);
    ok(&full);
    std::fs::read(path).unwrap()
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("response.json");
    std::fs::write(
        &cfg,
        r#"{"model": "oscillator",
            "params": {"omega1": 10, "omega2": 10, "k1": 0.2, "k2": 0.1, "f": 1.0051136444, "g": 7.5008438888e-4},
            "drive": {"c1": {"re": 0, "im": -1}, "c2": "1", "from": 9.5, "to": 10.6, "samples": 301}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let a = run_to(dir.path(), "a.csv", &["osc", "response", "--config", c]);
    let b = run_to(dir.path(), "b.csv", &["osc", "response", "--config", c]);
    assert!(!a.is_empty() && a == b);

    let a = run_to(dir.path(), "a.json", &cat(&[&["osc", "find-ep"], &OSCILLATORS]));
    let b = run_to(dir.path(), "b.json", &cat(&[&["osc", "find-ep"], &OSCILLATORS]));
    assert!(a == b);
}

#[test]
fn loops_around_and_away_from_the_ep() {
    fn args(center: &str) -> Vec<&str> {
        cat(&[
            &["loop", "--model", "two-level", "--radius", "0.5", "--center", center],
            &TWO_LEVEL,
        ])
    }
    let v: Value = serde_json::from_str(&ok(&args("3.425515515930849"))).unwrap();
    assert_eq!(v["permutation"], serde_json::json!([1, 0]));
    assert_eq!(
        (
            v["loops_to_restore_eigenvalues"].as_u64(),
            v["loops_to_restore_eigenvector"].as_u64()
        ),
        (Some(2), Some(4))
    );

    let v: Value = serde_json::from_str(&ok(&args("5+2.5i"))).unwrap();
    assert_eq!(v["permutation"], serde_json::json!([0, 1]));

    let (c, err) = code(&args("2.925515515930849"));
    assert_eq!(c, 3, "{err}");
}

#[test]
fn config_errors_exit_2() {
    let (c, err) = code(&["twolevel", "sweep", "--param", "eps1=-1", "--from", "0", "--to", "1"]);
    assert_eq!(c, 2);
    assert!(err.contains("eps2"), "{err}");

    let (c, err) = code(&cat(&[&["twolevel", "ep", "--param", "kappa=1"], &TWO_LEVEL]));
    assert_eq!(c, 2);
    assert!(err.contains("kappa"), "{err}");

    assert_eq!(
        code(&cat(&[
            &["osc", "response", "--c1", "0", "--c2", "0", "--from", "9", "--to", "11"],
            &OSCILLATORS,
            &EP_COUPLING
        ]))
        .0,
        2
    );
    assert_eq!(
        code(&cat(&[
            &["osc", "response", "--c1", "1+", "--c2", "1", "--from", "9", "--to", "11"],
            &OSCILLATORS,
            &EP_COUPLING
        ]))
        .0,
        2
    );
    assert_eq!(code(&["osc", "sweep", "--frobnicate"]).0, 2);
    assert_eq!(
        code(&cat(&[
            &["osc", "sweep", "--variable", "k", "--from", "0", "--to", "1"],
            &OSCILLATORS
        ]))
        .0,
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"model": "oscillator", "sweeep": {}}"#).unwrap();
    assert_eq!(code(&["osc", "sweep", "--config", cfg.to_str().unwrap()]).0, 2);
    std::fs::write(&cfg, r#"{"model": "two-level"}"#).unwrap();
    assert_eq!(
        code(&cat(&[
            &["osc", "find-ep", "--config", cfg.to_str().unwrap()],
            &OSCILLATORS
        ]))
        .0,
        2
    );
    assert_eq!(code(&["osc", "find-ep", "--config", "/nonexistent/cfg.json"]).0, 2);
}

#[test]
fn search_failures_exit_4_and_5() {
    let (c, err) = code(&[
        "osc",
        "find-ep",
        "--param",
        "omega1=10",
        "--param",
        "omega2=10",
        "--param",
        "k1=0.15",
        "--param",
        "k2=0.15",
    ]);
    assert_eq!(c, 5, "{err}");
    // no EP at real f for such weak coupling damping
    let (c, err) = code(&cat(&[
        &[
            "osc",
            "find-ep",
            "--g-from",
            "1e-5",
            "--g-to",
            "2e-5",
            "--g-samples",
            "5",
        ],
        &OSCILLATORS,
    ]));
    assert_eq!(c, 4, "{err}");
}
