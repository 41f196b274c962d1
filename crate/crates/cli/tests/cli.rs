use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsys"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TWO_ATOMS: &str = r#"{"schema":1,"atoms":[{"lambda":-1,"weight":0.3333333333333333},{"lambda":1,"weight":0.3333333333333333}]}"#;

#[test]
fn example1_transfer_at_i() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = lsys(&[
        "eval",
        "--example",
        "1",
        "--ell",
        "1",
        "--role",
        "transfer",
        "--grid",
        "default",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("re_z,im_z,re_f,im_f,pole_flag\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 441);
    let at_i = r
        .iter()
        .find(|v| v[0].abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14)
        .expect("z = i on the default grid");
    assert!((at_i[2] - std::f64::consts::E).abs() < 1e-12);
    assert!(at_i[3].abs() < 1e-12);
    assert_eq!(at_i[4], 0.0);
    // Row-major: imaginary part outer, real part increasing.
    assert!(r[0][1] == r[20][1] && r[0][0] < r[1][0] && r[21][1] > r[0][1]);
}

#[test]
fn csv_has_seventeen_significant_digits() {
    let o = lsys(&[
        "eval",
        "--example",
        "2",
        "--role",
        "impedance",
        "--grid",
        "0,1,0.5,1,2,1",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let field = text.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{field}");
}

#[test]
fn lebesgue_measure_gives_constant_i() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "leb.json",
        r#"{"schema":1,"density":[{"kind":"constant","value":0.3183098861837907}]}"#,
    );
    let o = lsys(&["eval", "--measure", &m, "--role", "weyl"]);
    assert_eq!(code(&o), 0);
    for v in rows(&String::from_utf8(o.stdout).unwrap()) {
        assert!(v[2].abs() < 1e-9 && (v[3] - 1.0).abs() < 1e-9, "{v:?}");
    }
    // W is undefined everywhere: pole saturation.
    let o = lsys(&[
        "eval",
        "--measure",
        &m,
        "--role",
        "transfer",
        "--grid",
        "-1,1,0.5,2,3,2",
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("6 of 6"));
}

#[test]
fn model_build_and_eval() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "two.json", TWO_ATOMS);
    let model = dir.path().join("model.json");
    let o = lsys(&[
        "model",
        "--measure",
        &m,
        "--kappa",
        "0.5",
        "--n",
        "2",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["nodes"], serde_json::json!([-1.0, 1.0]));
    assert_eq!(json["schema"], 1);

    let o = lsys(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--role",
        "impedance",
        "--grid",
        "-2,2,0.5,3,5,3",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let out: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in out.as_array().unwrap() {
        let (x, y) = (row["re_z"].as_f64().unwrap(), row["im_z"].as_f64().unwrap());
        // Σ w (1/(λ - z) - λ/(1 + λ²)) with w = 1/3 at ±1.
        let v = |l: f64| {
            let d = (l - x).powi(2) + y * y;
            ((l - x) / d - l / (1.0 + l * l), y / d)
        };
        let (a, b) = (v(-1.0), v(1.0));
        assert!((row["re_f"].as_f64().unwrap() - (a.0 + b.0) / 3.0).abs() < 1e-14);
        assert!((row["im_f"].as_f64().unwrap() - (a.1 + b.1) / 3.0).abs() < 1e-14);
    }
}

#[test]
fn model_with_wrong_kappa_exits_5() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "two.json", TWO_ATOMS);
    let o = lsys(&["model", "--measure", &m, "--kappa", "0.2", "--n", "2"]);
    assert_eq!(code(&o), 5);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0.333") && err.contains("0.666"), "{err}");
}

#[test]
fn invert_samples_recovers_atoms() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("lambda,eps,re_f,im_f\n");
    for eps in [0.05, 0.02, 0.01] {
        for k in 0..=80 {
            let x = -2.0 + 0.05 * k as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for l in [-1.0f64, 1.0] {
                let d = (l - x).powi(2) + eps * eps;
                re += (l - x) / d - l / (1.0 + l * l);
                im += eps / d;
            }
            text += &format!("{x:.17e},{eps},{re:.17e},{im:.17e}\n");
        }
    }
    let s = write(&dir, "samples.csv", &text);
    let o = lsys(&["invert", "--samples", &s, "--window", "-2", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let atoms: Vec<(f64, f64)> = out
        .lines()
        .filter(|l| l.starts_with("atom,"))
        .map(|l| {
            let v: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert_eq!(atoms.len(), 2, "{out}");
    for ((x, w), e) in atoms.iter().zip([-1.0, 1.0]) {
        assert!((x - e).abs() < 0.05 && (w - 1.0).abs() < 0.02);
    }
}

#[test]
fn invert_example_impedance() {
    let o = lsys(&[
        "invert",
        "--example",
        "1",
        "--window",
        "-4",
        "4",
        "--points",
        "161",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let n = out.lines().filter(|l| l.starts_with("atom,")).count();
    assert_eq!(n, 2, "{out}");
}

#[test]
fn verify_suites() {
    let o = lsys(&["verify", "--suite", "examples"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().any(|l| l.starts_with("[XFAIL]")));
    assert!(!out.contains("[FAIL"));
    let o = lsys(&["verify"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("reciprocity") && out.contains("biextension"));
}

#[test]
fn parse_and_io_errors() {
    assert_eq!(
        code(&lsys(&[
            "eval",
            "--example",
            "1",
            "--role",
            "weyl",
            "--grid",
            "1,2,3"
        ])),
        2
    );
    assert_eq!(
        code(&lsys(&["eval", "--example", "9", "--role", "weyl"])),
        2
    );
    assert_eq!(code(&lsys(&["eval", "--role", "weyl"])), 2);
    assert_eq!(code(&lsys(&["verify", "--suite", "nope"])), 2);
    assert!(!Path::new("/definitely/missing.json").exists());
    assert_eq!(
        code(&lsys(&[
            "eval",
            "--measure",
            "/definitely/missing.json",
            "--role",
            "weyl"
        ])),
        4
    );
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{not json");
    assert_eq!(
        code(&lsys(&["eval", "--measure", &bad, "--role", "weyl"])),
        2
    );
    let m = write(&dir, "two.json", TWO_ATOMS);
    let out = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        code(&lsys(&[
            "eval",
            "--measure",
            &m,
            "--role",
            "weyl",
            "--out",
            out.to_str().unwrap()
        ])),
        4
    );
}

#[test]
fn examples_listing() {
    let o = lsys(&["examples", "--rho", "-2"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let k4: f64 = out
        .lines()
        .nth(4)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((k4 - 0.733_043_605_245_445_3).abs() < 1e-15);
}
