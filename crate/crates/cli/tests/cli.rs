//! End-to-end tests of the `itoalg` binary. Golden files live in
//! `tests/golden`; run with `UPDATE_GOLDEN=1` to regenerate them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use itoalg_core::builtins;
use serde_json::{json, Value};

const BUILTINS: &[(&str, &str, &[&str])] = &[
    ("newton", "newton", &[]),
    ("wiener", "wiener", &[]),
    ("poisson", "poisson", &[]),
    ("zero_intensity_poisson", "zero_intensity_poisson", &[]),
    ("hp1", "hp", &["1"]),
    ("hp2", "hp", &["2"]),
    ("hp3", "hp", &["3"]),
    ("thermal_brownian", "thermal_brownian", &[]),
    ("periodic_wiener", "periodic_wiener", &[]),
    ("group_levy", "group_levy", &[]),
    ("thermal_matrix", "thermal_matrix", &[]),
    ("orthogonal_sum", "orthogonal_sum", &[]),
];

fn itoalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itoalg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtime_ms");
            map.values_mut().for_each(strip_runtime);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

/// Structural equality with a relative tolerance on numbers.
fn close(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0) {
                Ok(())
            } else {
                Err(format!("{path}: {x} != {y}"))
            }
        }
        (Value::Array(xs), Value::Array(ys)) if xs.len() == ys.len() => xs
            .iter()
            .zip(ys)
            .enumerate()
            .try_for_each(|(i, (x, y))| close(x, y, &format!("{path}[{i}]"))),
        (Value::Object(xs), Value::Object(ys)) if xs.len() == ys.len() => xs.iter().try_for_each(|(k, x)| {
            ys.get(k)
                .ok_or_else(|| format!("{path}.{k} missing"))
                .and_then(|y| close(x, y, &format!("{path}.{k}")))
        }),
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} != {b}")),
    }
}

fn record(out: &Output, file: &Path, json_stdout: bool) -> Value {
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    let stderr = String::from_utf8(out.stderr.clone()).unwrap().replace(&file.display().to_string(), "<file>");
    let mut body = if json_stdout && !stdout.is_empty() {
        serde_json::from_str(&stdout).expect("stdout is one JSON document")
    } else {
        Value::String(stdout)
    };
    strip_runtime(&mut body);
    json!({ "exit": out.status.code(), "stdout": body, "stderr": stderr })
}

fn compare_golden(name: &str, actual: &Value) {
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
        return;
    }
    let text = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}; run with UPDATE_GOLDEN=1", path.display()));
    let expected: Value = serde_json::from_str(&text).unwrap();
    if let Err(e) = close(actual, &expected, name) {
        panic!("golden mismatch in {name}: {e}");
    }
}

fn write_builtin(dir: &Path, stem: &str, name: &str, params: &[&str]) -> (PathBuf, Output) {
    let file = dir.join(format!("{stem}.ito"));
    let mut args = vec!["catalog", "--name", name];
    if !params.is_empty() {
        args.push("--params");
        args.extend_from_slice(params);
    }
    let stdout = itoalg(&args);
    args.extend_from_slice(&["-o", file.to_str().unwrap()]);
    assert!(itoalg(&args).status.success(), "{stem}");
    (file, stdout)
}

fn sample_label(name: &str, params: &[&str]) -> String {
    let p: Vec<f64> = params.iter().map(|s| s.parse().unwrap()).collect();
    let alg = builtins::by_name(name, &p).unwrap();
    let death = alg.death_index();
    let j = (0..alg.dim()).find(|&j| Some(j) != death).unwrap_or(0);
    alg.labels()[j].clone()
}

#[test]
fn golden_outputs_for_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    for &(stem, name, params) in BUILTINS {
        let (file, catalog_out) = write_builtin(dir.path(), stem, name, params);
        let f = file.to_str().unwrap();
        compare_golden(&format!("{stem}__catalog"), &record(&catalog_out, &file, false));
        let label = sample_label(name, params);
        let runs: [(&str, Vec<&str>); 6] = [
            ("check", vec!["check", f, "--json"]),
            ("represent", vec!["represent", f, "--json"]),
            ("decompose", vec!["decompose", f, "--json"]),
            ("norms", vec!["norms", f, "--element", &label, "--json"]),
            ("fock", vec!["simulate", f, "--model", "fock", "--t", "1", "--dt", "0.125", "--json"]),
            (
                "classical",
                vec!["simulate", f, "--model", "classical", "--t", "1", "--dt", "0.1", "--paths", "2000", "--seed", "1", "--json"],
            ),
        ];
        for (cmd, args) in runs {
            let out = itoalg(&args);
            compare_golden(&format!("{stem}__{cmd}"), &record(&out, &file, true));
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (wiener, _) = write_builtin(dir.path(), "wiener", "wiener", &[]);
    let (zip, _) = write_builtin(dir.path(), "zip", "zero_intensity_poisson", &[]);
    assert_eq!(itoalg(&["check", wiener.to_str().unwrap()]).status.code(), Some(0));

    let out = itoalg(&["check", zip.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("quotient (dim 1)"), "{text}");
    assert_eq!(itoalg(&["represent", zip.to_str().unwrap()]).status.code(), Some(3));

    let bad = dir.path().join("negative.ito");
    fs::write(&bad, "basis dt x\ndeath dt\nmul x x = -1 dt\n").unwrap();
    assert_eq!(itoalg(&["check", bad.to_str().unwrap()]).status.code(), Some(2));

    let broken = dir.path().join("broken.ito");
    fs::write(&broken, "basis dt dw\ndeath dt\nmul dw dw = 1 dt\nmul dw dw = 2 dt\n").unwrap();
    let out = itoalg(&["check", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":4:"), "{err}");

    assert_eq!(itoalg(&["check", dir.path().join("missing.ito").to_str().unwrap()]).status.code(), Some(1));
    let out = itoalg(&["norms", wiener.to_str().unwrap(), "--element", "dt + nope"]);
    assert_eq!(out.status.code(), Some(1));

    let hp = dir.path().join("hp.ito");
    itoalg(&["catalog", "--name", "hp", "-o", hp.to_str().unwrap()]);
    assert_eq!(
        itoalg(&["simulate", hp.to_str().unwrap(), "--model", "classical"]).status.code(),
        Some(2)
    );
}

#[test]
fn poisson_representation_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let (file, _) = write_builtin(dir.path(), "poisson", "poisson", &[]);
    let out = itoalg(&["represent", file.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hdim"], 1);
    let dm = &v["elements"][1];
    assert_eq!(dm["label"], "dm");
    let expect = json!([
        [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]],
        [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    ]);
    close(&dm["triangular"], &expect, "dm").unwrap();

    let latex = itoalg(&["represent", file.to_str().unwrap(), "--latex"]);
    let text = String::from_utf8(latex.stdout).unwrap();
    assert!(text.contains("\\Lambda(\\mathrm{dm}) = \\begin{pmatrix} 0 & 1 & 0 \\\\ 0 & 1 & 1"), "{text}");
}

#[test]
fn catalog_listing_and_roundtrip() {
    let out = itoalg(&["catalog", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["defaults"].as_array().unwrap().len(), 12);
    let dir = tempfile::tempdir().unwrap();
    let (file, stdout) = write_builtin(dir.path(), "tb", "thermal_brownian", &["3", "0.25"]);
    assert_eq!(fs::read(&file).unwrap(), stdout.stdout);
    assert_eq!(itoalg(&["catalog", "--name", "nope"]).status.code(), Some(1));
}
