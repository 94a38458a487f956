//! Text, LaTeX and JSON renderings of numbers and matrices.

use std::fmt::Write;

use itoalg_core::focksim::SimReport;
use itoalg_core::linalg::CMatrix;
use itoalg_core::{Element, ItoAlgebra, C64};
use serde_json::{json, Value};

/// `[re, im]`.
pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn element_json(a: &Element) -> Value {
    Value::Array(a.coeffs().iter().copied().map(complex_json).collect())
}

/// Row-major list of rows of `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| complex_json(m[(r, c)])).collect()))
            .collect(),
    )
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-13 {
        0.0
    } else {
        x
    }
}

pub fn show_complex(z: C64) -> String {
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re:.6}"),
        (true, false) => format!("{im:.6}i"),
        (false, false) => format!("{re:.6}{im:+.6}i"),
    }
}

/// Readable linear combination; terms below display precision are dropped.
pub fn show_element(alg: &ItoAlgebra, a: &Element) -> String {
    let terms: Vec<String> = a
        .coeffs()
        .iter()
        .zip(alg.labels())
        .filter(|(z, _)| clean(z.re) != 0.0 || clean(z.im) != 0.0)
        .map(|(z, l)| {
            let zc = C64::new(clean(z.re), clean(z.im));
            if zc == C64::new(1.0, 0.0) {
                l.clone()
            } else if zc.im == 0.0 || zc.re == 0.0 {
                format!("{} {l}", show_complex(zc))
            } else {
                format!("({}) {l}", show_complex(zc))
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn show_matrix(m: &CMatrix, indent: &str) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| show_complex(m[(r, c)])).collect())
        .collect();
    let width = cells.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
        let _ = writeln!(out, "{indent}[ {} ]", line.join("  "));
    }
    out
}

fn latex_complex(z: C64) -> String {
    let (re, im) = (clean(z.re), clean(z.im));
    let num = |x: f64| {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    };
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (_, true) => num(re),
        (true, false) => format!("{}i", num(im)),
        (false, false) => format!("{}{}{}i", num(re), if im < 0.0 { "" } else { "+" }, num(im)),
    }
}

pub fn latex_matrix(label: &str, m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| latex_complex(m[(r, c)])).collect::<Vec<_>>().join(" & "))
        .collect();
    let name = label.replace('_', "\\_");
    format!("\\Lambda(\\mathrm{{{name}}}) = \\begin{{pmatrix}} {} \\end{{pmatrix}}", rows.join(" \\\\ "))
}

pub fn show_report(r: &SimReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} on {}", r.model, r.algebra);
    for (k, v) in &r.inputs {
        let _ = writeln!(out, "  {k} = {v}");
    }
    if let Some(s) = r.seed {
        let _ = writeln!(out, "  seed = {s}");
    }
    for e in &r.estimates {
        let target = e.target.map(|t| format!("  (target {t:.6})")).unwrap_or_default();
        let _ = writeln!(out, "{:<28} {:>14.8} ± {:.2e}{target}", e.name, e.value, e.stderr);
    }
    for s in &r.slopes {
        let v = s.value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(out, "slope {:<22} {v}", s.name);
    }
    for c in &r.checks {
        let _ = writeln!(out, "{} {} (residual {:.3e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.residual);
    }
    let _ = writeln!(out, "runtime {:.1} ms", r.runtime_ms);
    out
}
