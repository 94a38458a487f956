//! The `.ito` text format.
//!
//! ```text
//! algebra wiener          # optional header
//! basis dt dw             # first declaration
//! death dt
//! state dw = 0            # death state defaults to 1
//! star dw = dw            # defaults to the basis element itself
//! mul dw dw = 1 dt        # unspecified products are zero
//! ```
//!
//! Linear combinations read `coef sym (+|- coef sym)*`; a bare symbol means
//! coefficient 1 and the single token `0` is the zero element. Complex
//! literals are `a`, `bi`, `a+bi` or `a-bi` with decimal reals.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::algebra::{Element, ItoAlgebra};
use crate::linalg::czero;
use crate::C64;

/// Largest basis the parser accepts.
pub const MAX_BASIS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A located message. Line and column are 1-based; line 0 refers to the
/// file as a whole.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// A parsed algebra plus warnings (failing axioms).
#[derive(Clone, Debug)]
pub struct Parsed {
    pub algebra: ItoAlgebra,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..pos],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn looks_numeric(s: &str) -> bool {
    matches!(s.chars().next(), Some(c) if c.is_ascii_digit() || c == '.' || c == '+' || c == '-')
}

/// Strict decimal real: `[+-]? (d+ (. d*)? | . d+) ([eE] [+-]? d+)?`.
fn parse_real(s: &str) -> Result<f64, String> {
    let b = s.as_bytes();
    let mut p = 0;
    if p < b.len() && (b[p] == b'+' || b[p] == b'-') {
        p += 1;
    }
    let int_start = p;
    while p < b.len() && b[p].is_ascii_digit() {
        p += 1;
    }
    let mut digits = p - int_start;
    if p < b.len() && b[p] == b'.' {
        p += 1;
        let frac_start = p;
        while p < b.len() && b[p].is_ascii_digit() {
            p += 1;
        }
        digits += p - frac_start;
    }
    if digits == 0 {
        return Err(format!("invalid number `{s}`"));
    }
    if p < b.len() && (b[p] == b'e' || b[p] == b'E') {
        p += 1;
        if p < b.len() && (b[p] == b'+' || b[p] == b'-') {
            p += 1;
        }
        let exp_start = p;
        while p < b.len() && b[p].is_ascii_digit() {
            p += 1;
        }
        if p == exp_start {
            return Err(format!("invalid exponent in `{s}`"));
        }
    }
    if p != b.len() {
        return Err(format!("invalid number `{s}`"));
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("number `{s}` is not finite"));
    }
    Ok(v)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(parse_real(s)?, 0.0));
    };
    let b = body.as_bytes();
    let split = (1..b.len())
        .rev()
        .find(|&p| (b[p] == b'+' || b[p] == b'-') && !matches!(b[p - 1], b'e' | b'E'));
    match split {
        Some(p) => Ok(C64::new(parse_real(&body[..p])?, parse_real(&body[p..])?)),
        None => Ok(C64::new(0.0, parse_real(body)?)),
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest form that parses back to the same bits.
pub fn format_complex(z: C64) -> String {
    let pos_zero = |x: f64| x.to_bits() == 0;
    if pos_zero(z.im) {
        fmt_real(z.re)
    } else if pos_zero(z.re) {
        format!("{}i", fmt_real(z.im))
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{sign}{}i", fmt_real(z.re), fmt_real(z.im.abs()))
    }
}

fn is_pos_zero(z: &C64) -> bool {
    z.re.to_bits() == 0 && z.im.to_bits() == 0
}

struct Parser {
    symbols: Vec<String>,
    errors: Vec<ParseDiagnostic>,
    line: usize,
}

impl Parser {
    fn error(&mut self, column: usize, message: impl Into<String>) {
        self.errors.push(ParseDiagnostic {
            severity: Severity::Error,
            line: self.line,
            column,
            message: message.into(),
        });
    }

    fn symbol(&mut self, tok: &Token) -> Option<usize> {
        if !is_symbol(tok.text) {
            self.error(tok.column, format!("expected a basis symbol, found `{}`", tok.text));
            return None;
        }
        match self.symbols.iter().position(|s| s == tok.text) {
            Some(i) => Some(i),
            None => {
                self.error(tok.column, format!("unknown basis symbol `{}`", tok.text));
                None
            }
        }
    }

    fn lincomb(&mut self, toks: &[Token], at: usize) -> Option<Vec<C64>> {
        let n = self.symbols.len();
        let mut out = vec![czero(); n];
        let mut touched = vec![false; n];
        if toks.is_empty() {
            self.error(at, "expected a linear combination");
            return None;
        }
        if toks.len() == 1 && toks[0].text == "0" {
            return Some(out);
        }
        let mut p = 0;
        let mut sign = 1.0;
        if toks[0].text == "-" || toks[0].text == "+" {
            sign = if toks[0].text == "-" { -1.0 } else { 1.0 };
            p = 1;
        }
        loop {
            let Some(tok) = toks.get(p) else {
                let col = toks.last().map(|t| t.column + t.text.chars().count()).unwrap_or(at);
                self.error(col, "expected a term");
                return None;
            };
            let coef = if looks_numeric(tok.text) {
                match parse_complex(tok.text) {
                    Ok(z) => {
                        p += 1;
                        z
                    }
                    Err(msg) => {
                        self.error(tok.column, msg);
                        return None;
                    }
                }
            } else {
                C64::new(1.0, 0.0)
            };
            let Some(stok) = toks.get(p) else {
                let col = tok.column + tok.text.chars().count();
                self.error(col, "expected a basis symbol after coefficient");
                return None;
            };
            let k = self.symbol(stok)?;
            let term = if sign < 0.0 { -coef } else { coef };
            // Assign on first use so that signed zeros survive.
            out[k] = if touched[k] { out[k] + term } else { term };
            touched[k] = true;
            p += 1;
            match toks.get(p) {
                None => return Some(out),
                Some(t) if t.text == "+" || t.text == "-" => {
                    sign = if t.text == "-" { -1.0 } else { 1.0 };
                    p += 1;
                }
                Some(t) => {
                    self.error(t.column, format!("expected `+` or `-`, found `{}`", t.text));
                    return None;
                }
            }
        }
    }
}

/// Parses an algebra definition. Errors are returned all at once; a successful
/// parse still carries warnings for any failing axiom.
pub fn parse(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let mut ps = Parser {
        symbols: Vec::new(),
        errors: Vec::new(),
        line: 0,
    };
    let mut name: Option<String> = None;
    let mut have_basis = false;
    let mut death: Option<Vec<C64>> = None;
    let mut mult: Vec<C64> = Vec::new();
    let mut star: Vec<Option<Vec<C64>>> = Vec::new();
    let mut state: Vec<Option<(C64, usize)>> = Vec::new();
    let mut seen_mul: HashSet<(usize, usize)> = HashSet::new();
    let mut line_count = 0;

    for (idx, raw) in text.lines().enumerate() {
        ps.line = idx + 1;
        line_count = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content);
        let Some(head) = toks.first() else { continue };
        let rest = &toks[1..];
        let end_col = head.column + head.text.chars().count();
        match head.text {
            "algebra" => {
                if have_basis || name.is_some() {
                    ps.error(head.column, "`algebra` header must come first and only once");
                    continue;
                }
                if rest.is_empty() {
                    ps.error(end_col, "expected an algebra name");
                    continue;
                }
                let start = rest[0].column - 1;
                let n: String = content.chars().skip(start).collect();
                name = Some(n.trim().to_string());
            }
            "basis" => {
                if have_basis {
                    ps.error(head.column, "duplicate `basis` declaration");
                    continue;
                }
                have_basis = true;
                if rest.is_empty() {
                    ps.error(end_col, "expected at least one basis symbol");
                    continue;
                }
                if rest.len() > MAX_BASIS {
                    ps.error(rest[MAX_BASIS].column, format!("basis larger than {MAX_BASIS} symbols"));
                    continue;
                }
                for t in rest {
                    if !is_symbol(t.text) {
                        ps.error(t.column, format!("invalid basis symbol `{}`", t.text));
                    } else if ps.symbols.iter().any(|s| s == t.text) {
                        ps.error(t.column, format!("duplicate basis symbol `{}`", t.text));
                    } else {
                        ps.symbols.push(t.text.to_string());
                    }
                }
                let n = ps.symbols.len();
                mult = vec![czero(); n * n * n];
                star = vec![None; n];
                state = vec![None; n];
            }
            _ if !have_basis => {
                ps.error(head.column, format!("`{}` before the `basis` declaration", head.text));
            }
            "death" => {
                if death.is_some() {
                    ps.error(head.column, "duplicate `death` declaration");
                    continue;
                }
                if let Some(v) = ps.lincomb(rest, end_col) {
                    if v.iter().all(is_pos_zero) {
                        ps.error(end_col, "death must be nonzero");
                    } else {
                        death = Some(v);
                    }
                }
            }
            "state" => {
                let Some((sym, eq)) = split_eq(&mut ps, rest, 1, end_col) else { continue };
                let Some(i) = ps.symbol(&sym[0]) else { continue };
                if eq.len() != 1 {
                    let col = eq.get(1).map(|t| t.column).unwrap_or(end_col);
                    ps.error(col, "expected a single complex value");
                    continue;
                }
                match parse_complex(eq[0].text) {
                    Err(msg) => ps.error(eq[0].column, msg),
                    Ok(z) => {
                        if state[i].is_some() {
                            ps.error(head.column, format!("duplicate state entry for `{}`", sym[0].text));
                        } else {
                            state[i] = Some((z, ps.line));
                        }
                    }
                }
            }
            "star" => {
                let Some((sym, eq)) = split_eq(&mut ps, rest, 1, end_col) else { continue };
                let Some(i) = ps.symbol(&sym[0]) else { continue };
                let eq_col = sym[0].column + sym[0].text.chars().count();
                if let Some(v) = ps.lincomb(eq, eq_col) {
                    if star[i].is_some() {
                        ps.error(head.column, format!("duplicate star entry for `{}`", sym[0].text));
                    } else {
                        star[i] = Some(v);
                    }
                }
            }
            "mul" => {
                let Some((sym, eq)) = split_eq(&mut ps, rest, 2, end_col) else { continue };
                let (Some(i), Some(j)) = (ps.symbol(&sym[0]), ps.symbol(&sym[1])) else { continue };
                let eq_col = sym[1].column + sym[1].text.chars().count();
                if let Some(v) = ps.lincomb(eq, eq_col) {
                    if !seen_mul.insert((i, j)) {
                        ps.error(
                            head.column,
                            format!("duplicate mul entry for `{} {}`", sym[0].text, sym[1].text),
                        );
                    } else {
                        let n = ps.symbols.len();
                        mult[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(&v);
                    }
                }
            }
            other => ps.error(head.column, format!("unknown directive `{other}`")),
        }
    }

    ps.line = line_count.max(1);
    if !have_basis {
        ps.error(1, "missing `basis` declaration");
    } else if death.is_none() && ps.errors.iter().all(|e| !e.message.contains("death")) {
        ps.error(1, "missing `death` declaration");
    }
    let n = ps.symbols.len();
    if n == 0 && ps.errors.is_empty() {
        ps.error(1, "empty basis");
    }
    if !ps.errors.is_empty() {
        return Err(ps.errors);
    }
    let death = death.expect("checked above");

    let death_index = {
        let e = crate::algebra::Element::new(death.clone());
        e.as_basis_index()
    };
    let mut l: Vec<C64> = state.iter().map(|s| s.map(|(z, _)| z).unwrap_or(czero())).collect();
    match death_index {
        Some(d) => match state[d] {
            None => l[d] = C64::new(1.0, 0.0),
            Some((z, line)) => {
                if (z - C64::new(1.0, 0.0)).norm() > crate::DEFAULT_TOL {
                    ps.line = line;
                    ps.error(1, format!("death state must be 1, found {}", format_complex(z)));
                }
            }
        },
        None => {
            let ld: C64 = death.iter().zip(&l).map(|(x, y)| x * y).sum();
            if (ld - C64::new(1.0, 0.0)).norm() > crate::DEFAULT_TOL {
                ps.error(1, format!("death state must be 1, found {}", format_complex(ld)));
            }
        }
    }
    if !ps.errors.is_empty() {
        return Err(ps.errors);
    }
    let mut star_flat = vec![czero(); n * n];
    for i in 0..n {
        match &star[i] {
            Some(row) => star_flat[i * n..(i + 1) * n].copy_from_slice(row),
            None => star_flat[i * n + i] = C64::new(1.0, 0.0),
        }
    }
    let algebra = match ItoAlgebra::new(
        name.unwrap_or_else(|| "unnamed".to_string()),
        ps.symbols.clone(),
        mult,
        star_flat,
        death,
        l,
    ) {
        Ok(a) => a,
        Err(e) => {
            ps.error(1, e.to_string());
            return Err(ps.errors);
        }
    };
    let warnings = algebra
        .verify_axioms()
        .failures()
        .map(|c| ParseDiagnostic {
            severity: Severity::Warning,
            line: 0,
            column: 0,
            message: format!("axiom `{}` fails (residual {:.3e})", c.name, c.residual),
        })
        .collect();
    Ok(Parsed { algebra, warnings })
}

/// Splits `sym.. = rhs` with exactly `arity` symbols before `=`.
fn split_eq<'t, 'a>(
    ps: &mut Parser,
    toks: &'t [Token<'a>],
    arity: usize,
    at: usize,
) -> Option<(&'t [Token<'a>], &'t [Token<'a>])> {
    match toks.iter().position(|t| t.text == "=") {
        Some(p) if p == arity => Some((&toks[..p], &toks[p + 1..])),
        Some(p) => {
            let col = toks.get(p.min(arity)).map(|t| t.column).unwrap_or(at);
            ps.error(col, format!("expected {arity} symbol(s) before `=`"));
            None
        }
        None => {
            let col = toks.get(arity).map(|t| t.column).unwrap_or(at);
            ps.error(col, "expected `=`");
            None
        }
    }
}

fn format_lincomb(coeffs: &[C64], labels: &[String]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, z)| !is_pos_zero(z))
        .map(|(k, z)| format!("{} {}", format_complex(*z), labels[k]))
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// Parses a single linear combination over the basis of `alg`, such as
/// `dt + 2-1i dw`. Diagnostics report line 1.
pub fn parse_element(alg: &ItoAlgebra, text: &str) -> Result<Element, Vec<ParseDiagnostic>> {
    let mut ps = Parser {
        symbols: alg.labels().to_vec(),
        errors: Vec::new(),
        line: 1,
    };
    if text.lines().count() > 1 {
        ps.error(1, "expected a single line");
        return Err(ps.errors);
    }
    let toks = tokenize(text.split('#').next().unwrap_or(""));
    match ps.lincomb(&toks, 1) {
        Some(coeffs) if ps.errors.is_empty() => Ok(Element::new(coeffs)),
        _ => Err(ps.errors),
    }
}

/// Bit-exact text form of an element, accepted by [`parse_element`].
pub fn format_element(alg: &ItoAlgebra, a: &Element) -> String {
    format_lincomb(a.coeffs(), alg.labels())
}

/// Canonical text: basis order as stored, table rows by index pair, 17
/// significant digits. Parsing the output reproduces the tables bit for bit.
pub fn serialize(alg: &ItoAlgebra) -> String {
    let n = alg.dim();
    let labels = alg.labels();
    let mut out = String::new();
    out.push_str(&format!("algebra {}\n", alg.name()));
    out.push_str(&format!("basis {}\n", labels.join(" ")));
    let death = alg.death();
    let death_index = death.as_basis_index();
    match death_index {
        Some(d) => out.push_str(&format!("death {}\n", labels[d])),
        None => out.push_str(&format!("death {}\n", format_lincomb(death.coeffs(), labels))),
    }
    for (i, z) in alg.state().iter().enumerate() {
        let implied = Some(i) == death_index && *z == C64::new(1.0, 0.0) && z.im.to_bits() == 0;
        if Some(i) == death_index {
            if !implied {
                out.push_str(&format!("state {} = {}\n", labels[i], format_complex(*z)));
            }
        } else if !is_pos_zero(z) {
            out.push_str(&format!("state {} = {}\n", labels[i], format_complex(*z)));
        }
    }
    let star = alg.star_table();
    for i in 0..n {
        let row = &star[i * n..(i + 1) * n];
        let identity = row.iter().enumerate().all(|(k, z)| {
            if k == i {
                z.re.to_bits() == 1.0f64.to_bits() && z.im.to_bits() == 0
            } else {
                is_pos_zero(z)
            }
        });
        if !identity {
            out.push_str(&format!("star {} = {}\n", labels[i], format_lincomb(row, labels)));
        }
    }
    let mult = alg.mult_table();
    for i in 0..n {
        for j in 0..n {
            let row = &mult[(i * n + j) * n..(i * n + j + 1) * n];
            if row.iter().any(|z| !is_pos_zero(z)) {
                out.push_str(&format!(
                    "mul {} {} = {}\n",
                    labels[i],
                    labels[j],
                    format_lincomb(row, labels)
                ));
            }
        }
    }
    out
}
