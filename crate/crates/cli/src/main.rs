//! `itoalg`: batch front end for Itô algebra definitions.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 failed verification or
//! unsupported input, 3 non-faithful algebra.

mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use itoalg_core::adsl::{self, Severity};
use itoalg_core::decomp::decompose;
use itoalg_core::focksim::{classical_paths, vacuum_moments, SimReport};
use itoalg_core::gns::FundamentalRep;
use itoalg_core::ideal::{faithfulness_ideal, quotient};
use itoalg_core::{builtins, Element, Error, ItoAlgebra};
use serde_json::json;

use render::{complex_json, element_json, matrix_json, show_complex, show_element, show_matrix};

#[derive(Parser, Debug)]
#[command(name = "itoalg", version, about = "Check, represent, decompose and simulate finite-dimensional Itô algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify the axioms and faithfulness of an algebra.
    Check {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Print the canonical triangular representation.
    Represent {
        file: PathBuf,
        #[arg(long, conflicts_with = "latex")]
        json: bool,
        #[arg(long)]
        latex: bool,
    },
    /// Split into Brownian and Lévy components.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// The four seminorms of one element.
    Norms {
        file: PathBuf,
        /// Linear combination such as "dt + 2 dw".
        #[arg(long)]
        element: String,
        #[arg(long)]
        json: bool,
    },
    /// Run the toy-Fock or classical Monte Carlo simulator.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Element for the toy-Fock model; defaults to the first non-death
        /// basis element.
        #[arg(long)]
        element: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// List builtins, or emit one as `.ito` text.
    Catalog {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Fock,
    Classical,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self {
            code: 1,
            message: format!("{e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotFaithful { .. } => 3,
            _ => 2,
        };
        let mut message = e.to_string();
        if code == 3 {
            message.push_str("; run `itoalg check` to see the faithful quotient");
        }
        Self { code, message }
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<ItoAlgebra, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    match adsl::parse(&text) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{}:{w}", path.display());
            }
            Ok(parsed.algebra)
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{}:{d}", path.display());
            }
            let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
            Err(Failure {
                code: 1,
                message: format!("{}: {errors} parse error(s)", path.display()),
            })
        }
    }
}

fn parse_element(alg: &ItoAlgebra, text: &str) -> Result<Element, Failure> {
    adsl::parse_element(alg, text).map_err(|diags| Failure {
        code: 1,
        message: format!(
            "invalid element `{text}`: {}",
            diags.iter().map(|d| format!("column {}: {}", d.column, d.message)).collect::<Vec<_>>().join("; ")
        ),
    })
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| anyhow!(e))?;
    println!("{text}");
    Ok(())
}

fn check(file: &Path, tol: Option<f64>, json: bool) -> Outcome {
    let mut alg = load(file)?;
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(anyhow!("--tol must be positive, got {t}").into());
        }
        alg = alg.with_tol(t);
    }
    let axioms = alg.verify_axioms();
    let ideal = faithfulness_ideal(&alg);
    let quot = if axioms.passed() && !ideal.is_empty() {
        Some(quotient(&alg, &ideal)?)
    } else {
        None
    };
    let code = if !axioms.passed() {
        2
    } else if !ideal.is_empty() {
        3
    } else {
        0
    };
    if json {
        print_json(&json!({
            "algebra": alg.name(),
            "dim": alg.dim(),
            "tol": alg.tol(),
            "axioms": axioms,
            "faithful": ideal.is_empty(),
            "ideal": ideal.elements.iter().map(element_json).collect::<Vec<_>>(),
            "quotient": quot.as_ref().map(adsl::serialize),
        }))?;
    } else {
        println!("algebra {} (dim {})", alg.name(), alg.dim());
        println!("axioms: {}", if axioms.passed() { "pass" } else { "FAIL" });
        print!("{axioms}");
        if ideal.is_empty() {
            println!("faithful: yes");
        } else {
            println!("faithful: no (ideal dim {})", ideal.len());
            for y in &ideal.elements {
                println!("  {}", show_element(&alg, y));
            }
        }
        if let Some(q) = &quot {
            println!("quotient (dim {}):", q.dim());
            print!("{}", adsl::serialize(q));
        }
    }
    Ok(code)
}

fn represent(file: &Path, json: bool, latex: bool) -> Outcome {
    let alg = load(file)?;
    let rep = FundamentalRep::build(&alg)?;
    let identities = rep.verify_identities(&alg);
    let n = alg.dim();
    if json {
        let elements: Vec<_> = (0..n)
            .map(|j| {
                let (l, k, kdag, i) = rep.quadruple(j);
                json!({
                    "label": alg.labels()[j],
                    "l": complex_json(l),
                    "k": k.iter().copied().map(complex_json).collect::<Vec<_>>(),
                    "kdag": kdag.iter().copied().map(complex_json).collect::<Vec<_>>(),
                    "i": matrix_json(i),
                    "triangular": matrix_json(&rep.triangular(&alg.basis_element(j))),
                })
            })
            .collect();
        print_json(&json!({
            "algebra": alg.name(),
            "hdim": rep.hdim(),
            "eigenvalues": rep.eigenvalues(),
            "elements": elements,
            "identities": identities,
        }))?;
    } else if latex {
        println!("% {} : d = {}", alg.name(), rep.hdim());
        for j in 0..n {
            let m = rep.triangular(&alg.basis_element(j));
            println!("{}", render::latex_matrix(&alg.labels()[j], &m));
        }
    } else {
        println!("algebra {} : hilbert dimension {}", alg.name(), rep.hdim());
        for j in 0..n {
            let (l, k, kdag, i) = rep.quadruple(j);
            println!("[{}]", alg.labels()[j]);
            println!("  l    = {}", show_complex(l));
            println!("  k    = [{}]", k.iter().map(|z| show_complex(*z)).collect::<Vec<_>>().join(", "));
            println!("  kdag = [{}]", kdag.iter().map(|z| show_complex(*z)).collect::<Vec<_>>().join(", "));
            println!("  i    =");
            print!("{}", show_matrix(i, "    "));
            println!("  triangular =");
            print!("{}", show_matrix(&rep.triangular(&alg.basis_element(j)), "    "));
        }
        print!("{identities}");
    }
    Ok(if identities.passed() { 0 } else { 2 })
}

fn decompose_cmd(file: &Path, json: bool) -> Outcome {
    let alg = load(file)?;
    let d = decompose(&alg)?;
    if json {
        let show = |b: &[Element]| -> Vec<_> {
            b.iter()
                .map(|e| json!({ "text": show_element(&alg, e), "coeffs": element_json(e) }))
                .collect()
        };
        print_json(&json!({
            "algebra": alg.name(),
            "brownian": show(&d.brownian),
            "levy": show(&d.levy),
            "purely_brownian": d.is_purely_brownian(),
            "purely_levy": d.is_purely_levy(),
            "report": d.report,
        }))?;
    } else {
        println!("algebra {}", alg.name());
        println!("brownian (dim {}):", d.brownian.len());
        for e in &d.brownian {
            println!("  {}", show_element(&alg, e));
        }
        println!("levy (dim {}):", d.levy.len());
        for e in &d.levy {
            println!("  {}", show_element(&alg, e));
        }
        print!("{}", d.report);
    }
    Ok(if d.report.passed() { 0 } else { 2 })
}

fn norms(file: &Path, element: &str, json: bool) -> Outcome {
    let alg = load(file)?;
    let a = parse_element(&alg, element)?;
    let rep = FundamentalRep::build(&alg)?;
    let s = rep.seminorms(&a);
    if json {
        print_json(&json!({
            "algebra": alg.name(),
            "element": show_element(&alg, &a),
            "norm": s.norm,
            "plus": s.plus,
            "minus": s.minus,
            "plus_minus": s.plus_minus,
        }))?;
    } else {
        println!("element    {}", show_element(&alg, &a));
        println!("norm       {:.12}", s.norm);
        println!("plus       {:.12}", s.plus);
        println!("minus      {:.12}", s.minus);
        println!("plus_minus {:.12}", s.plus_minus);
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    file: &Path,
    model: Model,
    t: f64,
    dt: f64,
    paths: usize,
    seed: u64,
    element: Option<&str>,
    json: bool,
) -> Outcome {
    let alg = load(file)?;
    if !(t.is_finite() && t > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(anyhow!("--t and --dt must be positive").into());
    }
    let report: SimReport = match model {
        Model::Fock => {
            let a = match element {
                Some(text) => parse_element(&alg, text)?,
                None => {
                    let death = alg.death_index();
                    let j = (0..alg.dim()).find(|&j| Some(j) != death).unwrap_or(0);
                    alg.basis_element(j)
                }
            };
            let rep = FundamentalRep::build(&alg)?;
            let slots = (t / dt).round().max(1.0) as usize;
            vacuum_moments(&rep, &alg, &a, t, slots)?
        }
        Model::Classical => classical_paths(&alg, t, dt, paths, seed)?,
    };
    if json {
        print_json(&serde_json::to_value(&report).map_err(|e| anyhow!(e))?)?;
    } else {
        print!("{}", render::show_report(&report));
    }
    Ok(if report.passed() { 0 } else { 2 })
}

fn catalog(name: Option<&str>, params: &[f64], output: Option<&Path>, json: bool) -> Outcome {
    let Some(name) = name else {
        if !params.is_empty() || output.is_some() {
            return Err(anyhow!("--params and --output need --name").into());
        }
        let defaults: Vec<String> = builtins::catalog().iter().map(|a| a.name().to_string()).collect();
        if json {
            print_json(&json!({ "names": builtins::NAMES, "defaults": defaults }))?;
        } else {
            println!("builders: {}", builtins::NAMES.join(" "));
            println!("defaults: {}", defaults.join(" "));
        }
        return Ok(0);
    };
    let alg = builtins::by_name(name, params).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let text = adsl::serialize(&alg);
    match output {
        Some(path) => fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| anyhow!(e))?;
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { file, tol, json } => check(&file, tol, json),
        Command::Represent { file, json, latex } => represent(&file, json, latex),
        Command::Decompose { file, json } => decompose_cmd(&file, json),
        Command::Norms { file, element, json } => norms(&file, &element, json),
        Command::Simulate {
            file,
            model,
            t,
            dt,
            paths,
            seed,
            element,
            json,
        } => simulate(&file, model, t, dt, paths, seed, element.as_deref(), json),
        Command::Catalog {
            name,
            params,
            output,
            json,
        } => catalog(name.as_deref(), &params, output.as_deref(), json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
