use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use memlag::selfadjoint::{check_self_adjoint, CheckOptions, Region};
use memlag::sim::{self, Drive, DriveVariable};
use memlag::{Circuit, Error, SourceWaveform};

mod args;

use args::{Cli, Command, Shape};

const SEED_VAR: &str = "MEMLAG_SEED";

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Formulation(_)
            | Error::InvalidElement { .. }
            | Error::InvalidCurve(_) => Failure::Input(e.to_string()),
            Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let failures = run(cli.command);
    let mut code = 0;
    for f in &failures {
        eprintln!("error: {}", f.message());
        code = code.max(f.code());
    }
    ExitCode::from(code)
}

fn run(command: Command) -> Vec<Failure> {
    let result = match command {
        Command::Parse { inputs, out } => parse_cmd(&inputs, out.as_deref()),
        Command::Check {
            inputs,
            region,
            samples,
            tol,
            out,
            jobs,
        } => check_cmd(&inputs, &region, samples, tol, out.as_deref(), jobs),
        Command::Simulate {
            inputs,
            time,
            x0,
            v0,
            out,
            jobs,
        } => simulate_cmd(&inputs, &time, x0.as_deref(), v0.as_deref(), out.as_deref(), jobs),
        Command::Drive {
            input,
            element,
            shape,
            amp,
            omega,
            eps,
            time,
            out,
        } => drive_cmd(&input, element.as_deref(), shape, amp, omega, eps, &time, out.as_deref()),
    };
    match result {
        Ok(failures) => failures,
        Err(f) => vec![f],
    }
}

fn check_inputs(inputs: &[PathBuf]) -> Result<(), Failure> {
    for p in inputs {
        if !p.is_file() {
            return Err(Failure::Usage(format!("{}: no such input file", p.display())));
        }
    }
    Ok(())
}

fn check_output_file(out: Option<&Path>) -> Result<(), Failure> {
    if let Some(p) = out {
        if p.is_dir() {
            return Err(Failure::Usage(format!("{}: output path is a directory", p.display())));
        }
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if parent.is_some_and(|d| !d.is_dir()) {
            return Err(Failure::Usage(format!("{}: output directory does not exist", p.display())));
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let circuit = memlag::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let diags = memlag::validate(&circuit);
    for w in diags.warnings() {
        eprintln!("{}: {w}", path.display());
    }
    if diags.has_errors() {
        let mut msg = format!("{}: circuit failed validation", path.display());
        for e in diags.errors() {
            msg.push_str(&format!("\n  {e}"));
        }
        return Err(Failure::Input(msg));
    }
    Ok(circuit)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

/// Runs `f` on every input with up to `jobs` worker threads, keeping the
/// input order in the results.
fn for_each_input<T, F>(inputs: &[PathBuf], jobs: usize, f: F) -> Vec<Result<T, Failure>>
where
    T: Send,
    F: Fn(&Path) -> Result<T, Failure> + Sync,
{
    let jobs = jobs.clamp(1, inputs.len().max(1));
    if jobs == 1 {
        return inputs.iter().map(|p| f(p)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<T, Failure>>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= inputs.len() {
                    break;
                }
                let r = f(&inputs[k]);
                *slots[k].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every input is processed"))
        .collect()
}

fn parse_cmd(inputs: &[PathBuf], out: Option<&Path>) -> Result<Vec<Failure>, Failure> {
    check_inputs(inputs)?;
    check_output_file(out)?;
    let mut text = String::new();
    let mut failures = Vec::new();
    for p in inputs {
        match load(p) {
            Ok(c) => text.push_str(&c.serialize()),
            Err(f) => failures.push(f),
        }
    }
    emit(out, &text)?;
    Ok(failures)
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--{flag}: {s:?} is not a number")))
        })
        .collect()
}

fn parse_region(text: &str, n: usize) -> Result<Region, Failure> {
    let v = parse_list("region", text)?;
    let (x, vv) = match v.as_slice() {
        [lo, hi] => ((*lo, *hi), (*lo, *hi)),
        [xl, xh, vl, vh] => ((*xl, *xh), (*vl, *vh)),
        _ => return Err(Failure::Usage("--region takes LO,HI or XLO,XHI,VLO,VHI".into())),
    };
    if !(x.0 <= x.1 && vv.0 <= vv.1) {
        return Err(Failure::Usage(format!("--region {text:?} is empty")));
    }
    Ok(Region {
        x: vec![x; n],
        v: vec![vv; n],
    })
}

fn seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{SEED_VAR}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn check_cmd(
    inputs: &[PathBuf],
    region: &str,
    samples: usize,
    tol: f64,
    out: Option<&Path>,
    jobs: usize,
) -> Result<Vec<Failure>, Failure> {
    check_inputs(inputs)?;
    check_output_file(out)?;
    parse_region(region, 1)?;
    let opts = CheckOptions {
        samples,
        tol,
        seed: seed()?,
        ..CheckOptions::default()
    };
    let results = for_each_input(inputs, jobs, |p| {
        let circuit = load(p)?;
        let sys = Arc::new(memlag::build_system(&circuit)?);
        let region = parse_region(region, sys.n())?.clipped_to(&sys);
        let report = check_self_adjoint(&sys.extract_ab(), &region, &opts)?;
        Ok(serde_json::to_value(&report).expect("report serializes"))
    });
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for (p, r) in inputs.iter().zip(results) {
        match r {
            Ok(v) => reports.push(json!({ "input": p.display().to_string(), "report": v })),
            Err(f) => failures.push(f),
        }
    }
    if !reports.is_empty() {
        let value = if inputs.len() == 1 {
            reports.pop().unwrap()["report"].take()
        } else {
            serde_json::Value::Array(reports)
        };
        emit(out, &(serde_json::to_string_pretty(&value).unwrap() + "\n"))?;
    }
    Ok(failures)
}

fn simulate_cmd(
    inputs: &[PathBuf],
    time: &args::TimeArgs,
    x0: Option<&str>,
    v0: Option<&str>,
    out: Option<&Path>,
    jobs: usize,
) -> Result<Vec<Failure>, Failure> {
    check_inputs(inputs)?;
    let multi = inputs.len() > 1;
    if multi {
        let dir = out.ok_or_else(|| Failure::Usage("several inputs need --out DIR".into()))?;
        if dir.exists() && !dir.is_dir() {
            return Err(Failure::Usage(format!("{}: not a directory", dir.display())));
        }
        let mut stems = std::collections::BTreeSet::new();
        for p in inputs {
            if !stems.insert(p.file_stem()) {
                return Err(Failure::Usage(format!("{}: duplicate input name", p.display())));
            }
        }
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    } else {
        check_output_file(out)?;
    }
    let x0 = x0.map(|s| parse_list("x0", s)).transpose()?;
    let v0 = v0.map(|s| parse_list("v0", s)).transpose()?;
    let method = time.method();
    let span = (time.t0, time.t1.unwrap_or(time.t0 + 10.0));

    let results = for_each_input(inputs, jobs, |p| {
        let circuit = load(p)?;
        let sys = Arc::new(memlag::build_system(&circuit)?);
        let n = sys.n();
        let pick = |v: &Option<Vec<f64>>, flag: &str| match v {
            None => Ok(vec![0.0; n]),
            Some(v) if v.len() == n => Ok(v.clone()),
            Some(v) => Err(Failure::Usage(format!("--{flag} has {} values, circuit has {n} coordinates", v.len()))),
        };
        let (x, v) = (pick(&x0, "x0")?, pick(&v0, "v0")?);
        let fo = memlag::to_first_order(Arc::clone(&sys))?;
        let traj = sim::simulate(&fo, &x, &v, span, method)?;
        let residual = sim::ikvl_residual(&sys, &traj)?;
        let waves = sim::branch_waveforms(&circuit, &traj)?;
        let mut csv = Vec::new();
        sim::write_trajectory_csv(&mut csv, &traj, &waves).expect("writing to memory");
        let target = if multi {
            let dir = out.expect("checked above");
            Some(dir.join(p.file_stem().unwrap()).with_extension("csv"))
        } else {
            out.map(Path::to_path_buf)
        };
        let summary = json!({
            "input": p.display().to_string(),
            "ikvl_residual": residual,
            "integrator": traj.info,
            "points": traj.len(),
        });
        Ok((target, csv, summary))
    });

    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((target, csv, summary)) => {
                let line = serde_json::to_string(&summary).unwrap();
                match target {
                    Some(path) => {
                        fs::write(&path, &csv).map_err(|e| io_failure(&path, e))?;
                        println!("{line}");
                    }
                    None => {
                        io::stdout()
                            .write_all(&csv)
                            .map_err(|e| Failure::Usage(format!("stdout: {e}")))?;
                        eprintln!("{line}");
                    }
                }
            }
            Err(f) => failures.push(f),
        }
    }
    Ok(failures)
}

#[allow(clippy::too_many_arguments)]
fn drive_cmd(
    input: &Path,
    element: Option<&str>,
    shape: Shape,
    amp: f64,
    omega: f64,
    eps: f64,
    time: &args::TimeArgs,
    out: Option<&Path>,
) -> Result<Vec<Failure>, Failure> {
    check_inputs(std::slice::from_ref(&input.to_path_buf()))?;
    check_output_file(out)?;
    let circuit = load(input)?;
    let element = match element {
        Some(name) => circuit
            .element(name)
            .ok_or_else(|| Failure::Usage(format!("no element named {name:?}")))?,
        None => circuit
            .elements
            .iter()
            .find(|e| e.kind.is_memory())
            .or_else(|| circuit.elements.iter().find(|e| !e.kind.is_source()))
            .ok_or_else(|| Failure::Usage("circuit has no element to drive".into()))?,
    };
    let waveform = match shape {
        Shape::Sine => SourceWaveform::sine(amp, omega, 0.0)?,
        Shape::Dc => SourceWaveform::dc(amp),
    };
    let t1 = time.t1.unwrap_or(match shape {
        Shape::Sine => time.t0 + 4.0 * std::f64::consts::PI / omega,
        Shape::Dc => time.t0 + 1.0,
    });
    let variable = Drive::natural_for(element);
    let drive = Drive { variable, waveform };
    let waves = sim::drive_element(element, &drive, (time.t0, t1), time.method())?;
    let report = sim::pinch_report(element, variable, &waves, eps)?;
    let (u, y) = sim::pinch_pair(element, variable);

    let mut csv = Vec::new();
    sim::write_waveforms_csv(&mut csv, &waves).expect("writing to memory");
    let summary = json!({
        "element": element.name,
        "drive": match variable { DriveVariable::Current => "current", DriveVariable::Voltage => "voltage" },
        "pair": [u.symbol(), y.symbol()],
        "pinch": report,
    });
    let text = serde_json::to_string_pretty(&summary).unwrap() + "\n";
    match out {
        Some(p) => {
            fs::write(p, &csv).map_err(|e| io_failure(p, e))?;
            print!("{text}");
        }
        None => {
            io::stdout()
                .write_all(&csv)
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))?;
            eprint!("{text}");
        }
    }
    Ok(Vec::new())
}
