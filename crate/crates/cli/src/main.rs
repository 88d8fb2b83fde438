//! `satspec`: Stokes eigenmodes, triad interactions, saturation certificates
//! and controlled Galerkin runs on a 3D box.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satspec::exact::{self, ExactDomain, RationalRecord};
use satspec::galerkin::{self, Method};
use satspec::io::{self as sio, StateEntry};
use satspec::saturation::{self, cq, CertificateRecord, ModeSet};
use satspec::{
    eigenvalue, project, ControlSchedule, DomainSpec, EigenMode, FieldExpansion, Frequency, GalerkinSystem, ModeIndex,
    SteerOptions, TrigVectorField,
};

use config::RunConfig;

const DOMAIN_HELP: &str = "Box side lengths L1,L2,L3. Each entry is a decimal (1.25, 2e-1) or a fraction (7/5). \
The text is read exactly as a rational for the exact paths (saturate, trace-proof, exact coefficients) \
and rounded to the nearest double for the numeric paths.";

#[derive(Debug, Parser)]
#[command(
    name = "satspec",
    version,
    about = "Stokes eigenbasis, triad interactions, saturation certificates and Galerkin steering on a 3D box"
)]
struct Cli {
    /// TOML run configuration; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct DomainArgs {
    #[arg(long, help = DOMAIN_HELP)]
    domain: Option<String>,
    /// Viscosity.
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump every eigenmode with frequencies up to --max as one JSON record per line.
    Basis {
        #[arg(long)]
        max: u32,
        #[command(flatten)]
        dom: DomainArgs,
    },
    /// Symmetrized advection of two eigenmodes, before and after projection.
    Interact {
        /// Frequency of the first mode, e.g. 1,0,3.
        #[arg(long, value_parser = parse_frequency)]
        k: Frequency,
        #[arg(long)]
        j: u8,
        #[arg(long, value_parser = parse_frequency)]
        m: Frequency,
        #[arg(long)]
        jm: u8,
        #[command(flatten)]
        dom: DomainArgs,
    },
    /// Leray projection of (z1 psi1^n, z2 psi2^n, z3 psi3^n) onto the eigenmodes of frequency n.
    Project {
        #[arg(long, value_parser = parse_frequency)]
        n: Frequency,
        /// Amplitude z1,z2,z3 (decimals or fractions).
        #[arg(long)]
        z: String,
        #[command(flatten)]
        dom: DomainArgs,
    },
    /// Iterate the saturation recursion and write a certificate log.
    Saturate {
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long, default_value_t = 10)]
        max_gen: usize,
        #[arg(long, help = DOMAIN_HELP)]
        domain: Option<String>,
        /// Certificate log (JSON array).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the constructive induction step q -> q+1 in exact arithmetic.
    TraceProof {
        #[arg(long)]
        q: u32,
        #[arg(long, help = DOMAIN_HELP)]
        domain: Option<String>,
        /// Treat corrected misprints as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Integrate the controlled Galerkin system and write a CSV trajectory.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Initial state (JSON array of {j, k, value}); zero when absent.
        #[arg(long)]
        u0: Option<PathBuf>,
        /// Control schedule; zero control over [0, T] when absent.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Write every n-th step.
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a piecewise-constant control steering u0 to a target.
    Steer {
        #[command(flatten)]
        run: RunArgs,
        /// Initial state; zero when absent.
        #[arg(long)]
        u0: Option<PathBuf>,
        /// Target state (JSON array of {j, k, value}).
        #[arg(long)]
        target: PathBuf,
        /// Number of piecewise-constant segments (default 8).
        #[arg(long)]
        segments: Option<usize>,
        /// Iteration budget (default 500).
        #[arg(long)]
        iters: Option<usize>,
        /// Seed of the random restart used when zero control is a critical point.
        #[arg(long)]
        seed: Option<u64>,
        /// Amplitude of that restart in unit-L2 coordinates.
        #[arg(long)]
        init_scale: Option<f64>,
        /// Stop once J falls below this fraction of its initial value.
        #[arg(long)]
        stop_ratio: Option<f64>,
        /// Search direction.
        #[arg(long, value_enum, default_value_t = MethodArg::Lbfgs)]
        method: MethodArg,
        /// Where to write the best schedule.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
struct RunArgs {
    /// Largest frequency component kept in the truncation (default 4).
    #[arg(long)]
    cutoff: Option<u32>,
    #[command(flatten)]
    dom: DomainArgs,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// RK4 step; at most 0.1/lambda_max and at most every segment duration.
    #[arg(long)]
    dt: Option<f64>,
    /// Constant forcing h (JSON array of {j, k, value}).
    #[arg(long)]
    h: Option<PathBuf>,
    /// Modes the control may act on.
    #[arg(long, value_enum, default_value_t = ControlSet::FirstGeneration)]
    controls: ControlSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControlSet {
    /// Modes of span(C + B(C, C)).
    FirstGeneration,
    /// The 81 seed modes C.
    Seed,
    /// Seed modes with one vanishing frequency component.
    SingleZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gradient,
    Lbfgs,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }

    fn mismatch(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

impl From<satspec::Error> for Failure {
    fn from(e: satspec::Error) -> Self {
        let code = if matches!(e, satspec::Error::BlowUp { .. }) { 1 } else { 2 };
        Self { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        match error.downcast_ref::<satspec::Error>() {
            Some(satspec::Error::BlowUp { .. }) => Self::mismatch(error),
            _ => Self::usage(error),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(text) = std::env::var("SATSPEC_THREADS") else { return Ok(()) };
    let n: usize =
        text.trim().parse().with_context(|| format!("SATSPEC_THREADS must be a positive integer, got {text:?}"))?;
    if n == 0 {
        return Err(anyhow!("SATSPEC_THREADS must be a positive integer"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Basis { max, dom } => basis(max, &dom, &cfg),
        Command::Interact { k, j, m, jm, dom } => interact(k, j, m, jm, &dom, &cfg),
        Command::Project { n, z, dom } => project_cmd(n, &z, &dom, &cfg),
        Command::Saturate { cutoff, max_gen, domain, out } => {
            let cutoff = cutoff.or(cfg.cutoff).ok_or_else(|| Failure::usage(anyhow!("--cutoff is required")))?;
            saturate_cmd(cutoff, max_gen, &exact_domain(domain.as_deref(), &cfg)?, out.or(cfg.out.clone()).as_deref())
        }
        Command::TraceProof { q, domain, strict } => trace_proof(q, &exact_domain(domain.as_deref(), &cfg)?, strict),
        Command::Simulate { run, u0, schedule, every, out } => {
            simulate(&run, &cfg, u0.as_deref(), schedule.as_deref(), every, out.or(cfg.out.clone()).as_deref())
        }
        Command::Steer { run, u0, target, segments, iters, seed, init_scale, stop_ratio, method, out } => {
            let opts = SteerOptions {
                n_segments: segments.or(cfg.segments).unwrap_or(config::DEFAULT_SEGMENTS),
                max_iters: iters.or(cfg.iters).unwrap_or(config::DEFAULT_ITERS),
                dt: run.dt.or(cfg.dt).unwrap_or(config::DEFAULT_DT),
                seed: seed.or(cfg.seed).unwrap_or(0),
                init_scale,
                stop_ratio: stop_ratio.or(cfg.stop_ratio).unwrap_or(0.0),
                method: match method {
                    MethodArg::Gradient => Method::Gradient,
                    MethodArg::Lbfgs => Method::Lbfgs,
                },
            };
            steer_cmd(&run, &cfg, u0.as_deref(), &target, &opts, out.or(cfg.out.clone()).as_deref())
        }
    }
}

fn parse_frequency(text: &str) -> Result<Frequency, String> {
    let parts: Vec<u32> = text
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c] => Ok(Frequency::new(*a, *b, *c)),
        _ => Err(format!("expected three comma-separated integers, got {text:?}")),
    }
}

fn exact_domain(flag: Option<&str>, cfg: &RunConfig) -> Result<ExactDomain, Failure> {
    let text = flag.or(cfg.domain.as_deref()).unwrap_or(config::DEFAULT_DOMAIN);
    Ok(ExactDomain::parse(text)?)
}

fn float_domain(dom: &DomainArgs, cfg: &RunConfig) -> Result<DomainSpec, Failure> {
    let ed = exact_domain(dom.domain.as_deref(), cfg)?;
    Ok(ed.to_domain(dom.nu.or(cfg.nu).unwrap_or(config::DEFAULT_NU))?)
}

fn write_output(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(Failure::usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::usage)
}

#[derive(Serialize)]
struct BasisRecord {
    k: Frequency,
    j: u8,
    w: [f64; 3],
    eigenvalue: f64,
    norm_sq: f64,
}

fn basis(max: u32, dom: &DomainArgs, cfg: &RunConfig) -> Outcome {
    let d = float_domain(dom, cfg)?;
    let mut out = String::new();
    for idx in satspec::enumerate_modes(max) {
        let m = EigenMode::new(idx, &d)?;
        let rec = BasisRecord { k: m.k, j: m.j, w: m.w, eigenvalue: eigenvalue(m.k, &d)?, norm_sq: m.norm_sq };
        out.push_str(&sio::to_json(&rec));
        out.push('\n');
    }
    write_output(None, &out)
}

#[derive(Serialize)]
struct TermRecord {
    n: Frequency,
    z: [f64; 3],
}

#[derive(Serialize)]
struct ExactCoefficient {
    j: u8,
    k: Frequency,
    num: String,
    den: String,
}

#[derive(Serialize)]
struct InteractRecord {
    a: ModeIndex,
    b: ModeIndex,
    terms: Vec<TermRecord>,
    projected: Vec<StateEntry>,
    /// Exact projected coefficients as multiples of pi.
    projected_over_pi: Vec<ExactCoefficient>,
}

fn exact_coefficients(list: impl IntoIterator<Item = (ModeIndex, exact::Rational)>) -> Vec<ExactCoefficient> {
    list.into_iter()
        .filter(|(_, v)| !is_zero(v))
        .map(|(idx, v)| {
            let r = RationalRecord::from(&v);
            ExactCoefficient { j: idx.j, k: idx.k, num: r.num, den: r.den }
        })
        .collect()
}

fn is_zero(v: &exact::Rational) -> bool {
    *v == exact::int(0)
}

fn interact(k: Frequency, j: u8, m: Frequency, jm: u8, dom: &DomainArgs, cfg: &RunConfig) -> Outcome {
    let ed = exact_domain(dom.domain.as_deref(), cfg)?;
    let d = ed.to_domain(dom.nu.or(cfg.nu).unwrap_or(config::DEFAULT_NU))?;
    let (ia, ib) = (ModeIndex::new(j, k), ModeIndex::new(jm, m));
    let a = EigenMode::new(ia, &d)?;
    let b = EigenMode::new(ib, &d)?;
    let term = satspec::advection_sym(&a, &b, &d);
    let projected = satspec::bilinear_sym(&a, &b, &d);

    let wa = exact::perp_basis(k, &ed)?[usize::from(j) - 1].clone();
    let wb = exact::perp_basis(m, &ed)?[usize::from(jm) - 1].clone();
    let mut exact_sum: std::collections::BTreeMap<ModeIndex, exact::Rational> = Default::default();
    for (n, z) in exact::advection_pair(k, &wa, m, &wb, &ed) {
        for (idx, v) in exact::project(n, &z, &ed)? {
            *exact_sum.entry(idx).or_insert_with(|| exact::int(0)) += v;
        }
    }
    let rec = InteractRecord {
        a: ia,
        b: ib,
        terms: term.terms.iter().map(|(n, z)| TermRecord { n: *n, z: *z }).collect(),
        projected: sio::expansion_to_entries(&projected),
        projected_over_pi: exact_coefficients(exact_sum),
    };
    write_output(None, &format!("{}\n", sio::to_json(&rec)))
}

#[derive(Serialize)]
struct ProjectRecord {
    n: Frequency,
    coefficients: Vec<StateEntry>,
    exact: Vec<ExactCoefficient>,
}

fn project_cmd(n: Frequency, z: &str, dom: &DomainArgs, cfg: &RunConfig) -> Outcome {
    let ed = exact_domain(dom.domain.as_deref(), cfg)?;
    let d = ed.to_domain(dom.nu.or(cfg.nu).unwrap_or(config::DEFAULT_NU))?;
    let parts: Vec<exact::Rational> = z.split(',').map(exact::parse_rational).collect::<satspec::Result<_>>()?;
    let zr: exact::RVec =
        parts.try_into().map_err(|_| Failure::usage(anyhow!("--z needs three comma-separated values, got {z:?}")))?;
    let zf = [exact::to_f64(&zr[0]), exact::to_f64(&zr[1]), exact::to_f64(&zr[2])];
    if n.num_zero() > 1 {
        return Err(satspec::Error::DegenerateFrequency(n, n.num_zero()).into());
    }
    let coefficients = sio::expansion_to_entries(&project(&TrigVectorField::new(n, zf), &d)?);
    let rec = ProjectRecord { n, coefficients, exact: exact_coefficients(exact::project(n, &zr, &ed)?) };
    write_output(None, &format!("{}\n", sio::to_json(&rec)))
}

fn saturate_cmd(cutoff: u32, max_gen: usize, ed: &ExactDomain, out: Option<&Path>) -> Outcome {
    let report = saturation::saturate(cutoff, max_gen, ed)?;
    for g in &report.generations {
        println!("G^{}: {} modes", g.generation, g.len());
    }
    for (q, g) in &report.first_generation {
        match g {
            Some(g) => println!("C^{q} first contained in G^{g}"),
            None => println!("C^{q} not reached"),
        }
    }
    println!("unreached below cutoff: {}", report.unreached.len());
    println!("certificates: {}", report.certificates.len());
    if let Some(path) = out {
        let records: Vec<CertificateRecord> = report.certificates.iter().map(CertificateRecord::from).collect();
        write_output(Some(path), &sio::to_json_lines(&records))?;
    }
    if report.inclusions_hold() {
        println!("C^q in G^(q-1) for q = 4..{cutoff}: yes");
        Ok(())
    } else {
        Err(Failure::mismatch(anyhow!("the inclusion C^q in G^(q-1) fails below cutoff {cutoff}")))
    }
}

fn trace_proof(q: u32, ed: &ExactDomain, strict: bool) -> Outcome {
    let report = saturation::paper_trace(q, ed)?;
    for c in &report.checks {
        println!("{c}");
    }
    let errata = report.errata().count();
    let mismatches = report.mismatches().count();
    println!("checks: {}, errata: {errata}, mismatches: {mismatches}", report.checks.len());
    if report.passed(strict) {
        Ok(())
    } else if mismatches > 0 {
        Err(Failure::mismatch(anyhow!("{mismatches} displays do not match")))
    } else {
        Err(Failure::mismatch(anyhow!("{errata} displays differ from the printed text (strict mode)")))
    }
}

fn controls_for(set: ControlSet, cutoff: u32, d: &DomainSpec) -> Result<ModeSet, Failure> {
    Ok(match set {
        ControlSet::FirstGeneration => saturation::first_generation_modes(cutoff, d)?,
        ControlSet::Seed => ModeSet::new(0, cq(3)),
        ControlSet::SingleZero => ModeSet::new(0, cq(3).into_iter().filter(|m| m.k.num_zero() == 1)),
    })
}

fn build_system(run: &RunArgs, cfg: &RunConfig) -> Result<GalerkinSystem, Failure> {
    let d = float_domain(&run.dom, cfg)?;
    let cutoff = run.cutoff.or(cfg.cutoff).unwrap_or(config::DEFAULT_CUTOFF);
    if cutoff < 3 {
        return Err(satspec::Error::Precondition(format!("cutoff must be at least 3, got {cutoff}")).into());
    }
    let h = match &run.h {
        Some(p) => sio::read_state(&read_text(p)?)?,
        None => FieldExpansion::new(),
    };
    let controls = controls_for(run.controls, cutoff, &d)?;
    Ok(GalerkinSystem::assemble_with_controls(&d, cutoff, &h, &controls)?)
}

fn read_state_vec(sys: &GalerkinSystem, path: Option<&Path>) -> Result<Vec<f64>, Failure> {
    match path {
        Some(p) => Ok(sys.state_from(&sio::read_state(&read_text(p)?)?)?),
        None => Ok(vec![0.0; sys.dim()]),
    }
}

fn simulate(
    run: &RunArgs,
    cfg: &RunConfig,
    u0: Option<&Path>,
    schedule: Option<&Path>,
    every: usize,
    out: Option<&Path>,
) -> Outcome {
    if every == 0 {
        return Err(Failure::usage(anyhow!("--every must be positive")));
    }
    let sys = build_system(run, cfg)?;
    let u = read_state_vec(&sys, u0)?;
    let horizon = run.horizon.or(cfg.horizon).unwrap_or(config::DEFAULT_HORIZON);
    let sched = match schedule {
        Some(p) => {
            let s = ControlSchedule::from_file(&sys, &sio::read_schedule(&read_text(p)?)?)?;
            if run.horizon.is_some() && (s.horizon() - horizon).abs() > 1e-9 * horizon {
                return Err(Failure::usage(anyhow!(
                    "schedule lasts {} but --T is {horizon}",
                    sio::format_f64(s.horizon())
                )));
            }
            s
        }
        None => ControlSchedule::zeros(&sys, horizon, 1)?,
    };
    let dt = run.dt.or(cfg.dt).unwrap_or(config::DEFAULT_DT);
    let traj = sys.integrate(&u, &sched, dt)?;
    let last = traj.times.len() - 1;
    let keep: Vec<usize> = (0..=last).filter(|i| i % every == 0 || *i == last).collect();
    let times: Vec<f64> = keep.iter().map(|&i| traj.times[i]).collect();
    let states: Vec<Vec<f64>> = keep.iter().map(|&i| traj.states[i].clone()).collect();
    let text = sio::trajectory_csv(&sys.modes(), &times, &states)?;
    write_output(out, &text)?;
    if out.is_some() {
        println!("final energy {}", sio::format_f64(sys.energy(traj.last())));
        println!("final v-norm {}", sio::format_f64(sys.v_norm(traj.last())));
    }
    Ok(())
}

fn steer_cmd(
    run: &RunArgs,
    cfg: &RunConfig,
    u0: Option<&Path>,
    target: &Path,
    opts: &SteerOptions,
    out: Option<&Path>,
) -> Outcome {
    let sys = build_system(run, cfg)?;
    let u = read_state_vec(&sys, u0)?;
    let target = sys.state_from(&sio::read_state(&read_text(target)?)?)?;
    let horizon = run.horizon.or(cfg.horizon).unwrap_or(config::DEFAULT_HORIZON);
    let result = galerkin::steer(&sys, &u, &target, horizon, opts)?;
    println!("iter J step");
    for l in &result.log {
        println!("{} {} {}", l.iter, sio::format_f64(l.j), sio::format_f64(l.step));
    }
    println!("initial distance {}", sio::format_f64(result.initial_distance));
    println!("final distance {}", sio::format_f64(result.distance));
    if result.stagnated {
        println!("stagnated: no improvement over 20 iterations");
    }
    let text = sio::write_schedule(&result.schedule.to_file(&sys));
    match out {
        Some(p) => write_output(Some(p), &text),
        None => Ok(()),
    }
}
