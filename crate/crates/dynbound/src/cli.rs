//! `dynbound` subcommands.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dynbound_core::boundlaw::{refute_nonexistence, verification_tolerance, verify_bounds, RefuteOptions};
use dynbound_core::integrator::{integrate_partial, IntegrationError};
use dynbound_core::lyapunov::lyapunov_spectrum;
use dynbound_core::poincare::{return_map_iterates, settle_onto_section, ReturnOptions, ON_PLANE_TOL};
use dynbound_core::upo::{census, orbit_samples, ShootJacobian, ShootOptions};
use dynbound_core::{BoundCertificate, IntegrationOptions, Method, PolyField, SectionPlane, SectionPoint};

use crate::report::{self, BoundJson, BoundsDoc, BoundsRun, BoundsSummary, CensusDoc, LyapunovDoc, RefuteDoc};
use crate::{load_system, output, parse_plane, parse_vector, svg, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "dynbound",
    version,
    about = "Trajectory bounds, return maps, periodic orbits and Lyapunov spectra of polynomial vector fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory; writes trajectory.csv and optionally an SVG projection.
    Simulate(SimulateArgs),
    /// Verify the forward and backward linear bounds of lower-bounded components.
    BoundsCheck(BoundsArgs),
    /// Look for a bounded backward orbit (equilibrium, closed orbit or bounded run).
    Refute(RefuteArgs),
    /// Poincaré section cloud; writes section.csv and section.svg.
    Section(SectionArgs),
    /// Close-recurrence census of periodic orbits on a section.
    Upo(UpoArgs),
    /// Lyapunov spectrum by QR re-orthonormalisation.
    Lyapunov(LyapunovArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// System file (`param` lines and one `d<var>/dt = ...` per variable).
    #[arg(long)]
    pub system: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for any randomised sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Verification tolerance, added to ten times the integrator tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Write the machine-readable result to stdout instead of files.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Rk45,
    Rk4,
}

#[derive(Debug, Args)]
pub struct Integration {
    #[arg(long, value_enum, default_value_t = MethodArg::Rk45)]
    pub method: MethodArg,
    /// Fixed step (rk4) or initial step (rk45).
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Absolute and relative tolerance (rk45).
    #[arg(long = "int-tol", default_value_t = 1e-10)]
    pub int_tol: f64,
    #[arg(long = "max-steps", default_value_t = 5_000_000)]
    pub max_steps: usize,
}

impl Integration {
    fn options(&self) -> Result<IntegrationOptions, CliError> {
        let o = IntegrationOptions {
            method: match self.method {
                MethodArg::Rk45 => Method::Rk45Adaptive,
                MethodArg::Rk4 => Method::Rk4Fixed,
            },
            step: self.step,
            abs_tol: self.int_tol,
            rel_tol: self.int_tol,
            max_steps: self.max_steps,
            ..IntegrationOptions::default()
        };
        o.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(o)
    }
}

/// One comma-separated state vector (an alias so clap parses it as a single value).
pub type State = Vec<f64>;

fn vector(s: &str) -> Result<State, String> {
    parse_vector(s)
}

fn plane(s: &str) -> Result<SectionPlane, String> {
    parse_plane(s)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integration: Integration,
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub x0: State,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: f64,
    /// Coordinate pair for an SVG projection, e.g. `x,z`.
    #[arg(long)]
    pub project: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integration: Integration,
    /// Start state; omit together with `--random`.
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub x0: Option<State>,
    /// Number of random starts, components uniform in [-5, 5].
    #[arg(long)]
    pub random: Option<usize>,
    /// Component to check (1-based); all certifiable components when omitted.
    #[arg(long)]
    pub component: Option<usize>,
    /// Assert `f_j >= alpha` instead of certifying it (needs `--component`).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long = "t-back", default_value_t = 50.0)]
    pub t_back: f64,
    #[arg(long = "t-fwd", default_value_t = 50.0)]
    pub t_fwd: f64,
}

#[derive(Debug, Args)]
pub struct RefuteArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integration: Integration,
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub x0: State,
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
    /// Component carrying the lower bound (1-based); first certifiable one when omitted.
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integration: Integration,
    /// `px,py,pz/nx,ny,nz/dir` with dir positive, negative or both.
    #[arg(long, value_parser = plane, allow_hyphen_values = true)]
    pub plane: SectionPlane,
    #[arg(long, value_parser = vector, allow_hyphen_values = true, default_value = "1,1,1")]
    pub x0: State,
    /// Flow time discarded before the first crossing.
    #[arg(long, default_value_t = 100.0)]
    pub transient: f64,
    #[arg(long, default_value_t = 2000)]
    pub iterates: usize,
    #[arg(long = "max-return-time", default_value_t = 100.0)]
    pub max_return_time: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum JacobianArg {
    Fd,
    Tangent,
}

#[derive(Debug, Args)]
pub struct UpoArgs {
    #[command(flatten)]
    pub common: Common,
    /// `px,py,pz/nx,ny,nz/dir` with dir positive, negative or both.
    #[arg(long, value_parser = plane, allow_hyphen_values = true)]
    pub plane: SectionPlane,
    #[arg(long, value_parser = vector, allow_hyphen_values = true, default_value = "1,1,1")]
    pub x0: State,
    #[arg(long, default_value_t = 100.0)]
    pub transient: f64,
    #[arg(long, default_value_t = 2000)]
    pub iterates: usize,
    #[arg(long = "k-max", default_value_t = 4)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = JacobianArg::Fd)]
    pub jacobian: JacobianArg,
    /// Integrator tolerance used while shooting.
    #[arg(long = "int-tol", default_value_t = 1e-12)]
    pub int_tol: f64,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integration: Integration,
    #[arg(long, value_parser = vector, allow_hyphen_values = true, default_value = "1,1,1")]
    pub x0: State,
    #[arg(long, default_value_t = 100.0)]
    pub transient: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub time: f64,
    #[arg(long, default_value_t = 0.5)]
    pub interval: f64,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::BoundsCheck(a) => bounds_check(a),
        Command::Refute(a) => refute(a),
        Command::Section(a) => section(a),
        Command::Upo(a) => upo(a),
        Command::Lyapunov(a) => lyapunov(a),
    }
}

/// Parses `args` (including the program name), runs, and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Sink<'a> {
    common: &'a Common,
}

impl Sink<'_> {
    /// Primary machine output: stdout with `--stdout`, else a file in `--out`.
    fn primary(&self, name: &str, content: &str) -> Result<(), CliError> {
        if self.common.stdout {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        } else {
            self.file(name, content)
        }
    }

    /// Secondary artefacts; skipped with `--stdout`.
    fn file(&self, name: &str, content: &str) -> Result<(), CliError> {
        if self.common.stdout {
            return Ok(());
        }
        let dir = &self.common.out;
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn system_label(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn check_dim(field: &PolyField, x0: &[f64]) -> Result<(), CliError> {
    if x0.len() != field.dimension() {
        return Err(CliError::Input(format!(
            "--x0 has {} components but the system has {} variables",
            x0.len(),
            field.dimension()
        )));
    }
    Ok(())
}

fn require_3d(field: &PolyField) -> Result<(), CliError> {
    if field.dimension() != 3 {
        return Err(CliError::Input(format!("sections need a three-variable system, got {}", field.dimension())));
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    check_dim(&field, &a.x0)?;
    let opts = a.integration.options()?;
    let names = field.variable_names().to_vec();
    let projection = match &a.project {
        None => None,
        Some(p) => {
            let idx = |name: &str| {
                names
                    .iter()
                    .position(|n| n == name.trim())
                    .ok_or_else(|| CliError::Input(format!("unknown variable `{}` in --project", name.trim())))
            };
            let (u, v) =
                p.split_once(',').ok_or_else(|| CliError::Input("--project expects two names, e.g. x,z".into()))?;
            Some((idx(u)?, idx(v)?))
        }
    };
    let (tr, stop) = integrate_partial(&field, &a.x0, a.t0, a.t1, &opts).map_err(integration_error)?;
    let sink = Sink { common: &a.common };
    sink.primary("trajectory.csv", &output::trajectory_csv(&tr, &names))?;
    if let Some((i, j)) = projection {
        let pts: Vec<(f64, f64)> = tr.samples().iter().map(|s| (s.state[i], s.state[j])).collect();
        let title = format!("{}: projection onto {}{}", system_label(&a.common.system), names[i], names[j]);
        sink.file("projection.svg", &svg::plot(&pts, (&names[i], &names[j]), &title, svg::Style::Line))?;
    }
    match stop {
        None => Ok(0),
        Some(e) => Err(CliError::Integration(format!("integration stopped: {e} (partial trajectory written)"))),
    }
}

fn integration_error(e: IntegrationError) -> CliError {
    match e {
        IntegrationError::InvalidOptions(_)
        | IntegrationError::DimensionMismatch { .. }
        | IntegrationError::NonFiniteInitial
        | IntegrationError::EmptyInterval => CliError::Input(e.to_string()),
        _ => CliError::Integration(e.to_string()),
    }
}

/// Certificates for `--component`/`--alpha`, or every certifiable component.
fn certificates(
    field: &PolyField,
    component: Option<usize>,
    alpha: Option<f64>,
) -> Result<(Vec<BoundCertificate>, Vec<usize>), CliError> {
    let n = field.dimension();
    match (component, alpha) {
        (None, Some(_)) => Err(CliError::Input("--alpha needs --component".into())),
        (Some(j), _) if j == 0 || j > n => Err(CliError::Input(format!("--component {j} is out of range 1..={n}"))),
        (Some(j), Some(alpha)) => Ok((vec![BoundCertificate::user_asserted(j - 1, alpha)], vec![])),
        (Some(j), None) => match BoundCertificate::certify(field, j - 1).expect("index checked") {
            Some(c) => Ok((vec![c], vec![])),
            None => Ok((vec![], vec![j])),
        },
        (None, None) => {
            let certs = BoundCertificate::certify_all(field);
            let missing = (1..=n).filter(|j| !certs.iter().any(|c| c.index + 1 == *j)).collect();
            Ok((certs, missing))
        }
    }
}

fn bounds_check(a: BoundsArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    let opts = a.integration.options()?;
    if !(a.t_back >= 0.0 && a.t_fwd >= 0.0) {
        return Err(CliError::Input("--t-back and --t-fwd must be non-negative".into()));
    }
    let starts: Vec<Vec<f64>> = match (&a.x0, a.random) {
        (Some(x0), None) => vec![x0.clone()],
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
            (0..n).map(|_| (0..field.dimension()).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect()
        }
        _ => return Err(CliError::Input("give exactly one of --x0 and --random".into())),
    };
    for x0 in &starts {
        check_dim(&field, x0)?;
    }
    let (certs, uncertified) = certificates(&field, a.component, a.alpha)?;
    let tol = verification_tolerance(a.common.tol, &opts);
    let names = field.variable_names();

    let mut runs = Vec::new();
    if !certs.is_empty() {
        for x0 in &starts {
            let leg = |t1: f64| integrate_partial(&field, x0, 0.0, t1, &opts).map_err(integration_error);
            let (fwd, fstop) = if a.t_fwd > 0.0 { leg(a.t_fwd)? } else { leg(1e-12)? };
            let (bwd, bstop) = if a.t_back > 0.0 { leg(-a.t_back)? } else { leg(-1e-12)? };
            let bounds = certs
                .iter()
                .map(|c| {
                    verify_bounds(&[&fwd, &bwd], c, tol)
                        .map(|r| BoundJson::new(&r, c, names))
                        .map_err(|e| CliError::Input(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            runs.push(BoundsRun {
                x0: x0.clone(),
                forward_stop: fstop.map(|e| e.to_string()),
                backward_stop: bstop.map(|e| e.to_string()),
                forward_reached: fwd.last().t,
                backward_reached: bwd.last().t,
                bounds,
            });
        }
    }
    let all = |f: fn(&BoundJson) -> bool| runs.iter().all(|r| r.bounds.iter().all(f));
    let summary = BoundsSummary {
        runs: runs.len(),
        forward_holds: all(|b| b.forward_holds),
        backward_holds: all(|b| b.backward_holds),
        naive_backward_violated_runs: runs
            .iter()
            .filter(|r| r.bounds.iter().any(|b| b.naive_backward_violated))
            .count(),
    };
    let ok = summary.forward_holds && summary.backward_holds;
    let verdict = if certs.is_empty() {
        report::BOUNDS_SKIPPED
    } else if ok {
        report::BOUNDS_VERIFIED
    } else {
        report::BOUNDS_VIOLATED
    };
    let doc = BoundsDoc {
        system: system_label(&a.common.system),
        t_back: a.t_back,
        t_fwd: a.t_fwd,
        seed: a.common.seed,
        uncertified,
        runs,
        summary,
        verdict,
    };
    Sink { common: &a.common }.primary("bounds.json", &report::to_json(&doc))?;
    eprintln!("{verdict}");
    Ok(if ok { 0 } else { 3 })
}

fn refute(a: RefuteArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    check_dim(&field, &a.x0)?;
    let opts = a.integration.options()?;
    let (certs, _) = certificates(&field, a.component, a.alpha)?;
    let Some(cert) = certs.first() else {
        return Err(CliError::Input(
            "no lower-bounded component could be certified; pass --component and --alpha".into(),
        ));
    };
    if !(a.horizon > 0.0 && a.horizon.is_finite()) {
        return Err(CliError::Input("--horizon must be positive".into()));
    }
    let ro = RefuteOptions { integration: opts, tol: a.common.tol };
    let r =
        refute_nonexistence(&field, cert, &a.x0, a.horizon, &ro).map_err(|e| CliError::Integration(e.to_string()))?;
    let doc = RefuteDoc::new(system_label(&a.common.system), &r, cert, field.variable_names());
    Sink { common: &a.common }.primary("refute.json", &report::to_json(&doc))?;
    eprintln!("{}", doc.verdict);
    Ok(0)
}

fn start_on_section(
    field: &PolyField,
    plane: &SectionPlane,
    x0: &[f64],
    transient: f64,
    ro: &ReturnOptions,
) -> Result<SectionPoint, CliError> {
    let on_plane = plane.signed_distance(x0).abs() < ON_PLANE_TOL;
    if on_plane && transient == 0.0 {
        return plane.section_point([x0[0], x0[1], x0[2]], 0.0).map_err(|e| CliError::Input(e.to_string()));
    }
    settle_onto_section(field, plane, x0, transient, ro).map_err(|e| CliError::Integration(e.to_string()))
}

fn section(a: SectionArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    require_3d(&field)?;
    check_dim(&field, &a.x0)?;
    let ro = ReturnOptions { integration: a.integration.options()?, max_time: a.max_return_time, ..Default::default() };
    let start = start_on_section(&field, &a.plane, &a.x0, a.transient, &ro)?;
    let mut pts = vec![start];
    let iterates = return_map_iterates(&field, &a.plane, &start, a.iterates, &ro);
    let err = match iterates {
        Ok(v) => {
            pts.extend(v);
            None
        }
        Err(e) => Some(e),
    };
    let sink = Sink { common: &a.common };
    sink.primary("section.csv", &output::section_csv(&pts))?;
    let cloud: Vec<(f64, f64)> = pts.iter().map(|p| (p.coords[0], p.coords[1])).collect();
    let title = format!("{}: section {}", system_label(&a.common.system), a.plane.direction().as_str());
    sink.file("section.svg", &svg::plot(&cloud, ("u", "v"), &title, svg::Style::Dots))?;
    match err {
        None => Ok(0),
        Some(e) => Err(CliError::Integration(format!("{e} (iterates so far written)"))),
    }
}

fn upo(a: UpoArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    require_3d(&field)?;
    check_dim(&field, &a.x0)?;
    if a.k_max == 0 || !(a.threshold > 0.0) {
        return Err(CliError::Input("--k-max must be at least 1 and --threshold positive".into()));
    }
    let mut opts = ShootOptions {
        jacobian: match a.jacobian {
            JacobianArg::Fd => ShootJacobian::FiniteDifference,
            JacobianArg::Tangent => ShootJacobian::TangentFlow,
        },
        ..ShootOptions::default()
    };
    opts.returns.integration = IntegrationOptions::rk45(a.int_tol);
    opts.returns.integration.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let start = start_on_section(&field, &a.plane, &a.x0, a.transient, &opts.returns)?;
    let c = census(&field, &a.plane, &start, a.iterates, a.k_max, a.threshold, &opts)
        .map_err(|e| CliError::Integration(e.to_string()))?;

    let sink = Sink { common: &a.common };
    let names = field.variable_names();
    let mut csv_names = Vec::new();
    for (i, o) in c.orbits.iter().enumerate() {
        if a.common.stdout {
            csv_names.push(None);
            continue;
        }
        let name = format!("orbit_{:02}_k{}.csv", i + 1, o.k);
        let samples = orbit_samples(&field, o, &opts.returns.integration).map_err(integration_error)?;
        sink.file(&name, &output::orbit_csv(&samples, names))?;
        csv_names.push(Some(name));
    }
    let doc = CensusDoc::new(
        system_label(&a.common.system),
        &a.plane,
        start.state,
        a.iterates,
        a.k_max,
        a.threshold,
        &c,
        &csv_names,
    );
    sink.primary("census.json", &report::to_json(&doc))?;
    eprintln!("{} orbits from {} seeds ({} seeds failed)", c.orbits.len(), c.seeds.len(), c.failures.len());
    Ok(0)
}

fn lyapunov(a: LyapunovArgs) -> Result<i32, CliError> {
    let field = load_system(&a.common.system)?;
    check_dim(&field, &a.x0)?;
    let opts = a.integration.options()?;
    let r = lyapunov_spectrum(&field, &a.x0, a.transient, a.time, a.interval, &opts).map_err(|e| match e {
        dynbound_core::lyapunov::LyapunovError::Integration(e) => integration_error(e),
        dynbound_core::lyapunov::LyapunovError::Degenerate { .. } => CliError::Integration(e.to_string()),
        _ => CliError::Input(e.to_string()),
    })?;
    let sink = Sink { common: &a.common };
    sink.primary("lyapunov.json", &report::to_json(&LyapunovDoc::new(system_label(&a.common.system), a.x0, &r)))?;
    sink.file("lyapunov_history.csv", &output::lyapunov_history_csv(&r))?;
    eprintln!("exponents {:?}", r.exponents);
    Ok(0)
}
