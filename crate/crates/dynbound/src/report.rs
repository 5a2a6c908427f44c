//! JSON documents written by the commands. Component indices are 1-based
//! here, matching the `d<var>/dt` order of the system file.

use serde::Serialize;

use dynbound_core::boundlaw::{Escape, Witness};
use dynbound_core::lyapunov::LyapunovResult;
use dynbound_core::upo::{Census, PeriodicOrbit};
use dynbound_core::{BoundCertificate, BoundReport, CertificateSource, RefutationReport, SectionPlane};

#[derive(Debug, Clone, Serialize)]
pub struct Margins {
    pub forward: f64,
    pub backward: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundJson {
    pub component: usize,
    pub variable: String,
    pub alpha: f64,
    pub source: &'static str,
    pub tolerance: f64,
    pub forward_holds: bool,
    pub backward_holds: bool,
    pub naive_backward_violated: bool,
    pub margins: Margins,
    pub samples_checked: usize,
}

pub fn source_str(s: CertificateSource) -> &'static str {
    match s {
        CertificateSource::Certified => "certified",
        CertificateSource::UserAsserted => "user-asserted",
    }
}

impl BoundJson {
    pub fn new(r: &BoundReport, cert: &BoundCertificate, names: &[String]) -> Self {
        Self {
            component: r.index + 1,
            variable: names[r.index].clone(),
            alpha: r.alpha,
            source: source_str(cert.source),
            tolerance: r.tolerance,
            forward_holds: r.forward_holds,
            backward_holds: r.backward_holds,
            naive_backward_violated: r.naive_backward_violated,
            margins: Margins { forward: r.forward_margin, backward: r.backward_margin },
            samples_checked: r.samples_checked,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRun {
    pub x0: Vec<f64>,
    /// Why the forward run ended early, if it did.
    pub forward_stop: Option<String>,
    pub backward_stop: Option<String>,
    pub forward_reached: f64,
    pub backward_reached: f64,
    pub bounds: Vec<BoundJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSummary {
    pub runs: usize,
    pub forward_holds: bool,
    pub backward_holds: bool,
    pub naive_backward_violated_runs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsDoc {
    pub system: String,
    pub t_back: f64,
    pub t_fwd: f64,
    pub seed: u64,
    /// Components that were requested but could not be certified.
    pub uncertified: Vec<usize>,
    pub runs: Vec<BoundsRun>,
    pub summary: BoundsSummary,
    pub verdict: &'static str,
}

pub const BOUNDS_VERIFIED: &str = "forward and corrected backward bounds verified";
pub const BOUNDS_VIOLATED: &str = "bound violated beyond tolerance";
pub const BOUNDS_SKIPPED: &str = "no lower-bounded component certified; nothing to check";

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessJson {
    Equilibrium { point: Vec<f64>, residual: f64 },
    ClosedOrbit { period: f64, closure: f64 },
    BoundedBackward { max_norm: f64 },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EscapeJson {
    Cap { t: f64 },
    Growth { ratio: f64 },
    Failed { t: f64, reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RefuteDoc {
    pub system: String,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub bounded: bool,
    pub witness: Option<WitnessJson>,
    pub escape: Option<EscapeJson>,
    pub max_backward_norm: f64,
    pub backward_reached: f64,
    pub bounds: BoundJson,
    pub verdict: &'static str,
}

impl RefuteDoc {
    pub fn new(system: String, r: &RefutationReport, cert: &BoundCertificate, names: &[String]) -> Self {
        Self {
            system,
            x0: r.seed.clone(),
            horizon: r.horizon,
            bounded: r.bounded,
            witness: r.witness.as_ref().map(|w| match w {
                Witness::Equilibrium { point, residual } => {
                    WitnessJson::Equilibrium { point: point.clone(), residual: *residual }
                }
                Witness::ClosedOrbit { period, closure } => {
                    WitnessJson::ClosedOrbit { period: *period, closure: *closure }
                }
                Witness::BoundedBackward { max_norm } => WitnessJson::BoundedBackward { max_norm: *max_norm },
            }),
            escape: r.escape.as_ref().map(|e| match e {
                Escape::Cap { t } => EscapeJson::Cap { t: *t },
                Escape::Growth { ratio } => EscapeJson::Growth { ratio: *ratio },
                Escape::Failed { t, reason } => EscapeJson::Failed { t: *t, reason: reason.clone() },
            }),
            max_backward_norm: r.max_backward_norm,
            backward_reached: r.backward_reached,
            bounds: BoundJson::new(&r.bounds, cert, names),
            verdict: r.verdict.message(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaneJson {
    pub point: [f64; 3],
    pub normal: [f64; 3],
    pub direction: &'static str,
    /// In-plane chart axes (u, v).
    pub basis: [[f64; 3]; 2],
}

impl From<&SectionPlane> for PlaneJson {
    fn from(p: &SectionPlane) -> Self {
        Self { point: p.point(), normal: p.normal(), direction: p.direction().as_str(), basis: p.basis() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitJson {
    pub k: usize,
    pub period: f64,
    /// Fixed point of the k-th return map, in state space.
    pub section_point: [f64; 3],
    /// The same point in the plane's (u, v) chart.
    pub chart: [f64; 2],
    pub residual: f64,
    pub stability: &'static str,
    /// Floquet multipliers, largest modulus first.
    pub multipliers: Vec<Multiplier>,
    /// The multiplier along the flow direction (ideally exactly 1).
    pub flow_multiplier: Multiplier,
    pub monodromy_determinant: f64,
    pub liouville_determinant: f64,
    pub liouville_error: f64,
    pub samples_csv: Option<String>,
}

impl OrbitJson {
    pub fn new(o: &PeriodicOrbit, samples_csv: Option<String>) -> Self {
        Self {
            k: o.k,
            period: o.period,
            section_point: o.section_fixed_point.state,
            chart: o.section_fixed_point.coords,
            residual: o.residual,
            stability: o.stability.as_str(),
            multipliers: o
                .floquet_multipliers
                .iter()
                .map(|m| Multiplier { re: m.re, im: m.im, modulus: m.norm() })
                .collect(),
            flow_multiplier: {
                let m = o.monodromy.flow_multiplier();
                Multiplier { re: m.re, im: m.im, modulus: m.norm() }
            },
            monodromy_determinant: o.monodromy.determinant(),
            liouville_determinant: o.monodromy.liouville_determinant(),
            liouville_error: o.monodromy.liouville_error(),
            samples_csv,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureJson {
    pub k: usize,
    pub iterate: usize,
    pub chart_point: [f64; 2],
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusDoc {
    pub system: String,
    pub plane: PlaneJson,
    pub start: [f64; 3],
    pub n_iterates: usize,
    pub k_max: usize,
    pub threshold: f64,
    pub seeds: usize,
    pub orbits: Vec<OrbitJson>,
    pub failures: Vec<FailureJson>,
}

impl CensusDoc {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        system: String,
        plane: &SectionPlane,
        start: [f64; 3],
        n_iterates: usize,
        k_max: usize,
        threshold: f64,
        c: &Census,
        csv_names: &[Option<String>],
    ) -> Self {
        Self {
            system,
            plane: plane.into(),
            start,
            n_iterates,
            k_max,
            threshold,
            seeds: c.seeds.len(),
            orbits: c.orbits.iter().zip(csv_names).map(|(o, n)| OrbitJson::new(o, n.clone())).collect(),
            failures: c
                .failures
                .iter()
                .map(|(s, e)| FailureJson {
                    k: s.k,
                    iterate: s.index,
                    chart_point: s.point.coords,
                    error: e.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovDoc {
    pub system: String,
    pub x0: Vec<f64>,
    pub transient_skipped: f64,
    pub total_time: f64,
    pub renorm_interval: f64,
    pub exponents: Vec<f64>,
    pub sum: f64,
    pub mean_divergence: f64,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryEntry {
    pub time: f64,
    pub exponents: Vec<f64>,
}

impl LyapunovDoc {
    pub fn new(system: String, x0: Vec<f64>, r: &LyapunovResult) -> Self {
        Self {
            system,
            x0,
            transient_skipped: r.transient_skipped,
            total_time: r.total_time,
            renorm_interval: r.renorm_interval,
            exponents: r.exponents.clone(),
            sum: r.sum(),
            mean_divergence: r.mean_divergence,
            history: r
                .convergence_history
                .iter()
                .map(|(t, l)| HistoryEntry { time: *t, exponents: l.clone() })
                .collect(),
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable document");
    s.push('\n');
    s
}
