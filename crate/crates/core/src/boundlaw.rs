//! Linear trajectory bounds implied by a lower-bounded field component.
//!
//! If `f_j(x) ≥ α` everywhere then along any solution
//!
//! - `x_j(t) ≥ α (t − t0) + x_j(t0)` for `t ≥ t0`, and
//! - `x_j(t) ≤ α (t − t0) + x_j(t0)` for `t < t0`.
//!
//! The inequality flips for backward time. Applying the forward form for
//! `t < t0` is unsound, and [`BoundReport::naive_backward_violated`] records
//! when a trajectory exhibits that concretely. [`refute_nonexistence`]
//! searches for orbits that stay bounded in backward time under the same
//! hypothesis: equilibria, closed orbits, or simply non-escaping runs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::integrator::{integrate, integrate_partial, IntegrationError, IntegrationOptions, Sample, Trajectory};
use crate::linalg::solve_min_norm;
use crate::math::{distance, norm};
use crate::poincare::{first_return, Direction, ReturnOptions, SectionError, SectionPlane};
use crate::polyfield::PolyField;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("component index {index} out of range for dimension {dimension}")]
    ComponentOutOfRange { index: usize, dimension: usize },
    #[error("no trajectory samples to check")]
    EmptyTrajectory,
    #[error("trajectories do not share the same anchor time and state")]
    AnchorMismatch,
    #[error("seed has length {found}, field dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("horizon must be positive and finite")]
    InvalidHorizon,
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSource {
    Certified,
    UserAsserted,
}

/// `f_j ≥ α` for the zero-based component `index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    pub index: usize,
    pub alpha: f64,
    pub source: CertificateSource,
}

impl BoundCertificate {
    /// Runs the even-power certifier on component `index`.
    pub fn certify(field: &PolyField, index: usize) -> Result<Option<Self>, BoundError> {
        let comp = field
            .components()
            .get(index)
            .ok_or(BoundError::ComponentOutOfRange { index, dimension: field.dimension() })?;
        Ok(comp.certify_lower_bound().map(|alpha| Self { index, alpha, source: CertificateSource::Certified }))
    }

    /// Every component the certifier can bound, in component order.
    pub fn certify_all(field: &PolyField) -> Vec<Self> {
        (0..field.dimension()).filter_map(|j| Self::certify(field, j).ok().flatten()).collect()
    }

    pub fn user_asserted(index: usize, alpha: f64) -> Self {
        Self { index, alpha, source: CertificateSource::UserAsserted }
    }
}

/// `α (t − t0) + x_j(t0)`.
#[inline]
pub fn bound_line(alpha: f64, t0: f64, xj0: f64, t: f64) -> f64 {
    alpha * (t - t0) + xj0
}

/// Verification tolerance: the caller's tolerance plus ten times the
/// integrator's nominal per-step tolerance.
pub fn verification_tolerance(user_tol: f64, opts: &IntegrationOptions) -> f64 {
    user_tol + 10.0 * opts.nominal_tolerance()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub index: usize,
    pub alpha: f64,
    pub tolerance: f64,
    pub forward_holds: bool,
    /// `min_{t ≥ t0} x_j(t) − line(t)`; zero at the anchor itself.
    pub forward_margin: f64,
    pub backward_holds: bool,
    /// `min_{t < t0} line(t) − x_j(t)`; `None` without backward samples.
    pub backward_margin: Option<f64>,
    /// Some backward sample lies strictly below the line, i.e. the forward
    /// inequality fails for `t < t0`.
    pub naive_backward_violated: bool,
    pub samples_checked: usize,
}

/// Checks both inequalities on every sample and every Hermite step midpoint
/// of the given trajectories, which must share one anchor `(t0, x(t0))`.
pub fn verify_bounds(
    trajectories: &[&Trajectory],
    cert: &BoundCertificate,
    tol: f64,
) -> Result<BoundReport, BoundError> {
    let first = trajectories.first().ok_or(BoundError::EmptyTrajectory)?;
    let anchor = &first.samples()[0];
    let dim = anchor.state.len();
    if cert.index >= dim {
        return Err(BoundError::ComponentOutOfRange { index: cert.index, dimension: dim });
    }
    if trajectories.iter().any(|tr| tr.samples()[0].t != anchor.t || tr.samples()[0].state != anchor.state) {
        return Err(BoundError::AnchorMismatch);
    }
    let (t0, xj0, j) = (anchor.t, anchor.state[cert.index], cert.index);

    let mut forward_margin = f64::INFINITY;
    let mut backward_margin: Option<f64> = None;
    let mut checked = 0usize;
    let mut check = |t: f64, x: &[f64]| {
        let line = bound_line(cert.alpha, t0, xj0, t);
        checked += 1;
        if t >= t0 {
            forward_margin = forward_margin.min(x[j] - line);
        } else {
            let m = line - x[j];
            backward_margin = Some(backward_margin.map_or(m, |b: f64| b.min(m)));
        }
    };
    for tr in trajectories {
        let s = tr.samples();
        for (i, sample) in s.iter().enumerate() {
            check(sample.t, &sample.state);
            if i + 1 < s.len() {
                let (tm, xm) = tr.midpoint(i);
                check(tm, &xm);
            }
        }
    }
    // a backward margin above tol means x_j sits strictly below the line,
    // where the forward inequality would demand x_j ≥ line
    let naive = backward_margin.is_some_and(|m| m > tol);
    Ok(BoundReport {
        index: cert.index,
        alpha: cert.alpha,
        tolerance: tol,
        forward_holds: forward_margin >= -tol,
        forward_margin,
        backward_holds: backward_margin.map_or(true, |m| m >= -tol),
        backward_margin,
        naive_backward_violated: naive,
        samples_checked: checked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Falsified,
    NoCounterexample,
}

impl Verdict {
    pub fn message(self) -> &'static str {
        match self {
            Verdict::Falsified => "bounded backward orbit found — original Theorem 1 claim falsified",
            Verdict::NoCounterexample => "orbit escaped backward — no counterexample from this seed",
        }
    }
}

/// Evidence that an orbit stays bounded for all negative time.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `f(point) = 0` with the symbolic residual below [`EQUILIBRIUM_RESIDUAL`].
    Equilibrium { point: Vec<f64>, residual: f64 },
    /// The seed returns to itself after `period`; `closure` is the return
    /// distance.
    ClosedOrbit { period: f64, closure: f64 },
    /// Backward integration over the whole horizon stayed bounded without
    /// systematic growth.
    BoundedBackward { max_norm: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Escape {
    /// The norm passed the integrator's blow-up cap at time `t`.
    Cap { t: f64 },
    /// Max norm over the far half of the horizon exceeded the near half by
    /// more than [`ESCAPE_GROWTH`].
    Growth { ratio: f64 },
    /// Integration stopped for another reason at time `t`.
    Failed { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefutationReport {
    pub seed: Vec<f64>,
    pub horizon: f64,
    pub bounded: bool,
    pub witness: Option<Witness>,
    pub escape: Option<Escape>,
    /// Largest state norm seen on the backward orbit.
    pub max_backward_norm: f64,
    /// Time reached by the backward run (`-horizon` unless it stopped early).
    pub backward_reached: f64,
    pub bounds: BoundReport,
    pub verdict: Verdict,
}

pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-12;
pub const CLOSURE_TOL: f64 = 1e-6;
pub const ESCAPE_GROWTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefuteOptions {
    pub integration: IntegrationOptions,
    /// User part of the verification tolerance.
    pub tol: f64,
}

impl Default for RefuteOptions {
    fn default() -> Self {
        Self { integration: IntegrationOptions::default(), tol: 1e-6 }
    }
}

/// Newton (minimum-norm steps) on `f(x) = 0` from `seed`.
pub fn find_equilibrium(field: &PolyField, seed: &[f64], max_iter: usize) -> Option<(Vec<f64>, f64)> {
    let mut x = seed.to_vec();
    let mut fx = field.evaluate(&x).ok()?;
    for _ in 0..=max_iter {
        let r = norm(&fx);
        if r < EQUILIBRIUM_RESIDUAL {
            return Some((x, r));
        }
        let jac = field.jacobian(&x).ok()?;
        let step = solve_min_norm(&jac, &fx, 1e-14)?;
        for (xi, di) in x.iter_mut().zip(&step) {
            *xi -= di;
        }
        if x.iter().any(|v| !v.is_finite()) || norm(&x) > 1e12 {
            return None;
        }
        fx = field.evaluate(&x).ok()?;
    }
    None
}

fn constant_trajectory(field: &PolyField, point: &[f64], t0: f64, t1: f64) -> Trajectory {
    let d = field.evaluate(point).unwrap_or_else(|_| vec![0.0; point.len()]);
    let s = |t| Sample { t, state: point.to_vec(), derivative: d.clone() };
    Trajectory::from_samples(vec![s(t0), s(t1)])
}

/// Extends one period of samples periodically over `[−horizon, horizon]`.
fn periodic_extension(period_samples: &Trajectory, period: f64, horizon: f64) -> (Trajectory, Trajectory) {
    let base = period_samples.samples();
    let last = base.len() - 1; // base[last] coincides with base[0] shifted by one period
    let mut fwd = Vec::new();
    let mut m = 0.0;
    'outer: loop {
        for s in &base[..last] {
            let t = s.t + m * period;
            if t > horizon {
                break 'outer;
            }
            fwd.push(Sample { t, ..s.clone() });
        }
        m += 1.0;
    }
    let mut bwd = vec![base[0].clone()];
    let mut m = 1.0;
    'outer2: loop {
        for s in base[1..last].iter().rev() {
            let t = s.t - m * period;
            if t < -horizon {
                break 'outer2;
            }
            bwd.push(Sample { t, ..s.clone() });
        }
        let t = -m * period;
        if t < -horizon {
            break;
        }
        bwd.push(Sample { t, ..base[0].clone() });
        m += 1.0;
    }
    (Trajectory::from_samples(fwd), Trajectory::from_samples(bwd))
}

/// Looks for a bounded backward orbit through `seed` (anchored at `t0 = 0`).
///
/// In order: an equilibrium found by Newton from the seed, a closed orbit
/// through the seed (first return to the plane through the seed normal to
/// the flow), and finally plain backward integration to `−horizon`. Escape
/// from the backward run is a valid outcome, not an error.
pub fn refute_nonexistence(
    field: &PolyField,
    cert: &BoundCertificate,
    seed: &[f64],
    horizon: f64,
    opts: &RefuteOptions,
) -> Result<RefutationReport, BoundError> {
    let n = field.dimension();
    if seed.len() != n {
        return Err(BoundError::DimensionMismatch { expected: n, found: seed.len() });
    }
    if cert.index >= n {
        return Err(BoundError::ComponentOutOfRange { index: cert.index, dimension: n });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(BoundError::InvalidHorizon);
    }
    let tol = verification_tolerance(opts.tol, &opts.integration);
    let base = |bounds, witness: Option<Witness>, max_norm| RefutationReport {
        seed: seed.to_vec(),
        horizon,
        bounded: true,
        witness,
        escape: None,
        max_backward_norm: max_norm,
        backward_reached: -horizon,
        bounds,
        verdict: Verdict::Falsified,
    };

    if let Some((point, residual)) = find_equilibrium(field, seed, 50) {
        let fwd = constant_trajectory(field, &point, 0.0, horizon);
        let bwd = constant_trajectory(field, &point, 0.0, -horizon);
        let bounds = verify_bounds(&[&fwd, &bwd], cert, tol)?;
        let max_norm = norm(&point);
        return Ok(base(bounds, Some(Witness::Equilibrium { point, residual }), max_norm));
    }

    if n == 3 {
        if let Some((period, closure, one_period)) = closed_orbit(field, seed, horizon, &opts.integration)? {
            let (fwd, bwd) = periodic_extension(&one_period, period, horizon);
            let bounds = verify_bounds(&[&fwd, &bwd], cert, tol)?;
            let max_norm = one_period.samples().iter().map(|s| norm(&s.state)).fold(0.0, f64::max);
            return Ok(base(bounds, Some(Witness::ClosedOrbit { period, closure }), max_norm));
        }
    }

    let (bwd, stop) = integrate_partial(field, seed, 0.0, -horizon, &opts.integration)?;
    let (fwd, _) = integrate_partial(field, seed, 0.0, horizon, &opts.integration)?;
    let bounds = verify_bounds(&[&fwd, &bwd], cert, tol)?;
    let max_norm = bwd.samples().iter().map(|s| norm(&s.state)).fold(0.0, f64::max);
    let reached = bwd.last().t;

    let escape = match stop {
        Some(IntegrationError::BlowUp { t, .. }) => Some(Escape::Cap { t }),
        Some(e) => Some(Escape::Failed { t: reached, reason: alloc::format!("{e}") }),
        None => {
            let ratio = growth_ratio(&bwd, horizon);
            (ratio > ESCAPE_GROWTH).then_some(Escape::Growth { ratio })
        }
    };
    let bounded = escape.is_none();
    Ok(RefutationReport {
        seed: seed.to_vec(),
        horizon,
        bounded,
        witness: bounded.then_some(Witness::BoundedBackward { max_norm }),
        escape,
        max_backward_norm: max_norm,
        backward_reached: reached,
        bounds,
        verdict: if bounded { Verdict::Falsified } else { Verdict::NoCounterexample },
    })
}

/// Max norm over `[−H, −H/2)` divided by max norm over `[−H/2, 0]`, with
/// the denominator floored at one so that orbits near the origin do not
/// register as growth.
fn growth_ratio(bwd: &Trajectory, horizon: f64) -> f64 {
    let (mut near, mut far) = (0.0f64, 0.0f64);
    for s in bwd.samples() {
        let r = norm(&s.state);
        if s.t >= -0.5 * horizon {
            near = near.max(r);
        } else {
            far = far.max(r);
        }
    }
    far / near.max(1.0)
}

/// First return of the seed to the plane through it normal to the flow. A
/// return within [`CLOSURE_TOL`] of the seed is a closed orbit.
fn closed_orbit(
    field: &PolyField,
    seed: &[f64],
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<Option<(f64, f64, Trajectory)>, BoundError> {
    let fx = field.evaluate(seed).map_err(|_| BoundError::DimensionMismatch { expected: 3, found: seed.len() })?;
    let speed = norm(&fx);
    if !(speed > 0.0) {
        return Ok(None);
    }
    let start = [seed[0], seed[1], seed[2]];
    let Ok(plane) = SectionPlane::new(start, [fx[0], fx[1], fx[2]], Direction::Positive) else {
        return Ok(None);
    };
    let ropts = ReturnOptions { integration: *opts, max_time: horizon, ..Default::default() };
    let sp = plane.point_at([0.0, 0.0], 0.0);
    match first_return(field, &plane, &sp, &ropts) {
        Ok((ret, period)) => {
            let closure = distance(&ret.state, seed);
            if closure < CLOSURE_TOL {
                let one = integrate(field, seed, 0.0, period, opts)?;
                Ok(Some((period, closure, one)))
            } else {
                Ok(None)
            }
        }
        Err(SectionError::Integration(e)) if !matches!(e, IntegrationError::BlowUp { .. }) => Err(e.into()),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_system;
    use core::f64::consts::PI;

    const EQUILIBRIUM: &str = "dx/dt = -x\ndy/dt = -y\ndz/dt = x^2";
    const CIRCLE: &str = "dx/dt = x - y - x*(x^2 + y^2)\ndy/dt = x + y - y*(x^2 + y^2)\ndz/dt = x^2 + y^2 - 1";

    #[test]
    fn bound_line_examples() {
        assert_eq!(bound_line(-1.0, 0.0, 2.0, 3.0), -1.0);
        assert_eq!(bound_line(-7.5, 4.0, 1.25, 4.0), 1.25);
        assert_eq!(bound_line(-10.0, 1.0, 0.0, 0.0), 10.0);
    }

    #[test]
    fn certificates() {
        let f = parse_system(CIRCLE).unwrap();
        let c = BoundCertificate::certify(&f, 2).unwrap().unwrap();
        assert_eq!((c.index, c.alpha, c.source), (2, -1.0, CertificateSource::Certified));
        assert_eq!(BoundCertificate::certify(&f, 0).unwrap(), None);
        assert!(BoundCertificate::certify(&f, 3).is_err());
        assert_eq!(BoundCertificate::certify_all(&f), vec![c]);
    }

    #[test]
    fn equilibrium_trajectory_satisfies_both_bounds() {
        let f = parse_system(EQUILIBRIUM).unwrap();
        let cert = BoundCertificate::user_asserted(2, -1.0);
        let opts = IntegrationOptions::default();
        let fwd = integrate(&f, &[0.0; 3], 0.0, 50.0, &opts).unwrap();
        let bwd = integrate(&f, &[0.0; 3], 0.0, -50.0, &opts).unwrap();
        let r = verify_bounds(&[&fwd, &bwd], &cert, verification_tolerance(1e-6, &opts)).unwrap();
        assert!(r.forward_holds && r.backward_holds);
        assert!(fwd.samples().iter().chain(bwd.samples()).all(|s| s.state == [0.0; 3]));
        // at rest x_j stays at 0 while the line rises backward
        assert!(r.naive_backward_violated);
        assert_eq!(r.samples_checked, 2 * fwd.len() - 1 + 2 * bwd.len() - 1);
    }

    #[test]
    fn unit_drift_both_inequalities() {
        let f = parse_system("dz/dt = 1").unwrap();
        let cert = BoundCertificate::user_asserted(0, -1.0);
        let opts = IntegrationOptions::default();
        let fwd = integrate(&f, &[0.0], 0.0, 10.0, &opts).unwrap();
        let bwd = integrate(&f, &[0.0], 0.0, -10.0, &opts).unwrap();
        let r = verify_bounds(&[&fwd, &bwd], &cert, 1e-6).unwrap();
        assert!(r.forward_holds && r.backward_holds);
        assert_eq!(r.forward_margin, 0.0);
        // line − x = 2|t|, smallest at the first backward midpoint
        assert!((r.backward_margin.unwrap() - bwd.samples()[1].t.abs()).abs() < 1e-9);
    }

    #[test]
    fn violation_is_detected() {
        // x_j(t) = t claimed to satisfy f_j ≥ 2: both inequalities must fail
        let f = parse_system("dz/dt = 1").unwrap();
        let cert = BoundCertificate::user_asserted(0, 2.0);
        let opts = IntegrationOptions::default();
        let fwd = integrate(&f, &[0.0], 0.0, 1.0, &opts).unwrap();
        let bwd = integrate(&f, &[0.0], 0.0, -1.0, &opts).unwrap();
        let r = verify_bounds(&[&fwd, &bwd], &cert, 1e-6).unwrap();
        assert!(!r.forward_holds && !r.backward_holds && !r.naive_backward_violated);
        assert!((r.forward_margin + 1.0).abs() < 1e-9);
    }

    #[test]
    fn verify_errors() {
        let f = parse_system("dz/dt = 1").unwrap();
        let a = integrate(&f, &[0.0], 0.0, 1.0, &Default::default()).unwrap();
        let b = integrate(&f, &[1.0], 0.0, 1.0, &Default::default()).unwrap();
        let cert = BoundCertificate::user_asserted(0, -1.0);
        assert_eq!(verify_bounds(&[], &cert, 1e-6).unwrap_err(), BoundError::EmptyTrajectory);
        assert_eq!(verify_bounds(&[&a, &b], &cert, 1e-6).unwrap_err(), BoundError::AnchorMismatch);
        assert!(matches!(
            verify_bounds(&[&a], &BoundCertificate::user_asserted(1, -1.0), 1e-6),
            Err(BoundError::ComponentOutOfRange { .. })
        ));
    }

    #[test]
    fn refute_equilibrium_seed() {
        let f = parse_system(EQUILIBRIUM).unwrap();
        let cert = BoundCertificate::user_asserted(2, -1.0);
        let r = refute_nonexistence(&f, &cert, &[0.0; 3], 100.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        match r.witness {
            Some(Witness::Equilibrium { residual, .. }) => assert!(residual < EQUILIBRIUM_RESIDUAL),
            other => panic!("{other:?}"),
        }
        assert!(r.bounds.forward_holds && r.bounds.backward_holds);
    }

    #[test]
    fn refute_circle_seed_finds_closed_orbit() {
        let f = parse_system(CIRCLE).unwrap();
        let cert = BoundCertificate::certify(&f, 2).unwrap().unwrap();
        let r = refute_nonexistence(&f, &cert, &[1.0, 0.0, 0.0], 100.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        match r.witness {
            Some(Witness::ClosedOrbit { period, closure }) => {
                assert!((period - 2.0 * PI).abs() < 1e-7);
                assert!(closure < CLOSURE_TOL);
            }
            other => panic!("{other:?}"),
        }
        assert!(r.bounds.forward_holds && r.bounds.backward_holds);
        assert!(r.max_backward_norm < 1.0 + 1e-6);
    }

    #[test]
    fn refute_cubic_escape() {
        // x(t) = t, z(t) = 5 + t^3/3
        let f = parse_system("dx/dt = 1\ndy/dt = 0\ndz/dt = x^2").unwrap();
        let cert = BoundCertificate::certify(&f, 2).unwrap().unwrap();
        assert_eq!(cert.alpha, 0.0);
        let r = refute_nonexistence(&f, &cert, &[0.0, 0.0, 5.0], 100.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoCounterexample);
        assert!(!r.bounded);
        assert!(matches!(r.escape, Some(Escape::Growth { ratio }) if ratio > 7.0));
        assert!(r.bounds.forward_holds && r.bounds.backward_holds);
    }

    #[test]
    fn refute_blow_up_is_not_an_error() {
        let f = parse_system(EQUILIBRIUM).unwrap();
        let cert = BoundCertificate::certify(&f, 2).unwrap().unwrap();
        // Gauss–Newton from (1, 0, 0) lands on the line of equilibria x = y = 0
        let r = refute_nonexistence(&f, &cert, &[1.0, 0.0, 0.0], 100.0, &Default::default()).unwrap();
        assert!(matches!(r.witness, Some(Witness::Equilibrium { .. })));

        // x(t) = 1 / (1 + t) reaches the cap just after t = -1
        let g = parse_system("dx/dt = -x^2\ndy/dt = 1\ndz/dt = 1").unwrap();
        let cert = BoundCertificate::user_asserted(2, 1.0);
        let r = refute_nonexistence(&g, &cert, &[1.0, 0.0, 0.0], 100.0, &Default::default()).unwrap();
        assert!(matches!(r.escape, Some(Escape::Cap { .. })), "{:?}", r.escape);
        assert_eq!(r.verdict, Verdict::NoCounterexample);
    }

    #[test]
    fn refute_input_errors() {
        let f = parse_system(EQUILIBRIUM).unwrap();
        let cert = BoundCertificate::user_asserted(2, -1.0);
        assert!(refute_nonexistence(&f, &cert, &[0.0; 2], 1.0, &Default::default()).is_err());
        assert_eq!(
            refute_nonexistence(&f, &cert, &[0.0; 3], 0.0, &Default::default()).unwrap_err(),
            BoundError::InvalidHorizon
        );
    }
}
