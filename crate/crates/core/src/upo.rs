//! Periodic orbits through a Poincaré section.
//!
//! The pipeline is: iterate the return map and collect close recurrences
//! ([`scan_close_recurrences`]), refine each one with damped Newton on
//! `G(p) = R^k(p) − p` in the chart ([`newton_shoot`]), and classify the
//! result by its Floquet multipliers ([`monodromy`]). [`census`] runs the
//! whole pipeline and deduplicates.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::integrator::{tangent_segment, IntegrationError, IntegrationOptions};
use crate::linalg::{eigenvalues, identity, mat_mul, mgs_qr};
use crate::math::{ceil, exp, ln, norm, round, sqrt};
use crate::poincare::{return_map_iterates, IterateError, ReturnOptions, SectionPlane, SectionPoint};
use crate::polyfield::PolyField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    NeutralDegenerate,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::NeutralDegenerate => "neutral-degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceSeed {
    pub point: SectionPoint,
    pub k: usize,
    pub distance: f64,
    /// Iterate index of `point` in the scan (0 is the start point).
    pub index: usize,
}

/// Floquet data of a closed orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    pub matrix: DMatrix<f64>,
    /// Sorted by modulus, largest first.
    pub multipliers: Vec<Complex64>,
    /// `ln |det M|` accumulated from the QR factors along the orbit.
    pub log_abs_det: f64,
    pub det_sign: f64,
    /// `∫ trace J dt` over the period by quadrature along the orbit.
    pub trace_integral: f64,
}

impl Monodromy {
    pub fn determinant(&self) -> f64 {
        self.det_sign * exp(self.log_abs_det)
    }

    /// `exp(∫ trace J dt)`, the determinant predicted by Liouville's formula.
    pub fn liouville_determinant(&self) -> f64 {
        exp(self.trace_integral)
    }

    /// Relative mismatch between [`determinant`](Self::determinant) and
    /// [`liouville_determinant`](Self::liouville_determinant).
    pub fn liouville_error(&self) -> f64 {
        (self.det_sign * exp(self.log_abs_det - self.trace_integral) - 1.0).abs()
    }

    /// Multiplier closest to 1, attributed to the flow direction.
    pub fn flow_multiplier(&self) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        *self
            .multipliers
            .iter()
            .min_by(|a, b| (*a - one).norm().total_cmp(&(*b - one).norm()))
            .expect("non-empty spectrum")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub section_fixed_point: SectionPoint,
    /// The `k` section points of one period, the last one back at the start.
    pub orbit_points: Vec<SectionPoint>,
    pub k: usize,
    pub period: f64,
    pub floquet_multipliers: Vec<Complex64>,
    pub stability: Stability,
    /// `|R^k(p) − p|` at acceptance.
    pub residual: f64,
    pub monodromy: Monodromy,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShootError {
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("shooting Jacobian is singular (residual {residual:e})")]
    Singular { residual: f64 },
    #[error("converged onto an equilibrium, not a cycle")]
    Equilibrium,
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Section(#[from] IterateError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootJacobian {
    /// Central differences of the return map in chart coordinates.
    FiniteDifference,
    /// Linearised return map from the variational flow.
    TangentFlow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub returns: ReturnOptions,
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
    pub jacobian: ShootJacobian,
    pub trust_radius: f64,
    pub max_halvings: usize,
    pub singular_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            returns: ReturnOptions { integration: IntegrationOptions::rk45(1e-12), ..ReturnOptions::default() },
            max_iter: 50,
            tol: 1e-10,
            fd_step: 1e-7,
            jacobian: ShootJacobian::FiniteDifference,
            trust_radius: 0.5,
            max_halvings: 8,
            singular_tol: 1e-12,
        }
    }
}

/// Residual accepted for a degenerate family member whose shooting
/// Jacobian is singular.
pub const DEGENERATE_RESIDUAL: f64 = 1e-8;
/// Chart distance under which two orbit points are the same.
pub const DEDUP_TOL: f64 = 1e-5;
/// Speed below which a converged point is treated as an equilibrium.
pub const EQUILIBRIUM_SPEED: f64 = 1e-6;

fn chart_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]))
}

/// Iterates the return map `n_iterates` times from `start` and records
/// `(point i, k)` whenever the chart distance to iterate `i + k` is below
/// `threshold`, keeping the closest pair per cell of side `10 · threshold`.
pub fn scan_close_recurrences(
    field: &PolyField,
    plane: &SectionPlane,
    start: &SectionPoint,
    n_iterates: usize,
    k_max: usize,
    threshold: f64,
    opts: &ReturnOptions,
) -> Result<Vec<RecurrenceSeed>, IterateError> {
    if n_iterates == 0 || k_max == 0 || !(threshold > 0.0) {
        return Ok(Vec::new());
    }
    let mut pts = Vec::with_capacity(n_iterates + 1);
    pts.push(*start);
    pts.extend(return_map_iterates(field, plane, start, n_iterates, opts)?);
    Ok(recurrences(&pts, k_max, threshold))
}

fn recurrences(pts: &[SectionPoint], k_max: usize, threshold: f64) -> Vec<RecurrenceSeed> {
    let cell = 10.0 * threshold;
    let mut best: BTreeMap<(usize, i64, i64), RecurrenceSeed> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        for k in 1..=k_max {
            let Some(q) = pts.get(i + k) else { break };
            let distance = chart_dist(p.coords, q.coords);
            if distance >= threshold {
                continue;
            }
            let key = (k, round(p.coords[0] / cell) as i64, round(p.coords[1] / cell) as i64);
            let seed = RecurrenceSeed { point: *p, k, distance, index: i };
            best.entry(key)
                .and_modify(|s| {
                    if distance < s.distance {
                        *s = seed;
                    }
                })
                .or_insert(seed);
        }
    }
    let mut out: Vec<RecurrenceSeed> = best.into_values().collect();
    out.sort_by(|a, b| a.k.cmp(&b.k).then(a.distance.total_cmp(&b.distance)).then(a.index.cmp(&b.index)));
    out
}

struct Shot {
    points: Vec<SectionPoint>,
    g: [f64; 2],
}

fn shoot_once(
    field: &PolyField,
    plane: &SectionPlane,
    p: [f64; 2],
    k: usize,
    opts: &ReturnOptions,
) -> Result<Shot, IterateError> {
    let points = return_map_iterates(field, plane, &plane.point_at(p, 0.0), k, opts)?;
    let end = points[k - 1].coords;
    Ok(Shot { g: [end[0] - p[0], end[1] - p[1]], points })
}

fn fd_jacobian(
    field: &PolyField,
    plane: &SectionPlane,
    p: [f64; 2],
    k: usize,
    opts: &ShootOptions,
) -> Result<[[f64; 2]; 2], IterateError> {
    let h = opts.fd_step;
    let mut jac = [[0.0; 2]; 2];
    for d in 0..2 {
        let mut hi = p;
        let mut lo = p;
        hi[d] += h;
        lo[d] -= h;
        let gp = shoot_once(field, plane, hi, k, &opts.returns)?.g;
        let gm = shoot_once(field, plane, lo, k, &opts.returns)?.g;
        for r in 0..2 {
            jac[r][d] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `D(R^k) − I` in chart coordinates from the variational flow: each leg
/// contributes `(I − f nᵀ / ⟨n, f⟩) Φ`.
fn tangent_jacobian(
    field: &PolyField,
    plane: &SectionPlane,
    p: [f64; 2],
    shot: &Shot,
    opts: &ShootOptions,
) -> Result<[[f64; 2]; 2], ShootError> {
    let n = plane.normal();
    let mut total = identity(3);
    let mut x = plane.lift(p);
    let mut t = 0.0;
    for leg in &shot.points {
        let mut y0 = x.to_vec();
        y0.extend_from_slice(&identity(3));
        let (y, _) = tangent_segment(field, &y0, t, leg.time, &opts.returns.integration)?;
        let phi = &y[3..];
        let f = field.evaluate(&leg.state).expect("3-vector");
        let fn_dot = f[0] * n[0] + f[1] * n[1] + f[2] * n[2];
        let mut proj = identity(3);
        for r in 0..3 {
            for c in 0..3 {
                proj[r * 3 + c] -= f[r] * n[c] / fn_dot;
            }
        }
        total = mat_mul(&mat_mul(&proj, phi, 3), &total, 3);
        x = leg.state;
        t = leg.time;
    }
    let b = plane.basis();
    let mut jac = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += b[r][i] * total[i * 3 + j] * b[c][j];
                }
            }
            jac[r][c] = acc - if r == c { 1.0 } else { 0.0 };
        }
    }
    Ok(jac)
}

/// Damped Newton on `R^k(p) − p` from a recurrence seed.
pub fn newton_shoot(
    field: &PolyField,
    plane: &SectionPlane,
    seed: &RecurrenceSeed,
    opts: &ShootOptions,
) -> Result<PeriodicOrbit, ShootError> {
    let k = seed.k;
    if k == 0 {
        return Err(ShootError::ZeroK);
    }
    let mut p = seed.point.coords;
    let mut shot = shoot_once(field, plane, p, k, &opts.returns)?;
    let mut residual = norm(&shot.g);
    let mut degenerate = false;
    let mut iterations = 0;
    while residual >= opts.tol {
        if iterations == opts.max_iter {
            return Err(ShootError::NoConvergence { iterations, residual });
        }
        iterations += 1;
        let j = match opts.jacobian {
            ShootJacobian::FiniteDifference => fd_jacobian(field, plane, p, k, opts)?,
            ShootJacobian::TangentFlow => tangent_jacobian(field, plane, p, &shot, opts)?,
        };
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() >= opts.singular_tol) {
            if residual < DEGENERATE_RESIDUAL {
                degenerate = true;
                break;
            }
            return Err(ShootError::Singular { residual });
        }
        let g = shot.g;
        let delta = [-(j[1][1] * g[0] - j[0][1] * g[1]) / det, -(-j[1][0] * g[0] + j[0][0] * g[1]) / det];
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let step = [lambda * delta[0], lambda * delta[1]];
            if norm(&step) <= opts.trust_radius {
                let cand = [p[0] + step[0], p[1] + step[1]];
                if let Ok(s) = shoot_once(field, plane, cand, k, &opts.returns) {
                    let r = norm(&s.g);
                    if r < residual || r < opts.tol {
                        accepted = Some((cand, s, r));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((cand, s, r)) = accepted else {
            return Err(ShootError::NoConvergence { iterations, residual });
        };
        p = cand;
        shot = s;
        residual = r;
    }
    finish_orbit(field, plane, p, k, shot, residual, degenerate, opts)
}

#[allow(clippy::too_many_arguments)]
fn finish_orbit(
    field: &PolyField,
    plane: &SectionPlane,
    p: [f64; 2],
    mut k: usize,
    shot: Shot,
    mut residual: f64,
    degenerate: bool,
    opts: &ShootOptions,
) -> Result<PeriodicOrbit, ShootError> {
    let mut points = shot.points;
    // reduce to the prime period when the orbit closes after fewer returns
    for d in 1..k {
        if k % d == 0 && chart_dist(points[d - 1].coords, p) < DEDUP_TOL {
            residual = chart_dist(points[d - 1].coords, p);
            points.truncate(d);
            k = d;
            break;
        }
    }
    let fixed = plane.point_at(p, 0.0);
    let speed = norm(&field.evaluate(&fixed.state).expect("3-vector"));
    if speed < EQUILIBRIUM_SPEED {
        return Err(ShootError::Equilibrium);
    }
    let period = points[k - 1].time;
    let mono = monodromy(field, &fixed.state, period, &opts.returns.integration)?;
    let stability = if degenerate { Stability::NeutralDegenerate } else { classify(&mono.multipliers) };
    Ok(PeriodicOrbit {
        section_fixed_point: fixed,
        orbit_points: points,
        k,
        period,
        floquet_multipliers: mono.multipliers.clone(),
        stability,
        residual,
        monodromy: mono,
    })
}

/// Exactly one multiplier must sit within 1e-3 of 1 (the flow direction);
/// the orbit is unstable when any other has modulus above `1 + 1e-6`.
pub fn classify(multipliers: &[Complex64]) -> Stability {
    let one = Complex64::new(1.0, 0.0);
    let near_one = multipliers.iter().filter(|m| (**m - one).norm() < 1e-3).count();
    if near_one != 1 {
        return Stability::NeutralDegenerate;
    }
    let flow = multipliers
        .iter()
        .enumerate()
        .min_by(|a, b| (*a.1 - one).norm().total_cmp(&(*b.1 - one).norm()))
        .map(|(i, _)| i)
        .expect("non-empty");
    let others = multipliers.iter().enumerate().filter(|(i, _)| *i != flow).map(|(_, m)| m.norm());
    let mut all_inside = true;
    for m in others {
        if m > 1.0 + 1e-6 {
            return Stability::Unstable;
        }
        all_inside &= m < 1.0 - 1e-6;
    }
    if all_inside {
        Stability::Stable
    } else {
        Stability::NeutralDegenerate
    }
}

/// Length of the tangent-integration segments between re-orthonormalisations.
const MONODROMY_SEGMENT: f64 = 0.25;

/// Fundamental matrix of the variational equation over one period from
/// `start`, with its eigenvalues.
///
/// The tangent basis is re-orthonormalised every [`MONODROMY_SEGMENT`] time
/// units and the triangular factors are accumulated, which keeps the
/// strongly contracted directions (and the determinant) resolved. The
/// smallest multiplier, when real and isolated, is taken from the
/// accumulated determinant rather than from the assembled matrix, where it
/// drowns in rounding.
pub fn monodromy(
    field: &PolyField,
    start: &[f64],
    period: f64,
    opts: &IntegrationOptions,
) -> Result<Monodromy, IntegrationError> {
    let n = field.dimension();
    if start.len() != n {
        return Err(IntegrationError::DimensionMismatch { expected: n, found: start.len() });
    }
    let segments = ceil(period / MONODROMY_SEGMENT).max(1.0) as usize;
    let dt = period / segments as f64;
    let mut y = start.to_vec();
    y.extend_from_slice(&identity(n));
    let mut r_acc = identity(n);
    let mut log_abs_det = 0.0;
    let mut trace_integral = 0.0;
    for s in 0..segments {
        let t0 = s as f64 * dt;
        let t1 = if s + 1 == segments { period } else { (s + 1) as f64 * dt };
        let (y_new, tr) = tangent_segment(field, &y, t0, t1, opts)?;
        trace_integral += tr;
        y = y_new;
        let r = mgs_qr(&mut y[n..], n, 1e-300).ok_or(IntegrationError::NonFinite { t: t1 })?;
        for i in 0..n {
            log_abs_det += ln(r[i * n + i]);
        }
        r_acc = mat_mul(&r, &r_acc, n);
    }
    let q = DMatrix::from_row_slice(n, n, &y[n..]);
    let det_sign = if q.determinant() < 0.0 { -1.0 } else { 1.0 };
    let r = DMatrix::from_row_slice(n, n, &r_acc);
    let matrix = &q * &r;
    let mut multipliers = eigenvalues(&matrix);

    let last = multipliers.len() - 1;
    if last >= 1 && multipliers[last].im == 0.0 && multipliers[last].norm() < 0.5 * multipliers[last - 1].norm() {
        let others: Complex64 = multipliers[..last].iter().product();
        if others.norm() > 0.0 {
            let det = det_sign * exp(log_abs_det);
            multipliers[last] = Complex64::new((Complex64::new(det, 0.0) / others).re, 0.0);
        }
    }
    Ok(Monodromy { matrix, multipliers, log_abs_det, det_sign, trace_integral })
}

/// Converged orbits plus the seeds that failed to converge.
#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub orbits: Vec<PeriodicOrbit>,
    pub seeds: Vec<RecurrenceSeed>,
    pub failures: Vec<(RecurrenceSeed, ShootError)>,
}

fn same_orbit(a: &PeriodicOrbit, b: &PeriodicOrbit) -> bool {
    a.k == b.k && a.orbit_points.iter().any(|p| chart_dist(p.coords, b.section_fixed_point.coords) < DEDUP_TOL)
}

/// Scan, shoot every seed, deduplicate (cyclic shifts of the same k-orbit
/// are one orbit) and sort by period.
#[allow(clippy::too_many_arguments)]
pub fn census(
    field: &PolyField,
    plane: &SectionPlane,
    start: &SectionPoint,
    n_iterates: usize,
    k_max: usize,
    threshold: f64,
    opts: &ShootOptions,
) -> Result<Census, IterateError> {
    let seeds = scan_close_recurrences(field, plane, start, n_iterates, k_max, threshold, &opts.returns)?;
    let mut found: Vec<PeriodicOrbit> = Vec::new();
    let mut failures = Vec::new();
    for seed in &seeds {
        match newton_shoot(field, plane, seed, opts) {
            Ok(orbit) => found.push(orbit),
            Err(e) => failures.push((*seed, e)),
        }
    }
    found.sort_by(|a, b| {
        a.period
            .total_cmp(&b.period)
            .then(a.k.cmp(&b.k))
            .then(a.section_fixed_point.coords[0].total_cmp(&b.section_fixed_point.coords[0]))
    });
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    for o in found {
        if !orbits.iter().any(|kept| same_orbit(kept, &o)) {
            orbits.push(o);
        }
    }
    Ok(Census { orbits, seeds, failures })
}

/// Dense samples of one period of `orbit` for plotting: `(t, state)` pairs.
pub fn orbit_samples(
    field: &PolyField,
    orbit: &PeriodicOrbit,
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, [f64; 3])>, IntegrationError> {
    let tr = crate::integrator::integrate(field, &orbit.section_fixed_point.state, 0.0, orbit.period, opts)?;
    Ok(tr.samples().iter().map(|s| (s.t, [s.state[0], s.state[1], s.state[2]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::Direction;
    use crate::polyfield::parse_system;
    use core::f64::consts::TAU;

    const STUART_LANDAU: &str = "dx/dt = x - y - x*(x^2 + y^2)\ndy/dt = x + y - y*(x^2 + y^2)\ndz/dt = -z";
    const CIRCLE: &str = "dx/dt = x - y - x*(x^2 + y^2)\ndy/dt = x + y - y*(x^2 + y^2)\ndz/dt = x^2 + y^2 - 1";

    fn y_plane() -> SectionPlane {
        SectionPlane::new([0.0; 3], [0.0, 1.0, 0.0], Direction::Positive).unwrap()
    }

    fn seed_at(plane: &SectionPlane, state: [f64; 3], k: usize) -> RecurrenceSeed {
        RecurrenceSeed { point: plane.section_point(state, 0.0).unwrap(), k, distance: 0.0, index: 0 }
    }

    #[test]
    fn stuart_landau_cycle() {
        let f = parse_system(STUART_LANDAU).unwrap();
        let plane = y_plane();
        let orbit = newton_shoot(&f, &plane, &seed_at(&plane, [1.2, 0.0, 0.0], 1), &Default::default()).unwrap();
        let x = orbit.section_fixed_point.state;
        assert!((x[0] - 1.0).abs() < 1e-8 && x[2].abs() < 1e-8, "{x:?}");
        assert!((orbit.period - TAU).abs() < 1e-6);
        assert_eq!(orbit.stability, Stability::Stable);
        assert!(orbit.residual < 1e-10);
        let m = &orbit.floquet_multipliers;
        let expect = [1.0, (-TAU).exp(), (-2.0 * TAU).exp()];
        for (mu, e) in m.iter().zip(expect) {
            assert!(mu.im.abs() < 1e-9);
            assert!(((mu.re - e) / e).abs() < 1e-4, "{mu} vs {e}");
        }
    }

    #[test]
    fn tangent_jacobian_agrees_with_fd() {
        let f = parse_system(STUART_LANDAU).unwrap();
        let plane = y_plane();
        let opts = ShootOptions::default();
        let p = [1.3, -0.4];
        let shot = shoot_once(&f, &plane, p, 1, &opts.returns).unwrap();
        let fd = fd_jacobian(&f, &plane, p, 1, &opts).unwrap();
        let tf = tangent_jacobian(&f, &plane, p, &shot, &opts).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((fd[r][c] - tf[r][c]).abs() < 1e-6, "{fd:?} {tf:?}");
            }
        }
        let tangent = ShootOptions { jacobian: ShootJacobian::TangentFlow, ..opts };
        let orbit = newton_shoot(&f, &plane, &seed_at(&plane, [1.2, 0.0, 0.3], 1), &tangent).unwrap();
        assert!((orbit.period - TAU).abs() < 1e-6);
    }

    #[test]
    fn circle_family_is_neutral_degenerate() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let orbit = newton_shoot(&f, &plane, &seed_at(&plane, [1.0, 0.0, 0.0], 1), &Default::default()).unwrap();
        assert_eq!(orbit.stability, Stability::NeutralDegenerate);
        assert!((orbit.period - TAU).abs() < 1e-6);
    }

    #[test]
    fn classification_rules() {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        assert_eq!(classify(&c(&[4.0, 1.0, 1e-9])), Stability::Unstable);
        assert_eq!(classify(&c(&[1.0, 0.5, 0.1])), Stability::Stable);
        assert_eq!(classify(&c(&[1.0, 1.0, 0.1])), Stability::NeutralDegenerate);
        assert_eq!(classify(&c(&[1.5, 0.9, 0.1])), Stability::NeutralDegenerate);
    }

    #[test]
    fn recurrence_cells_keep_closest_pair() {
        let plane = SectionPlane::new([0.0; 3], [0.0, 0.0, 1.0], Direction::Both).unwrap();
        let pts: Vec<SectionPoint> =
            [[0.0, 0.0], [0.01, 0.0], [0.003, 0.001], [5.0, 5.0]].iter().map(|&uv| plane.point_at(uv, 0.0)).collect();
        let seeds = recurrences(&pts, 2, 0.05);
        assert_eq!(seeds.len(), 2);
        assert_eq!((seeds[0].k, seeds[0].index), (1, 1));
        assert_eq!((seeds[1].k, seeds[1].index), (2, 0));
        assert!(recurrences(&pts, 2, 0.0).is_empty());
    }

    #[test]
    fn zero_iterates_give_empty_census() {
        let f = parse_system(STUART_LANDAU).unwrap();
        let plane = y_plane();
        let start = plane.section_point([1.0, 0.0, 0.0], 0.0).unwrap();
        let c = census(&f, &plane, &start, 0, 4, 0.05, &Default::default()).unwrap();
        assert!(c.orbits.is_empty() && c.seeds.is_empty());
    }

    #[test]
    fn linear_monodromy_matches_exponential() {
        // diagonal linear field: monodromy over T is diag(e^{aT})
        let f = parse_system("dx/dt = 0.5*x\ndy/dt = -y\ndz/dt = -20*z").unwrap();
        let m = monodromy(&f, &[1.0, 1.0, 1.0], 2.0, &IntegrationOptions::rk45(1e-12)).unwrap();
        let e = [1.0f64.exp(), (-2.0f64).exp(), (-40.0f64).exp()];
        for (mu, e) in m.multipliers.iter().zip(e) {
            assert!(((mu.re - e) / e).abs() < 1e-8, "{mu} {e}");
        }
        assert!((m.trace_integral + 41.0).abs() < 1e-12);
        assert!(m.liouville_error() < 1e-9);
    }
}
