//! Oriented planar sections and first-return maps of 3D flows.

use alloc::vec::Vec;

use crate::integrator::{hermite_into, FieldFlow, IntegrationError, IntegrationOptions, Stepper};
use crate::math::sqrt;
use crate::polyfield::PolyField;

/// Which sign of `d/dt ⟨x − p, n⟩` a counted crossing must have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
    Both,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
            Direction::Both => "both",
        }
    }

    fn admits(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Positive => before < 0.0 && after >= 0.0,
            Direction::Negative => before > 0.0 && after <= 0.0,
            Direction::Both => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }

    fn admits_slope(self, slope: f64) -> bool {
        match self {
            Direction::Positive => slope > 0.0,
            Direction::Negative => slope < 0.0,
            Direction::Both => slope != 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SectionError {
    #[error("sections need a 3-dimensional field, got dimension {0}")]
    NotThreeDimensional(usize),
    #[error("plane normal must be finite and non-zero")]
    BadNormal,
    #[error("start point is {distance:e} away from the plane")]
    NotOnPlane { distance: f64 },
    #[error("no return to the section within time {max_time}")]
    NoReturn { max_time: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("return map failed at iterate {index}: {source}")]
pub struct IterateError {
    pub index: usize,
    #[source]
    pub source: SectionError,
}

/// Distance from the plane below which a point counts as on it.
pub const ON_PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPlane {
    point: [f64; 3],
    normal: [f64; 3],
    direction: Direction,
    // orthonormal in-plane chart basis
    basis: [[f64; 3]; 2],
}

fn dot3(a: &[f64], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SectionPlane {
    /// The normal is normalised here. The chart basis is Gram–Schmidt of
    /// the coordinate axis least aligned with the normal (lowest index on
    /// ties), completed by `normal × u`.
    pub fn new(point: [f64; 3], normal: [f64; 3], direction: Direction) -> Result<Self, SectionError> {
        let len = sqrt(normal.iter().map(|v| v * v).sum());
        if !(len.is_finite() && len > 0.0) || point.iter().any(|v| !v.is_finite()) {
            return Err(SectionError::BadNormal);
        }
        let n = [normal[0] / len, normal[1] / len, normal[2] / len];
        let mut axis = 0;
        for k in 1..3 {
            if n[k].abs() < n[axis].abs() {
                axis = k;
            }
        }
        let mut u = [0.0; 3];
        u[axis] = 1.0;
        let proj = n[axis];
        for k in 0..3 {
            u[k] -= proj * n[k];
        }
        let ul = sqrt(u.iter().map(|v| v * v).sum());
        for v in &mut u {
            *v /= ul;
        }
        let v = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
        Ok(Self { point, normal: n, direction, basis: [u, v] })
    }

    pub fn point(&self) -> [f64; 3] {
        self.point
    }

    pub fn normal(&self) -> [f64; 3] {
        self.normal
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn basis(&self) -> [[f64; 3]; 2] {
        self.basis
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let d = [x[0] - self.point[0], x[1] - self.point[1], x[2] - self.point[2]];
        dot3(&d, &self.normal)
    }

    /// In-plane chart coordinates of (the projection of) `x`.
    pub fn chart(&self, x: &[f64]) -> [f64; 2] {
        let d = [x[0] - self.point[0], x[1] - self.point[1], x[2] - self.point[2]];
        [dot3(&d, &self.basis[0]), dot3(&d, &self.basis[1])]
    }

    /// The 3D point with chart coordinates `uv`.
    pub fn lift(&self, uv: [f64; 2]) -> [f64; 3] {
        let [a, b] = self.basis;
        core::array::from_fn(|k| self.point[k] + uv[0] * a[k] + uv[1] * b[k])
    }

    /// Wraps an on-plane state as a [`SectionPoint`].
    pub fn section_point(&self, state: [f64; 3], time: f64) -> Result<SectionPoint, SectionError> {
        let distance = self.signed_distance(&state).abs();
        if !(distance < ON_PLANE_TOL) {
            return Err(SectionError::NotOnPlane { distance });
        }
        Ok(SectionPoint { coords: self.chart(&state), state, time })
    }

    /// Section point at chart coordinates `uv`.
    pub fn point_at(&self, uv: [f64; 2], time: f64) -> SectionPoint {
        SectionPoint { coords: uv, state: self.lift(uv), time }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub coords: [f64; 2],
    pub state: [f64; 3],
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnOptions {
    pub integration: IntegrationOptions,
    /// Give up when no admissible crossing happens within this time.
    pub max_time: f64,
    /// Crossings earlier than this after departure are ignored.
    pub refractory: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self { integration: IntegrationOptions::default(), max_time: 100.0, refractory: 1e-6 }
    }
}

/// Next admissible crossing of `plane` after `t0 + ignore`, starting from an
/// arbitrary state. Returns the refined state and its absolute time.
fn next_crossing(
    field: &PolyField,
    plane: &SectionPlane,
    x0: &[f64],
    t0: f64,
    ignore: f64,
    opts: &ReturnOptions,
) -> Result<([f64; 3], f64), SectionError> {
    if field.dimension() != 3 {
        return Err(SectionError::NotThreeDimensional(field.dimension()));
    }
    let mut st = Stepper::new(FieldFlow(field), x0, t0, t0 + opts.max_time, &opts.integration)?;
    let t_ignore = t0 + ignore;
    let mut buf = [0.0; 3];
    while !st.done() {
        st.advance()?;
        if st.t <= t_ignore {
            continue;
        }
        let sb = plane.signed_distance(&st.y);
        let (ta, sa) = if st.t_prev >= t_ignore {
            (st.t_prev, plane.signed_distance(&st.y_prev))
        } else {
            hermite_into(st.t_prev, &st.y_prev, &st.f_prev, st.t, &st.y, &st.f, t_ignore, &mut buf);
            (t_ignore, plane.signed_distance(&buf))
        };
        if !plane.direction.admits(sa, sb) {
            continue;
        }
        if let Some(hit) = refine(field, plane, &mut st, ta, sa) {
            return Ok(hit);
        }
    }
    Err(SectionError::NoReturn { max_time: opts.max_time })
}

/// Bisection on the Hermite interpolant down to a 1e-12 bracket, then
/// Newton polish with exact re-steps from the start of the step.
fn refine(
    field: &PolyField,
    plane: &SectionPlane,
    st: &mut Stepper<FieldFlow<'_>>,
    mut ta: f64,
    mut sa: f64,
) -> Option<([f64; 3], f64)> {
    let mut tb = st.t;
    let mut buf = [0.0; 3];
    for _ in 0..200 {
        if (tb - ta).abs() <= 1e-12 {
            break;
        }
        let tm = 0.5 * (ta + tb);
        hermite_into(st.t_prev, &st.y_prev, &st.f_prev, st.t, &st.y, &st.f, tm, &mut buf);
        let sm = plane.signed_distance(&buf);
        if (sm < 0.0) == (sa < 0.0) && sm != 0.0 {
            ta = tm;
            sa = sm;
        } else {
            tb = tm;
        }
    }
    let t_prev = st.t_prev;
    let mut tc = 0.5 * (ta + tb);
    let mut y = st.restep_from_prev(tc - t_prev);
    let mut s = plane.signed_distance(&y);
    let mut fx = [0.0; 3];
    for _ in 0..8 {
        field.eval_into(&y, &mut fx);
        let slope = dot3(&fx, &plane.normal);
        if slope == 0.0 {
            break;
        }
        tc -= s / slope;
        y = st.restep_from_prev(tc - t_prev);
        s = plane.signed_distance(&y);
        if s.abs() < 1e-12 {
            break;
        }
    }
    field.eval_into(&y, &mut fx);
    if !plane.direction.admits_slope(dot3(&fx, &plane.normal)) || !(s.abs() < 1e-10) {
        return None;
    }
    Some(([y[0], y[1], y[2]], tc))
}

/// First admissible return of the flow from `start` to `plane`.
///
/// Returns the refined section point (with absolute time) and the elapsed
/// return time.
pub fn first_return(
    field: &PolyField,
    plane: &SectionPlane,
    start: &SectionPoint,
    opts: &ReturnOptions,
) -> Result<(SectionPoint, f64), SectionError> {
    let distance = plane.signed_distance(&start.state).abs();
    if !(distance < ON_PLANE_TOL) {
        return Err(SectionError::NotOnPlane { distance });
    }
    let (state, t) = next_crossing(field, plane, &start.state, start.time, opts.refractory, opts)?;
    Ok((SectionPoint { coords: plane.chart(&state), state, time: t }, t - start.time))
}

/// `k` successive first returns from `start`.
pub fn return_map_iterates(
    field: &PolyField,
    plane: &SectionPlane,
    start: &SectionPoint,
    k: usize,
    opts: &ReturnOptions,
) -> Result<Vec<SectionPoint>, IterateError> {
    let mut out = Vec::with_capacity(k);
    let mut cur = *start;
    for index in 0..k {
        let (next, _) = first_return(field, plane, &cur, opts).map_err(|source| IterateError { index, source })?;
        out.push(next);
        cur = next;
    }
    Ok(out)
}

/// Flows `x0` for `transient` time units and then to the first admissible
/// crossing, giving a section point on the attractor.
pub fn settle_onto_section(
    field: &PolyField,
    plane: &SectionPlane,
    x0: &[f64],
    transient: f64,
    opts: &ReturnOptions,
) -> Result<SectionPoint, SectionError> {
    if field.dimension() != 3 {
        return Err(SectionError::NotThreeDimensional(field.dimension()));
    }
    let x = if transient > 0.0 {
        crate::integrator::integrate_endpoint(field, x0, 0.0, transient, &opts.integration)?
    } else {
        x0.to_vec()
    };
    let (state, t) = next_crossing(field, plane, &x, transient.max(0.0), 0.0, opts)?;
    Ok(SectionPoint { coords: plane.chart(&state), state, time: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_system;
    use core::f64::consts::TAU;

    const CIRCLE: &str = "dx/dt = x - y - x*(x^2 + y^2)\ndy/dt = x + y - y*(x^2 + y^2)\ndz/dt = x^2 + y^2 - 1";

    fn y_plane() -> SectionPlane {
        SectionPlane::new([0.0; 3], [0.0, 1.0, 0.0], Direction::Positive).unwrap()
    }

    #[test]
    fn chart_basis_is_orthonormal_and_deterministic() {
        let p = SectionPlane::new([1.0, 2.0, 3.0], [0.3, -2.0, 0.7], Direction::Both).unwrap();
        let n = p.normal();
        let [u, v] = p.basis();
        let d = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert!((d(&n, &n) - 1.0).abs() < 1e-12);
        assert!((d(&u, &u) - 1.0).abs() < 1e-12 && (d(&v, &v) - 1.0).abs() < 1e-12);
        assert!(d(&u, &v).abs() < 1e-12 && d(&u, &n).abs() < 1e-12 && d(&v, &n).abs() < 1e-12);
        let x = p.lift([0.25, -4.0]);
        assert!(p.signed_distance(&x).abs() < 1e-12);
        let uv = p.chart(&x);
        assert!((uv[0] - 0.25).abs() < 1e-12 && (uv[1] + 4.0).abs() < 1e-12);

        let z = SectionPlane::new([0.0, 0.0, 27.0], [0.0, 0.0, 2.0], Direction::Both).unwrap();
        assert_eq!(z.basis(), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(z.chart(&[3.0, -4.0, 27.0]), [3.0, -4.0]);
        assert!(SectionPlane::new([0.0; 3], [0.0; 3], Direction::Both).is_err());
    }

    #[test]
    fn unit_circle_returns_after_two_pi() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let start = plane.section_point([1.0, 0.0, 0.0], 0.0).unwrap();
        let (p, t) = first_return(&f, &plane, &start, &ReturnOptions::default()).unwrap();
        assert!((t - TAU).abs() < 1e-7, "{t}");
        for k in 0..3 {
            assert!((p.state[k] - start.state[k]).abs() < 1e-7);
        }
        assert!(plane.signed_distance(&p.state).abs() < ON_PLANE_TOL);
    }

    #[test]
    fn outer_start_contracts_radially() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let start = plane.section_point([2.0, 0.0, 0.0], 0.0).unwrap();
        let (p, _) = first_return(&f, &plane, &start, &ReturnOptions::default()).unwrap();
        assert!(p.state[0] > 1.0 && p.state[0] < 2.0);
    }

    #[test]
    fn non_returning_flow_times_out() {
        let f = parse_system("dx/dt = 1\ndy/dt = 0\ndz/dt = 0").unwrap();
        let plane = SectionPlane::new([0.0; 3], [1.0, 0.0, 0.0], Direction::Positive).unwrap();
        let start = plane.section_point([0.0; 3], 0.0).unwrap();
        let opts = ReturnOptions { max_time: 10.0, ..Default::default() };
        assert_eq!(first_return(&f, &plane, &start, &opts).unwrap_err(), SectionError::NoReturn { max_time: 10.0 });
    }

    #[test]
    fn start_must_be_on_plane_and_field_three_dimensional() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let off = SectionPoint { coords: [1.0, 0.0], state: [1.0, 1e-6, 0.0], time: 0.0 };
        assert!(matches!(first_return(&f, &plane, &off, &Default::default()), Err(SectionError::NotOnPlane { .. })));
        let g = parse_system("dx/dt = y\ndy/dt = -x").unwrap();
        let on = plane.section_point([1.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(
            first_return(&g, &plane, &on, &Default::default()).unwrap_err(),
            SectionError::NotThreeDimensional(2)
        );
    }

    #[test]
    fn iterates_of_fixed_point() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let start = plane.section_point([1.0, 0.0, 0.0], 0.0).unwrap();
        let its = return_map_iterates(&f, &plane, &start, 5, &Default::default()).unwrap();
        assert_eq!(its.len(), 5);
        for (i, p) in its.iter().enumerate() {
            assert!((p.state[0] - 1.0).abs() < 1e-7 && p.state[2].abs() < 1e-7);
            assert!((p.time - TAU * (i + 1) as f64).abs() < 1e-6);
        }
        assert!(return_map_iterates(&f, &plane, &start, 0, &Default::default()).unwrap().is_empty());
    }

    #[test]
    fn iterate_errors_carry_index() {
        let f = parse_system("dx/dt = 1\ndy/dt = 0\ndz/dt = 0").unwrap();
        let plane = SectionPlane::new([0.0; 3], [1.0, 0.0, 0.0], Direction::Positive).unwrap();
        let start = plane.section_point([0.0; 3], 0.0).unwrap();
        let opts = ReturnOptions { max_time: 1.0, ..Default::default() };
        let e = return_map_iterates(&f, &plane, &start, 3, &opts).unwrap_err();
        assert_eq!(e.index, 0);
    }

    #[test]
    fn composition_on_circle_system() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = y_plane();
        let start = plane.section_point([1.7, 0.0, 0.3], 0.0).unwrap();
        let opts = ReturnOptions::default();
        let all = return_map_iterates(&f, &plane, &start, 5, &opts).unwrap();
        let first = return_map_iterates(&f, &plane, &start, 2, &opts).unwrap();
        let rest = return_map_iterates(&f, &plane, &first[1], 3, &opts).unwrap();
        for (a, b) in all[2..].iter().zip(&rest) {
            assert!((a.coords[0] - b.coords[0]).abs() < 1e-6 && (a.coords[1] - b.coords[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_direction_counts_downward_crossings() {
        let f = parse_system(CIRCLE).unwrap();
        let plane = SectionPlane::new([0.0; 3], [0.0, 1.0, 0.0], Direction::Negative).unwrap();
        let start = plane.section_point([1.0, 0.0, 0.0], 0.0).unwrap();
        let (p, t) = first_return(&f, &plane, &start, &Default::default()).unwrap();
        assert!((t - TAU / 2.0).abs() < 1e-7);
        assert!((p.state[0] + 1.0).abs() < 1e-7);
    }
}
