//! Bidirectional integration of autonomous polynomial flows.
//!
//! Backward runs (`t1 < t0`) step the *same* field with negative time
//! increments. Every accepted step stores the state and its derivative, so a
//! [`Trajectory`] doubles as a piecewise cubic Hermite dense output.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::math::{norm, powu};
use crate::polyfield::PolyField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4Fixed,
    /// Dormand–Prince 5(4) with embedded error control.
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45. Always positive; the
    /// direction comes from the sign of `t1 - t0`.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on step attempts (accepted plus rejected).
    pub max_steps: usize,
    /// Largest allowed state norm before the run is declared escaped.
    pub blowup_cap: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            step: 1e-3,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 5_000_000,
            blowup_cap: 1e12,
        }
    }
}

impl IntegrationOptions {
    pub fn rk4(step: f64) -> Self {
        Self { method: Method::Rk4Fixed, step, ..Self::default() }
    }

    pub fn rk45(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step) {
            return Err(IntegrationError::InvalidOptions("step must be positive"));
        }
        if self.method == Method::Rk45Adaptive && !(positive(self.abs_tol) && positive(self.rel_tol)) {
            return Err(IntegrationError::InvalidOptions("tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(IntegrationError::InvalidOptions("max_steps must be positive"));
        }
        if !(self.blowup_cap > 0.0) {
            return Err(IntegrationError::InvalidOptions("blow-up cap must be positive"));
        }
        Ok(())
    }

    /// Scale of the per-step error the options admit, used when composing
    /// verification tolerances.
    pub fn nominal_tolerance(&self) -> f64 {
        match self.method {
            Method::Rk45Adaptive => self.abs_tol.max(self.rel_tol),
            Method::Rk4Fixed => powu(self.step, 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error("invalid integration options: {0}")]
    InvalidOptions(&'static str),
    #[error("initial state has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial data is not finite")]
    NonFiniteInitial,
    #[error("t1 equals t0")]
    EmptyInterval,
    #[error("state norm {norm:e} exceeded the blow-up cap at t = {t}")]
    BlowUp { t: f64, norm: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("maximum number of steps ({steps}) exceeded at t = {t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

/// One stored point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    /// `f(state)`, kept for Hermite interpolation.
    pub derivative: Vec<f64>,
}

/// Time-stamped states from `t0`, strictly monotone in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Builds a trajectory from samples; the first sample is the anchor.
    ///
    /// Panics when samples are empty or not strictly monotone.
    pub fn from_samples(samples: Vec<Sample>) -> Self {
        assert!(!samples.is_empty(), "trajectory needs at least one sample");
        if samples.len() > 1 {
            let up = samples[1].t > samples[0].t;
            assert!(
                samples.windows(2).all(|w| (w[1].t > w[0].t) == up && w[1].t != w[0].t),
                "sample times must be strictly monotone"
            );
        }
        Self { t0: samples[0].t, samples }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.samples[0].state.len()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("non-empty")
    }

    pub fn final_state(&self) -> &[f64] {
        &self.last().state
    }

    pub fn is_backward(&self) -> bool {
        self.samples.len() > 1 && self.samples[1].t < self.samples[0].t
    }

    /// Cubic Hermite interpolation between the two samples bracketing `t`.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let s = &self.samples;
        let (lo, hi) = if self.is_backward() { (s.last()?.t, s[0].t) } else { (s[0].t, s.last()?.t) };
        if !(t >= lo && t <= hi) {
            return None;
        }
        if s.len() == 1 {
            return Some(s[0].state.clone());
        }
        let back = self.is_backward();
        let idx = s.partition_point(|p| if back { p.t > t } else { p.t < t });
        let i = idx.clamp(1, s.len() - 1);
        Some(hermite(&s[i - 1], &s[i], t))
    }

    /// Hermite midpoint of the step between sample `i` and `i + 1`.
    pub fn midpoint(&self, i: usize) -> (f64, Vec<f64>) {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let t = 0.5 * (a.t + b.t);
        (t, hermite(a, b, t))
    }
}

pub(crate) fn hermite(a: &Sample, b: &Sample, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.state.len()];
    hermite_into(a.t, &a.state, &a.derivative, b.t, &b.state, &b.derivative, t, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn hermite_into(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

/// Right-hand side of an autonomous system, possibly augmented.
pub(crate) trait Flow {
    fn dim(&self) -> usize;
    /// Leading entries that count towards the blow-up norm.
    fn state_dim(&self) -> usize;
    fn rhs(&mut self, y: &[f64], dy: &mut [f64]);
}

pub(crate) struct FieldFlow<'a>(pub &'a PolyField);

impl Flow for FieldFlow<'_> {
    fn dim(&self) -> usize {
        self.0.dimension()
    }
    fn state_dim(&self) -> usize {
        self.0.dimension()
    }
    #[inline]
    fn rhs(&mut self, y: &[f64], dy: &mut [f64]) {
        self.0.eval_into(y, dy);
    }
}

/// State plus row-major tangent matrix: `x' = f(x)`, `V' = J(x) V`.
pub(crate) struct TangentFlow<'a> {
    field: &'a PolyField,
    jac: Vec<f64>,
}

impl<'a> TangentFlow<'a> {
    pub(crate) fn new(field: &'a PolyField) -> Self {
        let n = field.dimension();
        Self { field, jac: vec![0.0; n * n] }
    }
}

impl Flow for TangentFlow<'_> {
    fn dim(&self) -> usize {
        let n = self.field.dimension();
        n + n * n
    }
    fn state_dim(&self) -> usize {
        self.field.dimension()
    }
    fn rhs(&mut self, y: &[f64], dy: &mut [f64]) {
        let n = self.field.dimension();
        let (x, v) = y.split_at(n);
        let (dx, dv) = dy.split_at_mut(n);
        self.field.eval_into(x, dx);
        self.field.jacobian_into(x, &mut self.jac);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.jac[i * n + k] * v[k * n + j];
                }
                dv[i * n + j] = acc;
            }
        }
    }
}

// Dormand–Prince 5(4) tableau. The fields are autonomous, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Single-step engine shared by plain integration, tangent integration and
/// section crossing detection.
pub(crate) struct Stepper<F: Flow> {
    pub(crate) flow: F,
    method: Method,
    opts: IntegrationOptions,
    pub(crate) t: f64,
    pub(crate) y: Vec<f64>,
    pub(crate) f: Vec<f64>,
    pub(crate) t_prev: f64,
    pub(crate) y_prev: Vec<f64>,
    pub(crate) f_prev: Vec<f64>,
    h: f64,
    dir: f64,
    t_end: f64,
    attempts: usize,
    k: [Vec<f64>; 6],
    y_new: Vec<f64>,
    f_new: Vec<f64>,
}

impl<F: Flow> Stepper<F> {
    pub(crate) fn new(
        mut flow: F,
        y0: &[f64],
        t0: f64,
        t_end: f64,
        opts: &IntegrationOptions,
    ) -> Result<Self, IntegrationError> {
        opts.validate()?;
        let d = flow.dim();
        if y0.len() != d {
            return Err(IntegrationError::DimensionMismatch { expected: d, found: y0.len() });
        }
        if !t0.is_finite() || !t_end.is_finite() || y0.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::NonFiniteInitial);
        }
        if t_end == t0 {
            return Err(IntegrationError::EmptyInterval);
        }
        let dir = if t_end > t0 { 1.0 } else { -1.0 };
        let mut f = vec![0.0; d];
        flow.rhs(y0, &mut f);
        let zero = || vec![0.0; d];
        Ok(Self {
            flow,
            method: opts.method,
            opts: *opts,
            t: t0,
            y: y0.to_vec(),
            f: f.clone(),
            t_prev: t0,
            y_prev: y0.to_vec(),
            f_prev: f,
            h: dir * opts.step,
            dir,
            t_end,
            attempts: 0,
            k: [zero(), zero(), zero(), zero(), zero(), zero()],
            y_new: zero(),
            f_new: zero(),
        })
    }

    pub(crate) fn done(&self) -> bool {
        self.t == self.t_end
    }

    /// Takes one accepted step towards `t_end`. The previous point stays
    /// available in `t_prev`, `y_prev`, `f_prev`.
    pub(crate) fn advance(&mut self) -> Result<(), IntegrationError> {
        debug_assert!(!self.done());
        loop {
            self.attempts += 1;
            if self.attempts > self.opts.max_steps {
                return Err(IntegrationError::MaxSteps { t: self.t, steps: self.opts.max_steps });
            }
            let remaining = self.t_end - self.t;
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h };
            let accepted = match self.method {
                Method::Rk4Fixed => {
                    self.rk4_trial(h);
                    true
                }
                Method::Rk45Adaptive => {
                    let err = self.dopri_trial(h);
                    if !err.is_finite() {
                        return Err(IntegrationError::NonFinite { t: self.t + h });
                    }
                    let accept = err <= 1.0;
                    let mut fac = if err == 0.0 { 5.0 } else { 0.9 * libm::pow(err, -0.2) };
                    fac = fac.clamp(0.2, 5.0);
                    if !accept {
                        fac = fac.min(1.0);
                    }
                    if accept && last {
                        // keep the controller's proposal instead of the clipped step
                        self.h = (self.h.abs().max(h.abs() * fac)) * self.dir;
                    } else {
                        self.h = h * fac;
                    }
                    if self.h.abs() < 1e-14 * self.t.abs().max(1.0) {
                        return Err(IntegrationError::StepUnderflow { t: self.t });
                    }
                    accept
                }
            };
            if !accepted {
                continue;
            }
            let t_new = if last { self.t_end } else { self.t + h };
            if self.y_new.iter().any(|v| !v.is_finite()) {
                return Err(IntegrationError::NonFinite { t: t_new });
            }
            core::mem::swap(&mut self.y_prev, &mut self.y);
            core::mem::swap(&mut self.f_prev, &mut self.f);
            core::mem::swap(&mut self.y, &mut self.y_new);
            core::mem::swap(&mut self.f, &mut self.f_new);
            self.t_prev = self.t;
            self.t = t_new;
            let nrm = norm(&self.y[..self.flow.state_dim()]);
            if nrm > self.opts.blowup_cap {
                return Err(IntegrationError::BlowUp { t: self.t, norm: nrm });
            }
            return Ok(());
        }
    }

    fn rk4_trial(&mut self, h: f64) {
        let d = self.y.len();
        let [k1, k2, k3, k4, tmp, _] = &mut self.k;
        k1.copy_from_slice(&self.f);
        for i in 0..d {
            tmp[i] = self.y[i] + 0.5 * h * k1[i];
        }
        self.flow.rhs(tmp, k2);
        for i in 0..d {
            tmp[i] = self.y[i] + 0.5 * h * k2[i];
        }
        self.flow.rhs(tmp, k3);
        for i in 0..d {
            tmp[i] = self.y[i] + h * k3[i];
        }
        self.flow.rhs(tmp, k4);
        for i in 0..d {
            self.y_new[i] = self.y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.flow.rhs(&self.y_new, &mut self.f_new);
    }

    /// Fills `y_new`/`f_new` and returns the scaled RMS error estimate.
    fn dopri_trial(&mut self, h: f64) -> f64 {
        let d = self.y.len();
        let y = &self.y;
        let k1 = &self.f;
        let [k2, k3, k4, k5, k6, tmp] = &mut self.k;
        for i in 0..d {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.flow.rhs(tmp, k2);
        for i in 0..d {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.flow.rhs(tmp, k3);
        for i in 0..d {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.flow.rhs(tmp, k4);
        for i in 0..d {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.flow.rhs(tmp, k5);
        for i in 0..d {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.flow.rhs(tmp, k6);
        for i in 0..d {
            self.y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        self.flow.rhs(&self.y_new, &mut self.f_new);
        let mut acc = 0.0;
        for i in 0..d {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * self.f_new[i]);
            let sc = self.opts.abs_tol + self.opts.rel_tol * y[i].abs().max(self.y_new[i].abs());
            acc += (e / sc) * (e / sc);
        }
        crate::math::sqrt(acc / d as f64)
    }

    /// Re-takes a single untimed step of length `h` from the previous point
    /// and returns the resulting state. Used to land exactly on events.
    pub(crate) fn restep_from_prev(&mut self, h: f64) -> Vec<f64> {
        if h == 0.0 {
            return self.y_prev.clone();
        }
        let y = core::mem::replace(&mut self.y, self.y_prev.clone());
        let f = core::mem::replace(&mut self.f, self.f_prev.clone());
        match self.method {
            Method::Rk4Fixed => self.rk4_trial(h),
            Method::Rk45Adaptive => {
                self.dopri_trial(h);
            }
        }
        self.y = y;
        self.f = f;
        self.y_new.clone()
    }
}

/// Runs a stepper to its end, calling `on_step` after every accepted step.
pub(crate) fn drive<F: Flow>(
    stepper: &mut Stepper<F>,
    mut on_step: impl FnMut(&Stepper<F>),
) -> Result<(), IntegrationError> {
    while !stepper.done() {
        stepper.advance()?;
        on_step(stepper);
    }
    Ok(())
}

fn push_sample<F: Flow>(samples: &mut Vec<Sample>, s: &Stepper<F>, n: usize) {
    samples.push(Sample { t: s.t, state: s.y[..n].to_vec(), derivative: s.f[..n].to_vec() });
}

/// Integrates and returns whatever was computed together with the error
/// that stopped the run early, if any. The partial trajectory always holds
/// at least the initial sample when the inputs were valid.
pub fn integrate_partial(
    field: &PolyField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<(Trajectory, Option<IntegrationError>), IntegrationError> {
    let n = field.dimension();
    let mut stepper = Stepper::new(FieldFlow(field), x0, t0, t1, opts)?;
    let mut samples = Vec::new();
    push_sample(&mut samples, &stepper, n);
    let res = drive(&mut stepper, |s| push_sample(&mut samples, s, n));
    Ok((Trajectory::from_samples(samples), res.err()))
}

/// Integrates from `(t0, x0)` to `t1`; `t1 < t0` integrates backward.
pub fn integrate(
    field: &PolyField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory, IntegrationError> {
    match integrate_partial(field, x0, t0, t1, opts)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Final state only, without storing samples.
pub fn integrate_endpoint(
    field: &PolyField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Vec<f64>, IntegrationError> {
    let mut stepper = Stepper::new(FieldFlow(field), x0, t0, t1, opts)?;
    drive(&mut stepper, |_| {})?;
    Ok(stepper.y)
}

/// Co-integrates the state and the tangent matrix `V' = J(x) V`, `V(t0) = q0`.
///
/// Returns the state trajectory and `V(t1)`. With `q0 = I` this is the
/// fundamental solution of the variational equation over `[t0, t1]`.
pub fn integrate_with_tangent(
    field: &PolyField,
    x0: &[f64],
    q0: &DMatrix<f64>,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<(Trajectory, DMatrix<f64>), IntegrationError> {
    let n = field.dimension();
    if q0.nrows() != n || q0.ncols() != n {
        return Err(IntegrationError::DimensionMismatch { expected: n * n, found: q0.len() });
    }
    let y0 = augment(x0, q0, n)?;
    let mut stepper = Stepper::new(TangentFlow::new(field), &y0, t0, t1, opts)?;
    let mut samples = Vec::new();
    push_sample(&mut samples, &stepper, n);
    drive(&mut stepper, |s| push_sample(&mut samples, s, n))?;
    let v = DMatrix::from_row_slice(n, n, &stepper.y[n..]);
    Ok((Trajectory::from_samples(samples), v))
}

fn augment(x0: &[f64], q0: &DMatrix<f64>, n: usize) -> Result<Vec<f64>, IntegrationError> {
    if x0.len() != n {
        return Err(IntegrationError::DimensionMismatch { expected: n, found: x0.len() });
    }
    let mut y0 = Vec::with_capacity(n + n * n);
    y0.extend_from_slice(x0);
    for i in 0..n {
        for j in 0..n {
            y0.push(q0[(i, j)]);
        }
    }
    Ok(y0)
}

/// Tangent integration over one segment without storing samples. Returns the
/// final augmented state and `∫ trace J dt` over the segment (Simpson rule on
/// each step, midpoints from the Hermite interpolant).
pub(crate) fn tangent_segment(
    field: &PolyField,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<(Vec<f64>, f64), IntegrationError> {
    let n = field.dimension();
    let mut stepper = Stepper::new(TangentFlow::new(field), y0, t0, t1, opts)?;
    let mut trace_integral = 0.0;
    let mut mid = vec![0.0; n];
    let mut div_prev = field.divergence(&y0[..n]);
    drive(&mut stepper, |s| {
        let tm = 0.5 * (s.t_prev + s.t);
        hermite_into(s.t_prev, &s.y_prev[..n], &s.f_prev[..n], s.t, &s.y[..n], &s.f[..n], tm, &mut mid);
        let div_new = field.divergence(&s.y[..n]);
        trace_integral += (s.t - s.t_prev) / 6.0 * (div_prev + 4.0 * field.divergence(&mid) + div_new);
        div_prev = div_new;
    })?;
    Ok((stepper.y, trace_integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_system;

    fn decay() -> PolyField {
        parse_system("dx/dt = -x").unwrap()
    }

    #[test]
    fn decay_to_e_inverse() {
        let x = integrate_endpoint(&decay(), &[1.0], 0.0, 1.0, &IntegrationOptions::default()).unwrap();
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn backward_run_has_decreasing_times() {
        let tr = integrate(&decay(), &[1.0], 0.0, -2.0, &IntegrationOptions::default()).unwrap();
        assert!(tr.is_backward());
        assert_eq!(tr.samples()[0].t, 0.0);
        assert_eq!(tr.last().t, -2.0);
        assert!(tr.samples().windows(2).all(|w| w[1].t < w[0].t));
        assert!((tr.final_state()[0] - 2.0f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_period_returns_to_start() {
        let f = parse_system("dx/dt = y\ndy/dt = -x").unwrap();
        let x =
            integrate_endpoint(&f, &[1.0, 0.0], 0.0, core::f64::consts::TAU, &IntegrationOptions::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6 && x[1].abs() < 1e-6);
    }

    #[test]
    fn rk4_fixed_lands_on_t1() {
        let tr = integrate(&decay(), &[1.0], 0.0, 1.05, &IntegrationOptions::rk4(0.1)).unwrap();
        assert_eq!(tr.last().t, 1.05);
        assert_eq!(tr.len(), 12);
    }

    #[test]
    fn blow_up_is_reported_with_partial_trajectory() {
        // x' = x^2 from x(0) = 1 escapes at t = 1
        let f = parse_system("dx/dt = x^2").unwrap();
        let (tr, err) = integrate_partial(&f, &[1.0], 0.0, 2.0, &IntegrationOptions::default()).unwrap();
        match err {
            Some(IntegrationError::BlowUp { t, norm }) => {
                assert!(t < 1.0 && t > 0.99);
                assert!(norm > 1e12);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
        assert!(tr.len() > 10);
        assert!(integrate(&f, &[1.0], 0.0, 2.0, &IntegrationOptions::default()).is_err());
    }

    #[test]
    fn option_and_input_errors() {
        let f = decay();
        let bad = IntegrationOptions { abs_tol: 0.0, ..Default::default() };
        assert!(matches!(integrate(&f, &[1.0], 0.0, 1.0, &bad), Err(IntegrationError::InvalidOptions(_))));
        assert_eq!(
            integrate(&f, &[1.0, 2.0], 0.0, 1.0, &Default::default()).unwrap_err(),
            IntegrationError::DimensionMismatch { expected: 1, found: 2 }
        );
        assert_eq!(integrate(&f, &[1.0], 0.0, 0.0, &Default::default()).unwrap_err(), IntegrationError::EmptyInterval);
        assert_eq!(
            integrate(&f, &[f64::NAN], 0.0, 1.0, &Default::default()).unwrap_err(),
            IntegrationError::NonFiniteInitial
        );
        let few = IntegrationOptions { max_steps: 3, ..Default::default() };
        assert!(matches!(integrate(&f, &[1.0], 0.0, 100.0, &few), Err(IntegrationError::MaxSteps { .. })));
    }

    #[test]
    fn hermite_interpolation_is_accurate_between_samples() {
        let tr = integrate(&decay(), &[1.0], 0.0, 3.0, &IntegrationOptions::default()).unwrap();
        for &t in &[0.0, 0.123, 1.5, 2.999, 3.0] {
            let x = tr.interpolate(t).unwrap();
            assert!((x[0] - (-t).exp()).abs() < 1e-7, "t = {t}");
        }
        assert!(tr.interpolate(3.5).is_none());
        let back = integrate(&decay(), &[1.0], 0.0, -1.0, &IntegrationOptions::default()).unwrap();
        assert!((back.interpolate(-0.5).unwrap()[0] - 0.5f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn tangent_of_zero_field_is_q0() {
        let f = parse_system("dx/dt = 0\ndy/dt = 0").unwrap();
        let q0 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let (_, v) = integrate_with_tangent(&f, &[0.3, 0.4], &q0, 0.0, 5.0, &Default::default()).unwrap();
        assert_eq!(v, q0);
    }
}
