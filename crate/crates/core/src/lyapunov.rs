//! Lyapunov spectrum by repeated QR re-orthonormalisation of the tangent flow.

use alloc::vec::Vec;

use crate::integrator::{integrate_endpoint, tangent_segment, IntegrationError, IntegrationOptions};
use crate::linalg::{identity, mgs_qr};
use crate::math::ln;
use crate::polyfield::PolyField;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LyapunovError {
    #[error("renormalisation interval and total time must be positive and finite")]
    InvalidTimes,
    #[error("initial state has {found} components, system has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tangent basis collapsed at t = {t}")]
    Degenerate { t: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovResult {
    /// Sorted in decreasing order.
    pub exponents: Vec<f64>,
    pub transient_skipped: f64,
    pub total_time: f64,
    pub renorm_interval: f64,
    /// `(time, running estimate)` every [`HISTORY_STRIDE`] renormalisations.
    pub convergence_history: Vec<(f64, Vec<f64>)>,
    /// Time average of the divergence along the measured trajectory.
    pub mean_divergence: f64,
}

impl LyapunovResult {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }
}

pub const HISTORY_STRIDE: usize = 100;

/// Integrates `x0` for `transient` time units, then the state and an
/// orthonormal tangent basis for `total_time`, re-orthonormalising every
/// `renorm_interval` and averaging `ln R_ii`.
pub fn lyapunov_spectrum(
    field: &PolyField,
    x0: &[f64],
    transient: f64,
    total_time: f64,
    renorm_interval: f64,
    opts: &IntegrationOptions,
) -> Result<LyapunovResult, LyapunovError> {
    let n = field.dimension();
    if x0.len() != n {
        return Err(LyapunovError::DimensionMismatch { expected: n, found: x0.len() });
    }
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !ok(renorm_interval) || !ok(total_time) || !(transient.is_finite() && transient >= 0.0) {
        return Err(LyapunovError::InvalidTimes);
    }
    let start = if transient > 0.0 { integrate_endpoint(field, x0, 0.0, transient, opts)? } else { x0.to_vec() };

    let steps = crate::math::ceil(total_time / renorm_interval - 1e-9).max(1.0) as usize;
    let mut y = start;
    y.extend_from_slice(&identity(n));
    let mut sums = alloc::vec![0.0; n];
    let mut trace_total = 0.0;
    let mut history = Vec::new();
    let mut t = transient;
    for s in 0..steps {
        let t1 = if s + 1 == steps { transient + total_time } else { transient + (s + 1) as f64 * renorm_interval };
        let (y_new, tr) = tangent_segment(field, &y, t, t1, opts)?;
        y = y_new;
        trace_total += tr;
        t = t1;
        let r = mgs_qr(&mut y[n..], n, 1e-300).ok_or(LyapunovError::Degenerate { t })?;
        for i in 0..n {
            sums[i] += ln(r[i * n + i]);
        }
        if (s + 1) % HISTORY_STRIDE == 0 {
            let elapsed = t - transient;
            history.push((elapsed, sorted(sums.iter().map(|v| v / elapsed).collect())));
        }
    }
    Ok(LyapunovResult {
        exponents: sorted(sums.iter().map(|v| v / total_time).collect()),
        transient_skipped: transient,
        total_time,
        renorm_interval,
        convergence_history: history,
        mean_divergence: trace_total / total_time,
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_system;

    #[test]
    fn diagonal_linear_spectrum() {
        let f = parse_system("dx/dt = -x\ndy/dt = -2*y\ndz/dt = -3*z").unwrap();
        let r = lyapunov_spectrum(&f, &[1.0, 1.0, 1.0], 0.0, 20.0, 0.5, &IntegrationOptions::rk45(1e-10)).unwrap();
        for (l, e) in r.exponents.iter().zip([-1.0, -2.0, -3.0]) {
            assert!((l - e).abs() < 1e-6, "{:?}", r.exponents);
        }
        assert!((r.sum() + 6.0).abs() < 1e-6);
        assert!((r.mean_divergence + 6.0).abs() < 1e-9);
    }

    #[test]
    fn rotation_plus_decay() {
        let f = parse_system("dx/dt = y\ndy/dt = -x\ndz/dt = -z").unwrap();
        let r = lyapunov_spectrum(&f, &[1.0, 0.0, 1.0], 1.0, 200.0, 1.0, &IntegrationOptions::rk45(1e-10)).unwrap();
        assert!(r.exponents[0].abs() < 1e-6 && r.exponents[1].abs() < 1e-6);
        assert!((r.exponents[2] + 1.0).abs() < 1e-6);
        assert_eq!(r.convergence_history.len(), 2);
        assert_eq!(r.transient_skipped, 1.0);
    }

    #[test]
    fn rejects_bad_times() {
        let f = parse_system("dx/dt = -x").unwrap();
        let o = IntegrationOptions::default();
        assert!(matches!(lyapunov_spectrum(&f, &[1.0], 0.0, 10.0, 0.0, &o), Err(LyapunovError::InvalidTimes)));
        assert!(matches!(lyapunov_spectrum(&f, &[1.0], -1.0, 10.0, 1.0, &o), Err(LyapunovError::InvalidTimes)));
        assert!(matches!(
            lyapunov_spectrum(&f, &[1.0, 2.0], 0.0, 10.0, 1.0, &o),
            Err(LyapunovError::DimensionMismatch { .. })
        ));
    }
}
