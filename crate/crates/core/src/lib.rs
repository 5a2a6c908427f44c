//! Numerical core for studying trajectory bounds of polynomial vector fields.
//!
//! Everything here is `no_std` and only needs `alloc`:
//!
//! - [`polyfield`]: polynomial vector fields, the system-config parser,
//!   symbolic Jacobians and the even-power lower-bound certifier.
//! - [`integrator`]: RK4 and Dormand–Prince 5(4) in both time directions,
//!   including the variational (tangent) flow.
//! - [`boundlaw`]: the linear bound lines `α(t − t0) + x_j(t0)`, their
//!   verification on trajectories and the bounded-backward-orbit search.
//! - [`poincare`]: oriented planar sections and first-return maps.
//! - [`upo`]: close-recurrence seeding, Newton shooting and Floquet analysis.
//! - [`lyapunov`]: Benettin-style Lyapunov spectra.
//!
//! File formats, plotting and the command line live in the `dynbound` crate.
#![no_std]
#![deny(unsafe_code)]
// `!(a > b)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundlaw;
pub mod integrator;
pub mod linalg;
pub mod lyapunov;
mod math;
pub mod poincare;
pub mod polyfield;
pub mod upo;

pub use boundlaw::{BoundCertificate, BoundReport, CertificateSource, RefutationReport, Verdict};
pub use integrator::{IntegrationError, IntegrationOptions, Method, Trajectory};
pub use lyapunov::LyapunovResult;
pub use poincare::{Direction, SectionPlane, SectionPoint};
pub use polyfield::{Monomial, PolyField, Polynomial};
pub use upo::{PeriodicOrbit, RecurrenceSeed, Stability};
