//! Numerical core for Hermitian Yang–Mills metrics on asymptotically
//! cylindrical lattice models and the G₂ linear algebra they lift to.
//!
//! Modules:
//!
//! * [`g2_algebra`] — exact exterior algebra on ℝ⁷, φ₀, cross product,
//!   octonions, the Λ²₊ ⊕ Λ²₋ split and the Kähler → G₂ lift.
//! * [`lattice_model`] — lattice charts (flat torus × truncated cylinder),
//!   matrix fields, the discrete Dolbeault calculus and Chern curvature.
//! * [`heat_flow`] — the Hermitian Yang–Mills heat flow with Dirichlet
//!   boundary, metric distances σ and λ̄, and maximum-principle monitors.
//! * [`donaldson`] — the lattice Donaldson functional, its gradient (the
//!   discrete HYM operator), path integrals and convexity diagnostics.
//! * [`diagnostics`] — Chern–Weil and Hodge–Riemann identities, energy
//!   bounds, and the slice-wise lower-bound machinery.
//! * [`monad_chern`] — Chern-class arithmetic and exact monad construction.

pub mod cmat;
pub mod config;
pub mod diagnostics;
pub mod donaldson;
pub mod exact;
pub mod g2_algebra;
pub mod heat_flow;
pub mod lattice_model;
pub mod monad_chern;
pub mod numerics;
