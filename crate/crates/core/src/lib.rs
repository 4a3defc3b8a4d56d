//! Numerical verification engine for curvature identities on gradient
//! shrinking Ricci solitons, evaluated on explicit Riemannian charts.
//!
//! The pipeline: metric components are symbolic scalar expressions
//! ([`expr`]); they are evaluated at sample points into truncated Taylor
//! data ([`jet`]); jets of the metric feed the connection and curvature
//! machinery ([`tensor`], [`geometry`], [`curvature`], [`divchain`]); a
//! catalog of exact soliton charts and test metrics ([`models`]) supplies
//! the geometry; and a check registry ([`verify`]) evaluates every
//! identity at seeded sample plans and classifies four-dimensional
//! shrinkers.

pub mod curvature;
pub mod divchain;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod models;
pub mod tensor;
pub mod verify;
