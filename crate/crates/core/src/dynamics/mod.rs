//! Smooth maps, curves, orbits and localized map sequences.

pub mod curve;
pub mod holder;
pub mod jet;
pub mod map;
pub mod sample;
pub mod sequence;

pub use curve::{Curve, CurveLike, Derivative, FnCurve, Reparam, Term};
pub use holder::{curve_norm, holder_norm_estimate, map_norm, CurveSamples, HolderEstimate, NormTarget};
pub use jet::{CurveJet, MapJet};
pub use map::{builtin_system, derivative_cocycle, evaluate_orbit, system, Domain, SmoothMap, BUILTIN_NAMES};
pub use sample::OrbitSample;
pub use sequence::{localize, Iterated, MapSequence, StepMap, DIM};
