//! Subderivative calculus and the subderivative descent method for
//! nonsmooth, nonconvex and possibly non-Lipschitz objectives.
//!
//! Objectives are [`FunctionModel`]s answering `f(x)` and the subderivative
//! `d f(x)(w)`. The [`calculus`] combinators build composite models by the
//! exact sum and chain rules, [`oracles`] bundles closed-form models,
//! [`direction`] solves `min_{‖w‖ ≤ 1} d f(x)(w)`, [`solver`] runs the
//! descent method, and [`verify`] holds independent numerical checks.

pub mod bench;
pub mod calculus;
pub mod direction;
pub mod error;
pub mod ext_real;
pub mod line_search;
pub mod maps;
pub mod model;
pub mod oracles;
pub mod point;
pub mod sets;
pub mod solver;
pub mod verify;

pub use direction::{DirectionResult, NormChoice};
pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use line_search::{ArmijoParams, Schedule};
pub use maps::{SemiDiffMap, SmoothMap};
pub use model::{FunctionModel, SharedModel};
pub use point::Point;
pub use sets::SetModel;
pub use solver::{SolverConfig, Status, Strategy, Trace};
