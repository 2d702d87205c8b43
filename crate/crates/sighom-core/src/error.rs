//! Error type shared by all kernels.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid input data (profiles, coefficients, configs, parameters).
    Validation(String),
    /// Geometrically impossible mesh request (e.g. interface leaves the box).
    Geometry(String),
    /// Element-level assembly failure.
    Assembly(String),
    /// Iterative VI solve ran out of sweeps.
    NonConvergence { iterations: usize, residual: f64 },
    /// Projected relaxation requires a symmetric operator; use the
    /// active-set solver for nonsymmetric problems.
    NonsymmetricOperator,
    /// Linear algebra broke down (singular or indefinite system).
    Conditioning(String),
    /// Iterative linear solve stalled; carries the trailing residual history.
    Stall { history: Vec<f64> },
    /// Point location failed during cross-mesh evaluation.
    PointLookup { x: f64, y: f64 },
    /// Requested the effective conductance for case-C parameters.
    NoEffectiveConductance,
    /// Sweep-level failure (too few successful rows and the like).
    Sweep(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation: {msg}"),
            Error::Geometry(msg) => write!(f, "geometry: {msg}"),
            Error::Assembly(msg) => write!(f, "assembly: {msg}"),
            Error::NonConvergence { iterations, residual } => write!(
                f,
                "relaxation did not converge after {iterations} sweeps (residual {residual:e})"
            ),
            Error::NonsymmetricOperator => write!(
                f,
                "operator is not symmetric; projected relaxation rejected, use solve_vi_activeset"
            ),
            Error::Conditioning(msg) => write!(f, "conditioning: {msg}"),
            Error::Stall { history } => {
                write!(f, "linear solve stalled; last residuals: ")?;
                for (i, r) in history.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{r:e}")?;
                }
                Ok(())
            }
            Error::PointLookup { x, y } => {
                write!(f, "point ({x}, {y}) not found in any mesh triangle")
            }
            Error::NoEffectiveConductance => write!(f, "no effective conductance in case C"),
            Error::Sweep(msg) => write!(f, "sweep: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
