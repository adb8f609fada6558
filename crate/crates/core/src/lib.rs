//! Biparametric Fisher-Rényi complexity of one-dimensional probability
//! densities, with an analytic fast path for the d-dimensional blackbody
//! spectrum.

// Negated comparisons (`!(x > 0.0)`) reject NaN along with the stated
// range and are used for every domain gate; reference constants are written
// with all digits of their sources.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod blackbody;
pub mod complexity;
pub mod density;
pub mod error;
pub mod measures;
pub mod quadrature;
pub mod reference;
pub mod specfun;
pub mod verify;

pub use blackbody::{BlackbodyConstants, Chart, ChartPoint, ConstantsMethod, Extremum, ExtremumKind, GridRange};
pub use complexity::{ComplexityReport, EvalPath};
pub use density::{BlackbodySpec, DensityModel, GenGaussianSpec, StepDensity, Support};
pub use error::{Error, Result};
pub use measures::ParamPair;
pub use quadrature::{QuadConfig, QuadResult};
pub use verify::CheckResult;
