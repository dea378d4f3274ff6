//! Escape-rate potentials, bifurcation measures and preperiodic parameters
//! for algebraic families of rational maps of the projective line.
//!
//! A family `f_s(X:Y) = (P_s(X,Y) : Q_s(X,Y))` has coefficients polynomial in
//! the parameter `s` over the Gaussian rationals. A marked point is a section
//! `a(s) = (A(s) : B(s))`. The crate computes certified values of the Green
//! function `G_{f_s}`, the parameter potential `g(s) = G_{f_s}(a(s))` on a
//! grid, its discrete `dd^c` measure, and exact equations for the parameters
//! at which `a(s)` is preperiodic.

pub mod arith;
pub mod descriptor;
pub mod error;
pub mod experiments;
pub mod family;
pub mod grid;
pub mod green;
pub mod measures;
mod numeric;
pub mod preperiodic;
pub mod roots;

pub use arith::{GaussianRational, ParamPolynomial};
pub use error::{Error, FamilyError, GreenError, MeasureError, ParseError, PrepError};
pub use family::{FiberMap, Form, MapFamily, MarkedPoint};
pub use grid::{Grid, Rect};
pub use green::{green_value, marked_potential_grid, GreenValue, GridPotential};
pub use measures::{box_discrepancy, ddc, empirical_measure, phi_rank_marked, DiscreteMeasure, PhiRank};
pub use numeric::chordal;
pub use preperiodic::{common_preperiodic, prep_equation, solve_parameters, Prep, PrepEquation};
pub use roots::{CertifiedRoot, SolveOptions, SolveOutcome};
