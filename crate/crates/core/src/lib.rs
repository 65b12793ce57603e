//! Central configurations, linearized dynamics and stability indices for
//! elliptic relative equilibria of restricted N-body problems.
//!
//! The primaries sit in a planar central configuration (collinear
//! Euler-Moulton chains or a regular polygon with a central mass) and a
//! massless body rests at an equilibrium site. Along Keplerian ellipses of
//! eccentricity `e` the linearized motion of the massless body reduces to a
//! 4-dimensional periodic Hamiltonian system whose monodromy and
//! ω-Morse indices decide linear stability.

pub mod central_config;
pub mod error;
pub mod linearization;
pub mod maslov_index;
pub mod monodromy;
pub mod ode;
pub mod polygon_config;
pub mod roots;
pub mod scan;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
