//! Long-range porous-medium exclusion process on a ring: lattice states,
//! heavy-tailed jump kernel, gradient rates, a thinning simulator, the exact
//! generator for small rings, discrete and continuum fractional operators,
//! and a pseudospectral solver for the limiting equation.

pub mod dynamics;
pub mod error;
pub mod fracops;
pub mod kernel;
pub mod lattice;
pub mod measures;
pub mod observables;
pub mod pde;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod testfn;

pub use error::{Error, Result};
pub use kernel::JumpKernel;
pub use lattice::{LatticeConfig, SiteIndex};
pub use measures::{MeasureSpec, ProfileSpec};
pub use rates::RateModel;
pub use testfn::TestFunction;
