pub mod analysis;
pub mod dtn;
pub mod duality;
pub mod error;
pub mod flow;
pub mod ite;
pub mod medium;
pub mod quadrature;
pub mod radial;
pub mod roots;
pub mod signature;
pub mod specfun;
pub mod weyl;

pub use error::{Error, Result};
