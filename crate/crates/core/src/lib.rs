pub mod checks;
pub mod corpus;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod growth;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod random;
pub mod resolvent;
pub mod scan;
pub mod sequence;

pub use error::{Error, Result};
pub use linalg::{c, CMatrix, CVector, Complex};
