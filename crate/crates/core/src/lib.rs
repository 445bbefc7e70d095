pub mod class;
pub mod cohomology;
pub mod elem;
pub mod error;
pub mod ext;
pub mod field;
pub mod finite;
pub mod harness;
pub mod quadform;
pub mod testing;

pub use class::{SquareClass, Subgroup};
pub use elem::Elem;
pub use error::{Error, Result};
pub use field::FieldDesc;
