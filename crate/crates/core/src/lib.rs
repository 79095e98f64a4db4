pub mod bounds;
pub mod cb;
pub mod curve;
pub mod error;
pub mod field;
pub mod form;
pub mod gen;
pub mod linalg;
pub mod orbit;
pub mod pipeline;
pub mod projective;

pub use error::{Error, Result};
pub use field::{Elem, Field, FieldDescriptor};
