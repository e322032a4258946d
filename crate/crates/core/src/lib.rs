pub mod arith;
pub mod climit;
pub mod coeffring;
pub mod error;
pub mod frontend;
pub mod gauss;
pub mod dynamics;
pub mod hilbert;
pub mod wick;

pub use arith::{find_params, FpElem, ParamSpec, Params, Phase, Rational, Tag};
pub use coeffring::{ComplexVal, GaussCoeff};
pub use error::{Error, Result};
pub use gauss::{Backend, GaussSumSpec, Mode};
