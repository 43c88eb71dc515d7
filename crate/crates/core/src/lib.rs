pub mod coords;
pub mod error;
pub mod flows;
pub mod interp;
pub mod inverse;
pub mod jacobi;
pub mod poisson;
pub mod poly;
pub mod random;
pub mod spectral;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
pub use jacobi::JacobiMatrix;
pub use spectral::{Divisor, SpectralData};
pub use weyl::{PolyQuotient, RationalHerglotz};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/jacobi.md")]
    mod jacobi {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/weyl.md")]
    mod weyl {}
    #[doc = include_str!("../../../book/src/inverse.md")]
    mod inverse {}
    #[doc = include_str!("../../../book/src/coordinates.md")]
    mod coordinates {}
    #[doc = include_str!("../../../book/src/poisson.md")]
    mod poisson {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
