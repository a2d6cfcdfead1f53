pub mod catmap;
pub mod error;
pub mod gfq;
pub mod heiwei;
pub mod linalg;
pub mod spectra;
pub mod sums;
pub mod symp;

pub use error::{Error, Result};
