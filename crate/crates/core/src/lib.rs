pub mod bits;
pub mod cli;
pub mod compacta;
pub mod construction;
pub mod error;
pub mod gamma;
pub mod interval_maps;
pub mod plots;
pub mod rational;
pub mod shadowing;
pub mod shifts;
pub mod space;

pub use error::{Error, Result};
pub use rational::Q;
