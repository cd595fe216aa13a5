pub mod complex;
pub mod morph;
pub mod generate;
pub mod measure;
pub mod operator;
pub mod spectral;
pub mod io;
