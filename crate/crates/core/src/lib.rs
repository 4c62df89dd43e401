pub mod besov;
pub mod fields;
pub mod fw;
pub mod harness;
pub mod spectral;
pub mod transport;
