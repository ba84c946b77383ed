pub mod cli;
pub mod cones;
pub mod fixtures;
pub mod frseq;
pub mod generator;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod reduction;
pub mod verifier;
