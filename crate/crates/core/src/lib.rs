pub mod capacity;
pub mod linalg;
pub mod memnet;
pub mod protocol;
pub mod qstate;
pub mod rng;
pub mod runner;
pub mod selection;
