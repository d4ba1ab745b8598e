pub mod achieve;
pub mod bound;
pub mod compat;
pub mod scan;
pub mod verify;
