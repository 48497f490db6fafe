pub mod chord;
pub mod group;
pub mod invariants;
pub mod moves;
pub mod oracle;
pub mod parity;
pub mod snf;
pub mod surface;
