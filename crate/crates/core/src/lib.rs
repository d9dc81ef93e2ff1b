pub mod bench;
pub mod ecr;
pub mod fixtures;
pub mod instances;
pub mod lp;
pub mod model;
pub mod network;
pub mod rational;
pub mod separation;
pub mod structures;
pub mod verify;
