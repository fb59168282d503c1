pub mod bench;
pub mod compare;
pub mod generate;
pub mod plan;
