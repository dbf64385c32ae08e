pub mod constants;
pub mod field;
pub mod fixtures;
pub mod infconv;
pub mod lemma32;
pub mod necessity;
pub mod sampler;
pub mod suites;
