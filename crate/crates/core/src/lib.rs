pub mod classifier;
pub mod error;
pub mod geometry;
pub mod ik;
pub mod oracle;
pub mod poly;
pub mod report;
pub mod singularity;
pub mod sweep;
pub mod topology;
pub mod validate;
