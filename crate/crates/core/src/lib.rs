//! Predicts Java test execution time from the test's source code.
//!
//! [`java`] parses a test file, [`faast`] adds flow edges to the tree,
//! [`repr`] turns graphs into integer tensors, [`engine`] holds the
//! networks and their training, [`pipeline`] ties it into datasets and
//! experiments, and [`miner`] produces labels from Surefire reports.

pub mod java;
pub mod faast;
pub mod repr;
pub mod engine;
pub mod miner;
pub mod pipeline;
