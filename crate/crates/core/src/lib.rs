//! Germ-order comparison of offspring laws and finite-window recurrence
//! experiments for branching Markov processes.

pub mod engine;
pub mod lab;
pub mod occupancy;
pub mod offspring;
pub mod orders;
pub mod parallel;
pub mod poly;
pub mod rational;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod statespace;
