//! Exact capacities, Choquet and concave integrals, partition-induced capacities and
//! monotone convergence experiments on finite and countable state spaces.

pub mod capacity;
pub mod cli;
pub mod convergence;
pub mod countable;
pub mod error;
pub mod generators;
pub mod induced;
pub mod integrals;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod sets;
pub mod simplex;

pub use capacity::{Capacity, ProbabilityMeasure, PropertyReport, Witness};
pub use error::{Error, Result};
pub use integrals::{choquet_integral, concave_integral, IntegralResult, SimpleFunction};
pub use rational::Rational;
pub use sets::{Partition, StateSpace, SubsetMask};
