//! Exact network-calculus tooling for interleaved and per-flow regulators:
//! rational min-plus curves, packet traffic, regulator simulators, adversarial
//! trajectories and property checkers.

pub mod adversary;
pub mod cli;
pub mod minplus;
pub mod q;
pub mod regulators;
pub mod traffic;
pub mod verify;
