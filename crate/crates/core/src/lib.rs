//! Evolutionary game between a subsidizing government and power companies
//! choosing between innovative and traditional transmission equipment.
//!
//! - [`hotelling`]: consumer demand and firm profits on a Hotelling line.
//! - [`game`]: payoffs, replicator equations, fixed points and stability.
//! - [`dynamics`]: RK4 integration with optional observation delay.
//! - [`sweep`]: parameter sweeps, sensitivity spreads, basin maps.
//! - [`cli`]: config files and the command-line front end.

pub mod cli;
pub mod dynamics;
pub mod game;
pub mod hotelling;
pub mod sweep;
