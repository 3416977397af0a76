//! Fixed-step integration of the replicator system, with and without an
//! observation delay.
//!
//! With delay `τ`, each player reacts to the opponent's mix as it was `τ`
//! time units ago while its own growth factor stays instantaneous:
//!
//! ```text
//! dx/dt = x(t)(1 − x(t)) · {y(t − τ)(gs + t1 + t2) + (π1 − π2)}
//! dy/dt = y(t)(1 − y(t)) · [x(t − τ)(u2 − t1 − gs) + t2(1 − x(t − τ))]
//! ```
//!
//! History before `t = 0` is held at the initial state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    company_replicator_lagged, expected_payoffs, government_replicator_lagged, GameError,
    GameParams, PayoffBimatrix, StrategyState,
};

/// Pre-clamp excursions outside `[0, 1]` larger than this abort the run.
pub const MAX_OVERSHOOT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("integrator `{name}` must be {requirement}, got {value}")]
    InvalidConfig {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("tau = {tau} is not an integer multiple of dt = {dt}")]
    DelayNotOnGrid { tau: f64, dt: f64 },
    #[error("delayed integration needs tau > 0")]
    MissingDelay,
    #[error("undelayed integration needs tau = 0, got {0}")]
    UnexpectedDelay(f64),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("state left [0, 1]^2 by {overshoot:e} at t = {time}; reduce dt")]
    Overshoot { time: f64, overshoot: f64 },
}

impl DynamicsError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, DynamicsError::Overshoot { .. })
    }
}

mod defaults {
    pub fn dt() -> f64 {
        0.01
    }
    pub fn t_end() -> f64 {
        100.0
    }
    pub fn tau() -> f64 {
        0.0
    }
    pub fn convergence_tol() -> f64 {
        1e-6
    }
    pub fn convergence_window() -> f64 {
        5.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
    /// Observation delay; must be a whole number of steps.
    #[serde(default = "defaults::tau")]
    pub tau: f64,
    #[serde(default = "defaults::convergence_tol")]
    pub convergence_tol: f64,
    /// Time span the right-hand side must stay below tolerance.
    #[serde(default = "defaults::convergence_window")]
    pub convergence_window: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: defaults::dt(),
            t_end: defaults::t_end(),
            tau: defaults::tau(),
            convergence_tol: defaults::convergence_tol(),
            convergence_window: defaults::convergence_window(),
        }
    }
}

/// Right-hand side of a (possibly delayed) replicator system.
pub trait ReplicatorField {
    /// `(dx/dt, dy/dt)` at `time` for the current state `own`, where each
    /// player reacts to the opponent's mix in `observed`.
    fn rates(&self, time: f64, own: StrategyState, observed: StrategyState) -> (f64, f64);
}

impl ReplicatorField for GameParams {
    fn rates(&self, time: f64, own: StrategyState, observed: StrategyState) -> (f64, f64) {
        let p = self.at_time(time);
        (
            company_replicator_lagged(own.x, observed.y, &p),
            government_replicator_lagged(own.y, observed.x, &p),
        )
    }
}

/// Rates computed from raw payoff cells: `x(1 − x)(E11 − E12)` and
/// `y(1 − y)(E21 − E22)`.
impl ReplicatorField for PayoffBimatrix {
    fn rates(&self, _time: f64, own: StrategyState, observed: StrategyState) -> (f64, f64) {
        let e = expected_payoffs(self, observed);
        (
            own.x * (1.0 - own.x) * (e.e11 - e.e12),
            own.y * (1.0 - own.y) * (e.e21 - e.e22),
        )
    }
}

/// `a / b` as a whole number if it is one up to rounding noise.
fn whole_ratio(a: f64, b: f64) -> Option<usize> {
    let ratio = a / b;
    let nearest = ratio.round();
    ((ratio - nearest).abs() <= 1e-9 * nearest.max(1.0)).then_some(nearest as usize)
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(DynamicsError::InvalidConfig {
                    name,
                    requirement: "positive and finite",
                    value,
                })
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("convergence_tol", self.convergence_tol)?;
        positive("convergence_window", self.convergence_window)?;
        if self.t_end < self.dt {
            return Err(DynamicsError::InvalidConfig {
                name: "t_end",
                requirement: "at least dt",
                value: self.t_end,
            });
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(DynamicsError::InvalidConfig {
                name: "tau",
                requirement: "nonnegative and finite",
                value: self.tau,
            });
        }
        if self.tau > 0.0 && whole_ratio(self.tau, self.dt).is_none_or(|m| m == 0) {
            return Err(DynamicsError::DelayNotOnGrid {
                tau: self.tau,
                dt: self.dt,
            });
        }
        Ok(())
    }

    /// Number of steps: `floor(t_end / dt)`, snapping ratios that are whole
    /// numbers up to rounding.
    pub fn steps(&self) -> usize {
        whole_ratio(self.t_end, self.dt).unwrap_or_else(|| (self.t_end / self.dt).floor() as usize)
    }

    /// The delay in steps.
    pub fn delay_steps(&self) -> usize {
        if self.tau == 0.0 {
            0
        } else {
            whole_ratio(self.tau, self.dt).unwrap_or(0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StrategyState>,
    pub converged_to: Option<StrategyState>,
    pub convergence_time: Option<f64>,
    /// Largest pre-clamp excursion outside `[0, 1]` over all steps.
    pub max_overshoot: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> StrategyState {
        *self
            .states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// State at fractional grid index `index` (constant before index 0).
fn interpolate(states: &[StrategyState], index: f64) -> StrategyState {
    if index <= 0.0 {
        return states[0];
    }
    let lo = index.floor() as usize;
    let frac = index - lo as f64;
    if frac == 0.0 || lo + 1 >= states.len() {
        return states[lo.min(states.len() - 1)];
    }
    let (a, b) = (states[lo], states[lo + 1]);
    StrategyState::new(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))
}

/// One classical RK4 step. `rhs(theta, state)` evaluates the vector field at
/// stage time `t + theta·dt`.
fn rk4_step(
    state: StrategyState,
    dt: f64,
    rhs: impl Fn(f64, StrategyState) -> (f64, f64),
) -> (f64, f64) {
    let shift =
        |s: StrategyState, k: (f64, f64), h: f64| StrategyState::new(s.x + h * k.0, s.y + h * k.1);
    let k1 = rhs(0.0, state);
    let k2 = rhs(0.5, shift(state, k1, 0.5 * dt));
    let k3 = rhs(0.5, shift(state, k2, 0.5 * dt));
    let k4 = rhs(1.0, shift(state, k3, dt));
    (
        state.x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        state.y + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

fn overshoot(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        (-v).max(v - 1.0).max(0.0)
    }
}

fn run<F: ReplicatorField + ?Sized>(
    field: &F,
    init: StrategyState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    init.validate()?;
    let n = cfg.steps();
    let delay = cfg.delay_steps();
    let dt = cfg.dt;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(init);
    let mut max_overshoot = 0.0f64;

    for k in 0..n {
        let t = k as f64 * dt;
        let current = states[k];
        let (x, y) = if delay == 0 {
            rk4_step(current, dt, |theta, s| field.rates(t + theta * dt, s, s))
        } else {
            let lag_index = k as f64 - delay as f64;
            rk4_step(current, dt, |theta, s| {
                field.rates(t + theta * dt, s, interpolate(&states, lag_index + theta))
            })
        };
        let excess = overshoot(x).max(overshoot(y));
        if excess > MAX_OVERSHOOT {
            return Err(DynamicsError::Overshoot {
                time: t + dt,
                overshoot: excess,
            });
        }
        max_overshoot = max_overshoot.max(excess);
        times.push((k + 1) as f64 * dt);
        states.push(StrategyState::new(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)));
    }

    let mut traj = Trajectory {
        times,
        states,
        converged_to: None,
        convergence_time: None,
        max_overshoot,
    };
    if let Some((point, time)) = detect_convergence(&traj, field, cfg) {
        traj.converged_to = Some(point);
        traj.convergence_time = Some(time);
    }
    Ok(traj)
}

/// Integrates any replicator field, delayed when `cfg.tau > 0`.
pub fn integrate_field<F: ReplicatorField + ?Sized>(
    field: &F,
    init: StrategyState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    run(field, init, cfg)
}

/// Integrates the undelayed system with RK4 at fixed step.
pub fn integrate(
    p: &GameParams,
    init: StrategyState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    if cfg.tau != 0.0 {
        return Err(DynamicsError::UnexpectedDelay(cfg.tau));
    }
    p.validate()?;
    run(p, init, cfg)
}

/// Integrates the delayed system by the method of steps. Stage lookups
/// between grid points are linearly interpolated.
pub fn integrate_delayed(
    p: &GameParams,
    init: StrategyState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    if cfg.tau == 0.0 {
        return Err(DynamicsError::MissingDelay);
    }
    cfg.validate()?;
    p.validate()?;
    run(p, init, cfg)
}

/// Dispatches on `cfg.tau`.
pub fn simulate(
    p: &GameParams,
    init: StrategyState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    if cfg.tau > 0.0 {
        integrate_delayed(p, init, cfg)
    } else {
        integrate(p, init, cfg)
    }
}

/// Max-norm of the (possibly delayed) right-hand side at grid index `k`.
fn rhs_norm<F: ReplicatorField + ?Sized>(
    traj: &Trajectory,
    k: usize,
    field: &F,
    cfg: &IntegratorConfig,
) -> f64 {
    let own = traj.states[k];
    let observed = traj.states[k.saturating_sub(cfg.delay_steps())];
    let (dx, dy) = field.rates(traj.times[k], own, observed);
    dx.abs().max(dy.abs())
}

/// Returns the final state and the time from which the right-hand side stays
/// below `convergence_tol` through `t_end`, provided that stretch lasts at
/// least `convergence_window`.
pub fn detect_convergence<F: ReplicatorField + ?Sized>(
    traj: &Trajectory,
    field: &F,
    cfg: &IntegratorConfig,
) -> Option<(StrategyState, f64)> {
    let last = traj.len().checked_sub(1)?;
    let mut start = None;
    for k in (0..=last).rev() {
        if rhs_norm(traj, k, field, cfg) < cfg.convergence_tol {
            start = Some(k);
        } else {
            break;
        }
    }
    let start = start?;
    let since = traj.times[start];
    let span = traj.times[last] - since;
    (span >= cfg.convergence_window * (1.0 - 1e-9)).then(|| (traj.states[last], since))
}
