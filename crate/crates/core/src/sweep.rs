//! One-parameter sweeps, sensitivity spreads and basin maps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{simulate, DynamicsError, IntegratorConfig, Trajectory};
use crate::game::{GameParams, StrategyState};
use crate::hotelling::{market_outcome, DemandParams, FormulaMode, HotellingError};

/// A converged state this close to a corner is labelled by that corner.
pub const CORNER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Demand(#[from] HotellingError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{parameter} = {value}: {source}")]
    AtValue {
        parameter: SweepParameter,
        value: f64,
        source: Box<SweepError>,
    },
    #[error("sweep needs at least one value")]
    NoValues,
    #[error("sweep value {0} is not finite")]
    NonFiniteValue(f64),
    #[error("runs are not on a common time grid")]
    MismatchedGrid,
    #[error("basin map needs grid_n >= 2, got {0}")]
    GridTooSmall(usize),
}

impl SweepError {
    pub fn is_numerical(&self) -> bool {
        match self {
            SweepError::Dynamics(e) => e.is_numerical(),
            SweepError::AtValue { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub game: GameParams,
    /// When present, `pi1`/`pi2` come from the demand layer.
    pub demand: Option<DemandParams>,
    #[serde(default)]
    pub demand_mode: FormulaMode,
    pub init: StrategyState,
    pub integrator: IntegratorConfig,
}

impl Scenario {
    /// The sensitivity-analysis setup: start at (0.2, 0.8), default integrator.
    pub fn reference(s: f64) -> Self {
        Self {
            name: format!("reference_s{s}"),
            game: GameParams::reference(s),
            demand: None,
            demand_mode: FormulaMode::Corrected,
            init: StrategyState::new(0.2, 0.8),
            integrator: IntegratorConfig::default(),
        }
    }

    /// Game parameters with profits taken from the demand layer if present.
    pub fn resolved_game(&self) -> Result<GameParams, SweepError> {
        let mut game = self.game;
        if let Some(demand) = &self.demand {
            let outcome = market_outcome(demand, self.demand_mode)?;
            game.pi1 = outcome.pi1;
            game.pi2 = outcome.pi2;
        }
        Ok(game)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.resolved_game()?
            .validate()
            .map_err(DynamicsError::from)?;
        self.init.validate().map_err(DynamicsError::from)?;
        self.integrator.validate()?;
        Ok(())
    }

    pub fn simulate(&self) -> Result<Trajectory, SweepError> {
        let game = self.resolved_game()?;
        Ok(simulate(&game, self.init, &self.integrator)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    S,
    Tau,
    T1,
    T2,
    U2,
    GBeta,
    InitX,
    InitY,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 8] = [
        SweepParameter::S,
        SweepParameter::Tau,
        SweepParameter::T1,
        SweepParameter::T2,
        SweepParameter::U2,
        SweepParameter::GBeta,
        SweepParameter::InitX,
        SweepParameter::InitY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::S => "s",
            SweepParameter::Tau => "tau",
            SweepParameter::T1 => "t1",
            SweepParameter::T2 => "t2",
            SweepParameter::U2 => "u2",
            SweepParameter::GBeta => "g_beta",
            SweepParameter::InitX => "init_x",
            SweepParameter::InitY => "init_y",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> Scenario {
        let mut sc = base.clone();
        match self {
            SweepParameter::S => sc.game.s = value,
            SweepParameter::Tau => sc.integrator.tau = value,
            SweepParameter::T1 => sc.game.t1 = value,
            SweepParameter::T2 => sc.game.t2 = value,
            SweepParameter::U2 => sc.game.u2 = value,
            SweepParameter::GBeta => sc.game.g_beta = value,
            SweepParameter::InitX => sc.init.x = value,
            SweepParameter::InitY => sc.init.y = value,
        }
        sc.name = format!("{}_{}", self.name(), value);
        sc
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown sweep parameter `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    /// Largest range of `y` across runs at any grid time.
    pub spread_government: f64,
    /// Largest range of `x` across runs at any grid time.
    pub spread_company: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub value: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Sorted by parameter value.
    pub runs: Vec<SweepRun>,
    pub sensitivity: Sensitivity,
}

/// Runs one simulation per value in parallel. Output order depends only on
/// the values.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    if spec.values.is_empty() {
        return Err(SweepError::NoValues);
    }
    if let Some(&bad) = spec.values.iter().find(|v| !v.is_finite()) {
        return Err(SweepError::NonFiniteValue(bad));
    }
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);

    let at_value = |value: f64, e: SweepError| SweepError::AtValue {
        parameter: spec.parameter,
        value,
        source: Box::new(e),
    };
    let scenarios = values
        .iter()
        .map(|&v| {
            let sc = spec.parameter.apply(&spec.base, v);
            sc.validate().map_err(|e| at_value(v, e))?;
            Ok(sc)
        })
        .collect::<Result<Vec<_>, SweepError>>()?;

    let runs = scenarios
        .par_iter()
        .zip(values.par_iter())
        .map(|(sc, &value)| {
            sc.simulate()
                .map(|trajectory| SweepRun { value, trajectory })
                .map_err(|e| at_value(value, e))
        })
        .collect::<Result<Vec<_>, SweepError>>()?;

    let sensitivity = sensitivity_metric(&runs)?;
    Ok(SweepResult {
        parameter: spec.parameter,
        runs,
        sensitivity,
    })
}

/// Max over grid times of the across-run range of each player's strategy.
/// A single run has zero spread.
pub fn sensitivity_metric(runs: &[SweepRun]) -> Result<Sensitivity, SweepError> {
    let first = &runs.first().ok_or(SweepError::NoValues)?.trajectory;
    if runs.iter().any(|r| r.trajectory.times != first.times) {
        return Err(SweepError::MismatchedGrid);
    }
    let mut spread_government = 0.0f64;
    let mut spread_company = 0.0f64;
    for k in 0..first.len() {
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in runs {
            let s = r.trajectory.states[k];
            x_lo = x_lo.min(s.x);
            x_hi = x_hi.max(s.x);
            y_lo = y_lo.min(s.y);
            y_hi = y_hi.max(s.y);
        }
        spread_company = spread_company.max(x_hi - x_lo);
        spread_government = spread_government.max(y_hi - y_lo);
    }
    Ok(Sensitivity {
        spread_government,
        spread_company,
    })
}

/// First grid time at which the company's adoption probability reaches
/// `threshold`.
pub fn time_to_adoption(traj: &Trajectory, threshold: f64) -> Option<f64> {
    traj.states
        .iter()
        .position(|s| s.x >= threshold)
        .map(|k| traj.times[k])
}

/// First grid time at which the government's subsidy probability falls to
/// `threshold` or below.
pub fn time_to_withdrawal(traj: &Trajectory, threshold: f64) -> Option<f64> {
    traj.states
        .iter()
        .position(|s| s.y <= threshold)
        .map(|k| traj.times[k])
}

/// Secondary sensitivity report based on threshold-crossing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub company_threshold: f64,
    pub government_threshold: f64,
    /// Per run, in sweep order.
    pub company_times: Vec<Option<f64>>,
    pub government_times: Vec<Option<f64>>,
    /// Range of the crossing times; `None` if some run never crosses.
    pub company_spread: Option<f64>,
    pub government_spread: Option<f64>,
}

fn range(times: &[Option<f64>]) -> Option<f64> {
    let all: Vec<f64> = times.iter().copied().collect::<Option<_>>()?;
    let hi = all.iter().copied().reduce(f64::max)?;
    let lo = all.iter().copied().reduce(f64::min)?;
    Some(hi - lo)
}

pub fn threshold_report(result: &SweepResult) -> ThresholdReport {
    const COMPANY: f64 = 0.99;
    const GOVERNMENT: f64 = 0.01;
    let company_times: Vec<_> = result
        .runs
        .iter()
        .map(|r| time_to_adoption(&r.trajectory, COMPANY))
        .collect();
    let government_times: Vec<_> = result
        .runs
        .iter()
        .map(|r| time_to_withdrawal(&r.trajectory, GOVERNMENT))
        .collect();
    ThresholdReport {
        company_threshold: COMPANY,
        government_threshold: GOVERNMENT,
        company_spread: range(&company_times),
        government_spread: range(&government_times),
        company_times,
        government_times,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinLabel {
    Corner(StrategyState),
    /// Unconverged by `t_end`, or converged away from every corner.
    None,
}

impl BasinLabel {
    pub fn of(traj: &Trajectory) -> Self {
        traj.converged_to
            .and_then(|end| {
                StrategyState::corners()
                    .into_iter()
                    .find(|c| c.max_distance(&end) < CORNER_TOL)
            })
            .map_or(BasinLabel::None, BasinLabel::Corner)
    }
}

impl fmt::Display for BasinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasinLabel::Corner(c) => write!(f, "({},{})", c.x, c.y),
            BasinLabel::None => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinMap {
    pub grid_n: usize,
    /// `labels[i][j]` starts from `x = (i + 0.5) / n`, `y = (j + 0.5) / n`.
    pub labels: Vec<Vec<BasinLabel>>,
}

impl BasinMap {
    pub fn iter(&self) -> impl Iterator<Item = (StrategyState, BasinLabel)> + '_ {
        let n = self.grid_n;
        self.labels.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, l)| (basin_start(i, j, n), *l))
        })
    }
}

fn basin_start(i: usize, j: usize, n: usize) -> StrategyState {
    StrategyState::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64)
}

/// Labels an `n × n` lattice of interior starting points by the corner each
/// trajectory settles on.
pub fn basin_map(scenario: &Scenario, grid_n: usize) -> Result<BasinMap, SweepError> {
    if grid_n < 2 {
        return Err(SweepError::GridTooSmall(grid_n));
    }
    let game = scenario.resolved_game()?;
    let flat = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let init = basin_start(idx / grid_n, idx % grid_n, grid_n);
            simulate(&game, init, &scenario.integrator).map(|t| BasinLabel::of(&t))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let labels = flat.chunks(grid_n).map(<[_]>::to_vec).collect();
    Ok(BasinMap { grid_n, labels })
}
