//! The government/company evolutionary game.
//!
//! `x` is the probability that a company adopts the innovative equipment and
//! `y` the probability that the government subsidizes. Payoffs per cell:
//!
//! | company \ government | subsidize                                   | no subsidy           |
//! |----------------------|---------------------------------------------|----------------------|
//! | adopt                | `π1 − t + t1 + gs`, `u1 + u2 + t − t1 − gs` | `π1 − t`, `u1 + t`   |
//! | keep                 | `π2 − t − t2`, `u3 + t + t2`                | `π2 − t`, `u3 + t`   |
//!
//! where `gs = g_beta · s`. The penalty tax `t2` is only levied under the
//! subsidize regime. `u1`, `u3` and `t` cancel out of every payoff
//! difference and so never affect the dynamics.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Real parts closer to zero than this are reported as undetermined.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("game parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("strategy state ({x}, {y}) is outside [0, 1]^2")]
    StateOutOfRange { x: f64, y: f64 },
}

fn zero() -> f64 {
    0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameParams {
    /// Government revenue when the company adopts without subsidy.
    #[serde(default = "zero")]
    pub u1: f64,
    /// Additional government revenue when the company adopts with subsidy.
    pub u2: f64,
    /// Government revenue when the company keeps traditional equipment.
    #[serde(default = "zero")]
    pub u3: f64,
    /// Basic tax.
    #[serde(default = "zero")]
    pub t: f64,
    /// Tax reduction for adopters.
    pub t1: f64,
    /// Penalty tax on traditional equipment, subsidize regime only.
    pub t2: f64,
    /// Initial subsidy amount.
    pub s: f64,
    /// Fiscal subsidy coefficient in `[0, 1]`.
    pub g_beta: f64,
    pub pi1: f64,
    pub pi2: f64,
    /// Exponential decay rate of the subsidy coefficient over time;
    /// `0` keeps `g_beta` constant.
    #[serde(default = "zero")]
    pub decay_rate: f64,
}

impl GameParams {
    /// The sensitivity-analysis parameter set with the given initial subsidy.
    pub fn reference(s: f64) -> Self {
        Self {
            u1: 0.0,
            u2: 0.5,
            u3: 0.0,
            t: 0.0,
            t1: 1.0,
            t2: 0.5,
            s,
            g_beta: 1.0,
            pi1: 3.0,
            pi2: 2.0,
            decay_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let finite = [
            ("u1", self.u1),
            ("u2", self.u2),
            ("u3", self.u3),
            ("pi1", self.pi1),
            ("pi2", self.pi2),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(GameError::InvalidParameter {
                    name,
                    requirement: "finite",
                    value,
                });
            }
        }
        let nonneg = [
            ("t", self.t),
            ("t1", self.t1),
            ("t2", self.t2),
            ("s", self.s),
            ("decay_rate", self.decay_rate),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(GameError::InvalidParameter {
                    name,
                    requirement: "nonnegative and finite",
                    value,
                });
            }
        }
        if !(0.0..=1.0).contains(&self.g_beta) {
            return Err(GameError::InvalidParameter {
                name: "g_beta",
                requirement: "in [0, 1]",
                value: self.g_beta,
            });
        }
        Ok(())
    }

    /// Effective subsidy `g_beta · s`.
    pub fn subsidy(&self) -> f64 {
        self.g_beta * self.s
    }

    /// Parameters with the subsidy coefficient decayed to `time`.
    pub fn at_time(&self, time: f64) -> Self {
        if self.decay_rate == 0.0 {
            return *self;
        }
        Self {
            g_beta: self.g_beta * (-self.decay_rate * time).exp(),
            ..*self
        }
    }

    /// Coefficient of `y` in the company's payoff advantage: `gs + t1 + t2`.
    fn company_slope(&self) -> f64 {
        self.subsidy() + self.t1 + self.t2
    }

    /// Government advantage of subsidizing when the company surely adopts.
    fn government_gain_on_adoption(&self) -> f64 {
        self.u2 - self.t1 - self.subsidy()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyState {
    /// Probability the company adopts the innovative equipment.
    pub x: f64,
    /// Probability the government subsidizes.
    pub y: f64,
}

impl StrategyState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y) {
            Ok(())
        } else {
            Err(GameError::StateOutOfRange {
                x: self.x,
                y: self.y,
            })
        }
    }

    pub fn corners() -> [StrategyState; 4] {
        [
            Self::new(0.0, 0.0),
            Self::new(0.0, 1.0),
            Self::new(1.0, 0.0),
            Self::new(1.0, 1.0),
        ]
    }

    pub fn max_distance(&self, other: &StrategyState) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Plain decimal, switching to exponent form for tiny magnitudes.
fn compact(v: f64) -> String {
    if v == 0.0 || v.abs() >= 1e-4 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for StrategyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", compact(self.x), compact(self.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompanyStrategy {
    Adopt,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernmentStrategy {
    Subsidize,
    NoSubsidy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffCell {
    pub company: f64,
    pub government: f64,
}

/// Payoffs indexed `[company strategy][government strategy]`, with adopt and
/// subsidize at index 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffBimatrix {
    pub entries: [[PayoffCell; 2]; 2],
}

impl PayoffBimatrix {
    pub fn cell(&self, company: CompanyStrategy, government: GovernmentStrategy) -> PayoffCell {
        let i = match company {
            CompanyStrategy::Adopt => 0,
            CompanyStrategy::Keep => 1,
        };
        let j = match government {
            GovernmentStrategy::Subsidize => 0,
            GovernmentStrategy::NoSubsidy => 1,
        };
        self.entries[i][j]
    }

    /// Adds `company` to every company payoff and `government` to every
    /// government payoff.
    pub fn shifted(&self, company: f64, government: f64) -> Self {
        let mut entries = self.entries;
        for cell in entries.iter_mut().flatten() {
            cell.company += company;
            cell.government += government;
        }
        Self { entries }
    }
}

pub fn build_bimatrix(p: &GameParams) -> PayoffBimatrix {
    let gs = p.subsidy();
    let adopt_sub = PayoffCell {
        company: p.pi1 - p.t + p.t1 + gs,
        government: p.u1 + p.u2 + p.t - p.t1 - gs,
    };
    let adopt_none = PayoffCell {
        company: p.pi1 - p.t,
        government: p.u1 + p.t,
    };
    let keep_sub = PayoffCell {
        company: p.pi2 - p.t - p.t2,
        government: p.u3 + p.t + p.t2,
    };
    let keep_none = PayoffCell {
        company: p.pi2 - p.t,
        government: p.u3 + p.t,
    };
    PayoffBimatrix {
        entries: [[adopt_sub, adopt_none], [keep_sub, keep_none]],
    }
}

/// Expected payoffs of each pure strategy against the opponent's mix, and
/// the population averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPayoffs {
    /// Company, adopt.
    pub e11: f64,
    /// Company, keep.
    pub e12: f64,
    pub e1: f64,
    /// Government, subsidize.
    pub e21: f64,
    /// Government, no subsidy.
    pub e22: f64,
    pub e2: f64,
}

pub fn expected_payoffs(m: &PayoffBimatrix, state: StrategyState) -> ExpectedPayoffs {
    let StrategyState { x, y } = state;
    let [[a_s, a_n], [k_s, k_n]] = m.entries;
    let e11 = y * a_s.company + (1.0 - y) * a_n.company;
    let e12 = y * k_s.company + (1.0 - y) * k_n.company;
    let e21 = x * a_s.government + (1.0 - x) * k_s.government;
    let e22 = x * a_n.government + (1.0 - x) * k_n.government;
    ExpectedPayoffs {
        e11,
        e12,
        e1: x * e11 + (1.0 - x) * e12,
        e21,
        e22,
        e2: y * e21 + (1.0 - y) * e22,
    }
}

/// Company advantage of adopting against government mix `y`.
fn company_bracket(y: f64, p: &GameParams) -> f64 {
    y * p.company_slope() + (p.pi1 - p.pi2)
}

/// Government advantage of subsidizing against company mix `x`.
fn government_bracket(x: f64, p: &GameParams) -> f64 {
    x * p.government_gain_on_adoption() + p.t2 * (1.0 - x)
}

/// `dx/dt`.
pub fn company_replicator(state: StrategyState, p: &GameParams) -> f64 {
    company_replicator_lagged(state.x, state.y, p)
}

/// `dy/dt`.
pub fn government_replicator(state: StrategyState, p: &GameParams) -> f64 {
    government_replicator_lagged(state.y, state.x, p)
}

/// `dx/dt` with the company reacting to an observed (possibly stale)
/// government mix.
pub fn company_replicator_lagged(x: f64, observed_y: f64, p: &GameParams) -> f64 {
    x * (1.0 - x) * company_bracket(observed_y, p)
}

/// `dy/dt` with the government reacting to an observed company mix.
pub fn government_replicator_lagged(y: f64, observed_x: f64, p: &GameParams) -> f64 {
    y * (1.0 - y) * government_bracket(observed_x, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// `t2 + t1 + gs − u2 = 0`: the government bracket does not vanish at a
    /// unique `x`.
    GovernmentBracket,
    /// `gs + t1 + t2 = 0`: the company bracket does not depend on `y`.
    CompanyBracket,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degeneracy::GovernmentBracket => {
                f.write_str("t2 + t1 + g_beta*s - u2 = 0: interior x* undefined")
            }
            Degeneracy::CompanyBracket => {
                f.write_str("g_beta*s + t1 + t2 = 0: interior y* undefined")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    /// The four corners, followed by the interior point when one exists.
    pub points: Vec<StrategyState>,
    /// Set when a zero denominator forced the interior candidate to be skipped.
    pub degeneracy: Option<Degeneracy>,
}

pub fn fixed_points(p: &GameParams) -> FixedPoints {
    let mut points = StrategyState::corners().to_vec();
    let x_den = p.t2 + p.t1 + p.subsidy() - p.u2;
    let y_den = p.company_slope();
    let degeneracy = if x_den == 0.0 {
        Some(Degeneracy::GovernmentBracket)
    } else if y_den == 0.0 {
        Some(Degeneracy::CompanyBracket)
    } else {
        None
    };
    if degeneracy.is_none() {
        let x = p.t2 / x_den;
        let y = (p.pi2 - p.pi1) / y_den;
        let open = |v: f64| v > 0.0 && v < 1.0;
        if open(x) && open(y) {
            points.push(StrategyState::new(x, y));
        }
    }
    FixedPoints { points, degeneracy }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    /// Both eigenvalue real parts strictly negative.
    Ess,
    Saddle,
    /// Unstable node or focus.
    Unstable,
    /// Some real part within [`STABILITY_TOL`] of zero.
    Undetermined,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Ess => "ESS",
            Stability::Saddle => "saddle",
            Stability::Unstable => "unstable",
            Stability::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: StrategyState,
    /// Row-major `[[∂ẋ/∂x, ∂ẋ/∂y], [∂ẏ/∂x, ∂ẏ/∂y]]`.
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    pub classification: Stability,
    pub is_interior: bool,
}

pub fn jacobian(point: StrategyState, p: &GameParams) -> [[f64; 2]; 2] {
    let StrategyState { x, y } = point;
    let gov_slope = p.government_gain_on_adoption() - p.t2;
    [
        [
            (1.0 - 2.0 * x) * company_bracket(y, p),
            x * (1.0 - x) * p.company_slope(),
        ],
        [
            y * (1.0 - y) * gov_slope,
            (1.0 - 2.0 * y) * government_bracket(x, p),
        ],
    ]
}

/// Eigenvalues of a real 2×2 matrix from its trace and determinant.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Avoid cancellation in the smaller-magnitude root.
        let big = if half >= 0.0 {
            half + root
        } else {
            half - root
        };
        let small = if big != 0.0 { det / big } else { half - root };
        let (lo, hi) = if big < small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, -im), Complex64::new(half, im)]
    }
}

pub fn classify_eigenvalues(eigenvalues: &[Complex64; 2]) -> Stability {
    if eigenvalues.iter().any(|l| l.re.abs() < STABILITY_TOL) {
        return Stability::Undetermined;
    }
    match eigenvalues.iter().filter(|l| l.re < 0.0).count() {
        2 => Stability::Ess,
        1 => Stability::Saddle,
        _ => Stability::Unstable,
    }
}

pub fn classify(point: StrategyState, p: &GameParams) -> Equilibrium {
    let jacobian = jacobian(point, p);
    let eigenvalues = eigenvalues_2x2(&jacobian);
    let is_interior = point.x > 0.0 && point.x < 1.0 && point.y > 0.0 && point.y < 1.0;
    Equilibrium {
        point,
        jacobian,
        eigenvalues,
        classification: classify_eigenvalues(&eigenvalues),
        is_interior,
    }
}

/// All fixed points, classified.
pub fn equilibria(p: &GameParams) -> (Vec<Equilibrium>, Option<Degeneracy>) {
    let fp = fixed_points(p);
    let eqs = fp.points.into_iter().map(|pt| classify(pt, p)).collect();
    (eqs, fp.degeneracy)
}

/// Sign regime of (`u2` vs `gs + t1`) × (`π2` vs `π1`).
///
/// | label | `u2` vs `gs + t1` | `π2` vs `π1` |
/// |-------|-------------------|--------------|
/// | 1     | `>`               | `>`          |
/// | 2     | `>`               | `<`          |
/// | 3     | `<`               | `>`          |
/// | 4     | `<`               | `<`          |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combination {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl Combination {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error(
    "parameters sit on a regime boundary (subsidy tie: {subsidy_tie}, profit tie: {profit_tie})"
)]
pub struct BoundaryNotice {
    /// `u2 == gs + t1`.
    pub subsidy_tie: bool,
    /// `π1 == π2`.
    pub profit_tie: bool,
}

pub fn combination_label(p: &GameParams) -> Result<Combination, BoundaryNotice> {
    let cost = p.subsidy() + p.t1;
    let subsidy_tie = p.u2 == cost;
    let profit_tie = p.pi1 == p.pi2;
    if subsidy_tie || profit_tie {
        return Err(BoundaryNotice {
            subsidy_tie,
            profit_tie,
        });
    }
    Ok(match (p.u2 < cost, p.pi2 < p.pi1) {
        (false, false) => Combination::One,
        (false, true) => Combination::Two,
        (true, false) => Combination::Three,
        (true, true) => Combination::Four,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn bimatrix_differences_reference() {
        let p = GameParams::reference(0.5);
        let m = build_bimatrix(&p);
        let at = |y| {
            let e = expected_payoffs(&m, StrategyState::new(0.3, y));
            e.e11 - e.e12
        };
        assert!(close(at(1.0), 3.0));
        assert!(close(at(0.0), 1.0));
        let e = expected_payoffs(&m, StrategyState::new(0.2, 0.8));
        assert!(close(e.e11 - e.e12, 2.6));
    }

    #[test]
    fn degenerate_differences() {
        let p = GameParams {
            t1: 0.0,
            t2: 0.0,
            s: 0.0,
            pi1: 2.0,
            pi2: 2.0,
            ..GameParams::reference(0.0)
        };
        let m = build_bimatrix(&p);
        for y in [0.0, 0.3, 1.0] {
            let e = expected_payoffs(&m, StrategyState::new(0.5, y));
            assert_eq!(e.e11 - e.e12, 0.0);
        }
        let p = GameParams {
            u2: 1.5,
            t1: 1.0,
            s: 0.5,
            t2: 0.0,
            ..GameParams::reference(0.5)
        };
        let m = build_bimatrix(&p);
        for x in [0.0, 0.4, 1.0] {
            let e = expected_payoffs(&m, StrategyState::new(x, 0.5));
            assert_eq!(e.e21 - e.e22, 0.0);
        }
    }

    #[test]
    fn pure_opponent_cells() {
        let p = GameParams {
            u1: 0.7,
            u3: -0.2,
            t: 0.4,
            ..GameParams::reference(1.0)
        };
        let m = build_bimatrix(&p);
        let e = expected_payoffs(&m, StrategyState::new(0.3, 1.0));
        assert_eq!(
            e.e11,
            m.cell(CompanyStrategy::Adopt, GovernmentStrategy::Subsidize)
                .company
        );
        let e = expected_payoffs(&m, StrategyState::new(0.0, 0.6));
        assert_eq!(
            e.e21,
            m.cell(CompanyStrategy::Keep, GovernmentStrategy::Subsidize)
                .government
        );
    }

    #[test]
    fn replicator_values() {
        let p = GameParams::reference(0.5);
        let st = StrategyState::new(0.2, 0.8);
        assert!(close(company_replicator(st, &p), 0.416));
        assert!(close(government_replicator(st, &p), 0.032));
        for z in [0.0, 1.0] {
            assert_eq!(company_replicator(StrategyState::new(z, 0.4), &p), 0.0);
            assert_eq!(government_replicator(StrategyState::new(0.4, z), &p), 0.0);
        }
        let flat = GameParams { pi1: 2.0, ..p };
        for x in [0.1, 0.5, 0.9] {
            assert_eq!(company_replicator(StrategyState::new(x, 0.0), &flat), 0.0);
        }
        let balanced = GameParams { u2: 1.5, ..p };
        for y in [0.1, 0.5, 0.9] {
            assert_eq!(
                government_replicator(StrategyState::new(1.0, y), &balanced),
                0.0
            );
        }
    }

    #[test]
    fn fixed_points_reference_has_only_corners() {
        let fp = fixed_points(&GameParams::reference(0.5));
        assert_eq!(fp.points, StrategyState::corners().to_vec());
        assert!(fp.degeneracy.is_none());
    }

    #[test]
    fn interior_fixed_point() {
        let p = GameParams {
            u2: 0.5,
            t1: 0.5,
            t2: 0.5,
            s: 0.5,
            g_beta: 1.0,
            pi1: 1.0,
            pi2: 1.75,
            ..GameParams::reference(0.5)
        };
        let fp = fixed_points(&p);
        assert_eq!(fp.points.len(), 5);
        let interior = fp.points[4];
        assert!(close(interior.x, 0.5) && close(interior.y, 0.5));
        assert!(close(company_replicator(interior, &p), 0.0));
        assert!(close(government_replicator(interior, &p), 0.0));
        let eq = classify(interior, &p);
        assert!(eq.is_interior);
    }

    #[test]
    fn degenerate_denominator() {
        // t2 + t1 + gs - u2 = 0.5 + 1 + 0.5 - 2 = 0
        let p = GameParams {
            u2: 2.0,
            ..GameParams::reference(0.5)
        };
        let fp = fixed_points(&p);
        assert_eq!(fp.points.len(), 4);
        assert_eq!(fp.degeneracy, Some(Degeneracy::GovernmentBracket));
        let p = GameParams {
            t1: 0.0,
            t2: 0.0,
            s: 0.0,
            ..GameParams::reference(0.0)
        };
        assert_eq!(
            fixed_points(&p).degeneracy,
            Some(Degeneracy::CompanyBracket)
        );
    }

    #[test]
    fn corners_fixed() {
        let p = GameParams::reference(1.25);
        for c in StrategyState::corners() {
            assert_eq!(company_replicator(c, &p), 0.0);
            assert_eq!(government_replicator(c, &p), 0.0);
        }
    }

    #[test]
    fn classify_reference_corners() {
        let p = GameParams::reference(0.5);
        let eq = classify(StrategyState::new(1.0, 0.0), &p);
        assert_eq!(eq.jacobian, [[-1.0, 0.0], [0.0, -1.0]]);
        assert_eq!(eq.classification, Stability::Ess);
        assert!(!eq.is_interior);

        let eq = classify(StrategyState::new(0.0, 0.0), &p);
        assert_eq!(eq.jacobian[0][0], 1.0);
        assert_ne!(eq.classification, Stability::Ess);

        // (0,1): dx bracket K + D = 3 > 0, dy: -(t2) < 0 -> saddle
        assert_eq!(
            classify(StrategyState::new(0.0, 1.0), &p).classification,
            Stability::Saddle
        );
        // (0,0): D = 1 > 0, t2 = 0.5 > 0 -> unstable node
        assert_eq!(
            classify(StrategyState::new(0.0, 0.0), &p).classification,
            Stability::Unstable
        );
        for c in StrategyState::corners() {
            let j = jacobian(c, &p);
            assert_eq!(j[0][1], 0.0);
            assert_eq!(j[1][0], 0.0);
        }
    }

    #[test]
    fn zero_eigenvalue_is_undetermined() {
        // pi1 == pi2 puts a zero on the diagonal at (0,0).
        let p = GameParams {
            pi1: 2.0,
            ..GameParams::reference(0.5)
        };
        assert_eq!(
            classify(StrategyState::new(0.0, 0.0), &p).classification,
            Stability::Undetermined
        );
    }

    #[test]
    fn eigenvalues_complex_pair() {
        let ev = eigenvalues_2x2(&[[0.0, 1.0], [-1.0, 0.0]]);
        assert_eq!(ev[0], Complex64::new(0.0, -1.0));
        assert_eq!(ev[1], Complex64::new(0.0, 1.0));
        assert_eq!(classify_eigenvalues(&ev), Stability::Undetermined);
        let ev = eigenvalues_2x2(&[[2.0, 1.0], [1.0, 2.0]]);
        assert!(close(ev[0].re, 1.0) && close(ev[1].re, 3.0));
        assert_eq!(classify_eigenvalues(&ev), Stability::Unstable);
    }

    #[test]
    fn combination_labels() {
        assert_eq!(
            combination_label(&GameParams::reference(0.5)),
            Ok(Combination::Four)
        );
        let p = GameParams {
            u2: 2.0,
            s: 0.5,
            t1: 1.0,
            ..GameParams::reference(0.5)
        };
        assert_eq!(combination_label(&p), Ok(Combination::Two));
        let tie = GameParams {
            u2: 1.5,
            ..GameParams::reference(0.5)
        };
        assert_eq!(
            combination_label(&tie),
            Err(BoundaryNotice {
                subsidy_tie: true,
                profit_tie: false
            })
        );
        let p = GameParams {
            pi1: 1.0,
            ..GameParams::reference(0.5)
        };
        assert_eq!(combination_label(&p), Ok(Combination::Three));
        let p = GameParams {
            pi1: 1.0,
            u2: 3.0,
            ..GameParams::reference(0.5)
        };
        assert_eq!(combination_label(&p), Ok(Combination::One));
    }

    #[test]
    fn validation() {
        assert!(GameParams::reference(0.5).validate().is_ok());
        let bad = GameParams {
            g_beta: 1.5,
            ..GameParams::reference(0.5)
        };
        assert!(bad.validate().is_err());
        let bad = GameParams {
            t1: -0.1,
            ..GameParams::reference(0.5)
        };
        assert!(bad.validate().is_err());
        assert!(StrategyState::new(1.2, 0.0).validate().is_err());
    }

    #[test]
    fn decay_schedule() {
        let p = GameParams {
            decay_rate: 0.5,
            ..GameParams::reference(1.0)
        };
        assert_eq!(p.at_time(0.0).g_beta, 1.0);
        assert!(close(p.at_time(2.0).g_beta, (-1.0f64).exp()));
        assert_eq!(GameParams::reference(1.0).at_time(7.0).g_beta, 1.0);
    }

    fn game_strategy() -> impl Strategy<Value = GameParams> {
        (
            (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.0f64..3.0),
            (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0, 0.0f64..=1.0),
            (-5.0f64..5.0, -5.0f64..5.0),
        )
            .prop_map(
                |((u1, u2, u3, t), (t1, t2, s, g_beta), (pi1, pi2))| GameParams {
                    u1,
                    u2,
                    u3,
                    t,
                    t1,
                    t2,
                    s,
                    g_beta,
                    pi1,
                    pi2,
                    decay_rate: 0.0,
                },
            )
    }

    proptest! {
        #[test]
        fn replicators_match_bimatrix(p in game_strategy(), x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let st = StrategyState::new(x, y);
            let e = expected_payoffs(&build_bimatrix(&p), st);
            prop_assert!((company_replicator(st, &p) - x * (1.0 - x) * (e.e11 - e.e12)).abs() <= 1e-12);
            prop_assert!((government_replicator(st, &p) - y * (1.0 - y) * (e.e21 - e.e22)).abs() <= 1e-12);
            // E1, E2 are the population averages.
            prop_assert!((x * (e.e11 - e.e1) - x * (1.0 - x) * (e.e11 - e.e12)).abs() <= 1e-12);
            prop_assert!((y * (e.e21 - e.e2) - y * (1.0 - y) * (e.e21 - e.e22)).abs() <= 1e-12);
        }

        #[test]
        fn jacobian_matches_finite_differences(p in game_strategy(), x in 0.05f64..0.95, y in 0.05f64..0.95) {
            let h = 1e-6;
            let f = |x: f64, y: f64| company_replicator(StrategyState::new(x, y), &p);
            let g = |x: f64, y: f64| government_replicator(StrategyState::new(x, y), &p);
            let fd = [
                [(f(x + h, y) - f(x - h, y)) / (2.0 * h), (f(x, y + h) - f(x, y - h)) / (2.0 * h)],
                [(g(x + h, y) - g(x - h, y)) / (2.0 * h), (g(x, y + h) - g(x, y - h)) / (2.0 * h)],
            ];
            let j = jacobian(StrategyState::new(x, y), &p);
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((j[r][c] - fd[r][c]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn interior_point_zeroes_brackets(p in game_strategy()) {
            let fp = fixed_points(&p);
            prop_assert!(fp.points.len() == 4 || fp.points.len() == 5);
            if let Some(pt) = fp.points.get(4) {
                prop_assert!(company_bracket(pt.y, &p).abs() <= 1e-12);
                prop_assert!(government_bracket(pt.x, &p).abs() <= 1e-12);
            }
        }

        #[test]
        fn eigenvalues_match_trace_and_det(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
            let m = [[a, b], [c, d]];
            let ev = eigenvalues_2x2(&m);
            let sum = ev[0] + ev[1];
            let prod = ev[0] * ev[1];
            prop_assert!((sum.re - (a + d)).abs() < 1e-9 && sum.im.abs() < 1e-9);
            prop_assert!((prod.re - (a * d - b * c)).abs() < 1e-9 && prod.im.abs() < 1e-9);
        }

        #[test]
        fn label_scale_invariant(p in game_strategy(), k in 0.1f64..10.0) {
            let scaled = GameParams {
                s: p.s * k, t1: p.t1 * k, t2: p.t2 * k, u2: p.u2 * k, pi1: p.pi1 * k, pi2: p.pi2 * k, ..p
            };
            let cost = p.subsidy() + p.t1;
            prop_assume!((p.u2 - cost).abs() > 1e-9 && (p.pi1 - p.pi2).abs() > 1e-9);
            prop_assert_eq!(combination_label(&p), combination_label(&scaled));
        }
    }
}
