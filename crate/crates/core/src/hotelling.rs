//! Consumer demand on a Hotelling line.
//!
//! Consumers are spread uniformly over `[0, 1]`. The innovative equipment
//! (IPTE) sits at `X = 0` and the traditional equipment (TPTE) at `X = 1`;
//! a consumer at `X` pays a mismatch cost `T·X` for the first and
//! `T·(1 − X)` for the second. The indifferent consumer splits the market,
//! and the split times each firm's unit margin gives the firm profits that
//! feed the game layer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HotellingError {
    #[error("mismatch cost t must be positive and finite, got {0}")]
    NonPositiveMismatchCost(f64),
    #[error(
        "base values must coincide (v1 = {v1}, v2 = {v2}) while assume_equal_base_value is on"
    )]
    UnequalBaseValues { v1: f64, v2: f64 },
    #[error("demand parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

fn default_true() -> bool {
    true
}

/// Demand-side parameters. Field names follow the config file keys.
///
/// Consumer payment prices are `p1`/`p2`; the firms' selling prices are
/// `sell_p1`/`sell_p2`, which are independent inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandParams {
    /// Unit mismatch cost per unit distance.
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    /// Preference weight for energy saving.
    pub q: f64,
    pub e1: f64,
    pub e2: f64,
    /// Consumer subsidy for IPTE.
    pub h1: f64,
    /// Consumer sensitivity to the subsidy.
    pub mu1: f64,
    pub p1: f64,
    pub p2: f64,
    pub sell_p1: f64,
    pub sell_p2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Require `v1 == v2`. When off, the base-value gap enters the
    /// indifference point.
    #[serde(default = "default_true")]
    pub assume_equal_base_value: bool,
}

impl DemandParams {
    /// Both products identical: the market splits at one half in corrected mode.
    pub fn symmetric() -> Self {
        Self {
            t: 1.0,
            v1: 1.0,
            v2: 1.0,
            q: 0.0,
            e1: 0.0,
            e2: 0.0,
            h1: 0.0,
            mu1: 0.0,
            p1: 1.0,
            p2: 1.0,
            sell_p1: 2.0,
            sell_p2: 2.0,
            c1: 1.0,
            c2: 1.0,
            assume_equal_base_value: true,
        }
    }

    pub fn validate(&self) -> Result<(), HotellingError> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(HotellingError::NonPositiveMismatchCost(self.t));
        }
        let finite = [
            ("v1", self.v1),
            ("v2", self.v2),
            ("e1", self.e1),
            ("e2", self.e2),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(HotellingError::InvalidParameter {
                    name,
                    requirement: "finite",
                    value,
                });
            }
        }
        let nonneg = [
            ("q", self.q),
            ("h1", self.h1),
            ("mu1", self.mu1),
            ("p1", self.p1),
            ("p2", self.p2),
            ("sell_p1", self.sell_p1),
            ("sell_p2", self.sell_p2),
            ("c1", self.c1),
            ("c2", self.c2),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(HotellingError::InvalidParameter {
                    name,
                    requirement: "nonnegative and finite",
                    value,
                });
            }
        }
        if self.assume_equal_base_value && self.v1 != self.v2 {
            return Err(HotellingError::UnequalBaseValues {
                v1: self.v1,
                v2: self.v2,
            });
        }
        Ok(())
    }

    fn base_value_gap(&self) -> f64 {
        if self.assume_equal_base_value {
            0.0
        } else {
            self.v1 - self.v2
        }
    }
}

/// Which numerator the indifference point uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaMode {
    /// `+T` in the numerator: the exact solution of `U1(X) = U2(X)`.
    #[default]
    Corrected,
    /// `−T` in the numerator. Kept for reproducing legacy results; it does
    /// not satisfy `U1(X) = U2(X)`.
    PaperVerbatim,
}

impl std::str::FromStr for FormulaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "paper-verbatim" => Ok(Self::PaperVerbatim),
            other => Err(format!(
                "unknown mode `{other}` (expected `corrected` or `paper-verbatim`)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub x_star_raw: f64,
    pub x_star: f64,
    pub share_new: f64,
    pub share_traditional: f64,
    pub pi1: f64,
    pub pi2: f64,
    /// `x_star_raw` was outside `[0, 1]`.
    pub clamped: bool,
    /// The indifferent consumer finds IPTE less inconvenient than TPTE,
    /// i.e. `T·X* < T·(1 − X*)`.
    pub inconvenience_asymmetry_holds: bool,
}

/// Utility of the innovative equipment for a consumer at `x`.
pub fn utility_new(params: &DemandParams, x: f64) -> f64 {
    params.v1 - params.p1 + params.q * params.e1 - params.t * x + params.h1 * params.mu1
}

/// Utility of the traditional equipment for a consumer at `x`.
pub fn utility_traditional(params: &DemandParams, x: f64) -> f64 {
    params.v2 - params.p2 + params.q * params.e2 - params.t * (1.0 - x)
}

/// Returns `(x_star_raw, x_star)` where `x_star` is clamped to `[0, 1]`.
pub fn indifference_point(
    params: &DemandParams,
    mode: FormulaMode,
) -> Result<(f64, f64), HotellingError> {
    params.validate()?;
    let advantage = (params.p2 - params.p1)
        + params.q * (params.e1 - params.e2)
        + params.h1 * params.mu1
        + params.base_value_gap();
    let numerator = match mode {
        FormulaMode::Corrected => advantage + params.t,
        FormulaMode::PaperVerbatim => advantage - params.t,
    };
    let raw = numerator / (2.0 * params.t);
    Ok((raw, raw.clamp(0.0, 1.0)))
}

pub fn market_outcome(
    params: &DemandParams,
    mode: FormulaMode,
) -> Result<MarketOutcome, HotellingError> {
    let (x_star_raw, x_star) = indifference_point(params, mode)?;
    let share_traditional = 1.0 - x_star;
    Ok(MarketOutcome {
        x_star_raw,
        x_star,
        share_new: x_star,
        share_traditional,
        pi1: (params.sell_p1 - params.c1) * x_star,
        pi2: (params.sell_p2 - params.c2) * share_traditional,
        clamped: x_star != x_star_raw,
        inconvenience_asymmetry_holds: x_star < 0.5,
    })
}
