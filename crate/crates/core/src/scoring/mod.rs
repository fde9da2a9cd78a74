//! Closure simulation and the five social-impact indicators.

mod indicators;
mod params;

pub use indicators::{
    composite_score, green_space_score, hospital_access_score, isolation_risk_score, score_all,
    supply_chain_score, transit_desert_score, IndicatorTiming, ScoreCard, ScoreReport,
    ScoringContext,
};
pub use params::{
    GreenParams, HospitalParams, IndicatorParams, IsolationParams, SnapParams, SupplyParams,
    TransitParams, WeightVector,
};
