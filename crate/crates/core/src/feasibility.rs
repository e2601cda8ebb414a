//! Constraint-level feasibility check for a candidate allocation.

use std::fmt;

use serde::Serialize;

use crate::model::{ProblemInstance, SystemParams};

/// Slack allowed on every constraint after dividing by its natural scale.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// A candidate allocation `(M, ρ, q, T_u, T_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    #[serde(rename = "M")]
    pub m: f64,
    pub rho: f64,
    pub q: f64,
    #[serde(rename = "T_u")]
    pub t_u: f64,
    #[serde(rename = "T_d")]
    pub t_d: f64,
}

impl Candidate {
    /// Candidate that spends exactly `M·b/(B·S_d)` on the downlink and the rest of the cycle on the uplink.
    pub fn with_full_split(m: f64, rho: f64, q: f64, params: &SystemParams) -> Self {
        let t_d = params.downlink_time(m);
        Candidate {
            m,
            rho,
            q,
            t_u: params.total_time - t_d,
            t_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Constraint {
    /// `0 ≤ ρ ≤ 1`
    UploadProportion,
    /// `q ∈ Ω`
    LevelMembership,
    /// `T_u + T_d ≤ T_total`
    TimeBudget,
    /// `B·S_u·T_u/T_total ≥ N·ρ·F·q`
    UplinkCapacity,
    /// `B·S_d·T_d/T_total ≥ M·b/T_total`
    DownlinkCapacity,
    /// `0 ≤ M ≤ M_max`
    ModelSize,
}

impl Constraint {
    pub const ALL: [Constraint; 6] = [
        Constraint::UploadProportion,
        Constraint::LevelMembership,
        Constraint::TimeBudget,
        Constraint::UplinkCapacity,
        Constraint::DownlinkCapacity,
        Constraint::ModelSize,
    ];

    /// Short identifier used in violation reports.
    pub fn label(self) -> &'static str {
        match self {
            Constraint::UploadProportion | Constraint::LevelMembership => "7b",
            Constraint::TimeBudget => "7c",
            Constraint::UplinkCapacity => "7d",
            Constraint::DownlinkCapacity => "7e",
            Constraint::ModelSize => "7f",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {:?}", self.label(), self)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Constraint>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Bit mask of violated physical constraints; `q` membership is not checked here.
#[inline]
pub(crate) fn violation_mask(c: &Candidate, p: &SystemParams) -> u8 {
    let exceeds = |lhs: f64, rhs: f64, scale: f64| !(lhs - rhs <= CONSTRAINT_TOL * scale);
    let mut mask = 0;
    if exceeds(-c.rho, 0.0, 1.0) || exceeds(c.rho, 1.0, 1.0) {
        mask |= Constraint::UploadProportion.bit();
    }
    if exceeds(c.t_u + c.t_d, p.total_time, p.total_time) {
        mask |= Constraint::TimeBudget.bit();
    }
    let uplink_scale = p.bandwidth * p.uplink_efficiency;
    let demand = p.frame_rate * c.rho * p.frame_params * c.q;
    if exceeds(demand, uplink_scale * c.t_u / p.total_time, uplink_scale) {
        mask |= Constraint::UplinkCapacity.bit();
    }
    let downlink_scale = p.bandwidth * p.downlink_efficiency;
    if exceeds(
        c.m * p.bits(),
        downlink_scale * c.t_d,
        downlink_scale * p.total_time,
    ) {
        mask |= Constraint::DownlinkCapacity.bit();
    }
    if exceeds(-c.m, 0.0, p.max_params) || exceeds(c.m, p.max_params, p.max_params) {
        mask |= Constraint::ModelSize.bit();
    }
    mask
}

/// Checks every constraint of the allocation problem and lists those violated.
pub fn check_feasible(candidate: &Candidate, instance: &ProblemInstance) -> FeasibilityReport {
    let mut mask = violation_mask(candidate, &instance.params);
    if instance.level_index(candidate.q).is_none() {
        mask |= Constraint::LevelMembership.bit();
    }
    FeasibilityReport {
        violations: Constraint::ALL
            .into_iter()
            .filter(|c| mask & c.bit() != 0)
            .collect(),
    }
}
