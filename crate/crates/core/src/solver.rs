//! Outer maximisation of `f(M, L(M))` and recovery of the full allocation.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::envelope::{build_envelope_with, Envelope, EnvelopeOptions};
use crate::error::{Error, Result};
use crate::search;
use crate::validate::ValidatedInstance;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Uniform samples taken inside every envelope segment.
    pub samples_per_segment: usize,
    /// Width of the final golden-section bracket, relative to `M_hi`.
    pub refine_tol: f64,
    pub envelope: EnvelopeOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            samples_per_segment: 512,
            refine_tol: 1e-9,
            envelope: EnvelopeOptions::default(),
        }
    }
}

/// mAP when `M` is rounded to an integer parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rounding {
    #[serde(rename = "M_floor")]
    pub m_floor: f64,
    #[serde(rename = "mAP_floor")]
    pub map_floor: f64,
    /// Absent when `ceil(M_opt)` falls outside the domain.
    #[serde(rename = "M_ceil")]
    pub m_ceil: Option<f64>,
    #[serde(rename = "mAP_ceil")]
    pub map_ceil: Option<f64>,
    /// `mAP_opt − mAP_floor`.
    #[serde(rename = "mAP_floor_delta")]
    pub floor_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub active_segment: usize,
    pub level_index: usize,
    pub objective_evaluations: usize,
    #[serde(rename = "M_hi")]
    pub m_hi: f64,
    pub knots: Vec<f64>,
    /// Set when the downlink cannot carry any parameter.
    pub no_downlink: bool,
    pub rounding: Rounding,
    pub warnings: Vec<String>,
}

/// Optimal split of one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    #[serde(rename = "M_opt")]
    pub m_opt: f64,
    #[serde(rename = "M_opt_int")]
    pub m_opt_int: u64,
    pub q_opt: f64,
    pub rho_opt: f64,
    #[serde(rename = "T_u_opt")]
    pub t_u_opt: f64,
    #[serde(rename = "T_d_opt")]
    pub t_d_opt: f64,
    #[serde(rename = "mAP_star_opt")]
    pub map_star_opt: f64,
    #[serde(rename = "mAP_opt")]
    pub map_opt: f64,
    pub diagnostics: Diagnostics,
}

impl AllocationResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Bits moved on the uplink, `B·S_u·T_u`.
    pub fn uplink_bits(&self, instance: &ValidatedInstance) -> f64 {
        let p = &instance.params;
        p.bandwidth * p.uplink_efficiency * self.t_u_opt
    }

    /// Bits moved on the downlink, `B·S_d·T_d`.
    pub fn downlink_bits(&self, instance: &ValidatedInstance) -> f64 {
        let p = &instance.params;
        p.bandwidth * p.downlink_efficiency * self.t_d_opt
    }
}

/// `f(M, L(M))`.
pub fn objective(m: f64, envelope: &Envelope<'_>) -> Result<f64> {
    let point = envelope.evaluate(m)?;
    Ok(envelope.instance().fusion_at(m, point.value))
}

pub fn solve(instance: &ValidatedInstance) -> Result<AllocationResult> {
    solve_with(instance, &SolveOptions::default())
}

pub fn solve_with(
    instance: &ValidatedInstance,
    options: &SolveOptions,
) -> Result<AllocationResult> {
    let envelope = match build_envelope_with(instance, &options.envelope) {
        Ok(env) => env,
        Err(Error::DegenerateDomain { m_hi }) => return Ok(no_downlink(instance, m_hi)),
        Err(e) => return Err(e),
    };
    let m_hi = envelope.m_hi();
    let evals = Cell::new(0usize);
    let obj = |m: f64| {
        evals.set(evals.get() + 1);
        instance.fusion_at(m, envelope.point_at(m).value)
    };

    let per_segment = options.samples_per_segment.max(1);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for seg in envelope.segments() {
        let start = if samples.is_empty() { 0 } else { 1 };
        for i in start..=per_segment {
            let m = if i == per_segment {
                seg.end
            } else {
                seg.start + (seg.end - seg.start) * i as f64 / per_segment as f64
            };
            samples.push((m, obj(m)));
        }
    }

    // strict improvement keeps the smallest M among ties
    let mut best = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.1 > samples[best].1 {
            best = i;
        }
    }
    let (mut m_opt, mut map_opt) = samples[best];
    let lo = samples[best.saturating_sub(1)].0;
    let hi = samples[(best + 1).min(samples.len() - 1)].0;
    if hi > lo {
        let (m, v, _) = search::golden_section_max_counted(obj, lo, hi, options.refine_tol * m_hi);
        if v > map_opt {
            m_opt = m.clamp(0.0, m_hi);
            map_opt = obj(m_opt);
        }
    }

    let point = envelope.point_at(m_opt);
    let p = &instance.params;
    let t_d = p.downlink_time(m_opt);
    let m_floor = m_opt.floor();
    let m_ceil = m_opt.ceil();
    let map_floor = obj(m_floor);
    let (m_ceil, map_ceil) = if m_ceil <= m_hi {
        (Some(m_ceil), Some(obj(m_ceil)))
    } else {
        (None, None)
    };

    Ok(AllocationResult {
        m_opt,
        m_opt_int: m_floor as u64,
        q_opt: instance.levels[point.level].q,
        rho_opt: point.rho,
        t_u_opt: p.total_time - t_d,
        t_d_opt: t_d,
        map_star_opt: point.value,
        map_opt,
        diagnostics: Diagnostics {
            active_segment: envelope.segment_index(m_opt),
            level_index: point.level,
            objective_evaluations: evals.get(),
            m_hi,
            knots: envelope.knots().to_vec(),
            no_downlink: false,
            rounding: Rounding {
                m_floor,
                map_floor,
                m_ceil,
                map_ceil,
                floor_delta: map_opt - map_floor,
            },
            warnings: instance.warnings().to_vec(),
        },
    })
}

/// Allocation when no model parameter fits on the downlink: `M = 0` and the
/// whole cycle goes to the uplink.
fn no_downlink(instance: &ValidatedInstance, m_hi: f64) -> AllocationResult {
    let p = &instance.params;
    let mut best = (f64::NEG_INFINITY, 0usize, 0.0);
    for (j, level) in instance.levels.iter().enumerate() {
        let cap = (p.uplink_efficiency * p.bandwidth / (p.frame_rate * p.frame_params * level.q))
            .clamp(0.0, 1.0);
        let rho = instance.rho_best()[j].min(cap);
        let v = level.g.eval(rho);
        if v > best.0 {
            best = (v, j, rho);
        }
    }
    let map_pre = instance.fusion.map_pre;
    let mut warnings = instance.warnings().to_vec();
    warnings.push(format!(
        "no downlink capacity (M_hi = {m_hi}); reporting the no-update allocation"
    ));
    AllocationResult {
        m_opt: 0.0,
        m_opt_int: 0,
        q_opt: instance.levels[best.1].q,
        rho_opt: best.2,
        t_u_opt: p.total_time,
        t_d_opt: 0.0,
        map_star_opt: best.0,
        map_opt: map_pre,
        diagnostics: Diagnostics {
            active_segment: 0,
            level_index: best.1,
            objective_evaluations: 0,
            m_hi,
            knots: Vec::new(),
            no_downlink: true,
            rounding: Rounding {
                m_floor: 0.0,
                map_floor: map_pre,
                m_ceil: None,
                map_ceil: None,
                floor_delta: 0.0,
            },
            warnings,
        },
    }
}
