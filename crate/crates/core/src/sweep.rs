//! Parameter sweeps with baseline comparators and CSV output.

use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, Candidate};
use crate::model::ProblemInstance;
use crate::solver::{solve_with, SolveOptions};
use crate::validate::{validate_instance, ValidatedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweptParam {
    #[serde(rename = "B")]
    Bandwidth,
    #[serde(rename = "N")]
    FrameRate,
    #[serde(rename = "T_total")]
    TotalTime,
    #[serde(rename = "M_max")]
    MaxParams,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::Bandwidth => "B",
            SweptParam::FrameRate => "N",
            SweptParam::TotalTime => "T_total",
            SweptParam::MaxParams => "M_max",
        }
    }

    pub fn apply(self, instance: &mut ProblemInstance, value: f64) {
        let p = &mut instance.params;
        match self {
            SweptParam::Bandwidth => p.bandwidth = value,
            SweptParam::FrameRate => p.frame_rate = value,
            SweptParam::TotalTime => p.total_time = value,
            SweptParam::MaxParams => p.max_params = value,
        }
    }
}

impl FromStr for SweptParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "B" => SweptParam::Bandwidth,
            "N" => SweptParam::FrameRate,
            "T_total" => SweptParam::TotalTime,
            "M_max" => SweptParam::MaxParams,
            other => {
                return Err(Error::Sweep(format!(
                    "unknown parameter '{other}' (expected B, N, T_total or M_max)"
                )))
            }
        })
    }
}

impl fmt::Display for SweptParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A non-adaptive policy: fixed upload proportion, level and model size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedStrategyBaseline {
    pub rho_fix: f64,
    pub q_fix: f64,
    #[serde(rename = "M_fix")]
    pub m_fix: f64,
}

impl FixedStrategyBaseline {
    pub fn check(&self, instance: &ProblemInstance) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho_fix) {
            return Err(Error::Sweep(format!(
                "rho_fix = {} outside [0, 1]",
                self.rho_fix
            )));
        }
        if instance.level_index(self.q_fix).is_none() {
            return Err(Error::Sweep(format!(
                "q_fix = {} is not a level",
                self.q_fix
            )));
        }
        if !(0.0..=instance.params.max_params).contains(&self.m_fix) {
            return Err(Error::Sweep(format!(
                "M_fix = {} outside [0, M_max]",
                self.m_fix
            )));
        }
        Ok(())
    }

    /// mAP of the policy on `instance`. `M_fix` is clipped to the downlink
    /// capacity; when the fixed upload then does not fit, the update is lost
    /// and the end model stays at `mAP_pre`.
    pub fn evaluate(&self, instance: &ValidatedInstance) -> f64 {
        let p = &instance.params;
        let m = self.m_fix.min(p.m_hi()).max(0.0);
        let cand = Candidate::with_full_split(m, self.rho_fix, self.q_fix, p);
        match instance.level_index(self.q_fix) {
            Some(j) if check_feasible(&cand, instance).is_feasible() => {
                instance.fusion_at(m, instance.levels[j].g.eval(self.rho_fix))
            }
            _ => instance.fusion.map_pre,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    /// The end model never receives an update.
    NoneUpdate,
    Fixed(FixedStrategyBaseline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweptParam,
    pub values: Vec<f64>,
    pub baselines: Vec<Baseline>,
}

impl SweepSpec {
    pub fn new(param: SweptParam, values: Vec<f64>, baselines: Vec<Baseline>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Sweep("no sweep values".into()));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Sweep(
                "sweep values must be strictly positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Sweep(
                "sweep values must be strictly increasing".into(),
            ));
        }
        Ok(SweepSpec {
            param,
            values,
            baselines,
        })
    }

    /// `steps` values from `from` to `to`, evenly spaced or geometric.
    pub fn range(
        param: SweptParam,
        from: f64,
        to: f64,
        steps: usize,
        geometric: bool,
        baselines: Vec<Baseline>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Sweep("steps must be at least 1".into()));
        }
        let values = if steps == 1 {
            vec![from]
        } else {
            (0..steps)
                .map(|i| {
                    if i + 1 == steps {
                        return to;
                    }
                    let t = i as f64 / (steps - 1) as f64;
                    if geometric {
                        from * (to / from).powf(t)
                    } else {
                        from + (to - from) * t
                    }
                })
                .collect()
        };
        Self::new(param, values, baselines)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    NoDownlink,
    Invalid,
    Failed,
}

/// One sweep point. Missing values serialise as empty CSV cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: SweptParam,
    pub value: f64,
    pub status: PointStatus,
    #[serde(rename = "mAP_opt")]
    pub map_opt: Option<f64>,
    #[serde(rename = "mAP_none_update")]
    pub map_none_update: Option<f64>,
    #[serde(rename = "mAP_fixed")]
    pub map_fixed: Option<f64>,
    #[serde(rename = "M_opt")]
    pub m_opt: Option<f64>,
    pub q_opt: Option<f64>,
    pub rho_opt: Option<f64>,
    #[serde(rename = "T_u_opt")]
    pub t_u_opt: Option<f64>,
    #[serde(rename = "T_d_opt")]
    pub t_d_opt: Option<f64>,
    pub uplink_bits: Option<f64>,
    pub downlink_bits: Option<f64>,
    pub uplink_fraction: Option<f64>,
    pub downlink_fraction: Option<f64>,
}

impl SweepRow {
    fn empty(param: SweptParam, value: f64, status: PointStatus) -> Self {
        SweepRow {
            param,
            value,
            status,
            map_opt: None,
            map_none_update: None,
            map_fixed: None,
            m_opt: None,
            q_opt: None,
            rho_opt: None,
            t_u_opt: None,
            t_d_opt: None,
            uplink_bits: None,
            downlink_bits: None,
            uplink_fraction: None,
            downlink_fraction: None,
        }
    }

    pub fn overhead_split(&self) -> Option<OverheadSplit> {
        Some(overhead_split(self.uplink_bits?, self.downlink_bits?))
    }
}

/// Uplink and downlink shares of the bits moved in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverheadSplit {
    pub uplink: f64,
    pub downlink: f64,
    /// False when both budgets are zero; the fractions are then `(0, 0)`.
    pub defined: bool,
}

/// Normalises `(B·S_u·T_u, B·S_d·T_d)` by their sum.
pub fn overhead_split(uplink_bits: f64, downlink_bits: f64) -> OverheadSplit {
    let total = uplink_bits + downlink_bits;
    if !(total > 0.0) {
        return OverheadSplit {
            uplink: 0.0,
            downlink: 0.0,
            defined: false,
        };
    }
    OverheadSplit {
        uplink: uplink_bits / total,
        downlink: downlink_bits / total,
        defined: true,
    }
}

fn run_point(
    base: &ProblemInstance,
    spec: &SweepSpec,
    value: f64,
    options: &SolveOptions,
) -> SweepRow {
    let mut inst = base.clone();
    spec.param.apply(&mut inst, value);
    let validated = match validate_instance(inst) {
        Ok(v) => v,
        Err(_) => return SweepRow::empty(spec.param, value, PointStatus::Invalid),
    };
    let result = match solve_with(&validated, options) {
        Ok(r) => r,
        Err(_) => return SweepRow::empty(spec.param, value, PointStatus::Failed),
    };
    let status = if result.diagnostics.no_downlink {
        PointStatus::NoDownlink
    } else {
        PointStatus::Ok
    };
    let up = result.uplink_bits(&validated);
    let down = result.downlink_bits(&validated);
    let split = overhead_split(up, down);
    let mut row = SweepRow {
        map_opt: Some(result.map_opt),
        m_opt: Some(result.m_opt),
        q_opt: Some(result.q_opt),
        rho_opt: Some(result.rho_opt),
        t_u_opt: Some(result.t_u_opt),
        t_d_opt: Some(result.t_d_opt),
        uplink_bits: Some(up),
        downlink_bits: Some(down),
        uplink_fraction: split.defined.then_some(split.uplink),
        downlink_fraction: split.defined.then_some(split.downlink),
        ..SweepRow::empty(spec.param, value, status)
    };
    for baseline in &spec.baselines {
        match baseline {
            Baseline::NoneUpdate => row.map_none_update = Some(validated.fusion.map_pre),
            Baseline::Fixed(fixed) => row.map_fixed = Some(fixed.evaluate(&validated)),
        }
    }
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(instance: &ValidatedInstance, spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with(instance, spec, &SolveOptions::default())
}

/// Rows come back in the order of `spec.values` regardless of scheduling.
pub fn run_sweep_with(
    instance: &ValidatedInstance,
    spec: &SweepSpec,
    options: &SolveOptions,
) -> Result<SweepTable> {
    for baseline in &spec.baselines {
        if let Baseline::Fixed(fixed) = baseline {
            fixed.check(instance)?;
        }
    }
    let base = instance.instance();
    let rows = spec
        .values
        .par_iter()
        .map(|&v| run_point(base, spec, v, options))
        .collect();
    Ok(SweepTable { rows })
}

impl SweepTable {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(SweepTable { rows })
    }
}
