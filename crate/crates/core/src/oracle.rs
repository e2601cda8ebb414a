//! Exhaustive grid search over `(M, q, ρ)`, independent of the envelope.
//!
//! Every grid tuple is turned into a full-split candidate, screened with the
//! constraint-level feasibility check and scored with `f(M, g_j(ρ))`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::feasibility::{violation_mask, Candidate};
use crate::validate::ValidatedInstance;

/// Default cap on `n_M · n_rho · |Ω|`.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest trace the oracle will materialise.
pub const MAX_TRACE_ROWS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n_m: usize,
    pub n_rho: usize,
}

impl GridSpec {
    pub fn new(n_m: usize, n_rho: usize) -> Result<Self> {
        if n_m < 2 || n_rho < 2 {
            return Err(Error::Schema(format!(
                "grid needs at least 2 points per axis, got {n_m}x{n_rho}"
            )));
        }
        Ok(GridSpec { n_m, n_rho })
    }

    pub fn m_at(&self, i: usize, m_hi: f64) -> f64 {
        if i + 1 == self.n_m {
            m_hi
        } else {
            m_hi * i as f64 / (self.n_m - 1) as f64
        }
    }

    pub fn rho_at(&self, k: usize) -> f64 {
        if k + 1 == self.n_rho {
            1.0
        } else {
            k as f64 / (self.n_rho - 1) as f64
        }
    }

    pub fn m_step(&self, m_hi: f64) -> f64 {
        m_hi / (self.n_m - 1) as f64
    }

    pub fn rho_step(&self) -> f64 {
        1.0 / (self.n_rho - 1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub budget: u128,
    pub trace: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            budget: DEFAULT_BUDGET,
            trace: false,
        }
    }
}

/// A scored feasible grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCandidate {
    #[serde(rename = "M")]
    pub m: f64,
    pub rho: f64,
    pub q: f64,
    pub level: usize,
    #[serde(rename = "T_u")]
    pub t_u: f64,
    #[serde(rename = "T_d")]
    pub t_d: f64,
    #[serde(rename = "mAP_star")]
    pub map_star: f64,
    #[serde(rename = "mAP")]
    pub map: f64,
}

impl OracleCandidate {
    /// Order used for the argmax: higher mAP, then smaller M, then higher
    /// mAP*, then smaller level index, then smaller ρ.
    fn better_than(&self, other: &OracleCandidate) -> bool {
        let key = self
            .map
            .total_cmp(&other.map)
            .then(other.m.total_cmp(&self.m))
            .then(self.map_star.total_cmp(&other.map_star))
            .then(other.level.cmp(&self.level))
            .then(other.rho.total_cmp(&self.rho));
        key == Ordering::Greater
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best: OracleCandidate,
    pub evaluated: u64,
    pub feasible: u64,
    #[serde(skip)]
    pub trace: Option<Vec<OracleCandidate>>,
}

fn pick(a: Option<OracleCandidate>, b: Option<OracleCandidate>) -> Option<OracleCandidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.better_than(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

pub fn brute_force(
    instance: &ValidatedInstance,
    grid: GridSpec,
    options: &OracleOptions,
) -> Result<OracleResult> {
    let n_levels = instance.levels.len();
    let requested = grid.n_m as u128 * grid.n_rho as u128 * n_levels as u128;
    if requested > options.budget {
        return Err(Error::Budget {
            requested,
            budget: options.budget,
        });
    }
    if options.trace && requested > MAX_TRACE_ROWS as u128 {
        return Err(Error::Budget {
            requested,
            budget: MAX_TRACE_ROWS as u128,
        });
    }

    let p = &instance.params;
    let m_hi = p.m_hi().max(0.0);
    let rhos: Vec<f64> = (0..grid.n_rho).map(|k| grid.rho_at(k)).collect();
    let g_values: Vec<Vec<f64>> = instance
        .levels
        .iter()
        .map(|l| rhos.iter().map(|&r| l.g.eval(r)).collect())
        .collect();

    let per_m = |i: usize| {
        let m = grid.m_at(i, m_hi);
        let weight = instance.fusion.phi.eval(m / p.max_params);
        let mut best: Option<OracleCandidate> = None;
        let mut trace = Vec::new();
        let mut feasible = 0u64;
        for (j, level) in instance.levels.iter().enumerate() {
            for (k, &rho) in rhos.iter().enumerate() {
                let cand = Candidate::with_full_split(m, rho, level.q, p);
                if violation_mask(&cand, p) != 0 {
                    continue;
                }
                feasible += 1;
                let map_star = g_values[j][k];
                let scored = OracleCandidate {
                    m,
                    rho,
                    q: level.q,
                    level: j,
                    t_u: cand.t_u,
                    t_d: cand.t_d,
                    map_star,
                    map: instance.fusion.blend_weighted(weight, map_star),
                };
                if options.trace {
                    trace.push(scored);
                }
                best = pick(best, Some(scored));
            }
        }
        (best, feasible, trace)
    };

    let (best, feasible, trace) = (0..grid.n_m).into_par_iter().map(per_m).reduce(
        || (None, 0, Vec::new()),
        |mut a, b| {
            a.0 = pick(a.0, b.0);
            a.1 += b.1;
            a.2.extend(b.2);
            a
        },
    );

    let best = best.ok_or_else(|| Error::Schema("no feasible grid point".into()))?;
    Ok(OracleResult {
        best,
        evaluated: requested as u64,
        feasible,
        trace: options.trace.then_some(trace),
    })
}

/// Grid-resolution tolerance `ε(grid)`.
///
/// The M-axis term is the largest objective slope seen on a grid four times
/// finer than the oracle's, times the oracle's M step. The ρ-axis term is the
/// largest change of any `g_j` over one ρ step, which bounds the objective
/// loss from rounding ρ down to the grid.
pub fn grid_resolution_bound(envelope: &Envelope<'_>, grid: GridSpec) -> f64 {
    let inst = envelope.instance();
    let m_hi = envelope.m_hi();
    let fine = 4 * (grid.n_m - 1);
    let h = m_hi / fine as f64;
    let obj = |m: f64| inst.fusion_at(m, envelope.point_at(m).value);
    let mut prev = obj(0.0);
    let mut slope = 0.0f64;
    for i in 1..=fine {
        let cur = obj(h * i as f64);
        slope = slope.max((cur - prev).abs() / h);
        prev = cur;
    }
    let eps_m = slope * grid.m_step(m_hi);

    let eps_rho = inst
        .levels
        .iter()
        .map(|l| {
            (1..grid.n_rho)
                .map(|k| (l.g.eval(grid.rho_at(k)) - l.g.eval(grid.rho_at(k - 1))).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    eps_m + eps_rho
}
