//! Upper boundary of the feasible region in the `(M, mAP*)` plane.
//!
//! For a fixed level `j`, sending `M` parameters leaves the uplink
//! `T_total − M·b/(B·S_d)` seconds, which caps the upload proportion at
//! `ρ_cap(M) = S_u/(N·F·q_j) · (B − M·b/(T_total·S_d))`. Since `g_j` is concave
//! with maximiser `ρ_best,j`, the best reachable edge performance is
//! `L_j(M) = g_j(min(ρ_best,j, ρ_cap(M)))`: a plateau at `g_j(ρ_best,j)` up to
//! the threshold where `ρ_cap` drops below `ρ_best,j`, then a concave
//! non-increasing tail. The envelope `L(M) = max_j L_j(M)` is built with
//! explicit knots at thresholds, cap saturation points and pairwise crossings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::search;
use crate::validate::ValidatedInstance;

/// Largest feasible upload proportion for level `q` when `m` parameters go down.
fn raw_cap(m: f64, q: f64, p: &SystemParams) -> f64 {
    p.uplink_efficiency / (p.frame_rate * p.frame_params * q)
        * (p.bandwidth - m * p.bits() / (p.total_time * p.downlink_efficiency))
}

/// `clamp(S_u/(N·F·q_j)·(B − M·b/(T_total·S_d)), 0, 1)`.
pub fn rho_cap(m: f64, level: usize, instance: &ValidatedInstance) -> Result<f64> {
    let m_hi = instance.params.m_hi();
    if !(0.0..=m_hi).contains(&m) {
        return Err(Error::domain("M", m, 0.0, m_hi));
    }
    let q = instance.levels[level].q;
    Ok(raw_cap(m, q, &instance.params).clamp(0.0, 1.0))
}

/// Closed-form boundary `L_{M,j}` of a single level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerLevelBoundary {
    pub level: usize,
    pub q: f64,
    pub rho_best: f64,
    pub plateau_value: f64,
    /// End of the constant segment, clamped to `[0, domain_hi]`.
    pub threshold: f64,
    pub domain_hi: f64,
}

impl PerLevelBoundary {
    /// Upload proportion used at `m`, `min(ρ_best, ρ_cap(m))`.
    pub fn rho_at(&self, m: f64, params: &SystemParams) -> f64 {
        self.rho_best
            .min(raw_cap(m, self.q, params).clamp(0.0, 1.0))
    }
}

pub fn per_level_boundary(level: usize, instance: &ValidatedInstance) -> PerLevelBoundary {
    let p = &instance.params;
    let q = instance.levels[level].q;
    let rho_best = instance.rho_best()[level];
    let domain_hi = p.m_hi();
    let threshold = p.total_time * p.downlink_efficiency / p.bits()
        * (p.bandwidth - rho_best * q * p.frame_rate * p.frame_params / p.uplink_efficiency);
    PerLevelBoundary {
        level,
        q,
        rho_best,
        plateau_value: instance.levels[level].g.eval(rho_best),
        threshold: threshold.clamp(0.0, domain_hi),
        domain_hi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Constant,
    ConcaveDecreasing,
}

/// Interval between consecutive knots on which one level wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub level: usize,
    pub kind: SegmentKind,
}

/// Envelope value at one `M`, with the winning level and its upload proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub value: f64,
    pub level: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EnvelopeOptions {
    /// Grid size of the scan for crossings between level pairs.
    pub scan_points: usize,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions { scan_points: 4096 }
    }
}

#[derive(Debug, Clone)]
pub struct Envelope<'a> {
    instance: &'a ValidatedInstance,
    boundaries: Vec<PerLevelBoundary>,
    knots: Vec<f64>,
    segments: Vec<Segment>,
    m_hi: f64,
}

pub fn build_envelope(instance: &ValidatedInstance) -> Result<Envelope<'_>> {
    build_envelope_with(instance, &EnvelopeOptions::default())
}

pub fn build_envelope_with<'a>(
    instance: &'a ValidatedInstance,
    options: &EnvelopeOptions,
) -> Result<Envelope<'a>> {
    let p = &instance.params;
    let m_hi = p.m_hi();
    if !(m_hi > 0.0 && m_hi.is_finite()) {
        return Err(Error::DegenerateDomain { m_hi });
    }
    let boundaries: Vec<_> = (0..instance.levels.len())
        .map(|j| per_level_boundary(j, instance))
        .collect();

    let mut env = Envelope {
        instance,
        boundaries,
        knots: Vec::new(),
        segments: Vec::new(),
        m_hi,
    };

    let mut knots = vec![0.0, m_hi];
    for b in &env.boundaries {
        knots.push(b.threshold);
        // where the raw cap reaches 1
        let saturation = p.total_time * p.downlink_efficiency / p.bits()
            * (p.bandwidth - b.q * p.frame_rate * p.frame_params / p.uplink_efficiency);
        if saturation > 0.0 && saturation < m_hi {
            knots.push(saturation);
        }
    }
    knots.extend(env.crossings(options.scan_points.max(2)));

    knots.sort_by(f64::total_cmp);
    let merge_tol = 1e-12 * m_hi;
    let mut merged: Vec<f64> = Vec::with_capacity(knots.len());
    for k in knots {
        let k = k.clamp(0.0, m_hi);
        match merged.last() {
            Some(&last) if k - last <= merge_tol => {}
            _ => merged.push(k),
        }
    }
    if let Some(last) = merged.last_mut() {
        if m_hi - *last <= merge_tol {
            *last = m_hi;
        } else {
            merged.push(m_hi);
        }
    }
    if merged.len() < 2 {
        merged = vec![0.0, m_hi];
    }

    env.segments = merged
        .windows(2)
        .map(|w| {
            let level = env.point_at(0.5 * (w[0] + w[1])).level;
            let kind = if w[1] <= env.boundaries[level].threshold {
                SegmentKind::Constant
            } else {
                SegmentKind::ConcaveDecreasing
            };
            Segment {
                start: w[0],
                end: w[1],
                level,
                kind,
            }
        })
        .collect();
    env.knots = merged;
    Ok(env)
}

impl<'a> Envelope<'a> {
    pub fn instance(&self) -> &'a ValidatedInstance {
        self.instance
    }

    pub fn boundaries(&self) -> &[PerLevelBoundary] {
        &self.boundaries
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn m_hi(&self) -> f64 {
        self.m_hi
    }

    /// `L_{M,j}(m)` for one level, without domain checks.
    pub fn level_value(&self, level: usize, m: f64) -> f64 {
        let b = &self.boundaries[level];
        self.instance.levels[level]
            .g
            .eval(b.rho_at(m, &self.instance.params))
    }

    /// `L_M(m)`, the winning level (smallest index on ties) and `ρ_opt(m)`.
    pub fn evaluate(&self, m: f64) -> Result<EnvelopePoint> {
        if !(0.0..=self.m_hi).contains(&m) {
            return Err(Error::domain("M", m, 0.0, self.m_hi));
        }
        Ok(self.point_at(m))
    }

    pub(crate) fn point_at(&self, m: f64) -> EnvelopePoint {
        let params = &self.instance.params;
        let mut best = EnvelopePoint {
            value: f64::NEG_INFINITY,
            level: 0,
            rho: 0.0,
        };
        for (j, b) in self.boundaries.iter().enumerate() {
            let rho = b.rho_at(m, params);
            let value = self.instance.levels[j].g.eval(rho);
            if value > best.value {
                best = EnvelopePoint {
                    value,
                    level: j,
                    rho,
                };
            }
        }
        best
    }

    /// Index of the segment containing `m`; knots belong to the segment on their right.
    pub fn segment_index(&self, m: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= m);
        i.saturating_sub(1).min(self.segments.len() - 1)
    }

    /// `k` evenly spaced samples over `[0, M_hi]`.
    pub fn sample(&self, k: usize) -> Vec<(f64, EnvelopePoint)> {
        let k = k.max(2);
        (0..k)
            .map(|i| {
                let m = if i + 1 == k {
                    self.m_hi
                } else {
                    self.m_hi * i as f64 / (k - 1) as f64
                };
                (m, self.point_at(m))
            })
            .collect()
    }

    fn crossings(&self, scan_points: usize) -> Vec<f64> {
        let n_levels = self.boundaries.len();
        if n_levels < 2 {
            return Vec::new();
        }
        let grid: Vec<f64> = (0..scan_points)
            .map(|i| self.m_hi * i as f64 / (scan_points - 1) as f64)
            .collect();
        let values: Vec<Vec<f64>> = (0..n_levels)
            .map(|j| grid.iter().map(|&m| self.level_value(j, m)).collect())
            .collect();
        let tol = 1e-9 * self.m_hi;
        let mut out = Vec::new();
        for a in 0..n_levels {
            for b in a + 1..n_levels {
                let diff = |m: f64| self.level_value(a, m) - self.level_value(b, m);
                let mut last: Option<(usize, bool)> = None;
                for i in 0..scan_points {
                    let d = values[a][i] - values[b][i];
                    if d == 0.0 {
                        continue;
                    }
                    let positive = d > 0.0;
                    if let Some((k, was_positive)) = last {
                        if was_positive != positive {
                            out.push(search::bisect(diff, grid[k], grid[i], tol));
                        }
                    }
                    last = Some((i, positive));
                }
            }
        }
        out
    }
}

/// One row of the envelope dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeSample {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "L_M")]
    pub value: f64,
    pub q: f64,
    pub rho_opt: f64,
}

/// Writes `(M, L_M(M), winning q, ρ_opt(M))` rows as CSV.
pub fn write_envelope_csv<W: std::io::Write>(
    envelope: &Envelope<'_>,
    samples: usize,
    with_knots: bool,
    out: W,
) -> Result<()> {
    let mut points = envelope.sample(samples);
    if with_knots {
        points.extend(envelope.knots().iter().map(|&k| (k, envelope.point_at(k))));
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
    }
    let mut w = csv::Writer::from_writer(out);
    for (m, pt) in points {
        w.serialize(EnvelopeSample {
            m,
            value: pt.value,
            q: envelope.instance.levels[pt.level].q,
            rho_opt: pt.rho,
        })?;
    }
    w.flush()?;
    Ok(())
}
