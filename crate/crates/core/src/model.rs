//! Physical parameters, performance curves and the problem instance.
//!
//! Units: Hz, bits/s/Hz, seconds, parameter counts and bits. With these every
//! constraint product is a bit count.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search;

/// Channel and device constants for one collaboration cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Channel bandwidth, Hz.
    #[serde(rename = "B")]
    pub bandwidth: f64,
    /// Uplink spectral efficiency, bits/s/Hz.
    #[serde(rename = "S_u")]
    pub uplink_efficiency: f64,
    /// Downlink spectral efficiency, bits/s/Hz.
    #[serde(rename = "S_d")]
    pub downlink_efficiency: f64,
    /// Frames captured per second.
    #[serde(rename = "N")]
    pub frame_rate: f64,
    /// Parameters per uploaded frame.
    #[serde(rename = "F")]
    pub frame_params: f64,
    /// Cycle length, seconds.
    #[serde(rename = "T_total")]
    pub total_time: f64,
    /// Number of parameters in the end model.
    #[serde(rename = "M_max")]
    pub max_params: f64,
    /// Bits per transmitted model parameter.
    #[serde(rename = "b")]
    pub bits_per_param: u32,
}

impl SystemParams {
    pub fn bits(&self) -> f64 {
        f64::from(self.bits_per_param)
    }

    /// Parameters the downlink could carry if it owned the whole cycle.
    pub fn downlink_capacity_params(&self) -> f64 {
        self.total_time * self.bandwidth * self.downlink_efficiency / self.bits()
    }

    /// Upper end of the optimisation domain, `min(M_max, T·B·S_d / b)`.
    pub fn m_hi(&self) -> f64 {
        self.max_params.min(self.downlink_capacity_params())
    }

    /// Downlink time needed to deliver `m` parameters.
    pub fn downlink_time(&self, m: f64) -> f64 {
        m * self.bits() / (self.bandwidth * self.downlink_efficiency)
    }

    pub(crate) fn named_fields(&self) -> [(&'static str, f64); 8] {
        [
            ("B", self.bandwidth),
            ("S_u", self.uplink_efficiency),
            ("S_d", self.downlink_efficiency),
            ("N", self.frame_rate),
            ("F", self.frame_params),
            ("T_total", self.total_time),
            ("M_max", self.max_params),
            ("b", self.bits()),
        ]
    }
}

/// Uplink rate `N·ρ·F·q` in bits/s.
pub fn uplink_rate(rho: f64, q: f64, params: &SystemParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain("rho", rho, 0.0, 1.0));
    }
    if !(q > 0.0) {
        return Err(Error::domain("q", q, f64::MIN_POSITIVE, f64::INFINITY));
    }
    Ok(params.frame_rate * rho * params.frame_params * q)
}

/// Downlink rate `M·b / T_total` in bits/s.
pub fn downlink_rate(m: f64, params: &SystemParams) -> Result<f64> {
    if !(0.0..=params.max_params).contains(&m) {
        return Err(Error::domain("M", m, 0.0, params.max_params));
    }
    Ok(m * params.bits() / params.total_time)
}

/// Concave edge-update performance curve `g_j(ρ)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveSpec", into = "CurveSpec")]
pub enum PerfCurve {
    /// `a + c·ρ − d·ρ²` with `d ≥ 0`.
    Quadratic { a: f64, c: f64, d: f64 },
    /// `m0 + a·ln(1 + kρ) / ln(1 + k)`.
    LogSaturation { m0: f64, a: f64, k: f64 },
    /// `m0 + a·(1 − e^{−kρ})`.
    ExpSaturation { m0: f64, a: f64, k: f64 },
    /// Piecewise-linear interpolation through points spanning `ρ ∈ [0, 1]`.
    Tabulated(Vec<(f64, f64)>),
}

impl PerfCurve {
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            PerfCurve::Quadratic { a, c, d } => a + c * rho - d * rho * rho,
            PerfCurve::LogSaturation { m0, a, k } => m0 + a * (k * rho).ln_1p() / k.ln_1p(),
            PerfCurve::ExpSaturation { m0, a, k } => m0 - a * (-k * rho).exp_m1(),
            PerfCurve::Tabulated(ref pts) => interpolate(pts, rho),
        }
    }

    /// Maximiser of the curve over `[0, 1]`; the smallest one when the maximum is attained on a plateau.
    pub fn argmax(&self) -> f64 {
        match *self {
            PerfCurve::Quadratic { c, d, .. } => {
                if d > 0.0 {
                    (c / (2.0 * d)).clamp(0.0, 1.0)
                } else if c > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PerfCurve::Tabulated(ref pts) => {
                let mut best = pts[0];
                for &p in &pts[1..] {
                    if p.1 > best.1 {
                        best = p;
                    }
                }
                best.0
            }
            _ => {
                let inner = search::golden_section_max(|r| self.eval(r), 0.0, 1.0, 1e-10).0;
                let mut best = (0.0, self.eval(0.0));
                for r in [inner, 1.0] {
                    let v = self.eval(r);
                    if v > best.1 {
                        best = (r, v);
                    }
                }
                best.0
            }
        }
    }

    fn check_coefficients(&self) -> std::result::Result<(), String> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            PerfCurve::Quadratic { a, c, d } => {
                if !finite(&[a, c, d]) {
                    return Err("non-finite coefficient".into());
                }
                if d < 0.0 {
                    return Err(format!("quadratic needs d >= 0, got {d}"));
                }
            }
            PerfCurve::LogSaturation { m0, a, k } | PerfCurve::ExpSaturation { m0, a, k } => {
                if !finite(&[m0, a, k]) {
                    return Err("non-finite coefficient".into());
                }
                if !(k > 0.0) {
                    return Err(format!("saturation rate k must be > 0, got {k}"));
                }
            }
            PerfCurve::Tabulated(ref pts) => {
                if pts.len() < 2 {
                    return Err("tabulated curve needs at least two points".into());
                }
                if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err("non-finite point".into());
                }
                if pts[0].0 != 0.0 || pts[pts.len() - 1].0 != 1.0 {
                    return Err("tabulated abscissae must start at 0 and end at 1".into());
                }
                if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err("tabulated abscissae must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    /// First point where concavity fails, with its excess over the `1e-9` slack.
    pub(crate) fn concavity_defect(&self) -> Option<(f64, f64)> {
        const TOL: f64 = 1e-9;
        match self {
            PerfCurve::Tabulated(pts) => {
                let slopes: Vec<f64> = pts
                    .windows(2)
                    .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                    .collect();
                slopes
                    .windows(2)
                    .zip(&pts[1..])
                    .find(|(s, _)| s[1] - s[0] > TOL)
                    .map(|(s, p)| (p.0, s[1] - s[0]))
            }
            _ => {
                let n = 1000;
                (1..n).find_map(|i| {
                    let lo = self.eval((i - 1) as f64 / n as f64);
                    let mid = self.eval(i as f64 / n as f64);
                    let hi = self.eval((i + 1) as f64 / n as f64);
                    let excess = 0.5 * (lo + hi) - mid;
                    (excess > TOL).then(|| (i as f64 / n as f64, excess))
                })
            }
        }
    }

    pub(crate) fn range_defect(&self) -> Option<(f64, f64)> {
        let probe = |r: f64| {
            let v = self.eval(r);
            (!(0.0..=1.0).contains(&v)).then_some((r, v))
        };
        match self {
            PerfCurve::Tabulated(pts) => pts.iter().find_map(|p| probe(p.0)),
            _ => (0..=1000).find_map(|i| probe(i as f64 / 1000.0)),
        }
    }
}

fn interpolate(pts: &[(f64, f64)], x: f64) -> f64 {
    let x = x.clamp(pts[0].0, pts[pts.len() - 1].0);
    // first index whose abscissa exceeds x
    let hi = pts.partition_point(|p| p.0 <= x).min(pts.len() - 1);
    let (x1, y1) = pts[hi];
    if hi == 0 || x == x1 {
        return y1;
    }
    let (x0, y0) = pts[hi - 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Monotone blending curve `phi: [0, 1] → [0, 1]` with `phi(0) = 0`, `phi(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveSpec", into = "CurveSpec")]
pub enum BlendCurve {
    Identity,
    /// `u^γ`, `γ > 0`.
    Power {
        gamma: f64,
    },
    /// `(1 − e^{−ku}) / (1 − e^{−k})`, `k > 0`.
    ExpSaturation {
        k: f64,
    },
}

impl BlendCurve {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            BlendCurve::Identity => u,
            BlendCurve::Power { gamma } => u.powf(gamma),
            BlendCurve::ExpSaturation { k } => (-k * u).exp_m1() / (-k).exp_m1(),
        }
    }

    fn check_coefficients(&self) -> std::result::Result<(), String> {
        match *self {
            BlendCurve::Identity => Ok(()),
            BlendCurve::Power { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            BlendCurve::Power { gamma } => Err(format!("power exponent must be > 0, got {gamma}")),
            BlendCurve::ExpSaturation { k } if k > 0.0 && k.is_finite() => Ok(()),
            BlendCurve::ExpSaturation { k } => Err(format!("saturation rate must be > 0, got {k}")),
        }
    }
}

/// Downlink fusion `f(M, s) = mAP_pre + (s − mAP_pre)·phi(M / M_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    #[serde(rename = "mAP_pre")]
    pub map_pre: f64,
    pub phi: BlendCurve,
}

impl FusionModel {
    /// Blend at model fraction `u = M / M_max`.
    ///
    /// Written as a convex combination so that `u = 0` returns `mAP_pre` and
    /// `u = 1` returns `s` bit-for-bit.
    pub fn blend(&self, u: f64, s: f64) -> f64 {
        self.blend_weighted(self.phi.eval(u), s)
    }

    /// Blend with a precomputed weight `w = phi(u)`.
    #[inline]
    pub fn blend_weighted(&self, w: f64, s: f64) -> f64 {
        w * s + (1.0 - w) * self.map_pre
    }
}

/// One quantization level `q_j` with its uplink performance curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantLevelModel {
    pub q: f64,
    pub g: PerfCurve,
}

/// Full problem: channel constants, the level set `Ω`, and the fusion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub params: SystemParams,
    pub levels: Vec<QuantLevelModel>,
    pub fusion: FusionModel,
}

impl ProblemInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// End-model performance `f(M, s)`.
    pub fn fusion_at(&self, m: f64, s: f64) -> f64 {
        self.fusion.blend(m / self.params.max_params, s)
    }

    pub fn level_index(&self, q: f64) -> Option<usize> {
        self.levels.iter().position(|l| l.q == q)
    }

    pub(crate) fn curve_issues(&self) -> Vec<(Option<usize>, String)> {
        let mut out = Vec::new();
        for (j, level) in self.levels.iter().enumerate() {
            if let Err(reason) = level.g.check_coefficients() {
                out.push((Some(j), reason));
            }
        }
        if let Err(reason) = self.fusion.phi.check_coefficients() {
            out.push((None, reason));
        }
        out
    }
}

/// Wire form of a curve: `{family, coeffs | points}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurveSpec {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
}

impl CurveSpec {
    fn coeffs<const K: usize>(&self) -> std::result::Result<[f64; K], String> {
        let c = self
            .coeffs
            .as_deref()
            .ok_or_else(|| format!("family '{}' needs coeffs", self.family))?;
        c.try_into()
            .map_err(|_| format!("family '{}' takes {K} coeffs, got {}", self.family, c.len()))
    }
}

impl TryFrom<CurveSpec> for PerfCurve {
    type Error = String;

    fn try_from(spec: CurveSpec) -> std::result::Result<Self, String> {
        Ok(match spec.family.as_str() {
            "quadratic" => {
                let [a, c, d] = spec.coeffs()?;
                PerfCurve::Quadratic { a, c, d }
            }
            "log" | "log-saturation" => {
                let [m0, a, k] = spec.coeffs()?;
                PerfCurve::LogSaturation { m0, a, k }
            }
            "exp" | "exp-saturation" => {
                let [m0, a, k] = spec.coeffs()?;
                PerfCurve::ExpSaturation { m0, a, k }
            }
            "tabulated" => {
                let pts = spec.points.ok_or("family 'tabulated' needs points")?;
                PerfCurve::Tabulated(pts.into_iter().map(|[x, y]| (x, y)).collect())
            }
            other => return Err(format!("unknown g family '{other}'")),
        })
    }
}

impl From<PerfCurve> for CurveSpec {
    fn from(curve: PerfCurve) -> Self {
        let coeffs = |family: &str, c: Vec<f64>| CurveSpec {
            family: family.into(),
            coeffs: Some(c),
            points: None,
        };
        match curve {
            PerfCurve::Quadratic { a, c, d } => coeffs("quadratic", vec![a, c, d]),
            PerfCurve::LogSaturation { m0, a, k } => coeffs("log", vec![m0, a, k]),
            PerfCurve::ExpSaturation { m0, a, k } => coeffs("exp", vec![m0, a, k]),
            PerfCurve::Tabulated(pts) => CurveSpec {
                family: "tabulated".into(),
                coeffs: None,
                points: Some(pts.into_iter().map(|(x, y)| [x, y]).collect()),
            },
        }
    }
}

impl TryFrom<CurveSpec> for BlendCurve {
    type Error = String;

    fn try_from(spec: CurveSpec) -> std::result::Result<Self, String> {
        Ok(match spec.family.as_str() {
            "identity" => BlendCurve::Identity,
            "power" => {
                let [gamma] = spec.coeffs()?;
                BlendCurve::Power { gamma }
            }
            "exp" | "exp-saturation" => {
                let [k] = spec.coeffs()?;
                BlendCurve::ExpSaturation { k }
            }
            other => return Err(format!("unknown phi family '{other}'")),
        })
    }
}

impl From<BlendCurve> for CurveSpec {
    fn from(curve: BlendCurve) -> Self {
        let (family, coeffs) = match curve {
            BlendCurve::Identity => ("identity", None),
            BlendCurve::Power { gamma } => ("power", Some(vec![gamma])),
            BlendCurve::ExpSaturation { k } => ("exp", Some(vec![k])),
        };
        CurveSpec {
            family: family.into(),
            coeffs,
            points: None,
        }
    }
}
