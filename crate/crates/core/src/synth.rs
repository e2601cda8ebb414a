//! Synthetic instances: a small hand-checkable reference and a seeded random generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    BlendCurve, FusionModel, PerfCurve, ProblemInstance, QuantLevelModel, SystemParams,
};

/// 1 MHz channel, unit spectral efficiencies, 10 s cycle, 10 fps of 1000-parameter
/// frames, 1e6-parameter end model at 8 bits, one level `q = 8` with
/// `g(ρ) = 0.5 + 0.3ρ − 0.1ρ²`, linear blend and `mAP_pre = 0.4`.
pub fn reference_instance() -> ProblemInstance {
    ProblemInstance {
        params: SystemParams {
            bandwidth: 1e6,
            uplink_efficiency: 1.0,
            downlink_efficiency: 1.0,
            frame_rate: 10.0,
            frame_params: 1000.0,
            total_time: 10.0,
            max_params: 1e6,
            bits_per_param: 8,
        },
        levels: vec![QuantLevelModel {
            q: 8.0,
            g: PerfCurve::Quadratic {
                a: 0.5,
                c: 0.3,
                d: 0.1,
            },
        }],
        fusion: FusionModel {
            map_pre: 0.4,
            phi: BlendCurve::Identity,
        },
    }
}

/// Knobs for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub max_levels: usize,
    /// Decades spanned by each log-uniform parameter.
    pub decades: f64,
    /// Upper bound on `|g_j'|`; amplitudes are scaled down to respect it.
    pub max_slope: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_levels: 4,
            decades: 3.0,
            max_slope: 0.9,
        }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, decades: f64) -> f64 {
    lo * 10f64.powf(rng.gen_range(0.0..decades))
}

/// Draws a random valid instance.
///
/// Device constants are log-uniform over `decades`. The bandwidth is drawn
/// log-uniform over the same span around the bandwidth that would carry both a
/// full-quality upload and the whole model in one cycle, starting two decades
/// below it, so the mix of starved, balanced and slack channels is even.
pub fn random_instance<R: Rng>(rng: &mut R, config: &SynthConfig) -> ProblemInstance {
    let d = config.decades;
    let frame_rate = log_uniform(rng, 1.0, d);
    let frame_params = log_uniform(rng, 100.0, d);
    let total_time = log_uniform(rng, 0.1, d);
    let max_params = log_uniform(rng, 1e4, d);
    let uplink_efficiency = log_uniform(rng, 0.05, d);
    let downlink_efficiency = log_uniform(rng, 0.05, d);
    let bits_per_param = *[8u32, 16, 32].choose(rng).unwrap();

    let n_levels = rng.gen_range(1..=config.max_levels.max(1));
    let mut qs: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
        .choose_multiple(rng, n_levels)
        .copied()
        .collect();
    qs.sort_by(f64::total_cmp);
    let q_max = qs[n_levels - 1];

    let balanced = frame_rate * frame_params * q_max / uplink_efficiency
        + max_params * f64::from(bits_per_param) / (total_time * downlink_efficiency);
    let bandwidth = balanced * 10f64.powf(rng.gen_range(-2.0..d - 2.0));

    let map_pre: f64 = rng.gen_range(0.2..0.45);
    let amp_top = rng.gen_range(0.1..0.5);
    let levels = qs
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            let rank = if n_levels == 1 {
                1.0
            } else {
                j as f64 / (n_levels - 1) as f64
            };
            let m0 = (map_pre + rng.gen_range(-0.05..0.05)).max(0.0);
            let amp = (amp_top * (0.4 + 0.6 * rank) * rng.gen_range(0.8..1.0)).min(0.99 - m0);
            QuantLevelModel {
                q,
                g: random_curve(rng, m0, amp, config.max_slope),
            }
        })
        .collect();

    let phi = match rng.gen_range(0..3) {
        0 => BlendCurve::Identity,
        1 => BlendCurve::Power {
            gamma: log_uniform(rng, 0.3, 1.0),
        },
        _ => BlendCurve::ExpSaturation {
            k: log_uniform(rng, 0.5, 1.3),
        },
    };

    ProblemInstance {
        params: SystemParams {
            bandwidth,
            uplink_efficiency,
            downlink_efficiency,
            frame_rate,
            frame_params,
            total_time,
            max_params,
            bits_per_param,
        },
        levels,
        fusion: FusionModel { map_pre, phi },
    }
}

/// Concave curve rising from `m0` by at most `amp` over `[0, 1]`, with slope at
/// most `max_slope`. Concavity puts the steepest slope at `ρ = 0`.
fn random_curve<R: Rng>(rng: &mut R, m0: f64, amp: f64, max_slope: f64) -> PerfCurve {
    match rng.gen_range(0..4) {
        0 => {
            // peak position may fall beyond 1, leaving g increasing on [0, 1]
            let peak = rng.gen_range(0.55..2.0);
            let amp = amp.min(max_slope * peak / 2.0);
            PerfCurve::Quadratic {
                a: m0,
                c: 2.0 * amp / peak,
                d: amp / (peak * peak),
            }
        }
        1 => {
            let k = log_uniform(rng, 0.5, 2.0);
            PerfCurve::LogSaturation {
                m0,
                a: amp.min(max_slope * k.ln_1p() / k),
                k,
            }
        }
        2 => {
            let k = log_uniform(rng, 0.5, 1.6);
            let scale = -(-k).exp_m1();
            PerfCurve::ExpSaturation {
                m0,
                a: (amp / scale).min(max_slope / k),
                k,
            }
        }
        _ => {
            let k = log_uniform(rng, 0.5, 1.6);
            let amp = amp.min(max_slope * -(-k).exp_m1() / k);
            let n = rng.gen_range(3..12);
            let pts = (0..=n)
                .map(|i| {
                    let r = i as f64 / n as f64;
                    (r, m0 + amp * (-k * r).exp_m1() / (-k).exp_m1())
                })
                .collect();
            PerfCurve::Tabulated(pts)
        }
    }
}

/// `count` instances from a fixed seed.
pub fn random_instances(seed: u64, count: usize, config: &SynthConfig) -> Vec<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(&mut rng, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_instance;

    #[test]
    fn random_instances_validate() {
        for inst in random_instances(7, 300, &SynthConfig::default()) {
            let n = inst.levels.len();
            assert!((1..=4).contains(&n));
            let slope = inst
                .levels
                .iter()
                .map(|l| (l.g.eval(1e-6) - l.g.eval(0.0)) / 1e-6)
                .fold(0.0, f64::max);
            assert!(slope <= 0.9 + 1e-6, "slope {slope}");
            validate_instance(inst).expect("generator must emit valid instances");
        }
    }

    #[test]
    fn generator_is_seeded() {
        let a = random_instances(11, 5, &SynthConfig::default());
        let b = random_instances(11, 5, &SynthConfig::default());
        assert_eq!(a, b);
    }
}
