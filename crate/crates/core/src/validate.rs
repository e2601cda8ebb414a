//! Structural checks run once when an instance is loaded.

use std::ops::Deref;

use crate::error::{Error, Issue, Result, ValidationReport};
use crate::model::ProblemInstance;

/// An instance that passed [`validate_instance`], annotated with each level's
/// unconstrained maximiser `ρ_best,j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedInstance {
    instance: ProblemInstance,
    rho_best: Vec<f64>,
    warnings: Vec<String>,
}

impl ValidatedInstance {
    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn into_inner(self) -> ProblemInstance {
        self.instance
    }

    /// `argmax_ρ g_j(ρ)` over `[0, 1]`, one per level.
    pub fn rho_best(&self) -> &[f64] {
        &self.rho_best
    }

    /// Non-fatal findings, e.g. a level whose best performance is below `mAP_pre`.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

impl Deref for ValidatedInstance {
    type Target = ProblemInstance;

    fn deref(&self) -> &ProblemInstance {
        &self.instance
    }
}

/// Checks positivity, level-set sanity, concavity of every `g_j`, strict
/// monotonicity of `phi`, and value ranges. All problems are reported together.
pub fn validate_instance(instance: ProblemInstance) -> Result<ValidatedInstance> {
    let mut issues = Vec::new();

    for (name, value) in instance.params.named_fields() {
        if !(value > 0.0 && value.is_finite()) {
            issues.push(Issue::NonpositiveParam { name, value });
        }
    }

    if instance.levels.is_empty() {
        issues.push(Issue::EmptyLevelSet);
    }
    for (j, level) in instance.levels.iter().enumerate() {
        if !(level.q > 0.0 && level.q.is_finite()) {
            issues.push(Issue::NonpositiveLevel {
                level: j,
                q: level.q,
            });
        }
        if let Some(first) = instance.levels[..j].iter().position(|l| l.q == level.q) {
            issues.push(Issue::DuplicateLevel {
                first,
                second: j,
                q: level.q,
            });
        }
    }

    let bad_curves = instance.curve_issues();
    let mut phi_ok = true;
    for (level, reason) in &bad_curves {
        if level.is_none() {
            phi_ok = false;
        }
        issues.push(Issue::InvalidCurve {
            level: *level,
            reason: reason.clone(),
        });
    }

    for (j, level) in instance.levels.iter().enumerate() {
        if bad_curves.iter().any(|(l, _)| *l == Some(j)) {
            continue;
        }
        if let Some((at, excess)) = level.g.concavity_defect() {
            issues.push(Issue::ConcavityViolation {
                level: j,
                at,
                excess,
            });
        }
        if let Some((at, value)) = level.g.range_defect() {
            issues.push(Issue::RangeViolation {
                level: j,
                at,
                value,
            });
        }
    }

    let map_pre = instance.fusion.map_pre;
    if !(0.0..=1.0).contains(&map_pre) {
        issues.push(Issue::FusionRange { map_pre });
    }
    if phi_ok {
        let phi = instance.fusion.phi;
        let n = 1000;
        let mut prev = phi.eval(0.0);
        for i in 1..=n {
            let u = i as f64 / n as f64;
            let cur = phi.eval(u);
            if !(cur > prev) {
                issues.push(Issue::MonotonicityViolation { at: u });
                break;
            }
            prev = cur;
        }
    }

    if !issues.is_empty() {
        return Err(Error::Validation(ValidationReport { issues }));
    }

    let rho_best: Vec<f64> = instance.levels.iter().map(|l| l.g.argmax()).collect();
    let warnings = instance
        .levels
        .iter()
        .zip(&rho_best)
        .enumerate()
        .filter_map(|(j, (level, &rho))| {
            let best = level.g.eval(rho);
            (best < map_pre).then(|| {
                format!(
                    "level {j} (q = {}) peaks at mAP* = {best} below mAP_pre = {map_pre}; \
                     transmitting its update lowers end-model performance",
                    level.q
                )
            })
        })
        .collect();

    Ok(ValidatedInstance {
        instance,
        rho_best,
        warnings,
    })
}
