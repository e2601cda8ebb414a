//! Benchmark fixtures shared by the criterion targets.

use edgealloc_core::synth::{self, SynthConfig};
use edgealloc_core::{validate_instance, ValidatedInstance};

/// Seeded random instances, validated.
pub fn fixtures(count: usize) -> Vec<ValidatedInstance> {
    synth::random_instances(0xbe4c, count, &SynthConfig::default())
        .into_iter()
        .map(|i| validate_instance(i).expect("generated instances are valid"))
        .collect()
}

pub fn reference() -> ValidatedInstance {
    validate_instance(synth::reference_instance()).expect("reference instance is valid")
}
