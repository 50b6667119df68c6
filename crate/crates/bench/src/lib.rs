//! Shared inputs for the benchmarks.

use ganseval_core::*;

/// Desk-scale real set and run for the given regime.
pub fn desk_scale(regime: Regime) -> (RealDataset, GenerationRun) {
    let config = SynthConfig::with_regime(regime);
    let real = generate_real(&config).expect("default config is valid");
    let run = generate_run(&config, &real).expect("default config is valid");
    (real, run)
}
