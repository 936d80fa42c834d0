//! Experiment drivers: similarity sweeps and zone-validation sweeps.
//!
//! Replicate `r` uses seed `base + r` at every grid point, so columns are
//! paired across the grid: the target data, its model fits and the source
//! noise draws are shared, and only the similarity changes.

mod report;
mod stats;
mod sweep;
mod zones;

pub use report::{render_table, Report, Row};
pub use stats::{diff_metric, pearson_spearman};
pub use sweep::{run_sweep, Metric, SweepConfig, SweepScheme, MAX_FAILURE_RATE, SWEEP_MC_SAMPLES};
pub use zones::{run_zone_experiment, ZoneReport, ZoneRow, ZoneSweepConfig};

use cls_core::cls::{oracle_estimate, oracle_monte_carlo, ClsEstimate, LdaOracleParams, ProbitOracleParams};
use cls_core::rng::derive_seed;
use cls_core::synth::{OracleModel, Role, Setting};

/// Fold seed offset for the source side, so the two domains never share a fold plan.
pub const SOURCE_FOLD_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seeds used within one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateSeeds {
    pub replicate: u64,
    pub target_data: u64,
    pub source_data: u64,
    pub target_folds: u64,
    pub source_folds: u64,
    pub mc: u64,
    pub test_data: u64,
}

pub fn replicate_seeds(base: u64, r: usize) -> ReplicateSeeds {
    let s = base.wrapping_add(r as u64);
    ReplicateSeeds {
        replicate: s,
        target_data: derive_seed(s, 1),
        source_data: derive_seed(s, 2),
        target_folds: s,
        source_folds: s ^ SOURCE_FOLD_MIX,
        mc: derive_seed(s, 3),
        test_data: derive_seed(s, 4),
    }
}

/// Population score of a setting: closed form for probit and LDA,
/// Monte-Carlo with `samples` draws per direction otherwise.
pub fn oracle_for(setting: &Setting, samples: usize, seed: u64) -> cls_core::Result<ClsEstimate> {
    let target = setting.oracle(Role::Target)?;
    let source = setting.oracle(Role::Source)?;
    match (&target, &source) {
        (OracleModel::Probit { beta: bt, noise_var }, OracleModel::Probit { beta: bs, .. }) => {
            let params = ProbitOracleParams { beta_target: bt.clone(), beta_source: bs.clone(), noise_var: *noise_var };
            let (e_t, e_s) = params.directional()?;
            Ok(oracle_estimate(e_t, e_s))
        }
        (OracleModel::Lda { mu: mt }, OracleModel::Lda { mu: ms }) => {
            let params = LdaOracleParams { mu_target: mt.clone(), mu_source: ms.clone() };
            let (e_t, e_s) = params.directional()?;
            Ok(oracle_estimate(e_t, e_s))
        }
        _ => oracle_monte_carlo(&target, &source, samples, seed),
    }
}
