//! Logistic user-notice model and its calibration loop.
//!
//! Whether a user hears attack playback is modeled as a Bernoulli draw
//! whose probability is logistic in the volume margin over ambient noise,
//! shifted by a per-scenario offset. The offsets are not paper facts —
//! they are fitted by bisection so that simulated notice rates match the
//! per-scenario targets, which makes every downstream success number a
//! consistency check rather than an independent validation.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::Scenario;
use crate::{derive_seed, Scalar};

use super::trial::{run_trial, LaunchPolicy, TrialConfig};

pub const NOTICE_SCHEMA: &str = "vasim-notice/v1";

/// Logistic notice model (`notice_model.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoticeModel {
    pub schema: String,
    /// Volume margin (dB over ambient) at which an average scenario is a
    /// coin flip.
    pub base_margin_db: Scalar,
    /// Logistic steepness per dB of margin.
    pub slope_per_db: Scalar,
    /// Per-scenario shift of the coin-flip point, fitted by calibration.
    pub scenario_offset_db: BTreeMap<Scenario, Scalar>,
    pub calibrated: bool,
    /// Achieved-minus-target notice rates recorded by the last calibration.
    pub residuals: BTreeMap<Scenario, Scalar>,
}

impl Default for NoticeModel {
    fn default() -> Self {
        NoticeModel {
            schema: NOTICE_SCHEMA.into(),
            base_margin_db: 4.0,
            slope_per_db: 5.0,
            scenario_offset_db: Scenario::ALL.iter().map(|&s| (s, 0.0)).collect(),
            calibrated: false,
            residuals: BTreeMap::new(),
        }
    }
}

impl NoticeModel {
    pub fn offset(&self, scenario: Scenario) -> Scalar {
        self.scenario_offset_db.get(&scenario).copied().unwrap_or(0.0)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<NoticeModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: NoticeModel = serde_json::from_str(&text)?;
        if model.schema != NOTICE_SCHEMA {
            return Err(Error::ModelMismatch(format!(
                "unsupported notice-model schema {:?}",
                model.schema
            )));
        }
        Ok(model)
    }
}

/// Probability the user notices playback at `volume_db` over
/// `ambient_db` in the given scenario.
pub fn notice_probability(
    model: &NoticeModel,
    scenario: Scenario,
    ambient_db: Scalar,
    volume_db: Scalar,
) -> Scalar {
    let margin = volume_db - ambient_db - model.offset(scenario) - model.base_margin_db;
    1.0 / (1.0 + (-model.slope_per_db * margin).exp())
}

/// Bernoulli notice draw. The caller supplies a uniform sample in [0, 1)
/// so that common-random-number comparisons across candidate offsets stay
/// exactly monotone.
pub fn notice_with_uniform(
    model: &NoticeModel,
    scenario: Scenario,
    ambient_db: Scalar,
    volume_db: Scalar,
    uniform: Scalar,
) -> bool {
    uniform < notice_probability(model, scenario, ambient_db, volume_db)
}

/// Bernoulli notice draw from an RNG.
pub fn notice(
    model: &NoticeModel,
    scenario: Scenario,
    ambient_db: Scalar,
    volume_db: Scalar,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> bool {
    use rand::Rng;
    notice_with_uniform(model, scenario, ambient_db, volume_db, rng.gen::<Scalar>())
}

/// Per-scenario success rates reported for the reference experiment: the
/// fraction of played attacks that executed without being heard.
pub fn table1_success_targets() -> BTreeMap<Scenario, Scalar> {
    [
        (Scenario::QuietRoad, 0.0),
        (Scenario::Highway, 0.90),
        (Scenario::SpecificPlaces, 0.325),
        (Scenario::PublicTransport, 0.85),
        (Scenario::Car, 0.0),
        (Scenario::Restaurant, 0.95),
    ]
    .into_iter()
    .collect()
}

/// Converts success-rate targets into the notice-rate targets the
/// calibration loop fits: an attack succeeds when it goes unnoticed and
/// the command is recognized, so `notice = 1 - success / p_recognized`.
pub fn notice_targets_from_success(
    success_targets: &BTreeMap<Scenario, Scalar>,
    p_recognized: Scalar,
) -> BTreeMap<Scenario, Scalar> {
    success_targets
        .iter()
        .map(|(&s, &succ)| (s, (1.0 - succ / p_recognized).clamp(0.0, 1.0)))
        .collect()
}

/// Inner bisection tolerance on the empirical notice rate.
const FIT_TOLERANCE: Scalar = 0.005;
/// A fit is rejected when it misses the target by more than this.
const ACCEPT_TOLERANCE: Scalar = 0.05;
const MAX_ITERATIONS: usize = 60;
const OFFSET_RANGE: (Scalar, Scalar) = (-80.0, 80.0);

/// Fits per-scenario offsets so that simulated notice rates match
/// `targets`.
///
/// Every evaluation replays the same `trials` seeded trials (forced
/// launch, gate off) under a candidate offset; with common random numbers
/// the empirical rate is exactly monotone in the offset, so bisection
/// converges. Trial seeds do not depend on the scenario: two scenarios
/// with identical parameters and targets fit identical offsets.
pub fn calibrate_notice(
    template: &NoticeModel,
    targets: &BTreeMap<Scenario, Scalar>,
    config: &TrialConfig,
    trials: usize,
    seed: u64,
) -> Result<NoticeModel> {
    for scenario in Scenario::ALL {
        let t = targets
            .get(&scenario)
            .ok_or_else(|| Error::InvalidArgument(format!("no target for scenario {scenario}")))?;
        if !(0.0..=1.0).contains(t) {
            return Err(Error::InvalidArgument(format!(
                "target for {scenario} outside [0, 1]"
            )));
        }
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("calibration needs trials >= 1".into()));
    }

    // measurement configuration: play in every window like the reference
    // experiment, regardless of the detector
    let mut probe_config = config.clone();
    probe_config.launch_policy = LaunchPolicy::Always;
    probe_config.gating = false;

    let mut fitted = template.clone();
    let mut residuals = BTreeMap::new();
    let mut failures: Vec<(char, f64)> = Vec::new();

    for scenario in Scenario::ALL {
        let target = targets[&scenario];

        let evaluate = |offset: Scalar| -> Result<Scalar> {
            let mut model = template.clone();
            model.scenario_offset_db.insert(scenario, offset);
            model.calibrated = true;
            let mut cfg = probe_config.clone();
            cfg.notice = model;
            let outcomes: Result<Vec<(bool, bool)>> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let record = run_trial(scenario, &cfg, derive_seed(seed, i as u64))?;
                    Ok((record.launched, record.noticed))
                })
                .collect();
            let outcomes = outcomes?;
            let launched = outcomes.iter().filter(|(l, _)| *l).count();
            if launched == 0 {
                return Err(Error::InvalidArgument(format!(
                    "calibration for {scenario}: no attack was ever played"
                )));
            }
            let noticed = outcomes.iter().filter(|(l, n)| *l && *n).count();
            Ok(noticed as Scalar / launched as Scalar)
        };

        // notice rate decreases as the offset grows
        let (mut lo, mut hi) = OFFSET_RANGE;
        let mut offset = 0.0;
        let mut achieved = evaluate(offset)?;
        for _ in 0..MAX_ITERATIONS {
            if (achieved - target).abs() <= FIT_TOLERANCE || hi - lo < 1e-9 {
                break;
            }
            if achieved > target {
                lo = offset;
            } else {
                hi = offset;
            }
            offset = 0.5 * (lo + hi);
            achieved = evaluate(offset)?;
        }

        let residual = achieved - target;
        if residual.abs() > ACCEPT_TOLERANCE {
            failures.push((scenario.tag(), residual));
        }
        fitted.scenario_offset_db.insert(scenario, offset);
        residuals.insert(scenario, residual);
    }

    if !failures.is_empty() {
        return Err(Error::Calibration { residuals: failures });
    }
    fitted.calibrated = true;
    fitted.residuals = residuals;
    Ok(fitted)
}
