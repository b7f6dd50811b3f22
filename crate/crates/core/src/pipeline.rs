//! High-level orchestration shared by the CLI and the test suites:
//! notice-model calibration against the reference success rates, dataset
//! featurization, and opportunity-model training with cross-validation.

use rayon::prelude::*;

use crate::error::Result;
use crate::features;
use crate::forest::{self, CvResult, ForestModel, ForestParams, TrainingData};
use crate::lifecycle::{
    calibrate_notice, notice_targets_from_success, table1_success_targets, NoticeModel,
    OutcomeLabeler, TrialConfig,
};
use crate::scenegen::{generate_dataset, InvasionLabel, LabeledDataset};
use crate::trace::Scenario;
use crate::{derive_seed, Scalar};

/// Calibrates the notice model so simulated outcomes per scenario match
/// the reference success rates under the given trial configuration.
pub fn calibrate_against_reference(
    config: &TrialConfig,
    trials: usize,
    seed: u64,
) -> Result<NoticeModel> {
    let targets = notice_targets_from_success(&table1_success_targets(), config.p_recognized);
    calibrate_notice(&config.notice, &targets, config, trials, seed)
}

/// Generates the labeled six-scenario opportunity dataset.
///
/// One window per trial, labeled by the calibrated notice-model ground
/// truth, so label marginals match the reference rates by construction.
pub fn build_opportunity_dataset(
    config: &TrialConfig,
    trials_per_scenario: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let labeler = OutcomeLabeler {
        notice: config.notice.clone(),
        policy: config.policy.clone(),
        p_recognized: config.p_recognized,
    };
    let spec: Vec<(Scenario, usize, Scalar)> = Scenario::ALL
        .iter()
        .map(|&s| (s, trials_per_scenario, config.window_minutes * 60.0))
        .collect();
    generate_dataset(&spec, &config.params, config.phone, &labeler, seed)
}

/// Turns a labeled window dataset into the opportunity training matrix by
/// regenerating each window and running feature assembly.
pub fn featurize_dataset(
    dataset: &LabeledDataset,
    motion_model: &ForestModel,
) -> Result<TrainingData> {
    let rows: Result<Vec<(Vec<Scalar>, usize)>> = (0..dataset.len())
        .into_par_iter()
        .map(|i| {
            let entry = &dataset.entries[i];
            let window = dataset.window(i)?;
            let fv = features::assemble(&window, motion_model, &entry.phone)?;
            Ok((fv.as_row().to_vec(), entry.label.index()))
        })
        .collect();
    let (features, labels): (Vec<_>, Vec<_>) = rows?.into_iter().unzip();
    Ok(TrainingData {
        features,
        labels,
        classes: InvasionLabel::CLASS_ORDER.iter().map(|s| s.to_string()).collect(),
    })
}

/// Output of the full training stage.
pub struct TrainedModels {
    pub motion: ForestModel,
    pub opportunity: ForestModel,
    pub opportunity_cv: CvResult,
    pub motion_cv: CvResult,
}

/// Trains the motion and opportunity forests and evaluates both with
/// stratified k-fold cross-validation.
pub fn train_models(
    dataset: &LabeledDataset,
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<TrainedModels> {
    let motion_samples = 40;
    let motion_data = features::motion_training_data(motion_samples, derive_seed(seed, 1))?;
    let motion = forest::train(&motion_data, params, derive_seed(seed, 2))?;
    let motion_cv = forest::cross_validate(&motion_data, params, k.min(10), derive_seed(seed, 3))?;

    let training = featurize_dataset(dataset, &motion)?;
    let opportunity_cv = forest::cross_validate(&training, params, k, derive_seed(seed, 4))?;
    let opportunity = forest::train(&training, params, derive_seed(seed, 5))?;

    Ok(TrainedModels { motion, opportunity, opportunity_cv, motion_cv })
}
