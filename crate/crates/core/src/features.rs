//! Feature extraction: movement-intensity one-hot plus environment
//! variables for one analysis window.
//!
//! The movement side runs accelerometer magnitude statistics through a
//! motion/stationary forest and thresholds its class probability into
//! three intensity categories. The environment side summarizes the
//! median-smoothed noise and light envelopes and the phone's state bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp;
use crate::error::{Error, Result};
use crate::forest::{self, ForestModel, ForestParams, TrainingData};
use crate::scenegen::{generate_trace, MotionProfile, ScenarioParams};
use crate::trace::{cut_window, PhoneState, Scenario, Window};
use crate::{derive_seed, Scalar, WINDOW_RATE_HZ};

/// Class names the motion forest must be trained with.
pub const MOTION_CLASS: &str = "motion";
pub const STATIONARY_CLASS: &str = "stationary";
pub const MOTION_CLASS_ORDER: [&str; 2] = [MOTION_CLASS, STATIONARY_CLASS];

/// Number of accelerometer summary statistics fed to the motion forest.
pub const MOTION_FEATURE_DIM: usize = 6;

/// Butterworth design used to clean accelerometer channels before feature
/// extraction: human gait stays below ~4 Hz.
pub const ACCEL_FILTER_ORDER: usize = 4;
pub const ACCEL_FILTER_CUTOFF_HZ: Scalar = 5.0;

/// Median-smoothing span for the noise/light envelopes (seconds).
pub const ENV_MEDIAN_SPAN_S: Scalar = 1.0;

/// Three-way movement intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionCategory {
    DefiniteMotion,
    DefiniteStationary,
    RelativeMotionStationary,
}

/// The assembled per-window feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub movement_onehot: [u8; 2],
    pub noise_mean: Scalar,
    pub noise_max: Scalar,
    pub light_mean: Scalar,
    pub light_min: Scalar,
    pub screen_interactive: u8,
    pub audio_route_external: u8,
}

impl FeatureVector {
    pub const COLUMNS: [&'static str; 8] = [
        "movement_stationary_bit",
        "movement_motion_bit",
        "noise_mean_db",
        "noise_max_db",
        "light_mean_lux",
        "light_min_lux",
        "screen_interactive",
        "audio_route_external",
    ];

    /// Numeric row in [`FeatureVector::COLUMNS`] order.
    pub fn as_row(&self) -> [Scalar; 8] {
        [
            self.movement_onehot[0] as Scalar,
            self.movement_onehot[1] as Scalar,
            self.noise_mean,
            self.noise_max,
            self.light_mean,
            self.light_min,
            self.screen_interactive as Scalar,
            self.audio_route_external as Scalar,
        ]
    }
}

fn mean(xs: &[Scalar]) -> Scalar {
    xs.iter().sum::<Scalar>() / xs.len() as Scalar
}

/// Accelerometer summary: per 2-second sub-window the mean, population
/// standard deviation, and mean absolute jerk of the magnitude signal,
/// each aggregated over sub-windows by mean and max.
pub fn motion_features(accel_magnitude: &[Scalar]) -> Result<[Scalar; MOTION_FEATURE_DIM]> {
    let frames = dsp::segment(accel_magnitude, 2.0, 2.0, WINDOW_RATE_HZ)?;
    if frames.is_empty() {
        return Err(Error::InvalidArgument(
            "motion_features: window shorter than 2 s".into(),
        ));
    }
    let mut means = Vec::with_capacity(frames.len());
    let mut stds = Vec::with_capacity(frames.len());
    let mut jerks = Vec::with_capacity(frames.len());
    for frame in frames {
        let m = mean(frame);
        let var = frame.iter().map(|x| (x - m) * (x - m)).sum::<Scalar>() / frame.len() as Scalar;
        let jerk = frame
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() * WINDOW_RATE_HZ)
            .sum::<Scalar>()
            / (frame.len() - 1) as Scalar;
        means.push(m);
        stds.push(var.sqrt());
        jerks.push(jerk);
    }
    let max = |xs: &[Scalar]| xs.iter().copied().fold(Scalar::NEG_INFINITY, Scalar::max);
    Ok([
        mean(&means),
        max(&means),
        mean(&stds),
        max(&stds),
        mean(&jerks),
        max(&jerks),
    ])
}

/// Thresholds the motion-class probability into an intensity category.
///
/// Probabilities in the closed band [0.4, 0.6] are relative
/// motion-stationary; only strictly beyond the band is the state definite.
pub fn movement_intensity(p_motion: Scalar) -> MotionCategory {
    if p_motion > 0.6 {
        MotionCategory::DefiniteMotion
    } else if p_motion < 0.4 {
        MotionCategory::DefiniteStationary
    } else {
        MotionCategory::RelativeMotionStationary
    }
}

/// Two-bit encoding of the movement intensity.
pub fn one_hot(category: MotionCategory) -> [u8; 2] {
    match category {
        MotionCategory::DefiniteMotion => [0, 1],
        MotionCategory::DefiniteStationary => [1, 0],
        MotionCategory::RelativeMotionStationary => [1, 1],
    }
}

/// Environment summary of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvFeatures {
    pub noise_mean: Scalar,
    pub noise_max: Scalar,
    pub light_mean: Scalar,
    pub light_min: Scalar,
    pub screen_interactive: u8,
    pub audio_route_external: u8,
}

pub fn env_features(
    noise_window: &[Scalar],
    light_window: &[Scalar],
    phone: &PhoneState,
) -> Result<EnvFeatures> {
    if noise_window.is_empty() || light_window.is_empty() {
        return Err(Error::InvalidArgument("env_features: empty window".into()));
    }
    Ok(EnvFeatures {
        noise_mean: mean(noise_window),
        noise_max: noise_window.iter().copied().fold(Scalar::NEG_INFINITY, Scalar::max),
        light_mean: mean(light_window),
        light_min: light_window.iter().copied().fold(Scalar::INFINITY, Scalar::min),
        screen_interactive: phone.screen_interactive as u8,
        audio_route_external: phone.audio_route_external() as u8,
    })
}

fn check_motion_model(model: &ForestModel) -> Result<usize> {
    if model.n_features != MOTION_FEATURE_DIM {
        return Err(Error::ModelMismatch(format!(
            "motion model expects {} features, not {MOTION_FEATURE_DIM}",
            model.n_features
        )));
    }
    if model.class_order.len() != 2 {
        return Err(Error::ModelMismatch(
            "motion model must be two-class".into(),
        ));
    }
    model.class_index(MOTION_CLASS)
}

/// Motion-class probability of one window under a motion forest.
pub fn motion_probability(window: &Window, motion_model: &ForestModel) -> Result<Scalar> {
    let motion_idx = check_motion_model(motion_model)?;
    let filt = dsp::butterworth_lowpass(ACCEL_FILTER_ORDER, ACCEL_FILTER_CUTOFF_HZ, WINDOW_RATE_HZ)?;
    let ax = dsp::filter_apply(&filt, &window.ax);
    let ay = dsp::filter_apply(&filt, &window.ay);
    let az = dsp::filter_apply(&filt, &window.az);
    let mag: Vec<Scalar> = ax
        .iter()
        .zip(&ay)
        .zip(&az)
        .map(|((&x, &y), &z)| (x * x + y * y + z * z).sqrt())
        .collect();
    let feats = motion_features(&mag)?;
    Ok(forest::predict_proba(motion_model, &feats)?[motion_idx])
}

/// Runs the full per-window extraction: filtered accelerometer statistics
/// through the motion forest into the one-hot intensity, concatenated with
/// the median-smoothed environment variables.
pub fn assemble(
    window: &Window,
    motion_model: &ForestModel,
    phone: &PhoneState,
) -> Result<FeatureVector> {
    let p_motion = motion_probability(window, motion_model)?;
    let movement_onehot = one_hot(movement_intensity(p_motion));

    let span = (ENV_MEDIAN_SPAN_S * WINDOW_RATE_HZ).round() as usize;
    let noise = dsp::median_filter(&window.noise, span);
    let light = dsp::median_filter(&window.light, span);
    let env = env_features(&noise, &light, phone)?;

    Ok(FeatureVector {
        movement_onehot,
        noise_mean: env.noise_mean,
        noise_max: env.noise_max,
        light_mean: env.light_mean,
        light_min: env.light_min,
        screen_interactive: env.screen_interactive,
        audio_route_external: env.audio_route_external,
    })
}

/// Trains the motion/stationary forest on generator-labeled windows.
pub fn train_motion_model(
    samples_per_class: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let data = motion_training_data(samples_per_class, seed)?;
    forest::train(&data, params, crate::derive_seed(seed, 0x54524e))
}

/// Builds the motion forest's training matrix from generator-labeled
/// windows.
///
/// Walking windows vary gait frequency and amplitude; stationary windows
/// vary a small white-noise amplitude. The ambient channels are irrelevant
/// to the motion features and held fixed.
pub fn motion_training_data(samples_per_class: usize, seed: u64) -> Result<TrainingData> {
    if samples_per_class < 1 {
        return Err(Error::InvalidArgument("need at least one sample per class".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x4d4f54));
    let mut features = Vec::with_capacity(2 * samples_per_class);
    let mut labels = Vec::with_capacity(2 * samples_per_class);

    let base = ScenarioParams {
        noise_mean_db: 50.0,
        noise_std_db: 2.0,
        light_mean_lux: 400.0,
        light_std_lux: 30.0,
        motion_profile: MotionProfile::Walking,
        gait_freq_hz: 2.0,
        accel_amp: 2.0,
        burst_rate_per_min: 0.0,
    };

    for i in 0..2 * samples_per_class {
        let walking = i % 2 == 0;
        let mut p = base;
        if walking {
            p.motion_profile = MotionProfile::Walking;
            p.gait_freq_hz = rng.gen_range(1.4..2.6);
            p.accel_amp = rng.gen_range(1.0..3.0);
        } else {
            p.motion_profile = MotionProfile::Seated;
            p.gait_freq_hz = 0.0;
            p.accel_amp = rng.gen_range(0.01..0.12);
        }
        let trace = generate_trace(
            Scenario::QuietRoad,
            30.0,
            PhoneState::pocketed(),
            &p,
            derive_seed(seed, 0x10_0000 + i as u64),
        )?;
        let window = cut_window(&trace, 0.0, trace.duration)?;

        let filt =
            dsp::butterworth_lowpass(ACCEL_FILTER_ORDER, ACCEL_FILTER_CUTOFF_HZ, WINDOW_RATE_HZ)?;
        let ax = dsp::filter_apply(&filt, &window.ax);
        let ay = dsp::filter_apply(&filt, &window.ay);
        let az = dsp::filter_apply(&filt, &window.az);
        let mag: Vec<Scalar> = ax
            .iter()
            .zip(&ay)
            .zip(&az)
            .map(|((&x, &y), &z)| (x * x + y * y + z * z).sqrt())
            .collect();
        features.push(motion_features(&mag)?.to_vec());
        labels.push(if walking { 0 } else { 1 });
    }

    Ok(TrainingData {
        features,
        labels,
        classes: MOTION_CLASS_ORDER.iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::ParamsTable;

    #[test]
    fn motion_features_of_silence_are_zero() {
        let feats = motion_features(&vec![0.0; 200]).unwrap();
        assert_eq!(feats, [0.0; 6]);
    }

    #[test]
    fn motion_features_of_constant_magnitude() {
        // constant (1, 0, 0) m/s² gives |a| = 1 everywhere
        let feats = motion_features(&vec![1.0; 300]).unwrap();
        assert_eq!(feats[0], 1.0); // mean of sub-window means
        assert_eq!(feats[1], 1.0);
        assert_eq!(feats[2], 0.0); // stds
        assert_eq!(feats[3], 0.0);
        assert_eq!(feats[4], 0.0); // jerks
        assert_eq!(feats[5], 0.0);
    }

    #[test]
    fn motion_features_need_two_seconds() {
        assert!(motion_features(&vec![1.0; 50]).is_err());
    }

    #[test]
    fn walking_windows_are_busier_than_seated() {
        let table = ParamsTable::default();
        let walk = generate_trace(
            Scenario::QuietRoad,
            30.0,
            PhoneState::pocketed(),
            table.get(Scenario::QuietRoad).unwrap(),
            5,
        )
        .unwrap();
        let sit = generate_trace(
            Scenario::Car,
            30.0,
            PhoneState::pocketed(),
            table.get(Scenario::Car).unwrap(),
            5,
        )
        .unwrap();
        let wf = motion_features(&cut_window(&walk, 0.0, 30.0).unwrap().accel_magnitude()).unwrap();
        let sf = motion_features(&cut_window(&sit, 0.0, 30.0).unwrap().accel_magnitude()).unwrap();
        assert!(wf[2] > sf[2], "walking std {} <= seated std {}", wf[2], sf[2]);
        assert!(wf[0] > sf[0]);
    }

    #[test]
    fn movement_intensity_thresholds() {
        use MotionCategory::*;
        assert_eq!(movement_intensity(0.70), DefiniteMotion);
        assert_eq!(movement_intensity(0.56), RelativeMotionStationary);
        assert_eq!(movement_intensity(0.45), RelativeMotionStationary);
        assert_eq!(movement_intensity(0.15), DefiniteStationary);
        // band edges are relative by definition
        assert_eq!(movement_intensity(0.4), RelativeMotionStationary);
        assert_eq!(movement_intensity(0.6), RelativeMotionStationary);
        assert_eq!(movement_intensity(0.5), RelativeMotionStationary);
    }

    #[test]
    fn one_hot_encoding_table() {
        assert_eq!(one_hot(MotionCategory::DefiniteMotion), [0, 1]);
        assert_eq!(one_hot(MotionCategory::DefiniteStationary), [1, 0]);
        assert_eq!(one_hot(MotionCategory::RelativeMotionStationary), [1, 1]);
    }

    #[test]
    fn env_feature_definitions() {
        let phone = PhoneState::pocketed();
        let env = env_features(&[50.0; 10], &[0.0; 10], &phone).unwrap();
        assert_eq!(env.noise_mean, 50.0);
        assert_eq!(env.noise_max, 50.0);
        assert_eq!(env.light_mean, 0.0);
        assert_eq!(env.light_min, 0.0);
        assert_eq!(env.audio_route_external, 0);

        let mut bt = phone;
        bt.bluetooth_audio = true;
        let env = env_features(&[50.0; 10], &[1.0; 10], &bt).unwrap();
        assert_eq!(env.audio_route_external, 1);

        assert!(env_features(&[], &[1.0], &phone).is_err());
    }

    fn small_motion_model() -> ForestModel {
        let params = ForestParams { n_estimators: 30, ..Default::default() };
        train_motion_model(12, &params, 7).unwrap()
    }

    #[test]
    fn zero_accel_window_is_definitely_stationary() {
        let model = small_motion_model();
        let table = ParamsTable::default();
        let mut p = *table.get(Scenario::Car).unwrap();
        p.accel_amp = 0.0;
        let trace = generate_trace(Scenario::Car, 30.0, PhoneState::pocketed(), &p, 8).unwrap();
        let w = cut_window(&trace, 0.0, 30.0).unwrap();
        let fv = assemble(&w, &model, &trace.phone).unwrap();
        assert_eq!(fv.movement_onehot, [1, 0]);
    }

    #[test]
    fn walking_window_is_definitely_moving() {
        let model = small_motion_model();
        let table = ParamsTable::default();
        let trace = generate_trace(
            Scenario::QuietRoad,
            30.0,
            PhoneState::pocketed(),
            table.get(Scenario::QuietRoad).unwrap(),
            9,
        )
        .unwrap();
        let w = cut_window(&trace, 0.0, 30.0).unwrap();
        let fv = assemble(&w, &model, &trace.phone).unwrap();
        assert_eq!(fv.movement_onehot, [0, 1]);
    }

    #[test]
    fn restaurant_noise_mean_tracks_configured_level() {
        let model = small_motion_model();
        let table = ParamsTable::default();
        let p = table.get(Scenario::Restaurant).unwrap();
        let trace =
            generate_trace(Scenario::Restaurant, 30.0, PhoneState::pocketed(), p, 21).unwrap();
        let w = cut_window(&trace, 0.0, 30.0).unwrap();
        let fv = assemble(&w, &model, &trace.phone).unwrap();
        let sigma = p.noise_std_db;
        assert!(
            (fv.noise_mean - p.noise_mean_db).abs() <= 2.0 * sigma + 1.0,
            "noise_mean {} vs configured {}",
            fv.noise_mean,
            p.noise_mean_db
        );
    }

    #[test]
    fn assemble_rejects_wrong_model() {
        let table = ParamsTable::default();
        let trace = generate_trace(
            Scenario::Car,
            10.0,
            PhoneState::pocketed(),
            table.get(Scenario::Car).unwrap(),
            3,
        )
        .unwrap();
        let w = cut_window(&trace, 0.0, 10.0).unwrap();

        // wrong dimensionality
        let bad_dim = forest::train(
            &TrainingData {
                features: vec![vec![0.0], vec![1.0]],
                labels: vec![0, 1],
                classes: vec![MOTION_CLASS.into(), STATIONARY_CLASS.into()],
            },
            &ForestParams { n_estimators: 2, ..Default::default() },
            1,
        )
        .unwrap();
        assert!(assemble(&w, &bad_dim, &trace.phone).is_err());

        // wrong class names
        let bad_classes = forest::train(
            &TrainingData {
                features: vec![vec![0.0; 6], vec![1.0; 6]],
                labels: vec![0, 1],
                classes: vec!["yes".into(), "no".into()],
            },
            &ForestParams { n_estimators: 2, ..Default::default() },
            1,
        )
        .unwrap();
        assert!(matches!(
            assemble(&w, &bad_classes, &trace.phone),
            Err(Error::ModelMismatch(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn intensity_is_total_and_onehot_image_is_exact(p in 0.0f64..=1.0) {
                let encoded = one_hot(movement_intensity(p));
                prop_assert!(matches!(encoded, [0, 1] | [1, 0] | [1, 1]));
                if p > 0.6 {
                    prop_assert_eq!(encoded, [0, 1]);
                } else if p < 0.4 {
                    prop_assert_eq!(encoded, [1, 0]);
                } else {
                    prop_assert_eq!(encoded, [1, 1]);
                }
            }
        }
    }
}
