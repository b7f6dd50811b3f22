//! Launch/hold decisions per sensing window, noise-gated standby, and the
//! ambient-indexed playback-volume policy.
//!
//! Hard gates come first: a window never launches while the user is
//! interacting with the screen or audio is routed off the built-in
//! speaker. Past the gates, the opportunity forest's success probability
//! is compared against the launch threshold and the volume policy
//! prescribes the minimum playback levels for the measured ambient noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features;
use crate::forest::{self, ForestModel};
use crate::scenegen::InvasionLabel;
use crate::trace::{PhoneState, Window};
use crate::Scalar;

/// Default opportunity-probability threshold for launching.
pub const DEFAULT_THRESHOLD: Scalar = 0.6;

/// Default standby gate: below this ambient level the full sensor suite
/// stays off.
pub const DEFAULT_GATE_THRESHOLD_DB: Scalar = 50.0;

/// A built-in speaker cannot plausibly exceed this level; louder
/// requirements force a hold.
pub const SHOUT_CEILING_DB: Scalar = 80.0;

/// One measured row of the volume table: minimum playback levels at a
/// given ambient noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeAnchor {
    pub ambient_db: Scalar,
    pub min_activation_db: Scalar,
    pub min_command_db: Scalar,
}

/// Piecewise-linear volume policy over ambient anchors (`policy.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumePolicy {
    pub anchors: Vec<VolumeAnchor>,
    /// Safety margin added on top of both interpolated minima.
    pub margin_db: Scalar,
}

impl Default for VolumePolicy {
    /// The five measured anchor rows.
    fn default() -> Self {
        let row = |ambient, activation, command| VolumeAnchor {
            ambient_db: ambient,
            min_activation_db: activation,
            min_command_db: command,
        };
        VolumePolicy {
            anchors: vec![
                row(30.0, 44.0, 40.0),
                row(41.0, 44.0, 40.0),
                row(52.0, 54.0, 54.0),
                row(68.0, 67.0, 67.0),
                row(73.0, 75.0, 76.0),
            ],
            margin_db: 1.0,
        }
    }
}

impl VolumePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::InvalidArgument("volume policy has no anchors".into()));
        }
        for w in self.anchors.windows(2) {
            if w[1].ambient_db <= w[0].ambient_db {
                return Err(Error::InvalidArgument(
                    "volume anchors must be strictly increasing in ambient level".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Minimum playback volumes for an ambient level: piecewise-linear
/// interpolation between anchors, clamped at the end anchors, plus the
/// policy margin on both outputs.
pub fn playback_volume(ambient_db: Scalar, policy: &VolumePolicy) -> (Scalar, Scalar) {
    let anchors = &policy.anchors;
    let first = anchors.first().expect("validated policy");
    let last = anchors.last().expect("validated policy");

    let (activation, command) = if ambient_db <= first.ambient_db {
        (first.min_activation_db, first.min_command_db)
    } else if ambient_db >= last.ambient_db {
        (last.min_activation_db, last.min_command_db)
    } else {
        let hi = anchors
            .iter()
            .position(|a| a.ambient_db >= ambient_db)
            .expect("ambient inside anchor span");
        let (lo, hi) = (&anchors[hi - 1], &anchors[hi]);
        let frac = (ambient_db - lo.ambient_db) / (hi.ambient_db - lo.ambient_db);
        (
            lo.min_activation_db + frac * (hi.min_activation_db - lo.min_activation_db),
            lo.min_command_db + frac * (hi.min_command_db - lo.min_command_db),
        )
    };
    (activation + policy.margin_db, command + policy.margin_db)
}

/// Standby gate: activate full sensing only when the ambient noise level
/// reaches the gate threshold.
pub fn standby_gate(noise_level_db: Scalar, gate_threshold_db: Scalar) -> bool {
    noise_level_db >= gate_threshold_db
}

/// Outcome of one window's launch decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerDecision {
    pub launch: bool,
    pub p_success: Scalar,
    pub activation_volume_db: Scalar,
    pub command_volume_db: Scalar,
    /// Decided in noise-gated standby, without full sensing.
    pub gated: bool,
}

impl TriggerDecision {
    /// The hold decision produced in standby when the noise gate stays
    /// closed; no model ran and no volumes are prescribed beyond the
    /// policy floor.
    pub fn standby_hold(ambient_db: Scalar, policy: &VolumePolicy) -> TriggerDecision {
        let (activation, command) = playback_volume(ambient_db, policy);
        TriggerDecision {
            launch: false,
            p_success: 0.0,
            activation_volume_db: activation,
            command_volume_db: command,
            gated: true,
        }
    }
}

fn check_opportunity_model(model: &ForestModel) -> Result<usize> {
    if model.n_features != features::FeatureVector::COLUMNS.len() {
        return Err(Error::ModelMismatch(format!(
            "opportunity model expects {} features, not {}",
            model.n_features,
            features::FeatureVector::COLUMNS.len()
        )));
    }
    for class in InvasionLabel::CLASS_ORDER {
        model.class_index(class)?;
    }
    model.class_index(InvasionLabel::CLASS_ORDER[InvasionLabel::SuccessfulInvasion.index()])
}

/// Full launch/hold decision for one sensing window.
///
/// Launch requires: screen not interactive, audio on the built-in
/// speaker, opportunity probability strictly above the threshold, and a
/// prescribed command volume below the speaker's realism ceiling.
pub fn decide(
    window: &Window,
    phone: &PhoneState,
    opportunity_model: &ForestModel,
    motion_model: &ForestModel,
    policy: &VolumePolicy,
    threshold: Scalar,
) -> Result<TriggerDecision> {
    policy.validate()?;
    let success_idx = check_opportunity_model(opportunity_model)?;

    let fv = features::assemble(window, motion_model, phone)?;
    let proba = forest::predict_proba(opportunity_model, &fv.as_row())?;
    let p_success = proba[success_idx];

    let (activation, command) = playback_volume(fv.noise_mean, policy);
    let gates_pass = !phone.screen_interactive && !phone.audio_route_external();
    let launch = gates_pass && p_success > threshold && command <= SHOUT_CEILING_DB;

    Ok(TriggerDecision {
        launch,
        p_success,
        activation_volume_db: activation,
        command_volume_db: command,
        gated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{train, ForestParams, TrainingData};
    use crate::scenegen::{generate_trace, ParamsTable};
    use crate::trace::{cut_window, Scenario};

    #[test]
    fn default_policy_matches_measured_rows() {
        let policy = VolumePolicy::default();
        policy.validate().unwrap();
        let rows: Vec<(Scalar, Scalar, Scalar)> = policy
            .anchors
            .iter()
            .map(|a| (a.ambient_db, a.min_activation_db, a.min_command_db))
            .collect();
        assert_eq!(
            rows,
            vec![
                (30.0, 44.0, 40.0),
                (41.0, 44.0, 40.0),
                (52.0, 54.0, 54.0),
                (68.0, 67.0, 67.0),
                (73.0, 75.0, 76.0),
            ]
        );
    }

    fn margin_free() -> VolumePolicy {
        VolumePolicy { margin_db: 0.0, ..Default::default() }
    }

    #[test]
    fn playback_volume_at_anchors_and_between() {
        let policy = margin_free();
        assert_eq!(playback_volume(30.0, &policy), (44.0, 40.0));
        assert_eq!(playback_volume(52.0, &policy), (54.0, 54.0));

        // independent piecewise computation between (41 -> 44, 40) and (52 -> 54, 54)
        let frac: Scalar = (46.5 - 41.0) / (52.0 - 41.0);
        let expect_act = 44.0 + frac * (54.0 - 44.0);
        let expect_cmd = 40.0 + frac * (54.0 - 40.0);
        let (act, cmd) = playback_volume(46.5, &policy);
        assert!((act - expect_act).abs() < 1e-9);
        assert!((cmd - expect_cmd).abs() < 1e-9);
        assert!((act - 49.0).abs() < 1e-9);
        assert!((cmd - 47.0).abs() < 1e-9);
    }

    #[test]
    fn playback_volume_clamps_at_ends() {
        let policy = margin_free();
        assert_eq!(playback_volume(10.0, &policy), (44.0, 40.0));
        assert_eq!(playback_volume(95.0, &policy), (75.0, 76.0));
    }

    #[test]
    fn margin_is_added_to_both_outputs() {
        let policy = VolumePolicy { margin_db: 2.5, ..Default::default() };
        let (act, cmd) = playback_volume(30.0, &policy);
        assert_eq!((act, cmd), (46.5, 42.5));
    }

    #[test]
    fn playback_volume_is_monotone_over_span() {
        let policy = margin_free();
        let mut prev = playback_volume(30.0, &policy);
        let mut ambient = 30.0;
        while ambient <= 73.0 {
            let cur = playback_volume(ambient, &policy);
            assert!(cur.0 >= prev.0 - 1e-12, "activation regressed at {ambient}");
            assert!(cur.1 >= prev.1 - 1e-12, "command regressed at {ambient}");
            prev = cur;
            ambient += 0.1;
        }
    }

    #[test]
    fn standby_gate_thresholds() {
        assert!(standby_gate(55.0, 50.0));
        assert!(!standby_gate(45.0, 50.0));
        assert!(standby_gate(50.0, 50.0)); // boundary opens the gate
    }

    /// Opportunity model trained directly on hand-made feature rows where
    /// only the noise level matters: loud means successful.
    fn toy_opportunity_model() -> ForestModel {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let loud = i % 2 == 0;
            let noise: Scalar = if loud { 62.0 + (i % 7) as Scalar } else { 35.0 + (i % 7) as Scalar };
            features.push(vec![1.0, 0.0, noise, noise + 4.0, 400.0, 380.0, 0.0, 0.0]);
            labels.push(if loud { 1 } else { 0 });
        }
        train(
            &TrainingData {
                features,
                labels,
                classes: InvasionLabel::CLASS_ORDER.iter().map(|s| s.to_string()).collect(),
            },
            &ForestParams { n_estimators: 40, ..Default::default() },
            3,
        )
        .unwrap()
    }

    fn motion_model() -> ForestModel {
        features::train_motion_model(10, &ForestParams { n_estimators: 20, ..Default::default() }, 2)
            .unwrap()
    }

    fn window_for(scenario: Scenario, seed: u64) -> (crate::trace::Window, PhoneState) {
        let table = ParamsTable::default();
        let trace = generate_trace(
            scenario,
            30.0,
            PhoneState::pocketed(),
            table.get(scenario).unwrap(),
            seed,
        )
        .unwrap();
        let phone = trace.phone;
        (cut_window(&trace, 0.0, 30.0).unwrap(), phone)
    }

    #[test]
    fn screen_interaction_blocks_launch_regardless_of_probability() {
        let opp = toy_opportunity_model();
        let motion = motion_model();
        let (w, mut phone) = window_for(Scenario::Restaurant, 4);
        phone.screen_interactive = true;
        let d = decide(&w, &phone, &opp, &motion, &VolumePolicy::default(), 0.0).unwrap();
        assert!(!d.launch);
        assert!(d.p_success > 0.5, "probability itself stays high");
    }

    #[test]
    fn external_audio_route_blocks_launch() {
        let opp = toy_opportunity_model();
        let motion = motion_model();
        let (w, mut phone) = window_for(Scenario::Restaurant, 5);
        phone.wired_headphone = true;
        let d = decide(&w, &phone, &opp, &motion, &VolumePolicy::default(), 0.0).unwrap();
        assert!(!d.launch);
    }

    #[test]
    fn quiet_road_holds_and_restaurant_launches() {
        let opp = toy_opportunity_model();
        let motion = motion_model();

        let (quiet, phone) = window_for(Scenario::QuietRoad, 6);
        let d = decide(&quiet, &phone, &opp, &motion, &VolumePolicy::default(), DEFAULT_THRESHOLD)
            .unwrap();
        assert!(!d.launch, "quiet road launched with p = {}", d.p_success);

        let (loud, phone) = window_for(Scenario::Restaurant, 6);
        let d = decide(&loud, &phone, &opp, &motion, &VolumePolicy::default(), DEFAULT_THRESHOLD)
            .unwrap();
        assert!(d.launch, "restaurant held with p = {}", d.p_success);
        // launch implies prescribed volumes at or above the minima for a
        // loud (> 52 dB ambient) window, margin included
        let policy = VolumePolicy::default();
        assert!(d.activation_volume_db >= 54.0 + policy.margin_db);
        assert!(d.command_volume_db >= 54.0 + policy.margin_db);
    }

    #[test]
    fn threshold_one_never_launches() {
        let opp = toy_opportunity_model();
        let motion = motion_model();
        for seed in 0..5 {
            let (w, phone) = window_for(Scenario::Restaurant, seed);
            let d = decide(&w, &phone, &opp, &motion, &VolumePolicy::default(), 1.0).unwrap();
            assert!(!d.launch);
        }
    }

    #[test]
    fn decisions_are_deterministic() {
        let opp = toy_opportunity_model();
        let motion = motion_model();
        let (w, phone) = window_for(Scenario::PublicTransport, 11);
        let a = decide(&w, &phone, &opp, &motion, &VolumePolicy::default(), 0.6).unwrap();
        let b = decide(&w, &phone, &opp, &motion, &VolumePolicy::default(), 0.6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_model_shape_is_rejected() {
        let motion = motion_model();
        let (w, phone) = window_for(Scenario::Car, 1);
        // the motion model is not a valid opportunity model (6 features, wrong classes)
        let err = decide(&w, &phone, &motion, &motion, &VolumePolicy::default(), 0.6);
        assert!(matches!(err, Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn standby_hold_is_marked_gated() {
        let d = TriggerDecision::standby_hold(40.0, &VolumePolicy::default());
        assert!(d.gated);
        assert!(!d.launch);
    }

    #[test]
    fn policy_json_round_trip() {
        let policy = VolumePolicy::default();
        let json = serde_json::to_string_pretty(&policy).unwrap();
        let back: VolumePolicy = serde_json::from_str(&json).unwrap();
        assert_eq!(policy, back);
    }
}
