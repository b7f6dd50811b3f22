//! Four-phase attack lifecycle: state machine, user-notice model,
//! defense predicates, resource ledger, and the seeded trial runner.
//!
//! A trial walks one simulated device through call monitoring (P1),
//! recording and keyword synthesis (P2), environment monitoring (P3), and
//! speaker playback (P4), accounting resource use along the way. Each
//! trial owns its state machine and derives all randomness from its seed;
//! batches of trials run in parallel with results identical to sequential
//! execution.

mod ledger;
mod notice;
mod trial;

pub use ledger::{
    ledger_accumulate, DeviceProfile, FileSizes, LedgerConfig, LedgerSummary, PowerRates,
    ResourceLedger,
};
pub use notice::{
    calibrate_notice, notice, notice_probability, notice_targets_from_success,
    table1_success_targets, NoticeModel,
};
pub use trial::{
    attack_outcome, default_commands, load_commands, run_batch, run_trial, AttackOutcome,
    LaunchPolicy, OutcomeLabeler, ScenarioAggregate, SimulationReport, TrialConfig, TrialRecord,
    ATTACK_MINUTES, REPORT_SCHEMA,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Lifecycle phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    P1CallMonitor,
    P2RecordSynthesize,
    P3EnvironmentMonitor,
    P4Attack,
    Done,
}

impl Phase {
    /// Ledger slot for the four active phases; `Done` has none.
    pub fn index(self) -> Option<usize> {
        match self {
            Phase::P1CallMonitor => Some(0),
            Phase::P2RecordSynthesize => Some(1),
            Phase::P3EnvironmentMonitor => Some(2),
            Phase::P4Attack => Some(3),
            Phase::Done => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Phase::P1CallMonitor => "P1",
            Phase::P2RecordSynthesize => "P2",
            Phase::P3EnvironmentMonitor => "P3",
            Phase::P4Attack => "P4",
            Phase::Done => "done",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Events driving the lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    CallStarted,
    /// A 20-second transcript slice was recorded; `completes_key` is true
    /// when it supplied the last missing keyword unit.
    SegmentAvailable { completes_key: bool },
    CallEnded,
    /// A full sensing window passed without a decision to act on.
    WindowElapsed,
    DecisionMade { launch: bool },
    AttackCompleted { more_commands: bool },
}

impl Event {
    pub fn label(&self) -> &'static str {
        match self {
            Event::CallStarted => "call_started",
            Event::SegmentAvailable { .. } => "segment_available",
            Event::CallEnded => "call_ended",
            Event::WindowElapsed => "window_elapsed",
            Event::DecisionMade { .. } => "decision_made",
            Event::AttackCompleted { .. } => "attack_completed",
        }
    }
}

/// The lifecycle transition function.
///
/// Call events are ignored in P3 and P4 — once the key is synthesized the
/// call-monitoring service is disabled — while every other (phase, event)
/// pair not in the table is an error.
pub fn step(phase: Phase, event: Event) -> Result<Phase> {
    use Event::*;
    use Phase::*;
    let next = match (phase, event) {
        (P1CallMonitor, CallStarted) => P2RecordSynthesize,

        (P2RecordSynthesize, SegmentAvailable { completes_key: true }) => P3EnvironmentMonitor,
        (P2RecordSynthesize, SegmentAvailable { completes_key: false }) => P2RecordSynthesize,
        (P2RecordSynthesize, CallEnded) => P1CallMonitor,

        (P3EnvironmentMonitor, WindowElapsed) => P3EnvironmentMonitor,
        (P3EnvironmentMonitor, DecisionMade { launch: true }) => P4Attack,
        (P3EnvironmentMonitor, DecisionMade { launch: false }) => P3EnvironmentMonitor,
        // SMVR is disabled from P3 on; call state changes are absorbed
        (P3EnvironmentMonitor, CallStarted) => P3EnvironmentMonitor,
        (P3EnvironmentMonitor, CallEnded) => P3EnvironmentMonitor,

        (P4Attack, AttackCompleted { more_commands: true }) => P3EnvironmentMonitor,
        (P4Attack, AttackCompleted { more_commands: false }) => Done,

        (phase, event) => {
            return Err(Error::Transition {
                phase: phase.label().to_string(),
                event: event.label().to_string(),
            })
        }
    };
    Ok(next)
}

/// Simulated countermeasures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefenseKind {
    /// Reject commands that originate from the phone's own speaker.
    SourceCheck,
    /// Accept commands only when body-surface vibration matches the voice.
    ContinuousAuth,
    /// Flag loudspeaker playback by its magnetic-field signature.
    MagneticDetect,
}

/// Tunable error rates of the defense predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenseConfig {
    /// Fraction of legitimate hands-free commands continuous auth rejects.
    pub continuous_auth_handsfree_reject: Scalar,
    /// Magnetic detector misses this fraction of speaker playback.
    pub magnetic_false_negative: Scalar,
    /// Magnetic detector flags this fraction of legitimate commands when
    /// other powered devices are nearby.
    pub magnetic_false_positive: Scalar,
}

impl Default for DefenseConfig {
    fn default() -> Self {
        DefenseConfig {
            continuous_auth_handsfree_reject: 1.0,
            magnetic_false_negative: 0.05,
            magnetic_false_positive: 0.10,
        }
    }
}

/// Where a voice command came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudioSource {
    BuiltinSpeaker,
    OwnerVoice,
}

/// What a defense predicate sees about one command event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackContext {
    pub source: AudioSource,
    /// The owner is physically holding the phone while speaking.
    pub holding: bool,
    pub other_devices_present: bool,
}

/// Applies one defense predicate; true means the command is blocked.
pub fn apply_defense(
    defense: DefenseKind,
    config: &DefenseConfig,
    ctx: &AttackContext,
    rng: &mut ChaCha8Rng,
) -> bool {
    match defense {
        DefenseKind::SourceCheck => ctx.source == AudioSource::BuiltinSpeaker,
        DefenseKind::ContinuousAuth => match ctx.source {
            // playback never matches the owner's body vibration
            AudioSource::BuiltinSpeaker => true,
            AudioSource::OwnerVoice => {
                !ctx.holding && rng.gen::<Scalar>() < config.continuous_auth_handsfree_reject
            }
        },
        DefenseKind::MagneticDetect => match ctx.source {
            AudioSource::BuiltinSpeaker => rng.gen::<Scalar>() >= config.magnetic_false_negative,
            AudioSource::OwnerVoice => {
                ctx.other_devices_present && rng.gen::<Scalar>() < config.magnetic_false_positive
            }
        },
    }
}
