//! Seeded end-to-end trial execution and batch reporting.
//!
//! One trial drives the phase machine over synthetic events: Poisson call
//! arrivals, 20-second transcript segments feeding keyword capture,
//! fresh 3-minute sensing windows, and finally speaker playback whose
//! outcome is drawn from the notice model and command recognition. All
//! randomness flows through per-purpose RNG streams derived from the
//! trial seed, so changing one draw (say, a candidate notice offset)
//! never perturbs the others.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ENV_MEDIAN_SPAN_S;
use crate::forest::ForestModel;
use crate::keyword::{
    feed_segment, synthesize, ActivationConfig, ActivationKey, CaptureMode, CaptureState, Lexicon,
};
use crate::scenegen::{
    generate_trace, ConversationModel, InvasionLabel, ParamsTable, WindowLabeler,
};
use crate::trace::{cut_window, PhoneState, Placement, Scenario, Window};
use crate::trigger::{self, TriggerDecision, VolumePolicy};
use crate::{derive_seed, dsp, Scalar, WINDOW_RATE_HZ};

use super::ledger::{ledger_accumulate, LedgerConfig, LedgerSummary, ResourceLedger};
use super::notice::{notice_with_uniform, NoticeModel};
use super::{
    apply_defense, step, AttackContext, AudioSource, DefenseConfig, DefenseKind, Event, Phase,
};

/// Whether the detector decides launches or every window is played
/// (the reference-experiment protocol the notice model is calibrated
/// against).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaunchPolicy {
    Detector,
    Always,
}

/// Playback duration of one activation-plus-command attack (minutes).
pub const ATTACK_MINUTES: Scalar = 0.2;

/// Shortest simulated wait, to keep the event loop advancing.
const MIN_WAIT_MINUTES: Scalar = 0.05;

// per-purpose RNG stream tags
const STREAM_CALLS: u64 = 1;
const STREAM_CONVERSATION: u64 = 2;
const STREAM_PLAYBACK: u64 = 4;
const STREAM_NOTICE: u64 = 5;
const STREAM_DEFENSE: u64 = 6;
const STREAM_WINDOW_BASE: u64 = 0x5730_0000;

/// The twenty command lines shipped with the simulator. Deliberately
/// mundane assistant queries; the command list is simulation data, loaded
/// from `commands.txt` at run time.
pub fn default_commands() -> Vec<String> {
    [
        "what time is it",
        "set a timer for five minutes",
        "what is the weather today",
        "turn on the flashlight",
        "open the calendar",
        "play some music",
        "what day is it tomorrow",
        "set an alarm for seven am",
        "how far is the moon",
        "tell me a joke",
        "navigate to the nearest cafe",
        "take a note",
        "what is on my schedule",
        "turn up the brightness",
        "mute the volume",
        "read my latest message",
        "how do you say hello in french",
        "start a stopwatch",
        "what is two plus two",
        "show my photos",
    ]
    .into_iter()
    .map(str::to_string)
    .collect()
}

/// Reads a command list: one command per line, blank lines ignored.
pub fn load_commands(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let commands: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if commands.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no commands in {}",
            path.display()
        )));
    }
    Ok(commands)
}

/// Everything a trial needs besides its scenario and seed.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub params: ParamsTable,
    pub phone: PhoneState,
    pub policy: VolumePolicy,
    pub notice: NoticeModel,
    pub lexicon: Lexicon,
    pub conversation: ConversationModel,
    pub capture_mode: CaptureMode,
    pub activation: ActivationConfig,
    pub commands: Vec<String>,
    pub p_recognized: Scalar,
    pub motion_model: Option<ForestModel>,
    pub opportunity_model: Option<ForestModel>,
    pub threshold: Scalar,
    pub window_minutes: Scalar,
    pub sensing_rate_hz: Scalar,
    pub gating: bool,
    pub gate_threshold_db: Scalar,
    pub launch_policy: LaunchPolicy,
    pub defenses: Vec<DefenseKind>,
    pub defense_config: DefenseConfig,
    pub ledger: LedgerConfig,
    /// Mean call arrivals per hour (Poisson).
    pub calls_per_hour: Scalar,
    /// Mean call duration in minutes (exponential).
    pub mean_call_minutes: Scalar,
    /// Recording slice length fed to keyword capture.
    pub segment_seconds: Scalar,
    /// Simulated-time horizon per trial.
    pub max_minutes: Scalar,
    /// Commands played per successful launch window.
    pub commands_per_attack: usize,
}

impl TrialConfig {
    pub fn new(notice: NoticeModel) -> Self {
        TrialConfig {
            params: ParamsTable::default(),
            phone: PhoneState::pocketed(),
            policy: VolumePolicy::default(),
            notice,
            lexicon: Lexicon::default_ok_google(),
            conversation: ConversationModel::default(),
            capture_mode: CaptureMode::WordBased,
            activation: ActivationConfig::default(),
            commands: default_commands(),
            p_recognized: 0.95,
            motion_model: None,
            opportunity_model: None,
            threshold: trigger::DEFAULT_THRESHOLD,
            window_minutes: 3.0,
            sensing_rate_hz: 50.0,
            gating: false,
            gate_threshold_db: trigger::DEFAULT_GATE_THRESHOLD_DB,
            launch_policy: LaunchPolicy::Always,
            defenses: Vec::new(),
            defense_config: DefenseConfig::default(),
            ledger: LedgerConfig::default(),
            calls_per_hour: 2.0,
            mean_call_minutes: 3.0,
            segment_seconds: 20.0,
            max_minutes: 120.0,
            commands_per_attack: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.policy.validate()?;
        self.lexicon.validate()?;
        if self.commands.is_empty() {
            return Err(Error::InvalidArgument("command list is empty".into()));
        }
        for (what, v) in [("p_recognized", self.p_recognized), ("threshold", self.threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{what} outside [0, 1]")));
            }
        }
        for (what, v) in [
            ("window_minutes", self.window_minutes),
            ("calls_per_hour", self.calls_per_hour),
            ("mean_call_minutes", self.mean_call_minutes),
            ("segment_seconds", self.segment_seconds),
        ] {
            if v <= 0.0 {
                return Err(Error::InvalidArgument(format!("{what} must be positive")));
            }
        }
        if self.max_minutes < self.window_minutes {
            return Err(Error::InvalidArgument(
                "max_minutes shorter than one sensing window".into(),
            ));
        }
        if self.commands_per_attack < 1 {
            return Err(Error::InvalidArgument("commands_per_attack must be >= 1".into()));
        }
        if self.launch_policy == LaunchPolicy::Detector
            && (self.motion_model.is_none() || self.opportunity_model.is_none())
        {
            return Err(Error::InvalidArgument(
                "detector launch policy requires motion and opportunity models".into(),
            ));
        }
        Ok(())
    }
}

/// Draw-level outcome of playing one attack into a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOutcome {
    pub ambient_at_play_db: Scalar,
    pub peak_volume_db: Scalar,
    pub noticed: bool,
    pub recognized: bool,
}

/// Plays one attack into a window and draws its outcome.
///
/// The playback volume follows the policy at the window's smoothed mean
/// noise level; the notice draw uses the smoothed ambient level at a
/// random playback moment, so sudden quiet or loud spells inside the
/// window shift the odds. Shared by the trial runner and the dataset
/// ground-truth labeler so both sample the same distribution.
pub fn attack_outcome(
    noise_median: &[Scalar],
    scenario: Scenario,
    policy: &VolumePolicy,
    notice_model: &NoticeModel,
    p_recognized: Scalar,
    rng_play: &mut ChaCha8Rng,
    rng_notice: &mut ChaCha8Rng,
) -> AttackOutcome {
    let noise_mean = noise_median.iter().sum::<Scalar>() / noise_median.len() as Scalar;
    let (activation, command) = trigger::playback_volume(noise_mean, policy);
    let peak = activation.max(command);
    let play_idx = rng_play.gen_range(0..noise_median.len());
    let ambient = noise_median[play_idx];
    let recognized = rng_play.gen::<Scalar>() < p_recognized;
    let uniform = rng_notice.gen::<Scalar>();
    let noticed = notice_with_uniform(notice_model, scenario, ambient, peak, uniform);
    AttackOutcome {
        ambient_at_play_db: ambient,
        peak_volume_db: peak,
        noticed,
        recognized,
    }
}

/// Ground-truth labeler backing dataset generation: a window is a
/// successful invasion when a played attack would go unnoticed and the
/// command would be recognized.
pub struct OutcomeLabeler {
    pub notice: NoticeModel,
    pub policy: VolumePolicy,
    pub p_recognized: Scalar,
}

impl WindowLabeler for OutcomeLabeler {
    fn label(
        &self,
        scenario: Scenario,
        window: &Window,
        _phone: &PhoneState,
        rng: &mut ChaCha8Rng,
    ) -> InvasionLabel {
        let span = (ENV_MEDIAN_SPAN_S * WINDOW_RATE_HZ).round() as usize;
        let noise_median = dsp::median_filter(&window.noise, span);
        let split = rng.gen::<u64>();
        let mut rng_play = ChaCha8Rng::seed_from_u64(derive_seed(split, 0));
        let mut rng_notice = ChaCha8Rng::seed_from_u64(derive_seed(split, 1));
        let outcome = attack_outcome(
            &noise_median,
            scenario,
            &self.policy,
            &self.notice,
            self.p_recognized,
            &mut rng_play,
            &mut rng_notice,
        );
        if !outcome.noticed && outcome.recognized {
            InvasionLabel::SuccessfulInvasion
        } else {
            InvasionLabel::UnsuccessfulInvasion
        }
    }
}

/// Everything recorded about one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub scenario: Scenario,
    pub seed: u64,
    pub launched: bool,
    pub activation_ok: bool,
    pub command: Option<String>,
    pub command_recognized: bool,
    pub noticed: bool,
    pub blocked_by: Option<DefenseKind>,
    pub succeeded: bool,
    pub windows_sensed: usize,
    pub gated_windows: usize,
    pub calls_observed: usize,
    pub capture_segments: usize,
    pub key_complete: bool,
    pub p_success_at_launch: Option<Scalar>,
    pub ambient_at_play_db: Option<Scalar>,
    pub peak_volume_db: Option<Scalar>,
    pub phase_minutes: [Scalar; 4],
    pub mah_total: Scalar,
    #[serde(skip)]
    pub ledger: ResourceLedger,
}

/// Runs one seeded trial of the full lifecycle.
pub fn run_trial(scenario: Scenario, config: &TrialConfig, seed: u64) -> Result<TrialRecord> {
    config.validate()?;
    let scenario_params = *config.params.get(scenario)?;

    let mut rng_calls = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_CALLS));
    let mut rng_conv = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_CONVERSATION));
    let mut rng_play = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_PLAYBACK));
    let mut rng_notice = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_NOTICE));
    let mut rng_defense = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_DEFENSE));

    let mut machine = Phase::P1CallMonitor;
    let mut ledger = ResourceLedger::new();
    let mut t = 0.0; // simulated minutes
    let rates = &config.ledger.power;

    let mut capture = CaptureState::new(config.capture_mode, &config.lexicon)?;
    let mut key: Option<ActivationKey> = None;

    let mut record = TrialRecord {
        trial_index: 0,
        scenario,
        seed,
        launched: false,
        activation_ok: false,
        command: None,
        command_recognized: false,
        noticed: false,
        blocked_by: None,
        succeeded: false,
        windows_sensed: 0,
        gated_windows: 0,
        calls_observed: 0,
        capture_segments: 0,
        key_complete: false,
        p_success_at_launch: None,
        ambient_at_play_db: None,
        peak_volume_db: None,
        phase_minutes: [0.0; 4],
        mah_total: 0.0,
        ledger: ResourceLedger::new(),
    };

    let mut window_counter: u64 = 0;
    let mut pending_window_median: Option<Vec<Scalar>> = None;
    let mut pending_decision: Option<TriggerDecision> = None;
    let mut attacks_done = 0usize;
    let mut all_recognized = true;
    let mut activation_ok = true;

    while machine != Phase::Done && t < config.max_minutes {
        match machine {
            Phase::P1CallMonitor => {
                let wait = crate::scenegen::sample_exp(&mut rng_calls, 60.0 / config.calls_per_hour)
                    .max(MIN_WAIT_MINUTES);
                let wait = wait.min(config.max_minutes - t);
                ledger = ledger_accumulate(ledger, machine, wait, config.sensing_rate_hz, false, rates);
                t += wait;
                if t >= config.max_minutes {
                    break;
                }
                machine = step(machine, Event::CallStarted)?;
                record.calls_observed += 1;
            }
            Phase::P2RecordSynthesize => {
                let call_minutes =
                    crate::scenegen::sample_exp(&mut rng_calls, config.mean_call_minutes)
                        .max(MIN_WAIT_MINUTES);
                let seg_minutes = config.segment_seconds / 60.0;
                let n_segments = (call_minutes / seg_minutes).floor() as usize;
                let mut consumed = 0.0;
                let mut completed = false;
                for _ in 0..n_segments {
                    if t >= config.max_minutes {
                        break;
                    }
                    ledger = ledger_accumulate(ledger, machine, seg_minutes, config.sensing_rate_hz, false, rates);
                    t += seg_minutes;
                    consumed += seg_minutes;
                    let segment = config.conversation.generate_segment(&config.lexicon, &mut rng_conv);
                    capture = feed_segment(capture, &segment, &config.lexicon);
                    record.capture_segments += 1;
                    let completes = capture.is_complete();
                    machine = step(machine, Event::SegmentAvailable { completes_key: completes })?;
                    if completes {
                        key = Some(synthesize(&capture, &config.activation)?);
                        record.key_complete = true;
                        completed = true;
                        break;
                    }
                }
                if !completed && machine == Phase::P2RecordSynthesize {
                    let rest = (call_minutes - consumed).min(config.max_minutes - t).max(0.0);
                    ledger = ledger_accumulate(ledger, machine, rest, config.sensing_rate_hz, false, rates);
                    t += rest;
                    machine = step(machine, Event::CallEnded)?;
                }
            }
            Phase::P3EnvironmentMonitor => {
                if t + config.window_minutes > config.max_minutes {
                    break; // not enough horizon for another full window
                }
                let wseed = derive_seed(seed, STREAM_WINDOW_BASE + window_counter);
                window_counter += 1;
                let trace = generate_trace(
                    scenario,
                    config.window_minutes * 60.0,
                    config.phone,
                    &scenario_params,
                    wseed,
                )?;
                let window = cut_window(&trace, 0.0, trace.duration)?;
                let span = (ENV_MEDIAN_SPAN_S * WINDOW_RATE_HZ).round() as usize;
                let noise_median = dsp::median_filter(&window.noise, span);

                // standby: one cheap noise probe decides whether the full
                // sensor suite wakes up for this window
                if config.gating {
                    let probe_len = (WINDOW_RATE_HZ as usize).min(noise_median.len());
                    let probe =
                        noise_median[..probe_len].iter().sum::<Scalar>() / probe_len as Scalar;
                    if !trigger::standby_gate(probe, config.gate_threshold_db) {
                        record.gated_windows += 1;
                        ledger = ledger_accumulate(ledger, machine, config.window_minutes, config.sensing_rate_hz, true, rates);
                        t += config.window_minutes;
                        machine = step(machine, Event::WindowElapsed)?;
                        let hold = TriggerDecision::standby_hold(probe, &config.policy);
                        machine = step(machine, Event::DecisionMade { launch: hold.launch })?;
                        continue;
                    }
                }

                record.windows_sensed += 1;
                ledger = ledger_accumulate(ledger, machine, config.window_minutes, config.sensing_rate_hz, false, rates);
                t += config.window_minutes;
                machine = step(machine, Event::WindowElapsed)?;

                let decision = match config.launch_policy {
                    LaunchPolicy::Detector => trigger::decide(
                        &window,
                        &config.phone,
                        config.opportunity_model.as_ref().expect("validated"),
                        config.motion_model.as_ref().expect("validated"),
                        &config.policy,
                        config.threshold,
                    )?,
                    LaunchPolicy::Always => {
                        let noise_mean =
                            noise_median.iter().sum::<Scalar>() / noise_median.len() as Scalar;
                        let (activation, command) =
                            trigger::playback_volume(noise_mean, &config.policy);
                        TriggerDecision {
                            launch: true,
                            p_success: 1.0,
                            activation_volume_db: activation,
                            command_volume_db: command,
                            gated: false,
                        }
                    }
                };
                machine = step(machine, Event::DecisionMade { launch: decision.launch })?;
                if decision.launch {
                    record.launched = true;
                    record.p_success_at_launch = Some(decision.p_success);
                    pending_window_median = Some(noise_median);
                    pending_decision = Some(decision);
                }
            }
            Phase::P4Attack => {
                let activation_key = key.as_ref().expect("P4 is unreachable without a key");
                let noise_median = pending_window_median.take().expect("launch window present");
                let _decision = pending_decision.take().expect("launch decision present");

                ledger = ledger_accumulate(ledger, machine, ATTACK_MINUTES, config.sensing_rate_hz, false, rates);
                t += ATTACK_MINUTES;
                attacks_done += 1;

                activation_ok &=
                    rng_play.gen::<Scalar>() < activation_key.activation_success_prob;
                let command_idx = rng_play.gen_range(0..config.commands.len());
                record.command = Some(config.commands[command_idx].clone());

                let outcome = attack_outcome(
                    &noise_median,
                    scenario,
                    &config.policy,
                    &config.notice,
                    config.p_recognized,
                    &mut rng_play,
                    &mut rng_notice,
                );
                record.ambient_at_play_db = Some(outcome.ambient_at_play_db);
                record.peak_volume_db = Some(outcome.peak_volume_db);
                record.noticed |= outcome.noticed;
                all_recognized &= outcome.recognized;

                if record.blocked_by.is_none() {
                    let ctx = AttackContext {
                        source: AudioSource::BuiltinSpeaker,
                        holding: config.phone.placement == Placement::InHand,
                        other_devices_present: false,
                    };
                    for &defense in &config.defenses {
                        if apply_defense(defense, &config.defense_config, &ctx, &mut rng_defense) {
                            record.blocked_by = Some(defense);
                            break;
                        }
                    }
                }

                let more = attacks_done < config.commands_per_attack;
                machine = step(machine, Event::AttackCompleted { more_commands: more })?;
            }
            Phase::Done => unreachable!("loop exits on Done"),
        }
    }

    record.activation_ok = record.launched && activation_ok;
    record.command_recognized = record.launched && all_recognized;
    record.succeeded = record.launched
        && record.activation_ok
        && record.command_recognized
        && !record.noticed
        && record.blocked_by.is_none();
    record.phase_minutes = ledger.minutes;
    record.mah_total = ledger.total_mah();
    record.ledger = ledger;
    Ok(record)
}

/// Per-scenario aggregate row (the report's summary table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAggregate {
    pub trials: usize,
    pub launches: usize,
    pub successes: usize,
    pub noticed: usize,
    /// successes / launches; 0 when nothing launched.
    pub success_rate: Scalar,
    /// noticed / launches; 0 when nothing launched.
    pub notice_rate: Scalar,
}

/// Batch result: per-trial rows, per-scenario aggregates, ledger totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema: String,
    pub seed: u64,
    pub launch_policy: LaunchPolicy,
    pub per_scenario: BTreeMap<Scenario, ScenarioAggregate>,
    pub ledger: LedgerSummary,
    pub trials: Vec<TrialRecord>,
}

pub const REPORT_SCHEMA: &str = "vasim-report/v1";

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SimulationReport> {
        let report: SimulationReport = serde_json::from_str(text)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::ModelMismatch(format!(
                "unsupported report schema {:?}",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<SimulationReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimulationReport::from_json(&text)
    }

    /// Per-trial rows as CSV.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from(
            "trial_index,scenario,seed,launched,activation_ok,command_recognized,noticed,\
             blocked,succeeded,windows_sensed,gated_windows,calls_observed,capture_segments,\
             p1_min,p2_min,p3_min,p4_min,mah_total\n",
        );
        for r in &self.trials {
            let blocked = match r.blocked_by {
                None => "none".to_string(),
                Some(DefenseKind::SourceCheck) => "source_check".into(),
                Some(DefenseKind::ContinuousAuth) => "continuous_auth".into(),
                Some(DefenseKind::MagneticDetect) => "magnetic_detect".into(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.trial_index,
                r.scenario.tag(),
                r.seed,
                r.launched as u8,
                r.activation_ok as u8,
                r.command_recognized as u8,
                r.noticed as u8,
                blocked,
                r.succeeded as u8,
                r.windows_sensed,
                r.gated_windows,
                r.calls_observed,
                r.capture_segments,
                r.phase_minutes[0],
                r.phase_minutes[1],
                r.phase_minutes[2],
                r.phase_minutes[3],
                r.mah_total,
            ));
        }
        out
    }

    /// Per-scenario aggregate table (launched, succeeded, success rate).
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("scenario,trials,launched,noticed,succeeded,success_rate,notice_rate\n");
        for (scenario, agg) in &self.per_scenario {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                scenario.tag(),
                agg.trials,
                agg.launches,
                agg.noticed,
                agg.successes,
                agg.success_rate,
                agg.notice_rate,
            ));
        }
        out
    }
}

/// Runs `trials` seeded trials for each listed scenario, in parallel, and
/// aggregates the report. Results are identical for any thread count.
pub fn run_batch(
    scenarios: &[(Scenario, usize)],
    config: &TrialConfig,
    seed: u64,
) -> Result<SimulationReport> {
    config.validate()?;
    if !config.notice.calibrated {
        return Err(Error::InvalidArgument(
            "notice model is not calibrated; run calibration first".into(),
        ));
    }
    if scenarios.is_empty() {
        return Err(Error::InvalidArgument("no scenarios requested".into()));
    }

    let jobs: Vec<(u64, Scenario, u64)> = {
        let mut v = Vec::new();
        let mut index = 0u64;
        for &(scenario, trials) in scenarios {
            if trials == 0 {
                return Err(Error::InvalidArgument(format!(
                    "scenario {scenario}: trials must be >= 1"
                )));
            }
            for _ in 0..trials {
                v.push((index, scenario, derive_seed(seed, index)));
                index += 1;
            }
        }
        v
    };

    let trials: Result<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(index, scenario, trial_seed)| {
            let mut record = run_trial(scenario, config, trial_seed)?;
            record.trial_index = index;
            Ok(record)
        })
        .collect();
    let trials = trials?;

    let mut per_scenario: BTreeMap<Scenario, ScenarioAggregate> = BTreeMap::new();
    let mut ledger_total = ResourceLedger::new();
    for record in &trials {
        let agg = per_scenario.entry(record.scenario).or_insert(ScenarioAggregate {
            trials: 0,
            launches: 0,
            successes: 0,
            noticed: 0,
            success_rate: 0.0,
            notice_rate: 0.0,
        });
        agg.trials += 1;
        agg.launches += record.launched as usize;
        agg.successes += record.succeeded as usize;
        agg.noticed += (record.launched && record.noticed) as usize;
        ledger_total.merge(&record.ledger);
    }
    for agg in per_scenario.values_mut() {
        if agg.launches > 0 {
            agg.success_rate = agg.successes as Scalar / agg.launches as Scalar;
            agg.notice_rate = agg.noticed as Scalar / agg.launches as Scalar;
        }
    }

    Ok(SimulationReport {
        schema: REPORT_SCHEMA.into(),
        seed,
        launch_policy: config.launch_policy,
        per_scenario,
        ledger: ledger_total.summary(&config.ledger),
        trials,
    })
}
