//! Sensor-trace domain model and its on-disk CSV format.
//!
//! A trace is a timestamped multi-channel recording: three-axis linear
//! acceleration at a nominal 50 Hz plus noise (dB) and light (lux)
//! envelopes at a nominal 5 Hz, labeled with the scenario it was captured
//! in and the phone's state. Values are immutable after construction and
//! safe to share across threads.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::{Scalar, WINDOW_RATE_HZ};

/// The six real-world scenarios traces are labeled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    QuietRoad,
    Highway,
    SpecificPlaces,
    PublicTransport,
    Car,
    Restaurant,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::QuietRoad,
        Scenario::Highway,
        Scenario::SpecificPlaces,
        Scenario::PublicTransport,
        Scenario::Car,
        Scenario::Restaurant,
    ];

    /// Single-letter tag used in trace files and report tables.
    pub fn tag(self) -> char {
        match self {
            Scenario::QuietRoad => 'a',
            Scenario::Highway => 'b',
            Scenario::SpecificPlaces => 'c',
            Scenario::PublicTransport => 'd',
            Scenario::Car => 'e',
            Scenario::Restaurant => 'f',
        }
    }

    pub fn from_tag(tag: char) -> Option<Scenario> {
        Scenario::ALL.iter().copied().find(|s| s.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::QuietRoad => "quiet_road",
            Scenario::Highway => "highway",
            Scenario::SpecificPlaces => "specific_places",
            Scenario::PublicTransport => "public_transport",
            Scenario::Car => "car",
            Scenario::Restaurant => "restaurant",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower.len() == 1 {
            if let Some(sc) = Scenario::from_tag(lower.chars().next().unwrap()) {
                return Ok(sc);
            }
        }
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

/// Where the phone is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Pocket,
    InHand,
}

/// Phone state at recording time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneState {
    pub screen_interactive: bool,
    pub bluetooth_audio: bool,
    pub wired_headphone: bool,
    pub placement: Placement,
}

impl PhoneState {
    /// Default attack posture: pocketed, screen off, internal speaker route.
    pub fn pocketed() -> Self {
        PhoneState {
            screen_interactive: false,
            bluetooth_audio: false,
            wired_headphone: false,
            placement: Placement::Pocket,
        }
    }

    /// True when audio is routed anywhere other than the built-in speaker.
    pub fn audio_route_external(&self) -> bool {
        self.bluetooth_audio || self.wired_headphone
    }
}

/// One accelerometer sample: timestamp plus linear acceleration (m/s²,
/// gravity removed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    pub t: Scalar,
    pub ax: Scalar,
    pub ay: Scalar,
    pub az: Scalar,
}

/// One scalar envelope sample (noise in dB or light in lux).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSample {
    pub t: Scalar,
    pub v: Scalar,
}

/// A labeled multi-channel sensor recording.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    pub scenario: Scenario,
    pub phone: PhoneState,
    pub duration: Scalar,
    pub accel: Vec<AccelSample>,
    pub noise: Vec<EnvSample>,
    pub light: Vec<EnvSample>,
}

impl SensorTrace {
    /// Checks the structural invariants: non-empty channels, strictly
    /// increasing timestamps, all channels inside `[0, duration]`.
    pub fn validate(&self) -> Result<()> {
        if self.duration <= 0.0 {
            return Err(Error::InvalidArgument("trace duration must be positive".into()));
        }
        for (name, len) in [
            ("accel", self.accel.len()),
            ("noise", self.noise.len()),
            ("light", self.light.len()),
        ] {
            if len == 0 {
                return Err(Error::InvalidArgument(format!("channel empty: {name}")));
            }
        }
        let check = |name: &str, ts: &[Scalar]| -> Result<()> {
            for w in ts.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::InvalidArgument(format!(
                        "non-monotonic timestamp in channel {name}"
                    )));
                }
            }
            let first = ts[0];
            let last = *ts.last().unwrap();
            if first < 0.0 || last > self.duration {
                return Err(Error::Range(format!(
                    "channel {name} spans [{first}, {last}] outside [0, {}]",
                    self.duration
                )));
            }
            Ok(())
        };
        check("accel", &self.accel.iter().map(|s| s.t).collect::<Vec<_>>())?;
        check("noise", &self.noise.iter().map(|s| s.t).collect::<Vec<_>>())?;
        check("light", &self.light.iter().map(|s| s.t).collect::<Vec<_>>())?;
        Ok(())
    }

    /// Short fingerprint used as window provenance.
    pub fn identity(&self) -> String {
        format!(
            "{}:{}s:{}smp",
            self.scenario.tag(),
            fmt_g9(self.duration),
            self.accel.len()
        )
    }
}

/// A fixed-length view of a trace with every channel nearest-neighbor
/// resampled onto the common 50 Hz analysis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub trace_ref: String,
    pub start: Scalar,
    pub length: Scalar,
    pub ax: Vec<Scalar>,
    pub ay: Vec<Scalar>,
    pub az: Vec<Scalar>,
    pub noise: Vec<Scalar>,
    pub light: Vec<Scalar>,
}

impl Window {
    /// Per-sample acceleration magnitude `|a| = sqrt(ax² + ay² + az²)`.
    pub fn accel_magnitude(&self) -> Vec<Scalar> {
        self.ax
            .iter()
            .zip(&self.ay)
            .zip(&self.az)
            .map(|((&x, &y), &z)| (x * x + y * y + z * z).sqrt())
            .collect()
    }

    pub fn samples_per_channel(&self) -> usize {
        self.ax.len()
    }
}

/// Cuts `[start, start + length]` out of a trace, resampling all channels
/// to the 50 Hz analysis grid.
pub fn cut_window(trace: &SensorTrace, start: Scalar, length: Scalar) -> Result<Window> {
    if length <= 0.0 {
        return Err(Error::Range("empty window".into()));
    }
    if start < 0.0 || start + length > trace.duration + 1e-9 {
        return Err(Error::Range(format!(
            "window [{start}, {}] outside trace [0, {}]",
            start + length,
            trace.duration
        )));
    }
    let span = (start, start + length);
    let pairs = |it: &[EnvSample]| it.iter().map(|s| (s.t, s.v)).collect::<Vec<_>>();
    let accel_axis = |f: fn(&AccelSample) -> Scalar| {
        trace.accel.iter().map(|s| (s.t, f(s))).collect::<Vec<_>>()
    };
    Ok(Window {
        trace_ref: trace.identity(),
        start,
        length,
        ax: dsp::resample_nn(&accel_axis(|s| s.ax), WINDOW_RATE_HZ, span)?,
        ay: dsp::resample_nn(&accel_axis(|s| s.ay), WINDOW_RATE_HZ, span)?,
        az: dsp::resample_nn(&accel_axis(|s| s.az), WINDOW_RATE_HZ, span)?,
        noise: dsp::resample_nn(&pairs(&trace.noise), WINDOW_RATE_HZ, span)?,
        light: dsp::resample_nn(&pairs(&trace.light), WINDOW_RATE_HZ, span)?,
    })
}

/// Formats a float with 9 significant digits, the trace-file precision.
pub fn fmt_g9(x: Scalar) -> String {
    format!("{x:.8e}")
}

#[rustfmt::skip]
const POW10: [f64; 61] = [
    1.0e-30, 1.0e-29, 1.0e-28, 1.0e-27, 1.0e-26, 1.0e-25, 1.0e-24, 1.0e-23, 1.0e-22, 1.0e-21,
    1.0e-20, 1.0e-19, 1.0e-18, 1.0e-17, 1.0e-16, 1.0e-15, 1.0e-14, 1.0e-13, 1.0e-12, 1.0e-11,
    1.0e-10, 1.0e-9, 1.0e-8, 1.0e-7, 1.0e-6, 1.0e-5, 1.0e-4, 1.0e-3, 1.0e-2, 1.0e-1,
    1.0e0, 1.0e1, 1.0e2, 1.0e3, 1.0e4, 1.0e5, 1.0e6, 1.0e7, 1.0e8, 1.0e9,
    1.0e10, 1.0e11, 1.0e12, 1.0e13, 1.0e14, 1.0e15, 1.0e16, 1.0e17, 1.0e18, 1.0e19,
    1.0e20, 1.0e21, 1.0e22, 1.0e23, 1.0e24, 1.0e25, 1.0e26, 1.0e27, 1.0e28, 1.0e29,
    1.0e30,
];

fn pow10(e: i32) -> f64 {
    if (-30..=30).contains(&e) {
        POW10[(e + 30) as usize]
    } else {
        10f64.powi(e)
    }
}

/// Canonicalizes a value to the trace-file precision so that
/// save → load round-trips bit-for-bit.
///
/// Decimal rounding to 9 significant digits, done arithmetically: this
/// sits on the trace-generation hot path where formatting every sample
/// through strings would dominate. The decimal exponent comes from the
/// binary exponent plus a one-step correction.
pub fn canon(x: Scalar) -> Scalar {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let ax = x.abs();
    if ax < 1e-300 {
        return 0.0; // below any sensor resolution; avoids subnormal games
    }
    let e2 = ((ax.to_bits() >> 52) & 0x7ff) as i32 - 1023;
    let mut e10 = (e2 as f64 * std::f64::consts::LOG10_2).floor() as i32;
    if ax >= pow10(e10 + 1) {
        e10 += 1;
    } else if ax < pow10(e10) {
        e10 -= 1;
    }
    let scale = pow10(8 - e10);
    (x * scale).round() / scale
}

const FORMAT_HEADER: &str = "vasim-trace v1";

/// Serializes a trace to the versioned CSV format.
///
/// Layout: a format-version line, a metadata line (scenario tag, phone
/// flags, duration), then long-format rows `channel,t,v1[,v2,v3]` grouped
/// by channel. Floats carry 9 significant digits; two saves of the same
/// trace are byte-identical.
pub fn save_trace(trace: &SensorTrace, path: &Path) -> Result<()> {
    trace.validate()?;
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "scenario={},screen={},bluetooth={},wired={},placement={},duration={}\n",
        trace.scenario.tag(),
        trace.phone.screen_interactive as u8,
        trace.phone.bluetooth_audio as u8,
        trace.phone.wired_headphone as u8,
        match trace.phone.placement {
            Placement::Pocket => "pocket",
            Placement::InHand => "hand",
        },
        fmt_g9(trace.duration),
    ));
    for s in &trace.accel {
        out.push_str(&format!(
            "accel,{},{},{},{}\n",
            fmt_g9(s.t),
            fmt_g9(s.ax),
            fmt_g9(s.ay),
            fmt_g9(s.az)
        ));
    }
    for s in &trace.noise {
        out.push_str(&format!("noise,{},{}\n", fmt_g9(s.t), fmt_g9(s.v)));
    }
    for s in &trace.light {
        out.push_str(&format!("light,{},{}\n", fmt_g9(s.t), fmt_g9(s.v)));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parses a trace file written by [`save_trace`].
///
/// Errors name the offending 1-based file line.
pub fn load_trace(path: &Path) -> Result<SensorTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

fn parse_trace(text: &str) -> Result<SensorTrace> {
    let mut lines = text.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    if first.trim() != FORMAT_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected format header {FORMAT_HEADER:?}"),
        });
    }

    let (_, meta) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 2, msg: "missing metadata line".into() })?;
    let mut scenario = None;
    let mut screen = None;
    let mut bluetooth = None;
    let mut wired = None;
    let mut placement = None;
    let mut duration = None;
    for field in meta.split(',') {
        let (key, value) = field.split_once('=').ok_or_else(|| Error::Parse {
            line: 2,
            msg: format!("malformed metadata field {field:?}"),
        })?;
        let bad = |what: &str| Error::Parse {
            line: 2,
            msg: format!("{what} {value:?}"),
        };
        match key {
            "scenario" => {
                let tag = value.chars().next().unwrap_or('?');
                scenario = Some(
                    Scenario::from_tag(tag).ok_or_else(|| bad("unknown scenario tag"))?,
                );
            }
            "screen" => screen = Some(value == "1"),
            "bluetooth" => bluetooth = Some(value == "1"),
            "wired" => wired = Some(value == "1"),
            "placement" => {
                placement = Some(match value {
                    "pocket" => Placement::Pocket,
                    "hand" => Placement::InHand,
                    _ => return Err(bad("unknown placement")),
                })
            }
            "duration" => {
                duration = Some(value.parse::<Scalar>().map_err(|_| bad("bad duration"))?)
            }
            _ => return Err(Error::Parse { line: 2, msg: format!("unknown metadata key {key:?}") }),
        }
    }
    let missing = |what: &str| Error::Parse { line: 2, msg: format!("missing {what}") };
    let scenario = scenario.ok_or_else(|| missing("scenario"))?;
    let phone = PhoneState {
        screen_interactive: screen.ok_or_else(|| missing("screen"))?,
        bluetooth_audio: bluetooth.ok_or_else(|| missing("bluetooth"))?,
        wired_headphone: wired.ok_or_else(|| missing("wired"))?,
        placement: placement.ok_or_else(|| missing("placement"))?,
    };
    let duration = duration.ok_or_else(|| missing("duration"))?;

    let mut accel = Vec::new();
    let mut noise = Vec::new();
    let mut light = Vec::new();
    // last timestamp per channel for monotonicity, reported on the line that breaks it
    let mut last_t: [Option<Scalar>; 3] = [None, None, None];

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let parts: Vec<&str> = row.split(',').collect();
        let parse_f = |s: &str| -> Result<Scalar> {
            s.parse::<Scalar>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("malformed float {s:?}"),
            })
        };
        let channel = parts[0];
        let (chan_idx, want_vals) = match channel {
            "accel" => (0usize, 3usize),
            "noise" => (1, 1),
            "light" => (2, 1),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown channel {channel:?}"),
                })
            }
        };
        if parts.len() != want_vals + 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} fields for channel {channel}, got {}",
                    want_vals + 2,
                    parts.len()
                ),
            });
        }
        let t = parse_f(parts[1])?;
        if let Some(prev) = last_t[chan_idx] {
            if t <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-monotonic timestamp in channel {channel}"),
                });
            }
        }
        last_t[chan_idx] = Some(t);
        match channel {
            "accel" => accel.push(AccelSample {
                t,
                ax: parse_f(parts[2])?,
                ay: parse_f(parts[3])?,
                az: parse_f(parts[4])?,
            }),
            "noise" => noise.push(EnvSample { t, v: parse_f(parts[2])? }),
            _ => light.push(EnvSample { t, v: parse_f(parts[2])? }),
        }
    }

    let trace = SensorTrace { scenario, phone, duration, accel, noise, light };
    trace.validate()?;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    pub(crate) fn sample_trace(duration: Scalar) -> SensorTrace {
        let accel = (0..(duration * 50.0) as usize)
            .map(|k| AccelSample {
                t: canon(k as Scalar / 50.0),
                ax: canon(0.01 * k as Scalar),
                ay: canon(-0.02 * k as Scalar),
                az: canon((k as Scalar * 0.1).sin()),
            })
            .collect();
        let env = |scale: Scalar| {
            (0..(duration * 5.0) as usize)
                .map(|k| EnvSample {
                    t: canon(k as Scalar / 5.0),
                    v: canon(scale + (k as Scalar * 0.3).cos()),
                })
                .collect::<Vec<_>>()
        };
        SensorTrace {
            scenario: Scenario::Restaurant,
            phone: PhoneState::pocketed(),
            duration,
            accel,
            noise: env(60.0),
            light: env(350.0),
        }
    }

    #[test]
    fn scenario_tags_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_tag(s.tag()), Some(s));
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(s.tag().to_string().parse::<Scenario>().unwrap(), s);
        }
        assert!("g".parse::<Scenario>().is_err());
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = sample_trace(12.0);
        save_trace(&trace, &path).unwrap();
        let back = load_trace(&path).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn double_save_is_byte_identical() {
        let dir = tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        let trace = sample_trace(6.0);
        save_trace(&trace, &p1).unwrap();
        save_trace(&trace, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn loader_counts_and_duration() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = sample_trace(180.0);
        assert_eq!(trace.accel.len(), 9000);
        save_trace(&trace, &path).unwrap();
        let back = load_trace(&path).unwrap();
        assert_eq!(back.duration, 180.0);
        assert_eq!(back.accel.len(), 9000);
    }

    #[test]
    fn non_monotonic_row_names_its_line() {
        let text = format!(
            "{FORMAT_HEADER}\n\
             scenario=f,screen=0,bluetooth=0,wired=0,placement=pocket,duration=1.00000000e0\n\
             noise,0.00000000e0,5.00000000e1\n\
             noise,2.00000000e-2,5.00000000e1\n\
             noise,2.00000000e-2,5.10000000e1\n\
             accel,0.00000000e0,0.0,0.0,0.0\n\
             light,0.00000000e0,1.0\n"
        );
        let err = parse_trace(&text).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 5);
                assert!(msg.contains("non-monotonic"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_scenario_tag_is_rejected() {
        let text = format!(
            "{FORMAT_HEADER}\n\
             scenario=z,screen=0,bluetooth=0,wired=0,placement=pocket,duration=1.0\n\
             accel,0.0,0.0,0.0,0.0\nnoise,0.0,1.0\nlight,0.0,1.0\n"
        );
        let err = parse_trace(&text).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("unknown scenario tag"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_channel_is_rejected_on_save() {
        let dir = tempdir().unwrap();
        let mut trace = sample_trace(6.0);
        trace.noise.clear();
        let err = save_trace(&trace, &dir.path().join("t.csv")).unwrap_err();
        assert!(err.to_string().contains("channel empty"), "{err}");
    }

    #[test]
    fn cut_window_full_span_counts() {
        let trace = sample_trace(180.0);
        let w = cut_window(&trace, 0.0, 180.0).unwrap();
        assert_eq!(w.samples_per_channel(), 9000);
        assert_eq!(w.noise.len(), 9000);
        assert_eq!(w.light.len(), 9000);
        assert_eq!(w.ax.len(), w.az.len());
    }

    #[test]
    fn cut_window_rejects_bad_ranges() {
        let trace = sample_trace(10.0);
        assert!(matches!(cut_window(&trace, 0.0, 0.0), Err(Error::Range(_))));
        assert!(matches!(cut_window(&trace, 5.0, 6.0), Err(Error::Range(_))));
        assert!(matches!(cut_window(&trace, -1.0, 2.0), Err(Error::Range(_))));
    }

    #[test]
    fn window_resamples_5hz_channel_by_nearest_neighbor() {
        let trace = sample_trace(10.0);
        let w = cut_window(&trace, 0.0, 10.0).unwrap();
        // at t = 0.02 s the nearest 5 Hz noise sample is the one at t = 0
        assert_eq!(w.noise[1], trace.noise[0].v);
        // one 5 Hz sample covers ten 50 Hz grid points around it
        assert_eq!(w.noise[4], trace.noise[0].v);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn round_trip_identity_on_canonical_traces(
                seed_vals in proptest::collection::vec(-1e3f64..1e3, 10..30)
            ) {
                let dir = tempdir().unwrap();
                let path = dir.path().join("t.csv");
                let n = seed_vals.len();
                let duration = n as Scalar / 5.0;
                let trace = SensorTrace {
                    scenario: Scenario::Car,
                    phone: PhoneState::pocketed(),
                    duration: canon(duration),
                    accel: (0..n * 10)
                        .map(|k| AccelSample {
                            t: canon(k as Scalar / 50.0),
                            ax: canon(seed_vals[k % n] * 0.1),
                            ay: canon(seed_vals[(k + 1) % n] * 0.2),
                            az: canon(seed_vals[(k + 2) % n] * 0.3),
                        })
                        .collect(),
                    noise: (0..n)
                        .map(|k| EnvSample { t: canon(k as Scalar / 5.0), v: canon(seed_vals[k]) })
                        .collect(),
                    light: (0..n)
                        .map(|k| EnvSample { t: canon(k as Scalar / 5.0), v: canon(seed_vals[k].abs()) })
                        .collect(),
                };
                save_trace(&trace, &path).unwrap();
                let back = load_trace(&path).unwrap();
                prop_assert_eq!(trace, back);
            }

            #[test]
            fn canon_is_a_print_parse_fixed_point(x in -1.0e6f64..1.0e6) {
                let c = canon(x);
                let reparsed: Scalar = fmt_g9(c).parse().unwrap();
                prop_assert_eq!(c, reparsed);
                // idempotent
                prop_assert_eq!(canon(c), c);
            }

            #[test]
            fn full_window_sample_count_matches_duration(secs in 1u32..40) {
                let trace = sample_trace(secs as Scalar);
                let w = cut_window(&trace, 0.0, trace.duration).unwrap();
                let expect = (trace.duration * WINDOW_RATE_HZ).round() as usize;
                prop_assert_eq!(w.samples_per_channel(), expect);
                prop_assert_eq!(w.noise.len(), expect);
                prop_assert_eq!(w.light.len(), expect);
            }
        }
    }
}
