//! Activation-keyword capture over phoneme-annotated transcript streams.
//!
//! Real audio never enters the simulator: recorded calls are abstracted as
//! token streams where each token carries the phonetic units it can supply.
//! Capture collects the units needed for the activation keyword either
//! word-based (the exact keyword words must appear) or syllable-based (any
//! token supplying a needed syllable counts). Acoustic uncertainty is
//! absorbed by a per-mode Bernoulli activation-success probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Word → unit mapping plus the target keyword.
///
/// Entries serve two roles: decomposing keyword words into the units that
/// must be captured, and annotating conversation tokens with the units they
/// supply. The mapping is data, not code, so it can be tightened without
/// rebuilding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub keyword: Vec<String>,
    pub entries: BTreeMap<String, Vec<String>>,
}

impl Lexicon {
    /// The shipped default: "ok google" plus the everyday words that can
    /// supply its syllables.
    pub fn default_ok_google() -> Self {
        let entries: BTreeMap<String, Vec<String>> = [
            ("ok", vec!["o", "k"]),
            ("okay", vec!["o", "k"]),
            ("google", vec!["goo", "gle"]),
            ("oh", vec!["o"]),
            ("cake", vec!["k"]),
            ("good", vec!["goo"]),
            ("go", vec!["gle"]),
        ]
        .into_iter()
        .map(|(w, units)| {
            (
                w.to_string(),
                units.into_iter().map(str::to_string).collect(),
            )
        })
        .collect();
        Lexicon {
            keyword: vec!["ok".into(), "google".into()],
            entries,
        }
    }

    /// Every keyword word must have an entry.
    pub fn validate(&self) -> Result<()> {
        if self.keyword.is_empty() {
            return Err(Error::InvalidArgument("lexicon keyword is empty".into()));
        }
        for word in &self.keyword {
            if !self.entries.contains_key(&normalize(word)) {
                return Err(Error::InvalidArgument(format!(
                    "keyword word {word:?} has no lexicon entry"
                )));
            }
        }
        Ok(())
    }

    /// Syllable decomposition of a known word.
    pub fn syllabify(&self, word: &str) -> Result<&[String]> {
        self.entries
            .get(&normalize(word))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown word {word:?}")))
    }

    /// Units a conversation token can supply (empty for words outside the
    /// lexicon).
    pub fn annotate(&self, word: &str) -> Vec<String> {
        self.entries
            .get(&normalize(word))
            .cloned()
            .unwrap_or_default()
    }

    /// The ordered, deduplicated syllables of the whole keyword.
    pub fn keyword_syllables(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for word in &self.keyword {
            for unit in self.syllabify(word)? {
                if !out.contains(unit) {
                    out.push(unit.clone());
                }
            }
        }
        Ok(out)
    }
}

fn normalize(word: &str) -> String {
    word.trim().to_ascii_lowercase()
}

/// One transcript token with its phonetic annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub syllables: Vec<String>,
}

impl Token {
    pub fn annotated(text: &str, lexicon: &Lexicon) -> Self {
        Token {
            text: normalize(text),
            syllables: lexicon.annotate(text),
        }
    }
}

/// A 20-second transcript slice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segment {
    pub tokens: Vec<Token>,
}

/// How the activation keyword is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureMode {
    WordBased,
    SyllableBased,
}

/// Progress of keyword capture across segments.
///
/// `captured` maps each collected unit to the index of the segment that
/// supplied it; once `complete` the state is frozen and further segments
/// are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureState {
    pub mode: CaptureMode,
    needed: Vec<String>,
    captured: BTreeMap<String, usize>,
    segments_seen: usize,
    complete: bool,
}

impl CaptureState {
    pub fn new(mode: CaptureMode, lexicon: &Lexicon) -> Result<Self> {
        lexicon.validate()?;
        let needed = match mode {
            CaptureMode::WordBased => lexicon.keyword.iter().map(|w| normalize(w)).collect(),
            CaptureMode::SyllableBased => lexicon.keyword_syllables()?,
        };
        Ok(CaptureState {
            mode,
            needed,
            captured: BTreeMap::new(),
            segments_seen: 0,
            complete: false,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn captured_units(&self) -> &BTreeMap<String, usize> {
        &self.captured
    }

    pub fn missing_units(&self) -> Vec<String> {
        self.needed
            .iter()
            .filter(|u| !self.captured.contains_key(*u))
            .cloned()
            .collect()
    }
}

/// Consumes one transcript segment, capturing any still-needed units.
///
/// The first occurrence of a unit wins; duplicates are ignored. A complete
/// state is absorbing: feeding more segments changes nothing.
pub fn feed_segment(mut state: CaptureState, segment: &Segment, lexicon: &Lexicon) -> CaptureState {
    if state.complete {
        return state;
    }
    let seg_id = state.segments_seen;
    state.segments_seen += 1;
    for token in &segment.tokens {
        match state.mode {
            CaptureMode::WordBased => {
                let word = normalize(&token.text);
                if state.needed.contains(&word) {
                    state.captured.entry(word).or_insert(seg_id);
                }
            }
            CaptureMode::SyllableBased => {
                let supplied = if token.syllables.is_empty() {
                    lexicon.annotate(&token.text)
                } else {
                    token.syllables.clone()
                };
                for unit in supplied {
                    let unit = normalize(&unit);
                    if state.needed.contains(&unit) {
                        state.captured.entry(unit).or_insert(seg_id);
                    }
                }
            }
        }
    }
    state.complete = state.needed.iter().all(|u| state.captured.contains_key(u));
    state
}

/// Per-mode activation-success probabilities for synthesized keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationConfig {
    pub word_based_success: f64,
    pub syllable_based_success: f64,
}

impl Default for ActivationConfig {
    fn default() -> Self {
        ActivationConfig {
            word_based_success: 1.0,
            syllable_based_success: 0.4,
        }
    }
}

/// A synthesized activation key ready for playback.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationKey {
    /// Captured units in keyword order, with the segment that supplied each.
    pub units: Vec<(String, usize)>,
    pub mode: CaptureMode,
    pub activation_success_prob: f64,
}

/// Builds the activation key from a completed capture.
pub fn synthesize(state: &CaptureState, config: &ActivationConfig) -> Result<ActivationKey> {
    if !state.complete {
        return Err(Error::CaptureIncomplete {
            missing: state.missing_units(),
        });
    }
    let units = state
        .needed
        .iter()
        .map(|u| (u.clone(), state.captured[u]))
        .collect();
    Ok(ActivationKey {
        units,
        mode: state.mode,
        activation_success_prob: match state.mode {
            CaptureMode::WordBased => config.word_based_success,
            CaptureMode::SyllableBased => config.syllable_based_success,
        },
    })
}
