//! Resource-consumption ledger: per-phase power draw, memory/CPU device
//! profiles, and on-disk file sizes.

use serde::{Deserialize, Serialize};

use crate::Scalar;

use super::Phase;

/// Per-phase power draw in mAh per minute, with the three P3 sensing
/// regimes (full-rate, reduced-rate, noise-gated standby).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRates {
    pub p1_mah_per_min: Scalar,
    pub p2_mah_per_min: Scalar,
    pub p3_full_rate_mah_per_min: Scalar,
    pub p3_low_rate_mah_per_min: Scalar,
    pub p3_gated_mah_per_min: Scalar,
    pub p4_mah_per_min: Scalar,
    /// Sensor rate (Hz) of the full-power P3 regime.
    pub full_rate_hz: Scalar,
    /// Sensor rate (Hz) of the reduced-power P3 regime.
    pub low_rate_hz: Scalar,
}

impl Default for PowerRates {
    fn default() -> Self {
        PowerRates {
            p1_mah_per_min: 0.2,
            p2_mah_per_min: 0.1,
            p3_full_rate_mah_per_min: 0.8,
            p3_low_rate_mah_per_min: 0.5,
            p3_gated_mah_per_min: 0.4,
            p4_mah_per_min: 0.1,
            full_rate_hz: 50.0,
            low_rate_hz: 10.0,
        }
    }
}

impl PowerRates {
    /// P3 draw for a sensing rate; exact at the two measured regimes,
    /// linear in between, clamped outside, and overridden while gated.
    pub fn p3_rate(&self, sensing_rate_hz: Scalar, gated: bool) -> Scalar {
        if gated {
            return self.p3_gated_mah_per_min;
        }
        if sensing_rate_hz >= self.full_rate_hz {
            self.p3_full_rate_mah_per_min
        } else if sensing_rate_hz <= self.low_rate_hz {
            self.p3_low_rate_mah_per_min
        } else {
            let frac = (sensing_rate_hz - self.low_rate_hz) / (self.full_rate_hz - self.low_rate_hz);
            self.p3_low_rate_mah_per_min
                + frac * (self.p3_full_rate_mah_per_min - self.p3_low_rate_mah_per_min)
        }
    }

    fn rate_for(&self, phase: Phase, sensing_rate_hz: Scalar, gated: bool) -> Scalar {
        match phase {
            Phase::P1CallMonitor => self.p1_mah_per_min,
            Phase::P2RecordSynthesize => self.p2_mah_per_min,
            Phase::P3EnvironmentMonitor => self.p3_rate(sensing_rate_hz, gated),
            Phase::P4Attack => self.p4_mah_per_min,
            Phase::Done => 0.0,
        }
    }
}

/// RAM/CPU footprint of the four phases on one handset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    /// Average RAM in MB for P1..P4.
    pub ram_mb: [Scalar; 4],
    /// CPU share during P3 (the only computing phase).
    pub cpu_p3_percent: Scalar,
}

impl DeviceProfile {
    pub fn galaxy_s9() -> Self {
        DeviceProfile { name: "galaxy_s9".into(), ram_mb: [15.0, 22.0, 26.0, 25.0], cpu_p3_percent: 7.0 }
    }

    pub fn pixel_2() -> Self {
        DeviceProfile { name: "pixel_2".into(), ram_mb: [17.0, 35.0, 35.0, 35.0], cpu_p3_percent: 7.0 }
    }
}

/// Average size of each stored file (KB): the synthesized voice plus the
/// three sensor logs, which are overwritten on the retention interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FileSizes {
    pub voice_kb: Scalar,
    pub accel_kb: Scalar,
    pub light_kb: Scalar,
    pub noise_kb: Scalar,
}

impl Default for FileSizes {
    fn default() -> Self {
        FileSizes { voice_kb: 180.9, accel_kb: 91.7, light_kb: 4.4, noise_kb: 5.4 }
    }
}

impl FileSizes {
    /// Peak storage: one voice file plus one retained sensor-log set.
    pub fn peak_kb(&self) -> Scalar {
        self.voice_kb + self.accel_kb + self.light_kb + self.noise_kb
    }
}

/// Full ledger configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerConfig {
    pub power: PowerRates,
    pub device: DeviceProfile,
    pub files: FileSizes,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            power: PowerRates::default(),
            device: DeviceProfile::galaxy_s9(),
            files: FileSizes::default(),
        }
    }
}

/// Accumulated totals of one trial (or a batch).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceLedger {
    /// Minutes spent in P1..P4.
    pub minutes: [Scalar; 4],
    /// Energy drawn in P1..P4 (mAh).
    pub mah: [Scalar; 4],
    /// Highest phase index visited (for RAM peak lookups).
    pub phases_visited: [bool; 4],
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_mah(&self) -> Scalar {
        self.mah.iter().sum()
    }

    pub fn total_minutes(&self) -> Scalar {
        self.minutes.iter().sum()
    }

    /// Peak RAM over the phases this ledger visited.
    pub fn ram_peak_mb(&self, device: &DeviceProfile) -> Scalar {
        self.phases_visited
            .iter()
            .zip(device.ram_mb)
            .filter(|(visited, _)| **visited)
            .map(|(_, ram)| ram)
            .fold(0.0, Scalar::max)
    }

    /// Merges another ledger into this one.
    pub fn merge(&mut self, other: &ResourceLedger) {
        for i in 0..4 {
            self.minutes[i] += other.minutes[i];
            self.mah[i] += other.mah[i];
            self.phases_visited[i] |= other.phases_visited[i];
        }
    }

    pub fn summary(&self, config: &LedgerConfig) -> LedgerSummary {
        LedgerSummary {
            minutes: self.minutes,
            mah: self.mah,
            mah_total: self.total_mah(),
            ram_peak_mb: self.ram_peak_mb(&config.device),
            cpu_p3_percent: config.device.cpu_p3_percent,
            storage_peak_kb: config.files.peak_kb(),
            device: config.device.name.clone(),
        }
    }
}

/// Report-facing ledger totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub minutes: [Scalar; 4],
    pub mah: [Scalar; 4],
    pub mah_total: Scalar,
    pub ram_peak_mb: Scalar,
    pub cpu_p3_percent: Scalar,
    pub storage_peak_kb: Scalar,
    pub device: String,
}

/// Adds `minutes` of the given phase to the ledger at the configured rate.
///
/// P3 rates depend on the sensing rate and the standby gate; `Done`
/// accumulates nothing.
pub fn ledger_accumulate(
    mut ledger: ResourceLedger,
    phase: Phase,
    minutes: Scalar,
    sensing_rate_hz: Scalar,
    gated: bool,
    rates: &PowerRates,
) -> ResourceLedger {
    debug_assert!(minutes >= 0.0, "negative phase duration");
    if let Some(idx) = phase.index() {
        ledger.minutes[idx] += minutes;
        ledger.mah[idx] += rates.rate_for(phase, sensing_rate_hz, gated) * minutes;
        if minutes > 0.0 {
            ledger.phases_visited[idx] = true;
        }
    }
    ledger
}
