//! Signal-processing primitives: decibel metering, Butterworth low-pass
//! design and filtering, nearest-neighbor resampling, segmentation.
//!
//! Everything here is generic over [`Real`] and pure; coefficients are
//! immutable and safe to share.

use crate::error::{Error, Result};
use crate::num::Real;

/// Silence floor applied to decibel levels so `log10(0)` never escapes.
pub const SILENCE_FLOOR_DB: f64 = -120.0;

/// A sound level in decibels relative to reference amplitude 1.
///
/// Values are clamped at [`SILENCE_FLOOR_DB`] on construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DbLevel<R: Real>(R);

impl<R: Real> DbLevel<R> {
    pub fn new(value: R) -> Self {
        let floor = R::from_f64_lit(SILENCE_FLOOR_DB);
        DbLevel(if value < floor { floor } else { value })
    }

    pub fn value(self) -> R {
        self.0
    }
}

/// Noise level of an amplitude frame: `10 log10(A1^2 / A0^2)` with
/// `A1` the frame RMS and the reference `A0` fixed at 1.
pub fn noise_db<R: Real>(frame: &[R]) -> Result<DbLevel<R>> {
    if frame.is_empty() {
        return Err(Error::InvalidArgument("noise_db: empty frame".into()));
    }
    let n = R::from_usize(frame.len()).unwrap();
    let mean_sq = frame.iter().fold(R::zero(), |acc, &x| acc + x * x) / n;
    if mean_sq <= R::zero() {
        return Ok(DbLevel::new(R::from_f64_lit(SILENCE_FLOOR_DB)));
    }
    let ten = R::from_f64_lit(10.0);
    Ok(DbLevel::new(ten * mean_sq.log10()))
}

/// One second-order section, coefficients normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<R: Real> {
    pub b0: R,
    pub b1: R,
    pub b2: R,
    pub a1: R,
    pub a2: R,
}

impl<R: Real> Biquad<R> {
    /// True if both poles of `z^2 + a1 z + a2` lie strictly inside the
    /// unit circle.
    pub fn is_stable(&self) -> bool {
        let one = R::one();
        let four = R::from_f64_lit(4.0);
        let disc = self.a1 * self.a1 - four * self.a2;
        if disc < R::zero() {
            // complex pair: |pole|^2 = a2
            self.a2 < one
        } else {
            let root = disc.sqrt();
            let two = R::from_f64_lit(2.0);
            let p1 = (-self.a1 + root) / two;
            let p2 = (-self.a1 - root) / two;
            p1.abs() < one && p2.abs() < one
        }
    }

    /// DC gain of this section.
    pub fn dc_gain(&self) -> R {
        (self.b0 + self.b1 + self.b2) / (R::one() + self.a1 + self.a2)
    }
}

/// Digital low-pass filter as cascaded second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoeffs<R: Real> {
    pub sections: Vec<Biquad<R>>,
    pub order: usize,
    pub cutoff_hz: R,
    pub sample_rate_hz: R,
}

/// Designs a digital Butterworth low-pass filter.
///
/// The analog prototype is discretized with the bilinear transform; the
/// cutoff is pre-warped so the half-power point lands exactly at
/// `cutoff_hz`. Only even orders are supported, so every pole pair forms
/// one second-order section.
pub fn butterworth_lowpass<R: Real>(
    order: usize,
    cutoff_hz: R,
    sample_rate_hz: R,
) -> Result<FilterCoeffs<R>> {
    if !matches!(order, 2 | 4 | 6 | 8) {
        return Err(Error::InvalidArgument(format!(
            "butterworth order must be one of 2, 4, 6, 8 (got {order})"
        )));
    }
    let two = R::from_f64_lit(2.0);
    let nyquist = sample_rate_hz / two;
    if cutoff_hz <= R::zero() || cutoff_hz >= nyquist {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff_hz} Hz outside (0, Nyquist {nyquist} Hz)"
        )));
    }

    // Pre-warped analog cutoff (rad/s).
    let warped = two * sample_rate_hz * (R::PI() * cutoff_hz / sample_rate_hz).tan();
    let k = two * sample_rate_hz; // bilinear constant 2/T
    let n = order;

    let mut sections = Vec::with_capacity(n / 2);
    for s in 0..n / 2 {
        // Upper-half-plane pole angle of the normalized prototype; the
        // conjugate pair collapses to s^2 + c*s + 1 with c = -2 cos(theta).
        let theta = R::PI() * R::from_usize(2 * s + n + 1).unwrap() / R::from_usize(2 * n).unwrap();
        let c = -two * theta.cos();

        let a0 = k * k + c * warped * k + warped * warped;
        let a1 = two * (warped * warped - k * k);
        let a2 = k * k - c * warped * k + warped * warped;
        let b = warped * warped;
        sections.push(Biquad {
            b0: b / a0,
            b1: two * b / a0,
            b2: b / a0,
            a1: a1 / a0,
            a2: a2 / a0,
        });
    }
    Ok(FilterCoeffs {
        sections,
        order,
        cutoff_hz,
        sample_rate_hz,
    })
}

/// Causal forward filtering with zero initial conditions.
///
/// Each section runs in direct form II transposed; output length equals
/// input length.
pub fn filter_apply<R: Real>(coeffs: &FilterCoeffs<R>, signal: &[R]) -> Vec<R> {
    let mut out: Vec<R> = signal.to_vec();
    for sec in &coeffs.sections {
        let mut s1 = R::zero();
        let mut s2 = R::zero();
        for v in out.iter_mut() {
            let x = *v;
            let y = sec.b0 * x + s1;
            s1 = sec.b1 * x - sec.a1 * y + s2;
            s2 = sec.b2 * x - sec.a2 * y;
            *v = y;
        }
    }
    out
}

/// Magnitude of the filter's frequency response at `freq_hz`.
pub fn magnitude_response<R: Real>(coeffs: &FilterCoeffs<R>, freq_hz: R) -> R {
    let omega = R::from_f64_lit(2.0) * R::PI() * freq_hz / coeffs.sample_rate_hz;
    let (c1, s1) = (omega.cos(), omega.sin());
    let (c2, s2) = ((omega + omega).cos(), (omega + omega).sin());
    let mut mag = R::one();
    for sec in &coeffs.sections {
        // evaluate b(z)/a(z) at z = e^{j omega} using z^-1 terms
        let num_re = sec.b0 + sec.b1 * c1 + sec.b2 * c2;
        let num_im = -(sec.b1 * s1 + sec.b2 * s2);
        let den_re = R::one() + sec.a1 * c1 + sec.a2 * c2;
        let den_im = -(sec.a1 * s1 + sec.a2 * s2);
        let num = (num_re * num_re + num_im * num_im).sqrt();
        let den = (den_re * den_re + den_im * den_im).sqrt();
        mag = mag * num / den;
    }
    mag
}

/// Nearest-neighbor resampling of timestamped samples onto a uniform grid.
///
/// `samples` must be non-empty with strictly increasing timestamps. The
/// output has `round((t1 - t0) * target_rate)` entries; entry `k` is the
/// value of the input sample whose timestamp is nearest to
/// `t0 + k / target_rate`. Exact distance ties resolve to the earlier
/// sample, and queries beyond either end clamp to the first/last sample.
pub fn resample_nn<R: Real>(samples: &[(R, R)], target_rate: R, span: (R, R)) -> Result<Vec<R>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("resample_nn: empty input".into()));
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidArgument(
                "resample_nn: timestamps not strictly increasing".into(),
            ));
        }
    }
    let (t0, t1) = span;
    if t1 < t0 {
        return Err(Error::Range(format!("span end {t1} before start {t0}")));
    }
    let count = (target_rate * (t1 - t0)).round().to_usize().unwrap_or(0);
    let mut out = Vec::with_capacity(count);
    let mut idx = 0usize;
    for k in 0..count {
        let q = t0 + R::from_usize(k).unwrap() / target_rate;
        // queries are increasing, so the nearest index only moves forward
        while idx + 1 < samples.len()
            && (samples[idx + 1].0 - q).abs() < (samples[idx].0 - q).abs()
        {
            idx += 1;
        }
        out.push(samples[idx].1);
    }
    Ok(out)
}

/// Splits a signal into frames of `window_s` seconds every `hop_s` seconds.
/// An incomplete tail frame is dropped.
pub fn segment<T>(signal: &[T], window_s: f64, hop_s: f64, rate_hz: f64) -> Result<Vec<&[T]>> {
    if window_s <= 0.0 || hop_s <= 0.0 {
        return Err(Error::InvalidArgument(
            "segment: window and hop must be positive".into(),
        ));
    }
    let frame_len = (window_s * rate_hz).round() as usize;
    let hop_len = (hop_s * rate_hz).round() as usize;
    if frame_len == 0 || hop_len == 0 {
        return Err(Error::InvalidArgument(
            "segment: window/hop shorter than one sample".into(),
        ));
    }
    let mut frames = Vec::new();
    let mut start = 0usize;
    while start + frame_len <= signal.len() {
        frames.push(&signal[start..start + frame_len]);
        start += hop_len;
    }
    Ok(frames)
}

/// Sliding median with a centered window; the window shrinks at the ends.
///
/// Used for smoothing the noise/light envelopes, which are already slow
/// 5 Hz channels where a Butterworth transient would distort the level.
/// Maintains a sorted window incrementally; this sits on the simulation
/// hot path.
pub fn median_filter<R: Real>(signal: &[R], window_len: usize) -> Vec<R> {
    if signal.is_empty() || window_len <= 1 {
        return signal.to_vec();
    }
    let half = window_len / 2;
    let n = signal.len();
    let mut out = Vec::with_capacity(n);
    let mut sorted: Vec<R> = Vec::with_capacity(window_len + 2);
    let (mut cur_lo, mut cur_hi) = (0usize, 0usize);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        while cur_hi < hi {
            let v = signal[cur_hi];
            let pos = sorted.partition_point(|x| *x < v);
            sorted.insert(pos, v);
            cur_hi += 1;
        }
        while cur_lo < lo {
            let v = signal[cur_lo];
            let pos = sorted.partition_point(|x| *x < v);
            debug_assert!(sorted[pos] == v, "outgoing value present in window");
            sorted.remove(pos);
            cur_lo += 1;
        }
        let m = sorted.len();
        let med = if m % 2 == 1 {
            sorted[m / 2]
        } else {
            (sorted[m / 2 - 1] + sorted[m / 2]) / R::from_f64_lit(2.0)
        };
        out.push(med);
    }
    out
}
