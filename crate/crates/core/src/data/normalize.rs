use serde::{Deserialize, Serialize};

use super::align::AlignedFrame;
use super::series::{ChannelKind, HourRange};
use super::DataError;

/// Per-channel z-score statistics fitted on a training range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub name: String,
    pub kind: ChannelKind,
    pub mean: f64,
    /// Population standard deviation (divide by n, not n-1).
    pub std: f64,
}

/// Train-range z-score state for a whole frame, in frame channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerState {
    channels: Vec<ChannelStats>,
}

/// Fit per-channel mean and population std over the present cells of
/// `train`. A channel with no cells in range or zero variance is an error:
/// eval-range statistics must never leak in silently.
pub fn fit_normalizer(
    frame: &AlignedFrame,
    train: HourRange,
) -> Result<NormalizerState, DataError> {
    let mut channels = Vec::with_capacity(frame.channels().len());
    for (c, meta) in frame.channels().iter().enumerate() {
        let mut xs = Vec::new();
        for (r, &h) in frame.hours().iter().enumerate() {
            if train.contains(h) && frame.is_present(c, r) {
                xs.push(frame.value(c, r));
            }
        }
        if xs.is_empty() {
            return Err(DataError::NoTrainRows {
                channel: meta.label(),
            });
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std == 0.0 {
            return Err(DataError::ConstantChannel {
                channel: meta.label(),
            });
        }
        channels.push(ChannelStats {
            name: meta.name.clone(),
            kind: meta.kind,
            mean,
            std,
        });
    }
    Ok(NormalizerState { channels })
}

impl NormalizerState {
    pub fn channels(&self) -> &[ChannelStats] {
        &self.channels
    }

    fn check(&self, frame: &AlignedFrame) -> Result<(), DataError> {
        let found: Vec<&str> = frame.channels().iter().map(|c| c.name.as_str()).collect();
        let expected: Vec<&str> = self.channels.iter().map(|c| c.name.as_str()).collect();
        if found != expected {
            return Err(DataError::ChannelMismatch {
                expected: expected.join(","),
                found: found.join(","),
            });
        }
        Ok(())
    }

    /// Z-score a single value of channel `c`.
    pub fn normalize(&self, c: usize, value: f64) -> f64 {
        (value - self.channels[c].mean) / self.channels[c].std
    }

    /// Undo [`normalize`](Self::normalize).
    pub fn denormalize(&self, c: usize, value: f64) -> f64 {
        value * self.channels[c].std + self.channels[c].mean
    }

    /// Z-score every present cell, leaving absences untouched.
    pub fn apply(&self, frame: &AlignedFrame) -> Result<AlignedFrame, DataError> {
        self.check(frame)?;
        let mut out = frame.clone();
        for (c, col) in out.values_mut().iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                if frame.is_present(c, r) {
                    *v = (*v - self.channels[c].mean) / self.channels[c].std;
                }
            }
        }
        Ok(out)
    }

    /// Invert [`apply`](Self::apply).
    pub fn invert(&self, frame: &AlignedFrame) -> Result<AlignedFrame, DataError> {
        self.check(frame)?;
        let mut out = frame.clone();
        for (c, col) in out.values_mut().iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                if frame.is_present(c, r) {
                    *v = *v * self.channels[c].std + self.channels[c].mean;
                }
            }
        }
        Ok(out)
    }
}
