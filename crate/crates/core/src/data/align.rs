use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::series::{ChannelKind, HourRange, HourlySeries};
use super::DataError;

/// How to reconcile channels with different coverage onto one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignPolicy {
    /// Keep only hours present in every channel.
    Intersection,
    /// Keep every hour present in any channel; absences stay masked.
    Union,
    /// Union grid, then fill interior gaps of at most `limit_hours`
    /// consecutive hours with the last observed value. Leading and trailing
    /// absences are never filled.
    ForwardFill { limit_hours: u32 },
}

/// Identity of one column in an [`AlignedFrame`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub kind: ChannelKind,
    pub name: String,
    pub area: String,
}

impl ChannelMeta {
    pub fn label(&self) -> String {
        format!("{}/{}", self.area, self.name)
    }
}

/// Several channels on one shared hourly grid.
///
/// `values[c][r]` is NaN wherever `present[c][r]` is false; no policy ever
/// invents a value except the explicit forward-fill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedFrame {
    hours: Vec<i64>,
    channels: Vec<ChannelMeta>,
    values: Vec<Vec<f64>>,
    present: Vec<Vec<bool>>,
}

impl AlignedFrame {
    pub fn hours(&self) -> &[i64] {
        &self.hours
    }

    pub fn n_rows(&self) -> usize {
        self.hours.len()
    }

    pub fn channels(&self) -> &[ChannelMeta] {
        &self.channels
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    /// First channel of the given kind, if any.
    pub fn kind_index(&self, kind: ChannelKind) -> Option<usize> {
        self.channels.iter().position(|c| c.kind == kind)
    }

    pub fn is_present(&self, channel: usize, row: usize) -> bool {
        self.present[channel][row]
    }

    pub fn value(&self, channel: usize, row: usize) -> f64 {
        self.values[channel][row]
    }

    fn row_of(&self, hour: i64) -> Option<usize> {
        self.hours.binary_search(&hour).ok()
    }

    /// Value of a channel at an exact grid hour, if present.
    pub fn get(&self, channel: usize, hour: i64) -> Option<f64> {
        let row = self.row_of(hour)?;
        self.present[channel][row].then(|| self.values[channel][row])
    }

    /// True when the channel is present at every hour of `range`.
    pub fn covers(&self, channel: usize, range: HourRange) -> bool {
        range.iter().all(|h| self.get(channel, h).is_some())
    }

    /// Extract one channel's present cells as a standalone series.
    pub fn to_series(&self, channel: usize) -> Result<HourlySeries, DataError> {
        let meta = &self.channels[channel];
        let mut hours = Vec::new();
        let mut values = Vec::new();
        for (r, &h) in self.hours.iter().enumerate() {
            if self.present[channel][r] {
                hours.push(h);
                values.push(self.values[channel][r]);
            }
        }
        HourlySeries::new(meta.kind, meta.name.clone(), meta.area.clone(), hours, values)
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.values
    }
}

/// Put several series on one hourly grid under the given policy.
pub fn align(series: &[HourlySeries], policy: AlignPolicy) -> Result<AlignedFrame, DataError> {
    if series.is_empty() {
        return Err(DataError::EmptySeries("align input".to_string()));
    }
    let mut seen = BTreeSet::new();
    for s in series {
        let key = (s.area().to_string(), s.name().to_string());
        if !seen.insert(key) {
            return Err(DataError::DuplicateChannel(format!(
                "{}/{}",
                s.area(),
                s.name()
            )));
        }
    }

    let hours: Vec<i64> = match policy {
        AlignPolicy::Intersection => {
            let mut common: BTreeSet<i64> = series[0].hours().iter().copied().collect();
            for s in &series[1..] {
                let this: BTreeSet<i64> = s.hours().iter().copied().collect();
                common = common.intersection(&this).copied().collect();
            }
            if common.is_empty() {
                return Err(DataError::NoOverlap);
            }
            common.into_iter().collect()
        }
        AlignPolicy::Union | AlignPolicy::ForwardFill { .. } => {
            let mut all = BTreeSet::new();
            for s in series {
                all.extend(s.hours().iter().copied());
            }
            all.into_iter().collect()
        }
    };

    let n = hours.len();
    let mut channels = Vec::with_capacity(series.len());
    let mut values = Vec::with_capacity(series.len());
    let mut present = Vec::with_capacity(series.len());
    for s in series {
        channels.push(ChannelMeta {
            kind: s.kind(),
            name: s.name().to_string(),
            area: s.area().to_string(),
        });
        let mut col = vec![f64::NAN; n];
        let mut mask = vec![false; n];
        for (r, &h) in hours.iter().enumerate() {
            if let Some(v) = s.value_at(h) {
                col[r] = v;
                mask[r] = true;
            }
        }
        values.push(col);
        present.push(mask);
    }

    if let AlignPolicy::ForwardFill { limit_hours } = policy {
        let limit = limit_hours as i64;
        for c in 0..values.len() {
            forward_fill(&hours, &mut values[c], &mut present[c], limit);
        }
    }

    Ok(AlignedFrame {
        hours,
        channels,
        values,
        present,
    })
}

/// Fill interior absent runs of at most `limit` grid hours with the value to
/// their left. A run qualifies only if bounded by present cells on both
/// sides and if the *grid-hour* distance between those cells, minus one,
/// stays within the limit.
fn forward_fill(hours: &[i64], values: &mut [f64], present: &mut [bool], limit: i64) {
    let n = hours.len();
    let mut r = 0;
    while r < n {
        if present[r] {
            r += 1;
            continue;
        }
        // start of an absent run at grid rows [r, run_end)
        let run_start = r;
        while r < n && !present[r] {
            r += 1;
        }
        let run_end = r;
        if run_start == 0 || run_end == n {
            continue; // leading or trailing edge
        }
        let left = run_start - 1;
        let gap = hours[run_end] - hours[left] - 1;
        if gap <= limit {
            let fill = values[left];
            for k in run_start..run_end {
                values[k] = fill;
                present[k] = true;
            }
        }
    }
}
