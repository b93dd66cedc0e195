//! Sinusoidal encodings of local hour-of-day and day-of-week.

use chrono::{DateTime, Datelike, Timelike, Utc};
use chrono_tz::Tz;

use crate::data::hour_start;

/// Sinusoidal clock features. Hour and weekday are taken in the supplied
/// timezone, weekday numbered Monday = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFeatures {
    pub hour_sin: f64,
    pub hour_cos: f64,
    pub dow_sin: f64,
    pub dow_cos: f64,
}

impl TimeFeatures {
    pub fn as_array(&self) -> [f64; 4] {
        [self.hour_sin, self.hour_cos, self.dow_sin, self.dow_cos]
    }
}

/// Encode an instant: `sin/cos(2*pi*hour/24)` and `sin/cos(2*pi*dow/7)`.
pub fn time_features(ts: DateTime<Utc>, tz: Tz) -> TimeFeatures {
    let local = ts.with_timezone(&tz);
    let hour = local.hour() as f64;
    let dow = local.weekday().num_days_from_monday() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    TimeFeatures {
        hour_sin: (two_pi * hour / 24.0).sin(),
        hour_cos: (two_pi * hour / 24.0).cos(),
        dow_sin: (two_pi * dow / 7.0).sin(),
        dow_cos: (two_pi * dow / 7.0).cos(),
    }
}

/// Encode a grid hour index (hours since the Unix epoch).
pub fn time_features_at_hour(hour: i64, tz: Tz) -> TimeFeatures {
    time_features(hour_start(hour), tz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::TimeZone;

    #[test]
    fn midnight_and_quarter_day_utc() {
        let tz = Tz::UTC;
        let midnight = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        let f = time_features(midnight, tz);
        assert_relative_eq!(f.hour_sin, 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.hour_cos, 1.0, epsilon = 1e-12);

        let six = Utc.with_ymd_and_hms(2024, 1, 1, 6, 0, 0).unwrap();
        let f6 = time_features(six, tz);
        assert_relative_eq!(f6.hour_sin, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f6.hour_cos, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn wraps_with_the_clock() {
        let tz = Tz::UTC;
        let one_am = Utc.with_ymd_and_hms(2024, 1, 1, 1, 0, 0).unwrap();
        let one_am_next_day = Utc.with_ymd_and_hms(2024, 1, 2, 1, 0, 0).unwrap();
        let (a, b) = (time_features(one_am, tz), time_features(one_am_next_day, tz));
        assert_relative_eq!(a.hour_sin, b.hour_sin, epsilon = 1e-12);
        assert_relative_eq!(a.hour_cos, b.hour_cos, epsilon = 1e-12);
        // but day-of-week moved
        assert!((a.dow_sin - b.dow_sin).abs() > 1e-3);
    }

    #[test]
    fn respects_the_local_timezone() {
        // 08:00 UTC on a winter day is 00:00 in Los Angeles (UTC-8)
        let ts = Utc.with_ymd_and_hms(2024, 1, 10, 8, 0, 0).unwrap();
        let f = time_features(ts, chrono_tz::America::Los_Angeles);
        assert_relative_eq!(f.hour_sin, 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.hour_cos, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_circle_identity() {
        for hour in [0_i64, 7, 123, 477_777, -5] {
            let f = time_features_at_hour(hour, chrono_tz::America::Los_Angeles);
            assert_relative_eq!(
                f.hour_sin * f.hour_sin + f.hour_cos * f.hour_cos,
                1.0,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                f.dow_sin * f.dow_sin + f.dow_cos * f.dow_cos,
                1.0,
                epsilon = 1e-12
            );
        }
    }
}
