use serde::{Deserialize, Serialize};

/// Fog severity levels, percent.
pub const FOG_GRID_PERCENT: [u32; 6] = [2, 4, 6, 8, 10, 12];
/// Snow severity levels, percent.
pub const SNOW_GRID_PERCENT: [u32; 6] = [5, 15, 25, 35, 45, 55];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherCondition {
    Clear,
    Fog,
    Snow,
    Other,
}

impl WeatherCondition {
    pub fn name(self) -> &'static str {
        match self {
            Self::Clear => "clear",
            Self::Fog => "fog",
            Self::Snow => "snow",
            Self::Other => "other",
        }
    }
}

/// Active weather. Severities are fractions in `[0, 1]`; each condition keeps
/// its own scale. `Other` composes fog and snow at independent severities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum WeatherParams {
    Clear,
    Fog { severity: f64 },
    Snow { severity: f64 },
    Other { fog: f64, snow: f64 },
}

impl WeatherParams {
    pub fn fog_percent(p: u32) -> Self {
        Self::Fog {
            severity: f64::from(p) / 100.0,
        }
    }

    pub fn snow_percent(p: u32) -> Self {
        Self::Snow {
            severity: f64::from(p) / 100.0,
        }
    }

    pub fn other_percent(fog: u32, snow: u32) -> Self {
        Self::Other {
            fog: f64::from(fog) / 100.0,
            snow: f64::from(snow) / 100.0,
        }
    }

    pub fn condition(&self) -> WeatherCondition {
        match self {
            Self::Clear => WeatherCondition::Clear,
            Self::Fog { .. } => WeatherCondition::Fog,
            Self::Snow { .. } => WeatherCondition::Snow,
            Self::Other { .. } => WeatherCondition::Other,
        }
    }

    /// Scalar intensity; for `Other` the larger of its two components.
    pub fn severity(&self) -> f64 {
        match *self {
            Self::Clear => 0.0,
            Self::Fog { severity } | Self::Snow { severity } => severity,
            Self::Other { fog, snow } => fog.max(snow),
        }
    }

    /// Checks the clear-iff-zero rule and the configured severity grids.
    pub fn validate(&self) -> Result<(), String> {
        let on_grid = |s: f64, grid: &[u32]| {
            grid.iter()
                .any(|&p| (s * 100.0 - f64::from(p)).abs() < 1e-9)
        };
        match *self {
            Self::Clear => Ok(()),
            Self::Fog { severity } if on_grid(severity, &FOG_GRID_PERCENT) => Ok(()),
            Self::Fog { severity } => Err(format!(
                "fog severity {severity} not on the fog grid {FOG_GRID_PERCENT:?} %"
            )),
            Self::Snow { severity } if on_grid(severity, &SNOW_GRID_PERCENT) => Ok(()),
            Self::Snow { severity } => Err(format!(
                "snow severity {severity} not on the snow grid {SNOW_GRID_PERCENT:?} %"
            )),
            Self::Other { fog, snow } => {
                let ok = |s: f64| (0.0..=1.0).contains(&s);
                if ok(fog) && ok(snow) && fog.max(snow) > 0.0 {
                    Ok(())
                } else {
                    Err(format!("other weather needs severities in [0,1], not both zero (fog {fog}, snow {snow})"))
                }
            }
        }
    }

    /// Compact filename token, e.g. `clear00`, `fog06`, `snow55`, `otherf04s25`.
    pub fn token(&self) -> String {
        let pct = |s: f64| (s * 100.0).round() as u32;
        match *self {
            Self::Clear => "clear00".to_string(),
            Self::Fog { severity } => format!("fog{:02}", pct(severity)),
            Self::Snow { severity } => format!("snow{:02}", pct(severity)),
            Self::Other { fog, snow } => format!("otherf{:02}s{:02}", pct(fog), pct(snow)),
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        let num = |s: &str| -> Option<u32> {
            if s.len() >= 2 && s.bytes().all(|b| b.is_ascii_digit()) {
                s.parse().ok()
            } else {
                None
            }
        };
        if let Some(rest) = token.strip_prefix("clear") {
            return (num(rest)? == 0).then_some(Self::Clear);
        }
        if let Some(rest) = token.strip_prefix("fog") {
            return Some(Self::fog_percent(num(rest)?));
        }
        if let Some(rest) = token.strip_prefix("snow") {
            return Some(Self::snow_percent(num(rest)?));
        }
        let rest = token.strip_prefix("otherf")?;
        let (f, s) = rest.split_once('s')?;
        Some(Self::other_percent(num(f)?, num(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clear_iff_zero() {
        assert_eq!(WeatherParams::Clear.severity(), 0.0);
        assert!(WeatherParams::fog_percent(6).severity() > 0.0);
        assert!(WeatherParams::Other {
            fog: 0.0,
            snow: 0.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn grids_are_enforced() {
        assert!(WeatherParams::fog_percent(12).validate().is_ok());
        assert!(WeatherParams::fog_percent(5).validate().is_err());
        assert!(WeatherParams::snow_percent(55).validate().is_ok());
        assert!(WeatherParams::snow_percent(12).validate().is_err());
        assert!(WeatherParams::Other {
            fog: 0.033,
            snow: 0.4
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn tokens_round_trip() {
        for w in [
            WeatherParams::Clear,
            WeatherParams::fog_percent(2),
            WeatherParams::snow_percent(45),
            WeatherParams::other_percent(8, 35),
        ] {
            assert_eq!(WeatherParams::from_token(&w.token()), Some(w));
        }
        assert_eq!(WeatherParams::fog_percent(6).token(), "fog06");
        assert_eq!(WeatherParams::from_token("fogxx"), None);
    }
}
