//! SCADA records and datasets.

use std::fmt;
use std::str::FromStr;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

bitflags! {
    /// Rejection markers. A record with any flag set is kept for reporting
    /// but never used for fitting or training.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
    pub struct Flags: u8 {
        const NON_PHYSICAL = 0b001;
        const OUTLIER = 0b010;
        const LOW_WIND_REJECT = 0b100;
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, _) in self.iter_names() {
            if !first {
                f.write_str("|")?;
            }
            f.write_str(name)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Flags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = Flags::empty();
        for token in s.split('|').map(str::trim).filter(|t| !t.is_empty()) {
            flags |= Flags::from_name(token)
                .ok_or_else(|| Error::Domain(format!("unknown flag `{token}`")))?;
        }
        Ok(flags)
    }
}

/// One measured operating point (v, β, ω, T, P) in SI units, pitch in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScadaRecord {
    pub wind_speed_ms: f64,
    pub pitch_deg: f64,
    pub rotor_speed_rads: f64,
    pub torque_nm: f64,
    pub power_w: f64,
    #[serde(default)]
    pub flags: Flags,
}

impl ScadaRecord {
    pub fn new(wind_speed_ms: f64, pitch_deg: f64, rotor_speed_rads: f64, torque_nm: f64, power_w: f64) -> Self {
        ScadaRecord {
            wind_speed_ms,
            pitch_deg,
            rotor_speed_rads,
            torque_nm,
            power_w,
            flags: Flags::empty(),
        }
    }

    #[inline]
    pub fn is_retained(&self) -> bool {
        self.flags.is_empty()
    }

    /// Network inputs (v, β, ω).
    #[inline]
    pub fn inputs(&self) -> [f64; 3] {
        [self.wind_speed_ms, self.pitch_deg, self.rotor_speed_rads]
    }
}

/// Ordered collection of records with a provenance label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<ScadaRecord>,
    pub source_label: String,
}

impl Dataset {
    pub fn new(records: Vec<ScadaRecord>, source_label: impl Into<String>) -> Self {
        Dataset {
            records,
            source_label: source_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn retained_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_retained()).count()
    }

    pub fn rejected_count(&self) -> usize {
        self.len() - self.retained_count()
    }

    pub fn retained(&self) -> impl Iterator<Item = &ScadaRecord> + '_ {
        self.records.iter().filter(|r| r.is_retained())
    }

    /// New dataset holding copies of the unflagged records only.
    pub fn retained_only(&self) -> Dataset {
        Dataset::new(self.retained().copied().collect(), self.source_label.clone())
    }

    /// Number of records carrying `flag`.
    pub fn count_flag(&self, flag: Flags) -> usize {
        self.records.iter().filter(|r| r.flags.contains(flag)).count()
    }

    pub fn clear_flags(&mut self) {
        for r in &mut self.records {
            r.flags = Flags::empty();
        }
    }
}
