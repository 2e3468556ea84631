//! SCADA CSV ingestion and the canonical dataset file format.
//!
//! Raw exports are mapped column-by-column onto the five channels and
//! converted to SI. Rows with a missing or unparseable value in any mapped
//! channel are dropped and counted; everything else in the file (timestamps,
//! turbine ids, extra channels) is ignored.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{Dataset, Flags, ScadaRecord};

pub const CANONICAL_HEADER: [&str; 6] = [
    "wind_speed_ms",
    "pitch_deg",
    "rotor_speed_rads",
    "torque_nm",
    "power_w",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WindSpeedUnit {
    #[default]
    #[serde(rename = "m/s")]
    MetersPerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PitchUnit {
    #[default]
    #[serde(rename = "deg")]
    Degrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RotorSpeedUnit {
    #[serde(rename = "rpm")]
    Rpm,
    #[default]
    #[serde(rename = "rad/s")]
    RadPerSec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TorqueUnit {
    #[default]
    #[serde(rename = "Nm")]
    NewtonMeter,
    #[serde(rename = "kNm")]
    KiloNewtonMeter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PowerUnit {
    #[default]
    #[serde(rename = "W")]
    Watt,
    #[serde(rename = "kW")]
    Kilowatt,
}

impl RotorSpeedUnit {
    fn to_si(self, x: f64) -> f64 {
        match self {
            RotorSpeedUnit::Rpm => x * std::f64::consts::TAU / 60.0,
            RotorSpeedUnit::RadPerSec => x,
        }
    }
}

impl TorqueUnit {
    fn to_si(self, x: f64) -> f64 {
        match self {
            TorqueUnit::NewtonMeter => x,
            TorqueUnit::KiloNewtonMeter => x * 1000.0,
        }
    }
}

impl PowerUnit {
    fn to_si(self, x: f64) -> f64 {
        match self {
            PowerUnit::Watt => x,
            PowerUnit::Kilowatt => x * 1000.0,
        }
    }
}

/// Source column name plus the unit its values are recorded in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel<U> {
    pub column: String,
    #[serde(default)]
    pub unit: U,
}

impl<U: Default> Channel<U> {
    pub fn new(column: impl Into<String>) -> Self {
        Channel {
            column: column.into(),
            unit: U::default(),
        }
    }
}

impl<U> Channel<U> {
    pub fn with_unit(column: impl Into<String>, unit: U) -> Self {
        Channel {
            column: column.into(),
            unit,
        }
    }
}

/// Maps raw CSV columns onto the five canonical channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub wind_speed: Channel<WindSpeedUnit>,
    pub pitch: Channel<PitchUnit>,
    pub rotor_speed: Channel<RotorSpeedUnit>,
    pub torque: Channel<TorqueUnit>,
    pub power: Channel<PowerUnit>,
    #[serde(default = "default_missing_tokens")]
    pub missing_value_tokens: BTreeSet<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_missing_tokens() -> BTreeSet<String> {
    ["", "NA", "NaN", "nan", "null", "NULL"].into_iter().map(String::from).collect()
}

fn default_delimiter() -> char {
    ','
}

impl ColumnMap {
    /// A map for files that already use the canonical column names and SI units.
    pub fn canonical() -> Self {
        ColumnMap {
            wind_speed: Channel::new("wind_speed_ms"),
            pitch: Channel::new("pitch_deg"),
            rotor_speed: Channel::new("rotor_speed_rads"),
            torque: Channel::new("torque_nm"),
            power: Channel::new("power_w"),
            missing_value_tokens: default_missing_tokens(),
            delimiter: ',',
        }
    }

    fn column_names(&self) -> [&str; 5] {
        [
            &self.wind_speed.column,
            &self.pitch.column,
            &self.rotor_speed.column,
            &self.torque.column,
            &self.power.column,
        ]
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(u32::from(self.delimiter))
            .map_err(|_| Error::Config(format!("delimiter `{}` is not a single-byte character", self.delimiter)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_total: usize,
    pub rows_kept: usize,
    pub rows_dropped: usize,
}

/// Reads a raw SCADA export into a canonical dataset.
pub fn parse_scada_csv(path: impl AsRef<Path>, map: &ColumnMap) -> Result<(Dataset, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(map.delimiter_byte()?)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(map.column_names()) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut row = csv::StringRecord::new();
    while reader.read_record(&mut row)? {
        report.rows_total += 1;
        let mut values = [0.0; 5];
        let mut ok = true;
        for (value, &i) in values.iter_mut().zip(&idx) {
            match row.get(i).and_then(|s| parse_cell(s, &map.missing_value_tokens)) {
                Some(x) => *value = x,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            report.rows_dropped += 1;
            continue;
        }
        let [v, pitch, omega, torque, power] = values;
        records.push(ScadaRecord::new(
            v,
            pitch,
            map.rotor_speed.unit.to_si(omega),
            map.torque.unit.to_si(torque),
            map.power.unit.to_si(power),
        ));
    }
    report.rows_kept = records.len();
    if records.is_empty() {
        return Err(Error::NoRows(path.to_path_buf()));
    }
    let label = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((Dataset::new(records, label), report))
}

fn parse_cell(cell: &str, missing: &BTreeSet<String>) -> Option<f64> {
    if missing.contains(cell) {
        return None;
    }
    cell.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Renders `x` with 15 significant digits, trailing zeros removed.
pub fn format_sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exponent) {
        return format!("{x:.14e}");
    }
    let decimals = (14 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    s
}

/// Writes the canonical CSV (`wind_speed_ms,pitch_deg,rotor_speed_rads,torque_nm,power_w,flags`).
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CANONICAL_HEADER)?;
    for r in &dataset.records {
        writer.write_record([
            format_sig15(r.wind_speed_ms),
            format_sig15(r.pitch_deg),
            format_sig15(r.rotor_speed_rads),
            format_sig15(r.torque_nm),
            format_sig15(r.power_w),
            r.flags.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let malformed = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CANONICAL_HEADER) {
        return Err(malformed(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| malformed(e.to_string()))?;
        if row.len() != CANONICAL_HEADER.len() {
            return Err(malformed(format!("row {} has {} fields", line + 1, row.len())));
        }
        let mut values = [0.0; 5];
        for (i, value) in values.iter_mut().enumerate() {
            *value = row[i]
                .parse()
                .map_err(|_| malformed(format!("row {}: bad number `{}`", line + 1, &row[i])))?;
        }
        let flags: Flags = row[5]
            .parse()
            .map_err(|e: Error| malformed(format!("row {}: {e}", line + 1)))?;
        let [v, pitch, omega, torque, power] = values;
        let mut record = ScadaRecord::new(v, pitch, omega, torque, power);
        record.flags = flags;
        records.push(record);
    }
    let label = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset::new(records, label))
}

/// Writes a header plus rows of numbers as CSV; used by the exporters.
pub(crate) fn write_numeric_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_sig15).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
