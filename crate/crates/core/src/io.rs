//! Plain-text exchange formats: JSON state and schedule files, CSV
//! trajectories. Floats are written with 17 significant digits so a value
//! read back is bitwise identical.

use std::io;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::interaction::FieldExpansion;
use crate::spectral_basis::{Frequency, ModeIndex};

/// `{:.16e}` for every float: 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct PreciseFormatter;

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// A float with 17 significant digits.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Compact JSON with precise floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// A JSON array written one element per line.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> String {
    if items.is_empty() {
        return "[]\n".into();
    }
    let body: Vec<String> = items.iter().map(|i| format!("  {}", to_json(i))).collect();
    format!("[\n{}\n]\n", body.join(",\n"))
}

/// One coefficient of a state or control value.
#[derive(Debug, Clone, Copy, PartialEq, SerializeDerive, Deserialize)]
pub struct StateEntry {
    pub j: u8,
    pub k: [u32; 3],
    pub value: f64,
}

impl StateEntry {
    pub fn index(&self) -> ModeIndex {
        ModeIndex::new(self.j, Frequency(self.k))
    }
}

pub fn expansion_to_entries(e: &FieldExpansion) -> Vec<StateEntry> {
    e.iter().map(|(idx, &value)| StateEntry { j: idx.j, k: idx.k.0, value }).collect()
}

pub fn entries_to_expansion(entries: &[StateEntry]) -> Result<FieldExpansion> {
    let mut out = FieldExpansion::new();
    for e in entries {
        let idx = e.index();
        if !idx.is_valid() {
            return Err(Error::InvalidBranch { k: idx.k, j: idx.j });
        }
        if !e.value.is_finite() {
            return Err(Error::Parse(format!("non-finite coefficient for {idx}")));
        }
        out.add(idx, e.value);
    }
    Ok(out)
}

/// Writes a state as a JSON array of `{j, k, value}`.
pub fn write_state(e: &FieldExpansion) -> String {
    to_json_lines(&expansion_to_entries(e))
}

/// Reads a JSON array of `{j, k, value}`.
pub fn read_state(text: &str) -> Result<FieldExpansion> {
    let entries: Vec<StateEntry> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    entries_to_expansion(&entries)
}

/// Piecewise-constant control on disk.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct ScheduleFile {
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SegmentFile {
    pub duration: f64,
    pub coeffs: Vec<StateEntry>,
}

pub fn write_schedule(s: &ScheduleFile) -> String {
    let mut out = String::from("{\n  \"segments\": [\n");
    let segs: Vec<String> = s.segments.iter().map(|seg| format!("    {}", to_json(seg))).collect();
    out.push_str(&segs.join(",\n"));
    out.push_str("\n  ]\n}\n");
    out
}

pub fn read_schedule(text: &str) -> Result<ScheduleFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("schedule file: {e}")))
}

/// CSV with a `time` column followed by one column per mode.
pub fn trajectory_csv(modes: &[ModeIndex], times: &[f64], states: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("time".to_string())
        .chain(modes.iter().map(|m| format!("j{}_k{}_{}_{}", m.j, m.k.get(0), m.k.get(1), m.k.get(2))));
    w.write_record(header).map_err(csv_error)?;
    for (t, u) in times.iter().zip(states) {
        w.write_record(std::iter::once(t).chain(u).map(|x| format_f64(*x))).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII fields"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}
