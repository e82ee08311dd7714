//! File formats: curve-set CSV, two-group CSV (wide or long), report CSV and
//! JSON, and the run manifest.
//!
//! All CSV files are comma-separated UTF-8 with a header row and `.` as the
//! decimal point. Line numbers in errors are 1-based and count the header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjust::PvalueReport;
use crate::curves::{validate_curveset, CurveSet, Direction, Grid, TiePolicy, TwoGroupDataset};
use crate::error::{Error, Result};
use crate::pvalue::PValue;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Splits CSV text into trimmed records, each tagged with its line number.
fn records(text: &str, source: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(source, line, e.to_string())
        })?;
        let line = rec.position().map_or(out.len() + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    if out.is_empty() {
        return Err(parse_error(source, 0, "file is empty"));
    }
    Ok(out)
}

fn parse_number(field: &str, source: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| {
        parse_error(
            source,
            line,
            format!("column {}: cannot parse {field:?} as a number", column + 1),
        )
    })?;
    if !v.is_finite() {
        return Err(parse_error(
            source,
            line,
            format!("column {}: value {field:?} is not finite", column + 1),
        ));
    }
    Ok(v)
}

fn parse_grid(fields: &[String], source: &str, line: usize) -> Result<Grid> {
    let points = fields
        .iter()
        .enumerate()
        .map(|(c, f)| parse_number(f, source, line, c))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(points).map_err(|e| parse_error(source, line, e.to_string()))
}

/// Parses a curve-set CSV: line 1 holds the grid points, each following line
/// one curve, the first of them the observed curve.
pub fn parse_curveset(text: &str, source: &str, tie_policy: TiePolicy) -> Result<CurveSet> {
    let recs = records(text, source)?;
    let (header_line, header) = &recs[0];
    let grid = parse_grid(header, source, *header_line)?;
    let mut rows = Vec::with_capacity(recs.len() - 1);
    for (line, fields) in &recs[1..] {
        if fields.len() != grid.len() {
            return Err(parse_error(
                source,
                *line,
                format!("expected {} values, found {}", grid.len(), fields.len()),
            ));
        }
        let row = fields
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(f, source, *line, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    validate_curveset(&rows, grid, tie_policy).map_err(|e| match e {
        Error::InvalidEnsemble(msg) => parse_error(source, 0, msg),
        other => other,
    })
}

pub fn read_curveset(path: &Path, tie_policy: TiePolicy) -> Result<CurveSet> {
    parse_curveset(&read_text(path)?, &path.display().to_string(), tie_policy)
}

pub fn write_curveset(curves: &CurveSet) -> String {
    let mut out = String::new();
    push_row(&mut out, curves.grid().points());
    for row in curves.rows() {
        push_row(&mut out, row);
    }
    out
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// Layout of a two-group CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    /// Header: label column then grid points; one row per subject, first
    /// field the 0/1 group label.
    #[default]
    Wide,
    /// Header `subject,label,s,value`; one row per observation.
    Long,
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wide" => Ok(DataFormat::Wide),
            "long" => Ok(DataFormat::Long),
            other => Err(format!("unknown data format {other:?}")),
        }
    }
}

fn parse_label(field: &str, source: &str, line: usize) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_error(
            source,
            line,
            format!("group label must be 0 or 1, found {other:?}"),
        )),
    }
}

pub fn parse_two_group(text: &str, source: &str, format: DataFormat) -> Result<TwoGroupDataset> {
    let recs = records(text, source)?;
    match format {
        DataFormat::Wide => parse_wide(&recs, source),
        DataFormat::Long => parse_long(&recs, source),
    }
}

pub fn read_two_group(path: &Path, format: DataFormat) -> Result<TwoGroupDataset> {
    parse_two_group(&read_text(path)?, &path.display().to_string(), format)
}

fn parse_wide(recs: &[(usize, Vec<String>)], source: &str) -> Result<TwoGroupDataset> {
    let (header_line, header) = &recs[0];
    if header.len() < 2 {
        return Err(parse_error(source, *header_line, "header needs a label column and at least one grid point"));
    }
    let grid = parse_grid(&header[1..], source, *header_line)?;
    let mut responses = Vec::new();
    let mut labels = Vec::new();
    for (line, fields) in &recs[1..] {
        if fields.len() != grid.len() + 1 {
            return Err(parse_error(
                source,
                *line,
                format!("expected {} fields, found {}", grid.len() + 1, fields.len()),
            ));
        }
        labels.push(parse_label(&fields[0], source, *line)?);
        let row = fields[1..]
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(f, source, *line, c + 1))
            .collect::<Result<Vec<_>>>()?;
        responses.push(row);
    }
    TwoGroupDataset::new(grid, responses, labels)
}

fn parse_long(recs: &[(usize, Vec<String>)], source: &str) -> Result<TwoGroupDataset> {
    let (header_line, header) = &recs[0];
    let expected = ["subject", "label", "s", "value"];
    if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(parse_error(source, *header_line, "long format header must be subject,label,s,value"));
    }
    // subject -> (first appearance, label, s bits -> value)
    let mut subjects: BTreeMap<&str, (usize, bool, BTreeMap<u64, f64>)> = BTreeMap::new();
    let mut points: Vec<f64> = Vec::new();
    for (line, fields) in &recs[1..] {
        if fields.len() != 4 {
            return Err(parse_error(source, *line, format!("expected 4 fields, found {}", fields.len())));
        }
        let label = parse_label(&fields[1], source, *line)?;
        let s = parse_number(&fields[2], source, *line, 2)?;
        let value = parse_number(&fields[3], source, *line, 3)?;
        let order = subjects.len();
        let entry = subjects
            .entry(fields[0].as_str())
            .or_insert_with(|| (order, label, BTreeMap::new()));
        if entry.1 != label {
            return Err(parse_error(source, *line, format!("subject {:?} has conflicting labels", fields[0])));
        }
        if entry.2.insert(s.to_bits(), value).is_some() {
            return Err(parse_error(source, *line, format!("subject {:?} repeats s = {s}", fields[0])));
        }
        points.push(s);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let grid = Grid::new(points).map_err(|e| parse_error(source, 0, e.to_string()))?;

    let mut ordered: Vec<_> = subjects.into_iter().collect();
    ordered.sort_by_key(|(_, (order, _, _))| *order);
    let mut responses = Vec::with_capacity(ordered.len());
    let mut labels = Vec::with_capacity(ordered.len());
    for (name, (_, label, values)) in ordered {
        let row = grid
            .points()
            .iter()
            .map(|s| {
                values.get(&s.to_bits()).copied().ok_or_else(|| {
                    parse_error(source, 0, format!("subject {name:?} has no value at s = {s}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        responses.push(row);
        labels.push(label);
    }
    TwoGroupDataset::new(grid, responses, labels)
}

/// Pointwise columns of a report, as stored in `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseTable {
    pub grid: Vec<f64>,
    pub raw: Vec<PValue>,
    pub single_step: Vec<PValue>,
    pub step_down: Vec<PValue>,
    pub erl: Vec<PValue>,
}

impl From<&PvalueReport> for PointwiseTable {
    fn from(r: &PvalueReport) -> Self {
        PointwiseTable {
            grid: r.grid.points().to_vec(),
            raw: r.raw.clone(),
            single_step: r.single_step.clone(),
            step_down: r.step_down.clone(),
            erl: r.erl.clone(),
        }
    }
}

const REPORT_HEADER: &str =
    "s,raw,single_step,step_down,erl,raw_exact,single_step_exact,step_down_exact,erl_exact";

pub fn write_report_csv(table: &PointwiseTable) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for s in 0..table.grid.len() {
        let ps = [table.raw[s], table.single_step[s], table.step_down[s], table.erl[s]];
        let _ = write!(out, "{}", table.grid[s]);
        for p in ps {
            let _ = write!(out, ",{}", p.value());
        }
        for p in ps {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

/// Reads `report.csv`; the exact `k/M` columns are authoritative.
pub fn parse_report_csv(text: &str, source: &str) -> Result<PointwiseTable> {
    let recs = records(text, source)?;
    let (header_line, header) = &recs[0];
    if header.join(",") != REPORT_HEADER {
        return Err(parse_error(source, *header_line, format!("expected header {REPORT_HEADER}")));
    }
    let mut table = PointwiseTable {
        grid: Vec::new(),
        raw: Vec::new(),
        single_step: Vec::new(),
        step_down: Vec::new(),
        erl: Vec::new(),
    };
    for (line, fields) in &recs[1..] {
        if fields.len() != 9 {
            return Err(parse_error(source, *line, format!("expected 9 fields, found {}", fields.len())));
        }
        table.grid.push(parse_number(&fields[0], source, *line, 0)?);
        let exact = |c: usize| -> Result<PValue> {
            fields[c]
                .parse::<PValue>()
                .map_err(|e| parse_error(source, *line, format!("column {}: {e}", c + 1)))
        };
        table.raw.push(exact(5)?);
        table.single_step.push(exact(6)?);
        table.step_down.push(exact(7)?);
        table.erl.push(exact(8)?);
    }
    Ok(table)
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_curves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tie_policy: Option<TiePolicy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub data_format: Option<DataFormat>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    /// Seconds since the Unix epoch; left out of report files so they stay
    /// byte-identical across reruns.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            direction: None,
            n_curves: None,
            seed: None,
            tie_policy: None,
            alpha: None,
            data_format: None,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
        }
    }

    pub fn stamped(&self) -> Self {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            timestamp: Some(now),
            ..self.clone()
        }
    }

    pub fn without_timestamp(&self) -> Self {
        RunManifest {
            timestamp: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPValue {
    pub exact: PValue,
    pub value: f64,
}

impl From<PValue> for GlobalPValue {
    fn from(p: PValue) -> Self {
        GlobalPValue {
            exact: p,
            value: p.value(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueColumn {
    pub exact: Vec<PValue>,
    pub value: Vec<f64>,
}

impl From<&[PValue]> for PValueColumn {
    fn from(ps: &[PValue]) -> Self {
        PValueColumn {
            exact: ps.to_vec(),
            value: ps.iter().map(|p| p.value()).collect(),
        }
    }
}

/// On-disk shape of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub n_curves: usize,
    pub direction: Direction,
    pub global_minrank: GlobalPValue,
    pub global_erl: GlobalPValue,
    pub grid: Vec<f64>,
    pub raw: PValueColumn,
    pub single_step: PValueColumn,
    pub step_down: PValueColumn,
    pub erl: PValueColumn,
    pub manifest: RunManifest,
}

impl ReportDocument {
    pub fn new(report: &PvalueReport, manifest: &RunManifest) -> Self {
        ReportDocument {
            n_curves: report.n_curves,
            direction: report.direction,
            global_minrank: report.global_minrank.into(),
            global_erl: report.global_erl.into(),
            grid: report.grid.points().to_vec(),
            raw: report.raw.as_slice().into(),
            single_step: report.single_step.as_slice().into(),
            step_down: report.step_down.as_slice().into(),
            erl: report.erl.as_slice().into(),
            manifest: manifest.without_timestamp(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn into_report(self, source: &str) -> Result<PvalueReport> {
        let bad = |msg: String| parse_error(source, 0, msg);
        let g = self.grid.len();
        for (name, col) in [
            ("raw", &self.raw),
            ("single_step", &self.single_step),
            ("step_down", &self.step_down),
            ("erl", &self.erl),
        ] {
            if col.exact.len() != g {
                return Err(bad(format!("{name} has {} entries, grid has {g}", col.exact.len())));
            }
            if col.exact.iter().any(|p| p.total() != self.n_curves) {
                return Err(bad(format!("{name} p-values do not have denominator {}", self.n_curves)));
            }
        }
        let grid = Grid::new(self.grid).map_err(|e| bad(e.to_string()))?;
        Ok(PvalueReport {
            grid,
            raw: self.raw.exact,
            single_step: self.single_step.exact,
            step_down: self.step_down.exact,
            erl: self.erl.exact,
            global_minrank: self.global_minrank.exact,
            global_erl: self.global_erl.exact,
            n_curves: self.n_curves,
            direction: self.direction,
        })
    }
}

pub fn read_report_json(path: &Path) -> Result<PvalueReport> {
    let source = path.display().to_string();
    let text = read_text(path)?;
    let doc: ReportDocument = serde_json::from_str(&text).map_err(|e| {
        parse_error(&source, e.line(), e.to_string())
    })?;
    doc.into_report(&source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjust::analyze;
    use proptest::prelude::*;

    const FIXTURE_A: &str = "1,2,3\n5,1,4\n3,2,3\n1,3,2\n2,4,1\n";

    #[test]
    fn curveset_csv_parses_and_reemits() {
        let curves = parse_curveset(FIXTURE_A, "a.csv", TiePolicy::Strict).unwrap();
        assert_eq!(curves.n_curves(), 4);
        assert_eq!(curves.observed(), &[5.0, 1.0, 4.0]);
        assert_eq!(write_curveset(&curves), FIXTURE_A);
    }

    #[test]
    fn empty_file_names_the_source() {
        let err = parse_curveset("", "empty.csv", TiePolicy::Strict).unwrap_err();
        assert!(err.to_string().contains("empty.csv"), "{err}");
    }

    #[test]
    fn bad_cell_reports_line_and_column() {
        let err = parse_curveset("1,2\n1,x\n2,3\n", "b.csv", TiePolicy::Strict).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                path: "b.csv".into(),
                line: 2,
                message: "column 2: cannot parse \"x\" as a number".into()
            }
        );
        let err = parse_curveset("1,2\n1,2\n2\n", "b.csv", TiePolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn tie_in_csv_is_a_tie_error() {
        let err = parse_curveset("1,2\n1,2\n1,3\n", "t.csv", TiePolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::PointwiseTie { column: 0, .. }));
    }

    #[test]
    fn wide_and_long_agree() {
        let wide = "label,0,0.5,1\n0,1.0,2.0,3.0\n0,1.5,2.5,2.0\n1,3.0,1.0,0.0\n1,2.0,2.0,2.0\n";
        let long = "subject,label,s,value\n\
            a,0,0,1.0\na,0,0.5,2.0\na,0,1,3.0\n\
            b,0,1,2.0\nb,0,0.5,2.5\nb,0,0,1.5\n\
            c,1,0,3.0\nc,1,0.5,1.0\nc,1,1,0.0\n\
            d,1,0,2.0\nd,1,0.5,2.0\nd,1,1,2.0\n";
        let a = parse_two_group(wide, "w.csv", DataFormat::Wide).unwrap();
        let b = parse_two_group(long, "l.csv", DataFormat::Long).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wide_rejects_single_group_and_bad_labels() {
        let one_group = "label,0,1\n0,1,2\n0,2,1\n0,3,3\n";
        assert!(matches!(
            parse_two_group(one_group, "g.csv", DataFormat::Wide),
            Err(Error::InvalidDataset(_))
        ));
        let bad_label = "label,0,1\n2,1,2\n";
        assert!(matches!(
            parse_two_group(bad_label, "g.csv", DataFormat::Wide),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn long_requires_complete_subjects() {
        let long = "subject,label,s,value\na,0,0,1\na,0,1,2\nb,0,0,1\n";
        assert!(parse_two_group(long, "l.csv", DataFormat::Long).is_err());
    }

    #[test]
    fn report_json_roundtrip() {
        let curves = parse_curveset(FIXTURE_A, "a.csv", TiePolicy::Strict).unwrap();
        let report = analyze(&curves, Direction::HighIsExtreme);
        let doc = ReportDocument::new(&report, &RunManifest::new("adjust").stamped());
        assert_eq!(doc.manifest.timestamp, None);
        let json = doc.to_json();
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_report("r.json").unwrap(), report);
    }

    proptest! {
        #[test]
        fn report_csv_reemits_byte_identical(
            m in 2usize..50,
            counts in proptest::collection::vec((1usize..50, 1usize..50, 1usize..50, 1usize..50), 1..20),
        ) {
            let clamp = |k: usize| PValue::new(k.min(m), m);
            let g = counts.len();
            let table = PointwiseTable {
                grid: (0..g).map(|i| i as f64 * 0.37 - 1.0).collect(),
                raw: counts.iter().map(|c| clamp(c.0)).collect(),
                single_step: counts.iter().map(|c| clamp(c.1)).collect(),
                step_down: counts.iter().map(|c| clamp(c.2)).collect(),
                erl: counts.iter().map(|c| clamp(c.3)).collect(),
            };
            let text = write_report_csv(&table);
            let parsed = parse_report_csv(&text, "r.csv").unwrap();
            prop_assert_eq!(&parsed, &table);
            prop_assert_eq!(write_report_csv(&parsed), text);
        }
    }
}
