//! Metrics CSV files.
//!
//! A report holds two tables separated by a blank line. The summary table has
//! one row per evaluated cell and one `mean` row per group of repeats:
//!
//! ```text
//! method,fs_hz,buses,repeat,seed,acc,pre_macro,rec_macro,f1_macro,fpr_macro,excluded,split
//! ```
//!
//! The class table has one row per class of every evaluated cell:
//!
//! ```text
//! method,fs_hz,buses,repeat,class,pre,rec,f1,fpr
//! ```
//!
//! Metrics are percentages with two decimals rounded half up; `N/A` marks a
//! value that is 0/0. Confusion matrices are written separately as a 4x4
//! block, rows predicted and columns target.

use std::fmt::Write as _;
use std::path::Path;

use swec_core::metrics::{percent_2dp, ClassMetrics, ConfusionMatrix, MetricsReport};
use swec_core::synthgrid::parse_bus_list;
use swec_core::{BusId, EventClass};

use crate::config::{bus_label, Method};
use crate::error::{LabError, LabResult};

pub const SUMMARY_HEADER: &str =
    "method,fs_hz,buses,repeat,seed,acc,pre_macro,rec_macro,f1_macro,fpr_macro,excluded,split";
pub const CLASS_HEADER: &str = "method,fs_hz,buses,repeat,class,pre,rec,f1,fpr";
pub const CONFUSION_HEADER: &str = "predicted\\target,1,2,3,4";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Repeat {
    Index(usize),
    Mean,
}

impl Repeat {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Repeat::Mean),
            _ => s.parse().ok().map(Repeat::Index),
        }
    }
}

impl std::fmt::Display for Repeat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Repeat::Index(k) => write!(f, "{k}"),
            Repeat::Mean => f.write_str("mean"),
        }
    }
}

/// Coordinates of a table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub method: Method,
    pub fs: f64,
    pub buses: Vec<BusId>,
    pub repeat: Repeat,
}

impl RowKey {
    fn write(&self, out: &mut String) {
        write!(
            out,
            "{},{},{},{}",
            self.method,
            self.fs,
            bus_label(&self.buses),
            self.repeat
        )
        .expect("string write");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: RowKey,
    /// Split and training seed; empty on mean rows.
    pub seed: Option<u64>,
    pub acc: f64,
    pub pre: Option<f64>,
    pub rec: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
    /// Undefined values left out of the macro means.
    pub excluded: usize,
    /// Fingerprint of the train/test index sets; empty on mean rows.
    pub split: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub key: RowKey,
    pub class: EventClass,
    pub pre: Option<f64>,
    pub rec: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    pub summary: Vec<SummaryRow>,
    pub classes: Vec<ClassRow>,
}

fn pct(v: Option<f64>) -> Option<f64> {
    v.map(percent_2dp)
}

impl SummaryRow {
    pub fn from_report(key: RowKey, seed: u64, split: &str, r: &MetricsReport) -> Self {
        SummaryRow {
            key,
            seed: Some(seed),
            acc: percent_2dp(r.accuracy),
            pre: pct(r.macro_avg.precision),
            rec: pct(r.macro_avg.recall),
            f1: pct(r.macro_avg.f1),
            fpr: pct(r.macro_avg.fpr),
            excluded: r.excluded.total(),
            split: split.to_string(),
        }
    }

    /// Mean over repeats of the unrounded metrics, then rounded.
    pub fn mean(key: RowKey, reports: &[&MetricsReport]) -> Self {
        let mean = |f: &dyn Fn(&MetricsReport) -> Option<f64>| {
            let vals: Vec<f64> = reports.iter().filter_map(|r| f(r)).collect();
            (!vals.is_empty()).then(|| percent_2dp(vals.iter().sum::<f64>() / vals.len() as f64))
        };
        SummaryRow {
            key,
            seed: None,
            acc: mean(&|r| Some(r.accuracy)).unwrap_or(0.0),
            pre: mean(&|r| r.macro_avg.precision),
            rec: mean(&|r| r.macro_avg.recall),
            f1: mean(&|r| r.macro_avg.f1),
            fpr: mean(&|r| r.macro_avg.fpr),
            excluded: reports.iter().map(|r| r.excluded.total()).sum(),
            split: String::new(),
        }
    }
}

impl ClassRow {
    pub fn from_metrics(key: RowKey, class: EventClass, m: &ClassMetrics) -> Self {
        ClassRow {
            key,
            class,
            pre: pct(m.precision),
            rec: pct(m.recall),
            f1: pct(m.f1),
            fpr: pct(m.fpr),
        }
    }

    pub fn all(key: &RowKey, r: &MetricsReport) -> Vec<Self> {
        EventClass::ALL
            .iter()
            .zip(&r.per_class)
            .map(|(&c, m)| ClassRow::from_metrics(key.clone(), c, m))
            .collect()
    }
}

fn fmt_value(out: &mut String, v: Option<f64>) {
    match v {
        Some(v) => write!(out, ",{v:.2}").expect("string write"),
        None => out.push_str(",N/A"),
    }
}

impl ReportTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SUMMARY_HEADER);
        out.push('\n');
        for r in &self.summary {
            r.key.write(&mut out);
            out.push(',');
            if let Some(s) = r.seed {
                write!(out, "{s}").expect("string write");
            }
            fmt_value(&mut out, Some(r.acc));
            for v in [r.pre, r.rec, r.f1, r.fpr] {
                fmt_value(&mut out, v);
            }
            writeln!(out, ",{},{}", r.excluded, r.split).expect("string write");
        }
        out.push('\n');
        out.push_str(CLASS_HEADER);
        out.push('\n');
        for r in &self.classes {
            r.key.write(&mut out);
            write!(out, ",{}", r.class.code()).expect("string write");
            for v in [r.pre, r.rec, r.f1, r.fpr] {
                fmt_value(&mut out, v);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> LabResult<Self> {
        let mut table = ReportTable::default();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let expect = |got: Option<(usize, &str)>, header: &str| match got {
            Some((_, l)) if l == header => Ok(()),
            Some((n, l)) => Err(LabError::format(
                path,
                format!("line {n}: `{l}`, expected `{header}`"),
            )),
            None => Err(LabError::format(path, format!("missing `{header}`"))),
        };
        expect(lines.next(), SUMMARY_HEADER)?;
        for (n, line) in lines.by_ref() {
            if line.is_empty() {
                break;
            }
            let f: Vec<&str> = line.split(',').collect();
            let err = |d: &str| LabError::format(path, format!("line {n}: {d}"));
            if f.len() != 12 {
                return Err(err(&format!("{} fields, expected 12", f.len())));
            }
            table.summary.push(SummaryRow {
                key: parse_key(&f[..4]).ok_or_else(|| err("bad method, rate, buses or repeat"))?,
                seed: match f[4] {
                    "" => None,
                    s => Some(s.parse().map_err(|_| err("bad seed"))?),
                },
                acc: parse_value(f[5])
                    .flatten()
                    .ok_or_else(|| err("bad accuracy"))?,
                pre: parse_value(f[6]).ok_or_else(|| err("bad precision"))?,
                rec: parse_value(f[7]).ok_or_else(|| err("bad recall"))?,
                f1: parse_value(f[8]).ok_or_else(|| err("bad F1"))?,
                fpr: parse_value(f[9]).ok_or_else(|| err("bad FPR"))?,
                excluded: f[10].parse().map_err(|_| err("bad exclusion count"))?,
                split: f[11].to_string(),
            });
        }
        expect(lines.next(), CLASS_HEADER)?;
        for (n, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            let err = |d: &str| LabError::format(path, format!("line {n}: {d}"));
            if f.len() != 9 {
                return Err(err(&format!("{} fields, expected 9", f.len())));
            }
            table.classes.push(ClassRow {
                key: parse_key(&f[..4]).ok_or_else(|| err("bad method, rate, buses or repeat"))?,
                class: f[4]
                    .parse()
                    .ok()
                    .and_then(EventClass::from_code)
                    .ok_or_else(|| err("bad class"))?,
                pre: parse_value(f[5]).ok_or_else(|| err("bad precision"))?,
                rec: parse_value(f[6]).ok_or_else(|| err("bad recall"))?,
                f1: parse_value(f[7]).ok_or_else(|| err("bad F1"))?,
                fpr: parse_value(f[8]).ok_or_else(|| err("bad FPR"))?,
            });
        }
        Ok(table)
    }
}

fn parse_key(f: &[&str]) -> Option<RowKey> {
    Some(RowKey {
        method: f[0].parse().ok()?,
        fs: f[1].parse().ok()?,
        buses: parse_bus_list(&f[2].replace('+', ",")).ok()?,
        repeat: Repeat::parse(f[3])?,
    })
}

/// `Some(None)` for `N/A`, `None` when unreadable.
fn parse_value(s: &str) -> Option<Option<f64>> {
    if s == "N/A" {
        return Some(None);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut out = String::from(CONFUSION_HEADER);
    out.push('\n');
    for (p, row) in cm.counts.iter().enumerate() {
        write!(out, "{}", p + 1).expect("string write");
        for v in row {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn parse_confusion_csv(text: &str, path: &Path) -> LabResult<ConfusionMatrix> {
    let mut lines = text.lines();
    if lines.next() != Some(CONFUSION_HEADER) {
        return Err(LabError::format(
            path,
            format!("line 1: expected `{CONFUSION_HEADER}`"),
        ));
    }
    let mut counts = [[0u64; 4]; 4];
    for (p, row) in counts.iter_mut().enumerate() {
        let n = p + 2;
        let line = lines
            .next()
            .ok_or_else(|| LabError::format(path, format!("line {n}: missing row")))?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 || f[0] != (p + 1).to_string() {
            return Err(LabError::format(
                path,
                format!("line {n}: malformed row `{line}`"),
            ));
        }
        for (cell, s) in row.iter_mut().zip(&f[1..]) {
            *cell = s
                .parse()
                .map_err(|_| LabError::format(path, format!("line {n}: `{s}` is not a count")))?;
        }
    }
    if let Some(extra) = lines.next() {
        return Err(LabError::format(
            path,
            format!("line 6: unexpected `{extra}`"),
        ));
    }
    Ok(ConfusionMatrix::from_counts(counts))
}
