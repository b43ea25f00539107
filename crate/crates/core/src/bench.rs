//! Benchmark presets, comparison runs and report formatting.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::baseline::{run_ags, AgsConfig, BYTES_PER_VALUE};
use crate::driver::{run, Method, QagsConfig, RunReport, BYTES_PER_AMPLITUDE};
use crate::error::{QagsError, Result};
use crate::grid::{SearchBox, DEFAULT_MAX_QUBITS};
use crate::objective::Objective;

/// (dimension, qubits per dimension) pairs used by the accuracy tables.
pub const TABLE_PAIRS: [(usize, u32); 4] = [(2, 5), (3, 4), (5, 3), (8, 2)];

/// Dimensions used by the quantum-vs-classical comparison.
pub const COMPARE_DIMS: [usize; 5] = [2, 5, 7, 8, 10];

/// Qubits per dimension for the comparison presets.
pub fn compare_qubits(dim: usize) -> u32 {
    match dim {
        2 => 5,
        3 => 4,
        5 => 3,
        _ => 2,
    }
}

/// Deterministic memory model for one (quantum, classical) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceAccount {
    pub model_bytes_quantum: u64,
    pub model_bytes_classical: u64,
    /// Informational only, never compared.
    pub wall_time_seconds: f64,
    pub f_eval_count: u64,
}

/// Amplitude plus probability storage for an `n * d` qubit register.
pub fn quantum_model_bytes(qubits_per_dim: u32, dim: usize) -> u64 {
    (1u64 << (qubits_per_dim as u64 * dim as u64)) * BYTES_PER_AMPLITUDE
}

/// Function-value storage for an `m^d` grid.
pub fn classical_model_bytes(points_per_dim: u64, dim: usize) -> u64 {
    points_per_dim.pow(dim as u32) * BYTES_PER_VALUE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    T1,
    T2,
    T3,
    T4,
}

impl FromStr for Table {
    type Err = QagsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t1" => Ok(Table::T1),
            "t2" => Ok(Table::T2),
            "t3" => Ok(Table::T3),
            "t4" => Ok(Table::T4),
            _ => Err(QagsError::Config(format!(
                "unknown table `{s}` (expected t1, t2, t3 or t4)"
            ))),
        }
    }
}

impl Table {
    pub fn function(self) -> &'static str {
        match self {
            Table::T1 => "rastrigin",
            Table::T2 => "styblinski_tang",
            Table::T3 | Table::T4 => "rosenbrock",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Table::T1 => (-5.12, 5.12),
            Table::T2 => (-5.0, 5.0),
            Table::T3 => (-500.0, 500.0),
            Table::T4 => (-10.0, 10.0),
        }
    }

    pub fn pairs(self) -> &'static [(usize, u32)] {
        match self {
            Table::T1 | Table::T2 => &TABLE_PAIRS,
            Table::T3 => &TABLE_PAIRS[..2],
            Table::T4 => &TABLE_PAIRS[2..],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub dim: usize,
    pub qubits: u32,
    pub found_point: Vec<f64>,
    pub result: f64,
    pub real_minimum: f64,
    pub abs_error: f64,
}

/// Runs every (dimension, qubits) pair of `table`.
pub fn run_table(table: Table) -> Result<Vec<TableRow>> {
    let (lo, hi) = table.domain();
    table
        .pairs()
        .iter()
        .map(|&(dim, qubits)| {
            let f = Objective::by_name(table.function(), dim, None)?;
            let bounds = SearchBox::cube(dim, lo, hi)?;
            let report = run(&f, &bounds, &QagsConfig::new(qubits))?;
            let real_minimum = f
                .known_minimum_value()
                .expect("benchmarks know their optimum");
            Ok(TableRow {
                dim,
                qubits,
                found_point: report.found_point,
                result: report.found_value,
                real_minimum,
                abs_error: (report.found_value - real_minimum).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: Method,
    pub dim: usize,
    pub time_s: f64,
    pub model_bytes: u64,
    pub solution_value: f64,
    pub report: RunReport,
}

/// Runs QAGS and the adaptive grid baseline on the sphere over `[lo, hi]^d`
/// for every dimension, QAGS first. `qubits` overrides the presets.
pub fn run_compare(
    dims: &[usize],
    lo: f64,
    hi: f64,
    qubits: Option<u32>,
) -> Result<Vec<CompareRow>> {
    if dims.is_empty() {
        return Err(QagsError::Config("no dimensions given".into()));
    }
    for &d in dims {
        if !(2..=10).contains(&d) {
            return Err(QagsError::Config(format!("dimension {d} outside 2..=10")));
        }
        let n = qubits.unwrap_or_else(|| compare_qubits(d));
        if n as usize * d > DEFAULT_MAX_QUBITS as usize {
            return Err(QagsError::Config(format!(
                "{n} qubits x {d} dims exceeds the cap of {DEFAULT_MAX_QUBITS}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(2 * dims.len());
    for &d in dims {
        let f = Objective::sphere(d, None)?;
        let bounds = SearchBox::cube(d, lo, hi)?;
        let n = qubits.unwrap_or_else(|| compare_qubits(d));

        let start = Instant::now();
        let q = run(&f, &bounds, &QagsConfig::new(n))?;
        let q_time = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let c = run_ags(&f, &bounds, &AgsConfig::default())?;
        let c_time = start.elapsed().as_secs_f64();

        for (report, time_s) in [(q, q_time), (c, c_time)] {
            rows.push(CompareRow {
                method: report.method,
                dim: d,
                time_s,
                model_bytes: report.peak_model_bytes,
                solution_value: report.found_value,
                report,
            });
        }
    }
    Ok(rows)
}

/// Resource account for one dimension of a comparison run.
pub fn account(rows: &[CompareRow], dim: usize) -> Option<ResourceAccount> {
    let q = rows
        .iter()
        .find(|r| r.dim == dim && r.method == Method::Qags)?;
    let c = rows
        .iter()
        .find(|r| r.dim == dim && r.method == Method::Ags)?;
    Some(ResourceAccount {
        model_bytes_quantum: q.model_bytes,
        model_bytes_classical: c.model_bytes,
        wall_time_seconds: q.time_s + c.time_s,
        f_eval_count: q.report.total_f_evals + c.report.total_f_evals,
    })
}

/// Formats like C's `%.6g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

pub fn format_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|&v| sig6(v)).collect();
    format!("[{}]", parts.join(", "))
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out
}

pub const TABLE_HEADER: [&str; 6] = [
    "Dim",
    "Config",
    "FoundPoint",
    "Result",
    "RealMinimum",
    "AbsError",
];

fn table_cells(rows: &[TableRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.dim.to_string(),
                format!("{} qubits", r.qubits),
                format_point(&r.found_point),
                sig6(r.result),
                sig6(r.real_minimum),
                sig6(r.abs_error),
            ]
        })
        .collect()
}

pub fn table_csv(rows: &[TableRow]) -> String {
    csv_string(&TABLE_HEADER, &table_cells(rows))
}

pub fn table_markdown(rows: &[TableRow]) -> String {
    markdown(&TABLE_HEADER, &table_cells(rows))
}

pub const COMPARE_HEADER: [&str; 5] = ["method", "dim", "time_s", "model_bytes", "solution_value"];

fn compare_cells(rows: &[CompareRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.method.as_str().to_string(),
                r.dim.to_string(),
                sig6(r.time_s),
                r.model_bytes.to_string(),
                sig6(r.solution_value),
            ]
        })
        .collect()
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    csv_string(&COMPARE_HEADER, &compare_cells(rows))
}

pub fn compare_markdown(rows: &[CompareRow]) -> String {
    markdown(&COMPARE_HEADER, &compare_cells(rows))
}

pub const REPORT_HEADER: [&str; 9] = [
    "method",
    "function",
    "dim",
    "found_point",
    "found_value",
    "abs_error",
    "iterations",
    "total_f_evals",
    "peak_model_bytes",
];

fn report_cells(r: &RunReport) -> Vec<String> {
    vec![
        r.method.as_str().to_string(),
        r.function.clone(),
        r.dim.to_string(),
        format_point(&r.found_point),
        sig6(r.found_value),
        r.abs_error.map(sig6).unwrap_or_default(),
        r.iterations.len().to_string(),
        r.total_f_evals.to_string(),
        r.peak_model_bytes.to_string(),
    ]
}

pub fn report_csv(r: &RunReport) -> String {
    csv_string(&REPORT_HEADER, &[report_cells(r)])
}

pub fn report_markdown(r: &RunReport) -> String {
    markdown(&REPORT_HEADER, &[report_cells(r)])
}
