//! Fixed-format MPS text codec.
//!
//! Fields start at columns 2, 5, 15, 25, 40 and 50. Names longer than eight
//! characters push later fields to the right, separated by at least one
//! space, which free-format readers also accept. The reader splits on
//! whitespace, so it accepts both layouts as long as names contain no spaces.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use thiserror::Error;

use super::{LinearProgram, RowSense};

pub const OBJECTIVE_ROW: &str = "COST";
pub const MAX_NAME_LEN: usize = 255;
const RHS_SET: &str = "RHS";
const BOUND_SET: &str = "BND";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error("no columns")]
    NoColumns,
    #[error("expected {expected} names, got {got}")]
    NameCount { expected: usize, got: usize },
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("invalid name {0:?}: must be 1..=255 printable characters without spaces")]
    InvalidName(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("format error")]
    Fmt,
}

impl From<fmt::Error> for MpsError {
    fn from(_: fmt::Error) -> Self {
        MpsError::Fmt
    }
}

/// A parsed MPS model: the program plus its column and row names.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub lp: LinearProgram,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
}

fn check_names(names: &[String], expected: usize) -> Result<(), MpsError> {
    if names.len() != expected {
        return Err(MpsError::NameCount {
            expected,
            got: names.len(),
        });
    }
    let mut seen = BTreeMap::new();
    for n in names {
        if n.is_empty()
            || n.len() > MAX_NAME_LEN
            || n.chars().any(|c| c.is_whitespace() || c.is_control())
        {
            return Err(MpsError::InvalidName(n.clone()));
        }
        if seen.insert(n.as_str(), ()).is_some() || n == OBJECTIVE_ROW {
            return Err(MpsError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// Shortest text that parses back to exactly `v`, kept within the 12
/// characters of a fixed-format field when possible.
fn number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        plain
    } else {
        format!("{v:e}")
    }
}

fn pad_to(out: &mut String, col: usize) {
    let len = out.len();
    if len + 1 < col {
        out.extend(core::iter::repeat_n(' ', col - 1 - len));
    } else {
        out.push(' ');
    }
}

fn data_line(w: &mut impl Write, fields: &[&str]) -> fmt::Result {
    // Name fields at columns 5, 15 and 40; numbers at 25 and 50.
    const COLS: [usize; 5] = [5, 15, 25, 40, 50];
    let mut line = String::from("    ");
    for (k, f) in fields.iter().enumerate() {
        if k > 0 {
            pad_to(&mut line, COLS[k]);
        }
        line.push_str(f);
    }
    writeln!(w, "{}", line.trim_end())
}

fn bound_line(w: &mut impl Write, kind: &str, col: &str, value: Option<f64>) -> fmt::Result {
    let mut line = format!(" {kind} {BOUND_SET}");
    pad_to(&mut line, 15);
    line.push_str(col);
    if let Some(v) = value {
        pad_to(&mut line, 25);
        line.push_str(&number(v));
    }
    writeln!(w, "{line}")
}

/// Default row names `R0000000`, `R0000001`, ...
pub fn default_row_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("R{i:07}")).collect()
}

/// Writes `lp` in fixed-format MPS. The objective constant is stored as the
/// negated right-hand side of the objective row. An LP without columns still
/// gets a header and `ENDATA` but reports [`MpsError::NoColumns`].
pub fn write_mps(
    w: &mut impl Write,
    name: &str,
    lp: &LinearProgram,
    var_names: &[String],
    row_names: &[String],
) -> Result<(), MpsError> {
    check_names(var_names, lp.num_vars())?;
    check_names(row_names, lp.num_rows())?;

    writeln!(w, "NAME          {name}")?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N  {OBJECTIVE_ROW}")?;
    for (i, rn) in row_names.iter().enumerate() {
        let s = match lp.senses[i] {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        writeln!(w, " {s}  {rn}")?;
    }
    if lp.num_vars() == 0 {
        writeln!(w, "ENDATA")?;
        return Err(MpsError::NoColumns);
    }

    writeln!(w, "COLUMNS")?;
    let (col_ptr, row_idx, vals) = lp.to_csc();
    for (j, vn) in var_names.iter().enumerate() {
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if lp.costs[j] != 0.0 {
            entries.push((OBJECTIVE_ROW, lp.costs[j]));
        }
        for p in col_ptr[j]..col_ptr[j + 1] {
            entries.push((row_names[row_idx[p]].as_str(), vals[p]));
        }
        if entries.is_empty() {
            // Keep the column declared even when it appears nowhere.
            entries.push((OBJECTIVE_ROW, 0.0));
        }
        for pair in entries.chunks(2) {
            let a = number(pair[0].1);
            if let Some(&(r2, v2)) = pair.get(1) {
                let b = number(v2);
                data_line(w, &[vn, pair[0].0, &a, r2, &b])?;
            } else {
                data_line(w, &[vn, pair[0].0, &a])?;
            }
        }
    }

    writeln!(w, "RHS")?;
    let mut rhs: Vec<(&str, f64)> = Vec::new();
    if lp.objective_offset != 0.0 {
        rhs.push((OBJECTIVE_ROW, -lp.objective_offset));
    }
    for (i, rn) in row_names.iter().enumerate() {
        if lp.rhs[i] != 0.0 {
            rhs.push((rn.as_str(), lp.rhs[i]));
        }
    }
    for pair in rhs.chunks(2) {
        let a = number(pair[0].1);
        if let Some(&(r2, v2)) = pair.get(1) {
            let b = number(v2);
            data_line(w, &[RHS_SET, pair[0].0, &a, r2, &b])?;
        } else {
            data_line(w, &[RHS_SET, pair[0].0, &a])?;
        }
    }

    writeln!(w, "BOUNDS")?;
    for (j, vn) in var_names.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => bound_line(w, "FX", vn, Some(lo))?,
            (false, false) => bound_line(w, "FR", vn, None)?,
            (false, true) => {
                bound_line(w, "MI", vn, None)?;
                bound_line(w, "UP", vn, Some(hi))?;
            }
            (true, hi_finite) => {
                // A negative upper bound alone would imply MI in some readers,
                // so the lower bound is always explicit when nonzero or when
                // the upper bound is negative.
                if lo != 0.0 || (hi_finite && hi < 0.0) {
                    bound_line(w, "LO", vn, Some(lo))?;
                }
                if hi_finite {
                    bound_line(w, "UP", vn, Some(hi))?;
                }
            }
        }
    }
    writeln!(w, "ENDATA")?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

fn parse_err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num(line: usize, s: &str) -> Result<f64, MpsError> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number {s:?}")))?;
    if !v.is_finite() && !s.to_ascii_lowercase().contains("inf") {
        return Err(parse_err(line, format!("invalid number {s:?}")));
    }
    Ok(v)
}

/// Parses fixed- or free-format MPS without `RANGES` or integer markers.
/// A missing `RHS` section leaves every right-hand side at zero.
pub fn parse_mps(text: &str) -> Result<MpsModel, MpsError> {
    let mut section = Section::Start;
    let mut name = String::new();
    let mut objective: Option<String> = None;
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut senses: Vec<RowSense> = Vec::new();
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut var_names: Vec<String> = Vec::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut lower: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match tokens[0] {
                "NAME" => {
                    name = tokens.get(1..).map(|t| t.join(" ")).unwrap_or_default();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => {
                    entries = Vec::new();
                    rhs = vec![0.0; row_names.len()];
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" => return Err(parse_err(ln, "OBJSENSE is not supported")),
                "RANGES" => return Err(parse_err(ln, "RANGES section is not supported")),
                other => return Err(parse_err(ln, format!("unknown section {other:?}"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::Start | Section::End => {
                return Err(parse_err(ln, "data line outside a section"));
            }
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(parse_err(ln, "expected row sense and name"));
                }
                let rn = tokens[1].to_string();
                let sense = match tokens[0] {
                    "N" | "n" => {
                        if objective.is_none() {
                            objective = Some(rn);
                        }
                        continue;
                    }
                    "L" | "l" => RowSense::Le,
                    "G" | "g" => RowSense::Ge,
                    "E" | "e" => RowSense::Eq,
                    other => return Err(parse_err(ln, format!("malformed row sense {other:?}"))),
                };
                if row_index.insert(rn.clone(), row_names.len()).is_some()
                    || objective.as_deref() == Some(rn.as_str())
                {
                    return Err(parse_err(ln, format!("duplicate row {rn:?}")));
                }
                row_names.push(rn);
                senses.push(sense);
            }
            Section::Columns => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(parse_err(ln, "expected column, row, value [, row, value]"));
                }
                let cn = tokens[0];
                let j = match col_index.get(cn) {
                    Some(&j) if j + 1 == var_names.len() => j,
                    Some(_) => {
                        return Err(parse_err(ln, format!("column {cn:?} is not contiguous")))
                    }
                    None => {
                        col_index.insert(cn.to_string(), var_names.len());
                        var_names.push(cn.to_string());
                        costs.push(0.0);
                        entries.push(Vec::new());
                        lower.push(0.0);
                        upper.push(f64::INFINITY);
                        var_names.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let v = parse_num(ln, pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        costs[j] += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        entries[j].push((i, v));
                    } else {
                        return Err(parse_err(ln, format!("unknown row {:?}", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                // The set name is optional in free format.
                let fields = if tokens.len() % 2 == 1 {
                    &tokens[1..]
                } else {
                    &tokens[..]
                };
                if fields.is_empty() || fields.len() > 4 {
                    return Err(parse_err(ln, "expected [set], row, value [, row, value]"));
                }
                for pair in fields.chunks(2) {
                    let v = parse_num(ln, pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        offset = -v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        rhs[i] = v;
                    } else {
                        return Err(parse_err(ln, format!("unknown row {:?}", pair[0])));
                    }
                }
            }
            Section::Bounds => {
                if tokens.len() < 2 {
                    return Err(parse_err(ln, "expected bound type and column"));
                }
                let kind = tokens[0].to_ascii_uppercase();
                let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL");
                // The bound-set name is optional; disambiguate by field count.
                let rest = &tokens[1..];
                let (col, value) = match (needs_value, rest.len()) {
                    (true, 3) => (rest[1], Some(rest[2])),
                    (true, 2) => (rest[0], Some(rest[1])),
                    (false, 2) => (rest[1], None),
                    (false, 1) => (rest[0], None),
                    _ => return Err(parse_err(ln, "malformed bound line")),
                };
                let Some(&j) = col_index.get(col) else {
                    return Err(parse_err(ln, format!("unknown column {col:?}")));
                };
                let v = value.map(|s| parse_num(ln, s)).transpose()?;
                match (kind.as_str(), v) {
                    ("UP", Some(v)) => {
                        upper[j] = v;
                        if v < 0.0 && lower[j] == 0.0 {
                            lower[j] = f64::NEG_INFINITY;
                        }
                    }
                    ("LO", Some(v)) => lower[j] = v,
                    ("FX", Some(v)) => {
                        lower[j] = v;
                        upper[j] = v;
                    }
                    ("FR", None) => {
                        lower[j] = f64::NEG_INFINITY;
                        upper[j] = f64::INFINITY;
                    }
                    ("MI", None) => lower[j] = f64::NEG_INFINITY,
                    ("PL", None) => upper[j] = f64::INFINITY,
                    _ => return Err(parse_err(ln, format!("unsupported bound type {kind:?}"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), "missing ENDATA"));
    }
    if rhs.len() != row_names.len() {
        rhs = vec![0.0; row_names.len()];
    }

    let mut lp = LinearProgram::new();
    for j in 0..var_names.len() {
        lp.add_var(costs[j], lower[j], upper[j]);
    }
    lp.objective_offset = offset;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); row_names.len()];
    for (j, col) in entries.iter().enumerate() {
        for &(i, v) in col {
            rows[i].push((j, v));
        }
    }
    for (i, terms) in rows.iter().enumerate() {
        lp.add_row(terms, senses[i], rhs[i]);
    }
    Ok(MpsModel {
        name,
        lp,
        var_names,
        row_names,
    })
}
