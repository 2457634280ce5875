//! Census CSV files: a `species,x,y` (or bare `x,y`) header followed by one
//! row per individual. An optional `# window: x_min,x_max,y_min,y_max`
//! comment line fixes the observation window; otherwise the tight bounding
//! box of all rows is used.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use pointbin::{Point, PointPattern, Window};

use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;

/// Species id given to rows of a bare `x,y` file.
pub const SINGLE_PATTERN_ID: &str = "pattern";

#[derive(Debug, Clone, PartialEq)]
pub struct CensusRow {
    pub species: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusTable {
    pub rows: Vec<CensusRow>,
    pub window: Window,
}

impl CensusTable {
    /// One pattern per species, keyed and ordered by species id; all share
    /// the table window.
    pub fn patterns(&self) -> CliResult<BTreeMap<String, PointPattern>> {
        let mut grouped: BTreeMap<String, Vec<Point>> = BTreeMap::new();
        for row in &self.rows {
            grouped.entry(row.species.clone()).or_default().push(Point::new(row.x, row.y));
        }
        grouped
            .into_iter()
            .map(|(id, pts)| Ok((id, PointPattern::new(pts, self.window)?)))
            .collect()
    }

    pub fn abundance(&self, species: &str) -> usize {
        self.rows.iter().filter(|r| r.species == species).count()
    }
}

pub fn read_census_csv(path: &Path, window: Option<Window>) -> CliResult<CensusTable> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_census(file, window)
}

fn parse_window_comment(line: &str, line_no: u64) -> CliResult<Option<Window>> {
    let Some(rest) = line.trim_start_matches('#').trim().strip_prefix("window:") else {
        return Ok(None);
    };
    let parts: Vec<f64> = rest
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Parse { line: line_no, message: format!("window comment: {e}") })?;
    if parts.len() != 4 {
        return Err(CliError::Parse { line: line_no, message: "window comment needs 4 numbers".into() });
    }
    Window::new(parts[0], parts[1], parts[2], parts[3])
        .map(Some)
        .map_err(|e| CliError::Parse { line: line_no, message: e.to_string() })
}

/// Parses census text; an explicit `window` overrides any window comment.
pub fn parse_census<R: Read>(mut reader: R, window: Option<Window>) -> CliResult<CensusTable> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| CliError::Parse { line: 0, message: e.to_string() })?;
    let mut comment_window = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            if let Some(w) = parse_window_comment(line, i as u64 + 1)? {
                comment_window = Some(w);
            }
        }
    }

    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = csv_reader.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(CliError::Parse { line: 1, message: "missing header".into() }),
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let with_species = match header.iter().collect::<Vec<_>>().as_slice() {
        ["species", "x", "y"] => true,
        ["x", "y"] => false,
        other => {
            return Err(CliError::Parse {
                line: header_line,
                message: format!("expected header species,x,y or x,y, got {}", other.join(",")),
            })
        }
    };
    let arity = if with_species { 3 } else { 2 };

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != arity {
            return Err(CliError::Parse {
                line,
                message: format!("expected {arity} fields, found {}", record.len()),
            });
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse { line, message: format!("not a finite number: {s:?}") })
        };
        let (species, x, y) = if with_species {
            let id = &record[0];
            if id.is_empty() {
                return Err(CliError::Parse { line, message: "empty species id".into() });
            }
            (id.to_string(), number(&record[1])?, number(&record[2])?)
        } else {
            (SINGLE_PATTERN_ID.to_string(), number(&record[0])?, number(&record[1])?)
        };
        rows.push(CensusRow { species, x, y });
        lines.push(line);
    }

    let window = match window.or(comment_window) {
        Some(w) => w,
        None => bounding_window(&rows)?,
    };
    for (row, &line) in rows.iter().zip(&lines) {
        if !window.contains(&Point::new(row.x, row.y)) {
            return Err(CliError::OutOfWindow { line, x: row.x, y: row.y });
        }
    }
    Ok(CensusTable { rows, window })
}

fn bounding_window(rows: &[CensusRow]) -> CliResult<Window> {
    if rows.is_empty() {
        return Err(CliError::Parse { line: 0, message: "no rows to infer a window from".into() });
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in rows {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.y);
        y1 = y1.max(r.y);
    }
    Ok(Window::new(x0, x1, y0, y1)?)
}

fn write_window_comment<W: Write>(out: &mut W, w: &Window) -> std::io::Result<()> {
    writeln!(
        out,
        "# window: {},{},{},{}",
        fmt_f64(w.x_min()),
        fmt_f64(w.x_max()),
        fmt_f64(w.y_min()),
        fmt_f64(w.y_max())
    )
}

/// Writes `x,y` rows with a window comment; coordinates round-trip exactly.
pub fn write_pattern_csv<W: Write>(mut out: W, pattern: &PointPattern) -> CliResult<()> {
    write_window_comment(&mut out, pattern.window()).map_err(|e| CliError::io("<output>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y"])?;
    for p in pattern.points() {
        w.write_record([fmt_f64(p.x), fmt_f64(p.y)])?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

/// Writes `species,x,y` rows for several patterns sharing `window`.
pub fn write_census_csv<W: Write>(
    mut out: W,
    window: &Window,
    species: &BTreeMap<String, PointPattern>,
) -> CliResult<()> {
    write_window_comment(&mut out, window).map_err(|e| CliError::io("<output>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["species", "x", "y"])?;
    for (id, pattern) in species {
        for p in pattern.points() {
            w.write_record([id.clone(), fmt_f64(p.x), fmt_f64(p.y)])?;
        }
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}
