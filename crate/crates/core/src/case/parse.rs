use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::CaseError;

/// One row of `mpc.bus`, keeping only the columns the solver uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusRow {
    pub id: i64,
    /// 1 = PQ, 2 = PV, 3 = slack.
    pub kind_code: u8,
    pub pd_mw: f64,
    pub qd_mvar: f64,
    pub gs_mw: f64,
    pub bs_mvar: f64,
    pub vm_pu: f64,
    pub va_deg: f64,
    pub base_kv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRow {
    pub bus: i64,
    pub pg_mw: f64,
    pub qg_mvar: f64,
    pub vg_pu: f64,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub from: i64,
    pub to: i64,
    pub r_pu: f64,
    pub x_pu: f64,
    pub b_pu: f64,
    /// 0 means nominal (no transformer).
    pub tap: f64,
    pub shift_deg: f64,
    pub in_service: bool,
}

/// Numeric content of a MATPOWER v2 case, before any unit conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCase {
    pub base_mva: f64,
    pub bus_rows: Vec<BusRow>,
    pub gen_rows: Vec<GenRow>,
    pub branch_rows: Vec<BranchRow>,
}

const BUS_COLS: usize = 10;
const GEN_COLS: usize = 8;
const BRANCH_COLS: usize = 11;

/// Parses the `baseMVA`, `bus`, `gen` and `branch` blocks of a MATPOWER case.
///
/// Other blocks (`gencost`, `bus_name`, ...) and `%` comments are skipped.
pub fn parse_matpower(text: &str) -> Result<RawCase, CaseError> {
    let lines: Vec<&str> = text.lines().map(strip_comment).collect();

    let base_mva = parse_scalar(&lines, "baseMVA")?;
    if !(base_mva > 0.0) || !base_mva.is_finite() {
        return Err(CaseError::InvalidBaseMva(base_mva));
    }

    let bus_rows = parse_matrix(&lines, "bus")?
        .into_iter()
        .map(|(line, row)| bus_row(line, &row))
        .collect::<Result<Vec<_>, _>>()?;
    let gen_rows = parse_matrix(&lines, "gen")?
        .into_iter()
        .map(|(line, row)| gen_row(line, &row))
        .collect::<Result<Vec<_>, _>>()?;
    let branch_rows = parse_matrix(&lines, "branch")?
        .into_iter()
        .map(|(line, row)| branch_row(line, &row))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RawCase { base_mva, bus_rows, gen_rows, branch_rows })
}

impl RawCase {
    /// Writes the case back out as MATPOWER text. Columns that are not kept
    /// in [`RawCase`] are filled with MATPOWER defaults.
    pub fn to_matpower(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "function mpc = {name}");
        let _ = writeln!(out, "mpc.version = '2';");
        let _ = writeln!(out, "mpc.baseMVA = {};", self.base_mva);
        let _ = writeln!(out, "mpc.bus = [");
        for b in &self.bus_rows {
            let _ = writeln!(
                out,
                "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t{}\t{}\t1\t1.1\t0.9;",
                b.id, b.kind_code, b.pd_mw, b.qd_mvar, b.gs_mw, b.bs_mvar, b.vm_pu, b.va_deg, b.base_kv
            );
        }
        let _ = writeln!(out, "];");
        let _ = writeln!(out, "mpc.gen = [");
        for g in &self.gen_rows {
            let _ = writeln!(
                out,
                "\t{}\t{}\t{}\t0\t0\t{}\t{}\t{}\t0\t0;",
                g.bus,
                g.pg_mw,
                g.qg_mvar,
                g.vg_pu,
                self.base_mva,
                u8::from(g.in_service)
            );
        }
        let _ = writeln!(out, "];");
        let _ = writeln!(out, "mpc.branch = [");
        for br in &self.branch_rows {
            let _ = writeln!(
                out,
                "\t{}\t{}\t{}\t{}\t{}\t0\t0\t0\t{}\t{}\t{}\t-360\t360;",
                br.from,
                br.to,
                br.r_pu,
                br.x_pu,
                br.b_pu,
                br.tap,
                br.shift_deg,
                u8::from(br.in_service)
            );
        }
        let _ = writeln!(out, "];");
        out
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// If `line` assigns to `mpc.<name>`, returns the text after `=`.
fn assignment<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let start = line.find("mpc.")? + 4;
    let rest = &line[start..];
    let ident_len = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    if &rest[..ident_len] != name {
        return None;
    }
    let after = rest[ident_len..].trim_start();
    after.strip_prefix('=')
}

fn parse_scalar(lines: &[&str], name: &str) -> Result<f64, CaseError> {
    for (i, line) in lines.iter().enumerate() {
        if let Some(rhs) = assignment(line, name) {
            let token = rhs.trim().trim_end_matches(';').trim();
            return token.parse::<f64>().map_err(|_| CaseError::NonNumeric {
                line: i + 1,
                token: token.to_string(),
            });
        }
    }
    Err(CaseError::MissingSection(name.to_string()))
}

/// Collects the rows of `mpc.<name> = [ ... ];` tagged with 1-based line numbers.
fn parse_matrix(lines: &[&str], name: &str) -> Result<Vec<(usize, Vec<f64>)>, CaseError> {
    let (start, first) = lines
        .iter()
        .enumerate()
        .find_map(|(i, l)| assignment(l, name).map(|rhs| (i, rhs)))
        .ok_or_else(|| CaseError::MissingSection(name.to_string()))?;

    let first = first.trim_start();
    let Some(body) = first.strip_prefix('[') else {
        return Err(CaseError::MalformedRow {
            line: start + 1,
            reason: format!("expected `[` after `mpc.{name} =`"),
        });
    };

    let mut rows = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    let mut row_line = start + 1;
    let mut text = body;
    let mut line_no = start;
    loop {
        let (segment, closed) = match text.find(']') {
            Some(end) => (&text[..end], true),
            None => (text, false),
        };
        for (k, piece) in segment.split(';').enumerate() {
            if k > 0 && !current.is_empty() {
                rows.push((row_line, std::mem::take(&mut current)));
            }
            for token in piece.split(|c: char| c.is_whitespace() || c == ',') {
                if token.is_empty() || token == "..." {
                    continue;
                }
                if current.is_empty() {
                    row_line = line_no + 1;
                }
                let value = token.parse::<f64>().map_err(|_| CaseError::NonNumeric {
                    line: line_no + 1,
                    token: token.to_string(),
                })?;
                current.push(value);
            }
        }
        // a newline also terminates a row
        if !current.is_empty() && !segment.trim_end().ends_with("...") {
            rows.push((row_line, std::mem::take(&mut current)));
        }
        if closed {
            break;
        }
        line_no += 1;
        match lines.get(line_no) {
            Some(next) => text = next,
            None => {
                return Err(CaseError::MalformedRow {
                    line: line_no,
                    reason: format!("unterminated matrix `mpc.{name}`"),
                })
            }
        }
    }
    Ok(rows)
}

fn check_len(line: usize, row: &[f64], min: usize, what: &str) -> Result<(), CaseError> {
    if row.len() < min {
        return Err(CaseError::MalformedRow {
            line,
            reason: format!("{what} row has {} columns, expected at least {min}", row.len()),
        });
    }
    Ok(())
}

fn as_id(line: usize, value: f64) -> Result<i64, CaseError> {
    if value.fract() != 0.0 || value < 1.0 || !value.is_finite() {
        return Err(CaseError::MalformedRow {
            line,
            reason: format!("bus id {value} is not a positive integer"),
        });
    }
    Ok(value as i64)
}

fn as_status(value: f64) -> bool {
    value > 0.0
}

fn bus_row(line: usize, row: &[f64]) -> Result<BusRow, CaseError> {
    check_len(line, row, BUS_COLS, "bus")?;
    let kind_code = match row[1] {
        1.0 => 1,
        2.0 => 2,
        3.0 => 3,
        c => {
            return Err(CaseError::MalformedRow {
                line,
                reason: format!("bus type code {c} is not 1, 2 or 3"),
            })
        }
    };
    Ok(BusRow {
        id: as_id(line, row[0])?,
        kind_code,
        pd_mw: row[2],
        qd_mvar: row[3],
        gs_mw: row[4],
        bs_mvar: row[5],
        vm_pu: row[7],
        va_deg: row[8],
        base_kv: row[9],
    })
}

fn gen_row(line: usize, row: &[f64]) -> Result<GenRow, CaseError> {
    check_len(line, row, GEN_COLS, "gen")?;
    Ok(GenRow {
        bus: as_id(line, row[0])?,
        pg_mw: row[1],
        qg_mvar: row[2],
        vg_pu: row[5],
        in_service: as_status(row[7]),
    })
}

fn branch_row(line: usize, row: &[f64]) -> Result<BranchRow, CaseError> {
    check_len(line, row, BRANCH_COLS, "branch")?;
    Ok(BranchRow {
        from: as_id(line, row[0])?,
        to: as_id(line, row[1])?,
        r_pu: row[2],
        x_pu: row[3],
        b_pu: row[4],
        tap: row[8],
        shift_deg: row[9],
        in_service: as_status(row[10]),
    })
}
