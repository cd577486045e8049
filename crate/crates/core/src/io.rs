//! Instance parsing (QAPLIB, Knowles-Corne mQAP), front point files and CSV run reports.
//!
//! Permutations in QAPLIB solution files are 1-based; everything else,
//! including front files, uses the internal 0-based indices.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pareto::ParetoArchive;
use crate::qap::{Cost, Matrix, MqapInstance, ObjectiveVector, Permutation, QapInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Qaplib,
    Mqap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Single(QapInstance),
    Multi(MqapInstance),
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Single(_) => InstanceKind::Qaplib,
            Instance::Multi(_) => InstanceKind::Mqap,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Single(i) => i.n(),
            Instance::Multi(i) => i.n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub path: PathBuf,
    pub kind: InstanceKind,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    offset: usize,
    text: &'a str,
}

/// Whitespace-separated tokens with their byte offsets. Commas count as whitespace.
fn tokens(text: &str) -> impl Iterator<Item = Token<'_>> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    std::iter::from_fn(move || {
        let is_sep = |b: u8| b.is_ascii_whitespace() || b == b',';
        while pos < bytes.len() && is_sep(bytes[pos]) {
            pos += 1;
        }
        if pos >= bytes.len() {
            return None;
        }
        let start = pos;
        while pos < bytes.len() && !is_sep(bytes[pos]) {
            pos += 1;
        }
        Some(Token {
            offset: start,
            text: &text[start..pos],
        })
    })
}

fn int(tok: Token<'_>) -> Result<Cost> {
    tok.text.parse::<Cost>().map_err(|_| {
        Error::parse(
            tok.offset,
            format!("expected an integer, found '{}'", tok.text),
        )
    })
}

fn size(tok: Token<'_>, what: &str) -> Result<usize> {
    let v = int(tok)?;
    usize::try_from(v)
        .map_err(|_| Error::parse(tok.offset, format!("{what} must be non-negative, got {v}")))
}

fn read_matrix<'a>(
    toks: &mut impl Iterator<Item = Token<'a>>,
    n: usize,
    end: usize,
    what: &str,
) -> Result<Matrix> {
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let t = toks.next().ok_or_else(|| {
            Error::parse(
                end,
                format!("unexpected end of input inside the {what} matrix"),
            )
        })?;
        let v = int(t)?;
        if v < 0 {
            return Err(Error::parse(
                t.offset,
                format!("negative entry {v} in the {what} matrix"),
            ));
        }
        data.push(v);
    }
    Matrix::from_row_major(n, data)
}

fn expect_end<'a>(mut toks: impl Iterator<Item = Token<'a>>, expected: usize) -> Result<()> {
    if let Some(t) = toks.next() {
        let extra = 1 + toks.count();
        return Err(Error::parse(
            t.offset,
            format!("{extra} unexpected trailing token(s); expected exactly {expected} tokens"),
        ));
    }
    Ok(())
}

/// QAPLIB format: `n`, then matrix A (flow), then matrix B (distance).
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let mut toks = tokens(text);
    let first = toks.next().ok_or_else(|| Error::parse(0, "empty input"))?;
    let n = size(first, "n")?;
    if n < 2 {
        return Err(Error::parse(first.offset, format!("n = {n} < 2")));
    }
    let flow = read_matrix(&mut toks, n, text.len(), "flow")?;
    let distance = read_matrix(&mut toks, n, text.len(), "distance")?;
    expect_end(toks, 1 + 2 * n * n)?;
    QapInstance::new(flow, distance)
}

/// QAPLIB solution file: `n cost` followed by the 1-based permutation.
pub fn parse_qaplib_solution(text: &str) -> Result<(Cost, Permutation)> {
    let mut toks = tokens(text);
    let first = toks.next().ok_or_else(|| Error::parse(0, "empty input"))?;
    let n = size(first, "n")?;
    let cost_tok = toks
        .next()
        .ok_or_else(|| Error::parse(text.len(), "missing solution cost"))?;
    let cost = int(cost_tok)?;
    let mut mapping = Vec::with_capacity(n);
    for _ in 0..n {
        let t = toks
            .next()
            .ok_or_else(|| Error::parse(text.len(), "solution permutation is truncated"))?;
        let v = size(t, "permutation entry")?;
        if v == 0 {
            return Err(Error::parse(t.offset, "solution permutations are 1-based"));
        }
        mapping.push(v - 1);
    }
    expect_end(toks, n + 2)?;
    let perm = Permutation::new(mapping).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok((cost, perm))
}

/// Splits off leading header lines: any line whose first token is not an
/// integer, before the numeric body starts. Returns the body and its offset.
fn strip_header(text: &str) -> (&str, usize) {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        match line.split_whitespace().next() {
            None => {}
            Some(tok) if tok.parse::<Cost>().is_ok() => break,
            Some(_) => {}
        }
        offset += line.len();
    }
    (&text[offset..], offset)
}

fn shift(err: Error, by: usize) -> Error {
    match err {
        Error::Parse { offset, message } => Error::Parse {
            offset: offset + by,
            message,
        },
        other => other,
    }
}

/// Header values of the form `key=value` or `key: value`, lower-cased keys.
fn header_values(header: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for line in header.lines() {
        let body = line.trim_start_matches(['#', '%', ';', ' ', '\t']);
        for part in body.split([',', ';']) {
            if let Some((k, v)) = part.split_once(['=', ':']) {
                out.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
            }
        }
    }
    out
}

/// Knowles-Corne mQAP format: optional header lines, then `n m`, the
/// distance matrix and `m` flow matrices.
pub fn parse_mqap(text: &str) -> Result<MqapInstance> {
    let (body, body_offset) = strip_header(text);
    let header = &text[..body_offset];
    parse_mqap_body(body, text.len() - body_offset)
        .map_err(|e| shift(e, body_offset))
        .and_then(|inst| {
            for (key, value) in header_values(header) {
                let Ok(v) = value
                    .split_whitespace()
                    .next()
                    .unwrap_or("")
                    .parse::<usize>()
                else {
                    continue;
                };
                let expected = match key.as_str() {
                    "n" | "facilities" | "locations" => inst.n(),
                    "m" | "k" | "flows" | "objectives" => inst.m(),
                    _ => continue,
                };
                if v != expected {
                    return Err(Error::parse(
                        0,
                        format!("header says {key} = {v} but the body has {expected}"),
                    ));
                }
            }
            Ok(inst)
        })
}

fn parse_mqap_body(body: &str, end: usize) -> Result<MqapInstance> {
    let mut toks = tokens(body);
    let first = toks
        .next()
        .ok_or_else(|| Error::parse(0, "no numeric body"))?;
    let n = size(first, "n")?;
    if n < 2 {
        return Err(Error::parse(first.offset, format!("n = {n} < 2")));
    }
    let m_tok = toks
        .next()
        .ok_or_else(|| Error::parse(end, "missing objective count m"))?;
    let m = size(m_tok, "m")?;
    if m < 1 {
        return Err(Error::parse(m_tok.offset, "m must be at least 1"));
    }
    let distance = read_matrix(&mut toks, n, end, "distance")?;
    let mut flows = Vec::with_capacity(m);
    for p in 0..m {
        flows.push(read_matrix(&mut toks, n, end, &format!("flow {}", p + 1))?);
    }
    expect_end(toks, 2 + (m + 1) * n * n)?;
    MqapInstance::new(flows, distance)
}

/// Decides the format from content alone: header lines or a token count of
/// `2 + (m+1) n^2` mean mQAP, `1 + 2 n^2` means QAPLIB.
pub fn detect_kind(text: &str) -> Result<InstanceKind> {
    let (body, offset) = strip_header(text);
    if offset > 0 && !body.trim().is_empty() {
        return Ok(InstanceKind::Mqap);
    }
    let mut toks = tokens(text);
    let first = toks.next().ok_or_else(|| Error::parse(0, "empty input"))?;
    let n = size(first, "n")?;
    let second = toks.next();
    let count = 2 + toks.count();
    if count == 1 + 2 * n * n {
        return Ok(InstanceKind::Qaplib);
    }
    if let Some(m_tok) = second {
        if let Ok(m) = size(m_tok, "m") {
            if m >= 1 && count == 2 + (m + 1) * n * n {
                return Ok(InstanceKind::Mqap);
            }
        }
    }
    Err(Error::parse(
        0,
        format!("{count} tokens match neither the QAPLIB nor the mQAP layout for n = {n}"),
    ))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    match detect_kind(text)? {
        InstanceKind::Qaplib => parse_qaplib(text).map(Instance::Single),
        InstanceKind::Mqap => parse_mqap(text).map(Instance::Multi),
    }
}

pub fn load_instance(path: &Path) -> Result<(InstanceFile, Instance)> {
    let text = std::fs::read_to_string(path)?;
    let inst = parse_instance(&text)?;
    Ok((
        InstanceFile {
            path: path.to_path_buf(),
            kind: inst.kind(),
        },
        inst,
    ))
}

fn push_matrix(out: &mut String, m: &Matrix) {
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// QAPLIB text for `instance`; parses back to an equal instance.
pub fn qaplib_to_string(instance: &QapInstance) -> String {
    let mut out = format!("{}\n\n", instance.n());
    push_matrix(&mut out, instance.flow());
    out.push('\n');
    push_matrix(&mut out, instance.distance());
    out
}

/// mQAP text: `n m`, the distance matrix, then each flow matrix.
pub fn mqap_to_string(instance: &MqapInstance) -> String {
    let mut out = format!("{} {}\n\n", instance.n(), instance.m());
    push_matrix(&mut out, instance.distance());
    for f in instance.flows() {
        out.push('\n');
        push_matrix(&mut out, f);
    }
    out
}

/// One line per member: objective values then the permutation, sorted
/// lexicographically by objective vector. LF line endings.
pub fn write_front(archive: &ParetoArchive, sink: &mut impl Write) -> Result<()> {
    if archive.is_empty() {
        return Err(Error::invalid("cannot write an empty front"));
    }
    let mut members: Vec<_> = archive.members().iter().collect();
    members.sort_by(|a, b| {
        a.objectives
            .cmp(&b.objectives)
            .then_with(|| a.perm.cmp(&b.perm))
    });
    for m in members {
        let mut line = String::new();
        for v in m.objectives.as_slice() {
            line.push_str(&v.to_string());
            line.push(' ');
        }
        line.push_str(&m.perm.to_string());
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn front_to_string(archive: &ParetoArchive) -> Result<String> {
    let mut buf = Vec::new();
    write_front(archive, &mut buf)?;
    Ok(String::from_utf8(buf).expect("front files are ASCII"))
}

/// A front-file line: objectives plus an optional permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPoint {
    pub objectives: ObjectiveVector,
    pub perm: Option<Permutation>,
}

/// Reads a front file with `m` objectives per line. Lines may omit the
/// permutation; blank lines and `#` comments are ignored.
pub fn read_front(text: &str, m: usize) -> Result<Vec<FrontPoint>> {
    if m == 0 {
        return Err(Error::invalid("objective count must be positive"));
    }
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.split('#').next().unwrap_or("");
        let toks: Vec<Token<'_>> = tokens(content)
            .map(|t| Token {
                offset: t.offset + offset,
                text: t.text,
            })
            .collect();
        offset += line.len();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < m {
            return Err(Error::parse(
                toks[0].offset,
                format!(
                    "front line has {} values, expected at least {m}",
                    toks.len()
                ),
            ));
        }
        let objectives = toks[..m]
            .iter()
            .map(|&t| int(t))
            .collect::<Result<Vec<_>>>()?;
        let perm = if toks.len() > m {
            let mapping = toks[m..]
                .iter()
                .map(|&t| size(t, "permutation entry"))
                .collect::<Result<Vec<_>>>()?;
            Some(
                Permutation::new(mapping)
                    .map_err(|e| Error::parse(toks[m].offset, e.to_string()))?,
            )
        } else {
            None
        };
        out.push(FrontPoint {
            objectives: ObjectiveVector(objectives),
            perm,
        });
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "instance,run,seed,best_cost,evals,wall_ms";

/// One row of the CSV run report. `best_cost` is empty for multiobjective runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub instance: String,
    pub run: usize,
    pub seed: u64,
    pub best_cost: Option<Cost>,
    pub evals: u64,
    pub wall_ms: u128,
}

pub fn write_report(rows: &[ReportRow], sink: &mut impl Write) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let name = if r.instance.contains([',', '"', '\n']) {
            format!("\"{}\"", r.instance.replace('"', "\"\""))
        } else {
            r.instance.clone()
        };
        let cost = r.best_cost.map(|c| c.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name, r.run, r.seed, cost, r.evals, r.wall_ms
        ));
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}
