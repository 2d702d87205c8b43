//! Plain-text, line-oriented dump formats.
//!
//! Mesh dump: a counts header, then `id x y` node lines, `id n1 n2 n3 tag`
//! triangle lines and `id plus minus x'` pair lines, all in mesh order.
//! Solution dump: `id value` field lines followed by
//! `pair id jump multiplier active` status lines. Floats use the shortest
//! scientific spelling that round-trips, so re-emission is byte-identical.

use crate::CliError;
use sighom_core::mesh::TwoComponentMesh;
use sighom_core::vi::{PairStatus, ViSolution};
use std::fmt::Write as _;

pub fn write_mesh(mesh: &TwoComponentMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.nodes.len(),
        mesh.triangles.len(),
        mesh.pairs.len()
    );
    for (id, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(out, "{id} {:e} {:e}", p[0], p[1]);
    }
    for (id, t) in mesh.triangles.iter().enumerate() {
        let _ = writeln!(
            out,
            "{id} {} {} {} {}",
            t.nodes[0],
            t.nodes[1],
            t.nodes[2],
            t.tag.tag()
        );
    }
    for (id, p) in mesh.pairs.iter().enumerate() {
        let _ = writeln!(out, "{id} {} {} {:e}", p.plus, p.minus, p.x);
    }
    out
}

pub fn write_solution(solution: &ViSolution) -> String {
    let mut out = String::new();
    for (id, v) in solution.values.iter().enumerate() {
        let _ = writeln!(out, "{id} {v:e}");
    }
    for s in &solution.pair_status {
        let _ = writeln!(
            out,
            "pair {} {:e} {:e} {}",
            s.pair,
            s.jump,
            s.multiplier,
            if s.active { 1 } else { 0 }
        );
    }
    out
}

/// Parsed solution dump: nodal values by id plus the dumped pair table.
#[derive(Debug)]
pub struct SolutionDump {
    pub values: Vec<f64>,
    pub pairs: Vec<PairStatus>,
}

pub fn parse_solution(text: &str) -> Result<SolutionDump, CliError> {
    let bad = |line: usize, msg: &str| CliError::Io(format!("solution dump line {line}: {msg}"));
    let mut values: Vec<(usize, f64)> = Vec::new();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let first = tok.next().unwrap();
        if first == "pair" {
            let pair: usize = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(i + 1, "bad pair id"))?;
            let jump: f64 = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(i + 1, "bad jump"))?;
            let multiplier: f64 = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(i + 1, "bad multiplier"))?;
            let active = match tok.next() {
                Some("0") => false,
                Some("1") => true,
                _ => return Err(bad(i + 1, "bad active flag")),
            };
            pairs.push(PairStatus { pair, jump, multiplier, active });
        } else {
            let id: usize = first.parse().map_err(|_| bad(i + 1, "bad node id"))?;
            let v: f64 = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(i + 1, "bad value"))?;
            values.push((id, v));
        }
    }
    let n = values.len();
    let mut field = vec![f64::NAN; n];
    for (id, v) in values {
        if id >= n {
            return Err(CliError::Io(format!(
                "solution dump: node id {id} out of range ({n} field lines)"
            )));
        }
        field[id] = v;
    }
    if field.iter().any(|v| v.is_nan()) {
        return Err(CliError::Io("solution dump: missing node ids".into()));
    }
    Ok(SolutionDump { values: field, pairs })
}
