//! CPLEX LP text export and external-solution import.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{edge_variable_name, FractionalMatching, LinearProgram, LpError, Relation};
use crate::graph::io::format_sig17;
use crate::graph::{ColoredBipartiteGraph, FairnessSpec};

const TERMS_PER_LINE: usize = 6;

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { "-" } else { "+" };
        if k == 0 && a >= 0.0 {
            let _ = write!(out, " {} {}", format_sig17(a), names[j]);
        } else {
            let _ = write!(out, " {sign} {} {}", format_sig17(a.abs()), names[j]);
        }
    }
}

/// Writes `lp` in CPLEX LP format. Rows without coefficients are vacuous and
/// omitted.
pub fn write_lp<W: Write>(lp: &LinearProgram, mut out: W) -> Result<(), LpError> {
    lp.check()?;
    let names = &lp.variable_names;
    let mut text = String::new();
    text.push_str("\\ fairmatch LP\nMAXIMIZE\n obj:");
    let objective: Vec<(usize, f64)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    write_terms(&mut text, &objective, names);
    text.push_str("\nSUBJECT TO\n");
    for row in lp.constraints.iter().filter(|r| !r.coeffs.is_empty()) {
        let _ = write!(text, " {}:", row.name);
        write_terms(&mut text, &row.coeffs, names);
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(text, " {rel} {}", format_sig17(row.rhs));
    }
    text.push_str("BOUNDS\n");
    for name in names {
        let _ = writeln!(text, " {name} >= 0");
    }
    text.push_str("END\n");
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn export_lp(lp: &LinearProgram, path: impl AsRef<Path>) -> Result<(), LpError> {
    let file = std::fs::File::create(path)?;
    write_lp(lp, std::io::BufWriter::new(file))
}

/// Reads an external solver's solution (`name value` per line, `#` comments)
/// and validates it as a fractional matching of `graph`, including the color
/// rows of `spec` when given. Variables not listed are zero.
pub fn import_solution<R: BufRead>(
    reader: R,
    graph: &ColoredBipartiteGraph,
    spec: Option<&FairnessSpec>,
) -> Result<FractionalMatching, LpError> {
    let index: HashMap<String, usize> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (edge_variable_name(e.u, e.v), i))
        .collect();
    let mut x = vec![0.0; graph.num_edges()];
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut toks = text.split_whitespace();
        let (Some(name), Some(value), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(LpError::Solution(format!("line {}: expected `name value`", lineno + 1)));
        };
        let &e = index
            .get(name)
            .ok_or_else(|| LpError::Solution(format!("line {}: unknown variable `{name}`", lineno + 1)))?;
        x[e] = value
            .parse()
            .map_err(|_| LpError::Solution(format!("line {}: bad value `{value}`", lineno + 1)))?;
    }
    let fm = FractionalMatching::new(graph, x);
    fm.check(graph, spec)?;
    let mut fm = fm;
    fm.clamp(graph);
    Ok(fm)
}
