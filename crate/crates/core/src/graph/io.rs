//! Graph and matching file formats.
//!
//! Text graph format:
//!
//! ```text
//! fairmatch-graph v1
//! nU nV m ell
//! u v weight color      # m lines, color is 1-based
//! ```
//!
//! The JSON mirror carries the same fields (`nU`, `nV`, `m`, `ell`, `edges`).
//! Matching files hold one `u v` pair per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ColoredBipartiteGraph, Edge, GraphError, Matching};

pub const GRAPH_HEADER: &str = "fairmatch-graph v1";

/// Formats `value` in positional notation with 17 significant digits.
pub fn format_sig17(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let exponent = value.abs().log10().floor() as i32;
    let decimals = (16 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    u: usize,
    v: usize,
    weight: f64,
    color: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    #[serde(rename = "nU")]
    n_left: usize,
    #[serde(rename = "nV")]
    n_right: usize,
    m: usize,
    ell: usize,
    edges: Vec<JsonEdge>,
}

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn color_from_one_based(color: usize, line: usize) -> Result<usize, GraphError> {
    color
        .checked_sub(1)
        .ok_or_else(|| parse_err(line, "colors are 1-based"))
}

/// Reads a graph in either the text format or its JSON mirror.
pub fn read_graph<R: BufRead>(mut reader: R) -> Result<ColoredBipartiteGraph, GraphError> {
    let mut content = String::new();
    reader.read_to_string(&mut content)?;
    if content.trim_start().starts_with('{') {
        let parsed: JsonGraph = serde_json::from_str(&content)?;
        if parsed.m != parsed.edges.len() {
            return Err(parse_err(0, format!("m = {} but {} edges listed", parsed.m, parsed.edges.len())));
        }
        let edges = parsed
            .edges
            .iter()
            .map(|e| Ok(Edge::new(e.u, e.v, e.weight, color_from_one_based(e.color, 0)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        return ColoredBipartiteGraph::new(parsed.n_left, parsed.n_right, parsed.ell, edges);
    }

    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == GRAPH_HEADER => {}
        Some((n, l)) => return Err(parse_err(n, format!("expected `{GRAPH_HEADER}`, found `{l}`"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let (line, dims) = lines.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let mut toks = dims.split_whitespace();
    let n_left: usize = field(toks.next(), line, "nU")?;
    let n_right: usize = field(toks.next(), line, "nV")?;
    let m: usize = field(toks.next(), line, "m")?;
    let ell: usize = field(toks.next(), line, "ell")?;
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        let mut toks = text.split_whitespace();
        let u = field(toks.next(), line, "u")?;
        let v = field(toks.next(), line, "v")?;
        let weight = field(toks.next(), line, "weight")?;
        let color = color_from_one_based(field(toks.next(), line, "color")?, line)?;
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        edges.push(Edge::new(u, v, weight, color));
    }
    if edges.len() != m {
        return Err(parse_err(line, format!("header declares {m} edges, found {}", edges.len())));
    }
    ColoredBipartiteGraph::new(n_left, n_right, ell, edges)
}

pub fn write_graph<W: Write>(graph: &ColoredBipartiteGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{GRAPH_HEADER}")?;
    writeln!(
        out,
        "{} {} {} {}",
        graph.n_left(),
        graph.n_right(),
        graph.num_edges(),
        graph.num_colors()
    )?;
    for e in graph.edges() {
        writeln!(out, "{} {} {} {}", e.u, e.v, format_sig17(e.weight), e.color + 1)?;
    }
    out.flush()
}

pub fn write_graph_json<W: Write>(graph: &ColoredBipartiteGraph, out: W) -> Result<(), GraphError> {
    let doc = JsonGraph {
        n_left: graph.n_left(),
        n_right: graph.n_right(),
        m: graph.num_edges(),
        ell: graph.num_colors(),
        edges: graph
            .edges()
            .iter()
            .map(|e| JsonEdge {
                u: e.u,
                v: e.v,
                weight: e.weight,
                color: e.color + 1,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

pub fn read_matching<R: BufRead>(
    reader: R,
    graph: &ColoredBipartiteGraph,
) -> Result<Matching, GraphError> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut toks = text.split_whitespace();
        let u = field(toks.next(), i + 1, "u")?;
        let v = field(toks.next(), i + 1, "v")?;
        if toks.next().is_some() {
            return Err(parse_err(i + 1, "trailing tokens"));
        }
        pairs.push((u, v));
    }
    Matching::from_pairs(graph, &pairs)
}

pub fn write_matching<W: Write>(
    matching: &Matching,
    graph: &ColoredBipartiteGraph,
    mut out: W,
) -> std::io::Result<()> {
    for (u, v) in matching.pairs(graph) {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}
