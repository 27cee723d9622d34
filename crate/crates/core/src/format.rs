//! Line-oriented text formats for graphs, worlds and priors.
//!
//! ```text
//! gls-graph v1 d=2
//! v 0 5.0000000000000000e-2 5.0000000000000000e-2
//! e 0 0 1 1.2500000000000000e-1 1.0000000000000000e0
//! ```
//!
//! Blank lines and lines starting with `#` are ignored everywhere. Reals are
//! written with 17 significant digits so that reading them back is exact.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::graph::{EdgeSpec, Graph, GraphError};
use crate::world::{AnyWorld, BitmapWorld, ExplicitWorld, WorldError};

pub const GRAPH_HEADER: &str = "gls-graph v1";
pub const WORLD_HEADER: &str = "gls-world v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing or malformed header, expected `{0}`")]
    Header(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("cannot parse {what} `{tok}`")))
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Places `value` at `slot` of a dense id table, rejecting repeats.
fn put<T>(table: &mut Vec<Option<T>>, id: usize, value: T, line: usize, what: &str) -> Result<(), FormatError> {
    if id >= table.len() {
        table.resize_with(id + 1, || None);
    }
    if table[id].is_some() {
        return Err(syntax(line, format!("duplicate {what} id {id}")));
    }
    table[id] = Some(value);
    Ok(())
}

fn dense<T>(table: Vec<Option<T>>, what: &str) -> Result<Vec<T>, FormatError> {
    table
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| syntax(0, format!("{what} ids are not dense: {i} is missing"))))
        .collect()
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or(FormatError::Header(GRAPH_HEADER))?;
    let dim: usize = header
        .strip_prefix(GRAPH_HEADER)
        .and_then(|rest| rest.trim().strip_prefix("d="))
        .and_then(|d| d.parse().ok())
        .ok_or(FormatError::Header(GRAPH_HEADER))?;

    let mut vertices: Vec<Option<Vec<f64>>> = Vec::new();
    let mut edges: Vec<Option<EdgeSpec>> = Vec::new();
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let id: usize = parse_num(toks.next(), no, "vertex id")?;
                let pos = toks
                    .map(|t| parse_num(Some(t), no, "coordinate"))
                    .collect::<Result<Vec<f64>, _>>()?;
                if pos.len() != dim {
                    return Err(syntax(no, format!("expected {dim} coordinates, found {}", pos.len())));
                }
                put(&mut vertices, id, pos, no, "vertex")?;
            }
            Some("e") => {
                let id: usize = parse_num(toks.next(), no, "edge id")?;
                let u = parse_num(toks.next(), no, "endpoint")?;
                let v = parse_num(toks.next(), no, "endpoint")?;
                let weight = parse_num(toks.next(), no, "weight")?;
                let prior = parse_num(toks.next(), no, "prior")?;
                if toks.next().is_some() {
                    return Err(syntax(no, "trailing tokens after edge"));
                }
                put(&mut edges, id, EdgeSpec::new(u, v, weight).with_prior(prior), no, "edge")?;
            }
            Some(other) => return Err(syntax(no, format!("unknown directive `{other}`"))),
            None => unreachable!("content lines are non-empty"),
        }
    }
    Ok(Graph::new(dim, dense(vertices, "vertex")?, dense(edges, "edge")?)?)
}

pub fn write_graph(graph: &Graph) -> String {
    let mut out = format!("{GRAPH_HEADER} d={}\n", graph.dim());
    for v in graph.vertices() {
        let _ = write!(out, "v {}", v.id);
        for &x in &v.position {
            let _ = write!(out, " {}", real(x));
        }
        out.push('\n');
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "e {} {} {} {} {}",
            e.id,
            e.endpoints.0,
            e.endpoints.1,
            real(e.weight),
            real(e.prior)
        );
    }
    out
}

pub fn load_graph<R: Read>(mut reader: R) -> Result<Graph, FormatError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_graph(&text)
}

pub fn save_graph<W: Write>(graph: &Graph, mut writer: W) -> Result<(), FormatError> {
    writer.write_all(write_graph(graph).as_bytes())?;
    Ok(())
}

/// A world read from disk, with the generator seed if one was recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldFile {
    pub world: AnyWorld,
    pub seed: Option<u64>,
}

pub fn parse_world(text: &str) -> Result<WorldFile, FormatError> {
    let mut lines = content_lines(text).peekable();
    match lines.next() {
        Some((_, h)) if h == WORLD_HEADER => {}
        _ => return Err(FormatError::Header(WORLD_HEADER)),
    }
    let mut seed = None;
    if let Some(&(no, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("seed ") {
            seed = Some(parse_num(Some(rest.trim()), no, "seed")?);
            lines.next();
        }
    }

    if let Some(&(no, l)) = lines.peek() {
        if l.starts_with("grid") {
            lines.next();
            let mut toks = l.split_whitespace().skip(1);
            let rows: usize = parse_num(toks.next(), no, "row count")?;
            let cols: usize = parse_num(toks.next(), no, "column count")?;
            let mut cells = Vec::with_capacity(rows * cols);
            let mut seen = 0;
            for (no, row) in lines {
                if seen == rows {
                    return Err(syntax(no, "extra grid row"));
                }
                if row.len() != cols {
                    return Err(syntax(no, format!("expected {cols} cells, found {}", row.len())));
                }
                for c in row.bytes() {
                    match c {
                        b'0' => cells.push(false),
                        b'1' => cells.push(true),
                        _ => return Err(syntax(no, format!("bad cell `{}`", c as char))),
                    }
                }
                seen += 1;
            }
            if seen != rows {
                return Err(syntax(0, format!("expected {rows} grid rows, found {seen}")));
            }
            let world = BitmapWorld::from_cells(rows, cols, cells)?;
            return Ok(WorldFile {
                world: AnyWorld::Bitmap(world),
                seed,
            });
        }
    }

    let mut table: Vec<Option<bool>> = Vec::new();
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        let id: usize = parse_num(toks.next(), no, "edge id")?;
        let bit = match toks.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(syntax(no, "expected validity 0 or 1")),
        };
        if toks.next().is_some() {
            return Err(syntax(no, "trailing tokens"));
        }
        put(&mut table, id, bit, no, "edge")?;
    }
    Ok(WorldFile {
        world: AnyWorld::Explicit(ExplicitWorld::new(dense(table, "edge")?)),
        seed,
    })
}

pub fn write_world(world: &AnyWorld, seed: Option<u64>) -> String {
    let mut out = format!("{WORLD_HEADER}\n");
    if let Some(s) = seed {
        let _ = writeln!(out, "seed {s}");
    }
    match world {
        AnyWorld::Explicit(w) => {
            for (i, &v) in w.validity().iter().enumerate() {
                let _ = writeln!(out, "{i} {}", u8::from(v));
            }
        }
        AnyWorld::Bitmap(w) => {
            let _ = writeln!(out, "grid {} {}", w.rows(), w.cols());
            for row in w.cells().chunks(w.cols()) {
                out.extend(row.iter().map(|&c| if c { '1' } else { '0' }));
                out.push('\n');
            }
        }
    }
    out
}

/// Reads `<edge_id> <prior>` lines. Ids must be dense.
pub fn parse_priors(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut table: Vec<Option<f64>> = Vec::new();
    for (no, line) in content_lines(text) {
        let mut toks = line.split_whitespace();
        let id: usize = parse_num(toks.next(), no, "edge id")?;
        let p: f64 = parse_num(toks.next(), no, "prior")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(syntax(no, format!("prior {p} outside [0, 1]")));
        }
        if toks.next().is_some() {
            return Err(syntax(no, "trailing tokens"));
        }
        put(&mut table, id, p, no, "edge")?;
    }
    dense(table, "edge")
}

pub fn write_priors(priors: &[f64]) -> String {
    let mut out = String::new();
    for (i, &p) in priors.iter().enumerate() {
        let _ = writeln!(out, "{i} {}", real(p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_counterexample;

    #[test]
    fn graph_round_trip() {
        let g = Graph::new(
            2,
            vec![vec![0.1, 0.2], vec![1.0 / 3.0, 0.7]],
            vec![EdgeSpec::new(0, 1, 0.1 + 0.2).with_prior(0.75)],
        )
        .unwrap();
        let text = write_graph(&g);
        assert!(text.starts_with("gls-graph v1 d=2\n"));
        let back = parse_graph(&text).unwrap();
        assert_eq!(write_graph(&back), text);
        assert_eq!(back.edges()[0].weight, 0.1 + 0.2);
        assert_eq!(back.position(crate::graph::VertexId(1))[0], 1.0 / 3.0);
    }

    #[test]
    fn zero_weight_is_rejected() {
        let text = "gls-graph v1 d=1\nv 0 0\nv 1 1\ne 0 0 1 0 1\n";
        assert!(matches!(parse_graph(text), Err(FormatError::Graph(GraphError::NonPositiveWeight { .. }))));
    }

    #[test]
    fn malformed_graph_files() {
        assert!(matches!(parse_graph("gls-graph v2 d=1\n"), Err(FormatError::Header(_))));
        let unknown = "gls-graph v1 d=1\nv 0 0\nx 1\n";
        assert!(matches!(parse_graph(unknown), Err(FormatError::Syntax { line: 3, .. })));
        let dangling = "gls-graph v1 d=1\nv 0 0\nv 1 1\ne 0 0 5 1 1\n";
        assert!(matches!(parse_graph(dangling), Err(FormatError::Graph(_))));
        let gap = "gls-graph v1 d=1\nv 0 0\nv 2 1\n";
        assert!(parse_graph(gap).is_err());
        let dup = "gls-graph v1 d=1\nv 0 0\nv 0 1\n";
        assert!(parse_graph(dup).is_err());
    }

    #[test]
    fn counterexample_edge_lines() {
        let ce = build_counterexample(2, 2).unwrap();
        let text = write_graph(&ce.graph);
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 9);
    }

    #[test]
    fn world_round_trips() {
        let explicit = AnyWorld::Explicit(ExplicitWorld::new(vec![true, false, true]));
        let text = write_world(&explicit, Some(42));
        let back = parse_world(&text).unwrap();
        assert_eq!(back.world, explicit);
        assert_eq!(back.seed, Some(42));

        let mut grid = BitmapWorld::empty(16).unwrap();
        grid.set_cell(3, 5, true);
        let bitmap = AnyWorld::Bitmap(grid);
        let text = write_world(&bitmap, None);
        let back = parse_world(&text).unwrap();
        assert_eq!(back.world, bitmap);
        assert_eq!(back.seed, None);
        assert_eq!(write_world(&back.world, None), text);
    }

    #[test]
    fn bad_world_files() {
        assert!(parse_world("gls-world v1\n0 2\n").is_err());
        assert!(parse_world("gls-world v1\ngrid 16 16\n0000\n").is_err());
        assert!(parse_world("hello\n").is_err());
    }

    #[test]
    fn priors_round_trip() {
        let p = vec![0.25, 0.75, 1.0 / 3.0];
        assert_eq!(parse_priors(&write_priors(&p)).unwrap(), p);
        assert!(parse_priors("0 1.5\n").is_err());
        assert!(parse_priors("1 0.5\n").is_err());
    }
}
