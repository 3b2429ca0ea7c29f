use super::{Demand, GraphError, MultiGraph};
use std::fmt::Write as _;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn field<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, GraphError> {
    s.parse().map_err(|_| GraphError::Parse {
        line,
        message: format!("cannot parse {s:?}"),
    })
}

fn arity(line: usize, fields: &[&str], want: usize) -> Result<(), GraphError> {
    if fields.len() != want {
        return Err(GraphError::Parse {
            line,
            message: format!("expected {want} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

/// Parses `n m` followed by `m` lines `u v`.
pub fn parse_edge_list(text: &str) -> Result<MultiGraph, GraphError> {
    let mut lines = data_lines(text);
    let (hl, header) = lines.next().ok_or(GraphError::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    arity(hl, &header, 2)?;
    let n: usize = field(hl, header[0])?;
    let m: usize = field(hl, header[1])?;
    let mut g = MultiGraph::new(n);
    let mut last = hl;
    for (line, fields) in lines {
        arity(line, &fields, 2)?;
        let u = field(line, fields[0])?;
        let v = field(line, fields[1])?;
        g.add_edge(u, v).map_err(|e| GraphError::Parse {
            line,
            message: e.to_string(),
        })?;
        last = line;
    }
    if g.m() != m {
        return Err(GraphError::Parse {
            line: last,
            message: format!("header announces {m} edges, found {}", g.m()),
        });
    }
    Ok(g)
}

pub fn write_edge_list(g: &MultiGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Parses lines `u v value`.
pub fn parse_demand(text: &str, n: usize) -> Result<Demand, GraphError> {
    let mut d = Demand::new();
    for (line, fields) in data_lines(text) {
        arity(line, &fields, 3)?;
        let u: usize = field(line, fields[0])?;
        let v: usize = field(line, fields[1])?;
        let x: f64 = field(line, fields[2])?;
        if u >= n || v >= n {
            return Err(GraphError::Parse {
                line,
                message: format!("vertex out of range for n = {n}"),
            });
        }
        if !(x >= 0.0 && x.is_finite()) {
            return Err(GraphError::Parse {
                line,
                message: format!("invalid demand value {x}"),
            });
        }
        d.add(u, v, x);
    }
    Ok(d)
}
