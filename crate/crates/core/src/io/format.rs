//! Line-oriented `key = value` blocks.
//!
//! ```text
//! format = 1
//! name = pita
//!
//! [sector s0]
//! euler_char = 1
//! orientable = true
//! essential_curve = false
//! circuit = e0/through/left
//!
//! [edge e0]
//! ends = closed
//! sink = s2:0:0
//! source_a = s0:0:0
//! source_b = s1:0:0
//!
//! [vertex v0]
//! kind = subdivision
//! strand = e0.1 e1.0
//!
//! [assertions]
//! no_monogon = true
//! trivial_bubble = s0 s1
//! ```
//!
//! `#` starts a comment. Circuit entries are `free` or `edge/slot/side` with
//! slot one of `sink`, `through`, `merge` and side `left`, `right`, `unknown`.
//! Edge occurrence keys may be omitted, in which case they are inferred from
//! the circuits.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::complex::{
    Assertion, BoundaryEntry, BranchedSurfaceComplex, EdgeEnd, EdgeEnds, EdgeId, GoFlags,
    LocusEdge, LocusVertex, Occurrence, Orientability, Sector, SectorId, Side, Slot, VertexId,
    VertexKind, Violation,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Reference(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, column, message: message.into() }
}

fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::Sink => "sink",
        Slot::SourceThrough => "through",
        Slot::SourceMerge => "merge",
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
        Side::Unknown => "unknown",
    }
}

fn assertion_name(a: Assertion) -> &'static str {
    match a {
        Assertion::True => "true",
        Assertion::False => "false",
        Assertion::Unknown => "unknown",
    }
}

fn orientability_name(o: Orientability) -> &'static str {
    match o {
        Orientability::Orientable => "true",
        Orientability::NonOrientable => "false",
        Orientability::Unknown => "unknown",
    }
}

fn entry_text(e: &BoundaryEntry) -> String {
    match e {
        BoundaryEntry::Free => "free".into(),
        BoundaryEntry::Arc { edge, slot, side } => {
            format!("{edge}/{}/{}", slot_name(*slot), side_name(*side))
        }
    }
}

/// Deterministic text form: ids sorted, every key written.
pub fn serialize(b: &BranchedSurfaceComplex) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format = {FORMAT_VERSION}");
    let _ = writeln!(out, "name = {}", b.name);
    for (id, s) in &b.sectors {
        let _ = writeln!(out, "\n[sector {id}]");
        let _ = writeln!(out, "euler_char = {}", s.euler_char);
        let _ = writeln!(out, "orientable = {}", orientability_name(s.orientable));
        let _ = writeln!(out, "essential_curve = {}", s.essential_curve);
        for c in &s.boundary_circuits {
            let entries: Vec<String> = c.iter().map(entry_text).collect();
            let _ = writeln!(out, "circuit = {}", entries.join(" "));
        }
    }
    for (id, e) in &b.edges {
        let _ = writeln!(out, "\n[edge {id}]");
        match e.ends {
            EdgeEnds::ClosedLoop => {
                let _ = writeln!(out, "ends = closed");
            }
            EdgeEnds::Arc([a, c]) => {
                let _ = writeln!(out, "ends = {a} {c}");
            }
        }
        let _ = writeln!(out, "sink = {}", e.sink);
        let _ = writeln!(out, "source_a = {}", e.sources[0]);
        let _ = writeln!(out, "source_b = {}", e.sources[1]);
    }
    for (id, v) in &b.vertices {
        let _ = writeln!(out, "\n[vertex {id}]");
        let kind = match v.kind {
            VertexKind::Crossing => "crossing",
            VertexKind::Subdivision => "subdivision",
        };
        let _ = writeln!(out, "kind = {kind}");
        for [x, y] in &v.strands {
            let _ = writeln!(out, "strand = {x} {y}");
        }
    }
    let _ = writeln!(out, "\n[assertions]");
    for (name, value) in GoFlags::NAMES.iter().zip(b.flags.values()) {
        let _ = writeln!(out, "{name} = {}", assertion_name(value));
    }
    for (x, y) in &b.trivial_bubbles {
        let _ = writeln!(out, "trivial_bubble = {x} {y}");
    }
    out
}

enum Block {
    Header,
    Sector,
    Edge,
    Vertex(VertexId),
    Assertions,
}

#[derive(Default)]
struct PartialEdge {
    ends: Option<EdgeEnds>,
    sink: Option<Occurrence>,
    source_a: Option<Occurrence>,
    source_b: Option<Occurrence>,
    line: usize,
}

#[derive(Default)]
struct PartialSector {
    euler_char: Option<i64>,
    orientable: Option<Orientability>,
    essential_curve: bool,
    circuits: Vec<Vec<BoundaryEntry>>,
    line: usize,
}

/// A value token with its 1-based column.
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

fn tokens<'a>(value: &'a str, value_column: usize) -> Vec<Tok<'a>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in value.char_indices().chain(std::iter::once((value.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Tok { text: &value[s..i], column: value_column + s });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn parse_tok<T: FromStr>(line: usize, t: &Tok, what: &str) -> Result<T, FormatError> {
    t.text
        .parse()
        .map_err(|_| syntax(line, t.column, format!("invalid {what} `{}`", t.text)))
}

fn single<'a>(line: usize, toks: &'a [Tok<'a>], column: usize) -> Result<&'a Tok<'a>, FormatError> {
    match toks {
        [t] => Ok(t),
        [] => Err(syntax(line, column, "missing value")),
        [_, extra, ..] => Err(syntax(line, extra.column, "unexpected extra value")),
    }
}

fn parse_occurrence(line: usize, t: &Tok) -> Result<Occurrence, FormatError> {
    let parts: Vec<&str> = t.text.split(':').collect();
    let bad = || syntax(line, t.column, format!("invalid occurrence `{}` (expected sN:circuit:position)", t.text));
    let [s, c, p] = parts[..] else { return Err(bad()) };
    Ok(Occurrence::new(
        s.parse().map_err(|_| bad())?,
        c.parse().map_err(|_| bad())?,
        p.parse().map_err(|_| bad())?,
    ))
}

fn parse_edge_end(line: usize, t: &Tok) -> Result<EdgeEnd, FormatError> {
    let bad = || syntax(line, t.column, format!("invalid edge end `{}` (expected eN.0 or eN.1)", t.text));
    let (e, end) = t.text.rsplit_once('.').ok_or_else(bad)?;
    let end: u8 = end.parse().map_err(|_| bad())?;
    if end > 1 {
        return Err(bad());
    }
    Ok(EdgeEnd { edge: e.parse().map_err(|_| bad())?, end })
}

fn parse_entry(line: usize, t: &Tok) -> Result<BoundaryEntry, FormatError> {
    if t.text == "free" {
        return Ok(BoundaryEntry::Free);
    }
    let bad = |m: &str| syntax(line, t.column, format!("invalid circuit entry `{}`: {m}", t.text));
    let parts: Vec<&str> = t.text.split('/').collect();
    let [e, slot, side] = parts[..] else { return Err(bad("expected edge/slot/side")) };
    let edge: EdgeId = e.parse().map_err(|_| bad("bad edge id"))?;
    let slot = match slot {
        "sink" => Slot::Sink,
        "through" => Slot::SourceThrough,
        "merge" => Slot::SourceMerge,
        _ => return Err(bad("slot must be sink, through or merge")),
    };
    let side = match side {
        "left" => Side::Left,
        "right" => Side::Right,
        "unknown" => Side::Unknown,
        _ => return Err(bad("side must be left, right or unknown")),
    };
    Ok(BoundaryEntry::arc(edge, slot, side))
}

fn parse_bool(line: usize, t: &Tok) -> Result<bool, FormatError> {
    match t.text {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(syntax(line, t.column, format!("expected true or false, got `{}`", t.text))),
    }
}

fn parse_assertion(line: usize, t: &Tok) -> Result<Assertion, FormatError> {
    match t.text {
        "true" => Ok(Assertion::True),
        "false" => Ok(Assertion::False),
        "unknown" => Ok(Assertion::Unknown),
        _ => Err(syntax(line, t.column, format!("expected true, false or unknown, got `{}`", t.text))),
    }
}

pub fn parse(text: &str) -> Result<BranchedSurfaceComplex, FormatError> {
    let mut b = BranchedSurfaceComplex::new("");
    let mut block = Block::Header;
    let mut version_seen = false;
    let mut sectors: Vec<(SectorId, PartialSector)> = Vec::new();
    let mut edges: Vec<(EdgeId, PartialEdge)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, lead + trimmed.len(), "missing `]`"))?;
            let toks = tokens(inner, lead + 2);
            let kind = toks.first().ok_or_else(|| syntax(line, lead + 2, "empty block header"))?;
            let id_tok = toks.get(1);
            if toks.len() > 2 {
                return Err(syntax(line, toks[2].column, "unexpected token in block header"));
            }
            let need_id = || id_tok.ok_or_else(|| syntax(line, kind.column, "block needs an id"));
            block = match kind.text {
                "sector" => {
                    let id: SectorId = parse_tok(line, need_id()?, "sector id")?;
                    if sectors.iter().any(|(s, _)| *s == id) {
                        return Err(syntax(line, kind.column, format!("duplicate sector {id}")));
                    }
                    sectors.push((id, PartialSector { line, ..Default::default() }));
                    Block::Sector
                }
                "edge" => {
                    let id: EdgeId = parse_tok(line, need_id()?, "edge id")?;
                    if edges.iter().any(|(e, _)| *e == id) {
                        return Err(syntax(line, kind.column, format!("duplicate edge {id}")));
                    }
                    edges.push((id, PartialEdge { line, ..Default::default() }));
                    Block::Edge
                }
                "vertex" => {
                    let id: VertexId = parse_tok(line, need_id()?, "vertex id")?;
                    if b.vertices.contains_key(&id) {
                        return Err(syntax(line, kind.column, format!("duplicate vertex {id}")));
                    }
                    b.vertices.insert(id, LocusVertex { kind: VertexKind::Subdivision, strands: vec![] });
                    Block::Vertex(id)
                }
                "assertions" if id_tok.is_none() => Block::Assertions,
                other => {
                    return Err(syntax(line, kind.column, format!("unknown block `{other}`")))
                }
            };
            continue;
        }
        let eq = content
            .find('=')
            .ok_or_else(|| syntax(line, lead + 1, "expected `key = value`"))?;
        let key = content[..eq].trim();
        let value = &content[eq + 1..];
        let value_column = eq + 2;
        let toks = tokens(value, value_column);
        let unknown_key = || syntax(line, lead + 1, format!("unknown key `{key}`"));

        match &block {
            Block::Header => match key {
                "format" => {
                    let v: u32 = parse_tok(line, single(line, &toks, value_column)?, "format version")?;
                    if v != FORMAT_VERSION {
                        return Err(syntax(line, toks[0].column, format!("unsupported format version {v}")));
                    }
                    version_seen = true;
                }
                "name" => b.name = value.trim().to_string(),
                _ => return Err(unknown_key()),
            },
            Block::Sector => {
                let s = &mut sectors.last_mut().expect("open sector").1;
                match key {
                    "euler_char" => {
                        s.euler_char = Some(parse_tok(line, single(line, &toks, value_column)?, "integer")?)
                    }
                    "orientable" => {
                        let t = single(line, &toks, value_column)?;
                        s.orientable = Some(match t.text {
                            "true" => Orientability::Orientable,
                            "false" => Orientability::NonOrientable,
                            "unknown" => Orientability::Unknown,
                            _ => return Err(syntax(line, t.column, "expected true, false or unknown")),
                        });
                    }
                    "essential_curve" => {
                        s.essential_curve = parse_bool(line, single(line, &toks, value_column)?)?
                    }
                    "circuit" => {
                        let entries =
                            toks.iter().map(|t| parse_entry(line, t)).collect::<Result<Vec<_>, _>>()?;
                        if entries.is_empty() {
                            return Err(syntax(line, value_column, "empty circuit"));
                        }
                        s.circuits.push(entries);
                    }
                    _ => return Err(unknown_key()),
                }
            }
            Block::Edge => {
                let e = &mut edges.last_mut().expect("open edge").1;
                match key {
                    "ends" => {
                        e.ends = Some(match &toks[..] {
                            [t] if t.text == "closed" => EdgeEnds::ClosedLoop,
                            [a, c] => EdgeEnds::Arc([
                                parse_tok(line, a, "vertex id")?,
                                parse_tok(line, c, "vertex id")?,
                            ]),
                            _ => {
                                return Err(syntax(line, value_column, "expected `closed` or two vertex ids"))
                            }
                        })
                    }
                    "sink" => e.sink = Some(parse_occurrence(line, single(line, &toks, value_column)?)?),
                    "source_a" => {
                        e.source_a = Some(parse_occurrence(line, single(line, &toks, value_column)?)?)
                    }
                    "source_b" => {
                        e.source_b = Some(parse_occurrence(line, single(line, &toks, value_column)?)?)
                    }
                    _ => return Err(unknown_key()),
                }
            }
            Block::Vertex(id) => {
                let v = b.vertices.get_mut(id).expect("open vertex");
                match key {
                    "kind" => {
                        let t = single(line, &toks, value_column)?;
                        v.kind = match t.text {
                            "crossing" => VertexKind::Crossing,
                            "subdivision" => VertexKind::Subdivision,
                            _ => return Err(syntax(line, t.column, "expected crossing or subdivision")),
                        };
                    }
                    "strand" => match &toks[..] {
                        [x, y] => v.strands.push([parse_edge_end(line, x)?, parse_edge_end(line, y)?]),
                        _ => return Err(syntax(line, value_column, "a strand has exactly two edge ends")),
                    },
                    _ => return Err(unknown_key()),
                }
            }
            Block::Assertions => {
                if key == "trivial_bubble" {
                    match &toks[..] {
                        [x, y] => {
                            let (x, y): (SectorId, SectorId) =
                                (parse_tok(line, x, "sector id")?, parse_tok(line, y, "sector id")?);
                            b.trivial_bubbles.insert((x.min(y), x.max(y)));
                        }
                        _ => return Err(syntax(line, value_column, "expected two sector ids")),
                    }
                } else {
                    let t = single(line, &toks, value_column)?;
                    let a = parse_assertion(line, t)?;
                    *b.flags.get_mut(key).ok_or_else(unknown_key)? = a;
                }
            }
        }
    }
    if !version_seen {
        return Err(syntax(1, 1, "missing `format = 1` header"));
    }

    for (id, s) in sectors {
        let euler_char =
            s.euler_char.ok_or_else(|| syntax(s.line, 1, format!("sector {id} lacks euler_char")))?;
        b.sectors.insert(
            id,
            Sector {
                euler_char,
                orientable: s.orientable.unwrap_or(Orientability::Orientable),
                essential_curve: s.essential_curve,
                boundary_circuits: s.circuits,
            },
        );
    }
    let scanned = {
        let mut probe = b.clone();
        for (id, _) in &edges {
            let placeholder = Occurrence::new(SectorId(0), 0, 0);
            probe.edges.insert(
                *id,
                LocusEdge { ends: EdgeEnds::ClosedLoop, sink: placeholder, sources: [placeholder; 2] },
            );
        }
        probe.rebuild_occurrences();
        probe.edges
    };
    for (id, e) in edges {
        let ends = e.ends.ok_or_else(|| syntax(e.line, 1, format!("edge {id} lacks ends")))?;
        let (sink, sources) = match (e.sink, e.source_a, e.source_b) {
            (Some(s), Some(a), Some(c)) => (s, [a, c]),
            (None, None, None) => {
                let inferred = &scanned[&id];
                let ok = b.entry(inferred.sink).and_then(BoundaryEntry::edge) == Some(id);
                if !ok {
                    return Err(FormatError::Reference(format!(
                        "edge {id}: occurrences omitted and cannot be inferred from the circuits"
                    )));
                }
                (inferred.sink, inferred.sources)
            }
            _ => {
                return Err(syntax(e.line, 1, format!("edge {id} must give all of sink, source_a, source_b or none")))
            }
        };
        b.edges.insert(id, LocusEdge { ends, sink, sources });
    }

    let referential: Vec<String> = b
        .validate()
        .into_iter()
        .filter(|v| {
            matches!(
                v,
                Violation::UnknownEdge { .. }
                    | Violation::DanglingOccurrence { .. }
                    | Violation::UnknownVertex { .. }
                    | Violation::UnknownBubbleSector { .. }
            )
        })
        .map(|v| v.to_string())
        .collect();
    if !referential.is_empty() {
        return Err(FormatError::Reference(referential.join("; ")));
    }
    Ok(b)
}
