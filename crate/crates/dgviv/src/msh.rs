//! Gmsh MSH 2.2 ASCII reader.
//!
//! Only linear triangles (type 2) and boundary lines (type 1) are used.
//! Lines must belong to a physical group named `wall` or `farfield`; points
//! (type 15) are skipped, and nodes not referenced by any triangle are
//! dropped.

use crate::error::{io_error, Error, Result};
use dgviv_core::mesh::{BoundaryTag, Mesh};
use std::collections::HashMap;
use std::path::Path;

pub fn load_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_msh(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        loop {
            let (i, l) = self.inner.next().ok_or(Error::Msh {
                line: self.line + 1,
                msg: "unexpected end of file".into(),
            })?;
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(l);
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Msh {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, marker: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != marker {
            return Err(self.err(format!("expected {marker}, found {l:?}")));
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize> {
        let l = self.next_line()?;
        l.parse().map_err(|_| self.err(format!("bad count {l:?}")))
    }
}

fn parse<T: std::str::FromStr>(lines: &Lines, field: Option<&str>) -> Result<T> {
    let f = field.ok_or_else(|| lines.err("missing field"))?;
    f.parse()
        .map_err(|_| lines.err(format!("bad number {f:?}")))
}

pub fn parse_msh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let mut names: HashMap<i64, String> = HashMap::new();
    let mut nodes: HashMap<i64, [f64; 2]> = HashMap::new();
    let mut node_order: Vec<i64> = Vec::new();
    let mut triangles: Vec<[i64; 3]> = Vec::new();
    let mut lines_tagged: Vec<([i64; 2], i64)> = Vec::new();
    let mut seen_format = false;
    let mut seen_elements = false;
    while let Some((i, l)) = lines.inner.next() {
        lines.line = i + 1;
        match l.trim() {
            "" => {}
            "$MeshFormat" => {
                let l = lines.next_line()?;
                let mut it = l.split_whitespace();
                let version = it.next().unwrap_or("");
                let file_type = it.next().unwrap_or("");
                if !version.starts_with("2.2") || file_type != "0" {
                    return Err(lines.err(format!("unsupported format {l:?}; need 2.2 ASCII")));
                }
                lines.expect("$EndMeshFormat")?;
                seen_format = true;
            }
            "$PhysicalNames" => {
                for _ in 0..lines.count()? {
                    let l = lines.next_line()?;
                    let mut it = l.splitn(3, char::is_whitespace);
                    let _dim: i64 = parse(&lines, it.next())?;
                    let tag: i64 = parse(&lines, it.next())?;
                    let name = it.next().unwrap_or("").trim().trim_matches('"');
                    names.insert(tag, name.to_ascii_lowercase());
                }
                lines.expect("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                for _ in 0..lines.count()? {
                    let l = lines.next_line()?;
                    let mut it = l.split_whitespace();
                    let id: i64 = parse(&lines, it.next())?;
                    let x: f64 = parse(&lines, it.next())?;
                    let y: f64 = parse(&lines, it.next())?;
                    if nodes.insert(id, [x, y]).is_some() {
                        return Err(lines.err(format!("duplicate node {id}")));
                    }
                    node_order.push(id);
                }
                lines.expect("$EndNodes")?;
            }
            "$Elements" => {
                for _ in 0..lines.count()? {
                    let l = lines.next_line()?;
                    let fields: Vec<&str> = l.split_whitespace().collect();
                    let mut it = fields.iter().copied();
                    let _id: i64 = parse(&lines, it.next())?;
                    let kind: u32 = parse(&lines, it.next())?;
                    let ntags: usize = parse(&lines, it.next())?;
                    let tags: Vec<i64> = (0..ntags)
                        .map(|_| parse(&lines, it.next()))
                        .collect::<Result<_>>()?;
                    let rest: Vec<i64> =
                        it.map(|f| parse(&lines, Some(f))).collect::<Result<_>>()?;
                    match (kind, rest.len()) {
                        (2, 3) => triangles.push([rest[0], rest[1], rest[2]]),
                        (1, 2) => {
                            let phys = *tags
                                .first()
                                .ok_or_else(|| lines.err("boundary line without physical tag"))?;
                            lines_tagged.push(([rest[0], rest[1]], phys));
                        }
                        (15, 1) => {}
                        (1 | 2 | 15, n) => {
                            return Err(lines.err(format!("element type {kind} with {n} nodes")))
                        }
                        _ => {
                            return Err(lines.err(format!("unsupported element type {kind}")));
                        }
                    }
                }
                lines.expect("$EndElements")?;
                seen_elements = true;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // unknown section: skip to its end marker
                let end = format!("$End{}", &other[1..]);
                while lines.next_line()? != end {}
            }
            other => return Err(lines.err(format!("unexpected line {other:?}"))),
        }
    }
    if !seen_format {
        return Err(Error::Msh {
            line: 1,
            msg: "missing $MeshFormat".into(),
        });
    }
    if !seen_elements {
        return Err(Error::Msh {
            line: lines.line,
            msg: "missing $Elements".into(),
        });
    }

    let node_err = |id: i64| Error::Msh {
        line: 0,
        msg: format!("element references unknown node {id}"),
    };
    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut used: Vec<bool> = vec![false; node_order.len()];
    let position: HashMap<i64, usize> = node_order
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    for t in &triangles {
        for id in t {
            used[*position.get(id).ok_or_else(|| node_err(*id))?] = true;
        }
    }
    let mut vertices = Vec::new();
    for (i, &id) in node_order.iter().enumerate() {
        if used[i] {
            index.insert(id, vertices.len());
            vertices.push(nodes[&id]);
        }
    }
    let tris: Vec<[usize; 3]> = triangles.iter().map(|t| t.map(|id| index[&id])).collect();
    let mut tagged = Vec::with_capacity(lines_tagged.len());
    for ([a, b], phys) in lines_tagged {
        let tag = match names.get(&phys).map(String::as_str) {
            Some("wall") => BoundaryTag::Wall,
            Some("farfield") => BoundaryTag::Farfield,
            Some(other) => {
                return Err(Error::Msh {
                    line: 0,
                    msg: format!("boundary group {other:?} is neither \"wall\" nor \"farfield\""),
                })
            }
            None => {
                return Err(Error::Msh {
                    line: 0,
                    msg: format!("physical group {phys} has no name"),
                })
            }
        };
        let (ia, ib) = (index.get(&a), index.get(&b));
        match (ia, ib) {
            (Some(&ia), Some(&ib)) => tagged.push(([ia, ib], tag)),
            _ => return Err(node_err(if ia.is_none() { a } else { b })),
        }
    }
    Ok(Mesh::new(vertices, tris, &tagged)?)
}
