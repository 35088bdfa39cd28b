//! Legacy VTK ASCII output of nodal fields.
//!
//! Every element is split into the `p^2` sub-triangles of its nodal lattice.
//! Points are duplicated per element, so discontinuities survive.

use crate::error::{io_error, Error, Result};
use dgviv_core::dg::StateField;
use dgviv_core::mesh::Mesh;
use dgviv_core::physics::{primitive, GasParams};
use dgviv_core::refelem::OperatorTables;
use dgviv_core::verify::vorticity;
use dgviv_core::Site;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Names of the point-data arrays, in file order.
pub const FIELDS: [&str; 5] = ["rho", "u", "v", "p", "vorticity"];

/// Renders the legacy VTK text. `gradients` is the nodal broken gradient.
pub fn render_vtk(
    field: &StateField,
    gradients: &[f64],
    mesh: &Mesh,
    tables: &OperatorTables,
    gas: &GasParams,
) -> Result<String> {
    let np = tables.np();
    let ne = mesh.num_elements();
    let npts = ne * np;
    let subs = tables.nodes.sub_triangles();
    let omega = vorticity(field, gradients, gas)?;
    let mut out = String::with_capacity(npts * 80);
    out.push_str(
        "# vtk DataFile Version 3.0\ndgviv nodal field\nASCII\nDATASET UNSTRUCTURED_GRID\n",
    );
    let _ = writeln!(out, "POINTS {npts} double");
    for k in 0..ne {
        for &rs in &tables.nodes.points {
            let x = mesh.map_point(k, rs);
            let _ = writeln!(out, "{:e} {:e} 0", x[0], x[1]);
        }
    }
    let ncells = ne * subs.len();
    let _ = writeln!(out, "CELLS {ncells} {}", 4 * ncells);
    for k in 0..ne {
        for t in &subs {
            let b = k * np;
            let _ = writeln!(out, "3 {} {} {}", b + t[0], b + t[1], b + t[2]);
        }
    }
    let _ = writeln!(out, "CELL_TYPES {ncells}");
    for _ in 0..ncells {
        out.push_str("5\n");
    }
    let mut prims = Vec::with_capacity(npts);
    for k in 0..ne {
        for n in 0..np {
            prims.push(primitive(
                &field.node(k, n),
                gas,
                Site::Node {
                    element: k,
                    node: n,
                },
            )?);
        }
    }
    let _ = writeln!(out, "POINT_DATA {npts}");
    let columns: [Box<dyn Fn(usize) -> f64>; 5] = [
        Box::new(|i| prims[i].rho),
        Box::new(|i| prims[i].v[0]),
        Box::new(|i| prims[i].v[1]),
        Box::new(|i| prims[i].p),
        Box::new(|i| omega[i]),
    ];
    for (name, col) in FIELDS.iter().zip(&columns) {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for i in 0..npts {
            let _ = writeln!(out, "{:e}", col(i));
        }
    }
    Ok(out)
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    field: &StateField,
    gradients: &[f64],
    mesh: &Mesh,
    tables: &OperatorTables,
    gas: &GasParams,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_vtk(field, gradients, mesh, tables, gas)?;
    let mut f = std::fs::File::create(path).map_err(io_error(path))?;
    f.write_all(text.as_bytes()).map_err(io_error(path))
}

/// Contents of a legacy VTK triangle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<[usize; 3]>,
    pub point_data: Vec<(String, Vec<f64>)>,
}

impl VtkGrid {
    pub fn scalar(&self, name: &str) -> Option<&[f64]> {
        self.point_data
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Reads the subset of legacy VTK that [`write_vtk`] produces: an ASCII
/// unstructured grid of triangles with scalar point data.
pub fn parse_vtk(text: &str) -> Result<VtkGrid> {
    let mut tokens = text
        .lines()
        .enumerate()
        .skip(2)
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
    let end = text.lines().count();
    let mut next = |what: &str| -> Result<(usize, &str)> {
        tokens.next().ok_or_else(|| Error::Vtk {
            line: end,
            msg: format!("unexpected end of file, expected {what}"),
        })
    };
    let err = |line: usize, msg: String| Error::Vtk { line, msg };
    fn num<T: std::str::FromStr>(line: usize, t: &str) -> Result<T> {
        t.parse().map_err(|_| Error::Vtk {
            line,
            msg: format!("bad number {t:?}"),
        })
    }
    let (l, t) = next("ASCII")?;
    if t != "ASCII" {
        return Err(err(l, format!("expected ASCII, found {t:?}")));
    }
    let (l, t) = next("DATASET")?;
    let (_, kind) = next("dataset type")?;
    if t != "DATASET" || kind != "UNSTRUCTURED_GRID" {
        return Err(err(l, "expected DATASET UNSTRUCTURED_GRID".into()));
    }
    let mut grid = VtkGrid {
        points: Vec::new(),
        cells: Vec::new(),
        point_data: Vec::new(),
    };
    while let Ok((l, key)) = next("section") {
        match key {
            "POINTS" => {
                let (l, n) = next("point count")?;
                let n: usize = num(l, n)?;
                next("point type")?;
                for _ in 0..n {
                    let mut p = [0.0; 3];
                    for v in &mut p {
                        let (l, t) = next("coordinate")?;
                        *v = num(l, t)?;
                    }
                    grid.points.push(p);
                }
            }
            "CELLS" => {
                let (l, n) = next("cell count")?;
                let n: usize = num(l, n)?;
                next("cell list size")?;
                for _ in 0..n {
                    let (l, t) = next("cell size")?;
                    if num::<usize>(l, t)? != 3 {
                        return Err(err(l, "only triangles are supported".into()));
                    }
                    let mut c = [0; 3];
                    for v in &mut c {
                        let (l, t) = next("cell vertex")?;
                        *v = num(l, t)?;
                        if *v >= grid.points.len() {
                            return Err(err(l, format!("cell vertex {v} out of range")));
                        }
                    }
                    grid.cells.push(c);
                }
            }
            "CELL_TYPES" => {
                let (l, n) = next("cell type count")?;
                for _ in 0..num::<usize>(l, n)? {
                    let (l, t) = next("cell type")?;
                    if t != "5" {
                        return Err(err(l, format!("cell type {t} is not a triangle")));
                    }
                }
            }
            "POINT_DATA" => {
                let (l, n) = next("point data count")?;
                if num::<usize>(l, n)? != grid.points.len() {
                    return Err(err(l, "point data count differs from point count".into()));
                }
            }
            "SCALARS" => {
                let (_, name) = next("scalar name")?;
                let name = name.to_string();
                next("scalar type")?;
                // optional component count, then the lookup table line
                let (l, t) = next("LOOKUP_TABLE")?;
                let t = if t == "1" { next("LOOKUP_TABLE")?.1 } else { t };
                if t != "LOOKUP_TABLE" {
                    return Err(err(l, format!("expected LOOKUP_TABLE, found {t:?}")));
                }
                next("table name")?;
                let mut values = Vec::with_capacity(grid.points.len());
                for _ in 0..grid.points.len() {
                    let (l, t) = next("scalar value")?;
                    values.push(num(l, t)?);
                }
                grid.point_data.push((name, values));
            }
            other => return Err(err(l, format!("unsupported section {other:?}"))),
        }
    }
    Ok(grid)
}

pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_vtk(&text)
}
