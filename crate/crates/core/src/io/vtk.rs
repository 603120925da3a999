//! Legacy ASCII VTK unstructured grids. Octree cells are written as
//! 8-corner hexahedra; hanging nodes are not drawn.

use std::fmt::Write;

use crate::error::{format_err, invalid, Result};
use crate::mesh::OctreeMesh;
use crate::partition::Partition;

/// VTK hexahedron corner order expressed in master corner indices.
const HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];
const VTK_HEXAHEDRON: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    /// Point indices in VTK order.
    pub cells: Vec<[u32; 8]>,
    pub material: Vec<u16>,
    pub part: Option<Vec<u16>>,
    pub displacement: Option<Vec<[f64; 3]>>,
}

impl VtkGrid {
    /// Points are the cell corners in `corner_nodes` order, which must
    /// cover every corner of every cell.
    pub fn from_mesh(mesh: &OctreeMesh, corner_nodes: &[u32], partition: Option<&Partition>) -> Result<Self> {
        let mut index = vec![u32::MAX; mesh.nodes.len()];
        for (i, &n) in corner_nodes.iter().enumerate() {
            *index.get_mut(n as usize).ok_or_else(|| invalid(format!("node {n} out of range")))? = i as u32;
        }
        let mut cells = Vec::with_capacity(mesh.cells.len());
        for c in 0..mesh.cells.len() {
            let corners = mesh.corner_nodes(c);
            let hex = HEX_ORDER.map(|k| index[corners[k] as usize]);
            if hex.contains(&u32::MAX) {
                return Err(invalid(format!("cell {c} has a corner outside the point set")));
            }
            cells.push(hex);
        }
        if let Some(p) = partition {
            if p.labels.len() != mesh.cells.len() {
                return Err(crate::Error::LengthMismatch { expected: mesh.cells.len(), got: p.labels.len() });
            }
        }
        Ok(Self {
            title: "octree-sbfem".into(),
            points: corner_nodes.iter().map(|&n| mesh.nodes[n as usize]).collect(),
            cells,
            material: mesh.cells.iter().map(|c| c.material).collect(),
            part: partition.map(|p| p.labels.clone()),
            displacement: None,
        })
    }

    pub fn with_displacement(mut self, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(crate::Error::LengthMismatch { expected: self.points.len(), got: values.len() });
        }
        self.displacement = Some(values);
        Ok(self)
    }
}

/// Sorted unique corner nodes of all cells.
pub fn corner_node_set(mesh: &OctreeMesh) -> Vec<u32> {
    let mut v: Vec<u32> = (0..mesh.cells.len()).flat_map(|c| mesh.corner_nodes(c)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn write_vtk(grid: &VtkGrid) -> String {
    let mut s = String::new();
    let title: String = grid.title.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {} double", grid.points.len()).unwrap();
    for p in &grid.points {
        writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(s, "CELLS {} {}", grid.cells.len(), 9 * grid.cells.len()).unwrap();
    for c in &grid.cells {
        writeln!(s, "8 {} {} {} {} {} {} {} {}", c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]).unwrap();
    }
    writeln!(s, "CELL_TYPES {}", grid.cells.len()).unwrap();
    for _ in &grid.cells {
        writeln!(s, "{VTK_HEXAHEDRON}").unwrap();
    }
    writeln!(s, "CELL_DATA {}", grid.cells.len()).unwrap();
    let mut ints = |name: &str, v: &[u16]| {
        writeln!(s, "SCALARS {name} int 1\nLOOKUP_TABLE default").unwrap();
        for x in v {
            writeln!(s, "{x}").unwrap();
        }
    };
    ints("material", &grid.material);
    if let Some(p) = &grid.part {
        ints("part", p);
    }
    if let Some(d) = &grid.displacement {
        writeln!(s, "POINT_DATA {}", grid.points.len()).unwrap();
        writeln!(s, "VECTORS displacement double").unwrap();
        for v in d {
            writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
        }
        writeln!(s, "SCALARS magnitude double 1\nLOOKUP_TABLE default").unwrap();
        for v in d {
            writeln!(s, "{:?}", (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).unwrap();
        }
    }
    s
}

struct Tokens<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> Tokens<'a> {
    fn line(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.lines.next().ok_or_else(|| format_err("VTK file", "unexpected end of file"))
    }

    fn fail(&self, reason: impl std::fmt::Display) -> crate::Error {
        format_err("VTK file", format!("line {}: {reason}", self.line_no))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let l = self.line()?;
        if l != want {
            return Err(self.fail(format!("expected {want:?}, found {l:?}")));
        }
        Ok(())
    }

    /// `KEYWORD <count> <rest>` with the count bounded by the file size.
    fn header(&mut self, keyword: &str, rest: impl Fn(usize) -> String, cap: usize) -> Result<usize> {
        let l = self.line()?;
        let (head, tail) = l.split_once(' ').ok_or_else(|| self.fail(format!("expected {keyword}")))?;
        if head != keyword {
            return Err(self.fail(format!("expected {keyword}")));
        }
        let (count, tail) = tail.split_once(' ').unwrap_or((tail, ""));
        let n: usize = count.parse().map_err(|_| self.fail("bad count"))?;
        if n > cap {
            return Err(self.fail("count exceeds file size"));
        }
        if tail != rest(n) {
            return Err(self.fail(format!("unexpected {keyword} header")));
        }
        Ok(n)
    }

    fn numbers<T: std::str::FromStr + Copy + Default, const N: usize>(&mut self) -> Result<[T; N]> {
        let l = self.line()?;
        let mut out = [T::default(); N];
        let mut it = l.split(' ');
        for v in out.iter_mut() {
            let f = it.next().ok_or_else(|| self.fail("too few values"))?;
            *v = f.parse().map_err(|_| self.fail(format!("bad value {f:?}")))?;
        }
        if it.next().is_some() {
            return Err(self.fail("too many values"));
        }
        Ok(out)
    }

    fn ints(&mut self, name: &str, n: usize) -> Result<Vec<u16>> {
        self.expect(&format!("SCALARS {name} int 1"))?;
        self.expect("LOOKUP_TABLE default")?;
        (0..n).map(|_| self.numbers::<u16, 1>().map(|v| v[0])).collect()
    }
}

/// Reads files in the layout produced by [`write_vtk`].
pub fn parse_vtk(text: &str) -> Result<VtkGrid> {
    let cap = text.len() / 2 + 1;
    let mut t = Tokens { lines: text.lines().peekable(), line_no: 0 };
    t.expect("# vtk DataFile Version 3.0")?;
    let title = t.line()?.to_string();
    t.expect("ASCII")?;
    t.expect("DATASET UNSTRUCTURED_GRID")?;
    let np = t.header("POINTS", |_| "double".into(), cap)?;
    let points = (0..np).map(|_| t.numbers::<f64, 3>()).collect::<Result<Vec<_>>>()?;
    let nc = t.header("CELLS", |n| (9 * n).to_string(), cap)?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let v = t.numbers::<u32, 9>()?;
        if v[0] != 8 {
            return Err(t.fail("only 8-node cells are supported"));
        }
        let c: [u32; 8] = v[1..].try_into().unwrap();
        if c.iter().any(|&i| i as usize >= np) {
            return Err(t.fail("cell refers to a missing point"));
        }
        cells.push(c);
    }
    if t.header("CELL_TYPES", |_| String::new(), cap)? != nc {
        return Err(t.fail("cell type count differs from cell count"));
    }
    for _ in 0..nc {
        if t.numbers::<u32, 1>()?[0] != VTK_HEXAHEDRON {
            return Err(t.fail("only hexahedra are supported"));
        }
    }
    if t.header("CELL_DATA", |_| String::new(), cap)? != nc {
        return Err(t.fail("cell data count differs from cell count"));
    }
    let material = t.ints("material", nc)?;
    let part = match t.lines.peek() {
        Some(l) if l.starts_with("SCALARS part ") => Some(t.ints("part", nc)?),
        _ => None,
    };
    let displacement = if t.lines.peek().is_some() {
        if t.header("POINT_DATA", |_| String::new(), cap)? != np {
            return Err(t.fail("point data count differs from point count"));
        }
        t.expect("VECTORS displacement double")?;
        let d = (0..np).map(|_| t.numbers::<f64, 3>()).collect::<Result<Vec<_>>>()?;
        t.expect("SCALARS magnitude double 1")?;
        t.expect("LOOKUP_TABLE default")?;
        for _ in 0..np {
            t.numbers::<f64, 1>()?;
        }
        Some(d)
    } else {
        None
    };
    if t.lines.next().is_some() {
        return Err(t.fail("trailing content"));
    }
    Ok(VtkGrid { title, points, cells, material, part, displacement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::mesh::enumerate_nodes;
    use crate::partition::{partition, PartitionMethod};
    use crate::verification::three_material_demo;

    #[test]
    fn single_cell_has_eight_points() {
        let mats = MaterialTable::single(Material::new(1.0, 0.2, 1.0).unwrap());
        let mesh = enumerate_nodes(&OctreeMesh::uniform_box([1, 1, 1], 2.0, mats)).unwrap();
        let grid = VtkGrid::from_mesh(&mesh, &corner_node_set(&mesh), None).unwrap();
        let text = write_vtk(&grid);
        assert!(text.contains("POINTS 8 double\n"));
        assert!(text.contains("CELLS 1 9\n8 0 1 3 2 4 5 7 6\n"));
        assert_eq!(parse_vtk(&text).unwrap(), grid);
    }

    #[test]
    fn labels_and_displacements_round_trip() {
        let mesh = three_material_demo().unwrap();
        let part = partition(&mesh, 4, PartitionMethod::Geometric).unwrap();
        let corners = corner_node_set(&mesh);
        let disp: Vec<[f64; 3]> = (0..corners.len()).map(|i| [i as f64 / 7.0, -1e-12 * i as f64, 0.1]).collect();
        let grid = VtkGrid::from_mesh(&mesh, &corners, Some(&part)).unwrap().with_displacement(disp).unwrap();
        let text = write_vtk(&grid);
        let back = parse_vtk(&text).unwrap();
        assert_eq!(back.part.as_deref(), Some(&part.labels[..]));
        assert_eq!(back, grid);
        assert_eq!(write_vtk(&back), text);
    }

    #[test]
    fn zero_snapshot_has_zero_point_data() {
        let mesh = three_material_demo().unwrap();
        let corners = corner_node_set(&mesh);
        let grid = VtkGrid::from_mesh(&mesh, &corners, None)
            .unwrap()
            .with_displacement(vec![[0.0; 3]; corners.len()])
            .unwrap();
        let text = write_vtk(&grid);
        let tail = text.split("POINT_DATA").nth(1).unwrap();
        assert!(tail
            .lines()
            .skip(2)
            .filter(|l| !l.starts_with("SCALARS") && !l.starts_with("LOOKUP"))
            .all(|l| l.split(' ').all(|v| v == "0.0")));
    }

    #[test]
    fn rejects_malformed_files() {
        let mats = MaterialTable::single(Material::new(1.0, 0.2, 1.0).unwrap());
        let mesh = enumerate_nodes(&OctreeMesh::uniform_box([1, 1, 1], 2.0, mats)).unwrap();
        let text = write_vtk(&VtkGrid::from_mesh(&mesh, &corner_node_set(&mesh), None).unwrap());
        assert!(parse_vtk(&text.replace("8 0 1 3", "8 0 9 3")).is_err());
        assert!(parse_vtk(&text.replace("POINTS 8", "POINTS 99999999")).is_err());
        assert!(parse_vtk(&text.replace("\n12\n", "\n10\n")).is_err());
        assert!(parse_vtk(&format!("{text}junk\n")).is_err());
        assert!(parse_vtk(&text[..text.len() - 3]).is_err());
    }
}
