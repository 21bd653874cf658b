//! Cusp triangulations: the corner triangles cut off by truncating vertices.

use std::collections::BTreeMap;

use super::{edge_class_lookup, edge_classes, edge_index, Triangulation};
use crate::error::{Error, Result};

/// The triangle cut off vertex `vertex` of tetrahedron `tet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CornerTriangle {
    pub tet: usize,
    pub vertex: u8,
}

/// The triangulated boundary surface around one cusp.
///
/// Triangle sides are named by tetrahedron faces: side `f` of the triangle at
/// vertex `v` lies in face `f`, and corner `u` sits on the edge `vu`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspTriangulation {
    pub id: usize,
    pub triangles: Vec<CornerTriangle>,
    /// `neighbors[i][f]` is the triangle index and side glued to side `f` of
    /// triangle `i`; `None` in the slot of the truncated vertex itself.
    pub neighbors: Vec<[Option<(usize, u8)>; 4]>,
    /// Edge class encircled by each corner (`usize::MAX` in the unused slot).
    pub corner_edge: Vec<[usize; 4]>,
    /// Cusp vertex of each corner (`usize::MAX` in the unused slot).
    pub corner_vertex: Vec<[usize; 4]>,
    pub num_vertices: usize,
    pub euler_characteristic: i64,
    index: BTreeMap<CornerTriangle, usize>,
}

impl CuspTriangulation {
    pub fn index_of(&self, tet: usize, vertex: u8) -> Option<usize> {
        self.index.get(&CornerTriangle { tet, vertex }).copied()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// All boundary components, whatever their topology.
pub fn cusp_components(t: &Triangulation) -> Vec<CuspTriangulation> {
    let n = t.tets.len();
    let classes = edge_classes(t);
    let lookup = edge_class_lookup(t, &classes);

    // Components of the corner triangles under side gluing.
    let mut comp = vec![[usize::MAX; 4]; n];
    let mut count = 0;
    for t0 in 0..n {
        for v0 in 0..4u8 {
            if comp[t0][v0 as usize] != usize::MAX {
                continue;
            }
            let mut stack = vec![(t0, v0)];
            comp[t0][v0 as usize] = count;
            while let Some((tt, v)) = stack.pop() {
                for f in (0..4u8).filter(|&f| f != v) {
                    let (nt, p) = t.glue(tt, f);
                    let nv = p[v as usize];
                    if comp[nt][nv as usize] == usize::MAX {
                        comp[nt][nv as usize] = count;
                        stack.push((nt, nv));
                    }
                }
            }
            count += 1;
        }
    }

    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let mut triangles = Vec::new();
        for tt in 0..n {
            for v in 0..4u8 {
                if comp[tt][v as usize] == id {
                    triangles.push(CornerTriangle { tet: tt, vertex: v });
                }
            }
        }
        let index: BTreeMap<CornerTriangle, usize> =
            triangles.iter().enumerate().map(|(i, &c)| (c, i)).collect();

        let mut neighbors = vec![[None; 4]; triangles.len()];
        let mut corner_edge = vec![[usize::MAX; 4]; triangles.len()];
        for (i, c) in triangles.iter().enumerate() {
            for f in (0..4u8).filter(|&f| f != c.vertex) {
                let (nt, p) = t.glue(c.tet, f);
                let j = index[&CornerTriangle { tet: nt, vertex: p[c.vertex as usize] }];
                neighbors[i][f as usize] = Some((j, p[f as usize]));
                corner_edge[i][f as usize] = lookup[c.tet][edge_index(c.vertex, f)];
            }
        }

        // Cusp vertices: corners identified across glued sides.
        let mut corner_vertex = vec![[usize::MAX; 4]; triangles.len()];
        let mut num_vertices = 0;
        for i in 0..triangles.len() {
            for u in 0..4u8 {
                if u == triangles[i].vertex || corner_vertex[i][u as usize] != usize::MAX {
                    continue;
                }
                let mut stack = vec![(i, u)];
                corner_vertex[i][u as usize] = num_vertices;
                while let Some((k, w)) = stack.pop() {
                    let c = triangles[k];
                    for f in (0..4u8).filter(|&f| f != c.vertex && f != w) {
                        let (_, p) = t.glue(c.tet, f);
                        let (j, _) = neighbors[k][f as usize].expect("side is glued");
                        let nw = p[w as usize];
                        if corner_vertex[j][nw as usize] == usize::MAX {
                            corner_vertex[j][nw as usize] = num_vertices;
                            stack.push((j, nw));
                        }
                    }
                }
                num_vertices += 1;
            }
        }

        let faces = triangles.len() as i64;
        let chi = num_vertices as i64 - 3 * faces / 2 + faces;
        out.push(CuspTriangulation {
            id,
            triangles,
            neighbors,
            corner_edge,
            corner_vertex,
            num_vertices,
            euler_characteristic: chi,
            index,
        });
    }
    out
}

/// Boundary components, required to be tori.
pub fn cusps(t: &Triangulation) -> Result<Vec<CuspTriangulation>> {
    let comps = cusp_components(t);
    for c in &comps {
        if c.euler_characteristic != 0 {
            return Err(Error::CuspNotTorus { cusp: c.id, chi: c.euler_characteristic });
        }
    }
    Ok(comps)
}
