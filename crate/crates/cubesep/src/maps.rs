//! Combinatorial maps of cube complexes and the local isometry check.
//!
//! A [`CellMap`] sends each `d`-cell to a `d`-cell together with a cube
//! symmetry aligning the corners. A map is a *local isometry* when every
//! induced link map is an embedding onto a full subcomplex; subcomplex
//! inclusions that are local isometries are the locally convex subcomplexes.

use std::collections::HashMap;

use crate::complex::{CubeComplex, CubeSym, EdgeEnd, SubcomplexRef, Vertex};
use crate::{Error, Result};

/// A dimension-preserving cell map. `cells[d][i] = (target index, perm)`
/// where `perm` maps domain corners to target corners and must be a cube
/// symmetry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMap {
    pub cells: Vec<Vec<(usize, Vec<u8>)>>,
}

impl CellMap {
    pub fn vertex(&self, v: Vertex) -> Vertex {
        self.cells[0][v].0
    }

    pub fn edge(&self, e: usize) -> usize {
        self.cells[1][e].0
    }

    /// Image of an edge end (orientation-aware).
    pub fn edge_end(&self, end: EdgeEnd) -> EdgeEnd {
        let (te, ref perm) = self.cells[1][end.edge];
        EdgeEnd { edge: te, end: perm[end.end as usize] }
    }

    pub fn cell(&self, id: crate::complex::CellId) -> crate::complex::CellId {
        crate::complex::CellId::new(id.dim, self.cells[id.dim][id.idx].0)
    }

    /// Identity map on a complex.
    pub fn identity(x: &CubeComplex) -> CellMap {
        let cells = x
            .cells
            .iter()
            .enumerate()
            .map(|(d, v)| {
                (0..v.len())
                    .map(|i| (i, (0..1u8 << d as u8).collect::<Vec<u8>>()))
                    .collect()
            })
            .collect();
        CellMap { cells }
    }

    /// Composition `g ∘ self`.
    pub fn then(&self, g: &CellMap) -> CellMap {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(d, v)| {
                v.iter()
                    .map(|(mid, perm)| {
                        let (tid, gperm) = &g.cells[d][*mid];
                        let comp: Vec<u8> = perm.iter().map(|&c| gperm[c as usize]).collect();
                        (*tid, comp)
                    })
                    .collect()
            })
            .collect();
        CellMap { cells }
    }

    /// Structural validation against domain and codomain: dimensions, corner
    /// consistency, facet compatibility.
    pub fn validate(&self, dom: &CubeComplex, cod: &CubeComplex) -> Result<()> {
        if self.cells.len() != dom.cells.len() {
            return Err(Error::Precondition("cell map covers wrong dimensions".into()));
        }
        for d in 0..dom.cells.len() {
            if self.cells[d].len() != dom.cells[d].len() {
                return Err(Error::Precondition(format!("cell map misses {d}-cells")));
            }
            for (i, (t, perm)) in self.cells[d].iter().enumerate() {
                if *t >= cod.dim_count(d) {
                    return Err(Error::Structure { dim: d, idx: i, msg: "map target out of range".into() });
                }
                let sym = CubeSym::from_perm(perm, d).ok_or_else(|| Error::Structure {
                    dim: d,
                    idx: i,
                    msg: "map perm is not a cube symmetry".into(),
                })?;
                let dc = &dom.cells[d][i];
                let tc = &cod.cells[d][*t];
                for b in 0..1usize << d {
                    if self.vertex(dc.corners[b]) != tc.corners[sym.apply(b)] {
                        return Err(Error::Structure { dim: d, idx: i, msg: "map corner mismatch".into() });
                    }
                }
                // facet compatibility
                for axis in 0..d {
                    for side in 0..2 {
                        let fr = &dc.facets[2 * axis + side];
                        let t_axis = sym.sigma[axis] as usize;
                        let t_side = side ^ (sym.flip[axis] as usize);
                        let tfr = &tc.facets[2 * t_axis + t_side];
                        let (ft, fperm) = &self.cells[d - 1][fr.cell];
                        if *ft != tfr.cell {
                            return Err(Error::Structure {
                                dim: d,
                                idx: i,
                                msg: format!("facet image mismatch at slot {}", 2 * axis + side),
                            });
                        }
                        // χ ∘ φ must equal ψ ∘ (restriction of sym).
                        let phi = CubeSym::from_perm(&fr.perm, d - 1).unwrap();
                        let psi = CubeSym::from_perm(&tfr.perm, d - 1).unwrap();
                        let restr = restrict_sym(&sym, axis);
                        for b in 0..1usize << (d - 1) {
                            let lhs = fperm[phi.apply(b)];
                            let rhs = psi.apply(restr.apply(b)) as u8;
                            if lhs != rhs {
                                return Err(Error::Structure {
                                    dim: d,
                                    idx: i,
                                    msg: format!("facet perm mismatch at slot {}", 2 * axis + side),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The symmetry induced on the facet subcube when freezing `axis` of the
/// domain: domain axes minus `axis` -> target axes minus `sigma[axis]`.
pub fn restrict_sym(sym: &CubeSym, axis: usize) -> CubeSym {
    let dim = sym.dim();
    let t_axis = sym.sigma[axis] as usize;
    let mut sigma = Vec::with_capacity(dim - 1);
    let mut flip = Vec::with_capacity(dim - 1);
    for k in 0..dim {
        if k == axis {
            continue;
        }
        let a = sym.sigma[k] as usize;
        sigma.push(if a > t_axis { a - 1 } else { a } as u8);
        flip.push(sym.flip[k]);
    }
    CubeSym { sigma, flip }
}

/// A map of NPC cube complexes presented by a domain complex and a cell map
/// into some codomain (held by the caller).
#[derive(Clone, Debug)]
pub struct LocalIso {
    pub domain: CubeComplex,
    pub map: CellMap,
}

impl LocalIso {
    pub fn vertex(&self, v: Vertex) -> Vertex {
        self.map.vertex(v)
    }

    pub fn edge_end(&self, end: EdgeEnd) -> EdgeEnd {
        self.map.edge_end(end)
    }

    /// The inclusion of a subcomplex, extracted as a standalone domain.
    pub fn inclusion(sub: &SubcomplexRef, ambient: &CubeComplex) -> LocalIso {
        let (domain, back) = sub.extract(ambient);
        let cells = back
            .iter()
            .enumerate()
            .map(|(d, v)| {
                v.iter()
                    .map(|&amb| (amb, (0..1u8 << d as u8).collect::<Vec<u8>>()))
                    .collect()
            })
            .collect();
        LocalIso { domain, map: CellMap { cells } }
    }

    pub fn identity(x: &CubeComplex) -> LocalIso {
        LocalIso { domain: x.clone(), map: CellMap::identity(x) }
    }

    pub fn is_embedding(&self) -> bool {
        for d in 0..self.map.cells.len() {
            let mut seen = std::collections::BTreeSet::new();
            for (t, _) in &self.map.cells[d] {
                if !seen.insert(*t) {
                    return false;
                }
            }
        }
        true
    }

    /// Image as a subcomplex of the codomain.
    pub fn image(&self, cod: &CubeComplex) -> SubcomplexRef {
        let mut cells = std::collections::BTreeSet::new();
        for d in 0..self.map.cells.len() {
            for (t, _) in &self.map.cells[d] {
                cells.insert(crate::complex::CellId::new(d, *t));
            }
        }
        let _ = cod;
        SubcomplexRef { cells }
    }
}

/// Witness of a local isometry failure: a domain vertex together with either
/// a link collision or a missing fullness simplex in the codomain.
#[derive(Clone, Debug)]
pub struct IsometryWitness {
    pub vertex: Vertex,
    pub detail: String,
}

/// Checks that every induced link map is injective with full image.
pub fn is_local_isometry(
    li: &LocalIso,
    cod: &CubeComplex,
) -> Result<(bool, Vec<IsometryWitness>)> {
    li.map.validate(&li.domain, cod)?;
    let mut witnesses = Vec::new();
    for y in 0..li.domain.num_vertices() {
        let ly = li.domain.link(y);
        let target = li.map.vertex(y);
        let lt = cod.link(target);
        let lt_index: HashMap<EdgeEnd, usize> =
            lt.verts.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        // Injectivity of the vertex map of links.
        let mut images = Vec::with_capacity(ly.verts.len());
        let mut seen = std::collections::BTreeSet::new();
        let mut injective = true;
        for &end in &ly.verts {
            let ie = li.map.edge_end(end);
            let li_idx = lt_index[&ie];
            images.push(li_idx);
            if !seen.insert(li_idx) {
                witnesses.push(IsometryWitness {
                    vertex: y,
                    detail: format!("two edge ends at {y} map to the same end of {target}"),
                });
                injective = false;
            }
        }
        if !injective {
            continue;
        }
        let image_set: std::collections::BTreeSet<usize> = images.iter().copied().collect();
        // Domain simplices by image vertex set.
        let dom_sets: std::collections::BTreeSet<Vec<usize>> = ly
            .corner_simplices
            .iter()
            .map(|s| {
                let mut v: Vec<usize> = s.ends.iter().map(|&i| images[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        // Fullness: every codomain corner simplex spanned by image vertices
        // must be hit.
        for s in &lt.corner_simplices {
            if s.ends.iter().all(|v| image_set.contains(v)) && !dom_sets.contains(&s.ends) {
                witnesses.push(IsometryWitness {
                    vertex: y,
                    detail: format!(
                        "image not full at {target}: cell {}:{} corner spans image ends",
                        s.cell.dim, s.cell.idx
                    ),
                });
            }
        }
    }
    Ok((witnesses.is_empty(), witnesses))
}

/// Finds the isomorphism of domains over the codomain matching `seed`
/// (a vertex of `a.domain` to a vertex of `b.domain` with equal images),
/// if one exists. Local injectivity makes the extension forced.
pub fn iso_over_codomain(
    a: &LocalIso,
    b: &LocalIso,
    seed: (Vertex, Vertex),
) -> Option<Vec<Vertex>> {
    if a.map.vertex(seed.0) != b.map.vertex(seed.1) {
        return None;
    }
    if a.domain.num_vertices() != b.domain.num_vertices()
        || a.domain.num_edges() != b.domain.num_edges()
    {
        return None;
    }
    let n = a.domain.num_vertices();
    let mut f = vec![usize::MAX; n];
    f[seed.0] = seed.1;
    let mut stack = vec![seed.0];
    // b-side lookup: (vertex, image end) -> domain end
    while let Some(u) = stack.pop() {
        let bu = f[u];
        let b_ends = b.domain.ends_at(bu);
        for end in a.domain.ends_at(u) {
            let img = a.map.edge_end(end);
            let mate = b_ends.iter().find(|&&be| b.map.edge_end(be) == img);
            let mate = match mate {
                Some(&m) => m,
                None => return None,
            };
            let w = a.domain.edge_other(end);
            let bw = b.domain.edge_other(mate);
            if f[w] == usize::MAX {
                f[w] = bw;
                stack.push(w);
            } else if f[w] != bw {
                return None;
            }
        }
    }
    if f.iter().any(|&v| v == usize::MAX) {
        return None; // disconnected domain; callers use connected pieces
    }
    // Verify cell counts per dimension match under the vertex bijection.
    let mut seen = vec![false; n];
    for &v in &f {
        if seen[v] {
            return None;
        }
        seen[v] = true;
    }
    Some(f)
}
