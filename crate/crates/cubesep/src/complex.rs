//! Cube complexes as explicit combinatorial objects.
//!
//! A [`CubeComplex`] stores, per dimension, a list of cells. A `d`-cell has a
//! corner map `{0,1}^d -> vertices` (corners are indexed by bitmasks, bit `i`
//! = coordinate of axis `i`) and `2d` facet slots; slot `2*axis + side`
//! references the `(d-1)`-cell obtained by freezing `axis` at `side`,
//! together with the corner bijection identifying the facet's intrinsic
//! corners with that cell's corners. Explicit facet references make
//! self-glued complexes (tori, roses, Salvetti complexes) unambiguous, which
//! corner-vertex lists alone are not.
//!
//! Validation checks facet consistency, the commutation of codimension-2
//! restrictions, and the Gromov link condition (links simplicial and flag).
//! A complex that passes is wrapped in [`NpcComplex`], the token demanded by
//! every downstream operation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::{Error, Result};

pub type Vertex = usize;

/// Identifier of a cell: dimension plus index within that dimension.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CellId {
    pub dim: usize,
    pub idx: usize,
}

impl CellId {
    pub fn new(dim: usize, idx: usize) -> Self {
        CellId { dim, idx }
    }
}

/// One end of an edge: the edge index plus the corner (0 or 1) at which it is
/// incident. A loop edge has two distinct ends at the same vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetRef {
    /// Index among the `(d-1)`-cells.
    pub cell: usize,
    /// Intrinsic facet corner `b in {0,1}^{d-1}` -> corner index of `cell`.
    /// Must be a cube symmetry (signed axis permutation).
    pub perm: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    /// Corner map; length `2^dim`.
    pub corners: Vec<Vertex>,
    /// Facet slots; length `2*dim` (slot `2*axis + side`).
    pub facets: Vec<FacetRef>,
}

/// A signed permutation of axes, acting on corner bitmasks.
/// `apply(b)` has bit `sigma[k]` equal to `bit_k(b) ^ flip[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeSym {
    pub sigma: Vec<u8>,
    pub flip: Vec<bool>,
}

impl CubeSym {
    pub fn identity(dim: usize) -> Self {
        CubeSym {
            sigma: (0..dim as u8).collect(),
            flip: vec![false; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn apply(&self, b: usize) -> usize {
        let mut out = 0usize;
        for k in 0..self.sigma.len() {
            let bit = ((b >> k) & 1 == 1) ^ self.flip[k];
            if bit {
                out |= 1 << self.sigma[k];
            }
        }
        out
    }

    /// Corner-image table, the wire representation used by [`FacetRef`].
    pub fn to_perm(&self) -> Vec<u8> {
        (0..1usize << self.dim()).map(|b| self.apply(b) as u8).collect()
    }

    /// Recover a symmetry from a corner table; `None` if the table is not a
    /// signed axis permutation.
    pub fn from_perm(perm: &[u8], dim: usize) -> Option<CubeSym> {
        if perm.len() != 1 << dim {
            return None;
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            let p = p as usize;
            if p >= perm.len() || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        let mut sigma = vec![0u8; dim];
        let mut flip = vec![false; dim];
        for k in 0..dim {
            let d0 = perm[0] as usize ^ perm[1 << k] as usize;
            if d0.count_ones() != 1 {
                return None;
            }
            sigma[k] = d0.trailing_zeros() as u8;
            flip[k] = (perm[0] as usize >> sigma[k]) & 1 == 1;
        }
        let cand = CubeSym { sigma, flip };
        for b in 0..perm.len() {
            if cand.apply(b) != perm[b] as usize {
                return None;
            }
        }
        Some(cand)
    }
}

#[derive(Debug, Default)]
pub struct CubeComplex {
    /// `cells[d]` lists the d-cells. `cells[0][i].corners == [i]`.
    pub cells: Vec<Vec<Cell>>,
    /// Lazily built per-vertex incidence index; rebuilt after mutation.
    ends_cache: std::sync::OnceLock<Vec<Vec<EdgeEnd>>>,
}

impl Clone for CubeComplex {
    fn clone(&self) -> Self {
        CubeComplex { cells: self.cells.clone(), ends_cache: std::sync::OnceLock::new() }
    }
}

impl PartialEq for CubeComplex {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
    }
}

impl Eq for CubeComplex {}

pub fn insert_bit(b: usize, axis: usize, side: usize) -> usize {
    let low = b & ((1 << axis) - 1);
    let high = b >> axis;
    low | (side << axis) | (high << (axis + 1))
}

impl CubeComplex {
    pub fn new() -> Self {
        CubeComplex { cells: Vec::new(), ends_cache: std::sync::OnceLock::new() }
    }

    fn invalidate_cache(&mut self) {
        self.ends_cache = std::sync::OnceLock::new();
    }

    fn ends_index(&self) -> &Vec<Vec<EdgeEnd>> {
        self.ends_cache.get_or_init(|| {
            let mut index = vec![Vec::new(); self.num_vertices()];
            for (e, c) in self.cells.get(1).map(|v| v.as_slice()).unwrap_or(&[]).iter().enumerate() {
                for end in 0..2u8 {
                    index[c.corners[end as usize]].push(EdgeEnd { edge: e, end });
                }
            }
            index
        })
    }

    pub fn max_dim(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn dim_count(&self, d: usize) -> usize {
        self.cells.get(d).map_or(0, |v| v.len())
    }

    pub fn num_vertices(&self) -> usize {
        self.dim_count(0)
    }

    pub fn num_edges(&self) -> usize {
        self.dim_count(1)
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.dim][id.idx]
    }

    pub fn all_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(d, v)| (0..v.len()).map(move |i| CellId::new(d, i)))
    }

    pub fn add_vertex(&mut self) -> Vertex {
        self.invalidate_cache();
        if self.cells.is_empty() {
            self.cells.push(Vec::new());
        }
        let v = self.cells[0].len();
        self.cells[0].push(Cell {
            corners: vec![v],
            facets: Vec::new(),
        });
        v
    }

    /// Adds an edge from `v0` to `v1` (corner 0 resp. 1). Loops allowed.
    pub fn add_edge(&mut self, v0: Vertex, v1: Vertex) -> usize {
        self.invalidate_cache();
        while self.cells.len() < 2 {
            self.cells.push(Vec::new());
        }
        let e = self.cells[1].len();
        self.cells[1].push(Cell {
            corners: vec![v0, v1],
            facets: vec![
                FacetRef { cell: v0, perm: vec![0] },
                FacetRef { cell: v1, perm: vec![0] },
            ],
        });
        e
    }

    /// Adds a d-cell with explicit corners and facet references.
    pub fn add_cell(&mut self, dim: usize, corners: Vec<Vertex>, facets: Vec<FacetRef>) -> usize {
        self.invalidate_cache();
        while self.cells.len() < dim + 1 {
            self.cells.push(Vec::new());
        }
        let idx = self.cells[dim].len();
        self.cells[dim].push(Cell { corners, facets });
        idx
    }

    pub fn edge_endpoints(&self, e: usize) -> (Vertex, Vertex) {
        let c = &self.cells[1][e];
        (c.corners[0], c.corners[1])
    }

    pub fn edge_end_vertex(&self, end: EdgeEnd) -> Vertex {
        self.cells[1][end.edge].corners[end.end as usize]
    }

    /// The other endpoint when traversing `e` starting from its end `end`.
    pub fn edge_other(&self, end: EdgeEnd) -> Vertex {
        self.cells[1][end.edge].corners[1 - end.end as usize]
    }

    /// All edge ends incident at `v`, sorted.
    pub fn ends_at(&self, v: Vertex) -> Vec<EdgeEnd> {
        self.ends_index().get(v).cloned().unwrap_or_default()
    }

    /// Restrict `cell` by freezing intrinsic `axis` at `side`; returns the
    /// facet cell index and the symmetry from the remaining-axes subcube into
    /// it. Errors if the stored perm is not a cube symmetry.
    pub fn restrict(&self, dim: usize, idx: usize, axis: usize, side: usize) -> Result<(usize, CubeSym)> {
        let cell = &self.cells[dim][idx];
        let fr = &cell.facets[2 * axis + side];
        let sym = CubeSym::from_perm(&fr.perm, dim - 1).ok_or_else(|| Error::Structure {
            dim,
            idx,
            msg: format!("facet perm at slot {} is not a cube symmetry", 2 * axis + side),
        })?;
        Ok((fr.cell, sym))
    }

    /// The face of `(dim, idx)` obtained by freezing the intrinsic axes in
    /// `fixed` (pairs `(axis, side)`, axes distinct). Returns the face cell
    /// and the symmetry from the subcube on the remaining axes (in ascending
    /// order of their original indices) into that cell.
    pub fn face(&self, dim: usize, idx: usize, fixed: &[(usize, usize)]) -> Result<(CellId, CubeSym)> {
        let mut fixed: Vec<(usize, usize)> = fixed.to_vec();
        fixed.sort_unstable_by(|a, b| b.0.cmp(&a.0)); // descending axis
        // `remaining` tracks original axes still free, ascending.
        let mut remaining: Vec<usize> = (0..dim).collect();
        let mut cur = CellId::new(dim, idx);
        // sym: subcube on `remaining` -> current cell
        let mut sym = CubeSym::identity(dim);
        for (axis, side) in fixed {
            let pos = remaining
                .iter()
                .position(|&a| a == axis)
                .ok_or_else(|| Error::Structure { dim, idx, msg: "repeated axis in face()".into() })?;
            let cur_axis = sym.sigma[pos] as usize;
            let cur_side = side ^ (sym.flip[pos] as usize);
            let (next_idx, tau) = self.restrict(cur.dim, cur.idx, cur_axis, cur_side)?;
            // Renumber: current-cell axes above cur_axis shift down by one,
            // then compose with tau.
            let mut nsigma = Vec::with_capacity(remaining.len() - 1);
            let mut nflip = Vec::with_capacity(remaining.len() - 1);
            for k in 0..remaining.len() {
                if k == pos {
                    continue;
                }
                let a = sym.sigma[k] as usize;
                let a2 = if a > cur_axis { a - 1 } else { a };
                nsigma.push(tau.sigma[a2]);
                nflip.push(sym.flip[k] ^ tau.flip[a2]);
            }
            remaining.remove(pos);
            cur = CellId::new(cur.dim - 1, next_idx);
            sym = CubeSym { sigma: nsigma, flip: nflip };
        }
        Ok((cur, sym))
    }

    /// The 1-face of a cell along `axis` through corner `b` (only the bits of
    /// the other axes matter), as an edge end at corner `b`.
    pub fn cube_edge(&self, dim: usize, idx: usize, axis: usize, b: usize) -> Result<EdgeEnd> {
        let fixed: Vec<(usize, usize)> = (0..dim)
            .filter(|&a| a != axis)
            .map(|a| (a, (b >> a) & 1))
            .collect();
        let (cell, sym) = self.face(dim, idx, &fixed)?;
        debug_assert_eq!(cell.dim, 1);
        let end = sym.apply((b >> axis) & 1) as u8;
        Ok(EdgeEnd { edge: cell.idx, end })
    }

    /// All faces of a cell (including itself), as a set of cell ids.
    pub fn closure(&self, id: CellId) -> Result<BTreeSet<CellId>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if !out.insert(c) {
                continue;
            }
            if c.dim == 0 {
                continue;
            }
            for slot in 0..2 * c.dim {
                let fr = &self.cells[c.dim][c.idx].facets[slot];
                stack.push(CellId::new(c.dim - 1, fr.cell));
            }
        }
        Ok(out)
    }

    /// Structural validation: facet consistency, corner compatibility,
    /// codimension-2 commutation.
    pub fn validate_structure(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        if let Some(verts) = self.cells.first() {
            for (i, c) in verts.iter().enumerate() {
                if c.corners != vec![i] || !c.facets.is_empty() {
                    errs.push(Error::Structure { dim: 0, idx: i, msg: "malformed 0-cell".into() });
                }
            }
        }
        for d in 1..self.cells.len() {
            for (i, c) in self.cells[d].iter().enumerate() {
                if c.corners.len() != 1 << d {
                    errs.push(Error::Structure { dim: d, idx: i, msg: "corner map has wrong size".into() });
                    continue;
                }
                if c.facets.len() != 2 * d {
                    errs.push(Error::Structure { dim: d, idx: i, msg: "facet slot count wrong".into() });
                    continue;
                }
                if c.corners.iter().any(|&v| v >= self.num_vertices()) {
                    errs.push(Error::Structure { dim: d, idx: i, msg: "corner references missing vertex".into() });
                    continue;
                }
                let mut bad = false;
                for axis in 0..d {
                    for side in 0..2 {
                        let fr = &c.facets[2 * axis + side];
                        if fr.cell >= self.dim_count(d - 1) {
                            errs.push(Error::Structure {
                                dim: d,
                                idx: i,
                                msg: format!("facet slot {} references missing cell", 2 * axis + side),
                            });
                            bad = true;
                            continue;
                        }
                        let sym = match CubeSym::from_perm(&fr.perm, d - 1) {
                            Some(s) => s,
                            None => {
                                errs.push(Error::Structure {
                                    dim: d,
                                    idx: i,
                                    msg: format!("facet perm at slot {} is not a cube symmetry", 2 * axis + side),
                                });
                                bad = true;
                                continue;
                            }
                        };
                        let target = &self.cells[d - 1][fr.cell];
                        for b in 0..1usize << (d - 1) {
                            let parent_corner = insert_bit(b, axis, side);
                            if c.corners[parent_corner] != target.corners[sym.apply(b)] {
                                errs.push(Error::Structure {
                                    dim: d,
                                    idx: i,
                                    msg: format!("facet slot {} corner mismatch", 2 * axis + side),
                                });
                                bad = true;
                                break;
                            }
                        }
                    }
                }
                if bad || d < 2 {
                    continue;
                }
                // codim-2 commutation
                for ai in 0..d {
                    for aj in (ai + 1)..d {
                        for si in 0..2 {
                            for sj in 0..2 {
                                let r1 = self.face(d, i, &[(ai, si), (aj, sj)]);
                                let r2 = self.face(d, i, &[(aj, sj), (ai, si)]);
                                match (r1, r2) {
                                    (Ok((c1, s1)), Ok((c2, s2))) => {
                                        if c1 != c2 || s1.to_perm() != s2.to_perm() {
                                            errs.push(Error::Structure {
                                                dim: d,
                                                idx: i,
                                                msg: format!(
                                                    "codim-2 faces do not commute (axes {ai},{aj} sides {si},{sj})"
                                                ),
                                            });
                                        }
                                    }
                                    (Err(e), _) | (_, Err(e)) => errs.push(e),
                                }
                            }
                        }
                    }
                }
            }
        }
        errs
    }

    /// The link of a vertex.
    pub fn link(&self, v: Vertex) -> Link {
        let verts = self.ends_at(v);
        let index: HashMap<EdgeEnd, usize> = verts.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut corner_simplices = Vec::new();
        for d in 2..self.cells.len() {
            for idx in 0..self.cells[d].len() {
                let cell = &self.cells[d][idx];
                for b in 0..1usize << d {
                    if cell.corners[b] != v {
                        continue;
                    }
                    let mut ends = Vec::with_capacity(d);
                    let mut ok = true;
                    for axis in 0..d {
                        match self.cube_edge(d, idx, axis, b) {
                            Ok(end) => match index.get(&end) {
                                Some(&li) => ends.push(li),
                                None => ok = false,
                            },
                            Err(_) => ok = false,
                        }
                    }
                    if ok {
                        ends.sort_unstable();
                        corner_simplices.push(CornerSimplex {
                            cell: CellId::new(d, idx),
                            corner: b,
                            ends,
                        });
                    }
                }
            }
        }
        Link { vertex: v, verts, corner_simplices }
    }

    /// Per-vertex counts of cube-corner simplices, in one pass over all
    /// cells (avoids per-vertex link scans on large complexes).
    pub fn corner_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_vertices()];
        for d in 2..self.cells.len() {
            for cell in &self.cells[d] {
                for &v in &cell.corners {
                    counts[v] += 1;
                }
            }
        }
        counts
    }

    /// Gromov link condition at every vertex: link simplicial and flag.
    /// Returns witnesses of failure (empty = NPC, given a clean structure).
    pub fn npc_witnesses(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            let link = self.link(v);
            out.extend(link.simplicial_witnesses());
            out.extend(link.flag_witnesses());
        }
        out
    }

    /// Full validation. A `Ok` result certifies the complex NPC.
    pub fn validate(&self) -> ValidationReport {
        let structural: Vec<String> = self.validate_structure().iter().map(|e| e.to_string()).collect();
        let npc_failures = if structural.is_empty() { self.npc_witnesses() } else { Vec::new() };
        ValidationReport { structural, npc_failures }
    }

    /// Validate and wrap. Errors if the complex is malformed or not NPC.
    pub fn into_npc(self) -> Result<NpcComplex> {
        let report = self.validate();
        if let Some(e) = report.structural.first() {
            return Err(Error::NotNpc(e.clone()));
        }
        if let Some(w) = report.npc_failures.first() {
            return Err(Error::NotNpc(w.clone()));
        }
        Ok(NpcComplex { complex: self })
    }

    /// Connected components of the 1-skeleton (every cell's corners lie in
    /// one component, so these are the components of the complex).
    pub fn vertex_components(&self) -> Vec<usize> {
        let n = self.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(u) = stack.pop() {
                for end in self.ends_at(u) {
                    let w = self.edge_other(end);
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        let comp = self.vertex_components();
        comp.iter().all(|&c| c == 0) || comp.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct CornerSimplex {
    pub cell: CellId,
    pub corner: usize,
    /// Sorted indices into `Link::verts`.
    pub ends: Vec<usize>,
}

/// The link of a vertex: vertices are incident edge ends; each corner of a
/// higher cube at the vertex contributes a simplex on its edge ends.
#[derive(Clone, Debug)]
pub struct Link {
    pub vertex: Vertex,
    pub verts: Vec<EdgeEnd>,
    pub corner_simplices: Vec<CornerSimplex>,
}

impl Link {
    /// Simplices by their sorted vertex sets, with multiplicity.
    fn simplex_sets(&self) -> BTreeMap<Vec<usize>, usize> {
        let mut m = BTreeMap::new();
        for s in &self.corner_simplices {
            *m.entry(s.ends.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Link edges (pairs of link vertices spanned by some square corner or a
    /// face of a higher corner simplex).
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for s in &self.corner_simplices {
            for i in 0..s.ends.len() {
                for j in (i + 1)..s.ends.len() {
                    out.insert((s.ends[i], s.ends[j]));
                }
            }
        }
        out
    }

    pub fn simplicial_witnesses(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.corner_simplices {
            let mut dedup = s.ends.clone();
            dedup.dedup();
            if dedup.len() != s.ends.len() {
                out.push(format!(
                    "link of vertex {} has a degenerate simplex from cell {}:{}",
                    self.vertex, s.cell.dim, s.cell.idx
                ));
            }
        }
        for (set, count) in self.simplex_sets() {
            if count > 1 {
                out.push(format!(
                    "link of vertex {} has {} simplices on the same vertex set {:?}",
                    self.vertex, count, set
                ));
            }
        }
        out
    }

    /// Flag condition: every clique of the link 1-skeleton spans a simplex.
    pub fn flag_witnesses(&self) -> Vec<String> {
        let mut out = Vec::new();
        let edges = self.edges();
        let sets: BTreeSet<Vec<usize>> = self.simplex_sets().into_keys().collect();
        let n = self.verts.len();
        // Grow cliques; links are small so plain recursion is fine.
        let mut cliques: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
        while let Some(clique) = cliques.pop() {
            if clique.len() >= 2 && !sets.contains(&clique) {
                // A clique not spanned by a corner simplex (or a face of one).
                let covered = sets.iter().any(|s| clique.iter().all(|v| s.contains(v)));
                if !covered {
                    out.push(format!(
                        "link of vertex {} has an empty clique {:?}",
                        self.vertex, clique
                    ));
                    continue;
                }
            }
            let last = *clique.last().unwrap();
            for v in (last + 1)..n {
                if clique.iter().all(|&u| edges.contains(&(u.min(v), u.max(v)))) {
                    let mut bigger = clique.clone();
                    bigger.push(v);
                    cliques.push(bigger);
                }
            }
        }
        out
    }
}

/// Result of [`CubeComplex::validate`].
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub structural: Vec<String>,
    pub npc_failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_npc(&self) -> bool {
        self.structural.is_empty() && self.npc_failures.is_empty()
    }
}

/// A validated non-positively curved cube complex. Downstream operations take
/// this token rather than a raw [`CubeComplex`]; silent non-NPC inputs would
/// corrupt the hyperplane logic.
#[derive(Clone, Debug)]
pub struct NpcComplex {
    complex: CubeComplex,
}

impl std::ops::Deref for NpcComplex {
    type Target = CubeComplex;
    fn deref(&self) -> &CubeComplex {
        &self.complex
    }
}

impl NpcComplex {
    pub fn raw(&self) -> &CubeComplex {
        &self.complex
    }

    pub fn into_raw(self) -> CubeComplex {
        self.complex
    }
}

/// A face-closed set of cells of an ambient complex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubcomplexRef {
    pub cells: BTreeSet<CellId>,
}

impl SubcomplexRef {
    pub fn from_cells(ambient: &CubeComplex, seed: impl IntoIterator<Item = CellId>) -> Result<Self> {
        let mut cells = BTreeSet::new();
        for id in seed {
            cells.extend(ambient.closure(id)?);
        }
        Ok(SubcomplexRef { cells })
    }

    pub fn whole(ambient: &CubeComplex) -> Self {
        SubcomplexRef { cells: ambient.all_cells().collect() }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.cells.iter().filter(|c| c.dim == 0).map(|c| c.idx)
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().filter(|c| c.dim == 1).map(|c| c.idx)
    }

    pub fn contains(&self, id: CellId) -> bool {
        self.cells.contains(&id)
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.cells.contains(&CellId::new(0, v))
    }

    pub fn is_face_closed(&self, ambient: &CubeComplex) -> bool {
        self.cells.iter().all(|&id| {
            ambient
                .closure(id)
                .map(|cl| cl.iter().all(|c| self.cells.contains(c)))
                .unwrap_or(false)
        })
    }

    /// Local convexity: the inclusion is a local isometry. For a subcomplex
    /// this reduces to fullness of every vertex link: any cube of the
    /// ambient complex with a corner at `v` all of whose edge ends lie in the
    /// subcomplex must itself lie in the subcomplex.
    pub fn is_locally_convex(&self, ambient: &CubeComplex) -> bool {
        self.fullness_witness(ambient).is_none()
    }

    pub fn fullness_witness(&self, ambient: &CubeComplex) -> Option<(Vertex, CellId)> {
        for v in self.vertices() {
            let link = ambient.link(v);
            for s in &link.corner_simplices {
                if self.cells.contains(&s.cell) {
                    continue;
                }
                let all_in = s
                    .ends
                    .iter()
                    .all(|&li| self.cells.contains(&CellId::new(1, link.verts[li].edge)));
                if all_in {
                    return Some((v, s.cell));
                }
            }
        }
        None
    }

    /// Extracts the subcomplex as a standalone complex plus the cell
    /// correspondence into the ambient one (new id -> ambient id).
    pub fn extract(&self, ambient: &CubeComplex) -> (CubeComplex, Vec<Vec<usize>>) {
        let max_dim = self.cells.iter().map(|c| c.dim).max().unwrap_or(0);
        let mut fwd: Vec<HashMap<usize, usize>> = vec![HashMap::new(); max_dim + 1];
        let mut back: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 1];
        for id in &self.cells {
            let n = back[id.dim].len();
            fwd[id.dim].insert(id.idx, n);
            back[id.dim].push(id.idx);
        }
        let mut out = CubeComplex::new();
        out.cells = vec![Vec::new(); max_dim + 1];
        for d in 0..=max_dim {
            for &amb_idx in &back[d] {
                let cell = &ambient.cells[d][amb_idx];
                let corners = cell.corners.iter().map(|&v| fwd[0][&v]).collect();
                let facets = cell
                    .facets
                    .iter()
                    .map(|fr| FacetRef { cell: fwd[d - 1][&fr.cell], perm: fr.perm.clone() })
                    .collect();
                out.cells[d].push(Cell { corners, facets });
            }
        }
        (out, back)
    }
}
