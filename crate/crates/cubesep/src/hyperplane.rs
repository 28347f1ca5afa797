//! Hyperplanes of an NPC cube complex: parallelism classes of edges,
//! two-sidedness, midcubes and carriers.

use std::collections::BTreeSet;

use crate::complex::{CellId, CubeComplex, NpcComplex, SubcomplexRef};
use crate::Result;

/// A parallelism class of edges with its midcube structure.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    pub id: usize,
    /// Sorted edge indices of the class.
    pub edge_class: Vec<usize>,
    /// Cubes crossed, as (cell, dual axis). Includes the dual edges
    /// themselves as (edge, 0).
    pub midcubes: Vec<(CellId, usize)>,
    pub two_sided: bool,
    /// Smallest subcomplex containing the hyperplane: the crossed cubes and
    /// their faces.
    pub carrier: SubcomplexRef,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
            r
        } else {
            x
        }
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// For a square, the two opposite-edge pairs with orientation matching.
/// Entry `(e_low, end_of_corner0_low, e_high, end_of_corner0_high)` for each
/// axis: the 1-faces at side 0 and side 1 of the *other* axis, whose sym
/// tells how orientations correspond.
fn square_opposite_pairs(x: &CubeComplex, sq: usize) -> Result<[((usize, u8), (usize, u8)); 2]> {
    let mut out = [((0usize, 0u8), (0usize, 0u8)); 2];
    for axis in 0..2 {
        let other = 1 - axis;
        // Edge along `axis` at other-axis side s: corners b with bit(other)=s.
        let mut pair = [(0usize, 0u8); 2];
        for s in 0..2 {
            let (cell, sym) = x.face(2, sq, &[(other, s)])?;
            debug_assert_eq!(cell.dim, 1);
            // sym maps the intrinsic axis-`axis` interval into the edge: the
            // image of intrinsic corner 0 records the orientation.
            pair[s] = (cell.idx, sym.apply(0) as u8);
        }
        out[axis] = (pair[0], pair[1]);
    }
    Ok(out)
}

/// Computes all hyperplanes by union-find over opposite-edge pairs in
/// squares. Two-sidedness is decided on the orientation double cover of each
/// class: a class is two-sided iff no edge's two orientations are forced
/// equal.
pub fn hyperplanes(x: &NpcComplex) -> Result<Vec<Hyperplane>> {
    hyperplanes_raw(x.raw())
}

/// Same computation on a raw complex. Used for developed balls, which are
/// NPC as subsets of a universal cover but whose frontier links may be
/// incomplete, so they cannot carry the NPC token themselves.
pub fn hyperplanes_raw(x: &CubeComplex) -> Result<Vec<Hyperplane>> {
    let ne = x.num_edges();
    let mut uf = UnionFind::new(ne);
    // Orientation tracking: nodes 2e (edge forward) and 2e+1 (edge reversed).
    let mut ouf = UnionFind::new(2 * ne);
    for sq in 0..x.dim_count(2) {
        for ((e0, o0), (e1, o1)) in square_opposite_pairs(x, sq)? {
            uf.union(e0, e1);
            // Opposite edges are elementary parallel; orientations with the
            // same image of intrinsic corner 0 correspond.
            let flip = (o0 ^ o1) as usize;
            ouf.union(2 * e0, 2 * e1 + flip);
            ouf.union(2 * e0 + 1, 2 * e1 + 1 - flip);
        }
    }
    // Gather classes.
    let mut class_of = vec![usize::MAX; ne];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for e in 0..ne {
        let r = uf.find(e);
        if class_of[r] == usize::MAX {
            class_of[r] = classes.len();
            classes.push(Vec::new());
        }
        class_of[e] = class_of[r];
        classes[class_of[e]].push(e);
    }
    let mut out = Vec::new();
    for (id, edge_class) in classes.into_iter().enumerate() {
        let two_sided = edge_class.iter().all(|&e| ouf.find(2 * e) != ouf.find(2 * e + 1));
        let mut midcubes: Vec<(CellId, usize)> = edge_class.iter().map(|&e| (CellId::new(1, e), 0)).collect();
        for d in 2..=x.max_dim() {
            for idx in 0..x.dim_count(d) {
                for axis in 0..d {
                    let end = x.cube_edge(d, idx, axis, 0)?;
                    if class_of[end.edge] == id {
                        midcubes.push((CellId::new(d, idx), axis));
                    }
                }
            }
        }
        let carrier_seed: BTreeSet<CellId> = midcubes.iter().map(|&(c, _)| c).collect();
        let carrier = SubcomplexRef::from_cells(x, carrier_seed)?;
        out.push(Hyperplane { id, edge_class, midcubes, two_sided, carrier });
    }
    Ok(out)
}

/// Map edge -> hyperplane id, from a hyperplane list.
pub fn edge_to_hyperplane(hs: &[Hyperplane], num_edges: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; num_edges];
    for h in hs {
        for &e in &h.edge_class {
            out[e] = h.id;
        }
    }
    debug_assert!(out.iter().all(|&v| v != usize::MAX));
    out
}

/// Whether two hyperplanes are transverse: distinct and crossing a common
/// cube (equivalently, intersecting as subsets).
pub fn transverse(x: &CubeComplex, hs: &[Hyperplane], a: usize, b: usize) -> bool {
    if a == b {
        return false;
    }
    let e2h = edge_to_hyperplane(hs, x.num_edges());
    hyperplanes_cross(x, &e2h, a, b)
}

/// Crossing test given the edge->hyperplane table: some cell has dual axes
/// for both.
pub fn hyperplanes_cross(x: &CubeComplex, e2h: &[usize], a: usize, b: usize) -> bool {
    if a == b {
        return false;
    }
    for d in 2..=x.max_dim() {
        for idx in 0..x.dim_count(d) {
            let mut has_a = false;
            let mut has_b = false;
            for axis in 0..d {
                if let Ok(end) = x.cube_edge(d, idx, axis, 0) {
                    let h = e2h[end.edge];
                    has_a |= h == a;
                    has_b |= h == b;
                }
            }
            if has_a && has_b {
                return true;
            }
        }
    }
    false
}
