//! Finite-sheeted covers: permutation-voltage construction, covering-map
//! verification, pullbacks and elevations, fiber products and
//! regularization via the monodromy normal core.
//!
//! Covers are stored as total complexes plus cell-wise projections, not only
//! voltages: elevation extraction and route enumeration need cells.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::complex::{insert_bit, CellId, CubeComplex, CubeSym, EdgeEnd, NpcComplex, Vertex};
use crate::maps::{CellMap, LocalIso};
use crate::{Error, Result};

/// A permutation voltage: for each base edge (oriented corner 0 -> corner 1)
/// a permutation of the `m` sheets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Voltage {
    pub degree: usize,
    /// `perms[e][k]` = sheet at the head when entering sheet `k` at the tail.
    pub perms: Vec<Vec<usize>>,
}

impl Voltage {
    pub fn identity(num_edges: usize, degree: usize) -> Voltage {
        Voltage { degree, perms: vec![(0..degree).collect(); num_edges] }
    }

    pub fn is_valid(&self) -> bool {
        self.perms.iter().all(|p| {
            p.len() == self.degree && {
                let mut seen = vec![false; self.degree];
                p.iter().all(|&i| i < self.degree && !std::mem::replace(&mut seen[i], true))
            }
        })
    }

    fn inverse(p: &[usize]) -> Vec<usize> {
        let mut inv = vec![0; p.len()];
        for (i, &j) in p.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    /// Sheet transport when traversing edge `e` starting from its end `end`.
    pub fn transport(&self, e: usize, end: u8, sheet: usize) -> usize {
        if end == 0 {
            self.perms[e][sheet]
        } else {
            Self::inverse(&self.perms[e])[sheet]
        }
    }
}

/// A finite-sheeted covering, given by the total complex and a cell-wise
/// projection. Fibers have exactly `degree` cells per base cell.
#[derive(Clone, Debug)]
pub struct CoveringMap {
    pub base: CubeComplex,
    pub total: CubeComplex,
    pub proj: CellMap,
    pub degree: usize,
}

impl CoveringMap {
    pub fn fiber_vertices(&self, base_v: Vertex) -> Vec<Vertex> {
        (0..self.total.num_vertices())
            .filter(|&v| self.proj.vertex(v) == base_v)
            .collect()
    }

    /// The unique edge end at `total_v` over `base_end`, if the covering is
    /// valid.
    pub fn lift_end(&self, total_v: Vertex, base_end: EdgeEnd) -> Option<EdgeEnd> {
        self.total
            .ends_at(total_v)
            .into_iter()
            .find(|&end| self.proj.edge_end(end) == base_end)
    }

    /// Lifts a base path (sequence of departing edge ends) starting at
    /// `total_v`; returns the lifted ends and the terminal vertex.
    pub fn lift_path(&self, total_v: Vertex, path: &[EdgeEnd]) -> Option<(Vec<EdgeEnd>, Vertex)> {
        let mut cur = total_v;
        let mut out = Vec::with_capacity(path.len());
        for &step in path {
            let lifted = self.lift_end(cur, step)?;
            cur = self.total.edge_other(lifted);
            out.push(lifted);
        }
        Some((out, cur))
    }

    /// Degree-1 cover (the identity).
    pub fn trivial(base: &CubeComplex) -> CoveringMap {
        CoveringMap {
            base: base.clone(),
            total: base.clone(),
            proj: CellMap::identity(base),
            degree: 1,
        }
    }

    /// Full verification of the covering property: valid cell map, uniform
    /// fibers, and bijective link maps at every total vertex.
    pub fn verify(&self) -> Result<()> {
        self.proj.validate(&self.total, &self.base)?;
        for d in 0..self.base.cells.len() {
            let mut counts = vec![0usize; self.base.dim_count(d)];
            for (t, _) in &self.proj.cells[d] {
                counts[*t] += 1;
            }
            if counts.iter().any(|&c| c != self.degree) {
                return Err(Error::Internal(format!("fiber sizes over {d}-cells are not uniform")));
            }
        }
        let total_counts = self.total.corner_counts();
        let base_counts = self.base.corner_counts();
        for v in 0..self.total.num_vertices() {
            let ends = self.total.ends_at(v);
            let base_ends: BTreeSet<EdgeEnd> = ends.iter().map(|&e| self.proj.edge_end(e)).collect();
            if base_ends.len() != ends.len()
                || base_ends.len() != self.base.ends_at(self.proj.vertex(v)).len()
            {
                return Err(Error::Internal(format!("link map not bijective at total vertex {v}")));
            }
            // Corner simplices must also biject; counts suffice given end
            // bijectivity and facet compatibility of the projection.
            if total_counts[v] != base_counts[self.proj.vertex(v)] {
                return Err(Error::Internal(format!("link simplices differ at total vertex {v}")));
            }
        }
        Ok(())
    }
}

/// Builds the full (possibly disconnected) voltage cover. Vertex `(v, k)` is
/// numbered `v*m + k`; the lift of a cell is indexed by the sheet of its
/// corner 0.
pub fn cover_from_voltage(base: &NpcComplex, volt: &Voltage) -> Result<CoveringMap> {
    if !volt.is_valid() || volt.perms.len() != base.num_edges() {
        return Err(Error::Precondition("voltage shape does not match the complex".into()));
    }
    let m = volt.degree;
    let mut total = CubeComplex::new();
    let max_dim = base.max_dim();
    total.cells = vec![Vec::new(); max_dim + 1];
    for _ in 0..base.num_vertices() * m {
        total.add_vertex();
    }
    let mut proj_cells: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); max_dim + 1];
    proj_cells[0] = (0..base.num_vertices() * m).map(|v| (v / m, vec![0u8])).collect();

    if max_dim >= 1 {
        for e in 0..base.num_edges() {
            let (v0, v1) = base.edge_endpoints(e);
            for k in 0..m {
                let idx = total.add_edge(v0 * m + k, v1 * m + volt.perms[e][k]);
                debug_assert_eq!(idx, e * m + k);
                proj_cells[1].push((e, vec![0, 1]));
            }
        }
    }

    // Sheets of all corners of a lifted cell, from the corner-0 sheet.
    let corner_sheets = |d: usize, idx: usize, k0: usize| -> Result<Vec<usize>> {
        let mut sheets = vec![usize::MAX; 1 << d];
        sheets[0] = k0;
        for b in 1..1usize << d {
            let i = b.trailing_zeros() as usize;
            let b0 = b & !(1 << i);
            debug_assert!(sheets[b0] != usize::MAX);
            let end = base.cube_edge(d, idx, i, b0)?;
            sheets[b] = volt.transport(end.edge, end.end, sheets[b0]);
        }
        // All remaining edges of the cube must transport consistently.
        for i in 0..d {
            for b in 0..1usize << d {
                if (b >> i) & 1 == 1 {
                    continue;
                }
                let end = base.cube_edge(d, idx, i, b)?;
                if volt.transport(end.edge, end.end, sheets[b]) != sheets[b | (1 << i)] {
                    if d == 2 {
                        return Err(Error::SquareRelation { square: idx });
                    }
                    return Err(Error::Internal(format!(
                        "cube {d}:{idx} does not lift although its squares do"
                    )));
                }
            }
        }
        Ok(sheets)
    };

    for d in 2..=max_dim {
        for idx in 0..base.dim_count(d) {
            let cell = &base.cells[d][idx];
            for k in 0..m {
                let sheets = corner_sheets(d, idx, k)?;
                let corners: Vec<usize> =
                    (0..1usize << d).map(|b| cell.corners[b] * m + sheets[b]).collect();
                let mut facets = Vec::with_capacity(2 * d);
                for axis in 0..d {
                    for side in 0..2 {
                        let fr = &cell.facets[2 * axis + side];
                        let phi = CubeSym::from_perm(&fr.perm, d - 1).unwrap();
                        // corner 0 of the facet cell = intrinsic corner
                        // phi^{-1}(0); its parent corner carries the sheet.
                        let b0 = (0..1usize << (d - 1)).find(|&b| phi.apply(b) == 0).unwrap();
                        let sheet0 = sheets[insert_bit(b0, axis, side)];
                        facets.push(crate::complex::FacetRef {
                            cell: fr.cell * m + sheet0,
                            perm: fr.perm.clone(),
                        });
                    }
                }
                let new_idx = total.add_cell(d, corners, facets);
                debug_assert_eq!(new_idx, idx * m + k);
                proj_cells[d].push((idx, (0..1u8 << d as u8).collect()));
            }
        }
    }

    let cov = CoveringMap {
        base: base.raw().clone(),
        total,
        proj: CellMap { cells: proj_cells },
        degree: m,
    };
    cov.verify()?;
    Ok(cov)
}

/// Assembles a covering from an explicit lifted 1-skeleton: vertices given
/// by their base images and edge lifts `(base edge, lift of corner 0, lift
/// of corner 1)`. Higher cells are lifted by transporting corners through
/// the 1-skeleton; any failure to close a cell is an error carrying the base
/// cell id, since a genuine covering lifts every cell.
pub fn assemble_cover(
    base: &NpcComplex,
    vert_base: &[Vertex],
    edge_lifts: &[(usize, usize, usize)],
) -> Result<CoveringMap> {
    let max_dim = base.max_dim();
    let mut total = CubeComplex::new();
    total.cells = vec![Vec::new(); max_dim + 1];
    for _ in vert_base {
        total.add_vertex();
    }
    let mut proj_cells: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); max_dim + 1];
    proj_cells[0] = vert_base.iter().map(|&v| (v, vec![0u8])).collect();
    let mut end_lookup: HashMap<(Vertex, EdgeEnd), (usize, Vertex)> = HashMap::new();
    for &(be, v0, v1) in edge_lifts {
        let e = total.add_edge(v0, v1);
        proj_cells[1].push((be, vec![0, 1]));
        for (v, end, far) in [(v0, 0u8, v1), (v1, 1u8, v0)] {
            if end_lookup.insert((v, EdgeEnd { edge: be, end }), (e, far)).is_some() {
                return Err(Error::Internal(format!(
                    "two lifts of the same edge end at vertex {v}"
                )));
            }
        }
    }
    let mut lift_index: HashMap<(usize, usize, Vertex), usize> = HashMap::new();
    for d in 2..=max_dim {
        for bidx in 0..base.dim_count(d) {
            let bcell = &base.cells[d][bidx];
            for u in 0..total.num_vertices() {
                if proj_cells[0][u].0 != bcell.corners[0] {
                    continue;
                }
                let mut verts = vec![usize::MAX; 1 << d];
                verts[0] = u;
                for b in 1..1usize << d {
                    let i = b.trailing_zeros() as usize;
                    let b0 = b & !(1 << i);
                    let bend = base.cube_edge(d, bidx, i, b0)?;
                    let (_, far) = end_lookup.get(&(verts[b0], bend)).ok_or_else(|| {
                        Error::Internal(format!("cell {d}:{bidx} fails to lift at vertex {u}"))
                    })?;
                    verts[b] = *far;
                }
                for i in 0..d {
                    for b in 0..1usize << d {
                        if (b >> i) & 1 == 1 {
                            continue;
                        }
                        let bend = base.cube_edge(d, bidx, i, b)?;
                        let (_, far) = end_lookup.get(&(verts[b], bend)).ok_or_else(|| {
                            Error::Internal(format!("cell {d}:{bidx} fails to lift at vertex {u}"))
                        })?;
                        if *far != verts[b | (1 << i)] {
                            return Err(Error::Internal(format!(
                                "cell {d}:{bidx} boundary does not close over vertex {u}"
                            )));
                        }
                    }
                }
                let corners = verts.clone();
                let mut facets = Vec::with_capacity(2 * d);
                for axis in 0..d {
                    for side in 0..2 {
                        let fr = &bcell.facets[2 * axis + side];
                        let phi = CubeSym::from_perm(&fr.perm, d - 1).unwrap();
                        let b0 = (0..1usize << (d - 1)).find(|&b| phi.apply(b) == 0).unwrap();
                        let corner0 = verts[insert_bit(b0, axis, side)];
                        let cell = if d - 1 == 1 {
                            let b1 = (0..1usize << (d - 1)).find(|&b| phi.apply(b) == 1).unwrap();
                            let bend = EdgeEnd { edge: fr.cell, end: 0 };
                            let (e, far) = end_lookup[&(corner0, bend)];
                            if far != verts[insert_bit(b1, axis, side)] {
                                return Err(Error::Internal("facet lift mismatch".into()));
                            }
                            e
                        } else {
                            *lift_index.get(&(d - 1, fr.cell, corner0)).ok_or_else(|| {
                                Error::Internal("facet lift missing".into())
                            })?
                        };
                        facets.push(crate::complex::FacetRef { cell, perm: fr.perm.clone() });
                    }
                }
                let idx = total.add_cell(d, corners, facets);
                lift_index.insert((d, bidx, u), idx);
                proj_cells[d].push((bidx, (0..1u8 << d as u8).collect()));
            }
        }
    }
    let degree = vert_base.iter().filter(|&&v| v == vert_base[0]).count();
    let cov = CoveringMap {
        base: base.raw().clone(),
        total,
        proj: CellMap { cells: proj_cells },
        degree,
    };
    cov.verify()?;
    Ok(cov)
}

/// Restricts a covering to the component of `total_v`, renumbering cells
/// deterministically (by original index).
pub fn restrict_to_component(cov: &CoveringMap, total_v: Vertex) -> Result<CoveringMap> {
    let comp = cov.total.vertex_components();
    let keep = comp[total_v];
    let mut cells = BTreeSet::new();
    for id in cov.total.all_cells() {
        let inside = match id.dim {
            0 => comp[id.idx] == keep,
            _ => comp[cov.total.cells[id.dim][id.idx].corners[0]] == keep,
        };
        if inside {
            cells.insert(id);
        }
    }
    let sub = crate::complex::SubcomplexRef { cells };
    let (total, back) = sub.extract(&cov.total);
    let proj_cells = back
        .iter()
        .enumerate()
        .map(|(d, v)| v.iter().map(|&old| cov.proj.cells[d][old].clone()).collect())
        .collect();
    let proj = CellMap { cells: proj_cells };
    let degree = total
        .cells
        .first()
        .map(|verts| {
            let mut counts = BTreeMap::new();
            for c in verts.iter() {
                *counts.entry(proj.vertex(c.corners[0])).or_insert(0usize) += 1;
            }
            counts.values().copied().max().unwrap_or(0)
        })
        .unwrap_or(0);
    let out = CoveringMap { base: cov.base.clone(), total, proj, degree };
    out.verify()?;
    Ok(out)
}

/// Connected voltage cover through the lift `(vertex 0, sheet 0)`.
pub fn connected_voltage_cover(base: &NpcComplex, volt: &Voltage) -> Result<CoveringMap> {
    let full = cover_from_voltage(base, volt)?;
    restrict_to_component(&full, 0)
}

/// An elevation: a component of the pullback of a local isometry along a
/// covering, with its map into the total space and its descent covering onto
/// the original domain.
#[derive(Clone, Debug)]
pub struct Elevation {
    pub domain: CubeComplex,
    pub to_total: CellMap,
    pub descent: CellMap,
}

impl Elevation {
    /// Vertices of the elevation over a given domain vertex.
    pub fn fiber_over(&self, y: Vertex) -> Vec<Vertex> {
        (0..self.domain.num_vertices()).filter(|&v| self.descent.vertex(v) == y).collect()
    }
}

/// The full pullback of `li` along `cov`, before splitting into components:
/// returns the pullback complex plus the projections to the domain of `li`
/// and to the total space. Pullback cells are pairs, with corners indexed
/// like the domain cell's corners.
pub fn pullback(
    li: &LocalIso,
    cov: &CoveringMap,
) -> Result<(CubeComplex, CellMap, CellMap)> {
    let y = &li.domain;
    let t = &cov.total;
    let max_dim = y.max_dim().min(t.max_dim());
    let mut pb = CubeComplex::new();
    pb.cells = vec![Vec::new(); y.max_dim() + 1];
    let mut to_y: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); y.max_dim() + 1];
    let mut to_t: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); y.max_dim() + 1];
    // (y cell, t cell) -> pullback index, per dim
    let mut index: Vec<HashMap<(usize, usize), usize>> = vec![HashMap::new(); y.max_dim() + 1];

    for d in 0..=max_dim {
        for yi in 0..y.dim_count(d) {
            let (base_cell, ref yperm) = li.map.cells[d][yi];
            let ysym = CubeSym::from_perm(yperm, d).unwrap();
            for ti in 0..t.dim_count(d) {
                let (tbase, ref tperm) = cov.proj.cells[d][ti];
                if tbase != base_cell {
                    continue;
                }
                let tsym = CubeSym::from_perm(tperm, d).unwrap();
                // alignment: domain corner b -> total corner a with
                // tsym(a) == ysym(b)
                let tinv: Vec<usize> = {
                    let mut inv = vec![0; 1 << d];
                    for a in 0..1usize << d {
                        inv[tsym.apply(a)] = a;
                    }
                    inv
                };
                let align: Vec<usize> = (0..1usize << d).map(|b| tinv[ysym.apply(b)]).collect();
                if d == 0 {
                    let v = pb.add_vertex();
                    index[0].insert((yi, ti), v);
                    to_y[0].push((yi, vec![0]));
                    to_t[0].push((ti, vec![0]));
                    continue;
                }
                let corners: Vec<usize> = (0..1usize << d)
                    .map(|b| {
                        let yv = y.cells[d][yi].corners[b];
                        let tv = t.cells[d][ti].corners[align[b]];
                        index[0][&(yv, tv)]
                    })
                    .collect();
                let mut facets = Vec::with_capacity(2 * d);
                for axis in 0..d {
                    for side in 0..2 {
                        let yfr = &y.cells[d][yi].facets[2 * axis + side];
                        let t_axis = {
                            // the total slot over the same base slot
                            let b_axis = ysym.sigma[axis] as usize;
                            tsym.sigma.iter().position(|&a| a as usize == b_axis).unwrap()
                        };
                        let t_side = {
                            let b_side = side ^ (ysym.flip[axis] as usize);
                            b_side ^ (tsym.flip[t_axis] as usize)
                        };
                        let tfr = &t.cells[d][ti].facets[2 * t_axis + t_side];
                        let cell = index[d - 1][&(yfr.cell, tfr.cell)];
                        facets.push(crate::complex::FacetRef { cell, perm: yfr.perm.clone() });
                    }
                }
                let idx = pb.add_cell(d, corners, facets);
                index[d].insert((yi, ti), idx);
                to_y[d].push((yi, (0..1u8 << d as u8).collect()));
                // to_t perm = alignment
                to_t[d].push((ti, align.iter().map(|&a| a as u8).collect()));
            }
        }
    }
    Ok((pb, CellMap { cells: to_y }, CellMap { cells: to_t }))
}

/// All elevations of `li` along `cov`: the components of the pullback.
/// Each descent map is verified to be a covering of the domain of `li`.
pub fn elevations(li: &LocalIso, cov: &CoveringMap) -> Result<Vec<Elevation>> {
    let (pb, to_y, to_t) = pullback(li, cov)?;
    let comp = pb.vertex_components();
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    for c in 0..ncomp {
        let cells: BTreeSet<CellId> = pb
            .all_cells()
            .filter(|id| {
                let v = if id.dim == 0 { id.idx } else { pb.cells[id.dim][id.idx].corners[0] };
                comp[v] == c
            })
            .collect();
        let sub = crate::complex::SubcomplexRef { cells };
        let (domain, back) = sub.extract(&pb);
        let take = |m: &CellMap| -> CellMap {
            CellMap {
                cells: back
                    .iter()
                    .enumerate()
                    .map(|(d, v)| v.iter().map(|&old| m.cells[d][old].clone()).collect())
                    .collect(),
            }
        };
        let descent = take(&to_y);
        let to_total = take(&to_t);
        let elev = Elevation { domain, to_total, descent };
        verify_elevation(&elev, li, cov)?;
        out.push(elev);
    }
    Ok(out)
}

fn verify_elevation(elev: &Elevation, li: &LocalIso, cov: &CoveringMap) -> Result<()> {
    elev.descent.validate(&elev.domain, &li.domain)?;
    elev.to_total.validate(&elev.domain, &cov.total)?;
    // The square commutes.
    let via_y = elev.descent.then(&li.map);
    let via_t = elev.to_total.then(&cov.proj);
    if via_y != via_t {
        return Err(Error::Internal("elevation square does not commute".into()));
    }
    // Descent is a covering: uniform fibers and bijective link maps.
    let mut deg = None;
    for d in 0..li.domain.cells.len() {
        let mut counts = vec![0usize; li.domain.dim_count(d)];
        for (t, _) in elev.descent.cells.get(d).map(Vec::as_slice).unwrap_or(&[]) {
            counts[*t] += 1;
        }
        for &c in &counts {
            match deg {
                None => deg = Some(c),
                Some(d0) if d0 == c => {}
                _ => return Err(Error::Internal("elevation descent has non-uniform fibers".into())),
            }
        }
    }
    for v in 0..elev.domain.num_vertices() {
        let ends = elev.domain.ends_at(v);
        let imgs: BTreeSet<EdgeEnd> = ends.iter().map(|&e| elev.descent.edge_end(e)).collect();
        if imgs.len() != ends.len()
            || imgs.len() != li.domain.ends_at(elev.descent.vertex(v)).len()
        {
            return Err(Error::Internal("elevation descent is not a covering on links".into()));
        }
    }
    Ok(())
}

/// The based elevation through the vertex pair `(y0, total_v)`.
pub fn based_elevation(
    li: &LocalIso,
    cov: &CoveringMap,
    y0: Vertex,
    total_v: Vertex,
) -> Result<(Elevation, Vertex)> {
    if li.map.vertex(y0) != cov.proj.vertex(total_v) {
        return Err(Error::Precondition("basepoint images do not match".into()));
    }
    let all = elevations(li, cov)?;
    for elev in all {
        if let Some(v) = (0..elev.domain.num_vertices())
            .find(|&v| elev.descent.vertex(v) == y0 && elev.to_total.vertex(v) == total_v)
        {
            return Ok((elev, v));
        }
    }
    Err(Error::Internal("based elevation not found in pullback".into()))
}

/// Fiber product of finitely many covers of the same base: the component of
/// the product of fibers through the canonical basepoint lifts (smallest
/// vertex indices over base vertex 0).
pub fn fiber_product(covers: &[&CoveringMap]) -> Result<CoveringMap> {
    if covers.is_empty() {
        return Err(Error::Precondition("fiber product of an empty family".into()));
    }
    for w in covers.windows(2) {
        if w[0].base != w[1].base {
            return Err(Error::Precondition("fiber product over mismatched bases".into()));
        }
    }
    let mut acc: CoveringMap = (*covers[0]).clone();
    for &next in &covers[1..] {
        let li = LocalIso { domain: acc.total.clone(), map: acc.proj.clone() };
        let (pb, to_acc, to_next) = pullback(&li, next)?;
        // Basepoint: smallest pair over base vertex 0.
        let base_v = 0;
        let acc_lift = (0..acc.total.num_vertices())
            .find(|&v| acc.proj.vertex(v) == base_v)
            .ok_or_else(|| Error::Internal("cover misses a base vertex".into()))?;
        let next_lift = (0..next.total.num_vertices())
            .find(|&v| next.proj.vertex(v) == base_v)
            .ok_or_else(|| Error::Internal("cover misses a base vertex".into()))?;
        let seed = (0..pb.num_vertices())
            .find(|&v| to_acc.vertex(v) == acc_lift && to_next.vertex(v) == next_lift)
            .ok_or_else(|| Error::Internal("fiber product basepoint missing".into()))?;
        let comp = pb.vertex_components();
        let keep = comp[seed];
        let cells: BTreeSet<CellId> = pb
            .all_cells()
            .filter(|id| {
                let v = if id.dim == 0 { id.idx } else { pb.cells[id.dim][id.idx].corners[0] };
                comp[v] == keep
            })
            .collect();
        let (total, back) = crate::complex::SubcomplexRef { cells }.extract(&pb);
        let proj_cells = back
            .iter()
            .enumerate()
            .map(|(d, v)| {
                v.iter()
                    .map(|&old| {
                        let (a, ref pa) = to_acc.cells[d][old];
                        let (b, ref pb2) = acc.proj.cells[d][a];
                        let comp: Vec<u8> = pa.iter().map(|&c| pb2[c as usize]).collect();
                        let _ = b;
                        (b, comp)
                    })
                    .collect()
            })
            .collect();
        let proj = CellMap { cells: proj_cells };
        let degree = (0..total.num_vertices()).filter(|&v| proj.vertex(v) == 0).count();
        acc = CoveringMap { base: acc.base.clone(), total, proj, degree };
        acc.verify()?;
    }
    Ok(acc)
}

/// Finds the covering morphism `fine.total -> coarse.total` over the base
/// sending `fine_lift` to `coarse_lift`, if it exists.
pub fn factor_through(
    fine: &CoveringMap,
    coarse: &CoveringMap,
    fine_lift: Vertex,
    coarse_lift: Vertex,
) -> Option<CellMap> {
    if fine.proj.vertex(fine_lift) != coarse.proj.vertex(coarse_lift) {
        return None;
    }
    let n = fine.total.num_vertices();
    let mut f = vec![usize::MAX; n];
    f[fine_lift] = coarse_lift;
    let mut stack = vec![fine_lift];
    while let Some(u) = stack.pop() {
        for end in fine.total.ends_at(u) {
            let base_end = fine.proj.edge_end(end);
            let img_end = coarse.lift_end(f[u], base_end)?;
            let w = fine.total.edge_other(end);
            let cw = coarse.total.edge_other(img_end);
            if f[w] == usize::MAX {
                f[w] = cw;
                stack.push(w);
            } else if f[w] != cw {
                return None;
            }
        }
    }
    if f.iter().any(|&v| v == usize::MAX) {
        return None;
    }
    // Extend over all cells: a cell maps to the unique coarse cell over the
    // same base cell whose corners match.
    let mut cells: Vec<Vec<(usize, Vec<u8>)>> = Vec::with_capacity(fine.total.cells.len());
    cells.push(f.iter().map(|&v| (v, vec![0u8])).collect());
    for d in 1..fine.total.cells.len() {
        let mut layer = Vec::with_capacity(fine.total.dim_count(d));
        for i in 0..fine.total.dim_count(d) {
            let (bcell, ref fperm) = fine.proj.cells[d][i];
            let fcorners: Vec<usize> =
                fine.total.cells[d][i].corners.iter().map(|&v| f[v]).collect();
            let mut found = None;
            for j in 0..coarse.total.dim_count(d) {
                let (bc2, ref cperm) = coarse.proj.cells[d][j];
                if bc2 != bcell {
                    continue;
                }
                // alignment via base perms
                let fsym = CubeSym::from_perm(fperm, d).unwrap();
                let csym = CubeSym::from_perm(cperm, d).unwrap();
                let cinv: Vec<usize> = {
                    let mut inv = vec![0; 1 << d];
                    for a in 0..1usize << d {
                        inv[csym.apply(a)] = a;
                    }
                    inv
                };
                let align: Vec<u8> = (0..1usize << d).map(|b| cinv[fsym.apply(b)] as u8).collect();
                let ok = (0..1usize << d)
                    .all(|b| coarse.total.cells[d][j].corners[align[b] as usize] == fcorners[b]);
                if ok {
                    found = Some((j, align));
                    break;
                }
            }
            layer.push(found?);
        }
        cells.push(layer);
    }
    let map = CellMap { cells };
    map.validate(&fine.total, &coarse.total).ok()?;
    Some(map)
}

/// Extracts a tree-normalized voltage presentation of a connected cover:
/// fibers are labelled by sorted total-vertex order and each edge records
/// its sheet transport. Reconstructing via `connected_voltage_cover` yields
/// a cover isomorphic over the base.
pub fn to_voltage(cov: &CoveringMap) -> Result<Voltage> {
    let m = cov.degree;
    let mut slot: HashMap<Vertex, usize> = HashMap::new();
    for bv in 0..cov.base.num_vertices() {
        for (i, tv) in cov.fiber_vertices(bv).into_iter().enumerate() {
            slot.insert(tv, i);
        }
    }
    let mut perms = Vec::with_capacity(cov.base.num_edges());
    for e in 0..cov.base.num_edges() {
        let (u, _) = cov.base.edge_endpoints(e);
        let mut perm = vec![usize::MAX; m];
        for tu in cov.fiber_vertices(u) {
            let end = cov
                .lift_end(tu, EdgeEnd { edge: e, end: 0 })
                .ok_or_else(|| Error::Internal("edge lift missing".into()))?;
            let tv = cov.total.edge_other(end);
            perm[slot[&tu]] = slot[&tv];
        }
        if perm.iter().any(|&p| p == usize::MAX) {
            return Err(Error::Internal("fiber labelling incomplete".into()));
        }
        perms.push(perm);
    }
    Ok(Voltage { degree: m, perms })
}

/// Monodromy data of a cover: permutations of the fiber over base vertex 0,
/// one generator per base edge (tree edges give the identity).
pub struct Monodromy {
    pub fiber: Vec<Vertex>,
    pub edge_action: Vec<Vec<usize>>,
}

pub fn monodromy(cov: &CoveringMap) -> Result<Monodromy> {
    let base = &cov.base;
    let fiber = cov.fiber_vertices(0);
    let slot: HashMap<Vertex, usize> = fiber.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // BFS tree paths from base vertex 0.
    let n = base.num_vertices();
    let mut parent: Vec<Option<EdgeEnd>> = vec![None; n];
    let mut order = vec![0usize; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut cnt = 0;
    while let Some(u) = queue.pop_front() {
        order[u] = cnt;
        cnt += 1;
        for end in base.ends_at(u) {
            let w = base.edge_other(end);
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(end);
                queue.push_back(w);
            }
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Precondition("base complex is disconnected".into()));
    }
    let tree_path = |mut v: Vertex| -> Vec<EdgeEnd> {
        let mut rev = Vec::new();
        while let Some(end) = parent[v] {
            rev.push(end);
            v = cov.base.edge_end_vertex(end);
        }
        rev.reverse();
        rev
    };
    let transport = |start: Vertex, path: &[EdgeEnd]| -> Result<Vertex> {
        cov.lift_path(start, path)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Internal("path lift failed in a verified cover".into()))
    };
    let mut edge_action = Vec::with_capacity(base.num_edges());
    for e in 0..base.num_edges() {
        let (u, w) = base.edge_endpoints(e);
        let to_u = tree_path(u);
        let mut from_w = tree_path(w);
        from_w.reverse();
        let back: Vec<EdgeEnd> = from_w
            .iter()
            .map(|&end| EdgeEnd { edge: end.edge, end: 1 - end.end })
            .collect();
        let mut act = Vec::with_capacity(fiber.len());
        for &start in &fiber {
            let a = transport(start, &to_u)?;
            let lifted = cov
                .lift_end(a, EdgeEnd { edge: e, end: 0 })
                .ok_or_else(|| Error::Internal("edge lift failed".into()))?;
            let b = cov.total.edge_other(lifted);
            let c = transport(b, &back)?;
            act.push(slot[&c]);
        }
        edge_action.push(act);
    }
    Ok(Monodromy { fiber, edge_action })
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // apply a first, then b
    a.iter().map(|&i| b[i]).collect()
}

/// Closure of the monodromy generators; elements in discovery order with the
/// identity first. Errors if the group exceeds `cap`.
pub fn monodromy_group(gens: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>> {
    let deg = gens.first().map(|g| g.len()).unwrap_or(0);
    let id: Vec<usize> = (0..deg).collect();
    let mut elems = vec![id.clone()];
    let mut index: BTreeSet<Vec<usize>> = BTreeSet::from([id]);
    let mut frontier = 0usize;
    while frontier < elems.len() {
        let cur = elems[frontier].clone();
        frontier += 1;
        for g in gens {
            let next = compose(&cur, g);
            if index.insert(next.clone()) {
                if elems.len() >= cap {
                    return Err(Error::Budget(format!("monodromy group exceeds cap {cap}")));
                }
                elems.push(next);
            }
        }
    }
    Ok(elems)
}

/// The regular cover corresponding to the normal core of the monodromy point
/// stabilizer: the deck group acts transitively on fibers and the result
/// factors through the input.
pub fn regularize(base: &NpcComplex, cov: &CoveringMap, cap: usize) -> Result<CoveringMap> {
    let mono = monodromy(cov)?;
    let group = monodromy_group(&mono.edge_action, cap)?;
    let gidx: BTreeMap<Vec<usize>, usize> = group
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    let m = group.len();
    // Voltage over the base: crossing edge e maps group element x to x*g_e
    // (apply x first, then g_e).
    let perms: Vec<Vec<usize>> = (0..base.num_edges())
        .map(|e| {
            (0..m)
                .map(|i| gidx[&compose(&group[i], &mono.edge_action[e])])
                .collect()
        })
        .collect();
    let volt = Voltage { degree: m, perms };
    let reg = cover_from_voltage(base, &volt)?;
    // Connected by construction (the group is generated by the voltages);
    // still restrict for safety.
    let reg = restrict_to_component(&reg, 0)?;
    // Must factor through the input.
    let coarse_lift = mono.fiber[0];
    if factor_through(&reg, cov, 0, coarse_lift).is_none() {
        return Err(Error::Internal("regularization does not factor through the input".into()));
    }
    Ok(reg)
}

/// Whether a cover is regular: the deck action is transitive on the fiber,
/// i.e. the monodromy point stabilizer is normal.
pub fn is_regular(cov: &CoveringMap, cap: usize) -> Result<bool> {
    let mono = monodromy(cov)?;
    let group = monodromy_group(&mono.edge_action, cap)?;
    // Stabilizer of slot 0 normal <=> orbits of the stabilizer are blocks;
    // equivalently every element fixing 0 fixes all slots it can be
    // conjugated onto. Direct check: for g in group, h in stab0, g^-1 h g
    // fixes 0.
    let stab0: Vec<&Vec<usize>> = group.iter().filter(|g| g[0] == 0).collect();
    for g in &group {
        let mut ginv = vec![0; g.len()];
        for (i, &j) in g.iter().enumerate() {
            ginv[j] = i;
        }
        for h in &stab0 {
            let conj = compose(&compose(&ginv, h), g);
            if conj[0] != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
