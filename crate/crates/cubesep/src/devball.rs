//! Bounded-radius development of universal covers.
//!
//! `develop(X, basepoint, R)` builds the radius-`R` combinatorial ball of
//! the universal cover of a finite NPC complex: BFS expansion of edge lifts,
//! with eager square-corner closure and folding to perform the forced
//! identifications, then higher cube lifts filled from the 1-skeleton.
//!
//! The result is certified rather than trusted: after construction every
//! vertex at distance < R must have its link isomorphic to the base link
//! (the covering property on the interior), and distances are recomputed by
//! BFS. Cells incident only to frontier vertices (distance exactly R) are
//! best effort; geometric operations certify their answers with explicit
//! interior margins and return `RadiusExhausted` otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::complex::{insert_bit, CellId, CubeComplex, CubeSym, EdgeEnd, NpcComplex, SubcomplexRef, Vertex};
use crate::hyperplane::{edge_to_hyperplane, hyperplanes_raw, Hyperplane};
use crate::maps::{CellMap, LocalIso};
use crate::{Error, Result};

/// A developed ball of the universal cover.
#[derive(Clone, Debug)]
pub struct DevBall {
    pub base: CubeComplex,
    pub basepoint: Vertex,
    pub radius: usize,
    pub complex: CubeComplex,
    /// Projection to the base (identity corner perms by construction).
    pub proj: CellMap,
    /// Distance from the developed basepoint, per vertex.
    pub dist: Vec<usize>,
    /// The developed basepoint.
    pub center: Vertex,
    /// Hyperplanes of the developed complex (ball-local classes).
    pub hyperplanes: Vec<Hyperplane>,
    /// edge -> ball hyperplane id
    pub e2h: Vec<usize>,
}

struct Builder<'a> {
    base: &'a CubeComplex,
    radius: usize,
    base_v: Vec<Vertex>,
    dist: Vec<usize>,
    parent: Vec<usize>,
    // (base edge, dv over corner 0, dv over corner 1); dead = None
    edges: Vec<Option<(usize, usize, usize)>>,
    // square corner table: per base vertex, tuples
    corners: HashMap<Vertex, Vec<SquareCorner>>,
}

#[derive(Clone, Copy)]
struct SquareCorner {
    end_a: EdgeEnd,
    end_b: EdgeEnd,
    // ends at the adjacent corners leading to the far corner
    far_a: EdgeEnd,
    far_b: EdgeEnd,
}

impl<'a> Builder<'a> {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn merge(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the representative with smaller distance, then smaller index
        let keep = if (self.dist[ra], ra) <= (self.dist[rb], rb) { ra } else { rb };
        let drop = ra ^ rb ^ keep;
        self.parent[drop] = keep;
        true
    }

    fn new_vertex(&mut self, base_v: Vertex, dist: usize) -> usize {
        let id = self.base_v.len();
        self.base_v.push(base_v);
        self.dist.push(dist);
        self.parent.push(id);
        id
    }

    /// Map (canonical vertex, base end) -> edge id, folding duplicates.
    /// Returns true if anything merged.
    fn fold(&mut self) -> bool {
        let mut changed = false;
        loop {
            let mut ends: HashMap<(usize, EdgeEnd), usize> = HashMap::new();
            let mut merge_pair: Option<(usize, usize, usize)> = None;
            for ei in 0..self.edges.len() {
                let Some((be, a, b)) = self.edges[ei] else { continue };
                let (ca, cb) = (self.find(a), self.find(b));
                self.edges[ei] = Some((be, ca, cb));
                for (v, end) in [(ca, 0u8), (cb, 1u8)] {
                    let key = (v, EdgeEnd { edge: be, end });
                    if let Some(&other) = ends.get(&key) {
                        if other != ei {
                            merge_pair = Some((other, ei, end as usize));
                            break;
                        }
                    } else {
                        ends.insert(key, ei);
                    }
                }
                if merge_pair.is_some() {
                    break;
                }
            }
            match merge_pair {
                None => break,
                Some((e1, e2, end)) => {
                    // same base end at the same vertex: identify far vertices
                    // and drop the duplicate edge
                    let (_, a1, b1) = self.edges[e1].unwrap();
                    let (_, a2, b2) = self.edges[e2].unwrap();
                    let (far1, far2) = if end == 0 { (b1, b2) } else { (a1, a2) };
                    self.merge(far1, far2);
                    // after merging far ends the two lifts coincide
                    self.edges[e2] = None;
                    changed = true;
                }
            }
        }
        changed
    }

    fn end_table(&mut self) -> HashMap<(usize, EdgeEnd), usize> {
        let mut ends = HashMap::new();
        for ei in 0..self.edges.len() {
            let Some((be, a, b)) = self.edges[ei] else { continue };
            let (ca, cb) = (self.find(a), self.find(b));
            ends.insert((ca, EdgeEnd { edge: be, end: 0 }), ei);
            ends.insert((cb, EdgeEnd { edge: be, end: 1 }), ei);
        }
        ends
    }

    fn far_vertex(&mut self, ei: usize, from_end: u8) -> usize {
        let (_, a, b) = self.edges[ei].unwrap();
        let v = if from_end == 0 { b } else { a };
        self.find(v)
    }

    fn expand(&mut self) -> bool {
        let ends = self.end_table();
        let mut changed = false;
        let mut new_edges = Vec::new();
        for v in 0..self.base_v.len() {
            if self.find(v) != v || self.dist[v] >= self.radius {
                continue;
            }
            for bend in self.base.ends_at(self.base_v[v]) {
                if ends.contains_key(&(v, bend)) {
                    continue;
                }
                if new_edges.iter().any(|&(_, vv, ee)| vv == v && ee == bend) {
                    continue;
                }
                new_edges.push((self.base.edge_other(bend), v, bend));
                changed = true;
            }
        }
        for (far_base, v, bend) in new_edges {
            let w = self.new_vertex(far_base, self.dist[v] + 1);
            let (a, b) = if bend.end == 0 { (v, w) } else { (w, v) };
            self.edges.push(Some((bend.edge, a, b)));
        }
        changed
    }

    /// Close liftable square corners: merge the two routes to the far corner
    /// or create the single missing far edge.
    fn close_squares(&mut self) -> bool {
        let mut changed = false;
        loop {
            let ends = self.end_table();
            let mut act: Option<SquareAction> = None;
            'outer: for v in 0..self.base_v.len() {
                if self.find(v) != v {
                    continue;
                }
                let bv = self.base_v[v];
                let Some(corners) = self.corners.get(&bv).cloned() else { continue };
                for sc in corners {
                    let Some(&ea) = ends.get(&(v, sc.end_a)) else { continue };
                    let Some(&eb) = ends.get(&(v, sc.end_b)) else { continue };
                    let a = self.far_vertex(ea, sc.end_a.end);
                    let b = self.far_vertex(eb, sc.end_b.end);
                    let la = ends.get(&(a, sc.far_a)).copied();
                    let lb = ends.get(&(b, sc.far_b)).copied();
                    match (la, lb) {
                        (Some(e1), Some(e2)) => {
                            let f1 = self.far_vertex(e1, sc.far_a.end);
                            let f2 = self.far_vertex(e2, sc.far_b.end);
                            if f1 != f2 {
                                act = Some(SquareAction::Merge(f1, f2));
                                break 'outer;
                            }
                        }
                        (Some(e1), None) => {
                            let f1 = self.far_vertex(e1, sc.far_a.end);
                            act = Some(SquareAction::AddEdge(b, sc.far_b, f1));
                            break 'outer;
                        }
                        (None, Some(e2)) => {
                            let f2 = self.far_vertex(e2, sc.far_b.end);
                            act = Some(SquareAction::AddEdge(a, sc.far_a, f2));
                            break 'outer;
                        }
                        (None, None) => {}
                    }
                }
            }
            match act {
                None => break,
                Some(SquareAction::Merge(a, b)) => {
                    self.merge(a, b);
                    self.fold();
                    changed = true;
                }
                Some(SquareAction::AddEdge(from, bend, to)) => {
                    let (a, b) = if bend.end == 0 { (from, to) } else { (to, from) };
                    self.edges.push(Some((bend.edge, a, b)));
                    self.fold();
                    changed = true;
                }
            }
        }
        changed
    }
}

enum SquareAction {
    Merge(usize, usize),
    AddEdge(usize, EdgeEnd, usize),
}

/// Develops the radius-`radius` ball of the universal cover of `base` at
/// `basepoint`. Deterministic: cells are renumbered by (distance, base id,
/// creation order).
pub fn develop(base: &NpcComplex, basepoint: Vertex, radius: usize) -> Result<DevBall> {
    if basepoint >= base.num_vertices() {
        return Err(Error::Precondition("basepoint out of range".into()));
    }
    let corners = square_corner_table(base.raw())?;
    let mut b = Builder {
        base: base.raw(),
        radius,
        base_v: Vec::new(),
        dist: Vec::new(),
        parent: Vec::new(),
        edges: Vec::new(),
        corners,
    };
    b.new_vertex(basepoint, 0);

    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > 10_000 {
            return Err(Error::Internal("development did not converge".into()));
        }
        let e = b.expand();
        b.fold();
        let s = b.close_squares();
        // Refresh distances: BFS over current 1-skeleton, since merges may
        // have shortened creation paths.
        let improved = refresh_dists(&mut b);
        if !e && !s && !improved {
            break;
        }
    }

    // Compact the 1-skeleton.
    let mut alive: Vec<usize> = (0..b.base_v.len()).filter(|&v| b.find(v) == v).collect();
    alive.sort_by_key(|&v| (b.dist[v], b.base_v[v], v));
    let old2new: HashMap<usize, usize> = alive.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut complex = CubeComplex::new();
    let max_dim = base.max_dim();
    complex.cells = vec![Vec::new(); max_dim + 1];
    let mut proj0 = Vec::new();
    for &v in &alive {
        complex.add_vertex();
        proj0.push((b.base_v[v], vec![0u8]));
    }
    let mut dist: Vec<usize> = alive.iter().map(|&v| b.dist[v]).collect();
    let mut proj1 = Vec::new();
    let mut edge_list: Vec<(usize, usize, usize)> = Vec::new();
    for e in b.edges.iter().flatten() {
        let (be, a, bb) = *e;
        edge_list.push((be, a, bb));
    }
    // canonicalize endpoints and sort deterministically
    let mut canon_edges: Vec<(usize, usize, usize)> = Vec::new();
    {
        let mut seen = BTreeSet::new();
        for (be, a, bb) in edge_list {
            let (ca, cb) = (b.find(a), b.find(bb));
            let t = (be, old2new[&ca], old2new[&cb]);
            if seen.insert(t) {
                canon_edges.push(t);
            }
        }
    }
    canon_edges.sort_by_key(|&(be, a, bb)| (a.min(bb), be, a, bb));
    for (be, a, bb) in &canon_edges {
        complex.add_edge(*a, *bb);
        proj1.push((*be, vec![0u8, 1u8]));
    }
    let mut proj_cells = vec![proj0, proj1];

    // end lookup in the compacted complex
    let mut end_lookup: HashMap<(Vertex, EdgeEnd), EdgeEnd> = HashMap::new();
    for (i, (be, a, bb)) in canon_edges.iter().enumerate() {
        end_lookup.insert((*a, EdgeEnd { edge: *be, end: 0 }), EdgeEnd { edge: i, end: 0 });
        end_lookup.insert((*bb, EdgeEnd { edge: *be, end: 1 }), EdgeEnd { edge: i, end: 1 });
    }

    // Fill higher cells from the 1-skeleton: a lift exists wherever all
    // corner transports are defined and consistent.
    // dev_index: (dim, base idx, dev corner-0 vertex) -> dev cell idx
    let mut dev_index: HashMap<(usize, usize, Vertex), usize> = HashMap::new();
    for d in 2..=max_dim {
        let mut layer_proj = Vec::new();
        for bidx in 0..base.dim_count(d) {
            let bcell = &base.cells[d][bidx];
            'lift: for u in 0..complex.num_vertices() {
                if proj_cells[0][u].0 != bcell.corners[0] {
                    continue;
                }
                let mut verts = vec![usize::MAX; 1 << d];
                verts[0] = u;
                for bb in 1..1usize << d {
                    let i = bb.trailing_zeros() as usize;
                    let b0 = bb & !(1 << i);
                    let bend = base.cube_edge(d, bidx, i, b0)?;
                    match end_lookup.get(&(verts[b0], bend)) {
                        Some(&de) => verts[bb] = complex.edge_other(de),
                        None => continue 'lift,
                    }
                }
                // all cube edges must be consistent
                for i in 0..d {
                    for bb in 0..1usize << d {
                        if (bb >> i) & 1 == 1 {
                            continue;
                        }
                        let bend = base.cube_edge(d, bidx, i, bb)?;
                        match end_lookup.get(&(verts[bb], bend)) {
                            Some(&de) => {
                                if complex.edge_other(de) != verts[bb | (1 << i)] {
                                    return Err(Error::Internal(
                                        "inconsistent cube transport after development".into(),
                                    ));
                                }
                            }
                            None => continue 'lift,
                        }
                    }
                }
                let corners: Vec<usize> = verts.clone();
                let mut facets = Vec::with_capacity(2 * d);
                let mut all = true;
                for axis in 0..d {
                    for side in 0..2 {
                        let fr = &bcell.facets[2 * axis + side];
                        if d - 1 == 1 {
                            // edge facet: look up the developed edge
                            let phi = CubeSym::from_perm(&fr.perm, 1).unwrap();
                            let b0 = if phi.apply(0) == 0 { 0 } else { 1 };
                            let pc0 = insert_bit(b0, axis, side);
                            let pc1 = insert_bit(1 - b0, axis, side);
                            let bend = EdgeEnd { edge: fr.cell, end: 0 };
                            match end_lookup.get(&(verts[pc0], bend)) {
                                Some(&de) if complex.edge_other(de) == verts[pc1] => {
                                    facets.push(crate::complex::FacetRef {
                                        cell: de.edge,
                                        perm: fr.perm.clone(),
                                    });
                                }
                                _ => {
                                    all = false;
                                }
                            }
                        } else {
                            let phi = CubeSym::from_perm(&fr.perm, d - 1).unwrap();
                            let b0 = (0..1usize << (d - 1)).find(|&bb| phi.apply(bb) == 0).unwrap();
                            let corner0 = verts[insert_bit(b0, axis, side)];
                            match dev_index.get(&(d - 1, fr.cell, corner0)) {
                                Some(&idx) => facets.push(crate::complex::FacetRef {
                                    cell: idx,
                                    perm: fr.perm.clone(),
                                }),
                                None => {
                                    all = false;
                                }
                            }
                        }
                    }
                }
                if !all {
                    continue 'lift;
                }
                if dev_index.contains_key(&(d, bidx, u)) {
                    continue 'lift;
                }
                let idx = complex.add_cell(d, corners, facets);
                dev_index.insert((d, bidx, u), idx);
                layer_proj.push((bidx, (0..1u8 << d as u8).collect::<Vec<u8>>()));
            }
        }
        proj_cells.push(layer_proj);
    }

    let proj = CellMap { cells: proj_cells };
    proj.validate(&complex, base.raw())
        .map_err(|e| Error::Internal(format!("developed projection invalid: {e}")))?;

    // Certification: distances by BFS, covering property on the interior.
    let center = (0..complex.num_vertices())
        .find(|&v| dist[v] == 0)
        .ok_or_else(|| Error::Internal("lost the center".into()))?;
    let bfs = bfs_distances(&complex, center);
    for v in 0..complex.num_vertices() {
        if bfs[v] > dist[v] {
            return Err(Error::Internal("stored distance below BFS distance".into()));
        }
        dist[v] = bfs[v];
        if dist[v] > radius {
            return Err(Error::Internal("development exceeded the radius".into()));
        }
    }
    let dev_counts = complex.corner_counts();
    let base_counts = base.corner_counts();
    for v in 0..complex.num_vertices() {
        if dist[v] + 1 > radius {
            continue;
        }
        if complex.ends_at(v).len() != base.ends_at(proj.vertex(v)).len() {
            return Err(Error::Internal(format!(
                "interior vertex {v} has incomplete link after development"
            )));
        }
        if dist[v] + 2 <= radius && dev_counts[v] != base_counts[proj.vertex(v)] {
            return Err(Error::Internal(format!(
                "interior vertex {v} missing cube corners after development"
            )));
        }
    }
    if !complex.validate_structure().is_empty() {
        return Err(Error::Internal("developed complex is structurally invalid".into()));
    }

    let hyperplanes = hyperplanes_raw(&complex)?;
    let e2h = edge_to_hyperplane(&hyperplanes, complex.num_edges());
    Ok(DevBall {
        base: base.raw().clone(),
        basepoint,
        radius,
        complex,
        proj,
        dist,
        center,
        hyperplanes,
        e2h,
    })
}

fn refresh_dists(b: &mut Builder) -> bool {
    // BFS over canonical vertices
    let n = b.base_v.len();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in b.edges.clone().iter().flatten() {
        let (_, x, y) = *e;
        let (cx, cy) = (b.find(x), b.find(y));
        adj.entry(cx).or_default().push(cy);
        adj.entry(cy).or_default().push(cx);
    }
    let root = b.find(0);
    let mut nd = vec![usize::MAX; n];
    nd[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        if let Some(nexts) = adj.get(&u) {
            for &w in nexts {
                if nd[w] == usize::MAX {
                    nd[w] = nd[u] + 1;
                    q.push_back(w);
                }
            }
        }
    }
    let mut improved = false;
    for v in 0..n {
        if b.find(v) == v && nd[v] != usize::MAX && nd[v] < b.dist[v] {
            b.dist[v] = nd[v];
            improved = true;
        }
    }
    improved
}

fn square_corner_table(base: &CubeComplex) -> Result<HashMap<Vertex, Vec<SquareCorner>>> {
    let mut out: HashMap<Vertex, Vec<SquareCorner>> = HashMap::new();
    for sq in 0..base.dim_count(2) {
        for b in 0..4usize {
            let v = base.cells[2][sq].corners[b];
            let end_a = base.cube_edge(2, sq, 0, b)?;
            let end_b = base.cube_edge(2, sq, 1, b)?;
            let far_a = base.cube_edge(2, sq, 1, b ^ 1)?;
            let far_b = base.cube_edge(2, sq, 0, b ^ 2)?;
            out.entry(v).or_default().push(SquareCorner { end_a, end_b, far_a, far_b });
        }
    }
    Ok(out)
}

pub fn bfs_distances(x: &CubeComplex, from: Vertex) -> Vec<usize> {
    let mut d = vec![usize::MAX; x.num_vertices()];
    d[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(u) = q.pop_front() {
        for end in x.ends_at(u) {
            let w = x.edge_other(end);
            if d[w] == usize::MAX {
                d[w] = d[u] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

impl DevBall {
    pub fn is_frontier(&self, v: Vertex) -> bool {
        self.dist[v] >= self.radius
    }

    /// Unique lift of a base edge end at a developed vertex, when present.
    pub fn lift_end(&self, v: Vertex, base_end: EdgeEnd) -> Option<EdgeEnd> {
        self.complex
            .ends_at(v)
            .into_iter()
            .find(|&end| self.proj.edge_end(end) == base_end)
    }

    pub fn lift_path(&self, from: Vertex, path: &[EdgeEnd]) -> Option<(Vec<EdgeEnd>, Vertex)> {
        let mut cur = from;
        let mut out = Vec::with_capacity(path.len());
        for &step in path {
            let lifted = self.lift_end(cur, step)?;
            cur = self.complex.edge_other(lifted);
            out.push(lifted);
        }
        Some((out, cur))
    }

    /// The developed cell over `base_cell` with the given corner vertices.
    pub fn cell_with_corners(&self, base_cell: CellId, corners: &[Vertex]) -> Option<usize> {
        (0..self.complex.dim_count(base_cell.dim)).find(|&i| {
            self.proj.cells[base_cell.dim][i].0 == base_cell.idx
                && self.complex.cells[base_cell.dim][i].corners == corners
        })
    }

    /// Develops the based elevation of a local isometry into the ball,
    /// starting from `dom_v -> at`. Completeness means the whole elevation
    /// (vertices, edges and cube lifts) closed up inside the ball.
    pub fn develop_elevation(&self, li: &LocalIso, dom_v: Vertex, at: Vertex) -> Result<BallElevation> {
        if li.map.vertex(dom_v) != self.proj.vertex(at) {
            return Err(Error::Precondition("elevation basepoint images do not match".into()));
        }
        let mut pair_index: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
        let mut pairs: Vec<(Vertex, Vertex)> = Vec::new();
        let mut complete = true;
        let mut queue = VecDeque::new();
        pair_index.insert((dom_v, at), 0);
        pairs.push((dom_v, at));
        queue.push_back(0usize);
        let mut edge_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        while let Some(pi) = queue.pop_front() {
            let (y, v) = pairs[pi];
            for dend in li.domain.ends_at(y) {
                let bend = li.map.edge_end(dend);
                match self.lift_end(v, bend) {
                    None => complete = false,
                    Some(de) => {
                        edge_pairs.insert((dend.edge, de.edge));
                        let (yw, vw) = (li.domain.edge_other(dend), self.complex.edge_other(de));
                        if !pair_index.contains_key(&(yw, vw)) {
                            pair_index.insert((yw, vw), pairs.len());
                            pairs.push((yw, vw));
                            queue.push_back(pairs.len() - 1);
                        }
                    }
                }
            }
        }
        // Ball-side injectivity: elevations to a universal cover embed.
        let mut ball_verts = BTreeSet::new();
        for &(_, v) in &pairs {
            if !ball_verts.insert(v) {
                return Err(Error::Internal(
                    "elevation not embedded in the developed ball".into(),
                ));
            }
        }
        // image subcomplex: developed lifts of all domain cells
        let mut cells: BTreeSet<CellId> = ball_verts.iter().map(|&v| CellId::new(0, v)).collect();
        for &(_, be) in &edge_pairs {
            cells.insert(CellId::new(1, be));
        }
        for d in 2..li.domain.cells.len() {
            for (di, cell) in li.domain.cells[d].iter().enumerate() {
                let (bidx, ref perm) = li.map.cells[d][di];
                let sym = CubeSym::from_perm(perm, d).unwrap();
                // candidate ball cells over the image base cell whose corner
                // vertices match some lift of the domain cell
                'cand: for ci in 0..self.complex.dim_count(d) {
                    if self.proj.cells[d][ci].0 != bidx {
                        continue;
                    }
                    // corners of the ball cell at sym-image positions must be
                    // lifted domain corners, pairwise matched
                    let bc = &self.complex.cells[d][ci];
                    for b in 0..1usize << d {
                        let yv = cell.corners[b];
                        let bv = bc.corners[sym.apply(b)];
                        if !pair_index.contains_key(&(yv, bv)) {
                            continue 'cand;
                        }
                    }
                    cells.insert(CellId::new(d, ci));
                }
            }
        }
        let image = SubcomplexRef::from_cells(&self.complex, cells)?;
        // Cube-lift completeness: every domain cell must have exactly
        // (#lifts of its corner 0) developed lifts.
        if complete {
            for d in 2..li.domain.cells.len() {
                let lifted = image.cells.iter().filter(|c| c.dim == d).count();
                let expected: usize = li.domain.dim_count(d) * pairs.len() / li.domain.num_vertices().max(1);
                // per-vertex fiber cardinality is uniform on a complete
                // elevation; a mismatch means cube lifts hit the frontier
                if li.domain.dim_count(d) > 0 && lifted < expected {
                    complete = false;
                }
            }
        }
        Ok(BallElevation { pairs, pair_index, edge_pairs: edge_pairs.into_iter().collect(), complete, image })
    }

    /// Hyperplanes (ball ids) crossing a subcomplex.
    pub fn crossing(&self, sub: &SubcomplexRef) -> BTreeSet<usize> {
        sub.edges().map(|e| self.e2h[e]).collect()
    }
}

/// A based elevation developed inside a ball.
#[derive(Clone, Debug)]
pub struct BallElevation {
    /// (domain vertex, ball vertex) pairs, basepoint first.
    pub pairs: Vec<(Vertex, Vertex)>,
    pub pair_index: BTreeMap<(Vertex, Vertex), usize>,
    pub edge_pairs: Vec<(usize, usize)>,
    pub complete: bool,
    /// Image subcomplex in the ball.
    pub image: SubcomplexRef,
}

impl BallElevation {
    /// Ball vertices over a domain vertex.
    pub fn lifts_of(&self, dom_v: Vertex) -> Vec<Vertex> {
        self.pairs.iter().filter(|&&(y, _)| y == dom_v).map(|&(_, v)| v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn ball(x: CubeComplex, v: Vertex, r: usize) -> DevBall {
        develop(&x.into_npc().unwrap(), v, r).unwrap()
    }

    #[test]
    fn circle_develops_to_segment() {
        let b = ball(generators::cycle(2), 0, 3);
        assert_eq!(b.complex.num_vertices(), 7);
        assert_eq!(b.complex.num_edges(), 6);
    }

    #[test]
    fn loop_develops_to_segment() {
        let b = ball(generators::rose(1), 0, 4);
        assert_eq!(b.complex.num_vertices(), 9);
        assert_eq!(b.complex.num_edges(), 8);
    }

    #[test]
    fn torus_develops_to_grid_ball() {
        // radius-2 ball of the square grid: 13 vertices (l1 disc).
        let b = ball(generators::torus(2, 2), 0, 2);
        assert_eq!(b.complex.num_vertices(), 13);
        // edges within the l1 disc of radius 2: 12 of distance<=... count:
        // oriented grid edges with both endpoints in the disc = 16
        assert_eq!(b.complex.num_edges(), 16);
        // squares with all corners inside: 4
        assert_eq!(b.complex.dim_count(2), 4);
    }

    #[test]
    fn salvetti_k2_develops_to_grid_ball() {
        let b = ball(generators::salvetti_k2(), 0, 2);
        assert_eq!(b.complex.num_vertices(), 13);
        assert_eq!(b.complex.dim_count(2), 4);
    }

    #[test]
    fn theta_develops_to_biregular_tree() {
        // (3,3)-biregular tree, radius 2 about a vertex: 1 + 3 + 6 = 10.
        let b = ball(generators::theta(3), 0, 2);
        assert_eq!(b.complex.num_vertices(), 10);
        assert_eq!(b.complex.num_edges(), 9);
    }

    #[test]
    fn grid_is_its_own_cover() {
        let g = generators::grid(2, 2);
        let b = ball(g.clone(), 0, 10);
        assert_eq!(b.complex.num_vertices(), g.num_vertices());
        assert_eq!(b.complex.num_edges(), g.num_edges());
        assert_eq!(b.complex.dim_count(2), g.dim_count(2));
    }

    #[test]
    fn cube3_is_its_own_cover() {
        let c = generators::cube(3);
        let b = ball(c.clone(), 0, 12);
        assert_eq!(b.complex.num_vertices(), 8);
        assert_eq!(b.complex.dim_count(3), 1);
    }

    #[test]
    fn torus_ball_hyperplanes_split_directions() {
        let b = ball(generators::torus(2, 2), 0, 3);
        // grid ball of radius 3: hyperplanes are the grid lines meeting it
        for h in &b.hyperplanes {
            assert!(h.two_sided);
        }
    }

    #[test]
    fn elevation_of_circle_in_torus_ball() {
        let t = generators::torus(2, 2);
        let npc = t.clone().into_npc().unwrap();
        let b = develop(&npc, 0, 4).unwrap();
        // the horizontal circle through vertex 0 (first-factor direction)
        let mut cells = vec![CellId::new(0, 0)];
        for e in 0..t.num_edges() {
            let (u, v) = t.edge_endpoints(e);
            if u % 2 == 0 && v % 2 == 0 {
                cells.push(CellId::new(1, e));
            }
        }
        let sub = SubcomplexRef::from_cells(&t, cells).unwrap();
        let li = LocalIso::inclusion(&sub, &t);
        let elev = b.develop_elevation(&li, 0, b.center).unwrap();
        // a line through the ball: not complete (runs into the frontier)
        assert!(!elev.complete);
        assert!(elev.pairs.len() >= 9);
    }

    #[test]
    fn elevation_of_edge_is_complete() {
        let t = generators::torus(2, 2);
        let npc = t.clone().into_npc().unwrap();
        let b = develop(&npc, 0, 4).unwrap();
        let sub = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
        let li = LocalIso::inclusion(&sub, &t);
        let (y0, _) = t.edge_endpoints(0);
        let at = (0..b.complex.num_vertices())
            .find(|&v| b.proj.vertex(v) == y0)
            .unwrap();
        let elev = b.develop_elevation(&li, 0, at).unwrap();
        assert!(elev.complete);
        assert_eq!(elev.pairs.len(), 2);
    }
}
