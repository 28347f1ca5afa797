//! Gates, hulls, bridges and orthogonal complements inside a developed ball.
//!
//! Distances are combinatorial throughout. Every operation either returns a
//! result whose supporting geodesics provably stay in the interior of the
//! ball (so the answer agrees with the universal cover), or reports
//! `RadiusExhausted` with the radius that would suffice. Objects that are
//! only partially visible carry `complete = false` and downstream flags
//! degrade to lower-bound semantics.
//!
//! The margin argument: a vertex `m` on a geodesic from `u` to `v` satisfies
//! `d(center,m) <= min(d(center,u)+d(u,m), d(center,v)+d(v,m))`, hence
//! `d(center,m) <= (d(center,u)+d(center,v)+d(u,v))/2`. When that bound is
//! at most `R-1`, every universal-cover geodesic between `u` and `v` lies
//! among interior vertices, where the ball is a certified covering, so ball
//! distances and intervals agree with the universal cover.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::complex::{CellId, SubcomplexRef, Vertex};
use crate::devball::{BallElevation, DevBall};
use crate::{Error, Result};

/// A convex subcomplex of a developed ball with its hyperplane trace and a
/// completeness flag (true when the object is provably entirely inside the
/// ball).
#[derive(Clone, Debug)]
pub struct ConvexSubcomplex {
    pub sub: SubcomplexRef,
    pub crossing: BTreeSet<usize>,
    pub complete: bool,
}

impl ConvexSubcomplex {
    pub fn vertices(&self) -> Vec<Vertex> {
        self.sub.vertices().collect()
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.sub.contains_vertex(v)
    }

    pub fn single_vertex(_ball: &DevBall, v: Vertex) -> ConvexSubcomplex {
        let sub = SubcomplexRef { cells: BTreeSet::from([CellId::new(0, v)]) };
        ConvexSubcomplex { sub, crossing: BTreeSet::new(), complete: true }
    }

    pub fn from_elevation(ball: &DevBall, elev: &BallElevation) -> ConvexSubcomplex {
        ConvexSubcomplex {
            crossing: ball.crossing(&elev.image),
            sub: elev.image.clone(),
            complete: elev.complete,
        }
    }
}

pub fn bfs(ball: &DevBall, from: Vertex) -> Vec<usize> {
    crate::devball::bfs_distances(&ball.complex, from)
}

pub fn multi_bfs(ball: &DevBall, from: &[Vertex]) -> Vec<usize> {
    let mut d = vec![usize::MAX; ball.complex.num_vertices()];
    let mut q = VecDeque::new();
    for &v in from {
        d[v] = 0;
        q.push_back(v);
    }
    while let Some(u) = q.pop_front() {
        for end in ball.complex.ends_at(u) {
            let w = ball.complex.edge_other(end);
            if d[w] == usize::MAX {
                d[w] = d[u] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

/// Certifies that every universal-cover geodesic between endpoints at the
/// given center distances, with the given mutual distance, stays interior.
fn pair_margin(ball: &DevBall, du: usize, dv: usize, d: usize) -> Result<()> {
    let bound = (du + dv + d).div_ceil(2);
    if bound + 1 <= ball.radius {
        Ok(())
    } else {
        Err(Error::RadiusExhausted { radius: ball.radius, needed: bound + 2 })
    }
}

/// The unique combinatorial nearest vertex of `a` from `x`, certified.
pub fn gate(ball: &DevBall, a: &ConvexSubcomplex, x: Vertex) -> Result<Vertex> {
    if a.contains_vertex(x) {
        return Ok(x);
    }
    let from_x = bfs(ball, x);
    let mut best = usize::MAX;
    let mut arg = Vec::new();
    for v in a.vertices() {
        if from_x[v] < best {
            best = from_x[v];
            arg = vec![v];
        } else if from_x[v] == best {
            arg.push(v);
        }
    }
    if best == usize::MAX {
        return Err(Error::Precondition("target subcomplex is empty or unreachable".into()));
    }
    // The true gate lies within dist[x]+best of the center; when that is
    // interior the realizing geodesic is visible and ball distances agree.
    // An unseen part of `a` beyond the frontier is at distance
    // > radius - dist[x], which the same condition rules out.
    if ball.dist[x] + best + 1 > ball.radius {
        return Err(Error::RadiusExhausted {
            radius: ball.radius,
            needed: ball.dist[x] + best + 2,
        });
    }
    if arg.len() != 1 {
        return Err(Error::Precondition(format!(
            "gate not unique from {x}; target is not convex (candidates {arg:?})"
        )));
    }
    Ok(arg[0])
}

/// Projection of `b` to `a`: the image of the gate map, as a subcomplex.
pub fn project(ball: &DevBall, a: &ConvexSubcomplex, b: &ConvexSubcomplex) -> Result<ConvexSubcomplex> {
    let mut verts = BTreeSet::new();
    for v in b.vertices() {
        verts.insert(gate(ball, a, v)?);
    }
    induced_convex(ball, &verts, a.complete && b.complete)
}

/// Projection that skips vertices of `b` whose gates cannot be certified;
/// the result is flagged incomplete when anything was skipped.
pub fn project_visible(
    ball: &DevBall,
    a: &ConvexSubcomplex,
    b: &ConvexSubcomplex,
) -> Result<ConvexSubcomplex> {
    let mut verts = BTreeSet::new();
    let mut skipped = false;
    for v in b.vertices() {
        match gate(ball, a, v) {
            Ok(g) => {
                verts.insert(g);
            }
            Err(Error::RadiusExhausted { .. }) => skipped = true,
            Err(e) => return Err(e),
        }
    }
    induced_convex(ball, &verts, a.complete && b.complete && !skipped)
}

/// The induced subcomplex on a vertex set (cells with all corners inside),
/// packaged with its crossing set.
pub fn induced_convex(
    ball: &DevBall,
    verts: &BTreeSet<Vertex>,
    complete: bool,
) -> Result<ConvexSubcomplex> {
    let mut cells: BTreeSet<CellId> = verts.iter().map(|&v| CellId::new(0, v)).collect();
    for d in 1..ball.complex.cells.len() {
        for (i, c) in ball.complex.cells[d].iter().enumerate() {
            if c.corners.iter().all(|v| verts.contains(v)) {
                cells.insert(CellId::new(d, i));
            }
        }
    }
    let sub = SubcomplexRef { cells };
    let crossing = ball.crossing(&sub);
    Ok(ConvexSubcomplex { sub, crossing, complete })
}

/// Vertices on geodesics between `u` and `v`, certified.
pub fn interval(ball: &DevBall, u: Vertex, v: Vertex) -> Result<BTreeSet<Vertex>> {
    let du = bfs(ball, u);
    let dv = bfs(ball, v);
    let d = du[v];
    if d == usize::MAX {
        return Err(Error::Precondition("vertices not connected in the ball".into()));
    }
    pair_margin(ball, ball.dist[u], ball.dist[v], d)?;
    Ok((0..ball.complex.num_vertices())
        .filter(|&m| du[m] != usize::MAX && dv[m] != usize::MAX && du[m] + dv[m] == d)
        .collect())
}

enum HullMode {
    Strict,
    Visible,
}

/// Memoized single-source distances, shared across the pair loops of hull
/// computations.
pub struct DistCache<'a> {
    ball: &'a DevBall,
    memo: std::cell::RefCell<HashMap<Vertex, std::rc::Rc<Vec<usize>>>>,
}

impl<'a> DistCache<'a> {
    pub fn new(ball: &'a DevBall) -> Self {
        DistCache { ball, memo: Default::default() }
    }

    pub fn from(&self, v: Vertex) -> std::rc::Rc<Vec<usize>> {
        let mut memo = self.memo.borrow_mut();
        memo.entry(v)
            .or_insert_with(|| std::rc::Rc::new(bfs(self.ball, v)))
            .clone()
    }

    /// Certified interval, reusing cached distances.
    fn interval(&self, u: Vertex, v: Vertex) -> Result<Vec<Vertex>> {
        let du = self.from(u);
        let dv = self.from(v);
        let d = du[v];
        if d == usize::MAX {
            return Err(Error::Precondition("vertices not connected in the ball".into()));
        }
        pair_margin(self.ball, self.ball.dist[u], self.ball.dist[v], d)?;
        Ok((0..self.ball.complex.num_vertices())
            .filter(|&m| du[m] != usize::MAX && dv[m] != usize::MAX && du[m] + dv[m] == d)
            .collect())
    }
}

fn hull_impl(ball: &DevBall, seeds: &BTreeSet<Vertex>, mode: HullMode) -> Result<(BTreeSet<Vertex>, bool)> {
    let cache = DistCache::new(ball);
    let mut set = seeds.clone();
    let mut all_certified = true;
    loop {
        let mut grew = false;
        let snapshot: Vec<Vertex> = set.iter().copied().collect();
        for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                match cache.interval(snapshot[i], snapshot[j]) {
                    Ok(iv) => {
                        for m in iv {
                            grew |= set.insert(m);
                        }
                    }
                    Err(e @ Error::RadiusExhausted { .. }) => match mode {
                        HullMode::Strict => return Err(e),
                        HullMode::Visible => all_certified = false,
                    },
                    Err(e) => return Err(e),
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok((set, all_certified))
}

/// Convex hull of a set of vertices: interval closure, then cube filling.
/// Errors with `RadiusExhausted` if any required interval is uncertifiable.
pub fn hull(ball: &DevBall, seeds: &BTreeSet<Vertex>) -> Result<ConvexSubcomplex> {
    let (set, _) = hull_impl(ball, seeds, HullMode::Strict)?;
    induced_convex(ball, &set, true)
}

/// Hull closure of the certifiable pairs only; `complete` reflects whether
/// every pair was certified.
pub fn visible_hull(ball: &DevBall, seeds: &BTreeSet<Vertex>) -> Result<ConvexSubcomplex> {
    let (set, all) = hull_impl(ball, seeds, HullMode::Visible)?;
    induced_convex(ball, &set, all)
}

/// Is a vertex set interval-closed (combinatorially convex) in the ball?
pub fn is_convex(ball: &DevBall, verts: &BTreeSet<Vertex>) -> Result<bool> {
    let cache = DistCache::new(ball);
    let snapshot: Vec<Vertex> = verts.iter().copied().collect();
    for i in 0..snapshot.len() {
        for j in (i + 1)..snapshot.len() {
            if !cache.interval(snapshot[i], snapshot[j])?.iter().all(|m| verts.contains(m)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Interval-closedness tested on certifiable pairs only.
pub fn is_convex_visible(ball: &DevBall, verts: &BTreeSet<Vertex>) -> Result<bool> {
    let cache = DistCache::new(ball);
    let snapshot: Vec<Vertex> = verts.iter().copied().collect();
    for i in 0..snapshot.len() {
        for j in (i + 1)..snapshot.len() {
            match cache.interval(snapshot[i], snapshot[j]) {
                Ok(iv) => {
                    if !iv.iter().all(|m| verts.contains(m)) {
                        return Ok(false);
                    }
                }
                Err(Error::RadiusExhausted { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

/// One geodesic from `u` to `v` (deterministic), as a vertex sequence.
pub fn geodesic(ball: &DevBall, u: Vertex, v: Vertex) -> Result<Vec<Vertex>> {
    let du = bfs(ball, u);
    if du[v] == usize::MAX {
        return Err(Error::Precondition("vertices not connected in the ball".into()));
    }
    pair_margin(ball, ball.dist[u], ball.dist[v], du[v])?;
    let mut path = vec![v];
    let mut cur = v;
    while cur != u {
        let mut next = None;
        for end in ball.complex.ends_at(cur) {
            let w = ball.complex.edge_other(end);
            if du[w] + 1 == du[cur] && (next.is_none() || w < next.unwrap()) {
                next = Some(w);
            }
        }
        cur = next.ok_or_else(|| Error::Internal("geodesic trace failed".into()))?;
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}

/// The hyperplanes separating `u` from `v`: the walls crossed by any
/// geodesic, certified to cross exactly once.
pub fn separators(ball: &DevBall, u: Vertex, v: Vertex) -> Result<BTreeSet<usize>> {
    let path = geodesic(ball, u, v)?;
    let mut out = BTreeSet::new();
    for w in path.windows(2) {
        let e = ball
            .complex
            .ends_at(w[0])
            .into_iter()
            .find(|&end| ball.complex.edge_other(end) == w[1])
            .ok_or_else(|| Error::Internal("geodesic edge missing".into()))?;
        let h = ball.e2h[e.edge];
        if !out.insert(h) {
            return Err(Error::Internal("geodesic crosses a wall twice".into()));
        }
    }
    Ok(out)
}

/// The bridge between two convex subcomplexes: `c = Π_a(b)`, the orthogonal
/// bridge factor `d`, corner vertices, the product chart on `Hull(c ∪ d)`,
/// and the separator set. All four bridge invariants are verified before
/// returning; a failure is an internal-consistency error.
#[derive(Clone, Debug)]
pub struct BridgeDecomposition {
    pub c: ConvexSubcomplex,
    pub d: ConvexSubcomplex,
    pub corner_a: Vertex,
    pub corner_b: Vertex,
    pub chart: ProductChart,
    pub separators: BTreeSet<usize>,
}

/// A verified product structure: vertex-level bijection
/// rows × cols -> region.
#[derive(Clone, Debug)]
pub struct ProductChart {
    pub rows: Vec<Vertex>,
    pub cols: Vec<Vertex>,
    pub at: BTreeMap<(Vertex, Vertex), Vertex>,
    /// exact = bijection verified on the full region
    pub exact: bool,
}

impl ProductChart {
    pub fn apply(&self, row: Vertex, col: Vertex) -> Option<Vertex> {
        self.at.get(&(row, col)).copied()
    }

    /// The slice `rows × {col}`.
    pub fn slice_at(&self, col: Vertex) -> Vec<Vertex> {
        self.rows.iter().filter_map(|&r| self.apply(r, col)).collect()
    }
}

/// Builds the chart (Π_rows, Π_cols) over a region. With `strict`, every
/// gate must certify and the chart must be a bijection; otherwise
/// uncertifiable vertices are skipped and `exact` records what happened.
pub fn chart_over(
    ball: &DevBall,
    rows: &ConvexSubcomplex,
    cols: &ConvexSubcomplex,
    region: &ConvexSubcomplex,
    strict: bool,
) -> Result<ProductChart> {
    let row_list = rows.vertices();
    let col_list = cols.vertices();
    let mut at = BTreeMap::new();
    let mut skipped = false;
    for v in region.vertices() {
        let rc = (gate(ball, rows, v), gate(ball, cols, v));
        match rc {
            (Ok(r), Ok(c)) => {
                if at.insert((r, c), v).is_some() {
                    return Err(Error::Internal("product chart not injective".into()));
                }
            }
            (Err(e @ Error::RadiusExhausted { .. }), _) | (_, Err(e @ Error::RadiusExhausted { .. })) => {
                if strict {
                    return Err(e);
                }
                skipped = true;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let exact = !skipped
        && at.len() == row_list.len() * col_list.len()
        && row_list.iter().all(|&r| col_list.iter().all(|&c| at.contains_key(&(r, c))));
    if strict && !exact {
        return Err(Error::Internal("region is not a product of the given factors".into()));
    }
    Ok(ProductChart { rows: row_list, cols: col_list, at, exact })
}

pub fn bridge(
    ball: &DevBall,
    a: &ConvexSubcomplex,
    b: &ConvexSubcomplex,
) -> Result<BridgeDecomposition> {
    let c = project(ball, a, b)?;
    // closest pair: b-vertex minimizing distance to a
    let dist_to_a = multi_bfs(ball, &a.vertices());
    let corner_b = b
        .vertices()
        .into_iter()
        .min_by_key(|&v| (dist_to_a[v], v))
        .ok_or_else(|| Error::Precondition("empty subcomplex in bridge".into()))?;
    let corner_a = gate(ball, a, corner_b)?;
    let d_verts: BTreeSet<Vertex> = interval(ball, corner_a, corner_b)?;
    let d = induced_convex(ball, &d_verts, a.complete && b.complete)?;

    // region = Hull(C ∪ D)
    let mut seed: BTreeSet<Vertex> = c.vertices().into_iter().collect();
    seed.extend(d.vertices());
    let region = hull(ball, &seed)?;
    let chart = chart_over(ball, &c, &d, &region, true)?;

    // invariant (i): crossing(C) = crossing(A) ∩ crossing(B)
    let want: BTreeSet<usize> = a.crossing.intersection(&b.crossing).copied().collect();
    if c.crossing != want {
        return Err(Error::Internal(format!(
            "bridge invariant failed: crossing(C) {:?} vs A∩B {:?}",
            c.crossing, want
        )));
    }
    // invariant (ii): region ∩ A = slice at corner_a = C
    let region_verts: BTreeSet<Vertex> = region.vertices().into_iter().collect();
    let a_verts: BTreeSet<Vertex> = a.vertices().into_iter().collect();
    let inter_a: BTreeSet<Vertex> = region_verts.intersection(&a_verts).copied().collect();
    let slice_a: BTreeSet<Vertex> = chart.slice_at(corner_a).into_iter().collect();
    let c_verts: BTreeSet<Vertex> = c.vertices().into_iter().collect();
    if inter_a != slice_a || slice_a != c_verts {
        return Err(Error::Internal("bridge invariant failed: region ∩ A ≠ C".into()));
    }
    // invariant (iii): region ∩ B = slice at corner_b = Π_B(A)
    let b_verts: BTreeSet<Vertex> = b.vertices().into_iter().collect();
    let inter_b: BTreeSet<Vertex> = region_verts.intersection(&b_verts).copied().collect();
    let slice_b: BTreeSet<Vertex> = chart.slice_at(corner_b).into_iter().collect();
    let proj_ba = project(ball, b, a)?;
    let pba: BTreeSet<Vertex> = proj_ba.vertices().into_iter().collect();
    if inter_b != slice_b || slice_b != pba {
        return Err(Error::Internal("bridge invariant failed: region ∩ B ≠ Π_B(A)".into()));
    }
    // invariant (iv): crossing(D) = separators of A and B
    let seps = separators(ball, corner_a, corner_b)?;
    if d.crossing != seps {
        return Err(Error::Internal("bridge invariant failed: crossing(D) ≠ separators".into()));
    }
    if seps.intersection(&a.crossing).next().is_some()
        || seps.intersection(&b.crossing).next().is_some()
    {
        return Err(Error::Internal("bridge separators meet A or B".into()));
    }

    Ok(BridgeDecomposition { c, d, corner_a, corner_b, chart, separators: seps })
}

/// Transversality of two ball hyperplanes: distinct and dual to two axes of
/// a common cell.
pub fn transverse_in_ball(ball: &DevBall, h1: usize, h2: usize) -> bool {
    if h1 == h2 {
        return false;
    }
    for d in 2..ball.complex.cells.len() {
        for idx in 0..ball.complex.dim_count(d) {
            let mut has1 = false;
            let mut has2 = false;
            for axis in 0..d {
                if let Ok(end) = ball.complex.cube_edge(d, idx, axis, 0) {
                    let h = ball.e2h[end.edge];
                    has1 |= h == h1;
                    has2 |= h == h2;
                }
            }
            if has1 && has2 {
                return true;
            }
        }
    }
    false
}

/// The orthogonal complement of `a` at `x`: the largest convex subcomplex
/// through `x` all of whose walls are transverse to every wall of `a`,
/// together with the product chart on `Hull(a ∪ b)`.
#[derive(Clone, Debug)]
pub struct OrthComplement {
    pub base_vertex: Vertex,
    pub b: ConvexSubcomplex,
    pub chart: ProductChart,
    pub region: ConvexSubcomplex,
}

pub fn orthogonal_complement(ball: &DevBall, a: &ConvexSubcomplex, x: Vertex) -> Result<OrthComplement> {
    if !a.contains_vertex(x) {
        return Err(Error::Precondition("orthogonal complement base vertex not in A".into()));
    }
    // T = walls transverse to every wall of a
    let t: BTreeSet<usize> = (0..ball.hyperplanes.len())
        .filter(|&h| a.crossing.iter().all(|&ha| transverse_in_ball(ball, h, ha)))
        .collect();
    // reach x by T-edges only
    let mut reach = BTreeSet::from([x]);
    let mut queue = VecDeque::from([x]);
    let mut touched_frontier = false;
    while let Some(u) = queue.pop_front() {
        if ball.dist[u] + 1 >= ball.radius {
            touched_frontier = true;
            continue;
        }
        for end in ball.complex.ends_at(u) {
            if !t.contains(&ball.e2h[end.edge]) {
                continue;
            }
            let w = ball.complex.edge_other(end);
            if reach.insert(w) {
                queue.push_back(w);
            }
        }
    }
    let complete = a.complete && !touched_frontier;
    let b = if complete {
        let mut h = hull(ball, &reach)?;
        h.complete = true;
        h
    } else {
        let mut h = visible_hull(ball, &reach)?;
        h.complete = false;
        h
    };
    if !b.crossing.iter().all(|h| t.contains(h)) {
        return Err(Error::Internal("orthogonal complement crosses a non-transverse wall".into()));
    }
    let mut seed: BTreeSet<Vertex> = a.vertices().into_iter().collect();
    seed.extend(b.vertices());
    let region = if complete {
        hull(ball, &seed)?
    } else {
        let mut r = visible_hull(ball, &seed)?;
        r.complete = false;
        r
    };
    let chart = chart_over(ball, a, &b, &region, complete)?;
    Ok(OrthComplement { base_vertex: x, b, chart, region })
}
