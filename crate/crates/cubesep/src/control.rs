//! Control properties of routes: the trap condition, the wall-coherence
//! properties (Hyp_j), the projection poset P_j with its complexity kappa_j,
//! and the projected-route construction behind the Ω replacement family.
//!
//! Everything here is computed in a developed ball and carries exactness
//! flags: when every elevation involved is complete in the ball the answers
//! are exact, otherwise they are in-ball lower bounds.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{CellId, CubeComplex, CubeSym, NpcComplex, SubcomplexRef, Vertex};
use crate::devball::{develop, BallElevation, DevBall};
use crate::generators::product;
use crate::geometry::{
    gate, orthogonal_complement, project_visible, ConvexSubcomplex,
};
use crate::hyperplane::Hyperplane;
use crate::maps::{is_local_isometry, iso_over_codomain, CellMap, LocalIso};
use crate::routes::Route;
use crate::{Error, Result};

/// Witness of a trap failure: a vertex of `Y_1 ∩ Y_2`, an exiting `Y_1`-edge
/// there, and the index of the later component its wall meets.
#[derive(Clone, Copy, Debug)]
pub struct TrapWitness {
    pub vertex: Vertex,
    pub edge: usize,
    pub component: usize,
}

/// Property (Trap): every wall dual to a `Y_1`-edge exiting `Y_2` at a
/// vertex of `Y_1 ∩ Y_2` misses `Y_2, ..., Y_{n-1}`.
pub fn check_trap(x: &NpcComplex, hs: &[Hyperplane], route: &Route) -> Result<(bool, Vec<TrapWitness>)> {
    if route.len() < 4 {
        return Err(Error::Precondition("trap property needs routes of length at least 4".into()));
    }
    if !route.is_embedded() {
        return Err(Error::Precondition("trap property needs an embedded route".into()));
    }
    let e2h = crate::hyperplane::edge_to_hyperplane(hs, x.num_edges());
    let images: Vec<SubcomplexRef> =
        route.components.iter().map(|c| c.map.image(x.raw())).collect();
    let mut witnesses = Vec::new();
    for v in images[0].vertices() {
        if !images[1].contains_vertex(v) {
            continue;
        }
        for end in x.ends_at(v) {
            let eid = CellId::new(1, end.edge);
            if !images[0].contains(eid) || images[1].contains(eid) {
                continue;
            }
            let h = &hs[e2h[end.edge]];
            for (i, img) in images.iter().enumerate().take(route.len() - 1).skip(1) {
                let meets = h.midcubes.iter().any(|&(c, _)| img.contains(c));
                if meets {
                    witnesses.push(TrapWitness { vertex: v, edge: end.edge, component: i });
                }
            }
        }
    }
    Ok((witnesses.is_empty(), witnesses))
}

/// Verdict of the (Hyp_j) check.
#[derive(Clone, Debug)]
pub enum HypVerdict {
    /// Every elevation chain was complete and satisfied the wall equality.
    HoldsExact,
    /// No counterexample among the visible chains, but the enumeration was
    /// not exhaustive.
    HoldsInBall,
    /// A wall in `Ĥ(Ỹ_1) ∩ Ĥ(Ỹ_j)` provably misses an intermediate
    /// component (that component's elevation was complete).
    Fails { chain: Vec<Vertex>, missing_at: usize },
}

impl HypVerdict {
    pub fn holds(&self) -> bool {
        !matches!(self, HypVerdict::Fails { .. })
    }
}

/// Elevation chains of the first `upto` components, with their developed
/// elevations. The initial vertex is fixed at the ball center (deck
/// transitivity makes this lossless for wall statements).
pub struct ElevationChain {
    pub vertices: Vec<Vertex>,
    pub elevations: Vec<BallElevation>,
}

pub fn elevation_chains(route: &Route, ball: &DevBall, upto: usize) -> Result<Vec<ElevationChain>> {
    let mut chains = vec![ElevationChain { vertices: vec![ball.center], elevations: Vec::new() }];
    for comp in route.components.iter().take(upto) {
        let mut next = Vec::new();
        for chain in &chains {
            let v = *chain.vertices.last().unwrap();
            let elev = ball.develop_elevation(&comp.map, comp.entry, v)?;
            for w in elev.lifts_of(comp.exit) {
                let mut vs = chain.vertices.clone();
                vs.push(w);
                let mut es: Vec<BallElevation> = chain.elevations.clone();
                es.push(elev.clone());
                next.push(ElevationChain { vertices: vs, elevations: es });
            }
        }
        chains = next;
    }
    Ok(chains)
}

/// Property (Hyp_j): for every elevation, the walls common to `Ỹ_1` and
/// `Ỹ_j` are common to all intermediate components.
pub fn check_hyp_j(x: &NpcComplex, route: &Route, j: usize, radius: usize) -> Result<HypVerdict> {
    if j < 2 || j + 1 > route.len() {
        return Err(Error::Precondition(format!(
            "hyp index {j} out of range 2..={}",
            route.len() - 1
        )));
    }
    if j == 2 {
        // trivially: the intersection over i in {1,2} is the left-hand side
        return Ok(HypVerdict::HoldsExact);
    }
    route.validate(x.raw())?;
    let ball = develop(x, route.initial(), radius)?;
    let chains = elevation_chains(route, &ball, j)?;
    let mut all_exact = true;
    for chain in &chains {
        let crossings: Vec<BTreeSet<usize>> =
            chain.elevations.iter().map(|e| ball.crossing(&e.image)).collect();
        if chain.elevations.iter().any(|e| !e.complete) {
            all_exact = false;
        }
        let lhs: BTreeSet<usize> =
            crossings[0].intersection(&crossings[j - 1]).copied().collect();
        for h in lhs {
            for i in 1..j - 1 {
                if !crossings[i].contains(&h) {
                    // sound negative only when that elevation is complete
                    if chain.elevations[i].complete {
                        return Ok(HypVerdict::Fails {
                            chain: chain.vertices.clone(),
                            missing_at: i + 1,
                        });
                    }
                    all_exact = false;
                }
            }
        }
    }
    Ok(if all_exact { HypVerdict::HoldsExact } else { HypVerdict::HoldsInBall })
}

/// An element of P_j: a locally convex subcomplex of the first component's
/// domain, with one witnessing chain.
#[derive(Clone, Debug)]
pub struct PjElement {
    pub sub: SubcomplexRef,
    pub witness_chain: Vec<Vertex>,
}

/// The poset P_j/~ with the chain-length complexity kappa_j.
#[derive(Clone, Debug)]
pub struct PjPoset {
    pub j: usize,
    pub elements: Vec<PjElement>,
    pub leq: Vec<Vec<bool>>,
    pub classes: Vec<Vec<usize>>,
    pub class_leq: Vec<Vec<bool>>,
    pub kappa: usize,
    pub exact: bool,
}

impl PjPoset {
    pub fn class_of(&self, elem: usize) -> usize {
        self.classes.iter().position(|c| c.contains(&elem)).unwrap()
    }

    pub fn is_maximal_class(&self, class: usize) -> bool {
        (0..self.classes.len())
            .all(|other| other == class || !self.class_leq[class][other] || self.class_leq[other][class])
    }

    pub fn is_maximal_element(&self, elem: usize) -> bool {
        self.is_maximal_class(self.class_of(elem))
    }
}

/// Descends a ball subcomplex along an elevation to a subcomplex of the
/// elevation's domain (vertex level, then induced cells).
fn descend_to_domain(
    elev: &BallElevation,
    dom: &CubeComplex,
    ball_sub: &ConvexSubcomplex,
) -> Result<SubcomplexRef> {
    let ball_to_dom: BTreeMap<Vertex, Vertex> =
        elev.pairs.iter().map(|&(y, v)| (v, y)).collect();
    let mut verts = BTreeSet::new();
    for v in ball_sub.vertices() {
        let y = ball_to_dom
            .get(&v)
            .ok_or_else(|| Error::Internal("projection left the elevation".into()))?;
        verts.insert(*y);
    }
    let mut cells: BTreeSet<CellId> = verts.iter().map(|&v| CellId::new(0, v)).collect();
    for d in 1..dom.cells.len() {
        for (i, c) in dom.cells[d].iter().enumerate() {
            if c.corners.iter().all(|v| verts.contains(v)) {
                cells.insert(CellId::new(d, i));
            }
        }
    }
    Ok(SubcomplexRef { cells })
}

/// Computes P_j: enumerate elevation chains, project `Ỹ_j` to `Ỹ_1`,
/// descend to the first component's domain, deduplicate, and order by
/// wall-trace inclusion between elevations.
pub fn compute_pj(x: &NpcComplex, route: &Route, j: usize, radius: usize) -> Result<PjPoset> {
    if j < 2 || j + 1 > route.len() {
        return Err(Error::Precondition(format!(
            "poset index {j} out of range 2..={}",
            route.len() - 1
        )));
    }
    if !route.is_embedded() {
        return Err(Error::Precondition("P_j needs an embedded route".into()));
    }
    route.validate(x.raw())?;
    let ball = develop(x, route.initial(), radius)?;
    let chains = elevation_chains(route, &ball, j)?;
    let mut exact = true;
    let mut elements: Vec<PjElement> = Vec::new();
    for chain in &chains {
        let y1 = ConvexSubcomplex::from_elevation(&ball, &chain.elevations[0]);
        let yj = ConvexSubcomplex::from_elevation(&ball, &chain.elevations[j - 1]);
        if !y1.complete || !yj.complete {
            exact = false;
        }
        let z = project_visible(&ball, &y1, &yj)?;
        if !z.complete {
            exact = false;
        }
        if z.vertices().is_empty() {
            // all gates were beyond the certification margin
            exact = false;
            continue;
        }
        let sub = descend_to_domain(&chain.elevations[0], &route.components[0].map.domain, &z)?;
        if !elements.iter().any(|e| e.sub == sub) {
            elements.push(PjElement { sub, witness_chain: chain.vertices.clone() });
        }
    }

    // The quasiorder: Z1 <= Z2 iff some elevation pair has nested wall
    // traces. One side is fixed at a canonical position; the other ranges
    // over all visible based elevations.
    let n = elements.len();
    let mut leq = vec![vec![false; n]; n];
    let comp1 = &route.components[0];
    for (i, zi) in elements.iter().enumerate() {
        leq[i][i] = true;
        // canonical elevation of Z_i: based at the center-side elevation of
        // Y_1 restricted to Z_i — develop the inclusion Z_i -> X directly
        let li_i = sub_into_x(&comp1.map, &zi.sub, x.raw());
        let zi_base = li_i.map.vertex(0);
        let at_i = (0..ball.complex.num_vertices())
            .filter(|&v| ball.proj.vertex(v) == zi_base)
            .min_by_key(|&v| ball.dist[v])
            .ok_or_else(|| Error::Internal("no lift for poset element".into()))?;
        let zi_elev = ball.develop_elevation(&li_i, 0, at_i)?;
        if !zi_elev.complete {
            exact = false;
        }
        let hi = ball.crossing(&zi_elev.image);
        for (k, zk) in elements.iter().enumerate() {
            if i == k {
                continue;
            }
            let li_k = sub_into_x(&comp1.map, &zk.sub, x.raw());
            let zk_base = li_k.map.vertex(0);
            for at_k in (0..ball.complex.num_vertices())
                .filter(|&v| ball.proj.vertex(v) == zk_base)
            {
                let zk_elev = match ball.develop_elevation(&li_k, 0, at_k) {
                    Ok(e) => e,
                    Err(_) => continue,
                };
                let hk = ball.crossing(&zk_elev.image);
                if hi.is_subset(&hk) {
                    leq[i][k] = true;
                    break;
                }
            }
        }
    }
    // transitive closure
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                if leq[a][m] && leq[m][b] {
                    leq[a][b] = true;
                }
            }
        }
    }
    // classes and class order
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if class_of[a] != usize::MAX {
            continue;
        }
        let c = classes.len();
        let mut members = Vec::new();
        for b in 0..n {
            if leq[a][b] && leq[b][a] {
                class_of[b] = c;
                members.push(b);
            }
        }
        classes.push(members);
    }
    let m = classes.len();
    let mut class_leq = vec![vec![false; m]; m];
    for (a, row) in leq.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v {
                class_leq[class_of[a]][class_of[b]] = true;
            }
        }
    }
    // longest chain in the class order (strict)
    let mut depth = vec![0usize; m];
    let mut kappa = 0;
    // iterate to fixpoint; m is tiny
    for _ in 0..=m {
        for a in 0..m {
            let mut best = 1;
            for b in 0..m {
                if b != a && class_leq[b][a] && !class_leq[a][b] {
                    best = best.max(depth[b] + 1);
                }
            }
            depth[a] = best;
        }
    }
    for &d in &depth {
        kappa = kappa.max(d);
    }

    Ok(PjPoset { j, elements, leq, classes, class_leq, kappa, exact })
}

/// The composite local isometry of a subcomplex of a component's domain into
/// the ambient complex.
fn sub_into_x(component: &LocalIso, sub: &SubcomplexRef, x: &CubeComplex) -> LocalIso {
    let (dom, back) = sub.extract(&component.domain);
    let cells = back
        .iter()
        .enumerate()
        .map(|(d, v)| v.iter().map(|&old| component.map.cells[d][old].clone()).collect())
        .collect();
    let li = LocalIso { domain: dom, map: CellMap { cells } };
    let _ = x;
    li
}

fn all_cube_syms(d: usize) -> Vec<CubeSym> {
    let mut perms: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &perms {
            for a in 0..d as u8 {
                if !p.contains(&a) {
                    let mut q = p.clone();
                    q.push(a);
                    next.push(q);
                }
            }
        }
        perms = next;
    }
    let mut out = Vec::new();
    for sigma in perms {
        for flips in 0..1usize << d {
            out.push(CubeSym {
                sigma: sigma.clone(),
                flip: (0..d).map(|k| (flips >> k) & 1 == 1).collect(),
            });
        }
    }
    out
}

/// Finds the ball cell spanned by the given corner vertices (in some cube
/// symmetry), returning the cell and the alignment.
fn ball_cell_spanned(ball: &DevBall, dim: usize, corners: &[Vertex]) -> Option<(usize, CubeSym)> {
    for i in 0..ball.complex.dim_count(dim) {
        let cell = &ball.complex.cells[dim][i];
        for sym in all_cube_syms(dim) {
            if (0..1usize << dim).all(|b| cell.corners[sym.apply(b)] == corners[b]) {
                return Some((i, sym));
            }
        }
    }
    None
}

/// The descended projected route. `exact` means every descended datum (the
/// projection Z, the component elevations, the gates and chart lookups used)
/// was certified inside the ball; `w_truncated` records that the orthogonal
/// complement itself was ball-limited, which does not affect the returned
/// cells but is reported for honesty.
#[derive(Clone, Debug)]
pub struct ProjectedRoute {
    pub route: Route,
    pub exact: bool,
    pub w_truncated: bool,
}

/// Builds the projected route: the first component's exit moves to the
/// orthogonal-complement gate, the intermediate components are replaced by
/// products `Z × Π_W(Y_l)` descended to the base, and the tail is reused
/// with a remarked entry.
pub fn project_route(
    x: &NpcComplex,
    route: &Route,
    chain: &ElevationChain,
    j: usize,
    ball: &DevBall,
    poset: &PjPoset,
) -> Result<ProjectedRoute> {
    if j < 3 || j + 1 > route.len() {
        return Err(Error::Precondition("projection index out of range".into()));
    }
    let mut exact = true;
    let y1 = ConvexSubcomplex::from_elevation(&ball, &chain.elevations[0]);
    let yj = ConvexSubcomplex::from_elevation(&ball, &chain.elevations[j - 1]);
    exact &= y1.complete && yj.complete;
    // strict projection: every gate certified
    let z = {
        let mut verts = BTreeSet::new();
        for v in yj.vertices() {
            verts.insert(gate(ball, &y1, v)?);
        }
        crate::geometry::induced_convex(ball, &verts, y1.complete && yj.complete)?
    };

    // the chain's element must be <=-maximal
    let z_sub = descend_to_domain(&chain.elevations[0], &route.components[0].map.domain, &z)?;
    let elem = poset
        .elements
        .iter()
        .position(|e| e.sub == z_sub)
        .ok_or_else(|| Error::Precondition("chain's projection is not a poset element".into()))?;
    if !poset.is_maximal_element(elem) {
        return Err(Error::Precondition(
            "projection class is not ≤-maximal; pick another elevation".into(),
        ));
    }

    // orthogonal complement of Z at the gate of y_1's lift
    let y1_lift = chain.vertices[1];
    let base_vertex = gate(ball, &z, y1_lift)?;
    let oc = orthogonal_complement(ball, &z, base_vertex)?;
    let w_truncated = !oc.b.complete;

    // w_l = Π_W(Y_l) with strict gates, lifted way-points x_l = Π_W(y_l lift)
    let mut w_l: Vec<ConvexSubcomplex> = Vec::new();
    for l in 2..j {
        let yl = ConvexSubcomplex::from_elevation(&ball, &chain.elevations[l - 1]);
        exact &= yl.complete;
        let mut verts = BTreeSet::new();
        for v in yl.vertices() {
            verts.insert(gate(ball, &oc.b, v)?);
        }
        let w = crate::geometry::induced_convex(ball, &verts, yl.complete && z.complete)?;
        w_l.push(w);
    }
    let mut x_lift = Vec::new();
    for l in 1..j {
        x_lift.push(gate(ball, &oc.b, chain.vertices[l])?);
    }
    // the paper's sanity notes: x̃_1 ∈ Ỹ_1 and x̃_{j-1} ∈ Ỹ_j
    if !y1.contains_vertex(x_lift[0]) {
        return Err(Error::Internal("projected way-point left the first component".into()));
    }
    if !yj.contains_vertex(x_lift[j - 2]) {
        return Err(Error::Internal("projected way-point missed the j-th component".into()));
    }

    // descend: Z and each W_l as complexes over X
    let z_piece = ball_piece(ball, &z.sub);
    let mut new_components: Vec<crate::routes::RouteComponent> = Vec::new();
    let mut new_vertices: Vec<Vertex> = vec![route.vertices[0]];

    // component 1: original Y_1 with exit remarked to x_1
    let comp1 = &route.components[0];
    let ball_to_dom1: BTreeMap<Vertex, Vertex> =
        chain.elevations[0].pairs.iter().map(|&(y, v)| (v, y)).collect();
    let exit1 = *ball_to_dom1
        .get(&x_lift[0])
        .ok_or_else(|| Error::Internal("x_1 outside the first elevation".into()))?;
    new_components.push(crate::routes::RouteComponent {
        map: comp1.map.clone(),
        entry: comp1.entry,
        exit: exit1,
    });
    new_vertices.push(ball.proj.vertex(x_lift[0]));

    // components 2..j-1: products Z × W_l mapped through the chart
    for (idx, l) in (2..j).enumerate() {
        let w_piece = ball_piece(ball, &w_l[idx].sub);
        let prod = product(&z_piece.domain, &w_piece.domain);
        // map product cells into X via the chart
        let nwv = w_piece.domain.num_vertices();
        let pvert_to_ball = |pv: Vertex| -> Result<Vertex> {
            let (zv, wv) = (pv / nwv, pv % nwv);
            let zball = z_piece.back_vertex(zv);
            let wball = w_piece.back_vertex(wv);
            oc.chart
                .apply(zball, wball)
                .ok_or_else(|| Error::RadiusExhausted { radius: ball.radius, needed: ball.radius + 2 })
        };
        let mut cells: Vec<Vec<(usize, Vec<u8>)>> = Vec::with_capacity(prod.cells.len());
        for d in 0..prod.cells.len() {
            let mut layer = Vec::with_capacity(prod.dim_count(d));
            for i in 0..prod.dim_count(d) {
                let corners: Result<Vec<Vertex>> =
                    prod.cells[d][i].corners.iter().map(|&pv| pvert_to_ball(pv)).collect();
                let corners = corners?;
                let (ball_cell, sym) = ball_cell_spanned(ball, d, &corners).ok_or_else(|| {
                    Error::RadiusExhausted { radius: ball.radius, needed: ball.radius + 2 }
                })?;
                let (bcell, ref bperm) = ball.proj.cells[d][ball_cell];
                let comp: Vec<u8> =
                    (0..1usize << d).map(|b| bperm[sym.apply(b)]).collect();
                layer.push((bcell, comp));
            }
            cells.push(layer);
        }
        let map = CellMap { cells };
        let li = LocalIso { domain: prod.clone(), map };
        let (ok, w) = is_local_isometry(&li, x.raw())?;
        if !ok {
            return Err(Error::Internal(format!(
                "projected product component is not a local isometry: {:?}",
                w.first()
            )));
        }
        // entries: product coordinates of x̃_{l-1} and x̃_l via the chart
        let to_prod = |ballv: Vertex| -> Result<Vertex> {
            let zv = gate(ball, &z, ballv)?;
            let wv = gate(ball, &oc.b, ballv)?;
            let zi = z_piece.fwd_vertex(zv)?;
            let wi = w_piece.fwd_vertex(wv)?;
            Ok(zi * nwv + wi)
        };
        let entry = to_prod(x_lift[l - 2])?;
        let exit = to_prod(x_lift[l - 1])?;
        new_components.push(crate::routes::RouteComponent { map: li, entry, exit });
        new_vertices.push(ball.proj.vertex(x_lift[l - 1]));
    }

    // component j: original Y_j with entry remarked to x_{j-1}
    let compj = &route.components[j - 1];
    let ball_to_domj: BTreeMap<Vertex, Vertex> =
        chain.elevations[j - 1].pairs.iter().map(|&(y, v)| (v, y)).collect();
    let entryj = *ball_to_domj
        .get(&x_lift[j - 2])
        .ok_or_else(|| Error::Internal("x_{j-1} outside the j-th elevation".into()))?;
    new_components.push(crate::routes::RouteComponent {
        map: compj.map.clone(),
        entry: entryj,
        exit: compj.exit,
    });
    new_vertices.push(route.vertices[j]);

    // tail: components after Y_j, unchanged
    for i in j..route.len() {
        new_components.push(route.components[i].clone());
        new_vertices.push(route.vertices[i + 1]);
    }

    let out = Route { vertices: new_vertices, components: new_components };
    out.validate(x.raw())?;
    Ok(ProjectedRoute { route: out, exact, w_truncated })
}

/// A ball subcomplex extracted as a standalone complex with bookkeeping.
struct BallPiece {
    domain: CubeComplex,
    back: Vec<Vec<usize>>,
    fwd0: BTreeMap<Vertex, Vertex>,
}

impl BallPiece {
    fn back_vertex(&self, v: Vertex) -> Vertex {
        self.back[0][v]
    }
    fn fwd_vertex(&self, ballv: Vertex) -> Result<Vertex> {
        self.fwd0
            .get(&ballv)
            .copied()
            .ok_or_else(|| Error::Internal("vertex missing from extracted piece".into()))
    }
}

fn ball_piece(ball: &DevBall, sub: &SubcomplexRef) -> BallPiece {
    let (domain, back) = sub.extract(&ball.complex);
    let fwd0 = back[0].iter().enumerate().map(|(new, &old)| (old, new)).collect();
    BallPiece { domain, back, fwd0 }
}

/// The replacement family Ω(route, j): for `j = 2` the route itself, else
/// the projected routes over all qualifying elevation chains, deduplicated
/// by isomorphism over the base.
pub fn omega_family(x: &NpcComplex, route: &Route, j: usize, radius: usize) -> Result<Vec<Route>> {
    if j == 2 {
        return Ok(vec![route.clone()]);
    }
    let poset = compute_pj(x, route, j, radius)?;
    let ball = develop(x, route.initial(), radius)?;
    let chains = elevation_chains(route, &ball, j)?;
    let mut out: Vec<Route> = Vec::new();
    for chain in &chains {
        match project_route(x, route, chain, j, &ball, &poset) {
            Ok(pr) => {
                if !out.iter().any(|r| routes_isomorphic(r, &pr.route)) {
                    out.push(pr.route);
                }
            }
            Err(Error::Precondition(_)) => continue, // non-maximal chain
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Component-wise isomorphism over the base, matching way-points and marked
/// vertices.
pub fn routes_isomorphic(a: &Route, b: &Route) -> bool {
    if a.len() != b.len() || a.vertices != b.vertices {
        return false;
    }
    for (ca, cb) in a.components.iter().zip(&b.components) {
        match iso_over_codomain(&ca.map, &cb.map, (ca.entry, cb.entry)) {
            Some(f) => {
                if f[ca.exit] != cb.exit {
                    return false;
                }
            }
            None => return false,
        }
    }
    true
}
