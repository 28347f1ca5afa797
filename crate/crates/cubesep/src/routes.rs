//! Routes: chains of locally convex pieces with matched basepoints, their
//! paths, their elevations to finite covers and to the developed ball, and
//! essentialness certificates.
//!
//! Two independent code paths decide whether a route has closed elevations
//! in a finite cover: an explicit enumeration through based elevations
//! (used by the synthesis pipeline) and a relation-composition verifier over
//! the fibers (used to check certificates). Tests pin them against each
//! other.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::complex::{CubeComplex, EdgeEnd, NpcComplex, SubcomplexRef, Vertex};
use crate::covers::{based_elevation, CoveringMap, Elevation};
use crate::devball::{develop, DevBall};
use crate::maps::{is_local_isometry, LocalIso};
use crate::{Error, Result};

/// One component of a route: a local isometry into the ambient complex with
/// marked entry and exit vertices in its domain.
#[derive(Clone, Debug)]
pub struct RouteComponent {
    pub map: LocalIso,
    pub entry: Vertex,
    pub exit: Vertex,
}

/// A route `(y_0, Y_1, y_1, ..., Y_n, y_n)`.
#[derive(Clone, Debug)]
pub struct Route {
    pub vertices: Vec<Vertex>,
    pub components: Vec<RouteComponent>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    pub fn is_embedded(&self) -> bool {
        self.components.iter().all(|c| c.map.is_embedding())
    }

    pub fn initial(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn terminal(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    /// Builds an embedded route from subcomplexes of `x` with way-points
    /// given in `x` (each must have a unique preimage in its component).
    pub fn from_subcomplexes(
        x: &CubeComplex,
        waypoints: Vec<Vertex>,
        subs: Vec<SubcomplexRef>,
    ) -> Result<Route> {
        if waypoints.len() != subs.len() + 1 {
            return Err(Error::Precondition("route needs n+1 way-points for n components".into()));
        }
        let mut components = Vec::with_capacity(subs.len());
        for (i, sub) in subs.iter().enumerate() {
            let li = LocalIso::inclusion(sub, x);
            let find = |xv: Vertex| -> Result<Vertex> {
                (0..li.domain.num_vertices())
                    .find(|&v| li.map.vertex(v) == xv)
                    .ok_or_else(|| {
                        Error::Precondition(format!("way-point {xv} is not in component {i}"))
                    })
            };
            let entry = find(waypoints[i])?;
            let exit = find(waypoints[i + 1])?;
            components.push(RouteComponent { map: li, entry, exit });
        }
        Ok(Route { vertices: waypoints, components })
    }

    /// Structural validation against the ambient complex: marked vertices
    /// map to the way-points, every component is a connected local isometry.
    pub fn validate(&self, x: &CubeComplex) -> Result<()> {
        if self.vertices.len() != self.components.len() + 1 {
            return Err(Error::Precondition("route arity mismatch".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !c.map.domain.is_connected() {
                return Err(Error::Precondition(format!("component {i} is disconnected")));
            }
            let (ok, w) = is_local_isometry(&c.map, x)?;
            if !ok {
                return Err(Error::Precondition(format!(
                    "component {i} is not a local isometry: {:?}",
                    w.first()
                )));
            }
            if c.map.vertex(c.entry) != self.vertices[i] {
                return Err(Error::Precondition(format!("component {i} entry way-point mismatch")));
            }
            if c.map.vertex(c.exit) != self.vertices[i + 1] {
                return Err(Error::Precondition(format!("component {i} exit way-point mismatch")));
            }
        }
        Ok(())
    }
}

/// A segmented path: one `x`-path per component, endpoints chained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentedPath {
    pub segments: Vec<Vec<EdgeEnd>>,
}

impl SegmentedPath {
    pub fn realization(&self) -> Vec<EdgeEnd> {
        self.segments.iter().flatten().copied().collect()
    }
}

/// Enumerates the domain paths from `from` to `to` of length at most `limit`
/// in deterministic order.
fn domain_paths(dom: &CubeComplex, from: Vertex, to: Vertex, limit: usize) -> Vec<Vec<EdgeEnd>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vertex, Vec<EdgeEnd>)> = vec![(from, Vec::new())];
    while let Some((pos, path)) = stack.pop() {
        if pos == to {
            out.push(path.clone());
        }
        if path.len() == limit {
            continue;
        }
        let mut ends = dom.ends_at(pos);
        ends.sort();
        ends.reverse(); // stack order => lexicographic output
        for end in ends {
            let mut p2 = path.clone();
            p2.push(end);
            stack.push((dom.edge_other(end), p2));
        }
    }
    out.sort_by_key(|p| (p.len(), p.clone()));
    out
}

/// All paths along the route with each segment of length at most `limit`,
/// projected to the ambient complex, in deterministic order.
pub fn paths_along(route: &Route, limit: usize) -> Vec<SegmentedPath> {
    let per_component: Vec<Vec<Vec<EdgeEnd>>> = route
        .components
        .iter()
        .map(|c| {
            domain_paths(&c.map.domain, c.entry, c.exit, limit)
                .into_iter()
                .map(|p| p.iter().map(|&e| c.map.edge_end(e)).collect())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_component.len()];
    if per_component.iter().any(|v| v.is_empty()) {
        return out;
    }
    loop {
        out.push(SegmentedPath {
            segments: idx.iter().enumerate().map(|(i, &j)| per_component[i][j].clone()).collect(),
        });
        // odometer
        let mut k = per_component.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_component[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// An elevation of a route to a finite cover.
#[derive(Clone, Debug)]
pub struct RouteElevation {
    pub initial: Vertex,
    pub terminal: Vertex,
    pub parts: Vec<ElevPart>,
}

#[derive(Clone, Debug)]
pub struct ElevPart {
    pub elevation: Elevation,
    pub entry_lift: Vertex,
    pub exit_lift: Vertex,
}

impl RouteElevation {
    pub fn is_closed(&self) -> bool {
        self.initial == self.terminal
    }

    /// The elevation as a route in the total space.
    pub fn as_route(&self) -> Route {
        let mut vertices = vec![self.initial];
        let mut components = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            vertices.push(p.elevation.to_total.vertex(p.exit_lift));
            components.push(RouteComponent {
                map: LocalIso { domain: p.elevation.domain.clone(), map: p.elevation.to_total.clone() },
                entry: p.entry_lift,
                exit: p.exit_lift,
            });
        }
        Route { vertices, components }
    }
}

/// All elevations of a route to a finite cover, by choosing per component a
/// based elevation at the current lift and then a lift of the exit vertex.
pub fn elevations_of_route(route: &Route, cover: &CoveringMap) -> Result<Vec<RouteElevation>> {
    let mut memo: HashMap<(usize, Vertex), Vec<(Elevation, Vertex, Vec<(Vertex, Vertex)>)>> =
        HashMap::new();
    // memo[(i, v)] = [(elevation, entry_lift, [(exit_lift, next_v)])]
    let mut out = Vec::new();
    let starts: Vec<Vertex> = cover.fiber_vertices(route.initial());
    for start in starts {
        let mut partials: Vec<(Vertex, Vec<ElevPart>)> = vec![(start, Vec::new())];
        for (i, comp) in route.components.iter().enumerate() {
            let mut next = Vec::new();
            for (v, parts) in partials {
                let entry = memo.entry((i, v)).or_insert_with(|| {
                    let (elev, entry_lift) = based_elevation(&comp.map, cover, comp.entry, v)
                        .expect("based elevation in a verified cover");
                    let exits: Vec<(Vertex, Vertex)> = (0..elev.domain.num_vertices())
                        .filter(|&w| elev.descent.vertex(w) == comp.exit)
                        .map(|w| (w, elev.to_total.vertex(w)))
                        .collect();
                    vec![(elev, entry_lift, exits)]
                });
                for (elev, entry_lift, exits) in entry.iter() {
                    for &(exit_lift, next_v) in exits {
                        let mut p2 = parts.clone();
                        p2.push(ElevPart {
                            elevation: elev.clone(),
                            entry_lift: *entry_lift,
                            exit_lift,
                        });
                        next.push((next_v, p2));
                    }
                }
            }
            partials = next;
        }
        for (terminal, parts) in partials {
            out.push(RouteElevation { initial: start, terminal, parts });
        }
    }
    Ok(out)
}

pub fn closed_elevations(route: &Route, cover: &CoveringMap) -> Result<Vec<RouteElevation>> {
    Ok(elevations_of_route(route, cover)?.into_iter().filter(|e| e.is_closed()).collect())
}

/// Transcript of the independent verifier.
#[derive(Clone, Debug)]
pub struct VerifierTranscript {
    pub fiber_sizes: Vec<usize>,
    pub relation_sizes: Vec<usize>,
    pub closed_witness: Option<Vertex>,
    pub lines: String,
}

impl VerifierTranscript {
    pub fn no_closed(&self) -> bool {
        self.closed_witness.is_none()
    }
}

/// Independent check that a route has no closed elevations to a cover,
/// by composing per-component reachability relations over the fibers:
/// `(u,v)` is related when some path along the component lifts `u` to `v`.
/// This never touches the elevation machinery.
pub fn verify_no_closed_elevations(route: &Route, cover: &CoveringMap) -> Result<VerifierTranscript> {
    let mut lines = String::new();
    let fibers: Vec<Vec<Vertex>> =
        route.vertices.iter().map(|&y| cover.fiber_vertices(y)).collect();
    let fiber_sizes: Vec<usize> = fibers.iter().map(|f| f.len()).collect();
    let mut relation_sizes = Vec::new();

    // relation as a set of (from,to) pairs of total vertices
    let mut acc: BTreeSet<(Vertex, Vertex)> = fibers[0].iter().map(|&v| (v, v)).collect();
    for (i, comp) in route.components.iter().enumerate() {
        // product-graph reachability: nodes (domain vertex, total vertex);
        // the per-start searches are independent and run in parallel
        use rayon::prelude::*;
        let per_start: Vec<Result<Vec<(Vertex, Vertex)>>> = fibers[i]
            .par_iter()
            .map(|&start| {
                let mut found = Vec::new();
                let mut seen: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
                let mut queue = VecDeque::new();
                let s0 = (comp.entry, start);
                seen.insert(s0);
                queue.push_back(s0);
                while let Some((y, v)) = queue.pop_front() {
                    if y == comp.exit {
                        found.push((start, v));
                    }
                    for dend in comp.map.domain.ends_at(y) {
                        let bend = comp.map.edge_end(dend);
                        let lifted = cover.lift_end(v, bend).ok_or_else(|| {
                            Error::Internal("edge lift missing in a verified cover".into())
                        })?;
                        let nxt =
                            (comp.map.domain.edge_other(dend), cover.total.edge_other(lifted));
                        if seen.insert(nxt) {
                            queue.push_back(nxt);
                        }
                    }
                }
                Ok(found)
            })
            .collect();
        let mut rel: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for r in per_start {
            rel.extend(r?);
        }
        relation_sizes.push(rel.len());
        lines.push_str(&format!(
            "component {i}: fiber {} -> fiber {}, {} related pairs\n",
            fiber_sizes[i],
            fiber_sizes[i + 1],
            rel.len()
        ));
        let mut next: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for &(a, m) in &acc {
            for &(m2, b) in &rel {
                if m == m2 {
                    next.insert((a, b));
                }
            }
        }
        acc = next;
    }
    let closed_witness = acc.iter().find(|&&(a, b)| a == b).map(|&(a, _)| a);
    match closed_witness {
        Some(v) => lines.push_str(&format!("closed elevation through lift {v}\n")),
        None => lines.push_str("diagonal empty: no closed elevations\n"),
    }
    Ok(VerifierTranscript { fiber_sizes, relation_sizes, closed_witness, lines })
}

/// Certificate that a closed route is essential.
#[derive(Clone, Debug)]
pub enum EssentialCertificate {
    /// All elevations to the universal cover were exhausted inside a
    /// developed ball of the given radius.
    BallExhaustion { radius: usize },
    /// Some finite cover has zero closed elevations; a null-homotopic path
    /// along the route would lift closed to every cover.
    Cover { degree: usize, transcript: String },
}

#[derive(Clone, Debug)]
pub enum Essentialness {
    /// A closed elevation to the universal cover, witnessed by the chain of
    /// ball vertices it visits.
    NonEssential(Vec<Vertex>),
    Essential(EssentialCertificate),
    Unknown(String),
}

impl Essentialness {
    pub fn is_essential(&self) -> bool {
        matches!(self, Essentialness::Essential(_))
    }
    pub fn is_non_essential(&self) -> bool {
        matches!(self, Essentialness::NonEssential(_))
    }
}

/// Enumerates route elevations inside a ball with initial vertex at the
/// center. Returns the reachable terminal vertices per step and whether the
/// enumeration was exhaustive.
pub struct BallEnumeration {
    pub layers: Vec<BTreeMap<Vertex, Vec<Vertex>>>,
    pub exhaustive: bool,
}

pub fn enumerate_in_ball(route: &Route, ball: &DevBall) -> Result<BallEnumeration> {
    let mut exhaustive = true;
    let mut current: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::from([(ball.center, vec![ball.center])]);
    let mut layers = vec![current.clone()];
    for comp in &route.components {
        let mut next: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for (&v, chain) in &current {
            let elev = ball.develop_elevation(&comp.map, comp.entry, v)?;
            if !elev.complete {
                exhaustive = false;
            }
            for w in elev.lifts_of(comp.exit) {
                let mut c2 = chain.clone();
                c2.push(w);
                next.entry(w).or_insert(c2);
            }
        }
        layers.push(next.clone());
        current = next;
    }
    Ok(BallEnumeration { layers, exhaustive })
}

/// Decides essentialness of a closed route: a closed elevation found in the
/// ball is a definite witness; an exhaustive ball enumeration with none is a
/// definite certificate; otherwise any hint cover verified to have zero
/// closed elevations certifies essentialness.
pub fn is_essential(
    x: &NpcComplex,
    route: &Route,
    radius: usize,
    hints: &[&CoveringMap],
) -> Result<Essentialness> {
    if !route.is_closed() {
        return Err(Error::Precondition("essentialness is about closed routes".into()));
    }
    route.validate(x.raw())?;
    let ball = develop(x, route.initial(), radius)?;
    let enumeration = enumerate_in_ball(route, &ball)?;
    if let Some(chain) = enumeration.layers.last().and_then(|l| l.get(&ball.center)) {
        return Ok(Essentialness::NonEssential(chain.clone()));
    }
    if enumeration.exhaustive {
        return Ok(Essentialness::Essential(EssentialCertificate::BallExhaustion { radius }));
    }
    for cov in hints {
        let t = verify_no_closed_elevations(route, cov)?;
        if t.no_closed() {
            return Ok(Essentialness::Essential(EssentialCertificate::Cover {
                degree: cov.degree,
                transcript: t.lines,
            }));
        }
    }
    Ok(Essentialness::Unknown(format!(
        "ball radius {radius} not exhaustive and no certifying cover among {} hints",
        hints.len()
    )))
}

/// The image subcomplexes of an elevation's components in the total space.
pub fn elevation_images(elev: &RouteElevation, total: &CubeComplex) -> Vec<SubcomplexRef> {
    elev.parts
        .iter()
        .map(|p| {
            LocalIso { domain: p.elevation.domain.clone(), map: p.elevation.to_total.clone() }
                .image(total)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::CellId;
    use crate::covers::{connected_voltage_cover, Voltage};
    use crate::generators;

    fn theta_route() -> (NpcComplex, Route) {
        let t = generators::theta(3);
        let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
        let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
        let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
        (t.into_npc().unwrap(), route)
    }

    #[test]
    fn theta_paths_along() {
        let (x, route) = theta_route();
        route.validate(x.raw()).unwrap();
        let paths = paths_along(&route, 1);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].segments[0], vec![EdgeEnd { edge: 0, end: 0 }]);
        assert_eq!(paths[0].segments[1], vec![EdgeEnd { edge: 1, end: 1 }]);
        // backtracking variants appear at length 3
        let paths3 = paths_along(&route, 3);
        assert!(paths3.len() > 1);
        assert!(paths3.iter().all(|p| p.segments[0].len() % 2 == 1));
    }

    #[test]
    fn degree_one_cover_elevation_is_the_route() {
        let (x, route) = theta_route();
        let cover = CoveringMap::trivial(x.raw());
        let elevs = elevations_of_route(&route, &cover).unwrap();
        assert_eq!(elevs.len(), 1);
        assert!(elevs[0].is_closed());
    }

    #[test]
    fn theta_imitator_cover_kills_the_route() {
        let (x, route) = theta_route();
        let hs = crate::hyperplane::hyperplanes(&x).unwrap();
        let y = SubcomplexRef::from_cells(x.raw(), [CellId::new(1, 0)]).unwrap();
        let ic = crate::walker::imitator_cover(&x, &hs, &y, 0).unwrap();
        let closed = closed_elevations(&route, &ic.cover).unwrap();
        assert!(closed.is_empty());
        // the independent verifier agrees
        let t = verify_no_closed_elevations(&route, &ic.cover).unwrap();
        assert!(t.no_closed(), "{}", t.lines);
    }

    #[test]
    fn verifier_matches_enumeration_on_random_covers() {
        let (x, route) = theta_route();
        let mut volt = Voltage::identity(3, 2);
        volt.perms[2] = vec![1, 0];
        let cov = connected_voltage_cover(&x, &volt).unwrap();
        let closed = closed_elevations(&route, &cov).unwrap();
        let t = verify_no_closed_elevations(&route, &cov).unwrap();
        assert_eq!(closed.is_empty(), t.no_closed());
        // this cover does not kill the route: a and b lift with identity
        assert!(!t.no_closed());
    }

    #[test]
    fn theta_route_essential() {
        let (x, route) = theta_route();
        let hs = crate::hyperplane::hyperplanes(&x).unwrap();
        let y = SubcomplexRef::from_cells(x.raw(), [CellId::new(1, 0)]).unwrap();
        let ic = crate::walker::imitator_cover(&x, &hs, &y, 0).unwrap();
        // edge components are simply connected, so a modest ball exhausts
        // all elevations
        let e = is_essential(&x, &route, 6, &[]).unwrap();
        assert!(matches!(e, Essentialness::Essential(EssentialCertificate::BallExhaustion { .. })));
        // with a radius too small to exhaust, the cover hint certifies
        let e = is_essential(&x, &route, 1, &[&ic.cover]).unwrap();
        match e {
            Essentialness::Essential(EssentialCertificate::Cover { degree, .. }) => {
                assert_eq!(degree, 2)
            }
            other => panic!("expected a cover certificate, got {other:?}"),
        }
    }

    #[test]
    fn null_route_detected_in_ball() {
        // Y_1 = Y_2 = the same edge: the route (p, a, q, a, p) realizes
        // a·ā which is null-homotopic.
        let t = generators::theta(3);
        let a1 = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
        let a2 = a1.clone();
        let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a1, a2]).unwrap();
        let x = t.into_npc().unwrap();
        let e = is_essential(&x, &route, 4, &[]).unwrap();
        assert!(e.is_non_essential(), "{e:?}");
    }

    #[test]
    fn torus_wrapping_route_essential_by_ball_exhaustion() {
        // on TORUS(4,4): a rectangle of segments wrapping once around the
        // first factor; all components simply connected, so the ball
        // enumeration is exhaustive.
        let t = generators::torus(4, 4);
        let vid = |i: usize, j: usize| (i % 4) * 4 + (j % 4);
        let seg = |verts: &[usize]| -> SubcomplexRef {
            let mut cells: Vec<CellId> = verts.iter().map(|&v| CellId::new(0, v)).collect();
            for w in verts.windows(2) {
                let e = (0..t.num_edges())
                    .find(|&e| {
                        let (a, b) = t.edge_endpoints(e);
                        (a, b) == (w[0], w[1]) || (a, b) == (w[1], w[0])
                    })
                    .unwrap();
                cells.push(CellId::new(1, e));
            }
            SubcomplexRef::from_cells(&t, cells).unwrap()
        };
        // wrap leftwards through x = 3: (0,0) -> (3,0) -> (2,0)
        let y1 = seg(&[vid(0, 0), vid(3, 0), vid(2, 0)]);
        let y2 = seg(&[vid(2, 0), vid(2, 1), vid(2, 2)]);
        let y3 = seg(&[vid(2, 2), vid(1, 2), vid(0, 2)]);
        let y4 = seg(&[vid(0, 2), vid(0, 1), vid(0, 0)]);
        let route = Route::from_subcomplexes(
            &t,
            vec![vid(0, 0), vid(2, 0), vid(2, 2), vid(0, 2), vid(0, 0)],
            vec![y1, y2, y3, y4],
        )
        .unwrap();
        let x = t.into_npc().unwrap();
        route.validate(x.raw()).unwrap();
        let e = is_essential(&x, &route, 8, &[]).unwrap();
        match e {
            Essentialness::Essential(EssentialCertificate::BallExhaustion { .. }) => {}
            other => panic!("expected ball exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn composition_coherence_for_covers() {
        // covers X'' -> X' -> X: a route with no closed elevations to X'
        // has none to X''.
        let (x, route) = theta_route();
        let hs = crate::hyperplane::hyperplanes(&x).unwrap();
        let y = SubcomplexRef::from_cells(x.raw(), [CellId::new(1, 0)]).unwrap();
        let ic = crate::walker::imitator_cover(&x, &hs, &y, 0).unwrap();
        let reg = crate::covers::regularize(&x, &ic.cover, 1000).unwrap();
        assert!(verify_no_closed_elevations(&route, &ic.cover).unwrap().no_closed());
        assert!(verify_no_closed_elevations(&route, &reg).unwrap().no_closed());
    }
}
