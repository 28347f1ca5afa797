//! The walker–imitator transducer and imitator covers.
//!
//! A walker wanders freely on the 1-skeleton of a finite directly special
//! complex `X`; an imitator confined to a locally convex subcomplex `Y`
//! copies each walker edge by traversing the unique parallel edge of `Y` at
//! its position when one exists, staying put otherwise. The return map of
//! this dynamics at a base vertex defines a finite-index subgroup and hence
//! the imitator cover. The covering property is verified during
//! construction rather than assumed, which turns the homotopy-invariance
//! lemma into a checked certificate.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};

use crate::complex::{EdgeEnd, NpcComplex, SubcomplexRef, Vertex};
use crate::covers::{assemble_cover, CoveringMap};
use crate::hyperplane::{edge_to_hyperplane, Hyperplane};
use crate::pathology::{pathology_report, Classification};
use crate::{Error, Result};

/// One imitator event; stationary steps are explicit so the response has the
/// same length as the walker path.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Step {
    Move(EdgeEnd),
    Stay,
}

/// Walker–imitator context over a checked directly special complex.
pub struct Imitation<'a> {
    pub x: &'a NpcComplex,
    pub y: &'a SubcomplexRef,
    e2h: Vec<usize>,
    /// (vertex, hyperplane) -> departing end of the unique Y-edge at that
    /// vertex dual to the hyperplane.
    y_edge_at: HashMap<(Vertex, usize), EdgeEnd>,
}

impl<'a> Imitation<'a> {
    pub fn new(x: &'a NpcComplex, hs: &[Hyperplane], y: &'a SubcomplexRef) -> Result<Imitation<'a>> {
        if pathology_report(x, hs).classification != Classification::DirectlySpecial {
            return Err(Error::Precondition("walker requires a directly special complex".into()));
        }
        if !y.is_locally_convex(x.raw()) {
            return Err(Error::Precondition("imitator subcomplex is not locally convex".into()));
        }
        let e2h = edge_to_hyperplane(hs, x.num_edges());
        let mut y_edge_at = HashMap::new();
        for v in y.vertices() {
            for end in x.ends_at(v) {
                if !y.contains(crate::complex::CellId::new(1, end.edge)) {
                    continue;
                }
                let h = e2h[end.edge];
                if y_edge_at.insert((v, h), end).is_some() {
                    // two parallel edges of Y at one vertex certify a
                    // self-osculation, contradicting direct specialness
                    return Err(Error::Internal(format!(
                        "two parallel edges of Y at vertex {v}: hyperplane {h} self-osculates"
                    )));
                }
            }
        }
        Ok(Imitation { x, y, e2h, y_edge_at })
    }

    /// One imitator step: the walker traverses `e` (departing end); the
    /// imitator at `y` follows the parallel Y-edge if it exists.
    pub fn step(&self, y: Vertex, walker_edge: EdgeEnd) -> (Vertex, Step) {
        let h = self.e2h[walker_edge.edge];
        match self.y_edge_at.get(&(y, h)) {
            Some(&f) => (self.x.edge_other(f), Step::Move(f)),
            None => (y, Step::Stay),
        }
    }

    /// The imitator response to a walker path: one event per walker step.
    pub fn imitate(&self, start: Vertex, path: &[EdgeEnd]) -> (Vertex, Vec<Step>) {
        let mut pos = start;
        let mut steps = Vec::with_capacity(path.len());
        for &e in path {
            let (next, s) = self.step(pos, e);
            steps.push(s);
            pos = next;
        }
        (pos, steps)
    }

    /// Renders the trace format: one line per step.
    pub fn trace(&self, start: Vertex, path: &[EdgeEnd]) -> String {
        let mut pos = start;
        let mut out = String::new();
        for (i, &e) in path.iter().enumerate() {
            let (next, s) = self.step(pos, e);
            let walker = if e.end == 0 { format!("{}", e.edge) } else { format!("{}~", e.edge) };
            let imit = match s {
                Step::Move(f) => format!("{}", f.edge),
                Step::Stay => "stay".to_string(),
            };
            out.push_str(&format!("step {i} walker {walker} imitator {imit}\n"));
            pos = next;
        }
        out
    }
}

/// Elementary homotopy invariance: across every square and every imitator
/// position the two boundary routes end at the same imitator vertex.
/// Returns a witness on failure.
pub fn check_gammasquare(
    im: &Imitation<'_>,
) -> Result<std::result::Result<(), (usize, Vertex, Vertex, Vertex)>> {
    let x = im.x;
    for sq in 0..x.dim_count(2) {
        for b in 0..4usize {
            let end_a = x.cube_edge(2, sq, 0, b)?;
            let end_b = x.cube_edge(2, sq, 1, b)?;
            let far_a = x.cube_edge(2, sq, 1, b ^ 1)?;
            let far_b = x.cube_edge(2, sq, 0, b ^ 2)?;
            for y in im.y.vertices() {
                let (p1, _) = im.imitate(y, &[end_a, far_a]);
                let (p2, _) = im.imitate(y, &[end_b, far_b]);
                if p1 != p2 {
                    return Ok(Err((sq, y, p1, p2)));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// An imitator cover with its basepoint and state labels.
pub struct ImitatorCover {
    pub cover: CoveringMap,
    /// index of the based lift (the state `(y, y)`)
    pub basepoint: Vertex,
    /// per total vertex, the transducer state (imitator, walker)
    pub states: Vec<(Vertex, Vertex)>,
}

/// Builds the imitator cover of `(X, Y, y0)`: the component of the state
/// `(y0, y0)` in the transducer graph, with squares and higher cubes lifted
/// and the covering property verified.
pub fn imitator_cover(
    x: &NpcComplex,
    hs: &[Hyperplane],
    y_sub: &SubcomplexRef,
    y0: Vertex,
) -> Result<ImitatorCover> {
    if !y_sub.contains_vertex(y0) {
        return Err(Error::Precondition("imitator basepoint must lie in Y".into()));
    }
    let im = Imitation::new(x, hs, y_sub)?;
    if let Err((sq, y, p1, p2)) = check_gammasquare(&im)? {
        return Err(Error::Internal(format!(
            "imitator is not homotopy invariant across square {sq} at {y}: {p1} vs {p2}"
        )));
    }
    // BFS the transducer component of (y0, y0)
    let mut index: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    let mut states: Vec<(Vertex, Vertex)> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((y0, y0), 0);
    states.push((y0, y0));
    queue.push_back(0usize);
    let mut edge_lifts: Vec<(usize, usize, usize)> = Vec::new();
    while let Some(si) = queue.pop_front() {
        let (yi, xi) = states[si];
        for end in x.ends_at(xi) {
            let (yj, _) = im.step(yi, end);
            let xj = x.edge_other(end);
            let sj = *index.entry((yj, xj)).or_insert_with(|| {
                states.push((yj, xj));
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            // reversibility: traversing back must return
            let (yb, _) = im.step(yj, EdgeEnd { edge: end.edge, end: 1 - end.end });
            if yb != yi {
                return Err(Error::Internal(format!(
                    "imitator step across edge {} is not reversible at state ({yi},{xi})",
                    end.edge
                )));
            }
            // register the edge lift once, from the corner-0 side
            if end.end == 0 {
                edge_lifts.push((end.edge, si, sj));
            } else if states[sj] == (yj, xj) && !index.contains_key(&(usize::MAX, usize::MAX)) {
                // the far side will register it when processed
            }
        }
    }
    // loops in X are excluded by direct specialness, so each edge lift was
    // seen exactly once from its corner-0 side; dedupe defensively
    edge_lifts.sort_unstable();
    edge_lifts.dedup();
    let vert_base: Vec<Vertex> = states.iter().map(|&(_, xv)| xv).collect();
    let cover = assemble_cover(x, &vert_base, &edge_lifts)?;
    let fiber_bound = y_sub.vertices().count();
    if cover.degree > fiber_bound {
        return Err(Error::Internal(format!(
            "imitator cover degree {} exceeds |V(Y)| = {fiber_bound}",
            cover.degree
        )));
    }
    Ok(ImitatorCover { cover, basepoint: 0, states })
}

/// Report of the subcomplex entrapment sampling.
#[derive(Clone, Debug)]
pub struct EntrapmentReport {
    pub trials: usize,
    pub stay_inside_checked: usize,
    pub stay_outside_checked: usize,
    pub violations: Vec<String>,
}

/// Samples random walker paths inside a locally convex, non-inter-osculating
/// subcomplex `Z` and asserts both entrapment clauses: an imitator starting
/// in `Y ∩ Z` stays in `Y ∩ Z`, and one starting outside `Z` stays outside.
/// Violations are a bug trap; the construction guarantees none.
pub fn entrapment_check(
    x: &NpcComplex,
    hs: &[Hyperplane],
    y_sub: &SubcomplexRef,
    z: &SubcomplexRef,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<EntrapmentReport> {
    if !z.is_locally_convex(x.raw()) {
        return Err(Error::Precondition("entrapment subcomplex is not locally convex".into()));
    }
    for h in hs {
        let osc = crate::pathology::subcomplex_osculations(x, h, z)?;
        if osc.inter_osculates() {
            return Err(Error::Precondition(format!(
                "subcomplex inter-osculates with hyperplane {}: {:?}",
                h.id, osc.witnesses
            )));
        }
    }
    let im = Imitation::new(x, hs, y_sub)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let z_verts: Vec<Vertex> = z.vertices().collect();
    let y_verts: Vec<Vertex> = y_sub.vertices().collect();
    let mut report = EntrapmentReport {
        trials,
        stay_inside_checked: 0,
        stay_outside_checked: 0,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        // random walker start in Z, random imitator start in Y
        let xw = z_verts[rng.gen_range(0..z_verts.len())];
        let yi = y_verts[rng.gen_range(0..y_verts.len())];
        let inside_case = z.contains_vertex(yi);
        let mut wpos = xw;
        let mut ipos = yi;
        for _ in 0..max_len {
            // walker step staying inside Z
            let opts: Vec<EdgeEnd> = x
                .ends_at(wpos)
                .into_iter()
                .filter(|end| z.contains(crate::complex::CellId::new(1, end.edge)))
                .collect();
            if opts.is_empty() {
                break;
            }
            let e = opts[rng.gen_range(0..opts.len())];
            let (inext, _) = im.step(ipos, e);
            wpos = x.edge_other(e);
            ipos = inext;
            if inside_case {
                report.stay_inside_checked += 1;
                if !(z.contains_vertex(ipos) && y_sub.contains_vertex(ipos)) {
                    report.violations.push(format!(
                        "imitator escaped Y∩Z: start ({yi},{xw}), now at {ipos}"
                    ));
                }
            } else {
                report.stay_outside_checked += 1;
                if z.contains_vertex(ipos) {
                    report
                        .violations
                        .push(format!("imitator entered Z: start ({yi},{xw}), now at {ipos}"));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::CellId;
    use crate::generators;
    use crate::hyperplane::hyperplanes;

    fn setup(x: crate::complex::CubeComplex) -> (NpcComplex, Vec<Hyperplane>) {
        let n = x.into_npc().unwrap();
        let hs = hyperplanes(&n).unwrap();
        (n, hs)
    }

    fn edge_sub(x: &crate::complex::CubeComplex, e: usize) -> SubcomplexRef {
        SubcomplexRef::from_cells(x, [CellId::new(1, e)]).unwrap()
    }

    #[test]
    fn imitator_copies_inside_y() {
        let (x, hs) = setup(generators::theta(3));
        let y = edge_sub(x.raw(), 0);
        let im = Imitation::new(&x, &hs, &y).unwrap();
        // walker traverses edge 0 back and forth from p=0
        let path = [EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 0, end: 1 }];
        let (end, steps) = im.imitate(0, &path);
        assert_eq!(end, 0);
        assert!(matches!(steps[0], Step::Move(_)));
    }

    #[test]
    fn segment_imitator_stays() {
        // X = SEG(3) a-b-c-d, Y = edge ab, walker a->b->c: imitator moves
        // then stays (no squares, so no parallel edge at b).
        let (x, hs) = setup(generators::segment(3));
        let y = edge_sub(x.raw(), 0);
        let im = Imitation::new(&x, &hs, &y).unwrap();
        let path = [EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 1, end: 0 }];
        let (end, steps) = im.imitate(0, &path);
        assert_eq!(steps, vec![Step::Move(EdgeEnd { edge: 0, end: 0 }), Step::Stay]);
        assert_eq!(end, 1);
    }

    #[test]
    fn square_boundary_imitation() {
        // X = one square, Y = bottom edge, walker up-right-down from the
        // bottom-left corner: imitator stays, moves right, stays.
        let (x, hs) = setup(generators::cube(2));
        // bottom edge = the edge between corners 0 and 1 = axis-0 edge at
        // side 0 of the square
        let sq_edges: Vec<EdgeEnd> =
            (0..2).map(|a| x.cube_edge(2, 0, a, 0).unwrap()).collect();
        let bottom = sq_edges[0].edge;
        let left = sq_edges[1].edge;
        let y = edge_sub(x.raw(), bottom);
        let im = Imitation::new(&x, &hs, &y).unwrap();
        // walker: up along left edge, right along top edge, down again
        let up = EdgeEnd { edge: left, end: x.cube_edge(2, 0, 1, 0).unwrap().end };
        let top = x.cube_edge(2, 0, 0, 2).unwrap();
        let down_edge = x.cube_edge(2, 0, 1, 1).unwrap();
        let path = [up, top, EdgeEnd { edge: down_edge.edge, end: 1 - down_edge.end }];
        let (end, steps) = im.imitate(0, &path);
        assert_eq!(steps[0], Step::Stay);
        assert!(matches!(steps[1], Step::Move(_)));
        assert_eq!(steps[2], Step::Stay);
        // the imitator ends at the bottom-right corner
        assert_eq!(end, x.cells[2][0].corners[1]);
    }

    #[test]
    fn gammasquare_on_fixtures() {
        for (x, sub_edge) in [
            (generators::torus(2, 2), 0usize),
            (generators::cube(2), 0),
            (generators::cylinder(4), 0),
        ] {
            let (n, hs) = setup(x);
            let y = edge_sub(n.raw(), sub_edge);
            if !y.is_locally_convex(n.raw()) {
                continue;
            }
            let im = Imitation::new(&n, &hs, &y).unwrap();
            assert!(check_gammasquare(&im).unwrap().is_ok());
        }
    }

    #[test]
    fn reversibility_exhaustive() {
        let (x, hs) = setup(generators::torus(2, 2));
        let y = edge_sub(x.raw(), 0);
        let im = Imitation::new(&x, &hs, &y).unwrap();
        for yv in im.y.vertices().collect::<Vec<_>>() {
            for xv in 0..x.num_vertices() {
                let _ = xv;
                for end in x.ends_at(xv) {
                    let (y1, _) = im.step(yv, end);
                    let (y2, _) = im.step(y1, EdgeEnd { edge: end.edge, end: 1 - end.end });
                    assert_eq!(y2, yv);
                }
            }
        }
    }

    #[test]
    fn theta_imitator_cover() {
        // X = THETA, Y = edge a: a degree-2 cover where the loop a·b̄ does
        // not lift closed at the basepoint.
        let (x, hs) = setup(generators::theta(3));
        let y = edge_sub(x.raw(), 0);
        let ic = imitator_cover(&x, &hs, &y, 0).unwrap();
        assert_eq!(ic.cover.degree, 2);
        // a (0->1 via edge 0) then b reversed (1->0 via edge 1)
        let path = [EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 1, end: 1 }];
        let (_, endv) = ic.cover.lift_path(ic.basepoint, &path).unwrap();
        assert_ne!(endv, ic.basepoint, "a·b̄ must not lift closed");
    }

    #[test]
    fn torus_imitator_cover_loop_semantics() {
        let (x, hs) = setup(generators::torus(2, 2));
        // Y = the horizontal circle through vertex 0
        let mut cells = vec![CellId::new(0, 0)];
        for e in 0..x.num_edges() {
            let (u, v) = x.edge_endpoints(e);
            if u % 2 == 0 && v % 2 == 0 {
                cells.push(CellId::new(1, e));
            }
        }
        let y = SubcomplexRef::from_cells(x.raw(), cells).unwrap();
        assert!(y.is_locally_convex(x.raw()));
        let ic = imitator_cover(&x, &hs, &y, 0).unwrap();
        assert!(ic.cover.degree <= y.vertices().count());
        // subgroup semantics: loops at 0 of length <= 6 lift closed iff the
        // imitator returns to 0
        let im = Imitation::new(&x, &hs, &y).unwrap();
        let mut stack: Vec<(Vertex, Vec<EdgeEnd>)> = vec![(0, vec![])];
        while let Some((pos, path)) = stack.pop() {
            if path.len() == 6 {
                continue;
            }
            for end in x.ends_at(pos) {
                let mut p2 = path.clone();
                p2.push(end);
                let next = x.edge_other(end);
                if next == 0 {
                    let (ipos, _) = im.imitate(0, &p2);
                    let (_, lift_end) = ic.cover.lift_path(ic.basepoint, &p2).unwrap();
                    assert_eq!(ipos == 0, lift_end == ic.basepoint);
                }
                stack.push((next, p2));
            }
        }
    }

    #[test]
    fn entrapment_on_torus() {
        let (x, hs) = setup(generators::torus(2, 2));
        let mut cells = vec![CellId::new(0, 0)];
        for e in 0..x.num_edges() {
            let (u, v) = x.edge_endpoints(e);
            if u % 2 == 0 && v % 2 == 0 {
                cells.push(CellId::new(1, e));
            }
        }
        let y = SubcomplexRef::from_cells(x.raw(), cells).unwrap();
        // Z = a vertical circle: locally convex, no inter-osculation
        let mut zc = vec![CellId::new(0, 0)];
        for e in 0..x.num_edges() {
            let (u, v) = x.edge_endpoints(e);
            if u / 2 == v / 2 && u % 2 == 0 && v % 2 == 0 {
                // same first coordinate (vertical), through vertices 0,1
            }
            if u / 2 == v / 2 && (u == 0 || v == 0 || u == 1 || v == 1) {
                zc.push(CellId::new(1, e));
            }
        }
        let z = SubcomplexRef::from_cells(x.raw(), zc).unwrap();
        assert!(z.is_locally_convex(x.raw()));
        let report = entrapment_check(&x, &hs, &y, &z, 50, 12, 7).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.stay_inside_checked + report.stay_outside_checked > 0);
    }
}
