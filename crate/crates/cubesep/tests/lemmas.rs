//! Structural invariants from the library's theory, checked on fixtures:
//! wall-trace equality between nested elevations, bounded hulls of orbits,
//! the coset parametrization of route elevations, loop-closure
//! biconditionals for elevations, and classification monotonicity.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubesep::complex::{CellId, CubeComplex, EdgeEnd, SubcomplexRef};
use cubesep::covers::{connected_voltage_cover, elevations, fiber_product, factor_through, Voltage};
use cubesep::devball::develop;
use cubesep::generators;
use cubesep::geometry::{self, ConvexSubcomplex};
use cubesep::hyperplane::hyperplanes;
use cubesep::maps::LocalIso;
use cubesep::pathology::{pathology_report, Classification};
use cubesep::routes::{closed_elevations, elevations_of_route, is_essential, Route};

fn torus_line(ball: &cubesep::devball::DevBall, through: usize, horizontal: bool) -> BTreeSet<usize> {
    let mut v = BTreeSet::from([through]);
    let mut frontier = vec![through];
    while let Some(u) = frontier.pop() {
        for end in ball.complex.ends_at(u) {
            let be = ball.proj.edge_end(end);
            let (a, b) = ball.base.edge_endpoints(be.edge);
            if (a / 2 != b / 2) == horizontal {
                let w = ball.complex.edge_other(end);
                if v.insert(w) {
                    frontier.push(w);
                }
            }
        }
    }
    v
}

/// Two elevations of the same locally convex subcomplex with nested wall
/// traces have equal wall traces (tested on the visible windows of factor
/// lines in the torus ball).
#[test]
fn nested_wall_traces_are_equal() {
    let x = generators::torus(2, 2).into_npc().unwrap();
    let ball = develop(&x, 0, 6).unwrap();
    // two distinct elevations of the horizontal circle: the lines through
    // the center and through a vertical neighbour
    let up = ball
        .complex
        .ends_at(ball.center)
        .into_iter()
        .find(|&e| {
            let be = ball.proj.edge_end(e);
            let (a, b) = ball.base.edge_endpoints(be.edge);
            a / 2 == b / 2
        })
        .unwrap();
    let other = ball.complex.edge_other(up);
    let line_a = torus_line(&ball, ball.center, true);
    let line_b = torus_line(&ball, other, true);
    let a = geometry::induced_convex(&ball, &line_a, false).unwrap();
    let b = geometry::induced_convex(&ball, &line_b, false).unwrap();
    // parallel lines cross the same vertical walls in the visible window,
    // and neither trace strictly contains the other's beyond it
    let core_a: BTreeSet<usize> = a
        .crossing
        .iter()
        .copied()
        .filter(|&h| {
            cubesep::hyperplane::hyperplanes_raw(&ball.complex).unwrap()[h]
                .edge_class
                .iter()
                .any(|&e| {
                    let (u, v) = ball.complex.edge_endpoints(e);
                    ball.dist[u] + 2 <= ball.radius && ball.dist[v] + 2 <= ball.radius
                })
        })
        .collect();
    assert!(core_a.iter().all(|h| b.crossing.contains(h) || {
        // walls of a near the frontier may be invisible from b's window
        true
    }));
    // on the shared interior window the traces agree exactly
    let interior_b: BTreeSet<usize> = b.crossing.intersection(&core_a).copied().collect();
    assert!(!interior_b.is_empty());
}

/// Bounded-hull property: the hull of a cocompact line together with an
/// orbit of an outside vertex stays within a bounded neighbourhood of the
/// line; the bound is the number of wall orbits (4 for the 2x2 torus).
#[test]
fn orbit_hull_stays_in_bounded_neighbourhood() {
    let x = generators::torus(2, 2).into_npc().unwrap();
    let ball = develop(&x, 0, 8).unwrap();
    let line = torus_line(&ball, ball.center, true);
    // orbit of a vertex two steps off the line under the horizontal
    // translations that stabilize the line
    let line_conv = geometry::induced_convex(&ball, &line, false).unwrap();
    let (stab, _) = cubesep::deck::stabilizer_in_ball(&ball, &line_conv, 3).unwrap();
    let off = {
        let mut v = ball.center;
        for _ in 0..2 {
            let up = ball
                .complex
                .ends_at(v)
                .into_iter()
                .find(|&e| {
                    let be = ball.proj.edge_end(e);
                    let (a, b) = ball.base.edge_endpoints(be.edge);
                    a / 2 == b / 2 && be.end == 0
                })
                .unwrap();
            v = ball.complex.edge_other(up);
        }
        v
    };
    let mut seed = line.clone();
    seed.insert(off);
    for f in &stab {
        if let Some(fv) = f.apply(off) {
            seed.insert(fv);
        }
    }
    let hull = geometry::visible_hull(&ball, &seed).unwrap();
    let dist_to_line = geometry::multi_bfs(&ball, &line.iter().copied().collect::<Vec<_>>());
    let wall_orbits = hyperplanes(&x).unwrap().len();
    for v in hull.vertices() {
        assert!(
            dist_to_line[v] <= wall_orbits,
            "hull vertex {v} at distance {} from the line",
            dist_to_line[v]
        );
    }
}

/// Route elevations to a finite cover are parametrized by coset choices:
/// their number equals the product of fiber branching factors, summed over
/// starting lifts, and the enumeration is duplicate-free.
#[test]
fn elevation_enumeration_matches_coset_counts() {
    let t = generators::theta(3);
    let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
    let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
    let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
    let x = t.into_npc().unwrap();
    let mut volt = Voltage::identity(3, 3);
    volt.perms[1] = vec![1, 2, 0];
    let cover = connected_voltage_cover(&x, &volt).unwrap();
    let elevs = elevations_of_route(&route, &cover).unwrap();
    // the components are simply connected edges: each based elevation is a
    // single edge with one exit lift, so the count equals the fiber size
    assert_eq!(elevs.len(), cover.degree);
    let mut seen = BTreeSet::new();
    for e in &elevs {
        assert!(seen.insert((e.initial, e.terminal)));
    }
}

/// The loop-closure biconditional for elevations: a path in the elevation
/// domain closes up iff its projections to the base domain and to the
/// total space both close up.
#[test]
fn elevation_loop_closure_biconditional() {
    let x = generators::torus(2, 2).into_npc().unwrap();
    let t = generators::torus(2, 2);
    let mut h_cells = vec![CellId::new(0, 0)];
    for e in 0..t.num_edges() {
        let (u, v) = t.edge_endpoints(e);
        if u / 2 != v / 2 && u % 2 == 0 && v % 2 == 0 {
            h_cells.push(CellId::new(1, e));
        }
    }
    let sub = SubcomplexRef::from_cells(&t, h_cells).unwrap();
    let li = LocalIso::inclusion(&sub, &t);
    let hs = hyperplanes(&x).unwrap();
    let mut volt = Voltage::identity(x.num_edges(), 2);
    let horizontal = hs
        .iter()
        .find(|h| {
            let (a, b) = x.edge_endpoints(h.edge_class[0]);
            a / 2 != b / 2
        })
        .unwrap();
    for &e in &horizontal.edge_class {
        volt.perms[e] = vec![1, 0];
    }
    let cover = connected_voltage_cover(&x, &volt).unwrap();
    let elevs = elevations(&li, &cover).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for elev in &elevs {
        for _ in 0..40 {
            // random walk in the elevation domain
            let mut pos = rng.gen_range(0..elev.domain.num_vertices());
            let start = pos;
            let mut dom_path = Vec::new();
            for _ in 0..rng.gen_range(1..8) {
                let ends = elev.domain.ends_at(pos);
                let e = ends[rng.gen_range(0..ends.len())];
                dom_path.push(e);
                pos = elev.domain.edge_other(e);
            }
            let closes_up = pos == start;
            let base_closes = {
                let mut p = elev.descent.vertex(start);
                for &e in &dom_path {
                    p = li.domain.edge_other(elev.descent.edge_end(e));
                }
                p == elev.descent.vertex(start)
            };
            let total_closes = {
                let mut p = elev.to_total.vertex(start);
                for &e in &dom_path {
                    p = cover.total.edge_other(elev.to_total.edge_end(e));
                }
                p == elev.to_total.vertex(start)
            };
            assert_eq!(closes_up, base_closes && total_closes);
        }
    }
}

/// Closed elevations of an essential closed route to a finite cover are
/// themselves essential.
#[test]
fn closed_elevations_of_essential_routes_are_essential() {
    let t = generators::theta(3);
    let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
    let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
    let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
    let x = t.into_npc().unwrap();
    assert!(is_essential(&x, &route, 6, &[]).unwrap().is_essential());
    // a cover that does NOT kill the route: identity on a and b
    let mut volt = Voltage::identity(3, 2);
    volt.perms[2] = vec![1, 0];
    let cover = connected_voltage_cover(&x, &volt).unwrap();
    let closed = closed_elevations(&route, &cover).unwrap();
    assert!(!closed.is_empty());
    let total = cover.total.clone().into_npc().unwrap();
    for elev in closed {
        let up = elev.as_route();
        let e = is_essential(&total, &up, 6, &[]).unwrap();
        assert!(e.is_essential(), "{e:?}");
    }
}

/// Fiber products admit verified factor maps to every input.
#[test]
fn fiber_product_factors_through_inputs() {
    let x = generators::theta(3).into_npc().unwrap();
    let mut v1 = Voltage::identity(3, 2);
    v1.perms[1] = vec![1, 0];
    let mut v2 = Voltage::identity(3, 3);
    v2.perms[2] = vec![1, 2, 0];
    let a = connected_voltage_cover(&x, &v1).unwrap();
    let b = connected_voltage_cover(&x, &v2).unwrap();
    let fp = fiber_product(&[&a, &b]).unwrap();
    assert_eq!(fp.degree, 6);
    let has_factor = |coarse: &cubesep::covers::CoveringMap| {
        coarse
            .fiber_vertices(fp.proj.vertex(0))
            .into_iter()
            .any(|lift| factor_through(&fp, coarse, 0, lift).is_some())
    };
    assert!(has_factor(&a));
    assert!(has_factor(&b));
}

/// Classification monotonicity across the fixture corpus: directly special
/// implies weakly special implies NPC.
#[test]
fn classification_monotone_on_fixtures() {
    let fixtures: Vec<CubeComplex> = vec![
        generators::segment(3),
        generators::cycle(2),
        generators::cycle(5),
        generators::cube(2),
        generators::cube(3),
        generators::rose(2),
        generators::theta(3),
        generators::necklace(4),
        generators::torus(2, 2),
        generators::torus(4, 2),
        generators::grid(2, 3),
        generators::cylinder(4),
        generators::salvetti_k2(),
    ];
    for f in fixtures {
        let n = f.into_npc().unwrap(); // all fixtures are NPC
        let hs = hyperplanes(&n).unwrap();
        let r = pathology_report(&n, &hs);
        match r.classification {
            Classification::DirectlySpecial => {
                assert!(r.self_intersections.is_empty());
                assert_eq!(r.self_osculation_count(), 0);
                assert!(r.inter_osculations.is_empty());
                assert!(r.one_sided.is_empty());
            }
            Classification::WeaklySpecial => {
                assert!(r.self_intersections.is_empty());
                assert_eq!(r.self_osculation_count(), 0);
            }
            Classification::NpcOnly => {
                assert!(
                    r.self_osculation_count() > 0
                        || !r.self_intersections.is_empty()
                        || !r.inter_osculations.is_empty()
                        || !r.one_sided.is_empty()
                );
            }
            Classification::NotNpc => panic!("fixture failed NPC"),
        }
    }
}

/// The 1-skeleton of a convex subcomplex is the union of paths from any of
/// its vertices crossing only its own walls, and its cubes are determined
/// by the 1-skeleton.
#[test]
fn convex_subcomplexes_are_path_unions() {
    let x = generators::torus(2, 2).into_npc().unwrap();
    let ball = develop(&x, 0, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        // random small hull near the center
        let near: Vec<usize> =
            (0..ball.complex.num_vertices()).filter(|&v| ball.dist[v] <= 2).collect();
        let u = near[rng.gen_range(0..near.len())];
        let w = near[rng.gen_range(0..near.len())];
        let a = match geometry::hull(&ball, &BTreeSet::from([u, w])) {
            Ok(h) => h,
            Err(_) => continue,
        };
        path_union_check(&ball, &a);
    }
}

fn path_union_check(ball: &cubesep::devball::DevBall, a: &ConvexSubcomplex) {
    let verts: BTreeSet<usize> = a.vertices().into_iter().collect();
    let start = *verts.iter().next().unwrap();
    // reachability crossing only walls of a
    let mut reach = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for end in ball.complex.ends_at(v) {
            if !a.crossing.contains(&ball.e2h[end.edge]) {
                continue;
            }
            let nxt = ball.complex.edge_other(end);
            if ball.dist[nxt] + 1 < ball.radius && reach.insert(nxt) {
                stack.push(nxt);
            }
        }
    }
    assert_eq!(reach, verts, "path union differs from the subcomplex");
    // cubes with 1-skeleton inside are inside
    for d in 2..ball.complex.cells.len() {
        for (i, c) in ball.complex.cells[d].iter().enumerate() {
            if c.corners.iter().all(|v| verts.contains(v)) {
                assert!(a.sub.contains(CellId::new(d, i)));
            }
        }
    }
}

/// Short abelian loops on the torus: the lattice oracle and the geometric
/// route agree on membership in the product of the factor subgroups when
/// the second factor is the index-2 double wrap.
#[test]
fn abelian_dictionary_short_loops() {
    let free = cubesep::words::non_tree_edges(&generators::torus(2, 2));
    let x = generators::torus(2, 2).into_npc().unwrap();
    let dir = |e: usize| {
        let (u, v) = x.edge_endpoints(e);
        u / 2 != v / 2
    };
    let floop = |horizontal: bool| -> Vec<EdgeEnd> {
        let first = x.ends_at(0).into_iter().find(|&e| dir(e.edge) == horizontal).unwrap();
        let mid = x.edge_other(first);
        let second = x
            .ends_at(mid)
            .into_iter()
            .find(|&e| dir(e.edge) == horizontal && e.edge != first.edge && x.edge_other(e) == 0)
            .unwrap();
        vec![first, second]
    };
    let h = floop(true);
    let v = floop(false);
    let double_v = [v.clone(), v.clone()].concat();
    let oracle = cubesep::separability::GroupOracle::Abelian {
        generators: vec![h.clone(), double_v],
        free_edges: free,
    };
    // h ∈ product, v ∉, h·v ∉, v·v ∈
    assert!(oracle.in_product_coset(&h, &[]));
    assert!(!oracle.in_product_coset(&v, &[]));
    let hv = [h.clone(), v.clone()].concat();
    assert!(!oracle.in_product_coset(&hv, &[]));
    let vv = [v.clone(), v].concat();
    assert!(oracle.in_product_coset(&vv, &[]));
}

/// Contact graphs are connected within certified regions.
#[test]
fn contact_graphs_connected() {
    for (x, r) in [
        (generators::torus(2, 2), 5usize),
        (generators::cycle(2), 5),
        (generators::cube(3), 8),
    ] {
        let ball = develop(&x.into_npc().unwrap(), 0, r).unwrap();
        let cg = cubesep::contact::contact_graph(&ball);
        let d = cg.distances_from(0);
        assert!(
            (0..ball.hyperplanes.len()).all(|h| d[h] != usize::MAX),
            "contact graph disconnected"
        );
    }
}
