//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Everything here is exact; tolerances are time budgets only.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubesep::complex::{CellId, CubeComplex, EdgeEnd, NpcComplex, SubcomplexRef};
use cubesep::covers::{connected_voltage_cover, Voltage};
use cubesep::devball::{develop, DevBall};
use cubesep::generators;
use cubesep::geometry;
use cubesep::hyperplane::{edge_to_hyperplane, hyperplanes, hyperplanes_raw};
use cubesep::maps::LocalIso;
use cubesep::pathology::{pathology_report, Classification};
use cubesep::routes::{
    closed_elevations, is_essential, paths_along, verify_no_closed_elevations, Route,
};
use cubesep::synth::{synthesize_cover, SynthBudget};
use cubesep::walker::{check_gammasquare, imitator_cover, Imitation};

fn npc(x: CubeComplex) -> NpcComplex {
    x.into_npc().unwrap()
}

fn seg_sub(x: &CubeComplex, verts: &[usize]) -> SubcomplexRef {
    let mut cells: Vec<CellId> = verts.iter().map(|&v| CellId::new(0, v)).collect();
    for w in verts.windows(2) {
        let e = (0..x.num_edges())
            .find(|&e| {
                let (a, b) = x.edge_endpoints(e);
                (a, b) == (w[0], w[1]) || (a, b) == (w[1], w[0])
            })
            .unwrap_or_else(|| panic!("no edge {}-{}", w[0], w[1]));
        cells.push(CellId::new(1, e));
    }
    SubcomplexRef::from_cells(x, cells).unwrap()
}

fn circle_sub(x: &CubeComplex, horizontal: bool) -> SubcomplexRef {
    // the factor circle of TORUS(2,2) through vertex 0: the horizontal
    // circle runs through the row vb = 0, the vertical one through the
    // column va = 0
    let mut cells = vec![CellId::new(0, 0)];
    for e in 0..x.num_edges() {
        let (u, v) = x.edge_endpoints(e);
        let keep = if horizontal {
            u / 2 != v / 2 && u % 2 == 0 && v % 2 == 0
        } else {
            u / 2 == v / 2 && u / 2 == 0
        };
        if keep {
            cells.push(CellId::new(1, e));
        }
    }
    SubcomplexRef::from_cells(x, cells).unwrap()
}

#[test]
fn criterion_1_specialness_classification() {
    let t0 = Instant::now();
    let s = npc(generators::salvetti_k2());
    let hs = hyperplanes(&s).unwrap();
    let r = pathology_report(&s, &hs);
    assert_eq!(r.classification, Classification::NpcOnly);
    assert_eq!(r.self_osculation_count(), 2);
    assert!(r.self_intersections.is_empty() && r.inter_osculations.is_empty());

    for x in [generators::torus(2, 2), generators::theta(3)] {
        let n = npc(x);
        let hs = hyperplanes(&n).unwrap();
        let r = pathology_report(&n, &hs);
        assert_eq!(r.classification, Classification::DirectlySpecial);
        assert_eq!(r.self_osculation_count(), 0);
        assert!(r.self_intersections.is_empty());
        assert!(r.inter_osculations.is_empty());
        assert!(r.one_sided.is_empty());
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    println!("criterion 1 (specialness classification): PASS in {dt:?}");
}

/// Brute-force parallelism closure: repeatedly merge edge sets that appear
/// as opposite sides of a square, until a fixpoint. No union-find.
fn brute_force_classes(x: &CubeComplex) -> Vec<BTreeSet<usize>> {
    let mut classes: Vec<BTreeSet<usize>> =
        (0..x.num_edges()).map(|e| BTreeSet::from([e])).collect();
    loop {
        let mut merged = false;
        'outer: for sq in 0..x.dim_count(2) {
            for axis in 0..2 {
                let e0 = x.cube_edge(2, sq, axis, 0).unwrap().edge;
                let e1 = x.cube_edge(2, sq, axis, 3).unwrap().edge;
                let c0 = classes.iter().position(|c| c.contains(&e0)).unwrap();
                let c1 = classes.iter().position(|c| c.contains(&e1)).unwrap();
                if c0 != c1 {
                    let moved = classes.remove(c0.max(c1));
                    classes[c0.min(c1)].extend(moved);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return classes;
        }
    }
}

/// Independent carrier computation: all cells one of whose 1-faces (taken
/// through every corner, not just corner 0) lies in the class, plus faces.
fn brute_force_carrier(x: &CubeComplex, class: &BTreeSet<usize>) -> BTreeSet<CellId> {
    let mut seed: Vec<CellId> = class.iter().map(|&e| CellId::new(1, e)).collect();
    for d in 2..=x.max_dim() {
        for idx in 0..x.dim_count(d) {
            let mut crossed = false;
            for axis in 0..d {
                for b in 0..1usize << d {
                    if (b >> axis) & 1 == 1 {
                        continue;
                    }
                    if class.contains(&x.cube_edge(d, idx, axis, b).unwrap().edge) {
                        crossed = true;
                    }
                }
            }
            if crossed {
                seed.push(CellId::new(d, idx));
            }
        }
    }
    SubcomplexRef::from_cells(x, seed).unwrap().cells
}

#[test]
fn criterion_2_hyperplane_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut count = 0;
    while count < 100 {
        // random small fixture: a product of two pieces, optionally covered
        let piece = |rng: &mut ChaCha8Rng| -> CubeComplex {
            match rng.gen_range(0..3) {
                0 => generators::segment(rng.gen_range(1..=3)),
                1 => generators::cycle(rng.gen_range(2..=4)),
                _ => generators::cube(rng.gen_range(1..=2)),
            }
        };
        let a = piece(&mut rng);
        let b = piece(&mut rng);
        let base = generators::product(&a, &b);
        let x = match base.clone().into_npc() {
            Ok(n) => n,
            Err(_) => continue,
        };
        let x = if rng.gen_bool(0.5) {
            // a random voltage cover of degree <= 4
            let m = rng.gen_range(2..=4);
            let mut volt = Voltage::identity(x.num_edges(), m);
            let hs = hyperplanes(&x).unwrap();
            for h in &hs {
                if rng.gen_bool(0.5) {
                    let shift = rng.gen_range(1..m);
                    let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m).collect();
                    for &e in &h.edge_class {
                        volt.perms[e] = perm.clone();
                    }
                }
            }
            match connected_voltage_cover(&x, &volt) {
                Ok(c) => npc(c.total),
                Err(_) => continue,
            }
        } else {
            x
        };
        let hs = hyperplanes(&x).unwrap();
        let mut got: Vec<BTreeSet<usize>> =
            hs.iter().map(|h| h.edge_class.iter().copied().collect()).collect();
        got.sort();
        let mut want = brute_force_classes(x.raw());
        want.sort();
        assert_eq!(got, want, "parallelism closure mismatch");
        for h in &hs {
            let class: BTreeSet<usize> = h.edge_class.iter().copied().collect();
            assert_eq!(h.carrier.cells, brute_force_carrier(x.raw(), &class));
        }
        count += 1;
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!("criterion 2 (hyperplane oracle, {count} fixtures): PASS in {dt:?}");
}

/// A random rectangle in a grid ball: all vertices within given coordinate
/// spans from a random corner, walked along edge directions.
fn random_grid_rectangle(ball: &DevBall, rng: &mut ChaCha8Rng) -> Option<BTreeSet<usize>> {
    let horizontal = |ball: &DevBall, e: EdgeEnd| {
        let be = ball.proj.edge_end(e);
        let (u, v) = ball.base.edge_endpoints(be.edge);
        u / 2 != v / 2
    };
    let near: Vec<usize> =
        (0..ball.complex.num_vertices()).filter(|&v| ball.dist[v] <= 2).collect();
    let start = near[rng.gen_range(0..near.len())];
    let (w, h) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
    let mut rows = vec![start];
    let mut cur = start;
    for _ in 0..h {
        let up = ball
            .complex
            .ends_at(cur)
            .into_iter()
            .find(|&e| !horizontal(ball, e) && ball.proj.edge_end(e).end == 0)?;
        cur = ball.complex.edge_other(up);
        rows.push(cur);
    }
    let mut verts = BTreeSet::new();
    for &r in &rows {
        let mut c = r;
        verts.insert(c);
        for _ in 0..w {
            let right = ball
                .complex
                .ends_at(c)
                .into_iter()
                .find(|&e| horizontal(ball, e) && ball.proj.edge_end(e).end == 0)?;
            c = ball.complex.edge_other(right);
            verts.insert(c);
        }
    }
    Some(verts)
}

#[test]
fn criterion_3_gate_hull_bridge() {
    let t0 = Instant::now();
    let grid = develop(&npc(generators::torus(2, 2)), 0, 6).unwrap();
    let tree = develop(&npc(generators::theta(3)), 0, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // gate distance = separating wall count, on both balls
    let mut gate_checks = 0;
    for ball in [&grid, &tree] {
        for _ in 0..300 {
            let vs = match random_convex(ball, &mut rng) {
                Some(v) => v,
                None => continue,
            };
            let a = geometry::induced_convex(ball, &vs, true).unwrap();
            let x = rng.gen_range(0..ball.complex.num_vertices());
            if ball.dist[x] > 2 {
                continue;
            }
            let g = match geometry::gate(ball, &a, x) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let d = geometry::bfs(ball, x)[g];
            if d == 0 {
                continue;
            }
            let seps = geometry::separators(ball, x, g).unwrap();
            assert_eq!(seps.len(), d, "gate distance vs separating walls");
            gate_checks += 1;
        }
    }
    assert!(gate_checks >= 40, "only {gate_checks} gate checks");

    // bridge invariants on >= 200 random convex pairs (bridge() verifies
    // all four invariants internally and errors on any failure)
    let mut pairs = 0;
    let mut attempts = 0;
    while pairs < 200 && attempts < 4000 {
        attempts += 1;
        let ball = if attempts % 2 == 0 { &grid } else { &tree };
        let (Some(va), Some(vb)) = (random_convex(ball, &mut rng), random_convex(ball, &mut rng))
        else {
            continue;
        };
        let a = geometry::induced_convex(ball, &va, true).unwrap();
        let b = geometry::induced_convex(ball, &vb, true).unwrap();
        match geometry::bridge(ball, &a, &b) {
            Ok(br) => {
                let want: BTreeSet<usize> =
                    a.crossing.intersection(&b.crossing).copied().collect();
                assert_eq!(br.c.crossing, want);
                pairs += 1;
            }
            Err(cubesep::Error::RadiusExhausted { .. }) => continue,
            Err(e) => panic!("bridge invariant failure: {e}"),
        }
    }
    assert!(pairs >= 200, "only {pairs} bridge pairs");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}");
    println!("criterion 3 (gate/hull/bridge, {pairs} pairs): PASS in {dt:?}");
}

fn random_convex(ball: &DevBall, rng: &mut ChaCha8Rng) -> Option<BTreeSet<usize>> {
    if ball.base.dim_count(2) > 0 {
        random_grid_rectangle(ball, rng)
    } else {
        // tree: hull of two near-center vertices is the geodesic
        let near: Vec<usize> =
            (0..ball.complex.num_vertices()).filter(|&v| ball.dist[v] <= 2).collect();
        let u = near[rng.gen_range(0..near.len())];
        let v = near[rng.gen_range(0..near.len())];
        Some(geometry::interval(ball, u, v).ok()?)
    }
}

#[test]
fn criterion_4_orthogonal_complement() {
    let t0 = Instant::now();
    let x = npc(generators::torus(2, 2));
    let ball = develop(&x, 0, 6).unwrap();
    // A = the horizontal line through the center
    let line = {
        let mut v = BTreeSet::from([ball.center]);
        let mut frontier = vec![ball.center];
        while let Some(u) = frontier.pop() {
            for end in ball.complex.ends_at(u) {
                let be = ball.proj.edge_end(end);
                let (a, b) = ball.base.edge_endpoints(be.edge);
                if a / 2 != b / 2 {
                    let w = ball.complex.edge_other(end);
                    if v.insert(w) {
                        frontier.push(w);
                    }
                }
            }
        }
        v
    };
    let a = geometry::induced_convex(&ball, &line, false).unwrap();
    let oc = geometry::orthogonal_complement(&ball, &a, ball.center).unwrap();
    // wall characterization: every wall of B is transverse to every wall of A
    for &hb in &oc.b.crossing {
        for &ha in &a.crossing {
            assert!(geometry::transverse_in_ball(&ball, hb, ha));
        }
    }
    let report = cubesep::deck::verify_orthcomp_prop(&ball, &a, &oc, 2).unwrap();
    assert!(report.all_pass(), "{report}");

    // single-vertex A: B is the ball-limited grid, flags lower-bound
    let av = geometry::ConvexSubcomplex::single_vertex(&ball, ball.center);
    let oc2 = geometry::orthogonal_complement(&ball, &av, ball.center).unwrap();
    assert!(!oc2.b.complete);
    assert!(oc2.b.vertices().len() > 5);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!("criterion 4 (orthogonal complement): PASS in {dt:?}");
}

#[test]
fn criterion_5_walker_imitator() {
    let t0 = Instant::now();
    // reversibility and homotopy invariance, exhaustively, on the directly
    // special fixtures
    let fixtures: Vec<(CubeComplex, Vec<CellId>)> = vec![
        (generators::torus(2, 2), vec![CellId::new(1, 0)]),
        (generators::theta(3), vec![CellId::new(1, 0)]),
        (generators::cube(2), vec![CellId::new(1, 0)]),
        (generators::cylinder(4), vec![CellId::new(1, 0)]),
        (generators::necklace(4), vec![CellId::new(1, 0), CellId::new(1, 1)]),
    ];
    for (x, seed) in fixtures {
        let n = npc(x);
        let hs = hyperplanes(&n).unwrap();
        if pathology_report(&n, &hs).classification != Classification::DirectlySpecial {
            continue;
        }
        let y = SubcomplexRef::from_cells(n.raw(), seed).unwrap();
        if !y.is_locally_convex(n.raw()) {
            continue;
        }
        let im = Imitation::new(&n, &hs, &y).unwrap();
        for yv in im.y.vertices().collect::<Vec<_>>() {
            for xv in 0..n.num_vertices() {
                for end in n.ends_at(xv) {
                    let (y1, _) = im.step(yv, end);
                    let (y2, _) = im.step(y1, EdgeEnd { edge: end.edge, end: 1 - end.end });
                    assert_eq!(y2, yv, "reversibility");
                }
            }
        }
        assert!(check_gammasquare(&im).unwrap().is_ok(), "homotopy invariance");
    }

    // imitator covers verified, degree <= |V(Y)|, and the loop equivalence
    // for loops of length <= 8 on THETA and TORUS(2,2)
    for (x, y_cells, base) in [
        (generators::theta(3), vec![CellId::new(1, 0)], 0usize),
        (
            generators::torus(2, 2),
            {
                let t = generators::torus(2, 2);
                let mut cells = vec![CellId::new(0, 0)];
                for e in 0..t.num_edges() {
                    let (u, v) = t.edge_endpoints(e);
                    if u % 2 == 0 && v % 2 == 0 {
                        cells.push(CellId::new(1, e));
                    }
                }
                cells
            },
            0usize,
        ),
    ] {
        let n = npc(x);
        let hs = hyperplanes(&n).unwrap();
        let y = SubcomplexRef::from_cells(n.raw(), y_cells).unwrap();
        let ic = imitator_cover(&n, &hs, &y, base).unwrap();
        ic.cover.verify().unwrap();
        assert!(ic.cover.degree <= y.vertices().count());
        let im = Imitation::new(&n, &hs, &y).unwrap();
        let mut loops = 0usize;
        let mut stack: Vec<(usize, Vec<EdgeEnd>)> = vec![(base, vec![])];
        while let Some((pos, path)) = stack.pop() {
            if path.len() == 8 {
                continue;
            }
            for end in n.ends_at(pos) {
                let mut p2 = path.clone();
                p2.push(end);
                let next = n.edge_other(end);
                if next == base {
                    let (ipos, _) = im.imitate(base, &p2);
                    let (_, lift_end) = ic.cover.lift_path(ic.basepoint, &p2).unwrap();
                    assert_eq!(
                        ipos == base,
                        lift_end == ic.basepoint,
                        "loop {p2:?}: imitator return vs closed lift"
                    );
                    loops += 1;
                }
                stack.push((next, p2));
            }
        }
        assert!(loops > 100, "only {loops} loops checked");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}");
    println!("criterion 5 (walker-imitator): PASS in {dt:?}");
}

#[test]
fn criterion_6_route_certificates() {
    let t0 = Instant::now();
    let budget = SynthBudget::default();

    // THETA length-2 essential route
    let t = generators::theta(3);
    let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
    let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
    let theta_route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
    let x = npc(t);
    let cert = synthesize_cover(&x, &theta_route, &budget).unwrap().certified().unwrap();
    assert!(cert.cover.degree <= 64);
    assert!(verify_no_closed_elevations(&theta_route, &cert.cover).unwrap().no_closed());
    assert!(closed_elevations(&theta_route, &cert.cover).unwrap().is_empty());

    // length-4 route satisfying the trap hypotheses (disjoint second and
    // fourth bigons on the necklace)
    let nk = generators::necklace(4);
    let bigon = |i: usize| {
        SubcomplexRef::from_cells(&nk, [CellId::new(1, 2 * i), CellId::new(1, 2 * i + 1)]).unwrap()
    };
    let route = Route::from_subcomplexes(
        &nk,
        vec![0, 1, 2, 3, 0],
        vec![bigon(0), bigon(1), bigon(2), bigon(3)],
    )
    .unwrap();
    let xn = npc(nk);
    let hs = hyperplanes(&xn).unwrap();
    let (trap_ok, _) = cubesep::control::check_trap(&xn, &hs, &route).unwrap();
    assert!(trap_ok);
    let cert = synthesize_cover(&xn, &route, &budget).unwrap().certified().unwrap();
    assert!(cert.cover.degree <= 64);
    assert!(verify_no_closed_elevations(&route, &cert.cover).unwrap().no_closed());
    assert!(closed_elevations(&route, &cert.cover).unwrap().is_empty());
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 240.0, "took {dt:?}");
    println!("criterion 6 (route certificates): PASS in {dt:?}");
}

#[test]
fn criterion_7_kappa_monotone_and_projection() {
    let t0 = Instant::now();
    let t = generators::torus(4, 4);
    let vid = |i: usize, j: usize| (i % 4) * 4 + (j % 4);
    // a compact embedded length-4 rectangle of segments: exact posets
    let y1 = seg_sub(&t, &[vid(0, 0), vid(1, 0), vid(2, 0)]);
    let y2 = seg_sub(&t, &[vid(2, 0), vid(2, 1), vid(2, 2)]);
    let y3 = seg_sub(&t, &[vid(2, 2), vid(1, 2), vid(0, 2)]);
    let y4 = seg_sub(&t, &[vid(0, 2), vid(0, 1), vid(0, 0)]);
    let route = Route::from_subcomplexes(
        &t,
        vec![vid(0, 0), vid(2, 0), vid(2, 2), vid(0, 2), vid(0, 0)],
        vec![y1, y2, y3, y4],
    )
    .unwrap();
    let x = npc(t);
    let radius = 11;
    let poset = cubesep::control::compute_pj(&x, &route, 3, radius).unwrap();
    assert!(poset.exact, "base poset must be exact");
    let kappa_base = poset.kappa;

    // kappa_j across >= 20 covers: every elevation's poset stays <= kappa
    let hs = hyperplanes(&x).unwrap();
    let mut covers_checked = 0;
    let mut log = String::new();
    cubesep::synth::search_candidates(
        &x,
        &hs,
        &[],
        &SynthBudget { max_degree: 20, ..SynthBudget::default() },
        &mut log,
        |cov| {
            if covers_checked >= 20 || cov.degree < 2 {
                return Ok(covers_checked >= 20);
            }
            let total = npc(cov.total.clone());
            for elev in cubesep::routes::elevations_of_route(&route, cov)?.into_iter().take(2) {
                let up = elev.as_route();
                if !up.is_embedded() {
                    continue;
                }
                let p = cubesep::control::compute_pj(&total, &up, 3, radius)?;
                if p.exact {
                    assert!(
                        p.kappa <= kappa_base,
                        "kappa increased: {} > {kappa_base}",
                        p.kappa
                    );
                    covers_checked += 1;
                }
            }
            Ok(covers_checked >= 20)
        },
    )
    .unwrap();
    assert!(covers_checked >= 20, "only {covers_checked} exact poset comparisons");

    // projected route properties on the wrapping (essential) fixture
    let t2 = generators::torus(4, 4);
    let y1 = seg_sub(&t2, &[vid(0, 0), vid(3, 0), vid(2, 0)]);
    let y2 = seg_sub(&t2, &[vid(2, 0), vid(2, 1), vid(2, 2)]);
    let y3 = seg_sub(&t2, &[vid(2, 2), vid(1, 2), vid(0, 2)]);
    let y4 = seg_sub(&t2, &[vid(0, 2), vid(0, 1), vid(0, 0)]);
    let wrap = Route::from_subcomplexes(
        &t2,
        vec![vid(0, 0), vid(2, 0), vid(2, 2), vid(0, 2), vid(0, 0)],
        vec![y1, y2, y3, y4],
    )
    .unwrap();
    let x2 = npc(t2);
    let radius = 13;
    let poset = cubesep::control::compute_pj(&x2, &wrap, 3, radius).unwrap();
    let ball = develop(&x2, wrap.initial(), radius).unwrap();
    let chains = cubesep::control::elevation_chains(&wrap, &ball, 3).unwrap();
    let pr = cubesep::control::project_route(&x2, &wrap, &chains[0], 3, &ball, &poset).unwrap();
    assert!(pr.exact);
    // the three properties: essential, satisfies (Hyp_3), preserves (Hyp_2)
    assert!(!is_essential(&x2, &pr.route, radius, &[]).unwrap().is_non_essential());
    assert!(cubesep::control::check_hyp_j(&x2, &pr.route, 3, radius).unwrap().holds());
    assert!(cubesep::control::check_hyp_j(&x2, &pr.route, 2, radius).unwrap().holds());
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 240.0, "took {dt:?}");
    println!(
        "criterion 7 (kappa monotone over {covers_checked} covers + projection): PASS in {dt:?}"
    );
}

#[test]
fn criterion_8_separability_dictionary() {
    let t0 = Instant::now();
    let budget = SynthBudget::default();

    // free fixture: K_1 = circle {a,b} in THETA, g = a c̄ outside
    let t = generators::theta(3);
    let circle = SubcomplexRef::from_cells(&t, [CellId::new(1, 0), CellId::new(1, 1)]).unwrap();
    let li = LocalIso::inclusion(&circle, &t);
    let basepoint = (0..li.domain.num_vertices()).find(|&v| li.vertex(v) == 0).unwrap();
    let x = npc(t);
    let k1 = cubesep::separability::SubgroupPresentation { li, basepoint, conn_path: vec![] };
    let g_out = vec![EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 2, end: 1 }];
    let sr = cubesep::separability::build_separating_route(&x, &[k1.clone()], &g_out, 0, 12).unwrap();
    let cert = synthesize_cover(&x, &sr.route, &budget).unwrap().certified().unwrap();
    let nm = cubesep::separability::certify_nonmembership(&x, &g_out, &cert).unwrap();
    cubesep::separability::verify_nonmembership(&x, &nm, 4).unwrap();
    // inside element: reported non-essential
    let g_in = vec![
        EdgeEnd { edge: 0, end: 0 },
        EdgeEnd { edge: 1, end: 1 },
        EdgeEnd { edge: 0, end: 0 },
        EdgeEnd { edge: 1, end: 1 },
    ];
    let sr_in = cubesep::separability::build_separating_route(&x, &[k1], &g_in, 0, 12).unwrap();
    assert!(is_essential(&x, &sr_in.route, 8, &[]).unwrap().is_non_essential());

    // abelian fixture, as stated: K_1, K_2 the two factor circles of
    // TORUS(2,2). Their product is the whole group, so every g is inside.
    let t = generators::torus(2, 2);
    let h_sub = circle_sub(&t, true);
    let v_sub = circle_sub(&t, false);
    let x = npc(t);
    let mk = |sub: &SubcomplexRef| {
        let li = LocalIso::inclusion(sub, x.raw());
        let basepoint = (0..li.domain.num_vertices()).find(|&v| li.vertex(v) == 0).unwrap();
        cubesep::separability::SubgroupPresentation { li, basepoint, conn_path: vec![] }
    };
    let ks = [mk(&h_sub), mk(&v_sub)];
    let diag = diagonal_loop(x.raw());
    let sr = cubesep::separability::build_separating_route(&x, &ks, &diag, 0, 14).unwrap();
    assert!(
        is_essential(&x, &sr.route, 10, &[]).unwrap().is_non_essential(),
        "the factor product is the whole group"
    );

    // non-vacuous variant: K_2 presented by the double-wrap circle CYC(4)
    // onto the vertical factor, so K_1 K_2 has index 2; the diagonal is
    // outside and gets certified.
    let k2_wrap = vertical_double_wrap(x.raw());
    let ks2 = [mk(&h_sub), k2_wrap];
    let sr2 = cubesep::separability::build_separating_route(&x, &ks2, &diag, 0, 14).unwrap();
    let e = is_essential(&x, &sr2.route, 12, &[]).unwrap();
    assert!(!e.is_non_essential(), "{e:?}");
    let cert2 = synthesize_cover(&x, &sr2.route, &budget).unwrap().certified().unwrap();
    let nm2 = cubesep::separability::certify_nonmembership(&x, &diag, &cert2).unwrap();
    cubesep::separability::verify_nonmembership(&x, &nm2, 3).unwrap();

    // oracle agreement: the lattice oracle confirms both verdicts
    let free_edges = cubesep::words::non_tree_edges(x.raw());
    let h_loop = factor_loop(x.raw(), true);
    let v_loop = factor_loop(x.raw(), false);
    let oracle_full = cubesep::separability::GroupOracle::Abelian {
        generators: vec![h_loop.clone(), v_loop.clone()],
        free_edges: free_edges.clone(),
    };
    assert!(oracle_full.in_product_coset(&diag, &[]));
    let double_v = [v_loop.clone(), v_loop].concat();
    let oracle_idx2 = cubesep::separability::GroupOracle::Abelian {
        generators: vec![h_loop, double_v],
        free_edges,
    };
    assert!(!oracle_idx2.in_product_coset(&diag, &[]));

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 240.0, "took {dt:?}");
    println!("criterion 8 (separability dictionary): PASS in {dt:?}");
}

fn factor_loop(x: &CubeComplex, horizontal: bool) -> Vec<EdgeEnd> {
    // a length-2 loop at vertex 0 along one factor of TORUS(2,2)
    let dir = |e: usize| {
        let (u, v) = x.edge_endpoints(e);
        u / 2 != v / 2
    };
    let first = x
        .ends_at(0)
        .into_iter()
        .find(|&e| dir(e.edge) == horizontal)
        .unwrap();
    let mid = x.edge_other(first);
    let second = x
        .ends_at(mid)
        .into_iter()
        .find(|&e| dir(e.edge) == horizontal && e.edge != first.edge && x.edge_other(e) == 0)
        .unwrap();
    vec![first, second]
}

fn diagonal_loop(x: &CubeComplex) -> Vec<EdgeEnd> {
    let mut p = factor_loop(x, true);
    p.extend(factor_loop(x, false));
    p
}

/// The CYC(4) -> vertical-circle local isometry presenting the index-2
/// subgroup of the vertical factor.
fn vertical_double_wrap(x: &CubeComplex) -> cubesep::separability::SubgroupPresentation {
    let v_sub = circle_sub(x, false);
    let (circle, back) = v_sub.extract(x);
    assert_eq!(circle.num_vertices(), 2);
    assert_eq!(circle.num_edges(), 2);
    let c4 = generators::cycle(4);
    // map vertices 0,2 -> circle vertex over base 0; 1,3 -> the other;
    // edges alternate between the two circle edges, orientation-matched
    let v_of = |i: usize| i % 2;
    let mut edge_map = Vec::new();
    for e in 0..4 {
        let (u, v) = c4.edge_endpoints(e);
        let cu = v_of(u);
        let cv = v_of(v);
        let target = (0..circle.num_edges())
            .find(|&ce| {
                let (a, b) = circle.edge_endpoints(ce);
                (a, b) == (cu, cv) && (e % 2 == ce % 2)
            })
            .or_else(|| {
                (0..circle.num_edges()).find(|&ce| {
                    let (a, b) = circle.edge_endpoints(ce);
                    (a, b) == (cu, cv)
                })
            });
        let (target, perm) = match target {
            Some(tc) => (tc, vec![0u8, 1u8]),
            None => {
                let tc = (0..circle.num_edges())
                    .find(|&ce| {
                        let (a, b) = circle.edge_endpoints(ce);
                        (a, b) == (cv, cu)
                    })
                    .unwrap();
                (tc, vec![1u8, 0u8])
            }
        };
        edge_map.push((target, perm));
    }
    let wrap = LocalIso {
        domain: c4,
        map: cubesep::maps::CellMap {
            cells: vec![(0..4).map(|i| (v_of(i), vec![0u8])).collect(), edge_map],
        },
    };
    // compose with the inclusion of the circle into x
    let incl_cells: Vec<Vec<(usize, Vec<u8>)>> = back
        .iter()
        .enumerate()
        .map(|(d, v)| v.iter().map(|&amb| (amb, (0..1u8 << d as u8).collect())).collect())
        .collect();
    let incl = cubesep::maps::CellMap { cells: incl_cells };
    let map = wrap.map.then(&incl);
    let li = LocalIso { domain: wrap.domain, map };
    li.map.validate(&li.domain, x).unwrap();
    cubesep::separability::SubgroupPresentation { li, basepoint: 0, conn_path: vec![] }
}

#[test]
fn criterion_9_contact_graph() {
    let t0 = Instant::now();
    // CUBE(3): complete contact graph on 3 walls
    let cube_ball = develop(&npc(generators::cube(3)), 0, 10).unwrap();
    let cg = cubesep::contact::contact_graph(&cube_ball);
    assert_eq!(cube_ball.hyperplanes.len(), 3);
    for i in 0..3 {
        assert_eq!(cg.adjacency[i].len(), 2);
    }

    // distance equality (BFS + 1 = minimal carrier-route length) for all
    // interior pairs in the line and grid balls
    for (x, r) in [(generators::cycle(2), 6), (generators::torus(2, 2), 6)] {
        let ball = develop(&npc(x), 0, r).unwrap();
        let cg = cubesep::contact::contact_graph(&ball);
        let interior: Vec<usize> =
            (0..ball.hyperplanes.len()).filter(|&h| !cg.frontier[h]).collect();
        assert!(!interior.is_empty());
        for &a in &interior {
            let d = cg.distances_from(a);
            for &b in &interior {
                if a == b {
                    continue;
                }
                assert_eq!(
                    cubesep::contact::min_theta_route_length(&ball, a, b, d[b] + 3),
                    Some(d[b] + 1),
                    "distance equality at ({a},{b})"
                );
            }
        }
    }

    // guard on the grid fixture: verified no-shortening for deck elements
    // within radius 4
    let x = npc(generators::torus(2, 2));
    let ball = develop(&x, 0, 9).unwrap();
    let cg = cubesep::contact::contact_graph(&ball);
    let central = |h: usize| {
        ball.hyperplanes[h].edge_class.iter().any(|&e| {
            let (u, v) = ball.complex.edge_endpoints(e);
            ball.dist[u] <= 1 && ball.dist[v] <= 1
        })
    };
    let v = (0..ball.hyperplanes.len()).find(|&h| central(h) && !cg.frontier[h]).unwrap();
    let dv = cg.distances_from(v);
    let w = (0..ball.hyperplanes.len())
        .find(|&h| !cg.frontier[h] && dv[h] == 2)
        .unwrap();
    let report =
        cubesep::contact::guard_subgroup(&x, &ball, v, w, &SynthBudget::default(), 4).unwrap();
    assert_eq!(report.distance, 2);
    assert!(report.entries.iter().any(|e| e.in_subgroup));
    assert!(report.all_verified(), "{}", report.transcript);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 240.0, "took {dt:?}");
    println!("criterion 9 (contact graph): PASS in {dt:?}");
}

/// Determinism of reports: repeated runs are byte-identical.
#[test]
fn reports_are_deterministic() {
    let t = generators::theta(3);
    let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
    let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
    let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
    let x = npc(t);
    let run = || {
        let cert = synthesize_cover(&x, &route, &SynthBudget::default())
            .unwrap()
            .certified()
            .unwrap();
        cert.transcript
    };
    assert_eq!(run(), run());
    // paths_along enumeration is stable too
    let p1: Vec<_> = paths_along(&route, 3);
    let p2: Vec<_> = paths_along(&route, 3);
    assert_eq!(p1, p2);
}

/// Elevation composition coherence across a tower of covers.
#[test]
fn elevation_tower_coherence() {
    let t = generators::theta(3);
    let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
    let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
    let route = Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a, b]).unwrap();
    let x = npc(t);
    let hs = hyperplanes(&x).unwrap();
    let y = SubcomplexRef::from_cells(x.raw(), [CellId::new(1, 0)]).unwrap();
    let ic = imitator_cover(&x, &hs, &y, 0).unwrap();
    let reg = cubesep::covers::regularize(&x, &ic.cover, 1000).unwrap();
    // no closed elevations at the intermediate level implies none above
    assert!(verify_no_closed_elevations(&route, &ic.cover).unwrap().no_closed());
    assert!(verify_no_closed_elevations(&route, &reg).unwrap().no_closed());
    // and the factor map exists
    assert!(cubesep::covers::factor_through(&reg, &ic.cover, 0, ic.basepoint).is_some());
}

/// The raw hyperplane computation agrees between a complex and its covers
/// (count only, as a smoke check for the ball hyperplane machinery).
#[test]
fn ball_hyperplanes_are_walls() {
    let x = npc(generators::torus(2, 2));
    let ball = develop(&x, 0, 4).unwrap();
    let hs = hyperplanes_raw(&ball.complex).unwrap();
    assert_eq!(hs.len(), ball.hyperplanes.len());
    let e2h = edge_to_hyperplane(&hs, ball.complex.num_edges());
    // every wall separates the ball into exactly two parts on the interior
    for h in &hs {
        let mut comp = vec![usize::MAX; ball.complex.num_vertices()];
        let mut next = 0;
        for start in 0..ball.complex.num_vertices() {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for end in ball.complex.ends_at(u) {
                    if e2h[end.edge] == h.id {
                        continue;
                    }
                    let w = ball.complex.edge_other(end);
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        assert_eq!(next, 2, "wall {} does not bipartition the ball", h.id);
    }
}
