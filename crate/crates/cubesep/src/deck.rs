//! Partial deck transformations of a developed ball, stabilizers of convex
//! subcomplexes, and the verification of the projection / orthogonal
//! complement propositions on fixtures.
//!
//! A deck transformation of the universal cover restricts to a
//! projection-equivariant map of the ball; we enumerate those restrictions
//! on a sub-ball of radius `r` by propagating from the image of the center.
//! Results carry exactness flags: when the objects involved are complete in
//! the ball the answers are exact, otherwise they are lower bounds.

use std::collections::BTreeSet;

use crate::complex::Vertex;
use crate::devball::DevBall;
use crate::geometry::{gate, project_visible, ConvexSubcomplex, OrthComplement};
use crate::{Error, Result};

/// A projection-equivariant partial automorphism of the ball, defined on the
/// radius-`sub_radius` sub-ball.
#[derive(Clone, Debug)]
pub struct PartialDeck {
    pub sub_radius: usize,
    /// Vertex map, defined at least on vertices with `dist <= sub_radius`.
    pub map: Vec<Option<Vertex>>,
    /// Whether the propagation extended to radius `R - sub_radius` without
    /// conflict (`extends-to-ball`), else it was boundary-truncated.
    pub extends: bool,
}

impl PartialDeck {
    pub fn apply(&self, v: Vertex) -> Option<Vertex> {
        self.map.get(v).copied().flatten()
    }

    pub fn is_identity(&self, ball: &DevBall) -> bool {
        self.apply(ball.center) == Some(ball.center)
    }

    /// Deck elements are determined by the image of the center.
    pub fn key(&self, ball: &DevBall) -> Vertex {
        self.apply(ball.center).expect("center is always in the domain")
    }

    /// Composition `other ∘ self` where defined.
    pub fn compose(&self, other: &PartialDeck) -> PartialDeck {
        let map = self
            .map
            .iter()
            .map(|&m| m.and_then(|v| other.apply(v)))
            .collect();
        PartialDeck { sub_radius: self.sub_radius, map, extends: false }
    }
}

/// Propagates a candidate center image over vertices within `limit` of the
/// center; `None` on conflict or missing lift.
fn propagate(ball: &DevBall, center_image: Vertex, limit: usize) -> Option<Vec<Option<Vertex>>> {
    let n = ball.complex.num_vertices();
    let mut f: Vec<Option<Vertex>> = vec![None; n];
    f[ball.center] = Some(center_image);
    let mut queue = std::collections::VecDeque::from([ball.center]);
    let mut image_seen = vec![false; n];
    image_seen[center_image] = true;
    while let Some(u) = queue.pop_front() {
        if ball.dist[u] >= limit {
            continue;
        }
        let fu = f[u].unwrap();
        for end in ball.complex.ends_at(u) {
            let base_end = ball.proj.edge_end(end);
            let img_end = ball.lift_end(fu, base_end)?;
            let w = ball.complex.edge_other(end);
            let fw = ball.complex.edge_other(img_end);
            match f[w] {
                None => {
                    if image_seen[fw] {
                        return None; // not injective
                    }
                    image_seen[fw] = true;
                    f[w] = Some(fw);
                    queue.push_back(w);
                }
                Some(prev) if prev == fw => {}
                Some(_) => return None,
            }
        }
    }
    Some(f)
}

/// All projection-equivariant automorphisms of the radius-`r` sub-ball into
/// the ball, each tagged with whether it extends to radius `R - r`.
pub fn deck_elements(ball: &DevBall, r: usize) -> Result<Vec<PartialDeck>> {
    if 2 * r > ball.radius {
        return Err(Error::Precondition(format!(
            "sub-radius {r} exceeds half the ball radius {}",
            ball.radius
        )));
    }
    let base_v = ball.proj.vertex(ball.center);
    let mut out = Vec::new();
    for v in 0..ball.complex.num_vertices() {
        if ball.proj.vertex(v) != base_v || ball.dist[v] + r > ball.radius {
            continue;
        }
        let Some(map) = propagate(ball, v, r) else { continue };
        // domain must cover the whole sub-ball
        if (0..ball.complex.num_vertices()).any(|u| ball.dist[u] <= r && map[u].is_none()) {
            continue;
        }
        let ext_limit = ball.radius.saturating_sub(r);
        let extends = propagate(ball, v, ext_limit).is_some();
        out.push(PartialDeck { sub_radius: r, map, extends });
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Exactness {
    Exact,
    LowerBound,
}

/// Deck elements (within `r`) stabilizing a convex subcomplex, filtered by
/// the wall-trace test: an element that preserves the wall set of `a` and
/// moves one vertex of `a` into `a` stabilizes `a`.
pub fn stabilizer_in_ball(
    ball: &DevBall,
    a: &ConvexSubcomplex,
    r: usize,
) -> Result<(Vec<PartialDeck>, Exactness)> {
    let decks = deck_elements(ball, r)?;
    let a_verts: Vec<Vertex> = a.vertices();
    let a_set: BTreeSet<Vertex> = a_verts.iter().copied().collect();
    let mut kept = Vec::new();
    for f in decks {
        let mut moves_one_in = false;
        let mut traces_ok = true;
        let mut all_defined = true;
        for &v in &a_verts {
            match f.apply(v) {
                Some(fv) => {
                    if a_set.contains(&fv) {
                        moves_one_in = true;
                    } else {
                        traces_ok = false;
                    }
                }
                None => all_defined = false,
            }
        }
        // wall trace: images of a-edges must cross walls of a
        if traces_ok {
            for e in a.sub.edges() {
                let (u, w) = ball.complex.edge_endpoints(e);
                if let (Some(fu), Some(fw)) = (f.apply(u), f.apply(w)) {
                    let img_edge = ball
                        .complex
                        .ends_at(fu)
                        .into_iter()
                        .find(|&end| ball.complex.edge_other(end) == fw
                            && ball.proj.edge_end(end).edge == ball.proj.cells[1][e].0);
                    match img_edge {
                        Some(end) => {
                            if !a.crossing.contains(&ball.e2h[end.edge]) {
                                traces_ok = false;
                                break;
                            }
                        }
                        None => {
                            all_defined = false;
                        }
                    }
                }
            }
        }
        if moves_one_in && traces_ok {
            let _ = all_defined;
            kept.push(f);
        }
    }
    let exact = if a.complete && a_verts.iter().all(|&v| ball.dist[v] <= r) {
        Exactness::Exact
    } else {
        Exactness::LowerBound
    };
    Ok((kept, exact))
}

/// A verification report: named checks with outcomes, plus the exactness
/// regime they were computed in.
#[derive(Clone, Debug)]
pub struct PropReport {
    pub exact: bool,
    pub checks: Vec<(String, bool)>,
}

impl PropReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn push(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }
}

impl std::fmt::Display for PropReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "exactness: {}", if self.exact { "exact" } else { "lower-bound" })?;
        for (name, ok) in &self.checks {
            writeln!(f, "{}: {}", name, if *ok { "pass" } else { "FAIL" })?;
        }
        Ok(())
    }
}

fn keys(ball: &DevBall, decks: &[PartialDeck]) -> BTreeSet<Vertex> {
    decks.iter().map(|f| f.key(ball)).collect()
}

/// Checks `G_C = G_A ∩ G_B` and that the quotient of `C = Π_A(B)` by its
/// found stabilizer injects into the base, for elevations developed in the
/// ball.
pub fn verify_projection_prop(
    ball: &DevBall,
    a: &ConvexSubcomplex,
    b: &ConvexSubcomplex,
    r: usize,
) -> Result<PropReport> {
    let c = project_visible(ball, a, b)?;
    let (stab_a, ea) = stabilizer_in_ball(ball, a, r)?;
    let (stab_b, eb) = stabilizer_in_ball(ball, b, r)?;
    let (stab_c, ec) = stabilizer_in_ball(ball, &c, r)?;
    let exact = [ea, eb, ec].iter().all(|&e| e == Exactness::Exact);
    let mut report = PropReport { exact, checks: Vec::new() };

    let ka = keys(ball, &stab_a);
    let kb = keys(ball, &stab_b);
    let kc = keys(ball, &stab_c);
    let kab: BTreeSet<Vertex> = ka.intersection(&kb).copied().collect();
    // Within the ball, found stabilizers of C must contain the intersection;
    // exactness upgrades this to equality.
    report.push("stab(A) ∩ stab(B) ⊆ stab(C)", kab.is_subset(&kc));
    if exact {
        report.push("stab(C) = stab(A) ∩ stab(B)", kab == kc);
    }

    // quotient embedding: p identifies two C-vertices only along found
    // stabilizer elements
    let mut embeds = true;
    let verts = c.vertices();
    for (i, &u) in verts.iter().enumerate() {
        for &v in verts.iter().skip(i + 1) {
            if ball.proj.vertex(u) == ball.proj.vertex(v) {
                let witnessed = stab_c.iter().any(|f| f.apply(u) == Some(v) || f.apply(v) == Some(u));
                if !witnessed {
                    embeds = false;
                }
            }
        }
    }
    report.push("C/stab(C) embeds in the base", embeds);
    Ok(report)
}

/// Checks the orthogonal complement proposition: the quotient of `B` embeds,
/// found stabilizers of `A` and `B` commute, and both act on the product
/// region preserving the factor structure (naturally on their own factor,
/// trivially on the other).
pub fn verify_orthcomp_prop(
    ball: &DevBall,
    a: &ConvexSubcomplex,
    oc: &OrthComplement,
    r: usize,
) -> Result<PropReport> {
    let b = &oc.b;
    let (stab_a, ea) = stabilizer_in_ball(ball, a, r)?;
    let (stab_b, eb) = stabilizer_in_ball(ball, b, r)?;
    let exact = ea == Exactness::Exact && eb == Exactness::Exact && oc.chart.exact;
    let mut report = PropReport { exact, checks: Vec::new() };

    // quotient embedding of B
    let mut embeds = true;
    let verts = b.vertices();
    for (i, &u) in verts.iter().enumerate() {
        for &v in verts.iter().skip(i + 1) {
            if ball.proj.vertex(u) == ball.proj.vertex(v) {
                let witnessed = stab_b.iter().any(|f| f.apply(u) == Some(v) || f.apply(v) == Some(u));
                if !witnessed {
                    embeds = false;
                }
            }
        }
    }
    report.push("B/stab(B) embeds in the base", embeds);

    // commutation on the common domain
    let mut commute = true;
    for fa in &stab_a {
        for fb in &stab_b {
            let ab = fa.compose(fb);
            let ba = fb.compose(fa);
            for v in 0..ball.complex.num_vertices() {
                if let (Some(x), Some(y)) = (ab.apply(v), ba.apply(v)) {
                    if x != y {
                        commute = false;
                    }
                }
            }
        }
    }
    report.push("stab(A) and stab(B) commute", commute);

    // split action on the product region: stab(B) fixes the A-coordinate,
    // stab(A) fixes the B-coordinate
    let mut split = true;
    for (coord_fixed, stab) in [(0usize, &stab_b), (1usize, &stab_a)] {
        for f in stab.iter() {
            for (&(ra, cb), &v) in &oc.chart.at {
                if let Some(fv) = f.apply(v) {
                    // recompute coordinates of the image
                    let fra = match gate(ball, a, fv) {
                        Ok(g) => g,
                        Err(_) => continue,
                    };
                    let fcb = match gate(ball, b, fv) {
                        Ok(g) => g,
                        Err(_) => continue,
                    };
                    if coord_fixed == 0 && fra != ra {
                        split = false;
                    }
                    if coord_fixed == 1 && fcb != cb {
                        split = false;
                    }
                    let _ = (ra, cb, fra, fcb);
                }
            }
        }
    }
    report.push("product action splits", split);
    Ok(report)
}
