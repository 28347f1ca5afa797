//! Intersections and osculations of hyperplanes, and the specialness
//! classification derived from them.
//!
//! At a vertex `x`, a pair of distinct edges incident at `x` either forms the
//! corner of a square (their hyperplanes *intersect* at `(x; e1, e2)`) or
//! does not (they *osculate*). A loop edge self-osculates at `(x; e)`. A
//! pair of distinct hyperplanes that both intersect and osculate
//! *inter-osculates*. Directly special = two-sided hyperplanes, no
//! self-intersection, no self-osculation, no inter-osculation.

use std::collections::BTreeSet;

use crate::complex::{EdgeEnd, NpcComplex, SubcomplexRef, Vertex};
use crate::hyperplane::{edge_to_hyperplane, Hyperplane};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Classification {
    NotNpc,
    NpcOnly,
    WeaklySpecial,
    DirectlySpecial,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::NotNpc => "not-NPC",
            Classification::NpcOnly => "NPC-only",
            Classification::WeaklySpecial => "weakly-special",
            Classification::DirectlySpecial => "directly-special",
        };
        write!(f, "{s}")
    }
}

/// A witnessed incidence `(x; e1, e2)` of two edge ends at a vertex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct IncidenceWitness {
    pub vertex: Vertex,
    pub e1: EdgeEnd,
    pub e2: EdgeEnd,
}

/// The loop case `(x; e)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct LoopWitness {
    pub vertex: Vertex,
    pub edge: usize,
}

#[derive(Clone, Debug)]
pub struct PathologyReport {
    pub self_intersections: Vec<IncidenceWitness>,
    pub self_osculations: Vec<IncidenceWitness>,
    pub loop_osculations: Vec<LoopWitness>,
    /// Pairs of distinct hyperplane ids that both intersect and osculate,
    /// with one witness of each.
    pub inter_osculations: Vec<(usize, usize, IncidenceWitness, IncidenceWitness)>,
    pub one_sided: Vec<usize>,
    pub classification: Classification,
}

impl PathologyReport {
    pub fn self_osculation_count(&self) -> usize {
        self.self_osculations.len() + self.loop_osculations.len()
    }
}

/// Enumerates every vertex incidence of edge-end pairs, classifies each as
/// square corner or osculation, and derives the specialness class.
pub fn pathology_report(x: &NpcComplex, hs: &[Hyperplane]) -> PathologyReport {
    let e2h = edge_to_hyperplane(hs, x.num_edges());
    let mut self_intersections = Vec::new();
    let mut self_osculations = Vec::new();
    let mut loop_osculations = Vec::new();
    let mut intersect_pairs: std::collections::BTreeMap<(usize, usize), IncidenceWitness> =
        Default::default();
    let mut osculate_pairs: std::collections::BTreeMap<(usize, usize), IncidenceWitness> =
        Default::default();

    for v in 0..x.num_vertices() {
        let link = x.link(v);
        // Square corners at v, as unordered end pairs.
        let corner_pairs: BTreeSet<(usize, usize)> = link
            .corner_simplices
            .iter()
            .filter(|s| s.cell.dim == 2)
            .map(|s| (s.ends[0], s.ends[1]))
            .collect();
        for i in 0..link.verts.len() {
            for j in (i + 1)..link.verts.len() {
                let (a, b) = (link.verts[i], link.verts[j]);
                if a.edge == b.edge {
                    // Both ends of one loop edge at v.
                    loop_osculations.push(LoopWitness { vertex: v, edge: a.edge });
                    continue;
                }
                let w = IncidenceWitness { vertex: v, e1: a, e2: b };
                let (h1, h2) = (e2h[a.edge], e2h[b.edge]);
                let key = (h1.min(h2), h1.max(h2));
                if corner_pairs.contains(&(i, j)) {
                    if h1 == h2 {
                        self_intersections.push(w);
                    } else {
                        intersect_pairs.entry(key).or_insert(w);
                    }
                } else if h1 == h2 {
                    self_osculations.push(w);
                } else {
                    osculate_pairs.entry(key).or_insert(w);
                }
            }
        }
    }

    let mut inter_osculations = Vec::new();
    for (&(h1, h2), &iw) in &intersect_pairs {
        if let Some(&ow) = osculate_pairs.get(&(h1, h2)) {
            inter_osculations.push((h1, h2, iw, ow));
        }
    }
    let one_sided: Vec<usize> = hs.iter().filter(|h| !h.two_sided).map(|h| h.id).collect();

    let weakly =
        self_intersections.is_empty() && self_osculations.is_empty() && loop_osculations.is_empty();
    let directly = weakly && inter_osculations.is_empty() && one_sided.is_empty();
    let classification = if directly {
        Classification::DirectlySpecial
    } else if weakly {
        Classification::WeaklySpecial
    } else {
        Classification::NpcOnly
    };

    PathologyReport {
        self_intersections,
        self_osculations,
        loop_osculations,
        inter_osculations,
        one_sided,
        classification,
    }
}

pub fn is_directly_special(x: &NpcComplex, hs: &[Hyperplane]) -> bool {
    pathology_report(x, hs).classification == Classification::DirectlySpecial
}

/// Osculations of a hyperplane with a locally convex subcomplex: vertices
/// `y` of `Y` with an edge `e` dual to `H`, incident at `y`, whose interior
/// lies outside `Y`. Also reports whether `H` intersects `Y` (has a dual
/// edge inside), hence whether the two inter-osculate.
#[derive(Clone, Debug)]
pub struct SubcomplexOsculation {
    pub witnesses: Vec<(Vertex, EdgeEnd)>,
    pub intersects: bool,
}

impl SubcomplexOsculation {
    pub fn osculates(&self) -> bool {
        !self.witnesses.is_empty()
    }
    pub fn inter_osculates(&self) -> bool {
        self.intersects && self.osculates()
    }
}

pub fn subcomplex_osculations(
    x: &NpcComplex,
    h: &Hyperplane,
    y: &SubcomplexRef,
) -> Result<SubcomplexOsculation> {
    if !y.is_locally_convex(x.raw()) {
        return Err(Error::Precondition("subcomplex is not locally convex".into()));
    }
    let in_class: BTreeSet<usize> = h.edge_class.iter().copied().collect();
    let mut witnesses = Vec::new();
    for v in y.vertices() {
        for end in x.ends_at(v) {
            if in_class.contains(&end.edge) && !y.contains(crate::complex::CellId::new(1, end.edge)) {
                witnesses.push((v, end));
            }
        }
    }
    let intersects = h
        .edge_class
        .iter()
        .any(|&e| y.contains(crate::complex::CellId::new(1, e)));
    Ok(SubcomplexOsculation { witnesses, intersects })
}
