//! Generators for the fixture corpus: segments, cycles, cubes, roses, theta
//! graphs, cellular products, grids, tori and Salvetti complexes.

use std::collections::HashMap;

use crate::complex::{CubeComplex, FacetRef};
use crate::{Error, Result};

/// A path with `k` edges on `k+1` vertices.
pub fn segment(k: usize) -> CubeComplex {
    let mut x = CubeComplex::new();
    for _ in 0..=k {
        x.add_vertex();
    }
    for i in 0..k {
        x.add_edge(i, i + 1);
    }
    x
}

/// A combinatorial circle with `k` edges. `k = 1` degenerates to a loop.
pub fn cycle(k: usize) -> CubeComplex {
    let mut x = CubeComplex::new();
    for _ in 0..k {
        x.add_vertex();
    }
    for i in 0..k {
        x.add_edge(i, (i + 1) % k);
    }
    x
}

/// A wedge of `r` loops at a single vertex.
pub fn rose(r: usize) -> CubeComplex {
    let mut x = CubeComplex::new();
    let v = x.add_vertex();
    for _ in 0..r {
        x.add_edge(v, v);
    }
    x
}

/// Two vertices joined by `r` parallel-free edges.
pub fn theta(r: usize) -> CubeComplex {
    let mut x = CubeComplex::new();
    let p = x.add_vertex();
    let q = x.add_vertex();
    for _ in 0..r {
        x.add_edge(p, q);
    }
    x
}

/// The solid `d`-cube with all of its faces as distinct cells.
pub fn cube(d: usize) -> CubeComplex {
    // A k-cell is (sorted axis subset S, fixed bits of the complement).
    let mut x = CubeComplex::new();
    x.cells = vec![Vec::new(); d + 1];
    let mut index: HashMap<(Vec<usize>, usize), usize> = HashMap::new();

    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..d {
        let mut more = Vec::new();
        for s in &subsets {
            let mut t = s.clone();
            t.push(a);
            more.push(t);
        }
        subsets.extend(more);
    }
    subsets.sort_by_key(|s| (s.len(), s.clone()));

    for s in &subsets {
        let k = s.len();
        let comp: Vec<usize> = (0..d).filter(|a| !s.contains(a)).collect();
        for fix in 0..1usize << comp.len() {
            let mut fixed_bits = 0usize;
            for (i, &a) in comp.iter().enumerate() {
                if (fix >> i) & 1 == 1 {
                    fixed_bits |= 1 << a;
                }
            }
            let corners: Vec<usize> = (0..1usize << k)
                .map(|b| {
                    let mut v = fixed_bits;
                    for (i, &a) in s.iter().enumerate() {
                        if (b >> i) & 1 == 1 {
                            v |= 1 << a;
                        }
                    }
                    v
                })
                .collect();
            let mut facets = Vec::new();
            for (i, &a) in s.iter().enumerate() {
                for side in 0..2 {
                    let mut s2 = s.clone();
                    s2.remove(i);
                    let fb = fixed_bits | (side << a);
                    let cell = if k == 1 { corners[side] } else { index[&(s2, fb)] };
                    facets.push(FacetRef {
                        cell,
                        perm: (0..1u8 << (k - 1) as u8).collect(),
                    });
                }
            }
            let idx = if k == 0 {
                let v = x.add_vertex();
                debug_assert_eq!(v, fixed_bits);
                v
            } else {
                x.add_cell(k, corners, facets)
            };
            index.insert((s.clone(), fixed_bits), idx);
        }
    }
    x
}

/// The cellular product, with A-axes first. Vertices are numbered
/// `va * |V(B)| + vb`.
pub fn product(a: &CubeComplex, b: &CubeComplex) -> CubeComplex {
    let nb = b.num_vertices();
    let max_dim = a.max_dim() + b.max_dim();
    let mut x = CubeComplex::new();
    x.cells = vec![Vec::new(); max_dim + 1];
    // (d1, idxA, d2, idxB) -> index among (d1+d2)-cells
    let mut index: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();

    for k in 0..=max_dim {
        for d1 in 0..=k.min(a.max_dim()) {
            let d2 = k - d1;
            if d2 > b.max_dim() {
                continue;
            }
            for ia in 0..a.dim_count(d1) {
                for ib in 0..b.dim_count(d2) {
                    let ca = &a.cells[d1][ia];
                    let cb = &b.cells[d2][ib];
                    let corners: Vec<usize> = (0..1usize << k)
                        .map(|bits| {
                            let ba = bits & ((1 << d1) - 1);
                            let bb = bits >> d1;
                            ca.corners[ba] * nb + cb.corners[bb]
                        })
                        .collect();
                    let mut facets = Vec::new();
                    for axis in 0..k {
                        for side in 0..2 {
                            if axis < d1 {
                                let fr = &ca.facets[2 * axis + side];
                                let cell = if k == 1 {
                                    fr.cell * nb + cb.corners[0]
                                } else {
                                    index[&(d1 - 1, fr.cell, d2, ib)]
                                };
                                let perm: Vec<u8> = (0..1usize << (k - 1))
                                    .map(|bits| {
                                        let ba = bits & ((1 << (d1 - 1)) - 1);
                                        let bb = bits >> (d1 - 1);
                                        (fr.perm[ba] as usize | (bb << (d1 - 1))) as u8
                                    })
                                    .collect();
                                facets.push(FacetRef { cell, perm });
                            } else {
                                let fr = &cb.facets[2 * (axis - d1) + side];
                                let cell = if k == 1 {
                                    ca.corners[0] * nb + fr.cell
                                } else {
                                    index[&(d1, ia, d2 - 1, fr.cell)]
                                };
                                let perm: Vec<u8> = (0..1usize << (k - 1))
                                    .map(|bits| {
                                        let ba = bits & ((1 << d1) - 1);
                                        let bb = bits >> d1;
                                        (ba | ((fr.perm[bb] as usize) << d1)) as u8
                                    })
                                    .collect();
                                facets.push(FacetRef { cell, perm });
                            }
                        }
                    }
                    let idx = if k == 0 {
                        x.add_vertex()
                    } else {
                        x.add_cell(k, corners, facets)
                    };
                    index.insert((d1, ia, d2, ib), idx);
                }
            }
        }
    }
    x
}

pub fn grid(m: usize, n: usize) -> CubeComplex {
    product(&segment(m), &segment(n))
}

pub fn torus(m: usize, n: usize) -> CubeComplex {
    product(&cycle(m), &cycle(n))
}

pub fn cylinder(k: usize) -> CubeComplex {
    product(&cycle(k), &segment(1))
}

/// A necklace of `k` bigons: vertices `0..k`, with two parallel edges
/// between consecutive vertices (mod k). Directly special, free fundamental
/// group; consecutive bigons share one vertex, non-consecutive ones are
/// disjoint.
pub fn necklace(k: usize) -> CubeComplex {
    let mut x = CubeComplex::new();
    for _ in 0..k {
        x.add_vertex();
    }
    for i in 0..k {
        x.add_edge(i, (i + 1) % k);
        x.add_edge(i, (i + 1) % k);
    }
    x
}

/// The Salvetti complex of the right-angled Artin group of a finite
/// simplicial graph: one vertex, a loop per generator, and a `k`-cube per
/// `k`-clique, glued along opposite faces by label. Cubes above `max_dim`
/// are omitted; without `allow_truncation` that is an error when a larger
/// clique exists (the truncated complex is not NPC).
pub fn salvetti(
    n: usize,
    edges: &[(usize, usize)],
    max_dim: usize,
    allow_truncation: bool,
) -> Result<CubeComplex> {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u == v || u >= n || v >= n {
            return Err(Error::Precondition(format!("graph edge ({u},{v}) is not simplicial")));
        }
        if adj[u][v] {
            return Err(Error::Precondition(format!("duplicate graph edge ({u},{v})")));
        }
        adj[u][v] = true;
        adj[v][u] = true;
    }

    // All cliques up to size max_dim + 1, sorted ascending.
    let mut cliques: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(c) = frontier.pop() {
        if c.len() > max_dim + 1 {
            continue;
        }
        if c.len() == max_dim + 1 {
            if !allow_truncation {
                return Err(Error::Precondition(format!(
                    "clique {:?} exceeds max_dim {}; pass allow_truncation to truncate",
                    c, max_dim
                )));
            }
            continue;
        }
        cliques.push(c.clone());
        let last = *c.last().unwrap();
        for v in (last + 1)..n {
            if c.iter().all(|&u| adj[u][v]) {
                let mut bigger = c.clone();
                bigger.push(v);
                frontier.push(bigger);
            }
        }
    }
    cliques.sort_by_key(|c| (c.len(), c.clone()));
    cliques.dedup();

    let mut x = CubeComplex::new();
    x.cells = vec![Vec::new(); max_dim.max(1) + 1];
    let v0 = x.add_vertex();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for c in &cliques {
        let k = c.len();
        if k == 0 {
            index.insert(c.clone(), v0);
            continue;
        }
        let corners = vec![v0; 1 << k];
        let mut facets = Vec::new();
        for i in 0..k {
            let mut sub = c.clone();
            sub.remove(i);
            let cell = if k == 1 { v0 } else { index[&sub] };
            for _side in 0..2 {
                facets.push(FacetRef {
                    cell,
                    perm: (0..1u8 << (k - 1) as u8).collect(),
                });
            }
        }
        let idx = x.add_cell(k, corners, facets);
        index.insert(c.clone(), idx);
    }
    Ok(x)
}

/// The 1-vertex torus: Salvetti complex of a single edge.
pub fn salvetti_k2() -> CubeComplex {
    salvetti(2, &[(0, 1)], 2, false).unwrap()
}
