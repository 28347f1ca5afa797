//! Group oracles for the fixture corpus: free reduction for graph
//! fundamental groups and lattice membership for abelian ones. Used to
//! cross-validate the geometric separability dictionary; exact on the
//! fixtures they are meant for.

use crate::complex::{CubeComplex, EdgeEnd};

/// A homotopy class of a path in a graph, as a freely reduced oriented edge
/// word (edge index, +1 forward / -1 backward).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct FreeWord(pub Vec<(usize, i8)>);

impl FreeWord {
    pub fn identity() -> FreeWord {
        FreeWord(Vec::new())
    }

    pub fn from_path(path: &[EdgeEnd]) -> FreeWord {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for &e in path {
            let letter = (e.edge, if e.end == 0 { 1 } else { -1 });
            if let Some(&last) = out.last() {
                if last.0 == letter.0 && last.1 == -letter.1 {
                    out.pop();
                    continue;
                }
            }
            out.push(letter);
        }
        FreeWord(out)
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|&(e, s)| (e, -s)).collect())
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.0.clone();
        for &letter in &other.0 {
            if let Some(&last) = out.last() {
                if last.0 == letter.0 && last.1 == -letter.1 {
                    out.pop();
                    continue;
                }
            }
            out.push(letter);
        }
        FreeWord(out)
    }

    pub fn pow(&self, e: i64) -> FreeWord {
        let base = if e >= 0 { self.clone() } else { self.inverse() };
        let mut out = FreeWord::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Membership of `g` in the product `K_1 ... K_n` of cyclic subgroups of a
/// free group, each `K_i = <w_i>`. Exponents are bounded by the reduced
/// lengths: in a free group the reduced length of `w^a` grows at least
/// linearly once `|a|` exceeds the cancellation between neighbours, so
/// `|a_i| <= (|g| + 2*sum |w|)/|w_i|` is exhaustive.
pub fn free_product_membership(g: &FreeWord, gens: &[FreeWord]) -> bool {
    fn rec(current: &FreeWord, g: &FreeWord, gens: &[FreeWord], total: usize) -> bool {
        match gens.split_first() {
            None => current == g,
            Some((w, rest)) => {
                if w.is_identity() {
                    return rec(current, g, rest, total);
                }
                let bound = ((g.len() + 2 * total) / w.len().max(1) + 2) as i64;
                for a in -bound..=bound {
                    let next = current.concat(&w.pow(a));
                    if rec(&next, g, rest, total) {
                        return true;
                    }
                }
                false
            }
        }
    }
    let total: usize = gens.iter().map(|w| w.len()).sum();
    rec(&FreeWord::identity(), g, gens, total)
}

/// Signed crossing counts of a path over the non-tree edges of a complex
/// (its class in first homology, coordinates indexed by `free` edges).
pub fn abelianize(path: &[EdgeEnd], free: &[usize]) -> Vec<i64> {
    let mut out = vec![0i64; free.len()];
    for &e in path {
        if let Some(i) = free.iter().position(|&f| f == e.edge) {
            out[i] += if e.end == 0 { 1 } else { -1 };
        }
    }
    out
}

/// Non-tree edges of a connected complex, in index order.
pub fn non_tree_edges(x: &CubeComplex) -> Vec<usize> {
    let n = x.num_vertices();
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut tree = vec![false; x.num_edges()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for end in x.ends_at(u) {
            let w = x.edge_other(end);
            if !seen[w] {
                seen[w] = true;
                tree[end.edge] = true;
                queue.push_back(w);
            }
        }
    }
    (0..x.num_edges()).filter(|&e| !tree[e]).collect()
}

/// Membership of `g` in the subgroup of `Z^k` generated by the columns,
/// by Hermite-style column reduction. Exact.
pub fn lattice_membership(g: &[i64], gens: &[Vec<i64>]) -> bool {
    let k = g.len();
    let mut cols: Vec<Vec<i64>> = gens.to_vec();
    let mut target = g.to_vec();
    for row in 0..k {
        loop {
            let mut nz: Vec<usize> = (0..cols.len()).filter(|&c| cols[c][row] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&c| cols[c][row].abs());
            let (a, b) = (nz[0], nz[1]);
            let q = cols[b][row] / cols[a][row];
            for r in 0..k {
                cols[b][r] -= q * cols[a][r];
            }
        }
        if let Some(c) = (0..cols.len()).find(|&c| cols[c][row] != 0) {
            let p = cols[c][row];
            if target[row] % p != 0 {
                return false;
            }
            let q = target[row] / p;
            for r in 0..k {
                target[r] -= q * cols[c][r];
            }
            cols.remove(c);
        } else if target[row] != 0 {
            return false;
        }
    }
    target.iter().all(|&t| t == 0)
}
