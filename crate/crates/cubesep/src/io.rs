//! Text formats: `.ccx` for complexes with named subcomplexes, `.cov` for
//! voltage covers, `.route` for routes, plus content hashing for
//! certificate bundles. Writers emit deterministic output (dimension then
//! id); parsers reject unknown versions.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::complex::{Cell, CellId, CubeComplex, FacetRef, SubcomplexRef};
use crate::covers::Voltage;
use crate::{Error, Result};

pub fn sha_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn perm_str(perm: &[u8]) -> String {
    perm.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("-")
}

fn parse_perm(s: &str, line: usize) -> Result<Vec<u8>> {
    s.split('-')
        .map(|p| p.parse::<u8>().map_err(|_| Error::Parse { line, msg: format!("bad perm {s}") }))
        .collect()
}

/// Serializes a complex with named subcomplexes.
pub fn write_ccx(x: &CubeComplex, subs: &[(String, &SubcomplexRef)]) -> String {
    let mut out = String::from("ccx 1\n");
    for d in 0..x.cells.len() {
        for (i, c) in x.cells[d].iter().enumerate() {
            let corners =
                c.corners.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let facets = c
                .facets
                .iter()
                .enumerate()
                .map(|(slot, fr)| format!("({slot}:{}:{})", fr.cell, perm_str(&fr.perm)))
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("cell {d} {i} corners={corners} facets={facets}\n"));
        }
    }
    for (name, sub) in subs {
        let ids = sub
            .cells
            .iter()
            .map(|c| format!("{}:{}", c.dim, c.idx))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("sub {name} cells={ids}\n"));
    }
    out
}

/// Parses a `.ccx` document; returns the complex and its named
/// subcomplexes.
pub fn read_ccx(text: &str) -> Result<(CubeComplex, BTreeMap<String, SubcomplexRef>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "ccx 1")) => {}
        Some((n, other)) => {
            return Err(Error::Parse { line: n + 1, msg: format!("unknown ccx version: {other}") })
        }
        None => return Err(Error::Parse { line: 1, msg: "empty document".into() }),
    }
    let mut x = CubeComplex::new();
    let mut subs = BTreeMap::new();
    for (n, raw) in lines {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let mut parts = l.split_whitespace();
        match parts.next() {
            Some("cell") => {
                let dim: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "missing dimension".into() })?;
                let idx: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "missing id".into() })?;
                let mut corners = Vec::new();
                let mut facets = Vec::new();
                for field in parts {
                    if let Some(cs) = field.strip_prefix("corners=") {
                        corners = cs
                            .split(',')
                            .filter(|s| !s.is_empty())
                            .map(|s| {
                                s.parse::<usize>()
                                    .map_err(|_| Error::Parse { line, msg: format!("bad corner {s}") })
                            })
                            .collect::<Result<Vec<_>>>()?;
                    } else if let Some(fs) = field.strip_prefix("facets=") {
                        for item in fs.split("),").filter(|s| !s.is_empty()) {
                            let item = item.trim_start_matches('(').trim_end_matches(')');
                            let mut it = item.split(':');
                            let slot: usize = it
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or(Error::Parse { line, msg: "bad facet slot".into() })?;
                            let cell: usize = it
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or(Error::Parse { line, msg: "bad facet cell".into() })?;
                            let perm = parse_perm(
                                it.next().ok_or(Error::Parse { line, msg: "bad facet perm".into() })?,
                                line,
                            )?;
                            facets.push((slot, FacetRef { cell, perm }));
                        }
                    }
                }
                facets.sort_by_key(|&(slot, _)| slot);
                if facets.iter().enumerate().any(|(i, &(slot, _))| i != slot) {
                    return Err(Error::Parse { line, msg: "facet slots not contiguous".into() });
                }
                while x.cells.len() <= dim {
                    x.cells.push(Vec::new());
                }
                if x.cells[dim].len() != idx {
                    return Err(Error::Parse { line, msg: format!("cell {dim}:{idx} out of order") });
                }
                x.cells[dim].push(Cell {
                    corners,
                    facets: facets.into_iter().map(|(_, f)| f).collect(),
                });
            }
            Some("sub") => {
                let name = parts
                    .next()
                    .ok_or(Error::Parse { line, msg: "missing sub name".into() })?
                    .to_string();
                let mut cells = std::collections::BTreeSet::new();
                for field in parts {
                    if let Some(cs) = field.strip_prefix("cells=") {
                        for id in cs.split(',').filter(|s| !s.is_empty()) {
                            let mut it = id.split(':');
                            let dim: usize = it
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or(Error::Parse { line, msg: format!("bad cell id {id}") })?;
                            let idx: usize = it
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or(Error::Parse { line, msg: format!("bad cell id {id}") })?;
                            cells.insert(CellId::new(dim, idx));
                        }
                    }
                }
                subs.insert(name, SubcomplexRef { cells });
            }
            Some(other) => {
                return Err(Error::Parse { line, msg: format!("unknown record {other}") })
            }
            None => {}
        }
    }
    let errs = x.validate_structure();
    if let Some(e) = errs.first() {
        return Err(Error::Parse { line: 0, msg: format!("structurally invalid: {e}") });
    }
    Ok((x, subs))
}

/// Serializes a voltage cover relative to its base complex.
pub fn write_cov(base: &CubeComplex, volt: &Voltage) -> String {
    let mut out = String::from("cov 1\n");
    out.push_str(&format!("base {}\n", sha_hex(write_ccx(base, &[]).as_bytes())));
    out.push_str(&format!("degree {}\n", volt.degree));
    for (e, perm) in volt.perms.iter().enumerate() {
        let images = perm.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!("volt {e} {images}\n"));
    }
    out
}

/// Parses a `.cov` document against a base complex, checking the hash.
pub fn read_cov(text: &str, base: &CubeComplex) -> Result<Voltage> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "cov 1")) => {}
        Some((n, other)) => {
            return Err(Error::Parse { line: n + 1, msg: format!("unknown cov version: {other}") })
        }
        None => return Err(Error::Parse { line: 1, msg: "empty document".into() }),
    }
    let mut degree = 0usize;
    let mut perms: Vec<Vec<usize>> = vec![Vec::new(); base.num_edges()];
    for (n, raw) in lines {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let mut parts = l.split_whitespace();
        match parts.next() {
            Some("base") => {
                let want = parts.next().unwrap_or("");
                let got = sha_hex(write_ccx(base, &[]).as_bytes());
                if want != got {
                    return Err(Error::HashMismatch(format!("cov expects base {want}, got {got}")));
                }
            }
            Some("degree") => {
                degree = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "bad degree".into() })?;
            }
            Some("volt") => {
                let e: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "bad edge id".into() })?;
                let images = parts.next().ok_or(Error::Parse { line, msg: "missing images".into() })?;
                if e >= perms.len() {
                    return Err(Error::Parse { line, msg: format!("edge {e} out of range") });
                }
                perms[e] = images
                    .split(',')
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| Error::Parse { line, msg: format!("bad image {s}") })
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            Some(other) => {
                return Err(Error::Parse { line, msg: format!("unknown record {other}") })
            }
            None => {}
        }
    }
    let volt = Voltage { degree, perms };
    if !volt.is_valid() {
        return Err(Error::Parse { line: 0, msg: "voltage permutations invalid".into() });
    }
    Ok(volt)
}

/// Serializes a local isometry into `base` as a standalone map document:
/// the domain cells in `.ccx` record format plus one `image` line per cell
/// giving the target cell and corner bijection.
pub fn write_lmap(li: &crate::maps::LocalIso, base: &CubeComplex) -> String {
    let mut out = String::from("lmap 1\n");
    out.push_str(&format!("base {}\n", sha_hex(write_ccx(base, &[]).as_bytes())));
    out.push_str(&write_ccx(&li.domain, &[])["ccx 1\n".len()..]);
    for d in 0..li.map.cells.len() {
        for (i, (t, perm)) in li.map.cells[d].iter().enumerate() {
            out.push_str(&format!("image {d} {i} {t} {}\n", perm_str(perm)));
        }
    }
    out
}

/// Parses a map document against its base, validating the hash and the map.
pub fn read_lmap(text: &str, base: &CubeComplex) -> Result<crate::maps::LocalIso> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "lmap 1")) => {}
        Some((n, other)) => {
            return Err(Error::Parse { line: n + 1, msg: format!("unknown lmap version: {other}") })
        }
        None => return Err(Error::Parse { line: 1, msg: "empty document".into() }),
    }
    let mut ccx_text = String::from("ccx 1\n");
    let mut images: Vec<(usize, usize, usize, Vec<u8>)> = Vec::new();
    for (n, raw) in lines {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix("base ") {
            let got = sha_hex(write_ccx(base, &[]).as_bytes());
            if rest != got {
                return Err(Error::HashMismatch(format!("lmap expects base {rest}, got {got}")));
            }
        } else if l.starts_with("cell ") {
            ccx_text.push_str(l);
            ccx_text.push('\n');
        } else if let Some(rest) = l.strip_prefix("image ") {
            let mut it = rest.split_whitespace();
            let d: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(Error::Parse { line, msg: "bad image dim".into() })?;
            let i: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(Error::Parse { line, msg: "bad image id".into() })?;
            let t: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(Error::Parse { line, msg: "bad image target".into() })?;
            let perm = parse_perm(
                it.next().ok_or(Error::Parse { line, msg: "missing image perm".into() })?,
                line,
            )?;
            images.push((d, i, t, perm));
        } else {
            return Err(Error::Parse { line, msg: format!("unknown record {l}") });
        }
    }
    let (domain, _) = read_ccx(&ccx_text)?;
    let mut cells: Vec<Vec<(usize, Vec<u8>)>> =
        domain.cells.iter().map(|v| vec![(usize::MAX, Vec::new()); v.len()]).collect();
    for (d, i, t, perm) in images {
        if d >= cells.len() || i >= cells[d].len() {
            return Err(Error::Parse { line: 0, msg: format!("image {d}:{i} out of range") });
        }
        cells[d][i] = (t, perm);
    }
    if cells.iter().flatten().any(|(t, _)| *t == usize::MAX) {
        return Err(Error::Parse { line: 0, msg: "missing image records".into() });
    }
    let map = crate::maps::CellMap { cells };
    map.validate(&domain, base)?;
    Ok(crate::maps::LocalIso { domain, map })
}

/// How one route component is referenced in a `.route` document.
pub enum RouteCompRef {
    Sub(String),
    /// Map-file components carry domain-vertex marks, since their marked
    /// vertices are not determined by their images.
    Map(String),
}

/// Serializes a route; each component either names a subcomplex of the base
/// or points at a map file written separately with [`write_lmap`].
pub fn write_route_with(route: &crate::routes::Route, refs: &[RouteCompRef]) -> String {
    let mut out = format!("route n={}\n", route.len());
    for (i, v) in route.vertices.iter().enumerate() {
        out.push_str(&format!("vertex {i} {v}\n"));
    }
    for (i, c) in route.components.iter().enumerate() {
        match &refs[i] {
            RouteCompRef::Sub(name) => out.push_str(&format!(
                "comp {i} sub={name} in={} out={}\n",
                c.map.vertex(c.entry),
                c.map.vertex(c.exit)
            )),
            RouteCompRef::Map(file) => out.push_str(&format!(
                "comp {i} map={file} in=dom:{} out=dom:{}\n",
                c.entry, c.exit
            )),
        }
    }
    out
}

/// Serializes an embedded route over named subcomplexes. The names must
/// cover the route's component images.
pub fn write_route(route: &crate::routes::Route, comp_names: &[String]) -> String {
    let refs: Vec<RouteCompRef> =
        comp_names.iter().map(|n| RouteCompRef::Sub(n.clone())).collect();
    write_route_with(route, &refs)
}

/// Parses a `.route` document over the named subcomplexes of a base.
/// Map-file components are rejected; use [`read_route_full`] with a
/// resolver for those.
pub fn read_route(
    text: &str,
    base: &CubeComplex,
    subs: &BTreeMap<String, SubcomplexRef>,
) -> Result<crate::routes::Route> {
    read_route_full(text, base, subs, &|name| {
        Err(Error::Parse { line: 0, msg: format!("no resolver for map file {name}") })
    })
}

/// Parses a `.route` document; `resolver` loads the contents of map files
/// referenced by `map=` components.
pub fn read_route_full(
    text: &str,
    base: &CubeComplex,
    subs: &BTreeMap<String, SubcomplexRef>,
    resolver: &dyn Fn(&str) -> Result<String>,
) -> Result<crate::routes::Route> {
    let mut lines = text.lines().enumerate();
    let n_line = lines.next().ok_or(Error::Parse { line: 1, msg: "empty document".into() })?;
    let n: usize = n_line
        .1
        .trim()
        .strip_prefix("route n=")
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: 1, msg: "expected `route n=<n>`".into() })?;
    enum CompRec {
        Sub(String, usize, usize),
        Map(String, usize, usize),
    }
    let mut vertices = vec![usize::MAX; n + 1];
    let mut comps: Vec<Option<CompRec>> = Vec::new();
    comps.resize_with(n, || None);
    for (ln, raw) in lines {
        let line = ln + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let mut parts = l.split_whitespace();
        match parts.next() {
            Some("vertex") => {
                let i: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "bad vertex index".into() })?;
                let v: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "bad vertex id".into() })?;
                if i > n {
                    return Err(Error::Parse { line, msg: "vertex index out of range".into() });
                }
                vertices[i] = v;
            }
            Some("comp") => {
                let i: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line, msg: "bad component index".into() })?;
                let mut sub_name = None;
                let mut map_name = None;
                let mut inv = None;
                let mut outv = None;
                let mut dom_marks = false;
                for field in parts {
                    if let Some(s) = field.strip_prefix("sub=") {
                        sub_name = Some(s.to_string());
                    } else if let Some(s) = field.strip_prefix("map=") {
                        map_name = Some(s.to_string());
                    } else if let Some(s) = field.strip_prefix("in=") {
                        let s2 = s.strip_prefix("dom:").inspect(|_| dom_marks = true).unwrap_or(s);
                        inv = s2.parse::<usize>().ok();
                    } else if let Some(s) = field.strip_prefix("out=") {
                        let s2 = s.strip_prefix("dom:").inspect(|_| dom_marks = true).unwrap_or(s);
                        outv = s2.parse::<usize>().ok();
                    }
                }
                let inv = inv.ok_or(Error::Parse { line, msg: "component needs in=".into() })?;
                let outv = outv.ok_or(Error::Parse { line, msg: "component needs out=".into() })?;
                if i >= n {
                    return Err(Error::Parse { line, msg: "component index out of range".into() });
                }
                comps[i] = Some(match (sub_name, map_name) {
                    (Some(name), None) => CompRec::Sub(name, inv, outv),
                    (None, Some(file)) if dom_marks => CompRec::Map(file, inv, outv),
                    (None, Some(_)) => {
                        return Err(Error::Parse {
                            line,
                            msg: "map components need dom:-qualified marks".into(),
                        })
                    }
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: "component needs exactly one of sub= or map=".into(),
                        })
                    }
                });
            }
            Some(other) => {
                return Err(Error::Parse { line, msg: format!("unknown record {other}") })
            }
            None => {}
        }
    }
    if vertices.iter().any(|&v| v == usize::MAX) {
        return Err(Error::Parse { line: 0, msg: "missing vertex records".into() });
    }
    let mut components = Vec::with_capacity(n);
    for (i, c) in comps.into_iter().enumerate() {
        let rec = c.ok_or(Error::Parse { line: 0, msg: format!("missing component {i}") })?;
        match rec {
            CompRec::Sub(name, inv, outv) => {
                let sub = subs
                    .get(&name)
                    .ok_or(Error::Parse { line: 0, msg: format!("unknown subcomplex {name}") })?;
                if inv != vertices[i] || outv != vertices[i + 1] {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("component {i} way-points disagree with vertex records"),
                    });
                }
                let li = crate::maps::LocalIso::inclusion(sub, base);
                let find = |xv: usize| -> Result<usize> {
                    (0..li.domain.num_vertices()).find(|&v| li.vertex(v) == xv).ok_or(
                        Error::Parse {
                            line: 0,
                            msg: format!("way-point {xv} is not in component {i}"),
                        },
                    )
                };
                let entry = find(inv)?;
                let exit = find(outv)?;
                components.push(crate::routes::RouteComponent { map: li, entry, exit });
            }
            CompRec::Map(file, entry, exit) => {
                let li = read_lmap(&resolver(&file)?, base)?;
                if entry >= li.domain.num_vertices() || exit >= li.domain.num_vertices() {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("component {i} marks out of range"),
                    });
                }
                if li.vertex(entry) != vertices[i] || li.vertex(exit) != vertices[i + 1] {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("component {i} marks disagree with vertex records"),
                    });
                }
                components.push(crate::routes::RouteComponent { map: li, entry, exit });
            }
        }
    }
    let route = crate::routes::Route { vertices, components };
    route.validate(base)?;
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn ccx_roundtrip() {
        let t = generators::torus(2, 2);
        let sub = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
        let text = write_ccx(&t, &[("edge0".into(), &sub)]);
        let (back, subs) = read_ccx(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(subs["edge0"], sub);
        // canonical form: re-serialization is byte-identical
        assert_eq!(write_ccx(&back, &[("edge0".into(), &subs["edge0"])]), text);
    }

    #[test]
    fn ccx_rejects_unknown_version() {
        assert!(matches!(read_ccx("ccx 2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn cov_roundtrip_and_hash() {
        let c = generators::cycle(2);
        let mut volt = Voltage::identity(2, 2);
        volt.perms[0] = vec![1, 0];
        let text = write_cov(&c, &volt);
        let back = read_cov(&text, &c).unwrap();
        assert_eq!(back, volt);
        // against the wrong base the hash check fires
        let other = generators::cycle(3);
        assert!(matches!(read_cov(&text, &other), Err(Error::HashMismatch(_))));
    }

    #[test]
    fn lmap_roundtrip_and_map_route() {
        use crate::maps::LocalIso;
        // the double-wrap circle onto CYC(2)
        let base = generators::cycle(2);
        let c4 = generators::cycle(4);
        let cells = vec![
            vec![(0, vec![0]), (1, vec![0]), (0, vec![0]), (1, vec![0])],
            vec![(0, vec![0, 1]), (1, vec![0, 1]), (0, vec![0, 1]), (1, vec![0, 1])],
        ];
        let li = LocalIso { domain: c4, map: crate::maps::CellMap { cells } };
        let text = write_lmap(&li, &base);
        let back = read_lmap(&text, &base).unwrap();
        assert_eq!(back.domain, li.domain);
        assert_eq!(back.map, li.map);
        assert_eq!(write_lmap(&back, &base), text);

        // a length-1 route with a map component, round-tripped through a
        // resolver
        let route = crate::routes::Route {
            vertices: vec![0, 0],
            components: vec![crate::routes::RouteComponent {
                map: li,
                entry: 0,
                exit: 0,
            }],
        };
        let rt = write_route_with(&route, &[RouteCompRef::Map("wrap.lmap".into())]);
        let subs = BTreeMap::new();
        let parsed = read_route_full(&rt, &base, &subs, &|name| {
            assert_eq!(name, "wrap.lmap");
            Ok(text.clone())
        })
        .unwrap();
        assert_eq!(parsed.vertices, route.vertices);
        assert_eq!(parsed.components[0].entry, 0);
        // the sub-only reader rejects map components
        assert!(read_route(&rt, &base, &subs).is_err());
    }

    #[test]
    fn route_roundtrip() {
        let t = generators::theta(3);
        let a = SubcomplexRef::from_cells(&t, [CellId::new(1, 0)]).unwrap();
        let b = SubcomplexRef::from_cells(&t, [CellId::new(1, 1)]).unwrap();
        let route =
            crate::routes::Route::from_subcomplexes(&t, vec![0, 1, 0], vec![a.clone(), b.clone()])
                .unwrap();
        let text = write_route(&route, &["a".into(), "b".into()]);
        let mut subs = BTreeMap::new();
        subs.insert("a".to_string(), a);
        subs.insert("b".to_string(), b);
        let back = read_route(&text, &t, &subs).unwrap();
        assert_eq!(back.vertices, route.vertices);
        assert_eq!(write_route(&back, &["a".into(), "b".into()]), text);
    }
}
