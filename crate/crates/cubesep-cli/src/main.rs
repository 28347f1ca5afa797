//! Batch command-line front end for the cubesep library.
//!
//! Exit codes: 0 success; 1 a checked property fails (non-essential route,
//! failed classification target, trap violation); 2 budget exhausted /
//! unknown; 3 input or verification error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubesep::complex::{CubeComplex, EdgeEnd, NpcComplex, SubcomplexRef};
use cubesep::covers::{connected_voltage_cover, to_voltage};
use cubesep::devball::DevBall;
use cubesep::generators;
use cubesep::hyperplane::hyperplanes;
use cubesep::io::{read_ccx, read_cov, read_route, sha_hex, write_ccx, write_cov};
use cubesep::pathology::pathology_report;
use cubesep::routes::{verify_no_closed_elevations, Essentialness};
use cubesep::synth::{SynthBudget, SynthOutcome};

#[derive(Parser)]
#[command(
    name = "cubesep",
    version,
    about = "special cube complexes, covers, routes and separability certificates"
)]
struct Cli {
    /// Worker threads for parallel verification loops.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Budgets {
    /// Maximum cover degree explored by searches.
    #[arg(long, default_value_t = 64)]
    max_degree: usize,
    /// Development radius for universal-cover balls.
    #[arg(long, default_value_t = 8)]
    radius: usize,
    /// Per-segment length bound for path enumerations.
    #[arg(long, default_value_t = 6)]
    seg_len: usize,
}

impl Budgets {
    fn synth(&self) -> SynthBudget {
        SynthBudget { max_degree: self.max_degree, radius: self.radius, ..SynthBudget::default() }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a complex: facet consistency and the link conditions.
    Validate { file: PathBuf },
    /// Specialness classification with pathology witnesses.
    Classify { file: PathBuf },
    /// List hyperplanes: edge classes, sidedness, carrier sizes.
    Hyperplanes { file: PathBuf },
    /// Generate a fixture complex (seg:K cyc:K cube:D rose:R theta:R
    /// grid:M,N torus:M,N cylinder:K necklace:K salv:N,u-v,...).
    Gen {
        spec: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Develop the radius-R ball of the universal cover.
    Develop {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Gate of a vertex in a named subcomplex of the developed ball.
    Gate {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        from: usize,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Convex hull of base vertices, developed at their closest lifts.
    Hull {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        verts: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Bridge decomposition between two named subcomplexes.
    Bridge {
        file: PathBuf,
        #[arg(long)]
        sub_a: String,
        #[arg(long)]
        sub_b: String,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Orthogonal complement of a named subcomplex at a vertex.
    Orthocomp {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        at: usize,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Walker-imitator trace: the imitator response to a walker path.
    Imitate {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        start: usize,
        /// Comma-separated oriented edges, `e` forward or `e~` reversed.
        #[arg(long)]
        path: String,
    },
    /// Sampled entrapment check: random walker paths inside a subcomplex,
    /// asserting the imitator confinement clauses. Seeded for
    /// reproducibility.
    Entrap {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        zone: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
    },
    /// Imitator cover (canonical completion) of a named subcomplex.
    Completion {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        base: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Route operations.
    Route {
        #[command(subcommand)]
        cmd: RouteCmd,
    },
    /// Separability operations.
    Sep {
        #[command(subcommand)]
        cmd: SepCmd,
    },
    /// Contact graph operations.
    Contact {
        #[command(subcommand)]
        cmd: ContactCmd,
    },
    /// Re-run the independent verifier on a certificate bundle directory.
    Verify { bundle: PathBuf },
}

#[derive(Subcommand)]
enum RouteCmd {
    /// Validate a route and decide essentialness.
    Check {
        complex: PathBuf,
        route: PathBuf,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// The projection poset P_j with its complexity kappa_j.
    Pj {
        complex: PathBuf,
        route: PathBuf,
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// The replacement family Omega(route, j).
    Omega {
        complex: PathBuf,
        route: PathBuf,
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Synthesize and exactly verify a cover with no closed elevations.
    Synth {
        complex: PathBuf,
        route: PathBuf,
        #[command(flatten)]
        budgets: Budgets,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SepCmd {
    /// Build the separating route for g against named subcomplex subgroups.
    Build {
        complex: PathBuf,
        /// Comma-separated named subcomplexes presenting the subgroups.
        #[arg(long, value_delimiter = ',')]
        subs: Vec<String>,
        /// The candidate element as an oriented edge loop, e.g. 0,2~.
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Build, synthesize and package a non-membership certificate bundle.
    Certify {
        complex: PathBuf,
        #[arg(long, value_delimiter = ',')]
        subs: Vec<String>,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[command(flatten)]
        budgets: Budgets,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ContactCmd {
    /// Adjacency structure of the ball's contact graph.
    Graph {
        complex: PathBuf,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Certified contact distance between two ball hyperplanes.
    Dist {
        complex: PathBuf,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Guard subgroup: verified no-shortening report.
    Guard {
        complex: PathBuf,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, default_value_t = 4)]
        deck_radius: usize,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
        #[command(flatten)]
        budgets: Budgets,
    },
}

fn load(path: &Path) -> Result<(CubeComplex, BTreeMap<String, SubcomplexRef>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_ccx(&text).map_err(|e| e.to_string())
}

fn load_npc(path: &Path) -> Result<(NpcComplex, BTreeMap<String, SubcomplexRef>), String> {
    let (x, subs) = load(path)?;
    let npc = x.into_npc().map_err(|e| e.to_string())?;
    Ok((npc, subs))
}

fn parse_path_arg(x: &CubeComplex, s: &str) -> Result<Vec<EdgeEnd>, String> {
    let mut out = Vec::new();
    let mut pos: Option<usize> = None;
    for item in s.split(',').filter(|i| !i.is_empty()) {
        let (num, rev) = match item.strip_suffix('~') {
            Some(n) => (n, true),
            None => (item, false),
        };
        let e: usize = num.parse().map_err(|_| format!("bad edge {item}"))?;
        if e >= x.num_edges() {
            return Err(format!("edge {e} out of range"));
        }
        let end = if rev { 1 } else { 0 };
        let ee = EdgeEnd { edge: e, end };
        let start = x.cells[1][e].corners[end as usize];
        if let Some(p) = pos {
            if p != start {
                return Err(format!("path breaks at edge {item}: expected start {p}, got {start}"));
            }
        }
        pos = Some(x.edge_other(ee));
        out.push(ee);
    }
    Ok(out)
}

fn gen_fixture(spec: &str) -> Result<CubeComplex, String> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || -> Result<Vec<usize>, String> {
        rest.split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| format!("bad number {s}")))
            .collect()
    };
    match kind {
        "seg" => Ok(generators::segment(nums()?[0])),
        "cyc" => Ok(generators::cycle(nums()?[0])),
        "cube" => Ok(generators::cube(nums()?[0])),
        "rose" => Ok(generators::rose(nums()?[0])),
        "theta" => Ok(generators::theta(nums()?[0])),
        "necklace" => Ok(generators::necklace(nums()?[0])),
        "cylinder" => Ok(generators::cylinder(nums()?[0])),
        "grid" => {
            let n = nums()?;
            Ok(generators::grid(n[0], n[1]))
        }
        "torus" => {
            let n = nums()?;
            Ok(generators::torus(n[0], n[1]))
        }
        "salv" => {
            let mut parts = rest.split(',').filter(|s| !s.is_empty());
            let n: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or("salv needs a vertex count".to_string())?;
            let mut edges = Vec::new();
            let mut max_dim = 2;
            for p in parts {
                if let Some(d) = p.strip_prefix("dim=") {
                    max_dim = d.parse().map_err(|_| "bad dim".to_string())?;
                } else {
                    let (u, v) = p.split_once('-').ok_or(format!("bad edge {p}"))?;
                    edges.push((
                        u.parse().map_err(|_| "bad vertex".to_string())?,
                        v.parse().map_err(|_| "bad vertex".to_string())?,
                    ));
                }
            }
            generators::salvetti(n, &edges, max_dim, false).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown fixture kind {other}")),
    }
}

fn develop_at(x: &NpcComplex, basepoint: usize, radius: usize) -> Result<DevBall, String> {
    cubesep::devball::develop(x, basepoint, radius).map_err(|e| e.to_string())
}

fn sub_convex(
    ball: &DevBall,
    x: &CubeComplex,
    subs: &BTreeMap<String, SubcomplexRef>,
    name: &str,
) -> Result<cubesep::geometry::ConvexSubcomplex, String> {
    let sub = subs.get(name).ok_or(format!("unknown subcomplex {name}"))?;
    let li = cubesep::maps::LocalIso::inclusion(sub, x);
    let dom_v = (0..li.domain.num_vertices())
        .find(|&v| li.vertex(v) == ball.proj.vertex(ball.center))
        .unwrap_or(0);
    let at = (0..ball.complex.num_vertices())
        .filter(|&v| ball.proj.vertex(v) == li.vertex(dom_v))
        .min_by_key(|&v| ball.dist[v])
        .ok_or("no lift of the subcomplex in the ball".to_string())?;
    let elev = ball.develop_elevation(&li, dom_v, at).map_err(|e| e.to_string())?;
    Ok(cubesep::geometry::ConvexSubcomplex::from_elevation(ball, &elev))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, content).map_err(|e| e.to_string()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Validate { file } => {
            let (x, _) = load(&file)?;
            let report = x.validate();
            for s in &report.structural {
                println!("structural: {s}");
            }
            for w in &report.npc_failures {
                println!("link: {w}");
            }
            if report.is_npc() {
                println!(
                    "NPC: certified ({} vertices, {} edges)",
                    x.num_vertices(),
                    x.num_edges()
                );
                Ok(0)
            } else {
                println!("NPC: failed");
                Ok(1)
            }
        }
        Cmd::Classify { file } => {
            let (x, _) = load_npc(&file)?;
            let hs = hyperplanes(&x).map_err(|e| e.to_string())?;
            let r = pathology_report(&x, &hs);
            println!(
                "{}; self-intersections: {}; self-osculations: {}; inter-osculations: {}; one-sided: {}",
                r.classification,
                r.self_intersections.len(),
                r.self_osculation_count(),
                r.inter_osculations.len(),
                r.one_sided.len()
            );
            Ok(0)
        }
        Cmd::Hyperplanes { file } => {
            let (x, _) = load_npc(&file)?;
            let hs = hyperplanes(&x).map_err(|e| e.to_string())?;
            for h in &hs {
                println!(
                    "hyperplane {} edges={:?} two_sided={} carrier_cells={}",
                    h.id,
                    h.edge_class,
                    h.two_sided,
                    h.carrier.cells.len()
                );
            }
            Ok(0)
        }
        Cmd::Gen { spec, out } => {
            let x = gen_fixture(&spec)?;
            emit(&out, &write_ccx(&x, &[]))?;
            Ok(0)
        }
        Cmd::Develop { file, basepoint, radius, out } => {
            let (x, _) = load_npc(&file)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let mut text = write_ccx(&ball.complex, &[]);
            text.push_str("proj\n");
            for d in 0..ball.complex.cells.len() {
                for i in 0..ball.complex.dim_count(d) {
                    text.push_str(&format!("cellmap {d} {i} {}\n", ball.proj.cells[d][i].0));
                }
            }
            emit(&out, &text)?;
            eprintln!(
                "ball: {} vertices, {} edges, {} hyperplanes",
                ball.complex.num_vertices(),
                ball.complex.num_edges(),
                ball.hyperplanes.len()
            );
            Ok(0)
        }
        Cmd::Gate { file, sub, from, basepoint, radius } => {
            let (x, subs) = load_npc(&file)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let a = sub_convex(&ball, x.raw(), &subs, &sub)?;
            let lift = (0..ball.complex.num_vertices())
                .filter(|&v| ball.proj.vertex(v) == from)
                .min_by_key(|&v| ball.dist[v])
                .ok_or("vertex has no lift in the ball".to_string())?;
            let g = cubesep::geometry::gate(&ball, &a, lift).map_err(|e| e.to_string())?;
            println!(
                "gate(ball vertex {lift}) = ball vertex {g} over base vertex {}",
                ball.proj.vertex(g)
            );
            Ok(0)
        }
        Cmd::Hull { file, verts, basepoint, radius } => {
            let (x, _) = load_npc(&file)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let mut lifts = std::collections::BTreeSet::new();
            for v in verts {
                let lift = (0..ball.complex.num_vertices())
                    .filter(|&b| ball.proj.vertex(b) == v)
                    .min_by_key(|&b| ball.dist[b])
                    .ok_or(format!("vertex {v} has no lift"))?;
                lifts.insert(lift);
            }
            let h = cubesep::geometry::hull(&ball, &lifts).map_err(|e| e.to_string())?;
            println!(
                "hull: {} vertices, {} cells, crossing {} walls",
                h.vertices().len(),
                h.sub.cells.len(),
                h.crossing.len()
            );
            Ok(0)
        }
        Cmd::Bridge { file, sub_a, sub_b, basepoint, radius } => {
            let (x, subs) = load_npc(&file)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let a = sub_convex(&ball, x.raw(), &subs, &sub_a)?;
            let b = sub_convex(&ball, x.raw(), &subs, &sub_b)?;
            let br = cubesep::geometry::bridge(&ball, &a, &b).map_err(|e| e.to_string())?;
            println!(
                "bridge: |C| = {}, |D| = {}, separators = {:?}, chart exact = {}",
                br.c.vertices().len(),
                br.d.vertices().len(),
                br.separators,
                br.chart.exact
            );
            Ok(0)
        }
        Cmd::Orthocomp { file, sub, at, basepoint, radius } => {
            let (x, subs) = load_npc(&file)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let a = sub_convex(&ball, x.raw(), &subs, &sub)?;
            let lift = (0..ball.complex.num_vertices())
                .filter(|&v| ball.proj.vertex(v) == at && a.contains_vertex(v))
                .min_by_key(|&v| ball.dist[v])
                .ok_or("base vertex has no lift inside the subcomplex".to_string())?;
            let oc = cubesep::geometry::orthogonal_complement(&ball, &a, lift)
                .map_err(|e| e.to_string())?;
            println!(
                "orthogonal complement: |B| = {} (complete: {}), region {} vertices, chart exact = {}",
                oc.b.vertices().len(),
                oc.b.complete,
                oc.region.vertices().len(),
                oc.chart.exact
            );
            Ok(0)
        }
        Cmd::Imitate { file, sub, start, path } => {
            let (x, subs) = load_npc(&file)?;
            let hs = hyperplanes(&x).map_err(|e| e.to_string())?;
            let y = subs.get(&sub).ok_or(format!("unknown subcomplex {sub}"))?;
            let walk = parse_path_arg(x.raw(), &path)?;
            let im = cubesep::walker::Imitation::new(&x, &hs, y).map_err(|e| e.to_string())?;
            print!("{}", im.trace(start, &walk));
            let (end, _) = im.imitate(start, &walk);
            println!("imitator ends at {end}");
            Ok(0)
        }
        Cmd::Entrap { file, sub, zone, seed, trials, max_len } => {
            let (x, subs) = load_npc(&file)?;
            let hs = hyperplanes(&x).map_err(|e| e.to_string())?;
            let y = subs.get(&sub).ok_or(format!("unknown subcomplex {sub}"))?;
            let z = subs.get(&zone).ok_or(format!("unknown subcomplex {zone}"))?;
            let report = cubesep::walker::entrapment_check(&x, &hs, y, z, trials, max_len, seed)
                .map_err(|e| e.to_string())?;
            println!(
                "trials {} inside-steps {} outside-steps {} violations {}",
                report.trials,
                report.stay_inside_checked,
                report.stay_outside_checked,
                report.violations.len()
            );
            for v in &report.violations {
                println!("violation: {v}");
            }
            Ok(if report.violations.is_empty() { 0 } else { 1 })
        }
        Cmd::Completion { file, sub, base, out } => {
            let (x, subs) = load_npc(&file)?;
            let hs = hyperplanes(&x).map_err(|e| e.to_string())?;
            let y = subs.get(&sub).ok_or(format!("unknown subcomplex {sub}"))?;
            let ic =
                cubesep::walker::imitator_cover(&x, &hs, y, base).map_err(|e| e.to_string())?;
            let volt = to_voltage(&ic.cover).map_err(|e| e.to_string())?;
            emit(&out, &write_cov(x.raw(), &volt))?;
            eprintln!("imitator cover degree {}", ic.cover.degree);
            Ok(0)
        }
        Cmd::Route { cmd } => run_route(cmd),
        Cmd::Sep { cmd } => run_sep(cmd),
        Cmd::Contact { cmd } => run_contact(cmd),
        Cmd::Verify { bundle } => run_verify(&bundle),
    }
}

fn run_route(cmd: RouteCmd) -> Result<u8, String> {
    match cmd {
        RouteCmd::Check { complex, route, budgets } => {
            let (x, subs) = load_npc(&complex)?;
            let text = std::fs::read_to_string(&route).map_err(|e| e.to_string())?;
            let r = read_route(&text, x.raw(), &subs).map_err(|e| e.to_string())?;
            r.validate(x.raw()).map_err(|e| e.to_string())?;
            println!(
                "route: length {}, closed = {}, embedded = {}",
                r.len(),
                r.is_closed(),
                r.is_embedded()
            );
            if r.is_closed() {
                let e = cubesep::routes::is_essential(&x, &r, budgets.radius, &[])
                    .map_err(|e| e.to_string())?;
                match e {
                    Essentialness::Essential(c) => {
                        println!("essential: yes ({c:?})");
                        Ok(0)
                    }
                    Essentialness::NonEssential(w) => {
                        println!("essential: no (closed elevation through {w:?})");
                        Ok(1)
                    }
                    Essentialness::Unknown(msg) => {
                        println!("essential: unknown ({msg})");
                        Ok(2)
                    }
                }
            } else {
                Ok(0)
            }
        }
        RouteCmd::Pj { complex, route, j, budgets } => {
            let (x, subs) = load_npc(&complex)?;
            let text = std::fs::read_to_string(&route).map_err(|e| e.to_string())?;
            let r = read_route(&text, x.raw(), &subs).map_err(|e| e.to_string())?;
            let poset = cubesep::control::compute_pj(&x, &r, j, budgets.radius)
                .map_err(|e| e.to_string())?;
            println!(
                "P_{}: {} elements in {} classes, kappa = {}, exact = {}",
                j,
                poset.elements.len(),
                poset.classes.len(),
                poset.kappa,
                poset.exact
            );
            Ok(0)
        }
        RouteCmd::Omega { complex, route, j, budgets } => {
            let (x, subs) = load_npc(&complex)?;
            let text = std::fs::read_to_string(&route).map_err(|e| e.to_string())?;
            let r = read_route(&text, x.raw(), &subs).map_err(|e| e.to_string())?;
            let fam = cubesep::control::omega_family(&x, &r, j, budgets.radius)
                .map_err(|e| e.to_string())?;
            println!("Omega(route, {}): {} routes", j, fam.len());
            for (i, f) in fam.iter().enumerate() {
                println!("  route {i}: length {}, way-points {:?}", f.len(), f.vertices);
            }
            Ok(0)
        }
        RouteCmd::Synth { complex, route, budgets, out } => {
            let (x, subs) = load_npc(&complex)?;
            let text = std::fs::read_to_string(&route).map_err(|e| e.to_string())?;
            let r = read_route(&text, x.raw(), &subs).map_err(|e| e.to_string())?;
            match cubesep::synth::synthesize_cover(&x, &r, &budgets.synth()) {
                Ok(SynthOutcome::Certified(cert)) => {
                    println!("certified: cover degree {}", cert.cover.degree);
                    if let Some(dir) = out {
                        write_bundle(&dir, x.raw(), &subs, &text, &cert)?;
                        println!("bundle written to {}", dir.display());
                    }
                    Ok(0)
                }
                Ok(SynthOutcome::Unknown { transcript }) => {
                    println!("unknown: budget exhausted\n{transcript}");
                    Ok(2)
                }
                Err(cubesep::Error::Precondition(msg)) => {
                    println!("rejected: {msg}");
                    Ok(1)
                }
                Err(e) => Err(e.to_string()),
            }
        }
    }
}

fn run_sep(cmd: SepCmd) -> Result<u8, String> {
    match cmd {
        SepCmd::Build { complex, subs: names, g, basepoint, budgets } => {
            let (x, subs) = load_npc(&complex)?;
            let ks = collect_subgroups(x.raw(), &subs, &names, basepoint)?;
            let g_path = parse_path_arg(x.raw(), &g)?;
            let sr = cubesep::separability::build_separating_route(
                &x,
                &ks,
                &g_path,
                basepoint,
                budgets.radius,
            )
            .map_err(|e| e.to_string())?;
            println!("route built: length {}, provisional = {}", sr.route.len(), sr.provisional);
            let e = cubesep::routes::is_essential(&x, &sr.route, budgets.radius, &[])
                .map_err(|e| e.to_string())?;
            match &e {
                Essentialness::NonEssential(_) => {
                    println!("g lies in the product (route not essential)");
                    Ok(1)
                }
                other => {
                    println!("essentialness: {other:?}");
                    Ok(0)
                }
            }
        }
        SepCmd::Certify { complex, subs: names, g, basepoint, budgets, out } => {
            let (x, subs) = load_npc(&complex)?;
            let ks = collect_subgroups(x.raw(), &subs, &names, basepoint)?;
            let g_path = parse_path_arg(x.raw(), &g)?;
            let sr = cubesep::separability::build_separating_route(
                &x,
                &ks,
                &g_path,
                basepoint,
                budgets.radius,
            )
            .map_err(|e| e.to_string())?;
            match cubesep::synth::synthesize_cover(&x, &sr.route, &budgets.synth()) {
                Ok(SynthOutcome::Certified(cert)) => {
                    let nm = cubesep::separability::certify_nonmembership(&x, &g_path, &cert)
                        .map_err(|e| e.to_string())?;
                    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
                    let base_text = write_ccx(x.raw(), &[]);
                    let volt = to_voltage(&nm.cover).map_err(|e| e.to_string())?;
                    let cov_text = write_cov(x.raw(), &volt);
                    // route components are quotient maps; serialize each as
                    // a map file referenced from the route document
                    let mut refs = Vec::new();
                    let mut manifest = format!(
                        "base.ccx {}\ncover.cov {}\n",
                        sha_hex(base_text.as_bytes()),
                        sha_hex(cov_text.as_bytes())
                    );
                    for (i, c) in nm.route.components.iter().enumerate() {
                        let fname = format!("comp{i}.lmap");
                        let text = cubesep::io::write_lmap(&c.map, x.raw());
                        manifest.push_str(&format!("{fname} {}\n", sha_hex(text.as_bytes())));
                        std::fs::write(out.join(&fname), text).map_err(|e| e.to_string())?;
                        refs.push(cubesep::io::RouteCompRef::Map(fname));
                    }
                    let route_text = cubesep::io::write_route_with(&nm.route, &refs);
                    manifest.push_str(&format!(
                        "route.route {}\n",
                        sha_hex(route_text.as_bytes())
                    ));
                    std::fs::write(out.join("route.route"), &route_text)
                        .map_err(|e| e.to_string())?;
                    std::fs::write(out.join("base.ccx"), &base_text).map_err(|e| e.to_string())?;
                    std::fs::write(out.join("cover.cov"), &cov_text).map_err(|e| e.to_string())?;
                    std::fs::write(out.join("transcript.txt"), &nm.transcript)
                        .map_err(|e| e.to_string())?;
                    std::fs::write(out.join("MANIFEST"), manifest).map_err(|e| e.to_string())?;
                    println!(
                        "certified: g is separated from the product by a degree-{} cover",
                        nm.cover.degree
                    );
                    Ok(0)
                }
                Ok(SynthOutcome::Unknown { transcript }) => {
                    println!("unknown: budget exhausted\n{transcript}");
                    Ok(2)
                }
                Err(cubesep::Error::Precondition(msg)) => {
                    println!("rejected: {msg} (g may lie in the product)");
                    Ok(1)
                }
                Err(e) => Err(e.to_string()),
            }
        }
    }
}

fn collect_subgroups(
    x: &CubeComplex,
    subs: &BTreeMap<String, SubcomplexRef>,
    names: &[String],
    basepoint: usize,
) -> Result<Vec<cubesep::separability::SubgroupPresentation>, String> {
    let mut ks = Vec::new();
    for name in names {
        let sub = subs.get(name).ok_or(format!("unknown subcomplex {name}"))?;
        let li = cubesep::maps::LocalIso::inclusion(sub, x);
        let bp = (0..li.domain.num_vertices())
            .find(|&v| li.vertex(v) == basepoint)
            .ok_or(format!("subcomplex {name} must contain the basepoint"))?;
        ks.push(cubesep::separability::SubgroupPresentation {
            li,
            basepoint: bp,
            conn_path: vec![],
        });
    }
    Ok(ks)
}

fn run_contact(cmd: ContactCmd) -> Result<u8, String> {
    match cmd {
        ContactCmd::Graph { complex, basepoint, radius } => {
            let (x, _) = load_npc(&complex)?;
            let ball = develop_at(&x, basepoint, radius)?;
            let cg = cubesep::contact::contact_graph(&ball);
            for (h, adj) in cg.adjacency.iter().enumerate() {
                println!("wall {h}{}: {:?}", if cg.frontier[h] { " (frontier)" } else { "" }, adj);
            }
            Ok(0)
        }
        ContactCmd::Dist { complex, v, w, basepoint, budgets } => {
            let (x, _) = load_npc(&complex)?;
            let ball = develop_at(&x, basepoint, budgets.radius)?;
            let d = cubesep::contact::contact_distance(&x, &ball, v, w, &budgets.synth())
                .map_err(|e| e.to_string())?;
            println!(
                "distance {} ({})",
                d.upper,
                if d.certified { "certified" } else { "upper bound" }
            );
            Ok(if d.certified { 0 } else { 2 })
        }
        ContactCmd::Guard { complex, v, w, deck_radius, basepoint, budgets } => {
            let (x, _) = load_npc(&complex)?;
            let ball = develop_at(&x, basepoint, budgets.radius)?;
            let report =
                cubesep::contact::guard_subgroup(&x, &ball, v, w, &budgets.synth(), deck_radius)
                    .map_err(|e| e.to_string())?;
            print!("{}", report.transcript);
            for e in &report.entries {
                println!(
                    "deck {} in_subgroup={} translated={:?} upper={:?} lower={:?} verified={}",
                    e.deck_key, e.in_subgroup, e.translated, e.upper, e.lower, e.verified
                );
            }
            println!(
                "guard cover degree {}, all verified in range: {}",
                report.cover.degree,
                report.all_verified()
            );
            Ok(if report.all_verified() { 0 } else { 2 })
        }
    }
}

fn write_bundle(
    dir: &Path,
    x: &CubeComplex,
    subs: &BTreeMap<String, SubcomplexRef>,
    route_text: &str,
    cert: &cubesep::synth::CoverCertificate,
) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let named: Vec<(String, &SubcomplexRef)> = subs.iter().map(|(n, s)| (n.clone(), s)).collect();
    let base_text = write_ccx(x, &named);
    let volt = to_voltage(&cert.cover).map_err(|e| e.to_string())?;
    let cov_text = write_cov(x, &volt);
    std::fs::write(dir.join("base.ccx"), &base_text).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("route.route"), route_text).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("cover.cov"), &cov_text).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("transcript.txt"), &cert.transcript).map_err(|e| e.to_string())?;
    let manifest = format!(
        "base.ccx {}\nroute.route {}\ncover.cov {}\n",
        sha_hex(base_text.as_bytes()),
        sha_hex(route_text.as_bytes()),
        sha_hex(cov_text.as_bytes())
    );
    std::fs::write(dir.join("MANIFEST"), manifest).map_err(|e| e.to_string())?;
    Ok(())
}

fn run_verify(bundle: &Path) -> Result<u8, String> {
    let read = |name: &str| -> Result<String, String> {
        std::fs::read_to_string(bundle.join(name)).map_err(|e| format!("{name}: {e}"))
    };
    let manifest = read("MANIFEST")?;
    for line in manifest.lines() {
        let mut it = line.split_whitespace();
        let (Some(name), Some(want)) = (it.next(), it.next()) else { continue };
        let got = sha_hex(read(name)?.as_bytes());
        if got != want {
            println!("verify: {name} hash mismatch");
            return Ok(3);
        }
    }
    let (x, subs) = read_ccx(&read("base.ccx")?).map_err(|e| e.to_string())?;
    let npc = x.into_npc().map_err(|e| e.to_string())?;
    let volt = read_cov(&read("cover.cov")?, npc.raw()).map_err(|e| e.to_string())?;
    let cover = connected_voltage_cover(&npc, &volt).map_err(|e| e.to_string())?;
    cover.verify().map_err(|e| e.to_string())?;
    match read("route.route") {
        Ok(rt) => {
            let resolver = |name: &str| -> cubesep::Result<String> {
                std::fs::read_to_string(bundle.join(name)).map_err(cubesep::Error::Io)
            };
            let route = cubesep::io::read_route_full(&rt, npc.raw(), &subs, &resolver)
                .map_err(|e| e.to_string())?;
            let t = verify_no_closed_elevations(&route, &cover).map_err(|e| e.to_string())?;
            print!("{}", t.lines);
            if t.no_closed() {
                println!("verify: certificate holds (cover degree {})", cover.degree);
                Ok(0)
            } else {
                println!("verify: certificate FAILS");
                Ok(3)
            }
        }
        Err(_) => {
            println!("verify: cover well-formed (degree {}), no route in bundle", cover.degree);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
