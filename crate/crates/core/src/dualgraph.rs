//! Dual graphs of the compact invariant components.
//!
//! One vertex per compact invariant component alive at the level, one
//! wedge per corner curve between two of them.  The graph is built twice,
//! stepwise from the blow-up history and directly from incidence, and the
//! two must agree.  Chains act on scalars by multiplying with the negated
//! arriving-side index per wedge; circular chains must act as the
//! identity, which is the audited consequence of reciprocity and the
//! triple relations.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{BornOf, Center, Complex, ComponentId, CurveId, QueryError};
use crate::par;
use crate::report::Report;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wedge {
    /// The two flanking vertices, sorted.
    pub ends: (ComponentId, ComponentId),
    pub corner: CurveId,
    /// Side index of the corner on each flanking component.
    pub side_index: BTreeMap<ComponentId, Scalar>,
}

#[derive(Debug, Clone)]
pub struct DualGraph {
    pub level: u32,
    /// Compact invariant components alive at the level, sorted.
    pub vertices: Vec<ComponentId>,
    /// Sorted by end pair; at most one wedge per pair.
    pub wedges: Vec<Wedge>,
}

/// Alternating vertex/wedge walk; `wedges` holds positions in the graph's
/// wedge table and is one shorter than `vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub vertices: Vec<ComponentId>,
    pub wedges: Vec<usize>,
}

impl Chain {
    pub fn trivial(v: ComponentId) -> Chain {
        Chain { vertices: vec![v], wedges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.wedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wedges.is_empty()
    }

    pub fn is_circular(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    /// The reversed walk, composing with which recovers the argument.
    pub fn inverse(&self) -> Chain {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut wedges = self.wedges.clone();
        wedges.reverse();
        Chain { vertices, wedges }
    }

    /// Rotation of a circular chain to start at position `k`.
    pub fn shifted(&self, k: usize) -> Chain {
        let s = self.wedges.len();
        if s == 0 || !self.is_circular() {
            return self.clone();
        }
        let k = k % s;
        let mut vertices: Vec<ComponentId> =
            (0..s).map(|n| self.vertices[(k + n) % s]).collect();
        vertices.push(vertices[0]);
        let wedges: Vec<usize> = (0..s).map(|n| self.wedges[(k + n) % s]).collect();
        Chain { vertices, wedges }
    }
}

/// The dual graph at a level, built stepwise from the blow-up history and
/// cross-checked against the incidence tables.
pub fn build_dual_graph(cx: &Complex, k: u32) -> Result<DualGraph, QueryError> {
    if k > cx.levels() {
        return Err(QueryError(format!("level {} does not exist", k)));
    }
    let direct = direct_graph(cx, k)?;
    let stepwise = stepwise_pairs(cx, k);
    let direct_pairs: BTreeSet<(ComponentId, ComponentId, CurveId)> =
        direct.wedges.iter().map(|w| (w.ends.0, w.ends.1, w.corner)).collect();
    if stepwise.0 != direct.vertices.iter().copied().collect::<BTreeSet<_>>()
        || stepwise.1 != direct_pairs
    {
        return Err(QueryError(format!(
            "stepwise dual graph disagrees with incidence at level {}",
            k
        )));
    }
    Ok(direct)
}

fn direct_graph(cx: &Complex, k: u32) -> Result<DualGraph, QueryError> {
    let vertices: Vec<ComponentId> = cx
        .comp_ids()
        .filter(|&e| {
            let rec = cx.comp(e);
            rec.birth_step <= k && rec.compact && cx.is_invariant(e)
        })
        .collect();
    let vertex_set: BTreeSet<ComponentId> = vertices.iter().copied().collect();
    let mut wedges = Vec::new();
    for c in cx.curve_ids() {
        let rec = cx.curve(c);
        if !cx.curve_alive_at(c, k) || rec.housing.len() != 2 {
            continue;
        }
        let (a, b) = (rec.housing[0], rec.housing[1]);
        if !vertex_set.contains(&a) || !vertex_set.contains(&b) {
            continue;
        }
        let mut side_index = BTreeMap::new();
        for &side in &[a, b] {
            let v = cx.curve_index(c, side).cloned().ok_or_else(|| {
                QueryError(format!(
                    "corner {} carries no index on the {} side",
                    rec.name,
                    cx.comp(side).name
                ))
            })?;
            side_index.insert(side, v);
        }
        wedges.push(Wedge { ends: (a, b), corner: c, side_index });
    }
    wedges.sort_by_key(|w| w.ends);
    Ok(DualGraph { level: k, vertices, wedges })
}

/// Vertex and wedge sets reconstructed step by step: a non-dicritical
/// point blow-up adds a vertex plus one wedge toward every compact
/// invariant component through its center; nothing else changes the graph.
fn stepwise_pairs(
    cx: &Complex,
    k: u32,
) -> (BTreeSet<ComponentId>, BTreeSet<(ComponentId, ComponentId, CurveId)>) {
    let mut vertices = BTreeSet::new();
    let mut wedges = BTreeSet::new();
    for s in 1..=k {
        let step = cx.step(s);
        let p = match step.center {
            Center::Point(p) if !step.dicritical => p,
            _ => continue,
        };
        vertices.insert(step.component);
        for &e in &cx.point(p).comps {
            if !vertices.contains(&e) {
                continue;
            }
            let line = cx
                .curve_ids()
                .find(|&c| {
                    cx.curve(c).birth_level == s
                        && matches!(cx.curve(c).born_of, BornOf::Line { .. })
                        && cx.curve(c).housing.contains(&e)
                })
                .expect("point step leaves a line in every older component through its center");
            let (a, b) = (e.min(step.component), e.max(step.component));
            wedges.insert((a, b, line));
        }
    }
    (vertices, wedges)
}

/// Multiplies `mu` by the negated arriving-side index across each wedge of
/// the chain in order.
pub fn chain_transform(g: &DualGraph, c: &Chain, mu: &Scalar) -> Result<Scalar, QueryError> {
    if mu.is_zero() {
        return Err(QueryError("chain transforms act on nonzero scalars".to_string()));
    }
    if c.vertices.len() != c.wedges.len() + 1 || c.vertices.is_empty() {
        return Err(QueryError("chain shape is broken".to_string()));
    }
    let mut value = mu.clone();
    for n in 0..c.wedges.len() {
        let w = c
            .wedges
            .get(n)
            .and_then(|&wi| g.wedges.get(wi))
            .ok_or_else(|| QueryError("chain references a wedge outside the graph".to_string()))?;
        let (from, to) = (c.vertices[n], c.vertices[n + 1]);
        if (w.ends.0.min(w.ends.1), w.ends.0.max(w.ends.1)) != (from.min(to), from.max(to)) {
            return Err(QueryError(format!(
                "wedge {} does not join the flanking vertices",
                n + 1
            )));
        }
        let alpha = &w.side_index[&to];
        value = -&(alpha * &value);
    }
    Ok(value)
}

/// All simple cycles with at most `max_len` wedges, each reported once,
/// rooted at its smallest vertex.
pub fn simple_cycles(g: &DualGraph, max_len: usize) -> Vec<Chain> {
    let n = g.vertices.len();
    let pos: BTreeMap<ComponentId, usize> =
        g.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (wi, w) in g.wedges.iter().enumerate() {
        let a = pos[&w.ends.0];
        let b = pos[&w.ends.1];
        adj[a].push((wi, b));
        adj[b].push((wi, a));
    }
    for row in adj.iter_mut() {
        row.sort();
    }
    let mut out = Vec::new();
    for r in 0..n {
        let mut path = vec![r];
        let mut wedges = Vec::new();
        cycle_dfs(g, &adj, r, &mut path, &mut wedges, max_len, &mut out);
    }
    out
}

fn cycle_dfs(
    g: &DualGraph,
    adj: &[Vec<(usize, usize)>],
    r: usize,
    path: &mut Vec<usize>,
    wedges: &mut Vec<usize>,
    cap: usize,
    out: &mut Vec<Chain>,
) {
    let v = *path.last().unwrap();
    for &(wi, u) in &adj[v] {
        if u == r {
            // Close only in one orientation so each cycle appears once.
            if path.len() >= 3 && path[1] < path[path.len() - 1] {
                let mut vs: Vec<ComponentId> =
                    path.iter().map(|&i| g.vertices[i]).collect();
                vs.push(g.vertices[r]);
                let mut ws = wedges.clone();
                ws.push(wi);
                out.push(Chain { vertices: vs, wedges: ws });
            }
        } else if u > r && !path.contains(&u) && path.len() < cap {
            path.push(u);
            wedges.push(wi);
            cycle_dfs(g, adj, r, path, wedges, cap, out);
            path.pop();
            wedges.pop();
        }
    }
}

fn random_nonzero_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let mut coord = || {
            let p = rng.gen_range(-3i64..=3);
            let q = rng.gen_range(1i64..=3);
            Scalar::rational(p, q)
        };
        let (a, b, c, d) = (coord(), coord(), coord(), coord());
        let v = &(&a + &(&b * &Scalar::sqrt2()))
            + &(&Scalar::i() * &(&c + &(&d * &Scalar::sqrt2())));
        if !v.is_zero() {
            return v;
        }
    }
}

/// A random circular chain: a walk out, optionally a shifted simple cycle
/// at the far end, and the walk reversed.
fn random_closed_walk(
    g: &DualGraph,
    adj: &[Vec<(usize, usize)>],
    cycles: &[Chain],
    rng: &mut ChaCha8Rng,
) -> Option<Chain> {
    if g.vertices.is_empty() {
        return None;
    }
    let start = rng.gen_range(0..g.vertices.len());
    let mut path = vec![start];
    let mut wedges = Vec::new();
    for _ in 0..rng.gen_range(0..=4usize) {
        let v = *path.last().unwrap();
        if adj[v].is_empty() {
            break;
        }
        let (wi, u) = adj[v][rng.gen_range(0..adj[v].len())];
        path.push(u);
        wedges.push(wi);
    }
    let end = g.vertices[*path.last().unwrap()];
    let mut chain = Chain {
        vertices: path.iter().map(|&i| g.vertices[i]).collect(),
        wedges,
    };
    if !cycles.is_empty() && rng.gen_bool(0.7) {
        let cyc = &cycles[rng.gen_range(0..cycles.len())];
        if let Some(at) = cyc.vertices[..cyc.len()].iter().position(|&v| v == end) {
            let rotated = cyc.shifted(at);
            chain.vertices.extend(rotated.vertices[1..].iter().copied());
            chain.wedges.extend(rotated.wedges.iter().copied());
        }
    }
    let back = Chain {
        vertices: chain.vertices[..path.len()].to_vec(),
        wedges: chain.wedges[..path.len() - 1].to_vec(),
    }
    .inverse();
    chain.vertices.extend(back.vertices[1..].iter().copied());
    chain.wedges.extend(back.wedges.iter().copied());
    Some(chain)
}

/// Every circular chain fixes every nonzero scalar.  Checks all simple
/// cycles up to twelve wedges plus `budget` random closed walks, each
/// against ten sampled values.
pub fn audit_circular_chains(g: &DualGraph, budget: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mus: Vec<Scalar> = (0..10).map(|_| random_nonzero_scalar(&mut rng)).collect();
    let cycles = simple_cycles(g, 12);

    let pos: BTreeMap<ComponentId, usize> =
        g.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.vertices.len()];
    for (wi, w) in g.wedges.iter().enumerate() {
        adj[pos[&w.ends.0]].push((wi, pos[&w.ends.1]));
        adj[pos[&w.ends.1]].push((wi, pos[&w.ends.0]));
    }
    for row in adj.iter_mut() {
        row.sort();
    }

    let mut chains = cycles.clone();
    for _ in 0..budget {
        if let Some(c) = random_closed_walk(g, &adj, &cycles, &mut rng) {
            chains.push(c);
        }
    }

    let mut rep = Report::new();
    let subs = par::map_collect(&chains, |chain| {
        let mut rep = Report::new();
        for mu in &mus {
            match chain_transform(g, chain, mu) {
                Ok(v) if v == *mu => rep.check_ok(),
                Ok(v) => rep.fail(
                    "circular_chain",
                    chain_label(chain),
                    format!("moves {} to {}", mu.render(), v.render()),
                ),
                Err(e) => rep.fail("circular_chain", chain_label(chain), e.to_string()),
            }
        }
        rep
    });
    for sub in subs {
        rep.merge(sub);
    }
    rep.sorted()
}

fn chain_label(c: &Chain) -> String {
    c.vertices
        .iter()
        .map(|v| v.0.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// Optional highlighting for the DOT export.
#[derive(Debug, Clone, Default)]
pub struct DotAnnotations {
    /// Wedges whose corner belongs to a nodal component.
    pub nodal_corners: BTreeSet<CurveId>,
    /// Vertices housing a member of some partial separatrix.
    pub separatrix_vertices: BTreeSet<ComponentId>,
    /// Vertices carrying an incomplete point.
    pub incomplete_vertices: BTreeSet<ComponentId>,
}

/// Deterministic DOT text: vertices and wedges in id order, indices
/// rendered as exact tuples.
pub fn export_dot(cx: &Complex, g: &DualGraph, ann: &DotAnnotations) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "// dual graph of {} at level {}: {} vertices, {} wedges\n",
        cx.ambient_name(),
        g.level,
        g.vertices.len(),
        g.wedges.len()
    ));
    if g.vertices.is_empty() {
        out.push_str("graph G {}\n");
        return out;
    }
    out.push_str("graph G {\n");
    for &v in &g.vertices {
        let mut attrs = Vec::new();
        if ann.separatrix_vertices.contains(&v) {
            attrs.push("style=filled fillcolor=lightblue".to_string());
        }
        if ann.incomplete_vertices.contains(&v) {
            attrs.push("color=red".to_string());
        }
        let attr_text = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(" "))
        };
        out.push_str(&format!("  \"{}\"{};\n", cx.comp(v).name, attr_text));
    }
    for w in &g.wedges {
        let label = format!(
            "{} {}/{}",
            cx.curve(w.corner).name,
            w.side_index[&w.ends.0].render(),
            w.side_index[&w.ends.1].render()
        );
        let color = if ann.nodal_corners.contains(&w.corner) {
            " color=orange penwidth=2"
        } else {
            ""
        };
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [label=\"{}\"{}];\n",
            cx.comp(w.ends.0).name,
            cx.comp(w.ends.1).name,
            label,
            color
        ));
    }
    out.push_str("}\n");
    out
}
