//! Column semigroup machinery: the coincidence graph, column number and
//! minimal sets, the idempotent realization power, and the letter encodings
//! (nu, nu-bar) with their beta permutations.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::digits::Address;
use crate::subst::Substitution;
use crate::symmetry::GeomCandidate;

/// A column map together with one address realizing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnMap {
    pub map: Vec<usize>,
    pub witness: Option<Address>,
}

impl ColumnMap {
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.map.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    pub fn is_idempotent(&self) -> bool {
        self.map.iter().enumerate().all(|(_, &b)| self.map[b] == b)
    }

    /// Apply to a letter set, returning the sorted image set.
    pub fn apply_set(&self, set: &[usize]) -> Vec<usize> {
        let mut img: Vec<usize> = set.iter().map(|&a| self.map[a]).collect();
        img.sort_unstable();
        img.dedup();
        img
    }
}

/// Apply a raw column map to a sorted letter set.
pub fn map_set(map: &[usize], set: &[usize]) -> Vec<usize> {
    let mut img: Vec<usize> = set.iter().map(|&a| map[a]).collect();
    img.sort_unstable();
    img.dedup();
    img
}

/// The coincidence graph: vertices are letter subsets generated from the full
/// alphabet by one-digit column images; every vertex has exactly one out-edge
/// per digit.
#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceGraph {
    /// Sorted letter subsets in BFS discovery order; vertex 0 is the full
    /// alphabet.
    pub vertices: Vec<Vec<usize>>,
    /// Edges `(source vertex, digit index, target vertex)`.
    pub edges: Vec<(usize, usize, usize)>,
}

impl CoincidenceGraph {
    pub fn build(sub: &Substitution) -> Self {
        let full: Vec<usize> = (0..sub.letters()).collect();
        let mut vertices = vec![full];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(vertices[0].clone(), 0);
        let mut edges = Vec::new();
        let mut head = 0;
        while head < vertices.len() {
            let u = vertices[head].clone();
            for j in 0..sub.system.size() {
                let col = sub.digit_column(j);
                let v = map_set(&col, &u);
                let vi = *index.entry(v.clone()).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len() - 1
                });
                edges.push((head, j, vi));
            }
            head += 1;
        }
        CoincidenceGraph { vertices, edges }
    }

    pub fn vertex_index(&self, set: &[usize]) -> Option<usize> {
        self.vertices.iter().position(|v| v == set)
    }

    /// Cardinalities of all vertices, in vertex order.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v.len()).collect()
    }

    /// Digit labels of edges from `src` to `dst`.
    pub fn labels_between(&self, src: usize, dst: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|(s, _, t)| *s == src && *t == dst)
            .map(|(_, j, _)| *j)
            .collect()
    }

    /// DOT serialization; vertex labels show set contents and cardinality,
    /// edge labels the digit vectors.
    pub fn to_dot(&self, sub: &Substitution, reversed: bool) -> String {
        let mut out = String::from("digraph coincidence {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let names: Vec<&str> = v.iter().map(|&l| sub.alphabet.name(l)).collect();
            out.push_str(&format!(
                "  v{} [label=\"{{{}}} ({})\"];\n",
                i,
                names.join(","),
                v.len()
            ));
        }
        for (s, j, t) in &self.edges {
            let digit = &sub.system.digits[*j];
            let label: Vec<String> = digit.iter().map(|v| v.to_string()).collect();
            let (from, to) = if reversed { (t, s) } else { (s, t) };
            out.push_str(&format!(
                "  v{} -> v{} [label=\"({})\"];\n",
                from,
                to,
                label.join(",")
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Column number, minimal sets, and (optionally) the idempotent realization
/// data.
#[derive(Clone, Debug, Serialize)]
pub struct MinimalSetFamily {
    pub column_number: usize,
    /// Minimal sets in coincidence-graph discovery order.
    pub sets: Vec<Vec<usize>>,
    /// For each minimal set, an address whose column is an idempotent with
    /// that image (present after realization).
    pub idempotent_addresses: Option<Vec<Address>>,
    pub realization_power: Option<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColumnAlgebraError {
    #[error("no realization power found up to the bound {0} (level map sets cycled)")]
    BoundExceeded(usize),
    #[error("incompatible geometry: the mirrored idempotent is not an idempotent with image of cardinality {expected}")]
    IncompatibleGeometry { expected: usize },
}

/// Column number and minimal sets, read off the coincidence graph.
pub fn column_number_and_minimal_sets(graph: &CoincidenceGraph) -> MinimalSetFamily {
    let c = graph.vertices.iter().map(|v| v.len()).min().unwrap();
    let sets: Vec<Vec<usize>> = graph
        .vertices
        .iter()
        .filter(|v| v.len() == c)
        .cloned()
        .collect();
    MinimalSetFamily {
        column_number: c,
        sets,
        idempotent_addresses: None,
        realization_power: None,
    }
}

/// Hard cap on the realization search; the constructive bound from the
/// underlying lemma is astronomically larger than any observed minimum, and
/// the search additionally stops as soon as the per-level set of column maps
/// revisits a previous state.
const REALIZATION_CAP: usize = 512;

/// Find the smallest power `k*` such that every minimal set is the image of an
/// idempotent level-`k*` column, and record one witness address per set.
pub fn idempotent_realization_power(
    sub: &Substitution,
    family: &mut MinimalSetFamily,
) -> Result<(), ColumnAlgebraError> {
    // Level-k column maps, deduplicated by function, with one witness address.
    let mut level: Vec<(Vec<usize>, Address)> = Vec::new();
    let mut seen_function: HashMap<Vec<usize>, usize> = HashMap::new();
    for j in 0..sub.system.size() {
        let col = sub.digit_column(j);
        if !seen_function.contains_key(&col) {
            seen_function.insert(col.clone(), level.len());
            level.push((col, vec![j]));
        }
    }
    let mut seen_states: HashMap<Vec<Vec<usize>>, usize> = HashMap::new();
    for k in 1..=REALIZATION_CAP {
        // Does this level realize all minimal sets?
        let mut witnesses = Vec::with_capacity(family.sets.len());
        for m in &family.sets {
            let found = level
                .iter()
                .find(|(map, _)| {
                    let cm = ColumnMap { map: map.clone(), witness: None };
                    cm.is_idempotent() && &cm.image() == m
                })
                .map(|(_, addr)| addr.clone());
            match found {
                Some(addr) => witnesses.push(addr),
                None => break,
            }
        }
        if witnesses.len() == family.sets.len() {
            family.idempotent_addresses = Some(witnesses);
            family.realization_power = Some(k);
            return Ok(());
        }
        // Cycle detection on the set of functions at this level.
        let mut state: Vec<Vec<usize>> = level.iter().map(|(m, _)| m.clone()).collect();
        state.sort();
        if seen_states.insert(state, k).is_some() {
            return Err(ColumnAlgebraError::BoundExceeded(k));
        }
        // Advance one level: every level-(k+1) column is theta_j o (level-k
        // column), with witness word extended by the less significant digit.
        let mut next: Vec<(Vec<usize>, Address)> = Vec::new();
        let mut next_seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for j in 0..sub.system.size() {
            let col = sub.digit_column(j);
            for (map, addr) in &level {
                let composed: Vec<usize> = map.iter().map(|&b| col[b]).collect();
                if !next_seen.contains_key(&composed) {
                    let mut w = addr.clone();
                    w.push(j);
                    next_seen.insert(composed.clone(), next.len());
                    next.push((composed, w));
                }
            }
        }
        level = next;
    }
    Err(ColumnAlgebraError::BoundExceeded(REALIZATION_CAP))
}

/// Convenience: coincidence graph, minimal sets, and realization in one go.
pub fn analyze_columns(
    sub: &Substitution,
) -> Result<(CoincidenceGraph, MinimalSetFamily), ColumnAlgebraError> {
    let graph = CoincidenceGraph::build(sub);
    let mut family = column_number_and_minimal_sets(&graph);
    idempotent_realization_power(sub, &mut family)?;
    Ok((graph, family))
}

/// The letter encodings nu and nu-bar used by the symmetry criteria.
#[derive(Clone, Debug, Serialize)]
pub struct Encoding {
    pub reference_set: Vec<usize>,
    pub nu: Vec<usize>,
    pub nu_bar: Vec<usize>,
}

/// Build the encodings for a candidate `(tau, geom)`: `nu = nu0 o iota` for the
/// stored idempotent `iota` with image M0, and `nu_bar = (nu | tau[M0]) o
/// iota_bar` where `iota_bar` is the column at the mirrored address.
pub fn build_encodings(
    sub: &Substitution,
    family: &MinimalSetFamily,
    tau: &[usize],
    geom: &GeomCandidate,
) -> Result<Encoding, ColumnAlgebraError> {
    let addresses = family
        .idempotent_addresses
        .as_ref()
        .expect("realization must run before building encodings");
    let m0 = &family.sets[0];
    let iota = sub.column(&addresses[0]);
    let mirrored_addr = geom.odot_inverse_address(&sub.system, &addresses[0]);
    let iota_bar = ColumnMap { map: sub.column(&mirrored_addr), witness: Some(mirrored_addr) };
    let mut tau_m0: Vec<usize> = m0.iter().map(|&a| tau[a]).collect();
    tau_m0.sort_unstable();
    if !iota_bar.is_idempotent() || iota_bar.image() != tau_m0 {
        return Err(ColumnAlgebraError::IncompatibleGeometry {
            expected: family.column_number,
        });
    }
    // nu0: index order of M0 (sorted by letter index).
    let nu0: HashMap<usize, usize> =
        m0.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let nu: Vec<usize> = iota.iter().map(|b| nu0[b]).collect();
    let nu_bar: Vec<usize> = iota_bar.map.iter().map(|&b| nu[b]).collect();
    Ok(Encoding { reference_set: m0.clone(), nu, nu_bar })
}

/// The permutation `beta^{-1}_{M, addr} = nu o theta_addr o (nu | M)^{-1}` of
/// `[c]` (or the barred variant). `None` if the data does not define a
/// permutation (cannot happen on minimal sets of a valid encoding).
pub fn beta(
    enc: &Encoding,
    sub: &Substitution,
    minimal_set: &[usize],
    addr: &Address,
    barred: bool,
) -> Option<Vec<usize>> {
    let code = if barred { &enc.nu_bar } else { &enc.nu };
    let col = sub.column(addr);
    let c = minimal_set.len();
    let mut perm = vec![usize::MAX; c];
    for &a in minimal_set {
        let from = code[a];
        let to = code[col[a]];
        if from >= c || to >= c || (perm[from] != usize::MAX && perm[from] != to) {
            return None;
        }
        perm[from] = to;
    }
    let mut check: Vec<usize> = perm.clone();
    check.sort_unstable();
    if check != (0..c).collect::<Vec<_>>() {
        return None;
    }
    Some(perm)
}

/// Compose permutations: `(g o f)(x) = g(f(x))`.
pub fn compose_perm(g: &[usize], f: &[usize]) -> Vec<usize> {
    f.iter().map(|&x| g[x]).collect()
}

/// Inverse of a permutation.
pub fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}
