//! Derived substitutions on boundary alphabets, their coincidence graphs,
//! pruned reversed graphs, exact fibre cardinalities over the odometer for
//! eventually periodic points, periodic-point seeds, and the sofic-shift
//! export of the irregular locus.

use std::collections::{HashMap, HashSet, VecDeque};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::column_algebra::{self, CoincidenceGraph, ColumnAlgebraError};
use crate::height::{self, HeightError};
use crate::linalg::{IVec, Lattice};
use crate::subst::{Alphabet, Pattern, SubstError, Substitution};

#[derive(Debug, Error)]
pub enum FibreError {
    #[error("fibre analysis requires a block substitution")]
    NotBlock,
    #[error("fibre analysis requires a trivial height lattice; found {0}")]
    HeightNonTrivial(Lattice),
    #[error("every coordinate is an integer; use the periodic-point seed count instead")]
    IntegerPoint,
    #[error("digit {digit} out of range for axis {axis} (side length {length})")]
    DigitOutOfRange { axis: usize, digit: i64, length: i64 },
    #[error("empty period for non-integer coordinate on axis {0}")]
    EmptyPeriod(usize),
    #[error(
        "coordinate on axis {0} is eventually constant {1}, hence an integer; declare it as one"
    )]
    EventuallyInteger(usize, i64),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Columns(#[from] ColumnAlgebraError),
    #[error(transparent)]
    Height(#[from] HeightError),
}

/// One coordinate of a point of the odometer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CoordSpec {
    Integer(i64),
    /// Digit expansion, least significant digit first; the period repeats
    /// forever after the preperiod.
    NonInteger { preperiod: Vec<i64>, period: Vec<i64> },
}

/// A point of the odometer with eventually periodic digit expansions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QadicPoint {
    pub coords: Vec<CoordSpec>,
}

impl QadicPoint {
    pub fn validate(&self, lengths: &[i64]) -> Result<(), FibreError> {
        for (axis, coord) in self.coords.iter().enumerate() {
            if let CoordSpec::NonInteger { preperiod, period } = coord {
                if period.is_empty() {
                    return Err(FibreError::EmptyPeriod(axis));
                }
                for &digit in preperiod.iter().chain(period) {
                    if digit < 0 || digit >= lengths[axis] {
                        return Err(FibreError::DigitOutOfRange {
                            axis,
                            digit,
                            length: lengths[axis],
                        });
                    }
                }
                for v in [0, lengths[axis] - 1] {
                    if period.iter().all(|&p| p == v) {
                        return Err(FibreError::EventuallyInteger(axis, v));
                    }
                }
            }
        }
        Ok(())
    }

    /// Axes whose coordinate is an integer.
    pub fn integer_axes(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(i, c)| matches!(c, CoordSpec::Integer(_)).then_some(i))
            .collect()
    }
}

/// The support `B_J`: `{-1, 0}` on the axes of `J`, `{0}` elsewhere, in
/// lexicographic order.
pub fn boundary_support(dim: usize, axes: &[usize]) -> Vec<IVec> {
    let mut cells = vec![Vec::new()];
    for j in 0..dim {
        let choices: &[i64] = if axes.contains(&j) { &[-1, 0] } else { &[0] };
        let mut next = Vec::new();
        for prefix in &cells {
            for &v in choices {
                let mut c = prefix.clone();
                c.push(v);
                next.push(c);
            }
        }
        cells = next;
    }
    cells
}

/// The boundary alphabet: all legal patterns with support `B_J`, sorted by
/// their letter word.
pub fn boundary_alphabet(sub: &Substitution, axes: &[usize]) -> Result<Vec<Pattern>, FibreError> {
    let support = boundary_support(sub.dim(), axes);
    let mut patterns = sub.legal_patterns(&support)?.patterns;
    patterns.sort_by_key(|p| p.letter_word());
    Ok(patterns)
}

/// A derived substitution: a block substitution in the non-derived axes over
/// the boundary alphabet, with each letter carrying its base-pattern meaning.
#[derive(Clone, Debug)]
pub struct DerivedSubstitution {
    /// Derived axes (sorted ascending).
    pub axes: Vec<usize>,
    /// Axes that remain, in ascending order; these index the coordinates of
    /// `sub`.
    pub remaining_axes: Vec<usize>,
    /// The derived substitution itself, over letters named by their base
    /// words.
    pub sub: Substitution,
    /// Base-alphabet meaning of each derived letter (support `B_J`).
    pub letter_patterns: Vec<Pattern>,
}

fn canonical_index(coords: &[i64], lengths: &[i64]) -> usize {
    let mut idx = 0usize;
    for (c, l) in coords.iter().zip(lengths) {
        idx = idx * (*l as usize) + *c as usize;
    }
    idx
}

fn canonical_cells(lengths: &[i64]) -> Vec<IVec> {
    let mut cells = vec![Vec::new()];
    for &l in lengths {
        let mut next = Vec::new();
        for prefix in &cells {
            for v in 0..l {
                let mut c = prefix.clone();
                c.push(v);
                next.push(c);
            }
        }
        cells = next;
    }
    cells
}

fn pattern_key(p: &Pattern) -> Vec<(IVec, usize)> {
    p.cells().to_vec()
}

fn letter_name(p: &Pattern, base: &Alphabet) -> String {
    let single = (0..base.len()).all(|i| base.name(i).chars().count() == 1);
    let sep = if single { "" } else { "|" };
    p.cells().iter().map(|(_, l)| base.name(*l)).join(sep)
}

impl DerivedSubstitution {
    /// Build the derived substitution for a set of axes by iterated
    /// single-axis derivation, highest axis first.
    pub fn new(base: &Substitution, axes: &[usize]) -> Result<Self, FibreError> {
        let lengths = base.system.block_lengths.clone().ok_or(FibreError::NotBlock)?;
        let d = base.dim();
        let mut axes: Vec<usize> = axes.to_vec();
        axes.sort_unstable();
        axes.dedup();

        let mut cur_axes: Vec<usize> = (0..d).collect();
        let mut letters: Vec<Pattern> =
            (0..base.letters()).map(|l| Pattern::single(d, l)).collect();
        let mut rules = base.rules.clone();
        for &k in axes.iter().rev() {
            let derived_so_far: Vec<usize> = axes.iter().copied().filter(|&a| a > k).collect();
            let mut with_k = derived_so_far.clone();
            with_k.push(k);
            with_k.sort_unstable();
            let new_letters = boundary_alphabet(base, &with_k)?;
            let new_index: HashMap<Vec<(IVec, usize)>, usize> = new_letters
                .iter()
                .enumerate()
                .map(|(i, p)| (pattern_key(p), i))
                .collect();
            let cur_index: HashMap<Vec<(IVec, usize)>, usize> = letters
                .iter()
                .enumerate()
                .map(|(i, p)| (pattern_key(p), i))
                .collect();
            let pos = cur_axes.iter().position(|&a| a == k).unwrap();
            let cur_lengths: Vec<i64> = cur_axes.iter().map(|&a| lengths[a]).collect();
            let mut minus_e_k = vec![0i64; d];
            minus_e_k[k] = -1;

            let next_axes: Vec<usize> =
                cur_axes.iter().copied().filter(|&a| a != k).collect();
            let next_lengths: Vec<i64> = next_axes.iter().map(|&a| lengths[a]).collect();
            let next_cells = canonical_cells(&next_lengths);

            let mut new_rules: Vec<Vec<usize>> = Vec::with_capacity(new_letters.len());
            for p in &new_letters {
                // Split into the letter at -1 and the letter at 0 along axis k.
                let minus_part: Vec<(IVec, usize)> = p
                    .cells()
                    .iter()
                    .filter(|(c, _)| c[k] == -1)
                    .map(|(c, l)| {
                        let mut c = c.clone();
                        c[k] += 1;
                        (c, *l)
                    })
                    .collect();
                let zero_part: Vec<(IVec, usize)> = p
                    .cells()
                    .iter()
                    .filter(|(c, _)| c[k] == 0)
                    .cloned()
                    .collect();
                let cp = cur_index[&pattern_key(&Pattern::from_cells(minus_part))];
                let cq = cur_index[&pattern_key(&Pattern::from_cells(zero_part))];
                let mut image = Vec::with_capacity(next_cells.len());
                for cell in &next_cells {
                    let mut hi = cell.clone();
                    hi.insert(pos, lengths[k] - 1);
                    let mut lo = cell.clone();
                    lo.insert(pos, 0);
                    let ca = rules[cp][canonical_index(&hi, &cur_lengths)];
                    let cb = rules[cq][canonical_index(&lo, &cur_lengths)];
                    let mut cells: Vec<(IVec, usize)> =
                        letters[ca].translate(&minus_e_k).cells().to_vec();
                    cells.extend(letters[cb].cells().iter().cloned());
                    let combined = Pattern::from_cells(cells);
                    image.push(
                        *new_index
                            .get(&pattern_key(&combined))
                            .expect("image of a legal pattern is legal"),
                    );
                }
                new_rules.push(image);
            }
            cur_axes = next_axes;
            letters = new_letters;
            rules = new_rules;
        }

        let remaining_axes = cur_axes;
        let rem_lengths: Vec<i64> = remaining_axes.iter().map(|&a| lengths[a]).collect();
        let names: Vec<String> =
            letters.iter().map(|p| letter_name(p, &base.alphabet)).collect();
        let alphabet = Alphabet::new(names)?;
        let sub = Substitution::new(
            alphabet,
            crate::digits::DigitSystem::block(&rem_lengths),
            rules,
        )?;
        debug_assert_eq!(
            letters,
            boundary_alphabet(base, &axes)?,
            "iterated derivation must land on the boundary alphabet"
        );
        Ok(DerivedSubstitution { axes, remaining_axes, sub, letter_patterns: letters })
    }
}

/// The reversed coincidence graph of a derived substitution with every vertex
/// of cardinality at most the base column number removed.
#[derive(Clone, Debug, Serialize)]
pub struct PrunedGraph {
    pub axes: Vec<usize>,
    pub threshold: usize,
    /// Kept vertices, as sorted derived-letter index sets.
    pub vertices: Vec<Vec<usize>>,
    /// Reversed edges `(src, dst, digit)` between kept vertices; `digit`
    /// indexes the derived digit system.
    pub edges: Vec<(usize, usize, usize)>,
    /// Display names of the kept vertices.
    pub vertex_names: Vec<String>,
    /// Digits of the derived system, indexed by edge label.
    pub digit_vectors: Vec<IVec>,
    /// Block lengths of the derived system (the non-derived axes).
    pub free_lengths: Vec<i64>,
}

impl PrunedGraph {
    /// DOT rendering; edges are labelled by their derived-digit index.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pruned {\n");
        for (i, name) in self.vertex_names.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{name}\"];\n"));
        }
        for &(u, v, label) in &self.edges {
            out.push_str(&format!("  v{u} -> v{v} [label=\"{label}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

fn set_name(set: &[usize], alphabet: &Alphabet) -> String {
    format!("{{{}}}", set.iter().map(|&l| alphabet.name(l)).join(","))
}

/// Base column number of a substitution (minimum coincidence-graph vertex
/// cardinality).
fn base_column_number(sub: &Substitution) -> usize {
    let graph = CoincidenceGraph::build(sub);
    column_algebra::column_number_and_minimal_sets(&graph).column_number
}

pub fn pruned_reversed_graph(
    sub: &Substitution,
    axes: &[usize],
) -> Result<PrunedGraph, FibreError> {
    let threshold = base_column_number(sub);
    let derived = DerivedSubstitution::new(sub, axes)?;
    let graph = CoincidenceGraph::build(&derived.sub);
    let keep: Vec<Option<usize>> = {
        let mut next = 0usize;
        graph
            .vertices
            .iter()
            .map(|v| {
                (v.len() > threshold).then(|| {
                    let i = next;
                    next += 1;
                    i
                })
            })
            .collect()
    };
    let vertices: Vec<Vec<usize>> = graph
        .vertices
        .iter()
        .filter(|v| v.len() > threshold)
        .cloned()
        .collect();
    let vertex_names =
        vertices.iter().map(|v| set_name(v, &derived.sub.alphabet)).collect();
    let edges = graph
        .edges
        .iter()
        .filter_map(|&(u, label, v)| match (keep[u], keep[v]) {
            (Some(u2), Some(v2)) => Some((v2, u2, label)),
            _ => None,
        })
        .collect();
    let digit_vectors = derived.sub.system.digits.clone();
    let free_lengths = derived
        .sub
        .system
        .block_lengths
        .clone()
        .expect("derived substitution is a block substitution");
    Ok(PrunedGraph {
        axes: derived.axes,
        threshold,
        vertices,
        edges,
        vertex_names,
        digit_vectors,
        free_lengths,
    })
}

/// Strongly connected components (Kosaraju); returns a component id per node.
fn scc_ids(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            radj[v].push(u);
        }
    }
    // First pass: finish order via iterative DFS.
    let mut order = Vec::with_capacity(n);
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < adj[u].len() {
                let v = adj[u][*i];
                *i += 1;
                if state[v] == 0 {
                    state[v] = 1;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    // Second pass on the reversed graph in reverse finish order.
    let mut comp = vec![usize::MAX; n];
    let mut c = 0usize;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        comp[start] = c;
        while let Some(u) = queue.pop_front() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    queue.push_back(v);
                }
            }
        }
        c += 1;
    }
    comp
}

/// Nodes lying on some cycle: nontrivial strongly connected component or a
/// self-loop.
fn cycle_nodes(n: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let comp = scc_ids(n, adj);
    let mut size = HashMap::new();
    for &c in &comp {
        *size.entry(c).or_insert(0usize) += 1;
    }
    (0..n)
        .map(|u| size[&comp[u]] > 1 || adj[u].contains(&u))
        .collect()
}

/// Exact fibre size report for one point of the odometer.
#[derive(Clone, Debug, Serialize)]
pub struct FibreReport {
    /// Axes on which the point is an integer (the derived axes).
    pub integer_axes: Vec<usize>,
    pub column_number: usize,
    pub cardinality: usize,
    pub irregular: bool,
    /// Vertex sets of a product cycle realizing the maximum (empty when the
    /// fibre is regular).
    pub witness: Vec<String>,
}

fn require_trivial_height(sub: &Substitution) -> Result<(), FibreError> {
    let gamma = height::height_lattice(sub)?;
    if gamma != Lattice::standard(sub.dim()) {
        return Err(FibreError::HeightNonTrivial(gamma));
    }
    Ok(())
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// Exact cardinality of the fibre over an eventually periodic point, via
/// infinite-path search in the reversed derived coincidence graph driven by
/// the digit stream.
pub fn fibre_cardinality(sub: &Substitution, z: &QadicPoint) -> Result<FibreReport, FibreError> {
    let lengths = sub.system.block_lengths.clone().ok_or(FibreError::NotBlock)?;
    assert_eq!(z.coords.len(), sub.dim(), "point dimension mismatch");
    z.validate(&lengths)?;
    require_trivial_height(sub)?;
    let integer_axes = z.integer_axes();
    if integer_axes.len() == sub.dim() {
        return Err(FibreError::IntegerPoint);
    }
    let c = base_column_number(sub);
    let derived = DerivedSubstitution::new(sub, &integer_axes)?;
    let graph = CoincidenceGraph::build(&derived.sub);
    let nv = graph.vertices.len();
    let nd = derived.sub.system.size();
    // Reversed adjacency per digit label.
    let mut rev: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); nv]; nd];
    for &(u, label, v) in &graph.edges {
        rev[label][v].push(u);
    }

    // Combined digit stream over the non-integer coordinates.
    let streams: Vec<(&Vec<i64>, &Vec<i64>)> = derived
        .remaining_axes
        .iter()
        .map(|&a| match &z.coords[a] {
            CoordSpec::NonInteger { preperiod, period } => (preperiod, period),
            CoordSpec::Integer(_) => unreachable!("integer axes were derived away"),
        })
        .collect();
    let pre_len = streams.iter().map(|(p, _)| p.len()).max().unwrap();
    let per_len = streams.iter().map(|(_, p)| p.len()).fold(1, lcm);
    let rem_lengths: Vec<i64> =
        derived.remaining_axes.iter().map(|&a| lengths[a]).collect();
    let label_at = |i: usize| -> usize {
        let coords: Vec<i64> = streams
            .iter()
            .map(|(pre, per)| {
                if i < pre.len() {
                    pre[i]
                } else {
                    per[(i - pre.len()) % per.len()]
                }
            })
            .collect();
        canonical_index(&coords, &rem_lengths)
    };

    // Preperiod propagation from the full vertex set.
    let mut current: HashSet<usize> = (0..nv).collect();
    for i in 0..pre_len {
        let label = label_at(i);
        current = current.iter().flat_map(|&v| rev[label][v].iter().copied()).collect();
    }
    // Product graph over (vertex, phase in the period).
    let n = nv * per_len;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..per_len {
        let label = label_at(pre_len + p);
        let q = (p + 1) % per_len;
        for v in 0..nv {
            for &u in &rev[label][v] {
                adj[v * per_len + p].push(u * per_len + q);
            }
        }
    }
    // Restrict to states reachable from the propagated set at phase 0.
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = current.iter().map(|&v| v * per_len).collect();
    for &s in &queue {
        reach[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &t in &adj[s] {
            if !reach[t] {
                reach[t] = true;
                queue.push_back(t);
            }
        }
    }
    let restricted: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            if reach[s] {
                adj[s].iter().copied().filter(|&t| reach[t]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let on_cycle = cycle_nodes(n, &restricted);
    let mut best = 0usize;
    let mut witness_state = None;
    for s in 0..n {
        if reach[s] && on_cycle[s] {
            let card = graph.vertices[s / per_len].len();
            if card > best {
                best = card;
                witness_state = Some(s);
            }
        }
    }
    let cardinality = best.max(c);
    let witness = if best > c {
        // Walk the cycle through the witness state, collecting vertex sets.
        let comp = scc_ids(n, &restricted);
        let target = comp[witness_state.unwrap()];
        (0..n)
            .filter(|&s| reach[s] && comp[s] == target)
            .map(|s| set_name(&graph.vertices[s / per_len], &derived.sub.alphabet))
            .unique()
            .collect()
    } else {
        Vec::new()
    };
    Ok(FibreReport {
        integer_axes,
        column_number: c,
        cardinality,
        irregular: cardinality > c,
        witness,
    })
}

/// Periodic-point seeds: legal patterns on `{-1, 0}^d` lying on cycles of the
/// corner-column map.
pub fn fixed_point_seeds(sub: &Substitution) -> Result<Vec<Pattern>, FibreError> {
    let lengths = sub.system.block_lengths.clone().ok_or(FibreError::NotBlock)?;
    let d = sub.dim();
    let support = boundary_support(d, &(0..d).collect::<Vec<_>>());
    let patterns = sub.legal_patterns(&support)?.patterns;
    let index: HashMap<Vec<(IVec, usize)>, usize> = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (pattern_key(p), i))
        .collect();
    // Corner columns, one per cell of the support.
    let corner_cols: Vec<(IVec, Vec<usize>)> = support
        .iter()
        .map(|eps| {
            let corner: IVec = eps
                .iter()
                .zip(&lengths)
                .map(|(&e, &l)| if e == -1 { l - 1 } else { 0 })
                .collect();
            let digit = sub
                .system
                .digits
                .iter()
                .position(|dd| *dd == corner)
                .expect("corner digit exists in a block system");
            (eps.clone(), sub.digit_column(digit))
        })
        .collect();
    let next: Vec<usize> = patterns
        .iter()
        .map(|p| {
            let cells: Vec<(IVec, usize)> = corner_cols
                .iter()
                .map(|(eps, col)| {
                    let letter = p.get(eps).expect("full boundary support");
                    (eps.clone(), col[letter])
                })
                .collect();
            *index
                .get(&pattern_key(&Pattern::from_cells(cells)))
                .expect("corner-column image of a legal seed is legal")
        })
        .collect();
    // Nodes on cycles of the functional graph.
    let adj: Vec<Vec<usize>> = next.iter().map(|&t| vec![t]).collect();
    let on_cycle = cycle_nodes(patterns.len(), &adj);
    Ok(patterns
        .into_iter()
        .zip(on_cycle)
        .filter_map(|(p, keep)| keep.then_some(p))
        .collect())
}

/// Maximal fibre cardinality for one class of points (fixed set of integer
/// axes).
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub integer_axes: Vec<usize>,
    pub max_cardinality: usize,
    pub irregular: bool,
}

/// The fibre spectrum: per integer-axis class the maximal cardinality, plus
/// the periodic-point count for fully integer points.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub column_number: usize,
    pub entries: Vec<SpectrumEntry>,
    /// Number of periodic-point seeds (the fully-integer class; the exact
    /// per-point fibre formula is not part of this analysis).
    pub periodic_point_count: usize,
}

/// Largest vertex cardinality over cycles of a pruned reversed graph that can
/// carry a point which is a non-integer q-adic on every non-derived axis.
///
/// A cycle whose labels are all zero (or all `l - 1`) on some free axis only
/// describes digit tails of integer coordinates, which belong to a different
/// class of points; such cycles are skipped.  Within a strongly connected
/// component cycles may be mixed freely, so the component qualifies as soon as
/// its internal labels, per free axis, contain a digit other than `0` and a
/// digit other than `l - 1`.
pub fn max_irregular_cardinality(graph: &PrunedGraph) -> Option<usize> {
    let n = graph.vertices.len();
    let adj: Vec<Vec<usize>> = {
        let mut a = vec![Vec::new(); n];
        for &(u, v, _) in &graph.edges {
            a[u].push(v);
        }
        a
    };
    let comp = scc_ids(n, &adj);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let dfree = graph.free_lengths.len();
    let mut nonzero = vec![vec![false; dfree]; ncomp];
    let mut nonmax = vec![vec![false; dfree]; ncomp];
    let mut has_edge = vec![false; ncomp];
    for &(u, v, label) in &graph.edges {
        if comp[u] != comp[v] {
            continue;
        }
        has_edge[comp[u]] = true;
        let digit = &graph.digit_vectors[label];
        for a in 0..dfree {
            if digit[a] != 0 {
                nonzero[comp[u]][a] = true;
            }
            if digit[a] != graph.free_lengths[a] - 1 {
                nonmax[comp[u]][a] = true;
            }
        }
    }
    (0..n)
        .filter(|&u| {
            has_edge[comp[u]] && (0..dfree).all(|a| nonzero[comp[u]][a] && nonmax[comp[u]][a])
        })
        .map(|u| graph.vertices[u].len())
        .max()
}

pub fn fibre_spectrum(sub: &Substitution) -> Result<Spectrum, FibreError> {
    require_trivial_height(sub)?;
    let d = sub.dim();
    let c = base_column_number(sub);
    let mut entries = Vec::new();
    for r in 0..d {
        for axes in (0..d).combinations(r) {
            let pruned = pruned_reversed_graph(sub, &axes)?;
            let best = max_irregular_cardinality(&pruned).unwrap_or(c);
            entries.push(SpectrumEntry {
                integer_axes: axes,
                max_cardinality: best.max(c),
                irregular: best > c,
            });
        }
    }
    let periodic_point_count = fixed_point_seeds(sub)?.len();
    Ok(Spectrum { column_number: c, entries, periodic_point_count })
}

/// Labelled-graph presentation of the sofic shift carrying the irregular
/// fibres: one pruned reversed graph per proper axis subset.
#[derive(Clone, Debug, Serialize)]
pub struct SoficExport {
    pub dot: String,
    pub edge_list: String,
}

pub fn sofic_export(sub: &Substitution) -> Result<SoficExport, FibreError> {
    require_trivial_height(sub)?;
    let d = sub.dim();
    let mut dot = String::from("digraph sofic {\n");
    let mut edge_list = String::new();
    let mut cluster = 0usize;
    for r in 0..d {
        for axes in (0..d).combinations(r) {
            let pruned = pruned_reversed_graph(sub, &axes)?;
            let derived = DerivedSubstitution::new(sub, &axes)?;
            let digit_tuple = |label: usize| -> String {
                let coords = &derived.sub.system.digits[label];
                format!("({})", coords.iter().join(","))
            };
            let j_name = format!(
                "J={{{}}}",
                axes.iter().map(|a| (a + 1).to_string()).join(",")
            );
            dot.push_str(&format!(
                "  subgraph cluster_{cluster} {{\n    label=\"{j_name}\";\n"
            ));
            for (i, name) in pruned.vertex_names.iter().enumerate() {
                dot.push_str(&format!(
                    "    n{cluster}_{i} [label=\"{name}\"];\n"
                ));
            }
            for &(u, v, label) in &pruned.edges {
                dot.push_str(&format!(
                    "    n{cluster}_{u} -> n{cluster}_{v} [label=\"{}\"];\n",
                    digit_tuple(label)
                ));
                edge_list.push_str(&format!(
                    "{} -> {} [label={}]\n",
                    pruned.vertex_names[u],
                    pruned.vertex_names[v],
                    digit_tuple(label)
                ));
            }
            dot.push_str("  }\n");
            cluster += 1;
        }
    }
    dot.push_str("}\n");
    Ok(SoficExport { dot, edge_list })
}
