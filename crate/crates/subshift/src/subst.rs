//! Digit substitutions over Z^d: the central `Substitution` type plus
//! supertile generation, column maps, powers, primitivity, and the legality
//! closure.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::digits::{Address, DigitSystem};
use crate::linalg::IVec;

/// Ordered finite alphabet with stable letter indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alphabet {
    letters: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new(letters: Vec<String>) -> Result<Self, SubstError> {
        if letters.is_empty() {
            return Err(SubstError::EmptyAlphabet);
        }
        let mut index = HashMap::new();
        for (i, l) in letters.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(SubstError::DuplicateLetter(l.clone()));
            }
        }
        Ok(Alphabet { letters, index })
    }

    pub fn from_strs(letters: &[&str]) -> Self {
        Alphabet::new(letters.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.letters[i]
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// A finite pattern: letters placed on a finite support in Z^d. Cells are kept
/// sorted by position, so equal patterns compare equal structurally.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pattern {
    cells: Vec<(IVec, usize)>,
}

impl Pattern {
    pub fn from_cells(mut cells: Vec<(IVec, usize)>) -> Self {
        cells.sort();
        for pair in cells.windows(2) {
            assert_ne!(pair[0].0, pair[1].0, "duplicate cell position");
        }
        Pattern { cells }
    }

    pub fn single(dim: usize, letter: usize) -> Self {
        Pattern { cells: vec![(vec![0; dim], letter)] }
    }

    pub fn cells(&self) -> &[(IVec, usize)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn support(&self) -> Vec<IVec> {
        self.cells.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn get(&self, pos: &[i64]) -> Option<usize> {
        self.cells
            .binary_search_by(|(p, _)| p.as_slice().cmp(pos))
            .ok()
            .map(|i| self.cells[i].1)
    }

    pub fn translate(&self, offset: &[i64]) -> Pattern {
        Pattern {
            cells: self
                .cells
                .iter()
                .map(|(p, l)| (p.iter().zip(offset).map(|(a, b)| a + b).collect(), *l))
                .collect(),
        }
    }

    /// Restriction to the given support; `None` if some position is missing.
    pub fn restrict(&self, support: &[IVec]) -> Option<Pattern> {
        let mut cells = Vec::with_capacity(support.len());
        for pos in support {
            cells.push((pos.clone(), self.get(pos)?));
        }
        Some(Pattern::from_cells(cells))
    }

    /// The letters in sorted-support order; a compact canonical key.
    pub fn letter_word(&self) -> Vec<usize> {
        self.cells.iter().map(|(_, l)| *l).collect()
    }
}

impl std::fmt::Debug for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Pattern{{")?;
        for (i, (p, l)) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:?}:{l}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error)]
pub enum SubstError {
    #[error("alphabet must not be empty")]
    EmptyAlphabet,
    #[error("duplicate letter {0:?}")]
    DuplicateLetter(String),
    #[error("rule for letter {letter:?} has {got} cells, expected {expected}")]
    RuleShape { letter: String, got: usize, expected: usize },
    #[error("legality closure requires a block digit system for multi-cell supports")]
    UnsupportedSupport,
}

/// A digit substitution `theta: A -> A^D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub alphabet: Alphabet,
    pub system: DigitSystem,
    /// `rules[letter][digit_index]` = image letter at that digit.
    pub rules: Vec<Vec<usize>>,
}

/// Result of the legality closure.
#[derive(Clone, Debug)]
pub struct LegalPatterns {
    pub patterns: Vec<Pattern>,
    /// True when some legal pattern admits no one-step extension inside the
    /// computed language (signals a gap-type digit set; downstream behaviour
    /// on such inputs is undefined).
    pub nonextensible_warning: bool,
}

impl Substitution {
    pub fn new(
        alphabet: Alphabet,
        system: DigitSystem,
        rules: Vec<Vec<usize>>,
    ) -> Result<Self, SubstError> {
        assert_eq!(rules.len(), alphabet.len());
        for (i, rule) in rules.iter().enumerate() {
            if rule.len() != system.size() {
                return Err(SubstError::RuleShape {
                    letter: alphabet.name(i).to_string(),
                    got: rule.len(),
                    expected: system.size(),
                });
            }
            assert!(rule.iter().all(|&l| l < alphabet.len()));
        }
        Ok(Substitution { alphabet, system, rules })
    }

    pub fn dim(&self) -> usize {
        self.system.dim
    }

    pub fn letters(&self) -> usize {
        self.alphabet.len()
    }

    /// The one-digit column map at digit index `digit`.
    pub fn digit_column(&self, digit: usize) -> Vec<usize> {
        (0..self.letters()).map(|a| self.rules[a][digit]).collect()
    }

    /// The composite column map at an address word `[n_{k-1}, ..., n_0]`:
    /// `theta_{n_0} o ... o theta_{n_{k-1}}` (most significant digit applied
    /// first).
    pub fn column(&self, addr: &Address) -> Vec<usize> {
        assert!(!addr.is_empty(), "column address must be non-empty");
        (0..self.letters())
            .map(|mut x| {
                for &digit in addr {
                    x = self.rules[x][digit];
                }
                x
            })
            .collect()
    }

    /// The level-`k` supertile of a letter, supported on `D^(k)`.
    pub fn supertile(&self, a: usize, k: usize) -> Pattern {
        let mut tiles: Vec<Pattern> = (0..self.letters())
            .map(|l| Pattern::single(self.dim(), l))
            .collect();
        for level in 0..k {
            let scale = self.system.q.pow(level as u32);
            tiles = (0..self.letters())
                .map(|l| {
                    let mut cells = Vec::new();
                    for (i, digit) in self.system.digits.iter().enumerate() {
                        let offset = scale.mul_vec(digit);
                        let sub = tiles[self.rules[l][i]].translate(&offset);
                        cells.extend(sub.cells.iter().cloned());
                    }
                    Pattern::from_cells(cells)
                })
                .collect();
        }
        tiles[a].clone()
    }

    /// One inflation step applied to an arbitrary pattern: the cell at
    /// `Q p + d` is `theta_d(P(p))`.
    pub fn substitute_pattern(&self, p: &Pattern) -> Pattern {
        let mut cells = Vec::with_capacity(p.len() * self.system.size());
        for (pos, letter) in p.cells() {
            let scaled = self.system.q.mul_vec(pos);
            for (i, digit) in self.system.digits.iter().enumerate() {
                let mut q = scaled.clone();
                for (r, v) in digit.iter().enumerate() {
                    q[r] += v;
                }
                cells.push((q, self.rules[*letter][i]));
            }
        }
        Pattern::from_cells(cells)
    }

    /// The substitution `theta^k` on the digit system `(Q^k, D^(k))`.
    pub fn power(&self, k: usize) -> Substitution {
        assert!(k >= 1);
        let system = match &self.system.block_lengths {
            Some(lengths) => {
                let powered: Vec<i64> =
                    lengths.iter().map(|l| l.pow(k as u32)).collect();
                DigitSystem::block(&powered)
            }
            None => DigitSystem::explicit(
                self.system.q.pow(k as u32),
                self.system.support(k).into_iter().map(|(_, p)| p).collect(),
            ),
        };
        let rules = (0..self.letters())
            .map(|a| {
                let tile = self.supertile(a, k);
                system
                    .digits
                    .iter()
                    .map(|d| tile.get(d).expect("supertile covers level-k digits"))
                    .collect()
            })
            .collect();
        Substitution::new(self.alphabet.clone(), system, rules)
            .expect("power preserves rule shape")
    }

    /// Primitivity check: some power `k <= |A|^2` of the incidence matrix is
    /// strictly positive. Returns the smallest such exponent.
    pub fn is_primitive(&self) -> Option<usize> {
        let n = self.letters();
        let mut reach = vec![vec![false; n]; n];
        for a in 0..n {
            for &b in &self.rules[a] {
                reach[a][b] = true;
            }
        }
        let step = reach.clone();
        for k in 1..=n * n {
            if reach.iter().all(|row| row.iter().all(|&v| v)) {
                return Some(k);
            }
            let mut next = vec![vec![false; n]; n];
            for a in 0..n {
                for b in 0..n {
                    if reach[a][b] {
                        for c in 0..n {
                            if step[b][c] {
                                next[a][c] = true;
                            }
                        }
                    }
                }
            }
            reach = next;
        }
        None
    }

    /// All theta-legal patterns with the given support, computed by fixpoint
    /// closure over bounding-box windows (seed: windows of small supertiles;
    /// step: substitute and harvest).
    ///
    /// Multi-cell supports require a block digit system.
    pub fn legal_patterns(&self, support: &[IVec]) -> Result<LegalPatterns, SubstError> {
        assert!(!support.is_empty());
        let d = self.dim();
        let singleton = support.len() == 1;
        if !singleton && self.system.block_lengths.is_none() {
            return Err(SubstError::UnsupportedSupport);
        }
        // Bounding box of the support.
        let mut lo = support[0].clone();
        let mut hi = support[0].clone();
        for p in support {
            for j in 0..d {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        let box_patterns = self.legal_box_patterns(&lo, &hi);
        // Restrict the box language to the requested support.
        let mut seen = HashSet::new();
        let mut patterns = Vec::new();
        for w in &box_patterns {
            let r = w.restrict(support).expect("support within bounding box");
            if seen.insert(r.clone()) {
                patterns.push(r);
            }
        }
        patterns.sort();
        // Extensibility probe: every legal box pattern should appear inside a
        // legal pattern on the box grown by one cell along the first axis.
        let nonextensible_warning = if d == 0 {
            false
        } else {
            let mut hi_ext = hi.clone();
            hi_ext[0] += 1;
            let grown = self.legal_box_patterns(&lo, &hi_ext);
            let window: Vec<IVec> = box_support(&lo, &hi);
            let mut restrictions = HashSet::new();
            for g in &grown {
                for shift in 0..2i64 {
                    let offs: Vec<i64> =
                        (0..d).map(|j| if j == 0 { shift } else { 0 }).collect();
                    let shifted: Vec<IVec> =
                        window.iter().map(|p| crate::linalg::vec_add(p, &offs)).collect();
                    if let Some(r) = g.restrict(&shifted) {
                        restrictions.insert(r.translate(
                            &offs.iter().map(|v| -v).collect::<Vec<_>>(),
                        ));
                    }
                }
            }
            box_patterns.iter().any(|w| !restrictions.contains(w))
        };
        Ok(LegalPatterns { patterns, nonextensible_warning })
    }

    /// Legality closure over a full box window `[lo, hi]`.
    fn legal_box_patterns(&self, lo: &[i64], hi: &[i64]) -> Vec<Pattern> {
        let d = self.dim();
        let window = box_support(lo, hi);
        let sizes: Vec<i64> = (0..d).map(|j| hi[j] - lo[j] + 1).collect();
        let mut found: HashSet<Pattern> = HashSet::new();
        let mut queue: Vec<Pattern> = Vec::new();
        // Seed level: the smallest k whose supertiles can contain the window,
        // plus one for good measure; scan every level up to it.
        let mut k0 = 1usize;
        loop {
            let fits = match &self.system.block_lengths {
                Some(lengths) => (0..d).all(|j| lengths[j].pow(k0 as u32) >= sizes[j]),
                None => true, // singleton windows only (checked by caller)
            };
            if fits || k0 > 24 {
                break;
            }
            k0 += 1;
        }
        for a in 0..self.letters() {
            for k in 1..=k0 + 1 {
                let tile = self.supertile(a, k);
                for w in harvest(&tile, &window) {
                    if found.insert(w.clone()) {
                        queue.push(w);
                    }
                }
            }
        }
        // Closure: substitute each known pattern and harvest new windows.
        while let Some(p) = queue.pop() {
            let image = self.substitute_pattern(&p);
            for w in harvest(&image, &window) {
                if found.insert(w.clone()) {
                    queue.push(w);
                }
            }
        }
        let mut out: Vec<Pattern> = found.into_iter().collect();
        out.sort();
        out
    }
}

fn box_support(lo: &[i64], hi: &[i64]) -> Vec<IVec> {
    let d = lo.len();
    let mut out: Vec<IVec> = vec![Vec::new()];
    for j in 0..d {
        let mut next = Vec::new();
        for prefix in &out {
            for v in lo[j]..=hi[j] {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All fully-defined translated copies of `window` inside `p`, normalised back
/// to the window coordinates.
fn harvest(p: &Pattern, window: &[IVec]) -> Vec<Pattern> {
    let d = window[0].len();
    // Bounding boxes of pattern support and window.
    let supp = p.support();
    let mut plo = supp[0].clone();
    let mut phi = supp[0].clone();
    for q in &supp {
        for j in 0..d {
            plo[j] = plo[j].min(q[j]);
            phi[j] = phi[j].max(q[j]);
        }
    }
    let mut wlo = window[0].clone();
    let mut whi = window[0].clone();
    for q in window {
        for j in 0..d {
            wlo[j] = wlo[j].min(q[j]);
            whi[j] = whi[j].max(q[j]);
        }
    }
    // Translates t with window + t inside the pattern's bounding box.
    let ranges: Vec<(i64, i64)> =
        (0..d).map(|j| (plo[j] - wlo[j], phi[j] - whi[j])).collect();
    let mut translates: Vec<IVec> = vec![Vec::new()];
    for j in 0..d {
        let mut next = Vec::new();
        for prefix in &translates {
            for t in ranges[j].0..=ranges[j].1 {
                let mut v = prefix.clone();
                v.push(t);
                next.push(v);
            }
        }
        translates = next;
    }
    let mut out = Vec::new();
    'outer: for t in translates {
        let mut cells = Vec::with_capacity(window.len());
        for w in window {
            let pos: IVec = w.iter().zip(&t).map(|(a, b)| a + b).collect();
            match p.get(&pos) {
                Some(l) => cells.push((w.clone(), l)),
                None => continue 'outer,
            }
        }
        out.push(Pattern::from_cells(cells));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The six-letter-per-rule 1D running example: a -> aacbaa, b -> bcaacc,
    /// c -> bbaabc on the alphabet {a, b, c}.
    pub fn reversor_example() -> Substitution {
        let alphabet = Alphabet::from_strs(&["a", "b", "c"]);
        let system = DigitSystem::block(&[6]);
        let word = |s: &str, alph: &Alphabet| -> Vec<usize> {
            s.chars().map(|c| alph.index_of(&c.to_string()).unwrap()).collect()
        };
        let rules = vec![
            word("aacbaa", &alphabet),
            word("bcaacc", &alphabet),
            word("bbaabc", &alphabet),
        ];
        Substitution::new(alphabet, system, rules).unwrap()
    }

    fn thue_morse() -> Substitution {
        let alphabet = Alphabet::from_strs(&["a", "b"]);
        Substitution::new(alphabet, DigitSystem::block(&[2]), vec![vec![0, 1], vec![1, 0]])
            .unwrap()
    }

    #[test]
    fn supertile_level_one_matches_rule() {
        let sub = reversor_example();
        let tile = sub.supertile(0, 1);
        let word: Vec<usize> = (0..6).map(|i| tile.get(&[i]).unwrap()).collect();
        assert_eq!(word, vec![0, 0, 2, 1, 0, 0]); // a a c b a a
        assert_eq!(sub.supertile(0, 0), Pattern::single(1, 0));
    }

    #[test]
    fn supertile_cell_addresses() {
        // Cell at address [n_{k-1},...,n_0] equals the composite column there.
        let sub = reversor_example();
        let tile = sub.supertile(2, 3);
        for (addr, point) in sub.system.support(3) {
            assert_eq!(tile.get(&point).unwrap(), sub.column(&addr)[2]);
        }
    }

    #[test]
    fn columns_of_reversor_example() {
        let sub = reversor_example();
        assert_eq!(sub.column(&vec![0]), vec![0, 1, 1]); // a->a, b->b, c->b
        assert_eq!(sub.column(&vec![5]), vec![0, 2, 2]); // a->a, b->c, c->c
        // Composite order: theta_[5,0] = theta_0 o theta_5.
        let composite = sub.column(&vec![5, 0]);
        let tile = sub.supertile(0, 2);
        assert_eq!(composite[0], tile.get(&[30]).unwrap());
    }

    #[test]
    fn power_matches_supertile() {
        let sub = reversor_example();
        let squared = sub.power(2);
        assert_eq!(squared.system.size(), 36);
        for a in 0..3 {
            let t1 = squared.supertile(a, 1);
            let t2 = sub.supertile(a, 2);
            assert_eq!(t1, t2);
        }
        let prefix: Vec<usize> = (0..12).map(|i| t_get(&squared, 0, i)).collect();
        // "aacbaa aacbaa ..." per expanding the level-2 supertile of a.
        assert_eq!(prefix, vec![0, 0, 2, 1, 0, 0, 0, 0, 2, 1, 0, 0]);
    }

    fn t_get(sub: &Substitution, a: usize, i: i64) -> usize {
        sub.rules[a][sub
            .system
            .digits
            .iter()
            .position(|d| d == &vec![i])
            .unwrap()]
    }

    #[test]
    fn primitivity() {
        assert!(reversor_example().is_primitive().is_some());
        // Both letters already occur in each image, so the witness power is 1.
        assert_eq!(thue_morse().is_primitive(), Some(1));
    }

    #[test]
    fn legal_words_of_reversor_example() {
        let sub = reversor_example();
        let legal = sub.legal_patterns(&[vec![0], vec![1]]).unwrap();
        assert_eq!(legal.patterns.len(), 9); // all length-2 words occur
        assert!(!legal.nonextensible_warning);
        let letters = sub.legal_patterns(&[vec![0]]).unwrap();
        assert_eq!(letters.patterns.len(), 3);
    }

    #[test]
    fn thue_morse_dominoes() {
        let sub = thue_morse();
        let legal = sub.legal_patterns(&[vec![-1], vec![0]]).unwrap();
        assert_eq!(legal.patterns.len(), 4);
    }
}
