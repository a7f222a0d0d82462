//! Line-oriented manifest format for substitution fixtures.
//!
//! ```text
//! name: <identifier>
//! dims: <d>
//! shape: block L1 L2 ...            (or)  shape: digits Q=[[..],[..]] D=(x,y);(x,y);...
//! alphabet: a b c
//! flags: assert_aperiodic           (optional)
//! rule a:
//! <rows>
//! ```
//!
//! Rule rows are whitespace-separated letter tokens. For block shapes in one
//! dimension a rule is a single row of `L1` letters; in two dimensions it is
//! `L2` rows of `L1` letters each, where row `r` holds the cells with
//! `n_2 = r` and the token at column `c` is the cell `(n_1, n_2) = (c, r)`.
//! In higher dimensions (and for explicit digit shapes) a rule is a flat list
//! of letters: canonical cell order (lexicographic on `(n_1, ..., n_d)` with
//! `n_d` fastest) for blocks, declaration order of `D=` for explicit digit
//! systems. Blank lines and lines starting with `#` are ignored.

use std::fmt;

use thiserror::Error;

use crate::digits::DigitSystem;
use crate::linalg::{IMat, IVec};
use crate::subst::{Alphabet, SubstError, Substitution};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Block(Vec<i64>),
    Digits { q: IMat, digits: Vec<IVec> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub name: String,
    pub dims: usize,
    pub shape: Shape,
    pub alphabet: Vec<String>,
    pub assert_aperiodic: bool,
    /// Per letter (alphabet order): image letters in canonical cell order.
    pub rules: Vec<Vec<String>>,
}

#[derive(Debug, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ManifestError {
    fn at(line: usize, column: usize, message: impl fmt::Display) -> Self {
        ManifestError { line, column, message: message.to_string() }
    }
}

fn parse_matrix(s: &str, line: usize, col: usize) -> Result<IMat, ManifestError> {
    // Format: [[1,-2],[2,1]]
    let inner = s
        .strip_prefix("[[")
        .and_then(|t| t.strip_suffix("]]"))
        .ok_or_else(|| ManifestError::at(line, col, "matrix must look like [[..],[..]]"))?;
    let rows: Result<Vec<Vec<i64>>, _> = inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<i64>())
                .collect::<Result<Vec<i64>, _>>()
        })
        .collect();
    let rows = rows.map_err(|e| ManifestError::at(line, col, format!("bad matrix entry: {e}")))?;
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(ManifestError::at(line, col, "matrix must be square"));
    }
    Ok(IMat::from_rows(&rows))
}

fn parse_digit_list(s: &str, line: usize, col: usize) -> Result<Vec<IVec>, ManifestError> {
    // Format: (0,0);(1,0);(-1,0)
    s.split(';')
        .map(|part| {
            let inner = part
                .trim()
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| {
                    ManifestError::at(line, col, format!("bad digit `{part}`: expected (x,y,...)"))
                })?;
            inner
                .split(',')
                .map(|v| {
                    v.trim().parse::<i64>().map_err(|e| {
                        ManifestError::at(line, col, format!("bad digit entry `{v}`: {e}"))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut name: Option<String> = None;
    let mut dims: Option<usize> = None;
    let mut shape: Option<Shape> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut assert_aperiodic = false;
    // (letter, header line, rows of tokens)
    let mut raw_rules: Vec<(String, usize, Vec<Vec<String>>)> = Vec::new();
    let mut in_rule = false;

    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let keyed = line.split_once(':');
        match keyed {
            Some(("name", rest)) => {
                name = Some(rest.trim().to_string());
                in_rule = false;
            }
            Some(("dims", rest)) => {
                dims = Some(rest.trim().parse().map_err(|e| {
                    ManifestError::at(lineno, 1, format!("bad dims: {e}"))
                })?);
                in_rule = false;
            }
            Some(("shape", rest)) => {
                let rest = rest.trim();
                if let Some(block) = rest.strip_prefix("block") {
                    let lengths: Result<Vec<i64>, _> =
                        block.split_whitespace().map(|v| v.parse::<i64>()).collect();
                    let lengths = lengths.map_err(|e| {
                        ManifestError::at(lineno, 1, format!("bad block length: {e}"))
                    })?;
                    if lengths.is_empty() {
                        return Err(ManifestError::at(lineno, 1, "block shape needs lengths"));
                    }
                    shape = Some(Shape::Block(lengths));
                } else if let Some(dig) = rest.strip_prefix("digits") {
                    let mut q = None;
                    let mut digits = None;
                    for part in dig.split_whitespace() {
                        if let Some(m) = part.strip_prefix("Q=") {
                            q = Some(parse_matrix(m, lineno, 1)?);
                        } else if let Some(dl) = part.strip_prefix("D=") {
                            digits = Some(parse_digit_list(dl, lineno, 1)?);
                        } else {
                            return Err(ManifestError::at(
                                lineno,
                                1,
                                format!("unexpected token `{part}` in digits shape"),
                            ));
                        }
                    }
                    match (q, digits) {
                        (Some(q), Some(digits)) => shape = Some(Shape::Digits { q, digits }),
                        _ => {
                            return Err(ManifestError::at(
                                lineno,
                                1,
                                "digits shape requires Q=... and D=...",
                            ))
                        }
                    }
                } else {
                    return Err(ManifestError::at(
                        lineno,
                        1,
                        format!("unknown shape `{rest}` (expected `block` or `digits`)"),
                    ));
                }
                in_rule = false;
            }
            Some(("alphabet", rest)) => {
                alphabet =
                    Some(rest.split_whitespace().map(|s| s.to_string()).collect());
                in_rule = false;
            }
            Some(("flags", rest)) => {
                for flag in rest.split_whitespace() {
                    match flag {
                        "assert_aperiodic" => assert_aperiodic = true,
                        other => {
                            return Err(ManifestError::at(
                                lineno,
                                1,
                                format!("unknown flag `{other}`"),
                            ))
                        }
                    }
                }
                in_rule = false;
            }
            Some((key, rest)) if key == "rule" || key.starts_with("rule ") => {
                let letter = format!(
                    "{} {}",
                    key.strip_prefix("rule").unwrap().trim(),
                    rest.trim()
                );
                raw_rules.push((letter.trim().to_string(), lineno, Vec::new()));
                in_rule = true;
            }
            Some((key, _)) if !key.contains(char::is_whitespace) => {
                return Err(ManifestError::at(lineno, 1, format!("unknown key `{key}`")));
            }
            _ => {
                if !in_rule {
                    return Err(ManifestError::at(
                        lineno,
                        1,
                        format!("unexpected line `{line}` outside a rule block"),
                    ));
                }
                let tokens = line.split_whitespace().map(|s| s.to_string()).collect();
                raw_rules.last_mut().unwrap().2.push(tokens);
            }
        }
    }

    let name = name.ok_or_else(|| ManifestError::at(1, 1, "missing `name:`"))?;
    let dims = dims.ok_or_else(|| ManifestError::at(1, 1, "missing `dims:`"))?;
    let shape = shape.ok_or_else(|| ManifestError::at(1, 1, "missing `shape:`"))?;
    let alphabet = alphabet.ok_or_else(|| ManifestError::at(1, 1, "missing `alphabet:`"))?;

    // Shape sanity against dims.
    let cell_count = match &shape {
        Shape::Block(lengths) => {
            if lengths.len() != dims {
                return Err(ManifestError::at(1, 1, "block lengths do not match dims"));
            }
            lengths.iter().product::<i64>() as usize
        }
        Shape::Digits { q, digits } => {
            if q.dim != dims || digits.iter().any(|d| d.len() != dims) {
                return Err(ManifestError::at(1, 1, "digit system does not match dims"));
            }
            digits.len()
        }
    };

    // Assemble rules in alphabet order; flatten rows in file order.
    let mut rules: Vec<Option<Vec<String>>> = vec![None; alphabet.len()];
    for (letter, lineno, rows) in raw_rules {
        let idx = alphabet.iter().position(|l| *l == letter).ok_or_else(|| {
            ManifestError::at(lineno, 1, format!("rule for unknown letter `{letter}`"))
        })?;
        if rules[idx].is_some() {
            return Err(ManifestError::at(lineno, 1, format!("duplicate rule for `{letter}`")));
        }
        let flat = flatten_rule_rows(&shape, dims, &rows, lineno)?;
        if flat.len() != cell_count {
            return Err(ManifestError::at(
                lineno,
                1,
                format!("rule for `{letter}` has {} cells, expected {cell_count}", flat.len()),
            ));
        }
        for token in &flat {
            if !alphabet.contains(token) {
                return Err(ManifestError::at(
                    lineno,
                    1,
                    format!("rule for `{letter}` uses unknown letter `{token}`"),
                ));
            }
        }
        rules[idx] = Some(flat);
    }
    let rules: Vec<Vec<String>> = rules
        .into_iter()
        .zip(&alphabet)
        .map(|(r, l)| {
            r.ok_or_else(|| ManifestError::at(1, 1, format!("missing rule for letter {l}")))
        })
        .collect::<Result<_, _>>()?;

    Ok(Manifest { name, dims, shape, alphabet, assert_aperiodic, rules })
}

/// Convert file-layout rows into canonical cell order.
fn flatten_rule_rows(
    shape: &Shape,
    dims: usize,
    rows: &[Vec<String>],
    lineno: usize,
) -> Result<Vec<String>, ManifestError> {
    match shape {
        Shape::Block(lengths) if dims == 2 => {
            let (l1, l2) = (lengths[0] as usize, lengths[1] as usize);
            if rows.len() != l2 || rows.iter().any(|r| r.len() != l1) {
                return Err(ManifestError::at(
                    lineno,
                    1,
                    format!("2-dimensional rule must have {l2} rows of {l1} tokens"),
                ));
            }
            // Row r, token c holds cell (n_1, n_2) = (c, r); canonical order
            // enumerates (n_1, n_2) with n_2 fastest.
            let mut flat = Vec::with_capacity(l1 * l2);
            for n1 in 0..l1 {
                for n2 in 0..l2 {
                    flat.push(rows[n2][n1].clone());
                }
            }
            Ok(flat)
        }
        _ => Ok(rows.iter().flatten().cloned().collect()),
    }
}

/// Render a manifest back to its textual form (parse -> serialize -> parse is
/// the identity).
pub fn serialize_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("name: {}\n", m.name));
    out.push_str(&format!("dims: {}\n", m.dims));
    match &m.shape {
        Shape::Block(lengths) => {
            out.push_str("shape: block");
            for l in lengths {
                out.push_str(&format!(" {l}"));
            }
            out.push('\n');
        }
        Shape::Digits { q, digits } => {
            let rows: Vec<String> = (0..q.dim)
                .map(|i| {
                    (0..q.dim)
                        .map(|j| q[(i, j)].to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            let dl: Vec<String> = digits
                .iter()
                .map(|d| format!("({})", d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            out.push_str(&format!(
                "shape: digits Q=[[{}]] D={}\n",
                rows.join("],["),
                dl.join(";")
            ));
        }
    }
    out.push_str(&format!("alphabet: {}\n", m.alphabet.join(" ")));
    if m.assert_aperiodic {
        out.push_str("flags: assert_aperiodic\n");
    }
    for (letter, rule) in m.alphabet.iter().zip(&m.rules) {
        out.push_str(&format!("rule {letter}:\n"));
        match &m.shape {
            Shape::Block(lengths) if m.dims == 2 => {
                let (l1, l2) = (lengths[0] as usize, lengths[1] as usize);
                for n2 in 0..l2 {
                    let row: Vec<&str> =
                        (0..l1).map(|n1| rule[n1 * l2 + n2].as_str()).collect();
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
            _ => {
                out.push_str(&rule.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

impl Manifest {
    /// Build the substitution described by the manifest.
    pub fn substitution(&self) -> Result<Substitution, SubstError> {
        let alphabet = Alphabet::new(self.alphabet.clone())?;
        let system = match &self.shape {
            Shape::Block(lengths) => DigitSystem::block(lengths),
            Shape::Digits { q, digits } => DigitSystem::explicit(q.clone(), digits.clone()),
        };
        let rules = self
            .rules
            .iter()
            .map(|r| {
                r.iter()
                    .map(|l| alphabet.index_of(l).expect("validated at parse time"))
                    .collect()
            })
            .collect();
        Substitution::new(alphabet, system, rules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THUE_MORSE: &str = "\
name: thue-morse
dims: 1
shape: block 2
alphabet: a b
flags: assert_aperiodic
rule a:
a b
rule b:
b a
";

    #[test]
    fn parse_and_round_trip() {
        let m = parse_manifest(THUE_MORSE).unwrap();
        assert_eq!(m.name, "thue-morse");
        assert_eq!(m.shape, Shape::Block(vec![2]));
        assert!(m.assert_aperiodic);
        let text = serialize_manifest(&m);
        assert_eq!(parse_manifest(&text).unwrap(), m);
        let sub = m.substitution().unwrap();
        assert_eq!(sub.letters(), 2);
    }

    #[test]
    fn two_dimensional_layout() {
        let src = "\
name: quad
dims: 2
shape: block 2 2
alphabet: a b c
rule a:
a c
c b
rule b:
c b
a c
rule c:
b a
a b
";
        let m = parse_manifest(src).unwrap();
        let sub = m.substitution().unwrap();
        // File row r is n_2 = r, token c is n_1 = c: cell (1, 0) of rule a is
        // the second token of the first row.
        assert_eq!(sub.supertile(0, 1).get(&[1, 0]), Some(2));
        assert_eq!(sub.supertile(0, 1).get(&[0, 1]), Some(2));
        assert_eq!(sub.supertile(0, 1).get(&[1, 1]), Some(1));
        assert_eq!(parse_manifest(&serialize_manifest(&m)).unwrap(), m);
    }

    #[test]
    fn explicit_digit_shape() {
        let src = "\
name: helix-like
dims: 2
shape: digits Q=[[1,-2],[2,1]] D=(0,0);(1,0);(-1,0);(0,1);(0,-1)
alphabet: A B
rule A:
A B A B A
rule B:
B A B A B
";
        let m = parse_manifest(src).unwrap();
        let sub = m.substitution().unwrap();
        assert_eq!(sub.system.size(), 5);
        assert_eq!(parse_manifest(&serialize_manifest(&m)).unwrap(), m);
    }

    #[test]
    fn diagnostics() {
        let missing = THUE_MORSE.replace("rule b:\nb a\n", "");
        let err = parse_manifest(&missing).unwrap_err();
        assert!(err.message.contains("missing rule for letter b"), "{err}");

        let unknown_key = format!("{THUE_MORSE}colour: blue\n");
        let err = parse_manifest(&unknown_key).unwrap_err();
        assert!(err.message.contains("unknown key"), "{err}");

        let bad_cells = THUE_MORSE.replace("a b\n", "a b a\n");
        let err = parse_manifest(&bad_cells).unwrap_err();
        assert!(err.message.contains("expected 2"), "{err}");
        assert_eq!(err.line, 6);
    }
}
