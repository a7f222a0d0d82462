//! Analysis of Z^d digit and block substitution subshifts.
//!
//! The crate models a substitution by its digit system `(Q, D)` and per-letter
//! rules, and provides:
//!
//! - supertile generation, column maps, powers, and legality closures
//!   ([`subst`]);
//! - the coincidence graph, column number, minimal sets, and the letter
//!   encodings used by the symmetry criteria ([`column_algebra`]);
//! - enumeration of supertile-shuffling extended symmetries `(tau, A)`
//!   ([`symmetry`]);
//! - return module and height lattice computation with the `A Gamma = Gamma`
//!   admissibility filter ([`height`]);
//! - derived substitutions across supertile boundaries, pruned reversed
//!   coincidence graphs, and exact fibre cardinalities over the Q-adic
//!   odometer ([`fibres`]);
//! - a line-oriented manifest format and renderers ([`manifest`], [`render`]).
//!
//! # Example
//!
//! ```
//! use subshift::manifest::parse_manifest;
//!
//! let src = "\
//! name: example
//! dims: 1
//! shape: block 2
//! alphabet: a b
//! flags: assert_aperiodic
//! rule a:
//! a b
//! rule b:
//! b a
//! ";
//! let manifest = parse_manifest(src).unwrap();
//! let sub = manifest.substitution().unwrap();
//! assert_eq!(sub.supertile(0, 2).len(), 4);
//! ```

// The guide in `book/` is compiled as doc-tests so its code snippets stay in
// sync with the library.
#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            mod $name {}
        };
    }
    chapter!(introduction, "introduction.md");
    chapter!(manifests, "manifests.md");
    chapter!(columns, "columns.md");
    chapter!(symmetries, "symmetries.md");
    chapter!(height, "height.md");
    chapter!(fibres, "fibres.md");
    chapter!(cli, "cli.md");
}

pub mod column_algebra;
pub mod digits;
pub mod fibres;
pub mod height;
pub mod linalg;
pub mod manifest;
pub mod render;
pub mod subst;
pub mod symmetry;
