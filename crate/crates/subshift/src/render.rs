//! Supertile renderers: ASCII art (letter initials) and binary PPM (P6) with
//! a fixed per-letter palette.

use crate::subst::{Pattern, Substitution};

/// Fixed palette; letter `i` gets colour `PALETTE[i % 16]`.
pub const PALETTE: [[u8; 3]; 16] = [
    [230, 57, 70],
    [29, 53, 87],
    [69, 123, 157],
    [168, 218, 220],
    [244, 162, 97],
    [42, 157, 143],
    [233, 196, 106],
    [38, 70, 83],
    [143, 45, 86],
    [217, 4, 41],
    [128, 237, 153],
    [87, 117, 144],
    [249, 132, 74],
    [67, 40, 24],
    [181, 23, 158],
    [114, 9, 183],
];

const BACKGROUND: [u8; 3] = [0, 0, 0];

fn bounds(p: &Pattern, dim: usize) -> (Vec<i64>, Vec<i64>) {
    let mut min = vec![i64::MAX; dim];
    let mut max = vec![i64::MIN; dim];
    for (pos, _) in p.cells() {
        for (j, &v) in pos.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    (min, max)
}

/// ASCII rendering of a supertile. One text row per `n_2` value (top row is
/// the largest `n_2`); characters run along `n_1`. Cells outside the support
/// (possible for explicit digit systems) render as `.`.
pub fn ascii_render(sub: &Substitution, letter: usize, level: usize) -> String {
    let tile = sub.supertile(letter, level);
    let d = sub.dim();
    let (min, max) = bounds(&tile, d);
    let initial = |l: usize| sub.alphabet.name(l).chars().next().unwrap_or('?');
    if d == 1 {
        return (min[0]..=max[0])
            .map(|x| tile.get(&[x]).map(initial).unwrap_or('.'))
            .collect();
    }
    assert!(d == 2, "ASCII rendering supports dimensions 1 and 2");
    let mut out = String::new();
    for y in (min[1]..=max[1]).rev() {
        for x in min[0]..=max[0] {
            out.push(tile.get(&[x, y]).map(initial).unwrap_or('.'));
        }
        out.push('\n');
    }
    out
}

/// Binary PPM (P6) rendering of a supertile; one pixel per cell.
pub fn ppm_render(sub: &Substitution, letter: usize, level: usize) -> Vec<u8> {
    let tile = sub.supertile(letter, level);
    let d = sub.dim();
    let (min, max) = bounds(&tile, d);
    let (w, h) = if d == 1 {
        ((max[0] - min[0] + 1) as usize, 1usize)
    } else {
        assert!(d == 2, "PPM rendering supports dimensions 1 and 2");
        ((max[0] - min[0] + 1) as usize, (max[1] - min[1] + 1) as usize)
    };
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for row in 0..h {
        for col in 0..w {
            let pos: Vec<i64> = if d == 1 {
                vec![min[0] + col as i64]
            } else {
                // Image rows run top-down; the top row is the largest n_2.
                vec![min[0] + col as i64, max[1] - row as i64]
            };
            let colour = tile
                .get(&pos)
                .map(|l| PALETTE[l % PALETTE.len()])
                .unwrap_or(BACKGROUND);
            out.extend_from_slice(&colour);
        }
    }
    out
}
