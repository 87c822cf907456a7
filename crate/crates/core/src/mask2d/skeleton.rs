//! Zhang-Suen thinning with a topology guard.
//!
//! Candidates are chosen per sub-iteration exactly as in Zhang & Suen (1984),
//! but each deletion is re-checked against the current image: the pixel must
//! still be 8-simple (Yokoi connectivity number 1) and must not be an end
//! point. Plain Zhang-Suen erases 2x2 blocks and some 2-pixel diagonals
//! entirely; the guard keeps every 8-connected component alive.

use super::raster::{BinaryMask, Pixel};

/// Thins `mask` to a one-pixel-wide skeleton. Idempotent.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut img = mask.clone();
    loop {
        let removed = sub_iteration(&mut img, Pass::First) + sub_iteration(&mut img, Pass::Second);
        if removed == 0 {
            return img;
        }
    }
}

#[derive(Clone, Copy)]
enum Pass {
    First,
    Second,
}

/// Clockwise neighbors starting north: P2..P9 in Zhang-Suen notation.
fn ring(img: &BinaryMask, p: Pixel) -> [bool; 8] {
    let (x, y) = (p.x as isize, p.y as isize);
    [
        img.get_signed(x, y - 1),
        img.get_signed(x + 1, y - 1),
        img.get_signed(x + 1, y),
        img.get_signed(x + 1, y + 1),
        img.get_signed(x, y + 1),
        img.get_signed(x - 1, y + 1),
        img.get_signed(x - 1, y),
        img.get_signed(x - 1, y - 1),
    ]
}

fn zhang_suen_candidate(n: &[bool; 8], pass: Pass) -> bool {
    let [p2, _p3, p4, _p5, p6, _p7, p8, _p9] = *n;
    let b = n.iter().filter(|v| **v).count();
    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    if !(2..=6).contains(&b) || a != 1 {
        return false;
    }
    match pass {
        Pass::First => !(p2 && p4 && p6) && !(p4 && p6 && p8),
        Pass::Second => !(p2 && p4 && p8) && !(p2 && p6 && p8),
    }
}

/// Yokoi 8-connectivity number; 1 means deleting the pixel preserves topology.
fn yokoi8(n: &[bool; 8]) -> usize {
    // Counter-clockwise from east: x1 = E, x2 = NE, x3 = N, ... x8 = SE.
    let [n_, ne, e, se, s, sw, w, nw] = *n;
    let x = [e, ne, n_, nw, w, sw, s, se];
    let bar = |i: usize| usize::from(!x[i % 8]);
    [0, 2, 4, 6]
        .iter()
        .map(|&k| bar(k) - bar(k) * bar(k + 1) * bar(k + 2))
        .sum()
}

fn sub_iteration(img: &mut BinaryMask, pass: Pass) -> usize {
    let candidates: Vec<Pixel> = img
        .pixels()
        .filter(|p| zhang_suen_candidate(&ring(img, *p), pass))
        .collect();
    let mut removed = 0;
    for p in candidates {
        let n = ring(img, p);
        let b = n.iter().filter(|v| **v).count();
        if b >= 2 && yokoi8(&n) == 1 {
            img.set(p.x, p.y, false);
            removed += 1;
        }
    }
    removed
}
