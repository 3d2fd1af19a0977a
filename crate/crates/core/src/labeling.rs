//! Connected-component labeling on the polar (ray, gate) lattice.
//!
//! The ray axis is circular: ray 0 and ray N-1 are neighbours. The gate axis
//! is not (gate 0 is near the radar, the last gate at maximum range).

use serde::{Deserialize, Serialize};

use crate::filter::GateMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// (ray±1, gate) and (ray, gate±1).
    #[default]
    Four,
    /// Four plus the diagonals.
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Neighbours of (ray, gate) with azimuth wraparound. May repeat or include
/// the cell itself when there are fewer than three rays.
pub fn neighbors(
    rays: usize,
    gates: usize,
    ray: usize,
    gate: usize,
    conn: Connectivity,
) -> impl Iterator<Item = (usize, usize)> {
    conn.offsets().iter().filter_map(move |&(dr, dg)| {
        let g = gate as isize + dg;
        if g < 0 || g >= gates as isize {
            return None;
        }
        let r = (ray as isize + dr).rem_euclid(rays as isize) as usize;
        Some((r, g as usize))
    })
}

/// Partitions the retained gates into maximal connected components.
///
/// Components are ordered by their first gate in ray-major scan order; the
/// gates of each component are sorted the same way.
pub fn label_clusters(mask: &GateMask, conn: Connectivity) -> Vec<Vec<(usize, usize)>> {
    let (rays, gates) = mask.dims();
    let mut seen = vec![false; rays * gates];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..rays * gates {
        if seen[start] || !mask.bits()[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            let (r, g) = (i / gates, i % gates);
            comp.push((r, g));
            for (nr, ng) in neighbors(rays, gates, r, g, conn) {
                let j = nr * gates + ng;
                if !seen[j] && mask.bits()[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
