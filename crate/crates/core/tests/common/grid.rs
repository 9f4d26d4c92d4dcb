//! Exhaustive path enumeration on small directed grids.

use std::collections::BTreeSet;

use dhott::dspace::{DirectedGridSpace, Region, State};

/// The cells of the tick box `[lo, hi]` on two named axes.
pub fn tick_box(space: &DirectedGridSpace, a: (&str, &str), b: (&str, &str)) -> BTreeSet<State> {
    let (ax, bx) = (&space.axes[0], &space.axes[1]);
    let r = Region {
        lo: vec![ax.tick(a.0).unwrap(), bx.tick(b.0).unwrap()],
        hi: vec![ax.tick(a.1).unwrap(), bx.tick(b.1).unwrap()],
    };
    r.cells().into_iter().collect()
}

/// Every monotone lattice path from the initial to the final state of the full
/// grid, forbidden cells included.
pub fn all_paths(shape: &[usize]) -> Vec<Vec<State>> {
    fn go(shape: &[usize], cur: State, path: &mut Vec<State>, out: &mut Vec<Vec<State>>) {
        path.push(cur.clone());
        let mut moved = false;
        for d in 0..shape.len() {
            if cur[d] + 1 < shape[d] {
                let mut next = cur.clone();
                next[d] += 1;
                go(shape, next, path, out);
                moved = true;
            }
        }
        if !moved {
            out.push(path.clone());
        }
        path.pop();
    }
    let mut out = Vec::new();
    go(shape, vec![0; shape.len()], &mut Vec::new(), &mut out);
    out
}

/// Reachable states are the forbidden-free prefixes of full paths; safe states
/// the forbidden-free suffixes.
pub fn oracle(space: &DirectedGridSpace) -> (BTreeSet<State>, BTreeSet<State>) {
    let (mut r, mut s) = (BTreeSet::new(), BTreeSet::new());
    for path in all_paths(&space.shape()) {
        r.extend(path.iter().take_while(|x| !space.is_forbidden(x)).cloned());
        s.extend(path.iter().rev().take_while(|x| !space.is_forbidden(x)).cloned());
    }
    (r, s)
}

