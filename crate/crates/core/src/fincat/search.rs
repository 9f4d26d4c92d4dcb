//! Exhaustive enumeration of functors between finite categories, with optional
//! constraints on where objects and morphisms may go.

use std::sync::Arc;

use thiserror::Error;

use super::{FinCat, Functor};

pub const DEFAULT_NODE_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search exceeded {0} nodes")]
    CapExceeded(usize),
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Obj(usize),
    Mor(usize),
}

/// Backtracking search: objects are assigned in order, and each morphism is
/// assigned as soon as both of its endpoints are, with composition checked
/// whenever the last morphism of a composable triple is placed.
pub struct FunctorSearch {
    source: Arc<FinCat>,
    target: Arc<FinCat>,
    obj_candidates: Vec<Vec<usize>>,
    mor_candidates: Vec<Option<Vec<usize>>>,
    node_cap: usize,
}

impl FunctorSearch {
    pub fn new(source: &Arc<FinCat>, target: &Arc<FinCat>) -> Self {
        FunctorSearch {
            source: source.clone(),
            target: target.clone(),
            obj_candidates: vec![(0..target.object_count()).collect(); source.object_count()],
            mor_candidates: vec![None; source.morphism_count()],
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn restrict_object(mut self, x: usize, allowed: Vec<usize>) -> Self {
        self.obj_candidates[x].retain(|c| allowed.contains(c));
        self
    }

    pub fn fix_object(self, x: usize, y: usize) -> Self {
        self.restrict_object(x, vec![y])
    }

    pub fn restrict_morphism(mut self, m: usize, allowed: Vec<usize>) -> Self {
        self.mor_candidates[m] = Some(match self.mor_candidates[m].take() {
            Some(prev) => prev.into_iter().filter(|c| allowed.contains(c)).collect(),
            None => allowed,
        });
        self
    }

    pub fn fix_morphism(self, m: usize, image: usize) -> Self {
        self.restrict_morphism(m, vec![image])
    }

    pub fn node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    fn plan(&self) -> (Vec<Step>, Vec<Vec<(usize, usize, usize)>>) {
        let s = &*self.source;
        let mut steps = Vec::new();
        let mut order = vec![usize::MAX; s.morphism_count()];
        let mut placed = 0;
        for x in 0..s.object_count() {
            steps.push(Step::Obj(x));
            for m in 0..s.morphism_count() {
                if order[m] == usize::MAX && s.dom(m) <= x && s.cod(m) <= x {
                    order[m] = placed;
                    placed += 1;
                    steps.push(Step::Mor(m));
                }
            }
        }
        // Each composable triple is checked when its last morphism is placed.
        let mut checks = vec![Vec::new(); s.morphism_count()];
        for (g, f) in s.composable_pairs() {
            let h = s.comp(g, f);
            let last = [g, f, h].into_iter().max_by_key(|&m| order[m]).unwrap();
            checks[last].push((g, f, h));
        }
        (steps, checks)
    }

    /// Visit every functor satisfying the constraints; `visit` returns `false` to stop.
    pub fn run(&self, mut visit: impl FnMut(&Functor) -> bool) -> Result<usize, SearchError> {
        let (steps, checks) = self.plan();
        let mut state = State {
            obj: vec![usize::MAX; self.source.object_count()],
            mor: vec![usize::MAX; self.source.morphism_count()],
            nodes: 0,
            found: 0,
            stop: false,
        };
        self.go(&steps, &checks, 0, &mut state, &mut visit)?;
        Ok(state.found)
    }

    fn go(
        &self,
        steps: &[Step],
        checks: &[Vec<(usize, usize, usize)>],
        k: usize,
        st: &mut State,
        visit: &mut impl FnMut(&Functor) -> bool,
    ) -> Result<(), SearchError> {
        if st.stop {
            return Ok(());
        }
        st.nodes += 1;
        if st.nodes > self.node_cap {
            return Err(SearchError::CapExceeded(self.node_cap));
        }
        let (s, t) = (&*self.source, &*self.target);
        let Some(step) = steps.get(k) else {
            st.found += 1;
            let f = Functor::new_unchecked(self.source.clone(), self.target.clone(), st.obj.clone(), st.mor.clone());
            if !visit(&f) {
                st.stop = true;
            }
            return Ok(());
        };
        match *step {
            Step::Obj(x) => {
                for &y in &self.obj_candidates[x] {
                    st.obj[x] = y;
                    self.go(steps, checks, k + 1, st, visit)?;
                }
                st.obj[x] = usize::MAX;
            }
            Step::Mor(m) => {
                let (a, b) = (st.obj[s.dom(m)], st.obj[s.cod(m)]);
                let candidates: Vec<usize> = if s.is_identity(m) {
                    vec![t.id(a)]
                } else {
                    t.hom(a, b).to_vec()
                };
                for c in candidates {
                    if let Some(allowed) = &self.mor_candidates[m] {
                        if !allowed.contains(&c) {
                            continue;
                        }
                    }
                    st.mor[m] = c;
                    let ok = checks[m]
                        .iter()
                        .all(|&(g, f, h)| t.comp(st.mor[g], st.mor[f]) == st.mor[h]);
                    if ok {
                        self.go(steps, checks, k + 1, st, visit)?;
                    }
                }
                st.mor[m] = usize::MAX;
            }
        }
        Ok(())
    }

    pub fn all(&self) -> Result<Vec<Functor>, SearchError> {
        let mut out = Vec::new();
        self.run(|f| {
            out.push(f.clone());
            true
        })?;
        Ok(out)
    }

    pub fn count(&self) -> Result<usize, SearchError> {
        self.run(|_| true)
    }

    pub fn first(&self) -> Result<Option<Functor>, SearchError> {
        let mut out = None;
        self.run(|f| {
            out = Some(f.clone());
            false
        })?;
        Ok(out)
    }

    /// Up to `limit` solutions, stopping early.
    pub fn take(&self, limit: usize) -> Result<Vec<Functor>, SearchError> {
        let mut out = Vec::new();
        if limit == 0 {
            return Ok(out);
        }
        self.run(|f| {
            out.push(f.clone());
            out.len() < limit
        })?;
        Ok(out)
    }
}

/// Check that the commuting square `right ∘ top = bottom ∘ left` with apex `P`
/// is a pullback, by testing the universal property against functors out of each
/// category in `probes` (for `Cat`, `*`, `𝟚` and `𝟛` detect objects, morphisms and
/// composites). Returns a description of the first failure.
pub fn pullback_failure(
    top: &Functor,
    left: &Functor,
    right: &Functor,
    bottom: &Functor,
    probes: &[Arc<FinCat>],
    node_cap: usize,
) -> Result<Option<String>, SearchError> {
    if right.after(top) != bottom.after(left) {
        return Ok(Some("square does not commute".into()));
    }
    let (p, a, b) = (&top.source, &top.target, &left.target);
    for x in probes {
        let mut failure = None;
        FunctorSearch::new(x, b).node_cap(node_cap).run(|y| {
            let fy = bottom.after(y);
            let mut over = FunctorSearch::new(x, a).node_cap(node_cap);
            for i in 0..x.object_count() {
                let allowed = (0..a.object_count()).filter(|&o| right.obj[o] == fy.obj[i]).collect();
                over = over.restrict_object(i, allowed);
            }
            for m in 0..x.morphism_count() {
                let allowed = (0..a.morphism_count()).filter(|&n| right.mor[n] == fy.mor[m]).collect();
                over = over.restrict_morphism(m, allowed);
            }
            let inner = over.run(|xa| {
                let mut med = FunctorSearch::new(x, p).node_cap(node_cap);
                for i in 0..x.object_count() {
                    let allowed = (0..p.object_count())
                        .filter(|&o| top.obj[o] == xa.obj[i] && left.obj[o] == y.obj[i])
                        .collect();
                    med = med.restrict_object(i, allowed);
                }
                for m in 0..x.morphism_count() {
                    let allowed = (0..p.morphism_count())
                        .filter(|&n| top.mor[n] == xa.mor[m] && left.mor[n] == y.mor[m])
                        .collect();
                    med = med.restrict_morphism(m, allowed);
                }
                match med.take(2) {
                    Ok(found) if found.len() == 1 => true,
                    Ok(found) => {
                        failure = Some(Ok(format!(
                            "{} mediating functors from a {}-object probe",
                            found.len(),
                            x.object_count()
                        )));
                        false
                    }
                    Err(e) => {
                        failure = Some(Err(e));
                        false
                    }
                }
            });
            match inner {
                Ok(_) => failure.is_none(),
                Err(e) => {
                    failure = Some(Err(e));
                    false
                }
            }
        })?;
        if let Some(f) = failure {
            return f.map(Some);
        }
    }
    Ok(None)
}

struct State {
    obj: Vec<usize>,
    mor: Vec<usize>,
    nodes: usize,
    found: usize,
    stop: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::ordinal;

    #[test]
    fn functors_between_ordinals_are_monotone_maps() {
        // Functors [n] → [m] between posets are monotone maps: C(m+n, n) of them.
        let two = Arc::new(ordinal(2));
        let three = Arc::new(ordinal(3));
        assert_eq!(FunctorSearch::new(&two, &three).count().unwrap(), 6);
        assert_eq!(FunctorSearch::new(&three, &two).count().unwrap(), 4);
        for f in FunctorSearch::new(&three, &three).all().unwrap() {
            f.validate().unwrap();
        }
    }

    #[test]
    fn product_square_is_a_pullback() {
        use crate::fincat::{pullback_cat, terminal};
        let two = Arc::new(ordinal(2));
        let three = Arc::new(ordinal(3));
        let pt = Arc::new(terminal());
        let p = pullback_cat(&Functor::to_terminal(&two), &Functor::to_terminal(&three));
        let probes = [pt.clone(), two.clone(), three.clone()];
        let bang_two = Functor::new_unchecked(two.clone(), pt.clone(), vec![0; 2], vec![0; 3]);
        let bang_three = Functor::new_unchecked(three.clone(), pt.clone(), vec![0; 3], vec![0; 6]);
        let r = pullback_failure(&p.left, &p.right, &bang_two, &bang_three, &probes, DEFAULT_NODE_CAP);
        assert_eq!(r, Ok(None));
    }

    #[test]
    fn non_pullback_is_detected() {
        use crate::fincat::terminal;
        // The square with apex * over * ← 𝟚 → * is not a pullback: 𝟚 × 𝟚 ≠ *.
        let two = Arc::new(ordinal(2));
        let pt = Arc::new(terminal());
        let top = Functor::constant(&pt, &two, 0);
        let bang = Functor::new_unchecked(two.clone(), pt.clone(), vec![0; 2], vec![0; 3]);
        let probes = [pt.clone()];
        let r = pullback_failure(&top, &top, &bang, &bang, &probes, DEFAULT_NODE_CAP).unwrap();
        assert!(r.is_some());
    }

    #[test]
    fn cap_is_reported() {
        let three = Arc::new(ordinal(3));
        let r = FunctorSearch::new(&three, &three).node_cap(3).count();
        assert_eq!(r, Err(SearchError::CapExceeded(3)));
    }
}
