//! Small named categories, arrow/iso/pullback categories, and (co)cartesian
//! morphisms decided by exhaustive search.

use std::collections::HashMap;
use std::sync::Arc;

use super::{FinCat, Functor, Morphism};

/// The terminal category `*`.
pub fn terminal() -> FinCat {
    discrete(vec!["*".into()])
}

/// The discrete category on the given object names; identities are `id_x`.
pub fn discrete(objects: Vec<String>) -> FinCat {
    let morphisms = objects
        .iter()
        .enumerate()
        .map(|(i, o)| Morphism {
            name: format!("id_{o}"),
            dom: i,
            cod: i,
        })
        .collect();
    let identity = (0..objects.len()).collect();
    FinCat::from_fn(objects, morphisms, identity, |g, _| g).expect("discrete category")
}

/// The ordinal `[n]` as a poset category on `0 < 1 < … < n-1`. The arrow `i → j`
/// is named `i<j`; with `n = 2` the single arrow is called `a`, matching the
/// walking arrow `𝟚`.
pub fn ordinal(n: usize) -> FinCat {
    let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut morphisms = Vec::new();
    let mut index = HashMap::new();
    for i in 0..n {
        for j in i..n {
            let name = if i == j {
                format!("id_{i}")
            } else if n == 2 {
                "a".to_string()
            } else {
                format!("{i}<{j}")
            };
            index.insert((i, j), morphisms.len());
            morphisms.push(Morphism { name, dom: i, cod: j });
        }
    }
    let identity = (0..n).map(|i| index[&(i, i)]).collect();
    let ends: Vec<(usize, usize)> = morphisms.iter().map(|m| (m.dom, m.cod)).collect();
    FinCat::from_fn(objects, morphisms, identity, |g, f| index[&(ends[f].0, ends[g].1)])
        .expect("ordinal category")
}

/// `C^𝟚` (or its full subcategory on isomorphisms, `C^𝕀`) with the domain and
/// codomain functors.
#[derive(Clone, Debug)]
pub struct ArrowCat {
    pub base: Arc<FinCat>,
    pub cat: Arc<FinCat>,
    pub dom: Functor,
    pub cod: Functor,
    /// Arrow-category object → the morphism of `base` it is.
    arrows: Vec<usize>,
    object_of: HashMap<usize, usize>,
    /// Arrow-category morphism → its square `(u, v)`.
    squares: Vec<(usize, usize)>,
    square_index: HashMap<(usize, usize, usize, usize), usize>,
}

impl ArrowCat {
    /// The arrow-category object for a morphism of the base.
    pub fn object(&self, f: usize) -> Option<usize> {
        self.object_of.get(&f).copied()
    }

    pub fn arrow(&self, o: usize) -> usize {
        self.arrows[o]
    }

    /// The square `(u, v) : a → b` between arrow-category objects.
    pub fn square(&self, a: usize, b: usize, u: usize, v: usize) -> Option<usize> {
        self.square_index.get(&(a, b, u, v)).copied()
    }

    pub fn square_parts(&self, m: usize) -> (usize, usize) {
        self.squares[m]
    }
}

fn arrow_like(c: &Arc<FinCat>, keep: impl Fn(usize) -> bool) -> ArrowCat {
    let arrows: Vec<usize> = (0..c.morphism_count()).filter(|&f| keep(f)).collect();
    let object_of: HashMap<usize, usize> = arrows.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let objects: Vec<String> = arrows.iter().map(|&f| c.morphism_name(f).to_string()).collect();
    let mut morphisms = Vec::new();
    let mut squares = Vec::new();
    let mut square_index = HashMap::new();
    for (a, &f) in arrows.iter().enumerate() {
        for (b, &f2) in arrows.iter().enumerate() {
            for &u in c.hom(c.dom(f), c.dom(f2)) {
                for &v in c.hom(c.cod(f), c.cod(f2)) {
                    if c.comp(v, f) == c.comp(f2, u) {
                        square_index.insert((a, b, u, v), morphisms.len());
                        squares.push((u, v));
                        morphisms.push(Morphism {
                            name: format!("({},{})", c.morphism_name(u), c.morphism_name(v)),
                            dom: a,
                            cod: b,
                        });
                    }
                }
            }
        }
    }
    FinCat::disambiguate(&objects, &mut morphisms);
    let identity = arrows
        .iter()
        .enumerate()
        .map(|(a, &f)| square_index[&(a, a, c.id(c.dom(f)), c.id(c.cod(f)))])
        .collect();
    let ends: Vec<(usize, usize)> = morphisms.iter().map(|m| (m.dom, m.cod)).collect();
    let cat = Arc::new(
        FinCat::from_fn(objects, morphisms, identity, |g, f| {
            let (u1, v1) = squares[f];
            let (u2, v2) = squares[g];
            square_index[&(ends[f].0, ends[g].1, c.comp(u2, u1), c.comp(v2, v1))]
        })
        .expect("arrow category within the size cap"),
    );
    let dom = Functor::new_unchecked(
        cat.clone(),
        c.clone(),
        arrows.iter().map(|&f| c.dom(f)).collect(),
        squares.iter().map(|s| s.0).collect(),
    );
    let cod = Functor::new_unchecked(
        cat.clone(),
        c.clone(),
        arrows.iter().map(|&f| c.cod(f)).collect(),
        squares.iter().map(|s| s.1).collect(),
    );
    ArrowCat {
        base: c.clone(),
        cat,
        dom,
        cod,
        arrows,
        object_of,
        squares,
        square_index,
    }
}

/// The arrow category `C^𝟚`: objects are morphisms, morphisms commuting squares.
pub fn arrow_cat(c: &Arc<FinCat>) -> ArrowCat {
    arrow_like(c, |_| true)
}

/// `C^𝕀`: the full subcategory of `C^𝟚` on isomorphisms.
pub fn iso_cat(c: &Arc<FinCat>) -> ArrowCat {
    arrow_like(c, |f| c.is_iso(f))
}

/// The strict pullback `A ×_C B` of `F : A → C ← B : G`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub cat: Arc<FinCat>,
    pub left: Functor,
    pub right: Functor,
    object_index: HashMap<(usize, usize), usize>,
    morphism_index: HashMap<(usize, usize), usize>,
}

impl Pullback {
    pub fn object(&self, a: usize, b: usize) -> Option<usize> {
        self.object_index.get(&(a, b)).copied()
    }

    pub fn morphism(&self, f: usize, g: usize) -> Option<usize> {
        self.morphism_index.get(&(f, g)).copied()
    }
}

pub fn pullback_cat(f: &Functor, g: &Functor) -> Pullback {
    assert!(*f.target == *g.target, "pullback of functors with different targets");
    let (a, b) = (&f.source, &g.source);
    let mut objects = Vec::new();
    let mut pairs = Vec::new();
    let mut object_index = HashMap::new();
    for x in 0..a.object_count() {
        for y in 0..b.object_count() {
            if f.obj[x] == g.obj[y] {
                object_index.insert((x, y), objects.len());
                pairs.push((x, y));
                objects.push(format!("({},{})", a.object_name(x), b.object_name(y)));
            }
        }
    }
    let mut morphisms = Vec::new();
    let mut mpairs = Vec::new();
    let mut morphism_index = HashMap::new();
    for u in 0..a.morphism_count() {
        for v in 0..b.morphism_count() {
            if f.mor[u] == g.mor[v] {
                morphism_index.insert((u, v), morphisms.len());
                mpairs.push((u, v));
                morphisms.push(Morphism {
                    name: format!("({},{})", a.morphism_name(u), b.morphism_name(v)),
                    dom: object_index[&(a.dom(u), b.dom(v))],
                    cod: object_index[&(a.cod(u), b.cod(v))],
                });
            }
        }
    }
    FinCat::disambiguate(&objects, &mut morphisms);
    let identity = pairs
        .iter()
        .map(|&(x, y)| morphism_index[&(a.id(x), b.id(y))])
        .collect();
    let cat = Arc::new(
        FinCat::from_fn(objects, morphisms, identity, |p, q| {
            let (u1, v1) = mpairs[q];
            let (u2, v2) = mpairs[p];
            morphism_index[&(a.comp(u2, u1), b.comp(v2, v1))]
        })
        .expect("pullback within the size cap"),
    );
    let left = Functor::new_unchecked(
        cat.clone(),
        a.clone(),
        pairs.iter().map(|p| p.0).collect(),
        mpairs.iter().map(|p| p.0).collect(),
    );
    let right = Functor::new_unchecked(
        cat.clone(),
        b.clone(),
        pairs.iter().map(|p| p.1).collect(),
        mpairs.iter().map(|p| p.1).collect(),
    );
    Pullback {
        cat,
        left,
        right,
        object_index,
        morphism_index,
    }
}

/// A witness that `e` is not cartesian: some `e'` and `b` with the wrong number
/// of factorizations `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartesianFailure {
    pub other: usize,
    pub base: usize,
    pub factorizations: usize,
}

/// Decide whether `e : x → y` is cartesian for `p : E → B`: every `e' : z → y` and
/// `b : p z → p x` with `p(e) ∘ b = p(e')` factor as `e' = e ∘ ℓ` with `p ℓ = b` for
/// exactly one `ℓ`.
pub fn cartesian_failure(p: &Functor, e: usize) -> Option<CartesianFailure> {
    let (ec, bc) = (&*p.source, &*p.target);
    let (x, y) = (ec.dom(e), ec.cod(e));
    for &e2 in ec.incoming(y) {
        let z = ec.dom(e2);
        for &b in bc.hom(p.obj[z], p.obj[x]) {
            if bc.comp(p.mor[e], b) != p.mor[e2] {
                continue;
            }
            let n = ec
                .hom(z, x)
                .iter()
                .filter(|&&l| p.mor[l] == b && ec.comp(e, l) == e2)
                .count();
            if n != 1 {
                return Some(CartesianFailure {
                    other: e2,
                    base: b,
                    factorizations: n,
                });
            }
        }
    }
    None
}

pub fn is_cartesian(p: &Functor, e: usize) -> bool {
    cartesian_failure(p, e).is_none()
}

/// Cocartesian for `p` is cartesian for `p^op`.
pub fn is_cocartesian(p: &Functor, e: usize) -> bool {
    is_cartesian(&p.op(), e)
}

/// One chosen cocartesian lift per (object, base morphism out of its image).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocartesianLifts {
    lifts: HashMap<(usize, usize), usize>,
}

impl CocartesianLifts {
    pub fn get(&self, x: usize, f: usize) -> Option<usize> {
        self.lifts.get(&(x, f)).copied()
    }

    pub fn len(&self) -> usize {
        self.lifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }
}

/// Choose a cocartesian lift of every base morphism at every object over its
/// domain: identities lift to identities, anything else to the first cocartesian
/// candidate in morphism order. Fails with the first `(x, f)` that has no lift.
pub fn cocartesian_lifts(p: &Functor) -> Result<CocartesianLifts, (usize, usize)> {
    let pop = p.op();
    let (ec, bc) = (&*p.source, &*p.target);
    let mut lifts = HashMap::new();
    for x in 0..ec.object_count() {
        for &f in bc.outgoing(p.obj[x]) {
            let chosen = if bc.is_identity(f) {
                Some(ec.id(x))
            } else {
                ec.outgoing(x)
                    .iter()
                    .copied()
                    .find(|&e| p.mor[e] == f && is_cartesian(&pop, e))
            };
            match chosen {
                Some(e) => {
                    lifts.insert((x, f), e);
                }
                None => return Err((x, f)),
            }
        }
    }
    Ok(CocartesianLifts { lifts })
}

pub fn has_cocartesian_lifts(p: &Functor) -> bool {
    cocartesian_lifts(p).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_categories_are_valid() {
        terminal().validate().unwrap();
        discrete(vec!["a".into(), "b".into()]).validate().unwrap();
        for n in 0..5 {
            ordinal(n).validate().unwrap();
        }
        assert_eq!(ordinal(3).morphism_count(), 6);
    }

    #[test]
    fn arrow_cat_of_walking_arrow() {
        let two = Arc::new(ordinal(2));
        let a = arrow_cat(&two);
        a.cat.validate().unwrap();
        assert_eq!(a.cat.object_count(), 3);
        a.dom.validate().unwrap();
        a.cod.validate().unwrap();
    }

    #[test]
    fn iso_cat_of_poset_is_discrete() {
        let three = Arc::new(ordinal(3));
        let i = iso_cat(&three);
        // Only identities are isomorphisms, so C^𝕀 has one object per object of C
        // and a square id_x → id_y for each x ≤ y.
        assert_eq!(i.cat.object_count(), 3);
        assert_eq!(i.cat.morphism_count(), 6);
    }

    #[test]
    fn pullback_over_point_is_product() {
        let two = Arc::new(ordinal(2));
        let three = Arc::new(ordinal(3));
        let p = pullback_cat(&Functor::to_terminal(&two), &Functor::to_terminal(&three));
        p.cat.validate().unwrap();
        assert_eq!(p.cat.object_count(), 6);
        assert_eq!(p.cat.morphism_count(), 3 * 6);
    }

    #[test]
    fn identities_are_cartesian() {
        let two = Arc::new(ordinal(2));
        let a = arrow_cat(&two);
        for x in 0..a.cat.object_count() {
            assert!(is_cartesian(&a.cod, a.cat.id(x)));
        }
    }
}
