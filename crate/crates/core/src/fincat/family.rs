//! Category-valued functors on a finite base (families), their sections, the
//! Grothendieck construction, and the hom family with its identity section.

use std::collections::HashMap;
use std::sync::Arc;

use super::{discrete, FinCat, FinCatError, Functor, Morphism};
use crate::parser::{FamilyBlock, SectionBlock};

/// A functor `base → Cat`: one fiber per object, one transition functor per morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub base: Arc<FinCat>,
    pub fibers: Vec<Arc<FinCat>>,
    pub maps: Vec<Functor>,
}

fn ferr(s: impl Into<String>) -> FinCatError {
    FinCatError::Family(s.into())
}

fn serr(s: impl Into<String>) -> FinCatError {
    FinCatError::Section(s.into())
}

impl Family {
    pub fn new(base: Arc<FinCat>, fibers: Vec<Arc<FinCat>>, maps: Vec<Functor>) -> Result<Self, FinCatError> {
        let f = Family { base, fibers, maps };
        f.validate()?;
        Ok(f)
    }

    /// Transition functors go between the right fibers, are valid functors, and
    /// compose strictly: `F(id) = id` and `F(g ∘ f) = F(g) ∘ F(f)`.
    pub fn validate(&self) -> Result<(), FinCatError> {
        let b = &*self.base;
        if self.fibers.len() != b.object_count() || self.maps.len() != b.morphism_count() {
            return Err(ferr("sizes do not match the base"));
        }
        for m in 0..b.morphism_count() {
            let f = &self.maps[m];
            if *f.source != *self.fibers[b.dom(m)] || *f.target != *self.fibers[b.cod(m)] {
                return Err(ferr(format!("transition along `{}` has the wrong fibers", b.morphism_name(m))));
            }
            f.validate().map_err(|e| ferr(format!("transition along `{}`: {e}", b.morphism_name(m))))?;
        }
        for x in 0..b.object_count() {
            if self.maps[b.id(x)] != Functor::identity(&self.fibers[x]) {
                return Err(ferr(format!("transition along `{}` is not the identity", b.morphism_name(b.id(x)))));
            }
        }
        for (g, f) in b.composable_pairs() {
            if self.maps[b.comp(g, f)] != self.maps[g].after(&self.maps[f]) {
                return Err(ferr(format!(
                    "not functorial on {} ∘ {}",
                    b.morphism_name(g),
                    b.morphism_name(f)
                )));
            }
        }
        Ok(())
    }

    /// The constant family with identity transitions.
    pub fn constant(base: &Arc<FinCat>, fiber: &Arc<FinCat>) -> Self {
        Family {
            base: base.clone(),
            fibers: vec![fiber.clone(); base.object_count()],
            maps: vec![Functor::identity(fiber); base.morphism_count()],
        }
    }

    /// A family over the terminal category.
    pub fn closed(fiber: &Arc<FinCat>) -> Self {
        Family::constant(&Arc::new(super::terminal()), fiber)
    }

    /// Precompose with `g : Δ → base`.
    pub fn reindex(&self, g: &Functor) -> Family {
        Family {
            base: g.source.clone(),
            fibers: g.obj.iter().map(|&x| self.fibers[x].clone()).collect(),
            maps: g.mor.iter().map(|&m| self.maps[m].clone()).collect(),
        }
    }

    /// Postcompose with `op : Cat → Cat`.
    pub fn op(&self) -> Family {
        let fibers: Vec<Arc<FinCat>> = self.fibers.iter().map(|c| Arc::new(c.op())).collect();
        self.with_fibers(fibers, |f| (f.obj.clone(), f.mor.clone()))
    }

    /// Postcompose with `core : Cat → Cat`.
    pub fn core(&self) -> Family {
        let fibers: Vec<Arc<FinCat>> = self.fibers.iter().map(|c| Arc::new(c.core())).collect();
        self.with_fibers(fibers, |f| (f.obj.clone(), f.obj.clone()))
    }

    fn with_fibers(&self, fibers: Vec<Arc<FinCat>>, maps: impl Fn(&Functor) -> (Vec<usize>, Vec<usize>)) -> Family {
        let b = &self.base;
        let maps = (0..b.morphism_count())
            .map(|m| {
                let (obj, mor) = maps(&self.maps[m]);
                Functor::new_unchecked(fibers[b.dom(m)].clone(), fibers[b.cod(m)].clone(), obj, mor)
            })
            .collect();
        Family {
            base: self.base.clone(),
            fibers,
            maps,
        }
    }

    /// Build from a parsed block. Transitions of identities default to identities
    /// and transitions of composites are derived from their factors.
    pub fn from_block(
        block: &FamilyBlock,
        base: Arc<FinCat>,
        cats: &HashMap<String, Arc<FinCat>>,
        functors: &HashMap<String, Functor>,
    ) -> Result<Self, FinCatError> {
        let mut fibers = vec![None; base.object_count()];
        for (x, c) in &block.fibers {
            let cat = cats.get(c).ok_or_else(|| FinCatError::Unknown(c.clone()))?;
            fibers[base.obj(x)?] = Some(cat.clone());
        }
        let fibers: Vec<Arc<FinCat>> = fibers
            .into_iter()
            .enumerate()
            .map(|(x, c)| c.ok_or_else(|| ferr(format!("`{}` has no fiber at `{}`", block.name, base.object_name(x)))))
            .collect::<Result<_, _>>()?;
        let mut maps: Vec<Option<Functor>> = vec![None; base.morphism_count()];
        for x in 0..base.object_count() {
            maps[base.id(x)] = Some(Functor::identity(&fibers[x]));
        }
        for (m, f) in &block.maps {
            let f = functors.get(f).ok_or_else(|| FinCatError::Unknown(f.clone()))?;
            let m = base.mor(m)?;
            // Share the fiber allocations so comparisons stay cheap.
            maps[m] = Some(Functor::new_unchecked(
                fibers[base.dom(m)].clone(),
                fibers[base.cod(m)].clone(),
                f.obj.clone(),
                f.mor.clone(),
            ));
            if *f.source != *fibers[base.dom(m)] || *f.target != *fibers[base.cod(m)] {
                return Err(ferr(format!(
                    "`{}`: transition along `{}` has the wrong fibers",
                    block.name,
                    base.morphism_name(m)
                )));
            }
        }
        fill_composites(&base, &mut maps, |g, f| g.after(f));
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(m, f)| {
                f.ok_or_else(|| ferr(format!("`{}` has no transition along `{}`", block.name, base.morphism_name(m))))
            })
            .collect::<Result<_, _>>()?;
        Family::new(base, fibers, maps).map_err(|e| ferr(format!("`{}`: {e}", block.name)))
    }
}

/// Fill missing entries `h = g ∘ f` from known `g` and `f`, until nothing changes.
fn fill_composites<T: Clone>(base: &FinCat, vals: &mut [Option<T>], compose: impl Fn(&T, &T) -> T) {
    loop {
        let mut changed = false;
        for (g, f) in base.composable_pairs() {
            let h = base.comp(g, f);
            if vals[h].is_none() {
                if let (Some(a), Some(b)) = (&vals[g], &vals[f]) {
                    vals[h] = Some(compose(a, b));
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// A natural family of functors between two families over the same base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMap {
    pub source: Family,
    pub target: Family,
    pub components: Vec<Functor>,
}

impl FamilyMap {
    /// `core ∘ T ⇒ T`, the inclusion `i`.
    pub fn core_inclusion(t: &Family) -> FamilyMap {
        let source = t.core();
        let components = (0..t.base.object_count())
            .map(|x| {
                let c = &t.fibers[x];
                Functor::new_unchecked(
                    source.fibers[x].clone(),
                    c.clone(),
                    (0..c.object_count()).collect(),
                    (0..c.object_count()).map(|o| c.id(o)).collect(),
                )
            })
            .collect();
        FamilyMap {
            source,
            target: t.clone(),
            components,
        }
    }

    /// `core ∘ T ⇒ op ∘ T`, the inclusion `i^op`.
    pub fn op_inclusion(t: &Family) -> FamilyMap {
        let source = t.core();
        let target = t.op();
        let components = (0..t.base.object_count())
            .map(|x| {
                let c = &t.fibers[x];
                Functor::new_unchecked(
                    source.fibers[x].clone(),
                    target.fibers[x].clone(),
                    (0..c.object_count()).collect(),
                    (0..c.object_count()).map(|o| c.id(o)).collect(),
                )
            })
            .collect();
        FamilyMap {
            source,
            target,
            components,
        }
    }

    pub fn validate(&self) -> Result<(), FinCatError> {
        let b = &self.source.base;
        for m in 0..b.morphism_count() {
            let left = self.target.maps[m].after(&self.components[b.dom(m)]);
            let right = self.components[b.cod(m)].after(&self.source.maps[m]);
            if left != right {
                return Err(ferr(format!("family map not natural at `{}`", b.morphism_name(m))));
            }
        }
        Ok(())
    }
}

/// A section of the Grothendieck projection of a family `T`: an object `a_γ` of
/// each fiber and, for each `φ : γ → γ'`, a fiber morphism `a_φ : T(φ)(a_γ) → a_γ'`,
/// with `a_id = id` and `a_{ψφ} = a_ψ ∘ T(ψ)(a_φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub family: Family,
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

impl Section {
    pub fn new(family: Family, objects: Vec<usize>, morphisms: Vec<usize>) -> Result<Self, FinCatError> {
        let s = Section {
            family,
            objects,
            morphisms,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FinCatError> {
        let t = &self.family;
        let b = &*t.base;
        if self.objects.len() != b.object_count() || self.morphisms.len() != b.morphism_count() {
            return Err(serr("sizes do not match the base"));
        }
        for m in 0..b.morphism_count() {
            let (x, y) = (b.dom(m), b.cod(m));
            let fiber = &t.fibers[y];
            let a = self.morphisms[m];
            if a >= fiber.morphism_count()
                || fiber.dom(a) != t.maps[m].obj[self.objects[x]]
                || fiber.cod(a) != self.objects[y]
            {
                return Err(serr(format!("component along `{}` has the wrong endpoints", b.morphism_name(m))));
            }
        }
        for x in 0..b.object_count() {
            if self.morphisms[b.id(x)] != t.fibers[x].id(self.objects[x]) {
                return Err(serr(format!("component at `{}` is not an identity", b.morphism_name(b.id(x)))));
            }
        }
        for (g, f) in b.composable_pairs() {
            if self.morphisms[b.comp(g, f)] != self.compose_along(g, f) {
                return Err(serr(format!(
                    "not functorial on {} ∘ {}",
                    b.morphism_name(g),
                    b.morphism_name(f)
                )));
            }
        }
        Ok(())
    }

    /// `a_g ∘ T(g)(a_f)`.
    fn compose_along(&self, g: usize, f: usize) -> usize {
        let t = &self.family;
        let z = t.base.cod(g);
        t.fibers[z].comp(self.morphisms[g], t.maps[g].mor[self.morphisms[f]])
    }

    /// Every component is an identity, i.e. `T(φ)(a_γ) = a_γ'` on the nose.
    pub fn is_strict(&self) -> bool {
        let t = &self.family;
        (0..t.base.morphism_count()).all(|m| t.fibers[t.base.cod(m)].is_identity(self.morphisms[m]))
    }

    /// Restriction along `g : Δ → base`.
    pub fn reindex(&self, g: &Functor) -> Section {
        Section {
            family: self.family.reindex(g),
            objects: g.obj.iter().map(|&x| self.objects[x]).collect(),
            morphisms: g.mor.iter().map(|&m| self.morphisms[m]).collect(),
        }
    }

    /// Whisker with a family map.
    pub fn map(&self, eta: &FamilyMap) -> Section {
        let b = &self.family.base;
        Section {
            family: eta.target.clone(),
            objects: (0..b.object_count())
                .map(|x| eta.components[x].obj[self.objects[x]])
                .collect(),
            morphisms: (0..b.morphism_count())
                .map(|m| eta.components[b.cod(m)].mor[self.morphisms[m]])
                .collect(),
        }
    }

    /// A section of a family over the terminal category is an object of its fiber.
    pub fn point(family: &Family, x: usize) -> Section {
        debug_assert_eq!(family.base.object_count(), 1);
        Section {
            family: family.clone(),
            objects: vec![x],
            morphisms: vec![family.fibers[0].id(x)],
        }
    }

    /// Build from a parsed block. Unlisted components are derived from composites
    /// or, when the relevant fiber hom-set has exactly one element, forced.
    pub fn from_block(block: &SectionBlock, family: &Family) -> Result<Self, FinCatError> {
        let b = &*family.base;
        let mut objects = vec![usize::MAX; b.object_count()];
        for (x, y) in &block.objects {
            let x = b.obj(x)?;
            objects[x] = family.fibers[x].obj(y)?;
        }
        if let Some(x) = objects.iter().position(|&o| o == usize::MAX) {
            return Err(serr(format!("`{}` has no value at `{}`", block.name, b.object_name(x))));
        }
        let mut morphisms: Vec<Option<usize>> = vec![None; b.morphism_count()];
        for x in 0..b.object_count() {
            morphisms[b.id(x)] = Some(family.fibers[x].id(objects[x]));
        }
        for (m, a) in &block.arrows {
            let m = b.mor(m)?;
            morphisms[m] = Some(family.fibers[b.cod(m)].mor(a)?);
        }
        let partial = Section {
            family: family.clone(),
            objects: objects.clone(),
            morphisms: vec![0; b.morphism_count()],
        };
        loop {
            let mut changed = false;
            for (g, f) in b.composable_pairs() {
                let h = b.comp(g, f);
                if morphisms[h].is_none() {
                    if let (Some(ag), Some(af)) = (morphisms[g], morphisms[f]) {
                        let z = b.cod(g);
                        morphisms[h] = Some(family.fibers[z].comp(ag, family.maps[g].mor[af]));
                        changed = true;
                    }
                }
            }
            for m in 0..b.morphism_count() {
                if morphisms[m].is_none() {
                    let fiber = &partial.family.fibers[b.cod(m)];
                    let from = family.maps[m].obj[objects[b.dom(m)]];
                    if let [only] = fiber.hom(from, objects[b.cod(m)]) {
                        morphisms[m] = Some(*only);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let morphisms = morphisms
            .into_iter()
            .enumerate()
            .map(|(m, a)| a.ok_or_else(|| serr(format!("`{}` needs a component along `{}`", block.name, b.morphism_name(m)))))
            .collect::<Result<_, _>>()?;
        Section::new(family.clone(), objects, morphisms).map_err(|e| serr(format!("`{}`: {e}", block.name)))
    }
}

/// The Grothendieck construction `base.F` of a family, with its projection.
#[derive(Clone, Debug)]
pub struct GrothTotal {
    pub family: Family,
    pub total: Arc<FinCat>,
    pub projection: Functor,
    objects: Vec<(usize, usize)>,
    object_index: HashMap<(usize, usize), usize>,
    morphisms: Vec<(usize, usize)>,
    morphism_index: HashMap<(usize, usize, usize), usize>,
}

impl GrothTotal {
    /// Objects are pairs `(X, Y)` with `Y` in `F(X)`; morphisms `(f, g) : (X, Y) → (X', Y')`
    /// pair `f : X → X'` with `g : F(f)(Y) → Y'`, composed as
    /// `(f', g') ∘ (f, g) = (f' ∘ f, g' ∘ F(f')(g))`.
    ///
    /// Over the terminal category names are taken from the fiber, so `*.C` is `C`.
    pub fn new(family: &Family) -> Result<GrothTotal, FinCatError> {
        family.validate()?;
        let b = &*family.base;
        let over_point = b.object_count() == 1 && b.morphism_count() == 1;
        let mut objects = Vec::new();
        let mut names = Vec::new();
        let mut object_index = HashMap::new();
        for x in 0..b.object_count() {
            let fiber = &family.fibers[x];
            for y in 0..fiber.object_count() {
                object_index.insert((x, y), objects.len());
                objects.push((x, y));
                names.push(if over_point {
                    fiber.object_name(y).to_string()
                } else {
                    format!("({},{})", b.object_name(x), fiber.object_name(y))
                });
            }
        }
        let mut morphisms = Vec::new();
        let mut records = Vec::new();
        let mut morphism_index = HashMap::new();
        for f in 0..b.morphism_count() {
            let (x, x2) = (b.dom(f), b.cod(f));
            let (fiber, fiber2) = (&family.fibers[x], &family.fibers[x2]);
            for y in 0..fiber.object_count() {
                let moved = family.maps[f].obj[y];
                for &g in fiber2.outgoing(moved) {
                    let dom = object_index[&(x, y)];
                    let cod = object_index[&(x2, fiber2.cod(g))];
                    morphism_index.insert((dom, f, g), morphisms.len());
                    records.push((f, g));
                    morphisms.push(Morphism {
                        name: if over_point {
                            fiber2.morphism_name(g).to_string()
                        } else {
                            format!("({},{})", b.morphism_name(f), fiber2.morphism_name(g))
                        },
                        dom,
                        cod,
                    });
                }
            }
        }
        FinCat::disambiguate(&names, &mut morphisms);
        let identity: Vec<usize> = objects
            .iter()
            .map(|&(x, y)| morphism_index[&(object_index[&(x, y)], b.id(x), family.fibers[x].id(y))])
            .collect();
        let doms: Vec<usize> = morphisms.iter().map(|m| m.dom).collect();
        let compose = |g2: usize, g1: usize| {
            let (f1, h1) = records[g1];
            let (f2, h2) = records[g2];
            let f = b.comp(f2, f1);
            let z = b.cod(f2);
            let h = family.fibers[z].comp(h2, family.maps[f2].mor[h1]);
            morphism_index[&(doms[g1], f, h)]
        };
        let total = Arc::new(FinCat::from_fn(names, morphisms, identity, compose)?);
        let projection = Functor::new_unchecked(
            total.clone(),
            family.base.clone(),
            objects.iter().map(|o| o.0).collect(),
            records.iter().map(|m| m.0).collect(),
        );
        Ok(GrothTotal {
            family: family.clone(),
            total,
            projection,
            objects,
            object_index,
            morphisms: records,
            morphism_index,
        })
    }

    pub fn object(&self, x: usize, y: usize) -> usize {
        self.object_index[&(x, y)]
    }

    /// The morphism `(f, g)` out of total object `dom`.
    pub fn morphism(&self, dom: usize, f: usize, g: usize) -> usize {
        self.morphism_index[&(dom, f, g)]
    }

    pub fn find_morphism(&self, dom: usize, f: usize, g: usize) -> Option<usize> {
        self.morphism_index.get(&(dom, f, g)).copied()
    }

    pub fn object_pair(&self, o: usize) -> (usize, usize) {
        self.objects[o]
    }

    pub fn morphism_pair(&self, m: usize) -> (usize, usize) {
        self.morphisms[m]
    }

    /// The chosen cocartesian lift `(f, id)` of `f` at `o`.
    pub fn chosen_lift(&self, o: usize, f: usize) -> usize {
        let (_, y) = self.objects[o];
        let moved = self.family.maps[f].obj[y];
        self.morphism(o, f, self.family.fibers[self.family.base.cod(f)].id(moved))
    }

    /// The functor `Γ → base.F` sending `γ ↦ (G γ, a_γ)` and `φ ↦ (G φ, a_φ)`, for
    /// `g : Γ → base` and a section `a` of `F ∘ g`.
    pub fn pair_functor(&self, g: &Functor, a: &Section) -> Functor {
        let gamma = &g.source;
        let obj: Vec<usize> = (0..gamma.object_count())
            .map(|x| self.object(g.obj[x], a.objects[x]))
            .collect();
        let mor = (0..gamma.morphism_count())
            .map(|m| self.morphism(obj[gamma.dom(m)], g.mor[m], a.morphisms[m]))
            .collect();
        Functor::new_unchecked(gamma.clone(), self.total.clone(), obj, mor)
    }

    /// `γ ↦ (γ, a_γ)` for a section of the family itself.
    pub fn section_functor(&self, a: &Section) -> Functor {
        self.pair_functor(&Functor::identity(&self.family.base), a)
    }

    /// The tautological section of `F ∘ p` over the total category:
    /// `(X, Y) ↦ Y` and `(f, g) ↦ g`.
    pub fn diagonal(&self) -> Section {
        Section {
            family: self.family.reindex(&self.projection),
            objects: self.objects.iter().map(|o| o.1).collect(),
            morphisms: self.morphisms.iter().map(|m| m.1).collect(),
        }
    }

    /// Read a functor `Γ → base.F` lying over `g = p ∘ h` as the section of `F ∘ g`.
    pub fn split(&self, h: &Functor) -> (Functor, Section) {
        let g = self.projection.after(h);
        let a = Section {
            family: self.family.reindex(&g),
            objects: h.obj.iter().map(|&o| self.objects[o].1).collect(),
            morphisms: h.mor.iter().map(|&m| self.morphisms[m].1).collect(),
        };
        (g, a)
    }
}

/// The set-valued family `γ ↦ hom_{T γ}(s_γ, t_γ)`, as discrete categories whose
/// objects are the fiber morphisms in hom-set order. Along `φ` a morphism `f`
/// goes to `t_φ ∘ T(φ)(f) ∘ s_φ`.
pub fn hom_functor(t: &Family, s: &Section, u: &Section) -> Result<Family, FinCatError> {
    let b = &t.base;
    if *s.family.base != **b || *u.family.base != **b {
        return Err(ferr("hom: sections live over a different base"));
    }
    if s.family != t.op() {
        return Err(ferr("hom: source must be a section of op ∘ T"));
    }
    if u.family != *t {
        return Err(ferr("hom: target must be a section of T"));
    }
    let homs: Vec<Vec<usize>> = (0..b.object_count())
        .map(|x| t.fibers[x].hom(s.objects[x], u.objects[x]).to_vec())
        .collect();
    let fibers: Vec<Arc<FinCat>> = (0..b.object_count())
        .map(|x| {
            let names = homs[x].iter().map(|&m| t.fibers[x].morphism_name(m).to_string()).collect();
            Arc::new(discrete(names))
        })
        .collect();
    let mut maps = Vec::with_capacity(b.morphism_count());
    for m in 0..b.morphism_count() {
        let (x, y) = (b.dom(m), b.cod(m));
        let fiber = &t.fibers[y];
        let mut obj = Vec::with_capacity(homs[x].len());
        for &f in &homs[x] {
            // s_φ is a morphism s_γ' → T(φ)(s_γ) of the fiber (a morphism of its opposite).
            let moved = fiber.comp(u.morphisms[m], fiber.comp(t.maps[m].mor[f], s.morphisms[m]));
            let k = homs[y]
                .iter()
                .position(|&h| h == moved)
                .ok_or_else(|| ferr("hom: transported morphism left the hom-set"))?;
            obj.push(k);
        }
        let mor = obj.clone();
        maps.push(Functor::new_unchecked(fibers[x].clone(), fibers[y].clone(), obj, mor));
    }
    Family::new(b.clone(), fibers, maps)
}

/// The section `γ ↦ id_{t_γ}` of `hom(i^op ∘ t, i ∘ t)` for a section `t` of `core ∘ T`.
pub fn identity_section(t: &Family, point: &Section) -> Result<(Family, Section), FinCatError> {
    if point.family != t.core() {
        return Err(serr("identity: the point must be a section of core ∘ T"));
    }
    let s = point.map(&FamilyMap::op_inclusion(t));
    let u = point.map(&FamilyMap::core_inclusion(t));
    let hom = hom_functor(t, &s, &u)?;
    let b = &t.base;
    let objects: Vec<usize> = (0..b.object_count())
        .map(|x| {
            let id = t.fibers[x].id(point.objects[x]);
            t.fibers[x]
                .hom(point.objects[x], point.objects[x])
                .iter()
                .position(|&m| m == id)
                .expect("identity lies in its hom-set")
        })
        .collect();
    let morphisms = (0..b.morphism_count())
        .map(|m| hom.fibers[b.cod(m)].id(objects[b.cod(m)]))
        .collect();
    let sec = Section::new(hom.clone(), objects, morphisms)?;
    Ok((hom, sec))
}
