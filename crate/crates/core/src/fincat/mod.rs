//! Finite categories with explicit composition tables, and the constructions
//! the semantics needs: core/op, functors, families over a base, their sections,
//! the Grothendieck construction, hom families, arrow/iso/pullback categories and
//! (co)cartesian morphisms.

mod constructions;
mod family;
mod functor;
mod library;
mod search;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::parser::{ArrowDecl, CatBlock, Composite};

pub use constructions::{
    arrow_cat, cocartesian_lifts, discrete, has_cocartesian_lifts, is_cartesian, is_cocartesian,
    iso_cat, ordinal, pullback_cat, terminal, ArrowCat, CocartesianLifts, Pullback,
};
pub use family::{hom_functor, identity_section, Family, FamilyMap, GrothTotal, Section};
pub use functor::{Functor, NatTrans};
pub use library::Library;
pub use search::{pullback_failure, FunctorSearch, SearchError, DEFAULT_NODE_CAP};

pub const MAX_OBJECTS: usize = 64;
pub const MAX_MORPHISMS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub name: String,
    pub dom: usize,
    pub cod: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FinCatError {
    #[error("{objects} objects and {morphisms} morphisms exceed the size cap")]
    TooLarge { objects: usize, morphisms: usize },
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("`{0}` is not an identity of its object")]
    BadIdentity(String),
    #[error("composite {g} ∘ {f} is missing")]
    MissingComposite { g: String, f: String },
    #[error("composite {g} ∘ {f} given for non-composable arrows")]
    NotComposable { g: String, f: String },
    #[error("composite {g} ∘ {f} = {h} has the wrong endpoints")]
    BadEndpoints { g: String, f: String, h: String },
    #[error("identity law fails for `{f}` with `{id}`")]
    IdentityLaw { id: String, f: String },
    #[error("associativity fails for ({h}, {g}, {f})")]
    Associativity { h: String, g: String, f: String },
    #[error("conflicting composites for {g} ∘ {f}: {h1} and {h2}")]
    Conflict {
        g: String,
        f: String,
        h1: String,
        h2: String,
    },
    #[error("functor `{name}`: {reason}")]
    Functor { name: String, reason: String },
    #[error("natural transformation: {0}")]
    Natural(String),
    #[error("family: {0}")]
    Family(String),
    #[error("section: {0}")]
    Section(String),
}

/// A finite category. Composition is total on composable pairs and stored as a
/// table; the remaining fields are indexes derived from it.
#[derive(Clone)]
pub struct FinCat {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identity: Vec<usize>,
    compose: HashMap<(usize, usize), usize>,
    object_index: HashMap<String, usize>,
    morphism_index: HashMap<String, usize>,
    hom: HashMap<(usize, usize), Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl PartialEq for FinCat {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.morphisms == other.morphisms
            && self.identity == other.identity
            && self.compose == other.compose
    }
}

impl Eq for FinCat {}

impl fmt::Debug for FinCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinCat")
            .field("objects", &self.objects)
            .field("morphisms", &self.morphisms.len())
            .finish()
    }
}

impl FinCat {
    /// Assemble a category from raw tables. Structural checks only; use
    /// [`FinCat::validate`] for the category laws.
    pub fn from_parts(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identity: Vec<usize>,
        compose: HashMap<(usize, usize), usize>,
    ) -> Result<FinCat, FinCatError> {
        if objects.len() > MAX_OBJECTS || morphisms.len() > MAX_MORPHISMS {
            return Err(FinCatError::TooLarge {
                objects: objects.len(),
                morphisms: morphisms.len(),
            });
        }
        let mut object_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            if object_index.insert(o.clone(), i).is_some() {
                return Err(FinCatError::Duplicate(o.clone()));
            }
        }
        let mut morphism_index = HashMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            if m.dom >= objects.len() || m.cod >= objects.len() {
                return Err(FinCatError::Unknown(m.name.clone()));
            }
            if morphism_index.insert(m.name.clone(), i).is_some() {
                return Err(FinCatError::Duplicate(m.name.clone()));
            }
        }
        let mut hom: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut outgoing = vec![Vec::new(); objects.len()];
        let mut incoming = vec![Vec::new(); objects.len()];
        for (i, m) in morphisms.iter().enumerate() {
            hom.entry((m.dom, m.cod)).or_default().push(i);
            outgoing[m.dom].push(i);
            incoming[m.cod].push(i);
        }
        if identity.len() != objects.len() {
            return Err(FinCatError::BadIdentity(format!("{} identities", identity.len())));
        }
        for (x, &i) in identity.iter().enumerate() {
            match morphisms.get(i) {
                Some(m) if m.dom == x && m.cod == x => {}
                _ => return Err(FinCatError::BadIdentity(objects[x].clone())),
            }
        }
        Ok(FinCat {
            objects,
            morphisms,
            identity,
            compose,
            object_index,
            morphism_index,
            hom,
            outgoing,
            incoming,
        })
    }

    /// Build a category whose composition is given by a function on composable pairs.
    pub fn from_fn(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identity: Vec<usize>,
        compose: impl Fn(usize, usize) -> usize,
    ) -> Result<FinCat, FinCatError> {
        let mut c = FinCat::from_parts(objects, morphisms, identity, HashMap::new())?;
        let mut table = HashMap::new();
        for f in 0..c.morphisms.len() {
            for &g in &c.outgoing[c.morphisms[f].cod] {
                table.insert((g, f), compose(g, f));
            }
        }
        c.compose = table;
        Ok(c)
    }

    /// Rename duplicate morphism names `n` to `n@dom` so names stay unique.
    pub fn disambiguate(objects: &[String], morphisms: &mut [Morphism]) {
        let mut seen: HashMap<String, usize> = HashMap::new();
        for m in morphisms.iter() {
            *seen.entry(m.name.clone()).or_default() += 1;
        }
        let mut used: BTreeSet<String> = BTreeSet::new();
        for m in morphisms.iter_mut() {
            if seen[&m.name] > 1 {
                let mut name = format!("{}@{}", m.name, objects[m.dom]);
                let mut k = 1;
                while used.contains(&name) {
                    k += 1;
                    name = format!("{}@{}~{k}", m.name, objects[m.dom]);
                }
                m.name = name;
            }
            used.insert(m.name.clone());
        }
    }

    /// Build from a parsed block, filling in identities and their composites.
    pub fn from_block(block: &CatBlock) -> Result<FinCat, FinCatError> {
        let objects = block.objects.clone();
        let mut morphisms: Vec<Morphism> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| Morphism {
                name: format!("id_{o}"),
                dom: i,
                cod: i,
            })
            .collect();
        let identity: Vec<usize> = (0..objects.len()).collect();
        let oi = |n: &str| {
            objects
                .iter()
                .position(|o| o == n)
                .ok_or_else(|| FinCatError::Unknown(n.into()))
        };
        for ArrowDecl { name, dom, cod } in &block.arrows {
            morphisms.push(Morphism {
                name: name.clone(),
                dom: oi(dom)?,
                cod: oi(cod)?,
            });
        }
        let mut c = FinCat::from_parts(objects, morphisms, identity, HashMap::new())?;
        let mut table = HashMap::new();
        for m in 0..c.morphisms.len() {
            let (d, k) = (c.morphisms[m].dom, c.morphisms[m].cod);
            table.insert((m, c.identity[d]), m);
            table.insert((c.identity[k], m), m);
        }
        for Composite { g, f, h } in &block.composites {
            let (gi, fi, hi) = (c.mor(g)?, c.mor(f)?, c.mor(h)?);
            if c.morphisms[fi].cod != c.morphisms[gi].dom {
                return Err(FinCatError::NotComposable {
                    g: g.clone(),
                    f: f.clone(),
                });
            }
            if let Some(&prev) = table.get(&(gi, fi)) {
                if prev != hi {
                    return Err(FinCatError::Conflict {
                        g: g.clone(),
                        f: f.clone(),
                        h1: c.morphisms[prev].name.clone(),
                        h2: h.clone(),
                    });
                }
            }
            table.insert((gi, fi), hi);
        }
        c.compose = table;
        Ok(c)
    }

    /// Check endpoints, totality, identity laws and associativity exhaustively.
    pub fn validate(&self) -> Result<(), FinCatError> {
        let name = |m: usize| self.morphisms[m].name.clone();
        for (&(g, f), &h) in &self.compose {
            if self.morphisms[f].cod != self.morphisms[g].dom {
                return Err(FinCatError::NotComposable { g: name(g), f: name(f) });
            }
            if self.morphisms[h].dom != self.morphisms[f].dom || self.morphisms[h].cod != self.morphisms[g].cod {
                return Err(FinCatError::BadEndpoints {
                    g: name(g),
                    f: name(f),
                    h: name(h),
                });
            }
        }
        for f in 0..self.morphisms.len() {
            for &g in &self.outgoing[self.morphisms[f].cod] {
                if !self.compose.contains_key(&(g, f)) {
                    return Err(FinCatError::MissingComposite { g: name(g), f: name(f) });
                }
            }
        }
        for (f, m) in self.morphisms.iter().enumerate() {
            let (l, r) = (self.identity[m.cod], self.identity[m.dom]);
            if self.compose[&(l, f)] != f {
                return Err(FinCatError::IdentityLaw { id: name(l), f: name(f) });
            }
            if self.compose[&(f, r)] != f {
                return Err(FinCatError::IdentityLaw { id: name(r), f: name(f) });
            }
        }
        for f in 0..self.morphisms.len() {
            for &g in &self.outgoing[self.morphisms[f].cod] {
                let gf = self.compose[&(g, f)];
                for &h in &self.outgoing[self.morphisms[g].cod] {
                    let hg = self.compose[&(h, g)];
                    if self.compose[&(h, gf)] != self.compose[&(hg, f)] {
                        return Err(FinCatError::Associativity {
                            h: name(h),
                            g: name(g),
                            f: name(f),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn morphism_name(&self, m: usize) -> &str {
        &self.morphisms[m].name
    }

    pub fn obj(&self, name: &str) -> Result<usize, FinCatError> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    pub fn mor(&self, name: &str) -> Result<usize, FinCatError> {
        self.morphism_index
            .get(name)
            .copied()
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    pub fn dom(&self, m: usize) -> usize {
        self.morphisms[m].dom
    }

    pub fn cod(&self, m: usize) -> usize {
        self.morphisms[m].cod
    }

    pub fn id(&self, x: usize) -> usize {
        self.identity[x]
    }

    pub fn is_identity(&self, m: usize) -> bool {
        self.identity[self.morphisms[m].dom] == m
    }

    /// `g ∘ f`, or `None` when not composable.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.compose.get(&(g, f)).copied()
    }

    /// `g ∘ f`; panics on non-composable input.
    pub fn comp(&self, g: usize, f: usize) -> usize {
        match self.compose.get(&(g, f)) {
            Some(&h) => h,
            None => panic!(
                "{} ∘ {} is not composable",
                self.morphisms[g].name, self.morphisms[f].name
            ),
        }
    }

    /// Morphisms `x → y` in declaration order.
    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        self.hom.get(&(x, y)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn outgoing(&self, x: usize) -> &[usize] {
        &self.outgoing[x]
    }

    pub fn incoming(&self, x: usize) -> &[usize] {
        &self.incoming[x]
    }

    /// All composable pairs `(g, f)`.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.morphisms.len())
            .flat_map(move |f| self.outgoing[self.morphisms[f].cod].iter().map(move |&g| (g, f)))
    }

    pub fn is_iso(&self, f: usize) -> bool {
        self.inverse(f).is_some()
    }

    pub fn inverse(&self, f: usize) -> Option<usize> {
        let m = &self.morphisms[f];
        self.hom(m.cod, m.dom).iter().copied().find(|&g| {
            self.comp(g, f) == self.identity[m.dom] && self.comp(f, g) == self.identity[m.cod]
        })
    }

    /// The opposite category: same names and indices, endpoints swapped.
    pub fn op(&self) -> FinCat {
        let morphisms = self
            .morphisms
            .iter()
            .map(|m| Morphism {
                name: m.name.clone(),
                dom: m.cod,
                cod: m.dom,
            })
            .collect();
        let compose = self.compose.iter().map(|(&(g, f), &h)| ((f, g), h)).collect();
        FinCat::from_parts(self.objects.clone(), morphisms, self.identity.clone(), compose)
            .expect("op of a valid category")
    }

    /// The maximal discrete subcategory: objects and their identities.
    pub fn core(&self) -> FinCat {
        let morphisms = self
            .identity
            .iter()
            .map(|&i| self.morphisms[i].clone())
            .collect();
        let identity: Vec<usize> = (0..self.objects.len()).collect();
        let compose = identity.iter().map(|&i| ((i, i), i)).collect();
        FinCat::from_parts(self.objects.clone(), morphisms, identity, compose)
            .expect("core of a valid category")
    }

    /// The identity-on-objects inclusion `C^core → C`.
    pub fn core_inclusion(self: &std::sync::Arc<Self>) -> Functor {
        Functor::new_unchecked(
            std::sync::Arc::new(self.core()),
            self.clone(),
            (0..self.object_count()).collect(),
            self.identity.clone(),
        )
    }

    /// The identity-on-objects inclusion `C^core → C^op`.
    pub fn op_inclusion(self: &std::sync::Arc<Self>) -> Functor {
        Functor::new_unchecked(
            std::sync::Arc::new(self.core()),
            std::sync::Arc::new(self.op()),
            (0..self.object_count()).collect(),
            self.identity.clone(),
        )
    }

    /// Sorted, name-based text form; equal for categories equal up to the order
    /// in which objects and morphisms were listed.
    pub fn canonical(&self) -> String {
        let mut objects = self.objects.clone();
        objects.sort();
        let mut morphisms: Vec<String> = self
            .morphisms
            .iter()
            .map(|m| format!("{} : {} -> {}", m.name, self.objects[m.dom], self.objects[m.cod]))
            .collect();
        morphisms.sort();
        let mut composites: Vec<String> = self
            .compose
            .iter()
            .map(|(&(g, f), &h)| {
                format!(
                    "{} {} = {}",
                    self.morphisms[g].name, self.morphisms[f].name, self.morphisms[h].name
                )
            })
            .collect();
        composites.sort();
        let mut out = format!("objects {}\n", objects.join(" "));
        for m in morphisms {
            out.push_str(&format!("arrow {m}\n"));
        }
        for c in composites {
            out.push_str(&format!("compose {c}\n"));
        }
        out
    }

    /// A `.fincat` block for this category. Identities and their composites are
    /// implicit there, so identities must be named `id_x`.
    pub fn to_block(&self, name: &str) -> CatBlock {
        let arrows = self
            .morphisms
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_identity(*i))
            .map(|(_, m)| ArrowDecl {
                name: m.name.clone(),
                dom: self.objects[m.dom].clone(),
                cod: self.objects[m.cod].clone(),
            })
            .collect();
        let mut composites: Vec<Composite> = self
            .composable_pairs()
            .filter(|&(g, f)| !self.is_identity(g) && !self.is_identity(f))
            .map(|(g, f)| Composite {
                g: self.morphisms[g].name.clone(),
                f: self.morphisms[f].name.clone(),
                h: self.morphisms[self.comp(g, f)].name.clone(),
            })
            .collect();
        composites.sort_by(|a, b| (&a.g, &a.f).cmp(&(&b.g, &b.f)));
        CatBlock {
            name: name.into(),
            pos: Default::default(),
            objects: self.objects.clone(),
            arrows,
            composites,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_fincat;

    fn cat(src: &str) -> FinCat {
        FinCat::from_block(&parse_fincat(src).unwrap().categories[0]).unwrap()
    }

    #[test]
    fn walking_arrow_is_valid() {
        let c = cat("category Two { objects 0 1 ; arrow a : 0 -> 1 }");
        c.validate().unwrap();
        assert_eq!(c.morphism_count(), 3);
    }

    #[test]
    fn empty_category_is_valid() {
        cat("category E { }").validate().unwrap();
    }

    #[test]
    fn missing_composite_is_named() {
        let c = cat("category C { objects x y z ; arrow f : x -> y ; arrow g : y -> z }");
        assert_eq!(
            c.validate(),
            Err(FinCatError::MissingComposite {
                g: "g".into(),
                f: "f".into()
            })
        );
    }

    #[test]
    fn associativity_violation_names_triple() {
        // (a∘a)∘a = e∘a = a but a∘(a∘a) = a∘e = e.
        let c = cat(
            "category C {\n objects x\n arrow e : x -> x\n arrow a : x -> x\n\
             compose e e = e\n compose a a = e\n compose e a = a\n compose a e = e\n}",
        );
        match c.validate() {
            Err(FinCatError::Associativity { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn op_is_an_involution_and_core_ignores_op() {
        let c = cat("category C { objects x y z ; arrow f : x -> y ; arrow g : y -> z ; arrow h : x -> z ; compose g f = h }");
        c.validate().unwrap();
        assert_eq!(c.op().op(), c);
        assert_eq!(c.op().core(), c.core());
        assert_eq!(c.core().core(), c.core());
        c.op().validate().unwrap();
    }

    #[test]
    fn core_of_walking_arrow() {
        let c = cat("category Two { objects 0 1 ; arrow a : 0 -> 1 }").core();
        assert_eq!(c.object_count(), 2);
        assert_eq!(c.morphism_count(), 2);
    }

    #[test]
    fn block_round_trip() {
        let c = cat("category C { objects x y z ; arrow f : x -> y ; arrow g : y -> z ; arrow h : x -> z ; compose g f = h }");
        let again = FinCat::from_block(&c.to_block("C")).unwrap();
        assert_eq!(again.canonical(), c.canonical());
    }
}
