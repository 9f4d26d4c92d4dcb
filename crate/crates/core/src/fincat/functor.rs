use std::sync::Arc;

use super::{FinCat, FinCatError};
use crate::parser::{FunctorBlock, NatBlock};

/// A functor between finite categories, as object and morphism maps.
#[derive(Clone, Debug)]
pub struct Functor {
    pub source: Arc<FinCat>,
    pub target: Arc<FinCat>,
    pub obj: Vec<usize>,
    pub mor: Vec<usize>,
}

fn same(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PartialEq for Functor {
    fn eq(&self, other: &Self) -> bool {
        self.obj == other.obj
            && self.mor == other.mor
            && same(&self.source, &other.source)
            && same(&self.target, &other.target)
    }
}

impl Eq for Functor {}

fn err(reason: impl Into<String>) -> FinCatError {
    FinCatError::Functor {
        name: String::new(),
        reason: reason.into(),
    }
}

impl Functor {
    pub fn new_unchecked(source: Arc<FinCat>, target: Arc<FinCat>, obj: Vec<usize>, mor: Vec<usize>) -> Self {
        Functor {
            source,
            target,
            obj,
            mor,
        }
    }

    pub fn new(
        source: Arc<FinCat>,
        target: Arc<FinCat>,
        obj: Vec<usize>,
        mor: Vec<usize>,
    ) -> Result<Self, FinCatError> {
        let f = Functor::new_unchecked(source, target, obj, mor);
        f.validate()?;
        Ok(f)
    }

    pub fn identity(c: &Arc<FinCat>) -> Self {
        Functor::new_unchecked(
            c.clone(),
            c.clone(),
            (0..c.object_count()).collect(),
            (0..c.morphism_count()).collect(),
        )
    }

    /// The functor from `c` to the terminal category.
    pub fn to_terminal(c: &Arc<FinCat>) -> Self {
        Functor::new_unchecked(
            c.clone(),
            Arc::new(super::terminal()),
            vec![0; c.object_count()],
            vec![0; c.morphism_count()],
        )
    }

    /// The functor picking out one object.
    pub fn constant(source: &Arc<FinCat>, target: &Arc<FinCat>, x: usize) -> Self {
        Functor::new_unchecked(
            source.clone(),
            target.clone(),
            vec![x; source.object_count()],
            vec![target.id(x); source.morphism_count()],
        )
    }

    /// The functor matching objects and morphisms by name, when that is a functor.
    pub fn by_names(source: &Arc<FinCat>, target: &Arc<FinCat>) -> Result<Self, FinCatError> {
        let obj = (0..source.object_count())
            .map(|x| target.obj(source.object_name(x)))
            .collect::<Result<_, _>>()?;
        let mor = (0..source.morphism_count())
            .map(|m| target.mor(source.morphism_name(m)))
            .collect::<Result<_, _>>()?;
        Functor::new(source.clone(), target.clone(), obj, mor)
    }

    /// Endpoints, identities and composition are preserved.
    pub fn validate(&self) -> Result<(), FinCatError> {
        let (s, t) = (&*self.source, &*self.target);
        if self.obj.len() != s.object_count() || self.mor.len() != s.morphism_count() {
            return Err(err("map sizes do not match the source"));
        }
        if let Some(&x) = self.obj.iter().find(|&&x| x >= t.object_count()) {
            return Err(err(format!("object image {x} out of range")));
        }
        if let Some(&m) = self.mor.iter().find(|&&m| m >= t.morphism_count()) {
            return Err(err(format!("morphism image {m} out of range")));
        }
        for m in 0..s.morphism_count() {
            let image = self.mor[m];
            if t.dom(image) != self.obj[s.dom(m)] || t.cod(image) != self.obj[s.cod(m)] {
                return Err(err(format!(
                    "`{}` ↦ `{}` does not preserve endpoints",
                    s.morphism_name(m),
                    t.morphism_name(image)
                )));
            }
        }
        for x in 0..s.object_count() {
            if self.mor[s.id(x)] != t.id(self.obj[x]) {
                return Err(err(format!("identity of `{}` not preserved", s.object_name(x))));
            }
        }
        for (g, f) in s.composable_pairs() {
            if self.mor[s.comp(g, f)] != t.comp(self.mor[g], self.mor[f]) {
                return Err(err(format!(
                    "composite {} ∘ {} not preserved",
                    s.morphism_name(g),
                    s.morphism_name(f)
                )));
            }
        }
        Ok(())
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Functor) -> Functor {
        assert!(same(&first.target, &self.source), "functors are not composable");
        Functor::new_unchecked(
            first.source.clone(),
            self.target.clone(),
            first.obj.iter().map(|&x| self.obj[x]).collect(),
            first.mor.iter().map(|&m| self.mor[m]).collect(),
        )
    }

    /// The same maps viewed between opposite categories.
    pub fn op(&self) -> Functor {
        Functor::new_unchecked(
            Arc::new(self.source.op()),
            Arc::new(self.target.op()),
            self.obj.clone(),
            self.mor.clone(),
        )
    }

    /// The restriction to cores.
    pub fn core(&self) -> Functor {
        Functor::new_unchecked(
            Arc::new(self.source.core()),
            Arc::new(self.target.core()),
            self.obj.clone(),
            self.obj.clone(),
        )
    }

    pub fn from_block(block: &FunctorBlock, source: Arc<FinCat>, target: Arc<FinCat>) -> Result<Self, FinCatError> {
        let named = |e: FinCatError| match e {
            FinCatError::Functor { reason, .. } => FinCatError::Functor {
                name: block.name.clone(),
                reason,
            },
            other => other,
        };
        let mut obj = vec![usize::MAX; source.object_count()];
        for (a, b) in &block.objects {
            obj[source.obj(a)?] = target.obj(b)?;
        }
        if let Some(x) = obj.iter().position(|&x| x == usize::MAX) {
            return Err(named(err(format!("no image for object `{}`", source.object_name(x)))));
        }
        let mut mor = vec![usize::MAX; source.morphism_count()];
        for x in 0..source.object_count() {
            mor[source.id(x)] = target.id(obj[x]);
        }
        for (a, b) in &block.arrows {
            mor[source.mor(a)?] = target.mor(b)?;
        }
        if let Some(m) = mor.iter().position(|&m| m == usize::MAX) {
            return Err(named(err(format!("no image for arrow `{}`", source.morphism_name(m)))));
        }
        Functor::new(source, target, obj, mor).map_err(named)
    }
}

/// A natural transformation `F ⇒ G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTrans {
    pub source: Functor,
    pub target: Functor,
    pub components: Vec<usize>,
}

impl NatTrans {
    pub fn new(source: Functor, target: Functor, components: Vec<usize>) -> Result<Self, FinCatError> {
        let n = NatTrans {
            source,
            target,
            components,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<(), FinCatError> {
        let (f, g) = (&self.source, &self.target);
        if !same(&f.source, &g.source) || !same(&f.target, &g.target) {
            return Err(FinCatError::Natural("functors have different endpoints".into()));
        }
        let (c, d) = (&*f.source, &*f.target);
        if self.components.len() != c.object_count() {
            return Err(FinCatError::Natural("wrong number of components".into()));
        }
        for x in 0..c.object_count() {
            let m = self.components[x];
            if m >= d.morphism_count() || d.dom(m) != f.obj[x] || d.cod(m) != g.obj[x] {
                return Err(FinCatError::Natural(format!(
                    "component at `{}` has the wrong endpoints",
                    c.object_name(x)
                )));
            }
        }
        for h in 0..c.morphism_count() {
            let (x, y) = (c.dom(h), c.cod(h));
            if d.comp(self.components[y], f.mor[h]) != d.comp(g.mor[h], self.components[x]) {
                return Err(FinCatError::Natural(format!(
                    "square at `{}` does not commute",
                    c.morphism_name(h)
                )));
            }
        }
        Ok(())
    }

    pub fn from_block(block: &NatBlock, source: Functor, target: Functor) -> Result<Self, FinCatError> {
        let c = source.source.clone();
        let d = source.target.clone();
        let mut components = vec![usize::MAX; c.object_count()];
        for (x, m) in &block.components {
            components[c.obj(x)?] = d.mor(m)?;
        }
        if let Some(x) = components.iter().position(|&m| m == usize::MAX) {
            return Err(FinCatError::Natural(format!(
                "`{}` has no component at `{}`",
                block.name,
                c.object_name(x)
            )));
        }
        NatTrans::new(source, target, components)
    }
}
