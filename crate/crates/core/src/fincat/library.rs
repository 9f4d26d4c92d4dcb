use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{Family, FinCat, FinCatError, Functor, NatTrans, Section};
use crate::parser::CatFile;

/// Everything declared in a `.fincat` file, built and validated.
#[derive(Clone, Debug, Default)]
pub struct Library {
    pub categories: BTreeMap<String, Arc<FinCat>>,
    pub functors: HashMap<String, Functor>,
    pub nats: HashMap<String, NatTrans>,
    pub families: HashMap<String, Family>,
    pub sections: HashMap<String, Section>,
}

fn named(name: &str, e: FinCatError) -> FinCatError {
    match e {
        FinCatError::Functor { reason, .. } => FinCatError::Functor {
            name: name.into(),
            reason,
        },
        other => other,
    }
}

impl Library {
    pub fn from_file(file: &CatFile) -> Result<Library, FinCatError> {
        let mut lib = Library::default();
        for block in &file.categories {
            let c = FinCat::from_block(block)?;
            c.validate()?;
            lib.categories.insert(block.name.clone(), Arc::new(c));
        }
        for block in &file.functors {
            let f = Functor::from_block(block, lib.category(&block.source)?, lib.category(&block.target)?)
                .map_err(|e| named(&block.name, e))?;
            lib.functors.insert(block.name.clone(), f);
        }
        for block in &file.nats {
            let n = NatTrans::from_block(block, lib.functor(&block.source)?, lib.functor(&block.target)?)?;
            lib.nats.insert(block.name.clone(), n);
        }
        let cats: HashMap<String, Arc<FinCat>> =
            lib.categories.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for block in &file.families {
            let f = Family::from_block(block, lib.category(&block.base)?, &cats, &lib.functors)?;
            lib.families.insert(block.name.clone(), f);
        }
        for block in &file.sections {
            let family = lib
                .families
                .get(&block.family)
                .ok_or_else(|| FinCatError::Unknown(block.family.clone()))?;
            let s = Section::from_block(block, family)?;
            lib.sections.insert(block.name.clone(), s);
        }
        Ok(lib)
    }

    pub fn category(&self, name: &str) -> Result<Arc<FinCat>, FinCatError> {
        self.categories
            .get(name)
            .cloned()
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    pub fn functor(&self, name: &str) -> Result<Functor, FinCatError> {
        self.functors
            .get(name)
            .cloned()
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    pub fn family(&self, name: &str) -> Result<&Family, FinCatError> {
        self.families
            .get(name)
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    pub fn section(&self, name: &str) -> Result<&Section, FinCatError> {
        self.sections
            .get(name)
            .ok_or_else(|| FinCatError::Unknown(name.into()))
    }

    /// Merge another library; later names must not collide.
    pub fn extend(&mut self, other: Library) -> Result<(), FinCatError> {
        for (k, v) in other.categories {
            if self.categories.insert(k.clone(), v).is_some() {
                return Err(FinCatError::Duplicate(k));
            }
        }
        for (k, v) in other.functors {
            if self.functors.insert(k.clone(), v).is_some() {
                return Err(FinCatError::Duplicate(k));
            }
        }
        for (k, v) in other.nats {
            if self.nats.insert(k.clone(), v).is_some() {
                return Err(FinCatError::Duplicate(k));
            }
        }
        for (k, v) in other.families {
            if self.families.insert(k.clone(), v).is_some() {
                return Err(FinCatError::Duplicate(k));
            }
        }
        for (k, v) in other.sections {
            if self.sections.insert(k.clone(), v).is_some() {
                return Err(FinCatError::Duplicate(k));
            }
        }
        Ok(())
    }
}
