//! Semantics of the type theory in finite categories.
//!
//! A context is an iterated Grothendieck construction starting from the terminal
//! category, a type over it is a family, and a term is a section of that family.
//! Eliminators are computed pointwise: at `(γ, s, t, f, θ)` the value of `e_R(d)` is
//! `D(m)(d(γ, s, θ))` where `m` is the morphism `(γ, s, s, 1_s, θ) → (γ, s, t, f, θ)`
//! built from `f`; the left eliminator is computed the same way and, separately,
//! through the opposite carrier, and the two results are compared.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::checker::{check_file, identity_instance, motive_context, CheckError, CheckReport, Checker, Signature};
use crate::fincat::{
    hom_functor, identity_section, ordinal, pullback_failure, terminal, Family, FamilyMap, FinCat, FinCatError,
    Functor, GrothTotal, Library, SearchError, Section,
};
use crate::kernel::{instantiate, Elim, Side, Telescope, Term, Type};
use crate::parser::{
    parse_dtt, parse_fincat, parse_scenario, print_term, BindingKind, Decl, Located, ParseError, Scenario, SourceFile,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("no binding for `{0}`")]
    Unbound(String),
    #[error("binding for `{name}`: {reason}")]
    Binding { name: String, reason: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    FinCat(#[from] FinCatError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Incoherent(String),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
    #[error("{}:{}:{}: {error}", path.display(), error.pos.line, error.pos.col)]
    Parse { path: PathBuf, error: ParseError },
    #[error("{}: {error}", path.display())]
    FinCat { path: PathBuf, error: FinCatError },
}

/// A scenario with its theory checked and its categories built.
#[derive(Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub source: SourceFile,
    pub report: CheckReport,
    pub library: Library,
}

impl Loaded {
    pub fn interpreter(&self) -> Result<Interpreter<'_>, InterpError> {
        Interpreter::from_scenario(&self.report.signature, &self.source, &self.scenario, &self.library)
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Read a `.scn` file and everything it refers to; paths are relative to it.
pub fn load_scenario(path: &Path) -> Result<Loaded, LoadError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let scenario = parse_scenario(&read(path)?).map_err(|e| LoadError::Parse { path: path.to_path_buf(), error: e })?;
    let theory = dir.join(&scenario.theory);
    let source = parse_dtt(&read(&theory)?).map_err(|e| LoadError::Parse { path: theory.clone(), error: e })?;
    let report = check_file(&source);
    let mut library = Library::default();
    for c in &scenario.categories {
        let p = dir.join(c);
        let file = parse_fincat(&read(&p)?).map_err(|e| LoadError::Parse { path: p.clone(), error: e })?;
        let lib = Library::from_file(&file).map_err(|e| LoadError::FinCat { path: p.clone(), error: e })?;
        library.extend(lib).map_err(|e| LoadError::FinCat { path: p.clone(), error: e })?;
    }
    Ok(Loaded {
        scenario,
        source,
        report,
        library,
    })
}

/// The interpretation of a telescope: `levels[k]` is the Grothendieck construction
/// of entry `k` over the interpretation of entries `0..k`.
#[derive(Clone, Debug)]
pub struct SemCtx {
    pub telescope: Telescope,
    pub levels: Vec<GrothTotal>,
    point: Arc<FinCat>,
}

impl SemCtx {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The category interpreting the first `j` entries.
    pub fn cat_at(&self, j: usize) -> Arc<FinCat> {
        if j == 0 {
            self.point.clone()
        } else {
            self.levels[j - 1].total.clone()
        }
    }

    pub fn cat(&self) -> Arc<FinCat> {
        self.cat_at(self.len())
    }

    /// The fiber objects `(x_1, …, x_n)` that make up an object of the context category.
    pub fn unpack(&self, mut o: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for k in (0..self.len()).rev() {
            let (below, x) = self.levels[k].object_pair(o);
            out[k] = x;
            o = below;
        }
        out
    }

    /// The projection forgetting every entry from `j` on.
    pub fn projection_to(&self, j: usize) -> Functor {
        let mut p = Functor::identity(&self.cat());
        for k in (j..self.len()).rev() {
            p = self.levels[k].projection.after(&p);
        }
        if j == 0 {
            p.target = self.point.clone();
        }
        p
    }
}

/// Semantic values of the signature: families for base types and sections for
/// assumed constants, each over the interpretation of its telescope.
#[derive(Clone, Debug, Default)]
pub struct SemanticEnv {
    pub types: HashMap<String, Family>,
    pub consts: HashMap<String, Section>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    /// Every computed section satisfies the section laws.
    Naturality,
    /// `e(d) ∘ 1_• = d`.
    Computation,
    /// The left eliminator agrees with the right one over the opposite carrier.
    Duality,
    /// Interpreting a substitution agrees with reindexing.
    Coherence,
    /// Definitional equality is sent to equality of sections.
    DefEqual,
    /// The comprehension of a reindexing square is a pullback.
    Pullback,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Obligation::Naturality => "naturality",
            Obligation::Computation => "computation",
            Obligation::Duality => "duality",
            Obligation::Coherence => "coherence",
            Obligation::DefEqual => "def-equal",
            Obligation::Pullback => "pullback",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyRecord {
    pub subject: String,
    pub check: Obligation,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for VerifyRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "ok" } else { "FAIL" };
        write!(f, "{}\t{}\t{}", self.subject, self.check, verdict)?;
        if !self.detail.is_empty() {
            write!(f, "\t{}", self.detail)?;
        }
        Ok(())
    }
}

/// A reindexing `F : Δ → Γ` together with a family `T` over `Γ`, whose image under
/// comprehension is the square `Δ.(T∘F) → Γ.T` over `F`.
#[derive(Clone, Debug)]
pub struct ReindexSample {
    pub along: Functor,
    pub family: Family,
}

impl ReindexSample {
    /// `None` when the square is a pullback, otherwise what went wrong.
    pub fn pullback_failure(&self, probes: &[Arc<FinCat>], node_cap: usize) -> Result<Option<String>, InterpError> {
        let upstairs = GrothTotal::new(&self.family)?;
        let pulled = GrothTotal::new(&self.family.reindex(&self.along))?;
        let down = self.along.after(&pulled.projection);
        let top = upstairs.pair_functor(&down, &pulled.diagonal());
        Ok(pullback_failure(
            &top,
            &pulled.projection,
            &upstairs.projection,
            &self.along,
            probes,
            node_cap,
        )?)
    }
}

/// One eliminator met during interpretation, with the data of its lifting square:
/// `base` is `d` over `Γ.T^core.Θ`, `one` is `1_• : Γ.T^core.Θ → Δ` and `section`
/// is the computed `e(d)` in `motive` over `Δ`.
#[derive(Clone, Debug)]
pub struct ElimInstance {
    pub side: Side,
    pub one: Functor,
    pub motive: Family,
    pub base: Section,
    pub section: Section,
}

/// The categories `*`, `𝟚` and `𝟛` used to probe universal properties.
pub fn standard_probes() -> Vec<Arc<FinCat>> {
    vec![Arc::new(terminal()), Arc::new(ordinal(2)), Arc::new(ordinal(3))]
}

/// Interprets syntax over a fixed signature and environment, logging every check it
/// performs along the way.
pub struct Interpreter<'a> {
    sig: &'a Signature,
    env: SemanticEnv,
    point: Arc<FinCat>,
    contexts: RefCell<HashMap<String, SemCtx>>,
    log: RefCell<Vec<(Obligation, bool, String)>>,
    samples: RefCell<Vec<ReindexSample>>,
    elims: RefCell<Vec<ElimInstance>>,
}

impl<'a> Interpreter<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Interpreter {
            sig,
            env: SemanticEnv::default(),
            point: Arc::new(terminal()),
            contexts: RefCell::new(HashMap::new()),
            log: RefCell::new(Vec::new()),
            samples: RefCell::new(Vec::new()),
            elims: RefCell::new(Vec::new()),
        }
    }

    pub fn signature(&self) -> &Signature {
        self.sig
    }

    pub fn env(&self) -> &SemanticEnv {
        &self.env
    }

    /// The terminal category every context starts from.
    pub fn point(&self) -> &Arc<FinCat> {
        &self.point
    }

    /// Bind the declarations of `file` (which must already be in `sig`) as the
    /// scenario says, resolving names in `lib`.
    pub fn from_scenario(
        sig: &'a Signature,
        file: &SourceFile,
        scenario: &Scenario,
        lib: &Library,
    ) -> Result<Self, InterpError> {
        let mut me = Interpreter::new(sig);
        for Located { node, .. } in &file.decls {
            let (name, is_type) = match node {
                Decl::AssumeType { name, .. } => (name, true),
                Decl::AssumeTerm { name, .. } => (name, false),
                _ => continue,
            };
            let b = scenario
                .binding(name)
                .ok_or_else(|| InterpError::Unbound(name.clone()))?;
            let bad = |reason: String| InterpError::Binding {
                name: name.clone(),
                reason,
            };
            match (is_type, b.kind) {
                (true, BindingKind::Cat) => {
                    let c = lib.category(&b.target)?;
                    let ctx = me.type_context(name)?;
                    me.env.types.insert(name.clone(), Family::constant(&ctx.cat(), &c));
                }
                (true, BindingKind::Family) => {
                    let fam = lib.family(&b.target)?.clone();
                    me.bind_type(name, fam)?;
                }
                (false, BindingKind::Object | BindingKind::Arrow) => {
                    let decl = sig.constant(name).ok_or_else(|| InterpError::Unbound(name.clone()))?;
                    if !decl.telescope.is_empty() {
                        return Err(bad("objects and arrows bind closed constants only".into()));
                    }
                    let ctx = me.const_context(name)?;
                    let fam = me.ty(&ctx, &decl.ty)?;
                    let x = fam.fibers[0].obj(&b.target)?;
                    me.env.consts.insert(name.clone(), Section::point(&fam, x));
                }
                (false, BindingKind::Section) => {
                    let s = lib
                        .sections
                        .get(&b.target)
                        .ok_or_else(|| InterpError::FinCat(FinCatError::Unknown(b.target.clone())))?
                        .clone();
                    me.bind_const(name, s)?;
                }
                (true, k) => return Err(bad(format!("a base type cannot be bound to {k:?}"))),
                (false, k) => return Err(bad(format!("a constant cannot be bound to {k:?}"))),
            }
        }
        Ok(me)
    }

    /// Bind a base type to a family whose base matches its telescope by names.
    pub fn bind_type(&mut self, name: &str, family: Family) -> Result<(), InterpError> {
        let ctx = self.type_context(name)?;
        let bad = |reason: String| InterpError::Binding {
            name: name.into(),
            reason,
        };
        family.validate().map_err(|e| bad(e.to_string()))?;
        let rename = Functor::by_names(&ctx.cat(), &family.base)
            .map_err(|e| bad(format!("base does not match the telescope: {e}")))?;
        self.env.types.insert(name.into(), family.reindex(&rename));
        Ok(())
    }

    /// Bind a constant to a section whose base matches its telescope by names.
    pub fn bind_const(&mut self, name: &str, section: Section) -> Result<(), InterpError> {
        let decl = self
            .sig
            .constant(name)
            .ok_or_else(|| InterpError::Unbound(name.into()))?;
        let ctx = self.const_context(name)?;
        let bad = |reason: String| InterpError::Binding {
            name: name.into(),
            reason,
        };
        let rename = Functor::by_names(&ctx.cat(), &section.family.base)
            .map_err(|e| bad(format!("base does not match the telescope: {e}")))?;
        let s = section.reindex(&rename);
        if s.family != self.ty(&ctx, &decl.ty)? {
            return Err(bad("section lives in a different family than the declared type".into()));
        }
        s.validate()?;
        self.env.consts.insert(name.into(), s);
        Ok(())
    }

    fn type_context(&self, name: &str) -> Result<SemCtx, InterpError> {
        let key = format!("type {name}");
        if let Some(c) = self.contexts.borrow().get(&key) {
            return Ok(c.clone());
        }
        let decl = self
            .sig
            .base_type(name)
            .ok_or_else(|| InterpError::Unbound(name.into()))?;
        let c = self.context(&decl.telescope)?;
        self.contexts.borrow_mut().insert(key, c.clone());
        Ok(c)
    }

    fn const_context(&self, name: &str) -> Result<SemCtx, InterpError> {
        let key = format!("const {name}");
        if let Some(c) = self.contexts.borrow().get(&key) {
            return Ok(c.clone());
        }
        let decl = self
            .sig
            .constant(name)
            .ok_or_else(|| InterpError::Unbound(name.into()))?;
        let c = self.context(&decl.telescope)?;
        self.contexts.borrow_mut().insert(key, c.clone());
        Ok(c)
    }

    pub fn empty_context(&self) -> SemCtx {
        SemCtx {
            telescope: Telescope::new(),
            levels: Vec::new(),
            point: self.point.clone(),
        }
    }

    pub fn context(&self, tele: &Telescope) -> Result<SemCtx, InterpError> {
        let mut ctx = self.empty_context();
        for (name, ty) in &tele.entries {
            ctx = self.extend(&ctx, name, ty)?;
        }
        Ok(ctx)
    }

    pub fn extend(&self, ctx: &SemCtx, name: &str, ty: &Type) -> Result<SemCtx, InterpError> {
        let fam = self.ty(ctx, ty)?;
        let g = GrothTotal::new(&fam)?;
        let mut out = ctx.clone();
        out.telescope.push(name, ty.clone());
        out.levels.push(g);
        Ok(out)
    }

    fn record(&self, kind: Obligation, pass: bool, detail: impl Into<String>) {
        self.log.borrow_mut().push((kind, pass, detail.into()));
    }

    /// Drain the checks logged since the last call.
    pub fn take_log(&self) -> Vec<(Obligation, bool, String)> {
        std::mem::take(&mut *self.log.borrow_mut())
    }

    /// Drain the reindexing squares met since the last call.
    pub fn take_samples(&self) -> Vec<ReindexSample> {
        std::mem::take(&mut *self.samples.borrow_mut())
    }

    /// Drain the eliminators met since the last call.
    pub fn take_elims(&self) -> Vec<ElimInstance> {
        std::mem::take(&mut *self.elims.borrow_mut())
    }

    fn infer(&self, ctx: &SemCtx, tm: &Term) -> Result<Type, InterpError> {
        let ty = Checker::new(self.sig).infer_term(&ctx.telescope, tm)?;
        Ok(self.sig.normalize_type(&ty))
    }

    pub fn ty(&self, ctx: &SemCtx, ty: &Type) -> Result<Family, InterpError> {
        match ty {
            Type::Base(name, args) => {
                let fam = self
                    .env
                    .types
                    .get(name)
                    .ok_or_else(|| InterpError::Unbound(name.clone()))?
                    .clone();
                let target = self.type_context(name)?;
                let along = self.substitution(ctx, &target, 0, args)?;
                Ok(fam.reindex(&along))
            }
            Type::Core(t) => Ok(self.ty(ctx, t)?.core()),
            Type::Op(t) => Ok(self.ty(ctx, t)?.op()),
            Type::Hom(t, s, u) => {
                let fam = self.ty(ctx, t)?;
                let s = self.term_at(ctx, s, &Type::op((**t).clone()))?;
                let u = self.term_at(ctx, u, t)?;
                Ok(hom_functor(&fam, &s, &u)?)
            }
        }
    }

    /// The functor `ctx → target` extending the projection onto the first `prefix`
    /// entries (shared by both) with the interpretations of `args`.
    pub fn substitution(
        &self,
        ctx: &SemCtx,
        target: &SemCtx,
        prefix: usize,
        args: &[Term],
    ) -> Result<Functor, InterpError> {
        let mut along = ctx.projection_to(prefix);
        along.target = target.cat_at(prefix);
        for (k, arg) in args.iter().enumerate() {
            let level = &target.levels[prefix + k];
            let entry = &target.telescope.entries[prefix + k].1;
            let a = self.term_at(ctx, arg, &instantiate(entry, &args[..k], ctx.len() - prefix))?;
            let expected = level.family.reindex(&along);
            if a.family != expected {
                let names: Vec<String> = ctx.telescope.entries.iter().map(|e| e.0.clone()).collect();
                let msg = format!("argument `{}` does not live over its telescope entry", print_term(arg, &names));
                self.record(Obligation::Coherence, false, msg.clone());
                return Err(InterpError::Incoherent(msg));
            }
            self.samples.borrow_mut().push(ReindexSample {
                along: along.clone(),
                family: level.family.clone(),
            });
            along = level.pair_functor(&along, &a);
        }
        Ok(along)
    }

    pub fn term(&self, ctx: &SemCtx, tm: &Term) -> Result<Section, InterpError> {
        self.term_with(ctx, tm, None)
    }

    /// Interpret `tm` as a term of `ty`.
    pub fn term_at(&self, ctx: &SemCtx, tm: &Term, ty: &Type) -> Result<Section, InterpError> {
        self.term_with(ctx, tm, Some(ty))
    }

    fn term_with(&self, ctx: &SemCtx, tm: &Term, expected: Option<&Type>) -> Result<Section, InterpError> {
        match tm {
            Term::Var(k) => {
                let n = ctx.len();
                if *k >= n {
                    return Err(InterpError::Incoherent(format!("variable {k} is out of scope")));
                }
                let j = n - k;
                Ok(ctx.levels[j - 1].diagonal().reindex(&ctx.projection_to(j)))
            }
            Term::Const(name, args) => {
                let decl = self
                    .sig
                    .constant(name)
                    .ok_or_else(|| InterpError::Unbound(name.clone()))?;
                if let Some(body) = &decl.body {
                    return self.term(ctx, &instantiate(body, args, 0));
                }
                let sec = self
                    .env
                    .consts
                    .get(name)
                    .ok_or_else(|| InterpError::Unbound(name.clone()))?
                    .clone();
                let target = self.const_context(name)?;
                let along = self.substitution(ctx, &target, 0, args)?;
                Ok(sec.reindex(&along))
            }
            Term::IncCore(t) | Term::IncOp(t) | Term::One(t) => {
                // Under `core (op T) = core T` the carrier of an introduction form is
                // fixed by the expected type when there is one, as in the checker.
                let wanted = expected.map(|ty| self.sig.normalize_type(ty));
                let carrier = match (tm, wanted) {
                    (Term::IncCore(_), Some(c)) => c,
                    (Term::IncOp(_), Some(Type::Op(c))) => *c,
                    (Term::One(_), Some(Type::Hom(c, _, _))) => *c,
                    _ => match self.infer(ctx, t)? {
                        Type::Core(c) => *c,
                        other => {
                            return Err(InterpError::Incoherent(format!("expected a core type, found {other}")))
                        }
                    },
                };
                let fam = self.ty(ctx, &carrier)?;
                let point = self.term_at(ctx, t, &Type::core(carrier.clone()))?;
                match tm {
                    Term::IncCore(_) => Ok(point.map(&FamilyMap::core_inclusion(&fam))),
                    Term::IncOp(_) => Ok(point.map(&FamilyMap::op_inclusion(&fam))),
                    _ => Ok(identity_section(&fam, &point)?.1),
                }
            }
            Term::Elim(e) => self.elim(ctx, e),
        }
    }

    fn elim(&self, ctx: &SemCtx, e: &Elim) -> Result<Section, InterpError> {
        let (carrier, s, t) = match (e.side, self.infer(ctx, &e.hom)?) {
            (Side::Right, Type::Hom(c, src, tgt)) => match *src {
                Term::IncOp(s) => (*c, *s, *tgt),
                other => return Err(InterpError::Incoherent(format!("major premise has source {other}"))),
            },
            (Side::Left, Type::Hom(c, src, tgt)) => match *tgt {
                Term::IncCore(t) => (*c, *src, *t),
                other => return Err(InterpError::Incoherent(format!("major premise has target {other}"))),
            },
            (_, other) => return Err(InterpError::Incoherent(format!("major premise has type {other}"))),
        };
        let n = ctx.len();
        let carrier_fam = self.ty(ctx, &carrier)?;
        let tele = motive_context(&ctx.telescope, e.side, &carrier, &e.theta_motive);
        let core_ctx = self.extend(ctx, "s", &Type::core(carrier.clone()))?;
        let base_ctx = self.extend(&core_ctx, "θ", &e.theta_motive)?;
        let start = if e.side == Side::Right { &core_ctx } else { ctx };
        let mut motive_ctx = start.clone();
        for (name, ty) in &tele.entries[start.len()..] {
            motive_ctx = self.extend(&motive_ctx, name, ty)?;
        }
        let motive = self.ty(&motive_ctx, &e.motive)?;
        let base = self.term(&base_ctx, &e.base)?;

        let built = match e.side {
            Side::Right => eliminate_right(n, &motive_ctx, &base_ctx, &motive, &base),
            Side::Left => eliminate_left(n, &motive_ctx, &base_ctx, &carrier_fam, &motive, &base),
        };
        let sec = built.map_err(InterpError::Incoherent)?;
        let label = e.side.keyword();
        match sec.validate() {
            Ok(()) => self.record(Obligation::Naturality, true, label),
            Err(err) => self.record(Obligation::Naturality, false, format!("{label}: {err}")),
        }

        let one = self.substitution(&base_ctx, &motive_ctx, n, &identity_instance(e.side))?;
        let restricted = sec.reindex(&one);
        let computes = restricted == base;
        self.record(
            Obligation::Computation,
            computes,
            if computes {
                label.to_string()
            } else {
                format!("{label}: e(d) restricted along 1 differs from d")
            },
        );

        self.elims.borrow_mut().push(ElimInstance {
            side: e.side,
            one: one.clone(),
            motive: motive.clone(),
            base: base.clone(),
            section: sec.clone(),
        });

        if e.side == Side::Left {
            let agrees = self.dual_left(ctx, &carrier, e, &motive_ctx, &base_ctx, &motive, &base, &sec);
            match agrees {
                Ok(()) => self.record(Obligation::Duality, true, label),
                Err(why) => self.record(Obligation::Duality, false, format!("{label}: {why}")),
            }
        }

        let along = self.substitution(ctx, &motive_ctx, n, &[s, t, e.hom.clone(), e.theta.clone()])?;
        Ok(sec.reindex(&along))
    }

    /// Compute the left eliminator as a right eliminator for `T^op`, transported
    /// along the isomorphism swapping the first two motive entries, and compare.
    #[allow(clippy::too_many_arguments)]
    fn dual_left(
        &self,
        ctx: &SemCtx,
        carrier: &Type,
        e: &Elim,
        left_ctx: &SemCtx,
        left_base: &SemCtx,
        motive: &Family,
        base: &Section,
        direct: &Section,
    ) -> Result<(), String> {
        let n = ctx.len();
        let op = Type::op(carrier.clone());
        let tele = motive_context(&ctx.telescope, Side::Right, &op, &e.theta_motive);
        let go = |r: Result<SemCtx, InterpError>| r.map_err(|e| e.to_string());
        let core_ctx = go(self.extend(ctx, "s", &tele.entries[n].1))?;
        let base_ctx = go(self.extend(&core_ctx, "θ", &e.theta_motive))?;
        if *base_ctx.cat() != *left_base.cat() {
            return Err("Γ.(T^op)^core.Θ differs from Γ.T^core.Θ".into());
        }
        let mut right_ctx = core_ctx.clone();
        for (name, ty) in &tele.entries[n + 1..] {
            right_ctx = go(self.extend(&right_ctx, name, ty))?;
        }
        let swap = swap_functor(n, &right_ctx, left_ctx)?;
        swap.validate().map_err(|e| format!("swap is not a functor: {e}"))?;
        let back = invert(&swap).ok_or("swap is not an isomorphism")?;
        let one_r = self
            .substitution(&base_ctx, &right_ctx, n, &identity_instance(Side::Right))
            .map_err(|e| e.to_string())?;
        let one_l = self
            .substitution(left_base, left_ctx, n, &identity_instance(Side::Left))
            .map_err(|e| e.to_string())?;
        if swap.after(&one_r).obj != one_l.obj || swap.after(&one_r).mor != one_l.mor {
            return Err("swap does not carry 1 to 1".into());
        }
        let dual_motive = motive.reindex(&swap);
        let dual = eliminate_right(n, &right_ctx, &base_ctx, &dual_motive, base)?;
        let transported = dual.reindex(&back);
        if transported.objects != direct.objects || transported.morphisms != direct.morphisms {
            return Err("direct and dual computations differ".into());
        }
        Ok(())
    }
}

fn lookup(g: &GrothTotal, dom: usize, f: usize, h: usize) -> Result<usize, String> {
    g.find_morphism(dom, f, h)
        .ok_or_else(|| format!("no morphism ({f},{h}) out of object {dom}"))
}

fn position(list: &[usize], x: usize) -> Result<usize, String> {
    list.iter()
        .position(|&m| m == x)
        .ok_or_else(|| "identity missing from its hom-set".to_string())
}

/// `e_R(d)` over `Γ.T^core.T.hom.Θ`, where `n = |Γ|`, `base_ctx` is `Γ.T^core.Θ`
/// sharing its first `n + 1` levels with `motive_ctx`, and `base` is `d`.
pub fn eliminate_right(
    n: usize,
    motive_ctx: &SemCtx,
    base_ctx: &SemCtx,
    motive: &Family,
    base: &Section,
) -> Result<Section, String> {
    let [l1, l2, l3, l4] = [n, n + 1, n + 2, n + 3].map(|k| &motive_ctx.levels[k]);
    let b2 = &base_ctx.levels[n + 1];
    let total = motive_ctx.cat();
    let mut lift = Vec::with_capacity(total.object_count());
    let mut at = Vec::with_capacity(total.object_count());
    for o in 0..total.object_count() {
        let (o3, th) = l4.object_pair(o);
        let (o2, fi) = l3.object_pair(o3);
        let (o1, t) = l2.object_pair(o2);
        let (_, s) = l1.object_pair(o1);
        let fiber = &l2.family.fibers[o1];
        let f = fiber.hom(s, t)[fi];
        let o2s = l2.object(o1, s);
        let ids = position(fiber.hom(s, s), fiber.id(s))?;
        let o3s = l3.object(o2s, ids);
        let o0 = l4.object(o3s, th);
        let m2 = lookup(l2, o2s, l1.total.id(o1), f)?;
        let m3 = lookup(l3, o3s, m2, l3.family.fibers[o2].id(fi))?;
        let m4 = lookup(l4, o0, m3, l4.family.fibers[o3].id(th))?;
        lift.push(m4);
        at.push(b2.object(o1, th));
    }
    let mut bars = Vec::with_capacity(total.morphism_count());
    for p in 0..total.morphism_count() {
        let (p3, beta) = l4.morphism_pair(p);
        let (p2, _) = l3.morphism_pair(p3);
        let (p1, _) = l2.morphism_pair(p2);
        bars.push(lookup(b2, at[total.dom(p)], p1, beta)?);
    }
    Ok(assemble(&total, motive, base, &lift, &at, &bars))
}

/// `e_L(d)` over `Γ.T^op.T^core.hom.Θ`; `carrier` is `T` over `Γ`.
pub fn eliminate_left(
    n: usize,
    motive_ctx: &SemCtx,
    base_ctx: &SemCtx,
    carrier: &Family,
    motive: &Family,
    base: &Section,
) -> Result<Section, String> {
    let [l1, l2, l3, l4] = [n, n + 1, n + 2, n + 3].map(|k| &motive_ctx.levels[k]);
    let (b1, b2) = (&base_ctx.levels[n], &base_ctx.levels[n + 1]);
    let total = motive_ctx.cat();
    let gamma = motive_ctx.cat_at(n);
    let mut lift = Vec::with_capacity(total.object_count());
    let mut at = Vec::with_capacity(total.object_count());
    let mut cores = Vec::with_capacity(total.object_count());
    for o in 0..total.object_count() {
        let (o3, th) = l4.object_pair(o);
        let (o2, fi) = l3.object_pair(o3);
        let (o1, t) = l2.object_pair(o2);
        let (g, s) = l1.object_pair(o1);
        let fiber = &carrier.fibers[g];
        let f = fiber.hom(s, t)[fi];
        let o1t = l1.object(g, t);
        let o2t = l2.object(o1t, t);
        let idt = position(fiber.hom(t, t), fiber.id(t))?;
        let o3t = l3.object(o2t, idt);
        let o0 = l4.object(o3t, th);
        // In the fiber of T^op, f runs from t to s.
        let m1 = lookup(l1, o1t, gamma.id(g), f)?;
        let m2 = lookup(l2, o2t, m1, l2.family.fibers[o1].id(t))?;
        let m3 = lookup(l3, o3t, m2, l3.family.fibers[o2].id(fi))?;
        let m4 = lookup(l4, o0, m3, l4.family.fibers[o3].id(th))?;
        let c = b1.object(g, t);
        lift.push(m4);
        cores.push(c);
        at.push(b2.object(c, th));
    }
    let mut bars = Vec::with_capacity(total.morphism_count());
    for p in 0..total.morphism_count() {
        let (p3, beta) = l4.morphism_pair(p);
        let (p2, _) = l3.morphism_pair(p3);
        let (p1, _) = l2.morphism_pair(p2);
        let (phi, _) = l1.morphism_pair(p1);
        let q = total.dom(p);
        let c1 = b1.chosen_lift(cores[q], phi);
        bars.push(lookup(b2, at[q], c1, beta)?);
    }
    Ok(assemble(&total, motive, base, &lift, &at, &bars))
}

/// Objects `D(m_o)(d_{ō})` and morphisms `D(m_{o'})(d_{ψ̄})`.
fn assemble(
    total: &Arc<FinCat>,
    motive: &Family,
    base: &Section,
    lift: &[usize],
    at: &[usize],
    bars: &[usize],
) -> Section {
    let objects = (0..total.object_count())
        .map(|o| motive.maps[lift[o]].obj[base.objects[at[o]]])
        .collect();
    let morphisms = (0..total.morphism_count())
        .map(|p| motive.maps[lift[total.cod(p)]].mor[base.morphisms[bars[p]]])
        .collect();
    Section {
        family: motive.clone(),
        objects,
        morphisms,
    }
}

/// `Γ.(T^op)^core.T^op.hom_{T^op}.Θ → Γ.T^op.T^core.hom_T.Θ`, exchanging the first
/// two entries.
fn swap_functor(n: usize, right: &SemCtx, left: &SemCtx) -> Result<Functor, String> {
    let [r1, r2, r3, r4] = [n, n + 1, n + 2, n + 3].map(|k| &right.levels[k]);
    let [l1, l2, l3, l4] = [n, n + 1, n + 2, n + 3].map(|k| &left.levels[k]);
    let src = right.cat();
    let mut obj = Vec::with_capacity(src.object_count());
    for o in 0..src.object_count() {
        let (o3, th) = r4.object_pair(o);
        let (o2, fi) = r3.object_pair(o3);
        let (o1, s) = r2.object_pair(o2);
        let (g, t) = r1.object_pair(o1);
        let x = l4.object(l3.object(l2.object(l1.object(g, s), t), fi), th);
        obj.push(x);
    }
    let mut mor = Vec::with_capacity(src.morphism_count());
    for p in 0..src.morphism_count() {
        let (p3, beta) = r4.morphism_pair(p);
        let (p2, _) = r3.morphism_pair(p3);
        let (p1, alpha) = r2.morphism_pair(p2);
        let (phi, _) = r1.morphism_pair(p1);
        let x4 = obj[src.dom(p)];
        let x3 = l4.object_pair(x4).0;
        let x2 = l3.object_pair(x3).0;
        let x1 = l2.object_pair(x2).0;
        let q1 = lookup(l1, x1, phi, alpha)?;
        let q2 = l2.chosen_lift(x2, q1);
        let q3 = l3.chosen_lift(x3, q2);
        mor.push(lookup(l4, x4, q3, beta)?);
    }
    Ok(Functor::new_unchecked(src, left.cat(), obj, mor))
}

/// The inverse of a functor that is bijective on objects and morphisms.
pub fn invert(f: &Functor) -> Option<Functor> {
    let (s, t) = (&f.source, &f.target);
    if s.object_count() != t.object_count() || s.morphism_count() != t.morphism_count() {
        return None;
    }
    let mut obj = vec![usize::MAX; t.object_count()];
    for (x, &y) in f.obj.iter().enumerate() {
        if obj[y] != usize::MAX {
            return None;
        }
        obj[y] = x;
    }
    let mut mor = vec![usize::MAX; t.morphism_count()];
    for (m, &n) in f.mor.iter().enumerate() {
        if mor[n] != usize::MAX {
            return None;
        }
        mor[n] = m;
    }
    Some(Functor::new_unchecked(t.clone(), s.clone(), obj, mor))
}

/// Options for [`verify_soundness`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Reindexing squares checked for the pullback property, per declaration.
    pub pullback_samples: usize,
    pub node_cap: usize,
    /// Samples over a context with more objects than this are skipped.
    pub size_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            pullback_samples: 4,
            node_cap: crate::fincat::DEFAULT_NODE_CAP,
            size_cap: crate::fincat::MAX_OBJECTS,
        }
    }
}

/// Interpret every definition and assertion of `file` and check the semantic
/// obligations that come with it.
pub fn verify_soundness(interp: &Interpreter, file: &SourceFile, opts: &VerifyOptions) -> Vec<VerifyRecord> {
    let mut out = Vec::new();
    let probes = standard_probes();
    let mut asserts = 0;
    for Located { node, .. } in &file.decls {
        let subject = match node.name() {
            Some(n) => n.to_string(),
            None => {
                asserts += 1;
                format!("assert#{asserts}")
            }
        };
        let mut push = |check, pass, detail: String| {
            out.push(VerifyRecord {
                subject: subject.clone(),
                check,
                pass,
                detail,
            })
        };
        let outcome = verify_decl(interp, node);
        for (check, pass, detail) in interp.take_log() {
            push(check, pass, detail);
        }
        if let Err(e) = outcome {
            push(Obligation::Coherence, false, e.to_string());
            interp.take_samples();
            continue;
        }
        if let Ok(extra) = &outcome {
            for (check, pass, detail) in extra {
                push(*check, *pass, detail.clone());
            }
        }
        let mut seen: Vec<ReindexSample> = Vec::new();
        for sample in interp.take_samples() {
            if seen.len() >= opts.pullback_samples {
                break;
            }
            if seen.iter().any(|s| s.along == sample.along && s.family == sample.family)
                || sample.along.source.object_count() > opts.size_cap
            {
                continue;
            }
            match sample.pullback_failure(&probes, opts.node_cap) {
                Err(InterpError::FinCat(FinCatError::TooLarge { .. })) => continue,
                Ok(None) => push(Obligation::Pullback, true, String::new()),
                Ok(Some(why)) => push(Obligation::Pullback, false, why),
                Err(e) => push(Obligation::Pullback, false, e.to_string()),
            }
            seen.push(sample);
        }
    }
    out
}

type Checks = Vec<(Obligation, bool, String)>;

fn verify_decl(interp: &Interpreter, decl: &Decl) -> Result<Checks, InterpError> {
    let sig = interp.signature();
    let mut checks = Vec::new();
    let mut natural = |s: &Section, what: &str| match s.validate() {
        Ok(()) => checks.push((Obligation::Naturality, true, what.to_string())),
        Err(e) => checks.push((Obligation::Naturality, false, format!("{what}: {e}"))),
    };
    match decl {
        Decl::AssumeType { .. } | Decl::AssumeTerm { .. } => {}
        Decl::AssertType { telescope, ty } => {
            let ctx = interp.context(telescope)?;
            interp.ty(&ctx, ty)?.validate()?;
        }
        Decl::Define {
            telescope, term, ty, ..
        } => {
            let ctx = interp.context(telescope)?;
            let fam = interp.ty(&ctx, ty)?;
            let sec = interp.term(&ctx, term)?;
            natural(&sec, "body");
            let nf = interp.term(&ctx, &sig.normalize(term))?;
            let same_family = sec.family == fam;
            checks.push((
                Obligation::Coherence,
                same_family,
                if same_family { String::new() } else { "body does not live in the declared type".into() },
            ));
            let same = nf == sec;
            checks.push((
                Obligation::DefEqual,
                same,
                if same { "body ≡ normal form".into() } else { "body and its normal form differ".into() },
            ));
        }
        Decl::AssertEqual { telescope, lhs, rhs, .. } => {
            let ctx = interp.context(telescope)?;
            let a = interp.term(&ctx, lhs)?;
            let b = interp.term(&ctx, rhs)?;
            natural(&a, "lhs");
            natural(&b, "rhs");
            let same = a == b;
            checks.push((
                Obligation::DefEqual,
                same,
                if same { "lhs = rhs".into() } else { "lhs and rhs differ".into() },
            ));
        }
    }
    Ok(checks)
}
