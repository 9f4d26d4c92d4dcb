//! Abstract syntax of the directed type theory, de Bruijn binding, substitution,
//! and the reduction relation generated by the right and left hom computation rules.
//!
//! Variables are de Bruijn *indices*: `Var(0)` is the innermost binder. Eliminators
//! carry their motives explicitly:
//!
//! * the `Θ` motive binds one variable (`s : T^core`);
//! * the `D` motive binds four (`s, t, f, θ`);
//! * the base term `d` binds two (`s, θ`).

use std::fmt;

use thiserror::Error;

/// Number of variables bound by the `Θ` motive of an eliminator.
pub const THETA_BINDS: usize = 1;
/// Number of variables bound by the `D` motive of an eliminator.
pub const MOTIVE_BINDS: usize = 4;
/// Number of variables bound by the base term `d` of an eliminator.
pub const BASE_BINDS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    /// A base type from the signature, applied to its telescope.
    Base(String, Vec<Term>),
    Core(Box<Type>),
    Op(Box<Type>),
    /// `hom_T(s, t)` with `s : T^op` and `t : T`.
    Hom(Box<Type>, Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn keyword(self) -> &'static str {
        match self {
            Side::Right => "elimR",
            Side::Left => "elimL",
        }
    }
}

/// A fully annotated hom eliminator `e_R(d, f, θ)` / `e_L(d, f, θ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elim {
    pub side: Side,
    /// `Θ`, under one binder.
    pub theta_motive: Type,
    /// `D`, under four binders.
    pub motive: Type,
    /// `d`, under two binders.
    pub base: Term,
    /// The major premise `f`.
    pub hom: Term,
    pub theta: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    /// `i(t)`
    IncCore(Box<Term>),
    /// `i^op(t)`
    IncOp(Box<Term>),
    /// `1_t`
    One(Box<Term>),
    Elim(Box<Elim>),
    Const(String, Vec<Term>),
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Var(index)
    }

    pub fn inc_core(t: Term) -> Term {
        Term::IncCore(Box::new(t))
    }

    pub fn inc_op(t: Term) -> Term {
        Term::IncOp(Box::new(t))
    }

    pub fn one(t: Term) -> Term {
        Term::One(Box::new(t))
    }

    pub fn elim(
        side: Side,
        theta_motive: Type,
        motive: Type,
        base: Term,
        hom: Term,
        theta: Term,
    ) -> Term {
        Term::Elim(Box::new(Elim {
            side,
            theta_motive,
            motive,
            base,
            hom,
            theta,
        }))
    }

    pub fn constant(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Const(name.into(), args)
    }
}

impl Type {
    pub fn base(name: impl Into<String>, args: Vec<Term>) -> Type {
        Type::Base(name.into(), args)
    }

    pub fn core(t: Type) -> Type {
        Type::Core(Box::new(t))
    }

    pub fn op(t: Type) -> Type {
        Type::Op(Box::new(t))
    }

    pub fn hom(carrier: Type, source: Term, target: Term) -> Type {
        Type::Hom(Box::new(carrier), Box::new(source), Box::new(target))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("variable #{index} is out of scope (scope has {scope} entries)")]
    OutOfScope { index: usize, scope: usize },
    #[error("substitution depth {depth} is out of scope (scope has {scope} entries)")]
    DepthOutOfScope { depth: usize, scope: usize },
}

/// Syntax with de Bruijn variables: terms and types.
pub trait Syntax: Sized + Clone {
    /// Rebuild `self`, replacing every variable occurrence. The callback receives the
    /// raw index and the number of binders crossed so far.
    fn map_vars<F: Fn(usize, usize) -> Term>(&self, cutoff: usize, f: &F) -> Self;

    /// Calls `f(index, cutoff)` on every variable occurrence.
    fn visit_vars<F: FnMut(usize, usize)>(&self, cutoff: usize, f: &mut F);

    /// Number of eliminator nodes, including those inside motives and bases.
    fn elim_count(&self) -> usize;

    /// Reduce to normal form (congruence closure of the computation rules).
    fn normalize(&self) -> Self;

    /// Rewrite every `core (op T)` to `core T`, without reducing terms.
    fn canon(&self) -> Self;

    fn shift(&self, amount: usize, cutoff: usize) -> Self {
        if amount == 0 {
            return self.clone();
        }
        self.map_vars(cutoff, &|k, c| {
            if k >= c {
                Term::Var(k + amount)
            } else {
                Term::Var(k)
            }
        })
    }

    /// True iff every free variable is below `scope`.
    fn is_well_scoped(&self, scope: usize) -> bool {
        self.first_out_of_scope(scope).is_none()
    }

    fn first_out_of_scope(&self, scope: usize) -> Option<usize> {
        let mut bad = None;
        self.visit_vars(0, &mut |k, c| {
            if k >= c && k - c >= scope && bad.is_none() {
                bad = Some(k - c);
            }
        });
        bad
    }
}

fn map_args<F: Fn(usize, usize) -> Term>(args: &[Term], cutoff: usize, f: &F) -> Vec<Term> {
    args.iter().map(|a| a.map_vars(cutoff, f)).collect()
}

impl Syntax for Term {
    fn map_vars<F: Fn(usize, usize) -> Term>(&self, cutoff: usize, f: &F) -> Self {
        match self {
            Term::Var(k) => f(*k, cutoff),
            Term::IncCore(t) => Term::inc_core(t.map_vars(cutoff, f)),
            Term::IncOp(t) => Term::inc_op(t.map_vars(cutoff, f)),
            Term::One(t) => Term::one(t.map_vars(cutoff, f)),
            Term::Const(n, args) => Term::Const(n.clone(), map_args(args, cutoff, f)),
            Term::Elim(e) => Term::elim(
                e.side,
                e.theta_motive.map_vars(cutoff + THETA_BINDS, f),
                e.motive.map_vars(cutoff + MOTIVE_BINDS, f),
                e.base.map_vars(cutoff + BASE_BINDS, f),
                e.hom.map_vars(cutoff, f),
                e.theta.map_vars(cutoff, f),
            ),
        }
    }

    fn visit_vars<F: FnMut(usize, usize)>(&self, cutoff: usize, f: &mut F) {
        match self {
            Term::Var(k) => f(*k, cutoff),
            Term::IncCore(t) | Term::IncOp(t) | Term::One(t) => t.visit_vars(cutoff, f),
            Term::Const(_, args) => args.iter().for_each(|a| a.visit_vars(cutoff, f)),
            Term::Elim(e) => {
                e.theta_motive.visit_vars(cutoff + THETA_BINDS, f);
                e.motive.visit_vars(cutoff + MOTIVE_BINDS, f);
                e.base.visit_vars(cutoff + BASE_BINDS, f);
                e.hom.visit_vars(cutoff, f);
                e.theta.visit_vars(cutoff, f);
            }
        }
    }

    fn elim_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::IncCore(t) | Term::IncOp(t) | Term::One(t) => t.elim_count(),
            Term::Const(_, args) => args.iter().map(Syntax::elim_count).sum(),
            Term::Elim(e) => {
                1 + e.theta_motive.elim_count()
                    + e.motive.elim_count()
                    + e.base.elim_count()
                    + e.hom.elim_count()
                    + e.theta.elim_count()
            }
        }
    }

    fn normalize(&self) -> Self {
        reduce(self)
    }

    fn canon(&self) -> Self {
        match self {
            Term::Var(_) => self.clone(),
            Term::IncCore(t) => Term::inc_core(t.canon()),
            Term::IncOp(t) => Term::inc_op(t.canon()),
            Term::One(t) => Term::one(t.canon()),
            Term::Const(n, args) => Term::Const(n.clone(), args.iter().map(Syntax::canon).collect()),
            Term::Elim(e) => Term::elim(
                e.side,
                e.theta_motive.canon(),
                e.motive.canon(),
                e.base.canon(),
                e.hom.canon(),
                e.theta.canon(),
            ),
        }
    }
}

impl Syntax for Type {
    fn map_vars<F: Fn(usize, usize) -> Term>(&self, cutoff: usize, f: &F) -> Self {
        match self {
            Type::Base(n, args) => Type::Base(n.clone(), map_args(args, cutoff, f)),
            Type::Core(t) => Type::core(t.map_vars(cutoff, f)),
            Type::Op(t) => Type::op(t.map_vars(cutoff, f)),
            Type::Hom(t, s, u) => Type::hom(
                t.map_vars(cutoff, f),
                s.map_vars(cutoff, f),
                u.map_vars(cutoff, f),
            ),
        }
    }

    fn visit_vars<F: FnMut(usize, usize)>(&self, cutoff: usize, f: &mut F) {
        match self {
            Type::Base(_, args) => args.iter().for_each(|a| a.visit_vars(cutoff, f)),
            Type::Core(t) | Type::Op(t) => t.visit_vars(cutoff, f),
            Type::Hom(t, s, u) => {
                t.visit_vars(cutoff, f);
                s.visit_vars(cutoff, f);
                u.visit_vars(cutoff, f);
            }
        }
    }

    fn elim_count(&self) -> usize {
        match self {
            Type::Base(_, args) => args.iter().map(Syntax::elim_count).sum(),
            Type::Core(t) | Type::Op(t) => t.elim_count(),
            Type::Hom(t, s, u) => t.elim_count() + s.elim_count() + u.elim_count(),
        }
    }

    fn normalize(&self) -> Self {
        reduce_type(self)
    }

    fn canon(&self) -> Self {
        match self {
            Type::Base(n, args) => Type::Base(n.clone(), args.iter().map(Syntax::canon).collect()),
            Type::Core(inner) => {
                let mut inner = inner.canon();
                while let Type::Op(x) = inner {
                    inner = *x;
                }
                Type::core(inner)
            }
            Type::Op(t) => Type::op(t.canon()),
            Type::Hom(t, s, u) => Type::hom(t.canon(), s.canon(), u.canon()),
        }
    }
}

/// Capture-avoiding substitution of `replacement` for the variable with index `depth`.
/// Indices above `depth` are decremented.
pub fn substitute<T: Syntax>(target: &T, depth: usize, replacement: &Term) -> T {
    target.map_vars(0, &|k, c| {
        if k < c {
            return Term::Var(k);
        }
        let j = k - c;
        match j.cmp(&depth) {
            std::cmp::Ordering::Equal => replacement.shift(c, 0),
            std::cmp::Ordering::Greater => Term::Var(k - 1),
            std::cmp::Ordering::Less => Term::Var(k),
        }
    })
}

/// Scope-checked [`substitute`]: `target` lives in a context of `scope` entries and
/// `replacement` in the context with the substituted entry removed.
pub fn substitute_checked<T: Syntax>(
    target: &T,
    scope: usize,
    depth: usize,
    replacement: &Term,
) -> Result<T, KernelError> {
    if depth >= scope {
        return Err(KernelError::DepthOutOfScope { depth, scope });
    }
    if let Some(index) = target.first_out_of_scope(scope) {
        return Err(KernelError::OutOfScope { index, scope });
    }
    if let Some(index) = replacement.first_out_of_scope(scope - 1) {
        return Err(KernelError::OutOfScope {
            index,
            scope: scope - 1,
        });
    }
    Ok(substitute(target, depth, replacement))
}

/// Simultaneously instantiate the `args.len()` innermost binders of `body`.
///
/// `args[0]` replaces the outermost of those binders. The remaining free variables
/// of `body` are shifted down past the instantiated binders and then up by `lift`.
/// The arguments must already live in the resulting (lifted) context.
pub fn instantiate<T: Syntax>(body: &T, args: &[Term], lift: usize) -> T {
    let n = args.len();
    body.map_vars(0, &|k, c| {
        if k < c {
            return Term::Var(k);
        }
        let j = k - c;
        if j < n {
            args[n - 1 - j].shift(c, 0)
        } else {
            Term::Var(k - n + lift)
        }
    })
}

/// Normal form of a term under the computation rules, closed under congruence.
pub fn reduce(t: &Term) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::IncCore(x) => Term::inc_core(reduce(x)),
        Term::IncOp(x) => Term::inc_op(reduce(x)),
        Term::One(x) => Term::one(reduce(x)),
        Term::Const(n, args) => Term::Const(n.clone(), args.iter().map(reduce).collect()),
        Term::Elim(e) => {
            let hom = reduce(&e.hom);
            let theta = reduce(&e.theta);
            if let Term::One(s) = hom {
                // e(d, 1_s, θ) ≡ d(s, θ), for both sides.
                return reduce(&instantiate(&e.base, &[*s, theta], 0));
            }
            Term::elim(
                e.side,
                reduce_type(&e.theta_motive),
                reduce_type(&e.motive),
                reduce(&e.base),
                hom,
                theta,
            )
        }
    }
}

/// Normal form of a type: its terms reduced and `core (op T)` collapsed to `core T`.
pub fn reduce_type(ty: &Type) -> Type {
    let reduced = match ty {
        Type::Base(n, args) => Type::Base(n.clone(), args.iter().map(reduce).collect()),
        Type::Core(t) => Type::core(reduce_type(t)),
        Type::Op(t) => Type::op(reduce_type(t)),
        Type::Hom(t, s, u) => Type::hom(reduce_type(t), reduce(s), reduce(u)),
    };
    reduced.canon()
}

/// Syntactic equality modulo the identification `core (op T) = core T`.
pub fn alpha_equal<T: Syntax + PartialEq>(a: &T, b: &T) -> bool {
    a.canon() == b.canon()
}

/// Is `t` a computation-rule redex at the root?
pub fn is_redex(t: &Term) -> bool {
    matches!(t, Term::Elim(e) if matches!(e.hom, Term::One(_)))
}

/// One leftmost-innermost rewrite step, or `None` if `t` is normal.
///
/// This is a separate code path from [`reduce`] and serves as its oracle.
pub fn step(t: &Term) -> Option<Term> {
    match t {
        Term::Var(_) => None,
        Term::IncCore(x) => step(x).map(Term::inc_core),
        Term::IncOp(x) => step(x).map(Term::inc_op),
        Term::One(x) => step(x).map(Term::one),
        Term::Const(n, args) => step_args(args).map(|args| Term::Const(n.clone(), args)),
        Term::Elim(e) => {
            if let Some(m) = step_type(&e.theta_motive) {
                return Some(Term::elim(e.side, m, e.motive.clone(), e.base.clone(), e.hom.clone(), e.theta.clone()));
            }
            if let Some(m) = step_type(&e.motive) {
                return Some(Term::elim(e.side, e.theta_motive.clone(), m, e.base.clone(), e.hom.clone(), e.theta.clone()));
            }
            if let Some(b) = step(&e.base) {
                return Some(Term::elim(e.side, e.theta_motive.clone(), e.motive.clone(), b, e.hom.clone(), e.theta.clone()));
            }
            if let Some(h) = step(&e.hom) {
                return Some(Term::elim(e.side, e.theta_motive.clone(), e.motive.clone(), e.base.clone(), h, e.theta.clone()));
            }
            if let Some(th) = step(&e.theta) {
                return Some(Term::elim(e.side, e.theta_motive.clone(), e.motive.clone(), e.base.clone(), e.hom.clone(), th));
            }
            match &e.hom {
                Term::One(s) => Some(contract(&e.base, s, &e.theta)),
                _ => None,
            }
        }
    }
}

/// `d[s, θ]` computed by two single-variable substitutions.
fn contract(base: &Term, s: &Term, theta: &Term) -> Term {
    // Substitute the innermost binder (θ) first; s must then be shifted past nothing.
    let with_theta = substitute(base, 0, &theta.shift(1, 0));
    substitute(&with_theta, 0, s)
}

fn step_args(args: &[Term]) -> Option<Vec<Term>> {
    for (i, a) in args.iter().enumerate() {
        if let Some(a2) = step(a) {
            let mut out = args.to_vec();
            out[i] = a2;
            return Some(out);
        }
    }
    None
}

/// One leftmost-innermost step inside a type. `core (op T)` collapsing counts as a step.
pub fn step_type(ty: &Type) -> Option<Type> {
    match ty {
        Type::Base(n, args) => step_args(args).map(|a| Type::Base(n.clone(), a)),
        Type::Core(inner) => {
            if let Some(i) = step_type(inner) {
                return Some(Type::core(i));
            }
            match inner.as_ref() {
                Type::Op(x) => Some(Type::Core(x.clone())),
                _ => None,
            }
        }
        Type::Op(t) => step_type(t).map(Type::op),
        Type::Hom(t, s, u) => {
            if let Some(t2) = step_type(t) {
                return Some(Type::Hom(Box::new(t2), s.clone(), u.clone()));
            }
            if let Some(s2) = step(s) {
                return Some(Type::Hom(t.clone(), Box::new(s2), u.clone()));
            }
            step(u).map(|u2| Type::Hom(t.clone(), s.clone(), Box::new(u2)))
        }
    }
}

/// An ordered context of typed entries; entry `k` may mention entries `0..k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Telescope {
    pub entries: Vec<(String, Type)>,
}

impl Telescope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(String, Type)>) -> Self {
        Telescope { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, ty: Type) {
        self.entries.push((name.into(), ty));
    }

    pub fn extended(&self, name: impl Into<String>, ty: Type) -> Telescope {
        let mut t = self.clone();
        t.push(name, ty);
        t
    }

    /// Type of `Var(index)` as seen from the end of the telescope.
    pub fn lookup(&self, index: usize) -> Option<Type> {
        let n = self.entries.len();
        if index >= n {
            return None;
        }
        let (_, ty) = &self.entries[n - 1 - index];
        Some(ty.shift(index + 1, 0))
    }

    pub fn is_well_scoped(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, (_, ty))| ty.is_well_scoped(k))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Judgement {
    IsType(Telescope, Type),
    HasType(Telescope, Term, Type),
    DefEqual(Telescope, Term, Term, Type),
}

impl Judgement {
    pub fn context(&self) -> &Telescope {
        match self {
            Judgement::IsType(c, _) | Judgement::HasType(c, _, _) | Judgement::DefEqual(c, _, _, _) => c,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(n, args) => {
                write!(f, "{n}")?;
                for a in args {
                    write!(f, " ")?;
                    fmt_atom(a, f)?;
                }
                Ok(())
            }
            Type::Core(t) => {
                write!(f, "core ")?;
                fmt_type_atom(t, f)
            }
            Type::Op(t) => {
                write!(f, "op ")?;
                fmt_type_atom(t, f)
            }
            Type::Hom(t, s, u) => {
                write!(f, "hom ")?;
                fmt_type_atom(t, f)?;
                write!(f, " ")?;
                fmt_atom(s, f)?;
                write!(f, " ")?;
                fmt_atom(u, f)
            }
        }
    }
}

fn fmt_type_atom(t: &Type, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Type::Base(_, args) if args.is_empty() => write!(f, "{t}"),
        _ => write!(f, "({t})"),
    }
}

fn fmt_atom(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(_) => write!(f, "{t}"),
        Term::Const(_, args) if args.is_empty() => write!(f, "{t}"),
        _ => write!(f, "({t})"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(k) => write!(f, "#{k}"),
            Term::IncCore(t) => {
                write!(f, "i ")?;
                fmt_atom(t, f)
            }
            Term::IncOp(t) => {
                write!(f, "iop ")?;
                fmt_atom(t, f)
            }
            Term::One(t) => {
                write!(f, "one ")?;
                fmt_atom(t, f)
            }
            Term::Const(n, args) => {
                write!(f, "{n}")?;
                for a in args {
                    write!(f, " ")?;
                    fmt_atom(a, f)?;
                }
                Ok(())
            }
            Term::Elim(e) => write!(
                f,
                "{}[{}; {}; {}]({}, {})",
                e.side.keyword(),
                e.theta_motive,
                e.motive,
                e.base,
                e.hom,
                e.theta
            ),
        }
    }
}
