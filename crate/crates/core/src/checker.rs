//! Syntax-directed bidirectional checker for the hom/core/op rules, definitional
//! equality, and generators for the transport and composition terms.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::kernel::{
    instantiate, reduce, reduce_type, Judgement, Side, Syntax, Telescope, Term, Type,
};
use crate::parser::{print_term, print_type, Decl, Located, SourceFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    CoreForm,
    OpForm,
    IInc,
    IOpInc,
    HomForm,
    HomIntro,
    ElimR,
    ElimL,
    Var,
    Subst,
    Weaken,
    ConvEq,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "CoreForm" => Rule::CoreForm,
            "OpForm" => Rule::OpForm,
            "IInc" => Rule::IInc,
            "IOpInc" => Rule::IOpInc,
            "HomForm" => Rule::HomForm,
            "HomIntro" => Rule::HomIntro,
            "ElimR" => Rule::ElimR,
            "ElimL" => Rule::ElimL,
            "Var" => Rule::Var,
            "Subst" => Rule::Subst,
            "Weaken" => Rule::Weaken,
            "ConvEq" => Rule::ConvEq,
            other => return Err(format!("unknown rule `{other}`")),
        })
    }
}

/// A checked derivation tree; one node per rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub judgement: Judgement,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn node(rule: Rule, judgement: Judgement, premises: Vec<Derivation>) -> Self {
        Derivation {
            rule,
            judgement,
            premises,
        }
    }

    /// Total number of nodes.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Every rule used anywhere in the tree.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Detail {
    #[error("expected `{expected}`, found `{found}`")]
    Mismatch { expected: String, found: String },
    #[error("expected a hom type of shape {shape}, found `{found}`")]
    NotHom { shape: &'static str, found: String },
    #[error("expected a core type, found `{found}`")]
    NotCore { found: String },
    #[error("unbound base type `{0}`")]
    UnboundType(String),
    #[error("unbound constant `{0}`")]
    UnboundConst(String),
    #[error("variable #{0} is out of scope")]
    UnboundVar(usize),
    #[error("`{name}` expects {expected} arguments, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("`{lhs}` and `{rhs}` are not definitionally equal")]
    NotEqual { lhs: String, rhs: String },
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("signature is missing {0}")]
    MissingSignature(String),
}

/// A failed premise: the rule whose premise failed, the premise's index in the
/// rule display, and what went wrong.
///
/// Eliminator premises 1-4 are the four displayed hypotheses; 5 is the major
/// premise `f` and 6 is `θ`, both from the conclusion's context.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule} premise {premise}: {detail}")]
pub struct CheckError {
    pub rule: Rule,
    pub premise: usize,
    pub detail: Detail,
}

impl CheckError {
    fn new(rule: Rule, premise: usize, detail: Detail) -> Self {
        CheckError {
            rule,
            premise,
            detail,
        }
    }

    /// A lookup or arity failure of a base type, charged to the formation rule
    /// whose `T TYPE` premise needed it.
    fn charged_to(self, rule: Rule, premise: usize) -> Self {
        if self.rule == Rule::Subst && self.premise == 0 {
            CheckError { rule, premise, ..self }
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub telescope: Telescope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermDecl {
    pub name: String,
    pub telescope: Telescope,
    pub ty: Type,
    /// `Some` for definitions, unfolded during conversion.
    pub body: Option<Term>,
}

/// Base types and term constants in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    types: Vec<TypeDecl>,
    terms: Vec<TermDecl>,
    type_index: HashMap<String, usize>,
    term_index: HashMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn base_type(&self, name: &str) -> Option<&TypeDecl> {
        self.type_index.get(name).map(|&i| &self.types[i])
    }

    pub fn constant(&self, name: &str) -> Option<&TermDecl> {
        self.term_index.get(name).map(|&i| &self.terms[i])
    }

    pub fn base_types(&self) -> &[TypeDecl] {
        &self.types
    }

    pub fn constants(&self) -> &[TermDecl] {
        &self.terms
    }

    fn contains(&self, name: &str) -> bool {
        self.type_index.contains_key(name) || self.term_index.contains_key(name)
    }

    /// Adds a base type after checking its telescope.
    pub fn assume_type(&mut self, name: &str, telescope: Telescope) -> Result<(), CheckError> {
        if self.contains(name) {
            return Err(CheckError::new(Rule::Subst, 0, Detail::Duplicate(name.into())));
        }
        Checker::new(self).check_telescope(&telescope)?;
        self.type_index.insert(name.into(), self.types.len());
        self.types.push(TypeDecl {
            name: name.into(),
            telescope,
        });
        Ok(())
    }

    /// Adds a term constant, optionally with a definition body.
    pub fn assume_term(
        &mut self,
        name: &str,
        telescope: Telescope,
        ty: Type,
        body: Option<Term>,
    ) -> Result<Option<Derivation>, CheckError> {
        if self.contains(name) {
            return Err(CheckError::new(Rule::Subst, 0, Detail::Duplicate(name.into())));
        }
        let checker = Checker::new(self);
        checker.check_telescope(&telescope)?;
        checker.check_type(&telescope, &ty)?;
        let derivation = match &body {
            Some(b) => Some(checker.check_term(&telescope, b, &ty)?),
            None => None,
        };
        self.term_index.insert(name.into(), self.terms.len());
        self.terms.push(TermDecl {
            name: name.into(),
            telescope,
            ty,
            body,
        });
        Ok(derivation)
    }

    /// Replace every defined constant by its body.
    pub fn unfold(&self, t: &Term) -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::IncCore(x) => Term::inc_core(self.unfold(x)),
            Term::IncOp(x) => Term::inc_op(self.unfold(x)),
            Term::One(x) => Term::one(self.unfold(x)),
            Term::Const(n, args) => {
                let args: Vec<Term> = args.iter().map(|a| self.unfold(a)).collect();
                match self.constant(n).and_then(|d| d.body.as_ref()) {
                    Some(body) => self.unfold(&instantiate(body, &args, 0)),
                    None => Term::Const(n.clone(), args),
                }
            }
            Term::Elim(e) => Term::elim(
                e.side,
                self.unfold_type(&e.theta_motive),
                self.unfold_type(&e.motive),
                self.unfold(&e.base),
                self.unfold(&e.hom),
                self.unfold(&e.theta),
            ),
        }
    }

    pub fn unfold_type(&self, ty: &Type) -> Type {
        match ty {
            Type::Base(n, args) => Type::Base(n.clone(), args.iter().map(|a| self.unfold(a)).collect()),
            Type::Core(t) => Type::core(self.unfold_type(t)),
            Type::Op(t) => Type::op(self.unfold_type(t)),
            Type::Hom(t, s, u) => Type::hom(self.unfold_type(t), self.unfold(s), self.unfold(u)),
        }
    }

    /// Normal form after unfolding definitions.
    pub fn normalize(&self, t: &Term) -> Term {
        reduce(&self.unfold(t))
    }

    pub fn normalize_type(&self, ty: &Type) -> Type {
        reduce_type(&self.unfold_type(ty))
    }
}

/// Checks judgements against a fixed signature. Pure and re-entrant.
#[derive(Clone, Copy)]
pub struct Checker<'a> {
    sig: &'a Signature,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Checker { sig }
    }

    pub fn signature(&self) -> &Signature {
        self.sig
    }

    pub fn check_telescope(&self, ctx: &Telescope) -> Result<Vec<Derivation>, CheckError> {
        let mut prefix = Telescope::new();
        let mut out = Vec::with_capacity(ctx.len());
        for (name, ty) in &ctx.entries {
            out.push(self.check_type(&prefix, ty)?);
            prefix.push(name.clone(), ty.clone());
        }
        Ok(out)
    }

    fn conv(&self, a: &Type, b: &Type) -> bool {
        self.sig.normalize_type(a) == self.sig.normalize_type(b)
    }

    /// Derive `ctx ⊢ ty TYPE`.
    pub fn check_type(&self, ctx: &Telescope, ty: &Type) -> Result<Derivation, CheckError> {
        let judgement = Judgement::IsType(ctx.clone(), ty.clone());
        match ty {
            Type::Base(name, args) => {
                let decl = self
                    .sig
                    .base_type(name)
                    .ok_or_else(|| CheckError::new(Rule::Subst, 0, Detail::UnboundType(name.clone())))?;
                let premises = self.check_args(ctx, name, &decl.telescope, args)?;
                Ok(Derivation::node(Rule::Subst, judgement, premises))
            }
            Type::Core(inner) => {
                let p = self.check_type(ctx, inner).map_err(|e| e.charged_to(Rule::CoreForm, 1))?;
                Ok(Derivation::node(Rule::CoreForm, judgement, vec![p]))
            }
            Type::Op(inner) => {
                let p = self.check_type(ctx, inner).map_err(|e| e.charged_to(Rule::OpForm, 1))?;
                Ok(Derivation::node(Rule::OpForm, judgement, vec![p]))
            }
            Type::Hom(carrier, source, target) => {
                let p1 = self.check_type(ctx, carrier).map_err(|e| e.charged_to(Rule::HomForm, 1))?;
                let op = Type::op((**carrier).clone());
                let p2 = self.check_at(ctx, source, &op, Rule::HomForm, 2)?;
                let p3 = self.check_at(ctx, target, carrier, Rule::HomForm, 3)?;
                Ok(Derivation::node(Rule::HomForm, judgement, vec![p1, p2, p3]))
            }
        }
    }

    fn check_args(
        &self,
        ctx: &Telescope,
        name: &str,
        telescope: &Telescope,
        args: &[Term],
    ) -> Result<Vec<Derivation>, CheckError> {
        if telescope.len() != args.len() {
            return Err(CheckError::new(
                Rule::Subst,
                0,
                Detail::Arity {
                    name: name.into(),
                    expected: telescope.len(),
                    found: args.len(),
                },
            ));
        }
        let mut out = Vec::with_capacity(args.len());
        for (k, ((_, entry_ty), arg)) in telescope.entries.iter().zip(args).enumerate() {
            let expected = instantiate(entry_ty, &args[..k], 0);
            out.push(self.check_at(ctx, arg, &expected, Rule::Subst, k + 1)?);
        }
        Ok(out)
    }

    /// Check `tm` against `expected`; a top-level mismatch is blamed on `(rule, premise)`.
    fn check_at(
        &self,
        ctx: &Telescope,
        tm: &Term,
        expected: &Type,
        rule: Rule,
        premise: usize,
    ) -> Result<Derivation, CheckError> {
        match self.check_intro(ctx, tm, expected)? {
            Some(d) => Ok(d),
            None => {
                let (found, d) = self.infer(ctx, tm)?;
                if self.conv(&found, expected) {
                    Ok(Derivation::node(
                        Rule::ConvEq,
                        Judgement::HasType(ctx.clone(), tm.clone(), expected.clone()),
                        vec![d],
                    ))
                } else {
                    Err(CheckError::new(
                        rule,
                        premise,
                        Detail::Mismatch {
                            expected: show_type(ctx, expected),
                            found: show_type(ctx, &found),
                        },
                    ))
                }
            }
        }
    }

    /// Checking mode for the introduction forms `i`, `i^op` and `1`.
    /// `Ok(None)` means the term is not an introduction form, or the expected type
    /// does not have the matching head and inference should decide.
    fn check_intro(
        &self,
        ctx: &Telescope,
        tm: &Term,
        expected: &Type,
    ) -> Result<Option<Derivation>, CheckError> {
        let target = self.sig.normalize_type(expected);
        let judgement = Judgement::HasType(ctx.clone(), tm.clone(), expected.clone());
        match (tm, &target) {
            (Term::IncOp(t), Type::Op(carrier)) => {
                let p1 = self.check_type(ctx, carrier)?;
                let p2 = self.check_at(ctx, t, &Type::core((**carrier).clone()), Rule::IOpInc, 2)?;
                Ok(Some(Derivation::node(Rule::IOpInc, judgement, vec![p1, p2])))
            }
            (Term::IncCore(t), carrier) => {
                let p1 = self.check_type(ctx, carrier)?;
                let p2 = self.check_at(ctx, t, &Type::core(carrier.clone()), Rule::IInc, 2)?;
                Ok(Some(Derivation::node(Rule::IInc, judgement, vec![p1, p2])))
            }
            (Term::One(t), Type::Hom(carrier, s, u)) => {
                let p1 = self.check_type(ctx, carrier)?;
                let p2 = self.check_at(ctx, t, &Type::core((**carrier).clone()), Rule::HomIntro, 2)?;
                let t_nf = self.sig.normalize(t);
                let want_s = Term::inc_op(t_nf.clone());
                let want_u = Term::inc_core(t_nf);
                if **s != want_s || **u != want_u {
                    let found = Type::hom((**carrier).clone(), Term::inc_op((**t).clone()), Term::inc_core((**t).clone()));
                    return Err(CheckError::new(
                        Rule::HomIntro,
                        2,
                        Detail::Mismatch {
                            expected: show_type(ctx, expected),
                            found: show_type(ctx, &found),
                        },
                    ));
                }
                Ok(Some(Derivation::node(Rule::HomIntro, judgement, vec![p1, p2])))
            }
            _ => Ok(None),
        }
    }

    /// Check `ctx ⊢ tm : ty`.
    pub fn check_term(&self, ctx: &Telescope, tm: &Term, ty: &Type) -> Result<Derivation, CheckError> {
        self.check_at(ctx, tm, ty, Rule::ConvEq, 1)
    }

    /// Infer the type of `tm`, unique up to definitional equality.
    pub fn infer_term(&self, ctx: &Telescope, tm: &Term) -> Result<Type, CheckError> {
        self.infer(ctx, tm).map(|(ty, _)| ty)
    }

    /// Infer the type of `tm` together with its derivation.
    pub fn infer(&self, ctx: &Telescope, tm: &Term) -> Result<(Type, Derivation), CheckError> {
        match tm {
            Term::Var(k) => {
                let ty = ctx
                    .lookup(*k)
                    .ok_or_else(|| CheckError::new(Rule::Var, 0, Detail::UnboundVar(*k)))?;
                let n = ctx.len();
                let prefix = Telescope::from_entries(ctx.entries[..n - k].to_vec());
                let entry_ty = prefix.lookup(0).expect("non-empty prefix");
                let var = Derivation::node(
                    Rule::Var,
                    Judgement::HasType(prefix, Term::Var(0), entry_ty),
                    vec![],
                );
                let d = if *k == 0 {
                    var
                } else {
                    Derivation::node(
                        Rule::Weaken,
                        Judgement::HasType(ctx.clone(), tm.clone(), ty.clone()),
                        vec![var],
                    )
                };
                Ok((ty, d))
            }
            Term::Const(name, args) => {
                let decl = self
                    .sig
                    .constant(name)
                    .ok_or_else(|| CheckError::new(Rule::Subst, 0, Detail::UnboundConst(name.clone())))?;
                let premises = self.check_args(ctx, name, &decl.telescope, args)?;
                let ty = instantiate(&decl.ty, args, 0);
                let d = Derivation::node(
                    Rule::Subst,
                    Judgement::HasType(ctx.clone(), tm.clone(), ty.clone()),
                    premises,
                );
                Ok((ty, d))
            }
            Term::IncCore(t) | Term::IncOp(t) | Term::One(t) => {
                let rule = match tm {
                    Term::IncCore(_) => Rule::IInc,
                    Term::IncOp(_) => Rule::IOpInc,
                    _ => Rule::HomIntro,
                };
                let (t_ty, p2) = self.infer(ctx, t)?;
                let carrier = match self.sig.normalize_type(&t_ty) {
                    Type::Core(c) => *c,
                    other => {
                        return Err(CheckError::new(
                            rule,
                            2,
                            Detail::NotCore {
                                found: show_type(ctx, &other),
                            },
                        ))
                    }
                };
                let p1 = self.check_type(ctx, &carrier)?;
                let ty = match tm {
                    Term::IncCore(_) => carrier,
                    Term::IncOp(_) => Type::op(carrier),
                    _ => Type::hom(carrier, Term::inc_op((**t).clone()), Term::inc_core((**t).clone())),
                };
                let d = Derivation::node(rule, Judgement::HasType(ctx.clone(), tm.clone(), ty.clone()), vec![p1, p2]);
                Ok((ty, d))
            }
            Term::Elim(e) => self.infer_elim(ctx, tm, e),
        }
    }

    fn infer_elim(
        &self,
        ctx: &Telescope,
        tm: &Term,
        e: &crate::kernel::Elim,
    ) -> Result<(Type, Derivation), CheckError> {
        let rule = match e.side {
            Side::Right => Rule::ElimR,
            Side::Left => Rule::ElimL,
        };
        // Major premise: recover T, s and t from the type of f.
        let (f_ty, p_f) = self.infer(ctx, &e.hom)?;
        let (carrier, s, t) = match (e.side, self.sig.normalize_type(&f_ty)) {
            (Side::Right, Type::Hom(c, src, tgt)) => match *src {
                Term::IncOp(s) => (*c, *s, *tgt),
                _ => return Err(not_hom(ctx, rule, "hom_T(i^op s, t)", &f_ty)),
            },
            (Side::Left, Type::Hom(c, src, tgt)) => match *tgt {
                Term::IncCore(t) => (*c, *src, *t),
                _ => return Err(not_hom(ctx, rule, "hom_T(s, i t)", &f_ty)),
            },
            _ => {
                let shape = match e.side {
                    Side::Right => "hom_T(i^op s, t)",
                    Side::Left => "hom_T(s, i t)",
                };
                return Err(not_hom(ctx, rule, shape, &f_ty));
            }
        };

        // 1: T TYPE
        let p1 = self.check_type(ctx, &carrier)?;

        // 2: Γ, s : T^core ⊢ Θ(s) TYPE
        let ctx_theta = ctx.extended("s", Type::core(carrier.clone()));
        let p2 = self.check_type(&ctx_theta, &e.theta_motive)?;

        // 3: D over the four-variable telescope of this side.
        let ctx_d = motive_context(ctx, e.side, &carrier, &e.theta_motive);
        let p3 = self.check_type(&ctx_d, &e.motive)?;

        // 4: Γ, s : T^core, θ : Θ(s) ⊢ d : D(1_s, θ)
        let ctx_base = ctx_theta.extended("θ", e.theta_motive.clone());
        let base_ty = instantiate(&e.motive, &identity_instance(e.side), 2);
        let p4 = self.check_at(&ctx_base, &e.base, &base_ty, rule, 4)?;

        // θ : Θ(s) for the right rule, Θ(t) for the left rule.
        let theta_at = match e.side {
            Side::Right => &s,
            Side::Left => &t,
        };
        let theta_ty = instantiate(&e.theta_motive, std::slice::from_ref(theta_at), 0);
        let p_theta = self.check_at(ctx, &e.theta, &theta_ty, rule, 6)?;

        let ty = instantiate(&e.motive, &[s, t, e.hom.clone(), e.theta.clone()], 0);
        let d = Derivation::node(
            rule,
            Judgement::HasType(ctx.clone(), tm.clone(), ty.clone()),
            vec![p1, p2, p3, p4, p_f, p_theta],
        );
        Ok((ty, d))
    }

    /// `a ≡ b : ty`, after checking both sides at `ty`.
    pub fn def_equal(&self, ctx: &Telescope, a: &Term, b: &Term, ty: &Type) -> Result<bool, CheckError> {
        self.check_term(ctx, a, ty)?;
        self.check_term(ctx, b, ty)?;
        Ok(self.sig.normalize(a) == self.sig.normalize(b))
    }
}

fn not_hom(ctx: &Telescope, rule: Rule, shape: &'static str, found: &Type) -> CheckError {
    CheckError::new(
        rule,
        5,
        Detail::NotHom {
            shape,
            found: show_type(ctx, found),
        },
    )
}

/// The telescope `Γ, s, t, f, θ` over which the `D` motive of an eliminator lives.
pub fn motive_context(ctx: &Telescope, side: Side, carrier: &Type, theta_motive: &Type) -> Telescope {
    let mut out = ctx.clone();
    match side {
        Side::Right => {
            out.push("s", Type::core(carrier.clone()));
            out.push("t", carrier.shift(1, 0));
            out.push(
                "f",
                Type::hom(carrier.shift(2, 0), Term::inc_op(Term::Var(1)), Term::Var(0)),
            );
            out.push("θ", instantiate(theta_motive, &[Term::Var(2)], 3));
        }
        Side::Left => {
            out.push("s", Type::op(carrier.clone()));
            out.push("t", Type::core(carrier.shift(1, 0)));
            out.push(
                "f",
                Type::hom(carrier.shift(2, 0), Term::Var(1), Term::inc_core(Term::Var(0))),
            );
            out.push("θ", instantiate(theta_motive, &[Term::Var(1)], 3));
        }
    }
    out
}

/// Arguments `(s, t, f, θ)` of `D(1_s, θ)` in the context `Γ, s : T^core, θ : Θ(s)`.
pub fn identity_instance(side: Side) -> [Term; 4] {
    let s = Term::Var(1);
    match side {
        Side::Right => [s.clone(), Term::inc_core(s.clone()), Term::one(s), Term::Var(0)],
        Side::Left => [Term::inc_op(s.clone()), s.clone(), Term::one(s), Term::Var(0)],
    }
}

fn show_type(ctx: &Telescope, ty: &Type) -> String {
    print_type(ty, &names_of(ctx))
}

fn names_of(ctx: &Telescope) -> Vec<String> {
    ctx.entries.iter().map(|(n, _)| n.clone()).collect()
}

/// The eliminator instance that transports along a hom, for a family `S(x)` given as
/// a type in the ambient context extended by `x`.
///
/// Right: `e_R(λs.s, f, θ)` with `Θ(u) := S(i u)` and `D(u, v, h, θ) := S(v)`.
/// Left: `e_L(λs.s, f, θ)` with `Θ(u) := S(i^op u)` and `D(a, b, h, θ) := S(a)`.
pub fn transport_elim(side: Side, family: &Type, hom: Term, theta: Term) -> Term {
    let (theta_motive, motive) = match side {
        Side::Right => (
            instantiate(family, &[Term::inc_core(Term::Var(0))], 1),
            instantiate(family, &[Term::Var(2)], 4),
        ),
        Side::Left => (
            instantiate(family, &[Term::inc_op(Term::Var(0))], 1),
            instantiate(family, &[Term::Var(3)], 4),
        ),
    };
    Term::elim(side, theta_motive, motive, Term::Var(0), hom, theta)
}

/// A generated definition, already checked against the signature it was built for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub name: String,
    pub telescope: Telescope,
    pub term: Term,
    pub ty: Type,
    pub derivation: Derivation,
}

impl Generated {
    pub fn to_decl(&self) -> Decl {
        Decl::Define {
            name: self.name.clone(),
            telescope: self.telescope.clone(),
            term: self.term.clone(),
            ty: self.ty.clone(),
        }
    }
}

fn require_family(sig: &Signature, family: &str, over: &Type) -> Result<(), CheckError> {
    let missing = || {
        CheckError::new(
            Rule::Subst,
            0,
            Detail::MissingSignature(format!("a family `{family} (x : {over})`")),
        )
    };
    let decl = sig.base_type(family).ok_or_else(missing)?;
    match decl.telescope.entries.as_slice() {
        [(_, ty)] if sig.normalize_type(ty) == sig.normalize_type(over) => Ok(()),
        _ => Err(missing()),
    }
}

fn require_carrier(sig: &Signature, carrier: &str) -> Result<Type, CheckError> {
    match sig.base_type(carrier) {
        Some(d) if d.telescope.is_empty() => Ok(Type::base(carrier, vec![])),
        _ => Err(CheckError::new(
            Rule::Subst,
            0,
            Detail::MissingSignature(format!("a closed base type `{carrier}`")),
        )),
    }
}

/// Build `transport_R` (or `transport_L`) for the family `family` over `carrier`.
///
/// Right: `(t : core T) (t' : T) (f : hom T (iop t) t') (s : S (i t)) ⊢ e_R(λs.s, f, s) : S t'`,
/// where `S` is declared over `T`. Left: `(t' : op T) (t : core T) (f : hom T t' (i t))
/// (s : S (iop t)) ⊢ e_L(λs.s, f, s) : S t'`, where `S` is declared over `op T`.
pub fn derive_transport(
    sig: &Signature,
    side: Side,
    carrier: &str,
    family: &str,
) -> Result<Generated, CheckError> {
    let t = require_carrier(sig, carrier)?;
    let s_of = |x: Term| Type::base(family, vec![x]);
    let mut tele = Telescope::new();
    let (name, family_over) = match side {
        Side::Right => {
            tele.push("t", Type::core(t.clone()));
            tele.push("t'", t.clone());
            tele.push("f", Type::hom(t.clone(), Term::inc_op(Term::Var(1)), Term::Var(0)));
            tele.push("s", s_of(Term::inc_core(Term::Var(2))));
            ("transport_R", t.clone())
        }
        Side::Left => {
            tele.push("t'", Type::op(t.clone()));
            tele.push("t", Type::core(t.clone()));
            tele.push("f", Type::hom(t.clone(), Term::Var(1), Term::inc_core(Term::Var(0))));
            tele.push("s", s_of(Term::inc_op(Term::Var(1))));
            ("transport_L", Type::op(t.clone()))
        }
    };
    require_family(sig, family, &family_over)?;
    // S(t'): t' is the second binder on the right and the first on the left.
    let ty = s_of(Term::Var(match side {
        Side::Right => 2,
        Side::Left => 3,
    }));
    let term = transport_elim(side, &s_of(Term::Var(0)), Term::Var(1), Term::Var(0));
    let derivation = Checker::new(sig).check_term(&tele, &term, &ty)?;
    Ok(Generated {
        name: name.into(),
        telescope: tele,
        term,
        ty,
        derivation,
    })
}

/// The telescope `r : op T, s : core T, t : T, f : hom T r (i s), g : hom T (iop s) t`.
pub fn composition_telescope(carrier: &Type) -> Telescope {
    let t = carrier.clone();
    let mut tele = Telescope::new();
    tele.push("r", Type::op(t.clone()));
    tele.push("s", Type::core(t.clone()));
    tele.push("t", t.clone());
    tele.push("f", Type::hom(t.clone(), Term::Var(2), Term::inc_core(Term::Var(1))));
    tele.push("g", Type::hom(t, Term::inc_op(Term::Var(2)), Term::Var(1)));
    tele
}

/// Build `comp_R(f, g) := transport_R(f, g)` at `S(x) := hom_T(r, x)`, or the left
/// variant `comp_L(f, g) := transport_L(g, f)` at `S(x) := hom_T(x, t)`.
/// Both have type `hom T r t` over [`composition_telescope`].
pub fn derive_comp(sig: &Signature, side: Side, carrier: &str) -> Result<Generated, CheckError> {
    let t = require_carrier(sig, carrier)?;
    let tele = composition_telescope(&t);
    // In the telescope extended by x: r = #5, t = #3.
    let (name, term) = match side {
        Side::Right => {
            let family = Type::hom(t.clone(), Term::Var(5), Term::Var(0));
            ("comp_R", transport_elim(side, &family, Term::Var(0), Term::Var(1)))
        }
        Side::Left => {
            let family = Type::hom(t.clone(), Term::Var(0), Term::Var(3));
            ("comp_L", transport_elim(side, &family, Term::Var(1), Term::Var(0)))
        }
    };
    let ty = Type::hom(t, Term::Var(4), Term::Var(2));
    let derivation = Checker::new(sig).check_term(&tele, &term, &ty)?;
    Ok(Generated {
        name: name.into(),
        telescope: tele,
        term,
        ty,
        derivation,
    })
}

/// Outcome of one declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclRecord {
    pub label: String,
    pub line: usize,
    pub outcome: Result<DeclOk, CheckError>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclOk {
    /// The checked type (or `Type` for base types), printed with surface names.
    pub ty: String,
    /// Normal form of the checked term, when there is one.
    pub normal_form: Option<String>,
    pub derivation: Option<Derivation>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub records: Vec<DeclRecord>,
    pub signature: Signature,
}

impl CheckReport {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.outcome.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&DeclRecord, &CheckError)> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r, e)))
    }
}

/// Check every declaration of a file in order, building up the signature.
/// A failing declaration is reported and left out of the signature.
pub fn check_file(file: &SourceFile) -> CheckReport {
    let mut sig = Signature::new();
    let mut records = Vec::with_capacity(file.decls.len());
    let mut asserts = 0;
    for Located { node, line, .. } in &file.decls {
        let label = match node.name() {
            Some(n) => n.to_string(),
            None => {
                asserts += 1;
                format!("assert#{asserts}")
            }
        };
        let outcome = check_decl(&mut sig, node);
        records.push(DeclRecord {
            label,
            line: *line,
            outcome,
        });
    }
    CheckReport {
        records,
        signature: sig,
    }
}

fn check_decl(sig: &mut Signature, decl: &Decl) -> Result<DeclOk, CheckError> {
    match decl {
        Decl::AssumeType { name, telescope } => {
            sig.assume_type(name, telescope.clone())?;
            Ok(DeclOk {
                ty: "Type".into(),
                normal_form: None,
                derivation: None,
            })
        }
        Decl::AssumeTerm { name, telescope, ty } => {
            sig.assume_term(name, telescope.clone(), ty.clone(), None)?;
            Ok(DeclOk {
                ty: print_type(ty, &names_of(telescope)),
                normal_form: None,
                derivation: None,
            })
        }
        Decl::Define {
            name,
            telescope,
            term,
            ty,
        } => {
            let derivation = sig.assume_term(name, telescope.clone(), ty.clone(), Some(term.clone()))?;
            let names = names_of(telescope);
            Ok(DeclOk {
                ty: print_type(ty, &names),
                normal_form: Some(print_term(&sig.normalize(term), &names)),
                derivation,
            })
        }
        Decl::AssertEqual {
            telescope,
            lhs,
            rhs,
            ty,
        } => {
            let checker = Checker::new(sig);
            checker.check_telescope(telescope)?;
            checker.check_type(telescope, ty)?;
            let names = names_of(telescope);
            if !checker.def_equal(telescope, lhs, rhs, ty)? {
                return Err(CheckError::new(
                    Rule::ConvEq,
                    1,
                    Detail::NotEqual {
                        lhs: print_term(&sig.normalize(lhs), &names),
                        rhs: print_term(&sig.normalize(rhs), &names),
                    },
                ));
            }
            let d = checker.check_term(telescope, lhs, ty)?;
            Ok(DeclOk {
                ty: print_type(ty, &names),
                normal_form: Some(print_term(&sig.normalize(lhs), &names)),
                derivation: Some(d),
            })
        }
        Decl::AssertType { telescope, ty } => {
            let checker = Checker::new(sig);
            checker.check_telescope(telescope)?;
            let d = checker.check_type(telescope, ty)?;
            Ok(DeclOk {
                ty: print_type(ty, &names_of(telescope)),
                normal_form: None,
                derivation: Some(d),
            })
        }
    }
}

/// What a corpus file's `# expect:` or `# expect-fail: RULE premise N` header
/// promises about its checker verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Ok,
    Fail { rule: Rule, premise: usize },
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Ok => f.write_str("ok"),
            Expectation::Fail { rule, premise } => write!(f, "{rule} premise {premise}"),
        }
    }
}

/// Leading comment headers of a corpus file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Header {
    /// `# rule: NAME`, the rule schema the file exercises.
    pub schema: Option<String>,
    pub expect: Option<Expectation>,
}

pub fn read_header(text: &str) -> Result<Header, String> {
    let mut h = Header::default();
    for line in text.lines().map(str::trim).take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(name) = body.strip_prefix("rule:") {
            h.schema = Some(name.trim().to_string());
        } else if body == "expect: ok" {
            h.expect = Some(Expectation::Ok);
        } else if let Some(rest) = body.strip_prefix("expect-fail:") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let [rule, "premise", n] = words[..] else {
                return Err(format!("bad expect-fail header `{line}`"));
            };
            h.expect = Some(Expectation::Fail {
                rule: rule.parse()?,
                premise: n.parse().map_err(|_| format!("bad premise index in `{line}`"))?,
            });
        }
    }
    Ok(h)
}

impl CheckReport {
    /// The verdict as an expectation: ok, or the first failure.
    pub fn verdict(&self) -> Expectation {
        match self.failures().next() {
            None => Expectation::Ok,
            Some((_, e)) => Expectation::Fail {
                rule: e.rule,
                premise: e.premise,
            },
        }
    }
}
