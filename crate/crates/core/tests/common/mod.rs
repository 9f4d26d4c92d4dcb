//! Shared fixtures for the integration tests: a typed random term generator over
//! a small signature, and a named-variable substitution used as an oracle.
#![allow(dead_code)]

pub mod grid;

use dhott::checker::{check_file, Signature};
use dhott::kernel::{instantiate, step, Side, Syntax, Telescope, Term, Type};
use dhott::parser::parse_dtt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SIGNATURE: &str = "\
assume B : Type
assume S (x : B) : Type
assume R (x : op B) : Type
assume merge (x : B) (a : S x) (b : S x) : S x
assume rmerge (x : op B) (a : R x) (b : R x) : R x
";

pub fn signature() -> Signature {
    let report = check_file(&parse_dtt(SIGNATURE).unwrap());
    assert!(report.all_ok());
    report.signature
}

fn b() -> Type {
    Type::base("B", vec![])
}

fn s(x: Term) -> Type {
    Type::base("S", vec![x])
}

fn r(x: Term) -> Type {
    Type::base("R", vec![x])
}

/// `(a : core B) (b : B) (f : hom B (iop a) b) (x : S (i a)) (c : op B)
///  (g : hom B c (i a)) (y : R (iop a)) (z : S b)`
pub fn base_context() -> Telescope {
    let v = Term::var;
    Telescope::from_entries(vec![
        ("a".into(), Type::core(b())),
        ("b".into(), b()),
        ("f".into(), Type::hom(b(), Term::inc_op(v(1)), v(0))),
        ("x".into(), s(Term::inc_core(v(2)))),
        ("c".into(), Type::op(b())),
        ("g".into(), Type::hom(b(), v(0), Term::inc_core(v(4)))),
        ("y".into(), r(Term::inc_op(v(5)))),
        ("z".into(), s(v(5))),
    ])
}

/// Target types in [`base_context`].
pub fn goal_types() -> Vec<Type> {
    let v = Term::var;
    // Indices as seen from the end of the base context (z = 0, ..., a = 7).
    vec![
        Type::core(b()),
        b(),
        Type::op(b()),
        s(v(6)),
        s(Term::inc_core(v(7))),
        r(v(3)),
        r(Term::inc_op(v(7))),
        Type::hom(b(), Term::inc_op(v(7)), v(6)),
        Type::hom(b(), Term::inc_op(v(7)), Term::inc_core(v(7))),
    ]
}

pub struct Gen<'a> {
    pub sig: &'a Signature,
    pub rng: ChaCha8Rng,
    /// Probability that a binary constant receives the same argument twice.
    pub duplicate: f64,
}

impl<'a> Gen<'a> {
    pub fn new(sig: &'a Signature, rng: ChaCha8Rng) -> Self {
        Gen { sig, rng, duplicate: 0.3 }
    }

    fn vars_of(&self, ctx: &Telescope, ty: &Type) -> Vec<usize> {
        (0..ctx.len())
            .filter(|&k| self.sig.normalize_type(&ctx.lookup(k).unwrap()) == *ty)
            .collect()
    }

    fn var(&mut self, ctx: &Telescope, ty: &Type) -> Option<Term> {
        self.vars_of(ctx, ty).choose(&mut self.rng).map(|&k| Term::var(k))
    }

    /// A term of type `ty` in `ctx`, or `None` when the generator finds none.
    pub fn term(&mut self, ctx: &Telescope, ty: &Type, fuel: u32) -> Option<Term> {
        let ty = self.sig.normalize_type(ty);
        let mut strategies = vec![0u8, 1, 2, 3, 4, 5, 6];
        strategies.shuffle(&mut self.rng);
        // Variables are cheap and keep terms small once fuel runs out.
        if fuel == 0 || self.rng.gen_bool(0.3) {
            strategies.insert(0, 0);
        }
        for k in strategies {
            let found = match k {
                0 => self.var(ctx, &ty),
                1 => self.intro(ctx, &ty, fuel),
                2 if fuel > 0 => self.merge(ctx, &ty, fuel - 1),
                3 if fuel > 0 => self.const_elim(ctx, &ty, Side::Right, fuel - 1),
                4 if fuel > 0 => self.const_elim(ctx, &ty, Side::Left, fuel - 1),
                5 if fuel > 0 => self.transport_right(ctx, &ty, fuel - 1),
                6 if fuel > 0 => self.transport_left(ctx, &ty, fuel - 1),
                _ => None,
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn intro(&mut self, ctx: &Telescope, ty: &Type, fuel: u32) -> Option<Term> {
        match ty {
            Type::Base(n, args) if n == "B" && args.is_empty() => {
                Some(Term::inc_core(self.term(ctx, &Type::core(b()), fuel.saturating_sub(1))?))
            }
            Type::Op(inner) if **inner == b() => {
                Some(Term::inc_op(self.term(ctx, &Type::core(b()), fuel.saturating_sub(1))?))
            }
            Type::Hom(_, src, tgt) => match (&**src, &**tgt) {
                (Term::IncOp(x), Term::IncCore(y)) if x == y => Some(Term::one((**x).clone())),
                _ => None,
            },
            _ => None,
        }
    }

    fn merge(&mut self, ctx: &Telescope, ty: &Type, fuel: u32) -> Option<Term> {
        let (name, x) = match ty {
            Type::Base(n, args) if n == "S" => ("merge", args[0].clone()),
            Type::Base(n, args) if n == "R" => ("rmerge", args[0].clone()),
            _ => return None,
        };
        let a = self.term(ctx, ty, fuel)?;
        let b = if self.rng.gen_bool(self.duplicate) {
            a.clone()
        } else {
            self.term(ctx, ty, fuel)?
        };
        Some(Term::constant(name, vec![x, a, b]))
    }

    /// `(s, t, f)` with `f : hom B (iop s) t`.
    fn hom_right(&mut self, ctx: &Telescope, fuel: u32) -> Option<(Term, Term, Term)> {
        let homs: Vec<(usize, Term, Term)> = (0..ctx.len())
            .filter_map(|k| match self.sig.normalize_type(&ctx.lookup(k).unwrap()) {
                Type::Hom(_, src, tgt) => match *src {
                    Term::IncOp(s) => Some((k, *s, *tgt)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        if !homs.is_empty() && self.rng.gen_bool(0.6) {
            let (k, s, t) = homs.choose(&mut self.rng).unwrap().clone();
            return Some((s, t, Term::var(k)));
        }
        let s = self.term(ctx, &Type::core(b()), fuel)?;
        Some((s.clone(), Term::inc_core(s.clone()), Term::one(s)))
    }

    /// `(s, t, f)` with `f : hom B s (i t)`.
    fn hom_left(&mut self, ctx: &Telescope, fuel: u32) -> Option<(Term, Term, Term)> {
        let homs: Vec<(usize, Term, Term)> = (0..ctx.len())
            .filter_map(|k| match self.sig.normalize_type(&ctx.lookup(k).unwrap()) {
                Type::Hom(_, src, tgt) => match *tgt {
                    Term::IncCore(t) => Some((k, *src, *t)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        if !homs.is_empty() && self.rng.gen_bool(0.6) {
            let (k, s, t) = homs.choose(&mut self.rng).unwrap().clone();
            return Some((s, t, Term::var(k)));
        }
        let t = self.term(ctx, &Type::core(b()), fuel)?;
        Some((Term::inc_op(t.clone()), t.clone(), Term::one(t)))
    }

    /// An eliminator whose `D` motive is `ty` itself, weakened.
    fn const_elim(&mut self, ctx: &Telescope, ty: &Type, side: Side, fuel: u32) -> Option<Term> {
        let (theta_motive, point, hom) = match side {
            Side::Right => {
                let (s0, _, f) = self.hom_right(ctx, fuel)?;
                let motives = [s(Term::inc_core(Term::var(0))), Type::core(b()), b()];
                (motives.choose(&mut self.rng).unwrap().clone(), s0, f)
            }
            Side::Left => {
                let (_, t0, f) = self.hom_left(ctx, fuel)?;
                let motives = [r(Term::inc_op(Term::var(0))), Type::core(b()), Type::op(b())];
                (motives.choose(&mut self.rng).unwrap().clone(), t0, f)
            }
        };
        let theta = self.term(ctx, &instantiate(&theta_motive, &[point], 0), fuel)?;
        let inner = ctx.extended("u", Type::core(b())).extended("h", theta_motive.clone());
        let base = self.term(&inner, &ty.shift(2, 0), fuel)?;
        Some(Term::elim(side, theta_motive, ty.shift(4, 0), base, hom, theta))
    }

    /// Transport along a hom into the index of `S`.
    fn transport_right(&mut self, ctx: &Telescope, ty: &Type, fuel: u32) -> Option<Term> {
        let Type::Base(n, args) = ty else { return None };
        if n != "S" {
            return None;
        }
        let target = &args[0];
        let mut homs: Vec<(Term, Term)> = (0..ctx.len())
            .filter_map(|k| match self.sig.normalize_type(&ctx.lookup(k).unwrap()) {
                Type::Hom(_, src, tgt) if *tgt == *target => match *src {
                    Term::IncOp(s) => Some((*s, Term::var(k))),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        if let Term::IncCore(s0) = target {
            homs.push(((**s0).clone(), Term::one((**s0).clone())));
        }
        let (s0, f) = homs.choose(&mut self.rng)?.clone();
        let theta_motive = s(Term::inc_core(Term::var(0)));
        let theta = self.term(ctx, &s(Term::inc_core(s0)), fuel)?;
        let inner = ctx.extended("u", Type::core(b())).extended("h", theta_motive.clone());
        let base = self.term(&inner, &s(Term::inc_core(Term::var(1))), fuel)?;
        Some(Term::elim(Side::Right, theta_motive, s(Term::var(2)), base, f, theta))
    }

    /// Transport backwards along a hom out of the index of `R`.
    fn transport_left(&mut self, ctx: &Telescope, ty: &Type, fuel: u32) -> Option<Term> {
        let Type::Base(n, args) = ty else { return None };
        if n != "R" {
            return None;
        }
        let source = &args[0];
        let mut homs: Vec<(Term, Term)> = (0..ctx.len())
            .filter_map(|k| match self.sig.normalize_type(&ctx.lookup(k).unwrap()) {
                Type::Hom(_, src, tgt) if *src == *source => match *tgt {
                    Term::IncCore(t) => Some((*t, Term::var(k))),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        if let Term::IncOp(t0) = source {
            homs.push(((**t0).clone(), Term::one((**t0).clone())));
        }
        let (t0, f) = homs.choose(&mut self.rng)?.clone();
        let theta_motive = r(Term::inc_op(Term::var(0)));
        let theta = self.term(ctx, &r(Term::inc_op(t0)), fuel)?;
        let inner = ctx.extended("u", Type::core(b())).extended("h", theta_motive.clone());
        let base = self.term(&inner, &r(Term::inc_op(Term::var(1))), fuel)?;
        Some(Term::elim(Side::Left, theta_motive, r(Term::var(3)), base, f, theta))
    }
}

/// A violation of the step-wise eliminator-count measure.
#[derive(Clone, Debug)]
pub struct MeasureViolation {
    pub before: Term,
    pub after: Term,
    pub counts: (usize, usize),
}

/// Run the single-step rewriter to normal form, checking that every step strictly
/// lowers the number of eliminator nodes. Returns the normal form and the first
/// violation, if any.
pub fn step_to_normal(t: &Term, max_steps: usize) -> (Term, Option<MeasureViolation>) {
    let mut cur = t.clone();
    let mut violation = None;
    for _ in 0..max_steps {
        let Some(next) = step(&cur) else { return (cur, violation) };
        let (a, b) = (cur.elim_count(), next.elim_count());
        if b >= a && violation.is_none() {
            violation = Some(MeasureViolation {
                before: cur.clone(),
                after: next.clone(),
                counts: (a, b),
            });
        }
        cur = next;
    }
    panic!("no normal form within {max_steps} steps");
}

/// Named terms: bound variables get globally fresh names, free variables keep
/// their position in the enclosing context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Named {
    Var(String),
    Node(&'static str, Vec<Named>),
    Bind(Vec<String>, Box<Named>),
    Const(String, Vec<Named>),
    Base(String, Vec<Named>),
    Side(Side),
}

pub struct Namer {
    fresh: usize,
}

impl Namer {
    pub fn new() -> Self {
        Namer { fresh: 0 }
    }

    fn bind(&mut self, env: &mut Vec<String>, n: usize) -> Vec<String> {
        let names: Vec<String> = (0..n)
            .map(|_| {
                self.fresh += 1;
                format!("b{}", self.fresh)
            })
            .collect();
        env.extend(names.iter().cloned());
        names
    }

    /// `env` lists binder names, innermost last; free variable `j` becomes `{prefix}{j}`.
    pub fn term(&mut self, t: &Term, env: &mut Vec<String>, prefix: &str) -> Named {
        match t {
            Term::Var(k) => match env.len().checked_sub(k + 1) {
                Some(i) => Named::Var(env[i].clone()),
                None => Named::Var(format!("{prefix}{}", k - env.len())),
            },
            Term::IncCore(x) => Named::Node("i", vec![self.term(x, env, prefix)]),
            Term::IncOp(x) => Named::Node("iop", vec![self.term(x, env, prefix)]),
            Term::One(x) => Named::Node("one", vec![self.term(x, env, prefix)]),
            Term::Const(n, args) => Named::Const(n.clone(), args.iter().map(|a| self.term(a, env, prefix)).collect()),
            Term::Elim(e) => {
                let mut under = |me: &mut Self, n: usize, f: &mut dyn FnMut(&mut Self, &mut Vec<String>) -> Named| {
                    let names = me.bind(env, n);
                    let body = f(me, env);
                    env.truncate(env.len() - n);
                    Named::Bind(names, Box::new(body))
                };
                let theta_motive = under(self, 1, &mut |me, env| me.ty(&e.theta_motive, env, prefix));
                let motive = under(self, 4, &mut |me, env| me.ty(&e.motive, env, prefix));
                let base = under(self, 2, &mut |me, env| me.term(&e.base, env, prefix));
                Named::Node(
                    "elim",
                    vec![
                        Named::Side(e.side),
                        theta_motive,
                        motive,
                        base,
                        self.term(&e.hom, env, prefix),
                        self.term(&e.theta, env, prefix),
                    ],
                )
            }
        }
    }

    pub fn ty(&mut self, t: &Type, env: &mut Vec<String>, prefix: &str) -> Named {
        match t {
            Type::Base(n, args) => Named::Base(n.clone(), args.iter().map(|a| self.term(a, env, prefix)).collect()),
            Type::Core(x) => Named::Node("core", vec![self.ty(x, env, prefix)]),
            Type::Op(x) => Named::Node("op", vec![self.ty(x, env, prefix)]),
            Type::Hom(c, x, y) => Named::Node(
                "hom",
                vec![self.ty(c, env, prefix), self.term(x, env, prefix), self.term(y, env, prefix)],
            ),
        }
    }
}

/// Replace names by a function; bound names are unique, so nothing is captured.
pub fn rename(n: &Named, f: &dyn Fn(&str) -> Option<Named>) -> Named {
    match n {
        Named::Var(x) => f(x).unwrap_or_else(|| n.clone()),
        Named::Node(h, xs) => Named::Node(h, xs.iter().map(|x| rename(x, f)).collect()),
        Named::Bind(names, body) => Named::Bind(names.clone(), Box::new(rename(body, f))),
        Named::Const(c, xs) => Named::Const(c.clone(), xs.iter().map(|x| rename(x, f)).collect()),
        Named::Base(c, xs) => Named::Base(c.clone(), xs.iter().map(|x| rename(x, f)).collect()),
        Named::Side(_) => n.clone(),
    }
}

/// Substitute for free variable `depth` by name lookup: `in{depth}` becomes the
/// replacement, `in{j}` above it becomes `out{j-1}` and below it `out{j}`.
pub fn named_substitute(t: &Named, depth: usize, replacement: &Named) -> Named {
    rename(t, &|x| {
        let j: usize = x.strip_prefix("in")?.parse().ok()?;
        Some(match j.cmp(&depth) {
            std::cmp::Ordering::Equal => replacement.clone(),
            std::cmp::Ordering::Greater => Named::Var(format!("out{}", j - 1)),
            std::cmp::Ordering::Less => Named::Var(format!("out{j}")),
        })
    })
}

/// Alpha-equivalence of named terms: compare after numbering binders in order.
pub fn canonical(n: &Named) -> Named {
    fn go(n: &Named, map: &mut Vec<(String, String)>, next: &mut usize) -> Named {
        match n {
            Named::Var(x) => Named::Var(
                map.iter()
                    .rev()
                    .find(|(a, _)| a == x)
                    .map(|(_, b)| b.clone())
                    .unwrap_or_else(|| x.clone()),
            ),
            Named::Bind(names, body) => {
                let fresh: Vec<String> = names
                    .iter()
                    .map(|_| {
                        *next += 1;
                        format!("c{next}")
                    })
                    .collect();
                let depth = map.len();
                map.extend(names.iter().cloned().zip(fresh.iter().cloned()));
                let body = go(body, map, next);
                map.truncate(depth);
                Named::Bind(fresh, Box::new(body))
            }
            Named::Node(h, xs) => Named::Node(h, xs.iter().map(|x| go(x, map, next)).collect()),
            Named::Const(c, xs) => Named::Const(c.clone(), xs.iter().map(|x| go(x, map, next)).collect()),
            Named::Base(c, xs) => Named::Base(c.clone(), xs.iter().map(|x| go(x, map, next)).collect()),
            Named::Side(_) => n.clone(),
        }
    }
    go(n, &mut Vec::new(), &mut 0)
}

/// Untyped well-scoped term with free variables below `scope`, at most `depth` deep.
pub fn untyped_term(rng: &mut ChaCha8Rng, scope: usize, depth: u32) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return if scope > 0 && rng.gen_bool(0.8) {
            Term::var(rng.gen_range(0..scope))
        } else {
            Term::constant("k", vec![])
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Term::inc_core(untyped_term(rng, scope, d)),
        1 => Term::inc_op(untyped_term(rng, scope, d)),
        2 => Term::one(untyped_term(rng, scope, d)),
        3 => Term::constant("m", vec![untyped_term(rng, scope, d), untyped_term(rng, scope, d)]),
        _ => {
            let side = if rng.gen_bool(0.5) { Side::Right } else { Side::Left };
            let theta_motive = untyped_type(rng, scope + 1, d);
            let motive = untyped_type(rng, scope + 4, d);
            let base = untyped_term(rng, scope + 2, d);
            // Bias the hom towards identities so redexes are common.
            let hom = if rng.gen_bool(0.5) {
                Term::one(untyped_term(rng, scope, d))
            } else {
                untyped_term(rng, scope, d)
            };
            let theta = untyped_term(rng, scope, d);
            Term::elim(side, theta_motive, motive, base, hom, theta)
        }
    }
}

pub fn untyped_type(rng: &mut ChaCha8Rng, scope: usize, depth: u32) -> Type {
    let d = depth.saturating_sub(1);
    match rng.gen_range(0..4) {
        _ if depth == 0 => b(),
        0 => Type::base("S", vec![untyped_term(rng, scope, d)]),
        1 => Type::core(untyped_type(rng, scope, d)),
        2 => Type::op(untyped_type(rng, scope, d)),
        _ => Type::hom(b(), untyped_term(rng, scope, d), untyped_term(rng, scope, d)),
    }
}
