//! Printing kernel syntax back to `.dtt` surface syntax.

use std::collections::BTreeSet;

use super::dtt::{Decl, SourceFile, KEYWORDS};
use crate::kernel::{Telescope, Term, Type};

/// Print a type whose free variables are named by `names` (outermost first).
pub fn print_type(ty: &Type, names: &[String]) -> String {
    let mut p = Printer::new(names);
    p.globals_in_type(ty);
    p.ty(ty)
}

/// Print a term whose free variables are named by `names` (outermost first).
pub fn print_term(tm: &Term, names: &[String]) -> String {
    let mut p = Printer::new(names);
    p.globals_in_term(tm);
    p.term(tm)
}

struct Printer {
    scope: Vec<String>,
    avoid: BTreeSet<String>,
}

impl Printer {
    fn new(names: &[String]) -> Self {
        Printer {
            scope: names.to_vec(),
            avoid: BTreeSet::new(),
        }
    }

    fn globals_in_type(&mut self, ty: &Type) {
        match ty {
            Type::Base(n, args) => {
                self.avoid.insert(n.clone());
                args.iter().for_each(|a| self.globals_in_term(a));
            }
            Type::Core(t) | Type::Op(t) => self.globals_in_type(t),
            Type::Hom(t, s, u) => {
                self.globals_in_type(t);
                self.globals_in_term(s);
                self.globals_in_term(u);
            }
        }
    }

    fn globals_in_term(&mut self, tm: &Term) {
        match tm {
            Term::Var(_) => {}
            Term::IncCore(t) | Term::IncOp(t) | Term::One(t) => self.globals_in_term(t),
            Term::Const(n, args) => {
                self.avoid.insert(n.clone());
                args.iter().for_each(|a| self.globals_in_term(a));
            }
            Term::Elim(e) => {
                self.globals_in_type(&e.theta_motive);
                self.globals_in_type(&e.motive);
                self.globals_in_term(&e.base);
                self.globals_in_term(&e.hom);
                self.globals_in_term(&e.theta);
            }
        }
    }

    fn fresh(&self, base: &str, taken: &[String]) -> String {
        let clash = |n: &str| {
            self.scope.iter().any(|s| s == n)
                || taken.iter().any(|s| s == n)
                || self.avoid.contains(n)
                || KEYWORDS.contains(&n)
        };
        if !clash(base) {
            return base.to_string();
        }
        (1..).map(|k| format!("{base}{k}")).find(|n| !clash(n)).unwrap()
    }

    fn bind(&mut self, bases: &[&str]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for b in bases {
            let n = self.fresh(b, &out);
            out.push(n);
        }
        out
    }

    fn under<R>(&mut self, names: &[String], f: impl FnOnce(&mut Self) -> R) -> R {
        let depth = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn var(&self, k: usize) -> String {
        match self.scope.len().checked_sub(k + 1) {
            Some(i) => self.scope[i].clone(),
            None => format!("?{k}"),
        }
    }

    fn ty(&mut self, ty: &Type) -> String {
        match ty {
            Type::Base(n, args) => self.app(n, args),
            Type::Core(t) => format!("core {}", self.ty_atom(t)),
            Type::Op(t) => format!("op {}", self.ty_atom(t)),
            Type::Hom(t, s, u) => format!(
                "hom {} {} {}",
                self.ty_atom(t),
                self.term_atom(s),
                self.term_atom(u)
            ),
        }
    }

    fn ty_atom(&mut self, ty: &Type) -> String {
        match ty {
            Type::Base(n, args) if args.is_empty() => n.clone(),
            _ => format!("({})", self.ty(ty)),
        }
    }

    fn app(&mut self, head: &str, args: &[Term]) -> String {
        let mut s = head.to_string();
        for a in args {
            s.push(' ');
            s.push_str(&self.term_atom(a));
        }
        s
    }

    fn term(&mut self, tm: &Term) -> String {
        match tm {
            Term::Var(k) => self.var(*k),
            Term::IncCore(t) => format!("i {}", self.term_atom(t)),
            Term::IncOp(t) => format!("iop {}", self.term_atom(t)),
            Term::One(t) => format!("one {}", self.term_atom(t)),
            Term::Const(n, args) => self.app(n, args),
            Term::Elim(e) => {
                let theta_names = self.bind(&["s"]);
                let theta_motive = self.under(&theta_names, |p| p.ty(&e.theta_motive));
                let motive_names = self.bind(&["s", "t", "f", "θ"]);
                let motive = self.under(&motive_names, |p| p.ty(&e.motive));
                let base_names = self.bind(&["s", "θ"]);
                let base = self.under(&base_names, |p| p.term(&e.base));
                format!(
                    "{}[{}. {}; {}. {}; {}. {}]({}, {})",
                    e.side.keyword(),
                    theta_names.join(" "),
                    theta_motive,
                    motive_names.join(" "),
                    motive,
                    base_names.join(" "),
                    base,
                    self.term(&e.hom),
                    self.term(&e.theta)
                )
            }
        }
    }

    fn term_atom(&mut self, tm: &Term) -> String {
        match tm {
            Term::Var(_) => self.term(tm),
            Term::Const(n, args) if args.is_empty() => n.clone(),
            _ => format!("({})", self.term(tm)),
        }
    }
}

fn print_binders(tele: &Telescope) -> String {
    let mut out = String::new();
    let mut names: Vec<String> = Vec::new();
    for (n, ty) in &tele.entries {
        out.push_str(&format!(" ({n} : {})", print_type(ty, &names)));
        names.push(n.clone());
    }
    out
}

fn names_of(tele: &Telescope) -> Vec<String> {
    tele.entries.iter().map(|(n, _)| n.clone()).collect()
}

/// Print one declaration on a single line.
pub fn print_decl(decl: &Decl) -> String {
    match decl {
        Decl::AssumeType { name, telescope } => {
            format!("assume {name}{} : Type", print_binders(telescope))
        }
        Decl::AssumeTerm { name, telescope, ty } => format!(
            "assume {name}{} : {}",
            print_binders(telescope),
            print_type(ty, &names_of(telescope))
        ),
        Decl::Define {
            name,
            telescope,
            term,
            ty,
        } => {
            let names = names_of(telescope);
            format!(
                "define {name}{} : {} := {}",
                print_binders(telescope),
                print_type(ty, &names),
                print_term(term, &names)
            )
        }
        Decl::AssertEqual {
            telescope,
            lhs,
            rhs,
            ty,
        } => {
            let names = names_of(telescope);
            format!(
                "assert{} |- {} == {} : {}",
                print_binders(telescope),
                print_term(lhs, &names),
                print_term(rhs, &names),
                print_type(ty, &names)
            )
        }
        Decl::AssertType { telescope, ty } => format!(
            "assert{} |- {} : Type",
            print_binders(telescope),
            print_type(ty, &names_of(telescope))
        ),
    }
}

pub fn print_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for d in &file.decls {
        out.push_str(&print_decl(&d.node));
        out.push('\n');
    }
    out
}
