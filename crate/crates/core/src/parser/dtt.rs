//! `.dtt` theory files.
//!
//! ```text
//! decl   := assume NAME binder* : Type
//!         | assume NAME binder* : expr
//!         | define NAME binder* : expr := expr
//!         | assert binder* |- expr == expr : expr
//!         | assert binder* |- expr : Type
//! binder := ( NAME+ : expr )
//! expr   := elimR [ NAME . expr ; NAME NAME NAME NAME . expr ; NAME NAME . expr ] ( expr , expr )
//!         | elimL [ ... ] ( expr , expr )
//!         | NAME aexpr*
//!         | ( expr )
//! aexpr  := NAME | ( expr )
//! ```
//!
//! `core`, `op`, `hom`, `i`, `iop` and `one` are ordinary heads applied by
//! juxtaposition. Whether an expression is a type or a term is decided by its
//! position, and names are resolved to de Bruijn indices as they are parsed.

use std::collections::HashMap;

use super::{ParseError, ParseErrorKind, Pos};
use crate::kernel::{Side, Telescope, Term, Type};

pub(crate) const KEYWORDS: &[&str] = &[
    "assume", "define", "assert", "Type", "core", "op", "hom", "i", "iop", "one", "elimR", "elimL",
];

const DECL_KEYWORDS: &[&str] = &["assume", "define", "assert"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    AssumeType {
        name: String,
        telescope: Telescope,
    },
    AssumeTerm {
        name: String,
        telescope: Telescope,
        ty: Type,
    },
    Define {
        name: String,
        telescope: Telescope,
        term: Term,
        ty: Type,
    },
    AssertEqual {
        telescope: Telescope,
        lhs: Term,
        rhs: Term,
        ty: Type,
    },
    AssertType {
        telescope: Telescope,
        ty: Type,
    },
}

impl Decl {
    pub fn name(&self) -> Option<&str> {
        match self {
            Decl::AssumeType { name, .. } | Decl::AssumeTerm { name, .. } | Decl::Define { name, .. } => {
                Some(name)
            }
            _ => None,
        }
    }

    pub fn telescope(&self) -> &Telescope {
        match self {
            Decl::AssumeType { telescope, .. }
            | Decl::AssumeTerm { telescope, .. }
            | Decl::Define { telescope, .. }
            | Decl::AssertEqual { telescope, .. }
            | Decl::AssertType { telescope, .. } => telescope,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located<T> {
    pub node: T,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub decls: Vec<Located<Decl>>,
}

impl SourceFile {
    pub fn find(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().map(|d| &d.node).find(|d| d.name() == Some(name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Colon,
    Define,
    EqEq,
    Turnstile,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Dot,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Colon => "`:`".into(),
            Tok::Define => "`:=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Turnstile => "`|-`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '′'
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            ':' if chars.peek() == Some(&'=') => {
                bump(&mut chars);
                Tok::Define
            }
            ':' => Tok::Colon,
            '=' if chars.peek() == Some(&'=') => {
                bump(&mut chars);
                Tok::EqEq
            }
            '|' if chars.peek() == Some(&'-') => {
                bump(&mut chars);
                Tok::Turnstile
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            other => return Err(ParseError::new(pos, ParseErrorKind::Lexical(other))),
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Expression tree before it is read as a type or a term.
#[derive(Clone, Debug)]
enum Raw {
    App {
        head: String,
        pos: Pos,
        args: Vec<Raw>,
    },
    Elim {
        side: Side,
        pos: Pos,
        theta_binder: String,
        theta_motive: Box<Raw>,
        motive_binders: [String; 4],
        motive: Box<Raw>,
        base_binders: [String; 2],
        base: Box<Raw>,
        hom: Box<Raw>,
        theta: Box<Raw>,
    },
}

impl Raw {
    fn pos(&self) -> Pos {
        match self {
            Raw::App { pos, .. } | Raw::Elim { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Global {
    Type,
    Term,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    globals: HashMap<String, Global>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<Pos> {
        if *self.peek() == want {
            Ok(self.advance().1)
        } else {
            Err(ParseError::syntax(self.pos(), want.describe(), self.peek().describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.advance().1)
        } else {
            Err(ParseError::syntax(self.pos(), format!("`{kw}`"), self.peek().describe()))
        }
    }

    /// A name that is not a keyword.
    fn name(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.advance().1;
                Ok((s, pos))
            }
            other => Err(ParseError::syntax(self.pos(), what, other.describe())),
        }
    }

    fn binder_name(&mut self) -> PResult<String> {
        let (n, pos) = self.name("a variable name")?;
        if self.globals.contains_key(&n) {
            return Err(ParseError::new(pos, ParseErrorKind::Duplicate(n)));
        }
        Ok(n)
    }

    fn file(&mut self) -> PResult<SourceFile> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            let node = self.decl()?;
            decls.push(Located {
                node,
                line: pos.line,
                col: pos.col,
            });
        }
        Ok(SourceFile { decls })
    }

    fn decl(&mut self) -> PResult<Decl> {
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "assume" || kw == "define" => {
                self.advance();
                let (name, name_pos) = self.name("a declaration name")?;
                if self.globals.contains_key(&name) {
                    return Err(ParseError::new(name_pos, ParseErrorKind::Duplicate(name)));
                }
                let (telescope, locals) = self.binders()?;
                self.expect(Tok::Colon)?;
                let decl = if kw == "assume" && self.is_keyword("Type") {
                    self.advance();
                    self.globals.insert(name.clone(), Global::Type);
                    return Ok(Decl::AssumeType { name, telescope });
                } else {
                    let ty = self.expr()?;
                    let ty = self.to_type(&ty, &locals)?;
                    if kw == "assume" {
                        Decl::AssumeTerm { name: name.clone(), telescope, ty }
                    } else {
                        self.expect(Tok::Define)?;
                        let tm = self.expr()?;
                        let term = self.to_term(&tm, &locals)?;
                        Decl::Define {
                            name: name.clone(),
                            telescope,
                            term,
                            ty,
                        }
                    }
                };
                self.globals.insert(name, Global::Term);
                Ok(decl)
            }
            Tok::Ident(kw) if kw == "assert" => {
                self.advance();
                let (telescope, locals) = self.binders()?;
                self.expect(Tok::Turnstile)?;
                let first = self.expr()?;
                if *self.peek() == Tok::EqEq {
                    self.advance();
                    let rhs = self.expr()?;
                    self.expect(Tok::Colon)?;
                    let ty = self.expr()?;
                    Ok(Decl::AssertEqual {
                        lhs: self.to_term(&first, &locals)?,
                        rhs: self.to_term(&rhs, &locals)?,
                        ty: self.to_type(&ty, &locals)?,
                        telescope,
                    })
                } else {
                    self.expect(Tok::Colon)?;
                    self.expect_keyword("Type")?;
                    Ok(Decl::AssertType {
                        ty: self.to_type(&first, &locals)?,
                        telescope,
                    })
                }
            }
            other => Err(ParseError::syntax(
                self.pos(),
                "`assume`, `define` or `assert`",
                other.describe(),
            )),
        }
    }

    fn binders(&mut self) -> PResult<(Telescope, Vec<String>)> {
        let mut tele = Telescope::new();
        let mut locals = Vec::new();
        while *self.peek() == Tok::LParen {
            self.advance();
            let mut names = vec![self.binder_name()?];
            while matches!(self.peek(), Tok::Ident(_)) {
                names.push(self.binder_name()?);
            }
            self.expect(Tok::Colon)?;
            let raw = self.expr()?;
            self.expect(Tok::RParen)?;
            for n in names {
                let ty = self.to_type(&raw, &locals)?;
                tele.push(n.clone(), ty);
                locals.push(n);
            }
        }
        Ok((tele, locals))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => !DECL_KEYWORDS.contains(&s.as_str()) && s != "Type",
            _ => false,
        }
    }

    fn expr(&mut self) -> PResult<Raw> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "elimR" || s == "elimL" => self.elim(),
            Tok::Ident(s) if !DECL_KEYWORDS.contains(&s.as_str()) && s != "Type" => {
                let pos = self.advance().1;
                let mut args = Vec::new();
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                Ok(Raw::App { head: s, pos, args })
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(ParseError::syntax(self.pos(), "a type or term", other.describe())),
        }
    }

    fn atom(&mut self) -> PResult<Raw> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let pos = self.advance().1;
                Ok(Raw::App {
                    head: s,
                    pos,
                    args: vec![],
                })
            }
            other => Err(ParseError::syntax(self.pos(), "an argument", other.describe())),
        }
    }

    fn elim(&mut self) -> PResult<Raw> {
        let (kw, pos) = self.advance();
        let side = match kw {
            Tok::Ident(s) if s == "elimR" => Side::Right,
            _ => Side::Left,
        };
        self.expect(Tok::LBracket)?;
        let theta_binder = self.binder_name()?;
        self.expect(Tok::Dot)?;
        let theta_motive = self.expr()?;
        self.expect(Tok::Semi)?;
        let motive_binders = [
            self.binder_name()?,
            self.binder_name()?,
            self.binder_name()?,
            self.binder_name()?,
        ];
        self.expect(Tok::Dot)?;
        let motive = self.expr()?;
        self.expect(Tok::Semi)?;
        let base_binders = [self.binder_name()?, self.binder_name()?];
        self.expect(Tok::Dot)?;
        let base = self.expr()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LParen)?;
        let hom = self.expr()?;
        self.expect(Tok::Comma)?;
        let theta = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Raw::Elim {
            side,
            pos,
            theta_binder,
            theta_motive: Box::new(theta_motive),
            motive_binders,
            motive: Box::new(motive),
            base_binders,
            base: Box::new(base),
            hom: Box::new(hom),
            theta: Box::new(theta),
        })
    }

    fn arity(head: &str, pos: Pos, args: &[Raw], expected: usize) -> PResult<()> {
        if args.len() == expected {
            Ok(())
        } else {
            Err(ParseError::new(
                pos,
                ParseErrorKind::Arity {
                    keyword: head.into(),
                    expected,
                    found: args.len(),
                },
            ))
        }
    }

    fn to_type(&self, raw: &Raw, locals: &[String]) -> PResult<Type> {
        let (head, pos, args) = match raw {
            Raw::App { head, pos, args } => (head.as_str(), *pos, args),
            Raw::Elim { pos, .. } => {
                return Err(ParseError::syntax(*pos, "a type", "an eliminator"));
            }
        };
        match head {
            "core" | "op" => {
                Self::arity(head, pos, args, 1)?;
                let inner = self.to_type(&args[0], locals)?;
                Ok(if head == "core" { Type::core(inner) } else { Type::op(inner) })
            }
            "hom" => {
                Self::arity(head, pos, args, 3)?;
                Ok(Type::hom(
                    self.to_type(&args[0], locals)?,
                    self.to_term(&args[1], locals)?,
                    self.to_term(&args[2], locals)?,
                ))
            }
            "i" | "iop" | "one" => Err(ParseError::syntax(pos, "a type", format!("the term former `{head}`"))),
            _ if locals.iter().any(|l| l == head) => Err(ParseError::new(
                pos,
                ParseErrorKind::WrongKind {
                    name: head.into(),
                    expected: "type",
                    actual: "variable",
                },
            )),
            _ => match self.globals.get(head) {
                Some(Global::Type) => {
                    let args = args
                        .iter()
                        .map(|a| self.to_term(a, locals))
                        .collect::<PResult<Vec<_>>>()?;
                    Ok(Type::base(head, args))
                }
                Some(Global::Term) => Err(ParseError::new(
                    pos,
                    ParseErrorKind::WrongKind {
                        name: head.into(),
                        expected: "type",
                        actual: "term constant",
                    },
                )),
                None => Err(ParseError::new(pos, ParseErrorKind::Unbound(head.into()))),
            },
        }
    }

    fn to_term(&self, raw: &Raw, locals: &[String]) -> PResult<Term> {
        match raw {
            Raw::Elim {
                side,
                theta_binder,
                theta_motive,
                motive_binders,
                motive,
                base_binders,
                base,
                hom,
                theta,
                ..
            } => {
                let with = |names: &[String]| {
                    let mut l = locals.to_vec();
                    l.extend(names.iter().cloned());
                    l
                };
                Ok(Term::elim(
                    *side,
                    self.to_type(theta_motive, &with(std::slice::from_ref(theta_binder)))?,
                    self.to_type(motive, &with(motive_binders))?,
                    self.to_term(base, &with(base_binders))?,
                    self.to_term(hom, locals)?,
                    self.to_term(theta, locals)?,
                ))
            }
            Raw::App { head, pos, args } => {
                let pos = *pos;
                match head.as_str() {
                    "i" | "iop" | "one" => {
                        Self::arity(head, pos, args, 1)?;
                        let t = self.to_term(&args[0], locals)?;
                        Ok(match head.as_str() {
                            "i" => Term::inc_core(t),
                            "iop" => Term::inc_op(t),
                            _ => Term::one(t),
                        })
                    }
                    "core" | "op" | "hom" => {
                        Err(ParseError::syntax(pos, "a term", format!("the type former `{head}`")))
                    }
                    _ => {
                        if let Some(k) = locals.iter().rev().position(|l| l == head) {
                            if !args.is_empty() {
                                return Err(ParseError::syntax(
                                    args[0].pos(),
                                    "end of variable application",
                                    "an argument",
                                ));
                            }
                            return Ok(Term::Var(k));
                        }
                        match self.globals.get(head) {
                            Some(Global::Term) => {
                                let args = args
                                    .iter()
                                    .map(|a| self.to_term(a, locals))
                                    .collect::<PResult<Vec<_>>>()?;
                                Ok(Term::constant(head.clone(), args))
                            }
                            Some(Global::Type) => Err(ParseError::new(
                                pos,
                                ParseErrorKind::WrongKind {
                                    name: head.clone(),
                                    expected: "term",
                                    actual: "base type",
                                },
                            )),
                            None => Err(ParseError::new(pos, ParseErrorKind::Unbound(head.clone()))),
                        }
                    }
                }
            }
        }
    }
}

/// Parse a `.dtt` file, resolving names to de Bruijn indices.
pub fn parse_dtt(text: &str) -> Result<SourceFile, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        globals: HashMap::new(),
    };
    p.file()
}
