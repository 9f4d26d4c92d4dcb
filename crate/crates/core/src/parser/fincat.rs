//! `.fincat` files: finite categories, functors, natural transformations,
//! families over a base category and their sections.
//!
//! ```text
//! category Two {
//!   objects 0 1
//!   arrow a : 0 -> 1
//!   compose g f = h        # g after f
//! }
//! functor F : A -> B { object x => y ; arrow f => g }
//! nat eta : F => G { at x = m }
//! family S over C { fiber x = Cat ; map f = F }
//! section s of S { at x = y ; along f = g }
//! ```
//!
//! Statements end at a newline or `;`. Names are any run of characters other than
//! whitespace, `{`, `}`, `;` and `#`, so `(x,y)` or `*` are valid names; the
//! separators `:`, `->`, `=>` and `=` must stand on their own. Identities are
//! implicit and called `id_x`.

use std::collections::{HashMap, HashSet};

use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowDecl {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

/// `compose g f = h`, i.e. `g ∘ f = h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub g: String,
    pub f: String,
    pub h: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatBlock {
    pub name: String,
    pub pos: Pos,
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowDecl>,
    pub composites: Vec<Composite>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorBlock {
    pub name: String,
    pub pos: Pos,
    pub source: String,
    pub target: String,
    pub objects: Vec<(String, String)>,
    pub arrows: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatBlock {
    pub name: String,
    pub pos: Pos,
    pub source: String,
    pub target: String,
    pub components: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyBlock {
    pub name: String,
    pub pos: Pos,
    pub base: String,
    pub fibers: Vec<(String, String)>,
    pub maps: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionBlock {
    pub name: String,
    pub pos: Pos,
    pub family: String,
    pub objects: Vec<(String, String)>,
    pub arrows: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatFile {
    pub categories: Vec<CatBlock>,
    pub functors: Vec<FunctorBlock>,
    pub nats: Vec<NatBlock>,
    pub families: Vec<FamilyBlock>,
    pub sections: Vec<SectionBlock>,
}

impl CatFile {
    pub fn category(&self, name: &str) -> Option<&CatBlock> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn functor(&self, name: &str) -> Option<&FunctorBlock> {
        self.functors.iter().find(|c| c.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyBlock> {
        self.families.iter().find(|c| c.name == name)
    }

    pub fn section(&self, name: &str) -> Option<&SectionBlock> {
        self.sections.iter().find(|c| c.name == name)
    }

    pub fn nat(&self, name: &str) -> Option<&NatBlock> {
        self.nats.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Open,
    Close,
    End,
    Eof,
}

fn lex(text: &str) -> Vec<(Tok, Pos)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut chars = line.char_indices().peekable();
        let mut col = 0;
        let mut word: Option<(String, Pos)> = None;
        let flush = |word: &mut Option<(String, Pos)>, out: &mut Vec<(Tok, Pos)>| {
            if let Some((w, p)) = word.take() {
                out.push((Tok::Word(w), p));
            }
        };
        while let Some((_, c)) = chars.next() {
            col += 1;
            let pos = Pos { line: ln + 1, col };
            match c {
                '{' | '}' | ';' => {
                    flush(&mut word, &mut out);
                    out.push((
                        match c {
                            '{' => Tok::Open,
                            '}' => Tok::Close,
                            _ => Tok::End,
                        },
                        pos,
                    ));
                }
                c if c.is_whitespace() => flush(&mut word, &mut out),
                c => match &mut word {
                    Some((w, _)) => w.push(c),
                    None => word = Some((c.to_string(), pos)),
                },
            }
        }
        flush(&mut word, &mut out);
        out.push((
            Tok::End,
            Pos {
                line: ln + 1,
                col: col + 1,
            },
        ));
    }
    let last = out.last().map(|t| t.1).unwrap_or(Pos { line: 1, col: 1 });
    out.push((Tok::Eof, last));
    out
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Open => "`{`".into(),
        Tok::Close => "`}`".into(),
        Tok::End => "end of statement".into(),
        Tok::Eof => "end of input".into(),
    }
}

const SEPARATORS: &[&str] = &[":", "->", "=>", "="];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
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

    fn skip_ends(&mut self) {
        while *self.peek() == Tok::End {
            self.advance();
        }
    }

    fn word(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Word(w) if !SEPARATORS.contains(&w.as_str()) => {
                let p = self.advance().1;
                Ok((w, p))
            }
            t => Err(ParseError::syntax(self.pos(), what, describe(&t))),
        }
    }

    fn sep(&mut self, s: &str) -> PResult<()> {
        match self.peek() {
            Tok::Word(w) if w == s => {
                self.advance();
                Ok(())
            }
            t => Err(ParseError::syntax(self.pos(), format!("`{s}`"), describe(t))),
        }
    }

    fn end_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::End => {
                self.advance();
                Ok(())
            }
            Tok::Close => Ok(()),
            t => Err(ParseError::syntax(self.pos(), "end of statement", describe(t))),
        }
    }

    fn open(&mut self) -> PResult<()> {
        self.skip_ends();
        match self.peek() {
            Tok::Open => {
                self.advance();
                Ok(())
            }
            t => Err(ParseError::syntax(self.pos(), "`{`", describe(t))),
        }
    }

    /// Statements of a block until the closing brace; `f` handles one statement
    /// given its leading keyword.
    fn block(&mut self, mut f: impl FnMut(&mut Self, &str, Pos) -> PResult<()>) -> PResult<()> {
        self.open()?;
        loop {
            self.skip_ends();
            match self.peek().clone() {
                Tok::Close => {
                    self.advance();
                    return Ok(());
                }
                Tok::Word(kw) => {
                    let pos = self.advance().1;
                    f(self, &kw, pos)?;
                    self.end_statement()?;
                }
                t => return Err(ParseError::syntax(self.pos(), "a statement or `}`", describe(&t))),
            }
        }
    }
}

fn bad_keyword(pos: Pos, kw: &str, allowed: &str) -> ParseError {
    ParseError::syntax(pos, allowed.to_string(), format!("`{kw}`"))
}

/// Arrow names of a category block, including the implicit identities.
fn arrows_of(c: &CatBlock) -> HashMap<String, (String, String)> {
    let mut m: HashMap<String, (String, String)> = c
        .objects
        .iter()
        .map(|o| (format!("id_{o}"), (o.clone(), o.clone())))
        .collect();
    for a in &c.arrows {
        m.insert(a.name.clone(), (a.dom.clone(), a.cod.clone()));
    }
    m
}

fn category_block(p: &mut Parser, name: String, pos: Pos) -> PResult<CatBlock> {
    let mut c = CatBlock {
        name,
        pos,
        objects: vec![],
        arrows: vec![],
        composites: vec![],
    };
    let mut objects: HashSet<String> = HashSet::new();
    let mut arrows: HashSet<String> = HashSet::new();
    p.block(|p, kw, kw_pos| match kw {
        "objects" => {
            while let Tok::Word(_) = p.peek() {
                let (o, op) = p.word("an object name")?;
                if !objects.insert(o.clone()) {
                    return Err(ParseError::new(op, ParseErrorKind::Duplicate(o)));
                }
                arrows.insert(format!("id_{o}"));
                c.objects.push(o);
            }
            Ok(())
        }
        "arrow" => {
            let (a, ap) = p.word("an arrow name")?;
            p.sep(":")?;
            let (dom, dp) = p.word("an object")?;
            p.sep("->")?;
            let (cod, cp) = p.word("an object")?;
            for (o, op) in [(&dom, dp), (&cod, cp)] {
                if !objects.contains(o) {
                    return Err(ParseError::new(op, ParseErrorKind::UnknownObject(o.clone())));
                }
            }
            if !arrows.insert(a.clone()) {
                return Err(ParseError::new(ap, ParseErrorKind::Duplicate(a)));
            }
            c.arrows.push(ArrowDecl { name: a, dom, cod });
            Ok(())
        }
        "compose" => {
            let (g, gp) = p.word("an arrow")?;
            let (f, fp) = p.word("an arrow")?;
            p.sep("=")?;
            let (h, hp) = p.word("an arrow")?;
            for (a, ap) in [(&g, gp), (&f, fp), (&h, hp)] {
                if !arrows.contains(a) {
                    return Err(ParseError::new(ap, ParseErrorKind::UnknownArrow(a.clone())));
                }
            }
            c.composites.push(Composite { g, f, h });
            Ok(())
        }
        _ => Err(bad_keyword(kw_pos, kw, "`objects`, `arrow` or `compose`")),
    })?;
    Ok(c)
}

fn lookup<'a, T>(items: &'a [T], name: &str, pos: Pos, get: impl Fn(&T) -> &str) -> PResult<&'a T> {
    items
        .iter()
        .find(|i| get(i) == name)
        .ok_or_else(|| ParseError::new(pos, ParseErrorKind::Unbound(name.into())))
}

fn check_object(c: &CatBlock, o: &str, pos: Pos) -> PResult<()> {
    if c.objects.iter().any(|x| x == o) {
        Ok(())
    } else {
        Err(ParseError::new(pos, ParseErrorKind::UnknownObject(o.into())))
    }
}

fn check_arrow(c: &CatBlock, a: &str, pos: Pos) -> PResult<()> {
    if arrows_of(c).contains_key(a) {
        Ok(())
    } else {
        Err(ParseError::new(pos, ParseErrorKind::UnknownArrow(a.into())))
    }
}

/// Parse a `.fincat` file. Names must be declared before use; category laws are
/// left to validation.
pub fn parse_fincat(text: &str) -> Result<CatFile, ParseError> {
    let mut p = Parser { toks: lex(text), at: 0 };
    let mut file = CatFile::default();
    let mut names: HashSet<String> = HashSet::new();
    loop {
        p.skip_ends();
        let (kw, kw_pos) = match p.peek().clone() {
            Tok::Eof => return Ok(file),
            Tok::Word(w) => (w, p.advance().1),
            t => return Err(ParseError::syntax(p.pos(), "a block", describe(&t))),
        };
        let (name, name_pos) = p.word("a block name")?;
        if !names.insert(name.clone()) {
            return Err(ParseError::new(name_pos, ParseErrorKind::Duplicate(name)));
        }
        match kw.as_str() {
            "category" => {
                let c = category_block(&mut p, name, kw_pos)?;
                file.categories.push(c);
            }
            "functor" => {
                p.sep(":")?;
                let (source, sp) = p.word("a category")?;
                p.sep("->")?;
                let (target, tp) = p.word("a category")?;
                let src = lookup(&file.categories, &source, sp, |c| &c.name)?.clone();
                let tgt = lookup(&file.categories, &target, tp, |c| &c.name)?.clone();
                let mut b = FunctorBlock {
                    name,
                    pos: kw_pos,
                    source,
                    target,
                    objects: vec![],
                    arrows: vec![],
                };
                p.block(|p, kw, kw_pos| {
                    let (a, ap) = p.word("a name")?;
                    p.sep("=>")?;
                    let (x, xp) = p.word("a name")?;
                    match kw {
                        "object" => {
                            check_object(&src, &a, ap)?;
                            check_object(&tgt, &x, xp)?;
                            b.objects.push((a, x));
                        }
                        "arrow" => {
                            check_arrow(&src, &a, ap)?;
                            check_arrow(&tgt, &x, xp)?;
                            b.arrows.push((a, x));
                        }
                        _ => return Err(bad_keyword(kw_pos, kw, "`object` or `arrow`")),
                    }
                    Ok(())
                })?;
                file.functors.push(b);
            }
            "nat" => {
                p.sep(":")?;
                let (source, sp) = p.word("a functor")?;
                p.sep("=>")?;
                let (target, tp) = p.word("a functor")?;
                let f = lookup(&file.functors, &source, sp, |f| &f.name)?;
                lookup(&file.functors, &target, tp, |f| &f.name)?;
                let dom = lookup(&file.categories, &f.source, sp, |c| &c.name)?.clone();
                let cod = lookup(&file.categories, &f.target, sp, |c| &c.name)?.clone();
                let mut b = NatBlock {
                    name,
                    pos: kw_pos,
                    source,
                    target,
                    components: vec![],
                };
                p.block(|p, kw, kw_pos| {
                    if kw != "at" {
                        return Err(bad_keyword(kw_pos, kw, "`at`"));
                    }
                    let (x, xp) = p.word("an object")?;
                    p.sep("=")?;
                    let (m, mp) = p.word("an arrow")?;
                    check_object(&dom, &x, xp)?;
                    check_arrow(&cod, &m, mp)?;
                    b.components.push((x, m));
                    Ok(())
                })?;
                file.nats.push(b);
            }
            "family" => {
                p.sep("over")?;
                let (base, bp) = p.word("a category")?;
                let base_cat = lookup(&file.categories, &base, bp, |c| &c.name)?.clone();
                let mut b = FamilyBlock {
                    name,
                    pos: kw_pos,
                    base,
                    fibers: vec![],
                    maps: vec![],
                };
                let cats: HashSet<String> = file.categories.iter().map(|c| c.name.clone()).collect();
                let functors: HashSet<String> = file.functors.iter().map(|c| c.name.clone()).collect();
                p.block(|p, kw, kw_pos| {
                    let (a, ap) = p.word("a name")?;
                    p.sep("=")?;
                    let (x, xp) = p.word("a name")?;
                    match kw {
                        "fiber" => {
                            check_object(&base_cat, &a, ap)?;
                            if !cats.contains(&x) {
                                return Err(ParseError::new(xp, ParseErrorKind::Unbound(x)));
                            }
                            b.fibers.push((a, x));
                        }
                        "map" => {
                            check_arrow(&base_cat, &a, ap)?;
                            if !functors.contains(&x) {
                                return Err(ParseError::new(xp, ParseErrorKind::Unbound(x)));
                            }
                            b.maps.push((a, x));
                        }
                        _ => return Err(bad_keyword(kw_pos, kw, "`fiber` or `map`")),
                    }
                    Ok(())
                })?;
                file.families.push(b);
            }
            "section" => {
                p.sep("of")?;
                let (family, fp) = p.word("a family")?;
                lookup(&file.families, &family, fp, |f| &f.name)?;
                let mut b = SectionBlock {
                    name,
                    pos: kw_pos,
                    family,
                    objects: vec![],
                    arrows: vec![],
                };
                p.block(|p, kw, kw_pos| {
                    let (a, _) = p.word("a name")?;
                    p.sep("=")?;
                    let (x, _) = p.word("a name")?;
                    match kw {
                        "at" => b.objects.push((a, x)),
                        "along" => b.arrows.push((a, x)),
                        _ => return Err(bad_keyword(kw_pos, kw, "`at` or `along`")),
                    }
                    Ok(())
                })?;
                file.sections.push(b);
            }
            other => {
                return Err(bad_keyword(
                    kw_pos,
                    other,
                    "`category`, `functor`, `nat`, `family` or `section`",
                ))
            }
        }
    }
}

/// Print a `.fincat` file; `parse_fincat(print_fincat(f))` gives back `f` up to positions.
pub fn print_fincat(file: &CatFile) -> String {
    let mut out = String::new();
    for c in &file.categories {
        out.push_str(&format!("category {} {{\n", c.name));
        if !c.objects.is_empty() {
            out.push_str(&format!("  objects {}\n", c.objects.join(" ")));
        }
        for a in &c.arrows {
            out.push_str(&format!("  arrow {} : {} -> {}\n", a.name, a.dom, a.cod));
        }
        for k in &c.composites {
            out.push_str(&format!("  compose {} {} = {}\n", k.g, k.f, k.h));
        }
        out.push_str("}\n");
    }
    for f in &file.functors {
        out.push_str(&format!("functor {} : {} -> {} {{\n", f.name, f.source, f.target));
        for (a, b) in &f.objects {
            out.push_str(&format!("  object {a} => {b}\n"));
        }
        for (a, b) in &f.arrows {
            out.push_str(&format!("  arrow {a} => {b}\n"));
        }
        out.push_str("}\n");
    }
    for n in &file.nats {
        out.push_str(&format!("nat {} : {} => {} {{\n", n.name, n.source, n.target));
        for (a, b) in &n.components {
            out.push_str(&format!("  at {a} = {b}\n"));
        }
        out.push_str("}\n");
    }
    for f in &file.families {
        out.push_str(&format!("family {} over {} {{\n", f.name, f.base));
        for (a, b) in &f.fibers {
            out.push_str(&format!("  fiber {a} = {b}\n"));
        }
        for (a, b) in &f.maps {
            out.push_str(&format!("  map {a} = {b}\n"));
        }
        out.push_str("}\n");
    }
    for s in &file.sections {
        out.push_str(&format!("section {} of {} {{\n", s.name, s.family));
        for (a, b) in &s.objects {
            out.push_str(&format!("  at {a} = {b}\n"));
        }
        for (a, b) in &s.arrows {
            out.push_str(&format!("  along {a} = {b}\n"));
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walking_arrow() {
        let f = parse_fincat("category Two {\n  objects 0 1\n  arrow a : 0 -> 1\n}\n").unwrap();
        let c = &f.categories[0];
        assert_eq!(c.objects, vec!["0", "1"]);
        assert_eq!(
            c.arrows,
            vec![ArrowDecl {
                name: "a".into(),
                dom: "0".into(),
                cod: "1".into()
            }]
        );
    }

    #[test]
    fn empty_category() {
        let f = parse_fincat("category E { }").unwrap();
        assert!(f.categories[0].objects.is_empty());
    }

    #[test]
    fn composite_with_undeclared_arrow() {
        let e = parse_fincat("category C {\n objects x\n compose g id_x = g\n}").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownArrow("g".into()));
        assert_eq!(e.pos, Pos { line: 3, col: 10 });
    }

    #[test]
    fn arrow_with_unknown_object() {
        let e = parse_fincat("category C { objects x ; arrow f : x -> y }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownObject("y".into()));
    }

    #[test]
    fn punctuated_names_and_round_trip() {
        let src = "category P {\n objects (x,y) *\n arrow (f,g) : (x,y) -> *\n}\n\
                   functor F : P -> P { object * => * ; arrow id_* => id_* }\n";
        let f = parse_fincat(src).unwrap();
        assert_eq!(f.categories[0].objects, vec!["(x,y)", "*"]);
        let again = parse_fincat(&print_fincat(&f)).unwrap();
        assert_eq!(print_fincat(&again), print_fincat(&f));
    }
}
