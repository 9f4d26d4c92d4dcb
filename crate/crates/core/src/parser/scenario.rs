//! `.scn` scenario files binding the signature of a theory to finite categories.
//!
//! ```text
//! theory transport.dtt
//! categories small.fincat
//! bind B = cat Two
//! bind S = family S_Two
//! bind c = object 0
//! bind g = arrow a
//! bind k = section k_sec
//! ```
//!
//! Paths are relative to the scenario file. `cat` and `family` bind base types,
//! the rest bind term constants.

use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BindingKind {
    Cat,
    Family,
    Object,
    Arrow,
    Section,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub kind: BindingKind,
    pub target: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub theory: String,
    pub categories: Vec<String>,
    pub bindings: Vec<Binding>,
}

impl Scenario {
    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == name)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut scn = Scenario::default();
    let mut theory = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<(usize, &str)> = line
            .split_whitespace()
            .map(|w| (w.as_ptr() as usize - line.as_ptr() as usize + 1, w))
            .collect();
        let at = |i: usize| Pos {
            line: ln + 1,
            col: words.get(i).map(|w| w.0).unwrap_or(line.len() + 1),
        };
        let found = |i: usize| {
            words
                .get(i)
                .map(|w| format!("`{}`", w.1))
                .unwrap_or_else(|| "end of line".into())
        };
        match words.first().map(|w| w.1) {
            None => continue,
            Some("theory") | Some("categories") => {
                if words.len() != 2 {
                    return Err(ParseError::syntax(at(2.min(words.len())), "one path", found(2)));
                }
                if words[0].1 == "theory" {
                    if theory.is_some() {
                        return Err(ParseError::new(at(0), ParseErrorKind::Duplicate("theory".into())));
                    }
                    theory = Some(words[1].1.to_string());
                } else {
                    scn.categories.push(words[1].1.to_string());
                }
            }
            Some("bind") => {
                if words.len() != 5 || words[2].1 != "=" {
                    let bad = if words.len() > 2 && words[2].1 != "=" { 2 } else { words.len().min(5) };
                    return Err(ParseError::syntax(at(bad), "`bind NAME = KIND TARGET`", found(bad)));
                }
                let kind = match words[3].1 {
                    "cat" => BindingKind::Cat,
                    "family" => BindingKind::Family,
                    "object" => BindingKind::Object,
                    "arrow" => BindingKind::Arrow,
                    "section" => BindingKind::Section,
                    _ => {
                        return Err(ParseError::syntax(
                            at(3),
                            "`cat`, `family`, `object`, `arrow` or `section`",
                            found(3),
                        ))
                    }
                };
                let name = words[1].1.to_string();
                if scn.binding(&name).is_some() {
                    return Err(ParseError::new(at(1), ParseErrorKind::Duplicate(name)));
                }
                scn.bindings.push(Binding {
                    name,
                    kind,
                    target: words[4].1.to_string(),
                    pos: at(1),
                });
            }
            Some(_) => {
                return Err(ParseError::syntax(at(0), "`theory`, `categories` or `bind`", found(0)));
            }
        }
    }
    scn.theory = theory.ok_or_else(|| {
        ParseError::syntax(
            Pos {
                line: text.lines().count().max(1),
                col: 1,
            },
            "a `theory` line",
            "end of input",
        )
    })?;
    Ok(scn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bindings() {
        let s = parse_scenario("theory t.dtt\ncategories c.fincat\nbind B = cat Two # base\n").unwrap();
        assert_eq!(s.theory, "t.dtt");
        assert_eq!(s.bindings[0].kind, BindingKind::Cat);
        assert_eq!(s.bindings[0].pos, Pos { line: 3, col: 6 });
    }

    #[test]
    fn rejects_unknown_kind() {
        let e = parse_scenario("theory t.dtt\nbind B = set X").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 10 });
    }
}
