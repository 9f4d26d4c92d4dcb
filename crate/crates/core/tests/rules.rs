use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dhott::checker::{check_file, read_header, Expectation};
use dhott::parser::parse_dtt;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn dtt_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(dtt_files(&path));
        } else if path.extension().is_some_and(|e| e == "dtt") {
            out.push(path);
        }
    }
    out.sort();
    out
}

const SCHEMAS: [&str; 8] = [
    "core-op-formation",
    "inclusions",
    "hom-formation",
    "hom-introduction",
    "right-elimination",
    "left-elimination",
    "right-computation",
    "left-computation",
];

#[test]
fn every_corpus_file_meets_its_header() {
    let mut seen: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for path in dtt_files(&corpus()) {
        let text = std::fs::read_to_string(&path).unwrap();
        let header = read_header(&text).unwrap();
        let report = check_file(&parse_dtt(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display())));
        let want = header.expect.clone().unwrap_or(Expectation::Ok);
        assert_eq!(report.verdict(), want, "{}", path.display());
        if let Some(schema) = header.schema {
            assert!(SCHEMAS.contains(&schema.as_str()), "{}: unknown schema {schema}", path.display());
            let e = seen.entry(schema).or_default();
            match want {
                Expectation::Ok => e.0 += 1,
                Expectation::Fail { .. } => e.1 += 1,
            }
        }
    }
    for s in SCHEMAS {
        let (pos, neg) = seen.get(s).copied().unwrap_or_default();
        assert!(pos >= 1 && neg >= 1, "{s}: {pos} positive, {neg} negative");
    }
}

#[test]
fn failures_are_charged_to_one_declaration() {
    // In a failing file exactly one declaration fails, the last one checked.
    for path in dtt_files(&corpus()) {
        let text = std::fs::read_to_string(&path).unwrap();
        let report = check_file(&parse_dtt(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display())));
        let failed: Vec<_> = report.failures().collect();
        if let Some((rec, _)) = failed.first() {
            assert_eq!(failed.len(), 1, "{}", path.display());
            assert_eq!(rec.label, report.records.last().unwrap().label, "{}", path.display());
        }
    }
}

#[test]
fn headers_parse() {
    let h = read_header("# rule: x\n# expect-fail: ElimR premise 5\nassume B : Type\n# expect: ok\n").unwrap();
    assert_eq!(h.schema.as_deref(), Some("x"));
    assert_eq!(h.expect, Some(Expectation::Fail { rule: dhott::checker::Rule::ElimR, premise: 5 }));
    assert!(read_header("# expect-fail: Nope premise 1").is_err());
}
