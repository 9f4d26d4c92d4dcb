use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn dhott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhott"))
        .args(args)
        .env("DHOTT_CORPUS", corpus())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_reports_transport() {
    let o = dhott(&["check", "transport.dtt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("transport_R : S t′ OK"), "{}", stdout(&o));
}

#[test]
fn bad_intro_names_the_premise() {
    let o = dhott(&["check", "bad-intro.dtt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("HomIntro premise 2"));
}

#[test]
fn rule_files_meet_their_headers() {
    let mut args = vec!["check".to_string(), "--expect".to_string()];
    for e in std::fs::read_dir(corpus().join("rules")).unwrap() {
        args.push(e.unwrap().path().display().to_string());
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = dhott(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn parse_errors_exit_two() {
    let dir = std::env::temp_dir().join(format!("dhott-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.dtt");
    std::fs::write(&bad, "assume B : : Type\n").unwrap();
    assert_eq!(dhott(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dhott(&["check", "missing.dtt"]).status.code(), Some(2));
    let pv = dir.join("bad.pv");
    std::fs::write(&pv, "A: P(m)\n").unwrap();
    assert_eq!(dhott(&["pv", pv.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dhott(&["--size-cap", "65", "pv", "swissflag.pv"]).status.code(), Some(2));
}

#[test]
fn swiss_flag_renders_both_complements() {
    let o = dhott(&["pv", "swissflag.pv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("unreachable (3,3)") && out.contains("unsafe (1,1)"), "{out}");
    let rec = stdout(&dhott(&["--format", "records", "pv", "swissflag.pv"]));
    assert!(rec.lines().any(|l| l.starts_with("unreachable\t") && l.ends_with("\tok\t(3,3)")), "{rec}");
}

#[test]
fn records_are_tab_separated_with_four_fields() {
    let o = dhott(&["--format", "records", "interp", "closed.scn"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 4, "{line}");
        assert_eq!(fields[2], "ok", "{line}");
    }
}

#[test]
fn wfs_with_oracle_passes_on_the_corpus() {
    let o = dhott(&["--oracle", "wfs", "cats.fincat", "closed.scn"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("lift-oracle OK"));
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["--format", "records", "wfs", "cats.fincat"][..],
        &["interp", "transport.scn"][..],
        &["check", "comp.dtt"][..],
    ] {
        assert_eq!(dhott(args).stdout, dhott(args).stdout, "{args:?}");
    }
}
