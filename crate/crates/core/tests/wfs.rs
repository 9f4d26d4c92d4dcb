use std::path::PathBuf;
use std::sync::Arc;

use dhott::fincat::{pullback_failure, FinCat, Functor, GrothTotal, Library, DEFAULT_NODE_CAP};
use dhott::interp::{load_scenario, standard_probes, verify_soundness, VerifyOptions};
use dhott::parser::parse_fincat;
use dhott::wfs::{
    alpha_iso, brute_force_lifts, elimination_problem, factor, opfib_lift, opfibration_problem, point_into_two,
    Flavor, WfsError, LIFT_NODE_CAP,
};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn library() -> Library {
    let text = std::fs::read_to_string(corpus("cats.fincat")).unwrap();
    Library::from_file(&parse_fincat(&text).unwrap()).unwrap()
}

fn test_functors(lib: &Library) -> Vec<(String, Functor)> {
    let mut out: Vec<(String, Functor)> = lib
        .categories
        .iter()
        .map(|(n, c)| (format!("id_{n}"), Functor::identity(c)))
        .collect();
    out.extend(lib.functors.iter().map(|(n, f)| (n.clone(), f.clone())));
    for (n, fam) in &lib.families {
        out.push((format!("π_{n}"), GrothTotal::new(fam).unwrap().projection));
    }
    out
}

#[test]
fn factorizations_compose_to_the_original() {
    let lib = library();
    for (name, f) in test_functors(&lib) {
        for flavor in [Flavor::Arrow, Flavor::Iso] {
            let fact = factor(&f, flavor);
            fact.verify().unwrap_or_else(|e| panic!("{name} {flavor}: {e}"));
            // Objects of the middle are pairs (c, g) with g out of F c.
            let d = &f.target;
            let keep = |g: usize| flavor == Flavor::Arrow || d.is_iso(g);
            let want: usize = (0..f.source.object_count())
                .map(|c| d.outgoing(f.obj[c]).iter().filter(|&&g| keep(g)).count())
                .sum();
            assert_eq!(fact.middle.object_count(), want, "{name} {flavor}");
        }
    }
}

#[test]
fn middle_is_a_pullback() {
    let lib = library();
    let probes = standard_probes();
    for (name, f) in test_functors(&lib) {
        if f.source.object_count() > 3 || f.target.object_count() > 3 {
            continue;
        }
        let fact = factor(&f, Flavor::Arrow);
        let pb = &fact.pullback;
        let r = pullback_failure(&pb.right, &pb.left, &fact.arrows.dom, &f, &probes, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r, None, "{name}");
    }
}

#[test]
fn factor_of_identity_on_point_and_two() {
    let lib = library();
    let point = lib.category("Point").unwrap();
    let fact = factor(&Functor::identity(&point), Flavor::Arrow);
    assert_eq!((fact.middle.object_count(), fact.middle.morphism_count()), (1, 1));
    // For 𝟚 the middle is 𝟚^𝟚 restricted along dom: three arrows 0→0, 0→1, 1→1.
    let two = lib.category("Two").unwrap();
    let fact = factor(&Functor::identity(&two), Flavor::Arrow);
    assert_eq!(fact.middle.object_count(), 3);
    let fact = factor(&Functor::identity(&two), Flavor::Iso);
    assert_eq!(fact.middle.object_count(), 2);
    assert_eq!(fact.left.obj.len(), 2);
}

#[test]
fn projections_lift_against_their_left_legs() {
    let lib = library();
    for (name, fam) in &lib.families {
        let p = GrothTotal::new(fam).unwrap().projection;
        let (prob, witness) = opfib_lift(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
        witness.verify(&prob).unwrap();
        let all = brute_force_lifts(&prob, LIFT_NODE_CAP).unwrap();
        assert!(all.contains(&witness), "{name}: chosen lift not found by search");
    }
}

#[test]
fn non_opfibration_has_no_lift() {
    let p = point_into_two();
    match opfib_lift(&p) {
        Err(WfsError::MissingLift { .. }) => {}
        other => panic!("expected a missing lift, got {other:?}"),
    }
    let (prob, _) = opfibration_problem(&p);
    assert!(brute_force_lifts(&prob, LIFT_NODE_CAP).unwrap().is_empty());
}

#[test]
fn cartesian_but_not_cocartesian_fails() {
    // The projection of a contravariant family over 𝟚 (the domain fibration of
    // 𝟚, an inclusion 1 → 𝟚 picking out the codomain) lifts nothing out of 0.
    let lib = library();
    let two = lib.category("Two").unwrap();
    let pt = lib.category("Point").unwrap();
    let p = Functor::constant(&pt, &two, 1);
    // Over 1 every base arrow out of 1 is an identity, so this one does lift.
    opfib_lift(&p).unwrap();
    let (prob, _) = opfibration_problem(&p);
    assert_eq!(brute_force_lifts(&prob, LIFT_NODE_CAP).unwrap().len(), 1);
}

#[test]
fn alpha_is_an_isomorphism() {
    let lib = library();
    for (name, c) in &lib.categories {
        let (iso, report) = alpha_iso(c).unwrap();
        assert!(report.ok(), "{name}: {report:?}");
        assert_eq!(iso.alpha.source.object_count(), c.morphism_count(), "{name}");
    }
}

#[test]
fn alpha_on_point_and_two() {
    let lib = library();
    let point = lib.category("Point").unwrap();
    let (iso, report) = alpha_iso(&point).unwrap();
    assert!(report.ok());
    assert_eq!(iso.alpha.source.object_count(), 1);
    let two = lib.category("Two").unwrap();
    let (iso, report) = alpha_iso(&two).unwrap();
    assert!(report.ok());
    // ((0,0),id), ((0,1),a), ((1,1),id); one non-identity morphism (1_0, a).
    assert_eq!(iso.alpha.source.object_count(), 3);
    assert_eq!(iso.alpha.source.morphism_count(), 4);
}

#[test]
fn swapped_alpha_is_not_inverse() {
    // Negative control: composing α with a nontrivial automorphism of the middle
    // breaks the left-leg equation.
    let lib = library();
    let iso_cat: Arc<FinCat> = lib.category("Iso").unwrap();
    let (iso, _) = alpha_iso(&iso_cat).unwrap();
    let m = &iso.factorization.middle;
    let autos = dhott::fincat::FunctorSearch::new(m, m).all().unwrap();
    let nontrivial: Vec<_> = autos
        .into_iter()
        .filter(|g| *g != Functor::identity(m) && dhott::interp::invert(g).is_some())
        .collect();
    assert!(!nontrivial.is_empty());
    for g in nontrivial {
        let bent = g.after(&iso.alpha);
        let ok = bent.after(&iso.context.one) == iso.factorization.left && bent.after(&iso.inverse) == Functor::identity(m);
        assert!(!ok);
    }
}

#[test]
fn eliminators_are_lifts() {
    for scn in ["closed.scn"] {
        let loaded = load_scenario(&corpus(scn)).unwrap();
        let interp = loaded.interpreter().unwrap();
        let records = verify_soundness(&interp, &loaded.source, &VerifyOptions::default());
        assert!(records.iter().all(|r| r.pass));
        let elims = interp.take_elims();
        assert!(!elims.is_empty(), "{scn}");
        // Squares whose upper corner exceeds the size cap are skipped.
        let mut checked = Vec::new();
        for inst in &elims {
            match elimination_problem(inst) {
                Ok((prob, lift)) => {
                    lift.verify(&prob).unwrap_or_else(|e| panic!("{scn} {:?}: {e}", inst.side));
                    checked.push((prob, lift));
                }
                Err(WfsError::FinCat(dhott::fincat::FinCatError::TooLarge { .. })) => {}
                Err(e) => panic!("{scn}: {e}"),
            }
        }
        assert_eq!(checked.len(), elims.len(), "{scn}");
        // Exhaustive check on the smallest instance.
        let (prob, lift) = checked.iter().min_by_key(|(p, _)| p.p.source.morphism_count()).unwrap();
        let all = brute_force_lifts(prob, LIFT_NODE_CAP).unwrap();
        assert!(all.contains(lift), "{scn}");
    }
}
