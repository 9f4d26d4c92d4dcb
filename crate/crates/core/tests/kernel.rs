mod common;

use common::{
    base_context, canonical, goal_types, named_substitute, signature, step_to_normal, untyped_term, Gen, Namer,
};
use dhott::checker::Checker;
use dhott::kernel::{reduce, substitute, Syntax};
use dhott::parser::{parse_dtt, print_decl, Decl};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SCOPE: usize = 8;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn substitution_agrees_with_named_substitution(seed: u64, depth in 0..SCOPE) {
        let mut r = rng(seed);
        let t = untyped_term(&mut r, SCOPE, 5);
        let u = untyped_term(&mut r, SCOPE - 1, 3);
        let got = substitute(&t, depth, &u);
        prop_assert!(got.is_well_scoped(SCOPE - 1));
        let mut namer = Namer::new();
        let named_t = namer.term(&t, &mut Vec::new(), "in");
        let named_u = namer.term(&u, &mut Vec::new(), "out");
        let want = named_substitute(&named_t, depth, &named_u);
        let got = namer.term(&got, &mut Vec::new(), "out");
        prop_assert_eq!(canonical(&got), canonical(&want));
    }

    #[test]
    fn reduce_commutes_with_substitution(seed: u64, depth in 0..SCOPE) {
        let mut r = rng(seed);
        let t = untyped_term(&mut r, SCOPE, 6);
        let u = untyped_term(&mut r, SCOPE - 1, 4);
        let direct = reduce(&substitute(&t, depth, &u));
        let staged = reduce(&substitute(&reduce(&t), depth, &reduce(&u)));
        prop_assert!(direct.is_well_scoped(SCOPE - 1));
        prop_assert_eq!(direct, staged);
    }

    #[test]
    fn reduce_is_idempotent_and_matches_single_steps(seed: u64) {
        let t = untyped_term(&mut rng(seed), SCOPE, 6);
        let nf = reduce(&t);
        prop_assert!(nf.is_well_scoped(SCOPE));
        prop_assert_eq!(reduce(&nf), nf.clone());
        let (stepped, _) = step_to_normal(&t, 100_000);
        prop_assert_eq!(stepped, nf);
    }

    #[test]
    fn well_typed_terms_print_and_parse_back(seed: u64) {
        let sig = signature();
        let ctx = base_context();
        let goals = goal_types();
        let mut g = Gen::new(&sig, rng(seed));
        let ty = goals[(seed % goals.len() as u64) as usize].clone();
        if let Some(term) = g.term(&ctx, &ty, 3) {
            let decl = Decl::Define { name: "t".into(), telescope: ctx, term, ty };
            let text = format!("{}{}\n", common::SIGNATURE, print_decl(&decl));
            let file = parse_dtt(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(&file.decls.last().unwrap().node, &decl);
        }
    }
}

#[test]
fn reduction_preserves_types() {
    let sig = signature();
    let ctx = base_context();
    let checker = Checker::new(&sig);
    let goals = goal_types();
    let mut g = Gen::new(&sig, rng(11));
    let mut made = 0;
    for k in 0..500 {
        let ty = &goals[k % goals.len()];
        let Some(t) = g.term(&ctx, ty, 3) else { continue };
        checker.check_term(&ctx, &t, ty).unwrap_or_else(|e| panic!("generated ill-typed term: {e}"));
        let nf = reduce(&t);
        checker.check_term(&ctx, &nf, ty).unwrap_or_else(|e| panic!("{e}"));
        made += 1;
    }
    assert!(made > 400);
}

#[test]
fn duplicated_stuck_eliminator_keeps_the_count() {
    // The base uses θ twice and θ is a stuck left eliminator, so contracting the
    // outer redex copies it: one step takes two eliminators to two.
    let text = format!(
        "{}assume a : core B
assume c : op B
assume g : hom B c (i a)
assume x : S (i a)
define t : S (i a) := elimR[u. S (i u); u v k h. S v; u h. merge (i u) h h](one a, elimL[u. op B; p q k h. S (i a); u h. x](g, c))
",
        common::SIGNATURE
    );
    let file = parse_dtt(&text).unwrap();
    let report = dhott::checker::check_file(&file);
    assert!(report.all_ok());
    let Decl::Define { term, .. } = &file.decls.last().unwrap().node else { panic!() };
    let next = dhott::kernel::step(term).unwrap();
    assert_eq!((term.elim_count(), next.elim_count()), (2, 2));
    let (nf, violation) = step_to_normal(term, 100);
    assert!(violation.is_some());
    assert_eq!(nf, reduce(term));
}
