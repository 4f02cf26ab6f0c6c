use wgmerge::format::parse_nfa;
use wgmerge::oracle::exhaustive_corder;
use wgmerge::sat_merge::sat_merge;
use wgmerge::wheeler::Nfa;

fn load(name: &str) -> (Nfa, Vec<usize>) {
    let path = format!("{}/../cli/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let parsed = parse_nfa(&std::fs::read_to_string(path).unwrap()).unwrap();
    let order = parsed.order.unwrap_or_else(|| (0..parsed.nfa.node_count()).collect());
    (parsed.nfa, order)
}

#[test]
fn sat_answers_agree_with_search_on_fixtures() {
    for (pair, sat) in [("pair8", false), ("loop", false), ("collapse", true)] {
        let (a0, o0) = load(&format!("{pair}_first.nfa"));
        let (a1, o1) = load(&format!("{pair}_second.nfa"));
        let outcome = sat_merge(&a0, &o0, &a1, &o1).unwrap();
        assert_eq!(outcome.is_sat(), sat, "{pair}");
        let union = match &outcome {
            wgmerge::SatOutcome::Sat { union, .. } | wgmerge::SatOutcome::Unsat { union, .. } => union,
        };
        assert_eq!(exhaustive_corder(union).unwrap().is_some(), sat, "{pair}");
    }
}
