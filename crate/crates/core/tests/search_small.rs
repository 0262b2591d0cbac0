//! The multiplicity-1 search against the reference corpus, plus search
//! semantics that are cheap to exercise: thread-count determinism, gcd
//! modes, rational-only screening, and subset monotonicity.

use std::collections::BTreeSet;

use opident_core::consequences::build_template;
use opident_core::families::builtin;
use opident_core::search::{
    read_solutions_csv, run_search, write_solutions_csv, GcdFilter, ScreenMode, SearchConfig,
};

fn corpus_mult1() -> Vec<(Vec<i64>, usize)> {
    read_solutions_csv(builtin::SOLUTIONS_DEG3_MULT1)
        .unwrap()
        .into_iter()
        .map(|s| (s.vector.0.clone(), s.rank_rational))
        .collect()
}

#[test]
fn mult1_search_reproduces_reference_table() {
    let template = build_template(3, 3, 1).unwrap();
    let report = run_search(&template, &SearchConfig::default()).unwrap();

    assert_eq!(report.candidates_screened, 312);
    assert_eq!(report.generic.rank, 36);
    assert_eq!(report.threshold, 36);
    assert_eq!(report.solutions.len(), 41);
    assert!(report.findings.is_empty());

    let got: BTreeSet<(Vec<i64>, usize)> = report
        .solutions
        .iter()
        .map(|s| (s.vector.0.clone(), s.rank_rational))
        .collect();
    let want: BTreeSet<(Vec<i64>, usize)> = corpus_mult1().into_iter().collect();
    assert_eq!(got, want);

    let spectrum: Vec<usize> = report.spectrum().into_iter().collect();
    assert_eq!(spectrum, vec![26, 27, 31, 32, 34]);

    for s in &report.solutions {
        assert_eq!(s.rank_mod, s.rank_rational, "vector {}", s.vector);
        assert_eq!(s.prime_used, 1009);
    }
}

#[test]
fn gcd_filter_off_adds_scalar_multiples() {
    let template = build_template(3, 3, 1).unwrap();
    let unfiltered = run_search(
        &template,
        &SearchConfig {
            gcd_filter: GcdFilter::Off,
            ..SearchConfig::default()
        },
    )
    .unwrap();
    // every solution vector with gcd 2 halves onto an emitted primitive one
    assert_eq!(unfiltered.solutions.len(), 58);
    let primitives: BTreeSet<Vec<i64>> = unfiltered
        .solutions
        .iter()
        .filter(|s| s.vector.gcd() == 1)
        .map(|s| s.vector.0.clone())
        .collect();
    assert_eq!(primitives.len(), 41);
    for s in &unfiltered.solutions {
        if s.vector.gcd() == 2 {
            let halved: Vec<i64> = s.vector.0.iter().map(|v| v / 2).collect();
            assert!(primitives.contains(&halved), "vector {}", s.vector);
        }
    }
}

#[test]
fn prefilter_screens_fewer_candidates_same_solutions() {
    let template = build_template(3, 3, 1).unwrap();
    let default = run_search(&template, &SearchConfig::default()).unwrap();
    let prefiltered = run_search(
        &template,
        &SearchConfig {
            gcd_filter: GcdFilter::Prefilter,
            ..SearchConfig::default()
        },
    )
    .unwrap();
    assert_eq!(prefiltered.candidates_screened, 272);
    assert_eq!(prefiltered.solutions, default.solutions);
}

#[test]
fn rational_only_mode_agrees() {
    let template = build_template(3, 3, 1).unwrap();
    let modular = run_search(&template, &SearchConfig::default()).unwrap();
    let rational = run_search(
        &template,
        &SearchConfig {
            screen_mode: ScreenMode::RationalOnly,
            ..SearchConfig::default()
        },
    )
    .unwrap();
    assert_eq!(modular.solutions, rational.solutions);
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let template = build_template(3, 3, 2).unwrap();
    let reduced = |threads: Option<usize>| SearchConfig {
        coefficient_set: vec![-1, 0, 1],
        threads,
        ..SearchConfig::default()
    };
    let single = run_search(&template, &reduced(Some(1))).unwrap();
    let multi = run_search(&template, &reduced(Some(4))).unwrap();
    assert_eq!(single.candidates_screened, multi.candidates_screened);
    assert_eq!(single.solutions, multi.solutions);

    let serialize = |report: &opident_core::search::SearchReport| {
        let mut buf = Vec::new();
        write_solutions_csv(&report.solutions, 10, &mut buf).unwrap();
        buf
    };
    assert_eq!(serialize(&single), serialize(&multi));
    assert_eq!(single.spectrum(), multi.spectrum());
}

#[test]
fn smaller_coefficient_set_yields_subset() {
    let template = build_template(3, 3, 1).unwrap();
    let full = run_search(&template, &SearchConfig::default()).unwrap();
    let small = run_search(
        &template,
        &SearchConfig {
            coefficient_set: vec![0, 1],
            ..SearchConfig::default()
        },
    )
    .unwrap();
    let full_set: BTreeSet<Vec<i64>> = full.solutions.iter().map(|s| s.vector.0.clone()).collect();
    for s in &small.solutions {
        assert!(full_set.contains(&s.vector.0), "vector {}", s.vector);
    }
}
