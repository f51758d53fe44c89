use std::fs::File;

use kings_core::certify_family;
use kings_core::game::{simulate, GameStrategy};
use kings_core::search::{find_signal_states, verify_phase_lattice};
use kings_core::tables::{
    read_rows_csv, read_rows_json, write_tables, Table1Row, Table3Row, Table4Row, Table5Row,
};
use kings_core::verify::{run_criteria, two_qubit_family, Fault, Profile};

#[test]
fn injected_table2_fault_is_located() {
    let report = certify_family(&two_qubit_family(Some(Fault::Table2)).unwrap());
    assert!(!report.passed);
    let site = report
        .unbiasedness_site
        .or(report.orthonormality_site)
        .unwrap();
    assert!(site.basis_a == 3 || site.basis_b == 3, "{site:?}");
}

#[test]
fn fault_fails_only_certification() {
    let outcomes = run_criteria(Profile::Quick, 7, Some(Fault::Table2));
    assert_eq!(outcomes.len(), 10);
    let failed: Vec<usize> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    assert_eq!(failed, vec![3], "{outcomes:#?}");
    assert!(outcomes[2].detail.contains("d=4"));
}

#[test]
fn written_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_tables(&[1, 2, 3, 4, 5], dir.path()).unwrap();
    assert_eq!(paths.len(), 10);
    let open = |name: &str| File::open(dir.path().join(name)).unwrap();

    let t1: Vec<Table1Row> = read_rows_csv(open("table1.csv")).unwrap();
    assert_eq!(t1.iter().find(|r| r.d == 5).unwrap().bound, 0.6315);
    let t1_full: Vec<Table1Row> = read_rows_json(open("table1.json")).unwrap();
    assert!((t1_full[2].bound - 0.7).abs() < 1e-15);

    let t3: Vec<Table3Row> = read_rows_csv(open("table3.csv")).unwrap();
    assert_eq!(t3.len(), 32);
    let t4: Vec<Table4Row> = read_rows_csv(open("table4.csv")).unwrap();
    assert_eq!(t4.len(), 32);
    assert_eq!(
        read_rows_json::<Table4Row, _>(open("table4.json")).unwrap(),
        t4
    );

    let t5: Vec<Table5Row> = read_rows_csv(open("table5.csv")).unwrap();
    assert_eq!(t5.len(), 8);
    for r in &t5 {
        let sum = r.chi1 + r.chi2 + r.chi3 + r.chi4;
        assert!((sum - 1.0).abs() < 2e-3, "{r:?}");
    }
}

#[test]
fn king_basis_tallies_are_uniform() {
    let r = simulate(&GameStrategy::d4_optimal().unwrap(), 500_000, 99).unwrap();
    let p = 1.0 / r.per_basis.len() as f64;
    let sigma = (r.trials as f64 * p * (1.0 - p)).sqrt();
    for t in &r.per_basis {
        assert!(
            (t.trials as f64 - r.trials as f64 * p).abs() <= 4.0 * sigma,
            "{t:?}"
        );
    }
}

#[test]
fn conditional_success_per_basis() {
    let r = simulate(&GameStrategy::d4_optimal().unwrap(), 400_000, 5).unwrap();
    assert_eq!(r.per_basis[0].successes, r.per_basis[0].trials);
    for t in &r.per_basis[1..] {
        let n = t.trials as f64;
        let est = t.successes as f64 / n;
        assert!(
            (est - 0.625).abs() <= 4.0 * (0.625 * 0.375 / n).sqrt(),
            "{t:?}"
        );
    }
}

#[test]
fn estimates_agree_across_seeds() {
    let strategies = [
        GameStrategy::d2_optimal().unwrap(),
        GameStrategy::cube_vaa(),
    ];
    for s in &strategies {
        let misses = (0..100u64)
            .filter(|&seed| simulate(s, 20_000, seed).unwrap().z_score() > 4.0)
            .count();
        assert!(misses <= 1, "{} seeds outside 4 sigma", misses);
    }
}

#[test]
fn quarter_turn_phases_are_exhaustive() {
    let family = kings_core::construct_mub(4).unwrap();
    let states = find_signal_states(&family).unwrap();
    let r = verify_phase_lattice(&family, &states, 15.0).unwrap();
    assert!(r.max_shift < 1e-6, "{r:?}");
    assert!(r.max_residual < 1e-12, "{r:?}");
    assert!(r.additional.is_empty(), "{r:?}");
    assert!(r.min_off_lattice_deviation > 1e-2, "{r:?}");
}
