use cb_lab::pipeline::pipeline_main_theorem;

#[test]
fn line_cases_recover_an_invariant_line() {
    for (n, k, d) in [(1usize, 1usize, 7usize), (2, 1, 11)] {
        let rep = pipeline_main_theorem(n, k, 101, 3).unwrap();
        assert!(rep.success, "{:?}", rep.stages);
        assert_eq!((rep.d, rep.r, rep.orbit_size), (d, d - 2 * n - 2, d));
        assert_eq!(rep.bootstrap_degree, 1);
        assert_eq!(rep.cover_translates, 1);
        assert!(rep.invariant);
        assert!(rep.off_hypersurface_parameter.is_some());
    }
}

#[test]
fn reports_are_reproducible() {
    let a = serde_json::to_string(&pipeline_main_theorem(2, 1, 101, 5).unwrap()).unwrap();
    let b = serde_json::to_string(&pipeline_main_theorem(2, 1, 101, 5).unwrap()).unwrap();
    assert_eq!(a, b);
}
