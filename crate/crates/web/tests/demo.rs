use smoothopt_web::{kdense_demo, lemma_sweep, maxcut_demo};

#[test]
fn maxcut_demo_is_consistent() {
    let d = maxcut_demo(12, 0.6, 0.2, 1, true).unwrap();
    assert_eq!(d.sides.len(), 12);
    let cut = d.graph.edges.iter().filter(|&&(u, v)| d.sides[u] != d.sides[v]).count();
    assert_eq!(cut as f64, d.cut);
    assert!(d.cut <= d.optimum.unwrap());
    assert!(d.planted_cut as f64 <= d.optimum.unwrap());
}

#[test]
fn random_mode_demo_runs() {
    let d = maxcut_demo(10, 0.8, 0.3, 4, false).unwrap();
    assert_eq!(d.assignments_tried, 32);
}

#[test]
fn lemma_sweep_reports_every_alpha() {
    let pts = lemma_sweep(50, 0.5, &[0.25, 0.5, 1.0], 200, 2).unwrap();
    assert_eq!(pts.len(), 3);
    assert!(pts[0].sample_size >= pts[2].sample_size);
    for p in &pts {
        assert!((0.0..=1.0).contains(&p.sampling_rate));
        assert!((0.0..=1.0).contains(&p.rounding_rate));
    }
}

#[test]
fn kdense_demo_selects_k() {
    for force in [false, true] {
        let d = kdense_demo(10, 0.8, 4, 0.3, 3, force).unwrap();
        assert_eq!(d.selected.iter().filter(|&&b| b == 1).count(), 4);
        assert!(d.edges <= d.optimum.unwrap());
        assert_eq!(d.branch, if force { "sampled" } else { "enumeration" });
    }
    assert!(kdense_demo(6, 0.8, 7, 0.3, 3, false).is_err());
}
