use serde_json::json;

use unigrad::harness::{verify_trace, VerifyConfig};
use unigrad::mappings::{certificate_precondition, gradient_mapping, stationarity_certificate};
use unigrad::problems::{builtin_problem, ProblemSpec, CATALOG};
use unigrad::{CompositeProblem, Error, Method, SolverConfig, TerminationReason, Trace};

fn problem(name: &str, dim: usize, params: serde_json::Value) -> CompositeProblem {
    builtin_problem(name, dim, params.as_object().unwrap()).unwrap()
}

fn verify(p: &CompositeProblem, tr: &Trace, cfg: &SolverConfig) -> Vec<unigrad::Violation> {
    let mut v = VerifyConfig::new(cfg.eps);
    v.l0 = Some(cfg.l0);
    v.delta = cfg.delta;
    v.aggressive_l = cfg.aggressive_l;
    verify_trace(tr, p, None, &v).unwrap().violations
}

#[test]
fn convex_methods_reach_the_known_optimum_across_the_catalog() {
    for name in ["quadratic", "hoelder", "example_1_1", "l1_quadratic", "box_quadratic", "simplex_quadratic"] {
        let p = problem(name, 6, json!({}));
        let opt = p.known_optimum.clone().unwrap();
        for method in [Method::Pgm, Method::Dgm, Method::Ufgm] {
            let cfg = SolverConfig::with_eps(1e-3);
            let (rep, tr) = method.solve(&p, &cfg).unwrap();
            assert_ne!(rep.termination, TerminationReason::MaxIters, "{name}/{method}");
            let f = p.f_tilde(&rep.x).unwrap();
            assert!(rep.certified_value - opt.f_tilde <= 1e-3 + 1e-12, "{name}/{method}: {rep:?}");
            assert!(f.is_finite());
            assert!(verify(&p, &tr, &cfg).is_empty(), "{name}/{method}");
        }
    }
}

#[test]
fn entropy_geometry_on_the_simplex() {
    let spec = r#"{"problem":"simplex_quadratic","dim":5,"geometry":{"prox":"entropy_on_simplex"}}"#;
    let p = ProblemSpec::from_json(spec).unwrap().build().unwrap();
    let opt = p.known_optimum.clone().unwrap();
    for method in [Method::Pgm, Method::Dgm, Method::Ufgm] {
        let (rep, _) = method.solve(&p, &SolverConfig::with_eps(1e-3)).unwrap();
        assert!((rep.x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(rep.certified_value - opt.f_tilde <= 1e-3, "{method}: {rep:?}");
    }
}

#[test]
fn aggressive_rule_keeps_the_certificate() {
    let p = problem("hoelder", 4, json!({"nu": 0.3}));
    let cfg = SolverConfig {
        aggressive_l: true,
        ..SolverConfig::with_eps(1e-4)
    };
    let (rep, tr) = Method::Ufgm.solve(&p, &cfg).unwrap();
    let opt = p.known_optimum.clone().unwrap();
    assert!(rep.certified_value - opt.f_tilde <= 1e-4);
    let doublings: i64 = tr.records.iter().map(|r| r.i_k as i64 - 1).sum();
    assert_eq!(doublings as f64, (rep.l_final / rep.l0).log2());
    assert!(verify(&p, &tr, &cfg).is_empty());
}

#[test]
fn ggm_on_a_nonconvex_problem_certifies_stationarity() {
    let p = problem("cosine", 3, json!({}));
    let delta = 1e-3;
    let cfg = SolverConfig {
        delta: Some(delta),
        eps: delta,
        ..Default::default()
    };
    let (rep, tr) = Method::Ggm.solve(&p, &cfg).unwrap();
    assert_eq!(rep.termination, TerminationReason::GradientNormReached);
    let m_bar = tr.records.last().unwrap().l;
    let g = gradient_mapping(&p, &rep.x, m_bar).unwrap();
    assert!(p.metric().dual_norm(&g.mapped_gradient) <= delta);
    let descent: Vec<f64> = tr.records.iter().map(|r| r.f).collect();
    assert!(descent.windows(2).all(|w| w[1] <= w[0]));
    let probes: Vec<Vec<f64>> = (0..50)
        .map(|j| rep.x.iter().enumerate().map(|(i, v)| v + ((j * 7 + i * 3) % 11) as f64 / 5.0 - 1.0).collect())
        .collect();
    let eps = 1e-2;
    let gap = stationarity_certificate(&p, &rep.x, m_bar, eps, &probes).unwrap();
    if certificate_precondition(&p, m_bar, eps) == Some(true) {
        assert!(gap >= 0.0, "{gap}");
    }
}

#[test]
fn oracle_counts_match_the_line_search_rows() {
    let p = problem("l1_quadratic", 5, json!({"L": 3.0}));
    let cfg = SolverConfig::with_eps(1e-4);
    let per_row = |tr: &Trace| tr.records.iter().map(|r| r.i_k as usize + 1).sum::<usize>();
    let (rep, tr) = Method::Pgm.solve(&p, &cfg).unwrap();
    assert_eq!(rep.oracle_calls, 1 + per_row(&tr));
    let (rep, tr) = Method::Dgm.solve(&p, &cfg).unwrap();
    assert_eq!(rep.oracle_calls, 1 + 2 * per_row(&tr));
    let proof = SolverConfig {
        proof_indexing: true,
        ..cfg.clone()
    };
    let (rep, tr) = Method::Dgm.solve(&p, &proof).unwrap();
    assert_eq!(rep.oracle_calls, 1 + per_row(&tr) + tr.len());
    let (rep, tr) = Method::Ufgm.solve(&p, &cfg).unwrap();
    assert_eq!(rep.oracle_calls, 2 * per_row(&tr));
}

#[test]
fn line_search_cap_is_reported() {
    let p = problem("quadratic", 2, json!({"L": 1e6}));
    let cfg = SolverConfig {
        max_doublings_per_iter: 3,
        ..SolverConfig::with_eps(1e-6)
    };
    for method in Method::ALL {
        let mut cfg = cfg.clone();
        cfg.delta = Some(1e-6);
        assert!(matches!(method.solve(&p, &cfg), Err(Error::LineSearch { iteration: 0, .. })), "{method}");
    }
}

#[test]
fn traces_survive_a_file_round_trip() {
    let p = problem("box_quadratic", 4, json!({}));
    let dir = tempfile::tempdir().unwrap();
    for method in Method::ALL {
        let cfg = SolverConfig {
            delta: Some(1e-3),
            ..SolverConfig::with_eps(1e-3)
        };
        let (_, tr) = method.solve(&p, &cfg).unwrap();
        let path = dir.path().join(format!("{method}.csv"));
        tr.save(&path).unwrap();
        let back = Trace::load(&path).unwrap();
        assert_eq!(back, tr);
        assert!(verify(&p, &back, &cfg).is_empty(), "{method}");
    }
}

#[test]
fn every_catalog_entry_builds() {
    for name in CATALOG {
        let p = builtin_problem(name, 3, &Default::default()).unwrap();
        assert!(p.eval(p.x0()).unwrap().f_tilde.is_finite(), "{name}");
    }
}
