use qnb_core::dist::{
    build_pmf_table, count_dist_pmf, pmf_classical, pmf_direct, ModelParams, PmfTable, RunSpec,
};
use qnb_core::kernels::KernelCache;
use qnb_core::oracle::{enumerate_count_pmf, enumerate_waiting_pmf, monte_carlo_waiting_pmf};
use qnb_core::runcount::Scheme;

fn schemes(k: usize) -> Vec<Scheme> {
    let mut out = vec![Scheme::TypeI, Scheme::TypeII, Scheme::TypeIII, Scheme::TypeIV];
    out.extend((0..k).map(|ell| Scheme::LOverlap { ell }));
    out
}

#[test]
fn count_distribution_matches_enumeration() {
    for k in 1..=3 {
        for scheme in schemes(k) {
            for (theta, q) in [(0.35, 0.6), (0.7, 0.95), (0.5, 1.0)] {
                let p = ModelParams::new(theta, q).unwrap();
                let mut cache = KernelCache::new(q).unwrap();
                for n in 0..=12 {
                    let oracle = enumerate_count_pmf(scheme, n, k, &p).unwrap();
                    for (x, &want) in oracle.iter().enumerate() {
                        let got = count_dist_pmf(scheme, x, n, k, &p, &mut cache).unwrap();
                        assert!((got - want).abs() < 1e-12, "{scheme} k={k} n={n} x={x}: {got} vs {want}");
                    }
                }
            }
        }
    }
}

#[test]
fn type4_direct_matches_enumeration() {
    for k in 1..=3 {
        for r in 1..=3 {
            for (theta, q) in [(0.4, 0.7), (0.8, 0.9), (0.6, 1.0)] {
                let spec = RunSpec::new(k, r, Scheme::TypeIV).unwrap();
                let p = ModelParams::new(theta, q).unwrap();
                let oracle = enumerate_waiting_pmf(&spec, &p, 16).unwrap();
                let mut cache = KernelCache::new(q).unwrap();
                for n in 0..=16 {
                    let got = pmf_direct(&spec, n, &p, &mut cache).unwrap();
                    assert!((got - oracle.pmf(n)).abs() < 1e-12, "k={k} r={r} n={n}");
                }
            }
        }
    }
}

#[test]
fn type3_table_prefix_matches_enumeration() {
    let spec = RunSpec::new(2, 3, Scheme::TypeIII).unwrap();
    let p = ModelParams::new(0.6, 0.9).unwrap();
    let table = build_pmf_table(&spec, &p, 1e-6, 5000).unwrap();
    let oracle = enumerate_waiting_pmf(&spec, &p, 14).unwrap();
    assert_eq!(table.support_min, 4);
    for n in 0..=14 {
        assert!((table.pmf(n) - oracle.pmf(n)).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn classical_formula_matches_iid_enumeration() {
    for k in 1..=3 {
        for r in 1..=3 {
            for scheme in schemes(k) {
                let spec = RunSpec::new(k, r, scheme).unwrap();
                for theta in [0.3, 0.75] {
                    let p = ModelParams::new(theta, 1.0).unwrap();
                    let oracle = enumerate_waiting_pmf(&spec, &p, 14).unwrap();
                    for n in 0..=14 {
                        let got = pmf_classical(&spec, n, theta).unwrap();
                        assert!((got - oracle.pmf(n)).abs() < 1e-12, "{scheme} k={k} r={r} n={n}");
                    }
                }
            }
        }
    }
}

#[test]
fn monte_carlo_is_deterministic_across_thread_counts() {
    let spec = RunSpec::new(2, 2, Scheme::TypeII).unwrap();
    let p = ModelParams::new(0.55, 0.9).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_waiting_pmf(&spec, &p, 20_000, 60, 42).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, monte_carlo_waiting_pmf(&spec, &p, 20_000, 60, 42).unwrap());
    assert_ne!(one, monte_carlo_waiting_pmf(&spec, &p, 20_000, 60, 43).unwrap());
}

#[test]
fn json_round_trip_is_exact() {
    let spec = RunSpec::new(3, 2, Scheme::LOverlap { ell: 1 }).unwrap();
    let p = ModelParams::new(0.45, 0.85).unwrap();
    let table = build_pmf_table(&spec, &p, 1e-8, 400).unwrap();
    let text = table.to_json();
    let back = PmfTable::from_json(&text).unwrap();
    assert_eq!(back, table);
    assert_eq!(back.to_json(), text);

    let mc = monte_carlo_waiting_pmf(&spec, &p, 5000, 40, 7).unwrap();
    assert_eq!(PmfTable::from_json(&mc.to_json()).unwrap(), mc);
}

#[test]
fn csv_layout() {
    let spec = RunSpec::new(2, 2, Scheme::TypeI).unwrap();
    let p = ModelParams::new(0.5, 0.9).unwrap();
    let csv = build_pmf_table(&spec, &p, 1e-8, 2000).unwrap().to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,pmf,cdf"));
    assert!(lines.next().unwrap().starts_with("4,0.0625,0.0625"));
    assert!(!csv.contains('\r'));
}

#[test]
fn monte_carlo_tracks_exact_pmf_on_well_populated_bins() {
    let reps = 200_000;
    for scheme in [Scheme::TypeIII, Scheme::TypeIV] {
        let spec = RunSpec::new(2, 2, scheme).unwrap();
        let p = ModelParams::new(0.6, 0.9).unwrap();
        let exact = enumerate_waiting_pmf(&spec, &p, 16).unwrap();
        let mc = monte_carlo_waiting_pmf(&spec, &p, reps, 16, 5).unwrap();
        for n in 0..=16 {
            let pe = exact.pmf(n);
            if pe * (reps as f64) < 50.0 {
                continue;
            }
            let se = (pe * (1.0 - pe) / reps as f64).sqrt();
            assert!((mc.pmf(n) - pe).abs() < 5.0 * se, "{scheme} n={n}: {} vs {pe}", mc.pmf(n));
        }
    }
}
