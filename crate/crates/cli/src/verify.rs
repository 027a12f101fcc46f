//! `qnb verify`: invariant suites with a JSON report.

use clap::Args;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use qnb_core::dist::{count_dist_pmf, pmf_classical, pmf_direct, pmf_dual, ModelParams, RunSpec};
use qnb_core::kernels::{brute_force_kernel, closed_form_q1, Family, KernelCache, KernelKey};
use qnb_core::oracle::{enumerate_count_pmf, enumerate_waiting_pmf};
use qnb_core::runcount::{count_runs, waiting_time, BinarySeq, Scheme};

use crate::commands::{emit, num};
use crate::{Failure, Format, OutputArgs};

/// Failing tuples listed per check before the list is cut short.
const MAX_LISTED: usize = 25;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Only check the worked counting and waiting-time examples.
    #[arg(long)]
    paper_examples: bool,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value_t = 3)]
    r_max: usize,
    /// Comma-separated success probabilities.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.8])]
    thetas: Vec<f64>,
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.9, 1.0])]
    qs: Vec<f64>,
    /// Largest n compared against full enumeration.
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol_oracle: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_dual: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_kernel: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol_limit: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Test hook: added to every direct-route value before comparison.
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb: f64,
}

/// Result of one named check.
struct Check {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_deviation: f64,
    failures: Vec<Value>,
    failure_count: usize,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, tolerance, cases: 0, max_deviation: 0.0, failures: Vec::new(), failure_count: 0 }
    }

    fn record(&mut self, deviation: f64, case: impl FnOnce() -> Value) {
        self.cases += 1;
        // NaN must count as a failure.
        let dev = if deviation.is_nan() { f64::INFINITY } else { deviation };
        self.max_deviation = self.max_deviation.max(dev);
        if dev > self.tolerance {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED {
                let mut c = case();
                c["deviation"] = num(dev);
                self.failures.push(c);
            }
        }
    }

    fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn report(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed(),
            "cases": self.cases,
            "tolerance": num(self.tolerance),
            "max_deviation": num(self.max_deviation),
            "failure_count": self.failure_count,
            "failures": self.failures,
        })
    }
}

fn spec_value(spec: &RunSpec, p: &ModelParams, n: usize) -> Value {
    let mut v = json!({
        "scheme": spec.scheme.name(),
        "k": spec.k,
        "r": spec.r,
        "theta": num(p.theta()),
        "q": num(p.q()),
        "n": n,
    });
    if let Scheme::LOverlap { ell } = spec.scheme {
        v["ell"] = json!(ell);
    }
    v
}

fn schemes(k: usize) -> Vec<Scheme> {
    let mut out = vec![Scheme::TypeI, Scheme::TypeII, Scheme::TypeIII, Scheme::TypeIV];
    out.extend((0..k).map(|ell| Scheme::LOverlap { ell }));
    out
}

fn validate(a: &VerifyArgs) -> Result<(), Failure> {
    if a.k_max == 0 || a.r_max == 0 {
        return Err(Failure::usage("E_PARAM", "k-max and r-max must be at least 1"));
    }
    if a.thetas.is_empty() || a.qs.is_empty() {
        return Err(Failure::usage("E_PARAM", "thetas and qs must be non-empty"));
    }
    for &t in &a.thetas {
        for &q in &a.qs {
            ModelParams::new(t, q)?;
        }
    }
    if a.n_max > qnb_core::oracle::ENUMERATION_LIMIT {
        return Err(Failure::usage(
            "E_GUARD",
            format!("n-max {} exceeds the enumeration limit {}", a.n_max, qnb_core::oracle::ENUMERATION_LIMIT),
        ));
    }
    Ok(())
}

fn grid(a: &VerifyArgs) -> Vec<(RunSpec, ModelParams)> {
    let mut out = Vec::new();
    for k in 1..=a.k_max {
        for r in 1..=a.r_max {
            for scheme in schemes(k) {
                let spec = RunSpec::new(k, r, scheme).expect("grid spec is valid");
                for &t in &a.thetas {
                    for &q in &a.qs {
                        out.push((spec, ModelParams::new(t, q).expect("validated")));
                    }
                }
            }
        }
    }
    out
}

fn paper_examples() -> Check {
    let mut check = Check::new("worked_examples", 0.0);
    let a: BinarySeq = "011111000111".parse().expect("literal");
    let b: BinarySeq = "111111011110111".parse().expect("literal");
    let found = |x: Option<usize>| x.map(|v| v as f64).unwrap_or(f64::INFINITY);
    let items: Vec<(&str, &BinarySeq, Option<usize>, Option<usize>)> = vec![
        ("count type1 k=2", &a, count_runs(&a, 2, Scheme::TypeI).ok(), Some(3)),
        ("count type2 k=2", &a, count_runs(&a, 2, Scheme::TypeII).ok(), Some(2)),
        ("count type3 k=2", &a, count_runs(&a, 2, Scheme::TypeIII).ok(), Some(6)),
        ("count type4 k=5", &a, count_runs(&a, 5, Scheme::TypeIV).ok(), Some(1)),
        ("waiting type1 k=2 r=2", &a, waiting_time(&a, 2, 2, Scheme::TypeI).ok().flatten(), Some(5)),
        ("waiting type2 k=2 r=2", &a, waiting_time(&a, 2, 2, Scheme::TypeII).ok().flatten(), Some(11)),
        ("waiting type3 k=2 r=2", &a, waiting_time(&a, 2, 2, Scheme::TypeIII).ok().flatten(), Some(4)),
        ("waiting type4 k=3 r=2", &a, waiting_time(&a, 3, 2, Scheme::TypeIV).ok().flatten(), None),
        ("count loverlap k=4 ell=2", &b, count_runs(&b, 4, Scheme::LOverlap { ell: 2 }).ok(), Some(3)),
        ("count loverlap k=4 ell=3", &b, count_runs(&b, 4, Scheme::LOverlap { ell: 3 }).ok(), Some(4)),
    ];
    for (name, seq, got, want) in items {
        let dev = if got == want { 0.0 } else { (found(got) - found(want)).abs().max(1.0) };
        check.record(dev, || {
            json!({ "example": name, "sequence": seq.to_string(), "got": got, "expected": want })
        });
    }
    check
}

fn kernel_checks(a: &VerifyArgs) -> (Check, Check) {
    let k_top = (a.k_max + 1).min(4);
    let mut jobs = Vec::new();
    for family in Family::ALL {
        for k in 1..=k_top {
            let ells: Vec<usize> = if family == Family::E { (0..k).collect() } else { vec![0] };
            for ell in ells {
                for &q in &a.qs {
                    jobs.push((family, k, ell, q));
                }
            }
        }
    }
    let results: Vec<Vec<(f64, f64, Value)>> = jobs
        .par_iter()
        .map(|&(family, k, ell, q)| {
            let mut cache = KernelCache::new(q).expect("validated q");
            let mut out = Vec::new();
            for r in 1..=4 {
                for s in 0..=12 {
                    for t in 0..=4 {
                        let key = KernelKey::new(family, k, ell, r, s, t).expect("valid key");
                        let v = cache.value(key);
                        let brute = brute_force_kernel(family, k, ell, r, s, t, q).expect("small grid");
                        let rel = (v - brute).abs() / brute.abs().max(1.0);
                        let closed = if q == 1.0 {
                            let c = closed_form_q1(family, k, ell, r, s, t).expect("valid key");
                            let c = c.to_f64().unwrap_or(f64::INFINITY);
                            (v.round() - c).abs()
                        } else {
                            f64::NAN
                        };
                        let case = json!({
                            "family": family.to_string(), "k": k, "ell": ell, "q": num(q),
                            "r": r, "s": s, "t": t, "value": num(v), "brute_force": num(brute),
                        });
                        out.push((rel, closed, case));
                    }
                }
            }
            out
        })
        .collect();
    let mut brute = Check::new("kernel_vs_brute_force", a.tol_kernel);
    let mut closed = Check::new("kernel_vs_closed_form_q1", 0.0);
    for (rel, c, case) in results.into_iter().flatten() {
        if !c.is_nan() {
            closed.record(c, || case.clone());
        }
        brute.record(rel, || case);
    }
    (brute, closed)
}

type Rows = Vec<(f64, Value)>;

fn direct_vs_dual(a: &VerifyArgs, points: &[(RunSpec, ModelParams)]) -> Check {
    let n_top = a.n_max + 8;
    let rows: Vec<Rows> = points
        .par_iter()
        .filter(|(spec, _)| spec.scheme != Scheme::TypeIV)
        .map(|(spec, p)| {
            let mut cache = KernelCache::new(p.q()).expect("validated q");
            (1..=n_top)
                .map(|n| {
                    let d = pmf_direct(spec, n, p, &mut cache).expect("valid point") + a.perturb;
                    let u = pmf_dual(spec, n, p, &mut cache).expect("valid point");
                    ((d - u).abs(), spec_value(spec, p, n))
                })
                .collect()
        })
        .collect();
    collect(Check::new("direct_vs_dual", a.tol_dual), rows)
}

fn formula_vs_oracle(a: &VerifyArgs, points: &[(RunSpec, ModelParams)]) -> Check {
    let rows: Vec<Rows> = points
        .par_iter()
        .map(|(spec, p)| {
            let oracle = enumerate_waiting_pmf(spec, p, a.n_max).expect("within enumeration limit");
            let mut cache = KernelCache::new(p.q()).expect("validated q");
            let mut out = Vec::new();
            for n in 1..=a.n_max {
                let want = oracle.pmf(n);
                let d = pmf_direct(spec, n, p, &mut cache).expect("valid point") + a.perturb;
                let mut dev = (d - want).abs();
                if spec.scheme != Scheme::TypeIV {
                    let u = pmf_dual(spec, n, p, &mut cache).expect("valid point");
                    dev = dev.max((u - want).abs());
                }
                out.push((dev, spec_value(spec, p, n)));
            }
            out
        })
        .collect();
    collect(Check::new("formula_vs_oracle", a.tol_oracle), rows)
}

fn counts_vs_oracle(a: &VerifyArgs) -> Check {
    let mut jobs = Vec::new();
    for k in 1..=a.k_max {
        for scheme in schemes(k) {
            for &t in &a.thetas {
                for &q in &a.qs {
                    jobs.push((k, scheme, ModelParams::new(t, q).expect("validated")));
                }
            }
        }
    }
    let rows: Vec<Rows> = jobs
        .par_iter()
        .map(|&(k, scheme, p)| {
            let mut cache = KernelCache::new(p.q()).expect("validated q");
            let mut out = Vec::new();
            for n in 0..=a.n_max {
                let oracle = enumerate_count_pmf(scheme, n, k, &p).expect("within enumeration limit");
                for (x, &want) in oracle.iter().enumerate() {
                    let got = count_dist_pmf(scheme, x, n, k, &p, &mut cache).expect("valid point") + a.perturb;
                    let mut case = json!({
                        "scheme": scheme.name(), "k": k, "theta": num(p.theta()), "q": num(p.q()), "n": n, "x": x,
                    });
                    if let Scheme::LOverlap { ell } = scheme {
                        case["ell"] = json!(ell);
                    }
                    out.push(((got - want).abs(), case));
                }
            }
            out
        })
        .collect();
    collect(Check::new("counts_vs_oracle", a.tol_oracle), rows)
}

fn classical_limit(a: &VerifyArgs, points: &[(RunSpec, ModelParams)]) -> Check {
    let mut seen = Vec::new();
    for (spec, p) in points {
        if !seen.contains(&(*spec, p.theta().to_bits())) {
            seen.push((*spec, p.theta().to_bits()));
        }
    }
    let rows: Vec<Rows> = seen
        .par_iter()
        .map(|&(spec, bits)| {
            let theta = f64::from_bits(bits);
            let p = ModelParams::new(theta, 1.0 - 1e-7).expect("valid");
            let mut cache = KernelCache::new(p.q()).expect("valid q");
            (1..=a.n_max + 8)
                .map(|n| {
                    let d = pmf_direct(&spec, n, &p, &mut cache).expect("valid point") + a.perturb;
                    let c = pmf_classical(&spec, n, theta).expect("valid point");
                    ((d - c).abs(), spec_value(&spec, &p, n))
                })
                .collect()
        })
        .collect();
    collect(Check::new("q_to_1_limit", a.tol_limit), rows)
}

fn collect(mut check: Check, rows: Vec<Rows>) -> Check {
    for (dev, case) in rows.into_iter().flatten() {
        check.record(dev, || case);
    }
    check
}

pub(crate) fn run(a: &VerifyArgs) -> Result<(), Failure> {
    validate(a)?;
    let checks = if a.paper_examples {
        vec![paper_examples()]
    } else {
        let points = grid(a);
        let (brute, closed) = kernel_checks(a);
        vec![
            paper_examples(),
            brute,
            closed,
            direct_vs_dual(a, &points),
            formula_vs_oracle(a, &points),
            counts_vs_oracle(a),
            classical_limit(a, &points),
        ]
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    let report = json!({
        "passed": failed.is_empty(),
        "checks": checks.iter().map(Check::report).collect::<Vec<_>>(),
    });
    let out = OutputArgs { format: Format::Json, output: a.output.clone() };
    emit(&out, (serde_json::to_string_pretty(&report).expect("report serializes") + "\n").as_bytes())?;
    let total: usize = checks.iter().map(|c| c.cases).sum();
    if failed.is_empty() {
        eprintln!("verify: {} checks, {total} cases, all within tolerance", checks.len());
        Ok(())
    } else {
        Err(Failure::check(format!("failed checks: {}", failed.join(", "))))
    }
}
