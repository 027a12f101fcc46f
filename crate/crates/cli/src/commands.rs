use std::io::Write;

use serde_json::{json, Map, Number, Value};

use qnb_core::dist::{
    build_pmf_table_with, count_dist_pmf, fmt_csv_number, fmt_json_number, max_count, PmfTable, Route,
};
use qnb_core::kernels::{Family, KernelCache, KernelKey};
use qnb_core::oracle::monte_carlo_waiting_pmf;

use crate::{CountsArgs, Failure, Format, KernelArgs, OutputArgs, PmfArgs, SimulateArgs};

pub(crate) fn num(x: f64) -> Value {
    Value::Number(fmt_json_number(x).parse::<Number>().expect("formatted real is valid json"))
}

/// Writes a finished artifact. A reader that closes the pipe early is not an
/// error.
pub(crate) fn emit(out: &OutputArgs, bytes: &[u8]) -> Result<(), Failure> {
    let mut w = out.writer()?;
    match w.write_all(bytes).and_then(|_| w.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_table(table: &PmfTable, out: &OutputArgs) -> Result<(), Failure> {
    let text = match out.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json() + "\n",
    };
    emit(out, text.as_bytes())
}

fn write_rows(out: &OutputArgs, header: &[&str], rows: &[Vec<String>], json: Value) -> Result<(), Failure> {
    let bytes = match out.format {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Failure { status: 1, code: "E_IO", message: e.to_string() };
            c.write_record(header).map_err(csv_err)?;
            for row in rows {
                c.write_record(row).map_err(csv_err)?;
            }
            c.into_inner().map_err(|e| Failure { status: 1, code: "E_IO", message: e.to_string() })?
        }
        Format::Json => (serde_json::to_string_pretty(&json).expect("report serializes") + "\n").into_bytes(),
    };
    emit(out, &bytes)
}

pub(crate) fn pmf(a: &PmfArgs) -> Result<(), Failure> {
    let spec = a.scheme.spec(a.r)?;
    let params = a.model.params()?;
    let route = if a.dual {
        Route::Dual
    } else if a.direct {
        Route::Direct
    } else {
        Route::Auto
    };
    let table = build_pmf_table_with(&spec, &params, a.tail_eps, a.n_cap, route)?;
    if table.truncated {
        let why = if params.q() < 1.0 { " (with q < 1 part of the mass sits at infinity)" } else { "" };
        eprintln!(
            "warning[W_TRUNCATED]: table stopped at n_cap={} with tail_bound={:.3e} above tail_eps={:e}{why}",
            a.n_cap, table.tail_bound, a.tail_eps
        );
    }
    write_table(&table, &a.out)
}

pub(crate) fn counts(a: &CountsArgs) -> Result<(), Failure> {
    let scheme = a.scheme.scheme()?;
    let params = a.model.params()?;
    let mut cache = KernelCache::new(params.q())?;
    let top = max_count(scheme, a.n, a.scheme.k);
    let probs = (0..=top)
        .map(|x| count_dist_pmf(scheme, x, a.n, a.scheme.k, &params, &mut cache))
        .collect::<Result<Vec<f64>, _>>()?;
    let rows: Vec<Vec<String>> =
        probs.iter().enumerate().map(|(x, &p)| vec![x.to_string(), fmt_csv_number(p)]).collect();
    let mut spec = json!({ "scheme": scheme.name(), "k": a.scheme.k, "n": a.n });
    if let Some(ell) = a.scheme.ell {
        spec["ell"] = json!(ell);
    }
    let json = json!({
        "spec": spec,
        "params": { "theta": num(params.theta()), "q": num(params.q()) },
        "probs": probs.iter().map(|&p| num(p)).collect::<Vec<_>>(),
    });
    write_rows(&a.out, &["x", "pmf"], &rows, json)
}

pub(crate) fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let spec = a.scheme.spec(a.r)?;
    let params = a.model.params()?;
    let table = monte_carlo_waiting_pmf(&spec, &params, a.replications, a.n_cap, a.seed)?;
    if table.truncated {
        eprintln!(
            "warning[W_TRUNCATED]: {:.3e} of replications had not stopped by n_cap={}",
            table.tail_bound, a.n_cap
        );
    }
    write_table(&table, &a.out)
}

/// Parses `a` or an inclusive range `a:b`.
pub(crate) fn parse_range(flag: &str, text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::usage("E_PARSE", format!("--{flag} expects N or LO:HI, got {text:?}"));
    let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match text.split_once(':') {
        Some((lo, hi)) => (int(lo)?, int(hi)?),
        None => {
            let v = int(text)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub(crate) fn kernels(a: &KernelArgs) -> Result<(), Failure> {
    let family: Family = a.family.parse()?;
    let (r0, r1) = parse_range("r", &a.r)?;
    let (s0, s1) = parse_range("s", &a.s)?;
    let t_range = a.t.as_deref().map(|t| parse_range("t", t)).transpose()?;
    let mut cache = KernelCache::new(a.q)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for r in r0..=r1 {
        for s in s0..=s1 {
            let (t0, t1) = t_range.unwrap_or((0, s));
            for t in t0..=t1 {
                let key = KernelKey::new(family, a.k, a.ell, r, s, t)?;
                let v = cache.value(key);
                rows.push(vec![
                    family.to_string(),
                    a.k.to_string(),
                    a.ell.to_string(),
                    r.to_string(),
                    s.to_string(),
                    t.to_string(),
                    fmt_csv_number(v),
                ]);
                let mut item = Map::new();
                item.insert("r".into(), json!(r));
                item.insert("s".into(), json!(s));
                item.insert("t".into(), json!(t));
                item.insert("value".into(), num(v));
                items.push(Value::Object(item));
            }
        }
    }
    let json = json!({
        "family": family.to_string(),
        "k": a.k,
        "ell": a.ell,
        "q": num(a.q),
        "values": items,
    });
    write_rows(&a.out, &["family", "k", "ell", "r", "s", "t", "value"], &rows, json)
}
