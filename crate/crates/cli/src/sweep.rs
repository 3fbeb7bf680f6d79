//! Grid sweeps from a flat key=value file:
//!
//! ```text
//! # comments start with '#'
//! command = ratio          # connect | ratio | chi
//! sigma = 0.2 0.25 0.3     # values "re" or "re,im", or a range lo:hi:count
//! eta = 0.1:0.2:3
//! t0 = 1e-4
//! t1 = 200
//! tol = 1e-12
//! ```
//!
//! `alpha`/`beta` may replace `sigma`/`eta`. The grid is the product of the
//! two axes, first axis outermost. Points run on a worker pool and are
//! reported in grid order.

use crate::args::{parse_complex, resolve_tol, Point};
use crate::commands::{admissible, chi, connect, ratio, Failure};
use crate::output::{cx, error_value, Body};
use p3tau::monodromy::{CauchyData, MonodromyData};
use p3tau::tau::{DEFAULT_T0, DEFAULT_T1};
use p3tau::{Complex64, Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Eval {
    Connect,
    Ratio,
    Chi,
}

#[derive(Debug)]
struct SweepConfig {
    eval: Eval,
    cauchy: bool,
    first: Vec<Complex64>,
    second: Vec<Complex64>,
    t0: f64,
    t1: f64,
    tol: f64,
}

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

fn axis(key: &str, v: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for tok in v.split_whitespace() {
        if let [lo, hi, n] = tok.split(':').collect::<Vec<_>>()[..] {
            let bad = || invalid(format!("{key}: bad range {tok:?}"));
            let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            match n {
                0 => return Err(bad()),
                1 => out.push(Complex64::new(lo, 0.0)),
                _ => out.extend((0..n).map(|k| Complex64::new(lo + (hi - lo) * k as f64 / (n - 1) as f64, 0.0))),
            }
        } else {
            out.push(parse_complex(tok)?);
        }
    }
    if out.is_empty() {
        return Err(invalid(format!("{key}: empty axis")));
    }
    Ok(out)
}

fn parse(text: &str) -> Result<SweepConfig> {
    let mut kv = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {}: expected key = value", n + 1)))?;
        if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(invalid(format!("line {}: duplicate key {:?}", n + 1, k.trim())));
        }
    }
    const KEYS: [&str; 8] = ["command", "sigma", "eta", "alpha", "beta", "t0", "t1", "tol"];
    if let Some(k) = kv.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(invalid(format!("unknown key {k:?}")));
    }
    let eval = match kv.get("command").map(String::as_str).unwrap_or("ratio") {
        "connect" => Eval::Connect,
        "ratio" => Eval::Ratio,
        "chi" => Eval::Chi,
        other => return Err(invalid(format!("unsupported sweep command {other:?}"))),
    };
    let has = |k: &str| kv.contains_key(k);
    let cauchy = match (has("sigma") && has("eta"), has("alpha") && has("beta")) {
        (true, false) if !has("alpha") && !has("beta") => false,
        (false, true) if !has("sigma") && !has("eta") => true,
        _ => return Err(invalid("give exactly one axis pair: sigma/eta or alpha/beta".into())),
    };
    let (a, b) = if cauchy { ("alpha", "beta") } else { ("sigma", "eta") };
    let real = |k: &str, d: f64| -> Result<f64> {
        kv.get(k).map_or(Ok(d), |v| v.parse().map_err(|_| invalid(format!("{k}: not a number: {v:?}"))))
    };
    let tol = match kv.get("tol") {
        Some(v) => Some(v.parse().map_err(|_| invalid(format!("tol: not a number: {v:?}")))?),
        None => None,
    };
    Ok(SweepConfig {
        eval,
        cauchy,
        first: axis(a, &kv[a])?,
        second: axis(b, &kv[b])?,
        t0: real("t0", DEFAULT_T0)?,
        t1: real("t1", DEFAULT_T1)?,
        tol: resolve_tol(tol)?,
    })
}

fn evaluate(cfg: &SweepConfig, point: Point) -> std::result::Result<Value, Failure> {
    let m = admissible(&point)?;
    Ok(match cfg.eval {
        Eval::Connect => connect(&m),
        Eval::Ratio => ratio(&m, cfg.t0, cfg.t1, cfg.tol)?,
        Eval::Chi => chi(&m)?,
    })
}

pub fn run(path: &Path) -> std::result::Result<Body, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let cfg = parse(&text)?;
    let names = if cfg.cauchy { ("alpha", "beta") } else { ("sigma", "eta") };
    let grid: Vec<(Complex64, Complex64)> =
        cfg.first.iter().flat_map(|&a| cfg.second.iter().map(move |&b| (a, b))).collect();
    let points: Vec<Value> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let point = if cfg.cauchy {
                Point::Cauchy(CauchyData::new(a, b))
            } else {
                Point::Monodromy(MonodromyData::new(a, b))
            };
            let mut v = json!({"index": i, names.0: cx(a), names.1: cx(b)});
            match evaluate(&cfg, point) {
                Ok(r) => v["result"] = r,
                Err(f) => v["error"] = error_value(&f.error),
            }
            v
        })
        .collect();
    let codes = || points.iter().filter_map(|p| p["error"]["exit_code"].as_u64());
    let failures = codes().count();
    let code = codes().max().unwrap_or(0);
    let summary = json!({
        "command": format!("{:?}", cfg.eval).to_lowercase(),
        "t0": cfg.t0,
        "t1": cfg.t1,
        "tol": cfg.tol,
        "points": points,
        "failures": failures,
        "exit_code": code,
    });
    Ok(Body::Rows(summary, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_axes_and_ranges() {
        let c = parse("command = chi\nsigma = 0.2 0.3,0.01 # two\neta = 0.1:0.2:3\ntol=1e-10\n").unwrap();
        assert_eq!(c.eval, Eval::Chi);
        assert_eq!(c.first, vec![Complex64::new(0.2, 0.0), Complex64::new(0.3, 0.01)]);
        assert_eq!(c.second.len(), 3);
        assert!((c.second[1].re - 0.15).abs() < 1e-15);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.t1, DEFAULT_T1);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse("sigma = 0.2\n").is_err());
        assert!(parse("sigma = 0.2\neta = 0.1\nalpha = 1\nbeta = 1\n").is_err());
        assert!(parse("sigma = 0.2\neta = 0.1\nfoo = 1\n").is_err());
        assert!(parse("sigma = 0.2\neta = 0.1:0.2:0\n").is_err());
        assert!(parse("command = solve\nsigma = 0.2\neta = 0.1\n").is_err());
    }
}
