use crate::args::{resolve_tol, Cli, Command, Point, PointArgs};
use crate::output::{cx, envelope, error_value, exit_code, render, write, Body};
use crate::sweep;
use p3tau::acceptance;
use p3tau::mbform::{closure_check_with, ClosureOptions};
use p3tau::monodromy::*;
use p3tau::ode::{integrate_with, IntegrateOptions};
use p3tau::tau::*;
use p3tau::{Complex64, Error, Result};
use serde_json::{json, Value};
use std::time::Instant;

/// An error plus whatever context helps diagnose it.
pub struct Failure {
    pub error: Error,
    pub context: Value,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, context: Value::Null }
    }
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("records serialize")
}

fn field(r: Result<Complex64>) -> Value {
    r.map(cx).unwrap_or_else(|e| json!({"error": error_value(&e)}))
}

/// Monodromy data of a point, rejected with its validity report if any
/// admissibility inequality fails.
pub fn admissible(point: &Point) -> std::result::Result<MonodromyData, Failure> {
    let m = point.monodromy()?;
    let report = validate(&m);
    match report.first_failure() {
        None => Ok(m),
        Some(c) => Err(Failure {
            error: Error::Domain { check: c.name.clone(), margin: c.margin },
            context: json!({"validity": to_value(&report), "validity_margin": VALIDITY_MARGIN}),
        }),
    }
}

pub fn connect(m: &MonodromyData) -> Value {
    let st = stokes_from_monodromy(m);
    let amp = amplitudes_from_monodromy(m);
    json!({
        "sigma": cx(m.sigma),
        "eta": cx(m.eta),
        "alpha": field(cauchy_from_monodromy(m).map(|c| c.alpha)),
        "beta": field(cauchy_from_monodromy(m).map(|c| c.beta)),
        "p": field(st.clone().map(|s| s.p)),
        "q": field(st.map(|s| s.q)),
        "nu": field(nu_from_monodromy(m)),
        "b_plus": field(amp.clone().map(|a| a.b_plus)),
        "b_minus": field(amp.map(|a| a.b_minus)),
        "rho": field(rho_from_monodromy(m).map(|r| r.rho)),
        "validity": to_value(&validate(m)),
        "validity_margin": VALIDITY_MARGIN,
    })
}

pub fn ratio(m: &MonodromyData, t0: f64, t1: f64, tol: f64) -> std::result::Result<Value, Failure> {
    let cf = log_tau_ratio_closed_form(m)?;
    let (q, a) = log_tau_ratio_numeric(m, t0, t1, tol).map_err(|error| Failure {
        context: json!({"t0": t0, "t1": t1, "tol": tol, "closed_form": to_value(&cf)}),
        error,
    })?;
    let gap = |r: &TauRatioResult| (r.log_ratio - cf.log_ratio).norm();
    Ok(json!({
        "closed_form": to_value(&cf),
        "quadrature": to_value(&q),
        "action": to_value(&a),
        "quadrature_minus_closed_form": gap(&q),
        "action_minus_closed_form": gap(&a),
        "action_minus_quadrature": (a.log_ratio - q.log_ratio).norm(),
        "combined_estimate": q.error_estimate + a.error_estimate,
    }))
}

pub fn chi(m: &MonodromyData) -> Result<Value> {
    let (la, lb) = (log_chi_constant(m)?, log_chi_from_ratio(m, log_tau_ratio_closed_form(m)?.log_ratio)?);
    let (a, b) = (la.exp(), lb.exp());
    Ok(json!({
        "closed_form": cx(a),
        "from_ratio": cx(b),
        "log_closed_form": cx(la),
        "log_from_ratio": cx(lb),
        "relative_difference": (a - b).norm() / a.norm(),
    }))
}

fn point_input(p: &PointArgs) -> Value {
    let mut o = serde_json::Map::new();
    for (k, v) in [("sigma", &p.sigma), ("eta", &p.eta), ("alpha", &p.alpha), ("beta", &p.beta)] {
        if let Some(s) = v {
            o.insert(k.into(), crate::args::parse_complex(s).map(cx).unwrap_or_else(|_| json!(s)));
        }
    }
    Value::Object(o)
}

fn with(mut v: Value, extra: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

type Outcome = std::result::Result<Body, Failure>;

fn execute(cmd: &Command) -> (&'static str, Value, Outcome) {
    match cmd {
        Command::Connect(p) => ("connect", point_input(p), p.point().map_err(Failure::from).and_then(|pt| {
            let m = admissible(&pt)?;
            Ok(Body::Record(connect(&m)))
        })),
        Command::Ratio(p) => {
            let tol = resolve_tol(p.tol);
            let input = with(point_input(p), json!({"t0": p.t0, "t1": p.t1, "tol": tol.as_ref().ok()}));
            let run = || {
                let tol = tol?;
                let m = admissible(&p.point()?)?;
                Ok(Body::Record(ratio(&m, p.t0, p.t1, tol)?))
            };
            ("ratio", input, run())
        }
        Command::Chi(p) => ("chi", point_input(p), p.point().map_err(Failure::from).and_then(|pt| {
            let m = admissible(&pt)?;
            Ok(Body::Record(chi(&m)?))
        })),
        Command::Solve { point, x1, x0, at } => {
            let tol = resolve_tol(point.tol);
            let input = with(point_input(point), json!({"x0": x0, "x1": x1, "tol": tol.as_ref().ok(), "at": at}));
            let run = || {
                let tol = tol?;
                let pt = point.point()?;
                let c = match pt {
                    Point::Cauchy(c) => c,
                    Point::Monodromy(_) => cauchy_from_monodromy(&admissible(&pt)?)?,
                };
                let opts =
                    IntegrateOptions { tol, x0: *x0, stops: at.clone(), record_steps: at.is_empty(), ..Default::default() };
                let t = integrate_with(&c, *x1, &opts)
                    .map_err(|error| Failure { error, context: json!({"tol": tol, "x0": x0, "x1": x1}) })?;
                let mut csv = Vec::new();
                t.write_csv(&mut csv).map_err(|e| Error::InvalidInput(e.to_string()))?;
                let json = json!({"alpha": cx(c.alpha), "beta": cx(c.beta), "samples": to_value(&t.samples)});
                Ok(Body::Table { json, csv: String::from_utf8(csv).expect("csv output is utf-8") })
            };
            ("solve", input, run())
        }
        Command::MbCheck { point, x, h } => {
            let tol = resolve_tol(point.tol);
            let defaults = ClosureOptions::default();
            let input = with(
                point_input(point),
                json!({"x": x, "h": h, "hx": defaults.hx, "tol": tol.as_ref().ok(), "x0": defaults.x0}),
            );
            let run = || {
                let opts = ClosureOptions { h: *h, tol: tol?, ..defaults };
                let m = admissible(&point.point()?)?;
                let r = closure_check_with(x, &m, &opts)
                    .map_err(|error| Failure { error, context: json!({"h": h, "tol": opts.tol}) })?;
                Ok(Body::Record(to_value(&r)))
            };
            ("mb-check", input, run())
        }
        Command::Verify => {
            let outcomes = acceptance::run_all();
            let all = outcomes.iter().all(|o| o.passed);
            let body = json!({"all_passed": all, "criteria": to_value(&outcomes)});
            let rows = outcomes.iter().map(to_value).collect();
            ("verify", Value::Null, Ok(Body::Rows(body, rows)))
        }
        Command::Sweep { config } => ("sweep", json!({"config": config}), sweep::run(config)),
    }
}

/// Runs one invocation and returns the exit status.
pub fn run(cli: &Cli) -> u8 {
    let start = Instant::now();
    let (name, input, outcome) = execute(&cli.command);
    let mut record = envelope(name, input);
    let (body, mut code) = match outcome {
        Ok(body) => {
            let v = match &body {
                Body::Record(v) | Body::Table { json: v, .. } | Body::Rows(v, _) => v.clone(),
            };
            let code = status(name, &v);
            record.insert("result".into(), v);
            (Some(body), code)
        }
        Err(f) => {
            eprintln!("p3tau {name}: {}", f.error);
            let code = exit_code(&f.error);
            record.insert("error".into(), with(error_value(&f.error), json!({"context": f.context})));
            (None, code)
        }
    };
    if cli.out.timing {
        record.insert("runtime_s".into(), json!(start.elapsed().as_secs_f64()));
    }
    let record = Value::Object(record);
    let body = body.unwrap_or(Body::Record(Value::Null));
    match render(&record, &body, cli.out.format).and_then(|t| write(&cli.out, &t)) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("p3tau {name}: cannot write output: {e}");
            code = code.max(1);
        }
    }
    code
}

/// Nonzero when a successful evaluation still reports failures.
fn status(name: &str, v: &Value) -> u8 {
    match name {
        "verify" if v["all_passed"] != json!(true) => 2,
        "sweep" => v["exit_code"].as_u64().unwrap_or(0) as u8,
        _ => 0,
    }
}
