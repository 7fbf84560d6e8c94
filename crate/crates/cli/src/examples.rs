//! Built-in end-to-end runs on the two reference alternating systems.

use std::fs;
use std::path::Path;

use perbif_core::bifurcation::{residual, solve, transversality, BifurcationPoint, SolveConfig};
use perbif_core::invariance::{schwarzian, schwarzian_of_composition, verify, VerifyConfig};
use perbif_core::numeric::{rational_to_f64, Rational};
use perbif_core::reference::{self, quadratic_cubic_values, quartic_tangent_values as qt};
use perbif_core::system::PeriodicSystem;
use serde_json::{json, Value};

use crate::table::{fmt7, Table};
use crate::{CliError, Mode};

fn q(pair: (i64, i64)) -> Rational {
    Rational::new(pair.0.into(), pair.1.into())
}

fn list(v: &[Rational]) -> String {
    format!("[{}]", v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "))
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

fn is_zero(v: &[Rational]) -> bool {
    v.iter().all(|r| *r == Rational::from_integer(0.into()))
}

fn solved(sys: &PeriodicSystem, init: &[f64]) -> Result<BifurcationPoint, CliError> {
    solve(sys, 0, 1, 3, init, &SolveConfig::default()).map_err(|e| CliError::check(format!("Newton solve failed: {e}")))
}

fn finish(table: &Table, record: Value, json_path: Option<&Path>) -> Result<(), CliError> {
    print!("{}", table.render());
    if let Some(path) = json_path {
        let mut text = serde_json::to_string_pretty(&record).expect("JSON serialization of plain data");
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if table.pass() {
        println!("all checks pass");
        Ok(())
    } else {
        let n = table.rows.iter().filter(|r| r.status == crate::table::Status::Fail).count();
        Err(CliError::check(format!("{n} check(s) differ from the published values")))
    }
}

/// Quadratic/cubic system: float Newton, exact confirmation of the point,
/// determinants and Schwarzians, then the rotation check in `mode`.
pub fn example1(mode: Mode, json_path: Option<&Path>) -> Result<(), CliError> {
    let sys = reference::quadratic_cubic();
    let p = solved(&sys, &reference::QUADRATIC_CUBIC_INIT)?;
    let quoted = reference::quadratic_cubic_quoted();
    let exact = reference::quadratic_cubic_exact();
    let mut t = Table::default();

    t.check("Newton iterations", p.iterations.to_string(), "<= 30".into(), p.iterations <= 30);
    t.check(
        "a",
        fmt7(p.x_star),
        quoted.a.to_string(),
        (p.x_star - rational_to_f64(&quoted.a)).abs() <= 1e-10,
    );
    for (i, (got, want)) in p.lambda_star.iter().zip(&quoted.lambda).enumerate() {
        t.check(
            &format!("l{}", i + 1),
            fmt7(*got),
            want.to_string(),
            (got - rational_to_f64(want)).abs() <= 1e-10,
        );
    }
    let near_exact = p
        .lambda_star
        .iter()
        .zip(&exact.lambda)
        .all(|(g, e)| (g - rational_to_f64(e)).abs() <= 1e-12);
    t.check(
        "solution matches l3 = 52521875/229582512",
        fmt7(p.lambda_star[2]),
        "".into(),
        near_exact,
    );

    let r_quoted = residual(&sys, 0, 1, 3, &quoted.a, &quoted.lambda).map_err(|e| CliError::check(e.to_string()))?;
    t.check("exact residual, published point", list(&r_quoted), "[0, 0, 0, 0]".into(), is_zero(&r_quoted));
    let r_exact = residual(&sys, 0, 1, 3, &exact.a, &exact.lambda).map_err(|e| CliError::check(e.to_string()))?;
    t.check("exact residual, solved point", list(&r_exact), "[0, 0, 0, 0]".into(), is_zero(&r_exact));

    let det_want = q(quadratic_cubic_values::DET);
    let (_, d0) = transversality(&sys, 0, 1, 3, &exact.a, &exact.lambda).map_err(|e| CliError::check(e.to_string()))?;
    let (_, d1) = transversality(&sys, 1, 1, 3, &exact.b, &exact.lambda).map_err(|e| CliError::check(e.to_string()))?;
    t.check("det J, rotation 0", d0.to_string(), det_want.to_string(), d0 == det_want);
    t.check("det J, rotation 1", d1.to_string(), det_want.to_string(), d1 == det_want);

    let sf = schwarzian(sys.map(0), &exact.a, &exact.lambda, 0.0).map_err(|e| CliError::check(e.to_string()))?;
    let sg = schwarzian(sys.map(1), &exact.b, &exact.lambda, 0.0).map_err(|e| CliError::check(e.to_string()))?;
    let (sf_want, sg_want) = (q(quadratic_cubic_values::SF_A), q(quadratic_cubic_values::SG_B));
    t.check("Sf(a)", sf.to_string(), sf_want.to_string(), sf == sf_want);
    t.check("Sg(b)", sg.to_string(), sg_want.to_string(), sg == sg_want);
    let prod = &sf * &sg;
    t.check("Sf(a)*Sg(b)", prod.to_string(), "< 0".into(), prod < Rational::from_integer(0.into()));
    let lam = p.lambda_star.clone();
    let b = sys.apply_map(0, &p.x_star, &lam).map_err(|e| CliError::check(e.to_string()))?;
    let s_f = schwarzian_of_composition(&sys, 0, 1, &p.x_star, &lam).map_err(|e| CliError::check(e.to_string()))?;
    let s_g = schwarzian_of_composition(&sys, 1, 1, &b, &lam).map_err(|e| CliError::check(e.to_string()))?;
    t.check("SF(a)", format!("{s_f:.3e}"), "0".into(), s_f.abs() <= 1e-8);
    t.check("SG(b)", format!("{s_g:.3e}"), "0".into(), s_g.abs() <= 1e-8);

    let cfg = VerifyConfig::default();
    let report = match mode {
        Mode::Rational => {
            let r = verify(&sys, 0, 1, 3, &exact.a, &exact.lambda, &cfg).map_err(|e| CliError::check(e.to_string()))?;
            (r.pass, r.to_json())
        }
        Mode::Float => {
            let r = verify(&sys, 0, 1, 3, &p.x_star, &lam, &cfg).map_err(|e| CliError::check(e.to_string()))?;
            (r.pass, r.to_json())
        }
    };
    t.check("all rotations A_3, J ratio law", if report.0 { "yes" } else { "no" }.into(), "".into(), report.0);

    let record = json!({
        "system": reference::QUADRATIC_CUBIC_MAPS,
        "mode": if mode == Mode::Rational { "rational" } else { "float" },
        "point": p,
        "exact": {
            "a": exact.a.to_string(),
            "b": exact.b.to_string(),
            "lambda": strings(&exact.lambda),
            "residual": strings(&r_exact),
            "det": [d0.to_string(), d1.to_string()],
            "sf": sf.to_string(),
            "sg": sg.to_string(),
        },
        "published_residual": strings(&r_quoted),
        "verify": report.1,
        "checks": t.to_json(),
        "pass": t.pass(),
    });
    finish(&t, record, json_path)
}

/// Quartic/tangent system, float only.
pub fn example2(json_path: Option<&Path>) -> Result<(), CliError> {
    let sys = reference::quartic_tangent();
    let p = solved(&sys, &reference::QUARTIC_TANGENT_INIT)?;
    let mut t = Table::default();
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;

    t.check("a", fmt7(p.x_star), qt::A.to_string(), close(p.x_star, qt::A, 1e-4));
    for (i, (got, want)) in p.lambda_star.iter().zip(qt::LAMBDA).enumerate() {
        t.check(&format!("l{}", i + 1), fmt7(*got), want.to_string(), close(*got, want, 1e-4));
    }
    let lam = p.lambda_star.clone();
    let err = |e: &dyn std::fmt::Display| CliError::check(e.to_string());
    let b = sys.apply_map(0, &p.x_star, &lam).map_err(|e| err(&e))?;
    t.check("b", fmt7(b), qt::B.to_string(), close(b, qt::B, 1e-4));
    let rel = (p.nondeg_value - qt::F_X4).abs() / qt::F_X4.abs();
    t.check("F_xxxx(a)", fmt7(p.nondeg_value), qt::F_X4.to_string(), rel <= 0.02);
    let g4 = sys
        .composition_jet_plain(1, 1, &b, &lam, 4)
        .map_err(|e| err(&e))?
        .derivative(4);
    t.info("G_xxxx(b)", fmt7(g4), "".into());
    let (_, d0) = transversality(&sys, 0, 1, 3, &p.x_star, &lam).map_err(|e| err(&e))?;
    let (_, d1) = transversality(&sys, 1, 1, 3, &b, &lam).map_err(|e| err(&e))?;
    t.check("det J, rotation 0", fmt7(d0), qt::DET.to_string(), close(d0, qt::DET, 1e-3));
    t.info("det J, rotation 1", fmt7(d1), "".into());
    let sf = schwarzian(sys.map(0), &p.x_star, &lam, sys.floor()).map_err(|e| err(&e))?;
    let sg = schwarzian(sys.map(1), &b, &lam, sys.floor()).map_err(|e| err(&e))?;
    t.check("Sf(a)", fmt7(sf), qt::SF_A.to_string(), close(sf, qt::SF_A, 1e-5));
    t.check("Sg(b)", fmt7(sg), qt::SG_B.to_string(), close(sg, qt::SG_B, 1e-9));
    t.check("Sf(a)*Sg(b)", fmt7(sf * sg), "< 0".into(), sf * sg < 0.0);
    let r = verify(&sys, 0, 1, 3, &p.x_star, &lam, &VerifyConfig::default()).map_err(|e| err(&e))?;
    t.check("all rotations A_3, J ratio law", if r.pass { "yes" } else { "no" }.into(), "".into(), r.pass);

    let record = json!({
        "system": reference::QUARTIC_TANGENT_MAPS,
        "mode": "float",
        "point": p,
        "b": b,
        "g_xxxx_b": g4,
        "det": [d0, d1],
        "sf": sf,
        "sg": sg,
        "verify": r.to_json(),
        "checks": t.to_json(),
        "pass": t.pass(),
    });
    finish(&t, record, json_path)
}
