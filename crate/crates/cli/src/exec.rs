//! Command execution: drives the library, assembles the report, and decides
//! the outcome class (ok vs violation). All randomness-free; reports are
//! byte-identical across runs and across worker counts.

use serde_json::{Map, Value};
use veronese::construct::digit_membership;
use veronese::contfrac::check_prop1;
use veronese::dual::{estimate_w, scan_linear_form};
use veronese::exponents::{
    bestens_bounds, besten_transfer, conjecture_evidence, estimate_lambda, estimate_lambda_hat,
    hausdorff_dim, holds_lower_bound, neuko_bound, spectrum_formula, theo_bound,
    transference_check, uniform_bounds, DimRegime,
};
use veronese::simul::{liouville_witness, scan_mx, verify_lemma2, verify_lemma3};
use veronese::Error;

use crate::config::{
    Command, ConjectureArgs, ConstructArgs, EstimateCmd, FormulaCmd, RunConfig, ScanCmd,
    VerifyCmd,
};
use crate::report::{
    exponent_report_rows, float_value, formula_result_row, formula_value_fields,
    interval_fields, kind_str, rat_value, uint_value, Outcome, Report,
};
use crate::spec::{
    apply_depth_cap, parse_heights, parse_number, parse_rat, parse_rat_or_inf, parse_scales,
    ParsedNumber,
};

pub fn execute(cfg: &RunConfig) -> Result<Report, Error> {
    let d = cfg.float_decimals;
    match &cfg.command {
        Command::Construct(args) => construct(cfg, args),
        Command::Scan { scan } => match scan {
            ScanCmd::Form(a) => scan_form(cfg, a),
            ScanCmd::Point(a) => scan_point(cfg, a),
        },
        Command::Estimate { estimate } => match estimate {
            EstimateCmd::Lambda(a) => {
                let p = number(cfg, &a.number)?;
                let scales = parse_scales(&a.scales)?;
                let rep = estimate_lambda(&p.handle, a.k, &scales)?;
                let mut r = Report::new("estimate lambda", "finite-scale-evidence");
                r.number = Some(p.token);
                r.parameters.insert("k".into(), a.k.into());
                r.parameters.insert("scales".into(), scale_list(&scales));
                exponent_report_rows(&rep, d, "", &mut r.rows, &mut r.summary);
                override_tolerance(cfg, &mut r.summary, &["tolerance"]);
                Ok(r)
            }
            EstimateCmd::LambdaHat(a) => {
                let p = number(cfg, &a.number)?;
                let scales = parse_scales(&a.scales)?;
                let rep = estimate_lambda_hat(&p.handle, a.k, &scales, cfg.workers)?;
                let mut r = Report::new("estimate lambda-hat", "finite-scale-evidence");
                r.number = Some(p.token);
                r.parameters.insert("k".into(), a.k.into());
                r.parameters.insert("scales".into(), scale_list(&scales));
                exponent_report_rows(&rep, d, "", &mut r.rows, &mut r.summary);
                override_tolerance(cfg, &mut r.summary, &["tolerance"]);
                Ok(r)
            }
            EstimateCmd::W(a) => {
                let p = number(cfg, &a.number)?;
                let heights = parse_heights(&a.heights)?;
                let est = estimate_w(&p.handle, a.k, &heights, cfg.workers)?;
                let mut r = Report::new("estimate w", "finite-scale-evidence");
                r.number = Some(p.token);
                r.parameters.insert("k".into(), a.k.into());
                r.parameters.insert(
                    "heights".into(),
                    Value::Array(heights.iter().map(|h| (*h).into()).collect()),
                );
                exponent_report_rows(&est.w, d, "w", &mut r.rows, &mut r.summary);
                exponent_report_rows(&est.w_hat, d, "w_hat", &mut r.rows, &mut r.summary);
                override_tolerance(cfg, &mut r.summary, &["w_tolerance", "w_hat_tolerance"]);
                Ok(r)
            }
        },
        Command::Verify { verify } => match verify {
            VerifyCmd::Lemma2(a) => lemma2(cfg, a),
            VerifyCmd::Lemma3(a) => lemma3(cfg, a),
            VerifyCmd::Prop1(a) => prop1(cfg, a),
            VerifyCmd::Liouville(a) => liouville(cfg, a),
        },
        Command::Formula { formula } => run_formula(cfg, formula),
        Command::Conjecture(args) => conjecture(cfg, args),
        Command::Run(_) => Err(Error::InvalidSpec(
            "run must be resolved to a config before execution".into(),
        )),
    }
}

fn number(cfg: &RunConfig, token: &str) -> Result<ParsedNumber, Error> {
    let mut p = parse_number(token)?;
    apply_depth_cap(&mut p, cfg.depth_cap);
    Ok(p)
}

/// The order a recipe itself declares (the largest k among its predicted
/// exponents), used when a verify subcommand omits --k.
fn resolve_k(requested: Option<u32>, p: &ParsedNumber) -> Result<u32, Error> {
    if let Some(k) = requested {
        return Ok(k);
    }
    p.certificate
        .as_ref()
        .and_then(|c| c.predicted.iter().map(|pe| pe.k).max())
        .ok_or_else(|| Error::InvalidSpec("this recipe implies no order; pass --k".into()))
}

fn scale_list(scales: &[num_bigint::BigUint]) -> Value {
    Value::Array(scales.iter().map(uint_value).collect())
}

fn override_tolerance(cfg: &RunConfig, summary: &mut Map<String, Value>, keys: &[&str]) {
    if let Some(t) = cfg.tolerance {
        for key in keys {
            summary.insert((*key).into(), float_value(t, cfg.float_decimals));
        }
        summary.insert("tolerance_overridden".into(), Value::Bool(true));
    }
}

fn construct(cfg: &RunConfig, args: &ConstructArgs) -> Result<Report, Error> {
    let p = number(cfg, &args.number)?;
    let cert = p.certificate.as_ref().ok_or_else(|| {
        Error::InvalidSpec(format!(
            "'{}' is a plain expansion with no certificate; use bugeaud: or meinsatz:",
            p.token
        ))
    })?;
    let mut r = Report::new("construct", "construction-certificate");
    r.number = Some(p.token.clone());
    if let Some(depth) = args.check_depth {
        r.parameters.insert("check_depth".into(), depth.into());
    }
    for pe in &cert.predicted {
        let mut row = Map::new();
        row.insert("kind".into(), Value::String(kind_str(pe.kind).into()));
        row.insert("k".into(), pe.k.into());
        formula_value_fields(&mut row, &pe.value);
        row.insert("proven".into(), Value::Bool(pe.proven));
        row.insert("source".into(), Value::String(pe.source.clone()));
        r.rows.push(row);
    }
    r.summary.insert("label".into(), Value::String(cert.label.clone()));
    r.summary.insert(
        "declared_ratio".into(),
        match &cert.ratio {
            veronese::exactnum::RatioLimit::Finite(v) => rat_value(v),
            veronese::exactnum::RatioLimit::Infinite => Value::String("inf".into()),
            veronese::exactnum::RatioLimit::Undeclared => Value::String("undeclared".into()),
        },
    );
    if let Some(claim) = &cert.membership {
        r.summary.insert("membership_base".into(), claim.base.into());
        r.summary.insert(
            "membership_digits".into(),
            Value::Array(claim.allowed.iter().map(|v| (*v).into()).collect()),
        );
        if let Some(depth) = args.check_depth {
            let v = digit_membership(&cert.handle, claim.base, &claim.allowed, depth)?;
            r.summary.insert("membership_checked".into(), v.checked.into());
            r.summary.insert("membership_holds".into(), Value::Bool(v.member));
            if let Some((pos, digit)) = v.first_offender {
                let mut row = Map::new();
                row.insert("offender_position".into(), pos.into());
                row.insert("offender_digit".into(), digit.into());
                r.rows.push(row);
            }
            if !v.member {
                r.outcome = Outcome::Violation;
            }
        }
    }
    Ok(r)
}

fn scan_form(cfg: &RunConfig, a: &crate::config::ScanFormArgs) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let heights = parse_heights(&a.heights)?;
    let mut r = Report::new("scan form", "certified-scan");
    r.number = Some(p.token);
    r.parameters.insert("k".into(), a.k.into());
    r.parameters.insert(
        "heights".into(),
        Value::Array(heights.iter().map(|h| (*h).into()).collect()),
    );
    for &x in &heights {
        let hit = scan_linear_form(&p.handle, a.k, x, cfg.workers)?;
        let mut row = Map::new();
        row.insert("height".into(), x.into());
        row.insert(
            "coeffs".into(),
            Value::String(
                hit.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            ),
        );
        interval_fields(&mut row, "value", &hit.value);
        r.rows.push(row);
    }
    Ok(r)
}

fn scan_point(cfg: &RunConfig, a: &crate::config::ScanPointArgs) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let xs = parse_scales(&a.x)?;
    let mut r = Report::new("scan point", "certified-scan");
    r.number = Some(p.token);
    r.parameters.insert("k".into(), a.k.into());
    r.parameters.insert("x".into(), scale_list(&xs));
    for x in &xs {
        let mut row = Map::new();
        row.insert("x".into(), uint_value(x));
        match scan_mx(&p.handle, a.k, x) {
            Ok(ap) => {
                row.insert(
                    "nearest".into(),
                    Value::String(
                        ap.ys.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(" "),
                    ),
                );
                interval_fields(&mut row, "mx", &ap.mx);
                if !ap.exact_hits.is_empty() {
                    row.insert(
                        "exact_hit_orders".into(),
                        Value::Array(ap.exact_hits.iter().map(|j| (*j).into()).collect()),
                    );
                }
            }
            // ζʲx integral: excluded from M_x by the 0 < ‖·‖ convention,
            // reported rather than treated as a failure.
            Err(Error::ExactHit { j, x }) => {
                row.insert("exact_hit_order".into(), j.into());
                row.insert("exact_hit_x".into(), Value::String(x));
            }
            Err(e) => return Err(e),
        }
        r.rows.push(row);
    }
    Ok(r)
}

fn lemma2(cfg: &RunConfig, a: &crate::config::VerifyLemma2Args) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let k = resolve_k(a.k, &p)?;
    let rep = verify_lemma2(&p.handle, k, a.xmax, cfg.workers)?;
    let mut r = Report::new("verify lemma2", "certified-scan");
    r.number = Some(p.token);
    r.parameters.insert("k".into(), k.into());
    r.parameters.insert("xmax".into(), a.xmax.into());
    for h in &rep.hits {
        let mut row = Map::new();
        row.insert("x".into(), h.x.into());
        row.insert("x0".into(), Value::String(h.decomposition.x0.to_string()));
        row.insert("y0".into(), Value::String(h.decomposition.y0.to_string()));
        row.insert("m0".into(), Value::String(h.decomposition.m0.to_string()));
        row.insert("divides".into(), Value::Bool(h.divides));
        row.insert("convergent_ok".into(), Value::Bool(h.convergent_ok));
        r.rows.push(row);
    }
    r.summary.insert("c0".into(), rat_value(&rep.c0));
    r.summary.insert("hit_count".into(), (rep.hits.len() as u64).into());
    r.summary.insert(
        "excluded_exact_hits".into(),
        Value::Array(rep.excluded_exact_hits.iter().map(|x| (*x).into()).collect()),
    );
    r.summary.insert(
        "scaling_checked".into(),
        (rep.haine_checks.len() as u64).into(),
    );
    r.summary.insert(
        "scaling_verified".into(),
        Value::Bool(rep.haine_checks.iter().all(|h| h.verified)),
    );
    r.summary.insert(
        "violations".into(),
        Value::Array(rep.violations.iter().cloned().map(Value::String).collect()),
    );
    if !rep.clean() {
        r.outcome = Outcome::Violation;
    }
    Ok(r)
}

fn lemma3(cfg: &RunConfig, a: &crate::config::VerifyLemma3Args) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let k = resolve_k(a.k, &p)?;
    let spec = p.handle.lacunary_spec().ok_or_else(|| {
        Error::Precondition("the multiple-structure check needs a lacunary number".into())
    })?;
    let exponent = a.exponent.as_deref().map(parse_rat).transpose()?;
    let rep = verify_lemma3(spec, k, a.xmax, exponent, cfg.workers)?;
    let mut r = Report::new("verify lemma3", "certified-scan");
    r.number = Some(p.token.clone());
    r.parameters.insert("k".into(), k.into());
    r.parameters.insert("xmax".into(), a.xmax.into());
    r.parameters.insert("exponent".into(), rat_value(&rep.exponent));
    for m in &rep.multiples {
        let mut row = Map::new();
        row.insert("x".into(), m.x.into());
        row.insert("y".into(), Value::String(m.y.to_string()));
        row.insert("vector_index".into(), (m.vector_index as u64).into());
        row.insert("multiplier".into(), Value::String(m.multiplier.to_string()));
        r.rows.push(row);
    }
    r.summary.insert(
        "defining_vectors".into(),
        Value::Array(
            rep.defining
                .iter()
                .map(|(x, y)| Value::String(format!("{x}:{y}")))
                .collect(),
        ),
    );
    r.summary.insert(
        "small_exceptions".into(),
        Value::Array(
            rep.small_exceptions
                .iter()
                .map(|(x, y)| Value::String(format!("{x}:{y}")))
                .collect(),
        ),
    );
    r.summary.insert("small_cutoff".into(), rep.small_cutoff.into());
    r.summary.insert(
        "violations".into(),
        Value::Array(
            rep.violations
                .iter()
                .map(|(x, y)| Value::String(format!("{x}:{y}")))
                .collect(),
        ),
    );
    if !rep.clean() {
        r.outcome = Outcome::Violation;
    }
    Ok(r)
}

fn prop1(cfg: &RunConfig, a: &crate::config::VerifyProp1Args) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let rep = check_prop1(&p.handle, a.qmax)?;
    let mut r = Report::new("verify prop1", "certified-scan");
    r.number = Some(p.token);
    r.parameters.insert("qmax".into(), a.qmax.into());
    for (m, n) in &rep.solutions {
        let mut row = Map::new();
        row.insert("m".into(), (*m).into());
        row.insert("n".into(), Value::String(n.to_string()));
        r.rows.push(row);
    }
    r.summary.insert("consistent".into(), Value::Bool(rep.consistent()));
    if let Some([(m1, n1), (m2, n2)]) = &rep.independent_pair {
        r.summary.insert(
            "independent_pair".into(),
            Value::String(format!("{m1}:{n1} and {m2}:{n2}")),
        );
        r.outcome = Outcome::Violation;
    }
    Ok(r)
}

fn liouville(cfg: &RunConfig, a: &crate::config::VerifyLiouvilleArgs) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let rep = liouville_witness(&p.handle, a.k, a.xmax)?;
    let mut r = Report::new("verify liouville", "certified-scan");
    r.number = Some(p.token);
    r.parameters.insert("k".into(), a.k.into());
    r.parameters.insert("xmax".into(), a.xmax.into());
    if let Some(x) = rep.witness {
        let mut row = Map::new();
        row.insert("witness".into(), x.into());
        r.rows.push(row);
    }
    r.summary.insert("c0".into(), rat_value(&rep.c0));
    r.summary.insert("evaluated".into(), rep.evaluated.into());
    r.summary.insert("witness_found".into(), Value::Bool(rep.witness.is_some()));
    r.summary.insert("note".into(), Value::String(rep.note.clone()));
    // Evidence mode: absence of a witness is an honest answer, not a
    // violation, so the exit status stays 0 either way.
    Ok(r)
}

fn run_formula(_cfg: &RunConfig, f: &FormulaCmd) -> Result<Report, Error> {
    let mut r = Report::new("formula", "exact-formula");
    let result = match f {
        FormulaCmd::Spectrum(a) => {
            r.command = "formula spectrum".into();
            Some(spectrum_formula(&parse_rat_or_inf(&a.lambda1)?, a.k)?)
        }
        FormulaCmd::Bestens(a) => {
            r.command = "formula bestens".into();
            let l1 = parse_rat(&a.lambda1)?;
            let (k0, res) = bestens_bounds(&l1, a.k)?;
            r.summary.insert("k0".into(), k0.into());
            Some(res)
        }
        FormulaCmd::Transfer(a) => {
            r.command = "formula transfer".into();
            Some(besten_transfer(&parse_rat(&a.lambda_n)?, a.n, a.m)?)
        }
        FormulaCmd::LowerBound(a) => {
            r.command = "formula lower-bound".into();
            Some(holds_lower_bound(&parse_rat_or_inf(&a.lambda_n)?, a.n, a.k)?)
        }
        FormulaCmd::Theo(a) => {
            r.command = "formula theo".into();
            Some(theo_bound(&parse_rat_or_inf(&a.lambda1)?, a.k)?)
        }
        FormulaCmd::Uniform(a) => {
            r.command = "formula uniform".into();
            Some(uniform_bounds(a.k)?)
        }
        FormulaCmd::Hausdorff(a) => {
            r.command = "formula hausdorff".into();
            let regime = if a.lower_bound { DimRegime::LowerBound } else { DimRegime::Exact };
            match hausdorff_dim(a.k, &parse_rat(&a.lambda)?, regime) {
                Ok(res) => Some(res),
                // No settled closed form in this regime: an honest empty
                // answer, not a failure.
                Err(Error::NoApplicableResult(msg)) => {
                    let mut row = Map::new();
                    row.insert("claim".into(), Value::String("none".into()));
                    row.insert("note".into(), Value::String(msg));
                    r.rows.push(row);
                    None
                }
                Err(e) => return Err(e),
            }
        }
        FormulaCmd::Neuko(a) => {
            r.command = "formula neuko".into();
            Some(neuko_bound(&parse_rat_or_inf(&a.w1)?, a.k)?)
        }
        FormulaCmd::Transference(a) => {
            r.command = "formula transference".into();
            let verdict = transference_check(
                &parse_rat(&a.lambda)?,
                &parse_rat(&a.w)?,
                a.k,
                a.uniform,
            )?;
            for c in &verdict.checks {
                let mut row = Map::new();
                row.insert("name".into(), Value::String(c.name.into()));
                row.insert("lhs".into(), rat_value(&c.lhs));
                row.insert("rhs".into(), rat_value(&c.rhs));
                row.insert("holds".into(), Value::Bool(c.holds));
                row.insert("slack".into(), rat_value(&c.slack));
                r.rows.push(row);
            }
            r.summary.insert("all_hold".into(), Value::Bool(verdict.all_hold));
            r.summary.insert(
                "notes".into(),
                Value::Array(verdict.notes.iter().cloned().map(Value::String).collect()),
            );
            if !verdict.all_hold {
                r.outcome = Outcome::Violation;
            }
            None
        }
    };
    if let Some(res) = result {
        r.rows.push(formula_result_row(&res));
    }
    Ok(r)
}

fn conjecture(cfg: &RunConfig, a: &ConjectureArgs) -> Result<Report, Error> {
    let p = number(cfg, &a.number)?;
    let scales = parse_scales(&a.scales)?;
    let ev = conjecture_evidence(&p.handle, a.m, a.n, &scales)?;
    let d = cfg.float_decimals;
    let mut r = Report::new("conjecture", "finite-scale-evidence");
    r.number = Some(p.token);
    r.parameters.insert("m".into(), a.m.into());
    r.parameters.insert("n".into(), a.n.into());
    r.parameters.insert("scales".into(), scale_list(&scales));
    exponent_report_rows(&ev.lambda_n, d, "order_n", &mut r.rows, &mut r.summary);
    exponent_report_rows(&ev.lambda_m, d, "order_m", &mut r.rows, &mut r.summary);
    r.summary.insert("bound".into(), float_value(ev.bound, d));
    r.summary.insert(
        "holds_on_estimates".into(),
        Value::Bool(ev.holds_on_estimates),
    );
    r.summary.insert("first_nontrivial".into(), Value::Bool(ev.first_nontrivial));
    r.summary.insert("caveat".into(), Value::String(ev.caveat.clone()));
    Ok(r)
}

/// Exit code for an execution error: precision/internal trouble is 2,
/// anything attributable to the request is 3.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted(_) | Error::AmbiguousDistance(_) | Error::Internal(_) => 2,
        Error::InvalidSpec(_)
        | Error::Precondition(_)
        | Error::BoxTooLarge { .. }
        | Error::ExactHit { .. }
        | Error::NoApplicableResult(_) => 3,
    }
}
