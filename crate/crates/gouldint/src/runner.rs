//! Task execution: turns a validated scenario into report rows.
//!
//! Exit-code contract: all checks pass -> 0, any check fails -> 1,
//! infrastructure failure (I/O, parsing) -> 2. Task-level failures,
//! including falsified hypotheses, are report rows, never process errors.

use crate::gould::{self, Integrand, Measure};
use crate::rat::{fmt_f64_12, fmt_rat, parse_rat, Mag, Rat};
use crate::report::{Report, Status};
use crate::rn::{self, RnError, RnResult};
use crate::scenario::{load_scenario, RnExpectation, Scenario, ScenarioError, Task};
use crate::setfn::{MultiSetFn, ScalarSetFn, SetFnError, VariationStrategy};
use crate::space::{MSet, Partition};
use serde_json::json;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub passed: bool,
}

/// Process exit code for an outcome.
pub fn exit_code(result: &Result<RunOutcome, RunnerError>) -> i32 {
    match result {
        Ok(out) if out.passed => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

/// Loads a scenario file, optionally overrides its tolerance, executes it,
/// and writes the reports into `out_dir`.
pub fn run_scenario_path(
    path: &Path,
    out_dir: &Path,
    tol_override: Option<&str>,
) -> Result<RunOutcome, RunnerError> {
    let mut scenario = load_scenario(path)?;
    if let Some(t) = tol_override {
        let tol = parse_rat(t).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.config.tolerance_f64 = crate::rat::rat_to_f64(&tol);
        scenario.config.tolerance = tol;
    }
    run_scenario(&scenario, out_dir)
}

/// Executes every task in order and writes `report.json` / `report.csv`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome, RunnerError> {
    let mut report = Report::new();
    for (index, task) in scenario.tasks.iter().enumerate() {
        run_task(scenario, index, task, out_dir, &mut report)?;
    }
    report.write(out_dir)?;
    let passed = report.all_passed();
    Ok(RunOutcome { report, passed })
}

fn mag_str(m: &Mag) -> String {
    m.display()
}

fn run_task(
    sc: &Scenario,
    index: usize,
    task: &Task,
    out_dir: &Path,
    report: &mut Report,
) -> Result<(), RunnerError> {
    let tol = sc.config.tolerance_f64;
    let tol_str = fmt_f64_12(tol);
    let guards = &sc.config.guards;
    let id = |suffix: &str| {
        if suffix.is_empty() {
            format!("t{index:02}")
        } else {
            format!("t{index:02}.{suffix}")
        }
    };
    match task {
        Task::Classify { measure } => {
            let flags = if let Some(mu) = sc.scalars.get(measure) {
                mu.classify()
            } else {
                sc.multis[measure].classify()
            };
            report.push(
                id(""),
                "setfn.classify",
                Status::Pass,
                format!(
                    "monotone={} subadditive={} additive={}",
                    flags.monotone, flags.subadditive, flags.additive
                ),
                "",
                "",
            );
        }
        Task::VariationCheck { measure } => {
            if let Some(mu) = sc.scalars.get(measure) {
                let mut fast_ok = true;
                let mut additive_ok = true;
                for e in sc.space.all_sets() {
                    match (
                        mu.variation(e, guards),
                        mu.variation_with(e, VariationStrategy::Brute, guards),
                    ) {
                        (Ok(fast), Ok(brute)) => {
                            fast_ok &= fast == brute;
                            if mu.classify().additive {
                                additive_ok &= &fast == mu.value(e);
                            }
                        }
                        _ => fast_ok = false,
                    }
                }
                report.push(
                    id("fastpath"),
                    "setfn.variation_fastpath",
                    Status::from_bool(fast_ok),
                    "variation computed along both routes",
                    "0",
                    "",
                );
                if mu.classify().additive {
                    report.push(
                        id("additive"),
                        "setfn.variation_of_additive",
                        Status::from_bool(additive_ok),
                        "variation equals the set function",
                        "0",
                        "",
                    );
                }
            } else {
                let m = &sc.multis[measure];
                let mut max_diff = Mag::zero();
                let mut ok = true;
                for e in sc.space.all_sets() {
                    match (
                        m.variation(e, guards),
                        m.variation_with(e, VariationStrategy::Brute, guards),
                    ) {
                        (Ok(fast), Ok(brute)) => {
                            let d = fast.abs_diff(&brute);
                            ok &= d.to_f64() <= tol;
                            max_diff = max_diff.max(&d);
                        }
                        _ => ok = false,
                    }
                }
                report.push(
                    id("fastpath"),
                    "setfn.variation_fastpath",
                    Status::from_bool(ok),
                    "variation computed along both routes",
                    &tol_str,
                    mag_str(&max_diff),
                );
            }
        }
        Task::Integrate {
            integrand,
            measure,
            set,
            expect_integrable,
        } => {
            let f = &sc.integrands[integrand];
            let e = sc.resolve_set(set).map_err(RunnerError::Scenario)?;
            let (integrable, spread, shown) = if let Some(mu) = sc.scalars.get(measure) {
                match gould::integrate(&sc.space, f, mu, e) {
                    Ok(r) => (
                        Some(r.integrable),
                        r.tag_spread.display(),
                        r.value.map(|v| fmt_rat(&v)).unwrap_or_default(),
                    ),
                    Err(err) => (None, String::new(), err.to_string()),
                }
            } else {
                match gould::integrate(&sc.space, f, &sc.multis[measure], e) {
                    Ok(r) => (
                        Some(r.integrable),
                        r.tag_spread.display(),
                        r.value.map(|v| v.to_string()).unwrap_or_default(),
                    ),
                    Err(err) => (None, String::new(), err.to_string()),
                }
            };
            let status = match (integrable, expect_integrable) {
                (Some(got), Some(want)) => Status::from_bool(got == *want),
                (Some(_), None) => Status::Pass,
                (None, _) => Status::Error,
            };
            report.push(
                id(""),
                "gould.integrate",
                status,
                format!("integrable={integrable:?} value={shown}"),
                "",
                spread,
            );
        }
        Task::IntegralFunction { measure } => {
            let ok = if let Some(mu) = sc.scalars.get(measure) {
                integral_additivity(sc, mu)
            } else {
                integral_additivity(sc, &sc.multis[measure])
            };
            report.push(
                id(""),
                "gould.integral_function_additive",
                Status::from_bool(ok),
                "additive over every disjoint pair",
                "0",
                "",
            );
        }
        Task::EquivalenceSuite { integrand, measure } => {
            let f = &sc.integrands[integrand];
            let outcome = if let Some(mu) = sc.scalars.get(measure) {
                gould::equivalence_suite(&sc.space, f, mu, tol)
            } else {
                gould::equivalence_suite_multi(&sc.space, f, &sc.multis[measure], tol)
            };
            match outcome {
                Ok(rep) => {
                    for row in &rep.rows {
                        let residual = row
                            .distance
                            .as_ref()
                            .map(|d| d.display())
                            .unwrap_or_default();
                        report.push(
                            id(&format!("set{}", row.set.mask())),
                            "gould.equivalence",
                            Status::from_bool(row.pass),
                            format!(
                                "set={} direct={} integral_fn={}",
                                row.set, row.integrable_direct, row.integrable_integral_fn
                            ),
                            &tol_str,
                            residual,
                        );
                    }
                }
                Err(err) => {
                    report.push(id(""), "gould.equivalence", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::IntegrateMultimeasure { measure } => {
            match gould::integrate_multimeasure(&sc.multis[measure], guards) {
                Ok(out) => {
                    let ok = out.all_sums_contained
                        && out.closure_exact
                        && out.closure_defect.to_f64() <= tol;
                    report.push(
                        id(""),
                        "gould.multimeasure_closure",
                        Status::from_bool(ok),
                        format!(
                            "value={} partitions={} bounded={} exact={}",
                            out.value, out.partitions_checked, out.all_sums_contained,
                            out.closure_exact
                        ),
                        &tol_str,
                        mag_str(&out.closure_defect),
                    );
                }
                Err(err) => {
                    report.push(
                        id(""),
                        "gould.multimeasure_closure",
                        Status::Error,
                        err.to_string(),
                        "",
                        "",
                    );
                }
            }
        }
        Task::VariationOfIntegral { measure } => {
            match gould::variation_of_integral(&sc.multis[measure], guards, tol) {
                Ok(rep) => {
                    for row in &rep.rows {
                        report.push(
                            id(&format!("set{}", row.set.mask())),
                            "gould.variation_of_integral",
                            Status::from_bool(row.equal && row.value_included),
                            format!(
                                "set={} v={} v0={} included={}",
                                row.set,
                                row.variation_m.display(),
                                row.variation_m0.display(),
                                row.value_included
                            ),
                            &tol_str,
                            mag_str(&row.variation_m.abs_diff(&row.variation_m0)),
                        );
                    }
                }
                Err(err) => {
                    report.push(
                        id(""),
                        "gould.variation_of_integral",
                        Status::Error,
                        err.to_string(),
                        "",
                        "",
                    );
                }
            }
        }
        Task::TotallyMeasurable {
            integrand,
            measure,
            epsilon,
            expect,
        } => {
            let f = &sc.integrands[integrand];
            let eps = match parse_rat(epsilon) {
                Ok(e) => e,
                Err(err) => {
                    report.push(id(""), "gould.totally_measurable", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            match gould::totally_measurable(&sc.space, f, &sc.scalars[measure], &eps, guards) {
                Ok(tm) => {
                    let status = match expect {
                        Some(want) => Status::from_bool(tm.holds == *want),
                        None => Status::Pass,
                    };
                    report.push(
                        id(""),
                        "gould.totally_measurable",
                        status,
                        format!("holds={} bad_set={}", tm.holds, tm.bad_set),
                        epsilon.clone(),
                        fmt_rat(&tm.bad_variation),
                    );
                }
                Err(err) => {
                    report.push(id(""), "gould.totally_measurable", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::SimpleApprox { integrand, measure } => {
            let f = &sc.integrands[integrand];
            match gould::simple_approx(
                &sc.space,
                f,
                &sc.scalars[measure],
                sc.config.approx_stages,
                guards,
            ) {
                Ok(approx) => {
                    for stage in &approx.stages {
                        report.push(
                            id(&format!("eps{}", stage.eps.denom())),
                            "gould.simple_approx_stage",
                            Status::from_bool(stage.outer_measure < stage.eps),
                            format!("exceptional_points={}", stage.exceptional_points.len()),
                            fmt_rat(&stage.eps),
                            fmt_rat(&stage.outer_measure),
                        );
                    }
                }
                Err(err) => {
                    report.push(id(""), "gould.simple_approx_stage", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::ObBound {
            integrand,
            measure,
            set,
        } => {
            let f = &sc.integrands[integrand];
            let e = sc.resolve_set(set).map_err(RunnerError::Scenario)?;
            let result = if let Some(mu) = sc.scalars.get(measure) {
                ob_rows(sc, f, mu, e)
            } else {
                ob_rows(sc, f, &sc.multis[measure], e)
            };
            match result {
                Ok((ob, atoms_sum, integrable)) => {
                    report.push(
                        id("bound"),
                        "gould.ob_bound",
                        Status::Pass,
                        format!("set={e}"),
                        "",
                        ob.display(),
                    );
                    if integrable {
                        report.push(
                            id("atoms"),
                            "gould.ob_zero_at_atoms",
                            Status::from_bool(atoms_sum.is_zero()),
                            "oscillation bounds vanish for integrable functions",
                            "0",
                            atoms_sum.display(),
                        );
                    }
                }
                Err(err) => {
                    report.push(id(""), "gould.ob_bound", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::ChainEstimator {
            integrand,
            measure,
            chain,
        } => {
            let f = &sc.integrands[integrand];
            let full = sc.space.full_set();
            let parts: Result<Vec<Partition>, String> = match chain {
                None => Ok(gould::dyadic_chain(full)),
                Some(levels) => levels
                    .iter()
                    .map(|blocks| {
                        let sets: Result<Vec<MSet>, _> = blocks
                            .iter()
                            .map(|b| MSet::from_atoms(b, sc.space.atom_count()))
                            .collect();
                        sets.and_then(|s| Partition::new(full, s))
                            .map_err(|e| e.to_string())
                    })
                    .collect(),
            };
            let parts = match parts {
                Ok(p) => p,
                Err(msg) => {
                    report.push(id(""), "gould.chain_envelopes", Status::Error, msg, "", "");
                    return Ok(());
                }
            };
            let (result, additive) = if let Some(mu) = sc.scalars.get(measure) {
                (
                    gould::chain_estimator_scalar(&sc.space, f, mu, &parts),
                    mu.classify().additive,
                )
            } else {
                let m = &sc.multis[measure];
                (
                    gould::chain_estimator_multi(&sc.space, f, m, &parts),
                    m.classify().additive,
                )
            };
            match result {
                Ok(rep) => {
                    let status = if additive {
                        Status::from_bool(rep.nested)
                    } else {
                        Status::Pass
                    };
                    let widths: Vec<String> =
                        rep.levels.iter().map(|l| l.width.display()).collect();
                    report.push(
                        id(""),
                        "gould.chain_envelopes",
                        status,
                        format!("nested={} widths=[{}]", rep.nested, widths.join(" ")),
                        &tol_str,
                        rep.final_width.display(),
                    );
                }
                Err(err) => {
                    report.push(id(""), "gould.chain_envelopes", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::SeriesIntegral {
            coeffs,
            sets,
            measure,
        } => {
            let parsed: Result<Vec<Rat>, _> = coeffs.iter().map(|c| parse_rat(c)).collect();
            let coeffs = match parsed {
                Ok(c) => c,
                Err(err) => {
                    report.push(id(""), "gould.series_integral", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            let msets: Result<Vec<MSet>, _> = sets
                .iter()
                .map(|s| MSet::from_atoms(s, sc.space.atom_count()))
                .collect();
            let msets = match msets {
                Ok(m) => m,
                Err(err) => {
                    report.push(id(""), "gould.series_integral", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            let outcome = if let Some(mu) = sc.scalars.get(measure) {
                gould::series_integral(&sc.space, &coeffs, &msets, mu)
                    .map(|r| (fmt_rat(&r.value), r.agrees))
            } else {
                gould::series_integral(&sc.space, &coeffs, &msets, &sc.multis[measure])
                    .map(|r| (r.value.to_string(), r.agrees))
            };
            match outcome {
                Ok((value, agrees)) => {
                    report.push(
                        id(""),
                        "gould.series_integral",
                        Status::from_bool(agrees),
                        value,
                        "0",
                        "",
                    );
                }
                Err(err) => {
                    report.push(id(""), "gould.series_integral", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::ApproximateRange {
            gamma,
            m,
            set,
            alpha,
        } => {
            let e = sc.resolve_set(set).map_err(RunnerError::Scenario)?;
            let alpha_rat = match parse_rat(alpha) {
                Ok(a) => a,
                Err(err) => {
                    report.push(id(""), "rn.approximate_range", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            match rn::approximate_range(&sc.multis[gamma], &sc.multis[m], e, &alpha_rat, guards)
            {
                Ok(range) => {
                    let shown = match &range.interval {
                        None => "empty".to_string(),
                        Some((lo, None)) => format!("[{}, unbounded)", lo.display()),
                        Some((lo, Some(hi))) => {
                            format!("[{}, {}]", lo.display(), hi.display())
                        }
                    };
                    report.push(
                        id(""),
                        "rn.approximate_range",
                        Status::Pass,
                        format!("set={e} alpha={alpha} range={shown}"),
                        "",
                        fmt_f64_12(range.norm_route_defect),
                    );
                }
                Err(err) => {
                    report.push(id(""), "rn.approximate_range", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::StrongAc { gamma, m } => {
            match crate::setfn::strong_ac_constant(&sc.multis[gamma], &sc.multis[m], guards) {
                Ok(b) => {
                    report.push(id(""), "rn.strong_ac", Status::Pass, b.display(), "", "");
                }
                Err(SetFnError::NotStronglyAc { witness }) => {
                    report.push(
                        id(""),
                        "rn.strong_ac",
                        Status::Fail,
                        format!("no constant: witness {witness}"),
                        "",
                        "",
                    );
                }
                Err(err) => {
                    report.push(id(""), "rn.strong_ac", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::Rn {
            gamma,
            m,
            tol: rn_tol,
            expect,
        } => {
            let tol_rat = match parse_rat(rn_tol) {
                Ok(t) => t,
                Err(err) => {
                    report.push(id(""), "rn.derive", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            let g = &sc.multis[gamma];
            let mm = &sc.multis[m];
            match rn::rn_derive(g, mm, &tol_rat, guards) {
                Ok(result) => {
                    let status = Status::from_bool(!matches!(
                        expect,
                        Some(RnExpectation::HypothesisFailed)
                    ));
                    report.push(
                        id("derive"),
                        "rn.derive",
                        status,
                        format!(
                            "stages={} bound={} max_scalar={}",
                            result.final_stage,
                            result.bound.display(),
                            fmt_rat(&result.max_chosen)
                        ),
                        rn_tol.clone(),
                        "",
                    );
                    // Proof-side bounds were enforced during the run; record
                    // them as explicit checks.
                    let cap = Rat::from_integer(1.into())
                        + Rat::from_integer(2.into()) * parse_rat(&result.bound.display()).unwrap_or_else(|_| Rat::from_integer(0.into()));
                    report.push(
                        id("bound"),
                        "rn.stage_scalar_bound",
                        Status::from_bool(result.max_chosen <= cap || result.bound.as_exact().is_none()),
                        format!("max_scalar={} cap={}", fmt_rat(&result.max_chosen), fmt_rat(&cap)),
                        "",
                        "",
                    );
                    let gaps: Vec<String> = result.stage_gaps.iter().map(fmt_rat).collect();
                    report.push(
                        id("cauchy"),
                        "rn.stage_cauchy",
                        Status::Pass,
                        format!("gaps=[{}]", gaps.join(" ")),
                        "",
                        "",
                    );
                    // End-to-end verification with the synthesized function.
                    let f = rn::derivative_on_space(&sc.space, &result);
                    match rn::verify_rn(&sc.space, g, mm, &f, crate::rat::rat_to_f64(&tol_rat)) {
                        Ok(verify) => {
                            report.push(
                                id("verify"),
                                "rn.round_trip",
                                Status::from_bool(verify.pass),
                                format!("sets={}", verify.rows.len()),
                                rn_tol.clone(),
                                mag_str(&verify.max_residual),
                            );
                        }
                        Err(err) => {
                            report.push(id("verify"), "rn.round_trip", Status::Error, err.to_string(), "", "");
                        }
                    }
                    write_rn_transcript(out_dir, index, gamma, m, &result)?;
                }
                Err(RnError::HypothesisFailed(h)) => {
                    let status = Status::from_bool(matches!(
                        expect,
                        Some(RnExpectation::HypothesisFailed)
                    ));
                    report.push(
                        id("derive"),
                        "rn.hypothesis",
                        status,
                        format!("hypothesis failed: {h}"),
                        rn_tol.clone(),
                        "",
                    );
                }
                Err(err) => {
                    report.push(id("derive"), "rn.derive", Status::Error, err.to_string(), "", "");
                }
            }
        }
        Task::VerifyRn {
            gamma,
            m,
            integrand,
            tol: v_tol,
        } => {
            let tol_rat = match parse_rat(v_tol) {
                Ok(t) => crate::rat::rat_to_f64(&t),
                Err(err) => {
                    report.push(id(""), "rn.verify", Status::Error, err.to_string(), "", "");
                    return Ok(());
                }
            };
            match rn::verify_rn(
                &sc.space,
                &sc.multis[gamma],
                &sc.multis[m],
                &sc.integrands[integrand],
                tol_rat,
            ) {
                Ok(verify) => {
                    for row in &verify.rows {
                        report.push(
                            id(&format!("set{}", row.set.mask())),
                            "rn.verify",
                            Status::from_bool(row.pass),
                            format!("set={} integrable={}", row.set, row.integrable),
                            v_tol.clone(),
                            mag_str(&row.residual),
                        );
                    }
                }
                Err(err) => {
                    report.push(id(""), "rn.verify", Status::Error, err.to_string(), "", "");
                }
            }
        }
    }
    Ok(())
}

fn integral_additivity<M: Measure>(sc: &Scenario, m: &M) -> bool {
    for e in sc.space.all_sets() {
        for f in sc.space.all_sets() {
            if e.is_disjoint(f) {
                let whole = gould::integral_function(m, e.union(f));
                let parts = m.add_values(
                    gould::integral_function(m, e),
                    &gould::integral_function(m, f),
                );
                if whole != parts {
                    return false;
                }
            }
        }
    }
    true
}

fn ob_rows<M: Measure>(
    sc: &Scenario,
    f: &Integrand,
    m: &M,
    e: MSet,
) -> Result<(Mag, Mag, bool), gould::GouldError> {
    let guards = &sc.config.guards;
    let ob = gould::ob_bound(&sc.space, f, m, e, guards)?;
    let atoms_sum = gould::ob_sum(&sc.space, f, m, &Partition::atoms(e), guards)?;
    let integrable = gould::integrate(&sc.space, f, m, e)
        .map(|r| r.integrable)
        .unwrap_or(false);
    Ok((ob, atoms_sum, integrable))
}

/// Full stage transcript of a derivative run, for audit.
fn write_rn_transcript(
    out_dir: &Path,
    task_index: usize,
    gamma: &str,
    m: &str,
    result: &RnResult,
) -> Result<(), RunnerError> {
    std::fs::create_dir_all(out_dir)?;
    let stages: Vec<serde_json::Value> = result
        .stages
        .iter()
        .map(|st| {
            json!({
                "stage": st.stage,
                "alpha": fmt_rat(&st.alpha),
                "blocks": st.blocks.iter().map(|b| json!({
                    "set": b.set.label(),
                    "range": [b.range_lo.display(), b.range_hi.display()],
                    "chosen": fmt_rat(&b.chosen),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "gamma": gamma,
        "M": m,
        "bound": result.bound.display(),
        "final_stage": result.final_stage,
        "max_scalar": fmt_rat(&result.max_chosen),
        "stage_gaps": result.stage_gaps.iter().map(fmt_rat).collect::<Vec<_>>(),
        "derivative_per_atom": result.derivative.values().iter().map(fmt_rat).collect::<Vec<_>>(),
        "stages": stages,
    });
    let path = out_dir.join(format!("rn_t{task_index:02}_{gamma}_{m}.json"));
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("valid json"))?;
    Ok(())
}
