use std::fs;
use std::time::Instant;

use hdbp_core::bootstrap::{min_percolating_set, min_percolating_size, percolates};
use hdbp_core::exact::{
    expected_droplets, global_ratio_checks, hypercube_order_threshold, inductive_g_schedule, lambda_root,
    leading_coefficient_bounds, pc_predict, published_check, q_exact, spanning_counts, star_tables, tables_to_csv,
    tables_to_json, tech_lemma_eval, thm_bounds, CountTable, ExportHeader, LambdaContext, PcVariant,
    DEFAULT_PRECISION_BITS,
};
use hdbp_core::montecarlo::{
    append_results_log, droplet_stats, estimate_spanning, pc_bisect, McConfig, McEstimate, PcOptions, Target, Z99,
};
use hdbp_core::oracle::{enumerate_counts, r_event_polynomial, span_polynomial, EnumerationOptions, MAX_POLY_DIM};
use hdbp_core::GridShape;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{
    Command, HChoice, LambdaArgs, MinsetArgs, OracleArgs, PcArgs, PredictArgs, RunSpec, Schedule, SimTarget,
    SimulateArgs, TablesArgs, TechlemmaArgs, Which,
};
use crate::Failure;

/// `--compare-exact` passes when `|z| <= SIGMA_LIMIT`.
pub const SIGMA_LIMIT: f64 = 3.0;

/// Largest `l` of the ratio checks run with `--check-published`.
pub const GLOBAL_CHECK_ELL: usize = 25;

pub struct Outcome {
    pub json: Value,
    pub csv: String,
    /// Set when a requested check failed; the report is still written.
    pub mismatch: Option<String>,
}

impl Outcome {
    fn ok(json: Value, csv: String) -> Self {
        Self {
            json,
            csv,
            mismatch: None,
        }
    }
}

pub fn context(bits: u32) -> Result<LambdaContext, Failure> {
    if bits == DEFAULT_PRECISION_BITS {
        Ok(LambdaContext::standard().clone())
    } else {
        Ok(LambdaContext::with_precision_bits(bits)?)
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Numeric(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Numeric(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn execute(spec: &RunSpec, ctx: &LambdaContext) -> Result<Outcome, Failure> {
    match &spec.command {
        Command::Lambda(a) => lambda(a, spec),
        Command::Tables(a) => tables(a, ctx),
        Command::Oracle(a) => oracle(a),
        Command::Simulate(a) => simulate(a, spec.seed),
        Command::Pc(a) => pc(a, spec.seed),
        Command::Minset(a) => minset(a),
        Command::Predict(a) => predict(a, ctx),
        Command::Techlemma(a) => techlemma(a, ctx),
    }
}

fn lambda(args: &LambdaArgs, spec: &RunSpec) -> Result<Outcome, Failure> {
    let ctx = match args.tolerance {
        Some(t) => lambda_root(t)?,
        None => context(spec.precision_bits)?,
    };
    let value = ctx.decimal(args.digits);
    let json = json!({
        "lambda": value,
        "tolerance": ctx.tolerance(),
        "truncation_order": ctx.truncation_order(),
        "residual": ctx.residual(),
    });
    let csv = csv_table(
        &["lambda", "tolerance", "truncation_order", "residual"],
        &[vec![
            value,
            ctx.tolerance().to_string(),
            ctx.truncation_order().to_string(),
            ctx.residual().to_string(),
        ]],
    )?;
    Ok(Outcome::ok(json, csv))
}

fn tables(args: &TablesArgs, ctx: &LambdaContext) -> Result<Outcome, Failure> {
    let header = ExportHeader::new(ctx);
    let s = spanning_counts(args.ell_max);
    let stars = match args.which {
        Which::S => None,
        Which::Stars | Which::All => Some(star_tables(args.ell_max)?),
    };
    let mut list: Vec<&CountTable> = Vec::new();
    if args.which != Which::Stars {
        list.push(&s);
    }
    if let Some(t) = &stars {
        list.extend([&t.pstar, &t.rstar, &t.ystar]);
    }
    let mut out = Outcome::ok(tables_to_json(&header, &list), tables_to_csv(&header, &list)?);
    if args.check_published {
        out.mismatch = check_published(args.ell_max)?;
    }
    Ok(out)
}

/// Prints one line per mismatching cell and a summary to stderr.
fn check_published(ell_max: usize) -> Result<Option<String>, Failure> {
    let t = star_tables(ell_max.max(GLOBAL_CHECK_ELL))?;
    let cells = published_check(&t)?;
    let bad: Vec<_> = cells.iter().filter(|c| !c.matches).collect();
    for c in &bad {
        let e = &c.entry;
        eprintln!(
            "MISMATCH {} table, {} {} at dim {}: printed {}, computed {}",
            e.table, e.tag, e.quantity, e.dim, e.printed, c.computed
        );
    }
    let global = global_ratio_checks(&t, GLOBAL_CHECK_ELL)?;
    let global_bad: Vec<usize> = global
        .iter()
        .filter(|g| !(g.even_ok && g.odd_ok))
        .map(|g| g.ell)
        .collect();
    eprintln!(
        "published cells: {}/{} match; ratio checks for l <= {GLOBAL_CHECK_ELL}: {}",
        cells.len() - bad.len(),
        cells.len(),
        if global_bad.is_empty() {
            "all hold".to_string()
        } else {
            format!("fail at l = {global_bad:?}")
        }
    );
    if bad.is_empty() && global_bad.is_empty() {
        Ok(None)
    } else {
        Ok(Some(format!(
            "{} published cells and {} ratio checks disagree",
            bad.len(),
            global_bad.len()
        )))
    }
}

fn oracle(args: &OracleArgs) -> Result<Outcome, Failure> {
    let size = args.size.unwrap_or(args.dim.div_ceil(2) + 1);
    let opts = EnumerationOptions {
        shards: args.shards,
        guard: args.guard,
        allow_dim7: args.allow_dim7,
        checkpoint: args.checkpoint.clone(),
        structure_checks: args.structure_checks,
        ..Default::default()
    };
    let start = Instant::now();
    let report = enumerate_counts(args.dim, size, &opts)?;
    eprintln!(
        "enumerated {} subsets in {:.2}s",
        report.enumerated_total,
        start.elapsed().as_secs_f64()
    );
    let mut json = report.to_json();
    // Keep the report byte-identical across runs.
    json.as_object_mut().expect("object").remove("runtime_secs");
    if args.polynomials {
        if args.dim > MAX_POLY_DIM {
            return Err(Failure::Usage(format!("--polynomials needs dim <= {MAX_POLY_DIM}")));
        }
        json["span_polynomial"] = serde_json::to_value(span_polynomial(args.dim)?).expect("serializable");
        json["r_event_polynomial"] = serde_json::to_value(r_event_polynomial(args.dim)?).expect("serializable");
    }
    let rows: Vec<Vec<String>> = report
        .counts
        .named()
        .into_iter()
        .map(|(k, v)| vec![k.to_string(), v.to_string()])
        .collect();
    Ok(Outcome::ok(json, csv_table(&["count", "value"], &rows)?))
}

/// The exact value of the simulated quantity, where one is known.
fn exact_target(args: &SimulateArgs, shape: &GridShape) -> Result<Option<f64>, Failure> {
    let poly_prob = |dim: usize| -> Result<f64, Failure> {
        let p = BigRational::from_float(args.p).expect("finite p");
        Ok(span_polynomial(dim)?.eval_exact(&p).to_f64().unwrap_or(f64::NAN))
    };
    Ok(match args.target {
        SimTarget::SequentialCube => Some(q_exact(args.l, args.p)?),
        SimTarget::Droplets => match shape.uniform_side() {
            Some(n) => Some(expected_droplets(n, shape.dim(), args.l, args.p)?),
            None => None,
        },
        SimTarget::Cube => match args.cube_dim {
            Some(k) if k <= MAX_POLY_DIM && args.r == 2 => Some(poly_prob(k)?),
            _ => None,
        },
        SimTarget::FullGrid => {
            if shape.uniform_side() == Some(2) && shape.dim() <= MAX_POLY_DIM && args.r == 2 {
                Some(poly_prob(shape.dim())?)
            } else if args.r == 1 {
                Some(1.0 - (1.0 - args.p).powf(shape.cell_count() as f64))
            } else {
                None
            }
        }
    })
}

fn target_name(t: SimTarget) -> String {
    serde_json::to_value(t)
        .expect("serializable")
        .as_str()
        .unwrap_or_default()
        .to_string()
}

fn simulate(args: &SimulateArgs, seed: u64) -> Result<Outcome, Failure> {
    let default_d = match args.target {
        SimTarget::FullGrid => None,
        SimTarget::Cube => args.cube_dim,
        SimTarget::SequentialCube | SimTarget::Droplets => Some(2 * args.l),
    };
    let shape = args.shape.resolve(default_d)?;
    let mut cfg = McConfig::new(shape.clone(), args.p, args.samples, seed);
    cfg.r = args.r;
    cfg.replicas = args.replicas;
    let corner = |dim: usize| Target::corner_cube(&shape, dim).map_err(|e| Failure::Usage(e.to_string()));
    let mut json = json!({ "config": cfg, "target": args.target });
    let estimate: McEstimate = match args.target {
        SimTarget::FullGrid => estimate_spanning(&cfg, &Target::FullGrid)?,
        SimTarget::Cube => {
            let k = args
                .cube_dim
                .ok_or_else(|| Failure::Usage("--target cube needs --cube-dim".into()))?;
            json["cube_dim"] = json!(k);
            estimate_spanning(&cfg, &Target::Cube(corner(k)?))?
        }
        SimTarget::SequentialCube => {
            json["l"] = json!(args.l);
            estimate_spanning(&cfg, &Target::SequentialCube(corner(2 * args.l)?))?
        }
        SimTarget::Droplets => {
            let st = droplet_stats(&cfg, args.l)?;
            json["l"] = json!(args.l);
            json["subcubes"] = json!(st.subcubes);
            json["variance"] = json!(st.variance);
            st.mean
        }
    };
    json["estimate"] = serde_json::to_value(&estimate).expect("serializable");
    if let Some(ci) = estimate.wilson(Z99) {
        json["ci99"] = json!([ci.0, ci.1]);
    }
    let mut row = vec![
        estimate.mean.to_string(),
        estimate.std_error.to_string(),
        estimate.n.to_string(),
        estimate.successes.map(|s| s.to_string()).unwrap_or_default(),
        estimate.base_seed.to_string(),
        estimate.replicas.to_string(),
    ];
    let mut header = vec!["mean", "std_error", "n", "successes", "base_seed", "replicas"];
    let mut mismatch = None;
    if args.compare_exact {
        let exact = exact_target(args, &shape)?.ok_or_else(|| {
            Failure::Usage(format!(
                "no exact value for target {} on {shape} with r = {}",
                target_name(args.target),
                args.r
            ))
        })?;
        let z = estimate.z_score(exact);
        let pass = z.abs() <= SIGMA_LIMIT;
        let verdict = if pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{verdict}: estimate {:.6e} (se {:.2e}) vs exact {exact:.6e}, z = {z:+.3}",
            estimate.mean, estimate.std_error
        );
        json["comparison"] = json!({ "exact": exact, "z": z, "sigma_limit": SIGMA_LIMIT, "verdict": verdict });
        header.extend(["exact", "z", "verdict"]);
        row.extend([exact.to_string(), z.to_string(), verdict.to_string()]);
        if !pass {
            mismatch = Some(format!("estimate is {z:+.3} standard errors from the exact value"));
        }
    }
    if let Some(path) = &args.results_log {
        append_results_log(
            path,
            "simulate",
            &target_name(args.target),
            &shape.to_string(),
            args.p,
            &[&estimate],
        )?;
    }
    Ok(Outcome {
        csv: csv_table(&header, &[row])?,
        json,
        mismatch,
    })
}

fn pc(args: &PcArgs, seed: u64) -> Result<Outcome, Failure> {
    let shape = args.shape.resolve(None)?;
    let opts = PcOptions {
        target: args.target,
        samples_per_probe: args.samples_per_probe,
        tol: args.tol,
        max_probes: args.max_probes,
        replicas: args.replicas,
        ..Default::default()
    };
    let est = pc_bisect(&shape, args.r, seed, &opts)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<Vec<String>> = est
        .probes
        .iter()
        .map(|pr| {
            vec![
                pr.p.to_string(),
                pr.estimate.mean.to_string(),
                pr.estimate.std_error.to_string(),
                pr.ci.0.to_string(),
                pr.ci.1.to_string(),
                pr.estimate.n.to_string(),
            ]
        })
        .collect();
    let mut json = serde_json::to_value(&est).expect("serializable");
    json["shape"] = json!(shape.to_string());
    Ok(Outcome::ok(
        json,
        csv_table(&["p", "mean", "std_error", "ci_lo", "ci_hi", "n"], &rows)?,
    ))
}

fn minset(args: &MinsetArgs) -> Result<Outcome, Failure> {
    let shape = args.shape.resolve(None)?;
    let set = min_percolating_set(&shape, args.r)?;
    let cells: Vec<String> = set.cells().iter().map(|c| c.to_string()).collect();
    let json = json!({
        "shape": shape.to_string(),
        "size": set.len(),
        "formula_size": min_percolating_size(&shape),
        "cells": cells,
        "percolates": percolates(&set, args.r),
    });
    let rows: Vec<Vec<String>> = cells.iter().map(|c| vec![c.clone()]).collect();
    Ok(Outcome::ok(json, csv_table(&["cell"], &rows)?))
}

fn predict(args: &PredictArgs, ctx: &LambdaContext) -> Result<Outcome, Failure> {
    let variants: Vec<PcVariant> = match args.variant {
        Some(v) => vec![v.into()],
        None => PcVariant::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    let mut preds = Vec::new();
    for v in variants {
        let value = pc_predict(ctx, args.n, args.d, v)?;
        preds.push(json!({ "variant": v, "p_c": value }));
        let name = serde_json::to_value(v).expect("serializable");
        rows.push(vec![name.as_str().unwrap_or("").to_string(), value.to_string()]);
    }
    let mut json = json!({ "n": args.n, "d": args.d, "predictions": preds });
    if let Some(d_max) = args.order_threshold {
        json["order_threshold"] = json!({ "d_max": d_max, "d0": hypercube_order_threshold(ctx, d_max) });
    }
    if let (Some(ell), Some(p)) = (args.ell, args.p) {
        let b = thm_bounds(ctx, ell, p, args.delta)?;
        let (el, eu) = b.even();
        let (ol, ou) = b.odd();
        json["bounds"] = json!({
            "ell": ell,
            "p": p,
            "delta": args.delta,
            "even": [el, eu],
            "odd": [ol, ou],
            "even_leading_coefficient": leading_coefficient_bounds(ctx, 2 * ell),
            "odd_leading_coefficient": leading_coefficient_bounds(ctx, 2 * ell + 1),
        });
    }
    Ok(Outcome::ok(json, csv_table(&["variant", "p_c"], &rows)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TechInput {
    g: Vec<f64>,
    h: Vec<f64>,
}

fn techlemma(args: &TechlemmaArgs, ctx: &LambdaContext) -> Result<Outcome, Failure> {
    let (g, h) = match &args.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let input: TechInput =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            (input.g, input.h)
        }
        None => {
            let g = match args.schedule {
                Schedule::Inductive => inductive_g_schedule(args.c, args.ell),
                Schedule::InverseSquare => (0..args.ell)
                    .map(|m| if m == 0 { 0.0 } else { args.c / (m * m) as f64 })
                    .collect(),
            };
            let h = g
                .iter()
                .map(|x| match args.h {
                    HChoice::Upper => 1.0 + x,
                    HChoice::Lower => 1.0,
                    HChoice::Mid => 1.0 + x / 2.0,
                })
                .collect();
            (g, h)
        }
    };
    let run = tech_lemma_eval(ctx, args.ell, &g, &h)?;
    let v = &run.verdict;
    let holds = v.holds();
    eprintln!(
        "f(l) = {:.12} in [{:.12}, {:.12}]: {}; step-bound violations: {}",
        v.f_ell,
        v.lower_bound,
        v.upper_bound,
        v.within_bounds,
        v.step_bound_violations.len()
    );
    let rows: Vec<Vec<String>> = (0..=run.ell)
        .map(|t| {
            let at = |xs: &[f64]| xs.get(t).map(|x| x.to_string()).unwrap_or_default();
            vec![t.to_string(), at(&run.g), at(&run.h), run.f[t].to_string()]
        })
        .collect();
    let json = json!({
        "holds": holds,
        "rewritten_recursion_gap": run.rewritten_recursion_gap(ctx),
        "run": run,
    });
    Ok(Outcome {
        csv: csv_table(&["t", "g", "h", "f"], &rows)?,
        json,
        mismatch: (!holds).then(|| "technical-lemma bounds do not hold".to_string()),
    })
}
