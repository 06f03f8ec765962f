use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use warpgeom::algebra::{check_jacobi, check_symmetry, extended_constraints, make_diagonal, make_extended2d};
use warpgeom::centrality::{centrality_residual, solve_omega, DEFAULT_ORDER};
use warpgeom::cosmology::{friedmann_residuals, integrate, CosmologyError, CosmologyParams, CONSTRAINT_TOLERANCE};
use warpgeom::deformation::{adjoint_action_formal, deform_word, warp_line_element, DeformationMatrix, DeformedMetric};
use warpgeom::gravity::{
    bianchi_residual, einstein_tensor, oracle_disagreement, verify_field_equations, DiagonalMetric,
    FieldEquationSetup, ResidualReport, ScaleFactorFn, TermSum, DEFAULT_KAPPA,
};
use warpgeom::ncalc::{parse_expression, NCWord};
use warpgeom::qoperators::{
    build_dx, build_qp, build_x, ccr_residual, conjugation_block, richardson_sequence, verify_adjoint_action,
    verify_commutator, QuadratureConfig, RepresentationConfig, EDGE_BUFFER,
};
use warpgeom::scalar::{Rational, Scalar};
use warpgeom::spacetimes::{deformed_frw, frw_from_deformation, ultrastatic_from_deformation};

use crate::config::{AlgebraConfig, RunConfig};
use crate::error::CliError;
use crate::output::{num, nums, opt_num, report, write_trajectory_csv};
use crate::{
    Artifact, CentralityArgs, Command, CosmologyArgs, CurvatureArgs, DeformArgs, Family, Format, MetricArgs,
    OperatorArgs, Outcome,
};

/// Oracle and Bianchi bounds for the curvature subcommand.
const ORACLE_TOLERANCE: f64 = 1e-6;
const BIANCHI_TOLERANCE: f64 = 1e-5;
/// Operator residual bounds: `[Q,P]`, `[X,dX]`, adjoint action, hermiticity.
const OPERATOR_TOLERANCES: [f64; 4] = [1e-10, 1e-10, 1e-6, 1e-12];
const QUADRATURE_TOLERANCE: f64 = 0.05;

pub fn dispatch(cmd: &Command, cfg: &RunConfig, format: Option<Format>) -> Result<Outcome, CliError> {
    if format == Some(Format::Csv) && !matches!(cmd, Command::Cosmology(_)) {
        return Err(CliError::Usage("csv output is only available for cosmology".into()));
    }
    match cmd {
        Command::CheckJacobi => jacobi(cfg),
        Command::Deform(args) => deform(cfg, args),
        Command::Metric(args) => metric(cfg, args),
        Command::Curvature(args) => curvature(cfg, args),
        Command::Cosmology(args) => cosmology(cfg, args, format),
        Command::Centrality(args) => centrality(cfg, args),
        Command::VerifyOperators(args) => operators(cfg, args),
    }
}

fn json_outcome(command: &str, body: Map<String, Value>, passed: bool) -> Outcome {
    let mut body = body;
    body.insert("passed".into(), Value::Bool(passed));
    Outcome { body: Artifact::Json(report(command, body)), passed }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("built from json! object literals"),
    }
}

fn rational(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "value": num(r.to_f64()) })
}

fn jacobi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (kind, constants, constraints) = match cfg.algebra()? {
        AlgebraConfig::Diagonal(spec) => ("diagonal", make_diagonal(spec), None),
        AlgebraConfig::Extended2D(spec) => {
            let (r1, r2, r3) = extended_constraints(spec);
            ("extended2d", make_extended2d(spec), Some([r1, r2, r3]))
        }
    };
    let symmetric = check_symmetry(&constants);
    let rep = check_jacobi(&constants);
    let constraints_zero = constraints.as_ref().is_none_or(|c| c.iter().all(Zero::is_zero));
    let mut body = object(json!({
        "algebra": { "kind": kind, "dim": constants.dim() },
        "symmetric": symmetric,
        "consistent": rep.consistent,
        "max_residual": rational(&rep.max_residual),
        "worst_indices": rep.worst,
    }));
    if let Some(c) = &constraints {
        body.insert("constraints".into(), Value::Array(c.iter().map(rational).collect()));
    }
    Ok(json_outcome("check-jacobi", body, symmetric && rep.consistent && constraints_zero))
}

fn metric_json(g: &DeformedMetric) -> Value {
    json!({
        "signature": g.signature,
        "exponents": g.exponents.iter().map(|l| nums(&l.0)).collect::<Vec<_>>(),
        "line_element": g.exponents.iter().zip(&g.signature).map(|(l, s)| {
            let sign = if *s < 0 { "-" } else { "" };
            format!("{sign}exp({l})")
        }).collect::<Vec<_>>(),
    })
}

fn deform(cfg: &RunConfig, args: &DeformArgs) -> Result<Outcome, CliError> {
    let spec = cfg.diagonal()?;
    let theta = cfg.deformation()?;
    let g = warp_line_element(&spec, theta).map_err(|e| CliError::module("deformation", &e))?;
    let constants = make_diagonal(&spec);
    let actions = (0..spec.dim())
        .map(|mu| {
            adjoint_action_formal(mu, theta, &constants)
                .map(|sd| nums(&sd.prefactor.form.0))
                .map_err(|e| CliError::module("deformation", &e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut words = Vec::new();
    for src in &args.words {
        let expr = parse_expression(src).map_err(|e| CliError::module("ncalc", &e))?;
        let mut terms = Vec::new();
        for (word, coeff) in expr.terms() {
            let op = deform_word(word, theta, &constants).map_err(|e| CliError::module("deformation", &e))?;
            terms.push(json!({
                "coefficient": [num(coeff.re), num(coeff.im)],
                "word": word_string(word),
                "deformed": op.to_string(),
                "exponent": nums(&op.exponent.0),
            }));
        }
        words.push(json!({ "input": src, "terms": terms }));
    }
    let body = object(json!({
        "dim": spec.dim(),
        "metric": metric_json(&g),
        "adjoint_exponents": actions,
        "words": words,
    }));
    Ok(json_outcome("deform", body, true))
}

fn word_string(w: &NCWord) -> String {
    if w.0.is_empty() {
        return "1".into();
    }
    w.0.iter().map(ToString::to_string).collect::<Vec<_>>().join("*")
}

/// A metric of the requested family, its description, and the scale factor to
/// sample it with.
struct BuiltMetric {
    metric: DiagonalMetric,
    description: Map<String, Value>,
    deformed_frw: Option<warpgeom::spacetimes::DeformedFRWMetric>,
}

fn family_of(cfg: &RunConfig, args: &MetricArgs) -> Result<Family, CliError> {
    if let Some(f) = args.family {
        return Ok(f);
    }
    match cfg.metric.family.as_deref() {
        None | Some("conformal") => Ok(Family::Conformal),
        Some("ultrastatic") => Ok(Family::Ultrastatic),
        Some("frw") => Ok(Family::Frw),
        Some("deformed-frw") => Ok(Family::DeformedFrw),
        Some(other) => Err(CliError::Usage(format!("unknown metric family {other:?}"))),
    }
}

fn build_metric(cfg: &RunConfig, args: &MetricArgs) -> Result<BuiltMetric, CliError> {
    let grav = |e: warpgeom::gravity::GravityError| CliError::module("gravity", &e);
    let space = |e: warpgeom::spacetimes::SpacetimeError| CliError::module("spacetimes", &e);
    match family_of(cfg, args)? {
        Family::Conformal => {
            let g = warp_line_element(&cfg.diagonal()?, cfg.deformation()?).map_err(|e| CliError::module("deformation", &e))?;
            let description = object(json!({ "family": "conformal", "metric": metric_json(&g) }));
            Ok(BuiltMetric { metric: DiagonalMetric::from_deformed(&g).map_err(grav)?, description, deformed_frw: None })
        }
        Family::Ultrastatic => {
            let us = ultrastatic_from_deformation(&cfg.diagonal()?, cfg.deformation()?).map_err(space)?;
            let g = us.to_deformed_metric();
            let description = object(json!({ "family": "ultrastatic", "metric": metric_json(&g) }));
            Ok(BuiltMetric { metric: DiagonalMetric::from_deformed(&g).map_err(grav)?, description, deformed_frw: None })
        }
        Family::Frw => {
            let hubble = args.hubble.or(cfg.metric.hubble).ok_or(CliError::MissingKey("metric.hubble"))?;
            let n = args.spatial_dims.or(cfg.metric.spatial_dims).unwrap_or(3);
            let (frw, real) = frw_from_deformation(hubble, n).map_err(space)?;
            let g = frw.to_deformed_metric();
            let description = object(json!({
                "family": "frw",
                "hubble": num(hubble),
                "spatial_dims": n,
                "metric": metric_json(&g),
                "realization": {
                    "a": nums(real.spec.a()),
                    "theta": real.theta.rows().iter().map(|r| nums(r)).collect::<Vec<_>>(),
                },
            }));
            Ok(BuiltMetric { metric: DiagonalMetric::from_frw(&frw).map_err(grav)?, description, deformed_frw: None })
        }
        Family::DeformedFrw => {
            let g = deformed_frw("a", &cfg.diagonal()?, cfg.deformation()?).map_err(space)?;
            let description = object(json!({
                "family": "deformed-frw",
                "warp_rate": num(g.warp_rate),
                "b": nums(&g.b),
            }));
            let metric = DiagonalMetric::from_deformed_frw(&g).map_err(grav)?;
            Ok(BuiltMetric { metric, description, deformed_frw: Some(g) })
        }
    }
}

fn entries_json(g: &DiagonalMetric) -> Value {
    Value::Array((0..g.dim()).map(|mu| Value::from(g.entry(mu).to_string())).collect())
}

fn metric(cfg: &RunConfig, args: &MetricArgs) -> Result<Outcome, CliError> {
    let built = build_metric(cfg, args)?;
    let mut body = built.description;
    body.insert("entries".into(), entries_json(&built.metric));
    Ok(json_outcome("metric", body, true))
}

fn nonzero_components(d: usize, get: impl Fn(usize, usize) -> Option<(String, Value)>) -> Value {
    let mut out = Vec::new();
    for mu in 0..d {
        for nu in mu..d {
            if let Some((expr, idx)) = get(mu, nu) {
                out.push(json!({ "indices": idx, "expr": expr }));
            }
        }
    }
    Value::Array(out)
}

fn show(t: &TermSum) -> Option<String> {
    (!t.is_zero()).then(|| t.to_string())
}

fn residual_json(r: &ResidualReport) -> Value {
    json!({ "expr": r.expr.to_string(), "identically_zero": r.is_identically_zero(), "leading_order": r.leading_order })
}

fn curvature(cfg: &RunConfig, args: &CurvatureArgs) -> Result<Outcome, CliError> {
    let built = build_metric(cfg, &args.metric)?;
    let grav = |e: warpgeom::gravity::GravityError| CliError::module("gravity", &e);
    let rep = einstein_tensor(&built.metric).map_err(grav)?;
    let d = rep.dim();

    let scale = match &built.deformed_frw {
        Some(g) => {
            let src = args.scale_factor.clone().or_else(|| cfg.metric.scale_factor.clone()).unwrap_or("t^(2/3)".into());
            ScaleFactorFn::parse(&src).map_err(grav)?.warped(g.warp_rate)
        }
        None => ScaleFactorFn::constant(1.0),
    };
    let sec = &cfg.curvature;
    let points = args.points.or(sec.points).unwrap_or(100);
    let seed = args.seed.or(sec.seed).unwrap_or(0);
    let step = args.step.or(sec.step).unwrap_or(1e-3);
    let [t0, t1] = sec.t_range.unwrap_or(if scale.requires_positive_time() { [0.5, 2.0] } else { [-1.0, 1.0] });
    if !(t0 < t1) || (scale.requires_positive_time() && t0 <= 0.0) {
        return Err(CliError::Usage(format!("bad time range [{t0}, {t1}] for this scale factor")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut oracle, mut bianchi): (f64, f64) = (0.0, 0.0);
    for _ in 0..points {
        let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        x[0] = rng.random_range(t0..t1);
        oracle = oracle.max(oracle_disagreement(&rep, &scale, &x, step).map_err(grav)?);
        bianchi = bianchi.max(bianchi_residual(&rep, &scale, &x, step).map_err(grav)?);
    }

    let christoffel: Vec<Value> = (0..d * d * d)
        .filter_map(|k| {
            let (l, m, n) = (k / (d * d), (k / d) % d, k % d);
            (m <= n).then(|| show(rep.gamma(l, m, n)).map(|e| json!({ "indices": [l, m, n], "expr": e })))?
        })
        .collect();
    let mut body = built.description;
    body.insert("entries".into(), entries_json(&built.metric));
    body.insert("christoffel".into(), Value::Array(christoffel));
    body.insert("ricci".into(), nonzero_components(d, |m, n| show(rep.ricci(m, n)).map(|e| (e, json!([m, n])))));
    body.insert("scalar".into(), Value::from(rep.scalar.to_string()));
    body.insert("einstein".into(), nonzero_components(d, |m, n| show(rep.einstein(m, n)).map(|e| (e, json!([m, n])))));
    body.insert(
        "sampling".into(),
        json!({
            "points": points,
            "seed": seed,
            "step": num(step),
            "t_range": [num(t0), num(t1)],
            "oracle_max_relative": num(oracle),
            "bianchi_max": num(bianchi),
            "oracle_tolerance": num(ORACLE_TOLERANCE),
            "bianchi_tolerance": num(BIANCHI_TOLERANCE),
        }),
    );
    if let Some(g) = &built.deformed_frw {
        let setup = FieldEquationSetup {
            lambda: args.lambda.or(sec.lambda).unwrap_or(0.0),
            kappa: args.kappa.or(sec.kappa).unwrap_or(DEFAULT_KAPPA),
        };
        let res = verify_field_equations(g, &setup).map_err(grav)?;
        body.insert(
            "field_equations".into(),
            json!({
                "lambda": num(setup.lambda),
                "kappa": num(setup.kappa),
                "energy": residual_json(&res.energy),
                "momentum": res.momentum.iter().map(residual_json).collect::<Vec<_>>(),
                "pressure": residual_json(&res.pressure),
                "required_flux": res.required_flux.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            }),
        );
    }
    let passed = oracle <= ORACLE_TOLERANCE && bianchi <= BIANCHI_TOLERANCE;
    Ok(json_outcome("curvature", body, passed))
}

fn cosmology(cfg: &RunConfig, args: &CosmologyArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let sec = &cfg.cosmology;
    let theta = args.theta.or(sec.theta).unwrap_or(0.0);
    let c = args.c.or(sec.c).unwrap_or(1.0);
    let a0 = args.a0.or(sec.a0).unwrap_or(0.0);
    let t_end = args.t_end.or(sec.t_end).unwrap_or(10.0);
    let mut p = CosmologyParams::new(theta, c, a0, t_end);
    if let Some(v) = args.t_start.or(sec.t_start) {
        p.t_start = v;
    }
    if let Some(v) = args.samples.or(sec.samples) {
        p.samples = v;
    }
    if let Some(v) = args.rtol.or(sec.rtol) {
        p.rtol = v;
    }
    if let Some(v) = args.atol.or(sec.atol) {
        p.atol = v;
    }
    let traj = match integrate(&p) {
        Ok(t) => t,
        Err(CosmologyError::ConstraintViolation { t, drift }) => {
            let body = object(json!({ "constraint_violation": { "t": num(t), "drift": num(drift) } }));
            return Ok(json_outcome("cosmology", body, false));
        }
        Err(e) => return Err(CliError::module("cosmology", &e)),
    };
    let r = friedmann_residuals(&traj, theta, c);
    let passed = traj.max_constraint_drift <= CONSTRAINT_TOLERANCE && traj.negative_density.is_empty();
    if format.unwrap_or(Format::Csv) == Format::Csv {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj.t, &traj.a, &traj.adot, &traj.rho).map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(Outcome { body: Artifact::Text(String::from_utf8(buf).expect("ascii csv")), passed });
    }
    let body = object(json!({
        "params": {
            "theta": num(theta), "c": num(c), "c_prime": num(p.c_prime()), "a0": num(a0),
            "t_start": num(p.t_start), "t_end": num(t_end), "rtol": num(p.rtol), "atol": num(p.atol),
        },
        "accepted_steps": traj.accepted_steps,
        "max_constraint_drift": num(traj.max_constraint_drift),
        "residuals": {
            "energy": num(r.energy), "acceleration": num(r.acceleration),
            "continuity": num(r.continuity), "constraint": num(r.constraint),
        },
        "negative_density": traj.negative_density,
        "trajectory": { "t": nums(&traj.t), "a": nums(&traj.a), "adot": nums(&traj.adot), "rho": nums(&traj.rho) },
    }));
    Ok(json_outcome("cosmology", body, passed))
}

fn centrality(cfg: &RunConfig, args: &CentralityArgs) -> Result<Outcome, CliError> {
    let sec = &cfg.centrality;
    let cen = |e: warpgeom::centrality::CentralityError| CliError::module("centrality", &e);
    let (spec, theta) = match (args.n.or(sec.n), args.theta.or(sec.theta)) {
        (Some(n), Some(t)) => {
            let spec = match &cfg.algebra {
                Some(_) => cfg.diagonal()?,
                None => warpgeom::algebra::DiagonalAlgebraSpec::ones(n + 1),
            };
            (spec, DeformationMatrix::time_space(&vec![t; n]).map_err(|e| CliError::module("deformation", &e))?)
        }
        (None, None) => (cfg.diagonal()?, cfg.deformation()?.clone()),
        _ => return Err(CliError::Usage("give both --n and --theta, or neither".into())),
    };
    if spec.dim() != theta.dim() {
        return Err(CliError::Usage(format!("algebra has dimension {}, deformation {}", spec.dim(), theta.dim())));
    }
    let n = theta.dim() - 1;
    let order = args.order.or(sec.order).unwrap_or(DEFAULT_ORDER);
    let sol = solve_omega(&spec, &theta).map_err(cen)?;
    let mut body = object(json!({
        "n": n,
        "theta_0j": nums(&theta.row(0)[1..]),
        "omega": opt_num(sol.omega),
        "omega_exact": sol.omega_exact.as_ref().map(ToString::to_string),
        "consistent": sol.consistent,
        "system": sol.system.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "violated": sol.violated().iter().map(ToString::to_string).collect::<Vec<_>>(),
    }));
    let mut exact_zero = false;
    if let Some(moyal) = sol.moyal(n) {
        let rep = centrality_residual(&spec, &theta, &moyal, order).map_err(cen)?;
        exact_zero = rep.exact_zero;
        let failing: Vec<Value> = rep
            .failing()
            .map(|c| {
                json!({
                    "indices": [c.mu, c.nu, c.rho],
                    "max": num(c.max),
                    "order0": num(c.by_order.first().copied().unwrap_or(0.0)),
                    "required_scale": opt_num(c.required_scale),
                })
            })
            .collect();
        body.insert(
            "residual".into(),
            json!({ "order": rep.order, "exact_zero": rep.exact_zero, "max": num(rep.max_residual), "failing": failing }),
        );
    }
    let passed = sol.omega.is_some() && (!args.strict || (sol.consistent && exact_zero));
    Ok(json_outcome("centrality", body, passed))
}

fn operators(cfg: &RunConfig, args: &OperatorArgs) -> Result<Outcome, CliError> {
    let sec = &cfg.operators;
    let qop = |e: warpgeom::qoperators::QopError| CliError::module("qoperators", &e);
    let dim = args.dim.or(sec.dim).unwrap_or(64);
    let scale = args.scale.or(sec.scale).unwrap_or(1.0);
    let weight = args.weight.or(sec.weight).unwrap_or(1.0);
    let p = args.p.or(sec.p).unwrap_or(0.3);
    let measure = |n: usize| -> Result<[f64; 4], CliError> {
        let repr = RepresentationConfig::new(n, scale, weight).map_err(qop)?;
        let x = build_x(&repr).map_err(qop)?;
        let dx = build_dx(&repr, &x).map_err(qop)?;
        let (q, pm) = build_qp(n);
        let block = n - EDGE_BUFFER;
        let herm = [&q, &pm, &x, &dx].iter().map(|o| o.hermiticity_defect()).fold(0.0, f64::max);
        Ok([
            ccr_residual(n, block),
            verify_commutator(&x, &dx, scale, block).map_err(qop)?,
            verify_adjoint_action(&x, &dx, scale, p).map_err(qop)?,
            herm,
        ])
    };
    let r = measure(dim)?;
    let mut passed = r.iter().zip(OPERATOR_TOLERANCES).all(|(v, tol)| *v <= tol);
    let mut body = object(json!({
        "dim": dim, "scale": num(scale), "weight": num(weight), "p": num(p),
        "interior_block": dim.saturating_sub(EDGE_BUFFER),
        "conjugation_block": conjugation_block(dim),
        "residuals": { "ccr": num(r[0]), "commutator": num(r[1]), "adjoint": num(r[2]), "hermiticity": num(r[3]) },
        "tolerances": { "ccr": num(OPERATOR_TOLERANCES[0]), "commutator": num(OPERATOR_TOLERANCES[1]),
                        "adjoint": num(OPERATOR_TOLERANCES[2]), "hermiticity": num(OPERATOR_TOLERANCES[3]) },
    }));
    if args.trend {
        let dims = [dim * 3 / 4, dim, dim * 3 / 2];
        let adjoint = dims.iter().map(|&n| measure(n).map(|m| m[2])).collect::<Result<Vec<_>, _>>()?;
        let decreasing = adjoint.windows(2).all(|w| w[1] < w[0]);
        passed &= decreasing;
        body.insert("trend".into(), json!({ "dims": dims, "adjoint": nums(&adjoint), "decreasing": decreasing }));
    }
    if args.quadrature || sec.quadrature == Some(true) {
        let qdim = dim.min(24);
        let repr = RepresentationConfig::new(qdim, scale, weight).map_err(qop)?;
        let mut qc = QuadratureConfig::new(repr, sec.theta.unwrap_or(0.05));
        if let Some(nodes) = sec.nodes {
            qc.nodes = nodes;
        }
        let q = richardson_sequence(&qc).map_err(qop)?;
        let fin = q.extrapolated_distance.unwrap_or(f64::INFINITY);
        passed &= q.monotone && fin <= QUADRATURE_TOLERANCE;
        body.insert(
            "quadrature".into(),
            json!({
                "dim": qdim,
                "theta": num(qc.theta),
                "cutoffs": nums(&qc.cutoffs),
                "distances": q.steps.iter().map(|s| num(s.distance)).collect::<Vec<_>>(),
                "extrapolated": num(fin),
                "monotone": q.monotone,
            }),
        );
    }
    Ok(json_outcome("verify-operators", body, passed))
}
