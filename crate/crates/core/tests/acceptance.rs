//! Acceptance suite: runs the eight criteria and prints one line each.

use std::process::ExitCode;
use std::time::Instant;

use dqs::builtin::{self, Fixture};
use dqs::coalgebra::{QuantumSemigroup, Side};
use dqs::laws;
use dqs::mean::{
    apply_left, functional_slice_residual, invariance_residual, known_mean, mean_slice_residual,
    solve_mean,
};
use dqs::random::{random_element, random_functional, random_state};
use dqs::stabilize::{additive_defect, grouplike_exp, hyers_ulam_correct, perturbation_experiment};
use dqs::{IndexSystem, MMElement, SolveOutcome, SolverOptions, State, C64, DEFAULT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Closed form where one exists, solver output otherwise.
fn mean_for(fx: &Fixture) -> Result<State, String> {
    if let Some(m) = known_mean(&fx.qs) {
        return Ok(m);
    }
    match solve_mean(&fx.qs, fx.mean_side, SolverOptions::default()).map_err(err)? {
        SolveOutcome::Found(m, _) => Ok(m),
        SolveOutcome::Infeasible(r) => Err(format!(
            "{}: no {} mean ({:e})",
            fx.name, fx.mean_side, r.residual
        )),
    }
}

fn law_suite(fixtures: &[Fixture]) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (k, fx) in fixtures.iter().enumerate() {
        let r = laws::sweep(&fx.qs, 200, 1000 + k as u64, DEFAULT_TOL).map_err(err)?;
        ensure(r.passed, || format!("{}: {r:?}", fx.name))?;
        worst = worst.max(r.p0).max(r.p1).max(r.p3).max(r.p4);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "200 draws x {} fixtures, max residual {worst:.2e}, {secs:.1}s",
        fixtures.len()
    ))
}

fn axiom_validation(fixtures: &[Fixture]) -> Outcome {
    for fx in fixtures {
        let r = fx.qs.validate(DEFAULT_TOL).map_err(err)?;
        ensure(r.passed, || {
            format!("{} fails: {:?}", fx.name, r.failures())
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut detected = 0;
    for _ in 0..100 {
        let fx = &fixtures[rng.random_range(0..fixtures.len())];
        let index = fx.qs.index();
        let n = index.len();
        let (a, b, g) = (
            rng.random_range(0..n),
            rng.random_range(0..n),
            rng.random_range(0..n),
        );
        let rows = (index.dim(b) * index.dim(g)).pow(2);
        let cols = index.dim(a).pow(2);
        let by = C64::from_polar(1e-3, rng.random_range(0.0..std::f64::consts::TAU));
        let delta = fx
            .qs
            .delta()
            .perturbed(
                a,
                b,
                g,
                rng.random_range(0..rows),
                rng.random_range(0..cols),
                by,
            )
            .map_err(err)?;
        let r = QuantumSemigroup::new(delta, fx.qs.provenance())
            .validate(DEFAULT_TOL)
            .map_err(err)?;
        let signal = r
            .hom_residual
            .max(r.coassociativity_residual)
            .max(r.coassociativity_blockwise_residual);
        if signal > 1e-4 {
            detected += 1;
        }
    }
    ensure(detected >= 99, || {
        format!("only {detected}/100 mutations detected")
    })?;
    Ok(format!(
        "{} fixtures validate, {detected}/100 mutations detected",
        fixtures.len()
    ))
}

fn slicing(fixtures: &[Fixture]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut l6, mut l7): (f64, f64) = (0.0, 0.0);
    for fx in fixtures {
        let m = mean_for(fx)?;
        let index = fx.qs.index();
        let pair = IndexSystem::product(&[index, index]);
        for k in 0..100 {
            let f = random_element(&pair, &mut rng);
            l6 = l6.max(mean_slice_residual(&fx.qs, &m, fx.mean_side, &f).map_err(err)?);
            let n = if k % 2 == 0 {
                random_functional(index, &mut rng)
            } else {
                random_state(index, &mut rng).as_functional()
            };
            l7 = l7.max(functional_slice_residual(&fx.qs, &n, &f).map_err(err)?);
        }
    }
    ensure(l6 < 1e-8 && l7 < 1e-8, || {
        format!("mean slice {l6:e}, functional slice {l7:e}")
    })?;
    Ok(format!(
        "mean slice max {l6:.2e}, functional slice max {l7:.2e}"
    ))
}

fn stabilization(fixtures: &[Fixture]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut resid, mut slack, mut idem, mut lin): (f64, f64, f64, f64) =
        (0.0, f64::INFINITY, 0.0, 0.0);
    for fx in fixtures {
        let m = mean_for(fx)?;
        let side = fx.mean_side;
        let index = fx.qs.index();
        for _ in 0..100 {
            let f = random_element(index, &mut rng);
            let r = hyers_ulam_correct(&fx.qs, &m, &f, side).map_err(err)?;
            resid = resid.max(r.additivity_residual);
            slack = slack.min(r.defect_norm + 1e-8 - r.distance);
            ensure(r.bound_satisfied, || {
                format!("{}: {} > {}", fx.name, r.distance, r.defect_norm)
            })?;
            let again = hyers_ulam_correct(&fx.qs, &m, &r.correction, side).map_err(err)?;
            idem = idem.max(again.correction.distance(&r.correction).map_err(err)?);
            let (_, d) = additive_defect(&fx.qs, &r.correction).map_err(err)?;
            resid = resid.max(d);

            let g = random_element(index, &mut rng);
            let (a, b) = (
                C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            );
            let combo = f.scale(a).add(&g.scale(b)).map_err(err)?;
            let lhs = hyers_ulam_correct(&fx.qs, &m, &combo, side)
                .map_err(err)?
                .correction;
            let fg = hyers_ulam_correct(&fx.qs, &m, &g, side)
                .map_err(err)?
                .correction;
            let rhs = r.correction.scale(a).add(&fg.scale(b)).map_err(err)?;
            lin = lin.max(lhs.distance(&rhs).map_err(err)?);
        }
    }
    ensure(resid < 1e-8 && slack >= 0.0, || {
        format!("residual {resid:e}, slack {slack:e}")
    })?;
    ensure(idem < 1e-10, || format!("idempotence {idem:e}"))?;
    ensure(lin < 1e-9, || format!("linearity {lin:e}"))?;
    Ok(format!(
        "additivity {resid:.2e}, min bound slack {slack:.2e}, idempotence {idem:.2e}, linearity {lin:.2e}"
    ))
}

fn solver() -> Outcome {
    let opts = SolverOptions::default();
    let mut uniform_gap: f64 = 0.0;
    for n in [2, 3, 4] {
        let qs = builtin::z_n(n).into_validated(DEFAULT_TOL).map_err(err)?;
        let closed = known_mean(&qs).ok_or("no closed form")?;
        let out = solve_mean(&qs, Side::Right, opts).map_err(err)?;
        let found = out
            .state()
            .ok_or_else(|| format!("Z{n}: {:?}", out.report()))?;
        uniform_gap = uniform_gap.max(found.max_density_diff(&closed).map_err(err)?);
    }
    ensure(uniform_gap < 1e-6, || {
        format!("uniform gap {uniform_gap:e}")
    })?;

    let s3 = builtin::s3_dual().map_err(err)?;
    let closed = known_mean(&s3).ok_or("no closed form")?;
    let closed_res = invariance_residual(&s3, &closed, Side::Right).map_err(err)?;
    ensure(closed_res < 1e-10, || {
        format!("closed-form S3 dual residual {closed_res:e}")
    })?;
    let out = solve_mean(&s3, Side::Right, opts).map_err(err)?;
    let solved_res = out.report().residual;
    ensure(out.state().is_some() && solved_res < 1e-7, || {
        format!("S3 dual solver {:?}", out.report())
    })?;

    let lz = builtin::left_zero(2)
        .into_validated(DEFAULT_TOL)
        .map_err(err)?;
    let out = solve_mean(&lz, Side::Left, opts).map_err(err)?;
    ensure(matches!(out, SolveOutcome::Infeasible(_)), || {
        "left-zero left mean found".into()
    })?;
    Ok(format!(
        "uniform gap {uniform_gap:.2e}, S3 dual closed {closed_res:.2e} solved {solved_res:.2e}, left-zero left infeasible ({})",
        out.report().certificate.as_deref().unwrap_or("-")
    ))
}

fn contractivity(fixtures: &[Fixture]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let aux = laws::auxiliary_index();
    let mut worst = f64::NEG_INFINITY;
    for fx in fixtures {
        let index = fx.qs.index();
        let mean = mean_for(fx)?;
        let product = IndexSystem::product(&[index, &aux]);
        for k in 0..100 {
            let m = if k == 0 {
                mean.clone()
            } else {
                random_state(index, &mut rng)
            };
            let h = random_element(&product, &mut rng);
            let out = apply_left(&m, &h).map_err(err)?;
            worst = worst.max(out.sup_norm() - h.sup_norm());
        }
    }
    ensure(worst <= 1e-10, || {
        format!("‖(m⊗̃ι)(h)‖ − ‖h‖ reached {worst:e}")
    })?;
    Ok(format!("max ‖(m⊗̃ι)(h)‖ − ‖h‖ = {worst:.2e}"))
}

fn group_like(fixtures: &[Fixture]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for fx in fixtures.iter().filter(|fx| fx.qs.is_unital() == Some(true)) {
        let m = mean_for(fx)?;
        let index = fx.qs.index();
        let mut inputs = vec![MMElement::zeros(index)];
        for _ in 0..20 {
            let f = random_element(index, &mut rng).scale(C64::new(3.0, 0.0));
            inputs.push(
                hyers_ulam_correct(&fx.qs, &m, &f, fx.mean_side)
                    .map_err(err)?
                    .correction,
            );
        }
        for f in &inputs {
            let g = grouplike_exp(&fx.qs, f).map_err(err)?;
            worst = worst.max(g.residual);
        }
        tested += 1;
    }
    ensure(tested > 0 && worst < 1e-8, || {
        format!("residual {worst:e} over {tested} fixtures")
    })?;
    Ok(format!(
        "{tested} unital fixtures, max ‖Δ(exp F) − exp F ⊗ exp F‖ = {worst:.2e}"
    ))
}

fn determinism() -> Outcome {
    let qs = builtin::s3_dual().map_err(err)?;
    let m = known_mean(&qs).ok_or("no closed form")?;
    let run = || -> Result<String, String> {
        let stats = perturbation_experiment(&qs, &m, Side::Right, 2024, 100, 0.5).map_err(err)?;
        serde_json::to_string(&stats).map_err(err)
    };
    let (a, b) = (run()?, run()?);
    ensure(a == b, || format!("{a} != {b}"))?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() -> ExitCode {
    let fixtures = builtin::fixtures();
    let criteria: Vec<Criterion> = vec![
        ("law suite", Box::new(|| law_suite(&fixtures))),
        ("axiom validation", Box::new(|| axiom_validation(&fixtures))),
        ("invariant slicing", Box::new(|| slicing(&fixtures))),
        (
            "additive stabilization",
            Box::new(|| stabilization(&fixtures)),
        ),
        ("mean solver", Box::new(solver)),
        ("contractivity", Box::new(|| contractivity(&fixtures))),
        ("group-like exponential", Box::new(|| group_like(&fixtures))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
