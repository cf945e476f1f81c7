//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails. Tolerances are pinned in the constants below.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use common::{between, br_grid_gap, contraction_excess, fd_suite};
use perfsgd_core::analysis::{
    greedy_bound, greedy_recursion_rhs, offline_recursion_rhs, sensitivity_audit, AuditOptions, BoundParams,
};
use perfsgd_core::data::synthetic_credit;
use perfsgd_core::environments::{EtaEnv, GaussianEnv, PointMassEnv, StrategicEnv, DEFAULT_STRATEGIC_DIMS};
use perfsgd_core::experiment::{load_document, parse_config, run_experiment, Experiment};
use perfsgd_core::optimizers::{
    empirical_stable_point, greedy_deploy, greedy_step_size, lazy_deploy, lazy_step_size, rgd, rgd_contraction_bound,
    rgd_step_size, rrm, DeploymentSchedule, LazyBudget, RunOptions, SolverOptions, StepSchedule,
};
use perfsgd_core::rng::{seeded, standard_normal, substream, SimRng};
use perfsgd_core::trajectory::RecordPolicy;
use perfsgd_core::{Environment, ParamVector, Trajectory};

const RUNS: u64 = 30;
const BUDGET: u64 = 50_000;
const C1_BOUND_FACTOR: f64 = 10.0;
const C1_SECONDS: f64 = 60.0;
const C2_SE: f64 = 3.0;
const C3_REL: f64 = 1e-12;
const C3_STEPS: usize = 15;
const C3_SECONDS: f64 = 1.0;
const C4_ETAS: [f64; 3] = [0.01, 0.1, 1.0];
const C5_STATES: usize = 20;
const C5_DRAWS: usize = 100_000;
const C5_SE: f64 = 3.0;
const C6_PAIRS: usize = 10;
const C6_SAMPLES: usize = 100_000;
const C6_BOOTSTRAP: usize = 100;
const C6_RATIO: (f64, f64) = (0.97, 1.03);
const C8_TARGET: f64 = 0.1;
const C9_DIST: f64 = 1e-2;
const C9_RRM_DIST: f64 = 1e-9;
const C9_RRM_ROUNDS: u64 = 60;
const C10_RERUN: f64 = 1e-6;
const C10_RATIO: f64 = 50.0;
const C10_SMALL: f64 = 1e-3;
const C10_CONVERGED: f64 = 1e-2;
const C11_FD: f64 = 1e-5;
const C11_BR_GAP: f64 = 1e-9;
const C11_PAIRS: usize = 50;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Mean and standard error of dist² per recorded step across runs. Steps not
/// reached by every run are skipped.
struct Summary {
    steps: Vec<u64>,
    deployments: Vec<u64>,
    mean: Vec<f64>,
    se: Vec<f64>,
}

fn summarize(trajs: &[Trajectory]) -> Summary {
    let mut s = Summary {
        steps: vec![],
        deployments: vec![],
        mean: vec![],
        se: vec![],
    };
    let n = trajs.len() as f64;
    for r in &trajs[0].records {
        let vals: Option<Vec<f64>> = trajs.iter().map(|t| t.record_at(r.step).and_then(|x| x.dist_sq)).collect();
        let Some(vals) = vals else { continue };
        let m = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        s.steps.push(r.step);
        s.deployments.push(r.deployments);
        s.mean.push(m);
        s.se.push((var / n).sqrt());
    }
    s
}

fn replicate(seed: u64, run: impl Fn(&mut SimRng) -> Trajectory + Sync) -> Vec<Trajectory> {
    (0..RUNS).into_par_iter().map(|r| run(&mut substream(seed, r))).collect()
}

fn gaussian(eps: f64) -> GaussianEnv {
    GaussianEnv::new(10.0, 0.1, eps).unwrap()
}

fn greedy_runs(env: &GaussianEnv, steps: u64, record: RecordPolicy, seed: u64) -> Vec<Trajectory> {
    let sched = StepSchedule::greedy_theorem(&env.constants()).unwrap();
    let opts = RunOptions {
        reference: env.stable_point(),
        record,
        ..Default::default()
    };
    let theta1 = ParamVector::scalar(10.0);
    replicate(seed, |rng| greedy_deploy(env, &theta1, steps, &sched, &opts, rng).unwrap())
}

fn lazy_runs(env: &GaussianEnv, budget: LazyBudget, alpha: f64, seed: u64) -> Vec<Trajectory> {
    let dep = DeploymentSchedule::new(1.0, alpha).unwrap();
    let sched = StepSchedule::lazy_theorem(&env.constants()).unwrap();
    let opts = RunOptions::with_reference(env.stable_point().unwrap());
    let theta1 = ParamVector::scalar(10.0);
    replicate(seed, |rng| lazy_deploy(env, &theta1, budget, &dep, &sched, &opts, rng).unwrap())
}

fn final_mean(trajs: &[Trajectory]) -> f64 {
    trajs.iter().map(|t| t.last().unwrap().dist_sq.unwrap()).sum::<f64>() / trajs.len() as f64
}

fn criterion_1() -> Outcome {
    let mut parts = vec![];
    let mut pass = true;
    for (eps, ps) in [(0.2, 12.5), (0.6, 25.0), (0.9, 100.0)] {
        let env = gaussian(eps);
        let exact = env.stable_point().unwrap()[0];
        pass &= (exact - ps).abs() <= 1e-12 * ps;
        let start = Instant::now();
        let trajs = greedy_runs(&env, BUDGET, RecordPolicy::checkpoints([]), 100);
        let secs = start.elapsed().as_secs_f64();
        let mean = final_mean(&trajs);
        let p = BoundParams::new(env.constants(), (10.0 - exact).powi(2), 1.0, 0.5).unwrap();
        let bound = greedy_bound(BUDGET, &p).unwrap();
        let ok = mean < C1_BOUND_FACTOR * bound && secs < C1_SECONDS;
        pass &= ok;
        parts.push(format!("eps={eps} theta_PS={exact} mean={mean:.3e} 10*bound={:.3e} {secs:.2}s", C1_BOUND_FACTOR * bound));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let env = gaussian(0.2);
    let grid = perfsgd_core::experiment::geometric_grid(BUDGET, 200);
    let trajs = greedy_runs(&env, BUDGET, RecordPolicy::checkpoints(grid.iter().copied()), 200);
    let s = summarize(&trajs);
    let p = BoundParams::new(env.constants(), 2.5f64.powi(2), 1.0, 0.5).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_k = 0;
    for i in 0..s.steps.len() {
        let b = greedy_bound(s.steps[i], &p).unwrap();
        let excess = (s.mean[i] - b - C2_SE * s.se[i]) / b;
        if excess > worst {
            worst = excess;
            worst_k = s.steps[i];
        }
    }
    verdict(
        worst <= 1e-12 && s.steps.len() == grid.len(),
        format!(
            "{} checkpoints; max (mean - bound - 3se)/bound = {worst:.3} at k={worst_k}",
            s.steps.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let env = gaussian(0.2);
    let c = env.constants();
    let eta = rgd_step_size(&c).unwrap();
    let ps = env.stable_point().unwrap();
    let t = rgd(&env, &ParamVector::scalar(0.0), eta, 40, 1, &RunOptions::with_reference(ps), &mut seeded(0)).unwrap();
    let repeat = rgd(&env, &ParamVector::scalar(0.0), eta, 40, 7, &RunOptions::default(), &mut seeded(9)).unwrap();
    let expected = 1.0 - eta * (1.0 - 0.2);
    let factor = rgd_contraction_bound(&c, eta);
    let d: Vec<f64> = t.dist_sq_trace().iter().map(|v| v.sqrt()).collect();
    let worst = d
        .windows(2)
        .take(C3_STEPS)
        .map(|w| ((w[1] / w[0]) - expected).abs() / expected)
        .fold(0.0, f64::max);
    let deterministic = t.records.iter().zip(&repeat.records).all(|(a, b)| a.theta == b.theta);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= C3_REL && expected <= factor && deterministic && secs < C3_SECONDS,
        format!(
            "ratio {expected:.4} <= factor {factor:.4}; max rel err over {C3_STEPS} steps {worst:.1e}; deterministic {deterministic}; {secs:.3}s"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for (label, coupling, curvature) in [("a", 1.0, 0.0), ("b", 2.0, 1.0)] {
        let env = PointMassEnv::new(1.0, coupling, curvature).unwrap();
        let c = env.constants();
        pass &= !c.in_convergence_regime();
        for eta in C4_ETAS {
            let t = rgd(&env, &ParamVector::scalar(1.0), eta, 1_000_000, 1, &RunOptions::default(), &mut seeded(0)).unwrap();
            let increasing = t.records.windows(2).all(|w| w[1].theta[0].abs() > w[0].theta[0].abs());
            let ok = increasing && t.status.is_diverged();
            pass &= ok;
            let at = match t.status {
                perfsgd_core::RunStatus::Diverged { step } => step,
                _ => 0,
            };
            parts.push(format!("({label}) eta={eta}: diverged at {at}"));
        }
    }
    verdict(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut rng = seeded(5);
    let mut worst_greedy = f64::NEG_INFINITY;
    let mut worst_lazy = f64::NEG_INFINITY;
    for _ in 0..C5_STATES {
        let eps = [0.2, 0.6, 0.9][(between(&mut rng, 0.0, 3.0) as usize).min(2)];
        let env = gaussian(eps);
        let c = env.constants();
        let ps = env.stable_point().unwrap()[0];
        let theta = ps + between(&mut rng, -20.0, 20.0);
        let k = between(&mut rng, 1.0, 10_000.0) as u64;
        let eta_g = greedy_step_size(k, &c).unwrap();
        let eta_l = lazy_step_size(k, &c).unwrap();
        let phi = env.mean_at(theta) + between(&mut rng, -5.0, 5.0);
        let g = env.mean_at(theta);
        let (mut sg, mut sg2, mut sl, mut sl2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..C5_DRAWS {
            let z = g + 0.1 * standard_normal(&mut rng);
            let next = theta - eta_g * (theta - z);
            let e = (next - ps).powi(2);
            sg += e;
            sg2 += e * e;
            let inner = phi - eta_l * (phi - z);
            let e = (inner - g).powi(2);
            sl += e;
            sl2 += e * e;
        }
        let n = C5_DRAWS as f64;
        let check = |s: f64, s2: f64, rhs: f64| {
            let m = s / n;
            let se = ((s2 / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt();
            (m - rhs) / se.max(f64::MIN_POSITIVE)
        };
        worst_greedy = worst_greedy.max(check(sg, sg2, greedy_recursion_rhs((theta - ps).powi(2), eta_g, &c)));
        worst_lazy = worst_lazy.max(check(sl, sl2, offline_recursion_rhs((phi - g).powi(2), eta_l, &c)));
    }
    verdict(
        worst_greedy <= C5_SE && worst_lazy <= C5_SE,
        format!(
            "{C5_STATES} states x {C5_DRAWS} draws; max (mean - rhs)/se: greedy {worst_greedy:.2}, inner lazy {worst_lazy:.2}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let env = gaussian(0.2);
    let mut rng = seeded(6);
    let pairs: Vec<_> = (0..C6_PAIRS)
        .map(|_| {
            (
                ParamVector::scalar(between(&mut rng, -10.0, 10.0)),
                ParamVector::scalar(between(&mut rng, -10.0, 10.0)),
            )
        })
        .collect();
    let opts = AuditOptions {
        n_samples: C6_SAMPLES,
        coordinate: 0,
        paired: false,
        bootstrap: C6_BOOTSTRAP,
        abs_tol: 0.0,
    };
    let rows = sensitivity_audit(&env, &pairs, &opts, &mut rng).unwrap();
    let mut pass = true;
    let (mut lo, mut hi, mut worst_z) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for r in &rows {
        let ratio = r.ratio.unwrap();
        let z = (r.w1 - r.bound).abs() / r.se;
        pass &= ratio >= C6_RATIO.0 && ratio <= C6_RATIO.1 && z <= 3.0;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        worst_z = worst_z.max(z);
    }
    verdict(
        pass,
        format!("{} pairs, n={C6_SAMPLES}: ratio in [{lo:.4}, {hi:.4}], max |W1 - bound|/se = {worst_z:.2}", rows.len()),
    )
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for (eps, lazy_wins) in [(0.9, true), (0.2, false)] {
        let env = gaussian(eps);
        let g = final_mean(&greedy_runs(&env, BUDGET, RecordPolicy::checkpoints([]), 700));
        let lazy = lazy_runs(&env, LazyBudget::Samples(BUDGET), 1.0, 701);
        let l = final_mean(&lazy);
        let used = lazy[0].last().unwrap().samples;
        pass &= if lazy_wins { l < g } else { g < l };
        parts.push(format!("eps={eps}: greedy {g:.3e}, lazy {l:.3e} ({used} samples)"));
    }
    verdict(pass, parts.join("; "))
}

fn first_reach(s: &Summary) -> Option<u64> {
    s.mean.iter().position(|&m| m <= C8_TARGET).map(|i| s.deployments[i])
}

fn criterion_8() -> Outcome {
    let env = gaussian(0.9);
    let steps = 600_000;
    let greedy = summarize(&greedy_runs(&env, steps, RecordPolicy::checkpoints((0..=steps).step_by(100)), 800));
    let lazy1 = summarize(&lazy_runs(&env, LazyBudget::Deployments(400), 1.0, 801));
    let lazy2 = summarize(&lazy_runs(&env, LazyBudget::Deployments(150), 2.0, 802));
    let (g, l1, l2) = (first_reach(&greedy), first_reach(&lazy1), first_reach(&lazy2));
    let pass = matches!((g, l1, l2), (Some(g), Some(l1), Some(l2)) if l2 < l1 && l1 < g);
    verdict(
        pass,
        format!("deployments to mean dist^2 <= {C8_TARGET}: lazy(a=2) {l2:?}, lazy(a=1) {l1:?}, greedy {g:?} (100-step grid)"),
    )
}

fn criterion_9() -> Outcome {
    let env = EtaEnv::new(0.5, 20.0, 4.0, 0.25).unwrap();
    let ps = env.stable_point().unwrap();
    let exact = ps.dist(&ParamVector::new(vec![4.0 / 1.25, 20.0])).unwrap() < 1e-12;
    // Declared constants put epsilon above gamma/beta: epsilon-free schedule, c = 1/gamma.
    let sched = StepSchedule::epsilon_free(&env.constants(), 1.0).unwrap();
    let opts = RunOptions {
        reference: Some(ps.clone()),
        record: RecordPolicy::checkpoints([]),
        ..Default::default()
    };
    let theta1 = env.default_init();
    let trajs = replicate(900, |rng| greedy_deploy(&env, &theta1, BUDGET, &sched, &opts, rng).unwrap());
    let mean = final_mean(&trajs);
    let worst = trajs.iter().map(|t| t.last().unwrap().dist_sq.unwrap()).fold(0.0, f64::max);
    let r = rrm(&env, &theta1, C9_RRM_ROUNDS, SolverOptions::default(), &RunOptions::with_reference(ps)).unwrap();
    let rounds = r.records.iter().position(|x| x.dist_sq.unwrap().sqrt() < C9_RRM_DIST);
    verdict(
        exact && mean < C9_DIST && worst < C9_DIST && rounds.is_some(),
        format!("greedy mean dist^2 {mean:.3e} (max run {worst:.3e}); rrm within {C9_RRM_DIST:.0e} after {rounds:?} rounds"),
    )
}

fn criterion_10() -> Outcome {
    let data = synthetic_credit(2000, 10, 0.5, 11).unwrap();
    let dims = DEFAULT_STRATEGIC_DIMS.to_vec();
    let base = StrategicEnv::new(data.clone(), 0.0, dims.clone(), None).unwrap();
    let ratio = base.constants().ratio();
    let mut parts = vec![format!(
        "beta={:.4} gamma={:.4} gamma/beta={ratio:.4}",
        base.constants().beta,
        base.constants().gamma
    )];

    // (ii) far outside the regime with the factor-100 override.
    let env = StrategicEnv::new(data.clone(), C10_RATIO * ratio, dims.clone(), None).unwrap();
    let zero = ParamVector::zeros(10);
    let ps = empirical_stable_point(&env, &zero, 1e-10, 10_000, SolverOptions::default()).unwrap();
    let again = match empirical_stable_point(&env, &ps.add(&ParamVector::new(vec![0.5; 10])).unwrap(), 1e-10, 10_000, SolverOptions::default()) {
        Ok(v) => v,
        Err(e) => return Err(format!("(i) rrm from a second start: {e}")),
    };
    let rerun = ps.dist(&again).unwrap();
    let ok_i = rerun < C10_RERUN;
    parts.push(format!("(i) rrm fixed point rerun distance {rerun:.1e}"));

    let over = StepSchedule::epsilon_free(&env.constants(), 100.0).unwrap();
    let opts = RunOptions {
        reference: Some(ps.clone()),
        record: RecordPolicy::checkpoints([]),
        ..Default::default()
    };
    let greedy = replicate(1000, |rng| greedy_deploy(&env, &zero, BUDGET, &over, &opts, rng).unwrap());
    let dep = DeploymentSchedule::new(1.0, 2.0).unwrap();
    let lazy = replicate(1001, |rng| {
        lazy_deploy(&env, &zero, LazyBudget::Samples(BUDGET), &dep, &over, &opts, rng).unwrap()
    });
    let lazy_mean = final_mean(&lazy);
    let diverged = greedy.iter().filter(|t| t.status.is_diverged()).count();
    let greedy_mean = if diverged > 0 { f64::INFINITY } else { final_mean(&greedy) };
    let ok_ii = lazy.iter().all(|t| !t.status.is_diverged()) && lazy_mean < greedy_mean;
    parts.push(format!(
        "(ii) eps={:.3}: lazy(a=2) {lazy_mean:.3e} vs greedy {greedy_mean:.3e} ({diverged}/{RUNS} greedy runs diverged)",
        env.constants().epsilon
    ));

    // (iii) deep inside the regime with the theorem schedule.
    let env = StrategicEnv::new(data, C10_SMALL * ratio, dims, None).unwrap();
    let ps = empirical_stable_point(&env, &zero, 1e-10, 10_000, SolverOptions::default()).unwrap();
    let sched = StepSchedule::greedy_theorem(&env.constants()).unwrap();
    let opts = RunOptions {
        reference: Some(ps.clone()),
        record: RecordPolicy::checkpoints([]),
        ..Default::default()
    };
    let greedy = replicate(1002, |rng| greedy_deploy(&env, &zero, BUDGET, &sched, &opts, rng).unwrap());
    let start = zero.dist_sq(&ps).unwrap();
    let end = final_mean(&greedy);
    let ok_iii = end <= C10_CONVERGED * start;
    parts.push(format!("(iii) greedy dist^2 {start:.3e} -> {end:.3e}"));
    verdict(ok_i && ok_ii && ok_iii, parts.join("; "))
}

fn criterion_11() -> Outcome {
    let fd = fd_suite(100, 11);
    let fd_ok = fd.iter().all(|&e| e < C11_FD);
    let gap = br_grid_gap(1000, 12);

    let tmp = tempfile::tempdir().unwrap();
    let text = "base_seed = 3\nrepeats = 4\n[environment]\nkind = \"gaussian\"\nmu = 10.0\nsigma = 0.1\nepsilon = 0.6\n\
                [algorithm]\nkind = \"greedy\"\n[budget]\nsamples = 5000\n";
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(parse_config(text).unwrap(), &a, 1).unwrap();
    let doc = load_document(&a.join("metadata.toml")).unwrap();
    Experiment::prepare(doc.config, doc.cached_stable_point).unwrap().run_to_dir(&b, 4).unwrap();
    let identical = ["aggregate.csv", "trace_run000.csv", "trace_run003.csv"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());

    let g = gaussian(0.4);
    let e = EtaEnv::new(0.5, 20.0, 4.0, 0.25).unwrap();
    let p = PointMassEnv::new(0.3, 1.0, 0.8).unwrap();
    let s = StrategicEnv::new(synthetic_credit(300, 4, 0.5, 3).unwrap(), 0.05, vec![0, 2], Some(0.5)).unwrap();
    let excess = [
        contraction_excess(&g, C11_PAIRS, 1, |r| ParamVector::scalar(between(r, -20.0, 20.0))),
        contraction_excess(&e, C11_PAIRS, 2, |r| ParamVector::new(vec![between(r, 0.0, 4.0), between(r, 0.0, 40.0)])),
        contraction_excess(&p, C11_PAIRS, 3, |r| ParamVector::scalar(between(r, -5.0, 5.0))),
        contraction_excess(&s, C11_PAIRS, 4, |r| ParamVector::new((0..4).map(|_| between(r, -1.0, 1.0)).collect())),
    ];
    let contraction_ok = excess[..3].iter().all(|&x| x <= 1e-12) && excess[3] <= 1e-8;
    verdict(
        fd_ok && gap <= C11_BR_GAP && identical && contraction_ok,
        format!(
            "fd max rel err {:.1e}; best-response grid gap {gap:.1e}; rerun identical {identical}; \
             max contraction excess {:.1e}",
            fd.iter().cloned().fold(0.0, f64::max),
            excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("gaussian stable points, greedy vs 10x bound", criterion_1),
        ("greedy bound dominance on the checkpoint grid", criterion_2),
        ("rgd exact contraction", criterion_3),
        ("rgd divergence outside the regime", criterion_4),
        ("one-step recursions, Monte-Carlo", criterion_5),
        ("sensitivity audit tightness", criterion_6),
        ("greedy/lazy crossover", criterion_7),
        ("deployment tradeoff ordering", criterion_8),
        ("eta environment", criterion_9),
        ("strategic classification, desk scale", criterion_10),
        ("property suites", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
