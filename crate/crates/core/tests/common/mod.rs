//! Oracles shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use perfsgd_core::environments::best_response;
use perfsgd_core::loss::{loss_grad, LinearQuadraticLoss, LinearSquaredLoss, LogisticLoss, Loss, SquaredLoss};
use perfsgd_core::rng::{seeded, uniform, SimRng};
use perfsgd_core::{Environment, ParamVector, Sample};

pub fn between(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}

/// Largest |central difference − analytic| / max(|analytic|, 1) over coordinates.
pub fn fd_error(loss: &dyn Loss, z: &Sample, theta: &ParamVector) -> f64 {
    let g = loss_grad(loss, z, theta).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..theta.dim() {
        let mut up = theta.clone();
        let mut down = theta.clone();
        up.as_mut_slice()[i] += h;
        down.as_mut_slice()[i] -= h;
        let fd = (loss.value(z, &up) - loss.value(z, &down)) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
    }
    worst
}

/// Worst finite-difference error per loss over `points` random points:
/// (squared, linear squared, linear-quadratic, logistic).
pub fn fd_suite(points: usize, seed: u64) -> [f64; 4] {
    let mut rng = seeded(seed);
    let mut worst = [0.0f64; 4];
    let point = |rng: &mut SimRng, d: usize| ParamVector::new((0..d).map(|_| between(rng, -3.0, 3.0)).collect());
    for _ in 0..points {
        let z = Sample::unlabelled(vec![between(&mut rng, -5.0, 5.0)]);
        let t = point(&mut rng, 1);
        worst[0] = worst[0].max(fd_error(&SquaredLoss, &z, &t));

        let x: Vec<f64> = (0..3).map(|_| between(&mut rng, -2.0, 2.0)).collect();
        let z = Sample::labelled(x.clone(), between(&mut rng, -5.0, 5.0));
        let t = point(&mut rng, 4);
        worst[1] = worst[1].max(fd_error(&LinearSquaredLoss, &z, &t));

        let lq = LinearQuadraticLoss {
            coupling: between(&mut rng, 0.5, 2.0),
            curvature: between(&mut rng, 0.0, 0.5),
        };
        let z = Sample::unlabelled(vec![between(&mut rng, -2.0, 2.0)]);
        let t = point(&mut rng, 1);
        worst[2] = worst[2].max(fd_error(&lq, &z, &t));

        let y = if uniform(&mut rng) < 0.5 { 0.0 } else { 1.0 };
        let log = LogisticLoss {
            lambda: between(&mut rng, 0.0, 1.0),
        };
        let t = point(&mut rng, 3);
        worst[3] = worst[3].max(fd_error(&log, &Sample::labelled(x, y), &t));
    }
    worst
}

/// u(x′) − c(x′, x) = −θᵀx′ − ‖x′ − x‖²/(2ε).
pub fn br_utility(xp: &[f64], x: &[f64], theta: &ParamVector, eps: f64) -> f64 {
    let lin: f64 = xp.iter().zip(theta.as_slice()).map(|(a, t)| -a * t).sum();
    let cost: f64 = xp.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * eps);
    lin - cost
}

/// Largest amount by which any grid point beats the closed-form best
/// response, over `cases` random (x, θ, ε) with strategic coordinates {0, 2}.
pub fn br_grid_gap(cases: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let dims = [0usize, 2];
    let steps = 41;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cases {
        let x: Vec<f64> = (0..3).map(|_| between(&mut rng, -2.0, 2.0)).collect();
        let theta = ParamVector::new((0..3).map(|_| between(&mut rng, -2.0, 2.0)).collect());
        let eps = between(&mut rng, 0.01, 1.0);
        let br = best_response(&x, &theta, eps, &dims);
        assert_eq!(br[1], x[1]);
        let best = br_utility(&br, &x, &theta, eps);
        let radius = 6.0 * eps;
        let mut xp = x.clone();
        for a in 0..steps {
            for b in 0..steps {
                xp[0] = x[0] - radius + 2.0 * radius * a as f64 / (steps - 1) as f64;
                xp[2] = x[2] - radius + 2.0 * radius * b as f64 / (steps - 1) as f64;
                worst = worst.max(br_utility(&xp, &x, &theta, eps) - best);
            }
        }
    }
    worst
}

/// Largest ‖G(θ) − G(θ′)‖ − (εβ/γ)‖θ − θ′‖ over `pairs` random pairs.
pub fn contraction_excess<E: Environment + ?Sized>(
    env: &E,
    pairs: usize,
    seed: u64,
    mut draw: impl FnMut(&mut SimRng) -> ParamVector,
) -> f64 {
    let c = env.constants();
    let factor = c.epsilon * c.beta / c.gamma;
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let ga = env.solve_decoupled(&a, 1e-12, 1_000_000).unwrap();
        let gb = env.solve_decoupled(&b, 1e-12, 1_000_000).unwrap();
        worst = worst.max(ga.dist(&gb).unwrap() - factor * a.dist(&b).unwrap());
    }
    worst
}
