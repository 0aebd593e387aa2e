use super::*;
use crate::autodiff::{param_gradient, Tape};
use crate::fdm::Axis;
use crate::network::eval_point;
use crate::problems::{Condition, Face};
use crate::sampling::{CollocationSet, DataPoint};
use alloc::vec;

fn small(id: ProblemId, seed: u64) -> (TrainConfig, CollocationSet) {
    let mut c = TrainConfig::preset(id);
    c.net = MlpConfig::new(c.net.input_dim, 2, 6, c.net.output_dim, Activation::Tanh).unwrap();
    c.seed = seed;
    let nd = round_data_count(&c.problem, 8);
    let set = sample(&c.problem, nd, 6, seed).unwrap();
    (c, set)
}

fn point(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

#[test]
fn batched_loss_matches_tape_route() {
    for id in ProblemId::ALL {
        let (c, set) = small(id, 11);
        let params = init(&c.net, 5);
        let w = LossWeights { initial: 1.0, boundary: 0.5, residual: 2.0 };
        let ev = LossEvaluator::new(&c.problem, &c.net, &set, w).unwrap();
        let (fast, g_fast) = ev.loss_and_grad(params.as_slice()).unwrap();

        let tape = Tape::new();
        let vars: Vec<_> = params.as_slice().iter().map(|&p| tape.var(p)).collect();
        let (loss, slow) = assemble_loss(&tape, &c.net, &vars, &set, &c.problem, &w).unwrap();
        let g_slow = param_gradient(&tape, loss, &vars).unwrap();

        for (a, b) in [(fast.initial, slow.initial), (fast.boundary, slow.boundary), (fast.residual, slow.residual)] {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{id}: {a} vs {b}");
        }
        assert!((fast.total - loss.value()).abs() <= 1e-12 * (1.0 + loss.value().abs()));
        let scale = g_slow.iter().fold(1.0f64, |m, g| m.max(g.abs()));
        for (a, b) in g_fast.iter().zip(&g_slow) {
            assert!((a - b).abs() <= 1e-10 * scale, "{id}: {a} vs {b}");
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let (c, set) = small(ProblemId::Kdv, 3);
    let mut params = init(&c.net, 8);
    let ev = LossEvaluator::new(&c.problem, &c.net, &set, LossWeights::default()).unwrap();
    let (_, g) = ev.loss_and_grad(params.as_slice()).unwrap();
    for i in (0..params.len()).step_by(7) {
        let h = 1e-6;
        let x0 = params.0[i];
        params.0[i] = x0 + h;
        let up = ev.evaluate(params.as_slice(), None).unwrap().total;
        params.0[i] = x0 - h;
        let dn = ev.evaluate(params.as_slice(), None).unwrap().total;
        params.0[i] = x0;
        let fd = (up - dn) / (2.0 * h);
        assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "param {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn hand_built_sets() {
    let p = PdeProblem::preset(ProblemId::Burgers);
    let net = MlpConfig::new(2, 2, 4, 1, Activation::Sigmoid).unwrap();
    let zeros = ParamVector::zeros(&net);
    let face = Face { axis: 0, upper: false };
    let mut set = CollocationSet {
        dim: 2,
        initial: vec![DataPoint { point: point(&[0.0, 0.0]), cond: Condition::Initial([0.0, 0.0]) }],
        boundary: vec![DataPoint { point: point(&[0.0, 0.5]), cond: Condition::Dirichlet(face, [0.0, 0.0]) }],
        interior: vec![0.3, 0.05],
    };
    let ev = LossEvaluator::new(&p, &net, &set, LossWeights::default()).unwrap();
    assert_eq!(ev.evaluate(zeros.as_slice(), None).unwrap().total, 0.0);

    set.boundary[0].cond = Condition::Dirichlet(face, [-2.0, 0.0]);
    let ev = LossEvaluator::new(&p, &net, &set, LossWeights::default()).unwrap();
    let t = ev.evaluate(zeros.as_slice(), None).unwrap();
    assert_eq!((t.boundary, t.total), (4.0, 4.0));

    set.interior.clear();
    assert!(matches!(LossEvaluator::new(&p, &net, &set, LossWeights::default()), Err(TrainError::Config(_))));
}

#[test]
fn data_terms_recompute_from_pointwise_predictions() {
    let (c, set) = small(ProblemId::Heat2d, 4);
    let params = init(&c.net, 2);
    let ev = LossEvaluator::new(&c.problem, &c.net, &set, LossWeights::default()).unwrap();
    let t = ev.evaluate(params.as_slice(), None).unwrap();
    let mse = |pts: &[DataPoint]| {
        pts.iter()
            .map(|d| {
                let y = eval_point(&c.net, params.as_slice(), &d.point[..3]).unwrap()[0];
                (y - d.cond.targets()[0]).powi(2)
            })
            .sum::<f64>()
            / pts.len() as f64
    };
    assert!((t.initial - mse(&set.initial)).abs() <= 1e-12);
    assert!((t.boundary - mse(&set.boundary)).abs() <= 1e-12);
    assert!((t.total - (t.initial + t.boundary + t.residual)).abs() <= 1e-12);
}

#[test]
fn zero_iterations_reports_initial_loss() {
    let mut c = TrainConfig::preset(ProblemId::ExpOde);
    c.iterations = 0;
    let r = train_with(&c, None, &NoClock).unwrap();
    assert_eq!(r.history.len(), 1);
    assert_eq!(r.params, init(&c.net, c.seed));
    assert_eq!(r.iterations_run, 0);
}

#[test]
fn runs_are_deterministic_and_history_follows_cadence() {
    let mut c = TrainConfig::preset(ProblemId::Toy);
    c.iterations = 50;
    c.cadence = 10;
    c.scale = 10;
    let a = train_with(&c, None, &NoClock).unwrap();
    let b = train_with(&c, None, &NoClock).unwrap();
    assert_eq!(a.history.len(), 5);
    assert_eq!(a.history, b.history);
    assert_eq!(a.params, b.params);
}

#[test]
fn lbfgs_route_lowers_the_loss() {
    let mut c = TrainConfig::preset(ProblemId::ExpOde);
    c.optimizer = OptimizerChoice::Lbfgs { memory: 10 };
    c.iterations = 40;
    c.cadence = 1;
    let r = train_with(&c, None, &NoClock).unwrap();
    assert!(r.final_loss.total < 0.1 * r.history[0].terms.total);
}

#[test]
fn pure_regression_reduces_the_data_term() {
    let mut c = TrainConfig::preset(ProblemId::Burgers);
    c.net = MlpConfig::new(2, 2, 8, 1, Activation::Sigmoid).unwrap();
    c.weights.residual = 0.0;
    c.iterations = 200;
    c.scale = 20;
    let r = train_with(&c, None, &NoClock).unwrap();
    assert!(r.final_loss.data() <= r.history[0].terms.data());
}

#[test]
fn non_finite_loss_flags_divergence() {
    let mut c = TrainConfig::preset(ProblemId::ExpOde);
    c.weights.initial = f64::NAN;
    let r = train_with(&c, None, &NoClock).unwrap();
    assert_eq!(r.diverged_at, Some(0));
    assert!(r.prediction.is_none());
}

#[test]
fn config_validation() {
    let mut c = TrainConfig::preset(ProblemId::Toy);
    c.optimizer = OptimizerChoice::adam(0.0);
    assert!(c.validate().is_err());
    let mut c = TrainConfig::preset(ProblemId::Toy);
    c.net.output_dim = 2;
    assert!(c.validate().is_err());
    for id in ProblemId::ALL {
        TrainConfig::preset(id).validate().unwrap();
    }
}

#[test]
fn grid_evaluation() {
    let net = MlpConfig::new(2, 2, 5, 1, Activation::Sigmoid).unwrap();
    let space = [Axis::new(0.0, 0.1, 10)];
    let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    let z = evaluate_on_grid(&net, ParamVector::zeros(&net).as_slice(), &space, &times).unwrap();
    assert_eq!(z.fields[0].len(), 100);
    assert!(z.fields[0].iter().all(|&v| v == 0.0));
    let p = init(&net, 1);
    let g = evaluate_on_grid(&net, p.as_slice(), &space, &times).unwrap();
    for ti in 0..10 {
        for i in 0..10 {
            let want = eval_point(&net, p.as_slice(), &[space[0].coord(i), times[ti]]).unwrap()[0];
            assert!((g.at(0, ti, &[i]) - want).abs() <= 1e-13);
        }
    }
    let r = Rmse::between(&g, &z).unwrap();
    assert_eq!(r.all, Rmse::between(&z, &g).unwrap().all);
}

#[test]
fn reference_grids_line_up() {
    for id in ProblemId::ALL {
        let p = PdeProblem::preset(id);
        let r = references(&p, 4).unwrap();
        let n = r.space.iter().map(|a| a.count).product::<usize>() * r.times.len();
        for g in r.oracle.iter().chain(&r.fd) {
            assert_eq!(g.fields[0].len(), n, "{id}");
            assert_eq!(g.n_fields(), p.fields());
        }
        assert!(r.oracle.is_some() || r.fd.is_some());
    }
}
