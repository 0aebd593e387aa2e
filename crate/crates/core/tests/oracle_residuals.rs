use pinnbench_core::oracles::{oracle_for, oracle_residual};
use pinnbench_core::problems::{PdeProblem, ProblemId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn worst_residual(id: ProblemId, n: usize) -> f64 {
    // Steps stay well inside the 5% margin of the shortest axis.
    let h = match id {
        ProblemId::Burgers | ProblemId::Heat2d => 1e-3,
        _ => 1e-2,
    };
    let problem = PdeProblem::preset(id);
    let oracle = oracle_for(&problem).expect("has oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let p: Vec<f64> = (0..problem.domain.dim())
            .map(|a| {
                let iv = problem.domain.axis(a);
                rng.gen_range(iv.lo + 0.05 * iv.width()..iv.hi - 0.05 * iv.width())
            })
            .collect();
        for r in oracle_residual(&problem, &oracle, &p, h).unwrap() {
            worst = worst.max(r.abs());
        }
    }
    worst
}

#[test]
fn every_oracle_solves_its_pde() {
    for id in [ProblemId::Toy, ProblemId::Burgers, ProblemId::Heat2d, ProblemId::Kdv, ProblemId::ExpOde] {
        let w = worst_residual(id, 100);
        assert!(w <= 1e-6, "{}: worst residual {w:e}", id.name());
    }
}

#[test]
fn problems_without_oracle() {
    for id in [ProblemId::Fisher, ProblemId::Turing1, ProblemId::Turing2] {
        assert!(oracle_for(&PdeProblem::preset(id)).is_none());
    }
}
