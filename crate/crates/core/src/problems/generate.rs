//! Deterministic benchmark instance generators.
//!
//! All randomness flows from a single 64-bit seed through ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). Integers in `[lo, hi]` are
//! drawn as `lo + next_u64() % (hi - lo + 1)`; the tiny modulo bias is
//! accepted so that the draw sequence is fully specified and reproducible
//! from the seed alone.
//!
//! Coefficient ranges:
//! - KP: per objective `n` profits in [1, 100] (stored negated, minimization
//!   form), then `n` weights in [1, 100]; capacity = ceil(total weight / 2).
//! - AP: `n` agents, `n^2` binaries; per objective row-major costs in
//!   [1, 20]; one `= 1` row per agent row and per task column.
//! - ILP: objectives in [-10, 10]; `m` constraint rows with coefficients in
//!   [0, 10] and rhs = ceil(0.5 * row sum of positive coefficients);
//!   variables integer in [0, 10].

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IntConstraint, ProblemClass, ProblemError, ProblemInstance};
use crate::ilp::Relation;

fn draw(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64
}

/// Deterministic instance for `(class, p, n, m, seed)`. `m` is the number of
/// constraints and applies to the ILP class only.
pub fn generate(
    class: ProblemClass,
    p: usize,
    n: usize,
    m: Option<usize>,
    seed: u64,
) -> Result<ProblemInstance, ProblemError> {
    if p < 2 {
        return Err(ProblemError::Invalid(
            "at least 2 objectives required".into(),
        ));
    }
    if n == 0 {
        return Err(ProblemError::Invalid("n must be positive".into()));
    }
    match class {
        ProblemClass::Ilp => {
            if m.is_none() {
                return Err(ProblemError::Invalid(
                    "ILP requires a constraint count m".into(),
                ));
            }
        }
        _ => {
            if m.is_some() {
                return Err(ProblemError::Invalid(format!("{class} does not take m")));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match class {
        ProblemClass::Kp => {
            let objectives: Vec<Vec<i64>> = (0..p)
                .map(|_| (0..n).map(|_| -draw(&mut rng, 1, 100)).collect())
                .collect();
            let weights: Vec<i64> = (0..n).map(|_| draw(&mut rng, 1, 100)).collect();
            let total: i64 = weights.iter().sum();
            let capacity = (total + 1) / 2;
            ProblemInstance {
                name: format!("KP_p{p}_n{n}_s{seed}"),
                class,
                p,
                n,
                objectives,
                constraints: vec![IntConstraint {
                    coeffs: weights,
                    relation: Relation::Le,
                    rhs: capacity,
                }],
                domains: vec![(0, 1); n],
            }
        }
        ProblemClass::Ap => {
            let agents = n;
            let vars = agents * agents;
            let objectives: Vec<Vec<i64>> = (0..p)
                .map(|_| (0..vars).map(|_| draw(&mut rng, 1, 20)).collect())
                .collect();
            let mut constraints = Vec::with_capacity(2 * agents);
            for i in 0..agents {
                let mut coeffs = vec![0i64; vars];
                for j in 0..agents {
                    coeffs[i * agents + j] = 1;
                }
                constraints.push(IntConstraint {
                    coeffs,
                    relation: Relation::Eq,
                    rhs: 1,
                });
            }
            for j in 0..agents {
                let mut coeffs = vec![0i64; vars];
                for i in 0..agents {
                    coeffs[i * agents + j] = 1;
                }
                constraints.push(IntConstraint {
                    coeffs,
                    relation: Relation::Eq,
                    rhs: 1,
                });
            }
            ProblemInstance {
                name: format!("AP_p{p}_n{agents}_s{seed}"),
                class,
                p,
                n: vars,
                objectives,
                constraints,
                domains: vec![(0, 1); vars],
            }
        }
        ProblemClass::Ilp => {
            let m = m.expect("checked above");
            if m == 0 {
                return Err(ProblemError::Invalid("m must be positive".into()));
            }
            let objectives: Vec<Vec<i64>> = (0..p)
                .map(|_| (0..n).map(|_| draw(&mut rng, -10, 10)).collect())
                .collect();
            let constraints: Vec<IntConstraint> = (0..m)
                .map(|_| {
                    let coeffs: Vec<i64> = (0..n).map(|_| draw(&mut rng, 0, 10)).collect();
                    let positive: i64 = coeffs.iter().filter(|&&c| c > 0).sum();
                    IntConstraint {
                        coeffs,
                        relation: Relation::Le,
                        rhs: (positive + 1) / 2,
                    }
                })
                .collect();
            ProblemInstance {
                name: format!("ILP_p{p}_n{n}_m{m}_s{seed}"),
                class,
                p,
                n,
                objectives,
                constraints,
                domains: vec![(0, 10); n],
            }
        }
    };
    inst.validate()?;
    Ok(inst)
}
