//! Properties of kernels, sets and the recursion engines.

mod common;

use germlab::engine::{clamped_pair_iteration, laplace_local_time, ClampOptions};
use germlab::orders::{compare_germ, Relation};
use germlab::rational::{q, Q};
use germlab::scalar::{Exact, Scalar};
use germlab::statespace::{build_lattice, build_tree, space_time_lift, Boundary, SpaceTimeSet};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use common::dist_strategy;

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Kill), Just(Boundary::Reflect)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_substochastic(d in 1usize..=2, r in 1i32..=6, b in boundary(), h in 1u32..=5) {
        let k = build_lattice(d, r, b).unwrap();
        k.audit().unwrap();
        for x in 0..k.len() {
            let total: Q = k.transitions(x).iter().map(|(_, p)| p.clone()).sum::<Q>() + k.killed(x);
            prop_assert_eq!(total, Q::one());
        }
        space_time_lift(&k, h).audit().unwrap();
        build_tree(2, r as u32, b).unwrap().audit().unwrap();
    }

    #[test]
    fn set_membership_is_pure(r in 1i32..=6, c in -6i64..=6, n in 0u32..=10) {
        let k = build_lattice(1, r, Boundary::Kill).unwrap();
        let set = SpaceTimeSet::halfspace(&k, c).unwrap();
        for x in 0..k.len() {
            prop_assert_eq!(set.contains(x, n), set.contains(x, n));
            prop_assert_eq!(set.contains(x, n), k.first_coordinate(x).unwrap() >= c);
        }
    }

    #[test]
    fn laplace_fields_are_bounded_and_decrease(d in dist_strategy(), r in 1i32..=6, t in 1i64..=10) {
        let k = build_lattice(1, r, Boundary::Kill).unwrap();
        let set = SpaceTimeSet::origin(&k);
        let fields = laplace_local_time::<f64>(&k, &d, &set, &q(t, 10), 12).unwrap();
        for f in &fields {
            prop_assert!(f.within_bounds());
        }
        for w in fields.windows(2) {
            for x in 0..k.len() {
                prop_assert!(*w[1].get(x) <= w[0].get(x) + 1e-12);
            }
        }
    }

    #[test]
    fn exact_and_float_agree(d in dist_strategy(), r in 1i32..=4, t in 1i64..=10) {
        let k = build_lattice(1, r, Boundary::Kill).unwrap();
        let set = SpaceTimeSet::origin(&k);
        let f = laplace_local_time::<f64>(&k, &d, &set, &q(t, 10), 8).unwrap();
        let e = laplace_local_time::<Exact>(&k, &d, &set, &q(t, 10), 8).unwrap();
        // Float roundoff grows by at most the pgf's Lipschitz constant, the mean, per generation.
        let m = d.mean().to_f64().unwrap().max(1.0);
        for (n, (a, b)) in f.iter().zip(&e).enumerate() {
            let tol = 1e-13 * (n + 1) as f64 * m.powi(n as i32);
            for x in 0..k.len() {
                let v = b.get(x);
                prop_assert!(v.lo() <= v.hi());
                prop_assert!((a.get(x) - v.to_f64()).abs() <= tol);
            }
        }
    }

    #[test]
    fn clamped_runs_keep_the_chain(mu in dist_strategy(), nu in dist_strategy(), r in 1i32..=6) {
        let (mu, nu) = match compare_germ(&mu, &nu).relation {
            Relation::Less => (mu, nu),
            Relation::Greater => (nu, mu),
            _ => return Ok(()),
        };
        let k = build_lattice(1, r, Boundary::Kill).unwrap();
        let set = SpaceTimeSet::origin(&k);
        let run = clamped_pair_iteration::<f64>(&k, &mu, &nu, &set, 40, &ClampOptions::default()).unwrap();
        prop_assert!(run.passed(), "chain {:?} ordering {:?}", run.chain, run.ordering);
        for report in [&run.f, &run.g] {
            for w in report.iterates.windows(2) {
                for x in 0..k.len() {
                    prop_assert!(*w[1].1.get(x) <= w[0].1.get(x) + 1e-12);
                }
            }
        }
        let alpha = run.alpha.alpha_f64();
        for ((_, f), (_, g)) in run.f.iterates.iter().zip(&run.g.iterates) {
            for x in 0..k.len() {
                prop_assert!(alpha - 1e-12 <= *g.get(x) && *g.get(x) <= f.get(x) + 1e-12 && *f.get(x) <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn exact_ordering_certified_for_a_shipped_pair() {
    let k = build_lattice(1, 6, Boundary::Kill).unwrap();
    let set = SpaceTimeSet::origin(&k);
    let mu = "{1:1}".parse().unwrap();
    let nu = "{0:1/4,2:3/4}".parse().unwrap();
    let run = clamped_pair_iteration::<Exact>(&k, &mu, &nu, &set, 30, &ClampOptions::default()).unwrap();
    assert_eq!(run.alpha.alpha, q(1, 3));
    assert!(run.passed());
    assert_eq!(run.chain.undecided + run.ordering.undecided, 0);
    assert!(run.g.last().values.iter().all(|v| v.lo() >= &q(1, 3)));
    assert!(run.f.last().values.iter().all(|v| v.hi() <= &Q::one() && v.lo() >= &Q::zero()));
}

/// Pointwise decrease does not make the step sizes decrease: here the no-visit
/// front spreads outwards and later steps move more mass than earlier ones.
#[test]
fn sup_norm_steps_can_grow() {
    let k = build_lattice(1, 5, Boundary::Kill).unwrap();
    let set = SpaceTimeSet::origin(&k);
    let mu = "{0:1}".parse().unwrap();
    let nu = "{2:1}".parse().unwrap();
    let run = clamped_pair_iteration::<f64>(&k, &mu, &nu, &set, 40, &ClampOptions::default()).unwrap();
    assert!(run.passed());
    assert!(!run.g.deltas_nonincreasing(1e-12));
    assert!(run.g.converged);
}

