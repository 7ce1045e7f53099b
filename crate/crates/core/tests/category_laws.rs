//! Category and monoidal laws on random finite instances, checked with
//! exact rational equality against independent oracles where one exists.

mod common;

use common::{assert_row_stochastic, random_dist, random_kernel, random_space, rng};
use kernelcat::finite::{
    compose, graph, pushforward, Dist, FiniteSpace, Joint, Kernel,
};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Entry-level oracle for a two-step composite: the explicit double sum
/// `Σ_y Σ_w T(y|x)·V(w|y)·W(z|w)`, written without going through `compose`.
fn double_sum_oracle(w: &Kernel, v: &Kernel, t: &Kernel) -> Vec<Vec<BigRational>> {
    let nx = t.domain().len();
    let nz = w.codomain().len();
    let mut out = vec![vec![BigRational::zero(); nz]; nx];
    for (x, row) in out.iter_mut().enumerate() {
        for (z, slot) in row.iter_mut().enumerate() {
            let mut total = BigRational::zero();
            for y in 0..t.codomain().len() {
                for mid in 0..v.codomain().len() {
                    total += t.row(x).weight(y) * v.row(y).weight(mid) * w.row(mid).weight(z);
                }
            }
            *slot = total;
        }
    }
    out
}

#[test]
fn composition_is_associative_and_matches_the_double_sum() {
    let mut rng = rng(42);
    for trial in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let z = random_space(&mut rng, "Z", 5);
        let w_space = random_space(&mut rng, "W", 5);
        let t = random_kernel(&mut rng, &x, &y);
        let v = random_kernel(&mut rng, &y, &z);
        let w = random_kernel(&mut rng, &z, &w_space);

        let left = compose(&w, &compose(&v, &t).unwrap()).unwrap();
        let right = compose(&compose(&w, &v).unwrap(), &t).unwrap();
        assert_eq!(left, right, "bracketing differed on trial {trial}");
        assert_row_stochastic(&left);

        let oracle = double_sum_oracle(&w, &v, &t);
        for (xi, row) in oracle.iter().enumerate() {
            for (zi, value) in row.iter().enumerate() {
                assert_eq!(left.row(xi).weight(zi), value);
            }
        }
    }
}

#[test]
fn identities_are_neutral() {
    let mut rng = rng(43);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let t = random_kernel(&mut rng, &x, &y);
        assert_eq!(compose(&t, &Kernel::identity(x.clone())).unwrap(), t);
        assert_eq!(compose(&Kernel::identity(y.clone()), &t).unwrap(), t);
    }
}

#[test]
fn pushforward_preserves_total_mass() {
    let mut rng = rng(44);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let p = random_dist(&mut rng, &x);
        let t = random_kernel(&mut rng, &x, &y);
        let q = pushforward(&p, &t).unwrap();
        let total: BigRational = q.weights().iter().cloned().sum();
        assert!(total.is_one());
    }
}

#[test]
fn tensor_swap_symmetry() {
    let mut rng = rng(45);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let p = random_dist(&mut rng, &x);
        let q = random_dist(&mut rng, &y);
        let pq = Joint::independent(&p, &q).unwrap();
        let qp = Joint::independent(&q, &p).unwrap();
        for (xi, xa) in x.atoms().iter().enumerate() {
            for ya in y.atoms() {
                let _ = xi;
                assert_eq!(
                    pq.weight_of(&[xa, ya]).unwrap(),
                    qp.weight_of(&[ya, xa]).unwrap()
                );
            }
        }
    }
}

#[test]
fn tensor_associativity_up_to_retupling() {
    let mut rng = rng(46);
    for _ in 0..60 {
        let x = random_space(&mut rng, "X", 4);
        let y = random_space(&mut rng, "Y", 4);
        let z = random_space(&mut rng, "Z", 4);
        let p = random_dist(&mut rng, &x);
        let q = random_dist(&mut rng, &y);
        let r = random_dist(&mut rng, &z);

        // (p ⊗ q) ⊗ r, flattened over [X, Y, Z].
        let pq = Joint::independent(&p, &q).unwrap();
        let constant_r = Kernel::new(
            pq.space().as_space().clone(),
            z.clone(),
            vec![r.clone(); pq.space().as_space().len()],
        )
        .unwrap();
        let left = pq.extend(&constant_r).unwrap();

        // p ⊗ (q ⊗ r); lexicographic atom order makes the weights line up.
        let qr = Joint::independent(&q, &r).unwrap();
        let right = Joint::independent(&p, qr.dist()).unwrap();
        assert_eq!(left.dist().weights(), right.dist().weights());
    }
}

#[test]
fn joint_marginals_recover_prior_and_pushforward() {
    let mut rng = rng(47);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let prior = random_dist(&mut rng, &x);
        let h = random_kernel(&mut rng, &x, &y);
        let joint = Joint::from_prior_and_kernel(&prior, &h).unwrap();
        assert_eq!(joint.marginal(0).unwrap(), prior);
        assert_eq!(joint.marginal(1).unwrap(), pushforward(&prior, &h).unwrap());
    }
}

/// Pulling an expectation back through a deterministic kernel: for every
/// atom indicator φ, `E_{pushforward}(φ) = E_p(φ ∘ f)`.
#[test]
fn pushforward_expectations_pull_back() {
    let mut rng = rng(48);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let p = random_dist(&mut rng, &x);
        // Random function table x ↦ y.
        use rand::Rng;
        let table: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..y.len())).collect();
        let f = Kernel::deterministic_with(x.clone(), y.clone(), |atom| {
            let xi = x.index_of(atom).unwrap();
            y.atom(table[xi]).to_owned()
        })
        .unwrap();
        let pushed = pushforward(&p, &f).unwrap();
        for target in 0..y.len() {
            let indicator: Vec<BigRational> = (0..y.len())
                .map(|i| {
                    if i == target {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            let composed: Vec<BigRational> = (0..x.len())
                .map(|xi| indicator[table[xi]].clone())
                .collect();
            assert_eq!(pushed.expectation(&indicator), p.expectation(&composed));
        }
    }
}

#[test]
fn graph_kernel_laws_on_random_conditionals() {
    let mut rng = rng(49);
    for _ in 0..120 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let q = random_kernel(&mut rng, &x, &y);
        let (product, gamma) = graph(&q).unwrap();
        assert_row_stochastic(&gamma);
        let onto_x = gamma.then(&product.projection(0).unwrap()).unwrap();
        let onto_y = gamma.then(&product.projection(1).unwrap()).unwrap();
        assert_eq!(onto_x, Kernel::identity(x.clone()));
        assert_eq!(onto_y, q);
    }
}

#[test]
fn every_engine_output_stays_row_stochastic() {
    let mut rng = rng(50);
    for _ in 0..100 {
        let x = random_space(&mut rng, "X", 5);
        let y = random_space(&mut rng, "Y", 5);
        let z = random_space(&mut rng, "Z", 5);
        let t = random_kernel(&mut rng, &x, &y);
        let u = random_kernel(&mut rng, &y, &z);
        assert_row_stochastic(&compose(&u, &t).unwrap());
        let (_, gamma) = graph(&t).unwrap();
        assert_row_stochastic(&gamma);
        let prior = random_dist(&mut rng, &x);
        let joint = Joint::from_prior_and_kernel(&prior, &t).unwrap();
        let total: BigRational = joint.dist().weights().iter().cloned().sum();
        assert!(total.is_one());
    }
}

/// A dirac prior pushed through a kernel reads off that kernel's row; the
/// particular values here are the worked two-urn table.
#[test]
fn urn_fixture_reproduces_published_fractions() {
    let u = FiniteSpace::new_plain("U", ["u1", "u2"]).unwrap();
    let b = FiniteSpace::new_plain("B", ["b", "r"]).unwrap();
    let s = Kernel::from_rows(
        u.clone(),
        b,
        vec![
            vec![common::rational(2, 5), common::rational(3, 5)],
            vec![common::rational(3, 4), common::rational(1, 4)],
        ],
    )
    .unwrap();
    let from_u1 = pushforward(&Dist::dirac(u, "u1").unwrap(), &s).unwrap();
    assert_eq!(
        from_u1.weights(),
        &[common::rational(2, 5), common::rational(3, 5)]
    );
}
