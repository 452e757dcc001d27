//! Long-running randomized audits, excluded from the default run:
//!
//!     cargo test -p toral --test stress --release -- --ignored
//!
//! Each audit pits a structural algorithm against an independent brute-force
//! oracle over thousands of random instances.

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use toral::census::{enumerate_functional_graph, orbit_counts};
use toral::order::{matrix_order, order_via_mgcd, Invariant2x2};
use toral::pretail::{kernel_chain, pretail_tree};
use toral::ring::{IntMatrix, LatticeSpec, ResidueMatrix};
use toral::symmetry::{
    brute_force_reversible, reversible_mod_n, symmetry_group_elements, RevVerdict,
};

fn random_matrix(rng: &mut StdRng, d: usize, bound: i64) -> IntMatrix {
    let entries: Vec<i64> = (0..d * d).map(|_| rng.gen_range(-bound..=bound)).collect();
    IntMatrix::new(d, entries).unwrap()
}

fn gl2_mod_n(n: u64) -> Vec<ResidueMatrix> {
    let spec = LatticeSpec::new(2, n).unwrap();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let m = ResidueMatrix::from_u64(vec![a, b, c, d], spec).unwrap();
                    if m.is_invertible() {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

#[test]
#[ignore = "long randomized audit"]
fn censuses_match_enumeration_broadly() {
    let mut rng = StdRng::seed_from_u64(0xa0d1_0001);
    for trial in 0..3000 {
        let d = if trial % 5 == 0 { 3 } else { 2 };
        let n = rng.gen_range(1..=if d == 2 { 40u64 } else { 12 });
        let m = random_matrix(&mut rng, d, 50).reduce(n).unwrap();
        let fast = orbit_counts(&m).unwrap();
        let graph = enumerate_functional_graph(&m, 1 << 22).unwrap();
        assert_eq!(&fast, graph.census(), "census of {m} (trial {trial})");
    }
}

#[test]
#[ignore = "long randomized audit"]
fn orders_match_naive_iteration_broadly() {
    let mut rng = StdRng::seed_from_u64(0xa0d1_0002);
    let mut done = 0;
    while done < 3000 {
        let d = if done % 4 == 0 { 3 } else { 2 };
        let n = rng.gen_range(2..=200u64);
        let m = random_matrix(&mut rng, d, 30).reduce(n).unwrap();
        if !m.is_invertible() {
            continue;
        }
        done += 1;
        let fast = matrix_order(&m).unwrap();
        // complete minimality certificate: M^fast = 1 and M^(fast/q) != 1
        // for every prime q | fast (any smaller order would divide one of
        // the maximal proper divisors)
        assert!(m.pow(fast).is_identity(), "M^ord = 1 for {m}");
        for (q, _) in toral::arith::factor(u64::try_from(fast).unwrap()) {
            assert!(
                !m.pow(fast / q as u128).is_identity(),
                "order of {m} is not minimal at divisor /{q}"
            );
        }
        // and plain iteration for small orders
        if fast <= 200_000 {
            let mut x = m.clone();
            let mut naive = 0u128;
            for k in 1..=200_000u128 {
                if x.is_identity() {
                    naive = k;
                    break;
                }
                x = x.mul(&m).unwrap();
            }
            assert_eq!(fast, naive, "order of {m}");
        }
        if d == 2 {
            let mi = m.lift_int();
            let inv = Invariant2x2::of(&mi);
            if toral::arith::gcd(toral::arith::reduce_i128(inv.det as i128, n), n) == 1 {
                assert_eq!(order_via_mgcd(&mi, n).unwrap(), fast, "mgcd route of {m}");
            }
        }
    }
}

#[test]
#[ignore = "long randomized audit"]
fn mgcd_route_matches_direct_order_exhaustively() {
    // every matrix with entries below 8, against moduli rich in small prime
    // powers (where the period shortcut has its edge cases)
    for n in [4u64, 8, 9, 12, 16, 24, 27, 141] {
        for a in 0..8i64 {
            for b in 0..8i64 {
                for c in 0..8i64 {
                    for d in 0..8i64 {
                        let m = IntMatrix::new(2, vec![a, b, c, d]).unwrap();
                        let inv = Invariant2x2::of(&m);
                        let det_mod = toral::arith::reduce_i128(inv.det as i128, n);
                        if toral::arith::gcd(det_mod, n) != 1 {
                            continue;
                        }
                        let direct = matrix_order(&m.reduce(n).unwrap()).unwrap();
                        let via = order_via_mgcd(&m, n).unwrap();
                        assert_eq!(via, direct, "[[{a},{b}],[{c},{d}]] mod {n}");
                    }
                }
            }
        }
    }
}

#[test]
#[ignore = "long randomized audit"]
fn reversibility_matches_group_scans_broadly() {
    let mut rng = StdRng::seed_from_u64(0xa0d1_0003);
    for n in 2..=13u64 {
        let group = gl2_mod_n(n);
        let mut done = 0;
        while done < 40 {
            let m = random_matrix(&mut rng, 2, 25);
            let Ok(report) = reversible_mod_n(&m, n, 1 << 24) else {
                continue;
            };
            done += 1;
            assert_ne!(report.verdict, RevVerdict::Undecided);
            let brute = brute_force_reversible(&m.reduce(n).unwrap(), &group);
            assert_eq!(
                report.verdict == RevVerdict::Reversible,
                brute,
                "{m} mod {n}"
            );
            if let Some(r) = &report.reversor {
                let mn = m.reduce(n).unwrap();
                assert_eq!(
                    r.mul(&mn).unwrap().mul(&r.inverse().unwrap()).unwrap(),
                    mn.inverse().unwrap()
                );
            }
        }
    }
}

#[test]
#[ignore = "long randomized audit"]
fn pretail_trees_match_graph_trees_broadly() {
    let mut rng = StdRng::seed_from_u64(0xa0d1_0004);
    let mut done = 0;
    while done < 800 {
        let n = rng.gen_range(2..=30u64);
        let m = random_matrix(&mut rng, 2, 40).reduce(n).unwrap();
        if m.is_invertible() {
            continue;
        }
        done += 1;
        let tree = pretail_tree(&m, 1 << 22).unwrap();
        let graph = enumerate_functional_graph(&m, 1 << 22).unwrap();
        let zero = graph.index_of(&vec![0; 2]);
        assert_eq!(
            tree.canonical_code(),
            graph.tree_code_at(zero),
            "tree at 0 of {m}"
        );
        // the chain length statistics agree with the graph depths
        let chain = kernel_chain(&m);
        let (max_pretail, _) = graph.minimal_exponents();
        assert_eq!(chain.m_stable, max_pretail, "stabilisation index of {m}");
        assert_eq!(
            BigUint::from(tree.len() as u64),
            chain.sizes.last().unwrap().clone()
        );
    }
}

#[test]
#[ignore = "long randomized audit"]
fn symmetry_orders_match_exhaustive_scans_broadly() {
    let mut rng = StdRng::seed_from_u64(0xa0d1_0005);
    for n in 2..=9u64 {
        let spec = LatticeSpec::new(2, n).unwrap();
        for _ in 0..25 {
            let m = random_matrix(&mut rng, 2, 20).reduce(n).unwrap();
            let fast = symmetry_group_elements(&m, 1 << 24).unwrap().len();
            let mut slow = 0usize;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let x = ResidueMatrix::from_u64(vec![a, b, c, d], spec).unwrap();
                            if x.is_invertible() && x.mul(&m).unwrap() == m.mul(&x).unwrap() {
                                slow += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(fast, slow, "commutant units of {m} mod {n}");
        }
    }
}
