use num_bigint::BigInt;
use proptest::prelude::*;
use vmrt_core::certify::{certify_structural, AxiomSet};
use vmrt_core::divisibility::{check_pair, gd_bound_checked, gd_bound_checked_to, verify_witness, AggregateStatus, PairStatus};
use vmrt_core::families::{build_family, FamilyExpr, SpaceSpec};
use vmrt_core::linalg::{canonical_cmp, normalized_vectors};
use vmrt_core::ring::{verify_ring_axioms, Element, GradedRingModel};
use vmrt_core::splitting::{normalize_splitting_type, splitting_verdict, whitney_product, SplitStatus, WhitneyPair};

fn leaf() -> impl Strategy<Value = FamilyExpr> {
    prop_oneof![
        (1usize..=4).prop_map(FamilyExpr::proj),
        prop::sample::select(vec![1usize, 3, 5]).prop_map(|m| FamilyExpr::QuadricOdd { m }),
        prop::sample::select(vec![2usize, 4, 6]).prop_map(|m| FamilyExpr::QuadricEven { m }),
        (2usize..=4).prop_map(|m| FamilyExpr::Veronese2 { m }),
        (1usize..=3, prop::collection::vec(-2i64..=2, 2..=3))
            .prop_map(|(m, twists)| FamilyExpr::split_bundle_over_proj(m, &twists)),
    ]
}

/// Small expressions: leaves and products of two leaves, cutoff at most 8.
fn small_expr() -> impl Strategy<Value = FamilyExpr> {
    prop_oneof![
        3 => leaf(),
        1 => (leaf(), leaf()).prop_map(|(a, b)| FamilyExpr::product(a, b)),
    ]
    .prop_filter("cutoff <= 8", |e| e.ranks().len() <= 9)
}

fn coords(len: usize) -> impl Strategy<Value = Vec<BigInt>> {
    prop::collection::vec((-3i64..=3).prop_map(BigInt::from), len)
}

/// A ring together with three random elements in degrees `i`, `i`, `j`.
fn ring_with_elements() -> impl Strategy<Value = (GradedRingModel, Element, Element, Element)> {
    small_expr().prop_flat_map(|e| {
        let ring = build_family(&e).unwrap();
        let c = ring.cutoff();
        (Just(ring), 0..=c, 0..=c).prop_flat_map(|(ring, i, j)| {
            let (ri, rj) = (ring.rank(i), ring.rank(j));
            (Just(ring), Just(i), Just(j), coords(ri), coords(ri), coords(rj)).prop_map(|(ring, i, j, a, b, z)| {
                let x = ring.element(i, a).unwrap();
                let y = ring.element(i, b).unwrap();
                let z = ring.element(j, z).unwrap();
                (ring, x, y, z)
            })
        })
    })
}

fn poly_mul(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructed_models_satisfy_ring_axioms(e in small_expr()) {
        let ring = build_family(&e).unwrap();
        prop_assert!(verify_ring_axioms(&ring).is_empty());
        prop_assert_eq!(ring.ranks().to_vec(), e.ranks());
    }

    #[test]
    fn ranks_are_palindromic(e in small_expr()) {
        let r = e.ranks();
        let rev: Vec<usize> = r.iter().rev().copied().collect();
        prop_assert_eq!(r, rev);
    }

    #[test]
    fn product_ranks_multiply_poincare_polynomials(a in leaf(), b in leaf()) {
        let p = FamilyExpr::product(a.clone(), b.clone());
        prop_assert_eq!(p.ranks(), poly_mul(&a.ranks(), &b.ranks()));
        prop_assert_eq!(build_family(&p).unwrap().ranks().to_vec(), poly_mul(&a.ranks(), &b.ranks()));
    }

    #[test]
    fn bundle_ranks_multiply_by_fiber(m in 1usize..=4, twists in prop::collection::vec(-3i64..=3, 2..=4)) {
        let e = FamilyExpr::split_bundle_over_proj(m, &twists);
        let ring = build_family(&e).unwrap();
        let fiber = vec![1; twists.len()];
        prop_assert_eq!(ring.ranks().to_vec(), poly_mul(&vec![1; m + 1], &fiber));
    }

    #[test]
    fn multiplication_is_bilinear((ring, x, y, z) in ring_with_elements()) {
        let lhs = ring.mul(&ring.add(&x, &y).unwrap(), &z).unwrap();
        let rhs = ring.add(&ring.mul(&x, &z).unwrap(), &ring.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        let three = BigInt::from(3);
        prop_assert_eq!(ring.mul(&x.scale(&three), &z).unwrap(), ring.mul(&x, &z).unwrap().scale(&three));
        prop_assert_eq!(ring.mul(&x, &z).unwrap(), ring.mul(&z, &x).unwrap());
    }

    #[test]
    fn products_above_cutoff_vanish((ring, x, _y, z) in ring_with_elements()) {
        let p = ring.mul(&x, &z).unwrap();
        prop_assert_eq!(p.degree(), x.degree() + z.degree());
        if p.degree() > ring.cutoff() {
            prop_assert!(p.is_zero());
            prop_assert!(p.coeffs().is_empty());
        }
    }

    #[test]
    fn ring_json_round_trips(e in small_expr()) {
        let ring = build_family(&e).unwrap();
        let text = ring.to_json();
        let back = GradedRingModel::from_json(&text).unwrap();
        prop_assert_eq!(&back, &ring);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(FamilyExpr::from_json(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn refutations_are_sound_and_small_ranks_exact(e in small_expr()) {
        let ring = build_family(&e).unwrap();
        let c = ring.cutoff();
        for i in 0..=c {
            for j in i..=c {
                let v = check_pair(&ring, i, j, 2).unwrap();
                if let Some(w) = &v.witness {
                    prop_assert_eq!(v.status, PairStatus::Refuted);
                    prop_assert_eq!((w.x.degree(), w.y.degree()), (i, j));
                    verify_witness(&ring, &w.x, &w.y).unwrap();
                } else {
                    prop_assert_ne!(v.status, PairStatus::Refuted);
                }
                if ring.rank(i).min(ring.rank(j)) <= 2 {
                    prop_assert_ne!(v.status, PairStatus::Unknown);
                }
            }
        }
    }

    #[test]
    fn aggregate_bound_is_monotone(e in small_expr()) {
        let ring = build_family(&e).unwrap();
        let full = gd_bound_checked(&ring, 2).unwrap();
        if let Some(d) = full.refuted_at() {
            prop_assert!(full.certified_up_to < d);
        }
        for r in 0..=full.certified_up_to.min(ring.cutoff()) {
            let sub = gd_bound_checked_to(&ring, r, 2).unwrap();
            prop_assert_eq!(sub.status, AggregateStatus::CertifiedUpTo(r));
        }
    }

    #[test]
    fn checker_never_refutes_below_checked_certificate(e in small_expr()) {
        let ring = build_family(&e).unwrap();
        let cert = certify_structural(&e, AxiomSet::Checked).unwrap();
        let v = gd_bound_checked(&ring, 2).unwrap();
        if let Some(d) = v.refuted_at() {
            prop_assert!(d > cert.bound, "{} refuted at {} but certified {}", e, d, cert.bound);
        }
    }

    #[test]
    fn whitney_product_is_symmetric((ring, x, y, _z) in ring_with_elements(), seed in coords(64)) {
        // components in degrees 1 and 2 drawn from the seed
        let _ = (x, y);
        let mut it = seed.into_iter();
        let mut comp = |d: usize| {
            let v: Vec<BigInt> = it.by_ref().take(ring.rank(d)).collect();
            ring.element(d, v).unwrap()
        };
        let len = ring.cutoff().min(2);
        let first: Vec<Element> = (1..=len).map(&mut comp).collect();
        let second: Vec<Element> = (1..=len.min(1)).map(&mut comp).collect();
        let pair = WhitneyPair { first, second };
        prop_assert_eq!(whitney_product(&ring, &pair).unwrap(), whitney_product(&ring, &pair.swapped()).unwrap());
    }

    #[test]
    fn splitting_type_normalization(raw in prop::collection::vec(-5i64..=5, 1..=6), perm_seed in any::<u64>()) {
        let t = normalize_splitting_type(&raw).unwrap();
        prop_assert_eq!(t.entries[0], 0);
        prop_assert!(t.entries.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(t.entries.iter().filter(|&&a| a == 0).count(), t.k);
        let again = normalize_splitting_type(&t.entries).unwrap();
        prop_assert_eq!(&again.entries, &t.entries);
        prop_assert_eq!(again.twist, 0);
        let mut shuffled = raw.clone();
        let n = shuffled.len();
        shuffled.rotate_left((perm_seed as usize) % n);
        shuffled.swap(0, (perm_seed as usize / 7) % n);
        prop_assert_eq!(normalize_splitting_type(&shuffled).unwrap(), t);
    }

    #[test]
    fn splitting_verdict_is_downward_closed(
        space in prop::sample::select(vec!["P,6", "Q,7", "Q,8", "G,2,6", "OG,2,9", "SG,1,7", "SGmax,5"]),
        rank in 1usize..=8,
        checked in any::<bool>(),
    ) {
        let space: SpaceSpec = space.parse().unwrap();
        let axioms = if checked { AxiomSet::Checked } else { AxiomSet::Paper };
        let v = splitting_verdict(&space, rank, axioms).unwrap();
        if v.status == SplitStatus::Splits {
            for lower in 1..rank {
                prop_assert_eq!(splitting_verdict(&space, lower, axioms).unwrap().status, SplitStatus::Splits);
            }
        }
    }
}

/// Brute force over all `x` of height at most `h`: the first annihilated `x`
/// in canonical order must be the one `check_pair` reports.
#[test]
fn bounded_search_is_complete_and_canonical() {
    let cases = [
        FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::proj(2)),
        FamilyExpr::product(FamilyExpr::proj(3), FamilyExpr::proj(3)),
        FamilyExpr::split_bundle_over_proj(3, &[2, 1, 1]),
        FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::quadric(4)),
    ];
    for e in &cases {
        let ring = build_family(e).unwrap();
        let c = ring.cutoff();
        for i in 0..=c {
            for j in i..=c {
                let (ri, rj) = (ring.rank(i), ring.rank(j));
                if ri.min(rj) < 3 || ring.rank(i + j) < ri.max(rj) {
                    continue;
                }
                let (dx, dy) = if rj < ri { (j, i) } else { (i, j) };
                let brute = normalized_vectors(ring.rank(dx), 2).into_iter().find(|x| {
                    let m = ring.multiplication_matrix(dx, x, dy);
                    vmrt_core::linalg::rank(&m) < ring.rank(dy)
                });
                let v = check_pair(&ring, i, j, 2).unwrap();
                match brute {
                    None => assert_eq!(v.status, PairStatus::Unknown, "{e} ({i},{j})"),
                    Some(x) => {
                        let w = v.witness.expect("search must find the brute-force witness");
                        let found = if dx == i { w.x } else { w.y };
                        assert_eq!(canonical_cmp(found.coeffs(), &x), std::cmp::Ordering::Equal, "{e} ({i},{j})");
                    }
                }
            }
        }
    }
}
