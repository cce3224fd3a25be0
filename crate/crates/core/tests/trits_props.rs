use cmdual_core::trits::{
    add_with_carry, coset_leaders, coset_of, exponent_modulus, residue, wt_sum_eq, wt_sum_plus2,
    TernaryIndex,
};
use proptest::prelude::*;

fn index(n: u32) -> impl Strategy<Value = TernaryIndex> {
    (0..exponent_modulus(n)).prop_map(move |v| TernaryIndex::new(v, n).unwrap())
}

fn index_pair() -> impl Strategy<Value = (TernaryIndex, TernaryIndex)> {
    (2u32..=20).prop_flat_map(|n| (index(n), index(n)))
}

proptest! {
    #[test]
    fn complement_weight(j in (2u32..=38).prop_flat_map(index)) {
        if j.value() != 0 {
            prop_assert_eq!(j.weight() + j.neg().weight(), 2 * j.n());
        }
    }

    #[test]
    fn sigma_is_power_of_two(j in (2u32..=38).prop_flat_map(index)) {
        prop_assert_eq!(j.sigma(), 1u64 << j.n2());
    }

    #[test]
    fn carry_relation_holds((r, s) in index_pair()) {
        let (t, c) = add_with_carry(&r, &s);
        let n = r.n() as usize;
        let (rd, sd, td) = (r.digits(), s.digits(), t.digits());
        for i in 0..n {
            let prev = c.bits[(i + n - 1) % n];
            prop_assert_eq!(td[i] + 3 * c.bits[i], rd[i] + sd[i] + prev);
        }
        prop_assert_eq!(r.weight() + s.weight(), t.weight() + 2 * c.weight());
        prop_assert_eq!(t, r.add(&s));
    }

    #[test]
    fn rotation_preserves_weight_and_coset(j in (2u32..=20).prop_flat_map(index), m in 0u32..40) {
        let r = j.rotate(m);
        prop_assert_eq!(r.weight(), j.weight());
        prop_assert!(coset_of(j.value(), j.n()).contains(r.value()));
    }

    #[test]
    fn residue_wraps(v in -10_000i128..10_000, n in 2u32..=9) {
        let m = exponent_modulus(n) as i128;
        prop_assert_eq!(residue(v, n).value() as i128, v.rem_euclid(m));
    }
}

// The two digit predicates decide the two weight identities, exhaustively.
#[test]
fn digit_predicates_match_weights_exhaustive() {
    for n in 2..=4 {
        let m = exponent_modulus(n);
        for r in 0..m {
            for s in 0..m {
                let (r, s) = (
                    TernaryIndex::new(r, n).unwrap(),
                    TernaryIndex::new(s, n).unwrap(),
                );
                let lhs = r.weight() + s.weight();
                let t = r.add(&s).weight();
                assert_eq!(wt_sum_eq(&r, &s), lhs == t, "{r} + {s}");
                assert_eq!(wt_sum_plus2(&r, &s), lhs == t + 2, "{r} + {s}");
            }
        }
    }
}

#[test]
fn cosets_partition_exponents() {
    for n in 2..=7 {
        let m = exponent_modulus(n);
        let mut seen = vec![false; m as usize];
        let mut total = 0;
        for leader in coset_leaders(n) {
            let c = coset_of(leader, n);
            assert_eq!(c.leader, leader);
            for &x in &c.members {
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
            }
            total += c.len();
        }
        assert_eq!(total as u64, m);
    }
}
