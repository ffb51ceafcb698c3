use proptest::prelude::*;
use pulseforge::designs::{
    cyclic_difference_scheme, is_normal_form, normalize_oa, product_mixed, product_oa, rao_hamming_oa, smallest_oa_for,
    verify_difference_scheme, verify_mixed, verify_oa, DesignFile, FiniteGroup,
};
use pulseforge::gf::{self, FieldSpec};

/// Schoolbook polynomial product reduced by the field modulus, as an oracle
/// for the table-driven multiplication.
fn poly_mul(f: &FieldSpec, a: u32, b: u32) -> u32 {
    let p = f.characteristic();
    let k = f.degree() as usize;
    let (x, y) = (f.coeffs(a), f.coeffs(b));
    let mut prod = vec![0u32; 2 * k];
    for i in 0..k {
        for j in 0..k {
            prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
        }
    }
    let m = f.modulus();
    for deg in (k..2 * k).rev() {
        let lead = prod[deg];
        if lead != 0 {
            for (i, &mi) in m.iter().enumerate().take(k) {
                let idx = deg - k + i;
                prod[idx] = (prod[idx] + p * p - lead * mi % p) % p;
            }
            prod[deg] = 0;
        }
    }
    f.from_coeffs(&prod[..k])
}

#[test]
fn field_tables_agree_with_polynomial_arithmetic() {
    for q in [4u64, 8, 9, 16, 25, 27] {
        let f = FieldSpec::of_order(q).unwrap();
        for a in 0..q as u32 {
            for b in 0..q as u32 {
                assert_eq!(f.mul(a, b), poly_mul(&f, a, b), "GF({q}): {a}·{b}");
            }
        }
    }
}

#[test]
fn small_field_conventions() {
    let f4 = FieldSpec::of_order(4).unwrap();
    assert_eq!(f4.modulus(), &[1, 1, 1]);
    assert_eq!(f4.mul(2, 2), 3);
    let f9 = FieldSpec::of_order(9).unwrap();
    assert_eq!(f9.modulus(), &[1, 0, 1]);
    assert!(FieldSpec::of_order(6).is_err());
    assert_eq!(gf::prime_power(49), Some((7, 2)));
}

#[test]
fn rao_hamming_shapes() {
    for (s, i, rows, cols) in
        [(2u64, 2u32, 3usize, 4usize), (3, 2, 4, 9), (4, 2, 5, 16), (9, 2, 10, 81), (2, 4, 15, 16)]
    {
        let oa = rao_hamming_oa(s, i).unwrap();
        assert_eq!((oa.rows(), oa.columns()), (rows, cols));
        assert!(verify_oa(&oa).ok);
    }
}

#[test]
fn file_round_trips() {
    let oa = smallest_oa_for(6, 3).unwrap();
    let text = DesignFile::from(&oa).to_json().unwrap();
    let back = DesignFile::from_json(&text).unwrap().to_orthogonal_array().unwrap();
    assert_eq!(back, oa);

    let ds = cyclic_difference_scheme(7, 5).unwrap();
    let text = DesignFile::from(&ds).to_json().unwrap();
    let back = DesignFile::from_json(&text).unwrap().to_difference_scheme().unwrap();
    assert_eq!(back, ds);
    assert!(DesignFile::from_json(&text).unwrap().to_orthogonal_array().is_err());
}

#[test]
fn normalization_over_group_labels() {
    let group = FiniteGroup::zd_squared(3);
    let oa = rao_hamming_oa(9, 2).unwrap();
    let normal = normalize_oa(&oa, &group).unwrap();
    assert!(is_normal_form(&normal, &group));
    assert!(verify_oa(&normal).ok);
    assert!(normalize_oa(&rao_hamming_oa(4, 2).unwrap(), &group).is_err());
}

#[test]
fn mixed_product_arrays() {
    let mixed = product_mixed(&[4, 9, 4]).unwrap();
    assert_eq!(mixed.entries.ncols(), 144);
    assert!(verify_mixed(&mixed).ok);
    let mut broken = mixed.clone();
    broken.entries[[1, 5]] = broken.entries[[1, 5]] % 9 + 1;
    assert!(!verify_mixed(&broken).ok);
}

#[test]
fn composite_moduli_cap_rows() {
    assert!(verify_difference_scheme(&cyclic_difference_scheme(6, 2).unwrap()).ok);
    assert!(cyclic_difference_scheme(6, 3).is_err());
}

proptest! {
    #[test]
    fn field_inverses(q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 27, 32]), a in 1u32..1000) {
        let f = FieldSpec::of_order(q).unwrap();
        let a = a % (q as u32 - 1) + 1;
        prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        prop_assert_eq!(f.pow(a, q - 1), 1);
    }

    #[test]
    fn smallest_oa_always_verifies(n in 2usize..12, s in prop::sample::select(vec![2u32, 3, 4, 5])) {
        let oa = smallest_oa_for(n, s).unwrap();
        prop_assert_eq!(oa.rows(), n);
        prop_assert!(verify_oa(&oa).ok);
    }

    #[test]
    fn prime_difference_schemes_verify(u in prop::sample::select(vec![2u32, 3, 5, 7, 11, 13]), n in 2usize..14) {
        let n = n.min(u as usize);
        prop_assert!(verify_difference_scheme(&cyclic_difference_scheme(u, n).unwrap()).ok);
    }

    #[test]
    fn single_entry_mutation_is_located(r in 0usize..4, c in 0usize..9, shift in 1u32..3) {
        let mut oa = rao_hamming_oa(3, 2).unwrap();
        let old = oa.entry(r, c);
        oa.set_entry(r, c, (old - 1 + shift) % 3 + 1);
        let report = verify_oa(&oa);
        prop_assert!(!report.ok);
        let json = serde_json::to_value(&report).unwrap();
        prop_assert!(json["violations"].as_array().unwrap().iter().all(|v| v["kind"] == "pair_count"));
    }
}

#[test]
fn product_arrays_list_every_tuple() {
    let oa = product_oa(3, 3).unwrap();
    let mut seen: Vec<Vec<u32>> = oa.entries().columns().into_iter().map(|c| c.to_vec()).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 27);
    assert_eq!(oa.entries().column(0).to_vec(), vec![1, 1, 1]);
    assert_eq!(oa.entries().row(0).iter().filter(|&&x| x == 1).count(), 9);
}
