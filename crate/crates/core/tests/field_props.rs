use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use cb_lab::{Elem, Field};

fn fields() -> Vec<Field> {
    vec![
        Field::prime(101).unwrap(),
        Field::finite(2, 4).unwrap(),
        Field::finite(7, 3).unwrap(),
        Field::finite(101, 2).unwrap(),
        Field::rational(),
    ]
}

fn elem(field: &Field, raw: &[i64]) -> Elem {
    if field.is_finite() {
        let p = field.characteristic() as i64;
        let c: Vec<u32> = raw.iter().take(field.degree()).map(|x| x.rem_euclid(p) as u32).collect();
        field.from_coeffs(&c).unwrap()
    } else {
        let den = raw[1].unsigned_abs() as i64 + 1;
        field.from_rational(BigRational::new(BigInt::from(raw[0]), BigInt::from(den))).unwrap()
    }
}

proptest! {
    #[test]
    fn ring_axioms(a in prop::collection::vec(-500i64..500, 4), b in prop::collection::vec(-500i64..500, 4), c in prop::collection::vec(-500i64..500, 4)) {
        for f in fields() {
            let (x, y, z) = (elem(&f, &a), elem(&f, &b), elem(&f, &c));
            prop_assert_eq!(f.add(&f.add(&x, &y), &z), f.add(&x, &f.add(&y, &z)));
            prop_assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
            prop_assert_eq!(f.mul(&x, &y), f.mul(&y, &x));
            prop_assert_eq!(f.mul(&x, &f.add(&y, &z)), f.add(&f.mul(&x, &y), &f.mul(&x, &z)));
            prop_assert!(f.is_zero(&f.add(&x, &f.neg(&x))));
            prop_assert_eq!(f.sub(&x, &y), f.add(&x, &f.neg(&y)));
            if !f.is_zero(&x) {
                prop_assert!(f.is_one(&f.mul(&x, &f.inv(&x).unwrap())));
            } else {
                prop_assert!(f.inv(&x).is_err());
            }
        }
    }

    #[test]
    fn frobenius_is_a_field_automorphism(a in prop::collection::vec(0i64..101, 4), b in prop::collection::vec(0i64..101, 4)) {
        for f in fields().into_iter().filter(|f| f.is_finite()) {
            let (x, y) = (elem(&f, &a), elem(&f, &b));
            let fx = f.frobenius(&x).unwrap();
            prop_assert_eq!(f.frobenius(&f.add(&x, &y)).unwrap(), f.add(&fx, &f.frobenius(&y).unwrap()));
            prop_assert_eq!(f.frobenius(&f.mul(&x, &y)).unwrap(), f.mul(&fx, &f.frobenius(&y).unwrap()));
            prop_assert_eq!(&fx, &f.pow(&x, f.characteristic() as u64));
            prop_assert_eq!(f.frobenius_pow(&x, f.degree()).unwrap(), x);
        }
    }
}

#[test]
fn f4_generator_squares_to_g_plus_one() {
    let f = Field::with_modulus(2, vec![1, 1, 1]).unwrap();
    let g = f.from_coeffs(&[0, 1]).unwrap();
    assert_eq!(f.mul(&g, &g), f.add(&g, &f.one()));
    assert_eq!(f.frobenius(&g).unwrap(), f.add(&g, &f.one()));
}

#[test]
fn prime_subfield_is_fixed() {
    let f = Field::finite(7, 3).unwrap();
    for v in 0..7 {
        let x = f.from_prime(v);
        assert_eq!(f.frobenius(&x).unwrap(), x);
    }
    assert_eq!(f.elements(1000).unwrap().len(), 343);
}

#[test]
fn invalid_fields_are_rejected() {
    assert!(Field::prime(1).is_err());
    assert!(Field::prime(15).is_err());
    // t^2 + 1 = (t + 1)^2 over F_2
    assert!(Field::with_modulus(2, vec![1, 0, 1]).is_err());
    assert!(Field::with_modulus(7, vec![1, 0, 2]).is_err());
}
