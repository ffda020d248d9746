use isoflag::canonical::representative;
use isoflag::{compute_b, enumerate_tuples, Gf3, PairShape, Rational};

#[test]
fn invariants_of_representatives_round_trip() {
    let mut count = 0;
    for n in 1..=3 {
        for alpha in 0..=n {
            for beta in 0..=n {
                for s in PairShape::all(n, alpha, beta) {
                    let (up, um) = s.model_pair::<Gf3>();
                    for t in enumerate_tuples(&s) {
                        let v = representative::<Gf3>(&s, &t).unwrap();
                        assert_eq!(compute_b(&up, &um, &v).unwrap(), t, "shape {s:?}");
                        count += 1;
                    }
                }
            }
        }
    }
    assert!(count > 100);
}

#[test]
fn round_trip_over_rationals() {
    for n in 1..=3 {
        for alpha in 0..=n {
            for beta in 0..=n {
                for s in PairShape::all(n, alpha, beta) {
                    let (up, um) = s.model_pair::<Rational>();
                    for t in enumerate_tuples(&s) {
                        let v = representative::<Rational>(&s, &t).unwrap();
                        assert_eq!(compute_b(&up, &um, &v).unwrap(), t, "shape {s:?}");
                    }
                }
            }
        }
    }
}
