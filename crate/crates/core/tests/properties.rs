use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use isoflag::classifier::{compositions, flag_dim, group_dim, is_finite_multiple, is_finite_type, TripleType};
use isoflag::form::{is_isotropic, is_orthogonal};
use isoflag::sampling::{random_element, random_isotropic, random_vec};
use isoflag::stabilizer::r_generators;
use isoflag::suites::check_canonical;
use isoflag::{compute_b, FlagType, Gf5, Gf7, PairShape, Rational, Subspace};

fn composition(n: usize) -> impl Strategy<Value = Vec<usize>> {
    let all = compositions(n);
    proptest::sample::select(all)
}

fn triple(max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>, usize)> {
    (1..=max_n).prop_flat_map(|n| (composition(n), composition(n), composition(n), Just(n)))
}

fn shape(max_n: usize) -> impl Strategy<Value = PairShape> {
    (1..=max_n).prop_flat_map(|n| {
        let shapes: Vec<PairShape> = (0..=n).flat_map(|a| (0..=n).flat_map(move |b| PairShape::all(n, a, b))).collect();
        proptest::sample::select(shapes)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sum_and_intersection_dimensions(seed in any::<u64>(), ka in 0usize..5, kb in 0usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = Subspace::span(5, &(0..ka).map(|_| random_vec::<Gf5, _>(5, &mut rng)).collect::<Vec<_>>());
        let b = Subspace::span(5, &(0..kb).map(|_| random_vec::<Gf5, _>(5, &mut rng)).collect::<Vec<_>>());
        prop_assert_eq!(a.sum(&b).dim() + a.intersect(&b).dim(), a.dim() + b.dim());
        prop_assert!(a.sum(&b).contains(&a) && a.contains(&a.intersect(&b)));
        prop_assert_eq!(Subspace::span(5, &a.vectors()), a.clone());
    }

    #[test]
    fn random_elements_preserve_the_form(seed in any::<u64>(), n in 1usize..4, k in 0usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_element::<Gf7, _>(n, &mut rng);
        prop_assert!(is_orthogonal(g.mat()));
        prop_assert!(g.compose(&g.inverse()).is_identity());
        let k = k.min(n);
        prop_assert!(is_isotropic(&random_isotropic::<Gf7, _>(n, k, &mut rng)));
    }

    #[test]
    fn invariants_are_constant_on_r_orbits(seed in any::<u64>(), s in shape(3), steps in 1usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (up, um) = s.model_pair::<Gf5>();
        let v = random_isotropic::<Gf5, _>(s.n, s.n, &mut rng);
        let gens = r_generators::<Gf5>(&s).unwrap();
        let mut w = v.clone();
        for i in 0..steps {
            if gens.mats().is_empty() {
                break;
            }
            w = w.image(&gens.mats()[(seed as usize + i * 7) % gens.mats().len()]);
        }
        prop_assert_eq!(compute_b(&up, &um, &v).unwrap(), compute_b(&up, &um, &w).unwrap());
    }

    #[test]
    fn canonicalize_random_configurations(seed in any::<u64>(), n in 1usize..4, a in 0usize..4, b in 0usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b) = (a.min(n), b.min(n));
        let up = random_isotropic::<Gf5, _>(n, a, &mut rng);
        let um = random_isotropic::<Gf5, _>(n, b, &mut rng);
        let v = random_isotropic::<Gf5, _>(n, n, &mut rng);
        prop_assert_eq!(check_canonical(&up, &um, &v), Ok(()));
    }

    #[test]
    fn canonicalize_over_the_rationals(seed in any::<u64>(), s in shape(2)) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_element::<Rational, _>(s.n, &mut rng);
        let (up, um) = s.model_pair::<Rational>();
        let v = random_isotropic::<Rational, _>(s.n, s.n, &mut rng);
        prop_assert_eq!(check_canonical(&g.apply(&up), &g.apply(&um), &v), Ok(()));
    }

    #[test]
    fn verdict_ignores_factor_order((a, b, c, n) in triple(8), sq in any::<bool>()) {
        let v = |x: &Vec<usize>, y: &Vec<usize>, z: &Vec<usize>| {
            is_finite_type(&TripleType::new(x.clone(), y.clone(), z.clone(), n).unwrap(), sq)
        };
        let base = v(&a, &b, &c);
        for other in [v(&a, &c, &b), v(&b, &a, &c), v(&b, &c, &a), v(&c, &a, &b), v(&c, &b, &a)] {
            prop_assert_eq!(other.finite, base.finite);
            prop_assert_eq!(&other.normalized, &base.normalized);
            prop_assert_eq!(other.excluded_by, base.excluded_by);
        }
    }

    #[test]
    fn finite_type_fits_in_the_group((a, b, c, n) in triple(8), sq in any::<bool>()) {
        let t = TripleType::new(a, b, c, n).unwrap();
        let v = is_finite_type(&t, sq);
        prop_assert_eq!(v.dim_g, group_dim(n));
        prop_assert_eq!(v.dim_t, t.components().iter().map(|f| flag_dim(f, n)).sum::<usize>());
        if v.finite {
            prop_assert!(v.dim_t <= v.dim_g);
            prop_assert!(v.excluded_by.is_none() && !v.cases.is_empty());
        }
        if v.needs_finite_square_classes && !sq {
            prop_assert!(!v.finite);
        }
        if is_finite_type(&t, false).finite {
            prop_assert!(is_finite_type(&t, true).finite);
        }
    }

    #[test]
    fn four_or_more_factors_are_infinite(n in 1usize..6, k in 4usize..7) {
        let types: Vec<FlagType> = (0..k).map(|_| FlagType::new(vec![1], n).unwrap()).collect();
        let (finite, why) = is_finite_multiple(&types, n, true).unwrap();
        prop_assert!(!finite);
        prop_assert!(why.is_some());
    }
}
