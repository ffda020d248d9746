//! Verification suites shared by the command line and the acceptance
//! tests. Each returns a serializable report with a `pass` verdict.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::canonical::{canonicalize, normalize_pair, representative};
use crate::classifier::{equality_catalogue, group_dim, TripleType};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::is_orthogonal;
use crate::invariants::{compute_b, enumerate_tuples, PairShape};
use crate::linalg::{Mat, Subspace};
use crate::oracle::reduction::{minimal_rank_one_cases, rank_one_case_count, RankOneReport};
use crate::oracle::{
    borel_generators, count_r_orbits, double_coset_count, enumerate_max_isotropic, grassmann_finiteness_check,
    hashimoto_generators, projection_check, triple_orbit_count, Budget, DoubleCosetReport, GrassmannReport,
    OracleReport, ProjectionReport,
};
use crate::sampling::{random_element, random_isotropic};
use crate::stabilizer::{gl_generators, odd_prime};
use crate::{Gf3, Gf5, Gf7};

/// Every pair shape at rank n, α and β ranging over 0..=n.
pub fn all_shapes(n: usize) -> Vec<PairShape> {
    let mut out = Vec::new();
    for alpha in 0..=n {
        for beta in 0..=n {
            out.extend(PairShape::all(n, alpha, beta));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOrbitSuite {
    pub n: usize,
    pub p: u64,
    pub shapes: Vec<OracleReport>,
    pub pass: bool,
}

/// BFS orbit count of R on maximal isotropics equals the number of tuples,
/// for every shape at rank n.
pub fn pair_orbits<T: Scalar>(n: usize, budget: &Budget) -> Result<PairOrbitSuite> {
    let p = odd_prime::<T>()?;
    let shapes: Vec<OracleReport> = all_shapes(n).iter().map(|s| count_r_orbits::<T>(s, budget)).collect::<Result<_>>()?;
    let pass = shapes.iter().all(|r| r.matches);
    Ok(PairOrbitSuite { n, p, shapes, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTripSuite {
    pub n: usize,
    pub p: u64,
    pub tuples: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// compute_b(representative(t)) = t for every tuple of every shape at rank n.
pub fn round_trip<T: Scalar>(n: usize) -> Result<RoundTripSuite> {
    let p = T::characteristic();
    let mut tuples = 0;
    let mut failures = Vec::new();
    for s in all_shapes(n) {
        let (up, um) = s.model_pair::<T>();
        for t in enumerate_tuples(&s) {
            tuples += 1;
            let ok = representative::<T>(&s, &t).and_then(|v| compute_b(&up, &um, &v)).map(|b| b == t);
            if !matches!(ok, Ok(true)) {
                failures.push(format!("{s:?} {t:?}: {ok:?}"));
            }
        }
    }
    let pass = failures.is_empty() && tuples > 0;
    Ok(RoundTripSuite { n, p, tuples, failures, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSuite {
    pub n: usize,
    pub p: u64,
    pub checked: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Canonicalize a pair in any position: normalize the pair, then run the
/// staged reduction. Returns (g, shape, tuple) with g·U± the model pair
/// and g·V the representative.
pub fn canonicalize_any<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>, v: &Subspace<T>) -> Result<(Mat<T>, PairShape, crate::InvariantTuple)> {
    let (g0, shape) = normalize_pair(up, um)?;
    let c = canonicalize(&g0.apply(up), &g0.apply(um), &g0.apply(v))?;
    Ok((c.element.mat().mul(g0.mat()), shape, c.tuple))
}

/// Everything canonicalize promises, checked from the outside.
pub fn check_canonical<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>, v: &Subspace<T>) -> std::result::Result<(), String> {
    let (g, shape, tuple) = canonicalize_any(up, um, v).map_err(|e| e.to_string())?;
    let (mp, mm) = shape.model_pair::<T>();
    if !is_orthogonal(&g) {
        return Err("element is not orthogonal".into());
    }
    if up.image(&g) != mp || um.image(&g) != mm {
        return Err("element does not carry the pair to its model".into());
    }
    let rep = representative::<T>(&shape, &tuple).map_err(|e| e.to_string())?;
    if v.image(&g) != rep {
        return Err("g·V is not the representative".into());
    }
    if compute_b(&mp, &mm, &rep).map_err(|e| e.to_string())? != tuple {
        return Err("tuple differs from the invariants of V".into());
    }
    Ok(())
}

/// Canonicalize every maximal isotropic V against the model pair of every
/// shape at rank n.
pub fn canonicalize_sweep<T: Scalar>(n: usize, budget: &Budget) -> Result<SweepSuite> {
    let p = odd_prime::<T>()?;
    let all = enumerate_max_isotropic::<T>(n, budget)?;
    let mut checked = 0;
    let mut failures = Vec::new();
    for s in all_shapes(n) {
        let (up, um) = s.model_pair::<T>();
        for v in &all {
            checked += 1;
            if let Err(e) = check_canonical(&up, &um, v) {
                failures.push(format!("{s:?} V={:?}: {e}", v.vectors()));
            }
        }
    }
    let pass = failures.is_empty();
    Ok(SweepSuite { n, p, checked, failures, pass })
}

/// Random pairs in general position (random dimensions, random group
/// element applied) and random V, reproducible from the seed.
pub fn canonicalize_random<T: Scalar>(n: usize, samples: usize, seed: u64) -> Result<SweepSuite> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..samples {
        let shapes = all_shapes(n);
        let s = shapes[rng.gen_range(0..shapes.len())];
        let (mp, mm) = s.model_pair::<T>();
        let g = random_element::<T, _>(n, &mut rng);
        let (up, um) = (g.apply(&mp), g.apply(&mm));
        let v = random_isotropic::<T, _>(n, n, &mut rng);
        if let Err(e) = check_canonical(&up, &um, &v) {
            failures.push(format!("sample {i} {s:?}: {e}"));
        }
    }
    let pass = failures.is_empty();
    Ok(SweepSuite { n, p: T::characteristic(), checked: samples, failures, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCosetSuite {
    pub p: u64,
    /// diag(1, upper triangular) in the last block of the composition (1, n−1).
    pub hashimoto: DoubleCosetReport,
    /// H the full Levi block: |P\G/B| = n!/∏αᵢ!.
    pub parabolic: Vec<DoubleCosetReport>,
    pub pass: bool,
}

fn compositions_of(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=k {
        for mut rest in compositions_of(k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn double_cosets<T: Scalar>(n: usize, budget: &Budget) -> Result<DoubleCosetSuite> {
    if n < 2 {
        return Err(Error::Invalid("the double coset suite needs n ≥ 2".into()));
    }
    let p = odd_prime::<T>()?;
    let hashimoto = double_coset_count::<T>(&hashimoto_generators(n - 1), &[1, n - 1], 1, budget)?;
    let mut parabolic = Vec::new();
    for k in 1..=n {
        for parts in compositions_of(k) {
            parabolic.push(double_coset_count::<T>(&gl_generators(parts[0]), &parts, 0, budget)?);
        }
    }
    let pass = hashimoto.matches && parabolic.iter().all(|r| r.matches);
    Ok(DoubleCosetSuite { p, hashimoto, parabolic, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelledGrassmann {
    pub h1: String,
    pub report: GrassmannReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrassmannSuite {
    pub p: u64,
    pub reports: Vec<LabelledGrassmann>,
    pub projections: Vec<ProjectionReport>,
    /// Every G₁×B₂-orbit holds a normal form, and the normal forms biject
    /// with these orbits.
    pub g1b2_normal_forms: bool,
    /// H₁×B₂ orbit counts equal Σ |H₁\G₁/P₁| over normal forms.
    pub counts_match: bool,
    /// π̃₁(Q) = P₁ for every normal form.
    pub projection_holds: bool,
    /// Every H₁×B₂-orbit holds a normal form, for every tested H₁.
    pub every_h1b2_orbit_has_normal_form: bool,
    pub pass: bool,
}

fn h1_choices<T: Scalar>(m: usize) -> Vec<(String, Vec<Mat<T>>)> {
    vec![
        ("GL".to_string(), gl_generators(m)),
        ("Borel".to_string(), borel_generators(m)),
        ("diag(1, Borel)".to_string(), hashimoto_generators(m)),
    ]
}

/// Grassmannians of F^{m+n₂} with m, n₂ ≥ 1 and m + n₂ ≤ `max_total`.
pub fn grassmann<T: Scalar>(max_total: usize, budget: &Budget) -> Result<GrassmannSuite> {
    let p = odd_prime::<T>()?;
    let mut reports = Vec::new();
    let mut projections = Vec::new();
    for total in 2..=max_total {
        for m in 1..total {
            let n2 = total - m;
            for s in 1..total {
                for (label, gens) in h1_choices::<T>(m) {
                    let report = grassmann_finiteness_check::<T>(m, n2, s, &gens, budget)?;
                    reports.push(LabelledGrassmann { h1: label, report });
                }
                if total <= 4 {
                    projections.push(projection_check::<T>(m, n2, s, budget)?);
                }
            }
        }
    }
    let g1b2_normal_forms =
        reports.iter().all(|r| r.report.every_orbit_has_normal_form && r.report.normal_form_count == r.report.g1b2_orbit_count);
    let counts_match = reports.iter().all(|r| r.report.matches && r.report.predicted_count == r.report.orbit_count);
    let projection_holds = projections.iter().all(|r| r.failures.is_empty());
    let every_h1b2_orbit_has_normal_form = reports.iter().all(|r| r.report.h1_orbits_with_normal_form == r.report.orbit_count);
    let pass = g1b2_normal_forms && counts_match && projection_holds && every_h1b2_orbit_has_normal_form;
    Ok(GrassmannSuite {
        p,
        reports,
        projections,
        g1b2_normal_forms,
        counts_match,
        projection_holds,
        every_h1b2_orbit_has_normal_form,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneSuite {
    pub p: u64,
    pub cases: Vec<RankOneReport>,
    pub pass: bool,
}

/// R_V-orbits on full flags of V in the rank-one cases at n = 3, α = 2.
pub fn rank_one<T: Scalar>(budget: &Budget) -> Result<RankOneSuite> {
    let p = odd_prime::<T>()?;
    let cases: Vec<RankOneReport> = minimal_rank_one_cases()
        .into_iter()
        .map(|(c, n, a, b3)| rank_one_case_count::<T>(c, n, a, b3, budget))
        .collect::<Result<_>>()?;
    let pass = cases.iter().all(|c| c.matches);
    Ok(RankOneSuite { p, cases, pass })
}

/// Triples with dim 𝒯 = dim G from the known list, as (triple, n);
/// (n)(n)(1ⁿ) is listed separately since it occurs for every n.
pub const LISTED_EQUALITY_TRIPLES: [(&str, usize); 15] = [
    ("(1)(2)(11)", 2),
    ("(1)(1)(1)", 1),
    ("(1)(2)(11)", 2),
    ("(2)(2)(11)", 2),
    ("(2)(3)(11)", 3),
    ("(2)(3)(12)", 3),
    ("(2)(3)(21)", 3),
    ("(3)(4)(22)", 4),
    ("(3)(4)(12)", 4),
    ("(3)(4)(21)", 4),
    ("(3)(5)(22)", 5),
    ("(4)(5)(22)", 5),
    ("(4)(6)(23)", 6),
    ("(4)(6)(32)", 6),
    ("(5)(7)(33)", 7),
];

#[derive(Clone, Debug, Serialize)]
pub struct CatalogueSuite {
    pub n_max: usize,
    pub computed: Vec<String>,
    pub missing: Vec<String>,
    pub extras: Vec<String>,
    pub dims_equal: bool,
    pub pass: bool,
}

pub fn catalogue(n_max: usize) -> CatalogueSuite {
    use std::collections::BTreeSet;
    let key = |t: &str, n: usize| format!("{t} n={n}");
    let mut expected: BTreeSet<String> =
        LISTED_EQUALITY_TRIPLES.iter().filter(|(_, n)| *n <= n_max).map(|(t, n)| key(t, *n)).collect();
    for n in 1..=n_max {
        let ones = vec![1; n];
        let t = TripleType::new(vec![n], vec![n], ones, n).expect("valid");
        expected.insert(key(&t.to_string(), n));
    }
    let cat = equality_catalogue(n_max);
    let dims_equal = cat.iter().all(|t| t.dim() == group_dim(t.n));
    let computed: BTreeSet<String> = cat.iter().map(|t| key(&t.to_string(), t.n)).collect();
    let missing: Vec<String> = expected.difference(&computed).cloned().collect();
    let extras: Vec<String> = computed.difference(&expected).cloned().collect();
    let pass = missing.is_empty() && extras.is_empty() && dims_equal;
    CatalogueSuite { n_max, computed: computed.into_iter().collect(), missing, extras, dims_equal, pass }
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomySuite {
    /// Totals for 𝒯_{(2),(2),(11)} at n = 2, p = 3, 5, 7.
    pub finite_counts: Vec<(u64, usize)>,
    /// Totals for 𝒯_{(2),(2),(2)} at n = 3, p = 3, 5, 7.
    pub infinite_counts: Vec<(u64, usize)>,
    pub finite_constant: bool,
    pub infinite_increasing: bool,
    pub pass: bool,
}

fn triple_total<T: Scalar>(n: usize, alpha: usize, beta: usize, moving: &[usize], budget: &Budget) -> Result<(u64, usize)> {
    let c = triple_orbit_count::<T>(n, alpha, beta, moving, budget)?;
    Ok((c.p, c.total))
}

/// Finite type: counts independent of q. Infinite type: counts grow with q.
pub fn dichotomy(budget: &Budget) -> Result<DichotomySuite> {
    let finite_counts = vec![
        triple_total::<Gf3>(2, 2, 2, &[1, 1], budget)?,
        triple_total::<Gf5>(2, 2, 2, &[1, 1], budget)?,
        triple_total::<Gf7>(2, 2, 2, &[1, 1], budget)?,
    ];
    let infinite_counts = vec![
        triple_total::<Gf3>(3, 2, 2, &[2], budget)?,
        triple_total::<Gf5>(3, 2, 2, &[2], budget)?,
        triple_total::<Gf7>(3, 2, 2, &[2], budget)?,
    ];
    let finite_constant = finite_counts.windows(2).all(|w| w[0].1 == w[1].1);
    let infinite_increasing = infinite_counts.windows(2).all(|w| w[0].1 < w[1].1);
    let pass = finite_constant && infinite_increasing;
    Ok(DichotomySuite { finite_counts, infinite_counts, finite_constant, infinite_increasing, pass })
}
