//! Parametric flag families that witness infinite type over infinite
//! fields, and their finite-field shadows: orbit separation by the
//! parameter and trivial stabilizers of rigid configurations.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::canonical::normalize_pair;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{FlagType, IsotropicFlag};
use crate::linalg::{Mat, Subspace};
use crate::oracle::{orbit_of_point, Budget, ChainShape, Codec};
use crate::stabilizer::{enumerate_stabilizer, odd_prime, r_generators};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyName {
    /// Four lines Fe₁, Fe₃, W₁, W_λ in F³.
    O3W,
    /// Rigid configuration (flag, U, U′) in F⁵.
    O5Fix,
    /// (U₁, U₂, U_{3,λ}) in F⁶; λ and 1−λ give the same orbit.
    O6U3,
    /// (U₁, U₂, U_{4,λ} ⊂ U₅) in F⁶.
    O6U4,
    /// Rigid configuration (flag, U₊, U₋, U) in F⁷.
    O7Fix,
    /// Three lines separated by the square class of λ.
    SquareClass,
}

impl FamilyName {
    pub const ALL: [FamilyName; 6] =
        [FamilyName::O3W, FamilyName::O5Fix, FamilyName::O6U3, FamilyName::O6U4, FamilyName::O7Fix, FamilyName::SquareClass];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::O3W => "O3-Wλ",
            FamilyName::O5Fix => "O5-fix",
            FamilyName::O6U3 => "O6-U3λ",
            FamilyName::O6U4 => "O6-U4λ",
            FamilyName::O7Fix => "O7-fix",
            FamilyName::SquareClass => "Sq-λ",
        }
    }

    /// Smallest rank admitting the embedding.
    pub fn min_rank(self) -> usize {
        match self {
            FamilyName::O3W => 1,
            FamilyName::O5Fix | FamilyName::SquareClass => 2,
            _ => 3,
        }
    }

    pub fn has_parameter(self) -> bool {
        !matches!(self, FamilyName::O5Fix | FamilyName::O7Fix)
    }

    fn nonzero_parameter(self) -> bool {
        matches!(self, FamilyName::O3W | FamilyName::SquareClass)
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyName {
    type Err = Error;

    /// Accepts the display names, with or without the trailing λ or
    /// "lambda", case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase().replace("lambda", "").replace('λ', "");
        let key = key.trim_end_matches('-');
        for f in FamilyName::ALL {
            if f.as_str().to_lowercase().replace('λ', "").trim_end_matches('-') == key {
                return Ok(f);
            }
        }
        Err(Error::Parse(format!("unknown family {s:?}")))
    }
}

/// Vector in F^{2n+1} from 1-based (index, coefficient) terms.
fn vec_of<T: Scalar>(big: usize, terms: &[(usize, T)]) -> Vec<T> {
    let mut v = vec![T::zero(); big];
    for (i, c) in terms {
        v[i - 1] = v[i - 1].clone() + c.clone();
    }
    v
}

fn span<T: Scalar>(big: usize, vecs: &[Vec<T>]) -> Subspace<T> {
    Subspace::span(big, vecs)
}

fn flag<T: Scalar>(parts: &[usize], n: usize, spaces: Vec<Subspace<T>>) -> Result<IsotropicFlag<T>> {
    IsotropicFlag::new(&FlagType::new(parts.to_vec(), n)?, spaces)
}

fn one<T: Scalar>() -> T {
    T::one()
}

fn neg<T: Scalar>(x: T) -> T {
    T::zero() - x
}

/// The family member at λ, embedded isometrically in F^{2n+1} around the
/// middle coordinate (the small space's f_i goes to e_{i+n−k} for F^{2k+1},
/// and for F⁶ the middle e_{n+1} is skipped).
pub fn build_family<T: Scalar>(name: FamilyName, n: usize, lambda: Option<T>) -> Result<Vec<IsotropicFlag<T>>> {
    if n < name.min_rank() {
        return Err(Error::Invalid(format!("{name} needs rank at least {}", name.min_rank())));
    }
    let lam = match (name.has_parameter(), lambda) {
        (true, Some(l)) => {
            if name.nonzero_parameter() && l.is_zero() {
                return Err(Error::Invalid(format!("{name} needs a nonzero parameter")));
            }
            l
        }
        (true, None) => return Err(Error::Invalid(format!("{name} needs a parameter"))),
        (false, Some(_)) => return Err(Error::Invalid(format!("{name} takes no parameter"))),
        (false, None) => T::zero(),
    };
    let big = 2 * n + 1;
    let odd = |k: usize| move |i: usize| i + n - k;
    let six = |i: usize| if i <= 3 { n - 3 + i } else { n - 2 + i };
    let v = |terms: &[(usize, T)]| vec_of(big, terms);
    let half = T::half();
    match name {
        FamilyName::O3W => {
            let f = odd(1);
            let w = |l: T| -> Result<Vec<T>> {
                let inv = (l.clone() + l.clone()).inv().ok_or_else(|| Error::Invalid("λ must be nonzero".into()))?;
                Ok(v(&[(f(1), l), (f(2), one()), (f(3), neg(inv))]))
            };
            Ok(vec![
                flag(&[1], n, vec![span(big, &[v(&[(f(1), one())])])])?,
                flag(&[1], n, vec![span(big, &[v(&[(f(3), one())])])])?,
                flag(&[1], n, vec![span(big, &[w(one())?])])?,
                flag(&[1], n, vec![span(big, &[w(lam)?])])?,
            ])
        }
        FamilyName::O5Fix => {
            let f = odd(2);
            let e = |i: usize| v(&[(f(i), one())]);
            let f12 = v(&[(f(1), one()), (f(2), one())]);
            let u_prime = v(&[(f(1), one()), (f(3), one()), (f(5), neg(half))]);
            Ok(vec![
                flag(&[1, 1], n, vec![span(big, &[f12]), span(big, &[e(1), e(2)])])?,
                flag(&[2], n, vec![span(big, &[e(4), e(5)])])?,
                flag(&[1], n, vec![span(big, &[u_prime])])?,
            ])
        }
        FamilyName::O7Fix => {
            let f = odd(3);
            let e = |i: usize| v(&[(f(i), one())]);
            let f12 = v(&[(f(1), one()), (f(2), one())]);
            let u = vec![
                v(&[(f(2), one()), (f(3), one())]),
                v(&[(f(1), one()), (f(4), one()), (f(7), neg(half))]),
                v(&[(f(5), one()), (f(6), neg(one()))]),
            ];
            Ok(vec![
                flag(&[1, 1], n, vec![span(big, &[f12]), span(big, &[e(1), e(2)])])?,
                flag(&[2], n, vec![span(big, &[e(6), e(7)])])?,
                flag(&[3], n, vec![span(big, &u)])?,
            ])
        }
        FamilyName::O6U3 => {
            let e = |i: usize| v(&[(six(i), one())]);
            let u3 = vec![
                v(&[(six(1), one()), (six(3), one()), (six(5), one())]),
                v(&[(six(2), lam.clone()), (six(4), neg(one())), (six(6), T::one() - lam)]),
            ];
            Ok(vec![
                flag(&[2], n, vec![span(big, &[e(1), e(2)])])?,
                flag(&[2], n, vec![span(big, &[e(5), e(6)])])?,
                flag(&[2], n, vec![span(big, &u3)])?,
            ])
        }
        FamilyName::O6U4 => {
            let e = |i: usize| v(&[(six(i), one())]);
            let u4 = v(&[(six(1), lam.clone()), (six(3), neg(one())), (six(5), T::one() - lam)]);
            let u5 = vec![
                v(&[(six(1), one()), (six(5), neg(one()))]),
                v(&[(six(1), one()), (six(3), neg(one()))]),
                v(&[(six(2), one()), (six(4), one()), (six(6), one())]),
            ];
            Ok(vec![
                flag(&[2], n, vec![span(big, &[e(1), e(2)])])?,
                flag(&[2], n, vec![span(big, &[e(5), e(6)])])?,
                flag(&[1, 2], n, vec![span(big, &[u4]), span(big, &u5)])?,
            ])
        }
        FamilyName::SquareClass => {
            let vl = v(&[(n - 1, one()), (n, one()), (n + 2, lam.clone()), (n + 3, neg(lam))]);
            Ok(vec![
                flag(&[1], n, vec![span(big, &[v(&[(n - 1, one())])])])?,
                flag(&[1], n, vec![span(big, &[v(&[(n + 3, one())])])])?,
                flag(&[1], n, vec![span(big, &[vl])])?,
            ])
        }
    }
}

/// Which parameters give G-conjugate family members.
#[derive(Clone, Debug, Serialize)]
pub struct IncidenceReport {
    pub family: String,
    pub p: u64,
    pub n: usize,
    /// Equivalence classes of parameters, as residues mod p.
    pub classes: Vec<Vec<u64>>,
    /// Whether the computed relation is reflexive, symmetric and transitive.
    pub equivalence: bool,
    /// Computed relation equals the predicted one.
    pub predicate_match: bool,
    /// t_λ ~ t_μ implies the predicate (the direction the separation
    /// argument needs).
    pub implication_holds: bool,
    /// Pairs the predicate relates but the computation separates.
    pub exceptions: Vec<(u64, u64)>,
}

/// The relation the family's separation statement predicts.
pub fn separation_predicate<T: Scalar>(name: FamilyName, lambda: &T, mu: &T) -> Result<bool> {
    match name {
        FamilyName::O6U3 => Ok(lambda == mu || *lambda == T::one() - mu.clone()),
        FamilyName::O6U4 => Ok(lambda == mu),
        FamilyName::SquareClass => {
            let inv = mu.inv().ok_or_else(|| Error::Invalid("parameter must be nonzero".into()))?;
            Ok((lambda.clone() * inv).is_nonzero_square())
        }
        _ => Err(Error::Invalid(format!("{name} has no separation statement"))),
    }
}

fn flatten<T: Scalar>(t: &[IsotropicFlag<T>]) -> Vec<Subspace<T>> {
    t.iter().flat_map(|f| f.spaces().iter().cloned()).collect()
}

/// Decide t_λ ~ t_μ for all parameter pairs over GF(p) at rank 3. The fixed
/// flags are held in place and the moving flag is tracked under the joint
/// stabilizer: R generators for two fixed flags, or the enumerated
/// stabilizer when a maximal isotropic space is also fixed.
pub fn verify_separation<T: Scalar>(name: FamilyName, budget: &Budget) -> Result<IncidenceReport> {
    let p = odd_prime::<T>()?;
    let n = 3;
    let big = 2 * n + 1;
    let elems = T::elements().ok_or_else(|| Error::Invalid("separation needs a finite field".into()))?;
    let params: Vec<T> = elems.into_iter().filter(|x| !(name.nonzero_parameter() && x.is_zero())).collect();
    let members: Vec<Vec<IsotropicFlag<T>>> =
        params.iter().map(|l| build_family(name, n, Some(l.clone()))).collect::<Result<_>>()?;

    // same[i] = parameters j with t_i ~ t_j
    let mut same: Vec<HashSet<usize>> = Vec::new();
    match name {
        FamilyName::O6U3 | FamilyName::SquareClass => {
            let fixed = &members[0];
            let (up, um) = (fixed[0].spaces()[0].clone(), fixed[1].spaces()[0].clone());
            let (g, shape) = normalize_pair(&up, &um)?;
            let gens = r_generators::<T>(&shape)?.conjugate(g.inverse().mat(), "pair stabilizer")?;
            let moving: Vec<&Subspace<T>> = members.iter().map(|m| &m[2].spaces()[0]).collect();
            let codec = Codec::<T>::new(ChainShape { ambient: big, dims: vec![moving[0].dim()] })?;
            let codes: Vec<u128> = moving.iter().map(|s| codec.encode(std::slice::from_ref(*s))).collect::<Result<_>>()?;
            for s in &moving {
                let orbit = orbit_of_point(&codec, std::slice::from_ref(*s), gens.mats(), budget)?;
                same.push((0..codes.len()).filter(|&j| orbit.binary_search(&codes[j]).is_ok()).collect());
            }
        }
        FamilyName::O6U4 => {
            let fixed = &members[0];
            let config = [fixed[0].spaces()[0].clone(), fixed[1].spaces()[0].clone(), fixed[2].spaces()[1].clone()];
            let stab = enumerate_stabilizer::<T>(n, &config, budget.applications)?;
            let lines: Vec<&Subspace<T>> = members.iter().map(|m| &m[2].spaces()[0]).collect();
            for l in &lines {
                let images: HashSet<Subspace<T>> = stab.iter().map(|g| l.image(g)).collect();
                same.push((0..lines.len()).filter(|&j| images.contains(lines[j])).collect());
            }
        }
        _ => return Err(Error::Invalid(format!("{name} has no separation statement"))),
    }

    let k = params.len();
    let equivalence = (0..k).all(|i| same[i].contains(&i))
        && (0..k).all(|i| same[i].iter().all(|&j| same[j].contains(&i)))
        && (0..k).all(|i| same[i].iter().all(|&j| same[j].iter().all(|l| same[i].contains(l))));
    let index = |x: &T| x.to_index().expect("finite field");
    let mut implication_holds = true;
    let mut exceptions = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let predicted = separation_predicate(name, &params[i], &params[j])?;
            let computed = same[i].contains(&j);
            if computed && !predicted {
                implication_holds = false;
            }
            if predicted && !computed {
                exceptions.push((index(&params[i]), index(&params[j])));
            }
        }
    }
    let predicate_match = implication_holds && exceptions.is_empty();
    let mut classes: Vec<Vec<u64>> = Vec::new();
    let mut done = vec![false; k];
    for i in 0..k {
        if done[i] {
            continue;
        }
        let mut class: Vec<u64> = same[i].iter().map(|&j| index(&params[j])).collect();
        class.sort();
        for &j in &same[i] {
            done[j] = true;
        }
        classes.push(class);
    }
    classes.sort();
    Ok(IncidenceReport { family: name.to_string(), p, n, classes, equivalence, predicate_match, implication_holds, exceptions })
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    pub family: String,
    pub p: u64,
    pub n: usize,
    pub stabilizer_order: usize,
    pub plus_minus_identity: bool,
}

/// Enumerate the stabilizer in O_{2k+1}(p) of a rigid configuration at its
/// own rank k and compare it with {±id}.
pub fn stabilizer_rigidity<T: Scalar>(name: FamilyName, budget: &Budget) -> Result<RigidityReport> {
    let p = odd_prime::<T>()?;
    let n = name.min_rank();
    let config: Vec<Subspace<T>> = match name {
        FamilyName::O3W => {
            let t = build_family::<T>(name, n, Some(T::one()))?;
            flatten(&t[..3])
        }
        FamilyName::O5Fix | FamilyName::O7Fix => flatten(&build_family::<T>(name, n, None)?),
        _ => return Err(Error::Invalid(format!("{name} is not a rigid configuration"))),
    };
    let stab = enumerate_stabilizer::<T>(n, &config, budget.applications)?;
    let big = 2 * n + 1;
    let id = Mat::<T>::identity(big);
    let minus = Mat::new(big, big, id.entries().iter().map(|x| T::zero() - x.clone()).collect());
    let plus_minus_identity = stab.len() == 2 && stab.contains(&id) && stab.contains(&minus);
    Ok(RigidityReport { family: name.to_string(), p, n, stabilizer_order: stab.len(), plus_minus_identity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5};
    use crate::form::is_isotropic;
    use num_traits::{One, Zero};

    #[test]
    fn names_round_trip() {
        for f in FamilyName::ALL {
            assert_eq!(f.as_str().parse::<FamilyName>().unwrap(), f);
        }
        assert_eq!("o6-u3lambda".parse::<FamilyName>().unwrap(), FamilyName::O6U3);
        assert_eq!("sq".parse::<FamilyName>().unwrap(), FamilyName::SquareClass);
        assert!("O4-x".parse::<FamilyName>().is_err());
    }

    #[test]
    fn o3_member_at_one_over_gf3() {
        // −½ = 1 in GF(3)
        let t = build_family::<Gf3>(FamilyName::O3W, 1, Some(Gf3::one())).unwrap();
        let w = t[3].spaces()[0].clone();
        assert_eq!(w, Subspace::span(3, &[vec![Gf3::one(), Gf3::one(), Gf3::one()]]));
    }

    #[test]
    fn u3_at_zero_has_the_stated_pattern() {
        let t = build_family::<Gf5>(FamilyName::O6U3, 3, Some(Gf5::zero())).unwrap();
        let v = |x: i64| Gf5::from_i64(x);
        let expect = Subspace::span(
            7,
            &[
                vec![v(1), v(0), v(1), v(0), v(0), v(1), v(0)],
                vec![v(0), v(0), v(0), v(0), v(-1), v(0), v(1)],
            ],
        );
        assert_eq!(t[2].spaces()[0], expect);
    }

    #[test]
    fn every_member_is_isotropic() {
        for f in FamilyName::ALL {
            for n in f.min_rank()..=4 {
                let params: Vec<Option<Gf5>> =
                    if f.has_parameter() { Gf5::elements().unwrap().into_iter().map(Some).collect() } else { vec![None] };
                for l in params {
                    match build_family(f, n, l) {
                        Ok(t) => assert!(t.iter().all(|fl| fl.spaces().iter().all(is_isotropic))),
                        Err(_) => assert!(f.nonzero_parameter() && l.unwrap().is_zero()),
                    }
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(build_family::<Gf3>(FamilyName::O7Fix, 2, None).is_err());
        assert!(build_family::<Gf3>(FamilyName::O3W, 1, Some(Gf3::zero())).is_err());
        assert!(build_family::<Gf3>(FamilyName::O5Fix, 2, Some(Gf3::one())).is_err());
        assert!(build_family::<Gf3>(FamilyName::O6U4, 3, None).is_err());
    }

    #[test]
    fn small_separations_over_gf3() {
        let b = Budget::default();
        for f in [FamilyName::O6U4, FamilyName::SquareClass] {
            let r = verify_separation::<Gf3>(f, &b).unwrap();
            assert!(r.equivalence && r.predicate_match, "{r:?}");
        }
    }

    #[test]
    fn degenerate_members_of_u3_are_not_swapped() {
        // the det −1 symmetry λ ↦ 1−λ needs λ(1−λ) ≠ 0, so 0 and 1 stay apart
        let r = verify_separation::<Gf5>(FamilyName::O6U3, &Budget::default()).unwrap();
        assert!(r.equivalence && r.implication_holds);
        assert_eq!(r.classes, vec![vec![0], vec![1], vec![2, 4], vec![3]]);
        assert_eq!(r.exceptions, vec![(0, 1), (1, 0)]);
        assert!(!r.predicate_match);
    }

    #[test]
    fn rigid_o3_and_o5() {
        let b = Budget::default();
        for f in [FamilyName::O3W, FamilyName::O5Fix] {
            let r = stabilizer_rigidity::<Gf3>(f, &b).unwrap();
            assert!(r.plus_minus_identity, "{r:?}");
        }
    }
}
