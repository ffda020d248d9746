//! Finite-type decision for triple flag varieties of O_{2n+1}, flag variety
//! dimensions, and the catalogue of finite-type triples with dim 𝒯 = dim G.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::FlagType;

/// 𝒯_{a,b,c} = M_a × M_b × M_c for O_{2n+1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleType {
    pub a: FlagType,
    pub b: FlagType,
    pub c: FlagType,
    pub n: usize,
}

impl TripleType {
    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("rank must be positive".into()));
        }
        Ok(TripleType { a: FlagType::new(a, n)?, b: FlagType::new(b, n)?, c: FlagType::new(c, n)?, n })
    }

    pub fn components(&self) -> [&FlagType; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn dim(&self) -> usize {
        self.components().iter().map(|t| flag_dim(t, self.n)).sum()
    }
}

fn show(t: &FlagType) -> String {
    let sep = if t.parts.iter().any(|&x| x >= 10) { "," } else { "" };
    format!("({})", t.parts.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep))
}

impl fmt::Display for TripleType {
    /// Written as (a)(b)(c), e.g. (2)(3)(12).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", show(&self.a), show(&self.b), show(&self.c))
    }
}

/// dim M_a = n² − Σ αᵢ(αᵢ−1)/2 − (n − Σ αᵢ)².
pub fn flag_dim(a: &FlagType, n: usize) -> usize {
    let rest = n - a.total();
    n * n - a.parts.iter().map(|&x| x * (x - 1) / 2).sum::<usize>() - rest * rest
}

/// dim O_{2n+1} = n(2n+1).
pub fn group_dim(n: usize) -> usize {
    n * (2 * n + 1)
}

/// The four finite-type families, for a normalized triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    /// α₁ = β₁ = n.
    I,
    /// α₁ = 1.
    II,
    /// r = 1 and γ₁ = n.
    III,
    /// r = 2 and β₁ = n.
    IV,
}

/// Why a triple (or a longer product) has infinitely many orbits over an
/// infinite field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    /// Four or more factors.
    FourOrMoreFactors,
    /// At least two factors are flags with more than one step.
    TwoMultiStepFactors,
    /// r = 1 with 1 < α₁ ≤ β₁ ≤ γ₁ < n.
    ThreeMaximalGrassmannians,
    /// r ≥ 2 with 1 < α₁ ≤ β₁ < n.
    TwoSmallGrassmannians,
    /// r ≥ 3 with 1 < α₁ < n and β₁ = n.
    LongFlagAgainstMaximal,
    /// max(α₁, β₁, γ₁) < n over a field with infinitely many square classes.
    SquareClasses,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub finite: bool,
    /// Matched cases in the order I < II < III < IV.
    pub cases: Vec<Case>,
    pub excluded_by: Option<Exclusion>,
    /// max(α₁, β₁, γ₁) < n: finiteness then depends on the square classes.
    pub needs_finite_square_classes: bool,
    /// Position in the input of each normalized component.
    pub permutation: [usize; 3],
    pub normalized: String,
    #[serde(rename = "dimT")]
    pub dim_t: usize,
    #[serde(rename = "dimG")]
    pub dim_g: usize,
}

/// Reorder to p = q = 1 ≤ r with α₁ ≤ β₁ (and β₁ ≤ γ₁ when r = 1). Returns
/// the permutation used, or `None` when two factors have several steps.
pub fn normalize(t: &TripleType) -> Option<(TripleType, [usize; 3])> {
    let comps = t.components();
    let mut idx = [0usize, 1, 2];
    idx.sort_by_key(|&i| (comps[i].parts.len(), comps[i].parts.clone(), i));
    if comps[idx[0]].parts.len() > 1 || comps[idx[1]].parts.len() > 1 {
        return None;
    }
    if comps[idx[2]].parts.len() == 1 {
        idx.sort_by_key(|&i| (comps[i].parts[0], i));
    } else if comps[idx[0]].parts[0] > comps[idx[1]].parts[0] {
        idx.swap(0, 1);
    }
    let out = TripleType { a: comps[idx[0]].clone(), b: comps[idx[1]].clone(), c: comps[idx[2]].clone(), n: t.n };
    Some((out, idx))
}

/// Decide finite type. `square_classes_finite` states whether |𝔽^×/(𝔽^×)²|
/// is finite, which holds for every finite field and fails for ℚ.
pub fn is_finite_type(t: &TripleType, square_classes_finite: bool) -> Verdict {
    let n = t.n;
    let dim_t = t.dim();
    let dim_g = group_dim(n);
    let Some((nt, perm)) = normalize(t) else {
        let comps = t.components();
        let mut idx = [0usize, 1, 2];
        idx.sort_by_key(|&i| (comps[i].parts.len(), comps[i].parts.clone(), i));
        let sorted = TripleType { a: comps[idx[0]].clone(), b: comps[idx[1]].clone(), c: comps[idx[2]].clone(), n };
        return Verdict {
            finite: false,
            cases: Vec::new(),
            excluded_by: Some(Exclusion::TwoMultiStepFactors),
            needs_finite_square_classes: false,
            permutation: idx,
            normalized: sorted.to_string(),
            dim_t,
            dim_g,
        };
    };
    let (a1, b1, g1) = (nt.a.parts[0], nt.b.parts[0], nt.c.parts[0]);
    let r = nt.c.parts.len();
    let mut cases = Vec::new();
    if a1 == n && b1 == n {
        cases.push(Case::I);
    }
    if a1 == 1 {
        cases.push(Case::II);
    }
    if r == 1 && g1 == n {
        cases.push(Case::III);
    }
    if r == 2 && b1 == n {
        cases.push(Case::IV);
    }
    let needs = a1.max(b1).max(g1) < n;
    let excluded_by = if needs && !square_classes_finite {
        Some(Exclusion::SquareClasses)
    } else if !cases.is_empty() {
        None
    } else if r == 1 {
        Some(Exclusion::ThreeMaximalGrassmannians)
    } else if b1 < n {
        Some(Exclusion::TwoSmallGrassmannians)
    } else {
        Some(Exclusion::LongFlagAgainstMaximal)
    };
    Verdict {
        finite: excluded_by.is_none(),
        cases,
        excluded_by,
        needs_finite_square_classes: needs,
        permutation: perm,
        normalized: nt.to_string(),
        dim_t,
        dim_g,
    }
}

/// Multiple flag varieties with any number of factors: two or fewer are
/// finite by the Bruhat decomposition, four or more are infinite.
pub fn is_finite_multiple(types: &[FlagType], n: usize, square_classes_finite: bool) -> Result<(bool, Option<Exclusion>)> {
    match types.len() {
        0..=2 => Ok((true, None)),
        3 => {
            let t = TripleType::new(types[0].parts.clone(), types[1].parts.clone(), types[2].parts.clone(), n)?;
            let v = is_finite_type(&t, square_classes_finite);
            Ok((v.finite, v.excluded_by))
        }
        _ => Ok((false, Some(Exclusion::FourOrMoreFactors))),
    }
}

/// All compositions with sum at most n.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for x in 1..=left {
            cur.push(x);
            rec(left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Normalized triples with dim 𝒯 = dim G that are of finite type over every
/// field of characteristic ≠ 2, for 1 ≤ n ≤ n_max.
pub fn equality_catalogue(n_max: usize) -> Vec<TripleType> {
    equality_catalogue_with(n_max, false)
}

/// As [`equality_catalogue`], but with the square-class hypothesis given.
/// With `true` this adds (1)(1)(11) at n = 2 and (1)(2)(111) at n = 3.
pub fn equality_catalogue_with(n_max: usize, square_classes_finite: bool) -> Vec<TripleType> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let comps = compositions(n);
        let mut seen = BTreeSet::new();
        for a in &comps {
            for b in &comps {
                for c in &comps {
                    let t = TripleType { a: FlagType { parts: a.clone() }, b: FlagType { parts: b.clone() }, c: FlagType { parts: c.clone() }, n };
                    if t.dim() != group_dim(n) {
                        continue;
                    }
                    let Some((nt, _)) = normalize(&t) else { continue };
                    if is_finite_type(&nt, square_classes_finite).finite && seen.insert(nt.clone()) {
                        out.push(nt);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tt(a: &[usize], b: &[usize], c: &[usize], n: usize) -> TripleType {
        TripleType::new(a.to_vec(), b.to_vec(), c.to_vec(), n).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(flag_dim(&FlagType { parts: vec![2] }, 2), 3);
        assert_eq!(flag_dim(&FlagType { parts: vec![1, 1, 1] }, 3), 9);
        assert_eq!(flag_dim(&FlagType { parts: vec![1] }, 2), 3);
        for n in 1..6 {
            assert_eq!(flag_dim(&FlagType { parts: vec![n] }, n), n * (n + 1) / 2);
        }
    }

    #[test]
    fn verdict_examples() {
        let v = is_finite_type(&tt(&[3], &[3], &[1, 1, 1], 3), true);
        assert!(v.finite && v.cases == vec![Case::I]);
        let v = is_finite_type(&tt(&[2], &[2], &[2], 3), true);
        assert!(!v.finite && v.excluded_by == Some(Exclusion::ThreeMaximalGrassmannians));
        let v = is_finite_type(&tt(&[1], &[2], &[1, 1], 2), true);
        assert!(v.finite && v.cases == vec![Case::II, Case::IV]);
        let v = is_finite_type(&tt(&[1], &[1], &[1], 1), true);
        assert!(v.finite && v.cases.contains(&Case::III) && v.cases.contains(&Case::I));
    }

    #[test]
    fn square_classes_gate() {
        let t = tt(&[1], &[1], &[1], 3);
        assert!(is_finite_type(&t, true).finite);
        let v = is_finite_type(&t, false);
        assert!(!v.finite && v.excluded_by == Some(Exclusion::SquareClasses));
        assert!(is_finite_type(&tt(&[1], &[3], &[1], 3), false).finite);
    }

    #[test]
    fn multi_step_pairs_and_long_flags() {
        let v = is_finite_type(&tt(&[1, 1], &[1, 1], &[1], 2), true);
        assert_eq!(v.excluded_by, Some(Exclusion::TwoMultiStepFactors));
        let v = is_finite_type(&tt(&[2], &[3], &[1, 1, 1], 3), true);
        assert_eq!(v.excluded_by, Some(Exclusion::LongFlagAgainstMaximal));
        let v = is_finite_type(&tt(&[2], &[2], &[1, 1], 3), true);
        assert_eq!(v.excluded_by, Some(Exclusion::TwoSmallGrassmannians));
        let f = FlagType { parts: vec![1] };
        assert_eq!(is_finite_multiple(&vec![f; 4], 2, true).unwrap(), (false, Some(Exclusion::FourOrMoreFactors)));
    }

    #[test]
    fn order_does_not_matter() {
        let t = tt(&[1, 1], &[2], &[1], 2);
        let u = tt(&[1], &[1, 1], &[2], 2);
        assert_eq!(is_finite_type(&t, true).normalized, is_finite_type(&u, true).normalized);
        assert_eq!(is_finite_type(&t, true).normalized, "(1)(2)(11)");
    }

    #[test]
    fn catalogue_small_ranks() {
        let names: Vec<String> = equality_catalogue(2).iter().map(|t| format!("{}@{}", t, t.n)).collect();
        assert!(names.contains(&"(1)(1)(1)@1".to_string()));
        assert!(names.contains(&"(1)(2)(11)@2".to_string()));
        assert!(names.contains(&"(2)(2)(11)@2".to_string()));
        assert_eq!(names.len(), 3);
        let wide: Vec<String> = equality_catalogue_with(3, true).iter().map(|t| format!("{}@{}", t, t.n)).collect();
        assert!(wide.contains(&"(1)(1)(11)@2".to_string()));
        assert!(wide.contains(&"(1)(2)(111)@3".to_string()));
    }
}
