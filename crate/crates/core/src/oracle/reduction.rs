//! R_V-orbits on full flags of V for 𝒯_{(α),(1),(1ⁿ)}. In each rank-one
//! case R_V|_V is a parabolic of GL(V) with one Levi block replaced by a
//! subgroup H, so the orbit count should be n_H · n!/∏(block sizes)!, where
//! n_H counts H-orbits on the full flags of its block.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::counts::factorial;
use super::{count_linear_flag_orbits, full_flag_dims, linear_flag_universe, orbit_partition, Budget};
use crate::canonical::{representative, tools::block_identity};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::invariants::{enumerate_tuples, InvariantTuple, PairShape};
use crate::linalg::Mat;
use crate::stabilizer::{gl_generators, odd_prime, restrict_to, rv_generators};

/// Which invariant equals one. The first two live in the a₋ = 1 shape, the
/// others in the a₁ = 1 shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RankOneCase {
    B4,
    B11,
    B15,
    B8,
    B13,
}

impl RankOneCase {
    pub const ALL: [RankOneCase; 5] = [RankOneCase::B4, RankOneCase::B11, RankOneCase::B15, RankOneCase::B8, RankOneCase::B13];

    pub fn index(self) -> usize {
        match self {
            RankOneCase::B4 => 4,
            RankOneCase::B11 => 11,
            RankOneCase::B15 => 15,
            RankOneCase::B8 => 8,
            RankOneCase::B13 => 13,
        }
    }

    fn shape(self, n: usize, alpha: usize) -> Result<PairShape> {
        match self {
            RankOneCase::B4 | RankOneCase::B11 => PairShape::new(n, 0, alpha, 1, 0),
            _ if alpha == 0 => Err(Error::Invalid("the a₁ = 1 shape needs α ≥ 1".into())),
            _ => PairShape::new(n, 0, alpha - 1, 0, 1),
        }
    }

    /// Block sizes of R_V|_V on V and the index of the H block.
    fn blocks(self, n: usize, alpha: usize, b3: usize) -> Option<(Vec<usize>, usize)> {
        let (n, a, b) = (n as isize, alpha as isize, b3 as isize);
        let (sizes, h) = match self {
            RankOneCase::B4 => (vec![b + 1, n - a - 1, a - b], 0),
            RankOneCase::B11 => (vec![b, n - a - 1, a - b + 1], 2),
            RankOneCase::B15 => (vec![b, n - a, a - b], 2),
            RankOneCase::B8 => (vec![b, n - a + 1, a - b - 2, 1], 1),
            RankOneCase::B13 => (vec![b, n - a - 1, a - b + 1], 2),
        };
        if sizes.iter().any(|&s| s < 0) {
            return None;
        }
        Some((sizes.into_iter().map(|s| s as usize).collect(), h))
    }

    /// Closed form for n_H where one is known.
    pub fn n_h_formula(self, n: usize, alpha: usize, b3: usize) -> Option<usize> {
        match self {
            RankOneCase::B4 => Some((b3 + 2) * (b3 + 1) / 2),
            RankOneCase::B11 => Some((alpha - b3 + 2) * (alpha - b3 + 1) / 2),
            RankOneCase::B15 => Some((alpha - b3 + 1) * (alpha - b3) / 2),
            RankOneCase::B8 => Some((n - alpha + 2) * (n - alpha + 1) / 2),
            RankOneCase::B13 => None,
        }
    }
}

impl fmt::Display for RankOneCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.index())
    }
}

impl FromStr for RankOneCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RankOneCase::ALL
            .into_iter()
            .find(|c| c.to_string() == s.trim().to_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown case {s:?} (expected b4, b11, b15, b8 or b13)")))
    }
}

fn torus<T: Scalar>(k: usize, at: &[(usize, T)]) -> Mat<T> {
    let mut m = Mat::identity(k);
    for (i, x) in at {
        m.set(*i, *i, x.clone());
    }
    m
}

fn unipotent<T: Scalar>(k: usize, i: usize, j: usize) -> Mat<T> {
    let mut m = Mat::identity(k);
    m.set(i, j, T::one());
    m
}

/// Generators of H inside GL_k. For b13 with `tilde` the coupled pair
/// (λ, λ⁻¹) is replaced by independent scalars.
pub fn rank_one_h_generators<T: Scalar>(case: RankOneCase, k: usize, tilde: bool) -> Result<Vec<Mat<T>>> {
    let z = T::primitive_root().ok_or_else(|| Error::Invalid("needs a finite field".into()))?;
    let zi = z.inv().expect("nonzero");
    let mut out = Vec::new();
    match case {
        // diag(A, λ)
        RankOneCase::B4 => {
            out.extend(gl_generators::<T>(k - 1).iter().map(|g| block_identity(k, 0, g)));
            out.push(torus(k, &[(k - 1, z)]));
        }
        // diag(λ, B) and diag(λ, C)
        RankOneCase::B11 | RankOneCase::B8 => {
            out.extend(gl_generators::<T>(k - 1).iter().map(|g| block_identity(k, 1, g)));
            out.push(torus(k, &[(0, z)]));
        }
        // diag(1, C)
        RankOneCase::B15 => {
            if k > 0 {
                out.extend(gl_generators::<T>(k - 1).iter().map(|g| block_identity(k, 1, g)));
            }
        }
        // [[λ, 0, 0], [0, λ⁻¹, *], [0, 0, C]]
        RankOneCase::B13 => {
            if k < 2 {
                return Err(Error::Invalid("b13 needs a block of size at least 2".into()));
            }
            out.extend(gl_generators::<T>(k - 2).iter().map(|g| block_identity(k, 2, g)));
            out.extend((2..k).map(|j| unipotent(k, 1, j)));
            if tilde {
                out.push(torus(k, &[(0, z.clone())]));
                out.push(torus(k, &[(1, z)]));
            } else {
                out.push(torus(k, &[(0, z), (1, zi)]));
            }
        }
    }
    out.retain(|m| m != &Mat::identity(k));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleCount {
    pub tuple: InvariantTuple,
    pub rv_orbits: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneReport {
    pub case: String,
    pub n: usize,
    pub alpha: usize,
    pub b3: usize,
    pub p: u64,
    /// Size of the H block.
    pub k: usize,
    pub blocks: Vec<usize>,
    pub n_h: usize,
    pub n_h_formula: Option<usize>,
    /// b13 only: orbits of the larger group H̃ with independent scalars.
    pub n_h_tilde: Option<usize>,
    /// b13 only: every H̃-orbit is a union of one or two H-orbits.
    pub splits_in_at_most_two: Option<bool>,
    /// n_H · n!/∏ blocks!.
    pub rv_formula: u128,
    pub tuples: Vec<TupleCount>,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// Count H-orbits on flags of GL_k and R_V-orbits on flags of V for every
/// tuple of the case with the given b₃.
pub fn rank_one_case_count<T: Scalar>(case: RankOneCase, n: usize, alpha: usize, b3: usize, budget: &Budget) -> Result<RankOneReport> {
    let p = odd_prime::<T>()?;
    let shape = case.shape(n, alpha)?;
    let (blocks, h) = case
        .blocks(n, alpha, b3)
        .ok_or_else(|| Error::Invalid(format!("{case} does not occur with n={n}, α={alpha}, b₃={b3}")))?;
    let tuples: Vec<InvariantTuple> =
        enumerate_tuples(&shape).into_iter().filter(|t| t.get(case.index()) == 1 && t.get(3) == b3).collect();
    if tuples.is_empty() {
        return Err(Error::Invalid(format!("no tuple with {case} = 1 and b₃ = {b3} in {shape:?}")));
    }
    let k = blocks[h];
    let h_gens = rank_one_h_generators::<T>(case, k, false)?;
    let n_h = count_linear_flag_orbits(k, &full_flag_dims(k), &h_gens, budget)?.orbit_count;
    let n_h_formula = case.n_h_formula(n, alpha, b3);

    let (mut n_h_tilde, mut splits) = (None, None);
    if case == RankOneCase::B13 {
        let u = linear_flag_universe::<T>(k, &full_flag_dims(k), budget)?;
        let small = orbit_partition(&u, &h_gens, budget)?;
        let big = orbit_partition(&u, &rank_one_h_generators::<T>(case, k, true)?, budget)?;
        let mut inside: HashMap<u32, std::collections::HashSet<u32>> = HashMap::new();
        for (i, &o) in big.orbit_of.iter().enumerate() {
            inside.entry(o).or_default().insert(small.orbit_of[i]);
        }
        n_h_tilde = Some(big.orbit_count());
        splits = Some(inside.values().all(|s| (1..=2).contains(&s.len())));
    }

    let rv_formula = n_h as u128 * factorial(n) / blocks.iter().map(|&b| factorial(b)).product::<u128>();
    let mut counts = Vec::new();
    for t in tuples {
        let v = representative::<T>(&shape, &t)?;
        let basis = v.vectors();
        let local: Vec<Mat<T>> =
            rv_generators::<T>(&shape, &t)?.mats().iter().map(|g| restrict_to(g, &basis)).collect::<Result<_>>()?;
        let rv_orbits = count_linear_flag_orbits(n, &full_flag_dims(n), &local, budget)?.orbit_count;
        counts.push(TupleCount { tuple: t, rv_orbits });
    }
    let matches = n_h_formula.is_none_or(|f| f == n_h)
        && splits.unwrap_or(true)
        && n_h_tilde.is_none_or(|t| t <= n_h && n_h <= 2 * t)
        && counts.iter().all(|c| c.rv_orbits as u128 == rv_formula);
    Ok(RankOneReport {
        case: case.to_string(),
        n,
        alpha,
        b3,
        p,
        k,
        blocks,
        n_h,
        n_h_formula,
        n_h_tilde,
        splits_in_at_most_two: splits,
        rv_formula,
        tuples: counts,
        matches,
    })
}

/// The configurations used by the verification suite: rank 3, α = 2.
pub fn minimal_rank_one_cases() -> Vec<(RankOneCase, usize, usize, usize)> {
    let mut out = Vec::new();
    for b3 in 0..=2 {
        out.push((RankOneCase::B4, 3, 2, b3));
        out.push((RankOneCase::B11, 3, 2, b3));
    }
    for b3 in 0..=1 {
        out.push((RankOneCase::B15, 3, 2, b3));
        out.push((RankOneCase::B13, 3, 2, b3));
    }
    out.push((RankOneCase::B8, 3, 2, 0));
    out
}
