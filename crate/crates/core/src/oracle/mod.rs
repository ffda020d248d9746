//! Brute-force orbit enumeration over GF(p).
//!
//! Points are chains of subspaces (a single subspace is a chain of length
//! one). Each point is packed into a `u128` from the entries of its RREF
//! bases, first entry in the most significant bits, so numeric order on codes
//! is lexicographic order on bases. Universes are produced by closure of a
//! standard point under generators of the full group and then checked
//! against the closed-form point count; a disagreement is an error.

pub mod counts;
pub mod reduction;

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{gaussian_binomial, Mat, Subspace};
use crate::stabilizer::{gl_generators, orthogonal_group_generators};

pub use counts::{
    borel_generators, count_r_orbits, double_coset_count, grassmann_finiteness_check, hashimoto_generators,
    projection_check, triple_orbit_count, DoubleCosetReport, GrassmannReport, ProjectionReport, TripleCount,
};

/// Limits on oracle work. Exceeding either fails loudly; nothing is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub points: u128,
    pub applications: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { points: 1_000_000, applications: 100_000_000 }
    }
}

impl Budget {
    /// The default budget with the point limit taken from `ISOFLAG_BUDGET`
    /// when that variable holds an integer.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(v) = std::env::var("ISOFLAG_BUDGET").ok().and_then(|s| s.trim().parse::<u128>().ok()) {
            b.points = v;
        }
        b
    }

    fn check_points(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.points {
            return Err(Error::Budget { what: what.into(), needed, budget: self.points });
        }
        Ok(())
    }

    fn check_applications(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.applications {
            return Err(Error::Budget { what: what.into(), needed, budget: self.applications });
        }
        Ok(())
    }
}

/// Ambient dimension and the increasing member dimensions of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ChainShape {
    pub ambient: usize,
    pub dims: Vec<usize>,
}

/// Packs chains of a fixed shape into `u128` codes.
#[derive(Clone, Debug)]
pub struct Codec<T> {
    shape: ChainShape,
    elems: Vec<T>,
    bits: u32,
    entries: usize,
}

impl<T: Scalar> Codec<T> {
    pub fn new(shape: ChainShape) -> Result<Self> {
        let elems = T::elements().ok_or_else(|| Error::Invalid("the oracle needs a finite field".into()))?;
        if shape.dims.windows(2).any(|w| w[0] >= w[1]) || shape.dims.iter().any(|&d| d > shape.ambient) {
            return Err(Error::Invalid(format!("chain dimensions {:?} are not increasing within {}", shape.dims, shape.ambient)));
        }
        let bits = usize::BITS - (elems.len() - 1).leading_zeros();
        let entries: usize = shape.dims.iter().map(|d| d * shape.ambient).sum();
        if entries as u128 * bits as u128 > 128 {
            return Err(Error::Budget {
                what: format!("point code for chains {:?} in dimension {}", shape.dims, shape.ambient),
                needed: entries as u128 * bits as u128,
                budget: 128,
            });
        }
        Ok(Codec { shape, elems, bits, entries })
    }

    pub fn shape(&self) -> &ChainShape {
        &self.shape
    }

    pub fn q(&self) -> u128 {
        self.elems.len() as u128
    }

    pub fn encode(&self, chain: &[Subspace<T>]) -> Result<u128> {
        if chain.len() != self.shape.dims.len()
            || chain.iter().zip(&self.shape.dims).any(|(s, &d)| s.dim() != d || s.ambient() != self.shape.ambient)
        {
            return Err(Error::Dimension(format!("chain does not have shape {:?}", self.shape)));
        }
        let mut code = 0u128;
        for s in chain {
            for x in s.basis().entries() {
                code = (code << self.bits) | x.to_index().expect("finite field") as u128;
            }
        }
        Ok(code)
    }

    fn digit(&self, code: u128, k: usize) -> usize {
        let shift = (self.entries - 1 - k) as u32 * self.bits;
        ((code >> shift) & ((1u128 << self.bits) - 1)) as usize
    }

    pub fn decode(&self, code: u128) -> Vec<Subspace<T>> {
        let big = self.shape.ambient;
        let mut k = 0;
        self.shape
            .dims
            .iter()
            .map(|&d| {
                let data: Vec<T> = (0..d * big).map(|i| self.elems[self.digit(code, k + i)].clone()).collect();
                k += d * big;
                Subspace::from_rref_unchecked(Mat::new(d, big, data))
            })
            .collect()
    }

    /// Code of g·x, computed on the packed form without building subspaces.
    pub fn apply(&self, code: u128, g: &Mat<T>, buf: &mut Vec<T>) -> u128 {
        let big = self.shape.ambient;
        let ge = g.entries();
        let mask = (1u128 << self.bits) - 1;
        let mut digits = [0u8; 128];
        let mut c = code;
        for k in (0..self.entries).rev() {
            digits[k] = (c & mask) as u8;
            c >>= self.bits;
        }
        let mut out = 0u128;
        let mut k = 0;
        for &d in &self.shape.dims {
            buf.clear();
            for r in 0..d {
                let row = &digits[k + r * big..k + (r + 1) * big];
                for i in 0..big {
                    let gi = &ge[i * big..(i + 1) * big];
                    let mut acc = T::zero();
                    for (gx, &dj) in gi.iter().zip(row) {
                        if dj != 0 && !gx.is_zero() {
                            acc = acc + gx.clone() * self.elems[dj as usize].clone();
                        }
                    }
                    buf.push(acc);
                }
            }
            rref_in_place(buf, d, big);
            for x in buf.iter() {
                out = (out << self.bits) | x.to_index().expect("finite field") as u128;
            }
            k += d * big;
        }
        out
    }
}

/// Reduced row echelon form of a full-rank d×big row-major block.
fn rref_in_place<T: Scalar>(a: &mut [T], d: usize, big: usize) {
    let mut row = 0;
    for col in 0..big {
        if row == d {
            break;
        }
        let Some(piv) = (row..d).find(|&r| !a[r * big + col].is_zero()) else { continue };
        if piv != row {
            for c in 0..big {
                a.swap(piv * big + c, row * big + c);
            }
        }
        let inv = a[row * big + col].inv().expect("nonzero pivot");
        for c in col..big {
            a[row * big + c] = a[row * big + c].clone() * inv.clone();
        }
        for r in 0..d {
            if r != row && !a[r * big + col].is_zero() {
                let f = a[r * big + col].clone();
                for c in col..big {
                    let t = a[row * big + c].clone();
                    a[r * big + c] = a[r * big + c].clone() - f.clone() * t;
                }
            }
        }
        row += 1;
    }
}

/// A finite set of points with a fast code → index map. Codes are sorted.
#[derive(Clone, Debug)]
pub struct Universe<T> {
    codec: Codec<T>,
    codes: Vec<u128>,
    index: HashMap<u128, u32>,
}

impl<T: Scalar> Universe<T> {
    pub fn from_codes(codec: Codec<T>, mut codes: Vec<u128>) -> Self {
        codes.sort_unstable();
        codes.dedup();
        let index = codes.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
        Universe { codec, codes, index }
    }

    pub fn from_points(codec: Codec<T>, points: &[Vec<Subspace<T>>]) -> Result<Self> {
        let codes = points.iter().map(|p| codec.encode(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_codes(codec, codes))
    }

    /// Everything reachable from the seeds under the generators.
    pub fn by_closure(codec: Codec<T>, seeds: &[Vec<Subspace<T>>], gens: &[Mat<T>], budget: &Budget) -> Result<Self> {
        let mut seen: HashSet<u128> = HashSet::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            let c = codec.encode(s)?;
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
        let mut buf = Vec::new();
        let mut apps: u128 = 0;
        while let Some(c) = queue.pop_front() {
            for g in gens {
                apps += 1;
                budget.check_applications("universe closure", apps)?;
                let h = codec.apply(c, g, &mut buf);
                if seen.insert(h) {
                    budget.check_points("universe closure", seen.len() as u128)?;
                    queue.push_back(h);
                }
            }
        }
        Ok(Self::from_codes(codec, seen.into_iter().collect()))
    }

    pub fn codec(&self) -> &Codec<T> {
        &self.codec
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u128] {
        &self.codes
    }

    pub fn point(&self, i: usize) -> Vec<Subspace<T>> {
        self.codec.decode(self.codes[i])
    }

    pub fn index_of_code(&self, c: u128) -> Option<usize> {
        self.index.get(&c).map(|&i| i as usize)
    }

    pub fn index_of(&self, chain: &[Subspace<T>]) -> Option<usize> {
        self.codec.encode(chain).ok().and_then(|c| self.index_of_code(c))
    }
}

/// Orbits of a generated group on a universe. Orbit ids follow the smallest
/// code in each orbit, which is also the recorded representative.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitPartition {
    pub orbit_of: Vec<u32>,
    pub sizes: Vec<usize>,
    pub representatives: Vec<usize>,
    pub applications: u128,
}

impl OrbitPartition {
    pub fn orbit_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn same_orbit(&self, i: usize, j: usize) -> bool {
        self.orbit_of[i] == self.orbit_of[j]
    }

    /// Orbit sizes in increasing order.
    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable();
        s
    }

    pub fn summary(&self) -> OrbitSummary {
        OrbitSummary {
            point_count: self.orbit_of.len(),
            orbit_count: self.orbit_count(),
            orbit_sizes: self.sorted_sizes(),
        }
    }
}

/// Counts only, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitSummary {
    pub point_count: usize,
    pub orbit_count: usize,
    pub orbit_sizes: Vec<usize>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

/// Partition the universe into orbits of the group generated by `gens`.
/// Every generator must map the universe into itself.
pub fn orbit_partition<T: Scalar>(u: &Universe<T>, gens: &[Mat<T>], budget: &Budget) -> Result<OrbitPartition> {
    let n = u.len();
    let apps = n as u128 * gens.len() as u128;
    budget.check_applications("orbit partition", apps)?;
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut buf = Vec::new();
    for g in gens {
        for i in 0..n {
            let h = u.codec.apply(u.codes[i], g, &mut buf);
            let j = u
                .index_of_code(h)
                .ok_or_else(|| Error::Invalid("a generator moves a point out of the universe".into()))?;
            let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
            if a != b {
                // Keep the smaller index as root so roots are orbit minima.
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi as usize] = lo;
            }
        }
    }
    let mut id_of_root: HashMap<u32, u32> = HashMap::new();
    let mut orbit_of = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    let mut representatives = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i as u32);
        let id = *id_of_root.entry(r).or_insert_with(|| {
            sizes.push(0);
            representatives.push(i);
            (sizes.len() - 1) as u32
        });
        sizes[id as usize] += 1;
        orbit_of.push(id);
    }
    Ok(OrbitPartition { orbit_of, sizes, representatives, applications: apps })
}

/// The orbit of one point, as sorted codes, without a precomputed universe.
pub fn orbit_of_point<T: Scalar>(codec: &Codec<T>, start: &[Subspace<T>], gens: &[Mat<T>], budget: &Budget) -> Result<Vec<u128>> {
    let c0 = codec.encode(start)?;
    let mut seen: HashSet<u128> = HashSet::from([c0]);
    let mut queue = VecDeque::from([c0]);
    let mut buf = Vec::new();
    let mut apps: u128 = 0;
    while let Some(c) = queue.pop_front() {
        for g in gens {
            apps += 1;
            budget.check_applications("single orbit", apps)?;
            let h = codec.apply(c, g, &mut buf);
            if seen.insert(h) {
                budget.check_points("single orbit", seen.len() as u128)?;
                queue.push_back(h);
            }
        }
    }
    let mut out: Vec<u128> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Number of isotropic k-subspaces of GF(q)^{2n+1}:
/// ∏_{i<k} (q^{2(n−i)} − 1)/(q^{i+1} − 1).
pub fn isotropic_subspace_count(n: usize, k: usize, q: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.checked_mul(q.checked_pow(2 * (n - i) as u32)? - 1)?;
        den = den.checked_mul(q.checked_pow(i as u32 + 1)? - 1)?;
    }
    Some(num / den)
}

/// Gaussian multinomial: the number of flags with the given increasing
/// dimensions inside GF(q)^k.
pub fn gaussian_multinomial(k: usize, dims: &[usize], q: u128) -> Option<u128> {
    let mut out: u128 = 1;
    let mut top = k;
    for &d in dims.iter().rev() {
        out = out.checked_mul(gaussian_binomial(top, d, q))?;
        top = d;
    }
    Some(out)
}

/// Number of isotropic flags with the given dimensions in GF(q)^{2n+1}.
pub fn isotropic_flag_count(n: usize, dims: &[usize], q: u128) -> Option<u128> {
    match dims.last() {
        None => Some(1),
        Some(&top) => isotropic_subspace_count(n, top, q)?.checked_mul(gaussian_multinomial(top, &dims[..dims.len() - 1], q)?),
    }
}

/// ∏_{i=1}^n (q^i + 1), the number of maximal isotropic subspaces.
pub fn max_isotropic_count(n: usize, q: u128) -> u128 {
    (1..=n).map(|i| q.pow(i as u32) + 1).product()
}

fn standard_chain<T: Scalar>(ambient: usize, dims: &[usize]) -> Vec<Subspace<T>> {
    dims.iter().map(|&d| Subspace::coordinate(ambient, &(0..d).collect::<Vec<_>>())).collect()
}

/// All isotropic flags with the given dimensions in GF(p)^{2n+1}, as the
/// O_{2n+1}-orbit of the standard flag.
pub fn isotropic_flag_universe<T: Scalar>(n: usize, dims: &[usize], budget: &Budget) -> Result<Universe<T>> {
    let codec = Codec::new(ChainShape { ambient: 2 * n + 1, dims: dims.to_vec() })?;
    if dims.last().is_some_and(|&t| t > n) {
        return Err(Error::Invalid(format!("isotropic flags of dimension {dims:?} need rank at least {}", dims[dims.len() - 1])));
    }
    let q = codec.q();
    let expected = isotropic_flag_count(n, dims, q).unwrap_or(u128::MAX);
    budget.check_points("isotropic flags", expected)?;
    let u = Universe::by_closure(codec, &[standard_chain(2 * n + 1, dims)], &orthogonal_group_generators::<T>(n), budget)?;
    if u.len() as u128 != expected {
        return Err(Error::Invalid(format!("closure found {} isotropic flags {dims:?}, the count formula gives {expected}", u.len())));
    }
    Ok(u)
}

/// All flags with the given dimensions in GF(p)^k.
pub fn linear_flag_universe<T: Scalar>(k: usize, dims: &[usize], budget: &Budget) -> Result<Universe<T>> {
    let codec = Codec::new(ChainShape { ambient: k, dims: dims.to_vec() })?;
    let expected = gaussian_multinomial(k, dims, codec.q()).unwrap_or(u128::MAX);
    budget.check_points("linear flags", expected)?;
    let u = Universe::by_closure(codec, &[standard_chain(k, dims)], &gl_generators::<T>(k), budget)?;
    if u.len() as u128 != expected {
        return Err(Error::Invalid(format!("closure found {} flags {dims:?} in dimension {k}, the count formula gives {expected}", u.len())));
    }
    Ok(u)
}

/// Dimensions 1, 2, …, k−1 of a full flag in GF(p)^k.
pub fn full_flag_dims(k: usize) -> Vec<usize> {
    (1..k).collect()
}

/// Every maximal isotropic subspace of GF(p)^{2n+1}.
pub fn enumerate_max_isotropic<T: Scalar>(n: usize, budget: &Budget) -> Result<Vec<Subspace<T>>> {
    if n == 0 {
        return Ok(vec![Subspace::zero(1)]);
    }
    let u = isotropic_flag_universe::<T>(n, &[n], budget)?;
    Ok((0..u.len()).map(|i| u.point(i).remove(0)).collect())
}

/// Orbits of the generated group on isotropic flags of type `dims`.
pub fn count_flag_orbits<T: Scalar>(n: usize, dims: &[usize], gens: &[Mat<T>], budget: &Budget) -> Result<OrbitSummary> {
    let u = isotropic_flag_universe::<T>(n, dims, budget)?;
    Ok(orbit_partition(&u, gens, budget)?.summary())
}

/// Orbits of the generated group (k×k matrices) on flags of type `dims`
/// in GF(p)^k.
pub fn count_linear_flag_orbits<T: Scalar>(k: usize, dims: &[usize], gens: &[Mat<T>], budget: &Budget) -> Result<OrbitSummary> {
    let u = linear_flag_universe::<T>(k, dims, budget)?;
    Ok(orbit_partition(&u, gens, budget)?.summary())
}

/// Machine-readable result of one oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub config: String,
    pub p: u64,
    pub point_count: usize,
    pub orbit_count: usize,
    pub expected: u128,
    #[serde(rename = "match")]
    pub matches: bool,
    pub orbit_sizes: Vec<usize>,
    pub witnesses: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5, Gf7};

    #[test]
    fn max_isotropic_counts() {
        let b = Budget::default();
        assert_eq!(enumerate_max_isotropic::<Gf3>(1, &b).unwrap().len(), 4);
        assert_eq!(enumerate_max_isotropic::<Gf3>(2, &b).unwrap().len(), 40);
        assert_eq!(enumerate_max_isotropic::<Gf5>(1, &b).unwrap().len(), 6);
        assert_eq!(max_isotropic_count(3, 3), 1120);
        let all = enumerate_max_isotropic::<Gf3>(2, &b).unwrap();
        assert!(all.iter().all(crate::form::is_isotropic));
    }

    #[test]
    fn codes_round_trip_and_follow_lex_order() {
        let u = isotropic_flag_universe::<Gf5>(2, &[1, 2], &Budget::default()).unwrap();
        assert_eq!(u.len() as u128, isotropic_flag_count(2, &[1, 2], 5).unwrap());
        for i in (0..u.len()).step_by(37) {
            let p = u.point(i);
            assert_eq!(u.index_of(&p), Some(i));
        }
        let a = u.point(0);
        let b = u.point(1);
        assert!(a < b);
    }

    #[test]
    fn packed_action_matches_subspace_images() {
        let u = isotropic_flag_universe::<Gf3>(2, &[1, 2], &Budget::default()).unwrap();
        let gens = orthogonal_group_generators::<Gf3>(2);
        let mut buf = Vec::new();
        for i in (0..u.len()).step_by(11) {
            for g in &gens {
                let direct: Vec<Subspace<Gf3>> = u.point(i).iter().map(|s| s.image(g)).collect();
                assert_eq!(u.codec().apply(u.codes()[i], g, &mut buf), u.codec().encode(&direct).unwrap());
            }
        }
    }

    #[test]
    fn identity_gives_singletons_and_full_group_is_transitive() {
        let b = Budget::default();
        let u = linear_flag_universe::<Gf3>(3, &full_flag_dims(3), &b).unwrap();
        assert_eq!(u.len(), 13 * 4);
        let part = orbit_partition(&u, &[Mat::identity(3)], &b).unwrap();
        assert_eq!(part.orbit_count(), u.len());
        let part = orbit_partition(&u, &gl_generators::<Gf3>(3), &b).unwrap();
        assert_eq!(part.orbit_count(), 1);
    }

    #[test]
    fn isotropic_plane_count_at_seven() {
        assert_eq!(isotropic_subspace_count(3, 2, 7), Some(980_400));
        assert_eq!(isotropic_subspace_count(1, 1, 7), Some(8));
        assert_eq!(isotropic_flag_count(1, &[1], 3), Some(4));
        let u = isotropic_flag_universe::<Gf7>(1, &[1], &Budget::default()).unwrap();
        assert_eq!(u.len(), 8);
    }

    #[test]
    fn budgets_fail_loudly() {
        let tiny = Budget { points: 10, applications: 1_000_000 };
        assert!(matches!(isotropic_flag_universe::<Gf3>(2, &[2], &tiny), Err(Error::Budget { needed: 40, .. })));
        let tiny = Budget { points: 1_000, applications: 5 };
        let u = isotropic_flag_universe::<Gf3>(1, &[1], &Budget::default()).unwrap();
        assert!(matches!(orbit_partition(&u, &orthogonal_group_generators::<Gf3>(1), &tiny), Err(Error::Budget { .. })));
    }

    #[test]
    fn code_width_is_checked() {
        assert!(Codec::<Gf7>::new(ChainShape { ambient: 9, dims: vec![1, 2, 3, 4] }).is_err());
        assert!(Codec::<Gf3>::new(ChainShape { ambient: 3, dims: vec![2, 1] }).is_err());
    }
}
