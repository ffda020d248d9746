//! The oracle's counting checks: R-orbits against the tuple enumerator,
//! double cosets against the product formula, and the Grassmannian
//! finiteness argument under H₁ × B₂.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use super::{
    count_linear_flag_orbits, full_flag_dims, isotropic_flag_universe, linear_flag_universe, orbit_partition, Budget,
    ChainShape, Codec, OracleReport, Universe,
};
use crate::canonical::tools::block_identity;
use crate::canonical::{canonicalize, representative};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::invariants::{compute_b_with, enumerate_tuples, InvariantTuple, PairShape, PairSpaces};
use crate::linalg::{enumerate_subspaces, unit, Mat, Subspace};
use crate::stabilizer::{gl_generators, group_closure, odd_prime, r_generators};

fn describe(s: &PairShape) -> String {
    format!("n={} a0={} a+={} a-={} a1={}", s.n, s.a0, s.ap, s.am, s.a1)
}

/// R-orbits on maximal isotropic subspaces for the model pair of `shape`,
/// compared with the number of invariant tuples. Along the way: compute_b
/// is constant on every orbit, distinct orbits carry distinct tuples, and
/// canonicalizing each orbit's smallest point lands on the representative
/// of its tuple, which lies in the same orbit.
pub fn count_r_orbits<T: Scalar>(shape: &PairShape, budget: &Budget) -> Result<OracleReport> {
    let p = odd_prime::<T>()?;
    if shape.n == 0 {
        return Err(Error::Invalid("rank 0 has no isotropic subspaces to move".into()));
    }
    let u = isotropic_flag_universe::<T>(shape.n, &[shape.n], budget)?;
    let gens = r_generators::<T>(shape)?;
    let part = orbit_partition(&u, gens.mats(), budget)?;
    let (up, um) = shape.model_pair::<T>();
    let ps = PairSpaces::new(&up, &um);
    let tuples = enumerate_tuples(shape);
    let mut witnesses = Vec::new();

    let mut orbit_tuple: Vec<Option<InvariantTuple>> = vec![None; part.orbit_count()];
    for i in 0..u.len() {
        let v = u.point(i).remove(0);
        let t = compute_b_with(shape, &ps, &v)?;
        let slot = &mut orbit_tuple[part.orbit_of[i] as usize];
        match slot {
            None => *slot = Some(t),
            Some(s) if *s != t => {
                witnesses.push(format!("orbit {} mixes tuples {:?} and {:?}", part.orbit_of[i], s.b, t.b));
            }
            _ => {}
        }
    }
    let found: HashSet<InvariantTuple> = orbit_tuple.iter().flatten().copied().collect();
    if found.len() != part.orbit_count() {
        witnesses.push(format!("{} orbits carry only {} distinct tuples", part.orbit_count(), found.len()));
    }
    let want: HashSet<InvariantTuple> = tuples.iter().copied().collect();
    for t in want.difference(&found) {
        witnesses.push(format!("tuple {:?} eps {} is not realized", t.b, t.eps));
    }
    for t in found.difference(&want) {
        witnesses.push(format!("tuple {:?} eps {} is realized but not enumerated", t.b, t.eps));
    }

    for (id, &i) in part.representatives.iter().enumerate() {
        let v = u.point(i).remove(0);
        let Some(t) = orbit_tuple[id] else { continue };
        let rep = representative::<T>(shape, &t)?;
        match canonicalize(&up, &um, &v) {
            Ok(c) if c.representative == rep => {}
            Ok(_) => witnesses.push(format!("orbit {id}: canonical form differs from the representative")),
            Err(e) => witnesses.push(format!("orbit {id}: canonicalize failed: {e}")),
        }
        match u.index_of(std::slice::from_ref(&rep)) {
            Some(j) if part.orbit_of[j] as usize == id => {}
            _ => witnesses.push(format!("orbit {id}: representative lies in another orbit")),
        }
    }

    let expected = tuples.len() as u128;
    Ok(OracleReport {
        config: format!("R-orbits on maximal isotropics, {}", describe(shape)),
        p,
        point_count: u.len(),
        orbit_count: part.orbit_count(),
        expected,
        matches: part.orbit_count() as u128 == expected && witnesses.is_empty(),
        orbit_sizes: part.sorted_sizes(),
        witnesses,
    })
}

/// Diagonal orbit count on 𝒯 = M_(α) × M_(β) × M_c: the first two flags
/// run over the pair shapes, the third over the isotropic flags of type
/// `moving` under R for that shape.
#[derive(Clone, Debug, Serialize)]
pub struct TripleCount {
    pub n: usize,
    pub alpha: usize,
    pub beta: usize,
    pub moving: Vec<usize>,
    pub p: u64,
    pub per_shape: Vec<(PairShape, usize)>,
    pub total: usize,
}

pub fn triple_orbit_count<T: Scalar>(n: usize, alpha: usize, beta: usize, moving: &[usize], budget: &Budget) -> Result<TripleCount> {
    let p = odd_prime::<T>()?;
    let dims: Vec<usize> = moving.iter().scan(0, |a, &x| {
        *a += x;
        Some(*a)
    }).collect();
    let u = isotropic_flag_universe::<T>(n, &dims, budget)?;
    let mut per_shape = Vec::new();
    for shape in PairShape::all(n, alpha, beta) {
        let gens = r_generators::<T>(&shape)?;
        per_shape.push((shape, orbit_partition(&u, gens.mats(), budget)?.orbit_count()));
    }
    let total = per_shape.iter().map(|x| x.1).sum();
    Ok(TripleCount { n, alpha, beta, moving: moving.to_vec(), p, per_shape, total })
}

fn primitive<T: Scalar>() -> T {
    T::primitive_root().unwrap_or_else(|| T::from_i64(2))
}

/// Upper triangular matrices in GL_k.
pub fn borel_generators<T: Scalar>(k: usize) -> Vec<Mat<T>> {
    let mut out = Vec::new();
    for i in 0..k {
        let mut d = Mat::identity(k);
        d.set(i, i, primitive());
        out.push(d);
        for j in i + 1..k {
            let mut m = Mat::identity(k);
            m.set(i, j, T::one());
            out.push(m);
        }
    }
    out.retain(|m| m != &Mat::identity(k));
    out
}

/// The subgroup diag(1, A) of GL_k with A upper triangular in GL_{k−1}.
pub fn hashimoto_generators<T: Scalar>(k: usize) -> Vec<Mat<T>> {
    if k == 0 {
        return Vec::new();
    }
    borel_generators::<T>(k - 1).iter().map(|a| block_identity(k, 1, a)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCosetReport {
    pub n_gl: usize,
    pub parts: Vec<usize>,
    pub block: usize,
    pub p: u64,
    /// H-orbits on the full flags of the chosen block.
    pub n_h: usize,
    /// Q-orbits on the full flags of GF(p)^{n_gl}.
    pub count: usize,
    /// n_H · n! / (α₁! ⋯ α_p!).
    pub formula: u128,
    #[serde(rename = "match")]
    pub matches: bool,
}

pub(crate) fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// |Q\G/B| for Q = H·N_j inside the block upper triangular parabolic with
/// diagonal blocks `parts`, where H acts on block `block` (0-based) and the
/// other Levi blocks are full GL. Compared with n_H · n!/∏αᵢ!.
pub fn double_coset_count<T: Scalar>(h_gens: &[Mat<T>], parts: &[usize], block: usize, budget: &Budget) -> Result<DoubleCosetReport> {
    let p = odd_prime::<T>()?;
    if block >= parts.len() || parts.contains(&0) {
        return Err(Error::Invalid(format!("block {block} of composition {parts:?}")));
    }
    let k = parts[block];
    if h_gens.iter().any(|h| h.rows() != k || h.cols() != k) {
        return Err(Error::Dimension(format!("H must act on a block of size {k}")));
    }
    let n_gl: usize = parts.iter().sum();
    let offs: Vec<usize> = parts.iter().scan(0, |a, &x| {
        let o = *a;
        *a += x;
        Some(o)
    }).collect();
    let mut q_gens = Vec::new();
    for (b, (&size, &off)) in parts.iter().zip(&offs).enumerate() {
        let local = if b == block { h_gens.to_vec() } else { gl_generators::<T>(size) };
        q_gens.extend(local.iter().map(|g| block_identity(n_gl, off, g)));
        for i in off..off + size {
            for j in off + size..n_gl {
                let mut m = Mat::identity(n_gl);
                m.set(i, j, T::one());
                q_gens.push(m);
            }
        }
    }
    let n_h = count_linear_flag_orbits(k, &full_flag_dims(k), h_gens, budget)?.orbit_count;
    let u = linear_flag_universe::<T>(n_gl, &full_flag_dims(n_gl), budget)?;
    let count = orbit_partition(&u, &q_gens, budget)?.orbit_count();
    let formula = n_h as u128 * factorial(n_gl) / parts.iter().map(|&a| factorial(a)).product::<u128>();
    Ok(DoubleCosetReport { n_gl, parts: parts.to_vec(), block, p, n_h, count, formula, matches: count as u128 == formula })
}

/// A normal form S₀ = U_{1,p} ⊕ span(e_i : i ∈ J) ⊕ span(e_{p+k} + e_{j_k}).
/// `j` and `k` are indices into U₂, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NormalForm {
    pub p: usize,
    pub j: Vec<usize>,
    pub k: Vec<usize>,
}

impl NormalForm {
    pub fn subspace<T: Scalar>(&self, m: usize, n2: usize) -> Subspace<T> {
        let big = m + n2;
        let mut vs: Vec<Vec<T>> = (0..self.p).map(|i| unit(big, i)).collect();
        vs.extend(self.j.iter().map(|&i| unit(big, m + i)));
        for (t, &i) in self.k.iter().enumerate() {
            let mut v = unit::<T>(big, self.p + t);
            v[m + i] = T::one();
            vs.push(v);
        }
        Subspace::span(big, &vs)
    }

    /// Dimensions of U_{1,p} ⊂ U_{1,p+1} ⊂ ⋯ ⊂ U_{1,p+r} strictly inside U₁.
    pub fn parabolic_dims(&self, m: usize) -> Vec<usize> {
        (self.p..=self.p + self.k.len()).filter(|&d| d > 0 && d < m).collect()
    }
}

/// All normal forms of s-dimensional subspaces of U₁ ⊕ U₂.
pub fn normal_forms(m: usize, n2: usize, s: usize) -> Vec<NormalForm> {
    let mut out = Vec::new();
    let total = 3usize.pow(n2 as u32);
    for code in 0..total {
        let mut c = code;
        let (mut j, mut k) = (Vec::new(), Vec::new());
        for i in 0..n2 {
            match c % 3 {
                1 => j.push(i),
                2 => k.push(i),
                _ => {}
            }
            c /= 3;
        }
        if j.len() + k.len() > s {
            continue;
        }
        let p = s - j.len() - k.len();
        if p + k.len() <= m {
            out.push(NormalForm { p, j, k });
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GrassmannReport {
    pub m: usize,
    pub n2: usize,
    pub s: usize,
    pub p: u64,
    pub point_count: usize,
    /// H₁ × B₂ orbits.
    pub orbit_count: usize,
    pub normal_form_count: usize,
    /// G₁ × B₂ orbits; each should hold exactly one normal form.
    pub g1b2_orbit_count: usize,
    /// Every G₁ × B₂ orbit contains a normal form.
    pub every_orbit_has_normal_form: bool,
    /// H₁ × B₂ orbits that contain a normal form; all of them only when H₁
    /// is large enough.
    pub h1_orbits_with_normal_form: usize,
    /// Σ over normal forms of |H₁\G₁/P₁|.
    pub predicted_count: usize,
    /// Number of admissible (p, q, r).
    pub signature_count: usize,
    /// G₁ × G₂ orbits.
    pub g1g2_orbit_count: usize,
    #[serde(rename = "match")]
    pub matches: bool,
}

fn block_sum_gens<T: Scalar>(m: usize, n2: usize, g1: &[Mat<T>], g2: &[Mat<T>]) -> Vec<Mat<T>> {
    let big = m + n2;
    g1.iter().map(|g| block_identity(big, 0, g)).chain(g2.iter().map(|g| block_identity(big, m, g))).collect()
}

/// H₁ × B₂ acting on s-dimensional subspaces of GF(p)^{m+n₂}. Checks that
/// every G₁ × B₂ orbit meets a normal form, that normal forms index G₁ × B₂ orbits
/// bijectively, that G₁ × G₂ orbits are the (p, q, r) signatures, and that
/// the H₁ × B₂ count equals Σ |H₁\G₁/P₁| over normal forms.
pub fn grassmann_finiteness_check<T: Scalar>(m: usize, n2: usize, s: usize, h1_gens: &[Mat<T>], budget: &Budget) -> Result<GrassmannReport> {
    let p = odd_prime::<T>()?;
    let big = m + n2;
    if s == 0 || s >= big {
        return Err(Error::Invalid(format!("need 0 < s < {big}, got {s}")));
    }
    if h1_gens.iter().any(|h| h.rows() != m || h.cols() != m) {
        return Err(Error::Dimension(format!("H1 must act on a space of dimension {m}")));
    }
    let pts = enumerate_subspaces::<T>(big, s, budget.points)?;
    let points: Vec<Vec<Subspace<T>>> = pts.into_iter().map(|x| vec![x]).collect();
    let u = Universe::from_points(Codec::new(ChainShape { ambient: big, dims: vec![s] })?, &points)?;

    let b2 = borel_generators::<T>(n2);
    let part = orbit_partition(&u, &block_sum_gens(m, n2, h1_gens, &b2), budget)?;
    let g1b2 = orbit_partition(&u, &block_sum_gens(m, n2, &gl_generators::<T>(m), &b2), budget)?;
    let g1g2 = orbit_partition(&u, &block_sum_gens(m, n2, &gl_generators::<T>(m), &gl_generators::<T>(n2)), budget)?;

    let forms = normal_forms(m, n2, s);
    let mut hit = vec![false; part.orbit_count()];
    let mut hit_g1b2 = vec![false; g1b2.orbit_count()];
    let mut g1b2_hits: HashMap<u32, usize> = HashMap::new();
    let mut cache: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut predicted = 0;
    for f in &forms {
        let i = u
            .index_of(&[f.subspace::<T>(m, n2)])
            .ok_or_else(|| Error::Invalid("normal form outside the Grassmannian".into()))?;
        hit[part.orbit_of[i] as usize] = true;
        hit_g1b2[g1b2.orbit_of[i] as usize] = true;
        *g1b2_hits.entry(g1b2.orbit_of[i]).or_default() += 1;
        let dims = f.parabolic_dims(m);
        let c = match cache.get(&dims) {
            Some(&c) => c,
            None => {
                let c = count_linear_flag_orbits(m, &dims, h1_gens, budget)?.orbit_count;
                cache.insert(dims, c);
                c
            }
        };
        predicted += c;
    }
    let every = hit_g1b2.iter().all(|&h| h);
    let bijective = g1b2_hits.len() == g1b2.orbit_count() && g1b2_hits.values().all(|&c| c == 1);
    let mut signatures = 0;
    for r in 0..=s {
        for q in 0..=s - r {
            let pp = s - r - q;
            if pp + r <= m && q + r <= n2 {
                signatures += 1;
            }
        }
    }
    let matches = every && bijective && predicted == part.orbit_count() && signatures == g1g2.orbit_count();
    Ok(GrassmannReport {
        m,
        n2,
        s,
        p,
        point_count: u.len(),
        orbit_count: part.orbit_count(),
        normal_form_count: forms.len(),
        g1b2_orbit_count: g1b2.orbit_count(),
        every_orbit_has_normal_form: every,
        h1_orbits_with_normal_form: hit.iter().filter(|&&h| h).count(),
        predicted_count: predicted,
        signature_count: signatures,
        g1g2_orbit_count: g1g2.orbit_count(),
        matches,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub m: usize,
    pub n2: usize,
    pub s: usize,
    pub normal_forms: usize,
    pub failures: Vec<NormalForm>,
}

/// For every normal form S₀, the G₁-components of its stabilizer in
/// G₁ × B₂ form exactly the parabolic P₁ of U_{1,p} ⊂ ⋯ ⊂ U_{1,p+r}.
/// Both groups are listed element by element, so keep the sizes tiny.
pub fn projection_check<T: Scalar>(m: usize, n2: usize, s: usize, budget: &Budget) -> Result<ProjectionReport> {
    let cap = budget.points.min(usize::MAX as u128) as usize;
    let g1 = group_closure(m, &gl_generators::<T>(m), cap)?;
    let b2 = group_closure(n2, &borel_generators::<T>(n2), cap)?;
    let work = g1.len() as u128 * b2.len() as u128;
    if work > budget.applications {
        return Err(Error::Budget { what: "projection check".into(), needed: work, budget: budget.applications });
    }
    let big = m + n2;
    let mut failures = Vec::new();
    let forms = normal_forms(m, n2, s);
    for f in &forms {
        let s0 = f.subspace::<T>(m, n2);
        let flag: Vec<Subspace<T>> = (f.p..=f.p + f.k.len())
            .map(|d| Subspace::coordinate(m, &(0..d).collect::<Vec<_>>()))
            .collect();
        let p1: HashSet<&Mat<T>> = g1.iter().filter(|g| flag.iter().all(|x| &x.image(g) == x)).collect();
        let proj: HashSet<&Mat<T>> = g1
            .iter()
            .filter(|a| {
                let top = block_identity(big, 0, a);
                b2.iter().any(|b| s0.image(&block_identity(big, m, b).mul(&top)) == s0)
            })
            .collect();
        if p1 != proj {
            failures.push(f.clone());
        }
    }
    Ok(ProjectionReport { m, n2, s, normal_forms: forms.len(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5};
    use num_traits::Zero;

    #[test]
    fn rank_one_examples() {
        let b = Budget::default();
        let r = count_r_orbits::<Gf3>(&PairShape::new(1, 1, 0, 0, 0).unwrap(), &b).unwrap();
        assert!(r.matches, "{r:?}");
        assert_eq!(r.orbit_sizes, vec![1, 3]);
        let r = count_r_orbits::<Gf3>(&PairShape::new(1, 0, 0, 0, 1).unwrap(), &b).unwrap();
        assert!(r.matches, "{r:?}");
        assert_eq!(r.orbit_sizes, vec![1, 1, 2]);
    }

    #[test]
    fn rank_two_plus_minus_shape() {
        let b = Budget::default();
        let s = PairShape::new(2, 0, 1, 1, 0).unwrap();
        let r = count_r_orbits::<Gf3>(&s, &b).unwrap();
        assert!(r.matches, "{r:?}");
        assert_eq!(r.orbit_count, enumerate_tuples(&s).len());
    }

    #[test]
    fn hashimoto_instance_gives_nine() {
        let r = double_coset_count::<Gf3>(&hashimoto_generators(2), &[1, 2], 1, &Budget::default()).unwrap();
        assert_eq!((r.n_h, r.count, r.formula), (3, 9, 9));
        assert!(r.matches);
    }

    #[test]
    fn parabolic_counts() {
        let b = Budget::default();
        let r = double_coset_count::<Gf3>(&gl_generators(2), &[2, 1], 0, &b).unwrap();
        assert_eq!((r.count, r.formula), (3, 3));
        let r = double_coset_count::<Gf3>(&[], &[1, 1, 1], 1, &b).unwrap();
        assert_eq!(r.count, 6);
        // Trivial H in a block of size 2: n_H = |L_j/(L_j∩B)| = 4 flags.
        let r = double_coset_count::<Gf3>(&[], &[2, 1], 0, &b).unwrap();
        assert_eq!((r.n_h, r.count, r.formula), (4, 12, 12));
    }

    #[test]
    fn hashimoto_generators_shape() {
        for g in hashimoto_generators::<Gf5>(3) {
            assert_eq!(g.get(0, 0), &Gf5::new(1));
            assert!(g.get(2, 1).is_zero() && g.get(1, 0).is_zero() && g.get(0, 1).is_zero());
        }
    }

    #[test]
    fn grassmann_small_cases() {
        let b = Budget::default();
        let r = grassmann_finiteness_check::<Gf3>(2, 2, 2, &gl_generators(2), &b).unwrap();
        assert!(r.matches, "{r:?}");
        assert_eq!(r.orbit_count, r.normal_form_count);
        let r = grassmann_finiteness_check::<Gf3>(2, 2, 1, &[], &b).unwrap();
        assert!(r.matches, "{r:?}");
        assert!(r.h1_orbits_with_normal_form < r.orbit_count);
        let r3 = grassmann_finiteness_check::<Gf3>(2, 2, 2, &borel_generators(2), &b).unwrap();
        let r5 = grassmann_finiteness_check::<Gf5>(2, 2, 2, &borel_generators(2), &b).unwrap();
        assert!(r3.matches && r5.matches);
        assert_eq!(r3.orbit_count, r5.orbit_count);
    }

    #[test]
    fn projection_tiny() {
        let r = projection_check::<Gf3>(2, 2, 2, &Budget::default()).unwrap();
        assert!(r.failures.is_empty(), "{r:?}");
    }
}
