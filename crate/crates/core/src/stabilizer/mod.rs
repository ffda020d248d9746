//! Finite generating sets over GF(p) for the pair stabilizer R and for R_V,
//! plus group closure and a direct backtracking enumerator used to check
//! that the generators really generate.

pub mod rv;
pub mod search;

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{antidiag, ell, is_orthogonal, unipotent_xz, z_free_len};
use crate::invariants::{InvariantTuple, PairShape};
use crate::linalg::{Mat, Subspace};

pub use rv::{rv_generators, RvReport};
pub use search::enumerate_stabilizer;

/// What a generator set is supposed to generate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorContext {
    /// The whole orthogonal group O_{2n+1}.
    Orthogonal { n: usize },
    /// The whole general linear group GL_k.
    GeneralLinear { k: usize },
    /// R = P_{U₊} ∩ P_{U₋} for the model pair of the shape.
    PairStabilizer { shape: PairShape },
    /// R_V for V the representative of the tuple.
    TripleStabilizer { shape: PairShape, tuple: InvariantTuple },
    /// Anything else: a block group, a conjugate, a restriction.
    Custom { label: String },
}

/// Deduplicated matrices with a tag per element. Every element was checked
/// on insertion against the subspaces it must stabilize (and against the
/// form, for orthogonal contexts).
#[derive(Clone)]
pub struct GeneratorSet<T> {
    pub ambient: usize,
    pub p: u64,
    pub context: GeneratorContext,
    orthogonal: bool,
    fixed: Vec<Subspace<T>>,
    elements: Vec<Mat<T>>,
    tags: Vec<String>,
    seen: HashSet<Mat<T>>,
}

impl<T: Scalar> std::fmt::Debug for GeneratorSet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorSet")
            .field("context", &self.context)
            .field("p", &self.p)
            .field("tags", &self.tags)
            .finish()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorEntry {
    pub tag: String,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorDump {
    pub context: GeneratorContext,
    pub p: u64,
    pub ambient: usize,
    pub generators: Vec<GeneratorEntry>,
}

/// The characteristic of a finite prime field of odd order; errors otherwise.
pub fn odd_prime<T: Scalar>() -> Result<u64> {
    let p = T::characteristic();
    if p == 0 {
        return Err(Error::Invalid("generator sets are built over GF(p) only".into()));
    }
    if p == 2 {
        return Err(Error::Invalid("characteristic 2 is not supported".into()));
    }
    Ok(p)
}

impl<T: Scalar> GeneratorSet<T> {
    pub fn new(ambient: usize, context: GeneratorContext, orthogonal: bool, fixed: Vec<Subspace<T>>) -> Result<Self> {
        let p = odd_prime::<T>()?;
        Ok(GeneratorSet {
            ambient,
            p,
            context,
            orthogonal,
            fixed,
            elements: Vec::new(),
            tags: Vec::new(),
            seen: HashSet::new(),
        })
    }

    /// Whether g satisfies the context conditions.
    pub fn admits(&self, g: &Mat<T>) -> bool {
        g.rows() == self.ambient
            && g.cols() == self.ambient
            && g.inverse().is_some()
            && (!self.orthogonal || is_orthogonal(g))
            && self.fixed.iter().all(|s| &s.image(g) == s)
    }

    /// Insert g after checking it; identity and repeats are skipped.
    /// Returns whether g was new.
    pub fn push(&mut self, tag: impl Into<String>, g: Mat<T>) -> Result<bool> {
        if !self.admits(&g) {
            return Err(Error::Invalid(format!("generator `{}` violates its context", tag.into())));
        }
        Ok(self.push_checked(tag, g))
    }

    fn push_checked(&mut self, tag: impl Into<String>, g: Mat<T>) -> bool {
        if g == Mat::identity(self.ambient) || self.seen.contains(&g) {
            return false;
        }
        self.seen.insert(g.clone());
        self.elements.push(g);
        self.tags.push(tag.into());
        true
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn mats(&self) -> &[Mat<T>] {
        &self.elements
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn fixed(&self) -> &[Subspace<T>] {
        &self.fixed
    }

    /// Conjugate every element by h: g ↦ h g h⁻¹, with the fixed subspaces
    /// moved along.
    pub fn conjugate(&self, h: &Mat<T>, label: impl Into<String>) -> Result<Self> {
        let hinv = h.inverse().ok_or_else(|| Error::Invalid("conjugating matrix is singular".into()))?;
        let fixed = self.fixed.iter().map(|s| s.image(h)).collect();
        let mut out = GeneratorSet::new(self.ambient, GeneratorContext::Custom { label: label.into() }, self.orthogonal, fixed)?;
        for (g, t) in self.elements.iter().zip(&self.tags) {
            out.push(t.clone(), h.mul(g).mul(&hinv))?;
        }
        Ok(out)
    }

    pub fn dump(&self) -> GeneratorDump {
        GeneratorDump {
            context: self.context.clone(),
            p: self.p,
            ambient: self.ambient,
            generators: self
                .elements
                .iter()
                .zip(&self.tags)
                .map(|(g, t)| GeneratorEntry {
                    tag: t.clone(),
                    matrix: (0..g.rows()).map(|i| g.row(i).iter().map(|x| x.to_string()).collect()).collect(),
                })
                .collect(),
        }
    }
}

/// Elementary transvections I + E_ij (i ≠ j) and diag(ζ, 1, …, 1).
pub fn gl_generators<T: Scalar>(k: usize) -> Vec<Mat<T>> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let mut m = Mat::identity(k);
                m.set(i, j, T::one());
                out.push(m);
            }
        }
    }
    if k > 0 {
        let z = T::primitive_root().unwrap_or_else(|| T::from_i64(2));
        if z != T::one() {
            let mut m = Mat::identity(k);
            m.set(0, 0, z);
            out.push(m);
        }
    }
    out
}

/// Generators of O_{2k+1} for the anti-diagonal form: Levi blocks ℓ(A),
/// the unipotents g(X, Z) for W = span(e₁..e_k), the reflection swapping
/// e_k and e_{k̄}, and −1 on the center. Together they contain a Borel
/// subgroup and a set of Weyl representatives, so they generate.
pub fn orthogonal_group_generators<T: Scalar>(k: usize) -> Vec<Mat<T>> {
    let big = 2 * k + 1;
    let mut out = Vec::new();
    for a in gl_generators::<T>(k) {
        out.push(ell(&a, k).into_mat());
    }
    for i in 0..k {
        let mut x = Mat::zeros(k, 1);
        x.set(i, 0, T::one());
        out.push(unipotent_xz(&x, &vec![T::zero(); z_free_len(k)], k).expect("shape").into_mat());
    }
    for t in 0..z_free_len(k) {
        let mut z = vec![T::zero(); z_free_len(k)];
        z[t] = T::one();
        out.push(unipotent_xz(&Mat::zeros(k, 1), &z, k).expect("shape").into_mat());
    }
    if k > 0 {
        let mut s = Mat::identity(big);
        s.set(k - 1, k - 1, T::zero());
        s.set(k + 1, k + 1, T::zero());
        s.set(k - 1, k + 1, T::one());
        s.set(k + 1, k - 1, T::one());
        out.push(s);
    }
    let mut c = Mat::identity(big);
    c.set(k, k, -T::one());
    out.push(c);
    out
}

/// Reflections x ↦ x − 2(x,v)/(v,v)·v in every anisotropic line of the
/// anti-diagonal form on T^m. Only practical for small m.
pub fn reflection_generators<T: Scalar>(m: usize) -> Result<Vec<Mat<T>>> {
    let elems = T::elements().ok_or_else(|| Error::Invalid("reflections are enumerated over GF(p) only".into()))?;
    let jm = antidiag::<T>(m);
    let mut out = Vec::new();
    let total = (elems.len() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > 1_000_000 {
        return Err(Error::Budget { what: "anisotropic vectors".into(), needed: total, budget: 1_000_000 });
    }
    let mut v = vec![T::zero(); m];
    for code in 0..total {
        let mut c = code;
        for slot in v.iter_mut() {
            *slot = elems[(c % elems.len() as u128) as usize].clone();
            c /= elems.len() as u128;
        }
        // One representative per line: first nonzero entry equal to 1.
        match v.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_one() => {}
            _ => continue,
        }
        let jv = jm.mul_vec(&v);
        let q = crate::linalg::dot(&v, &jv);
        let Some(qinv) = q.inv() else { continue };
        let two = T::from_i64(2) * qinv;
        let mut r: Mat<T> = Mat::identity(m);
        for i in 0..m {
            for j in 0..m {
                let val = r.get(i, j).clone() - two.clone() * v[i].clone() * jv[j].clone();
                r.set(i, j, val);
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Generators of R = P_{U₊} ∩ P_{U₋} for the model pair of the shape, as
/// the product (N_W∩R)(L_U∩R)(L_W∩R).
pub fn r_generators<T: Scalar>(shape: &PairShape) -> Result<GeneratorSet<T>> {
    let n = shape.n;
    let (up, um) = shape.model_pair::<T>();
    let mut set = GeneratorSet::new(
        shape.ambient(),
        GeneratorContext::PairStabilizer { shape: *shape },
        true,
        vec![up, um],
    )?;
    let (a0, ap, am, a1, d, m) = (shape.a0, shape.ap, shape.am, shape.a1, shape.d, shape.m);

    // L_W ∩ R: ℓ(M) with M = [[A, Y₁, Y₂], [0, B, 0], [0, 0, C]].
    for (off, size, name) in [(0, a0, "A"), (a0, ap, "B"), (a0 + ap, am, "C")] {
        for g in gl_generators::<T>(size) {
            let mut mm = Mat::identity(d);
            for i in 0..size {
                for j in 0..size {
                    mm.set(off + i, off + j, g.get(i, j).clone());
                }
            }
            set.push(format!("levi-w {name}"), ell(&mm, n).into_mat())?;
        }
    }
    for i in 0..a0 {
        for j in a0..d {
            let mut mm = Mat::identity(d);
            mm.set(i, j, T::one());
            let name = if j < a0 + ap { "Y1" } else { "Y2" };
            set.push(format!("levi-w {name}"), ell(&mm, n).into_mat())?;
        }
    }

    // L_U ∩ R: ℓ₀₀(D, D′) with D ∈ GL_{a₁}, D′ ∈ O_{m−2a₁}.
    for g in gl_generators::<T>(a1) {
        set.push("levi-u D", crate::canonical::normalize::ell00(shape, &g, None)?.into_mat())?;
    }
    let ident = Mat::identity(a1);
    for g in orthogonal_group_generators::<T>(shape.a2) {
        set.push("levi-u O", crate::canonical::normalize::ell00(shape, &ident, Some(&g))?.into_mat())?;
    }

    // N_W ∩ R: g(X, Z) with x_ij = 0 on W₋ × U(+) columns and W₊ × U(−) columns.
    for i in 0..d {
        for j in 0..m {
            let in_wm = i >= a0 + ap;
            let in_wp = i >= a0 && i < a0 + ap;
            if (in_wm && j < a1) || (in_wp && j >= m - a1) {
                continue;
            }
            let mut x = Mat::zeros(d, m);
            x.set(i, j, T::one());
            set.push("unipotent X", unipotent_xz(&x, &vec![T::zero(); z_free_len(d)], n)?.into_mat())?;
        }
    }
    for t in 0..z_free_len(d) {
        let mut z = vec![T::zero(); z_free_len(d)];
        z[t] = T::one();
        set.push("unipotent Z", unipotent_xz(&Mat::zeros(d, m), &z, n)?.into_mat())?;
    }
    Ok(set)
}

/// Generators of the whole group O_{2n+1}.
pub fn orthogonal_generator_set<T: Scalar>(n: usize) -> Result<GeneratorSet<T>> {
    let mut set = GeneratorSet::new(2 * n + 1, GeneratorContext::Orthogonal { n }, true, Vec::new())?;
    for g in orthogonal_group_generators::<T>(n) {
        set.push("orthogonal", g)?;
    }
    Ok(set)
}

/// Generators of the whole group GL_k.
pub fn gl_generator_set<T: Scalar>(k: usize) -> Result<GeneratorSet<T>> {
    let mut set = GeneratorSet::new(k, GeneratorContext::GeneralLinear { k }, false, Vec::new())?;
    for g in gl_generators::<T>(k) {
        set.push("gl", g)?;
    }
    Ok(set)
}

/// All products of the generators, by breadth-first search from the
/// identity. The result is sorted.
pub fn group_closure<T: Scalar>(dim: usize, gens: &[Mat<T>], budget: usize) -> Result<Vec<Mat<T>>> {
    let id = Mat::identity(dim);
    let mut seen: HashSet<Mat<T>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = s.mul(&g);
            if !seen.contains(&h) {
                if seen.len() >= budget {
                    return Err(Error::Budget { what: "group closure".into(), needed: seen.len() as u128 + 1, budget: budget as u128 });
                }
                seen.insert(h.clone());
                queue.push_back(h);
            }
        }
    }
    let mut out: Vec<Mat<T>> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// A group generated by matrices together with its restriction to an
/// invariant subspace, written in a chosen basis.
#[derive(Clone)]
pub struct RestrictedGroup<T> {
    pub basis: Vec<Vec<T>>,
    pub elements: Vec<Mat<T>>,
}

/// The matrix of g on span(basis), which g must preserve.
pub fn restrict_to<T: Scalar>(g: &Mat<T>, basis: &[Vec<T>]) -> Result<Mat<T>> {
    let k = basis.len();
    let big = g.rows();
    let b = Mat::from_cols(big, basis);
    let mut out = Mat::zeros(k, k);
    for (j, v) in basis.iter().enumerate() {
        let w = g.mul_vec(v);
        let c = b.solve(&w).ok_or_else(|| Error::Invalid("generator does not preserve the subspace".into()))?;
        for (i, x) in c.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// {g|_V} closed under products, in the given basis of V.
pub fn restricted_stabilizer<T: Scalar>(basis: &[Vec<T>], gens: &[Mat<T>], budget: usize) -> Result<RestrictedGroup<T>> {
    if Subspace::span(gens.first().map_or(basis.first().map_or(0, |v| v.len()), |g| g.rows()), basis).dim() != basis.len() {
        return Err(Error::Invalid("restriction basis is dependent".into()));
    }
    let local: Vec<Mat<T>> = gens.iter().map(|g| restrict_to(g, basis)).collect::<Result<_>>()?;
    let elements = group_closure(basis.len(), &local, budget)?;
    Ok(RestrictedGroup { basis: basis.to_vec(), elements })
}

/// |O_{2k+1}(q)| = 2 q^{k²} ∏_{i=1}^{k} (q^{2i} − 1).
pub fn orthogonal_order(k: usize, q: u128) -> u128 {
    let mut o = 2 * q.pow((k * k) as u32);
    for i in 1..=k {
        o *= q.pow(2 * i as u32) - 1;
    }
    o
}

/// |GL_k(q)|.
pub fn gl_order(k: usize, q: u128) -> u128 {
    (0..k).map(|i| q.pow(k as u32) - q.pow(i as u32)).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::field::{Gf3, Gf5};

    #[test]
    fn orthogonal_generators_generate() {
        for k in 0..=2 {
            let gens = orthogonal_group_generators::<Gf3>(k);
            assert!(gens.iter().all(is_orthogonal));
            let all = group_closure(2 * k + 1, &gens, 200_000).unwrap();
            assert_eq!(all.len() as u128, orthogonal_order(k, 3), "k = {k}");
        }
        let all = group_closure(3, &orthogonal_group_generators::<Gf5>(1), 10_000).unwrap();
        assert_eq!(all.len() as u128, orthogonal_order(1, 5));
    }

    #[test]
    fn reflections_generate_the_same_group() {
        let refl = reflection_generators::<Gf3>(3).unwrap();
        assert!(refl.iter().all(is_orthogonal));
        assert_eq!(group_closure(3, &refl, 10_000).unwrap().len() as u128, orthogonal_order(1, 3));
        let refl = reflection_generators::<Gf3>(1).unwrap();
        assert_eq!(refl.len(), 1);
    }

    #[test]
    fn gl_generators_generate() {
        for k in 1..=3 {
            let all = group_closure(k, &gl_generators::<Gf3>(k), 20_000).unwrap();
            assert_eq!(all.len() as u128, gl_order(k, 3));
        }
    }

    #[test]
    fn r_generation_matches_direct_enumeration() {
        for n in 1..=2 {
            for alpha in 0..=n {
                for beta in 0..=n {
                    for shape in PairShape::all(n, alpha, beta) {
                        let set = r_generators::<Gf3>(&shape).unwrap();
                        let closed = group_closure(shape.ambient(), set.mats(), 500_000).unwrap();
                        let direct = enumerate_stabilizer(n, set.fixed(), 50_000_000).unwrap();
                        assert_eq!(closed.len(), direct.len(), "{shape:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn small_pair_stabilizers() {
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        let set = r_generators::<Gf3>(&s).unwrap();
        assert_eq!(group_closure(3, set.mats(), 1000).unwrap().len(), 4);
        let s = PairShape::new(1, 1, 0, 0, 0).unwrap();
        let set = r_generators::<Gf3>(&s).unwrap();
        // Borel subgroup of O₃(3): torus {±1}×{±1}, unipotent radical of order 3.
        assert_eq!(group_closure(3, set.mats(), 1000).unwrap().len(), 12);
    }

    #[test]
    fn sign_element_present_for_one_dimensional_middle() {
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        assert_eq!(s.m - 2 * s.a1, 1);
        let set = r_generators::<Gf3>(&s).unwrap();
        let mut sign = Mat::<Gf3>::identity(3);
        sign.set(1, 1, -Gf3::one());
        assert!(set.mats().contains(&sign));
    }

    #[test]
    fn restriction_of_identity_is_trivial() {
        let basis = vec![crate::linalg::unit::<Gf3>(3, 0)];
        let g = restricted_stabilizer(&basis, &[Mat::identity(3)], 10).unwrap();
        assert_eq!(g.elements.len(), 1);
    }

    #[test]
    fn characteristic_zero_is_rejected() {
        let s = PairShape::new(1, 1, 0, 0, 0).unwrap();
        assert!(r_generators::<crate::field::Rational>(&s).is_err());
    }
}
