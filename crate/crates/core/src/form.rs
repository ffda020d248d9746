//! The split symmetric form on T^{2n+1}, its orthogonal group, isotropic
//! flags and the block elements used to normalize them.
//!
//! Indices are 0-based in code. The only conversion from the usual 1-based
//! labels is [`ix`]; the involution i ↦ 2n+2−i becomes [`bar`].

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{Mat, Subspace};

/// 1-based label to 0-based index.
pub fn ix(label: usize) -> usize {
    assert!(label >= 1, "labels are 1-based");
    label - 1
}

/// The partner index of i (0-based) in dimension 2n+1.
pub fn bar(n: usize, i: usize) -> usize {
    2 * n - i
}

pub fn rank_of_dim(dim: usize) -> usize {
    assert!(dim % 2 == 1, "ambient dimension must be odd");
    (dim - 1) / 2
}

/// (u, v) = Σ u_i v_{2n+2−i}.
pub fn form_value<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() || u.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!("form on vectors of lengths {} and {}", u.len(), v.len())));
    }
    Ok(pair(u, v))
}

/// Unchecked form value; lengths must agree.
pub fn pair<T: Scalar>(u: &[T], v: &[T]) -> T {
    let n = u.len();
    let mut acc = T::zero();
    for i in 0..n {
        let a = &u[i];
        let b = &v[n - 1 - i];
        if !a.is_zero() && !b.is_zero() {
            acc = acc + a.clone() * b.clone();
        }
    }
    acc
}

/// Anti-diagonal identity of size k.
pub fn antidiag<T: Scalar>(k: usize) -> Mat<T> {
    let mut j = Mat::zeros(k, k);
    for i in 0..k {
        j.set(i, k - 1 - i, T::one());
    }
    j
}

pub fn perp<T: Scalar>(s: &Subspace<T>) -> Subspace<T> {
    let n = s.ambient();
    if s.dim() == 0 {
        return Subspace::full(n);
    }
    let bj = s.basis().mul(&antidiag(n));
    Subspace::span(n, &bj.kernel())
}

pub fn is_isotropic<T: Scalar>(s: &Subspace<T>) -> bool {
    let vs = s.vectors();
    vs.iter().enumerate().all(|(i, u)| vs[i..].iter().all(|v| pair(u, v).is_zero()))
}

pub fn is_orthogonal<T: Scalar>(g: &Mat<T>) -> bool {
    let k = g.rows();
    if k != g.cols() || k.is_multiple_of(2) {
        return false;
    }
    let j = antidiag(k);
    g.transpose().mul(&j).mul(g) == j
}

/// An element of O_{2n+1}, checked on construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrthElement<T> {
    n: usize,
    mat: Mat<T>,
}

impl<T: Scalar> std::fmt::Debug for OrthElement<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OrthElement(n={}) {:?}", self.n, self.mat)
    }
}

impl<T: Scalar> OrthElement<T> {
    pub fn new(mat: Mat<T>) -> Result<Self> {
        if !is_orthogonal(&mat) {
            return Err(Error::NotOrthogonal(format!("{mat:?}")));
        }
        Ok(OrthElement { n: rank_of_dim(mat.rows()), mat })
    }

    pub fn identity(n: usize) -> Self {
        OrthElement { n, mat: Mat::identity(2 * n + 1) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &Mat<T> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<T> {
        self.mat
    }

    pub fn compose(&self, o: &Self) -> Self {
        OrthElement { n: self.n, mat: self.mat.mul(&o.mat) }
    }

    /// g⁻¹ = J ᵗg J for g preserving J.
    pub fn inverse(&self) -> Self {
        let j = antidiag(self.mat.rows());
        OrthElement { n: self.n, mat: j.mul(&self.mat.transpose()).mul(&j) }
    }

    pub fn apply(&self, s: &Subspace<T>) -> Subspace<T> {
        s.image(&self.mat)
    }

    pub fn apply_vec(&self, v: &[T]) -> Vec<T> {
        self.mat.mul_vec(v)
    }

    pub fn is_identity(&self) -> bool {
        self.mat == Mat::identity(self.mat.rows())
    }
}

/// A composition (α₁,…,α_p) of positive parts with sum at most n.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagType {
    pub parts: Vec<usize>,
}

impl FlagType {
    pub fn new(parts: Vec<usize>, n: usize) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Invalid(format!("composition {parts:?} needs positive parts")));
        }
        if parts.iter().sum::<usize>() > n {
            return Err(Error::Invalid(format!("composition {parts:?} exceeds n = {n}")));
        }
        Ok(FlagType { parts })
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Cumulative dimensions α₁, α₁+α₂, …
    pub fn dims(&self) -> Vec<usize> {
        self.parts
            .iter()
            .scan(0, |acc, &a| {
                *acc += a;
                Some(*acc)
            })
            .collect()
    }
}

/// A chain of isotropic subspaces V₁ ⊂ ⋯ ⊂ V_p with the dimensions of its type.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsotropicFlag<T> {
    spaces: Vec<Subspace<T>>,
}

impl<T: Scalar> std::fmt::Debug for IsotropicFlag<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(&self.spaces).finish()
    }
}

impl<T: Scalar> IsotropicFlag<T> {
    pub fn new(ty: &FlagType, spaces: Vec<Subspace<T>>) -> Result<Self> {
        let dims = ty.dims();
        if spaces.len() != dims.len() {
            return Err(Error::Invalid(format!("flag has {} members, type needs {}", spaces.len(), dims.len())));
        }
        for (i, (s, &d)) in spaces.iter().zip(&dims).enumerate() {
            if s.dim() != d {
                return Err(Error::Invalid(format!("member {i} has dim {}, expected {d}", s.dim())));
            }
            if i > 0 && !s.contains(&spaces[i - 1]) {
                return Err(Error::Invalid(format!("member {i} does not contain member {}", i - 1)));
            }
        }
        if let Some(top) = spaces.last() {
            if !is_isotropic(top) {
                return Err(Error::Invalid("largest flag member is not isotropic".into()));
            }
        }
        Ok(IsotropicFlag { spaces })
    }

    /// Flag without type validation, for images of valid flags.
    pub fn from_spaces_unchecked(spaces: Vec<Subspace<T>>) -> Self {
        IsotropicFlag { spaces }
    }

    /// The standard flag span(e₁..e_{α₁}) ⊂ span(e₁..e_{α₁+α₂}) ⊂ ⋯.
    pub fn standard(ty: &FlagType, n: usize) -> Self {
        let spaces = ty
            .dims()
            .into_iter()
            .map(|d| Subspace::coordinate(2 * n + 1, &(0..d).collect::<Vec<_>>()))
            .collect();
        IsotropicFlag { spaces }
    }

    pub fn spaces(&self) -> &[Subspace<T>] {
        &self.spaces
    }

    pub fn image(&self, g: &Mat<T>) -> Self {
        IsotropicFlag { spaces: self.spaces.iter().map(|s| s.image(g)).collect() }
    }
}

pub fn parabolic_contains<T: Scalar>(g: &OrthElement<T>, flag: &IsotropicFlag<T>) -> bool {
    flag.spaces().iter().all(|s| &g.apply(s) == s)
}

/// ℓ(A) = diag(A, I_m, J ᵗA⁻¹ J) for A ∈ GL_d.
pub fn ell<T: Scalar>(a: &Mat<T>, n: usize) -> OrthElement<T> {
    let d = a.rows();
    let big = 2 * n + 1;
    assert!(d <= n && a.cols() == d);
    let ainv = a.inverse().expect("ℓ(A) needs an invertible block");
    let jd = antidiag::<T>(d);
    let low = jd.mul(&ainv.transpose()).mul(&jd);
    let mut g = Mat::identity(big);
    for i in 0..d {
        for j in 0..d {
            g.set(i, j, a.get(i, j).clone());
            g.set(big - d + i, big - d + j, low.get(i, j).clone());
        }
    }
    OrthElement::new(g).expect("ℓ(A) preserves the form")
}

/// ℓ₀(B) = diag(I_d, B, I_d) for B ∈ O_m, m = 2n+1−2d.
pub fn ell0<T: Scalar>(b: &Mat<T>, n: usize) -> Result<OrthElement<T>> {
    let m = b.rows();
    let big = 2 * n + 1;
    if m.is_multiple_of(2) || m > big {
        return Err(Error::Dimension(format!("middle block of size {m}")));
    }
    let d = (big - m) / 2;
    let mut g = Mat::identity(big);
    for i in 0..m {
        for j in 0..m {
            g.set(d + i, d + j, b.get(i, j).clone());
        }
    }
    OrthElement::new(g)
}

/// Number of free entries z_{i,j} (i + j ≤ d, 1-based) in N_W.
pub fn z_free_len(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// g(X, Z) ∈ N_W for W = span(e₁..e_d). `z_free` lists z_{i,j} with
/// i + j ≤ d row by row; the remaining entries of Z are forced by
/// Z + J ᵗZ J = −X J ᵗX J.
pub fn unipotent_xz<T: Scalar>(x: &Mat<T>, z_free: &[T], n: usize) -> Result<OrthElement<T>> {
    let d = x.rows();
    let big = 2 * n + 1;
    if d > n || x.cols() != big - 2 * d {
        return Err(Error::Dimension(format!("X must be d×(2n+1−2d), got {}×{}", d, x.cols())));
    }
    if z_free.len() != z_free_len(d) {
        return Err(Error::Dimension(format!("expected {} free Z entries, got {}", z_free_len(d), z_free.len())));
    }
    let m = x.cols();
    let jd = antidiag::<T>(d);
    let jm = antidiag::<T>(m);
    let rhs = x.mul(&jm).mul(&x.transpose()).mul(&jd).scale(&-T::one());
    let mut z = Mat::zeros(d, d);
    let mut it = z_free.iter();
    for i in 0..d {
        for j in 0..d {
            // 0-based: i + j ≤ d − 2 is the free triangle.
            if i + j + 2 <= d {
                z.set(i, j, it.next().expect("counted").clone());
            }
        }
    }
    // Z_{i,j} + Z_{d−1−j, d−1−i} = rhs_{i,j}.
    for i in 0..d {
        for j in 0..d {
            if i + j + 1 == d {
                z.set(i, j, rhs.get(i, j).clone() * T::half());
            } else if i + j + 1 > d {
                let v = rhs.get(d - 1 - j, d - 1 - i).clone() - z.get(d - 1 - j, d - 1 - i).clone();
                z.set(i, j, v);
            }
        }
    }
    let y = jm.mul(&x.transpose()).mul(&jd).scale(&-T::one());
    let mut g = Mat::identity(big);
    for i in 0..d {
        for j in 0..m {
            g.set(i, d + j, x.get(i, j).clone());
        }
        for j in 0..d {
            g.set(i, d + m + j, z.get(i, j).clone());
        }
    }
    for i in 0..m {
        for j in 0..d {
            g.set(d + i, d + m + j, y.get(i, j).clone());
        }
    }
    OrthElement::new(g)
}

/// The element g with g e_k = e_k on the partners of K, g e_k = v_k on K,
/// and g e_k = e_k − Σ_{i ∈ K̄} c_{k̄,ī} e_i elsewhere, where c_{i,k} are the
/// coordinates of v_k. Indices are 0-based.
pub fn element_from_isotropic_vectors<T: Scalar>(k_set: &[usize], vectors: &[Vec<T>], n: usize) -> Result<OrthElement<T>> {
    let big = 2 * n + 1;
    if k_set.len() != vectors.len() {
        return Err(Error::Invalid("one vector per index of K".into()));
    }
    let kbar: Vec<usize> = k_set.iter().map(|&k| bar(n, k)).collect();
    for &k in k_set {
        if kbar.contains(&k) || k >= big {
            return Err(Error::Invalid(format!("index set meets its partner set at {k}")));
        }
    }
    for (pos, (&k, v)) in k_set.iter().zip(vectors).enumerate() {
        if v.len() != big {
            return Err(Error::Dimension("vector length".into()));
        }
        if !v[k].is_one() {
            return Err(Error::Invalid(format!("v_{k} must have coefficient 1 at its own index")));
        }
        for (q, &k2) in k_set.iter().enumerate() {
            if q != pos && !v[k2].is_zero() {
                return Err(Error::Invalid(format!("v_{k} has a component on e_{k2} with {k2} in K")));
            }
        }
    }
    for (a, u) in vectors.iter().enumerate() {
        for v in &vectors[a..] {
            if !pair(u, v).is_zero() {
                return Err(Error::Invalid("vectors are not mutually orthogonal and isotropic".into()));
            }
        }
    }
    let mut g = Mat::identity(big);
    for (&k, v) in k_set.iter().zip(vectors) {
        for (i, x) in v.iter().enumerate() {
            g.set(i, k, x.clone());
        }
    }
    for k in 0..big {
        if k_set.contains(&k) || kbar.contains(&k) {
            continue;
        }
        let kb = bar(n, k);
        for (pos, &i) in kbar.iter().enumerate() {
            // c_{k̄, ī}: coordinate of e_{k̄} in v_{ī}, where ī = k_set[pos].
            let c = vectors[pos][kb].clone();
            if !c.is_zero() {
                g.set(i, k, -c);
            }
        }
    }
    OrthElement::new(g)
}

/// Flag file: header "n p", then one matrix block per flag member.
pub fn parse_flag_file<T: Scalar>(text: &str) -> Result<(usize, Vec<Mat<T>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty flag file".into()))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(Error::Parse(format!("flag header must be 'n p', got {header:?}")));
    }
    let n: usize = nums[0].parse().map_err(|_| Error::Parse(format!("bad n {:?}", nums[0])))?;
    let p: u64 = nums[1].parse().map_err(|_| Error::Parse(format!("bad p {:?}", nums[1])))?;
    if p != T::characteristic() {
        return Err(Error::FieldMismatch { expected: T::characteristic(), found: p });
    }
    let mut mats = Vec::new();
    let mut lines = lines.peekable();
    while lines.peek().is_some() {
        let m = Mat::parse_block(&mut lines)?;
        if m.cols() != 2 * n + 1 {
            return Err(Error::Parse(format!("flag member has {} columns, expected {}", m.cols(), 2 * n + 1)));
        }
        mats.push(m);
    }
    Ok((n, mats))
}

pub fn write_flag_file<T: Scalar>(n: usize, members: &[Subspace<T>]) -> String {
    let mut s = format!("{} {}\n", n, T::characteristic());
    for m in members {
        s.push_str(&m.to_text());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5, Rational};
    use crate::linalg::unit;
    use num_traits::Zero;

    fn e<T: Scalar>(n: usize, label: usize) -> Vec<T> {
        unit(2 * n + 1, ix(label))
    }

    #[test]
    fn form_on_basis_vectors() {
        let v = |l| e::<Gf3>(1, l);
        assert_eq!(form_value(&v(1), &v(3)).unwrap(), Gf3::new(1));
        assert_eq!(form_value(&v(2), &v(2)).unwrap(), Gf3::new(1));
        assert_eq!(form_value(&v(1), &v(1)).unwrap(), Gf3::new(0));
        assert!(form_value(&v(1), &[Gf3::new(1)]).is_err());
    }

    #[test]
    fn perp_examples() {
        let s = Subspace::<Gf3>::coordinate(3, &[0]);
        assert_eq!(perp(&s), Subspace::coordinate(3, &[0, 1]));
        assert_eq!(perp(&Subspace::<Gf3>::full(3)).dim(), 0);
        // (e1+e5)^⊥ in dimension 5: pairs with e1 and e5, so it is the
        // kernel of x5 + x1 = 0.
        let v: Vec<Gf5> = vec![1, 0, 0, 0, 1].into_iter().map(Gf5::new).collect();
        let p = perp(&Subspace::span(5, &[v]));
        assert_eq!(p.dim(), 4);
        for l in [2, 3, 4] {
            assert!(p.contains_vec(&e::<Gf5>(2, l)));
        }
        let w: Vec<Gf5> = vec![1, 0, 0, 0, -1].into_iter().map(Gf5::new).collect();
        assert!(p.contains_vec(&w));
    }

    #[test]
    fn isotropy_and_orthogonality() {
        assert!(is_isotropic(&Subspace::<Gf3>::coordinate(5, &[0, 1])));
        assert!(!is_isotropic(&Subspace::<Gf3>::coordinate(3, &[1])));
        assert!(is_orthogonal(&antidiag::<Gf3>(3)));
    }

    #[test]
    fn unipotent_identity_and_small_case() {
        let g = unipotent_xz::<Rational>(&Mat::zeros(1, 1), &[], 1).unwrap();
        assert!(g.is_identity());
        let x = Rational::from_i64(3);
        let g = unipotent_xz::<Rational>(&Mat::new(1, 1, vec![x.clone()]), &[], 1).unwrap();
        let col = g.apply_vec(&e(1, 3));
        // The middle entry is −x, which the orthogonality check forces.
        let z = -(x.clone() * x.clone()) * Rational::half();
        assert_eq!(col, vec![z, -x, Rational::from_i64(1)]);
    }

    #[test]
    fn isotropic_vector_element_rejects_anisotropic() {
        let v: Vec<Gf3> = vec![1, 1, 0].into_iter().map(Gf3::new).collect();
        assert!(element_from_isotropic_vectors(&[0], &[v], 1).is_err());
        let id = element_from_isotropic_vectors::<Gf3>(&[0], &[e(1, 1)], 1).unwrap();
        assert!(id.is_identity());
    }

    #[test]
    fn isotropic_vector_element_maps_e1() {
        // v = e1 + e3 − ½ e5 in dimension 5: (v,v) = 2·(−½) + 1 = 0.
        let mut v = e::<Rational>(2, 1);
        v[ix(3)] = Rational::from_i64(1);
        v[ix(5)] = -Rational::half();
        assert!(pair(&v, &v).is_zero());
        let g = element_from_isotropic_vectors(&[0], std::slice::from_ref(&v), 2).unwrap();
        assert_eq!(g.apply_vec(&e(2, 1)), v);
        assert_eq!(g.apply_vec(&e(2, 5)), e(2, 5));
    }

    #[test]
    fn parabolic_membership() {
        let n = 2;
        let ty = FlagType::new(vec![n], n).unwrap();
        let flag = IsotropicFlag::<Gf3>::standard(&ty, n);
        assert!(parabolic_contains(&OrthElement::identity(n), &flag));
        let j = OrthElement::new(antidiag::<Gf3>(5)).unwrap();
        assert!(!parabolic_contains(&j, &flag));
        let a = Mat::<Gf3>::from_i64(&[&[1, 1], &[0, 2]]);
        assert!(parabolic_contains(&ell(&a, n), &flag));
    }

    #[test]
    fn flag_file_round_trip() {
        let s = Subspace::<Gf3>::coordinate(3, &[0]);
        let text = write_flag_file(1, std::slice::from_ref(&s));
        let (n, mats) = parse_flag_file::<Gf3>(&text).unwrap();
        assert_eq!(n, 1);
        assert_eq!(Subspace::row_space(&mats[0]), s);
    }
}
