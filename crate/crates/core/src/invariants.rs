//! Relative position of an isotropic pair (U₊, U₋) and the complete orbit
//! invariant (b₁,…,b₁₅, ε) of a maximal isotropic V against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{is_isotropic, pair, perp};
use crate::linalg::{Mat, Subspace};

/// Normalized relative position of an isotropic pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairShape {
    pub n: usize,
    pub alpha: usize,
    pub beta: usize,
    pub a0: usize,
    pub ap: usize,
    pub am: usize,
    pub a1: usize,
    pub a2: usize,
    pub d: usize,
    pub m: usize,
    /// d′ = 2n+1−d−a₁.
    pub dp: usize,
}

impl PairShape {
    pub fn new(n: usize, a0: usize, ap: usize, am: usize, a1: usize) -> Result<Self> {
        let d = a0 + ap + am;
        if d + a1 > n {
            return Err(Error::Invalid(format!(
                "shape (a0={a0}, a+={ap}, a-={am}, a1={a1}) does not fit in rank {n}"
            )));
        }
        Ok(PairShape {
            n,
            alpha: a0 + ap + a1,
            beta: a0 + am + a1,
            a0,
            ap,
            am,
            a1,
            a2: n - d - a1,
            d,
            m: 2 * n + 1 - 2 * d,
            dp: 2 * n + 1 - d - a1,
        })
    }

    /// Every shape of a pair of isotropic subspaces of dimensions α and β.
    pub fn all(n: usize, alpha: usize, beta: usize) -> Vec<PairShape> {
        let mut out = Vec::new();
        for a0 in 0..=alpha.min(beta) {
            for a1 in 0..=(alpha - a0).min(beta - a0) {
                let ap = alpha - a0 - a1;
                let am = beta - a0 - a1;
                if let Ok(s) = PairShape::new(n, a0, ap, am, a1) {
                    out.push(s);
                }
            }
        }
        out
    }

    pub fn ambient(&self) -> usize {
        2 * self.n + 1
    }

    /// The coordinate pair of this shape:
    /// U₊ = ⟨e₁..e_{a₀+a₊}⟩ ⊕ ⟨e_{d+1}..e_{d+a₁}⟩,
    /// U₋ = ⟨e₁..e_{a₀}⟩ ⊕ ⟨e_{a₀+a₊+1}..e_d⟩ ⊕ ⟨e_{d′+1}..e_{d′+a₁}⟩.
    pub fn model_pair<T: Scalar>(&self) -> (Subspace<T>, Subspace<T>) {
        let big = self.ambient();
        let mut up: Vec<usize> = (0..self.a0 + self.ap).collect();
        up.extend(self.d..self.d + self.a1);
        let mut um: Vec<usize> = (0..self.a0).collect();
        um.extend(self.a0 + self.ap..self.d);
        um.extend(self.dp..self.dp + self.a1);
        (Subspace::coordinate(big, &up), Subspace::coordinate(big, &um))
    }
}

pub fn pair_shape<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>) -> Result<PairShape> {
    if up.ambient() != um.ambient() || up.ambient().is_multiple_of(2) {
        return Err(Error::Dimension("pair must live in one odd-dimensional space".into()));
    }
    if !is_isotropic(up) || !is_isotropic(um) {
        return Err(Error::Invalid("pair members must be isotropic".into()));
    }
    let n = (up.ambient() - 1) / 2;
    let a0 = up.intersect(um).dim();
    let ap = up.intersect(&perp(um)).dim() - a0;
    let am = um.intersect(&perp(up)).dim() - a0;
    let a1 = up.dim() - a0 - ap;
    debug_assert_eq!(a1, um.dim() - a0 - am);
    PairShape::new(n, a0, ap, am, a1)
}

/// The complete invariant of a maximal isotropic V against a normalized pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InvariantTuple {
    /// b₁..b₁₅, stored 0-based: `b[0]` is b₁.
    pub b: [usize; 15],
    pub eps: u8,
}

impl InvariantTuple {
    /// bⱼ with the usual 1-based subscript.
    pub fn get(&self, j: usize) -> usize {
        self.b[j - 1]
    }

    /// Check the five counting identities and the parity rule for ε.
    pub fn check(&self, s: &PairShape) -> Result<()> {
        let b = |j: usize| self.b[j - 1];
        let checks = [
            ("a0", s.a0, b(1) + b(2)),
            ("a+", s.ap, b(3) + b(7) + b(8) + b(10)),
            ("a-", s.am, b(4) + b(7) + b(9) + b(11)),
            ("a1", s.a1, b(5) + b(6) + b(8) + b(9) + 2 * b(12) + b(13) + b(15)),
            ("a2", s.a2, b(12) + b(13) + b(14)),
        ];
        for (name, want, got) in checks {
            if want != got {
                return Err(Error::Invalid(format!("tuple gives {name} = {got}, shape has {want}")));
            }
        }
        let eps_ok = match (b(15), self.eps) {
            (0, 0) => true,
            (k, 1) if k % 2 == 1 => true,
            (k, e) if k > 0 && k % 2 == 0 => e <= 1,
            _ => false,
        };
        if !eps_ok {
            return Err(Error::Invalid(format!("eps = {} is impossible with b15 = {}", self.eps, b(15))));
        }
        Ok(())
    }
}

/// All tuples satisfying the counting identities, sorted lexicographically.
pub fn enumerate_tuples(s: &PairShape) -> Vec<InvariantTuple> {
    let mut out = Vec::new();
    for b1 in 0..=s.a0 {
        for b7 in 0..=s.ap.min(s.am) {
            for b3 in 0..=s.ap - b7 {
                for b8 in 0..=s.ap - b7 - b3 {
                    let b10 = s.ap - b7 - b3 - b8;
                    for b4 in 0..=s.am - b7 {
                        for b9 in 0..=s.am - b7 - b4 {
                            let b11 = s.am - b7 - b4 - b9;
                            for b12 in 0..=s.a2 {
                                for b13 in 0..=s.a2 - b12 {
                                    let b14 = s.a2 - b12 - b13;
                                    let used = b8 + b9 + 2 * b12 + b13;
                                    if used > s.a1 {
                                        continue;
                                    }
                                    let rest = s.a1 - used;
                                    for b5 in 0..=rest {
                                        for b6 in 0..=rest - b5 {
                                            let b15 = rest - b5 - b6;
                                            let b = [
                                                b1,
                                                s.a0 - b1,
                                                b3,
                                                b4,
                                                b5,
                                                b6,
                                                b7,
                                                b8,
                                                b9,
                                                b10,
                                                b11,
                                                b12,
                                                b13,
                                                b14,
                                                b15,
                                            ];
                                            let eps: &[u8] = match b15 {
                                                0 => &[0],
                                                k if k % 2 == 1 => &[1],
                                                _ => &[0, 1],
                                            };
                                            for &e in eps {
                                                out.push(InvariantTuple { b, eps: e });
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Subspaces derived from a normalized pair that the invariants refer to.
pub struct PairSpaces<T> {
    pub up: Subspace<T>,
    pub um: Subspace<T>,
    pub w0: Subspace<T>,
    pub wp: Subspace<T>,
    pub wm: Subspace<T>,
    pub w: Subspace<T>,
    /// U₊ + U₋.
    pub sum: Subspace<T>,
    /// U₊ + W₋.
    pub up_wm: Subspace<T>,
    /// W₊ + U₋.
    pub wp_um: Subspace<T>,
    /// Z = (U₊ + U₋)^⊥.
    pub z: Subspace<T>,
}

impl<T: Scalar> PairSpaces<T> {
    pub fn new(up: &Subspace<T>, um: &Subspace<T>) -> Self {
        let w0 = up.intersect(um);
        let wp = up.intersect(&perp(um));
        let wm = um.intersect(&perp(up));
        let w = wp.sum(&wm);
        let sum = up.sum(um);
        PairSpaces {
            up_wm: up.sum(&wm),
            wp_um: wp.sum(um),
            z: perp(&sum),
            up: up.clone(),
            um: um.clone(),
            w0,
            wp,
            wm,
            w,
            sum,
        }
    }
}

/// Refuse a pair that is not the coordinate model of its own shape.
pub fn require_normalized<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>) -> Result<PairShape> {
    let shape = pair_shape(up, um)?;
    let (mp, mm) = shape.model_pair::<T>();
    if &mp != up || &mm != um {
        return Err(Error::Invalid("pair is not in normalized coordinates; normalize it first".into()));
    }
    Ok(shape)
}

/// X₁ = {v ∈ X′ | (v₊, X′) = 0}, where v = v₊ + v₋ with v₊ ∈ U₊+W₋ and
/// v₋ ∈ W₊+U₋. The split is solved explicitly against a complement of
/// U₊+W₋ inside W₊+U₋.
pub fn x1_space<T: Scalar>(ps: &PairSpaces<T>, xprime: &Subspace<T>) -> Subspace<T> {
    let big = xprime.ambient();
    if xprime.dim() == 0 {
        return Subspace::zero(big);
    }
    let a_basis = ps.up_wm.vectors();
    let inter = ps.up_wm.intersect(&ps.wp_um);
    let c_basis: Vec<Vec<T>> = ps.wp_um.adapted_basis(&inter)[inter.dim()..].to_vec();
    let mut cols = a_basis.clone();
    cols.extend(c_basis.iter().cloned());
    let split = Mat::from_cols(big, &cols);
    let xs = xprime.vectors();
    let plus: Vec<Vec<T>> = xs
        .iter()
        .map(|v| {
            let coef = split.solve(v).expect("X′ lies in U₊ + U₋");
            let mut vp = vec![T::zero(); big];
            for (c, a) in coef.iter().zip(&a_basis) {
                if !c.is_zero() {
                    vp = crate::linalg::axpy(c, a, &vp);
                }
            }
            vp
        })
        .collect();
    let k = xs.len();
    // M[i][j] = (v_i₊, v_j); X₁ is the left kernel of M.
    let mut mt = Mat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            mt.set(j, i, pair(&plus[i], &xs[j]));
        }
    }
    let vs: Vec<Vec<T>> = mt
        .kernel()
        .into_iter()
        .map(|c| {
            let mut v = vec![T::zero(); big];
            for (ci, xi) in c.iter().zip(&xs) {
                if !ci.is_zero() {
                    v = crate::linalg::axpy(ci, xi, &v);
                }
            }
            v
        })
        .collect();
    Subspace::span(big, &vs)
}

/// Intermediate spaces of the invariant computation, exposed for checks.
pub struct InvariantSpaces<T> {
    pub x: Subspace<T>,
    pub xprime: Subspace<T>,
    pub x0: Subspace<T>,
    pub x1: Subspace<T>,
    /// dim π(X′) with π: W^⊥ → W^⊥/W.
    pub pi_xprime: usize,
    /// dim π(Z ∩ V).
    pub pi_zv: usize,
}

pub fn invariant_spaces<T: Scalar>(ps: &PairSpaces<T>, v: &Subspace<T>) -> InvariantSpaces<T> {
    let vperp = perp(v);
    let x = ps.sum.intersect(v);
    let xprime = ps.sum.intersect(&vperp);
    let x0 = ps.up_wm.intersect(v).sum(&ps.wp_um.intersect(v));
    let x1 = x1_space(ps, &xprime);
    let pi_xprime = xprime.sum(&ps.w).dim() - ps.w.dim();
    let zv = ps.z.intersect(v);
    let pi_zv = zv.sum(&ps.w).dim() - ps.w.dim();
    InvariantSpaces { x, xprime, x0, x1, pi_xprime, pi_zv }
}

/// (b₁,…,b₁₅, ε) of V against the normalized pair (U₊, U₋).
pub fn compute_b<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>, v: &Subspace<T>) -> Result<InvariantTuple> {
    let shape = require_normalized(up, um)?;
    if v.ambient() != shape.ambient() || v.dim() != shape.n {
        return Err(Error::Invalid(format!("V must have dimension n = {}", shape.n)));
    }
    if !is_isotropic(v) {
        return Err(Error::Invalid("V is not isotropic".into()));
    }
    let ps = PairSpaces::new(up, um);
    compute_b_with(&shape, &ps, v)
}

/// As [`compute_b`], reusing precomputed pair data and skipping the checks on V.
pub fn compute_b_with<T: Scalar>(shape: &PairShape, ps: &PairSpaces<T>, v: &Subspace<T>) -> Result<InvariantTuple> {
    let dim = |s: &Subspace<T>| s.intersect(v).dim() as i64;
    let (a0, ap, am, a1, a2) = (shape.a0 as i64, shape.ap as i64, shape.am as i64, shape.a1 as i64, shape.a2 as i64);
    let b1 = dim(&ps.w0);
    let b2 = a0 - b1;
    let b3 = dim(&ps.wp) - b1;
    let b4 = dim(&ps.wm) - b1;
    let b5 = dim(&ps.up) - b1 - b3;
    let b6 = dim(&ps.um) - b1 - b4;
    let wv = dim(&ps.w);
    let b7 = wv - b1 - b3 - b4;
    let b8 = dim(&ps.wp_um) - wv - b6;
    let b9 = dim(&ps.up_wm) - wv - b5;
    let b10 = ap - b3 - b7 - b8;
    let b11 = am - b4 - b7 - b9;
    let sp = invariant_spaces(ps, v);
    if !(sp.x1.contains(&sp.x0) && sp.x.contains(&sp.x1)) {
        return Err(Error::Invalid("expected X₀ ⊆ X₁ ⊆ X".into()));
    }
    let b12 = sp.x1.dim() as i64 - sp.x0.dim() as i64;
    let b15 = sp.xprime.dim() as i64 - sp.x1.dim() as i64;
    let eps = sp.xprime.dim() as i64 - sp.x.dim() as i64;
    let b13 = a1 - sp.pi_xprime as i64 - b12;
    let b14 = a2 - b12 - b13;
    if a1 - sp.pi_xprime as i64 != a2 - sp.pi_zv as i64 {
        return Err(Error::Invalid("projection identity a1 − dim π(X′) = a2 − dim π(Z∩V) fails".into()));
    }
    let raw = [b1, b2, b3, b4, b5, b6, b7, b8, b9, b10, b11, b12, b13, b14, b15];
    if raw.iter().any(|&x| x < 0) || !(0..=1).contains(&eps) {
        return Err(Error::Invalid(format!("negative invariant {raw:?}, eps {eps}")));
    }
    let mut b = [0usize; 15];
    for (o, r) in b.iter_mut().zip(raw) {
        *o = r as usize;
    }
    let t = InvariantTuple { b, eps: eps as u8 };
    t.check(shape)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Rational};
    use crate::linalg::unit;

    fn tuple(pairs: &[(usize, usize)], eps: u8) -> InvariantTuple {
        let mut b = [0; 15];
        for &(j, v) in pairs {
            b[j - 1] = v;
        }
        InvariantTuple { b, eps }
    }

    #[test]
    fn coincident_lines_shape() {
        let e1 = Subspace::<Gf3>::coordinate(3, &[0]);
        let s = pair_shape(&e1, &e1).unwrap();
        assert_eq!((s.a0, s.ap, s.am, s.a1, s.d, s.m, s.a2), (1, 0, 0, 0, 1, 1, 0));
    }

    #[test]
    fn opposite_lines_shape() {
        let up = Subspace::<Gf3>::coordinate(3, &[0]);
        let um = Subspace::<Gf3>::coordinate(3, &[2]);
        let s = pair_shape(&up, &um).unwrap();
        assert_eq!((s.a0, s.ap, s.am, s.a1, s.d, s.m, s.a2), (0, 0, 0, 1, 0, 3, 0));
    }

    #[test]
    fn orthogonal_lines_shape() {
        let up = Subspace::<Gf3>::coordinate(5, &[0]);
        let um = Subspace::<Gf3>::coordinate(5, &[1]);
        let s = pair_shape(&up, &um).unwrap();
        assert_eq!((s.a0, s.ap, s.am, s.a1, s.d, s.m, s.a2), (0, 1, 1, 0, 2, 1, 0));
    }

    fn line(coeffs: &[(usize, Rational)]) -> Subspace<Rational> {
        let mut v = vec![Rational::from_i64(0); 3];
        for (i, c) in coeffs {
            v[*i] = c.clone();
        }
        Subspace::span(3, &[v])
    }

    #[test]
    fn invariants_of_small_examples() {
        let one = Rational::from_i64(1);
        let e1 = Subspace::<Rational>::coordinate(3, &[0]);
        let e3 = Subspace::<Rational>::coordinate(3, &[2]);
        assert_eq!(compute_b(&e1, &e1, &e1).unwrap(), tuple(&[(1, 1)], 0));
        let w = line(&[(0, one.clone()), (1, one.clone()), (2, -Rational::half())]);
        assert_eq!(compute_b(&e1, &e1, &w).unwrap(), tuple(&[(2, 1)], 0));
        assert_eq!(compute_b(&e1, &e3, &w).unwrap(), tuple(&[(15, 1)], 1));
    }

    #[test]
    fn refuses_unnormalized_pair() {
        let e3 = Subspace::<Gf3>::coordinate(3, &[2]);
        let e1 = Subspace::<Gf3>::coordinate(3, &[0]);
        assert!(compute_b(&e3, &e1, &e1).is_err());
    }

    #[test]
    fn tuple_counts_for_small_shapes() {
        let s = PairShape::new(1, 1, 0, 0, 0).unwrap();
        assert_eq!(enumerate_tuples(&s), vec![tuple(&[(2, 1)], 0), tuple(&[(1, 1)], 0)]);
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        let ts = enumerate_tuples(&s);
        assert_eq!(ts.len(), 3);
        assert!(ts.contains(&tuple(&[(5, 1)], 0)));
        assert!(ts.contains(&tuple(&[(6, 1)], 0)));
        assert!(ts.contains(&tuple(&[(15, 1)], 1)));
        let s = PairShape::new(2, 0, 0, 0, 0).unwrap();
        assert_eq!(enumerate_tuples(&s), vec![tuple(&[(14, 2)], 0)]);
    }

    #[test]
    fn model_pair_has_its_shape() {
        for n in 1..=4 {
            for alpha in 0..=n {
                for beta in 0..=n {
                    for s in PairShape::all(n, alpha, beta) {
                        let (up, um) = s.model_pair::<Gf3>();
                        assert_eq!(pair_shape(&up, &um).unwrap(), s);
                    }
                }
            }
        }
    }

    #[test]
    fn vector_helpers() {
        let v: Vec<Gf3> = unit(3, 1);
        assert_eq!(v, vec![Gf3::new(0), Gf3::new(1), Gf3::new(0)]);
    }
}
