//! Coordinate helpers shared by pair normalization and the stagewise
//! canonicalization.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{bar, element_from_isotropic_vectors, OrthElement};
use crate::linalg::{unit, Mat, Subspace};

pub fn restrict<T: Scalar>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

pub fn embed<T: Scalar>(local: &[T], idx: &[usize], big: usize) -> Vec<T> {
    let mut v = vec![T::zero(); big];
    for (x, &i) in local.iter().zip(idx) {
        v[i] = x.clone();
    }
    v
}

/// S ∩ span(e_i : i ∈ idx), written in the local coordinates of idx.
pub fn local_part<T: Scalar>(s: &Subspace<T>, idx: &[usize]) -> Subspace<T> {
    let c = Subspace::coordinate(s.ambient(), idx);
    let vs: Vec<Vec<T>> = s.intersect(&c).vectors().iter().map(|v| restrict(v, idx)).collect();
    Subspace::span(idx.len(), &vs)
}

/// Image of S under the coordinate projection onto idx, in local coordinates.
pub fn projection<T: Scalar>(s: &Subspace<T>, idx: &[usize]) -> Subspace<T> {
    let vs: Vec<Vec<T>> = s.vectors().iter().map(|v| restrict(v, idx)).collect();
    Subspace::span(idx.len(), &vs)
}

/// A vector of S whose entries on `cols` equal `target`.
pub fn find_with_coords<T: Scalar>(s: &Subspace<T>, cols: &[usize], target: &[T]) -> Option<Vec<T>> {
    if s.dim() == 0 {
        return if target.iter().all(|x| x.is_zero()) { Some(vec![T::zero(); s.ambient()]) } else { None };
    }
    let b = s.basis();
    let sys = Mat::from_rows(s.dim(), &cols.iter().map(|&c| b.col(c)).collect::<Vec<_>>());
    let c = sys.solve(target)?;
    let mut v = vec![T::zero(); s.ambient()];
    for (i, a) in c.iter().enumerate() {
        if !a.is_zero() {
            v = crate::linalg::axpy(a, b.row(i), &v);
        }
    }
    Some(v)
}

/// Append coordinate vectors until the list is a basis of T^dim.
pub fn extend_to_basis<T: Scalar>(mut vecs: Vec<Vec<T>>, dim: usize) -> Vec<Vec<T>> {
    let mut cur = Subspace::span(dim, &vecs);
    for i in 0..dim {
        if cur.dim() == dim {
            break;
        }
        let e = unit(dim, i);
        if !cur.contains_vec(&e) {
            cur = cur.sum(&Subspace::span(dim, std::slice::from_ref(&e)));
            vecs.push(e);
        }
    }
    vecs
}

/// An invertible M with M·vecs[i] = e_i, for linearly independent vecs.
pub fn gl_to_units<T: Scalar>(vecs: Vec<Vec<T>>, dim: usize) -> Mat<T> {
    let basis = extend_to_basis(vecs, dim);
    Mat::from_cols(dim, &basis).inverse().expect("independent vectors")
}

/// Basis of T^dim listing a basis of P∩Q, then the rest of P, then the rest
/// of Q, then a completion. Sending it to the standard basis puts P and Q in
/// coordinate position.
pub fn pair_adapted_basis<T: Scalar>(p: &Subspace<T>, q: &Subspace<T>) -> Vec<Vec<T>> {
    let dim = p.ambient();
    let pq = p.intersect(q);
    let mut out = p.adapted_basis(&pq);
    let from_q: Vec<Vec<T>> = q.adapted_basis(&pq).split_off(pq.dim());
    out.extend(from_q);
    extend_to_basis(out, dim)
}

/// Identity of the given size with `local` placed at the diagonal block
/// starting at `offset`.
pub fn block_identity<T: Scalar>(size: usize, offset: usize, local: &Mat<T>) -> Mat<T> {
    let mut g = Mat::identity(size);
    for i in 0..local.rows() {
        for j in 0..local.cols() {
            g.set(offset + i, offset + j, local.get(i, j).clone());
        }
    }
    g
}

/// Embed an orthogonal matrix on the coordinates `idx` (sorted and closed
/// under i ↦ ī) into the full group, acting trivially elsewhere.
pub fn embed_orthogonal<T: Scalar>(idx: &[usize], local: &Mat<T>, n: usize) -> Result<OrthElement<T>> {
    let big = 2 * n + 1;
    for &i in idx {
        if !idx.contains(&bar(n, i)) {
            return Err(Error::Invalid(format!("coordinate set is not closed under bar at {i}")));
        }
    }
    let mut g = Mat::identity(big);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            g.set(i, j, local.get(a, b).clone());
        }
    }
    OrthElement::new(g)
}

/// The permutation element sending e_k to e_σ(k), where σ commutes with bar
/// and sends the pair-free set K onto {0, …, |K|−1} in order.
pub fn front_permutation<T: Scalar>(k_set: &[usize], n: usize) -> OrthElement<T> {
    let big = 2 * n + 1;
    // Representatives in the lower half, in the order given.
    let lows: Vec<usize> = k_set.iter().map(|&k| if k < n { k } else { bar(n, k) }).collect();
    let mut sigma = vec![usize::MAX; big];
    sigma[n] = n;
    for (t, &k) in k_set.iter().enumerate() {
        sigma[k] = t;
        sigma[bar(n, k)] = bar(n, t);
    }
    let rest: Vec<usize> = (0..n).filter(|i| !lows.contains(i)).collect();
    for (t, &i) in rest.iter().enumerate() {
        let target = k_set.len() + t;
        sigma[i] = target;
        sigma[bar(n, i)] = bar(n, target);
    }
    let mut g = Mat::zeros(big, big);
    for (k, &s) in sigma.iter().enumerate() {
        g.set(s, k, T::one());
    }
    OrthElement::new(g).expect("bar-compatible permutation")
}

/// An element h with h·S = span(e₀, …, e_{k−1}) for isotropic S of dim k.
/// The pivots K of the echelon basis never contain a pair {i, ī} or the
/// center, and the echelon rows have exactly the shape accepted by
/// [`element_from_isotropic_vectors`], which gives g with g·span(e_K) = S.
pub fn straighten_isotropic<T: Scalar>(s: &Subspace<T>, n: usize) -> Result<OrthElement<T>> {
    let k_set = s.pivots();
    let g = element_from_isotropic_vectors(&k_set, &s.vectors(), n)?;
    let perm = front_permutation::<T>(&k_set, n);
    Ok(perm.compose(&g.inverse()))
}

/// For a nondegenerate isotropic pair (P, Q) of equal dimension ℓ, an
/// element g with g·P = span(e₀..e_{ℓ−1}) and g·Q = span of the last ℓ
/// coordinates.
pub fn nondegenerate_pair_element<T: Scalar>(p: &Subspace<T>, q: &Subspace<T>, n: usize) -> Result<OrthElement<T>> {
    let big = 2 * n + 1;
    let l = p.dim();
    if q.dim() != l {
        return Err(Error::Invalid("pair members differ in dimension".into()));
    }
    let h = straighten_isotropic(p, n)?;
    let q1 = h.apply(q);
    // Q₁ is a graph over the last ℓ coordinates: v_j = e_{2n+1−ℓ+j} + Σ z e_i + Σ y e_{ℓ+i}.
    let last: Vec<usize> = (big - l..big).collect();
    let mut g = Mat::identity(big);
    for (j, &c) in last.iter().enumerate() {
        let v = find_with_coords(&q1, &last, &unit(l, j))
            .ok_or_else(|| Error::Invalid("pair is degenerate".into()))?;
        for (i, x) in v.iter().enumerate() {
            g.set(i, c, x.clone());
        }
    }
    // Upper-right block −J ᵗY J so that g is the element g′(Y, Z).
    let m = big - 2 * l;
    let y = Mat::from_rows(l, &(l..l + m).map(|i| (0..l).map(|j| g.get(i, big - l + j).clone()).collect()).collect::<Vec<_>>());
    let jl = crate::form::antidiag::<T>(l);
    let jm = crate::form::antidiag::<T>(m);
    let xblock = jl.mul(&y.transpose()).mul(&jm).scale(&-T::one());
    for i in 0..l {
        for j in 0..m {
            g.set(i, l + j, xblock.get(i, j).clone());
        }
    }
    let gp = OrthElement::new(g)?;
    Ok(gp.inverse().compose(&h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf5, Rational};
    use crate::form::is_isotropic;
    use crate::linalg::enumerate_subspaces;
    use num_traits::Zero;

    #[test]
    fn straightening_reaches_the_coordinate_subspace() {
        let n = 2;
        for k in 1..=2 {
            for s in enumerate_subspaces::<Gf5>(5, k, 1_000_000).unwrap() {
                if !is_isotropic(&s) {
                    continue;
                }
                let h = straighten_isotropic(&s, n).unwrap();
                let front: Vec<usize> = (0..k).collect();
                assert_eq!(h.apply(&s), Subspace::coordinate(5, &front));
            }
        }
    }

    #[test]
    fn nondegenerate_pairs_become_opposite() {
        let n = 2;
        let lines: Vec<_> = enumerate_subspaces::<Gf5>(5, 1, 1_000_000)
            .unwrap()
            .into_iter()
            .filter(is_isotropic)
            .collect();
        let mut checked = 0;
        for p in &lines {
            for q in &lines {
                let pv = &p.vectors()[0];
                let qv = &q.vectors()[0];
                if crate::form::pair(pv, qv).is_zero() {
                    continue;
                }
                let g = nondegenerate_pair_element(p, q, n).unwrap();
                assert_eq!(g.apply(p), Subspace::coordinate(5, &[0]));
                assert_eq!(g.apply(q), Subspace::coordinate(5, &[4]));
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn pair_adapted_basis_orders_intersection_first() {
        let p = Subspace::<Rational>::coordinate(3, &[0, 1]);
        let q = Subspace::<Rational>::coordinate(3, &[1, 2]);
        let b = pair_adapted_basis(&p, &q);
        assert_eq!(b.len(), 3);
        assert_eq!(b[0], unit(3, 1));
    }
}
