//! Normal form of the b₁₅ block inside U₍₁₅₎ = ⊕_{i∈I₍₁₅₎} (𝔽e_i ⊕ 𝔽e_ī) ⊕ 𝔽e_{n+1}.
//!
//! Write x for the I₍₁₅₎ coordinates, y_k for the coefficient of e_ī where
//! i is the k-th element of I₍₁₅₎, and t for the center coordinate. A block
//! on which x is injective is the graph {(x, Tx, φ(x))}. It is isotropic iff
//! S = T + ½ᵗφφ is skew, and ℓ(A) acts by S ↦ ᵗA⁻¹SA⁻¹, φ ↦ φA⁻¹. So the
//! block is normalized by choosing a basis adapted to the pair (S, φ).

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{bar, OrthElement};
use crate::invariants::PairShape;
use crate::linalg::{dot, Mat, Subspace};

use super::layout::{block_vectors, IndexLayout};
use super::tools::{block_identity, restrict};

fn stage_err(detail: impl Into<String>) -> Error {
    Error::Stage { stage: "ix".into(), detail: detail.into() }
}

/// S(u, v) = ᵗu S v.
fn sform<T: Scalar>(s: &Mat<T>, u: &[T], v: &[T]) -> T {
    dot(u, &s.mul_vec(v))
}

fn scaled<T: Scalar>(v: &[T], c: &T) -> Vec<T> {
    v.iter().map(|x| x.clone() * c.clone()).collect()
}

fn comb<T: Scalar>(v: &[T], a: &T, p: &[T], b: &T, q: &[T]) -> Vec<T> {
    v.iter()
        .zip(p)
        .zip(q)
        .map(|((x, y), z)| x.clone() + a.clone() * y.clone() + b.clone() * z.clone())
        .collect()
}

/// Pairs (p, q) with S(p, q) = −1 spanning the space of `basis`, on which S
/// must be nondegenerate.
fn symplectic_pairs<T: Scalar>(s: &Mat<T>, mut basis: Vec<Vec<T>>) -> Result<Vec<(Vec<T>, Vec<T>)>> {
    let mut out = Vec::new();
    while !basis.is_empty() {
        let p = basis.remove(0);
        let pos = basis
            .iter()
            .position(|q| !sform(s, &p, q).is_zero())
            .ok_or_else(|| stage_err("b15 pairing is degenerate"))?;
        let q0 = basis.remove(pos);
        let c = sform(s, &p, &q0);
        let q = scaled(&q0, &(-c.inv().expect("nonzero")));
        basis = basis
            .into_iter()
            .map(|x| {
                let beta = sform(s, &p, &x);
                let alpha = -sform(s, &q, &x);
                comb(&x, &alpha, &p, &beta, &q)
            })
            .collect();
        out.push((p, q));
    }
    Ok(out)
}

fn kernel_of_rows<T: Scalar>(k: usize, rows: &[Vec<T>]) -> Vec<Vec<T>> {
    if rows.is_empty() {
        return (0..k).map(|i| crate::linalg::unit(k, i)).collect();
    }
    Mat::from_rows(k, rows).kernel()
}

/// ℓ₆: an element of O(U₍₁₅₎) ∩ R (acting by A on the I₍₁₅₎ coordinates) with
/// ℓ₆·V_block = V₍₁₅₎^ε.
pub fn b15_block_normalize<T: Scalar>(
    v_block: &Subspace<T>,
    shape: &PairShape,
    layout: &IndexLayout,
    eps: u8,
) -> Result<OrthElement<T>> {
    let n = layout.n;
    let xs = layout.set(15).to_vec();
    let k = xs.len();
    if k == 0 {
        if v_block.dim() != 0 {
            return Err(stage_err("nonzero block with b15 = 0"));
        }
        return Ok(OrthElement::identity(n));
    }
    if v_block.dim() != k {
        return Err(stage_err(format!("b15 block has dim {} (expected {k})", v_block.dim())));
    }
    let ys: Vec<usize> = xs.iter().map(|&i| bar(n, i)).collect();
    let vecs = v_block.vectors();
    let xm = Mat::from_cols(k, &vecs.iter().map(|v| restrict(v, &xs)).collect::<Vec<_>>());
    let ym = Mat::from_cols(k, &vecs.iter().map(|v| restrict(v, &ys)).collect::<Vec<_>>());
    let tm = Mat::from_cols(1, &vecs.iter().map(|v| vec![v[n].clone()]).collect::<Vec<_>>());
    let xinv = xm.inverse().ok_or_else(|| stage_err("b15 block is not a graph over I15"))?;
    let t = ym.mul(&xinv);
    let phi: Vec<T> = tm.mul(&xinv).row(0).to_vec();
    let half = T::half();
    let mut s = t.clone();
    for a in 0..k {
        for b in 0..k {
            s.set(a, b, t.get(a, b).clone() + half.clone() * phi[a].clone() * phi[b].clone());
        }
    }
    if s.add(&s.transpose()) != Mat::zeros(k, k) {
        return Err(stage_err("b15 block is not isotropic"));
    }
    // Columns of P by 1-based position; A = P⁻¹.
    let mut cols: Vec<Option<Vec<T>>> = vec![None; k];
    let phi_rows = vec![phi.clone()];
    let odd = k % 2 == 1;
    let mut lower: Vec<usize> = (1..=k / 2).collect();
    let rest: Vec<Vec<T>> = if odd {
        if eps != 1 {
            return Err(stage_err("odd b15 requires eps = 1"));
        }
        let ker = s.kernel();
        if ker.len() != 1 {
            return Err(stage_err(format!("b15 pairing has {}-dimensional radical", ker.len())));
        }
        let r = &ker[0];
        let fr = dot(&phi, r);
        let c = fr.inv().ok_or_else(|| stage_err("radical vector is isotropic for phi"))?;
        cols[k.div_ceil(2) - 1] = Some(scaled(r, &(T::from_i64(-2) * c)));
        kernel_of_rows(k, &phi_rows)
    } else if eps == 1 {
        let kc = k / 2;
        lower.pop();
        let p = s.transpose().solve(&phi).ok_or_else(|| stage_err("b15 pairing is degenerate"))?;
        let j = phi.iter().position(|x| !x.is_zero()).ok_or_else(|| stage_err("eps = 1 but phi vanishes"))?;
        let mut q = vec![T::zero(); k];
        q[j] = -phi[j].inv().expect("nonzero");
        let rows = vec![s.transpose().mul_vec(&p), s.transpose().mul_vec(&q)];
        cols[kc - 1] = Some(p);
        cols[kc] = Some(q);
        kernel_of_rows(k, &rows)
    } else {
        if phi.iter().any(|x| !x.is_zero()) {
            return Err(stage_err("eps = 0 but the block meets the center"));
        }
        (0..k).map(|i| crate::linalg::unit(k, i)).collect()
    };
    let pairs = symplectic_pairs(&s, rest)?;
    if pairs.len() != lower.len() {
        return Err(stage_err("b15 pairing has the wrong rank"));
    }
    for (&pos, (p, q)) in lower.iter().zip(pairs) {
        cols[pos - 1] = Some(p);
        cols[k - pos] = Some(q);
    }
    let cols: Vec<Vec<T>> = cols.into_iter().map(|c| c.expect("every position filled")).collect();
    let a = Mat::from_cols(k, &cols).inverse().ok_or_else(|| stage_err("b15 basis is dependent"))?;
    let offset = xs[0] - shape.d;
    let d_plus = block_identity(shape.a1, offset, &a);
    let g = super::normalize::ell00(shape, &d_plus, None)?;
    let target = Subspace::span(2 * n + 1, &block_vectors::<T>(layout, 15, eps));
    if g.apply(v_block) != target {
        return Err(stage_err("b15 normal form not reached"));
    }
    Ok(g)
}
