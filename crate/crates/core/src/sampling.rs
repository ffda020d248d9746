//! Seeded random elements of O_{2n+1} and random isotropic subspaces, built
//! from Levi blocks ℓ(A), unipotents g(X, Z) and bar-compatible signed
//! permutations.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::field::Scalar;
use crate::form::{bar, ell, unipotent_xz, z_free_len, OrthElement};
use crate::linalg::{Mat, Subspace};

/// A small scalar; over GF(p) every residue is reachable.
pub fn random_scalar<T: Scalar, R: Rng>(rng: &mut R) -> T {
    match T::elements() {
        Some(all) => all.choose(rng).expect("nonempty field").clone(),
        None => T::from_i64(rng.gen_range(-3..=3)),
    }
}

pub fn random_vec<T: Scalar, R: Rng>(len: usize, rng: &mut R) -> Vec<T> {
    (0..len).map(|_| random_scalar(rng)).collect()
}

pub fn random_invertible<T: Scalar, R: Rng>(k: usize, rng: &mut R) -> Mat<T> {
    loop {
        let m = Mat::new(k, k, random_vec(k * k, rng));
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// σ permutes {0..n} and may swap i ↔ ī; it always commutes with bar.
pub fn random_signed_permutation<T: Scalar, R: Rng>(n: usize, rng: &mut R) -> OrthElement<T> {
    let big = 2 * n + 1;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut sigma = vec![n; big];
    for (i, &p) in perm.iter().enumerate() {
        let t = if rng.gen_bool(0.5) { p } else { bar(n, p) };
        sigma[i] = t;
        sigma[bar(n, i)] = bar(n, t);
    }
    let mut g = Mat::zeros(big, big);
    for (k, &s) in sigma.iter().enumerate() {
        g.set(s, k, T::one());
    }
    OrthElement::new(g).expect("signed permutation preserves the form")
}

pub fn random_unipotent<T: Scalar, R: Rng>(n: usize, rng: &mut R) -> OrthElement<T> {
    if n == 0 {
        return OrthElement::identity(0);
    }
    let x = Mat::new(n, 1, random_vec(n, rng));
    unipotent_xz(&x, &random_vec(z_free_len(n), rng), n).expect("shapes match")
}

/// A product of a few random Levi, unipotent and Weyl factors.
pub fn random_element<T: Scalar, R: Rng>(n: usize, rng: &mut R) -> OrthElement<T> {
    let mut g = OrthElement::identity(n);
    if n == 0 {
        return g;
    }
    for _ in 0..3 {
        g = ell(&random_invertible(n, rng), n).compose(&g);
        g = random_unipotent(n, rng).compose(&g);
        g = random_signed_permutation(n, rng).compose(&g);
    }
    g
}

/// g·span(e₀..e_{k−1}) for a random g.
pub fn random_isotropic<T: Scalar, R: Rng>(n: usize, k: usize, rng: &mut R) -> Subspace<T> {
    let front: Vec<usize> = (0..k).collect();
    random_element(n, rng).apply(&Subspace::coordinate(2 * n + 1, &front))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf7, Rational};
    use crate::form::is_isotropic;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_subspaces_are_isotropic() {
        let mut rng = StdRng::seed_from_u64(1);
        for n in 1..=4 {
            for k in 0..=n {
                let s = random_isotropic::<Gf7, _>(n, k, &mut rng);
                assert_eq!(s.dim(), k);
                assert!(is_isotropic(&s));
                let q = random_isotropic::<Rational, _>(n, k, &mut rng);
                assert!(is_isotropic(&q));
            }
        }
    }
}
