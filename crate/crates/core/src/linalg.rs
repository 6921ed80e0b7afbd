//! Exact integer/rational linear algebra used by the divisibility engine.
//!
//! Matrices are dense row-major `Vec<Vec<BigInt>>`. Everything here is exact;
//! ranks and kernels are computed over the rationals and kernels are returned
//! as primitive integer vectors.

use std::cmp::{Ordering, Reverse};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Rank of an integer matrix via fraction-free (Bareiss) elimination.
pub fn rank(m: &[Vec<BigInt>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: IntMatrix = m.to_vec();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for k in c + 1..cols {
                let v = &a[r][c] * &a[i][k] - &a[i][c] * &a[r][k];
                a[i][k] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Determinant of a square integer matrix (Bareiss).
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap(c, p);
            sign = -sign;
        }
        for i in c + 1..n {
            for k in c + 1..n {
                let v = &a[c][c] * &a[i][k] - &a[i][c] * &a[c][k];
                a[i][k] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[c][c].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Basis of the right kernel `{ v : m v = 0 }`, one primitive normalized
/// integer vector per free column of the reduced row echelon form.
pub fn kernel(m: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for k in c..cols {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..cols {
                    let v = &a[r][k] * &f;
                    a[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        basis.push(normalize(&clear_denominators(&v)));
    }
    basis
}

/// Multiplies a rational vector by the lcm of its denominators.
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Divides out the content and makes the first nonzero coordinate positive.
/// The zero vector is returned unchanged.
pub fn normalize(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let first_negative = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if first_negative { -g } else { g };
    v.iter().map(|x| x / &g).collect()
}

pub fn is_normalized(v: &[BigInt]) -> bool {
    v.iter().any(|x| !x.is_zero()) && normalize(v) == v
}

pub fn height(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_default()
}

/// Total order used to pick canonical witnesses: smaller height first, then
/// fewer nonzero coordinates, then support on earlier basis positions
/// (lexicographically larger coordinate tuples first).
pub fn canonical_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    let key = |v: &[BigInt]| {
        let nnz = v.iter().filter(|x| !x.is_zero()).count();
        (height(v), nnz)
    };
    key(a)
        .cmp(&key(b))
        .then_with(|| Reverse(a).cmp(&Reverse(b)))
}

/// All normalized integer vectors of the given length with entries in
/// `[-h, h]`, sorted by [`canonical_cmp`].
pub fn normalized_vectors(len: usize, h: u32) -> Vec<Vec<BigInt>> {
    let h = i64::from(h);
    let mut out = Vec::new();
    let mut cur = vec![-h; len];
    if len == 0 {
        return out;
    }
    loop {
        let v: Vec<BigInt> = cur.iter().map(|&x| BigInt::from(x)).collect();
        if is_normalized(&v) {
            out.push(v);
        }
        let mut k = len;
        loop {
            if k == 0 {
                out.sort_by(|a, b| canonical_cmp(a, b));
                return out;
            }
            k -= 1;
            if cur[k] < h {
                cur[k] += 1;
                break;
            }
            cur[k] = -h;
        }
    }
}

/// Prime used for the fast rank filter.
pub const FILTER_PRIME: u64 = 2_147_483_647;

pub fn reduce_mod_p(x: &BigInt) -> u64 {
    let p = BigInt::from(FILTER_PRIME);
    u64::try_from(x.mod_floor(&p)).expect("residue fits in u64")
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % FILTER_PRIME;
        }
        b = b * b % FILTER_PRIME;
        e >>= 1;
    }
    acc
}

/// Rank over `F_p` with `p = FILTER_PRIME`; never exceeds the rational rank.
/// Entries must already be reduced. The matrix is overwritten.
pub fn rank_mod_p(a: &mut [Vec<u64>]) -> usize {
    const P: u64 = FILTER_PRIME;
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, piv);
        let inv = pow_mod(a[r][c], P - 2);
        for i in r + 1..rows {
            if a[i][c] == 0 {
                continue;
            }
            let f = a[i][c] * inv % P;
            for k in c..cols {
                a[i][k] = (a[i][k] + (P - f) * a[r][k]) % P;
            }
        }
        r += 1;
    }
    r
}

/// `m * v` for an integer matrix and vector.
pub fn apply(m: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn vecz(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rank_and_determinant() {
        let m = mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(rank(&m), 2);
        assert_eq!(determinant(&m), BigInt::zero());
        let m = mat(&[&[2, 1], &[1, 3]]);
        assert_eq!(rank(&m), 2);
        assert_eq!(determinant(&m), BigInt::from(5));
        let m = mat(&[&[0, 1], &[1, 0]]);
        assert_eq!(determinant(&m), BigInt::from(-1));
        assert_eq!(rank(&mat(&[&[0, 0]])), 0);
    }

    #[test]
    fn rank_mod_p_matches_and_can_drop() {
        let m = mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        let mut r: Vec<Vec<u64>> = m.iter().map(|row| row.iter().map(reduce_mod_p).collect()).collect();
        assert_eq!(rank_mod_p(&mut r), 3);
        // determinant p: full rank over Q, singular mod p
        let p = FILTER_PRIME as i64;
        let m = mat(&[&[1, 0], &[0, p]]);
        assert_eq!(rank(&m), 2);
        let mut r: Vec<Vec<u64>> = m.iter().map(|row| row.iter().map(reduce_mod_p).collect()).collect();
        assert_eq!(rank_mod_p(&mut r), 1);
        assert_eq!(reduce_mod_p(&BigInt::from(-1)), FILTER_PRIME - 1);
    }

    #[test]
    fn kernel_of_row_sum() {
        let k = kernel(&mat(&[&[1, 1]]), 2);
        assert_eq!(k, vec![vecz(&[1, -1])]);
        let k = kernel(&mat(&[&[2, 4, 6]]), 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(apply(&mat(&[&[2, 4, 6]]), v).iter().all(Zero::is_zero));
        }
        assert!(kernel(&mat(&[&[1, 0], &[0, 1]]), 2).is_empty());
    }

    #[test]
    fn kernel_with_no_rows_is_everything() {
        assert_eq!(kernel(&[], 2), vec![vecz(&[1, 0]), vecz(&[0, 1])]);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(&vecz(&[0, -2, 4])), vecz(&[0, 1, -2]));
        assert_eq!(normalize(&vecz(&[3, 6])), vecz(&[1, 2]));
        assert!(is_normalized(&vecz(&[1, -1])));
        assert!(!is_normalized(&vecz(&[-1, 1])));
        assert!(!is_normalized(&vecz(&[0, 0])));
    }

    #[test]
    fn canonical_order_prefers_early_unit_vectors() {
        let vs = normalized_vectors(2, 1);
        assert_eq!(vs[0], vecz(&[1, 0]));
        assert_eq!(vs[1], vecz(&[0, 1]));
        assert_eq!(vs.len(), 4);
        // (2H+1)^n minus zero, halved by the sign normalization, minus non-primitive
        assert_eq!(normalized_vectors(3, 2).len(), 49);
    }
}
