//! Dense univariate polynomials over the rationals: just enough to take the
//! GCD of dehomogenized binary forms and enumerate their rational roots.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficients from the constant term upward; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    fn monic(self) -> Self {
        match self.0.last().cloned() {
            Some(lead) => Poly(self.0.into_iter().map(|c| c / &lead).collect()),
            None => self,
        }
    }

    fn rem(&self, divisor: &Poly) -> Poly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (k, c) in divisor.0.iter().enumerate() {
                r[shift + k] -= &f * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    /// Monic GCD; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer polynomial with the same roots: denominators cleared and
    /// content divided out.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let lcm = self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    /// Quotient of exact division by a nonzero polynomial.
    fn quotient(&self, divisor: &Poly) -> Poly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.0[dd].clone();
        let mut r = self.0.clone();
        let mut q = vec![BigRational::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd {
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (k, c) in divisor.0.iter().enumerate() {
                r[shift + k] -= &f * c;
            }
            q[shift] = f;
            r.pop();
        }
        Poly::new(q)
    }

    /// All distinct rational roots, ascending. Panics on the zero polynomial.
    ///
    /// Real roots of the square-free part are isolated with a Sturm sequence
    /// until each interval is narrower than `1 / (2 L^2)`, `L` the leading
    /// coefficient of its primitive integer form. Rational roots have
    /// denominators dividing `L`, so such an interval holds at most one
    /// candidate: the fraction of smallest denominator inside it.
    pub fn rational_roots(&self) -> Vec<BigRational> {
        assert!(!self.is_zero(), "rational_roots of the zero polynomial");
        let mut roots = BTreeSet::new();
        let low = self.0.iter().position(|c| !c.is_zero()).unwrap();
        if low > 0 {
            roots.insert(BigRational::zero());
        }
        let f = Poly::new(self.0[low..].to_vec());
        if f.degree() == Some(0) {
            return roots.into_iter().collect();
        }
        let square_free = f.quotient(&f.gcd(&f.derivative()));
        let ints = square_free.primitive_integer();
        let s = Poly::new(ints.iter().map(|c| BigRational::from_integer(c.clone())).collect());
        if s.degree() == Some(1) {
            roots.insert(-&s.0[0] / &s.0[1]);
            return roots.into_iter().collect();
        }
        let lead = BigRational::from_integer(ints.last().unwrap().abs());
        let bound = BigRational::one() + s.0.iter().map(|c| c.abs()).max().unwrap() / &lead;
        let min_width = (BigRational::from_integer(2.into()) * &lead * &lead).recip();
        let sturm = sturm_sequence(&s);
        let changes = |x: &BigRational| sign_changes(&sturm, x);

        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((lo, hi)) = stack.pop() {
            let count = changes(&lo) - changes(&hi);
            if count == 0 {
                continue;
            }
            if count == 1 && &hi - &lo < min_width {
                let c = simplest_between(&lo, &hi);
                if s.eval(&c).is_zero() {
                    roots.insert(c);
                }
                continue;
            }
            let mid = split_point(&s, &lo, &hi, &mut roots);
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        roots.into_iter().collect()
    }
}

/// A point strictly inside `(lo, hi)` that is not a root of `s`; roots met
/// on the way are recorded.
fn split_point(s: &Poly, lo: &BigRational, hi: &BigRational, roots: &mut BTreeSet<BigRational>) -> BigRational {
    let width = hi - lo;
    for den in 2i64.. {
        for num in 1..den {
            let mid = lo + &width * BigRational::new(num.into(), den.into());
            if s.eval(&mid).is_zero() {
                roots.insert(mid);
            } else {
                return mid;
            }
        }
    }
    unreachable!("a nonzero polynomial has finitely many roots")
}

fn sturm_sequence(s: &Poly) -> Vec<Poly> {
    let mut seq = vec![s.clone(), s.derivative()];
    loop {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1]);
        if r.is_zero() {
            return seq;
        }
        seq.push(Poly::new(r.0.into_iter().map(|c| -c).collect()));
    }
}

fn sign_changes(seq: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<bool> = seq
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The fraction of smallest denominator in the closed interval `[lo, hi]`.
fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    if !lo.is_positive() {
        return BigRational::zero();
    }
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Newton interpolation through `(t_k, v_k)` with distinct integer nodes.
pub fn interpolate(points: &[(BigInt, BigInt)]) -> Poly {
    let n = points.len();
    let xs: Vec<BigRational> = points.iter().map(|(x, _)| BigRational::from_integer(x.clone())).collect();
    let mut dd: Vec<BigRational> = points.iter().map(|(_, y)| BigRational::from_integer(y.clone())).collect();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (&dd[k] - &dd[k - 1]) / (&xs[k] - &xs[k - level]);
        }
    }
    // expand the Newton form from the innermost term outward
    let mut acc: Vec<BigRational> = Vec::new();
    for k in (0..n).rev() {
        let mut next = vec![BigRational::zero(); acc.len() + 1];
        for (e, c) in acc.iter().enumerate() {
            next[e + 1] += c;
            next[e] -= c * &xs[k];
        }
        next[0] += &dd[k];
        acc = next;
    }
    Poly::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gcd_of_products() {
        // (t - 1)(2t + 3) and (t - 1)(t + 5)
        let a = Poly::from_ints(&[-3, 1, 2]);
        let b = Poly::from_ints(&[-5, 4, 1]);
        assert_eq!(a.gcd(&b), Poly::from_ints(&[-1, 1]));
        assert_eq!(Poly::zero().gcd(&Poly::zero()), Poly::zero());
        assert_eq!(Poly::zero().gcd(&a).degree(), Some(2));
    }

    #[test]
    fn rational_roots_found() {
        // (2t - 1)(3t + 1)(t - 1) = 6t^3 - 7t^2 + 1
        let p = Poly::from_ints(&[1, 0, -7, 6]);
        assert_eq!(p.rational_roots(), vec![q(-1, 3), q(1, 2), q(1, 1)]);
        // t^2 + 1 has none; t^2 * (t - 2) has 0 and 2
        assert!(Poly::from_ints(&[1, 0, 1]).rational_roots().is_empty());
        assert_eq!(Poly::from_ints(&[0, 0, -2, 1]).rational_roots(), vec![q(0, 1), q(2, 1)]);
        assert!(Poly::from_ints(&[7]).rational_roots().is_empty());
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let p = Poly::from_ints(&[4, 0, -3, 2]);
        let pts: Vec<(BigInt, BigInt)> = (0..4)
            .map(|t| {
                let v = p.eval(&BigRational::from_integer(t.into()));
                (BigInt::from(t), v.to_integer())
            })
            .collect();
        assert_eq!(interpolate(&pts), p);
    }

    fn mul(a: &Poly, b: &Poly) -> Poly {
        let mut out = vec![BigRational::zero(); a.0.len() + b.0.len() - 1];
        for (i, x) in a.0.iter().enumerate() {
            for (j, y) in b.0.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Poly::new(out)
    }

    #[test]
    fn roots_with_large_coefficients_and_multiplicity() {
        // (10^15 t - 7)^2 (t + 3) (t^2 - 2)
        let big = BigInt::from(10).pow(15);
        let lin = Poly::new(vec![q(-7, 1), BigRational::from_integer(big.clone())]);
        let p = mul(&mul(&mul(&lin, &lin), &Poly::from_ints(&[3, 1])), &Poly::from_ints(&[-2, 0, 1]));
        assert_eq!(p.rational_roots(), vec![q(-3, 1), BigRational::new(7.into(), big)]);
        // two close rational roots 1/3 and 1/2 with a double root at 1/2
        let p = mul(&Poly::from_ints(&[-1, 3]), &mul(&Poly::from_ints(&[-1, 2]), &Poly::from_ints(&[-1, 2])));
        assert_eq!(p.rational_roots(), vec![q(1, 3), q(1, 2)]);
    }

    #[test]
    fn simplest_fraction() {
        assert_eq!(simplest_between(&q(3, 10), &q(4, 10)), q(1, 3));
        assert_eq!(simplest_between(&q(-4, 10), &q(-3, 10)), q(-1, 3));
        assert_eq!(simplest_between(&q(-1, 2), &q(1, 2)), q(0, 1));
        assert_eq!(simplest_between(&q(5, 2), &q(7, 2)), q(3, 1));
    }
}
