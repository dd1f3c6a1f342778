//! Arithmetic in prime fields GF(p).
//!
//! Elements carry their modulus so that values from different fields are
//! rejected rather than silently reduced. The `try_*` methods return
//! [`Error::MixedFields`]; the operator impls panic on a mismatch and are meant
//! for code that has already validated its inputs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A prime modulus small enough that products of two residues fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p > u64::from(u32::MAX) {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Embeds an integer, reducing it modulo p.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            p: self.p,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// All p elements in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.p).map(move |v| self.element(v))
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A residue in `[0, p)` tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    p: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::MixedFields(self.p, other.p))
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        Ok(Self {
            value: (self.value + rhs.value) % self.p,
            p: self.p,
        })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        Ok(Self {
            value: (self.value + self.p - rhs.value) % self.p,
            p: self.p,
        })
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        Ok(Self {
            value: (self.value * rhs.value) % self.p,
            p: self.p,
        })
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self.value;
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        Self {
            value: acc,
            p: self.p,
        }
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(self.p - 2))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: (self.p - self.value) % self.p,
            p: self.p,
        }
    }
}

fn common_modulus<'a>(mut elems: impl Iterator<Item = &'a FieldElement>) -> Result<Option<u64>> {
    let Some(first) = elems.next() else {
        return Ok(None);
    };
    for e in elems {
        first.same_field(e)?;
    }
    Ok(Some(first.p))
}

/// Evaluates `coeffs[0] + coeffs[1]*x + ...` by Horner's rule.
pub fn poly_eval(coeffs: &[FieldElement], x: FieldElement) -> Result<FieldElement> {
    if coeffs.is_empty() {
        return Err(Error::EmptyInput("polynomial has no coefficients"));
    }
    common_modulus(coeffs.iter().chain(std::iter::once(&x)))?;
    Ok(coeffs
        .iter()
        .rev()
        .fold(x.field().zero(), |acc, &c| acc * x + c))
}

/// Lagrange coefficients `l_i = prod_{j != i} x_j / (x_j - x_i)` for evaluation at zero.
pub fn lagrange_coefficients_at_zero(xs: &[FieldElement]) -> Result<Vec<FieldElement>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("no interpolation points"));
    }
    common_modulus(xs.iter())?;
    for (i, a) in xs.iter().enumerate() {
        if xs[..i].contains(a) {
            return Err(Error::DuplicateX(a.value));
        }
    }
    let one = xs[0].field().one();
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let (num, den) = xs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold((one, one), |(num, den), (_, &xj)| {
                    (num * xj, den * (xj - xi))
                });
            Ok(num * den.inv()?)
        })
        .collect()
}

/// Returns f(0) for the unique polynomial of degree < `points.len()` through `points`.
pub fn interpolate_at_zero(points: &[(FieldElement, FieldElement)]) -> Result<FieldElement> {
    let xs: Vec<FieldElement> = points.iter().map(|&(x, _)| x).collect();
    common_modulus(points.iter().flat_map(|(x, y)| [x, y]))?;
    let coeffs = lagrange_coefficients_at_zero(&xs)?;
    Ok(coeffs
        .iter()
        .zip(points)
        .fold(xs[0].field().zero(), |acc, (&l, &(_, y))| acc + l * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn construction_checks_primality_and_size() {
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeField::new(9), Err(Error::NotPrime(9)));
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(4_294_967_291).is_ok());
        assert_eq!(
            PrimeField::new(4_294_967_311),
            Err(Error::ModulusTooLarge(4_294_967_311))
        );
    }

    #[test]
    fn inverse_examples() {
        let f7 = gf(7);
        assert_eq!(f7.element(3).inv().unwrap(), f7.element(5));
        assert_eq!(f7.element(1).inv().unwrap(), f7.element(1));
        let f11 = gf(11);
        assert_eq!(f11.element(10).inv().unwrap(), f11.element(10));
        assert_eq!(f7.zero().inv(), Err(Error::ZeroInverse));
    }

    #[test]
    fn poly_eval_examples() {
        let f7 = gf(7);
        let c = [f7.element(3), f7.element(2)];
        assert_eq!(poly_eval(&c, f7.element(1)).unwrap().value(), 5);
        assert_eq!(poly_eval(&c, f7.element(0)).unwrap().value(), 3);
        assert_eq!(poly_eval(&c, f7.element(2)).unwrap().value(), 0);
        assert!(matches!(
            poly_eval(&[], f7.one()),
            Err(Error::EmptyInput(_))
        ));
        assert_eq!(poly_eval(&c, gf(11).one()), Err(Error::MixedFields(7, 11)));
    }

    #[test]
    fn interpolation_examples() {
        let f7 = gf(7);
        let e = |v| f7.element(v);
        assert_eq!(
            interpolate_at_zero(&[(e(1), e(5)), (e(2), e(0))]).unwrap(),
            e(3)
        );
        assert_eq!(interpolate_at_zero(&[(e(4), e(6))]).unwrap(), e(6));
        let f11 = gf(11);
        let g = |v| f11.element(v);
        let pts = [(g(1), g(3)), (g(2), g(3)), (g(3), g(3))];
        assert_eq!(interpolate_at_zero(&pts).unwrap(), g(3));
    }

    #[test]
    fn interpolation_errors() {
        let f7 = gf(7);
        let e = |v| f7.element(v);
        assert_eq!(
            interpolate_at_zero(&[(e(1), e(5)), (e(1), e(5))]),
            Err(Error::DuplicateX(1))
        );
        assert!(matches!(
            interpolate_at_zero(&[]),
            Err(Error::EmptyInput(_))
        ));
        let f5 = gf(5);
        assert_eq!(
            interpolate_at_zero(&[(e(1), e(5)), (f5.element(2), f5.element(1))]),
            Err(Error::MixedFields(7, 5))
        );
    }

    #[test]
    fn mixed_fields_are_rejected() {
        assert_eq!(
            gf(7).one().try_add(gf(5).one()),
            Err(Error::MixedFields(7, 5))
        );
        assert!(gf(7).one().try_mul(gf(5).one()).is_err());
    }

    #[test]
    fn exhaustive_field_axioms_small_primes() {
        for p in [2u64, 3, 5, 7, 11, 13, 101] {
            let f = gf(p);
            for a in f.elements() {
                assert!((a + (-a)).is_zero());
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), f.one());
                }
                for b in f.elements() {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    assert_eq!((a - b) + b, a);
                }
            }
        }
    }

    #[test]
    fn associativity_small_prime() {
        let f = gf(13);
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    assert_eq!((a + b) + c, a + (b + c));
                    assert_eq!((a * b) * c, a * (b * c));
                }
            }
        }
    }
}
