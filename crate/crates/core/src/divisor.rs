//! Symmetric divisor classes, their coefficient function `f` on `Z/nZ`,
//! F-inequalities and boundary expressions `D = -sum b_{I,J} Delta_{I,J}`.

use num_traits::Zero;

use crate::combinatorics::{four_quads, split_count, two_part_splits, FQuad, TwoPartSplit};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// `L = sum_{i=2}^{n/2} c_i Delta_i` in the symmetric boundary basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricDivisor {
    n: usize,
    coeffs: Vec<Rational>,
}

impl SymmetricDivisor {
    /// `coeffs[0]` is `c_2`; exactly `floor(n/2) - 1` coefficients are required.
    pub fn new(n: usize, coeffs: Vec<Rational>) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("symmetric divisors need n >= 4, got {n}")));
        }
        if coeffs.len() != n / 2 - 1 {
            return Err(Error::InvalidInput(format!(
                "n = {n} needs {} coefficients, got {}",
                n / 2 - 1,
                coeffs.len()
            )));
        }
        Ok(SymmetricDivisor { n, coeffs })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![Rational::zero(); n.max(2) / 2 - 1])
    }

    pub fn from_integers(n: usize, coeffs: &[i64]) -> Result<Self> {
        Self::new(n, coeffs.iter().map(|&c| crate::rational::int(c)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinate vector `(c_2, .., c_{floor(n/2)})`.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `c_i` for `2 <= i <= floor(n/2)`.
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i - 2]
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        SymmetricDivisor { n: self.n, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }
}

/// The symmetric coefficient function `f` with `L = -sum f(|I|) Delta_{I,J}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FFunction {
    n: usize,
    values: Vec<Rational>,
}

impl FFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `f(a mod n)`.
    pub fn at(&self, a: usize) -> &Rational {
        &self.values[a % self.n]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }
}

/// `f(i) = f(n - i) = -c_i` for `2 <= i <= n/2`, and `f(0) = f(1) = f(n-1) = 0`.
pub fn f_from_symmetric(divisor: &SymmetricDivisor) -> FFunction {
    let n = divisor.n;
    let values = (0..n)
        .map(|a| {
            let i = a.min(n - a);
            if i >= 2 {
                -divisor.coeff(i)
            } else {
                Rational::zero()
            }
        })
        .collect();
    FFunction { n, values }
}

/// `L . F(a,b,c,d) = f(a)+f(b)+f(c)+f(d) - f(a+b) - f(b+c) - f(a+c)`.
pub fn f_inequality_value(f: &FFunction, quad: &FQuad) -> Rational {
    debug_assert_eq!(quad.n % f.n, 0);
    let [a, b, c, d] = quad.quad;
    f.at(a) + f.at(b) + f.at(c) + f.at(d) - f.at(a + b) - f.at(b + c) - f.at(a + c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FNefVerdict {
    Yes,
    /// First violated F-curve in enumeration order.
    No { witness: FQuad, value: Rational },
}

impl FNefVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, FNefVerdict::Yes)
    }
}

pub fn is_fnef(divisor: &SymmetricDivisor) -> FNefVerdict {
    let f = f_from_symmetric(divisor);
    for quad in four_quads(divisor.n).expect("n >= 4 by construction") {
        let value = f_inequality_value(&f, &quad);
        if value.is_negative() {
            return FNefVerdict::No { witness: quad, value };
        }
    }
    FNefVerdict::Yes
}

/// A function on unordered pairs `{i, j}` of `[m]`, `i != j`; markers are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairFunction {
    m: usize,
    values: Vec<Rational>,
}

fn pair_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    hi * (hi - 1) / 2 + lo
}

impl PairFunction {
    pub fn zero(m: usize) -> Self {
        PairFunction { m, values: vec![Rational::zero(); m * m.saturating_sub(1) / 2] }
    }

    pub fn from_fn(m: usize, mut value: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut w = Self::zero(m);
        for j in 1..m {
            for i in 0..j {
                w.values[pair_index(i, j)] = value(i, j);
            }
        }
        w
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        assert!(i != j && i < self.m && j < self.m, "pair ({i},{j}) outside [{}]", self.m);
        &self.values[pair_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        assert!(i != j && i < self.m && j < self.m, "pair ({i},{j}) outside [{}]", self.m);
        self.values[pair_index(i, j)] = value;
    }

    /// Pairs `(i, j)` with `i < j` in lexicographic order, with their values.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| (i + 1..m).map(move |j| ((i, j), self.get(i, j))))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// `sum_{i in side, j not in side} w(i, j)`; bit `t` of `side` is marker `t`.
    pub fn cut_value(&self, side: u64) -> Rational {
        let mut total = Rational::zero();
        for i in 0..self.m {
            if side >> i & 1 == 0 {
                continue;
            }
            for j in 0..self.m {
                if side >> j & 1 == 0 {
                    total += self.get(i, j);
                }
            }
        }
        total
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        PairFunction { m: self.m, values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &PairFunction) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: other.m });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(PairFunction { m: self.m, values })
    }

    /// Relabels markers: the result takes value `w(perm[i], perm[j])` at `(i, j)`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        PairFunction::from_fn(self.m, |i, j| self.get(perm[i], perm[j]).clone())
    }
}

/// A divisor on `M_{0,m}` written as `-sum b_{I,J} Delta_{I,J}` over all splits,
/// with `Delta_{{i}, rest} = -psi_i` on the non-proper ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryExpression {
    m: usize,
    b: Vec<Rational>,
}

impl BoundaryExpression {
    pub fn zero(m: usize) -> Result<Self> {
        let splits = two_part_splits(m)?;
        Ok(BoundaryExpression { m, b: vec![Rational::zero(); splits.len()] })
    }

    /// Builds an expression from the coefficient of each canonical split.
    pub fn from_fn(m: usize, mut coefficient: impl FnMut(TwoPartSplit) -> Rational) -> Result<Self> {
        let b = two_part_splits(m)?.into_iter().map(&mut coefficient).collect();
        Ok(BoundaryExpression { m, b })
    }

    /// Coefficients indexed by [`TwoPartSplit::index`].
    pub fn from_values(m: usize, b: Vec<Rational>) -> Result<Self> {
        two_part_splits(m)?;
        if b.len() != split_count(m) {
            return Err(Error::InvalidInput(format!(
                "expected {} split coefficients, got {}",
                split_count(m),
                b.len()
            )));
        }
        Ok(BoundaryExpression { m, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, split: &TwoPartSplit) -> &Rational {
        &self.b[split.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.b
    }

    pub fn splits(&self) -> impl Iterator<Item = (TwoPartSplit, &Rational)> + '_ {
        self.b.iter().enumerate().map(|(i, v)| (TwoPartSplit::from_index(self.m, i), v))
    }

    /// Relabels markers: the coefficient at side `S` becomes that of `perm(S)`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let b = (0..self.b.len())
            .map(|i| {
                let split = TwoPartSplit::from_index(self.m, i);
                let image = (0..self.m)
                    .filter(|&t| split.side >> t & 1 == 1)
                    .fold(0u64, |acc, t| acc | 1 << perm[t]);
                self.b[TwoPartSplit::from_side(self.m, image).expect("bijection").index()].clone()
            })
            .collect();
        BoundaryExpression { m: self.m, b }
    }
}

/// The expression of `L` on `[n]` itself: `b_{I,J} = f(|I|)`.
pub fn full_boundary_expression(divisor: &SymmetricDivisor) -> Result<BoundaryExpression> {
    let f = f_from_symmetric(divisor);
    BoundaryExpression::from_fn(divisor.n, |s| f.at(s.side_size()).clone())
}

/// `b'_{I,J} = b_{I,J} + sum_{i in I, j in J} u(i, j)`, a Keel-relation shift
/// representing the same class.
pub fn apply_cut_shift(expr: &BoundaryExpression, shift: &PairFunction) -> Result<BoundaryExpression> {
    if shift.m != expr.m {
        return Err(Error::DimensionMismatch { expected: expr.m, got: shift.m });
    }
    let b = expr
        .splits()
        .map(|(split, b)| b + shift.cut_value(split.side))
        .collect();
    Ok(BoundaryExpression { m: expr.m, b })
}
