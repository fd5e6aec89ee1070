//! The symmetric F-nef cone in the coordinates `(c_2, .., c_{floor(n/2)})`:
//! its facet system, extremal rays by double description, and sampling.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{four_quads, FQuad};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::divisor::SymmetricDivisor;

/// Largest cone dimension accepted by [`extremal_rays`].
pub const MAX_RAY_DIMENSION: usize = 20;

/// Intermediate ray count at which [`extremal_rays`] gives up.
pub const DEFAULT_RAY_LIMIT: usize = 60_000;

/// An integer linear form in `(c_2, .., c_{floor(n/2)})` together with every
/// F-curve inducing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub form: Vec<i64>,
    pub quads: Vec<FQuad>,
}

impl Facet {
    pub fn multiplicity(&self) -> usize {
        self.quads.len()
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        self.form
            .iter()
            .zip(point)
            .map(|(&a, x)| x * Rational::from_integer(a))
            .sum()
    }

    fn evaluate_int(&self, point: &[i128]) -> Option<i128> {
        self.form.iter().zip(point).try_fold(0i128, |acc, (&a, &x)| {
            (a as i128).checked_mul(x).and_then(|t| acc.checked_add(t))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeDescription {
    pub n: usize,
    pub dim: usize,
    pub facets: Vec<Facet>,
    /// Primitive integer generators, present after [`extremal_rays`].
    pub rays: Option<Vec<Vec<i64>>>,
}

impl ConeDescription {
    /// Membership by evaluating every facet form.
    pub fn contains(&self, divisor: &SymmetricDivisor) -> bool {
        divisor.n() == self.n
            && self.facets.iter().all(|facet| !facet.evaluate(divisor.coeffs()).is_negative())
    }
}

/// The linear form of `L . F(a,b,c,d)` obtained by substituting
/// `f(i) = f(n-i) = -c_i`.
pub fn quad_form(n: usize, quad: &FQuad) -> Vec<i64> {
    let dim = n / 2 - 1;
    let mut form = vec![0i64; dim];
    let mut add = |a: usize, sign: i64| {
        let a = a % n;
        let i = a.min(n - a);
        if i >= 2 {
            // f contributes -c_i.
            form[i - 2] -= sign;
        }
    };
    let [a, b, c, d] = quad.quad;
    for x in [a, b, c, d] {
        add(x, 1);
    }
    for s in [a + b, b + c, a + c] {
        add(s, -1);
    }
    form
}

pub fn facet_system(n: usize) -> Result<ConeDescription> {
    let quads = four_quads(n)?;
    let mut facets: Vec<Facet> = Vec::new();
    for quad in quads {
        let form = quad_form(n, &quad);
        match facets.iter_mut().find(|f| f.form == form) {
            Some(existing) => existing.quads.push(quad),
            None => facets.push(Facet { form, quads: vec![quad] }),
        }
    }
    Ok(ConeDescription { n, dim: n / 2 - 1, facets, rays: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet { words: vec![0; bits.div_ceil(64)] }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_superset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| b & !a == 0)
    }
}

struct Ray {
    coords: Vec<i128>,
    zeros: BitSet,
}

fn overflow() -> Error {
    Error::TooLarge("ray coordinates overflowed 128-bit integers".into())
}

fn primitive(mut v: Vec<i128>) -> Vec<i128> {
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
    v
}

/// Distinct primitive forms, in the order they first occur.
fn primitive_rows(facets: &[Facet]) -> Vec<Facet> {
    let mut rows: Vec<Facet> = Vec::new();
    for facet in facets {
        if facet.form.iter().all(|&a| a == 0) {
            continue;
        }
        let g = facet.form.iter().fold(0i64, |g, &x| g.gcd(&x));
        let form: Vec<i64> = facet.form.iter().map(|&a| a / g).collect();
        if !rows.iter().any(|r| r.form == form) {
            rows.push(Facet { form, quads: facet.quads.clone() });
        }
    }
    rows
}

/// Picks the first `dim` linearly independent rows (in order) and returns their indices.
fn independent_rows(rows: &[Facet], dim: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v: Vec<Rational> = row.form.iter().map(|&a| Rational::from_integer(a)).collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let factor = &v[p] / &b[p];
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &factor * y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            basis.push(v);
            pivots.push(p);
            chosen.push(idx);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}

/// Solves `B r = e_j` for each `j` and scales the columns to primitive integer vectors.
fn initial_rays(rows: &[Facet], chosen: &[usize], dim: usize) -> Result<Vec<Vec<i128>>> {
    let mut aug: Vec<Vec<Rational>> = chosen
        .iter()
        .enumerate()
        .map(|(r, &idx)| {
            let mut row: Vec<Rational> =
                rows[idx].form.iter().map(|&a| Rational::from_integer(a)).collect();
            row.extend((0..dim).map(|c| Rational::from_integer((c == r) as i64)));
            row
        })
        .collect();
    for col in 0..dim {
        let pivot = (col..dim).find(|&r| !aug[r][col].is_zero()).expect("independent rows");
        aug.swap(col, pivot);
        let inv = aug[col][col].recip();
        aug[col].iter_mut().for_each(|x| *x *= &inv);
        for r in 0..dim {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                let pivot_row = aug[col].clone();
                for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                    *x -= &factor * y;
                }
            }
        }
    }
    // Column j of the inverse sits in aug[..][dim + j].
    (0..dim)
        .map(|j| {
            let column: Vec<Rational> = (0..dim).map(|r| aug[r][dim + j].clone()).collect();
            let lcm = column.iter().fold(num_bigint::BigInt::from(1), |l, x| l.lcm(&x.denom()));
            let ints = column
                .iter()
                .map(|x| (x.to_big() * &lcm).to_integer().to_i128().ok_or_else(overflow))
                .collect::<Result<Vec<_>>>()?;
            Ok(primitive(ints))
        })
        .collect()
}

/// Extremal rays of the facet system by the double-description method.
pub fn extremal_rays(n: usize) -> Result<ConeDescription> {
    extremal_rays_with_limit(n, DEFAULT_RAY_LIMIT)
}

/// Like [`extremal_rays`], failing with [`Error::TooLarge`] once more than
/// `max_rays` rays are held after any insertion step.
pub fn extremal_rays_with_limit(n: usize, max_rays: usize) -> Result<ConeDescription> {
    let mut cone = facet_system(n)?;
    let dim = cone.dim;
    if dim > MAX_RAY_DIMENSION {
        return Err(Error::TooLarge(format!(
            "cone dimension {dim} exceeds the enumeration limit {MAX_RAY_DIMENSION}"
        )));
    }
    let rows = primitive_rows(&cone.facets);
    let chosen = independent_rows(&rows, dim);
    if chosen.len() < dim {
        return Err(Error::InvalidInput(format!("F-nef cone for n = {n} is not pointed")));
    }
    let mut order: Vec<usize> = chosen.clone();
    order.extend((0..rows.len()).filter(|i| !chosen.contains(i)));

    let mut rays: Vec<Ray> = initial_rays(&rows, &chosen, dim)?
        .into_iter()
        .enumerate()
        .map(|(j, coords)| {
            let mut zeros = BitSet::new(rows.len());
            for (r, _) in chosen.iter().enumerate().filter(|&(r, _)| r != j) {
                zeros.insert(r);
            }
            Ray { coords, zeros }
        })
        .collect();

    for (step, &row_idx) in order.iter().enumerate().skip(dim) {
        let row = &rows[row_idx];
        let values = rays
            .iter()
            .map(|r| row.evaluate_int(&r.coords).ok_or_else(overflow))
            .collect::<Result<Vec<i128>>>()?;
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i] > 0).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i] < 0).collect();
        if negative.is_empty() {
            for (ray, &v) in rays.iter_mut().zip(&values) {
                if v == 0 {
                    ray.zeros.insert(step);
                }
            }
            continue;
        }
        let mut created = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros.intersection(&rays[q].zeros);
                if common.len() + 2 < dim {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(r, ray)| r != p && r != q && ray.zeros.is_superset(&common));
                if blocked {
                    continue;
                }
                let (vp, vq) = (values[p], -values[q]);
                let coords = rays[p]
                    .coords
                    .iter()
                    .zip(&rays[q].coords)
                    .map(|(&x, &y)| {
                        vq.checked_mul(x)
                            .and_then(|a| vp.checked_mul(y).and_then(|b| a.checked_add(b)))
                            .ok_or_else(overflow)
                    })
                    .collect::<Result<Vec<i128>>>()?;
                let mut zeros = common;
                zeros.insert(step);
                created.push(Ray { coords: primitive(coords), zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() - negative.len() + created.len());
        for (mut ray, v) in rays.into_iter().zip(values) {
            if v >= 0 {
                if v == 0 {
                    ray.zeros.insert(step);
                }
                kept.push(ray);
            }
        }
        kept.extend(created);
        rays = kept;
        if rays.len() > max_rays {
            return Err(Error::TooLarge(format!(
                "{} intermediate rays after {} of {} facets exceed the limit {max_rays}",
                rays.len(),
                step + 1,
                rows.len()
            )));
        }
    }

    let mut out = rays
        .into_iter()
        .map(|r| {
            r.coords
                .into_iter()
                .map(|x| i64::try_from(x).map_err(|_| overflow()))
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    cone.rays = Some(out);
    Ok(cone)
}

/// A random nonnegative integer combination of the extremal rays.
pub fn sample_fnef(cone: &ConeDescription, seed: u64) -> Result<SymmetricDivisor> {
    let rays = cone
        .rays
        .as_ref()
        .ok_or_else(|| Error::Precondition("cone rays have not been enumerated".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<i64> = rays.iter().map(|_| rng.gen_range(0..=3)).collect();
    combine_rays(cone, &weights)
}

/// `sum weights[r] * rays[r]` as a divisor; weights must be nonnegative.
pub fn combine_rays(cone: &ConeDescription, weights: &[i64]) -> Result<SymmetricDivisor> {
    let rays = cone
        .rays
        .as_ref()
        .ok_or_else(|| Error::Precondition("cone rays have not been enumerated".into()))?;
    if weights.len() != rays.len() || weights.iter().any(|&w| w < 0) {
        return Err(Error::InvalidInput("need one nonnegative weight per ray".into()));
    }
    let mut coeffs = vec![0i64; cone.dim];
    for (ray, &w) in rays.iter().zip(weights) {
        for (c, &x) in coeffs.iter_mut().zip(ray) {
            *c += w * x;
        }
    }
    SymmetricDivisor::from_integers(cone.n, &coeffs)
}

/// The divisor whose coefficient vector is `ray`.
pub fn ray_divisor(n: usize, ray: &[i64]) -> Result<SymmetricDivisor> {
    SymmetricDivisor::from_integers(n, ray)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    #[test]
    fn small_facet_systems() {
        let six = facet_system(6).unwrap();
        let forms: Vec<Vec<i64>> = six.facets.iter().map(|f| f.form.clone()).collect();
        assert_eq!(forms, vec![vec![3, -1], vec![-1, 2]]);
        let four = facet_system(4).unwrap();
        assert_eq!(four.facets.len(), 1);
        assert_eq!(four.facets[0].form, vec![3]);
        let five = facet_system(5).unwrap();
        assert_eq!(five.facets.len(), 1);
        assert!(five.facets[0].form[0] > 0);
    }

    #[test]
    fn small_rays() {
        let six = extremal_rays(6).unwrap();
        assert_eq!(six.rays.unwrap(), vec![vec![1, 3], vec![2, 1]]);
        let four = extremal_rays(4).unwrap();
        assert_eq!(four.rays.unwrap(), vec![vec![1]]);
    }

    #[test]
    fn sampling() {
        let six = extremal_rays(6).unwrap();
        assert_eq!(combine_rays(&six, &[1, 1]).unwrap(), SymmetricDivisor::from_integers(6, &[3, 4]).unwrap());
        let a = sample_fnef(&six, 7).unwrap();
        assert_eq!(a, sample_fnef(&six, 7).unwrap());
        assert!(six.contains(&a));
        assert!(sample_fnef(&facet_system(6).unwrap(), 1).is_err());
    }

    fn det(mut a: Vec<Vec<i128>>) -> i128 {
        let k = a.len();
        if k == 0 {
            return 1;
        }
        let mut sign = 1;
        let mut prev = 1i128;
        for i in 0..k {
            if a[i][i] == 0 {
                match (i + 1..k).find(|&r| a[r][i] != 0) {
                    Some(r) => {
                        a.swap(i, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for r in i + 1..k {
                for c in i + 1..k {
                    a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) / prev;
                }
            }
            prev = a[i][i];
        }
        sign * a[k - 1][k - 1]
    }

    /// Generalized cross product: the kernel of a `(d-1) x d` matrix of full rank.
    fn kernel(rows: &[&Vec<i64>], d: usize) -> Vec<i128> {
        (0..d)
            .map(|j| {
                let minor: Vec<Vec<i128>> = rows
                    .iter()
                    .map(|r| (0..d).filter(|&c| c != j).map(|c| r[c] as i128).collect())
                    .collect();
                if j % 2 == 0 {
                    det(minor)
                } else {
                    -det(minor)
                }
            })
            .collect()
    }

    fn primitive(v: &[i128]) -> Vec<i64> {
        let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
        v.iter().map(|&x| (x / g) as i64).collect()
    }

    fn subsets(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            subsets(n, k, i + 1, current, out);
            current.pop();
        }
    }

    /// Rays by brute force over all `(d-1)`-subsets of facets.
    fn brute_force_rays(n: usize) -> Vec<Vec<i64>> {
        let cone = facet_system(n).unwrap();
        let d = cone.dim;
        let forms: Vec<&Vec<i64>> = cone.facets.iter().map(|f| &f.form).collect();
        let mut choices = Vec::new();
        subsets(forms.len(), d - 1, 0, &mut Vec::new(), &mut choices);
        let mut rays = Vec::new();
        for choice in choices {
            let rows: Vec<&Vec<i64>> = choice.iter().map(|&i| forms[i]).collect();
            let x = kernel(&rows, d);
            if x.iter().all(|&v| v == 0) {
                continue;
            }
            for sign in [1i128, -1] {
                let y: Vec<i128> = x.iter().map(|v| sign * v).collect();
                let inside = forms
                    .iter()
                    .all(|f| f.iter().zip(&y).map(|(&a, &b)| a as i128 * b).sum::<i128>() >= 0);
                if inside {
                    rays.push(primitive(&y));
                }
            }
        }
        rays.sort();
        rays.dedup();
        rays
    }

    #[test]
    fn rays_match_brute_force() {
        for n in 4..=14 {
            let rays = extremal_rays(n).unwrap().rays.unwrap();
            assert_eq!(rays, brute_force_rays(n), "n = {n}");
        }
    }

    #[test]
    fn every_ray_is_cut_out_by_its_tight_facets() {
        for n in [12, 16, 18] {
            let cone = extremal_rays(n).unwrap();
            let d = cone.dim;
            for ray in cone.rays.as_ref().unwrap() {
                let tight: Vec<&Vec<i64>> = cone
                    .facets
                    .iter()
                    .map(|f| &f.form)
                    .filter(|f| f.iter().zip(ray).map(|(a, b)| a * b).sum::<i64>() == 0)
                    .collect();
                assert!(tight.len() >= d - 1, "n = {n}, ray {ray:?}");
                assert!(ray.iter().map(|&x| x as i128).fold(0, |g: i128, x| g.gcd(&x)) == 1);
                // Some (d-1)-subset of tight facets has the ray as its kernel.
                let mut choices = Vec::new();
                subsets(tight.len(), d - 1, 0, &mut Vec::new(), &mut choices);
                let spans = choices.iter().any(|c| {
                    let rows: Vec<&Vec<i64>> = c.iter().map(|&i| tight[i]).collect();
                    let x = kernel(&rows, d);
                    let negated: Vec<i128> = x.iter().map(|v| -v).collect();
                    x.iter().any(|&v| v != 0) && (primitive(&x) == *ray || primitive(&negated) == *ray)
                });
                assert!(spans, "n = {n}, ray {ray:?}");
            }
        }
    }
}
