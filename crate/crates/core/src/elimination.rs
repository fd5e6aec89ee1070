//! Fourier-Motzkin elimination, used as an independent feasibility oracle.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::rational::Rational;
use crate::simplex::Row;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Inequality {
    coeffs: Vec<Rational>,
    rhs: Rational,
    /// Indices of the original inequalities combined into this one.
    history: BTreeSet<usize>,
}

impl Inequality {
    /// Scales so that the first nonzero coefficient has absolute value 1.
    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(Rational::abs) {
            let inv = lead.recip();
            self.coeffs.iter_mut().for_each(|c| *c *= &inv);
            self.rhs *= &inv;
        }
        self
    }
}

/// Drops a row when another with the same coefficients is at least as strong and
/// has a history contained in its own; both kinds of dominance are needed for the
/// history bound to stay valid.
fn prune(rows: Vec<Inequality>) -> Vec<Inequality> {
    let mut groups: BTreeMap<Vec<Rational>, Vec<Inequality>> = BTreeMap::new();
    for q in rows {
        let group = groups.entry(q.coeffs.clone()).or_default();
        if group.iter().any(|k| k.rhs >= q.rhs && k.history.is_subset(&q.history)) {
            continue;
        }
        group.retain(|k| !(q.rhs >= k.rhs && q.history.is_subset(&k.history)));
        group.push(q);
    }
    groups.into_values().flatten().collect()
}

/// Solves each equality for one variable and substitutes it away.
/// Returns `None` when the equalities alone are inconsistent.
fn substitute_equalities(num_vars: usize, equalities: &[Row], inequalities: &[Row]) -> Option<Vec<Row>> {
    let mut eqs: Vec<Row> = equalities.to_vec();
    let mut ineqs: Vec<Row> = inequalities.to_vec();
    let mut i = 0;
    while i < eqs.len() {
        let row = eqs[i].clone();
        let Some(var) = (0..num_vars).find(|&v| !row.coeffs[v].is_zero()) else {
            if !row.rhs.is_zero() {
                return None;
            }
            i += 1;
            continue;
        };
        let pivot = row.coeffs[var].clone();
        let eliminate = |target: &mut Row| {
            if target.coeffs[var].is_zero() {
                return;
            }
            let factor = &target.coeffs[var] / &pivot;
            for (t, r) in target.coeffs.iter_mut().zip(&row.coeffs) {
                *t -= &factor * r;
            }
            target.rhs -= &factor * &row.rhs;
        };
        for (j, other) in eqs.iter_mut().enumerate() {
            if j != i {
                eliminate(other);
            }
        }
        ineqs.iter_mut().for_each(eliminate);
        i += 1;
    }
    Some(ineqs)
}

/// Decides feasibility of `{A_eq x = b_eq, A_ge x >= b_ge}` by eliminating every variable.
pub fn feasible_by_fourier_motzkin(num_vars: usize, equalities: &[Row], inequalities: &[Row]) -> bool {
    let Some(rows) = substitute_equalities(num_vars, equalities, inequalities) else {
        return false;
    };
    let mut system: Vec<Inequality> = prune(
        rows.into_iter()
            .enumerate()
            .map(|(i, r)| Inequality { coeffs: r.coeffs, rhs: r.rhs, history: BTreeSet::from([i]) }.normalized())
            .collect(),
    );
    let mut remaining: BTreeSet<usize> = (0..num_vars).collect();
    let mut eliminated = 0usize;
    while !remaining.is_empty() {
        // Cheapest variable first: fewest generated pairs.
        let var = *remaining
            .iter()
            .min_by_key(|&&v| {
                let pos = system.iter().filter(|q| q.coeffs[v].is_positive()).count();
                let neg = system.iter().filter(|q| q.coeffs[v].is_negative()).count();
                (pos * neg, v)
            })
            .expect("nonempty");
        remaining.remove(&var);
        eliminated += 1;
        let (mut pos, mut neg, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for q in system {
            match q.coeffs[var].signum() {
                1 => pos.push(q),
                -1 => neg.push(q),
                _ => next.push(q),
            }
        }
        for p in &pos {
            for q in &neg {
                let history: BTreeSet<usize> = p.history.union(&q.history).copied().collect();
                // Chernikov: a combination of more than t+1 originals after t steps is redundant.
                if history.len() > eliminated + 1 {
                    continue;
                }
                let (a, b) = (p.coeffs[var].clone(), -&q.coeffs[var]);
                let coeffs = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| &b * x + &a * y).collect();
                let rhs = &b * &p.rhs + &a * &q.rhs;
                next.push(Inequality { coeffs, rhs, history }.normalized());
            }
        }
        system = prune(next);
        if system.iter().any(|q| q.coeffs.iter().all(Zero::is_zero) && q.rhs.is_positive()) {
            return false;
        }
    }
    // Only constant rows 0 >= rhs remain.
    system.iter().all(|q| !q.rhs.is_positive())
}
