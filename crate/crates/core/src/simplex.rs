//! Phase-1 simplex over exact rationals with Bland's rule.
//!
//! Decides feasibility of `{A_eq x = b_eq, A_ge x >= b_ge}` with `x` free and
//! returns a point when one exists.

use num_traits::Zero;

use crate::rational::Rational;

/// A linear constraint `coeffs . x (= or >=) rhs`.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut().filter(|x| !x.is_zero()) {
            *x *= &inv;
        }
        self.rhs[row] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[row]);
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (x, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }
}

/// Returns a feasible `x` or `None` when the system has no solution.
pub fn find_feasible_point(num_vars: usize, equalities: &[Row], inequalities: &[Row]) -> Option<Vec<Rational>> {
    // Columns: free variables, then one surplus per inequality (a.x - s = b).
    let num_surplus = inequalities.len();
    let width = num_vars + num_surplus;
    let mut tab = Tableau { rows: Vec::new(), rhs: Vec::new(), basis: Vec::new() };
    for row in equalities {
        let mut r = row.coeffs.clone();
        r.resize(width, Rational::zero());
        tab.rows.push(r);
        tab.rhs.push(row.rhs.clone());
        tab.basis.push(usize::MAX);
    }
    for (i, row) in inequalities.iter().enumerate() {
        let mut r = row.coeffs.clone();
        r.resize(width, Rational::zero());
        r[num_vars + i] = Rational::from_integer(-1);
        tab.rows.push(r);
        tab.rhs.push(row.rhs.clone());
        tab.basis.push(usize::MAX);
    }

    // Bring every free variable into the basis by Gauss-Jordan steps; its row then
    // only defines that variable and drops out of the sign-constrained problem.
    let mut pinned = vec![false; tab.rows.len()];
    for var in 0..num_vars {
        let choice = (0..tab.rows.len()).find(|&r| !pinned[r] && !tab.rows[r][var].is_zero());
        if let Some(r) = choice {
            tab.pivot(r, var);
            pinned[r] = true;
        }
    }
    let free_rows: Vec<usize> = (0..tab.rows.len()).filter(|&r| pinned[r]).collect();
    let active: Vec<usize> = (0..tab.rows.len()).filter(|&r| !pinned[r]).collect();

    // Sign-constrained subproblem over surplus columns num_vars.. plus artificials.
    let base = num_vars;
    let mut sub_rows: Vec<Vec<Rational>> = Vec::with_capacity(active.len());
    let mut sub_rhs: Vec<Rational> = Vec::with_capacity(active.len());
    let mut sub_basis: Vec<usize> = Vec::with_capacity(active.len());
    let mut artificial_rows = Vec::new();
    for &r in &active {
        let mut coeffs: Vec<Rational> = tab.rows[r][base..].to_vec();
        let mut rhs = tab.rhs[r].clone();
        if rhs.is_negative() {
            coeffs.iter_mut().for_each(|x| *x = -&*x);
            rhs = -rhs;
        }
        // A surplus appearing only in this row with coefficient +1 can start basic.
        let own = (0..num_surplus).find(|&s| {
            coeffs[s] == Rational::from_integer(1)
                && active.iter().all(|&o| o == r || tab.rows[o][base + s].is_zero())
                && !sub_basis.contains(&s)
        });
        match own {
            Some(s) => sub_basis.push(s),
            None => {
                artificial_rows.push(sub_rows.len());
                sub_basis.push(usize::MAX);
            }
        }
        sub_rows.push(coeffs);
        sub_rhs.push(rhs);
    }
    let num_art = artificial_rows.len();
    let sub_width = num_surplus + num_art;
    for row in sub_rows.iter_mut() {
        row.resize(sub_width, Rational::zero());
    }
    for (k, &r) in artificial_rows.iter().enumerate() {
        sub_rows[r][num_surplus + k] = Rational::from_integer(1);
        sub_basis[r] = num_surplus + k;
    }
    let mut sub = Tableau { rows: sub_rows, rhs: sub_rhs, basis: sub_basis };

    // Phase 1 objective: minimize the sum of artificials. Reduced costs for
    // non-artificial columns are minus the column sums over artificial rows.
    let mut cost = vec![Rational::zero(); sub_width];
    let mut objective = Rational::zero();
    for &r in &artificial_rows {
        for (c, x) in cost.iter_mut().zip(&sub.rows[r]).take(num_surplus) {
            *c -= x;
        }
        objective -= &sub.rhs[r];
    }
    // Bland: lowest-index column with negative reduced cost enters.
    while let Some(enter) = (0..sub_width).find(|&c| cost[c].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..sub.rows.len() {
            let a = &sub.rows[r][enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &sub.rhs[r] / a;
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && sub.basis[r] < sub.basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // Phase-1 objective is bounded below by zero, so some row always blocks.
        let (row, _) = leave.expect("phase one is bounded");
        let factor = cost[enter].clone();
        sub.pivot(row, enter);
        for (c, x) in cost.iter_mut().zip(&sub.rows[row]) {
            if !x.is_zero() {
                *c -= &factor * x;
            }
        }
        objective -= &factor * &sub.rhs[row];
    }
    if !objective.is_zero() {
        return None;
    }

    let mut surplus = vec![Rational::zero(); num_surplus];
    for (r, &b) in sub.basis.iter().enumerate() {
        if b < num_surplus {
            surplus[b] = sub.rhs[r].clone();
        }
    }
    let mut x = vec![Rational::zero(); num_vars];
    for &r in &free_rows {
        let var = tab.basis[r];
        let mut value = tab.rhs[r].clone();
        for (s, v) in surplus.iter().enumerate() {
            if !v.is_zero() {
                value -= &tab.rows[r][base + s] * v;
            }
        }
        x[var] = value;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn row(c: &[i64], rhs: i64) -> Row {
        Row { coeffs: c.iter().map(|&v| int(v)).collect(), rhs: int(rhs) }
    }

    fn check(x: &[Rational], eq: &[Row], ge: &[Row]) {
        let dot = |r: &Row| r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<Rational>();
        for r in eq {
            assert_eq!(dot(r), r.rhs);
        }
        for r in ge {
            assert!(dot(r) >= r.rhs);
        }
    }

    #[test]
    fn interval() {
        let ge = [row(&[1], 2), row(&[-1], -5)];
        let x = find_feasible_point(1, &[], &ge).unwrap();
        check(&x, &[], &ge);
        assert!(find_feasible_point(1, &[], &[row(&[1], 3), row(&[-1], -2)]).is_none());
    }

    #[test]
    fn equalities_and_inequalities() {
        let eq = [row(&[1, 1, 0], 4)];
        let ge = [row(&[1, -1, 0], 1), row(&[0, 1, 1], 7), row(&[0, 0, -1], -10)];
        let x = find_feasible_point(3, &eq, &ge).unwrap();
        check(&x, &eq, &ge);
        let bad = [row(&[1, 1, 0], 4), row(&[2, 2, 0], 9)];
        assert!(find_feasible_point(3, &bad, &[]).is_none());
    }

    #[test]
    fn redundant_columns() {
        // Variable 1 never appears.
        let ge = [row(&[1, 0], 1), row(&[2, 0], 3)];
        let x = find_feasible_point(2, &[], &ge).unwrap();
        check(&x, &[], &ge);
    }

    #[test]
    fn degenerate_cycling_prone_system() {
        // Beale-style degenerate rows stay finite under Bland's rule.
        let ge = [
            row(&[-1, 32, 20, -9], 0),
            row(&[-1, 24, 2, -3], 0),
            row(&[0, 0, -1, 0], -1),
            row(&[3, -4, 2, -18], 1),
        ];
        let x = find_feasible_point(4, &[], &ge).unwrap();
        check(&x, &[], &ge);
    }
}
