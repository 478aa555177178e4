//! Exact rational linear programming.
//!
//! Two-phase dense tableau simplex with Bland's rule, plus Fourier-Motzkin
//! elimination as an independent feasibility check for small problems.

use num_traits::{One, Signed, Zero};

use crate::linalg::{nullspace, Functional, Vector};
use crate::scalar::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarDomain {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn holds(&self, point: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Feasible(p) => Some(p),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Optimum {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    domains: Vec<VarDomain>,
    constraints: Vec<Constraint>,
}

impl LpProblem {
    /// All variables non-negative.
    pub fn new(num_vars: usize) -> Self {
        LpProblem { domains: vec![VarDomain::NonNegative; num_vars], constraints: Vec::new() }
    }

    /// All variables free.
    pub fn free(num_vars: usize) -> Self {
        LpProblem { domains: vec![VarDomain::Free; num_vars], constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_domain(&mut self, var: usize, domain: VarDomain) {
        self.domains[var] = domain;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Whether `point` satisfies every constraint and domain exactly.
    pub fn check(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars()
            && self
                .domains
                .iter()
                .zip(point)
                .all(|(d, x)| *d == VarDomain::Free || !x.is_negative())
            && self.constraints.iter().all(|c| c.holds(point))
    }

    pub fn solve(&self) -> LpOutcome {
        match self.run(None) {
            Optimum::Optimal { point, .. } => LpOutcome::Feasible(point),
            Optimum::Unbounded => unreachable!("feasibility has no objective"),
            Optimum::Infeasible => LpOutcome::Infeasible,
        }
    }

    pub fn maximize(&self, objective: &[Rational]) -> Optimum {
        assert_eq!(objective.len(), self.num_vars(), "objective width");
        self.run(Some(objective))
    }

    fn run(&self, objective: Option<&[Rational]>) -> Optimum {
        let n = self.num_vars();
        // Column layout: one column per non-negative variable, two per free one.
        let mut columns: Vec<(usize, bool)> = Vec::new();
        for (i, d) in self.domains.iter().enumerate() {
            columns.push((i, true));
            if *d == VarDomain::Free {
                columns.push((i, false));
            }
        }
        let structural = columns.len();
        let m = self.constraints.len();

        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut kinds: Vec<Relation> = Vec::with_capacity(m);
        let mut rhs: Vec<Rational> = Vec::with_capacity(m);
        for c in &self.constraints {
            let mut row: Vec<Rational> = columns
                .iter()
                .map(|&(v, pos)| if pos { c.coeffs[v].clone() } else { -c.coeffs[v].clone() })
                .collect();
            let mut b = c.rhs.clone();
            let mut rel = c.relation;
            if b.is_negative() {
                row.iter_mut().for_each(|a| *a = -a.clone());
                b = -b;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push(row);
            kinds.push(rel);
            rhs.push(b);
        }

        let slacks = kinds.iter().filter(|k| **k != Relation::Eq).count();
        let artificials = kinds.iter().filter(|k| **k != Relation::Le).count();
        let width = structural + slacks + artificials;
        let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = structural;
        let mut next_art = structural + slacks;
        for (r, row) in rows.into_iter().enumerate() {
            let mut full = row;
            full.resize(width + 1, Rational::zero());
            match kinds[r] {
                Relation::Le => {
                    full[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    full[next_slack] = -Rational::one();
                    next_slack += 1;
                    full[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    full[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            full[width] = rhs[r].clone();
            tab.push(full);
        }

        let art_start = structural + slacks;
        if artificials > 0 {
            let mut cost = vec![Rational::zero(); width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -Rational::one();
            }
            let allowed = vec![true; width];
            let bounded = simplex(&mut tab, &mut basis, &cost, &allowed);
            debug_assert!(bounded);
            let value: Rational = basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= art_start)
                .map(|(r, _)| tab[r][width].clone())
                .sum();
            if !value.is_zero() {
                return Optimum::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut r = 0;
            while r < tab.len() {
                if basis[r] >= art_start {
                    if let Some(j) = (0..art_start).find(|&j| !tab[r][j].is_zero()) {
                        pivot(&mut tab, r, j);
                        basis[r] = j;
                    } else {
                        tab.remove(r);
                        basis.remove(r);
                        continue;
                    }
                }
                r += 1;
            }
        }

        let mut allowed = vec![true; width];
        for a in allowed.iter_mut().skip(art_start) {
            *a = false;
        }
        let mut value = Rational::zero();
        if let Some(obj) = objective {
            let mut cost = vec![Rational::zero(); width];
            for (k, &(v, pos)) in columns.iter().enumerate() {
                cost[k] = if pos { obj[v].clone() } else { -obj[v].clone() };
            }
            if !simplex(&mut tab, &mut basis, &cost, &allowed) {
                return Optimum::Unbounded;
            }
            value = basis
                .iter()
                .enumerate()
                .map(|(r, &b)| cost[b].clone() * tab[r][width].clone())
                .sum();
        }

        let mut column_values = vec![Rational::zero(); width];
        for (r, &b) in basis.iter().enumerate() {
            column_values[b] = tab[r][width].clone();
        }
        let mut point = vec![Rational::zero(); n];
        for (k, &(v, pos)) in columns.iter().enumerate() {
            if pos {
                point[v] += &column_values[k];
            } else {
                point[v] -= &column_values[k];
            }
        }
        debug_assert!(self.check(&point));
        Optimum::Optimal { point, value }
    }

    /// Decides feasibility by eliminating every variable. Exponential in the
    /// worst case; intended for problems with a handful of variables.
    pub fn fourier_motzkin_feasible(&self) -> bool {
        let n = self.num_vars();
        // Everything as `a . x <= b`.
        let mut system: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for c in &self.constraints {
            let neg: Vec<Rational> = c.coeffs.iter().map(|a| -a.clone()).collect();
            match c.relation {
                Relation::Le => system.push((c.coeffs.clone(), c.rhs.clone())),
                Relation::Ge => system.push((neg, -c.rhs.clone())),
                Relation::Eq => {
                    system.push((c.coeffs.clone(), c.rhs.clone()));
                    system.push((neg, -c.rhs.clone()));
                }
            }
        }
        for (i, d) in self.domains.iter().enumerate() {
            if *d == VarDomain::NonNegative {
                let mut row = vec![Rational::zero(); n];
                row[i] = -Rational::one();
                system.push((row, Rational::zero()));
            }
        }
        for var in 0..n {
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for (row, b) in system {
                if row[var].is_positive() {
                    pos.push((row, b));
                } else if row[var].is_negative() {
                    neg.push((row, b));
                } else {
                    rest.push((row, b));
                }
            }
            for (p, pb) in &pos {
                for (q, qb) in &neg {
                    let sp = -q[var].clone();
                    let sq = p[var].clone();
                    let row: Vec<Rational> =
                        p.iter().zip(q).map(|(a, c)| a * &sp + c * &sq).collect();
                    let b = pb * &sp + qb * &sq;
                    rest.push(normalise_row(row, b));
                }
            }
            rest.sort();
            rest.dedup();
            system = rest;
        }
        system.iter().all(|(_, b)| !b.is_negative())
    }
}

fn normalise_row(row: Vec<Rational>, b: Rational) -> (Vec<Rational>, Rational) {
    let scale = row
        .iter()
        .chain(std::iter::once(&b))
        .map(|a| a.abs())
        .fold(Rational::zero(), |acc, a| if a > acc { a } else { acc });
    if scale.is_zero() {
        return (row, b);
    }
    (row.into_iter().map(|a| a / &scale).collect(), b / scale)
}

fn pivot(tab: &mut [Vec<Rational>], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for a in tab[r].iter_mut() {
        *a /= &p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let factor = row[c].clone();
        for (a, b) in row.iter_mut().zip(&pivot_row) {
            if !b.is_zero() {
                *a -= b * &factor;
            }
        }
    }
}

/// Maximises `cost . x` over the current tableau. Returns false when unbounded.
fn simplex(tab: &mut [Vec<Rational>], basis: &mut [usize], cost: &[Rational], allowed: &[bool]) -> bool {
    let width = cost.len();
    loop {
        let entering = (0..width).find(|&j| {
            if !allowed[j] || basis.contains(&j) {
                return false;
            }
            let mut reduced = cost[j].clone();
            for (r, &b) in basis.iter().enumerate() {
                if !cost[b].is_zero() && !tab[r][j].is_zero() {
                    reduced -= &cost[b] * &tab[r][j];
                }
            }
            reduced.is_positive()
        });
        let Some(j) = entering else { return true };
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..tab.len() {
            if !tab[r][j].is_positive() {
                continue;
            }
            let ratio = &tab[r][width] / &tab[r][j];
            let better = match &leave {
                None => true,
                Some((lr, lv)) => ratio < *lv || (ratio == *lv && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let Some((r, _)) = leave else { return false };
        pivot(tab, r, j);
        basis[r] = j;
    }
}

/// A non-zero point of `{y : ge_i(y) >= 0, eq_j(y) = 0}`, if the cone is not `{0}`.
///
/// If the defining functionals share a non-trivial kernel, a kernel vector is
/// returned. Otherwise any non-zero member has some `ge_i(y) > 0`, so the
/// search branches on which inequality is scaled to equal one.
pub fn find_nonzero_in_cone(
    ge: &[Functional],
    eq: &[Functional],
    dim: usize,
) -> Option<Vector> {
    let all: Vec<Vec<Rational>> = ge.iter().chain(eq).map(|f| f.coeffs().to_vec()).collect();
    if all.is_empty() {
        return (dim > 0).then(|| Vector::basis(dim, 0));
    }
    if let Some(v) = nullspace(&all, dim).into_iter().next() {
        return Some(v.primitive());
    }
    for (i, forced) in ge.iter().enumerate() {
        let mut lp = LpProblem::free(dim);
        lp.add(forced.coeffs().to_vec(), Relation::Eq, Rational::one());
        for (k, f) in ge.iter().enumerate() {
            if k != i {
                lp.add(f.coeffs().to_vec(), Relation::Ge, Rational::zero());
            }
        }
        for f in eq {
            lp.add(f.coeffs().to_vec(), Relation::Eq, Rational::zero());
        }
        if let LpOutcome::Feasible(p) = lp.solve() {
            return Some(Vector::new(p).primitive());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| int(a)).collect()
    }

    #[test]
    fn feasible_point_satisfies_constraints() {
        let mut lp = LpProblem::new(2);
        lp.add(ints(&[1, 1]), Relation::Eq, int(1));
        lp.add(ints(&[1, -1]), Relation::Ge, rat(1, 3));
        let out = lp.solve();
        assert!(lp.check(out.point().unwrap()));
        assert!(lp.fourier_motzkin_feasible());
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = LpProblem::new(2);
        lp.add(ints(&[1, 1]), Relation::Le, int(1));
        lp.add(ints(&[1, 1]), Relation::Ge, int(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        assert!(!lp.fourier_motzkin_feasible());
    }

    #[test]
    fn free_variables_can_go_negative() {
        let mut lp = LpProblem::free(1);
        lp.add(ints(&[1]), Relation::Eq, int(-5));
        assert_eq!(lp.solve(), LpOutcome::Feasible(ints(&[-5])));
    }

    #[test]
    fn maximize_finds_vertex() {
        let mut lp = LpProblem::new(2);
        lp.add(ints(&[1, 2]), Relation::Le, int(4));
        lp.add(ints(&[3, 1]), Relation::Le, int(6));
        match lp.maximize(&ints(&[1, 1])) {
            Optimum::Optimal { value, .. } => assert_eq!(value, rat(14, 5)),
            other => panic!("{other:?}"),
        }
        let mut open = LpProblem::new(1);
        open.add(ints(&[1]), Relation::Ge, int(0));
        assert_eq!(open.maximize(&ints(&[1])), Optimum::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LpProblem::new(3);
        lp.add(ints(&[1, 1, 1]), Relation::Eq, int(1));
        lp.add(ints(&[2, 2, 2]), Relation::Eq, int(2));
        lp.add(ints(&[1, -1, 0]), Relation::Eq, int(0));
        assert!(lp.check(lp.solve().point().unwrap()));
    }

    #[test]
    fn pointed_cone_search() {
        let f1 = Functional::new(ints(&[1, 0]));
        let f2 = Functional::new(ints(&[0, 1]));
        // Quadrant: non-trivial.
        let y = find_nonzero_in_cone(&[f1.clone(), f2.clone()], &[], 2).unwrap();
        assert!(f1.apply(&y) >= int(0) && f2.apply(&y) >= int(0) && !y.is_zero());
        // y1 >= 0, -y1 >= 0, y2 = 0 is {0}.
        assert_eq!(find_nonzero_in_cone(&[f1.clone(), f1.neg()], &[f2.clone()], 2), None);
    }
}
