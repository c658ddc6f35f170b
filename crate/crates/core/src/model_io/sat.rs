//! Satisfiability backend.
//!
//! [`SatBackend`] is the interface the enumerator drives. [`CdclSolver`] is
//! the bundled implementation: conflict-driven clause learning with two
//! watched literals, first-UIP learning and non-chronological backjumping.
//! Its branching order and phases are drawn from a seeded RNG, so which
//! solutions it finds first is reproducible per seed but varies across seeds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A clause-accumulating satisfiability solver.
pub trait SatBackend {
    /// Adds a clause of nonzero DIMACS literals.
    fn add_clause(&mut self, lits: &[i32]);
    /// Returns a satisfying assignment (index `v - 1` holds variable `v`), or
    /// `None` if the accumulated clauses are unsatisfiable.
    fn solve(&mut self) -> Option<Vec<bool>>;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Lit(u32);

impl Lit {
    fn from_dimacs(l: i32) -> Self {
        let v = l.unsigned_abs() - 1;
        Lit(2 * v + u32::from(l < 0))
    }
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }
    fn negative(self) -> bool {
        self.0 & 1 == 1
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

pub struct CdclSolver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    unsat: bool,
    order: Vec<usize>,
    order_pos: Vec<usize>,
    next_pos: usize,
    seen: Vec<bool>,
    rng: ChaCha8Rng,
    conflicts: u64,
}

impl CdclSolver {
    pub fn new(num_vars: usize, seed: u64) -> Self {
        Self {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![None; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            unsat: false,
            order: (0..num_vars).collect(),
            order_pos: (0..num_vars).collect(),
            next_pos: 0,
            seen: vec![false; num_vars],
            rng: ChaCha8Rng::seed_from_u64(seed),
            conflicts: 0,
        }
    }

    /// Total conflicts seen across all `solve` calls.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    fn value(&self, lit: Lit) -> Value {
        match self.assigns[lit.var()] {
            None => Value::Unassigned,
            Some(b) => {
                if b != lit.negative() {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<usize>) {
        let v = lit.var();
        self.assigns[v] = Some(!lit.negative());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn backtrack(&mut self, to_level: usize) {
        if self.decision_level() <= to_level {
            return;
        }
        let lim = self.trail_lim[to_level];
        for i in (lim..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.assigns[v] = None;
            self.reason[v] = None;
            self.next_pos = self.next_pos.min(self.order_pos[v]);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(to_level);
        self.qhead = lim;
    }

    fn attach(&mut self, lits: Vec<Lit>) -> usize {
        let cref = self.clauses.len();
        self.watches[lits[0].idx()].push(cref);
        self.watches[lits[1].idx()].push(cref);
        self.clauses.push(lits);
        cref
    }

    /// Unit propagation; returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                {
                    let c = &mut self.clauses[cref];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref][0];
                if self.value(first) == Value::True {
                    kept.push(cref);
                    continue;
                }
                let len = self.clauses[cref].len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref][k];
                    if self.value(lk) != Value::False {
                        self.clauses[cref].swap(1, k);
                        self.watches[lk.idx()].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(cref);
                if self.value(first) == Value::False {
                    conflict = Some(cref);
                    kept.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(cref));
            }
            self.watches[false_lit.idx()] = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let current = self.decision_level();
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let skip = usize::from(p.is_some());
            for j in skip..self.clauses[confl].len() {
                let q = self.clauses[confl][j];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            self.seen[pl.var()] = false;
            path -= 1;
            p = Some(pl);
            if path == 0 {
                learnt[0] = !pl;
                break;
            }
            confl = self.reason[pl.var()].expect("implied literal has a reason");
        }
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var()];
        }
        (learnt, back)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while self.next_pos < self.num_vars {
            let v = self.order[self.next_pos];
            if self.assigns[v].is_none() {
                let negative = self.rng.gen_bool(0.5);
                return Some(Lit(2 * v as u32 + u32::from(negative)));
            }
            self.next_pos += 1;
        }
        None
    }

    fn reshuffle(&mut self) {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for (pos, &v) in order.iter().enumerate() {
            self.order_pos[v] = pos;
        }
        self.order = order;
        self.next_pos = 0;
    }
}

impl SatBackend for CdclSolver {
    fn add_clause(&mut self, lits: &[i32]) {
        if self.unsat {
            return;
        }
        self.backtrack(0);
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            let lit = Lit::from_dimacs(l);
            match self.value(lit) {
                Value::True => return,
                Value::False => {}
                Value::Unassigned => {
                    if clause.contains(&!lit) {
                        return;
                    }
                    if !clause.contains(&lit) {
                        clause.push(lit);
                    }
                }
            }
        }
        match clause.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(clause[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                self.attach(clause);
            }
        }
    }

    fn solve(&mut self) -> Option<Vec<bool>> {
        if self.unsat {
            return None;
        }
        self.backtrack(0);
        self.reshuffle();
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return None;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt);
                    self.enqueue(first, Some(cref));
                }
            } else {
                match self.pick_branch() {
                    None => {
                        let model = self
                            .assigns
                            .iter()
                            .map(|a| a.expect("complete assignment"))
                            .collect();
                        self.backtrack(0);
                        return Some(model);
                    }
                    Some(lit) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, None);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_sat(n: usize, clauses: &[Vec<i32>]) -> bool {
        (0..1u32 << n).any(|m| {
            clauses.iter().all(|c| {
                c.iter()
                    .any(|&l| ((m >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))
            })
        })
    }

    fn satisfies(bits: &[bool], clauses: &[Vec<i32>]) -> bool {
        clauses
            .iter()
            .all(|c| c.iter().any(|&l| bits[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    #[test]
    fn trivial_cases() {
        let mut s = CdclSolver::new(2, 0);
        s.add_clause(&[1]);
        s.add_clause(&[-1]);
        assert!(s.solve().is_none());

        let mut s = CdclSolver::new(3, 0);
        s.add_clause(&[1, -2]);
        s.add_clause(&[2, 3]);
        let m = s.solve().unwrap();
        assert!(satisfies(&m, &[vec![1, -2], vec![2, 3]]));
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h) = var 2*i + h + 1, pigeons i in 0..3, holes h in 0..2
        let var = |i: i32, h: i32| 2 * i + h + 1;
        let mut s = CdclSolver::new(6, 3);
        for i in 0..3 {
            s.add_clause(&[var(i, 0), var(i, 1)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[-var(i, h), -var(j, h)]);
                }
            }
        }
        assert!(s.solve().is_none());
    }

    #[test]
    fn agrees_with_brute_force_on_random_3sat() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..300 {
            let n = rng.gen_range(3..=10);
            let m = rng.gen_range(1..=5 * n);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = CdclSolver::new(n, round);
            for c in &clauses {
                s.add_clause(c);
            }
            let got = s.solve();
            assert_eq!(got.is_some(), brute_force_sat(n, &clauses), "round {round}");
            if let Some(bits) = got {
                assert!(satisfies(&bits, &clauses));
            }
        }
    }

    #[test]
    fn blocking_clauses_enumerate_every_solution() {
        let clauses = vec![vec![1, 2, 3], vec![-1, -2]];
        let expected = (0..8u32)
            .filter(|mask| {
                let bits: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                satisfies(&bits, &clauses)
            })
            .count();
        let mut s = CdclSolver::new(3, 5);
        for c in &clauses {
            s.add_clause(c);
        }
        let mut found = Vec::new();
        while let Some(bits) = s.solve() {
            assert!(satisfies(&bits, &clauses));
            assert!(!found.contains(&bits));
            let block: Vec<i32> = bits
                .iter()
                .enumerate()
                .map(|(i, &b)| if b { -(i as i32 + 1) } else { i as i32 + 1 })
                .collect();
            s.add_clause(&block);
            found.push(bits);
        }
        assert_eq!(found.len(), expected);
    }
}
