//! Laplacian-monomial decomposition and the canonical text form.
//!
//! Canonical Gram symbols are rewritten, when possible, as combinations of
//! monomials whose derivatives are integer Laplacian powers on single
//! factors. Candidates are tried in a fixed order (higher powers on earlier
//! kinds first), so the printed form is deterministic.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use num_traits::{One, Signed, Zero};

use super::coeff::{format_coeff, format_rat, real, Coeff, Rat};
use super::gram::{canonicalize, runs, FieldVar, Gram, SymPoly};
use super::poly::{Factor, HamPoly, Monomial, Term};

/// Distributions of `total` Laplacian powers over the sorted `shape`,
/// non-increasing inside each run of identical kinds, in descending
/// lexicographic order.
fn candidates(shape: &[FieldVar], total: u32) -> Vec<Vec<u32>> {
    let rs = runs(shape);
    let mut out = Vec::new();
    fn rec(
        pos: usize,
        left: u32,
        cap: u32,
        run_end: &[usize],
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let n = run_end.len();
        if pos == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // Positions that start a new run have no cap from the previous one.
        let start_of_run = pos == 0 || run_end[pos - 1] != run_end[pos];
        let hi = if start_of_run { left } else { cap.min(left) };
        for v in (0..=hi).rev() {
            cur.push(v);
            rec(pos + 1, left - v, v, run_end, cur, out);
            cur.pop();
        }
    }
    let mut run_end = Vec::with_capacity(shape.len());
    for (s, l) in &rs {
        for _ in 0..*l {
            run_end.push(s + l);
        }
    }
    rec(0, total, total, &run_end, &mut Vec::new(), &mut out);
    out
}

fn candidate_poly(shape: &[FieldVar], laps: &[u32]) -> SymPoly {
    let m = Monomial::new(
        real(Rat::one()),
        0,
        shape
            .iter()
            .zip(laps)
            .map(|(&v, &l)| Factor::new(v, l))
            .collect(),
    );
    let (sign, g) = m.symbol();
    let mut p = SymPoly::new();
    p.insert(g, sign);
    canonicalize(shape, &p).1
}

/// Solves `A x = b` exactly; `A` given by columns. `None` if inconsistent.
fn solve(cols: &[SymPoly], rhs: &BTreeMap<Gram, Rat>) -> Option<Vec<Rat>> {
    let keys: BTreeSet<&Gram> = cols
        .iter()
        .flat_map(|c| c.keys())
        .chain(rhs.keys())
        .collect();
    let keys: Vec<&Gram> = keys.into_iter().collect();
    let nc = cols.len();
    let mut rows: Vec<Vec<Rat>> = keys
        .iter()
        .map(|k| {
            let mut row: Vec<Rat> = cols
                .iter()
                .map(|c| c.get(*k).cloned().unwrap_or_else(Rat::zero))
                .collect();
            row.push(rhs.get(*k).cloned().unwrap_or_else(Rat::zero));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nc {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rat::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in col..=nc {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[nc].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); nc];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][nc].clone();
    }
    Some(x)
}

/// Greedy selection of linearly independent candidate columns: the pivot
/// columns of one exact row reduction, in candidate order.
fn independent(cols: Vec<(Vec<u32>, SymPoly)>) -> Vec<(Vec<u32>, SymPoly)> {
    let cols: Vec<(Vec<u32>, SymPoly)> = cols.into_iter().filter(|(_, p)| !p.is_empty()).collect();
    let keys: Vec<&Gram> = cols
        .iter()
        .flat_map(|(_, p)| p.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rows: Vec<Vec<Rat>> = keys
        .iter()
        .map(|k| {
            cols.iter()
                .map(|(_, p)| p.get(*k).cloned().unwrap_or_else(Rat::zero))
                .collect()
        })
        .collect();
    let mut keep = vec![false; cols.len()];
    let mut r = 0;
    for col in 0..cols.len() {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rat::one() / rows[r][col].clone();
        for v in rows[r][col..].iter_mut() {
            *v *= &inv;
        }
        for i in r + 1..rows.len() {
            if !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in col..cols.len() {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        keep[col] = true;
        r += 1;
    }
    cols.into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

type Basis = Vec<(Vec<u32>, SymPoly)>;

thread_local! {
    static BASIS_CACHE: RefCell<HashMap<(Vec<FieldVar>, u32), Rc<Basis>>> = RefCell::new(HashMap::new());
}

/// Independent Laplacian candidates for a shape and derivative degree.
fn basis(shape: &[FieldVar], deg: u32) -> Rc<Basis> {
    let key = (shape.to_vec(), deg);
    if let Some(hit) = BASIS_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let b = Rc::new(independent(
        candidates(shape, deg)
            .into_iter()
            .map(|laps| {
                let p = candidate_poly(shape, &laps);
                (laps, p)
            })
            .collect(),
    ));
    BASIS_CACHE.with(|c| c.borrow_mut().insert(key, b.clone()));
    b
}

/// Decomposes into Laplacian monomials; terms that need mixed gradients
/// are returned in the remainder.
pub fn to_monomials(h: &HamPoly) -> (Vec<Monomial>, HamPoly) {
    let mut groups: BTreeMap<(u32, Vec<FieldVar>, u32), Vec<(&Term, &Coeff)>> = BTreeMap::new();
    for (t, c) in h.terms() {
        groups
            .entry((t.lambda, t.shape.clone(), t.gram.degree()))
            .or_default()
            .push((t, c));
    }
    let mut monos = Vec::new();
    let mut rest = HamPoly::new();
    for ((lambda, shape, deg), items) in groups {
        let cands = basis(&shape, deg);
        let cols: Vec<SymPoly> = cands.iter().map(|(_, p)| p.clone()).collect();
        let re: BTreeMap<Gram, Rat> = items
            .iter()
            .map(|(t, c)| (t.gram.clone(), c.re.clone()))
            .collect();
        let im: BTreeMap<Gram, Rat> = items
            .iter()
            .map(|(t, c)| (t.gram.clone(), c.im.clone()))
            .collect();
        match (solve(&cols, &re), solve(&cols, &im)) {
            (Some(xr), Some(xi)) if !cols.is_empty() => {
                for ((laps, _), (a, b)) in cands.iter().zip(xr.into_iter().zip(xi)) {
                    let c = Coeff::new(a, b);
                    if !c.is_zero() {
                        let factors = shape
                            .iter()
                            .zip(laps)
                            .map(|(&v, &l)| Factor::new(v, l))
                            .collect();
                        monos.push(Monomial::new(c, lambda, factors));
                    }
                }
            }
            _ => {
                for (t, c) in items {
                    rest.add_term(t.clone(), c.clone());
                }
            }
        }
    }
    (monos, rest)
}

fn format_lambda(d: u32) -> String {
    match d {
        0 => String::new(),
        1 => " λ".to_string(),
        _ => format!(" λ^{d}"),
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut counts: BTreeMap<(FieldVar, u32), usize> = BTreeMap::new();
        for fa in &self.factors {
            *counts.entry((fa.var, fa.lap)).or_insert(0) += 1;
        }
        write!(
            f,
            "{}{} * ∫",
            format_coeff(&self.coeff),
            format_lambda(self.lambda)
        )?;
        for ((v, lap), a) in counts {
            if lap == 0 {
                write!(f, " [{}]^{}", v.symbol(), a)?;
            } else {
                write!(f, " [Δ^{} {}]^{}", lap, v.symbol(), a)?;
            }
        }
        Ok(())
    }
}

/// Gram-form line for terms without a Laplacian decomposition.
fn format_gram_term(t: &Term, c: &Coeff) -> String {
    let mut s = format!("{}{} * ∫", format_coeff(c), format_lambda(t.lambda));
    for (i, v) in t.shape.iter().enumerate() {
        s.push_str(&format!(" {}#{}", v.symbol(), i + 1));
    }
    s.push_str(" ·");
    for &((i, j), e) in &t.gram.0 {
        s.push_str(&format!(" g({},{})^{}", i + 1, j + 1, e));
    }
    s
}

impl fmt::Display for HamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (monos, rest) = to_monomials(self);
        let mut lines: Vec<String> = monos.iter().map(|m| m.to_string()).collect();
        lines.extend(rest.terms().map(|(t, c)| format_gram_term(t, c)));
        write!(f, "{}", lines.join("\n"))
    }
}

/// Rational with an explicit sign, for compact summaries.
pub fn signed_rat(r: &Rat) -> String {
    if r.is_negative() {
        format!("-{}", format_rat(&r.abs()))
    } else {
        format_rat(r)
    }
}
