//! Field kinds and Gram-polynomial symbols.
//!
//! A term `∫ m(∂_1, …, ∂_n) f_1 ⋯ f_n dx` is stored through its Fourier
//! symbol, written as a polynomial in the Gram entries `g_ij = ξ_i·ξ_j` of
//! the factor wavevectors. `g_ii` stands for `-Δ` on factor `i` and `g_ij`
//! for `-∇_i·∇_j`. Integration by parts is the constraint `Σ ξ_i = 0`; the
//! canonical form eliminates the last factor's wavevector and symmetrizes
//! over permutations of identical factors, which makes it unique for the
//! dimension-free algebra.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::coeff::{rat_int, Rat};

/// One field variable: component 1 (`ψ`) or 2 (`φ`), optionally conjugated.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FieldVar {
    pub comp: u8,
    pub conj: bool,
}

pub const PSI: FieldVar = FieldVar {
    comp: 1,
    conj: false,
};
pub const PSI_BAR: FieldVar = FieldVar {
    comp: 1,
    conj: true,
};
pub const PHI: FieldVar = FieldVar {
    comp: 2,
    conj: false,
};
pub const PHI_BAR: FieldVar = FieldVar {
    comp: 2,
    conj: true,
};

impl FieldVar {
    /// Gauge grade: `ψ: +1, ψ̄: -1, φ: -1, φ̄: +1`.
    pub fn grade(self) -> i64 {
        let g = if self.conj { -1 } else { 1 };
        if self.comp == 1 {
            g
        } else {
            -g
        }
    }

    /// Sign of the symplectic form on this component.
    pub fn sigma(self) -> i64 {
        if self.comp == 1 {
            1
        } else {
            -1
        }
    }

    pub fn conjugate(self) -> FieldVar {
        FieldVar {
            comp: self.comp,
            conj: !self.conj,
        }
    }

    /// Dense index `0..4` in the order `ψ, ψ̄, φ, φ̄`.
    pub fn index(self) -> usize {
        2 * (self.comp as usize - 1) + self.conj as usize
    }

    pub fn from_index(i: usize) -> FieldVar {
        FieldVar {
            comp: (i / 2 + 1) as u8,
            conj: i % 2 == 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match (self.comp, self.conj) {
            (1, false) => "ψ",
            (1, true) => "ψ̄",
            (_, false) => "φ",
            (_, true) => "φ̄",
        }
    }
}

/// Monomial in Gram entries: sorted `((i, j), exponent)` with `i <= j`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Gram(pub Vec<((u8, u8), u32)>);

pub type SymPoly = BTreeMap<Gram, Rat>;

impl Gram {
    pub fn one() -> Self {
        Gram(Vec::new())
    }

    pub fn entry(i: u8, j: u8) -> Self {
        Gram(vec![((i.min(j), i.max(j)), 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree in Gram entries (half the derivative order).
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Gram) -> Gram {
        let mut m: BTreeMap<(u8, u8), u32> = self.0.iter().cloned().collect();
        for &(k, e) in &other.0 {
            *m.entry(k).or_insert(0) += e;
        }
        Gram(m.into_iter().collect())
    }

    /// Renames positions through `map[old] = new`.
    pub fn relabel(&self, map: &[u8]) -> Gram {
        let mut m: BTreeMap<(u8, u8), u32> = BTreeMap::new();
        for &((i, j), e) in &self.0 {
            let (a, b) = (map[i as usize], map[j as usize]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += e;
        }
        Gram(m.into_iter().collect())
    }

    pub fn mentions(&self, p: u8) -> bool {
        self.0.iter().any(|&((i, j), _)| i == p || j == p)
    }
}

pub fn poly_one() -> SymPoly {
    let mut p = SymPoly::new();
    p.insert(Gram::one(), Rat::one());
    p
}

pub fn poly_add_scaled(acc: &mut SymPoly, p: &SymPoly, s: &Rat) {
    for (g, c) in p {
        let e = acc.entry(g.clone()).or_insert_with(Rat::zero);
        *e += c * s;
        if e.is_zero() {
            acc.remove(g);
        }
    }
}

pub fn poly_mul(a: &SymPoly, b: &SymPoly) -> SymPoly {
    let mut out = SymPoly::new();
    for (ga, ca) in a {
        for (gb, cb) in b {
            let g = ga.mul(gb);
            let e = out.entry(g.clone()).or_insert_with(Rat::zero);
            *e += ca * cb;
            if e.is_zero() {
                out.remove(&g);
            }
        }
    }
    out
}

fn poly_pow(p: &SymPoly, e: u32) -> SymPoly {
    let mut out = poly_one();
    for _ in 0..e {
        out = poly_mul(&out, p);
    }
    out
}

pub fn poly_relabel(p: &SymPoly, map: &[u8]) -> SymPoly {
    let mut out = SymPoly::new();
    for (g, c) in p {
        let r = g.relabel(map);
        let e = out.entry(r.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            out.remove(&r);
        }
    }
    out
}

/// Substitutes `ξ_p = -Σ_{m≠p} ξ_m` among `n` positions, then closes the gap
/// so that positions above `p` move down by one.
pub fn eliminate(g: &Gram, p: u8, n: u8) -> SymPoly {
    let others: Vec<u8> = (0..n).filter(|&m| m != p).collect();
    let mut out = poly_one();
    for &((i, j), e) in &g.0 {
        let factor: SymPoly = if i != p && j != p {
            let mut f = SymPoly::new();
            f.insert(Gram::entry(i, j), Rat::one());
            f
        } else if i == p && j == p {
            let mut f = SymPoly::new();
            for (a, &m) in others.iter().enumerate() {
                f.insert(Gram::entry(m, m), Rat::one());
                for &m2 in &others[a + 1..] {
                    f.insert(Gram::entry(m, m2), rat_int(2));
                }
            }
            f
        } else {
            let k = if i == p { j } else { i };
            let mut f = SymPoly::new();
            for &m in &others {
                f.insert(Gram::entry(m, k), -Rat::one());
            }
            f
        };
        out = poly_mul(&out, &poly_pow(&factor, e));
        if out.is_empty() {
            return out;
        }
    }
    let map: Vec<u8> = (0..n).map(|q| if q > p { q - 1 } else { q }).collect();
    poly_relabel(&out, &map)
}

/// Runs of identical kinds in a sorted shape, as `(start, len)`.
pub fn runs(shape: &[FieldVar]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=shape.len() {
        if i == shape.len() || shape[i] != shape[start] {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

fn permutations(len: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                rec(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; len], &mut out);
    out
}

/// All position maps that permute within runs of identical kinds.
pub fn symmetry_group(shape: &[FieldVar]) -> Vec<Vec<u8>> {
    let rs = runs(shape);
    let mut group: Vec<Vec<u8>> = vec![(0..shape.len() as u8).collect()];
    for (start, len) in rs {
        if len < 2 {
            continue;
        }
        let perms = permutations(len);
        let mut next = Vec::with_capacity(group.len() * perms.len());
        for g in &group {
            for p in &perms {
                let mut h = g.clone();
                for (k, &pk) in p.iter().enumerate() {
                    h[start + k] = g[start + pk];
                }
                next.push(h);
            }
        }
        group = next;
    }
    group
}

type CacheKey = (Vec<FieldVar>, Gram);

thread_local! {
    static CANON_CACHE: RefCell<HashMap<CacheKey, SymPoly>> = RefCell::new(HashMap::new());
}

fn canonical_mono(shape: &[FieldVar], g: &Gram) -> SymPoly {
    if g.is_one() {
        return poly_one();
    }
    let key = (shape.to_vec(), g.clone());
    if let Some(hit) = CANON_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let n = shape.len() as u8;
    let group = symmetry_group(shape);
    let mut acc = SymPoly::new();
    let one = Rat::one();
    for map in &group {
        let r = g.relabel(map);
        let red = eliminate(&r, n - 1, n);
        poly_add_scaled(&mut acc, &red, &one);
    }
    let inv = Rat::one() / rat_int(group.len() as i64);
    for v in acc.values_mut() {
        *v *= &inv;
    }
    acc.retain(|_, v| !v.is_zero());
    CANON_CACHE.with(|c| c.borrow_mut().insert(key, acc.clone()));
    acc
}

/// Sorts factors by kind and reduces the symbol to canonical form.
pub fn canonicalize(shape: &[FieldVar], poly: &SymPoly) -> (Vec<FieldVar>, SymPoly) {
    let mut order: Vec<usize> = (0..shape.len()).collect();
    order.sort_by_key(|&i| shape[i]);
    let sorted: Vec<FieldVar> = order.iter().map(|&i| shape[i]).collect();
    let mut map = vec![0u8; shape.len()];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new as u8;
    }
    let mut out = SymPoly::new();
    for (g, c) in poly {
        let r = g.relabel(&map);
        let canon = canonical_mono(&sorted, &r);
        poly_add_scaled(&mut out, &canon, c);
    }
    (sorted, out)
}
