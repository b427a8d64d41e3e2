//! Independent reference arithmetic and brute force for integration tests.
//!
//! Nothing here touches the library's tables, DSL or search: rings are
//! rebuilt from closed formulas and equations are plain closures.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// A ring given by formulas on the same index encoding as the library.
pub enum Naive {
    Zn(usize),
    /// `F_p[x]/(m)` with monic `m`, constant term first.
    Quot {
        p: usize,
        m: Vec<usize>,
    },
    UT2(usize),
}

impl Naive {
    pub fn gf(p: usize, m: &[usize]) -> Self {
        Naive::Quot { p, m: m.to_vec() }
    }

    pub fn poly_quot(p: usize, k: usize) -> Self {
        let mut m = vec![0; k + 1];
        m[k] = 1;
        Naive::Quot { p, m }
    }

    pub fn size(&self) -> usize {
        match self {
            Naive::Zn(n) => *n,
            Naive::Quot { p, m } => p.pow(m.len() as u32 - 1),
            Naive::UT2(p) => p * p * p,
        }
    }

    fn digits(p: usize, k: usize, mut e: usize) -> Vec<usize> {
        (0..k)
            .map(|_| {
                let d = e % p;
                e /= p;
                d
            })
            .collect()
    }

    fn undigits(p: usize, d: &[usize]) -> usize {
        d.iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        match self {
            Naive::Zn(n) => (a + b) % n,
            Naive::Quot { p, m } => {
                let k = m.len() - 1;
                let (x, y) = (Self::digits(*p, k, a), Self::digits(*p, k, b));
                let s: Vec<usize> = x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect();
                Self::undigits(*p, &s)
            }
            Naive::UT2(p) => {
                let (x, y) = (Self::digits(*p, 3, a), Self::digits(*p, 3, b));
                let s: Vec<usize> = x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect();
                Self::undigits(*p, &s)
            }
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match self {
            Naive::Zn(n) => a * b % n,
            Naive::Quot { p, m } => {
                let p = *p;
                let k = m.len() - 1;
                let (x, y) = (Self::digits(p, k, a), Self::digits(p, k, b));
                let mut prod = vec![0; 2 * k];
                for i in 0..k {
                    for j in 0..k {
                        prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
                    }
                }
                // x^k = -(m_0 + .. + m_{k-1} x^{k-1})
                for deg in (k..2 * k).rev() {
                    let c = prod[deg];
                    prod[deg] = 0;
                    for (i, &mi) in m[..k].iter().enumerate() {
                        prod[deg - k + i] = (prod[deg - k + i] + c * (p - mi % p)) % p;
                    }
                }
                Self::undigits(p, &prod[..k])
            }
            Naive::UT2(p) => {
                let p = *p;
                // digits are (c, b, a) for [[a, b], [0, c]]
                let (x, y) = (Self::digits(p, 3, a), Self::digits(p, 3, b));
                let (a1, b1, c1) = (x[2], x[1], x[0]);
                let (a2, b2, c2) = (y[2], y[1], y[0]);
                Self::undigits(p, &[c1 * c2 % p, (a1 * b2 + b1 * c2) % p, a1 * a2 % p])
            }
        }
    }

    pub fn one(&self) -> usize {
        match self {
            Naive::Zn(n) => 1 % n,
            Naive::Quot { .. } => 1,
            Naive::UT2(p) => p * p + 1,
        }
    }

    pub fn neg(&self, a: usize) -> usize {
        (0..self.size()).find(|&b| self.add(a, b) == 0).unwrap()
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn int(&self, n: i64) -> usize {
        let mut acc = 0;
        for _ in 0..n.unsigned_abs() {
            acc = self.add(acc, self.one());
        }
        if n < 0 {
            self.neg(acc)
        } else {
            acc
        }
    }
}

/// All functions `0..n -> 0..n` as value vectors, lexicographic.
pub fn all_functions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

pub fn holds_everywhere(n: usize, pred: impl Fn(usize, usize) -> bool) -> bool {
    (0..n).all(|x| (0..n).all(|y| pred(x, y)))
}

pub fn multiplicative(r: &Naive, f: &[usize]) -> bool {
    holds_everywhere(r.size(), |x, y| f[r.mul(x, y)] == r.mul(f[x], f[y]))
}

pub fn additive(r: &Naive, f: &[usize]) -> bool {
    holds_everywhere(r.size(), |x, y| f[r.add(x, y)] == r.add(f[x], f[y]))
}

pub fn leibniz(r: &Naive, f: &[usize]) -> bool {
    holds_everywhere(r.size(), |x, y| f[r.mul(x, y)] == r.add(r.mul(f[x], y), r.mul(x, f[y])))
}

/// Solutions of `h(xy) = h(x)y + xh(y) + eps h(x)h(y)` among all maps.
pub fn sofy_solutions(r: &Naive, eps: usize) -> BTreeSet<Vec<usize>> {
    all_functions(r.size())
        .into_iter()
        .filter(|h| {
            holds_everywhere(r.size(), |x, y| {
                let rhs = r.add(r.add(r.mul(h[x], y), r.mul(x, h[y])), r.mul(eps, r.mul(h[x], h[y])));
                h[r.mul(x, y)] == rhs
            })
        })
        .collect()
}

/// Solutions of `λ(f(xy) − f(x)y − xf(y)) + μ(f(xy) − f(x)f(y)) = 0`.
pub fn alien_solutions(r: &Naive, lambda: usize, mu: usize) -> BTreeSet<Vec<usize>> {
    all_functions(r.size())
        .into_iter()
        .filter(|f| {
            holds_everywhere(r.size(), |x, y| {
                let fxy = f[r.mul(x, y)];
                let a = r.sub(r.sub(fxy, r.mul(f[x], y)), r.mul(x, f[y]));
                let b = r.sub(fxy, r.mul(f[x], f[y]));
                r.add(r.mul(lambda, a), r.mul(mu, b)) == 0
            })
        })
        .collect()
}

/// Triples `(f, h, k)` with `f(xy) = h(x)h(y) + xk(y) + k(x)y`.
pub fn pexider_solutions(r: &Naive) -> BTreeSet<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let n = r.size();
    let maps = all_functions(n);
    let mut out = BTreeSet::new();
    for h in &maps {
        for k in &maps {
            // f is forced at y = 1
            let f: Vec<usize> = (0..n)
                .map(|x| r.add(r.add(r.mul(h[x], h[r.one()]), r.mul(x, k[r.one()])), r.mul(k[x], r.one())))
                .collect();
            let ok = holds_everywhere(n, |x, y| {
                let rhs = r.add(r.add(r.mul(h[x], h[y]), r.mul(x, k[y])), r.mul(k[x], y));
                f[r.mul(x, y)] == rhs
            });
            if ok {
                out.insert((f, h.clone(), k.clone()));
            }
        }
    }
    out
}

/// Rank of the rows over `F_p` by elimination with `%` arithmetic.
pub fn rank_mod_p(rows: &[Vec<usize>], p: usize) -> usize {
    let mut m: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|v| v % p).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = (1..p).find(|&b| m[rank][c] * b % p == 1).unwrap();
        for v in m[rank].iter_mut() {
            *v = *v * inv % p;
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let factor = row[c];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = (*v + p * p - factor * pv % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}
