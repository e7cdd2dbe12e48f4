//! Brute-force reference implementations on plain `Vec<usize>` images.
//! Deliberately naive and independent of the library's own algorithms.

#![allow(dead_code)]

use permtest::{PermTuple, Permutation, Rational};

pub type P = Vec<usize>;

pub fn inverse(p: &[usize]) -> P {
    let mut q = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        q[j] = i;
    }
    q
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_perms(n: usize) -> Vec<P> {
    fn rec(prefix: &mut P, used: &mut Vec<bool>, out: &mut Vec<P>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All `k`-tuples over `Sym(n)`.
pub fn all_tuples(k: usize, n: usize) -> Vec<Vec<P>> {
    let perms = all_perms(n);
    let mut out: Vec<Vec<P>> = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                perms.iter().map(move |p| {
                    let mut t = t.clone();
                    t.push(p.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Letters act right to left; `x` is generator 0, `y` is 1, and so on in
/// "xyzw..."; uppercase is the inverse; `1` is skipped.
pub fn eval_point(word: &str, tuple: &[P], x: usize) -> usize {
    const NAMES: &str = "xyzwabcdefghijklmnopqrstuv";
    let mut p = x;
    for c in word.chars().rev() {
        if c == '1' {
            continue;
        }
        let i = NAMES.find(c.to_ascii_lowercase()).expect("known letter");
        p = if c.is_ascii_uppercase() {
            inverse(&tuple[i])[p]
        } else {
            tuple[i][p]
        };
    }
    p
}

pub fn eval_perm(word: &str, tuple: &[P]) -> P {
    let n = tuple[0].len();
    (0..n).map(|x| eval_point(word, tuple, x)).collect()
}

pub fn defect(relators: &[&str], tuple: &[P]) -> Rational {
    let n = tuple[0].len();
    let fails: usize = relators
        .iter()
        .map(|w| (0..n).filter(|&x| eval_point(w, tuple, x) != x).count())
        .sum();
    Rational::new(fails as i64, (relators.len() * n) as i64)
}

pub fn is_solution(relators: &[&str], tuple: &[P]) -> bool {
    defect(relators, tuple) == Rational::from_integer(0)
}

pub fn solutions(relators: &[&str], k: usize, n: usize) -> Vec<Vec<P>> {
    all_tuples(k, n)
        .into_iter()
        .filter(|t| is_solution(relators, t))
        .collect()
}

pub fn hamming(a: &[usize], b: &[usize]) -> Rational {
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Rational::new(diff as i64, a.len() as i64)
}

/// `min over Sol(n)` of the summed coordinate Hamming distance.
pub fn dist_to_solutions(relators: &[&str], tuple: &[P]) -> Rational {
    let n = tuple[0].len();
    solutions(relators, tuple.len(), n)
        .iter()
        .map(|s| s.iter().zip(tuple).map(|(a, b)| hamming(a, b)).sum::<Rational>())
        .min()
        .expect("identity is a solution")
}

/// Whether some bijection conjugates `x` onto `y` coordinatewise.
pub fn isomorphic(x: &[P], y: &[P]) -> bool {
    let n = x[0].len();
    if y[0].len() != n || x.len() != y.len() {
        return false;
    }
    all_perms(n).iter().any(|f| {
        x.iter()
            .zip(y)
            .all(|(sx, sy)| (0..n).all(|v| f[sx[v]] == sy[f[v]]))
    })
}

pub fn to_tuple(t: &[P]) -> PermTuple {
    PermTuple::new(
        t.iter()
            .map(|p| Permutation::from_images(p.clone()).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn from_tuple(t: &PermTuple) -> Vec<P> {
    t.perms().iter().map(|p| p.images().to_vec()).collect()
}
