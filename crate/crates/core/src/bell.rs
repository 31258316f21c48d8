//! Partition multi-indices and complete exponential Bell polynomials.
//!
//! For `1 ≤ k ≤ n` the multi-index set `J(n, k)` contains the tuples
//! `j = (j_1, …, j_{n-k+1})` of non-negative integers with `Σ j_l = k` and
//! `Σ l·j_l = n`; each tuple describes a partition type of an `n`-set into `k`
//! blocks (`j_l` blocks of size `l`). The complete exponential Bell polynomial
//!
//! ```text
//! B_n(x_1, …, x_n) = Σ_k Σ_{j ∈ J(n,k)} n!/j! · Π_l (x_l / l!)^{j_l}
//! ```
//!
//! is kept both as a list of integer-coefficient monomials (used for tensor
//! contractions, where each `x_l` is a vector argument of a multilinear form)
//! and as a plain numeric evaluator.

use crate::{Error, Result};

/// Largest supported order. `12! < 2^63`, so every coefficient fits in `u64`.
pub const MAX_ORDER: usize = 12;

/// One element of `J(n, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<u32>,
    n: usize,
    k: usize,
}

impl MultiIndex {
    /// `j_l` for `l = 1, …, n - k + 1` (stored 0-based). Empty for the
    /// constant term of `B_0`.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Number of blocks, i.e. the degree of the monomial.
    pub fn parts(&self) -> usize {
        self.k
    }

    /// Multiplicity of blocks of size `l` (1-based); zero outside the stored range.
    pub fn multiplicity(&self, l: usize) -> u32 {
        if l == 0 {
            return 0;
        }
        self.entries.get(l - 1).copied().unwrap_or(0)
    }

    /// `j! = j_1! j_2! ⋯`.
    pub fn factorial(&self) -> u64 {
        self.entries.iter().map(|&j| factorial(j as usize)).product()
    }

    /// `n! / (j! Π_l (l!)^{j_l})`: the number of set partitions of this type.
    pub fn coefficient(&self) -> u64 {
        let denom: u64 = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, &j)| factorial(j as usize) * factorial(idx + 1).pow(j))
            .product();
        factorial(self.n) / denom
    }

    /// Block sizes in non-decreasing order, one entry per block.
    ///
    /// This is the argument list of the multilinear form the monomial is
    /// turned into: `x_1^2 x_3` becomes `(1, 1, 3)`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k);
        for (idx, &j) in self.entries.iter().enumerate() {
            out.extend(std::iter::repeat(idx + 1).take(j as usize));
        }
        out
    }
}

/// A monomial `c · Π_l x_l^{j_l}` of `B_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellMonomial {
    pub coefficient: u64,
    pub index: MultiIndex,
}

impl BellMonomial {
    /// Evaluates the monomial at scalar arguments `xs[l-1] = x_l`.
    pub fn eval(&self, xs: &[f64]) -> f64 {
        let mut term = self.coefficient as f64;
        for (idx, &j) in self.index.entries.iter().enumerate() {
            if j > 0 {
                term *= xs[idx].powi(j as i32);
            }
        }
        term
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Enumerates `J(n, k)` in lexicographic order of the entry tuples.
pub fn enumerate_multi_indices(n: usize, k: usize) -> Result<Vec<MultiIndex>> {
    if k < 1 || k > n {
        return Err(Error::InvalidRange(format!(
            "multi-index set needs 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    if n > MAX_ORDER {
        return Err(Error::InvalidRange(format!(
            "order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let len = n - k + 1;
    let mut out = Vec::new();
    let mut current = vec![0u32; len];
    fill(0, k, n, &mut current, &mut out, n, k);
    Ok(out)
}

fn fill(
    pos: usize,
    parts_left: usize,
    weight_left: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
    n: usize,
    k: usize,
) {
    if pos == current.len() {
        if parts_left == 0 && weight_left == 0 {
            out.push(MultiIndex {
                entries: current.clone(),
                n,
                k,
            });
        }
        return;
    }
    let size = pos + 1;
    let max_j = parts_left.min(weight_left / size);
    for j in 0..=max_j {
        current[pos] = j as u32;
        fill(pos + 1, parts_left - j, weight_left - j * size, current, out, n, k);
    }
    current[pos] = 0;
}

/// Monomials of `B_n`, ordered by number of parts `k` ascending and then
/// lexicographically within each `J(n, k)`. `B_0` is the constant `1`.
pub fn bell_monomials(n: usize) -> Result<Vec<BellMonomial>> {
    if n > MAX_ORDER {
        return Err(Error::InvalidRange(format!(
            "order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if n == 0 {
        return Ok(vec![BellMonomial {
            coefficient: 1,
            index: MultiIndex {
                entries: Vec::new(),
                n: 0,
                k: 0,
            },
        }]);
    }
    let mut out = Vec::new();
    for k in 1..=n {
        for index in enumerate_multi_indices(n, k)? {
            out.push(BellMonomial {
                coefficient: index.coefficient(),
                index,
            });
        }
    }
    Ok(out)
}

/// Numeric value of `B_n(x_1, …, x_n)`.
pub fn bell_value(n: usize, xs: &[f64]) -> Result<f64> {
    if xs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: xs.len(),
        });
    }
    Ok(bell_monomials(n)?.iter().map(|m| m.eval(xs)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every tuple with entries in 0..=k, filtered by the two constraints.
    fn brute_force_indices(n: usize, k: usize) -> Vec<Vec<u32>> {
        let len = n - k + 1;
        let mut out = Vec::new();
        let total = (k + 1).pow(len as u32);
        for code in 0..total {
            let mut c = code;
            let mut t = vec![0u32; len];
            for slot in t.iter_mut().rev() {
                *slot = (c % (k + 1)) as u32;
                c /= k + 1;
            }
            let parts: usize = t.iter().map(|&j| j as usize).sum();
            let weight: usize = t.iter().enumerate().map(|(i, &j)| (i + 1) * j as usize).sum();
            if parts == k && weight == n {
                out.push(t);
            }
        }
        out.sort();
        out
    }

    /// Restricted growth strings: each one is a distinct set partition.
    fn set_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for b in 0..=max + 1 {
                if i == 0 && b > 0 {
                    break;
                }
                cur.push(b);
                rec(i + 1, n, if i == 0 { 0 } else { max.max(b) }, cur, out);
                cur.pop();
            }
        }
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        rec(0, n, 0, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn multi_indices_match_brute_force() {
        for n in 1..=8 {
            for k in 1..=n {
                let got: Vec<Vec<u32>> = enumerate_multi_indices(n, k)
                    .unwrap()
                    .into_iter()
                    .map(|m| m.entries().to_vec())
                    .collect();
                assert_eq!(got, brute_force_indices(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn multi_index_examples() {
        let e = |n, k| -> Vec<Vec<u32>> {
            enumerate_multi_indices(n, k)
                .unwrap()
                .into_iter()
                .map(|m| m.entries().to_vec())
                .collect()
        };
        assert_eq!(e(4, 2), vec![vec![0, 2, 0], vec![1, 0, 1]]);
        assert_eq!(e(3, 3), vec![vec![3]]);
        assert_eq!(e(5, 1), vec![vec![0, 0, 0, 0, 1]]);
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert!(matches!(enumerate_multi_indices(3, 0), Err(Error::InvalidRange(_))));
        assert!(matches!(enumerate_multi_indices(3, 4), Err(Error::InvalidRange(_))));
        assert!(bell_monomials(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn low_order_monomials() {
        let coeffs = |n| -> Vec<(Vec<u32>, u64)> {
            bell_monomials(n)
                .unwrap()
                .into_iter()
                .map(|m| (m.index.entries().to_vec(), m.coefficient))
                .collect()
        };
        assert_eq!(coeffs(0), vec![(vec![], 1)]);
        // B_3 = x3 + 3 x1 x2 + x1^3
        assert_eq!(
            coeffs(3),
            vec![(vec![0, 0, 1], 1), (vec![1, 1], 3), (vec![3], 1)]
        );
        // B_4 = x4 + 4 x1 x3 + 3 x2^2 + 6 x1^2 x2 + x1^4
        assert_eq!(
            coeffs(4),
            vec![
                (vec![0, 0, 0, 1], 1),
                (vec![0, 2, 0], 3),
                (vec![1, 0, 1], 4),
                (vec![2, 1], 6),
                (vec![4], 1),
            ]
        );
    }

    #[test]
    fn b5_coefficients() {
        let mut c: Vec<u64> = bell_monomials(5).unwrap().iter().map(|m| m.coefficient).collect();
        c.sort();
        assert_eq!(c, vec![1, 1, 5, 10, 10, 10, 15]);
    }

    #[test]
    fn bell_value_examples() {
        assert_eq!(bell_value(2, &[3.0, 4.0]).unwrap(), 13.0);
        assert_eq!(bell_value(1, &[7.0]).unwrap(), 7.0);
        assert_eq!(bell_value(0, &[]).unwrap(), 1.0);
        assert_eq!(bell_value(5, &[1.0; 5]).unwrap(), set_partitions(5).len() as f64);
        assert!(matches!(
            bell_value(3, &[1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn bell_numbers_match_set_partition_count() {
        for n in 0..=10 {
            let ones = vec![1.0; n];
            assert_eq!(bell_value(n, &ones).unwrap(), set_partitions(n).len() as f64, "n={n}");
        }
    }

    #[test]
    fn b4_partition_type_counts() {
        // group the 15 set partitions of a 4-set by block-size multiset
        let mut counts = std::collections::BTreeMap::<Vec<usize>, u64>::new();
        for p in set_partitions(4) {
            let blocks = p.iter().max().unwrap() + 1;
            let mut sizes: Vec<usize> = (0..blocks).map(|b| p.iter().filter(|&&x| x == b).count()).collect();
            sizes.sort();
            *counts.entry(sizes).or_default() += 1;
        }
        for m in bell_monomials(4).unwrap() {
            assert_eq!(counts[&m.index.block_sizes()], m.coefficient);
        }
        let by_monomial: Vec<u64> = vec![
            counts[&vec![1, 1, 1, 1]],
            counts[&vec![1, 1, 2]],
            counts[&vec![1, 3]],
            counts[&vec![2, 2]],
            counts[&vec![4]],
        ];
        assert_eq!(by_monomial, vec![1, 6, 4, 3, 1]);
    }

    #[test]
    fn recurrence_agrees_with_monomials() {
        // B_{n+1} = Σ_i C(n,i) B_{n-i} x_{i+1}, an independent evaluation route
        let xs = [0.3, -1.2, 0.7, 1.9, -0.4, 0.25, -1.7, 0.9];
        let mut b = vec![1.0];
        for n in 0..xs.len() {
            let next: f64 = (0..=n).map(|i| binomial(n, i) as f64 * b[n - i] * xs[i]).sum();
            b.push(next);
        }
        for n in 0..=xs.len() {
            let v = bell_value(n, &xs[..n]).unwrap();
            assert!((v - b[n]).abs() <= 1e-12 * (1.0 + b[n].abs()), "n={n}: {v} vs {}", b[n]);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(3, 4), 0);
    }

    proptest! {
        #[test]
        fn constraint_sums_hold(n in 1usize..=MAX_ORDER, kk in 0usize..MAX_ORDER) {
            let k = 1 + kk % n;
            for m in enumerate_multi_indices(n, k).unwrap() {
                let parts: usize = m.entries().iter().map(|&j| j as usize).sum();
                let weight: usize = m.entries().iter().enumerate().map(|(i, &j)| (i + 1) * j as usize).sum();
                prop_assert_eq!(parts, k);
                prop_assert_eq!(weight, n);
                prop_assert_eq!(m.entries().len(), n - k + 1);
            }
        }

        #[test]
        fn value_equals_monomial_evaluation(n in 0usize..=8, seed in proptest::collection::vec(-2.0f64..2.0, 8)) {
            let xs = &seed[..n];
            let mut direct = 0.0;
            for m in bell_monomials(n).unwrap() {
                let mut t = m.coefficient as f64;
                for (i, &j) in m.index.entries().iter().enumerate() {
                    if j > 0 {
                        t *= xs[i].powi(j as i32);
                    }
                }
                direct += t;
            }
            prop_assert_eq!(bell_value(n, xs).unwrap(), direct);
        }
    }
}
