//! Indexing helpers for sequences over a finite alphabet.
//!
//! A sequence `u = (u_0, .., u_{n-1})` over an alphabet of size `q` is
//! identified with the integer whose base-`q` digits are `u` with `u_0`
//! most significant, so integer order is lexicographic order.

use crate::error::{check_cap, Result};

/// `q^n` as `u128`, saturating.
pub fn pow(q: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(q as u128);
    }
    acc
}

pub fn index_to_vec(mut index: usize, q: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    out
}

pub fn vec_to_index(u: &[usize], q: usize) -> usize {
    u.iter().fold(0, |acc, &s| acc * q + s)
}

/// All of `[q]^n` in lexicographic order. Fails if `q^n > cap`.
pub fn all_sequences(q: usize, n: usize, cap: u128) -> Result<Vec<Vec<usize>>> {
    let total = pow(q, n);
    check_cap("sequence space", total, cap)?;
    Ok((0..total as usize).map(|i| index_to_vec(i, q, n)).collect())
}

/// Odometer step over a mixed-radix counter; returns false after the last value.
pub fn advance(counter: &mut [usize], radix: &[usize]) -> bool {
    for pos in (0..counter.len()).rev() {
        counter[pos] += 1;
        if counter[pos] < radix[pos] {
            return true;
        }
        counter[pos] = 0;
    }
    false
}

/// All compositions of `n` into `parts` nonnegative parts, in lexicographic order.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for head in 0..=rest {
            prefix.push(head);
            rec(rest - head, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Multinomial coefficient `n! / prod(c_i!)` as f64 (exact below 2^53).
pub fn multinomial(counts: &[usize]) -> f64 {
    let mut acc = 1.0f64;
    let mut seen = 0usize;
    for &c in counts {
        for k in 1..=c {
            seen += 1;
            acc = acc * seen as f64 / k as f64;
        }
    }
    acc.round()
}
