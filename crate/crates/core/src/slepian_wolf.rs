//! Syndrome-based Slepian-Wolf coding for `k` correlated sources.
//!
//! Source `j` is encoded as `A_j x_j`. Decoders search the product of the
//! cosets exhaustively; candidates are visited in lexicographic order of the
//! concatenated tuple and the first best score wins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};
use crate::gf::{solve_affine, CosetSpec, FieldMatrix};
use crate::mc::{trial_rng, Estimate};
use crate::seq;
use crate::types::{type_divergence, type_log_prob, Distribution};

/// Default bound on the number of candidates a decoder may visit.
pub const DEFAULT_SEARCH_CAP: u128 = 1 << 20;

/// Largest syndrome space for which Monte Carlo precomputes every decode.
const DECODE_TABLE_CAP: u128 = 1 << 16;

/// Per-source matrices and the joint source law.
#[derive(Clone, Debug, PartialEq)]
pub struct SwCode {
    matrices: Vec<FieldMatrix>,
    law: Distribution,
    n: usize,
}

impl SwCode {
    /// Source `j` has alphabet `law.sizes()[j]`, embedded in GF(q_j) by index.
    pub fn new(matrices: Vec<FieldMatrix>, law: Distribution) -> Result<Self> {
        if matrices.is_empty() || matrices.len() != law.arity() {
            return Err(Error::Dimension(format!(
                "{} matrices for a law on {} sources",
                matrices.len(),
                law.arity()
            )));
        }
        let n = matrices[0].cols();
        if matrices.iter().any(|a| a.cols() != n) {
            return Err(Error::Dimension("matrices disagree on the block length".into()));
        }
        for (j, (a, &s)) in matrices.iter().zip(law.sizes()).enumerate() {
            if s > a.q() {
                return Err(Error::Dimension(format!("source {j} has {s} symbols but GF({})", a.q())));
            }
        }
        Ok(Self { matrices, law, n })
    }

    pub fn matrices(&self) -> &[FieldMatrix] {
        &self.matrices
    }

    pub fn law(&self) -> &Distribution {
        &self.law
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    /// `R_j = log2 |Im A_j| / n`.
    pub fn rates(&self) -> Vec<f64> {
        self.matrices.iter().map(|a| a.rank() as f64 * (a.q() as f64).log2() / self.n as f64).collect()
    }
}

/// Encodes each source with its own matrix.
pub fn sw_encode(code: &SwCode, x: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    if x.len() != code.k() {
        return Err(Error::Dimension(format!("{} sources for a {}-source code", x.len(), code.k())));
    }
    code.matrices.iter().zip(x).map(|(a, xj)| a.matvec(xj)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwDecoder {
    /// Minimum joint empirical divergence.
    MinDivergence,
    /// Maximum probability among candidates whose every component is typical.
    TypicalMl { gamma: f64 },
    /// Maximum probability with no typicality restriction.
    Ml,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeOutcome {
    /// `all_infinite` marks a winner chosen only by the tie rule because
    /// every candidate scored `+inf`.
    Decoded { tuple: Vec<Vec<usize>>, all_infinite: bool },
    Failure,
}

impl DecodeOutcome {
    pub fn tuple(&self) -> Option<&[Vec<usize>]> {
        match self {
            DecodeOutcome::Decoded { tuple, .. } => Some(tuple),
            DecodeOutcome::Failure => None,
        }
    }
}

/// Exhaustive search over `Π_j C_{A_j}(a_j)` restricted to the alphabets.
///
/// `score` maps the joint type of a candidate (laid out over
/// `sizes`) to a value to minimize; `admit` filters candidates. Candidates
/// with a symbol outside its alphabet score `+inf`.
pub fn coset_product_search(
    matrices: &[FieldMatrix],
    syndromes: &[Vec<usize>],
    sizes: &[usize],
    cap: u128,
    mut score: impl FnMut(&[usize]) -> f64,
    mut admit: impl FnMut(&[usize]) -> bool,
) -> Result<DecodeOutcome> {
    if matrices.len() != syndromes.len() || matrices.len() != sizes.len() {
        return Err(Error::Dimension("matrices, syndromes and alphabets must align".into()));
    }
    let mut cosets = Vec::with_capacity(matrices.len());
    for (a, s) in matrices.iter().zip(syndromes) {
        cosets.push(solve_affine(&CosetSpec::new(a.clone(), s.clone())?));
    }
    let total = cosets.iter().fold(1u128, |acc, c| acc.saturating_mul(c.size()));
    check_cap("coset product", total, cap)?;
    if total == 0 {
        return Ok(DecodeOutcome::Failure);
    }
    let n = matrices[0].cols();
    let cells: usize = sizes.iter().product();
    let mut strides = vec![1; sizes.len()];
    for j in (0..sizes.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * sizes[j + 1];
    }
    // Per component: members, and for in-alphabet members the per-position
    // contribution to the joint cell index.
    let members: Vec<Vec<Vec<usize>>> = cosets.iter().map(|c| c.to_vec()).collect();
    let contrib: Vec<Vec<Option<Vec<usize>>>> = members
        .iter()
        .enumerate()
        .map(|(j, ms)| {
            ms.iter()
                .map(|m| {
                    if m.iter().all(|&x| x < sizes[j]) {
                        Some(m.iter().map(|&x| x * strides[j]).collect())
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let radix: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut pick = vec![0; members.len()];
    let mut counts = vec![0usize; cells];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut first_admitted: Option<Vec<usize>> = None;
    loop {
        let parts: Option<Vec<&Vec<usize>>> = pick.iter().enumerate().map(|(j, &i)| contrib[j][i].as_ref()).collect();
        let s = match parts {
            Some(parts) => {
                counts.iter_mut().for_each(|c| *c = 0);
                for pos in 0..n {
                    counts[parts.iter().map(|p| p[pos]).sum::<usize>()] += 1;
                }
                if admit(&counts) {
                    Some(score(&counts))
                } else {
                    None
                }
            }
            None => Some(f64::INFINITY),
        };
        if let Some(s) = s {
            if first_admitted.is_none() {
                first_admitted = Some(pick.clone());
            }
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, pick.clone()));
            }
        }
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    let assemble = |pick: &[usize]| pick.iter().enumerate().map(|(j, &i)| members[j][i].clone()).collect();
    Ok(match best {
        None => DecodeOutcome::Failure,
        Some((s, _)) if s == f64::INFINITY => DecodeOutcome::Decoded {
            tuple: assemble(first_admitted.as_ref().expect("some candidate admitted")),
            all_infinite: true,
        },
        Some((_, p)) => DecodeOutcome::Decoded { tuple: assemble(&p), all_infinite: false },
    })
}

/// Decodes a syndrome tuple with the chosen rule.
pub fn sw_decode(code: &SwCode, syndromes: &[Vec<usize>], decoder: SwDecoder, cap: u128) -> Result<DecodeOutcome> {
    if syndromes.len() != code.k() {
        return Err(Error::Dimension(format!("{} syndromes for a {}-source code", syndromes.len(), code.k())));
    }
    let mu = code.law.probs();
    let sizes = code.law.sizes();
    match decoder {
        SwDecoder::MinDivergence => {
            coset_product_search(&code.matrices, syndromes, sizes, cap, |t| type_divergence(t, mu), |_| true)
        }
        SwDecoder::Ml => coset_product_search(&code.matrices, syndromes, sizes, cap, |t| -type_log_prob(t, mu), |_| true),
        SwDecoder::TypicalMl { gamma } => {
            let marginals: Vec<Distribution> =
                (0..code.k()).map(|j| code.law.marginal(&[j])).collect::<Result<_>>()?;
            let strides: Vec<usize> = (0..sizes.len()).map(|j| sizes[j + 1..].iter().product()).collect();
            let admit = |t: &[usize]| {
                marginals.iter().enumerate().all(|(j, m)| {
                    let mut c = vec![0; sizes[j]];
                    for (cell, &cnt) in t.iter().enumerate() {
                        c[cell / strides[j] % sizes[j]] += cnt;
                    }
                    type_divergence(&c, m.probs()) < gamma
                })
            };
            let out = coset_product_search(&code.matrices, syndromes, sizes, cap, |t| -type_log_prob(t, mu), admit)?;
            // A typical-but-impossible winner is still a valid argmax; only
            // an empty restricted set is a failure.
            Ok(out)
        }
    }
}

pub fn sw_decode_md(code: &SwCode, syndromes: &[Vec<usize>]) -> Result<DecodeOutcome> {
    sw_decode(code, syndromes, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP)
}

pub fn sw_decode_ml_typical(code: &SwCode, syndromes: &[Vec<usize>], gamma: f64) -> Result<DecodeOutcome> {
    sw_decode(code, syndromes, SwDecoder::TypicalMl { gamma }, DEFAULT_SEARCH_CAP)
}

/// `μ^n(x_K)` for a tuple of sequences.
pub fn sequence_prob(law: &Distribution, x: &[Vec<usize>]) -> f64 {
    let n = x.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let t: Vec<usize> = x.iter().map(|xj| xj[i]).collect();
            if t.iter().zip(law.sizes()).any(|(&a, &s)| a >= s) {
                0.0
            } else {
                law.prob(&t)
            }
        })
        .product()
}

fn syndrome_space(code: &SwCode) -> Vec<Vec<Vec<usize>>> {
    code.matrices.iter().map(FieldMatrix::image_vectors).collect()
}

/// Exact decoding error probability.
///
/// Each source tuple has exactly one syndrome tuple, so the success mass is
/// the sum over reachable syndrome tuples of `μ^n(decode(s))`.
pub fn sw_error_exact(code: &SwCode, decoder: SwDecoder, cap: u128) -> Result<f64> {
    let images = syndrome_space(code);
    let total = images.iter().fold(1u128, |acc, im| acc.saturating_mul(im.len() as u128));
    check_cap("syndrome tuples", total, cap)?;
    let radix: Vec<usize> = images.iter().map(Vec::len).collect();
    let mut pick = vec![0; images.len()];
    let mut success = 0.0;
    loop {
        let s: Vec<Vec<usize>> = pick.iter().zip(&images).map(|(&i, im)| im[i].clone()).collect();
        if let DecodeOutcome::Decoded { tuple, .. } = sw_decode(code, &s, decoder, cap)? {
            success += sequence_prob(&code.law, &tuple);
        }
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    Ok((1.0 - success).max(0.0))
}

/// Monte Carlo estimate of the decoding error with a Wilson interval.
///
/// Trial `i` draws its source from stream `i` of the master seed, so the
/// estimate does not depend on the worker count.
pub fn sw_error_mc(code: &SwCode, decoder: SwDecoder, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let sampler = code.law.sampler();
    let table = decode_table(code, decoder)?;
    let q: Vec<usize> = code.matrices.iter().map(FieldMatrix::q).collect();
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let mut rng = trial_rng(seed, trial);
            let mut x = vec![vec![0; code.n]; code.k()];
            for i in 0..code.n {
                for (j, s) in sampler.sample(&mut rng).into_iter().enumerate() {
                    x[j][i] = s;
                }
            }
            let syn: Vec<Vec<usize>> = code.matrices.iter().zip(&x).map(|(a, xj)| a.apply(xj)).collect();
            let decoded = match &table {
                Some(t) => t[syndrome_key(&syn, &code.matrices, &q)].clone(),
                None => sw_decode(code, &syn, decoder, DEFAULT_SEARCH_CAP)?,
            };
            Ok(u64::from(decoded.tuple() != Some(x.as_slice())))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(Estimate::from_counts(errors, trials))
}

fn syndrome_key(syn: &[Vec<usize>], matrices: &[FieldMatrix], q: &[usize]) -> usize {
    let mut key = 0;
    for ((s, a), &qj) in syn.iter().zip(matrices).zip(q) {
        key = key * seq::pow(qj, a.rows()) as usize + seq::vec_to_index(s, qj);
    }
    key
}

fn decode_table(code: &SwCode, decoder: SwDecoder) -> Result<Option<Vec<DecodeOutcome>>> {
    let space = code.matrices.iter().fold(1u128, |acc, a| acc.saturating_mul(seq::pow(a.q(), a.rows())));
    if space > DECODE_TABLE_CAP {
        return Ok(None);
    }
    let q: Vec<usize> = code.matrices.iter().map(FieldMatrix::q).collect();
    let mut table = vec![DecodeOutcome::Failure; space as usize];
    let images = syndrome_space(code);
    let radix: Vec<usize> = images.iter().map(Vec::len).collect();
    let mut pick = vec![0; images.len()];
    loop {
        let s: Vec<Vec<usize>> = pick.iter().zip(&images).map(|(&i, im)| im[i].clone()).collect();
        table[syndrome_key(&s, &code.matrices, &q)] = sw_decode(code, &s, decoder, DEFAULT_SEARCH_CAP)?;
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    Ok(Some(table))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConstraint {
    /// Sources in `J`.
    pub subset: Vec<usize>,
    pub rate_sum: f64,
    /// `H(X_J | X_{J^c})`.
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub inside: bool,
    pub constraints: Vec<RateConstraint>,
}

impl RateCheck {
    pub fn failing(&self) -> impl Iterator<Item = &RateConstraint> {
        self.constraints.iter().filter(|c| !c.satisfied)
    }
}

/// Strict test `Σ_{j∈J} R_j > H(X_J | X_{J^c})` for every nonempty `J`.
pub fn sw_rate_check(rates: &[f64], law: &Distribution) -> Result<RateCheck> {
    let k = law.arity();
    if rates.len() != k {
        return Err(Error::Dimension(format!("{} rates for {k} sources", rates.len())));
    }
    let h_all = law.entropy();
    let mut constraints = Vec::with_capacity((1 << k) - 1);
    for mask in 1usize..(1 << k) {
        let subset: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let rest: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 0).collect();
        let h_rest = if rest.is_empty() { 0.0 } else { law.marginal(&rest)?.entropy() };
        let bound = h_all - h_rest;
        let rate_sum: f64 = subset.iter().map(|&j| rates[j]).sum();
        constraints.push(RateConstraint { subset, rate_sum, bound, slack: rate_sum - bound, satisfied: rate_sum > bound });
    }
    Ok(RateCheck { inside: constraints.iter().all(|c| c.satisfied), constraints })
}

/// Doubly symmetric binary source with the given crossover.
pub fn dsbs(crossover: f64) -> Result<Distribution> {
    let p = crossover / 2.0;
    let s = (1.0 - crossover) / 2.0;
    Distribution::new(vec![2, 2], vec![s, p, p, s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::generate_sparse;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(q: usize, d: &[Vec<usize>]) -> FieldMatrix {
        FieldMatrix::from_dense(q, d).unwrap()
    }

    fn two_point() -> Distribution {
        Distribution::new(vec![2, 2], vec![0.45, 0.05, 0.05, 0.45]).unwrap()
    }

    #[test]
    fn encode_examples() {
        let code = SwCode::new(vec![FieldMatrix::identity(2, 3).unwrap()], Distribution::uniform(vec![2]).unwrap()).unwrap();
        assert_eq!(sw_encode(&code, &[vec![1, 0, 1]]).unwrap(), vec![vec![1, 0, 1]]);
        let code = SwCode::new(vec![m(2, &[vec![1, 1]])], Distribution::uniform(vec![2]).unwrap()).unwrap();
        assert_eq!(sw_encode(&code, &[vec![0, 1]]).unwrap(), vec![vec![1]]);
        let law = Distribution::uniform(vec![2, 2, 2]).unwrap();
        let a = m(2, &[vec![1, 0]]);
        let code = SwCode::new(vec![a.clone(), a.clone(), a], law).unwrap();
        let s = sw_encode(&code, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(s, vec![vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn code_validation() {
        let law = Distribution::uniform(vec![3]).unwrap();
        assert!(SwCode::new(vec![FieldMatrix::identity(2, 2).unwrap()], law).is_err());
        let law = Distribution::uniform(vec![2, 2]).unwrap();
        assert!(SwCode::new(vec![FieldMatrix::identity(2, 2).unwrap()], law.clone()).is_err());
        let ragged = vec![FieldMatrix::identity(2, 2).unwrap(), FieldMatrix::identity(2, 3).unwrap()];
        assert!(SwCode::new(ragged, law).is_err());
    }

    #[test]
    fn md_decoder_examples() {
        let id = FieldMatrix::identity(2, 2).unwrap();
        let code = SwCode::new(vec![id.clone(), id.clone()], two_point()).unwrap();
        let out = sw_decode_md(&code, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(out.tuple().unwrap(), &[vec![1, 0], vec![0, 1]]);

        let code = SwCode::new(vec![m(2, &[vec![1, 1]]), id.clone()], two_point()).unwrap();
        let s = sw_encode(&code, &[vec![0, 1], vec![0, 1]]).unwrap();
        let out = sw_decode_md(&code, &s).unwrap();
        assert_eq!(out.tuple().unwrap(), &[vec![0, 1], vec![0, 1]]);
        let typ = sw_decode_ml_typical(&code, &s, 1.0).unwrap();
        assert_eq!(typ, out);

        let flat = SwCode::new(vec![m(2, &[vec![1, 1]]), id], Distribution::uniform(vec![2, 2]).unwrap()).unwrap();
        let out = sw_decode_md(&flat, &[vec![1], vec![1, 1]]).unwrap();
        assert_eq!(out.tuple().unwrap(), &[vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn typical_ml_fails_at_zero_radius() {
        let code = SwCode::new(vec![m(2, &[vec![1, 1]]), FieldMatrix::identity(2, 2).unwrap()], two_point()).unwrap();
        let out = sw_decode_ml_typical(&code, &[vec![1], vec![0, 1]], 0.0).unwrap();
        assert_eq!(out, DecodeOutcome::Failure);
    }

    #[test]
    fn ml_picks_most_probable() {
        let law = Distribution::new(vec![2], vec![0.8, 0.2]).unwrap();
        let code = SwCode::new(vec![m(2, &[vec![1, 1, 1]])], law).unwrap();
        let out = sw_decode(&code, &[vec![1]], SwDecoder::Ml, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(out.tuple().unwrap(), &[vec![0, 0, 1]]);
        let big = sw_decode(&code, &[vec![1]], SwDecoder::TypicalMl { gamma: 100.0 }, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(big, out);
    }

    #[test]
    fn all_infinite_candidates_are_flagged() {
        let law = Distribution::new(vec![2], vec![1.0, 0.0]).unwrap();
        let code = SwCode::new(vec![m(2, &[vec![1, 1]])], law).unwrap();
        let out = sw_decode_md(&code, &[vec![1]]).unwrap();
        assert_eq!(out, DecodeOutcome::Decoded { tuple: vec![vec![0, 1]], all_infinite: true });
    }

    #[test]
    fn out_of_alphabet_candidates_never_win() {
        // ternary field, binary source
        let law = Distribution::new(vec![2], vec![0.5, 0.5]).unwrap();
        let code = SwCode::new(vec![m(3, &[vec![1, 1]])], law).unwrap();
        // x1 + x2 = 2: (0,2), (1,1), (2,0); only (1,1) is binary
        let out = sw_decode_md(&code, &[vec![2]]).unwrap();
        assert_eq!(out, DecodeOutcome::Decoded { tuple: vec![vec![1, 1]], all_infinite: false });
    }

    #[test]
    fn search_cap_is_enforced() {
        let code = SwCode::new(vec![FieldMatrix::zeros(2, 0, 12).unwrap()], Distribution::uniform(vec![2]).unwrap()).unwrap();
        assert!(matches!(sw_decode(&code, &[vec![]], SwDecoder::MinDivergence, 1000), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn exact_error_examples() {
        let id = FieldMatrix::identity(2, 3).unwrap();
        let code = SwCode::new(vec![id.clone(), id], two_point()).unwrap();
        assert!(sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP).unwrap().abs() < 1e-15);

        // empty syndromes: the global minimizer is decoded every time
        let z = FieldMatrix::zeros(2, 0, 2).unwrap();
        let code = SwCode::new(vec![z.clone(), z], two_point()).unwrap();
        let out = sw_decode_md(&code, &[vec![], vec![]]).unwrap();
        let winner = out.tuple().unwrap().to_vec();
        let err = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP).unwrap();
        assert!((err - (1.0 - sequence_prob(&two_point(), &winner))).abs() < 1e-15);
    }

    #[test]
    fn exact_error_matches_brute_force() {
        let src = dsbs(0.1).unwrap();
        let a = m(2, &[vec![1, 1]]);
        let b = FieldMatrix::identity(2, 2).unwrap();
        let code = SwCode::new(vec![a.clone(), b.clone()], src.clone()).unwrap();
        // independent oracle: enumerate every source pair and decode by
        // scanning both cosets directly
        let space = seq::all_sequences(2, 2, 16).unwrap();
        let d = |x: &Vec<usize>, y: &Vec<usize>| {
            let t = crate::types::joint_type(&[x, y], &[2, 2]).unwrap();
            type_divergence(t.counts(), src.probs())
        };
        let mut err = 0.0;
        for x in &space {
            for y in &space {
                let (sa, sb) = (a.apply(x), b.apply(y));
                let mut best: Option<(f64, &Vec<usize>, &Vec<usize>)> = None;
                for u in space.iter().filter(|u| a.apply(u) == sa) {
                    for v in space.iter().filter(|v| b.apply(v) == sb) {
                        let s = d(u, v);
                        if best.is_none_or(|(bs, _, _)| s < bs) {
                            best = Some((s, u, v));
                        }
                    }
                }
                let (_, u, v) = best.unwrap();
                if u != x || v != y {
                    err += sequence_prob(&src, &[x.clone(), y.clone()]);
                }
            }
        }
        let got = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP).unwrap();
        assert!((got - err).abs() < 1e-12, "{got} vs {err}");
        assert_eq!(code.rates(), vec![0.5, 1.0]);
    }

    #[test]
    fn rate_check_examples() {
        let src = dsbs(0.05).unwrap();
        let h = -(0.05f64 * 0.05f64.log2() + 0.95 * 0.95f64.log2());
        let r = sw_rate_check(&[0.7, 0.7], &src).unwrap();
        assert!(r.inside);
        assert!((r.constraints[0].bound - h).abs() < 1e-12);
        assert!((r.constraints[2].bound - (1.0 + h)).abs() < 1e-12);
        let r = sw_rate_check(&[0.2, 0.9], &src).unwrap();
        assert!(!r.inside);
        let failing: Vec<&Vec<usize>> = r.failing().map(|c| &c.subset).collect();
        // the sum constraint fails too: 1.1 < H(X,Y)
        assert_eq!(failing, vec![&vec![0], &vec![0, 1]]);
        let r = sw_rate_check(&[1.0, 1.0], &Distribution::uniform(vec![2, 2]).unwrap()).unwrap();
        assert!(!r.inside);
        assert_eq!(r.failing().count(), 3);
    }

    #[test]
    fn mc_examples() {
        let id = FieldMatrix::identity(2, 3).unwrap();
        let code = SwCode::new(vec![id.clone(), id], two_point()).unwrap();
        let e = sw_error_mc(&code, SwDecoder::MinDivergence, 200, 1).unwrap();
        assert_eq!(e.errors, 0);
        assert!(e.covers(0.0));
        let a = m(2, &[vec![1, 1, 0]]);
        let code = SwCode::new(vec![a.clone(), a], two_point()).unwrap();
        let one = sw_error_mc(&code, SwDecoder::MinDivergence, 1, 9).unwrap();
        assert!(one.estimate == 0.0 || one.estimate == 1.0);
        assert!(sw_error_mc(&code, SwDecoder::MinDivergence, 0, 9).is_err());
        let x = sw_error_mc(&code, SwDecoder::MinDivergence, 500, 3).unwrap();
        assert_eq!(x, sw_error_mc(&code, SwDecoder::MinDivergence, 500, 3).unwrap());
    }

    fn random_code(rng: &mut ChaCha8Rng, n: usize) -> SwCode {
        let la = rng.gen_range(0..=n);
        let lb = rng.gen_range(0..=n);
        let a = generate_sparse(2, la.max(1), n, 2, rng.gen()).unwrap();
        let b = generate_sparse(2, lb.max(1), n, 2, rng.gen()).unwrap();
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
        p[3] = 1.0 - p[0] - p[1] - p[2];
        SwCode::new(vec![a, b], Distribution::new(vec![2, 2], p).unwrap()).unwrap()
    }

    /// Whenever the input is the unique minimizer in its coset product, the
    /// decoder returns it.
    #[test]
    fn unique_minimizer_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let n = rng.gen_range(1..=4);
            let code = random_code(&mut rng, n);
            let x = vec![(0..n).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>(), (0..n).map(|_| rng.gen_range(0..2)).collect()];
            let s = sw_encode(&code, &x).unwrap();
            let d = |c: &[Vec<usize>]| {
                let t = crate::types::joint_type(&[&c[0], &c[1]], &[2, 2]).unwrap();
                type_divergence(t.counts(), code.law().probs())
            };
            let dx = d(&x);
            let space = seq::all_sequences(2, n, 64).unwrap();
            let unique = space.iter().all(|u| {
                space.iter().all(|v| {
                    let c = vec![u.clone(), v.clone()];
                    c == x || code.matrices()[0].apply(u) != s[0] || code.matrices()[1].apply(v) != s[1] || d(&c) > dx
                })
            });
            if unique {
                assert_eq!(sw_decode_md(&code, &s).unwrap().tuple().unwrap(), x.as_slice());
            }
        }
    }

    /// Extra rows only refine the cosets, so exact error under the
    /// minimum-divergence rule cannot grow.
    #[test]
    fn adding_rows_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let code = random_code(&mut rng, n);
            let extra = generate_sparse(2, 1, n, 2, rng.gen()).unwrap();
            let before = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP).unwrap();
            let grown = vec![code.matrices()[0].stack(&extra).unwrap(), code.matrices()[1].clone()];
            let after = sw_error_exact(&SwCode::new(grown, code.law().clone()).unwrap(), SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP).unwrap();
            assert!(after <= before + 1e-12, "{after} > {before}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decoding_is_deterministic_and_consistent(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let code = random_code(&mut rng, n);
            let x = vec![(0..n).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>(), (0..n).map(|_| rng.gen_range(0..2)).collect()];
            let s = sw_encode(&code, &x).unwrap();
            let a = sw_decode_md(&code, &s).unwrap();
            prop_assert_eq!(&a, &sw_decode_md(&code, &s).unwrap());
            let t = a.tuple().unwrap();
            prop_assert_eq!(sw_encode(&code, t).unwrap(), s);
        }
    }
}
