//! Method of types: finite distributions, empirical types, entropies,
//! divergences, typical-set predicates and the slack functions used by the
//! bounds.
//!
//! All logarithms are base 2. Multi-coordinate tables are stored row-major
//! with the first coordinate most significant.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};
use crate::seq;

const MASS_TOL: f64 = 1e-12;

/// `x log2 (x / y)` with `0 log 0 = 0` and `x > 0, y = 0` giving `+inf`.
#[inline]
fn xlogxy(x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if y <= 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).log2()
    }
}

fn validate_table(sizes: &[usize], probs: &[f64]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidDistribution("alphabet sizes must be nonempty and positive".into()));
    }
    let cells: usize = sizes.iter().product();
    if probs.len() != cells {
        return Err(Error::InvalidDistribution(format!(
            "{} probabilities for {cells} cells",
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("mass {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidDistribution(format!("total mass {total} is not 1")));
    }
    Ok(())
}

/// Row-major index of a tuple.
pub fn tuple_index(sizes: &[usize], tuple: &[usize]) -> usize {
    tuple.iter().zip(sizes).fold(0, |acc, (&x, &s)| acc * s + x)
}

/// Inverse of [`tuple_index`].
pub fn index_tuple(sizes: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for (slot, &s) in out.iter_mut().zip(sizes).rev() {
        *slot = index % s;
        index /= s;
    }
    out
}

#[derive(Deserialize)]
struct RawDistribution {
    alphabet_sizes: Vec<usize>,
    probabilities: Vec<f64>,
}

/// A probability mass function over a product alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct Distribution {
    alphabet_sizes: Vec<usize>,
    probabilities: Vec<f64>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        Distribution::new(raw.alphabet_sizes, raw.probabilities)
    }
}

impl Distribution {
    pub fn new(alphabet_sizes: Vec<usize>, probabilities: Vec<f64>) -> Result<Self> {
        validate_table(&alphabet_sizes, &probabilities)?;
        Ok(Self { alphabet_sizes, probabilities })
    }

    pub fn uniform(alphabet_sizes: Vec<usize>) -> Result<Self> {
        let cells: usize = alphabet_sizes.iter().product();
        Self::new(alphabet_sizes, vec![1.0 / cells.max(1) as f64; cells])
    }

    /// Point mass on one tuple.
    pub fn point(alphabet_sizes: Vec<usize>, tuple: &[usize]) -> Result<Self> {
        let cells: usize = alphabet_sizes.iter().product();
        let mut p = vec![0.0; cells];
        p[tuple_index(&alphabet_sizes, tuple)] = 1.0;
        Self::new(alphabet_sizes, p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn arity(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn cells(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.probabilities[tuple_index(&self.alphabet_sizes, tuple)]
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple_index(&self.alphabet_sizes, tuple)
    }

    pub fn tuple(&self, index: usize) -> Vec<usize> {
        index_tuple(&self.alphabet_sizes, index)
    }

    /// Marginal on the listed coordinates, in the listed order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        check_coords(self.arity(), coords)?;
        let sizes: Vec<usize> = coords.iter().map(|&c| self.alphabet_sizes[c]).collect();
        let mut p = vec![0.0; sizes.iter().product()];
        for (i, &mass) in self.probabilities.iter().enumerate() {
            let t = self.tuple(i);
            let sub: Vec<usize> = coords.iter().map(|&c| t[c]).collect();
            p[tuple_index(&sizes, &sub)] += mass;
        }
        Ok(Self { alphabet_sizes: sizes, probabilities: p })
    }

    /// Conditional law of `target` coordinates given `context` coordinates.
    pub fn conditional(&self, target: &[usize], context: &[usize]) -> Result<CondDistribution> {
        let mut all = context.to_vec();
        all.extend_from_slice(target);
        let joint = self.marginal(&all)?;
        let context_sizes: Vec<usize> = context.iter().map(|&c| self.alphabet_sizes[c]).collect();
        let target_sizes: Vec<usize> = target.iter().map(|&c| self.alphabet_sizes[c]).collect();
        let tn: usize = target_sizes.iter().product();
        let cn: usize = context_sizes.iter().product();
        let mut table = Vec::with_capacity(tn * cn);
        for c in 0..cn {
            let slice = &joint.probabilities[c * tn..(c + 1) * tn];
            let mass: f64 = slice.iter().sum();
            if mass > 0.0 {
                table.extend(slice.iter().map(|p| p / mass));
            } else {
                table.extend(std::iter::repeat_n(1.0 / tn as f64, tn));
            }
        }
        CondDistribution::new(target_sizes, context_sizes, table)
    }

    /// Product law `self x other` (coordinates of `self` first).
    pub fn product(&self, other: &Distribution) -> Self {
        let mut sizes = self.alphabet_sizes.clone();
        sizes.extend_from_slice(&other.alphabet_sizes);
        let p = self
            .probabilities
            .iter()
            .flat_map(|a| other.probabilities.iter().map(move |b| a * b))
            .collect();
        Self { alphabet_sizes: sizes, probabilities: p }
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }

    /// `H(target | context)` computed as `H(target ∪ context) - H(context)`.
    pub fn cond_entropy_of(&self, target: &[usize], context: &[usize]) -> Result<f64> {
        let mut all = context.to_vec();
        all.extend_from_slice(target);
        let joint = self.marginal(&all)?;
        let ctx = if context.is_empty() { 0.0 } else { self.marginal(context)?.entropy() };
        Ok(joint.entropy() - ctx)
    }

    /// `I(a; b)` for disjoint coordinate groups.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let mut ab = a.to_vec();
        ab.extend_from_slice(b);
        Ok(self.marginal(a)?.entropy() + self.marginal(b)?.entropy() - self.marginal(&ab)?.entropy())
    }

    pub fn sampler(&self) -> Sampler {
        Sampler {
            sizes: self.alphabet_sizes.clone(),
            index: WeightedIndex::new(&self.probabilities).expect("validated masses"),
        }
    }
}

fn check_coords(arity: usize, coords: &[usize]) -> Result<()> {
    let mut seen = vec![false; arity];
    for &c in coords {
        if c >= arity || std::mem::replace(&mut seen[c], true) {
            return Err(Error::Dimension(format!("bad coordinate list {coords:?} for arity {arity}")));
        }
    }
    Ok(())
}

/// Draws tuples from a [`Distribution`].
#[derive(Clone, Debug)]
pub struct Sampler {
    sizes: Vec<usize>,
    index: WeightedIndex<f64>,
}

impl Sampler {
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        index_tuple(&self.sizes, self.sample_index(rng))
    }
}

/// A conditional law `q(target | context)`; every context slice is a
/// distribution over the target alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondDistribution {
    target_sizes: Vec<usize>,
    context_sizes: Vec<usize>,
    /// `table[c * |target| + t]`.
    table: Vec<f64>,
}

impl CondDistribution {
    pub fn new(target_sizes: Vec<usize>, context_sizes: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let tn: usize = target_sizes.iter().product();
        let cn: usize = context_sizes.iter().product();
        if table.len() != tn * cn {
            return Err(Error::InvalidDistribution(format!(
                "conditional table has {} entries, expected {}",
                table.len(),
                tn * cn
            )));
        }
        for c in 0..cn {
            validate_table(&target_sizes, &table[c * tn..(c + 1) * tn])
                .map_err(|e| Error::InvalidDistribution(format!("context {c}: {e}")))?;
        }
        Ok(Self { target_sizes, context_sizes, table })
    }

    pub fn target_sizes(&self) -> &[usize] {
        &self.target_sizes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn context_sizes(&self) -> &[usize] {
        &self.context_sizes
    }

    pub fn target_cells(&self) -> usize {
        self.target_sizes.iter().product()
    }

    pub fn context_cells(&self) -> usize {
        self.context_sizes.iter().product()
    }

    pub fn slice(&self, context: usize) -> &[f64] {
        let tn = self.target_cells();
        &self.table[context * tn..(context + 1) * tn]
    }

    /// `q(t | c)` by flat indices.
    #[inline]
    pub fn p(&self, target: usize, context: usize) -> f64 {
        self.table[context * self.target_cells() + target]
    }

    pub fn slice_distribution(&self, context: usize) -> Distribution {
        Distribution { alphabet_sizes: self.target_sizes.clone(), probabilities: self.slice(context).to_vec() }
    }

    /// Joint law `p(c) q(t | c)` with context coordinates first.
    pub fn joint_with(&self, context_law: &Distribution) -> Result<Distribution> {
        if context_law.sizes() != self.context_sizes.as_slice() {
            return Err(Error::Dimension("context law does not match conditional".into()));
        }
        let mut sizes = self.context_sizes.clone();
        sizes.extend_from_slice(&self.target_sizes);
        let mut p = Vec::with_capacity(self.table.len());
        for (c, &pc) in context_law.probs().iter().enumerate() {
            p.extend(self.slice(c).iter().map(|q| pc * q));
        }
        Ok(Distribution { alphabet_sizes: sizes, probabilities: p })
    }
}

/// An occurrence-count table over a product alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointType {
    n: usize,
    sizes: Vec<usize>,
    counts: Vec<usize>,
}

impl JointType {
    pub fn from_counts(sizes: Vec<usize>, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != sizes.iter().product::<usize>() {
            return Err(Error::Dimension("count table does not match alphabet sizes".into()));
        }
        Ok(Self { n: counts.iter().sum(), sizes, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, tuple: &[usize]) -> usize {
        self.counts[tuple_index(&self.sizes, tuple)]
    }

    pub fn empirical(&self) -> Distribution {
        let n = self.n.max(1) as f64;
        Distribution {
            alphabet_sizes: self.sizes.clone(),
            probabilities: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }

    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        check_coords(self.sizes.len(), coords)?;
        let sizes: Vec<usize> = coords.iter().map(|&c| self.sizes[c]).collect();
        let mut counts = vec![0; sizes.iter().product()];
        for (i, &c) in self.counts.iter().enumerate() {
            let t = index_tuple(&self.sizes, i);
            let sub: Vec<usize> = coords.iter().map(|&x| t[x]).collect();
            counts[tuple_index(&sizes, &sub)] += c;
        }
        Ok(Self { n: self.n, sizes, counts })
    }

    /// Hamming weight for a single-coordinate type: `n - t(0)`.
    pub fn weight(&self) -> usize {
        self.n - self.counts[0]
    }

    /// Number of sequences with this type.
    pub fn class_size(&self) -> f64 {
        seq::multinomial(&self.counts)
    }
}

/// Joint type of `k` aligned sequences with the given alphabet sizes.
pub fn joint_type(sequences: &[&[usize]], sizes: &[usize]) -> Result<JointType> {
    if sequences.len() != sizes.len() || sequences.is_empty() {
        return Err(Error::Dimension(format!(
            "{} sequences for {} alphabets",
            sequences.len(),
            sizes.len()
        )));
    }
    let n = sequences[0].len();
    if sequences.iter().any(|s| s.len() != n) {
        return Err(Error::Dimension("sequences have different lengths".into()));
    }
    let mut counts = vec![0; sizes.iter().product()];
    for i in 0..n {
        let mut idx = 0;
        for (s, &q) in sequences.iter().zip(sizes) {
            if s[i] >= q {
                return Err(Error::Dimension(format!("symbol {} outside alphabet of size {q}", s[i])));
            }
            idx = idx * q + s[i];
        }
        counts[idx] += 1;
    }
    Ok(JointType { n, sizes: sizes.to_vec(), counts })
}

pub fn entropy(p: &Distribution) -> f64 {
    -p.probabilities.iter().map(|&x| if x > 0.0 { x * x.log2() } else { 0.0 }).sum::<f64>()
}

/// `H(q | p) = Σ_c p(c) H(q(·|c))`.
pub fn cond_entropy(q: &CondDistribution, p: &Distribution) -> Result<f64> {
    if p.cells() != q.context_cells() {
        return Err(Error::Dimension("context law does not match conditional".into()));
    }
    Ok((0..p.cells())
        .map(|c| if p.probabilities[c] > 0.0 { p.probabilities[c] * entropy(&q.slice_distribution(c)) } else { 0.0 })
        .sum())
}

pub fn divergence(p: &Distribution, p_ref: &Distribution) -> Result<f64> {
    if p.sizes() != p_ref.sizes() {
        return Err(Error::Dimension("divergence of laws on different alphabets".into()));
    }
    Ok(p.probabilities.iter().zip(&p_ref.probabilities).map(|(&a, &b)| xlogxy(a, b)).sum())
}

/// `D(q ‖ q' | p) = Σ_{c : p(c) > 0} p(c) D(q(·|c) ‖ q'(·|c))`.
pub fn cond_divergence(q: &CondDistribution, q_ref: &CondDistribution, p: &Distribution) -> Result<f64> {
    if q.target_sizes != q_ref.target_sizes
        || q.context_sizes != q_ref.context_sizes
        || p.cells() != q.context_cells()
    {
        return Err(Error::Dimension("conditional divergence shape mismatch".into()));
    }
    let mut acc = 0.0;
    for c in 0..p.cells() {
        let w = p.probabilities[c];
        if w > 0.0 {
            let d: f64 = q.slice(c).iter().zip(q_ref.slice(c)).map(|(&a, &b)| xlogxy(a, b)).sum();
            acc += w * d;
        }
    }
    Ok(acc)
}

/// One information measure with its arguments.
#[derive(Clone, Copy, Debug)]
pub enum InfoMeasure<'a> {
    Entropy(&'a Distribution),
    CondEntropy { q: &'a CondDistribution, p: &'a Distribution },
    Divergence { p: &'a Distribution, p_ref: &'a Distribution },
    CondDivergence { q: &'a CondDistribution, q_ref: &'a CondDistribution, p: &'a Distribution },
}

/// Evaluates an information measure in bits.
pub fn info_measures(kind: InfoMeasure<'_>) -> Result<f64> {
    match kind {
        InfoMeasure::Entropy(p) => Ok(entropy(p)),
        InfoMeasure::CondEntropy { q, p } => cond_entropy(q, p),
        InfoMeasure::Divergence { p, p_ref } => divergence(p, p_ref),
        InfoMeasure::CondDivergence { q, q_ref, p } => cond_divergence(q, q_ref, p),
    }
}

/// `D(t/n ‖ μ)` straight from counts, summed in cell order.
pub fn type_divergence(counts: &[usize], mu: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts.iter().zip(mu).map(|(&c, &m)| xlogxy(c as f64 / n, m)).sum()
}

/// `D(ν_{u|v} ‖ μ_{U|V} | ν_v)` from a joint count table laid out as
/// `counts[v * |U| + u]`; slices with `ν_v(v) = 0` are skipped.
pub fn type_cond_divergence(counts: &[usize], cond: &CondDistribution) -> f64 {
    let tn = cond.target_cells();
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for v in 0..cond.context_cells() {
        let row = &counts[v * tn..(v + 1) * tn];
        let nv: usize = row.iter().sum();
        if nv == 0 {
            continue;
        }
        let d: f64 = row.iter().zip(cond.slice(v)).map(|(&c, &m)| xlogxy(c as f64 / nv as f64, m)).sum();
        acc += nv as f64 / n as f64 * d;
    }
    acc
}

/// `log2 μ^n(x)` for any sequence of type `counts`, summed in cell order.
pub fn type_log_prob(counts: &[usize], mu: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&c, &m) in counts.iter().zip(mu) {
        if c > 0 {
            if m <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += c as f64 * m.log2();
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl TypicalityParams {
    pub fn new(gamma: f64, gamma_prime: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma_prime >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative typicality radius ({gamma}, {gamma_prime})")));
        }
        Ok(Self { gamma, gamma_prime })
    }

    pub fn single(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma)
    }
}

/// Law against which typicality is tested.
#[derive(Clone, Copy, Debug)]
pub enum TypicalityLaw<'a> {
    Joint(&'a Distribution),
    Conditional(&'a CondDistribution),
}

/// Whether the (conditional) type of `x` is within divergence `γ` of the law.
///
/// For a conditional law, `conditional_on` supplies the context sequences
/// and only contexts that occur in them contribute.
pub fn is_typical(
    x: &[&[usize]],
    law: TypicalityLaw<'_>,
    params: &TypicalityParams,
    conditional_on: Option<&[&[usize]]>,
) -> Result<bool> {
    let d = match (law, conditional_on) {
        (TypicalityLaw::Joint(mu), None) => {
            let t = joint_type(x, mu.sizes())?;
            type_divergence(t.counts(), mu.probs())
        }
        (TypicalityLaw::Conditional(cond), Some(ctx)) => {
            let mut seqs: Vec<&[usize]> = ctx.to_vec();
            seqs.extend_from_slice(x);
            let mut sizes = cond.context_sizes().to_vec();
            sizes.extend_from_slice(cond.target_sizes());
            let t = joint_type(&seqs, &sizes)?;
            type_cond_divergence(t.counts(), cond)
        }
        (TypicalityLaw::Joint(_), Some(_)) => {
            return Err(Error::InvalidParameter("context supplied for an unconditional law".into()))
        }
        (TypicalityLaw::Conditional(_), None) => {
            return Err(Error::InvalidParameter("conditional law needs context sequences".into()))
        }
    };
    Ok(d < params.gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlackFn {
    Lambda,
    Zeta,
    ZetaCond,
    Eta,
    EtaCond,
}

/// `-sqrt(2γ) log2(sqrt(2γ) / m)`, continuous at `γ = 0`.
fn root_term(gamma: f64, m: f64) -> f64 {
    let r = (2.0 * gamma).sqrt();
    if r == 0.0 {
        0.0
    } else {
        -r * (r / m).log2()
    }
}

/// Evaluates a slack function. `u_size` is `|U|`; the conditional variants
/// also need `v_size = |V|` and use `γ'` as the inner radius.
pub fn slack_functions(which: SlackFn, u_size: usize, v_size: Option<usize>, n: usize, gamma: f64, gamma_prime: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    if !(gamma >= 0.0 && gamma_prime >= 0.0) {
        return Err(Error::InvalidParameter("typicality radii must be nonnegative".into()));
    }
    let u = u_size as f64;
    let log_n = ((n + 1) as f64).log2() / n as f64;
    let need_v = || v_size.map(|v| v as f64).ok_or_else(|| Error::InvalidParameter(format!("{which:?} needs |V|")));
    Ok(match which {
        SlackFn::Lambda => u * log_n,
        SlackFn::Zeta => gamma + root_term(gamma, u),
        SlackFn::Eta => root_term(gamma, u) + u * log_n,
        SlackFn::ZetaCond => {
            let v = need_v()?;
            gamma_prime + root_term(gamma_prime, u * v) + (2.0 * gamma).sqrt() * u.log2()
        }
        SlackFn::EtaCond => {
            let v = need_v()?;
            root_term(gamma_prime, u * v) + (2.0 * gamma).sqrt() * u.log2() + u * v * log_n
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypicalityLemma {
    Trans,
    Aep,
    Prob,
    Number,
}

/// One inequality checked by [`verify_typicality_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub lemma: TypicalityLemma,
    pub holds: bool,
    /// Sides of the part with the smallest margin.
    pub lhs: f64,
    pub rhs: f64,
    pub parts: Vec<BoundCheck>,
    /// False when γ is outside the range the lemma assumes (AEP: `0 < γ ≤ 1/8`).
    pub precondition_met: bool,
}

/// Float slack for comparing divergences that agree mathematically.
const DIV_TOL: f64 = 1e-12;

struct PairLaw {
    su: usize,
    sv: usize,
    /// `μ_UV` laid out as `[u * sv + v]`.
    joint: Vec<f64>,
    mu_u: Vec<f64>,
    mu_v: Vec<f64>,
    /// `μ_{U|V}` with V as context.
    u_given_v: CondDistribution,
    h_u_given_v: f64,
}

impl PairLaw {
    fn new(mu: &Distribution) -> Result<Self> {
        let mu_u = mu.marginal(&[0])?;
        let mu_v = mu.marginal(&[1])?;
        Ok(Self {
            su: mu.sizes()[0],
            sv: mu.sizes()[1],
            joint: mu.probs().to_vec(),
            mu_u: mu_u.probs().to_vec(),
            mu_v: mu_v.probs().to_vec(),
            u_given_v: mu.conditional(&[0], &[1])?,
            h_u_given_v: mu.cond_entropy_of(&[0], &[1])?,
        })
    }

    /// Counts `[u * sv + v]` rearranged to `[v * su + u]`.
    fn v_major(&self, t: &[usize]) -> Vec<usize> {
        let mut out = vec![0; t.len()];
        for u in 0..self.su {
            for v in 0..self.sv {
                out[v * self.su + u] = t[u * self.sv + v];
            }
        }
        out
    }

    fn u_marginal(&self, t: &[usize]) -> Vec<usize> {
        (0..self.su).map(|u| t[u * self.sv..(u + 1) * self.sv].iter().sum()).collect()
    }

    fn v_marginal(&self, t: &[usize]) -> Vec<usize> {
        (0..self.sv).map(|v| (0..self.su).map(|u| t[u * self.sv + v]).sum()).collect()
    }

    /// Number of `u` with joint type `t` against a fixed `v` of the marginal type.
    fn cond_class_size(&self, t_vmajor: &[usize]) -> f64 {
        t_vmajor.chunks(self.su).map(seq::multinomial).product()
    }

    fn cond_log_prob(&self, t_vmajor: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (v, row) in t_vmajor.chunks(self.su).enumerate() {
            let lp = type_log_prob(row, self.u_given_v.slice(v));
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            acc += lp;
        }
        acc
    }
}

fn check(name: &str, lhs: f64, rhs: f64) -> BoundCheck {
    BoundCheck { name: name.to_string(), lhs, rhs, holds: lhs <= rhs + DIV_TOL }
}

/// Exact check of one typicality lemma by enumerating types.
///
/// `mu` is either a law on one alphabet (unconditional statements only) or
/// a pair law `μ_UV` (U first), in which case the conditional statements are
/// checked too. Sequences enter only through their types, so the sums run
/// over types weighted by class sizes; `cap` bounds the number of types.
pub fn verify_typicality_bounds(
    lemma: TypicalityLemma,
    mu: &Distribution,
    params: &TypicalityParams,
    n: usize,
    cap: u128,
) -> Result<TypicalityReport> {
    if n == 0 || mu.arity() > 2 {
        return Err(Error::InvalidParameter("need n >= 1 and a law on one or two alphabets".into()));
    }
    let (g, gp) = (params.gamma, params.gamma_prime);
    let pair = if mu.arity() == 2 { Some(PairLaw::new(mu)?) } else { None };
    let mu_u: Vec<f64> = match &pair {
        Some(p) => p.mu_u.clone(),
        None => mu.probs().to_vec(),
    };
    let su = mu_u.len();
    let h_u = entropy(&Distribution { alphabet_sizes: vec![su], probabilities: mu_u.clone() });

    let types_u = count_compositions(n, su);
    let types_uv = pair.as_ref().map_or(0, |p| count_compositions(n, p.su * p.sv));
    check_cap("type classes", types_u.max(types_uv), cap)?;

    let mut parts = Vec::new();
    let mut precondition_met = true;
    match lemma {
        TypicalityLemma::Prob => {
            let lam = slack_functions(SlackFn::Lambda, su, None, n, g, gp)?;
            let tail: f64 = seq::compositions(n, su)
                .iter()
                .filter(|t| type_divergence(t, &mu_u) >= g)
                .map(|t| seq::multinomial(t) * type_log_prob(t, &mu_u).exp2())
                .sum();
            parts.push(check("unconditional tail", tail, (-(n as f64) * (g - lam)).exp2()));
            if let Some(p) = &pair {
                let lam_uv = slack_functions(SlackFn::Lambda, p.su * p.sv, None, n, g, gp)?;
                let mut worst = 0.0f64;
                for (_, group) in group_by_v(p, n) {
                    let tail: f64 = group
                        .iter()
                        .filter(|t| type_cond_divergence(t, &p.u_given_v) >= g)
                        .map(|t| p.cond_class_size(t) * p.cond_log_prob(t).exp2())
                        .sum();
                    worst = worst.max(tail);
                }
                parts.push(check("conditional tail", worst, (-(n as f64) * (g - lam_uv)).exp2()));
            }
        }
        TypicalityLemma::Aep => {
            precondition_met = g > 0.0 && g <= 0.125;
            let z = slack_functions(SlackFn::Zeta, su, None, n, g, gp)?;
            let dev = seq::compositions(n, su)
                .iter()
                .filter(|t| type_divergence(t, &mu_u) < g)
                .map(|t| (-type_log_prob(t, &mu_u) / n as f64 - h_u).abs())
                .fold(0.0, f64::max);
            parts.push(check("unconditional deviation", dev, z));
            if let Some(p) = &pair {
                precondition_met &= gp > 0.0 && gp <= 0.125;
                let zc = slack_functions(SlackFn::ZetaCond, p.su, Some(p.sv), n, g, gp)?;
                let mut dev = 0.0f64;
                for (vt, group) in group_by_v(p, n) {
                    if type_divergence(&vt, &p.mu_v) >= g {
                        continue;
                    }
                    for t in group.iter().filter(|t| type_cond_divergence(t, &p.u_given_v) < gp) {
                        dev = dev.max((-p.cond_log_prob(t) / n as f64 - p.h_u_given_v).abs());
                    }
                }
                parts.push(check("conditional deviation", dev, zc));
            }
        }
        TypicalityLemma::Number => {
            let eta = slack_functions(SlackFn::Eta, su, None, n, g, gp)?;
            let size: f64 = seq::compositions(n, su)
                .iter()
                .filter(|t| type_divergence(t, &mu_u) < g)
                .map(|t| seq::multinomial(t))
                .sum();
            parts.push(check("unconditional size", (size.log2() / n as f64 - h_u).abs(), eta));
            if let Some(p) = &pair {
                let etac = slack_functions(SlackFn::EtaCond, p.su, Some(p.sv), n, g, gp)?;
                let mut dev = 0.0f64;
                for (vt, group) in group_by_v(p, n) {
                    if type_divergence(&vt, &p.mu_v) >= g {
                        continue;
                    }
                    let size: f64 = group
                        .iter()
                        .filter(|t| type_cond_divergence(t, &p.u_given_v) < gp)
                        .map(|t| p.cond_class_size(t))
                        .sum();
                    dev = dev.max((size.log2() / n as f64 - p.h_u_given_v).abs());
                }
                parts.push(check("conditional size", dev, etac));
            }
        }
        TypicalityLemma::Trans => {
            let p = pair
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("the inclusion statements need a pair law".into()))?;
            // Violations are counted as sequence pairs; rhs is zero.
            let (mut forward, mut backward) = (0.0, 0.0);
            for t in seq::compositions(n, p.su * p.sv) {
                let tv = p.v_major(&t);
                let d_uv = type_divergence(&t, &p.joint);
                let d_v = type_divergence(&p.v_marginal(&t), &p.mu_v);
                let d_u = type_divergence(&p.u_marginal(&t), &p.mu_u);
                let d_cond = type_cond_divergence(&tv, &p.u_given_v);
                let pairs = seq::multinomial(&t);
                if d_v < g && d_cond < gp && d_uv >= g + gp + DIV_TOL {
                    forward += pairs;
                }
                if d_uv < g && (d_u >= g + DIV_TOL || d_cond >= g + DIV_TOL) {
                    backward += pairs;
                }
            }
            parts.push(check("joint from marginal and conditional", forward, 0.0));
            parts.push(check("marginal and conditional from joint", backward, 0.0));
        }
    }
    let holds = parts.iter().all(|c| c.holds);
    let worst = parts
        .iter()
        .min_by(|a, b| (a.rhs - a.lhs).total_cmp(&(b.rhs - b.lhs)))
        .expect("at least one part");
    Ok(TypicalityReport { lemma, holds, lhs: worst.lhs, rhs: worst.rhs, parts: parts.clone(), precondition_met })
}

fn count_compositions(n: usize, parts: usize) -> u128 {
    // C(n + parts - 1, parts - 1)
    let mut acc: u128 = 1;
    for i in 1..parts {
        acc = acc * (n + i) as u128 / i as u128;
    }
    acc
}

/// Joint types (v-major layout) grouped by their V-marginal.
fn group_by_v(p: &PairLaw, n: usize) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut out = Vec::new();
    for vt in seq::compositions(n, p.sv) {
        let rows: Vec<Vec<Vec<usize>>> = vt.iter().map(|&c| seq::compositions(c, p.su)).collect();
        let radix: Vec<usize> = rows.iter().map(Vec::len).collect();
        let mut pick = vec![0; rows.len()];
        let mut group = Vec::new();
        loop {
            group.push(pick.iter().zip(&rows).flat_map(|(&i, r)| r[i].iter().copied()).collect());
            if !seq::advance(&mut pick, &radix) {
                break;
            }
        }
        out.push((vt, group));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<usize> {
        s.bytes().map(|b| (b - b'0') as usize).collect()
    }

    #[test]
    fn worked_joint_type() {
        let u = bits("01001010");
        let v = bits("00101001");
        let t = joint_type(&[&u, &v], &[2, 2]).unwrap();
        assert_eq!(t.counts(), &[3, 2, 2, 1]);
        assert_eq!(t.count(&[0, 0]), 3);
        assert_eq!(t.n(), 8);
    }

    #[test]
    fn small_joint_types() {
        assert_eq!(joint_type(&[&[0, 0, 0, 0]], &[2]).unwrap().counts(), &[4, 0]);
        assert_eq!(joint_type(&[&[0, 1, 0, 1]], &[2]).unwrap().counts(), &[2, 2]);
        assert!(joint_type(&[&[0, 1], &[0]], &[2, 2]).is_err());
        assert!(joint_type(&[&[0, 2]], &[2]).is_err());
    }

    #[test]
    fn measures_examples() {
        let u4 = Distribution::uniform(vec![4]).unwrap();
        assert!((info_measures(InfoMeasure::Entropy(&u4)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(divergence(&u4, &u4).unwrap(), 0.0);
        let p = Distribution::new(vec![2], vec![1.0, 0.0]).unwrap();
        let h = Distribution::uniform(vec![2]).unwrap();
        assert!((divergence(&p, &h).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(divergence(&h, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn conditional_measures() {
        let mu = Distribution::new(vec![2, 2], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let cond = mu.conditional(&[0], &[1]).unwrap();
        let v = mu.marginal(&[1]).unwrap();
        let h = cond_entropy(&cond, &v).unwrap();
        let h01 = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((h - h01).abs() < 1e-12);
        assert!((mu.cond_entropy_of(&[0], &[1]).unwrap() - h01).abs() < 1e-12);
        let d = info_measures(InfoMeasure::CondDivergence { q: &cond, q_ref: &cond, p: &v }).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn zero_context_slices_are_uniform() {
        let mu = Distribution::new(vec![2, 2], vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let cond = mu.conditional(&[0], &[1]).unwrap();
        assert_eq!(cond.slice(1), &[0.5, 0.5]);
        assert_eq!(cond.slice(0), &[0.5, 0.5]);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![2], vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![3], vec![0.5, 0.5]).is_err());
        assert!(Distribution::from_json(r#"{"alphabet_sizes":[2],"probabilities":[0.2,0.2]}"#).is_err());
        let d = Distribution::from_json(r#"{"alphabet_sizes":[2,2],"probabilities":[0.25,0.25,0.25,0.25]}"#).unwrap();
        assert_eq!(Distribution::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn typicality_examples() {
        let mu = Distribution::new(vec![2], vec![0.75, 0.25]).unwrap();
        let law = TypicalityLaw::Joint(&mu);
        for g in [1e-9, 0.1, 1.0] {
            let p = TypicalityParams::single(g).unwrap();
            assert!(is_typical(&[&[0, 0, 0, 1]], law, &p, None).unwrap());
        }
        let p = TypicalityParams::single(1.0).unwrap();
        assert!(!is_typical(&[&[1, 1, 1, 1]], law, &p, None).unwrap());
        let p0 = TypicalityParams::single(0.0).unwrap();
        assert!(!is_typical(&[&[0, 0, 0, 1]], law, &p0, None).unwrap());
        assert!(TypicalityParams::single(-1.0).is_err());
    }

    #[test]
    fn conditional_typicality_skips_unseen_contexts() {
        let mu = Distribution::new(vec![2, 2], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let cond = mu.conditional(&[0], &[1]).unwrap();
        let p = TypicalityParams::single(0.01).unwrap();
        // context all zero; u matches the 0-slice 9:1 exactly
        let v = vec![0; 10];
        let mut u = vec![0; 10];
        u[3] = 1;
        assert!(is_typical(&[&u], TypicalityLaw::Conditional(&cond), &p, Some(&[&v])).unwrap());
        u[4] = 1;
        assert!(!is_typical(&[&u], TypicalityLaw::Conditional(&cond), &p, Some(&[&v])).unwrap());
    }

    #[test]
    fn slack_examples() {
        let lam = slack_functions(SlackFn::Lambda, 2, None, 3, 0.0, 0.0).unwrap();
        assert!((lam - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(slack_functions(SlackFn::Zeta, 2, None, 3, 0.0, 0.0).unwrap(), 0.0);
        let eta = slack_functions(SlackFn::Eta, 2, None, 3, 0.0, 0.0).unwrap();
        assert!((eta - 4.0 / 3.0).abs() < 1e-15);
        // γ = 1/8: sqrt(2γ) = 1/2, -1/2 log2(1/4) = 1.
        let z = slack_functions(SlackFn::Zeta, 2, None, 3, 0.125, 0.0).unwrap();
        assert!((z - 1.125).abs() < 1e-15);
        assert!(slack_functions(SlackFn::EtaCond, 2, None, 3, 0.1, 0.1).is_err());
        let zc = slack_functions(SlackFn::ZetaCond, 2, Some(2), 3, 0.125, 0.125).unwrap();
        // 1/8 - 1/2 log2(1/8) + 1/2 log2 2
        assert!((zc - (0.125 + 1.5 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_binary_uniform() {
        let mu = Distribution::uniform(vec![2]).unwrap();
        let p = TypicalityParams::single(1.0).unwrap();
        let r = verify_typicality_bounds(TypicalityLemma::Prob, &mu, &p, 4, 1 << 20).unwrap();
        assert!(r.holds);
        // only the constant sequences have D = 1 >= 1
        assert!((r.parts[0].lhs - 2.0 / 16.0).abs() < 1e-15);
        let lam = 2.0 * 5f64.log2() / 4.0;
        assert!((r.parts[0].rhs - (-4.0 * (1.0 - lam)).exp2()).abs() < 1e-12);
    }

    #[test]
    fn size_bound_when_everything_is_typical() {
        let mu = Distribution::uniform(vec![2]).unwrap();
        let p = TypicalityParams::single(1.01).unwrap();
        let r = verify_typicality_bounds(TypicalityLemma::Number, &mu, &p, 4, 1 << 20).unwrap();
        assert!(r.holds);
        assert_eq!(r.parts[0].lhs, 0.0);
    }

    #[test]
    fn size_bound_fails_on_empty_typical_set() {
        // n = 1: both types sit at divergence >= 0.415 from (0.75, 0.25)
        let mu = Distribution::new(vec![2], vec![0.75, 0.25]).unwrap();
        let p = TypicalityParams::single(0.1).unwrap();
        let r = verify_typicality_bounds(TypicalityLemma::Number, &mu, &p, 1, 1 << 20).unwrap();
        assert!(!r.holds);
        assert_eq!(r.lhs, f64::INFINITY);
    }

    #[test]
    fn aep_reports_precondition() {
        let mu = Distribution::new(vec![2], vec![0.75, 0.25]).unwrap();
        let p = TypicalityParams::single(0.5).unwrap();
        let r = verify_typicality_bounds(TypicalityLemma::Aep, &mu, &p, 6, 1 << 20).unwrap();
        assert!(!r.precondition_met);
        let p = TypicalityParams::single(0.1).unwrap();
        assert!(verify_typicality_bounds(TypicalityLemma::Aep, &mu, &p, 6, 1 << 20).unwrap().precondition_met);
    }

    #[test]
    fn trans_needs_pair_law() {
        let mu = Distribution::uniform(vec![2]).unwrap();
        let p = TypicalityParams::single(0.5).unwrap();
        assert!(verify_typicality_bounds(TypicalityLemma::Trans, &mu, &p, 4, 1 << 20).is_err());
    }

    /// Type-based sums match a literal walk over all sequence pairs.
    #[test]
    fn type_enumeration_matches_sequence_enumeration() {
        let mu = Distribution::new(vec![2, 2], vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let cond = mu.conditional(&[0], &[1]).unwrap();
        let mu_u = mu.marginal(&[0]).unwrap();
        let mu_v = mu.marginal(&[1]).unwrap();
        let n = 4;
        let (g, gp) = (0.3, 0.2);
        let params = TypicalityParams::new(g, gp).unwrap();
        let seqs = seq::all_sequences(2, n, 64).unwrap();

        // unconditional tail
        let tail: f64 = seqs
            .iter()
            .filter(|u| !is_typical(&[u], TypicalityLaw::Joint(&mu_u), &params, None).unwrap())
            .map(|u| u.iter().map(|&x| mu_u.probs()[x]).product::<f64>())
            .sum();
        let r = verify_typicality_bounds(TypicalityLemma::Prob, &mu, &params, n, 1 << 20).unwrap();
        assert!((r.parts[0].lhs - tail).abs() < 1e-12);

        // worst conditional tail and conditional set sizes over v
        let mut worst = 0.0f64;
        let mut dev = 0.0f64;
        let h_cond = mu.cond_entropy_of(&[0], &[1]).unwrap();
        for v in &seqs {
            let vp = TypicalityParams::single(gp).unwrap();
            let mut tail = 0.0;
            let mut size = 0usize;
            for u in &seqs {
                let typ_g = is_typical(&[u], TypicalityLaw::Conditional(&cond), &params, Some(&[v])).unwrap();
                if !typ_g {
                    tail += u.iter().zip(v).map(|(&a, &b)| cond.p(a, b)).product::<f64>();
                }
                if is_typical(&[u], TypicalityLaw::Conditional(&cond), &vp, Some(&[v])).unwrap() {
                    size += 1;
                }
            }
            worst = worst.max(tail);
            if is_typical(&[v], TypicalityLaw::Joint(&mu_v), &params, None).unwrap() {
                dev = dev.max(((size as f64).log2() / n as f64 - h_cond).abs());
            }
        }
        assert!((r.parts[1].lhs - worst).abs() < 1e-12);
        let r = verify_typicality_bounds(TypicalityLemma::Number, &mu, &params, n, 1 << 20).unwrap();
        assert!((r.parts[1].lhs - dev).abs() < 1e-12 || (r.parts[1].lhs.is_infinite() && dev.is_infinite()));
    }

    fn arb_dist(k: usize) -> impl Strategy<Value = Distribution> {
        proptest::collection::vec(0.01f64..1.0, k).prop_map(move |w| {
            let s: f64 = w.iter().sum();
            let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let rest: f64 = p[1..].iter().sum();
            p[0] = 1.0 - rest;
            Distribution::new(vec![k], p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn joint_type_marginalizes(seed in any::<u64>(), n in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let c: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let t = joint_type(&[&a, &b, &c], &[2, 3, 2]).unwrap();
            prop_assert_eq!(t.marginal(&[0, 2]).unwrap(), joint_type(&[&a, &c], &[2, 2]).unwrap());
            prop_assert_eq!(t.marginal(&[1]).unwrap(), joint_type(&[&b], &[3]).unwrap());
        }

        #[test]
        fn entropy_and_divergence_ranges(p in arb_dist(4), q in arb_dist(4)) {
            let h = entropy(&p);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&h));
            prop_assert!(divergence(&p, &q).unwrap() >= -1e-12);
            prop_assert!(divergence(&p, &p).unwrap().abs() < 1e-9);
        }

        #[test]
        fn empirical_chain_identity(seed in any::<u64>(), n in 1usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w: Vec<f64> = (0..6).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let mut pr: Vec<f64> = w.iter().map(|x| x / s).collect();
            let rest: f64 = pr[1..].iter().sum();
            pr[0] = 1.0 - rest;
            // V first (3 symbols), U second (2 symbols)
            let mu = Distribution::new(vec![3, 2], pr).unwrap();
            let v: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let u: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let t = joint_type(&[&v, &u], &[3, 2]).unwrap();
            let d_joint = type_divergence(t.counts(), mu.probs());
            let d_v = type_divergence(t.marginal(&[0]).unwrap().counts(), mu.marginal(&[0]).unwrap().probs());
            let d_cond = type_cond_divergence(t.counts(), &mu.conditional(&[1], &[0]).unwrap());
            prop_assert!((d_joint - d_v - d_cond).abs() < 1e-9);
        }

        #[test]
        fn typicality_is_monotone_in_radius(seed in any::<u64>(), g1 in 0.0f64..1.0, g2 in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = Distribution::new(vec![3], vec![0.5, 0.3, 0.2]).unwrap();
            let x: Vec<usize> = (0..10).map(|_| rng.gen_range(0..3)).collect();
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let at = |g| is_typical(&[&x], TypicalityLaw::Joint(&mu), &TypicalityParams::single(g).unwrap(), None).unwrap();
            prop_assert!(!at(lo) || at(hi));
        }
    }
}
