//! Random function ensembles over `U^n`, their weight spectra, (α, β)
//! profiles and exact checks of the collision inequalities.
//!
//! Every hash value is a length-`l` vector over GF(q). Matrices produce it
//! by multiplication; binning tables store a bin index in `[q^l]` that is
//! read as such a vector. Stacking two members therefore gives the same
//! output whether they are matrices or tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};
use crate::gf::{is_prime, FieldMatrix};
use crate::seq;

const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Uniform over all `l x n` matrices.
    Uniform,
    /// Column-wise sparse construction with `tau` additive draws per column.
    Sparse { tau: usize },
    /// Uniform over all functions `U^n -> [q^l]`.
    Binning,
}

/// One function drawn from an ensemble.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Member {
    Matrix(FieldMatrix),
    /// `bins[index(u)]` is the bin of `u`, with `q^l` bins.
    Table { q: usize, l: usize, bins: Vec<usize> },
}

impl Member {
    pub fn out_len(&self) -> usize {
        match self {
            Member::Matrix(a) => a.rows(),
            Member::Table { l, .. } => *l,
        }
    }

    pub fn as_matrix(&self) -> Option<&FieldMatrix> {
        match self {
            Member::Matrix(a) => Some(a),
            Member::Table { .. } => None,
        }
    }

    /// Hash value of `u` as a vector over GF(q).
    pub fn hash(&self, u: &[usize]) -> Vec<usize> {
        match self {
            Member::Matrix(a) => a.apply(u),
            Member::Table { q, l, bins } => seq::index_to_vec(bins[seq::vec_to_index(u, *q)], *q, *l),
        }
    }

    /// Hash value as an integer in `[q^l]`.
    pub fn hash_index(&self, u: &[usize]) -> usize {
        match self {
            Member::Matrix(a) => seq::vec_to_index(&a.apply(u), a.q()),
            Member::Table { q, bins, .. } => bins[seq::vec_to_index(u, *q)],
        }
    }

    /// Hash values of all of `U^n` in lexicographic order of `u`.
    fn hash_all(&self, space: &[Vec<usize>]) -> Vec<usize> {
        match self {
            Member::Table { bins, .. } => bins.clone(),
            Member::Matrix(_) => space.iter().map(|u| self.hash_index(u)).collect(),
        }
    }

    fn into_table(self, q: usize, n: usize) -> (usize, Vec<usize>) {
        match self {
            Member::Table { l, bins, .. } => (l, bins),
            Member::Matrix(a) => {
                let l = a.rows();
                let space = seq::all_sequences(q, n, u128::MAX).expect("uncapped");
                (l, space.iter().map(|u| seq::vec_to_index(&a.apply(u), q)).collect())
            }
        }
    }

    /// The stacked function `u -> (self(u), other(u))`.
    pub fn stack(&self, other: &Member, q: usize, n: usize) -> Result<Member> {
        if let (Member::Matrix(a), Member::Matrix(b)) = (self, other) {
            return Ok(Member::Matrix(a.stack(b)?));
        }
        let (l1, t1) = self.clone().into_table(q, n);
        let (l2, t2) = other.clone().into_table(q, n);
        let scale = seq::pow(q, l2) as usize;
        let bins = t1.iter().zip(&t2).map(|(a, b)| a * scale + b).collect();
        Ok(Member::Table { q, l: l1 + l2, bins })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Base(Family),
    Concat(Box<Ensemble>, Box<Ensemble>),
}

/// A distribution over functions `GF(q)^n -> GF(q)^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    q: usize,
    l: usize,
    n: usize,
    shape: Shape,
}

impl Ensemble {
    fn base(q: usize, l: usize, n: usize, family: Family) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        if let Family::Sparse { tau } = family {
            if tau % 2 == 1 {
                return Err(Error::InvalidParameter(format!("tau = {tau} must be even")));
            }
            if l == 0 {
                return Err(Error::InvalidParameter("sparse ensemble needs l >= 1".into()));
            }
        }
        Ok(Self { q, l, n, shape: Shape::Base(family) })
    }

    pub fn uniform(q: usize, l: usize, n: usize) -> Result<Self> {
        Self::base(q, l, n, Family::Uniform)
    }

    pub fn sparse(q: usize, l: usize, n: usize, tau: usize) -> Result<Self> {
        Self::base(q, l, n, Family::Sparse { tau })
    }

    pub fn binning(q: usize, l: usize, n: usize) -> Result<Self> {
        Self::base(q, l, n, Family::Binning)
    }

    pub fn new(family: Family, q: usize, l: usize, n: usize) -> Result<Self> {
        Self::base(q, l, n, family)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Base family, or `None` for a concatenation.
    pub fn family(&self) -> Option<Family> {
        match &self.shape {
            Shape::Base(f) => Some(*f),
            Shape::Concat(..) => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        match &self.shape {
            Shape::Base(f) => *f != Family::Binning,
            Shape::Concat(a, b) => a.is_linear() && b.is_linear(),
        }
    }

    /// Number of equally likely elementary random choices behind one draw.
    pub fn elementary_choices(&self) -> u128 {
        let (q, l, n) = (self.q, self.l, self.n);
        match &self.shape {
            Shape::Base(Family::Uniform) => seq::pow(q, l * n),
            Shape::Base(Family::Sparse { tau }) => seq::pow(l * (q - 1), tau * n),
            Shape::Base(Family::Binning) => {
                let inputs = seq::pow(q, n);
                if inputs > usize::MAX as u128 {
                    return u128::MAX;
                }
                seq::pow(seq::pow(q, l).min(usize::MAX as u128) as usize, inputs as usize)
            }
            Shape::Concat(a, b) => a.elementary_choices().saturating_mul(b.elementary_choices()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Member {
        let (q, l, n) = (self.q, self.l, self.n);
        match &self.shape {
            Shape::Base(Family::Uniform) => {
                let dense: Vec<Vec<usize>> = (0..l).map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect()).collect();
                Member::Matrix(FieldMatrix::from_dense_with_cols(q, n, &dense).expect("valid shape"))
            }
            Shape::Base(Family::Sparse { tau }) => Member::Matrix(sparse_from_rng(q, l, n, *tau, rng)),
            Shape::Base(Family::Binning) => {
                let bins = seq::pow(q, l) as usize;
                let inputs = seq::pow(q, n) as usize;
                Member::Table { q, l, bins: (0..inputs).map(|_| rng.gen_range(0..bins)).collect() }
            }
            Shape::Concat(a, b) => {
                let x = a.sample(rng);
                let y = b.sample(rng);
                x.stack(&y, q, n).expect("same domain")
            }
        }
    }

    /// Exact support with merged probabilities, sorted by member.
    pub fn enumerate_support(&self, cap: u128) -> Result<Vec<(Member, f64)>> {
        check_cap("ensemble choices", self.elementary_choices(), cap)?;
        let (q, l, n) = (self.q, self.l, self.n);
        let mut merged: BTreeMap<Member, f64> = BTreeMap::new();
        match &self.shape {
            Shape::Base(Family::Uniform) => {
                let total = seq::pow(q, l * n) as usize;
                let p = 1.0 / total as f64;
                for i in 0..total {
                    let flat = seq::index_to_vec(i, q, l * n);
                    let dense: Vec<Vec<usize>> = flat.chunks(n.max(1)).map(<[usize]>::to_vec).collect();
                    let a = FieldMatrix::from_dense_with_cols(q, n, &dense[..l])?;
                    merged.insert(Member::Matrix(a), p);
                }
            }
            Shape::Base(Family::Sparse { tau }) => {
                for (a, p) in sparse_support(q, l, n, *tau) {
                    *merged.entry(Member::Matrix(a)).or_insert(0.0) += p;
                }
            }
            Shape::Base(Family::Binning) => {
                let bins = seq::pow(q, l) as usize;
                let inputs = seq::pow(q, n) as usize;
                let mut table = vec![0; inputs];
                let radix = vec![bins; inputs];
                let p = 1.0 / self.elementary_choices() as f64;
                loop {
                    merged.insert(Member::Table { q, l, bins: table.clone() }, p);
                    if !seq::advance(&mut table, &radix) {
                        break;
                    }
                }
            }
            Shape::Concat(a, b) => {
                let sa = a.enumerate_support(cap)?;
                let sb = b.enumerate_support(cap)?;
                for (x, px) in &sa {
                    for (y, py) in &sb {
                        *merged.entry(x.stack(y, q, n)?).or_insert(0.0) += px * py;
                    }
                }
            }
        }
        Ok(merged.into_iter().collect())
    }

    /// Enumerates once and keeps what the verifiers need.
    pub fn enumerate(&self, cap: u128) -> Result<EnumeratedEnsemble> {
        let support = self.enumerate_support(cap)?;
        EnumeratedEnsemble::new(self.clone(), support)
    }
}

/// `l x n` sparse matrix drawn as described for [`Family::Sparse`].
///
/// Each draw consumes exactly one `u64` from the generator, reduced modulo
/// `l(q-1)` into a row `j` and a nonzero value `a`; the value is added to
/// entry `(j, i)`. Column `i` uses draws `τi .. τ(i+1)`.
pub fn generate_sparse(q: usize, l: usize, n: usize, tau: usize, seed: u64) -> Result<FieldMatrix> {
    Ensemble::sparse(q, l, n, tau)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sparse_from_rng(q, l, n, tau, &mut rng))
}

fn sparse_from_rng<R: RngCore + ?Sized>(q: usize, l: usize, n: usize, tau: usize, rng: &mut R) -> FieldMatrix {
    let options = (l * (q - 1)) as u64;
    let mut dense = vec![vec![0usize; n]; l];
    for i in 0..n {
        for _ in 0..tau {
            let v = (rng.next_u64() % options) as usize;
            let (j, a) = (v / (q - 1), 1 + v % (q - 1));
            dense[j][i] = (dense[j][i] + a) % q;
        }
    }
    FieldMatrix::from_dense_with_cols(q, n, &dense).expect("valid shape")
}

/// Law of one sparse column, as exact counts out of `(l(q-1))^τ`.
fn sparse_column_law(q: usize, l: usize, tau: usize) -> (BTreeMap<Vec<usize>, u64>, u64) {
    let options = l * (q - 1);
    let mut law = BTreeMap::new();
    let mut draws = vec![0usize; tau];
    let radix = vec![options; tau];
    let mut total = 0u64;
    loop {
        let mut col = vec![0; l];
        for &v in &draws {
            let (j, a) = (v / (q - 1), 1 + v % (q - 1));
            col[j] = (col[j] + a) % q;
        }
        *law.entry(col).or_insert(0) += 1;
        total += 1;
        if !seq::advance(&mut draws, &radix) {
            break;
        }
    }
    (law, total)
}

fn sparse_support(q: usize, l: usize, n: usize, tau: usize) -> Vec<(FieldMatrix, f64)> {
    let (law, total) = sparse_column_law(q, l, tau);
    let cols: Vec<(Vec<usize>, f64)> = law.into_iter().map(|(c, k)| (c, k as f64 / total as f64)).collect();
    let radix = vec![cols.len(); n];
    let mut pick = vec![0; n];
    let mut out = Vec::new();
    loop {
        let mut dense = vec![vec![0; n]; l];
        let mut p = 1.0;
        for (i, &k) in pick.iter().enumerate() {
            for j in 0..l {
                dense[j][i] = cols[k].0[j];
            }
            p *= cols[k].1;
        }
        out.push((FieldMatrix::from_dense_with_cols(q, n, &dense).expect("valid shape"), p));
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    out
}

/// Stacked ensemble `u -> (Au, A'u)` of two independent ensembles.
pub fn concat_ensembles(a: &Ensemble, b: &Ensemble) -> Result<Ensemble> {
    if a.q != b.q || a.n != b.n {
        return Err(Error::Dimension(format!(
            "domains GF({})^{} and GF({})^{} differ",
            a.q, a.n, b.q, b.n
        )));
    }
    Ok(Ensemble { q: a.q, l: a.l + b.l, n: a.n, shape: Shape::Concat(Box::new(a.clone()), Box::new(b.clone())) })
}

/// Uniform syndrome `Au` with `u` uniform on `U^n`, i.e. uniform on `Im A`.
pub fn sample_image<R: Rng + ?Sized>(a: &FieldMatrix, rng: &mut R) -> Vec<usize> {
    let u: Vec<usize> = (0..a.cols()).map(|_| rng.gen_range(0..a.q())).collect();
    a.apply(&u)
}

/// An ensemble with its support enumerated.
#[derive(Clone, Debug)]
pub struct EnumeratedEnsemble {
    pub ensemble: Ensemble,
    pub support: Vec<(Member, f64)>,
    /// `Im 𝒜`: union of the images of all support members, sorted.
    pub image: Vec<Vec<usize>>,
}

impl EnumeratedEnsemble {
    pub fn new(ensemble: Ensemble, support: Vec<(Member, f64)>) -> Result<Self> {
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidDistribution(format!("support mass {total}")));
        }
        let space_size = seq::pow(ensemble.q, ensemble.n);
        let mut image = BTreeSet::new();
        for (m, _) in &support {
            match m {
                Member::Matrix(a) => image.extend(a.image_vectors()),
                Member::Table { .. } => {
                    check_cap("input space", space_size, 1 << 24)?;
                    for i in 0..space_size as usize {
                        image.insert(m.hash(&seq::index_to_vec(i, ensemble.q, ensemble.n)));
                    }
                }
            }
        }
        Ok(Self { ensemble, support, image: image.into_iter().collect() })
    }

    pub fn image_size(&self) -> u128 {
        self.image.len() as u128
    }

    pub fn q(&self) -> usize {
        self.ensemble.q
    }

    pub fn n(&self) -> usize {
        self.ensemble.n
    }
}

/// `(α, β)` together with the `|Im 𝒜|` they are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleProfile {
    pub alpha: f64,
    pub beta: f64,
    pub image_size: u128,
}

impl EnsembleProfile {
    pub fn universal(image_size: u128) -> Self {
        Self { alpha: 1.0, beta: 0.0, image_size }
    }

    /// Profile of the stacked ensemble.
    pub fn concat(&self, other: &EnsembleProfile) -> Self {
        Self {
            alpha: self.alpha * other.alpha,
            beta: self.beta + other.beta,
            image_size: self.image_size.saturating_mul(other.image_size),
        }
    }

    pub fn threshold(&self) -> f64 {
        self.alpha / self.image_size as f64
    }
}

/// Selects the high-weight types `Ĥ` used for α.
#[derive(Clone, Debug, PartialEq)]
pub enum TypeFilter {
    /// Types with Hamming weight at least `w`.
    MinWeight(usize),
    /// An explicit set of count vectors.
    Explicit(BTreeSet<Vec<usize>>),
}

impl TypeFilter {
    /// `MinWeight(ceil(n / 10))`.
    pub fn default_for(n: usize) -> Self {
        TypeFilter::MinWeight(n.div_ceil(10))
    }

    pub fn explicit(types: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let set: BTreeSet<Vec<usize>> = types.into_iter().collect();
        if set.iter().any(|t| t.iter().skip(1).all(|&c| c == 0)) {
            return Err(Error::InvalidParameter("the zero type is not in H".into()));
        }
        Ok(TypeFilter::Explicit(set))
    }

    pub fn contains(&self, counts: &[usize]) -> bool {
        let weight: usize = counts.iter().skip(1).sum();
        if weight == 0 {
            return false;
        }
        match self {
            TypeFilter::MinWeight(w) => weight >= *w,
            TypeFilter::Explicit(set) => set.contains(counts),
        }
    }
}

/// Nonzero types of length `n` over `q` symbols, lexicographic.
pub fn nonzero_types(q: usize, n: usize) -> Vec<Vec<usize>> {
    seq::compositions(n, q).into_iter().filter(|t| t[0] != n).collect()
}

fn counts_of(u: &[usize], q: usize) -> Vec<usize> {
    let mut c = vec![0; q];
    for &x in u {
        c[x] += 1;
    }
    c
}

/// `S(p, t)` for every type, keyed by count vector (zero type included).
pub fn spectrum_table(e: &EnumeratedEnsemble) -> Result<BTreeMap<Vec<usize>, f64>> {
    let (q, n) = (e.q(), e.n());
    check_cap("sequence space", seq::pow(q, n), 1 << 24)?;
    let mut table: BTreeMap<Vec<usize>, f64> = seq::compositions(n, q).into_iter().map(|t| (t, 0.0)).collect();
    for (m, p) in &e.support {
        let a = m
            .as_matrix()
            .ok_or_else(|| Error::InvalidParameter("the spectrum needs a linear ensemble".into()))?;
        let kernel = crate::gf::solve_affine(&crate::gf::CosetSpec::new(a.clone(), vec![0; a.rows()])?);
        for u in kernel.iter() {
            *table.get_mut(&counts_of(&u, q)).expect("every type listed") += p;
        }
    }
    Ok(table)
}

/// `S(p, t)`: expected number of kernel vectors of type `t`.
pub fn spectrum(e: &EnumeratedEnsemble, t: &crate::types::JointType) -> Result<f64> {
    if t.sizes() != [e.q()] || t.n() != e.n() {
        return Err(Error::Dimension("type does not match the ensemble domain".into()));
    }
    Ok(spectrum_table(e)?[t.counts()])
}

/// `S(u_A, t)` for the uniform ensemble of `l x n` matrices:
/// `|class(t)| q^{-l}` for nonzero `t`, 1 for the zero type.
pub fn uniform_spectrum(q: usize, l: usize, counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if counts[0] == n {
        return 1.0;
    }
    seq::multinomial(counts) / seq::pow(q, l) as f64
}

/// α from the high-weight types, β from the rest.
///
/// With `Ĥ` empty the maximum has no terms and α is reported as 0.
pub fn alpha_beta_from_spectrum(e: &EnumeratedEnsemble, filter: &TypeFilter) -> Result<EnsembleProfile> {
    let (q, l) = (e.q(), e.ensemble.l());
    let table = spectrum_table(e)?;
    let mut ratio_max = 0.0f64;
    let mut beta = 0.0;
    for t in nonzero_types(q, e.n()) {
        let s = table[&t];
        if filter.contains(&t) {
            let su = uniform_spectrum(q, l, &t);
            if su <= 0.0 {
                return Err(Error::InvalidParameter(format!("uniform spectrum vanishes at {t:?}")));
            }
            ratio_max = ratio_max.max(s / su);
        } else {
            beta += s;
        }
    }
    let image_size = e.image_size();
    let alpha = image_size as f64 / seq::pow(q, l) as f64 * ratio_max;
    Ok(EnsembleProfile { alpha, beta, image_size })
}

/// Collision probabilities `p({A : Au = Au'})` for all pairs of `U^n`,
/// as a flat `N x N` table in lexicographic order.
pub struct CollisionTable {
    q: usize,
    pub space: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl CollisionTable {
    pub fn new(e: &EnumeratedEnsemble, cap: u128) -> Result<Self> {
        let space = seq::all_sequences(e.q(), e.n(), cap)?;
        let size = space.len();
        check_cap("collision pairs", (size * size) as u128, cap.saturating_mul(cap))?;
        let mut probs = vec![0.0; size * size];
        for (m, p) in &e.support {
            let hashes = m.hash_all(&space);
            let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
            for (i, &h) in hashes.iter().enumerate() {
                buckets.entry(h).or_default().push(i);
            }
            for idx in buckets.values() {
                for &i in idx {
                    for &j in idx {
                        probs[i * size + j] += p;
                    }
                }
            }
        }
        Ok(Self { q: e.q(), space, probs })
    }

    pub fn get(&self, u: &[usize], v: &[usize]) -> f64 {
        let q = self.q;
        self.probs[seq::vec_to_index(u, q) * self.space.len() + seq::vec_to_index(v, q)]
    }
}

/// `p({A : Au = Au'})` by direct summation over the support.
pub fn collision_prob(e: &EnumeratedEnsemble, u: &[usize], v: &[usize]) -> Result<f64> {
    let (q, n) = (e.q(), e.n());
    for w in [u, v] {
        if w.len() != n || w.iter().any(|&x| x >= q) {
            return Err(Error::Dimension(format!("{w:?} is not in GF({q})^{n}")));
        }
    }
    Ok(e.support.iter().filter(|(m, _)| m.hash(u) == m.hash(v)).map(|(_, p)| p).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashCheck {
    pub u: Vec<usize>,
    pub lhs_sum: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashReport {
    pub holds: bool,
    pub max_lhs: f64,
    pub per_u: Vec<HashCheck>,
}

/// Checks the strong hash inequality for every `u`: the collision mass over
/// `u' ≠ u` whose collision probability exceeds `α/|Im 𝒜|` is at most β.
pub fn verify_strong_hash(e: &EnumeratedEnsemble, profile: &EnsembleProfile) -> Result<HashReport> {
    let table = CollisionTable::new(e, 1 << 12)?;
    let size = table.space.len();
    let threshold = profile.threshold();
    let mut per_u = Vec::with_capacity(size);
    for i in 0..size {
        let lhs_sum: f64 = (0..size)
            .filter(|&j| j != i)
            .map(|j| table.probs[i * size + j])
            .filter(|&p| p > threshold + TOL)
            .fold(0.0, |a, p| a + p);
        per_u.push(HashCheck { u: table.space[i].clone(), lhs_sum, holds: lhs_sum <= profile.beta + TOL });
    }
    Ok(HashReport {
        holds: per_u.iter().all(|c| c.holds),
        max_lhs: per_u.iter().map(|c| c.lhs_sum).fold(0.0, f64::max),
        per_u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Whash,
    Crp,
    Sp,
    CrossCrp,
    CrossSp,
    MultiCrp,
    MultiSp,
    LemE,
}

/// Explicit sets for [`verify_bound`]. Each element is a tuple with one
/// sequence per ensemble (a single sequence for the one-ensemble lemmas).
#[derive(Clone, Debug, Default)]
pub struct BoundSets {
    /// `T`, or `G` for the collision lemmas.
    pub t: Vec<Vec<Vec<usize>>>,
    /// `T'` for the pairwise sum.
    pub t_prime: Vec<Vec<Vec<usize>>>,
    /// The fixed point `u` (or `u_K`).
    pub point: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lemma: Lemma,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Computes one lemma's left side exactly and its right side from the
/// supplied profiles; holds iff `lhs <= rhs + 1e-12`.
pub fn verify_bound(
    lemma: Lemma,
    ensembles: &[&EnumeratedEnsemble],
    profiles: &[EnsembleProfile],
    sets: &BoundSets,
) -> Result<BoundReport> {
    let k = ensembles.len();
    let want = match lemma {
        Lemma::Whash | Lemma::Crp | Lemma::Sp | Lemma::LemE => Some(1),
        Lemma::CrossCrp | Lemma::CrossSp => Some(2),
        Lemma::MultiCrp | Lemma::MultiSp => None,
    };
    if k == 0 || want.is_some_and(|w| w != k) {
        return Err(Error::InvalidParameter(format!("{lemma:?} does not take {k} ensembles")));
    }
    if profiles.len() != k {
        return Err(Error::InvalidParameter(format!("{lemma:?} needs {k} profiles, got {}", profiles.len())));
    }
    if profiles.iter().any(|p| p.image_size == 0) {
        return Err(Error::InvalidParameter("profile has an empty image".into()));
    }
    let check_tuple = |t: &Vec<Vec<usize>>| -> Result<()> {
        if t.len() != k || t.iter().zip(ensembles).any(|(x, e)| x.len() != e.n() || x.iter().any(|&s| s >= e.q())) {
            return Err(Error::Dimension(format!("set element {t:?} does not fit the domains")));
        }
        Ok(())
    };
    sets.t.iter().chain(&sets.t_prime).chain(sets.point.iter()).try_for_each(check_tuple)?;
    let point = || sets.point.clone().ok_or_else(|| Error::InvalidParameter(format!("{lemma:?} needs a point")));

    let (lhs, rhs) = match lemma {
        Lemma::Whash => {
            let e = ensembles[0];
            let p = &profiles[0];
            let mut lhs = 0.0;
            for u in &sets.t {
                for v in &sets.t_prime {
                    lhs += collision_prob(e, &u[0], &v[0])?;
                }
            }
            let tt: BTreeSet<&Vec<Vec<usize>>> = sets.t.iter().collect();
            let tp: BTreeSet<&Vec<Vec<usize>>> = sets.t_prime.iter().collect();
            let inter = tt.intersection(&tp).count() as f64;
            let (a, b) = (tt.len() as f64, tp.len() as f64);
            (lhs, inter + a * b * p.alpha / p.image_size as f64 + a.min(b) * p.beta)
        }
        Lemma::Crp | Lemma::CrossCrp | Lemma::MultiCrp => {
            let u = point()?;
            let g = dedup(&sets.t);
            let lhs = product_support(ensembles, |members, prob| {
                let target: Vec<Vec<usize>> = members.iter().zip(&u).map(|(m, x)| m.hash(x)).collect();
                let hit = g
                    .iter()
                    .filter(|w| **w != u)
                    .any(|w| members.iter().zip(w.iter()).zip(&target).all(|((m, x), t)| m.hash(x) == *t));
                if hit {
                    prob
                } else {
                    0.0
                }
            });
            (lhs, multi_crp_rhs(&g, profiles))
        }
        Lemma::Sp | Lemma::CrossSp | Lemma::MultiSp => {
            let t = dedup(&sets.t);
            let total_images: f64 = ensembles.iter().map(|e| e.image_size() as f64).product();
            let lhs = product_support(ensembles, |members, prob| {
                let hit: BTreeSet<Vec<Vec<usize>>> =
                    t.iter().map(|w| members.iter().zip(w.iter()).map(|(m, x)| m.hash(x)).collect()).collect();
                prob * (1.0 - hit.len() as f64 / total_images)
            });
            (lhs, multi_sp_rhs(&t, profiles))
        }
        Lemma::LemE => {
            let e = ensembles[0];
            let u = point()?;
            let rhs = 1.0 / e.image_size() as f64;
            let mut worst: f64 = 0.0;
            let mut joint = 0.0;
            for (m, p) in &e.support {
                let au = m.hash(&u[0]);
                let hits = e.image.iter().filter(|a| **a == au).count() as f64;
                let inner = hits / e.image_size() as f64;
                worst = worst.max((inner - rhs).abs());
                joint += p * inner;
            }
            let holds = worst <= TOL && (joint - rhs).abs() <= TOL;
            return Ok(BoundReport { lemma, holds, lhs: joint, rhs });
        }
    };
    Ok(BoundReport { lemma, holds: lhs <= rhs + TOL, lhs, rhs })
}

fn dedup(set: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    let s: BTreeSet<Vec<Vec<usize>>> = set.iter().cloned().collect();
    s.into_iter().collect()
}

/// Sums `f(members, prob)` over the product of the supports.
fn product_support(ensembles: &[&EnumeratedEnsemble], mut f: impl FnMut(&[&Member], f64) -> f64) -> f64 {
    let radix: Vec<usize> = ensembles.iter().map(|e| e.support.len()).collect();
    let mut pick = vec![0; ensembles.len()];
    let mut acc = 0.0;
    loop {
        let members: Vec<&Member> = pick.iter().zip(ensembles).map(|(&i, e)| &e.support[i].0).collect();
        let prob: f64 = pick.iter().zip(ensembles).map(|(&i, e)| e.support[i].1).product();
        acc += f(&members, prob);
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    acc
}

/// `|T_{J|J^c}|`: 1 for empty `J`, `|T|` for all of `K`, otherwise the
/// largest section of `T` over a fixed `J^c` part.
pub fn max_section(set: &[Vec<Vec<usize>>], j_mask: usize, k: usize) -> usize {
    let full = (1 << k) - 1;
    if j_mask == 0 {
        return 1;
    }
    if j_mask == full {
        return set.len();
    }
    let mut sections: BTreeMap<Vec<&Vec<usize>>, usize> = BTreeMap::new();
    for w in set {
        let key: Vec<&Vec<usize>> = (0..k).filter(|i| j_mask >> i & 1 == 0).map(|i| &w[i]).collect();
        *sections.entry(key).or_insert(0) += 1;
    }
    sections.values().copied().max().unwrap_or(0)
}

fn sub_alpha(profiles: &[EnsembleProfile], mask: usize) -> f64 {
    profiles.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.alpha).product()
}

/// `Π_{j ∈ J} (β_j + 1) - 1`.
fn sub_beta(profiles: &[EnsembleProfile], mask: usize) -> f64 {
    profiles.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.beta + 1.0).product::<f64>() - 1.0
}

fn sub_image(profiles: &[EnsembleProfile], mask: usize) -> f64 {
    profiles.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.image_size as f64).product()
}

fn multi_crp_rhs(g: &[Vec<Vec<usize>>], profiles: &[EnsembleProfile]) -> f64 {
    let k = profiles.len();
    let full = (1 << k) - 1;
    let mut rhs = sub_beta(profiles, full);
    for j in 1..=full {
        let jc = full & !j;
        rhs += max_section(g, j, k) as f64 * sub_alpha(profiles, j) * (sub_beta(profiles, jc) + 1.0)
            / sub_image(profiles, j);
    }
    rhs
}

fn multi_sp_rhs(t: &[Vec<Vec<usize>>], profiles: &[EnsembleProfile]) -> f64 {
    let k = profiles.len();
    let full = (1 << k) - 1;
    let size = t.len() as f64;
    let mut rhs = sub_alpha(profiles, full) - 1.0;
    for j in 0..full {
        let jc = full & !j;
        rhs += sub_image(profiles, jc) * max_section(t, j, k) as f64 * sub_alpha(profiles, j)
            * (sub_beta(profiles, jc) + 1.0)
            / size;
    }
    rhs
}
