//! Broadcast channel coding with `k` receivers and private messages.
//!
//! Receiver `j` owns an auxiliary sequence `u_j`. The encoder picks the
//! minimum-divergence tuple in the coset intersection fixed by the shared
//! vectors `a_j` and the messages `m_j`, and sends `f(u_K)` symbolwise.
//! Receiver `j` recovers `u_j` from `a_j` and `y_j`, then reads `A'_j u_j`.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution as _;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_image, Ensemble, Family};
use crate::error::{check_cap, Error, Result};
use crate::gf::{solve_affine, CosetSpec, FieldMatrix};
use crate::lp_md::{simplex_solve, Constraint, LinearProgram, LpStatus, Relation, Sense};
use crate::mc::{trial_rng, Estimate};
use crate::seq;
use crate::slepian_wolf::{coset_product_search, DecodeOutcome, DEFAULT_SEARCH_CAP};
use crate::types::{index_tuple, tuple_index, type_cond_divergence, type_divergence, CondDistribution, Distribution};

/// Bound on `messages x output tuples` walked by [`bc_error_exact`].
pub const DEFAULT_EXACT_CAP: u128 = 1 << 28;
const TABLE_CAP: u128 = 1 << 16;

/// Symbolwise map from auxiliary tuples to channel inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolMap {
    /// `x = table[index(u_K)]`.
    Deterministic(Vec<usize>),
    /// `μ_{X|U_K}` with the auxiliary tuple as context.
    Stochastic(CondDistribution),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BcProblem {
    channel: CondDistribution,
    aux: Distribution,
    map: SymbolMap,
    /// `W(y_K | u_K)`, `[u * |Y_K| + y]`.
    effective: Vec<f64>,
}

#[derive(Deserialize, Serialize)]
struct RawProblem {
    /// `μ_{Y_K|X}` with target sizes `|Y_j|` and context `[|X|]`.
    channel: CondDistribution,
    aux: Distribution,
    map: SymbolMap,
}

impl BcProblem {
    pub fn new(channel: CondDistribution, aux: Distribution, map: SymbolMap) -> Result<Self> {
        // re-run table validation for deserialized input
        let channel = CondDistribution::new(channel.target_sizes().to_vec(), channel.context_sizes().to_vec(), channel.table().to_vec())?;
        let k = aux.arity();
        if channel.target_sizes().len() != k {
            return Err(Error::Dimension(format!("{} outputs for {k} auxiliary sources", channel.target_sizes().len())));
        }
        if channel.context_sizes().len() != 1 {
            return Err(Error::Dimension("the channel input must be a single coordinate".into()));
        }
        let x_size = channel.context_sizes()[0];
        let u_cells = aux.cells();
        let mut x_given_u = vec![0.0; u_cells * x_size];
        match &map {
            SymbolMap::Deterministic(t) => {
                if t.len() != u_cells {
                    return Err(Error::Dimension(format!("symbol map has {} entries for {u_cells} tuples", t.len())));
                }
                if let Some(&x) = t.iter().find(|&&x| x >= x_size) {
                    return Err(Error::InvalidEntry(format!("symbol {x} outside an input alphabet of {x_size}")));
                }
                for (u, &x) in t.iter().enumerate() {
                    x_given_u[u * x_size + x] = 1.0;
                }
            }
            SymbolMap::Stochastic(c) => {
                let c = CondDistribution::new(c.target_sizes().to_vec(), c.context_sizes().to_vec(), c.table().to_vec())?;
                if c.target_sizes() != [x_size] || c.context_sizes() != aux.sizes() {
                    return Err(Error::Dimension("stochastic map must be μ(x | u_K)".into()));
                }
                x_given_u.copy_from_slice(c.table());
            }
        }
        let y_cells = channel.target_cells();
        let mut effective = vec![0.0; u_cells * y_cells];
        for u in 0..u_cells {
            for x in 0..x_size {
                let px = x_given_u[u * x_size + x];
                if px > 0.0 {
                    for (y, &py) in channel.slice(x).iter().enumerate() {
                        effective[u * y_cells + y] += px * py;
                    }
                }
            }
        }
        Ok(Self { channel, aux, map, effective })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text)?;
        Self::new(raw.channel, raw.aux, raw.map)
    }

    pub fn to_json(&self) -> String {
        let raw = RawProblem { channel: self.channel.clone(), aux: self.aux.clone(), map: self.map.clone() };
        serde_json::to_string_pretty(&raw).expect("plain data")
    }

    /// `X = U_K` (indexed), `Y_j = U_j`.
    pub fn noiseless_split(aux: Distribution) -> Result<Self> {
        let k = aux.arity();
        let cells = aux.cells();
        let mut table = vec![0.0; cells * cells];
        for x in 0..cells {
            table[x * cells + x] = 1.0;
        }
        let channel = CondDistribution::new(aux.sizes().to_vec(), vec![cells], table)?;
        let _ = k;
        Self::new(channel, aux, SymbolMap::Deterministic((0..cells).collect()))
    }

    pub fn k(&self) -> usize {
        self.aux.arity()
    }

    pub fn aux(&self) -> &Distribution {
        &self.aux
    }

    pub fn channel(&self) -> &CondDistribution {
        &self.channel
    }

    pub fn map(&self) -> &SymbolMap {
        &self.map
    }

    pub fn u_sizes(&self) -> &[usize] {
        self.aux.sizes()
    }

    pub fn y_sizes(&self) -> &[usize] {
        self.channel.target_sizes()
    }

    pub fn x_size(&self) -> usize {
        self.channel.context_sizes()[0]
    }

    /// Per-symbol law of `y_K` given `u_K`.
    pub fn effective_channel(&self, u: usize) -> &[f64] {
        let yc = self.channel.target_cells();
        &self.effective[u * yc..(u + 1) * yc]
    }

    /// `μ_{U_j | Y_j}` from the joint law.
    pub fn decoder_law(&self, j: usize) -> Result<CondDistribution> {
        bc_build_joint(self)?.conditional(&[j], &[self.k() + 1 + j])
    }
}

/// Joint law of `(U_1..U_k, X, Y_1..Y_k)`.
pub fn bc_build_joint(p: &BcProblem) -> Result<Distribution> {
    let k = p.k();
    let mut sizes = p.u_sizes().to_vec();
    sizes.push(p.x_size());
    sizes.extend_from_slice(p.y_sizes());
    let mut probs = vec![0.0; sizes.iter().product()];
    let yc = p.channel.target_cells();
    for u in 0..p.aux.cells() {
        let pu = p.aux.probs()[u];
        if pu == 0.0 {
            continue;
        }
        let ut = p.aux.tuple(u);
        for x in 0..p.x_size() {
            let px = match &p.map {
                SymbolMap::Deterministic(t) => f64::from(u8::from(t[u] == x)),
                SymbolMap::Stochastic(c) => c.p(x, u),
            };
            if px == 0.0 {
                continue;
            }
            for y in 0..yc {
                let py = p.channel.p(y, x);
                if py == 0.0 {
                    continue;
                }
                let mut t = ut.clone();
                t.push(x);
                t.extend(index_tuple(p.y_sizes(), y));
                debug_assert_eq!(t.len(), 2 * k + 1);
                probs[tuple_index(&sizes, &t)] += pu * px * py;
            }
        }
    }
    // absorb rounding so validation at 1e-12 passes
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    Distribution::new(sizes, probs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConstraint {
    pub subset: Vec<usize>,
    pub rate_sum: f64,
    /// `H(U_J) − Σ_J H(U_j|Y_j)`.
    pub bound: f64,
    /// `Σ_J I(U_j;Y_j) − [Σ_J H(U_j) − H(U_J)]`.
    pub bound_mi_form: f64,
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub inside: bool,
    pub constraints: Vec<RegionConstraint>,
}

struct Entropies {
    /// `H(U_J)` by subset mask.
    h_u: Vec<f64>,
    /// `H(U_j | Y_j)`.
    h_u_given_y: Vec<f64>,
    h_uj: Vec<f64>,
    mi: Vec<f64>,
}

fn entropies(p: &BcProblem) -> Result<Entropies> {
    let k = p.k();
    let joint = bc_build_joint(p)?;
    let mut h_u = vec![0.0; 1 << k];
    for (mask, slot) in h_u.iter_mut().enumerate().skip(1) {
        let coords: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        *slot = p.aux.marginal(&coords)?.entropy();
    }
    let mut h_u_given_y = Vec::with_capacity(k);
    let mut mi = Vec::with_capacity(k);
    let mut h_uj = Vec::with_capacity(k);
    for j in 0..k {
        h_u_given_y.push(joint.cond_entropy_of(&[j], &[k + 1 + j])?);
        mi.push(joint.mutual_information(&[j], &[k + 1 + j])?);
        h_uj.push(h_u[1 << j]);
    }
    Ok(Entropies { h_u, h_u_given_y, h_uj, mi })
}

/// Strict test of `Σ_J R_j < H(U_J) − Σ_J H(U_j|Y_j)` for every nonempty `J`.
pub fn bc_rate_region(p: &BcProblem, rates: &[f64]) -> Result<RegionReport> {
    let k = p.k();
    if rates.len() != k {
        return Err(Error::Dimension(format!("{} rates for {k} receivers", rates.len())));
    }
    let e = entropies(p)?;
    let mut constraints = Vec::new();
    for mask in 1usize..1 << k {
        let subset: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let rate_sum: f64 = subset.iter().map(|&j| rates[j]).sum();
        let bound = e.h_u[mask] - subset.iter().map(|&j| e.h_u_given_y[j]).sum::<f64>();
        let bound_mi_form = subset.iter().map(|&j| e.mi[j]).sum::<f64>() - (subset.iter().map(|&j| e.h_uj[j]).sum::<f64>() - e.h_u[mask]);
        constraints.push(RegionConstraint { subset, rate_sum, bound, bound_mi_form, slack: bound - rate_sum, satisfied: rate_sum < bound });
    }
    Ok(RegionReport { inside: constraints.iter().all(|c| c.satisfied), constraints })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Message rates `R_j`.
    pub message_rates: Vec<f64>,
    /// Shared-vector rates `r_j`.
    pub shared_rates: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Every strict inequality a parameter tuple must satisfy, in order:
/// `r_j > H(U_j|Y_j)`, then `Σ_J (R_j + r_j) < H(U_J) − ε` for `J ⊊ K`,
/// then the two-sided condition on the full sum.
pub fn bc_param_checks(p: &BcProblem, params: &RateParams) -> Result<Vec<ParamCheck>> {
    let k = p.k();
    if params.message_rates.len() != k || params.shared_rates.len() != k {
        return Err(Error::Dimension(format!("parameters for {k} receivers expected")));
    }
    let e = entropies(p)?;
    let mut out = vec![ParamCheck { name: "epsilon > 0".into(), lhs: params.epsilon, rhs: 0.0, holds: params.epsilon > 0.0 }];
    for j in 0..k {
        let r = params.shared_rates[j];
        out.push(ParamCheck { name: format!("r_{j} > H(U_{j}|Y_{j})"), lhs: r, rhs: e.h_u_given_y[j], holds: r > e.h_u_given_y[j] });
    }
    let full = (1usize << k) - 1;
    let sum = |mask: usize| (0..k).filter(|j| mask >> j & 1 == 1).map(|j| params.message_rates[j] + params.shared_rates[j]).sum::<f64>();
    for mask in 1..full {
        let lhs = sum(mask);
        let rhs = e.h_u[mask] - params.epsilon;
        out.push(ParamCheck { name: format!("sum over {mask:#b} < H - eps"), lhs, rhs, holds: lhs < rhs });
    }
    let lhs = sum(full);
    out.push(ParamCheck { name: "full sum < H(U_K)".into(), lhs, rhs: e.h_u[full], holds: lhs < e.h_u[full] });
    let rhs = e.h_u[full] - params.epsilon;
    out.push(ParamCheck { name: "full sum > H(U_K) - eps".into(), lhs, rhs, holds: lhs > rhs });
    Ok(out)
}

/// Parameters `(r_j, ε)` for a message-rate tuple, or `None`.
///
/// With `r_j = H(U_j|Y_j) + s_j`, a linear program maximizes the smallest
/// margin `δ` across all inequalities (including `s_j ≥ δ` and `ε ≥ δ`); a
/// tuple exists iff the optimal `δ` is positive. The optimum is then
/// re-checked against the strict inequalities.
pub fn bc_feasible_params(p: &BcProblem, message_rates: &[f64]) -> Result<Option<RateParams>> {
    let k = p.k();
    if message_rates.len() != k {
        return Err(Error::Dimension(format!("{} rates for {k} receivers", message_rates.len())));
    }
    if !bc_rate_region(p, message_rates)?.inside {
        return Ok(None);
    }
    let e = entropies(p)?;
    // variables: s_0..s_{k-1}, ε, δ
    let (eps, delta) = (k, k + 1);
    let base = |mask: usize| (0..k).filter(|j| mask >> j & 1 == 1).map(|j| message_rates[j] + e.h_u_given_y[j]).sum::<f64>();
    let s_terms = |mask: usize| (0..k).filter(|j| mask >> j & 1 == 1).map(|j| (j, 1.0)).collect::<Vec<_>>();
    let full = (1usize << k) - 1;
    let mut cons = Vec::new();
    for j in 0..k {
        cons.push(Constraint::new(vec![(j, 1.0), (delta, -1.0)], Relation::Ge, 0.0));
    }
    cons.push(Constraint::new(vec![(eps, 1.0), (delta, -1.0)], Relation::Ge, 0.0));
    cons.push(Constraint::new(vec![(delta, 1.0)], Relation::Le, 1.0));
    for mask in 1..full {
        let mut c = s_terms(mask);
        c.push((eps, 1.0));
        c.push((delta, 1.0));
        cons.push(Constraint::new(c, Relation::Le, e.h_u[mask] - base(mask)));
    }
    let mut c = s_terms(full);
    c.push((delta, 1.0));
    cons.push(Constraint::new(c, Relation::Le, e.h_u[full] - base(full)));
    let mut c = s_terms(full);
    c.push((eps, 1.0));
    c.push((delta, -1.0));
    cons.push(Constraint::new(c, Relation::Ge, e.h_u[full] - base(full)));
    let mut objective = vec![0.0; k + 2];
    objective[delta] = 1.0;
    let sol = simplex_solve(&LinearProgram::new(k + 2, Sense::Maximize, objective, cons)?)?;
    if sol.status != LpStatus::Optimal || sol.values[delta] <= 1e-9 {
        return Ok(None);
    }
    let params = RateParams {
        message_rates: message_rates.to_vec(),
        shared_rates: (0..k).map(|j| e.h_u_given_y[j] + sol.values[j]).collect(),
        epsilon: sol.values[eps],
    };
    Ok(bc_param_checks(p, &params)?.iter().all(|c| c.holds).then_some(params))
}

/// Matrices and shared vector of one receiver.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverCode {
    pub shared: FieldMatrix,
    pub message: FieldMatrix,
    pub shared_vector: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BcCode {
    receivers: Vec<ReceiverCode>,
    n: usize,
}

impl BcCode {
    pub fn new(receivers: Vec<ReceiverCode>) -> Result<Self> {
        let n = receivers.first().ok_or_else(|| Error::Dimension("no receivers".into()))?.shared.cols();
        for (j, r) in receivers.iter().enumerate() {
            if r.shared.cols() != n || r.message.cols() != n {
                return Err(Error::Dimension(format!("receiver {j} disagrees on the block length")));
            }
            if r.shared.q() != r.message.q() {
                return Err(Error::ModulusMismatch(r.shared.q(), r.message.q()));
            }
            if !r.shared.in_image(&r.shared_vector)? {
                return Err(Error::InvalidEntry(format!("receiver {j}: shared vector is not in Im A")));
            }
        }
        Ok(Self { receivers, n })
    }

    pub fn receivers(&self) -> &[ReceiverCode] {
        &self.receivers
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn rate(a: &FieldMatrix, n: usize) -> f64 {
        a.rank() as f64 * (a.q() as f64).log2() / n as f64
    }

    /// `r_j = log2 |Im A_j| / n`.
    pub fn shared_rates(&self) -> Vec<f64> {
        self.receivers.iter().map(|r| Self::rate(&r.shared, self.n)).collect()
    }

    /// `R_j = log2 |Im A'_j| / n`.
    pub fn message_rates(&self) -> Vec<f64> {
        self.receivers.iter().map(|r| Self::rate(&r.message, self.n)).collect()
    }

    pub fn message_sets(&self) -> Vec<Vec<Vec<usize>>> {
        self.receivers.iter().map(|r| r.message.image_vectors()).collect()
    }

    fn check(&self, p: &BcProblem) -> Result<()> {
        if self.receivers.len() != p.k() {
            return Err(Error::Dimension(format!("{} receivers for a {}-receiver problem", self.receivers.len(), p.k())));
        }
        for (j, (r, &s)) in self.receivers.iter().zip(p.u_sizes()).enumerate() {
            if s > r.shared.q() {
                return Err(Error::Dimension(format!("receiver {j}: {s} auxiliary symbols over GF({})", r.shared.q())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodeOutcome {
    /// `x` is present for a deterministic symbol map.
    Encoded { u: Vec<Vec<usize>>, x: Option<Vec<usize>> },
    /// Some coset intersection is empty.
    Failure,
}

/// Minimum-divergence encoder over `∩_j C_{A_j}(a_j) ∩ C_{A'_j}(m_j)`.
pub fn bc_encode(code: &BcCode, p: &BcProblem, messages: &[Vec<usize>], cap: u128) -> Result<EncodeOutcome> {
    code.check(p)?;
    if messages.len() != p.k() {
        return Err(Error::Dimension(format!("{} messages for {} receivers", messages.len(), p.k())));
    }
    let mut stacked = Vec::with_capacity(p.k());
    let mut targets = Vec::with_capacity(p.k());
    for (j, (r, m)) in code.receivers.iter().zip(messages).enumerate() {
        if !r.message.in_image(m)? {
            return Err(Error::InvalidEntry(format!("message {j} is not in Im A'")));
        }
        stacked.push(r.shared.stack(&r.message)?);
        let mut t = r.shared_vector.clone();
        t.extend_from_slice(m);
        targets.push(t);
    }
    let out = coset_product_search(&stacked, &targets, p.u_sizes(), cap, |t| type_divergence(t, p.aux.probs()), |_| true)?;
    Ok(match out {
        DecodeOutcome::Failure => EncodeOutcome::Failure,
        DecodeOutcome::Decoded { tuple, .. } => {
            let x = match &p.map {
                SymbolMap::Deterministic(t) => Some(
                    (0..code.n)
                        .map(|i| {
                            let ui: Vec<usize> = tuple.iter().map(|u| u[i]).collect();
                            t[tuple_index(p.u_sizes(), &ui)]
                        })
                        .collect(),
                ),
                SymbolMap::Stochastic(_) => None,
            };
            EncodeOutcome::Encoded { u: tuple, x }
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcDecoder {
    /// `argmax μ_{U|Y}(u'|y)` over the coset.
    Ml,
    /// `argmin D(ν_{u'|y} ‖ μ_{U|Y} | ν_y)` over the coset.
    Md,
}

/// One receiver's decoding rule, with the coset and law resolved once.
pub struct ReceiverDecoder {
    message: FieldMatrix,
    members: Vec<Vec<usize>>,
    law: CondDistribution,
    variant: BcDecoder,
    u_size: usize,
    y_size: usize,
}

impl ReceiverDecoder {
    pub fn new(code: &BcCode, p: &BcProblem, j: usize, variant: BcDecoder, cap: u128) -> Result<Self> {
        code.check(p)?;
        let r = code.receivers.get(j).ok_or_else(|| Error::Dimension(format!("no receiver {j}")))?;
        let coset = solve_affine(&CosetSpec::new(r.shared.clone(), r.shared_vector.clone())?);
        check_cap("decoder coset", coset.size(), cap)?;
        Ok(Self {
            message: r.message.clone(),
            members: coset.to_vec(),
            law: p.decoder_law(j)?,
            variant,
            u_size: p.u_sizes()[j],
            y_size: p.y_sizes()[j],
        })
    }

    fn score(&self, u: &[usize], y: &[usize]) -> f64 {
        if u.iter().any(|&s| s >= self.u_size) {
            return f64::INFINITY;
        }
        let mut counts = vec![0usize; self.u_size * self.y_size];
        for (&ui, &yi) in u.iter().zip(y) {
            counts[yi * self.u_size + ui] += 1;
        }
        match self.variant {
            BcDecoder::Md => type_cond_divergence(&counts, &self.law),
            BcDecoder::Ml => {
                let mut acc = 0.0;
                for (cell, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        let m = self.law.p(cell % self.u_size, cell / self.u_size);
                        if m <= 0.0 {
                            return f64::INFINITY;
                        }
                        acc -= c as f64 * m.log2();
                    }
                }
                acc
            }
        }
    }

    /// Winner in the coset; lexicographic ties.
    pub fn estimate_u(&self, y: &[usize]) -> &[usize] {
        let mut best = (f64::INFINITY, 0);
        for (i, u) in self.members.iter().enumerate() {
            let s = self.score(u, y);
            if s < best.0 {
                best = (s, i);
            }
        }
        &self.members[best.1]
    }

    pub fn decode(&self, y: &[usize]) -> Vec<usize> {
        self.message.apply(self.estimate_u(y))
    }
}

pub fn bc_decode(code: &BcCode, p: &BcProblem, j: usize, y: &[usize], variant: BcDecoder) -> Result<Vec<usize>> {
    if y.len() != code.n || y.iter().any(|&s| s >= p.y_sizes().get(j).copied().unwrap_or(0)) {
        return Err(Error::Dimension(format!("observation of receiver {j} has the wrong shape")));
    }
    Ok(ReceiverDecoder::new(code, p, j, variant, DEFAULT_SEARCH_CAP)?.decode(y))
}

fn decode_tables(code: &BcCode, p: &BcProblem, variant: BcDecoder, cap: u128) -> Result<Vec<Vec<Vec<usize>>>> {
    (0..p.k())
        .map(|j| {
            let total = seq::pow(p.y_sizes()[j], code.n);
            check_cap("receiver outputs", total, cap)?;
            let dec = ReceiverDecoder::new(code, p, j, variant, DEFAULT_SEARCH_CAP)?;
            Ok((0..total as usize).into_par_iter().map(|i| dec.decode(&seq::index_to_vec(i, p.y_sizes()[j], code.n))).collect())
        })
        .collect()
}

fn message_tuples(sets: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
    let radix: Vec<usize> = sets.iter().map(Vec::len).collect();
    let mut pick = vec![0; sets.len()];
    let mut out = Vec::new();
    loop {
        out.push(pick.clone());
        if !seq::advance(&mut pick, &radix) {
            break;
        }
    }
    out
}

/// Exact error probability with uniform messages; encoder failures count as
/// errors.
pub fn bc_error_exact(code: &BcCode, p: &BcProblem, variant: BcDecoder, cap: u128) -> Result<f64> {
    code.check(p)?;
    let k = p.k();
    let n = code.n;
    let sets = code.message_sets();
    let n_msgs = sets.iter().fold(1u128, |a, s| a.saturating_mul(s.len() as u128));
    let y_cells = p.channel.target_cells();
    check_cap("messages x outputs", n_msgs.saturating_mul(seq::pow(y_cells, n)), cap)?;
    let tables = decode_tables(code, p, variant, cap)?;
    let y_sizes = p.y_sizes().to_vec();
    let y_tuples: Vec<Vec<usize>> = (0..y_cells).map(|y| index_tuple(&y_sizes, y)).collect();
    let picks = message_tuples(&sets);
    let success: f64 = picks
        .par_iter()
        .map(|pick| -> Result<f64> {
            let m: Vec<Vec<usize>> = pick.iter().zip(&sets).map(|(&i, s)| s[i].clone()).collect();
            let EncodeOutcome::Encoded { u, .. } = bc_encode(code, p, &m, DEFAULT_SEARCH_CAP)? else {
                return Ok(0.0);
            };
            let cells: Vec<usize> = (0..n).map(|i| tuple_index(p.u_sizes(), &u.iter().map(|uj| uj[i]).collect::<Vec<_>>())).collect();
            let mut acc = 0.0;
            walk_outputs(p, &cells, &y_tuples, &y_sizes, 0, 1.0, &mut vec![0; k], &mut |idx, prob| {
                if (0..k).all(|j| tables[j][idx[j]] == m[j]) {
                    acc += prob;
                }
            });
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok((1.0 - success / n_msgs as f64).max(0.0))
}

/// Depth-first walk over output tuples with positive probability.
#[allow(clippy::too_many_arguments)]
fn walk_outputs(
    p: &BcProblem,
    cells: &[usize],
    y_tuples: &[Vec<usize>],
    y_sizes: &[usize],
    pos: usize,
    prob: f64,
    idx: &mut Vec<usize>,
    leaf: &mut impl FnMut(&[usize], f64),
) {
    if pos == cells.len() {
        leaf(idx, prob);
        return;
    }
    for (y, &w) in p.effective_channel(cells[pos]).iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let saved = idx.clone();
        for (j, slot) in idx.iter_mut().enumerate() {
            *slot = *slot * y_sizes[j] + y_tuples[y][j];
        }
        walk_outputs(p, cells, y_tuples, y_sizes, pos + 1, prob * w, idx, leaf);
        *idx = saved;
    }
}

/// Monte Carlo error with uniform messages and a simulated channel.
pub fn bc_error_mc(code: &BcCode, p: &BcProblem, variant: BcDecoder, trials: u64, seed: u64) -> Result<Estimate> {
    code.check(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let k = p.k();
    let n = code.n;
    let sets = code.message_sets();
    let n_msgs = sets.iter().fold(1u128, |a, s| a.saturating_mul(s.len() as u128));
    let encoded: Option<Vec<EncodeOutcome>> = if n_msgs <= TABLE_CAP {
        let picks = message_tuples(&sets);
        Some(
            picks
                .par_iter()
                .map(|pick| {
                    let m: Vec<Vec<usize>> = pick.iter().zip(&sets).map(|(&i, s)| s[i].clone()).collect();
                    bc_encode(code, p, &m, DEFAULT_SEARCH_CAP)
                })
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let tables = decode_tables(code, p, variant, TABLE_CAP).ok();
    let decoders: Vec<ReceiverDecoder> = (0..k).map(|j| ReceiverDecoder::new(code, p, j, variant, DEFAULT_SEARCH_CAP)).collect::<Result<_>>()?;
    let y_sizes = p.y_sizes().to_vec();
    let samplers: Vec<Option<WeightedIndex<f64>>> =
        (0..p.aux.cells()).map(|u| WeightedIndex::new(p.effective_channel(u)).ok()).collect();
    let radix: Vec<usize> = sets.iter().map(Vec::len).collect();
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let mut rng = trial_rng(seed, trial);
            let pick: Vec<usize> = radix.iter().map(|&r| rng.gen_range(0..r)).collect();
            let m: Vec<Vec<usize>> = pick.iter().zip(&sets).map(|(&i, s)| s[i].clone()).collect();
            let out = match &encoded {
                Some(t) => t[pick.iter().zip(&radix).fold(0, |acc, (&i, &r)| acc * r + i)].clone(),
                None => bc_encode(code, p, &m, DEFAULT_SEARCH_CAP)?,
            };
            let EncodeOutcome::Encoded { u, .. } = out else {
                return Ok(1);
            };
            let mut ys = vec![vec![0; n]; k];
            for i in 0..n {
                let cell = tuple_index(p.u_sizes(), &u.iter().map(|uj| uj[i]).collect::<Vec<_>>());
                let sampler = samplers[cell].as_ref().ok_or_else(|| Error::InvalidDistribution("empty channel row".into()))?;
                let y = index_tuple(&y_sizes, sampler.sample(&mut rng));
                for j in 0..k {
                    ys[j][i] = y[j];
                }
            }
            let ok = (0..k).all(|j| match &tables {
                Some(t) => t[j][seq::vec_to_index(&ys[j], y_sizes[j])] == m[j],
                None => decoders[j].decode(&ys[j]) == m[j],
            });
            Ok(u64::from(!ok))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(Estimate::from_counts(errors, trials))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBranch {
    /// `κ(n) = n^ξ`.
    Polynomial,
    /// `κ(n) = 1/√β(n)`.
    InverseRoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaSchedule {
    pub ns: Vec<usize>,
    pub kappa: Vec<f64>,
    pub branch: KappaBranch,
    pub xi: f64,
    /// `κ(n) → ∞` over the range.
    pub diverges: bool,
    /// `κ(n) β_j(n) → 0`, one flag per supplied sequence.
    pub kills_beta: Vec<bool>,
    /// `log κ(n) / n → 0`.
    pub sub_exponential: bool,
}

impl KappaSchedule {
    pub fn holds(&self) -> bool {
        self.diverges && self.sub_exponential && self.kills_beta.iter().all(|&b| b)
    }
}

pub const DEFAULT_KAPPA_RANGE: std::ops::RangeInclusive<usize> = 1..=64;

/// Surrogate for `g(n) → 0` on a finite range: non-increasing over the
/// second half and ending at most half of the peak.
pub fn vanishing(g: &[f64]) -> bool {
    if g.is_empty() {
        return false;
    }
    let half = &g[g.len() / 2..];
    let peak = g.iter().fold(0.0f64, |a, &b| a.max(b));
    half.windows(2).all(|w| w[1] <= w[0] + 1e-15) && *g.last().expect("nonempty") <= 0.5 * peak
}

/// Surrogate for `g(n) → ∞`: non-decreasing over the second half and ending
/// at least twice the start.
pub fn diverging(g: &[f64]) -> bool {
    if g.len() < 2 {
        return false;
    }
    let half = &g[g.len() / 2..];
    half.windows(2).all(|w| w[1] + 1e-15 >= w[0]) && *g.last().expect("nonempty") >= 2.0 * g[0]
}

/// `κ(n) = n^ξ` if `β(n) = o(n^{−ξ})` with `β = max_j β_j`, else `1/√β(n)`.
///
/// `betas[j][i]` is `β_j(ns[i])`.
pub fn kappa_schedule(betas: &[Vec<f64>], ns: &[usize], xi: f64) -> Result<KappaSchedule> {
    if xi <= 0.0 {
        return Err(Error::InvalidParameter(format!("xi = {xi} must be positive")));
    }
    if betas.is_empty() || ns.is_empty() || betas.iter().any(|b| b.len() != ns.len()) {
        return Err(Error::Dimension("each beta sequence needs one value per n".into()));
    }
    if betas.iter().flatten().any(|&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::InvalidParameter("beta values must lie in (0,1]".into()));
    }
    let beta: Vec<f64> = (0..ns.len()).map(|i| betas.iter().map(|b| b[i]).fold(0.0, f64::max)).collect();
    let scaled: Vec<f64> = beta.iter().zip(ns).map(|(b, &n)| b * (n as f64).powf(xi)).collect();
    let branch = if vanishing(&scaled) { KappaBranch::Polynomial } else { KappaBranch::InverseRoot };
    let kappa: Vec<f64> = match branch {
        KappaBranch::Polynomial => ns.iter().map(|&n| (n as f64).powf(xi)).collect(),
        KappaBranch::InverseRoot => beta.iter().map(|b| 1.0 / b.sqrt()).collect(),
    };
    let kills_beta = betas.iter().map(|b| vanishing(&kappa.iter().zip(b).map(|(k, b)| k * b).collect::<Vec<_>>())).collect();
    let rate: Vec<f64> = kappa.iter().zip(ns).map(|(k, &n)| k.log2() / n as f64).collect();
    Ok(KappaSchedule {
        ns: ns.to_vec(),
        diverges: diverging(&kappa),
        kills_beta,
        sub_exponential: vanishing(&rate) || rate.iter().all(|&r| r.abs() < 1e-12),
        kappa,
        branch,
        xi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub family: Family,
    pub q: usize,
    pub n: usize,
    pub tries: usize,
    pub seed: u64,
    pub decoder: BcDecoder,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub code: BcCode,
    pub error: f64,
    /// Index of the winning try.
    pub try_index: usize,
    pub errors: Vec<f64>,
    pub realized_shared: Vec<f64>,
    pub realized_message: Vec<f64>,
}

/// Row count realizing rate `r`: `round(n r / log2 q)`.
pub fn rows_for_rate(r: f64, n: usize, q: usize) -> usize {
    (n as f64 * r / (q as f64).log2()).round().max(0.0) as usize
}

fn sample_matrix<R: Rng + ?Sized>(family: Family, q: usize, l: usize, n: usize, rng: &mut R) -> Result<FieldMatrix> {
    if l == 0 {
        return FieldMatrix::zeros(q, 0, n);
    }
    let member = Ensemble::new(family, q, l, n)?.sample(rng);
    member
        .as_matrix()
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("code search needs a linear ensemble".into()))
}

/// Random search over the ensemble for the code with the smallest exact
/// error; ties go to the earliest try.
pub fn bc_code_search(p: &BcProblem, params: &RateParams, config: &SearchConfig) -> Result<SearchResult> {
    let k = p.k();
    if params.shared_rates.len() != k || params.message_rates.len() != k {
        return Err(Error::Dimension(format!("parameters for {k} receivers expected")));
    }
    if config.tries == 0 {
        return Err(Error::InvalidParameter("tries must be at least 1".into()));
    }
    let (q, n) = (config.q, config.n);
    let shared_rows: Vec<usize> = params.shared_rates.iter().map(|&r| rows_for_rate(r, n, q)).collect();
    let message_rows: Vec<usize> = params.message_rates.iter().map(|&r| rows_for_rate(r, n, q)).collect();
    let results: Vec<Option<(BcCode, f64)>> = (0..config.tries)
        .into_par_iter()
        .map(|t| -> Result<Option<(BcCode, f64)>> {
            let mut rng = trial_rng(config.seed, t as u64);
            let mut receivers = Vec::with_capacity(k);
            for j in 0..k {
                let shared = sample_matrix(config.family, q, shared_rows[j], n, &mut rng)?;
                let message = sample_matrix(config.family, q, message_rows[j], n, &mut rng)?;
                let shared_vector = sample_image(&shared, &mut rng);
                receivers.push(ReceiverCode { shared, message, shared_vector });
            }
            let Ok(code) = BcCode::new(receivers) else { return Ok(None) };
            let err = bc_error_exact(&code, p, config.decoder, DEFAULT_EXACT_CAP)?;
            Ok(Some((code, err)))
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = results.iter().map(|r| r.as_ref().map_or(f64::INFINITY, |(_, e)| *e)).collect();
    let (try_index, _) = errors
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, &e)| match best {
            Some((_, b)) if b <= e => best,
            _ if e.is_finite() => Some((i, e)),
            _ => best,
        })
        .ok_or(Error::SearchExhausted(config.tries))?;
    let (code, error) = results[try_index].clone().expect("finite error has a code");
    let lq = (q as f64).log2() / n as f64;
    Ok(SearchResult {
        realized_shared: shared_rows.iter().map(|&l| l as f64 * lq).collect(),
        realized_message: message_rows.iter().map(|&l| l as f64 * lq).collect(),
        code,
        error,
        try_index,
        errors,
    })
}
