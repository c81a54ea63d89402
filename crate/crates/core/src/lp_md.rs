//! Minimum-divergence decoding as a family of per-type linear programs.
//!
//! For binary alphabets the coset condition `A_j u_j = a_j` becomes the
//! parity inequalities of Feldman, Wainwright and Karger, and the type
//! condition `t(u_K) = t` becomes a system over indicator variables
//! `s_i(b^k)`. A dense two-phase simplex solves each program.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::FieldMatrix;
use crate::seq;
use crate::slepian_wolf::{coset_product_search, DecodeOutcome};
use crate::types::{index_tuple, joint_type, tuple_index, type_divergence, Distribution, JointType};

const FEAS_TOL: f64 = 1e-9;
const INT_TOL: f64 = 1e-6;
const PIVOT_TOL: f64 = 1e-11;
pub const DEFAULT_DEGREE_CAP: usize = 12;
pub const DEFAULT_ITERATION_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// A sparse linear constraint `Σ c_i x_i (rel) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * x[i]).sum()
    }

    pub fn satisfied(&self, x: &[f64], tol: f64) -> bool {
        let l = self.lhs(x);
        match self.relation {
            Relation::Le => l <= self.rhs + tol,
            Relation::Ge => l >= self.rhs - tol,
            Relation::Eq => (l - self.rhs).abs() <= tol,
        }
    }

    /// Renames variable `i` to `i + offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&(i, c)| (i + offset, c)).collect(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Every variable is implicitly nonnegative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense, objective: Vec<f64>, constraints: Vec<Constraint>) -> Result<Self> {
        if objective.len() != num_vars {
            return Err(Error::Dimension(format!("objective has {} entries for {num_vars} variables", objective.len())));
        }
        if let Some(c) = constraints.iter().find(|c| c.coeffs.iter().any(|&(i, _)| i >= num_vars)) {
            return Err(Error::Dimension(format!("constraint references a variable beyond {num_vars}: {:?}", c.coeffs)));
        }
        Ok(Self { num_vars, sense, objective, constraints })
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|&v| v >= -tol) && self.constraints.iter().all(|c| c.satisfied(x, tol))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Every value lies within `1e-6` of 0 or 1.
    pub integral: bool,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    obj_rhs: f64,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, &pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rows[i][c] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, &pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
            self.obj_rhs -= f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn reset_objective(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj_rhs = 0.0;
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, &a) in self.obj.iter_mut().zip(&self.rows[r]) {
                    *v -= cb * a;
                }
                self.obj_rhs -= cb * self.rhs[r];
            }
        }
    }

    /// Bland's rule; returns false on unboundedness.
    fn optimize(&mut self, allowed: usize, tol: f64, iterations: &mut usize, cap: usize) -> Result<bool> {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -tol) else {
                return Ok(true);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[r] < bb),
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, c);
            *iterations += 1;
            if *iterations > cap {
                return Err(Error::Lp(format!("simplex exceeded {cap} pivots")));
            }
        }
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    simplex_solve_capped(lp, DEFAULT_ITERATION_CAP)
}

/// Two-phase primal simplex on a dense tableau.
pub fn simplex_solve_capped(lp: &LinearProgram, iteration_cap: usize) -> Result<LpSolution> {
    let nv = lp.num_vars;
    let m = lp.constraints.len();
    let mut dense = Vec::with_capacity(m);
    let mut rels = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut row = vec![0.0; nv];
        for &(i, v) in &c.coeffs {
            row[i] += v;
        }
        let (mut rel, mut b) = (c.relation, c.rhs);
        if b < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        dense.push(row);
        rels.push(rel);
        rhs.push(b);
    }
    let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rels.iter().filter(|r| **r != Relation::Le).count();
    let art_start = nv + n_slack;
    let cols = art_start + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut si, mut ai) = (nv, art_start);
    for (row, rel) in dense.into_iter().zip(&rels) {
        let mut full = row;
        full.resize(cols, 0.0);
        match rel {
            Relation::Le => {
                full[si] = 1.0;
                basis.push(si);
                si += 1;
            }
            Relation::Ge => {
                full[si] = -1.0;
                si += 1;
                full[ai] = 1.0;
                basis.push(ai);
                ai += 1;
            }
            Relation::Eq => {
                full[ai] = 1.0;
                basis.push(ai);
                ai += 1;
            }
        }
        rows.push(full);
    }
    let mut t = Tableau { rows, rhs, basis, obj: Vec::new(), obj_rhs: 0.0 };
    let mut iterations = 0;

    let mut phase1 = vec![0.0; cols];
    phase1[art_start..].iter_mut().for_each(|v| *v = 1.0);
    t.reset_objective(&phase1);
    t.optimize(cols, FEAS_TOL, &mut iterations, iteration_cap)?;
    let scale = 1.0 + t.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if -t.obj_rhs > FEAS_TOL * scale {
        return Ok(LpSolution { status: LpStatus::Infeasible, values: Vec::new(), objective: f64::NAN, integral: false });
    }
    // Drive remaining artificials out of the basis or drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= art_start {
            match (0..art_start).find(|&j| t.rows[r][j].abs() > 1e-9) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut cost = vec![0.0; cols];
    for (c, &v) in cost.iter_mut().zip(&lp.objective) {
        *c = sign * v;
    }
    t.reset_objective(&cost);
    let tol = FEAS_TOL * (1.0 + lp.objective.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
    if !t.optimize(art_start, tol, &mut iterations, iteration_cap)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, values: Vec::new(), objective: sign * f64::NEG_INFINITY, integral: false });
    }
    let mut values = vec![0.0; nv];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < nv {
            values[b] = t.rhs[r].max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
    let integral = values.iter().all(|&v| v.abs() <= INT_TOL || (v - 1.0).abs() <= INT_TOL);
    Ok(LpSolution { status: LpStatus::Optimal, values, objective, integral })
}

/// Variable layout for `k` binary terminals of length `n`: `u_{j,i}` first,
/// then `s_i(b^k)` grouped by `b^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpLayout {
    pub k: usize,
    pub n: usize,
}

impl LpLayout {
    pub fn u(&self, j: usize, i: usize) -> usize {
        j * self.n + i
    }

    pub fn s(&self, b: usize, i: usize) -> usize {
        self.k * self.n + b * self.n + i
    }

    pub fn num_vars(&self) -> usize {
        self.k * self.n + (1 << self.k) * self.n
    }
}

/// The block tying `s` to `u_K` for one position and one `b^k`.
fn position_block(b: &[usize], s: usize, u: &[usize]) -> Vec<Constraint> {
    let sgn = |bj: usize| if bj == 0 { 1.0 } else { -1.0 };
    let mut out = vec![Constraint::new(vec![(s, 1.0)], Relation::Ge, 0.0)];
    for (&bj, &uj) in b.iter().zip(u) {
        out.push(if bj == 0 {
            Constraint::new(vec![(uj, 1.0)], Relation::Ge, 0.0)
        } else {
            Constraint::new(vec![(uj, 1.0)], Relation::Le, 1.0)
        });
    }
    for (&bj, &uj) in b.iter().zip(u) {
        out.push(Constraint::new(vec![(s, 1.0), (uj, sgn(bj))], Relation::Le, 1.0 - bj as f64));
    }
    let mut all = vec![(s, 1.0)];
    all.extend(b.iter().zip(u).map(|(&bj, &uj)| (uj, sgn(bj))));
    out.push(Constraint::new(all, Relation::Ge, 1.0 - b.iter().sum::<usize>() as f64));
    out
}

/// Linear system equivalent, on integral points, to `t(u_K) = t`.
///
/// Emits `[2(k+1)n + 1] 2^k` constraints: per `b^k`, the count equality and
/// then the per-position blocks in position order.
pub fn build_type_constraints(t: &JointType) -> Result<Vec<Constraint>> {
    if t.sizes().iter().any(|&s| s != 2) {
        return Err(Error::InvalidParameter("the type LP needs binary alphabets".into()));
    }
    let k = t.sizes().len();
    let layout = LpLayout { k, n: t.n() };
    let mut out = Vec::with_capacity((2 * (k + 1) * layout.n + 1) << k);
    for bi in 0..1usize << k {
        let b = index_tuple(t.sizes(), bi);
        let eq = (0..layout.n).map(|i| (layout.s(bi, i), 1.0)).collect();
        out.push(Constraint::new(eq, Relation::Eq, t.counts()[bi] as f64));
        for i in 0..layout.n {
            let u: Vec<usize> = (0..k).map(|j| layout.u(j, i)).collect();
            out.extend(position_block(&b, layout.s(bi, i), &u));
        }
    }
    Ok(out)
}

/// Parity inequalities for `A u = a` over GF(2), on variables `0..n`.
///
/// For row `j` with support `N(j)`, every odd-violating subset `S` (one whose
/// size has the wrong parity) is cut off by
/// `Σ_{S} u_i − Σ_{N(j)∖S} u_i ≤ |S| − 1`: the only binary point of `N(j)`
/// achieving `|S|` on the left is the indicator of `S` itself.
pub fn build_parity_constraints(a: &FieldMatrix, syndrome: &[usize], degree_cap: usize) -> Result<Vec<Constraint>> {
    if a.q() != 2 {
        return Err(Error::InvalidParameter("parity constraints need GF(2)".into()));
    }
    if syndrome.len() != a.rows() {
        return Err(Error::Dimension(format!("syndrome of length {} for {} rows", syndrome.len(), a.rows())));
    }
    let mut out = Vec::new();
    for (r, &target) in syndrome.iter().enumerate() {
        let support: Vec<usize> = a.row(r).iter().map(|&(c, _)| c).collect();
        let d = support.len();
        if d > degree_cap {
            return Err(Error::TooLarge { what: "parity row degree", needed: d as u128, cap: degree_cap as u128 });
        }
        for mask in 0usize..1 << d {
            let size = mask.count_ones() as usize;
            if size % 2 == target % 2 {
                continue;
            }
            let coeffs = support.iter().enumerate().map(|(p, &c)| (c, if mask >> p & 1 == 1 { 1.0 } else { -1.0 })).collect();
            out.push(Constraint::new(coeffs, Relation::Le, size as f64 - 1.0));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeStatus {
    /// No point of the relaxation: the type cannot occur in the coset product.
    Infeasible,
    Integral,
    Fractional,
    /// Fractional relaxation resolved by enumerating the type class.
    FallbackFound,
    FallbackEmpty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeLog {
    pub counts: Vec<usize>,
    pub status: TypeStatus,
    pub divergence: f64,
    pub tuple: Option<Vec<Vec<usize>>>,
    pub fractional_point: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdLpResult {
    /// `None` when no type yields a certified candidate.
    pub best: Option<Vec<Vec<usize>>>,
    pub divergence: f64,
    pub all_integral: bool,
    pub types: Vec<TypeLog>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdLpOptions {
    pub degree_cap: usize,
    /// Coset-product size below which fractional types are enumerated.
    pub fallback_cap: Option<u128>,
}

impl Default for MdLpOptions {
    fn default() -> Self {
        Self { degree_cap: DEFAULT_DEGREE_CAP, fallback_cap: None }
    }
}

/// Objective weights making the integral optimum the lexicographically first
/// member; beyond 52 variables powers of two lose exactness and the weights
/// become uniform.
fn lex_weights(layout: LpLayout) -> Vec<f64> {
    let m = layout.k * layout.n;
    let mut w = vec![0.0; layout.num_vars()];
    for (idx, slot) in w.iter_mut().take(m).enumerate() {
        *slot = if m <= 52 { (2.0f64).powi((m - 1 - idx) as i32) } else { 1.0 };
    }
    w
}

/// Minimum-divergence decoding over binary terminals via one LP per type.
pub fn md_via_lp(matrices: &[FieldMatrix], syndromes: &[Vec<usize>], mu: &Distribution, options: MdLpOptions) -> Result<MdLpResult> {
    let k = matrices.len();
    if k == 0 || syndromes.len() != k || mu.arity() != k {
        return Err(Error::Dimension("matrices, syndromes and law must cover the same terminals".into()));
    }
    if mu.sizes().iter().any(|&s| s != 2) {
        return Err(Error::InvalidParameter("the type LP needs binary alphabets".into()));
    }
    let n = matrices[0].cols();
    if matrices.iter().any(|a| a.cols() != n) {
        return Err(Error::Dimension("matrices disagree on the block length".into()));
    }
    let layout = LpLayout { k, n };
    let mut parity = Vec::new();
    for (j, (a, s)) in matrices.iter().zip(syndromes).enumerate() {
        parity.extend(build_parity_constraints(a, s, options.degree_cap)?.iter().map(|c| c.shifted(layout.u(j, 0))));
    }
    let weights = lex_weights(layout);
    let sizes = vec![2; k];
    let types = seq::compositions(n, 1 << k);
    let logs: Vec<TypeLog> = types
        .par_iter()
        .map(|counts| -> Result<TypeLog> {
            let t = JointType::from_counts(sizes.clone(), counts.clone())?;
            let mut constraints = build_type_constraints(&t)?;
            constraints.extend(parity.iter().cloned());
            let lp = LinearProgram::new(layout.num_vars(), Sense::Minimize, weights.clone(), constraints)?;
            let sol = simplex_solve(&lp)?;
            let divergence = type_divergence(counts, mu.probs());
            let mut log = TypeLog { counts: counts.clone(), status: TypeStatus::Infeasible, divergence, tuple: None, fractional_point: None };
            match sol.status {
                LpStatus::Infeasible => log.divergence = f64::INFINITY,
                LpStatus::Unbounded => return Err(Error::Lp("type LP is bounded by construction".into())),
                LpStatus::Optimal if sol.integral => {
                    let tuple: Vec<Vec<usize>> =
                        (0..k).map(|j| (0..n).map(|i| sol.values[layout.u(j, i)].round() as usize).collect()).collect();
                    certify(matrices, syndromes, &t, &tuple)?;
                    log.status = TypeStatus::Integral;
                    log.tuple = Some(tuple);
                }
                LpStatus::Optimal => {
                    log.status = TypeStatus::Fractional;
                    log.fractional_point = Some(sol.values.clone());
                    if let Some(cap) = options.fallback_cap {
                        let out = coset_product_search(matrices, syndromes, &sizes, cap, |_| 0.0, |c| c == counts.as_slice());
                        match out {
                            Ok(DecodeOutcome::Decoded { tuple, .. }) => {
                                log.status = TypeStatus::FallbackFound;
                                log.tuple = Some(tuple);
                            }
                            Ok(DecodeOutcome::Failure) => {
                                log.status = TypeStatus::FallbackEmpty;
                                log.divergence = f64::INFINITY;
                            }
                            Err(Error::TooLarge { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
            Ok(log)
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, &Vec<Vec<usize>>)> = None;
    for log in &logs {
        if let Some(tuple) = &log.tuple {
            let better = match best {
                None => true,
                Some((d, b)) => log.divergence < d || (log.divergence == d && tuple < b),
            };
            if better {
                best = Some((log.divergence, tuple));
            }
        }
    }
    let all_integral = logs.iter().all(|l| matches!(l.status, TypeStatus::Infeasible | TypeStatus::Integral));
    Ok(MdLpResult {
        divergence: best.map_or(f64::INFINITY, |(d, _)| d),
        best: best.map(|(_, t)| t.clone()),
        all_integral,
        types: logs,
    })
}

fn certify(matrices: &[FieldMatrix], syndromes: &[Vec<usize>], t: &JointType, tuple: &[Vec<usize>]) -> Result<()> {
    let refs: Vec<&[usize]> = tuple.iter().map(Vec::as_slice).collect();
    if joint_type(&refs, t.sizes())?.counts() != t.counts() {
        return Err(Error::Lp("integral LP point has the wrong type".into()));
    }
    for ((a, s), u) in matrices.iter().zip(syndromes).zip(tuple) {
        if &a.matvec(u)? != s {
            return Err(Error::Lp("integral LP point violates a parity check".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexReport {
    pub b: Vec<usize>,
    pub vertices: Vec<Vec<f64>>,
    pub integral: Vec<Vec<usize>>,
    pub fractional: Vec<Vec<f64>>,
    /// `{(1, b^k)} ∪ {(0, b') : b' ≠ b^k}` in lexicographic order.
    pub expected: Vec<Vec<usize>>,
    pub holds: bool,
}

pub const MAX_AUDIT_K: usize = 4;

/// Single-position polytope in the variables `(v_0, v_1, .., v_k)`.
pub fn position_polytope(b: &[usize]) -> Vec<Constraint> {
    let u: Vec<usize> = (1..=b.len()).collect();
    position_block(b, 0, &u)
}

/// Enumerates the vertices of the single-position polytope by solving every
/// choice of `k + 1` active constraints.
pub fn polytope_vertex_audit(b: &[usize]) -> Result<VertexReport> {
    let k = b.len();
    if k == 0 || k > MAX_AUDIT_K {
        return Err(Error::TooLarge { what: "audit arity", needed: k as u128, cap: MAX_AUDIT_K as u128 });
    }
    if b.iter().any(|&x| x > 1) {
        return Err(Error::InvalidEntry(format!("{b:?} is not binary")));
    }
    let cons = position_polytope(b);
    let dim = k + 1;
    let dense: Vec<(Vec<f64>, f64)> = cons
        .iter()
        .map(|c| {
            let mut row = vec![0.0; dim];
            for &(i, v) in &c.coeffs {
                row[i] += v;
            }
            (row, c.rhs)
        })
        .collect();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for choice in subsets(cons.len(), dim) {
        let a: Vec<Vec<f64>> = choice.iter().map(|&i| dense[i].0.clone()).collect();
        let rhs: Vec<f64> = choice.iter().map(|&i| dense[i].1).collect();
        let Some(x) = solve_square(a, rhs) else { continue };
        if cons.iter().all(|c| c.satisfied(&x, 1e-9)) && !vertices.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9)) {
            vertices.push(x);
        }
    }
    vertices.sort_by(|p, q| p.partial_cmp(q).expect("finite vertices"));
    let (int_v, frac_v): (Vec<_>, Vec<_>) =
        vertices.iter().cloned().partition(|v| v.iter().all(|&x| (x - x.round()).abs() < 1e-9));
    let mut integral: Vec<Vec<usize>> = int_v.iter().map(|v| v.iter().map(|x| x.round() as usize).collect()).collect();
    integral.sort();
    let mut expected: Vec<Vec<usize>> = (0..1usize << k)
        .map(|bi| {
            let bp = index_tuple(&vec![2; k], bi);
            let mut p = vec![usize::from(bp == b)];
            p.extend(bp);
            p
        })
        .collect();
    expected.sort();
    let holds = frac_v.is_empty() && integral == expected;
    Ok(VertexReport { b: b.to_vec(), vertices, integral, fractional: frac_v, expected, holds })
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Index of `b^k` in the joint-type layout.
pub fn cell_index(b: &[usize]) -> usize {
    tuple_index(&vec![2; b.len()], b)
}
