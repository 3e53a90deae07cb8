//! Markov generator and Markov matrix over the partition lattice, semigroup
//! evaluation, and the linearised solution of the recombination dynamics.
//!
//! Once every recombined version `R_𝒜(ω₀)` of the initial measure is
//! available, the dynamics is linear: the coefficient vector `a_t` is the
//! top row of `e^{tQ}` (continuous time) or of `M^t` (discrete time), and
//! the solution is `ω_t = Σ_𝒜 a_t(𝒜) R_𝒜(ω₀)`.
//!
//! The matrix exponential uses scaling-and-squaring with a truncated Taylor
//! series, never an eigendecomposition, so degenerate (non-diagonalisable)
//! generators are handled by the same code path.

use std::collections::HashMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::measure::{recombinator, ProductMeasure, WEIGHT_TOL};
use crate::partition::{
    bell_number, enumerate_partitions, join_disjoint, GroundSet, PartitionEnumeration,
    PartitionIndex, SetPartition,
};
use crate::rates::{ProbSpec, RateSpec};

/// Largest site count for which dense partition matrices are built.
pub const MAX_DENSE_SITES: usize = 6;

/// Row-sum tolerance for generator/Markov matrix validation.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Tolerance on the probability-vector invariant of semigroup rows.
pub const COEFF_SUM_TOL: f64 = 1e-10;

/// Absolute tolerance for clustering repeated diagonal entries.
pub const SPECTRUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Off-diagonals non-negative, rows sum to 0, strictly triangular in
    /// the refinement order off the diagonal.
    Generator,
    /// Entries non-negative, rows sum to 1, triangular in refinement order.
    Markov,
    General,
}

/// A square real matrix indexed by the canonical enumeration of `ℙ(S)`.
#[derive(Debug, Clone)]
pub struct PartitionMatrix {
    enumeration: PartitionEnumeration,
    entries: Array2<f64>,
    kind: MatrixKind,
}

impl PartitionMatrix {
    fn new_validated(
        enumeration: PartitionEnumeration,
        entries: Array2<f64>,
        kind: MatrixKind,
    ) -> Result<Self> {
        let m = Self {
            enumeration,
            entries,
            kind,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn ground(&self) -> &GroundSet {
        self.enumeration.ground()
    }

    pub fn enumeration(&self) -> &PartitionEnumeration {
        &self.enumeration
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.enumeration.len()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn entry(&self, row: PartitionIndex, col: PartitionIndex) -> f64 {
        self.entries[[row.0, col.0]]
    }

    pub fn row(&self, row: PartitionIndex) -> Vec<f64> {
        self.entries.row(row.0).to_vec()
    }

    /// Indices ordered coarser-first (ascending block count). Block count
    /// strictly increases under proper refinement, so this is a linear
    /// extension of the refinement order and the reordered matrix is
    /// triangular.
    pub fn linear_extension_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&i| (self.enumeration.partitions()[i].num_blocks(), i));
        order
    }

    /// Checks the structural invariants of the matrix kind.
    pub fn validate(&self) -> Result<()> {
        let parts = self.enumeration.partitions();
        let n = self.dim();
        for row in 0..n {
            let mut sum = 0.0;
            for col in 0..n {
                let v = self.entries[[row, col]];
                sum += v;
                match self.kind {
                    MatrixKind::Generator => {
                        if row != col && v < 0.0 {
                            return Err(Error::Invariant(format!(
                                "generator off-diagonal ({row},{col}) is negative: {v}"
                            )));
                        }
                        if row != col && v != 0.0 && !parts[col].is_refinement_of(&parts[row])? {
                            return Err(Error::Invariant(format!(
                                "generator entry ({row},{col}) breaks triangularity"
                            )));
                        }
                    }
                    MatrixKind::Markov => {
                        if v < -WEIGHT_TOL {
                            return Err(Error::Invariant(format!(
                                "markov entry ({row},{col}) is negative: {v}"
                            )));
                        }
                        if v != 0.0 && !parts[col].is_refinement_of(&parts[row])? {
                            return Err(Error::Invariant(format!(
                                "markov entry ({row},{col}) breaks triangularity"
                            )));
                        }
                    }
                    MatrixKind::General => {}
                }
            }
            let target = match self.kind {
                MatrixKind::Generator => 0.0,
                MatrixKind::Markov => 1.0,
                MatrixKind::General => continue,
            };
            if (sum - target).abs() > ROW_SUM_TOL {
                return Err(Error::Invariant(format!(
                    "row {row} sums to {sum}, expected {target}"
                )));
            }
        }
        Ok(())
    }
}

fn check_dense_limit(ground: &GroundSet) -> Result<()> {
    let n = ground.len();
    if n > MAX_DENSE_SITES {
        return Err(Error::TooManySites {
            sites: n,
            bell: bell_number(n),
        });
    }
    Ok(())
}

/// Marginal rates of a block together with the enumeration of its
/// partitions; `parts[i]` carries rate `values[i]`.
struct BlockTable {
    parts: Vec<SetPartition>,
    values: Vec<f64>,
}

fn block_rate_table(rho: &RateSpec, block: &[u32]) -> Result<BlockTable> {
    let ground = GroundSet::new(block.to_vec())?;
    let marginal = rho.marginalize(&ground)?;
    let parts = enumerate_partitions(&ground);
    let values = parts.iter().map(|p| marginal.get(p)).collect();
    Ok(BlockTable { parts, values })
}

fn block_prob_table(r: &ProbSpec, block: &[u32]) -> Result<BlockTable> {
    let ground = GroundSet::new(block.to_vec())?;
    let marginal = r.marginalize(&ground)?;
    let parts = enumerate_partitions(&ground);
    let values = parts.iter().map(|p| marginal.get(p)).collect();
    Ok(BlockTable { parts, values })
}

/// Builds the Markov generator `Q` of the partitioning process.
///
/// `Q_{ℬ𝒞}` is the marginal rate of refining exactly one block of `ℬ`
/// into the corresponding restriction of `𝒞`; the diagonal makes every
/// row sum to zero. The rate of the single-block partition is dropped
/// first, as it never moves the state.
pub fn build_generator(rho: &RateSpec) -> Result<PartitionMatrix> {
    let issues = rho.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues.join("; ")));
    }
    check_dense_limit(rho.ground())?;
    let rho = rho.without_top();
    let enumeration = PartitionEnumeration::new(rho.ground().clone());
    let n = enumeration.len();
    let mut q = Array2::<f64>::zeros((n, n));
    let mut tables: HashMap<Vec<u32>, BlockTable> = HashMap::new();

    for (row, b) in enumeration.partitions().iter().enumerate() {
        let mut diagonal = 0.0;
        for (block_idx, block) in b.blocks().iter().enumerate() {
            if block.len() == 1 {
                continue; // a singleton block has no proper refinement
            }
            if !tables.contains_key(block) {
                tables.insert(block.clone(), block_rate_table(&rho, block)?);
            }
            let table = &tables[block];
            for (ai, part_of_block) in table.parts.iter().enumerate() {
                if part_of_block.is_top() {
                    continue;
                }
                let rate = table.values[ai];
                if rate == 0.0 {
                    continue;
                }
                let target = if b.num_blocks() == 1 {
                    part_of_block.clone()
                } else {
                    join_disjoint(&[b.remove_block(block_idx)?, part_of_block.clone()])?
                };
                let col = enumeration.index_of(&target)?.0;
                q[[row, col]] += rate;
                diagonal -= rate;
            }
        }
        q[[row, row]] = diagonal;
    }
    PartitionMatrix::new_validated(enumeration, q, MatrixKind::Generator)
}

/// Builds the Markov matrix `M` of the discrete-time dynamics:
/// `M_{ℬ𝒞} = Π_i r^{B_i}(𝒞|_{B_i})` when `𝒞 ≼ ℬ`, else 0.
pub fn build_markov_matrix(r: &ProbSpec) -> Result<PartitionMatrix> {
    r.check_for_build()?;
    check_dense_limit(r.ground())?;
    let enumeration = PartitionEnumeration::new(r.ground().clone());
    let n = enumeration.len();
    let mut m = Array2::<f64>::zeros((n, n));
    let mut tables: HashMap<Vec<u32>, HashMap<SetPartition, f64>> = HashMap::new();

    let parts = enumeration.partitions();
    for (row, b) in parts.iter().enumerate() {
        for block in b.blocks() {
            if !tables.contains_key(block) {
                let table = block_prob_table(r, block)?;
                let map = table
                    .parts
                    .into_iter()
                    .zip(table.values)
                    .collect::<HashMap<_, _>>();
                tables.insert(block.clone(), map);
            }
        }
        for (col, c) in parts.iter().enumerate() {
            if !c.is_refinement_of(b)? {
                continue;
            }
            let mut prob = 1.0;
            for block in b.blocks() {
                let block_ground = GroundSet::new(block.clone())?;
                let restricted = c.restrict(&block_ground)?;
                prob *= tables[block].get(&restricted).copied().unwrap_or(0.0);
            }
            m[[row, col]] = prob;
        }
    }
    PartitionMatrix::new_validated(enumeration, m, MatrixKind::Markov)
}

/// 1-norm (max absolute column sum).
fn one_norm(a: &Array2<f64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        best = best.max(col.iter().map(|v| v.abs()).sum());
    }
    best
}

/// `e^A` by scaling-and-squaring with an order-16 Taylor polynomial in
/// Horner form. The scaled norm is kept at or below 1/2, so the truncation
/// error is far below the working tolerance; the method never touches the
/// spectrum and is valid for non-diagonalisable input.
fn expm(a: &Array2<f64>) -> Array2<f64> {
    const THETA: f64 = 0.5;
    const ORDER: usize = 16;
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA {
        (norm / THETA).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let eye = Array2::<f64>::eye(n);
    let mut x = eye.clone();
    for k in (1..=ORDER).rev() {
        x = &eye + &(scaled.dot(&x) / k as f64);
    }
    for _ in 0..squarings {
        x = x.dot(&x);
    }
    x
}

/// The Markov matrix `e^{tQ}` for a generator `q` and `t ≥ 0`.
pub fn semigroup(q: &PartitionMatrix, t: f64) -> Result<PartitionMatrix> {
    if q.kind != MatrixKind::Generator {
        return Err(Error::Invariant("semigroup requires a generator".into()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let exp = expm(&(&q.entries * t));
    PartitionMatrix::new_validated(q.enumeration.clone(), exp, MatrixKind::Markov)
}

/// Time stamp of a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimePoint {
    Continuous(f64),
    Discrete(u64),
}

/// The probability vector `a_t` over the canonical partition enumeration.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    ground: GroundSet,
    values: Vec<f64>,
    time: TimePoint,
}

impl CoefficientVector {
    fn from_row(
        enumeration: &PartitionEnumeration,
        row: &[f64],
        time: TimePoint,
    ) -> Result<Self> {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > COEFF_SUM_TOL {
            return Err(Error::Invariant(format!(
                "coefficient vector sums to {sum} at {time:?}"
            )));
        }
        if let Some(v) = row.iter().find(|v| **v < -WEIGHT_TOL) {
            return Err(Error::Invariant(format!(
                "coefficient vector has negative entry {v} at {time:?}"
            )));
        }
        Ok(Self {
            ground: enumeration.ground().clone(),
            values: row.to_vec(),
            time,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: PartitionIndex) -> f64 {
        self.values[index.0]
    }

    pub fn time(&self) -> TimePoint {
        self.time
    }
}

/// `a_t(𝒜) = (e^{tQ})_{1̲𝒜}`: the top row of the semigroup.
pub fn coefficients_continuous(rho: &RateSpec, t: f64) -> Result<CoefficientVector> {
    let q = build_generator(rho)?;
    let e = semigroup(&q, t)?;
    CoefficientVector::from_row(&e.enumeration, &e.row(PartitionIndex(0)), TimePoint::Continuous(t))
}

/// `a_t(𝒜) = (M^t)_{1̲𝒜}` by iterated row-times-matrix products.
pub fn coefficients_discrete(r: &ProbSpec, t: u64) -> Result<CoefficientVector> {
    let m = build_markov_matrix(r)?;
    let mut row = Array1::<f64>::zeros(m.dim());
    row[0] = 1.0;
    for _ in 0..t {
        row = row.dot(&m.entries);
    }
    CoefficientVector::from_row(
        &m.enumeration,
        row.as_slice().expect("contiguous"),
        TimePoint::Discrete(t),
    )
}

fn check_solve_inputs(omega0: &ProductMeasure, ground: &GroundSet) -> Result<()> {
    if omega0.space().sites() != ground {
        return Err(Error::GroundSetMismatch {
            left: omega0.space().sites().to_string(),
            right: ground.to_string(),
        });
    }
    if !omega0.is_probability() {
        return Err(Error::NotAProbability(format!(
            "total mass {}",
            omega0.total_mass()
        )));
    }
    Ok(())
}

/// All `Bell(|S|)` recombined versions of the initial measure, in canonical
/// order. They are time-independent and shared across evaluation times.
fn recombined_basis(
    enumeration: &PartitionEnumeration,
    omega0: &ProductMeasure,
) -> Result<Vec<ProductMeasure>> {
    enumeration
        .partitions()
        .iter()
        .map(|p| recombinator(p, omega0))
        .collect()
}

fn combine(
    basis: &[ProductMeasure],
    coefficients: &[f64],
    space: &crate::measure::ProductSpace,
) -> Result<ProductMeasure> {
    let mut weights = vec![0.0; space.total_states()];
    for (c, m) in coefficients.iter().zip(basis) {
        if *c == 0.0 {
            continue;
        }
        for (w, v) in weights.iter_mut().zip(m.weights()) {
            *w += c * v;
        }
    }
    ProductMeasure::new(space.clone(), weights)
}

/// Solves the continuous-time dynamics at each requested time and also
/// returns the coefficient vectors driving the combination
/// `ω_t = Σ_𝒜 a_t(𝒜) R_𝒜(ω₀)`.
pub fn solve_continuous_detailed(
    omega0: &ProductMeasure,
    rho: &RateSpec,
    times: &[f64],
) -> Result<Vec<(CoefficientVector, ProductMeasure)>> {
    check_solve_inputs(omega0, rho.ground())?;
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
    }
    let q = build_generator(rho)?;
    let basis = recombined_basis(&q.enumeration, omega0)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let e = semigroup(&q, t)?;
        let a = CoefficientVector::from_row(
            &q.enumeration,
            &e.row(PartitionIndex(0)),
            TimePoint::Continuous(t),
        )?;
        let state = combine(&basis, a.values(), omega0.space())?;
        out.push((a, state));
    }
    Ok(out)
}

/// Solves the continuous-time dynamics at each requested time:
/// `ω_t = Σ_𝒜 a_t(𝒜) R_𝒜(ω₀)`.
pub fn solve_continuous(
    omega0: &ProductMeasure,
    rho: &RateSpec,
    times: &[f64],
) -> Result<Vec<ProductMeasure>> {
    Ok(solve_continuous_detailed(omega0, rho, times)?
        .into_iter()
        .map(|(_, state)| state)
        .collect())
}

/// Discrete-time analogue of [`solve_continuous_detailed`] for
/// `t = 0, …, generations`.
pub fn solve_discrete_detailed(
    omega0: &ProductMeasure,
    r: &ProbSpec,
    generations: u64,
) -> Result<Vec<(CoefficientVector, ProductMeasure)>> {
    check_solve_inputs(omega0, r.ground())?;
    let m = build_markov_matrix(r)?;
    let basis = recombined_basis(&m.enumeration, omega0)?;
    let mut row = Array1::<f64>::zeros(m.dim());
    row[0] = 1.0;
    let mut out = Vec::with_capacity(generations as usize + 1);
    for t in 0..=generations {
        let a = CoefficientVector::from_row(
            &m.enumeration,
            row.as_slice().expect("contiguous"),
            TimePoint::Discrete(t),
        )?;
        let state = combine(&basis, a.values(), omega0.space())?;
        out.push((a, state));
        if t < generations {
            row = row.dot(&m.entries);
        }
    }
    Ok(out)
}

/// Solves the discrete-time dynamics for `t = 0, …, generations`.
pub fn solve_discrete(
    omega0: &ProductMeasure,
    r: &ProbSpec,
    generations: u64,
) -> Result<Vec<ProductMeasure>> {
    Ok(solve_discrete_detailed(omega0, r, generations)?
        .into_iter()
        .map(|(_, state)| state)
        .collect())
}

/// Eigenvalue report read off the diagonal of a triangular matrix.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Diagonal entries in coarser-first (linear-extension) order.
    pub eigenvalues: Vec<f64>,
    /// Clustered eigenvalues with multiplicities, ascending.
    pub multiplicities: Vec<(f64, usize)>,
    /// Cluster representatives appearing more than once.
    pub repeated: Vec<f64>,
}

impl SpectrumReport {
    pub fn has_repeated(&self) -> bool {
        !self.repeated.is_empty()
    }
}

/// Reads the exact eigenvalue multiset off the diagonal. Valid because
/// reordering rows and columns by block count makes the matrix genuinely
/// triangular; repeated entries are flagged as candidates for degenerate
/// (non-diagonalisable) behaviour.
pub fn spectrum_diagnostics(m: &PartitionMatrix) -> SpectrumReport {
    let order = m.linear_extension_order();
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.entries[[i, i]]).collect();
    let mut sorted = eigenvalues.clone();
    sorted.sort_by(f64::total_cmp);
    let mut multiplicities: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match multiplicities.last_mut() {
            Some((rep, count)) if (v - *rep).abs() <= SPECTRUM_TOL => *count += 1,
            _ => multiplicities.push((v, 1)),
        }
    }
    let repeated = multiplicities
        .iter()
        .filter(|(_, c)| *c > 1)
        .map(|&(v, _)| v)
        .collect();
    SpectrumReport {
        eigenvalues,
        multiplicities,
        repeated,
    }
}
