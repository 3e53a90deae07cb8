//! Finite measures on finite product spaces: marginals, tensor products,
//! and the recombinator operators.
//!
//! A measure is a dense weight table over all configurations of a product
//! space, site-ordered with the last listed site varying fastest. Alphabets
//! are finite and identified with `{0, …, size-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{GroundSet, SetPartition};

/// Shared absolute tolerance for algebraic identities on weights.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A finite product space over a set of sites, each with a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    sites: GroundSet,
    sizes: Vec<usize>,
    total: usize,
}

impl ProductSpace {
    pub fn new(sites: GroundSet, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != sites.len() {
            return Err(Error::SiteSizeMismatch {
                sites: sites.len(),
                sizes: sizes.len(),
            });
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidSiteSize);
        }
        let mut total = 1usize;
        for &s in &sizes {
            total = total.checked_mul(s).ok_or(Error::StateCountOverflow)?;
        }
        Ok(Self {
            sites,
            sizes,
            total,
        })
    }

    /// Sites `{1, …, n}`, all with a binary alphabet.
    pub fn binary(n: u32) -> Result<Self> {
        let sites = GroundSet::full(n)?;
        let sizes = vec![2; sites.len()];
        Self::new(sites, sizes)
    }

    pub fn sites(&self) -> &GroundSet {
        &self.sites
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn total_states(&self) -> usize {
        self.total
    }

    /// Flat index of a configuration; the last site varies fastest.
    pub fn index_of(&self, config: &[usize]) -> usize {
        debug_assert_eq!(config.len(), self.sizes.len());
        let mut idx = 0;
        for (k, &c) in config.iter().enumerate() {
            debug_assert!(c < self.sizes[k]);
            idx = idx * self.sizes[k] + c;
        }
        idx
    }

    pub fn config_of(&self, index: usize) -> Vec<usize> {
        let mut cfg = vec![0; self.sizes.len()];
        self.decode_into(index, &mut cfg);
        cfg
    }

    pub(crate) fn decode_into(&self, mut index: usize, config: &mut [usize]) {
        for k in (0..self.sizes.len()).rev() {
            config[k] = index % self.sizes[k];
            index /= self.sizes[k];
        }
    }
}

/// A finite signed measure stored as a dense weight table.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    space: ProductSpace,
    weights: Vec<f64>,
}

impl ProductMeasure {
    pub fn new(space: ProductSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.total_states() {
            return Err(Error::WeightLengthMismatch {
                expected: space.total_states(),
                got: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight(i));
        }
        Ok(Self { space, weights })
    }

    pub fn zero(space: ProductSpace) -> Self {
        let weights = vec![0.0; space.total_states()];
        Self { space, weights }
    }

    /// The uniform probability measure on the space.
    pub fn uniform(space: ProductSpace) -> Self {
        let n = space.total_states();
        let weights = vec![1.0 / n as f64; n];
        Self { space, weights }
    }

    /// Point mass at a configuration.
    pub fn dirac(space: ProductSpace, config: &[usize]) -> Result<Self> {
        if config.len() != space.num_sites()
            || config.iter().zip(space.sizes()).any(|(&c, &s)| c >= s)
        {
            return Err(Error::InvalidConfiguration(format!("{config:?}")));
        }
        let mut weights = vec![0.0; space.total_states()];
        weights[space.index_of(config)] = 1.0;
        Ok(Self { space, weights })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total variation norm: the sum of absolute weights.
    pub fn total_variation_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    pub fn is_probability(&self) -> bool {
        self.is_positive() && (self.total_mass() - 1.0).abs() <= WEIGHT_TOL
    }

    /// Marginal `π_U.μ` on the sites in `u`: each `U`-configuration gets the
    /// summed weight of all full configurations projecting onto it.
    pub fn marginal(&self, u: &GroundSet) -> Result<ProductMeasure> {
        let positions: Vec<usize> = u
            .elements()
            .iter()
            .map(|&s| {
                self.space.sites.position(s).ok_or_else(|| Error::NotASubset {
                    subset: u.to_string(),
                    superset: self.space.sites.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        let out_sizes = positions.iter().map(|&p| self.space.sizes[p]).collect();
        let out_space = ProductSpace::new(u.clone(), out_sizes)?;
        let mut out = vec![0.0; out_space.total_states()];
        let mut cfg = vec![0usize; self.space.num_sites()];
        let mut sub = vec![0usize; positions.len()];
        for (idx, &w) in self.weights.iter().enumerate() {
            self.space.decode_into(idx, &mut cfg);
            for (j, &p) in positions.iter().enumerate() {
                sub[j] = cfg[p];
            }
            out[out_space.index_of(&sub)] += w;
        }
        ProductMeasure::new(out_space, out)
    }

    pub fn to_json(&self) -> String {
        let file = MeasureJson {
            sites: self.space.sites.elements().to_vec(),
            site_sizes: self.space.sizes.clone(),
            weights: self.weights.clone(),
        };
        serde_json::to_string_pretty(&file).expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let sites = GroundSet::new(file.sites)?;
        let space = ProductSpace::new(sites, file.site_sizes)?;
        ProductMeasure::new(space, file.weights)
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    sites: Vec<u32>,
    site_sizes: Vec<usize>,
    weights: Vec<f64>,
}

/// Tensor product of measures on pairwise disjoint site sets. The result is
/// site-ordered by ascending global site index regardless of argument order.
pub fn tensor(parts: &[ProductMeasure]) -> Result<ProductMeasure> {
    if parts.is_empty() {
        return Err(Error::EmptyTensor);
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    // (site, size, part, position within part), merged in site order.
    let mut slots: Vec<(u32, usize, usize, usize)> = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        for (pos, &site) in part.space.sites.elements().iter().enumerate() {
            slots.push((site, part.space.sizes[pos], pi, pos));
        }
    }
    slots.sort_by_key(|&(site, ..)| site);
    if let Some(w) = slots.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::OverlappingGroundSets(w[0].0));
    }
    let sites = GroundSet::new(slots.iter().map(|&(s, ..)| s).collect())?;
    let sizes = slots.iter().map(|&(_, sz, ..)| sz).collect();
    let out_space = ProductSpace::new(sites, sizes)?;

    let mut out = vec![0.0; out_space.total_states()];
    let mut cfg = vec![0usize; out_space.num_sites()];
    let mut sub_cfgs: Vec<Vec<usize>> = parts
        .iter()
        .map(|p| vec![0usize; p.space.num_sites()])
        .collect();
    for (idx, out_w) in out.iter_mut().enumerate() {
        out_space.decode_into(idx, &mut cfg);
        for (k, &(_, _, pi, pos)) in slots.iter().enumerate() {
            sub_cfgs[pi][pos] = cfg[k];
        }
        let mut w = 1.0;
        for (pi, part) in parts.iter().enumerate() {
            w *= part.weights[part.space.index_of(&sub_cfgs[pi])];
        }
        *out_w = w;
    }
    ProductMeasure::new(out_space, out)
}

/// The recombinator `R_𝒜`: replaces a measure by the tensor product of its
/// block marginals, scaled by `1/‖μ‖^{m-1}` where `m` is the block count.
/// The zero measure maps to itself. A single-block partition acts as the
/// identity, bit for bit.
pub fn recombinator(partition: &SetPartition, m: &ProductMeasure) -> Result<ProductMeasure> {
    if partition.ground() != m.space.sites() {
        return Err(Error::GroundSetMismatch {
            left: partition.ground().to_string(),
            right: m.space.sites().to_string(),
        });
    }
    let norm = m.total_variation_norm();
    if norm == 0.0 {
        return Ok(ProductMeasure::zero(m.space.clone()));
    }
    let marginals: Vec<ProductMeasure> = partition
        .blocks()
        .iter()
        .map(|b| m.marginal(&GroundSet::new(b.clone())?))
        .collect::<Result<_>>()?;
    let mut product = tensor(&marginals)?;
    let exponent = partition.num_blocks() as i32 - 1;
    if exponent > 0 {
        let denom = norm.powi(exponent);
        for w in &mut product.weights {
            *w /= denom;
        }
    }
    Ok(product)
}

/// Total variation distance `‖a − b‖` between measures on the same space.
pub fn tv_distance(a: &ProductMeasure, b: &ProductMeasure) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(a.weights
        .iter()
        .zip(&b.weights)
        .map(|(x, y)| (x - y).abs())
        .sum())
}
