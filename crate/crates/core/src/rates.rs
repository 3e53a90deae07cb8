//! Recombination rate and probability specifications over a partition
//! lattice, their marginalization to subsystems, and the config file format.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measure::WEIGHT_TOL;
use crate::partition::{GroundSet, SetPartition};

/// File-level tolerance for the probability sum in discrete mode; looser
/// than the internal tolerance to absorb decimal literals.
pub const FILE_PROB_TOL: f64 = 1e-9;

/// Rates `ϱ(𝒜) ≥ 0` (events per unit time) over partitions of a ground
/// set. Absent keys mean rate 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSpec {
    ground: GroundSet,
    rates: BTreeMap<SetPartition, f64>,
}

/// Probabilities `r(𝒜) ≥ 0` summing to 1 over partitions of a ground set.
/// Absent keys mean 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSpec {
    ground: GroundSet,
    probs: BTreeMap<SetPartition, f64>,
}

fn collect_entries(
    ground: &GroundSet,
    entries: impl IntoIterator<Item = (SetPartition, f64)>,
) -> Result<BTreeMap<SetPartition, f64>> {
    let mut map = BTreeMap::new();
    for (key, value) in entries {
        if key.ground() != ground {
            return Err(Error::GroundSetMismatch {
                left: key.ground().to_string(),
                right: ground.to_string(),
            });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::DuplicateKey(key.to_string()));
        }
    }
    Ok(map)
}

fn value_issues(kind: &str, map: &BTreeMap<SetPartition, f64>) -> Vec<String> {
    let mut issues = Vec::new();
    for (key, &value) in map {
        if !value.is_finite() {
            issues.push(format!("{kind} for \"{key}\" is not finite"));
        } else if value < 0.0 {
            issues.push(format!("{kind} for \"{key}\" is negative ({value})"));
        }
    }
    issues
}

fn marginalize_map(
    map: &BTreeMap<SetPartition, f64>,
    u: &GroundSet,
) -> Result<BTreeMap<SetPartition, f64>> {
    let mut out: BTreeMap<SetPartition, f64> = BTreeMap::new();
    for (key, &value) in map {
        let restricted = key.restrict(u)?;
        *out.entry(restricted).or_insert(0.0) += value;
    }
    Ok(out)
}

impl RateSpec {
    /// Values may be invalid at this point; [`RateSpec::validate`] reports
    /// them and the generator builder rejects them.
    pub fn new(
        ground: GroundSet,
        entries: impl IntoIterator<Item = (SetPartition, f64)>,
    ) -> Result<Self> {
        let rates = collect_entries(&ground, entries)?;
        Ok(Self { ground, rates })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Rate for a partition; absent keys mean 0.
    pub fn get(&self, partition: &SetPartition) -> f64 {
        self.rates.get(partition).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SetPartition, f64)> {
        self.rates.iter().map(|(k, &v)| (k, v))
    }

    pub fn support_len(&self) -> usize {
        self.rates.len()
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.values().sum()
    }

    /// Drops the rate of the single-block partition, which is dynamically
    /// irrelevant in continuous time.
    pub fn without_top(&self) -> RateSpec {
        let rates = self
            .rates
            .iter()
            .filter(|(k, _)| !k.is_top())
            .map(|(k, &v)| (k.clone(), v))
            .collect();
        RateSpec {
            ground: self.ground.clone(),
            rates,
        }
    }

    /// Marginal rates on the subsystem `u`: each rate lands on the
    /// restriction of its partition, so total rate mass is preserved.
    pub fn marginalize(&self, u: &GroundSet) -> Result<RateSpec> {
        if !u.is_subset_of(&self.ground) {
            return Err(Error::NotASubset {
                subset: u.to_string(),
                superset: self.ground.to_string(),
            });
        }
        Ok(RateSpec {
            ground: u.clone(),
            rates: marginalize_map(&self.rates, u)?,
        })
    }

    /// Pure diagnostic sweep; an empty list means the spec is well-formed.
    pub fn validate(&self) -> Vec<String> {
        value_issues("rate", &self.rates)
    }
}

impl ProbSpec {
    pub fn new(
        ground: GroundSet,
        entries: impl IntoIterator<Item = (SetPartition, f64)>,
    ) -> Result<Self> {
        let probs = collect_entries(&ground, entries)?;
        Ok(Self { ground, probs })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn get(&self, partition: &SetPartition) -> f64 {
        self.probs.get(partition).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SetPartition, f64)> {
        self.probs.iter().map(|(k, &v)| (k, v))
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Induced probabilities on the subsystem `u`; the result sums to the
    /// same total, hence remains a probability vector.
    pub fn marginalize(&self, u: &GroundSet) -> Result<ProbSpec> {
        if !u.is_subset_of(&self.ground) {
            return Err(Error::NotASubset {
                subset: u.to_string(),
                superset: self.ground.to_string(),
            });
        }
        Ok(ProbSpec {
            ground: u.clone(),
            probs: marginalize_map(&self.probs, u)?,
        })
    }

    pub fn validate(&self) -> Vec<String> {
        let mut issues = value_issues("probability", &self.probs);
        let sum = self.total();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            issues.push(format!("sum deviates by {}", (sum - 1.0).abs()));
        }
        issues
    }

    /// Hard gate used before matrix construction: non-negative values and
    /// a sum within the file tolerance.
    pub(crate) fn check_for_build(&self) -> Result<()> {
        let issues = value_issues("probability", &self.probs);
        if !issues.is_empty() {
            return Err(Error::InvalidSpec(issues.join("; ")));
        }
        let sum = self.total();
        if (sum - 1.0).abs() > FILE_PROB_TOL {
            return Err(Error::ProbabilitySum {
                sum,
                residual: (sum - 1.0).abs(),
            });
        }
        Ok(())
    }
}

/// Evolution mode declared by a rate file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Discrete,
}

/// A typed spec produced from a rate file.
#[derive(Debug, Clone)]
pub enum ModeSpec {
    Continuous(RateSpec),
    Discrete(ProbSpec),
}

/// A rate file as parsed, before keys are canonicalized:
/// `{ "n": 4, "mode": "continuous", "rates": { "1,3|2|4": 0.7, … } }`.
#[derive(Debug, Clone, Deserialize)]
pub struct RawSpec {
    pub n: u32,
    pub mode: Mode,
    pub rates: BTreeMap<String, f64>,
}

impl RawSpec {
    pub fn parse(text: &str) -> Result<RawSpec> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Diagnostic sweep over the raw form: malformed keys, negative values,
    /// and (in discrete mode) the deviation of the sum from 1.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let ground = match GroundSet::full(self.n) {
            Ok(g) => g,
            Err(e) => return vec![format!("n = {}: {e}", self.n)],
        };
        let mut sum = 0.0;
        for (key, &value) in &self.rates {
            if SetPartition::parse(key, &ground).is_err() {
                issues.push(format!("key \"{key}\" is not a partition of {ground}"));
            }
            if !value.is_finite() {
                issues.push(format!("value for \"{key}\" is not finite"));
            } else if value < 0.0 {
                issues.push(format!("value for \"{key}\" is negative ({value})"));
            } else {
                sum += value;
            }
        }
        if self.mode == Mode::Discrete && (sum - 1.0).abs() > WEIGHT_TOL {
            issues.push(format!("sum deviates by {}", (sum - 1.0).abs()));
        }
        issues
    }

    /// Canonicalizes keys and builds the typed spec. Two keys canonicalizing
    /// to the same partition are an error. In discrete mode the values must
    /// sum to 1 within `FILE_PROB_TOL`; any non-zero residual is returned as
    /// a note and only rescaled away when `renormalize` is set.
    pub fn into_spec(self, renormalize: bool) -> Result<(ModeSpec, Vec<String>)> {
        let ground = GroundSet::full(self.n)?;
        let mut entries: BTreeMap<SetPartition, f64> = BTreeMap::new();
        for (key, value) in &self.rates {
            let partition = SetPartition::parse(key, &ground)
                .map_err(|e| Error::InvalidSpec(format!("key \"{key}\": {e}")))?;
            if !value.is_finite() || *value < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "value for \"{key}\" must be a non-negative finite number, got {value}"
                )));
            }
            if entries.insert(partition.clone(), *value).is_some() {
                return Err(Error::DuplicateKey(partition.to_string()));
            }
        }
        let mut notes = Vec::new();
        match self.mode {
            Mode::Continuous => {
                let spec = RateSpec::new(ground, entries)?;
                Ok((ModeSpec::Continuous(spec), notes))
            }
            Mode::Discrete => {
                let sum: f64 = entries.values().sum();
                let residual = (sum - 1.0).abs();
                if residual > 0.0 {
                    notes.push(format!("probability sum residual {residual:e}"));
                }
                if renormalize && residual > 0.0 {
                    if sum <= 0.0 {
                        return Err(Error::ProbabilitySum { sum, residual });
                    }
                    for v in entries.values_mut() {
                        *v /= sum;
                    }
                    notes.push(format!("renormalized by factor {}", 1.0 / sum));
                } else if residual > FILE_PROB_TOL {
                    return Err(Error::ProbabilitySum { sum, residual });
                }
                let spec = ProbSpec::new(ground, entries)?;
                Ok((ModeSpec::Discrete(spec), notes))
            }
        }
    }
}
