//! Monte Carlo characterization of how initial-state error moves imaging
//! windows, and the resulting per-collect success probabilities.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::access::{find_opportunities, Collect, ImageTarget, Opportunity};
use crate::astro::constants::MU_EARTH;
use crate::astro::{Epoch, StateVector};
use crate::dynamics::{propagate_rk4, ForceModelConfig, SpacecraftParams};
use crate::error::{Error, Result};

/// Random stream reserved for the planner-input ensemble.
pub const PLANNING_STREAM: u64 = 0;
/// Random stream reserved for the evaluation ensemble.
pub const EVALUATION_STREAM: u64 = 1;

/// Isotropic initial position error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitCovariance {
    /// Total RMS position error (m).
    pub sigma_pos: f64,
    pub samples: usize,
    pub seed: u64,
}

impl OrbitCovariance {
    pub fn new(sigma_pos: f64, samples: usize, seed: u64) -> Result<Self> {
        let cov = Self {
            sigma_pos,
            samples,
            seed,
        };
        cov.validate()?;
        Ok(cov)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_pos >= 0.0) || !self.sigma_pos.is_finite() {
            return Err(Error::Config(format!("position sigma {} must be non-negative", self.sigma_pos)));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws `cov.samples` initial states on the planning stream.
pub fn sample_initial_states(nominal: &StateVector, cov: &OrbitCovariance) -> Result<Vec<StateVector>> {
    sample_initial_states_on(nominal, cov, PLANNING_STREAM)
}

/// Position-only Gaussian perturbation with per-axis σ = σ_pos/√3, drawn
/// from ChaCha8 seeded with `cov.seed` on the given stream.
pub fn sample_initial_states_on(nominal: &StateVector, cov: &OrbitCovariance, stream: u64) -> Result<Vec<StateVector>> {
    cov.validate()?;
    if cov.sigma_pos == 0.0 {
        return Ok(vec![*nominal; cov.samples]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cov.seed);
    rng.set_stream(stream);
    let axis = Normal::new(0.0, cov.sigma_pos / 3f64.sqrt()).map_err(|e| Error::Config(e.to_string()))?;
    Ok((0..cov.samples)
        .map(|_| {
            let d = Vector3::new(axis.sample(&mut rng), axis.sample(&mut rng), axis.sample(&mut rng));
            StateVector::new(nominal.epoch, nominal.position + d, nominal.velocity)
        })
        .collect())
}

/// Two-body period of the osculating orbit (s); infinite when unbound.
pub fn orbital_period(s: &StateVector) -> f64 {
    let energy = s.specific_energy();
    if energy >= 0.0 {
        return f64::INFINITY;
    }
    let a = -MU_EARTH / (2.0 * energy);
    2.0 * std::f64::consts::PI * (a.powi(3) / MU_EARTH).sqrt()
}

/// Propagation settings shared by every ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSetup {
    pub spacecraft: SpacecraftParams,
    pub force_model: ForceModelConfig,
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub step: f64,
}

/// Windows of every sample, with each sample window tied to a nominal window.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub start: Epoch,
    /// `[image][k]`
    pub nominal: Vec<Vec<Opportunity>>,
    /// `[sample][image][window]` for samples that propagated successfully.
    pub samples: Vec<Vec<Vec<Opportunity>>>,
    /// `[sample][image][k]`: the sample window matched to nominal window `k`.
    pub matched: Vec<Vec<Vec<Option<Opportunity>>>>,
    /// Sample windows that matched no nominal window.
    pub unmatched: usize,
    /// Error messages of samples that failed to propagate.
    pub failures: Vec<String>,
}

/// Assigns each sample window to the nominal window with the nearest
/// midpoint, within half the gap to that window's nearest nominal
/// neighbour and never more than `max_offset` seconds away. A nominal
/// window keeps only its closest candidate.
pub fn match_windows(
    nominal: &[Opportunity],
    sample: &[Opportunity],
    max_offset: f64,
) -> (Vec<Option<Opportunity>>, usize) {
    let mids: Vec<Epoch> = nominal.iter().map(Opportunity::midpoint).collect();
    let cutoff: Vec<f64> = (0..mids.len())
        .map(|k| {
            let before = k.checked_sub(1).map(|j| mids[k] - mids[j]);
            let after = mids.get(k + 1).map(|m| *m - mids[k]);
            let gap = before.unwrap_or(f64::INFINITY).min(after.unwrap_or(f64::INFINITY));
            (0.5 * gap).min(max_offset)
        })
        .collect();
    let mut out: Vec<Option<(f64, Opportunity)>> = vec![None; nominal.len()];
    let mut unmatched = 0;
    for w in sample {
        let m = w.midpoint();
        let nearest = (0..mids.len()).min_by(|&a, &b| (m - mids[a]).abs().total_cmp(&(m - mids[b]).abs()));
        let Some(k) = nearest else {
            unmatched += 1;
            continue;
        };
        let d = (m - mids[k]).abs();
        if d > cutoff[k] {
            unmatched += 1;
            continue;
        }
        match out[k] {
            Some((prev, _)) if prev <= d => unmatched += 1,
            Some(_) => {
                unmatched += 1;
                out[k] = Some((d, *w));
            }
            None => out[k] = Some((d, *w)),
        }
    }
    (out.into_iter().map(|o| o.map(|(_, w)| w)).collect(), unmatched)
}

impl Ensemble {
    /// Assembles an ensemble from precomputed windows. Successive passes
    /// over one target are at least a revisit interval apart (one orbital
    /// period), so matches are limited to half of `revisit` seconds.
    pub fn from_windows(
        start: Epoch,
        revisit: f64,
        nominal: Vec<Vec<Opportunity>>,
        samples: Vec<Vec<Vec<Opportunity>>>,
    ) -> Result<Self> {
        let mut matched = Vec::with_capacity(samples.len());
        let mut unmatched = 0;
        for s in &samples {
            if s.len() != nominal.len() {
                return Err(Error::InvalidInput(format!(
                    "sample has windows for {} images, nominal for {}",
                    s.len(),
                    nominal.len()
                )));
            }
            let per_image: Vec<Vec<Option<Opportunity>>> = nominal
                .iter()
                .zip(s)
                .map(|(n, w)| {
                    let (m, u) = match_windows(n, w, 0.5 * revisit);
                    unmatched += u;
                    m
                })
                .collect();
            matched.push(per_image);
        }
        Ok(Self {
            start,
            nominal,
            samples,
            matched,
            unmatched,
            failures: Vec::new(),
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }
}

/// Propagates every sample and extracts its windows (samples in parallel).
/// Samples that fail to propagate are left out and reported in `failures`.
pub fn ensemble_windows(
    samples: &[StateVector],
    targets: &[ImageTarget],
    setup: &PropagationSetup,
    nominal: Vec<Vec<Opportunity>>,
) -> Result<Ensemble> {
    let first = samples.first().ok_or_else(|| Error::InvalidInput("empty ensemble".into()))?;
    let start = first.epoch;
    let revisit = orbital_period(first);
    let results: Vec<Result<Vec<Vec<Opportunity>>>> = samples
        .par_iter()
        .map(|s| {
            let traj = propagate_rk4(s, &setup.spacecraft, &setup.force_model, setup.duration, setup.step)?;
            Ok(find_opportunities(&traj, targets))
        })
        .collect();
    let mut windows = Vec::new();
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(w) => windows.push(w),
            Err(e) => {
                log::warn!("ensemble sample {k} failed: {e}");
                failures.push(format!("sample {k}: {e}"));
            }
        }
    }
    let mut ensemble = Ensemble::from_windows(start, revisit, nominal, windows)?;
    ensemble.failures = failures;
    Ok(ensemble)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowBucket {
    /// Upper edge of the hour bucket `(k-1, k]`.
    pub bucket_hr: usize,
    pub sigma_start_s: f64,
    pub mean_duration_s: f64,
    pub ratio: f64,
    /// Matched sample windows in the bucket.
    pub matched: usize,
    pub low_sample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStatistics {
    pub buckets: Vec<WindowBucket>,
    /// Mean duration of all matched sample windows (s).
    pub mean_duration_s: f64,
}

impl WindowStatistics {
    pub fn bucket(&self, hour: usize) -> Option<&WindowBucket> {
        self.buckets.iter().find(|b| b.bucket_hr == hour)
    }

    /// Least-squares slope of `sigma_start_s` against hour over buckets
    /// with enough samples (s per hour).
    pub fn sigma_trend(&self) -> f64 {
        slope(self.buckets.iter().filter(|b| !b.low_sample).map(|b| (b.bucket_hr as f64, b.sigma_start_s)))
    }

    /// Least-squares slope of the ratio against hour (1/hour).
    pub fn ratio_trend(&self) -> f64 {
        slope(self.buckets.iter().filter(|b| !b.low_sample).map(|b| (b.bucket_hr as f64, b.ratio)))
    }

    /// CSV with header `bucket_hr,sigma_start_s,mean_duration_s,ratio`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bucket_hr", "sigma_start_s", "mean_duration_s", "ratio"])?;
        for b in &self.buckets {
            w.write_record([
                b.bucket_hr.to_string(),
                b.sigma_start_s.to_string(),
                b.mean_duration_s.to_string(),
                b.ratio.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<statistics csv>", e))?;
        Ok(())
    }
}

fn slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Per-hour spread of window start times across the ensemble.
///
/// A nominal window belongs to bucket `k` when its start lies in
/// `(k-1, k]` hours after the ensemble start. The bucket σ pools the
/// deviations of matched start times about each window's ensemble mean.
/// The ratio divides by one mean duration taken over the whole run.
pub fn window_statistics(ensemble: &Ensemble) -> Result<WindowStatistics> {
    if ensemble.samples.is_empty() {
        return Err(Error::InvalidInput("ensemble has no successful samples".into()));
    }
    let mut duration_sum = 0.0;
    let mut duration_count = 0usize;
    // bucket -> (sum of squared deviations, degrees of freedom, matched)
    let mut acc: BTreeMap<usize, (f64, usize, usize)> = BTreeMap::new();
    let mut last_bucket = 1;

    for (image, windows) in ensemble.nominal.iter().enumerate() {
        for (k, w) in windows.iter().enumerate() {
            let offset = w.t_s - ensemble.start;
            let bucket = ((offset / 3600.0).ceil() as usize).max(1);
            last_bucket = last_bucket.max(bucket);
            let starts: Vec<f64> = ensemble
                .matched
                .iter()
                .filter_map(|m| m[image][k])
                .map(|o| {
                    duration_sum += o.duration();
                    duration_count += 1;
                    o.t_s - ensemble.start
                })
                .collect();
            let entry = acc.entry(bucket).or_default();
            entry.2 += starts.len();
            if starts.len() >= 2 {
                let mean = starts.iter().sum::<f64>() / starts.len() as f64;
                entry.0 += starts.iter().map(|s| (s - mean).powi(2)).sum::<f64>();
                entry.1 += starts.len() - 1;
            }
        }
    }

    let mean_duration_s = if duration_count > 0 {
        duration_sum / duration_count as f64
    } else {
        0.0
    };
    let buckets = (1..=last_bucket)
        .map(|hr| {
            let (ss, dof, matched) = acc.get(&hr).copied().unwrap_or_default();
            let low_sample = dof == 0;
            let sigma = if low_sample { 0.0 } else { (ss / dof as f64).sqrt() };
            WindowBucket {
                bucket_hr: hr,
                sigma_start_s: sigma,
                mean_duration_s,
                ratio: if mean_duration_s > 0.0 { sigma / mean_duration_s } else { 0.0 },
                matched,
                low_sample,
            }
        })
        .collect();
    Ok(WindowStatistics {
        buckets,
        mean_duration_s,
    })
}

/// `p(c | Σ)` for every collect, keyed by collect id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectProbabilityTable {
    pub probabilities: BTreeMap<usize, f64>,
    pub seed: u64,
    /// Samples the fractions were counted over.
    pub samples: usize,
    pub sigma_pos_m: f64,
}

impl CollectProbabilityTable {
    /// Every listed collect certain; used for deterministic planning.
    pub fn certain(collects: &[Collect]) -> Self {
        Self {
            probabilities: collects.iter().map(|c| (c.id, 1.0)).collect(),
            seed: 0,
            samples: 0,
            sigma_pos_m: 0.0,
        }
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.probabilities.get(&id).copied()
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let t: Self = serde_json::from_reader(reader)?;
        if let Some((id, p)) = t.probabilities.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("probability {p} of collect {id} outside [0, 1]")));
        }
        Ok(t)
    }
}

/// Fraction of samples in which the collect lies inside one window of its
/// image.
pub fn collect_probabilities(collects: &[Collect], ensemble: &Ensemble, cov: &OrbitCovariance) -> Result<CollectProbabilityTable> {
    let n = ensemble.samples.len();
    if n == 0 {
        return Err(Error::InvalidInput("ensemble has no successful samples".into()));
    }
    let mut probabilities = BTreeMap::new();
    for c in collects {
        let hits = ensemble
            .samples
            .iter()
            .filter(|s| {
                s.get(c.image_id)
                    .is_some_and(|ws| ws.iter().any(|w| w.contains(c.t_start, c.t_end)))
            })
            .count();
        probabilities.insert(c.id, hits as f64 / n as f64);
    }
    Ok(CollectProbabilityTable {
        probabilities,
        seed: cov.seed,
        samples: n,
        sigma_pos_m: cov.sigma_pos,
    })
}
