//! The scanning Monte Carlo itself: occupancy, onset gating, per-site
//! bursts, background, and the multi-scan driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::emission::acceptance_probability;
use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::ttag::{TagRecord, TimeTagStream};

/// Draw the initial occupancy of the array.
pub fn sample_occupancy<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Vec<bool> {
    (0..config.n_sites)
        .map(|_| rng.gen::<f64>() < config.fill_probability)
        .collect()
}

/// Simulation totals that are not visible in the detected stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    /// Photons emitted by atoms and companions, detected or not.
    pub emissions: u64,
    /// Site passes that started with an atom in the trap.
    pub occupied_passes: u64,
}

impl ScanStats {
    fn merge(self, other: ScanStats) -> ScanStats {
        ScanStats {
            emissions: self.emissions + other.emissions,
            occupied_passes: self.occupied_passes + other.occupied_passes,
        }
    }
}

/// Simulate a single sweep over the array. Timestamps are local to this
/// scan (tick 0 = scan start). The RNG call sequence is fixed, so a given
/// seed and occupancy reproduce the stream byte for byte.
pub fn simulate_scan<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    occupancy: &[bool],
    rng: &mut R,
) -> Result<TimeTagStream> {
    let (records, _) = scan_records(config, occupancy, rng)?;
    Ok(TimeTagStream::from_records(config.resolution_fs(), records))
}

fn scan_records<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    occupancy: &[bool],
    rng: &mut R,
) -> Result<(Vec<TagRecord>, ScanStats)> {
    config.validate()?;
    if occupancy.len() != config.n_sites {
        return Err(Error::Input(format!(
            "occupancy has {} entries for {} sites",
            occupancy.len(),
            config.n_sites
        )));
    }

    let duration = config.scan_duration();
    let res = config.time_resolution;
    let v = config.scan_speed;
    let w = config.spot_waist;
    let s0 = config.saturation;
    let gamma = crate::atom::AtomSpec::cs_d2().gamma;
    let budget = config.interaction_loss_constant.round() as u64;
    let normal = Normal::standard();

    // onset hazard: h(t) = k_on * s_local(t)^2, with s_local^2 Gaussian in
    // time of inverse variance 2*a_t; its integral is an erf ramp
    let a_t = 4.0 * v * v / (w * w);
    let onset_coeff = config.bright_onset_rate * s0 * s0 * (std::f64::consts::PI / a_t).sqrt();

    let mut records: Vec<TagRecord> = Vec::new();
    let mut stats = ScanStats::default();

    for (site, &occupied) in occupancy.iter().enumerate() {
        if !occupied {
            continue;
        }
        stats.occupied_passes += 1;
        let t_cross = config.site_crossing_time(site);
        let x_site = config.site_position(site);

        let t_death = {
            let e: f64 = Exp1.sample(rng);
            e * config.trap_lifetime
        };
        // invert the integrated onset hazard through the normal CDF
        let t_on = {
            let e: f64 = Exp1.sample(rng);
            if onset_coeff <= 0.0 {
                continue;
            }
            let u0 = (0.0 - t_cross) * (2.0 * a_t).sqrt();
            let target = normal.cdf(u0) + e / onset_coeff;
            let u_end = (duration - t_cross) * (2.0 * a_t).sqrt();
            if target >= normal.cdf(u_end) {
                continue; // beam leaves before the atom turns bright
            }
            t_cross + normal.inverse_cdf(target) / (2.0 * a_t).sqrt()
        };
        if t_on >= t_death {
            continue; // lost from the trap while still dark
        }
        // burst ends when the beam has moved four waists past the site
        let hard_end = (t_cross + 4.0 * w / v).min(t_death).min(duration);

        // primary atom, then the weaker companion emitter in the same column
        for pass in 0..2 {
            let eta = if pass == 0 {
                config.detection_efficiency
            } else {
                config.detection_efficiency * config.companion_ratio
            };
            let mut emitted = 0u64;
            let mut t = t_on;
            let mut t_reset = t_on;
            while emitted < budget {
                let step: f64 = Exp1.sample(rng);
                t += step / gamma;
                if t >= hard_end {
                    break;
                }
                let dx = v * t - 4.0 * w - x_site; // beam center minus site
                let s_local = s0 * (-2.0 * dx * dx / (w * w)).exp();
                if rng.gen::<f64>() < acceptance_probability(gamma, s_local, t - t_reset) {
                    emitted += 1;
                    stats.emissions += 1;
                    t_reset = t;
                    if rng.gen::<f64>() < eta {
                        let channel = u8::from(rng.gen::<f64>() < 0.5);
                        records.push(TagRecord {
                            channel,
                            timestamp: (t / res).round() as u64,
                        });
                    }
                }
            }
        }
    }

    // uniform background on each channel
    for channel in 0..2u8 {
        let mut t = 0.0;
        loop {
            let step: f64 = Exp1.sample(rng);
            t += step / config.background_rate;
            if t >= duration || !t.is_finite() {
                break;
            }
            records.push(TagRecord {
                channel,
                timestamp: (t / res).round() as u64,
            });
        }
    }

    records.sort_by_key(|r| (r.timestamp, r.channel));
    Ok((records, stats))
}

/// Simulate `n_scans` consecutive sweeps and merge them into one stream.
///
/// Scan `k` runs on stream `k` of the configured seed and is offset by
/// `k * scan_ticks()`; scans are simulated in parallel but the merged
/// output is independent of thread count.
pub fn simulate_scans(config: &ExperimentConfig, n_scans: u64) -> Result<TimeTagStream> {
    Ok(simulate_scans_with_stats(config, n_scans)?.0)
}

/// [`simulate_scans`], also returning the emission totals of the run.
pub fn simulate_scans_with_stats(
    config: &ExperimentConfig,
    n_scans: u64,
) -> Result<(TimeTagStream, ScanStats)> {
    config.validate()?;
    if n_scans == 0 {
        return Err(Error::Input("n_scans must be at least 1".into()));
    }
    let scan_ticks = config.scan_ticks();
    let mut per_scan: Vec<(Vec<TagRecord>, ScanStats)> = (0..n_scans)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k);
            let occupancy = sample_occupancy(config, &mut rng);
            let (records, stats) = scan_records(config, &occupancy, &mut rng)?;
            let offset = k * scan_ticks;
            let shifted = records
                .into_iter()
                .map(|r| TagRecord {
                    channel: r.channel,
                    timestamp: r.timestamp + offset,
                })
                .collect();
            Ok((shifted, stats))
        })
        .collect::<Result<_>>()?;
    let stats = per_scan
        .iter()
        .map(|(_, s)| *s)
        .fold(ScanStats::default(), ScanStats::merge);
    let mut records: Vec<TagRecord> = per_scan.drain(..).map(|(r, _)| r).flatten().collect();
    records.sort_by_key(|r| (r.timestamp, r.channel));
    Ok((
        TimeTagStream::from_records(config.resolution_fs(), records),
        stats,
    ))
}

/// Total photocounts (both channels) in each site window of each scan.
/// Windows are ordered scan-major: entry `k * n_sites + i` is site `i` of
/// scan `k`. `stream` must hold globally sorted timestamps as produced by
/// [`simulate_scans`].
pub fn window_counts(
    stream: &TimeTagStream,
    config: &ExperimentConfig,
    n_scans: u64,
) -> Result<Vec<u32>> {
    config.validate()?;
    if n_scans == 0 {
        return Err(Error::Input("n_scans must be at least 1".into()));
    }
    let ts: Vec<u64> = stream.records.iter().map(|r| r.timestamp).collect();
    if ts.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::Input(
            "stream timestamps must be globally sorted".into(),
        ));
    }
    let scan_ticks = config.scan_ticks();
    let mut counts = Vec::with_capacity(n_scans as usize * config.n_sites);
    for k in 0..n_scans {
        let offset = k * scan_ticks;
        for i in 0..config.n_sites {
            let (lo, hi) = config.site_window_ticks(i);
            let a = ts.partition_point(|&t| t < offset + lo);
            let b = ts.partition_point(|&t| t < offset + hi);
            counts.push((b - a) as u32);
        }
    }
    Ok(counts)
}
