//! Jamming-aware Gaussian-noise SNR model.
//!
//! A channel's SNR is its PSD over the sum of four noise PSDs:
//!
//! * ASE, accumulated once per amplified span;
//! * secure NLI, self- and cross-channel interference from other lightpaths
//!   on each link, scaled by that link's span count;
//! * out-of-band jamming NLI, the cross-channel term of the jammer's excess
//!   power `ε² + 2εP` on attacked links;
//! * in-band jamming, the jammer's excess PSD over the part of the channel
//!   that overlaps a jammed range.
//!
//! Everything is evaluated in SI units; [`PhyParams`] holds the datasheet
//! units and converts on construction of a [`Physics`].

use std::f64::consts::{LN_10, PI};

use thiserror::Error;

use crate::spectrum::SlotBlock;

#[derive(Debug, Error, PartialEq)]
pub enum PhyError {
    #[error("cannot take the dB value of non-positive {0}")]
    NonPositive(f64),
    #[error("channel at {target_hz} Hz overlaps an interferer at {other_hz} Hz")]
    Overlap { target_hz: f64, other_hz: f64 },
    #[error("invalid physical parameter `{0}`")]
    InvalidParam(&'static str),
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64, PhyError> {
    if x > 0.0 {
        Ok(10.0 * x.log10())
    } else {
        Err(PhyError::NonPositive(x))
    }
}

/// Physical constants in datasheet units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyParams {
    /// Launch power of every lightpath (dBm).
    pub tx_power_dbm: f64,
    pub slot_width_hz: f64,
    pub attenuation_db_per_km: f64,
    pub span_length_km: f64,
    /// Nonlinear coefficient (1/(W·km)).
    pub gamma_per_w_km: f64,
    /// |β2| (ps²/km).
    pub beta2_ps2_per_km: f64,
    pub light_frequency_hz: f64,
    pub noise_figure_db: f64,
    pub planck: f64,
    /// Frequency of the lower edge of slot 0; only differences matter.
    pub grid_origin_hz: f64,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            tx_power_dbm: 0.0,
            slot_width_hz: 12.5e9,
            attenuation_db_per_km: 0.2,
            span_length_km: 100.0,
            gamma_per_w_km: 1.22,
            beta2_ps2_per_km: 16.0,
            light_frequency_hz: 1.93e14,
            noise_figure_db: 6.0,
            planck: 6.626_070_15e-34,
            grid_origin_hz: 0.0,
        }
    }
}

impl PhyParams {
    pub fn validate(&self) -> Result<(), PhyError> {
        let positive = [
            (self.slot_width_hz, "slot_width_hz"),
            (self.attenuation_db_per_km, "attenuation_db_per_km"),
            (self.span_length_km, "span_length_km"),
            (self.gamma_per_w_km, "gamma_per_w_km"),
            (self.beta2_ps2_per_km, "beta2_ps2_per_km"),
            (self.light_frequency_hz, "light_frequency_hz"),
            (self.planck, "planck"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhyError::InvalidParam(name));
            }
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(PhyError::InvalidParam("tx_power_dbm"));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(PhyError::InvalidParam("noise_figure_db"));
        }
        Ok(())
    }

    /// Power attenuation in nepers per metre.
    pub fn alpha_per_m(&self) -> f64 {
        self.attenuation_db_per_km * LN_10 / 10.0 / 1e3
    }

    pub fn beta2_s2_per_m(&self) -> f64 {
        self.beta2_ps2_per_km * 1e-24 / 1e3
    }

    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km / 1e3
    }

    pub fn span_length_m(&self) -> f64 {
        self.span_length_km * 1e3
    }

    pub fn tx_power_w(&self) -> f64 {
        db_to_linear(self.tx_power_dbm) * 1e-3
    }

    /// `3γ² / (2π α |β2|)`.
    pub fn phi(&self) -> f64 {
        3.0 * self.gamma_per_w_m().powi(2) / (2.0 * PI * self.alpha_per_m() * self.beta2_s2_per_m())
    }

    /// `π² |β2| / (2α)`.
    pub fn rho(&self) -> f64 {
        PI * PI * self.beta2_s2_per_m() / (2.0 * self.alpha_per_m())
    }

    pub fn physics(&self) -> Result<Physics, PhyError> {
        self.validate()?;
        Ok(Physics {
            params: *self,
            phi: self.phi(),
            rho: self.rho(),
            g0_ase: g0_ase(self),
            power_w: self.tx_power_w(),
        })
    }
}

/// Validated parameters with derived coefficients cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub params: PhyParams,
    pub phi: f64,
    pub rho: f64,
    pub g0_ase: f64,
    /// Per-lightpath launch power (W).
    pub power_w: f64,
}

impl Physics {
    pub fn table1() -> Self {
        PhyParams::default().physics().expect("default parameters are valid")
    }

    /// A lightpath channel at the nominal launch power.
    pub fn channel(&self, block: SlotBlock) -> Channel {
        Channel::new(block, self.power_w, &self.params, false)
    }
}

/// Per-span ASE PSD, `(e^{αL} − 1)·F·h·ν` (W/Hz).
pub fn g0_ase(params: &PhyParams) -> f64 {
    let gain = (params.alpha_per_m() * params.span_length_m()).exp() - 1.0;
    gain * db_to_linear(params.noise_figure_db) * params.planck * params.light_frequency_hz
}

/// Centre frequency of a slot block.
pub fn slot_center_frequency(block: SlotBlock, params: &PhyParams) -> f64 {
    params.grid_origin_hz + (block.start as f64 + block.width as f64 / 2.0) * params.slot_width_hz
}

/// A spectral channel as seen by the noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub block: SlotBlock,
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    /// W/Hz.
    pub psd: f64,
    pub is_jammer: bool,
}

impl Channel {
    pub fn new(block: SlotBlock, power_w: f64, params: &PhyParams, is_jammer: bool) -> Self {
        let bandwidth_hz = block.width as f64 * params.slot_width_hz;
        Channel {
            block,
            center_frequency_hz: slot_center_frequency(block, params),
            bandwidth_hz,
            psd: power_w / bandwidth_hz,
            is_jammer,
        }
    }

    pub fn power_w(&self) -> f64 {
        self.psd * self.bandwidth_hz
    }

    /// `|f_m − f_m'|`.
    pub fn spacing(&self, other: &Channel) -> f64 {
        (self.center_frequency_hz - other.center_frequency_hz).abs()
    }

    pub fn overlaps(&self, other: &Channel) -> bool {
        self.block.overlaps(&other.block)
    }
}

/// `ln((f + Δ/2) / (f − Δ/2))` for an interferer of bandwidth Δ at spacing f.
fn cross_log(target: &Channel, other: &Channel) -> Result<f64, PhyError> {
    let f = target.spacing(other);
    let half = other.bandwidth_hz / 2.0;
    if f <= half {
        return Err(PhyError::Overlap {
            target_hz: target.center_frequency_hz,
            other_hz: other.center_frequency_hz,
        });
    }
    Ok(((f + half) / (f - half)).ln())
}

/// Channels present on one link of a route, with the link's span count.
#[derive(Debug, Clone, Copy)]
pub struct LinkChannels<'a> {
    pub spans: u32,
    pub channels: &'a [Channel],
}

/// Secure NLI PSD of `target` summed over links.
///
/// Jammer channels in the lists are skipped; their excess power is handled by
/// [`jamming_psd`].
pub fn nli_secure_psd(
    target: &Channel,
    links: &[LinkChannels<'_>],
    physics: &Physics,
) -> Result<f64, PhyError> {
    let g = target.psd;
    let self_term = g * g * (physics.rho * target.bandwidth_hz * target.bandwidth_hz).asinh();
    let mut total = 0.0;
    for link in links {
        if link.spans == 0 {
            continue;
        }
        let mut cross = 0.0;
        for other in link.channels.iter().filter(|c| !c.is_jammer) {
            cross += other.psd * other.psd * cross_log(target, other)?;
        }
        total += link.spans as f64 * physics.phi * g * (self_term + cross);
    }
    Ok(total)
}

/// Out-of-band jamming NLI PSD of `target` from the jammed channels of each link.
///
/// `epsilon_w` is the jammer's additional power above the nominal per-channel
/// power; the jammer bandwidth is taken from each jammed channel.
pub fn jamming_psd(
    target: &Channel,
    jammed: &[LinkChannels<'_>],
    epsilon_w: f64,
    physics: &Physics,
) -> Result<f64, PhyError> {
    if epsilon_w == 0.0 {
        return Ok(0.0);
    }
    let p = physics.power_w;
    let excess = epsilon_w * epsilon_w + 2.0 * epsilon_w * p;
    let mut total = 0.0;
    for link in jammed {
        let mut sum = 0.0;
        for j in link.channels {
            let delta = j.bandwidth_hz;
            sum += excess / (delta * delta) * cross_log(target, j)?;
        }
        total += link.spans as f64 * physics.phi * target.psd * sum;
    }
    Ok(total)
}

/// In-band jamming noise: the jammer's excess PSD `ε / Δ_J`, weighted by the
/// fraction of the target's bandwidth that overlaps each jammed channel.
/// Counted once per attacked link, not per span.
pub fn inband_psd(target: &Channel, jammed: &[LinkChannels<'_>], epsilon_w: f64) -> f64 {
    let mut total = 0.0;
    for link in jammed {
        for j in link.channels {
            let overlap = target.block.overlap(&j.block);
            if overlap > 0 {
                let fraction = overlap as f64 / target.block.width as f64;
                total += epsilon_w / j.bandwidth_hz * fraction;
            }
        }
    }
    total
}

/// Per-link view of one route hop: co-propagating lightpaths and, on attacked
/// links, the jammer channels.
#[derive(Debug, Clone, Copy)]
pub struct HopState<'a> {
    pub spans: u32,
    pub co_channels: &'a [Channel],
    pub jammers: &'a [Channel],
}

/// Noise terms of one SNR evaluation (W/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseBreakdown {
    pub signal: f64,
    pub ase: f64,
    pub nli: f64,
    pub jamming: f64,
    pub inband: f64,
}

impl NoiseBreakdown {
    pub fn noise(&self) -> f64 {
        self.ase + self.nli + self.jamming + self.inband
    }

    pub fn snr(&self) -> f64 {
        self.signal / self.noise()
    }

    pub fn without_jamming(&self) -> NoiseBreakdown {
        NoiseBreakdown {
            jamming: 0.0,
            inband: 0.0,
            ..*self
        }
    }
}

/// ASE PSD accumulated over `spans` amplified spans.
pub fn ase_psd(spans: u32, physics: &Physics) -> f64 {
    spans as f64 * physics.g0_ase
}

/// Evaluates every noise term of `target` along a route.
///
/// Jammer channels that overlap the target contribute in-band noise; the rest
/// contribute out-of-band NLI.
pub fn noise_breakdown(
    target: &Channel,
    hops: &[HopState<'_>],
    epsilon_w: f64,
    physics: &Physics,
) -> Result<NoiseBreakdown, PhyError> {
    let spans: u32 = hops.iter().map(|h| h.spans).sum();
    let secure: Vec<LinkChannels> = hops
        .iter()
        .map(|h| LinkChannels {
            spans: h.spans,
            channels: h.co_channels,
        })
        .collect();
    let nli = nli_secure_psd(target, &secure, physics)?;

    let mut jamming = 0.0;
    let mut inband = 0.0;
    if epsilon_w != 0.0 {
        for h in hops.iter().filter(|h| !h.jammers.is_empty()) {
            let (over, out): (Vec<Channel>, Vec<Channel>) =
                h.jammers.iter().partition(|j| j.overlaps(target));
            jamming += jamming_psd(
                target,
                &[LinkChannels {
                    spans: h.spans,
                    channels: &out,
                }],
                epsilon_w,
                physics,
            )?;
            inband += inband_psd(
                target,
                &[LinkChannels {
                    spans: h.spans,
                    channels: &over,
                }],
                epsilon_w,
            );
        }
    }
    Ok(NoiseBreakdown {
        signal: target.psd,
        ase: ase_psd(spans, physics),
        nli,
        jamming,
        inband,
    })
}

/// Linear SNR of `target` along a route; `epsilon_w = 0` means no jammer.
pub fn snr(
    target: &Channel,
    hops: &[HopState<'_>],
    epsilon_w: f64,
    physics: &Physics,
) -> Result<f64, PhyError> {
    Ok(noise_breakdown(target, hops, epsilon_w, physics)?.snr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub name: &'static str,
    pub bits_per_symbol: u32,
    pub snr_threshold_db: f64,
}

/// Supported formats, lowest spectral efficiency first.
pub const MODULATIONS: [Modulation; 6] = [
    Modulation {
        name: "BPSK",
        bits_per_symbol: 1,
        snr_threshold_db: 9.0,
    },
    Modulation {
        name: "QPSK",
        bits_per_symbol: 2,
        snr_threshold_db: 9.0,
    },
    Modulation {
        name: "8QAM",
        bits_per_symbol: 3,
        snr_threshold_db: 12.0,
    },
    Modulation {
        name: "16QAM",
        bits_per_symbol: 4,
        snr_threshold_db: 15.0,
    },
    Modulation {
        name: "32QAM",
        bits_per_symbol: 5,
        snr_threshold_db: 18.0,
    },
    Modulation {
        name: "64QAM",
        bits_per_symbol: 6,
        snr_threshold_db: 21.0,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Pass iff the SNR reaches the modulation threshold (inclusive).
///
/// Compared in the linear domain so that `db_to_linear(threshold)` itself
/// passes without a round-trip through `log10`.
pub fn qot_verdict(snr_linear: f64, modulation: &Modulation) -> Verdict {
    if snr_linear > 0.0 && snr_linear >= db_to_linear(modulation.snr_threshold_db) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}
