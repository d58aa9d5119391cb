use serde::Serialize;

use super::amplifier::{amplifier_transform, DEFAULT_TRACE_DEFICIT_BOUND};
use super::passive::passive_transform;
use super::states::{ChannelPrep, InputSpec};
use super::trace::partial_trace;
use super::FockError;
use crate::fourport::{build_lambda, DeviceKind, DeviceMatrices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMethod {
    ClosedForm,
    Simulation,
}

/// Photon-number probabilities `p_k`, `k = 0, 1, …`, of one output channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDistribution {
    pub probabilities: Vec<f64>,
    pub method: DistributionMethod,
}

impl ChannelDistribution {
    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// `p_k = C(n,k) τᵏ (1−τ)ⁿ⁻ᵏ`.
pub fn binomial_distribution(n: usize, tau: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        p.push(binom * tau.powi(k as i32) * (1.0 - tau).powi((n - k) as i32));
    }
    p
}

/// One photon in each field input of a lossy device; `p`, `q` are the
/// transmissions `|T_ij|²` of the two inputs into the observed channel.
pub fn coincidence_distribution(p: f64, q: f64) -> Vec<f64> {
    vec![1.0 - p - q + 2.0 * p * q, p + q - 4.0 * p * q, 2.0 * p * q]
}

/// Photon statistics of field output `channel` (0 or 1).
///
/// Absorbing devices with ground-state device channels and the inputs
/// `|n,0⟩`, `|0,n⟩` or `|1,1⟩` use closed forms. Everything else is
/// simulated: passively at the exact cutoff, amplifiers at `cutoff`.
pub fn output_channel_distribution(
    dev: &DeviceMatrices,
    input: &InputSpec,
    channel: usize,
    cutoff: usize,
) -> Result<ChannelDistribution, FockError> {
    if channel > 1 {
        return Err(FockError::InvalidChannel(channel));
    }
    if dev.kind() == DeviceKind::Absorbing {
        if let Some(p) = closed_form(dev, input, channel) {
            return Ok(ChannelDistribution { probabilities: p, method: DistributionMethod::ClosedForm });
        }
    }
    let lambda = build_lambda(dev)?;
    let reduced = match dev.kind() {
        DeviceKind::Absorbing => {
            let n = input.max_total_photons();
            let rho = passive_transform(&input.to_density(n)?, &lambda)?;
            partial_trace(&rho, &[channel])?
        }
        DeviceKind::Amplifying => {
            let ens = input.to_ensemble(input.channels.iter().map(ChannelPrep::max_photons).max().unwrap_or(0))?;
            let out = amplifier_transform(&ens, &lambda, cutoff, DEFAULT_TRACE_DEFICIT_BOUND)?;
            out.state.partial_trace(&[channel])?
        }
    };
    Ok(ChannelDistribution { probabilities: reduced.mode_distribution(0)?, method: DistributionMethod::Simulation })
}

fn closed_form(dev: &DeviceMatrices, input: &InputSpec, channel: usize) -> Option<Vec<f64>> {
    let [a1, a2, g1, g2] = &input.channels;
    if *g1 != ChannelPrep::Vacuum || *g2 != ChannelPrep::Vacuum {
        return None;
    }
    let tau = |j: usize| dev.t()[(channel, j)].norm_sqr();
    let photons = |c: &ChannelPrep| match c {
        ChannelPrep::Vacuum => Some(0),
        ChannelPrep::Fock(n) => Some(*n),
        ChannelPrep::Density(_) => None,
    };
    match (photons(a1)?, photons(a2)?) {
        (n, 0) => Some(binomial_distribution(n, tau(0))),
        (0, n) => Some(binomial_distribution(n, tau(1))),
        (1, 1) => Some(coincidence_distribution(tau(0), tau(1))),
        _ => None,
    }
}
