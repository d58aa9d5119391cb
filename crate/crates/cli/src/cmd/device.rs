use kkqed::fockspace::{
    amplifier_transform, output_channel_distribution, partial_trace, passive_transform, read_density, ChannelPrep,
    DistributionMethod, FockError, TruncationStatus, DEFAULT_AMPLIFIER_CUTOFF, DEFAULT_TRACE_DEFICIT_BOUND,
};
use kkqed::fourport::{build_lambda, check_group, GroupResidual};
use kkqed::layered1d::scattering_amplitudes;
use kkqed::{CMat2, DeviceKind, DeviceMatrices, FockDensity, FockEnsemble, InputSpec};
use num_complex::Complex64;
use serde::Serialize;

use super::Context;
use crate::config::{DeviceConfig, DeviceKindConfig, InputConfig};
use crate::error::{CliError, Result, Status};
use crate::output::{matrix, num, Csv};

#[derive(Serialize)]
struct ChannelReport {
    channel: usize,
    method: &'static str,
    probabilities: Vec<f64>,
    mean_photons: f64,
}

#[derive(Serialize)]
struct Summary {
    kind: DeviceKind,
    omega_rad_s: Option<f64>,
    t: Vec<Vec<[f64; 2]>>,
    a: Vec<Vec<[f64; 2]>>,
    lambda: Vec<Vec<[f64; 2]>>,
    group_residual: GroupResidual,
    cutoff: usize,
    channels: Vec<ChannelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_deficit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_deficit_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation_warning: Option<bool>,
}

enum Input {
    Product(InputSpec),
    Density(FockDensity),
}

fn cmat(rows: &[[[f64; 2]; 2]; 2]) -> CMat2 {
    CMat2::from_fn(|i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
}

fn build_device(cfg: &DeviceConfig, ctx: &Context) -> Result<DeviceMatrices> {
    let sources = [cfg.stack.is_some(), cfg.matrices.is_some(), cfg.squeeze_r.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(CliError::Config("device needs exactly one of `stack`, `matrices`, `squeeze_r`".into()));
    }
    if let Some(stack) = &cfg.stack {
        let omega = cfg.omega_rad_s.ok_or_else(|| CliError::Config("device from a stack needs `omega_rad_s`".into()))?;
        let pair = scattering_amplitudes(&ctx.resolver.stack(stack)?, omega)?;
        return Ok(DeviceMatrices::from_scattering(&pair)?);
    }
    if let Some(r) = cfg.squeeze_r {
        if !(r.is_finite() && r >= 0.0) {
            return Err(CliError::Invalid(format!("squeeze_r must be finite and non-negative, got {r}")));
        }
        return Ok(DeviceMatrices::squeezer(r));
    }
    let m = cfg.matrices.as_ref().expect("one source is present");
    let t = cmat(&m.t);
    Ok(match (m.kind, &m.a) {
        (DeviceKindConfig::Absorbing, None) => DeviceMatrices::absorbing(t)?,
        (DeviceKindConfig::Absorbing, Some(a)) => DeviceMatrices::new(t, cmat(a), DeviceKind::Absorbing)?,
        (DeviceKindConfig::Amplifying, Some(a)) => DeviceMatrices::new(t, cmat(a), DeviceKind::Amplifying)?,
        (DeviceKindConfig::Amplifying, None) => {
            return Err(CliError::Config("amplifying matrices need an explicit `a`".into()));
        }
    })
}

fn build_input(cfg: &InputConfig, ctx: &Context) -> Result<Input> {
    match (&cfg.fock, &cfg.density) {
        (Some(_), Some(_)) => Err(CliError::Config("input takes either `fock` or `density`, not both".into())),
        (None, Some(path)) => {
            let path = ctx.resolver.base().join(path);
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let rho = read_density(&text).map_err(|e| match e {
                FockError::Parse { line, message } => CliError::Parse { path: path.clone(), line, message },
                other => other.into(),
            })?;
            if rho.basis().modes() != 4 {
                return Err(CliError::Invalid(format!("input density must have 4 modes, got {}", rho.basis().modes())));
            }
            Ok(Input::Density(rho))
        }
        (fock, None) => {
            let n = fock.clone().unwrap_or_default();
            if !(n.is_empty() || n.len() == 2 || n.len() == 4) {
                return Err(CliError::Config(format!("`fock` needs 2 or 4 entries, got {}", n.len())));
            }
            let prep = |i: usize| match n.get(i).copied().unwrap_or(0) {
                0 => ChannelPrep::Vacuum,
                k => ChannelPrep::Fock(k),
            };
            Ok(Input::Product(InputSpec::new([prep(0), prep(1), prep(2), prep(3)])?))
        }
    }
}

fn report(channel: usize, method: DistributionMethod, probabilities: Vec<f64>) -> ChannelReport {
    let mean_photons = probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let method = match method {
        DistributionMethod::ClosedForm => "closed_form",
        DistributionMethod::Simulation => "simulation",
    };
    ChannelReport { channel: channel + 1, method, probabilities, mean_photons }
}

pub fn run(cfg: &DeviceConfig, ctx: &Context) -> Result<Status> {
    let dev = build_device(cfg, ctx)?;
    let input = build_input(&cfg.input, ctx)?;
    let lambda = build_lambda(&dev)?;

    let mut deficit = None;
    let mut warning = None;
    let mut bound = None;
    let (cutoff, channels) = match dev.kind() {
        DeviceKind::Absorbing => match &input {
            Input::Product(spec) => {
                let required = spec.max_total_photons();
                let cutoff = cfg.cutoff.unwrap_or(required);
                if cutoff < required {
                    return Err(FockError::CutoffTooSmall { cutoff, required }.into());
                }
                let channels = (0..2)
                    .map(|ch| {
                        let d = output_channel_distribution(&dev, spec, ch, cutoff)?;
                        Ok(report(ch, d.method, d.probabilities))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (cutoff, channels)
            }
            Input::Density(rho) => {
                let out = passive_transform(rho, &lambda)?;
                let channels = (0..2)
                    .map(|ch| Ok(report(ch, DistributionMethod::Simulation, partial_trace(&out, &[ch])?.mode_distribution(0)?)))
                    .collect::<Result<Vec<_>>>()?;
                (rho.basis().cutoff(), channels)
            }
        },
        DeviceKind::Amplifying => {
            let cutoff = cfg.cutoff.unwrap_or(DEFAULT_AMPLIFIER_CUTOFF);
            let ensemble = match &input {
                Input::Product(spec) => {
                    let per_mode = spec.channels.iter().map(ChannelPrep::max_photons).max().unwrap_or(0);
                    if cutoff < per_mode {
                        return Err(FockError::CutoffTooSmall { cutoff, required: per_mode }.into());
                    }
                    spec.to_ensemble(per_mode)?
                }
                Input::Density(rho) => FockEnsemble::from_density(rho),
            };
            let b = ctx.tolerance.unwrap_or(DEFAULT_TRACE_DEFICIT_BOUND);
            let out = amplifier_transform(&ensemble, &lambda, cutoff, b)?;
            deficit = Some(out.trace_deficit);
            bound = Some(b);
            warning = Some(out.status == TruncationStatus::Warning);
            let channels = (0..2)
                .map(|ch| Ok(report(ch, DistributionMethod::Simulation, out.state.partial_trace(&[ch])?.mode_distribution(0)?)))
                .collect::<Result<Vec<_>>>()?;
            (cutoff, channels)
        }
    };

    let mut csv = Csv::new(&["channel", "photons", "probability"]);
    for ch in &channels {
        for (n, p) in ch.probabilities.iter().enumerate() {
            csv.row([ch.channel.to_string(), n.to_string(), num(*p)]);
        }
    }
    let summary = Summary {
        kind: dev.kind(),
        omega_rad_s: cfg.omega_rad_s,
        t: matrix(dev.t(), 2),
        a: matrix(dev.a(), 2),
        lambda: matrix(lambda.matrix(), 4),
        group_residual: check_group(&lambda),
        cutoff,
        channels,
        trace_deficit: deficit,
        trace_deficit_bound: bound,
        truncation_warning: warning,
    };
    ctx.out.write("device_channels.csv", &csv.into_string())?;
    ctx.out.write_json("device.json", &summary)?;
    Ok(if warning == Some(true) { Status::Threshold } else { Status::Success })
}
