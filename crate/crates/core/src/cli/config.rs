//! Scenario configuration: a single JSON document, every field defaulted.

use serde::{Deserialize, Serialize};

use crate::adversary::{spring_params, ParamError, SpringParams};
use crate::minplus::{bounded_delay, leaky_bucket, rate_latency, staircase, step_at, zero, Curve, CurveError};
use crate::q::{q, Q};

/// Spring parameters: `r`, `b`, `dcap`, and either `d` and `eps` directly
/// or `d_fraction` and `eps_fraction` of their upper bounds.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub r: Q,
    pub b: Q,
    pub dcap: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_fraction: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_fraction: Option<Q>,
}

impl ParamSpec {
    pub fn explicit(r: Q, b: Q, dcap: Q, d: Q, eps: Q) -> ParamSpec {
        ParamSpec { r, b, dcap, d: Some(d), eps: Some(eps), d_fraction: None, eps_fraction: None }
    }

    pub fn fractions(r: Q, b: Q, dcap: Q, d_fraction: Q, eps_fraction: Q) -> ParamSpec {
        ParamSpec { r, b, dcap, d: None, eps: None, d_fraction: Some(d_fraction), eps_fraction: Some(eps_fraction) }
    }

    pub fn build(&self) -> Result<SpringParams, ParamError> {
        match (self.d, self.eps, self.d_fraction, self.eps_fraction) {
            (Some(d), Some(eps), None, None) => SpringParams::explicit(self.r, self.b, self.dcap, d, eps),
            (None, None, Some(df), Some(ef)) => spring_params(self.r, self.b, self.dcap, df, ef),
            _ => Err(ParamError::Derived("give either d and eps, or d_fraction and eps_fraction")),
        }
    }
}

/// A curve by shape and parameters.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Zero,
    LeakyBucket { rate: Q, burst: Q },
    RateLatency { rate: Q, latency: Q },
    Staircase { height: Q, period: Q },
    StepAt { height: Q, at: Q },
    BoundedDelay { delay: Q },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve, CurveError> {
        match *self {
            CurveSpec::Zero => Ok(zero()),
            CurveSpec::LeakyBucket { rate, burst } => leaky_bucket(rate, burst),
            CurveSpec::RateLatency { rate, latency } => rate_latency(rate, latency),
            CurveSpec::Staircase { height, period } => staircase(height, period),
            CurveSpec::StepAt { height, at } => step_at(height, at),
            CurveSpec::BoundedDelay { delay } => bounded_delay(delay),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CurveSpec::Zero => "zero".to_string(),
            CurveSpec::LeakyBucket { rate, burst } => format!("leaky_bucket({rate},{burst})"),
            CurveSpec::RateLatency { rate, latency } => format!("rate_latency({rate},{latency})"),
            CurveSpec::Staircase { height, period } => format!("staircase({height},{period})"),
            CurveSpec::StepAt { height, at } => format!("step_at({height},{at})"),
            CurveSpec::BoundedDelay { delay } => format!("bounded_delay({delay})"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Candidates {
    /// Claimed strict service curves of the regulator on the Spring run.
    pub strict_sc: Vec<CurveSpec>,
    /// Claimed strict service curve on the overdrive trajectory.
    #[serde(alias = "prop2")]
    pub overdrive: CurveSpec,
    /// Claimed individual service curves for the inserted flow.
    pub xm: Vec<CurveSpec>,
    /// Candidates for the FIFO residual pipeline.
    pub residual: Vec<CurveSpec>,
}

impl Default for Candidates {
    fn default() -> Candidates {
        let one = Q::ONE;
        Candidates {
            strict_sc: vec![
                CurveSpec::Staircase { height: one, period: one },
                CurveSpec::RateLatency { rate: one, latency: one },
            ],
            overdrive: CurveSpec::LeakyBucket { rate: one, burst: q(11, 10) },
            xm: vec![CurveSpec::RateLatency { rate: one, latency: one }],
            residual: vec![
                CurveSpec::LeakyBucket { rate: Q::int(4), burst: one },
                CurveSpec::Staircase { height: one, period: one },
                CurveSpec::RateLatency { rate: Q::int(3), latency: one },
            ],
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub params: ParamSpec,
    pub n_periods: usize,
    pub candidates: Candidates,
    pub out_dir: String,
    pub seed: u64,
    /// Random instances for the strict service-curve suite.
    pub strict_sc_count: usize,
    /// Random sequences for the model-equivalence suite.
    pub equivalence_count: usize,
    /// Packets on the overdrive trajectory.
    pub overdrive_packets: usize,
    /// Target delay of the inserted packet.
    pub m: Q,
    /// Size of the inserted packet.
    pub l_g: Q,
    /// Burst flow 1 is allowed at the regulator input.
    pub b1: Q,
    /// Residual offsets; multiples of I up to 20I when absent.
    pub theta_grid: Option<Vec<Q>>,
}

impl Default for ScenarioConfig {
    fn default() -> ScenarioConfig {
        ScenarioConfig {
            scenario: "spring".to_string(),
            params: ParamSpec::explicit(Q::ONE, Q::ONE, q(43, 50), q(17, 20), q(1, 20)),
            n_periods: 50,
            candidates: Candidates::default(),
            out_dir: "out".to_string(),
            seed: 42,
            strict_sc_count: 1000,
            equivalence_count: 10_000,
            overdrive_packets: 10,
            m: Q::int(10),
            l_g: q(1, 2),
            b1: Q::int(2),
            theta_grid: None,
        }
    }
}
