//! Named run sets for the benchmark comparisons.
//!
//! Each comparison preset sweeps BEM `b in {100, 1000, 10000}`, OEM
//! `c in {0.6, 0.75, 0.9}`, AVG with `c = 0.6` and `t0 = T/2`, and IOEM. The
//! trace presets run IOEM, OEM at 0.6 and 0.9 and one AVG on one replicate.

use ioem_core::em::DEFAULT_CAP_C;
use ioem_core::Method;

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::{config_err, Result};

pub const PRESETS: &[&str] = &["fig1", "fig2", "fig3", "sv", "sup1", "sup2", "sup3", "sup4", "sup5", "sup6"];

/// A method whose AVG threshold may scale with `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodSpec {
    Fixed(Method<f64>),
    /// AVG with `t0 = T / divisor`.
    AvgScaled { c: f64, divisor: usize },
}

impl MethodSpec {
    pub fn resolve(self, steps: usize) -> Method<f64> {
        match self {
            MethodSpec::Fixed(m) => m,
            MethodSpec::AvgScaled { c, divisor } => Method::Avg {
                c,
                t0: (steps / divisor).max(1),
            },
        }
    }
}

/// A template config plus the methods to run it with.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    /// Every field but `method` is used as is.
    pub template: ExperimentConfig,
    pub methods: Vec<MethodSpec>,
}

impl Preset {
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        self.methods
            .iter()
            .map(|m| ExperimentConfig {
                method: m.resolve(self.template.steps),
                ..self.template.clone()
            })
            .collect()
    }
}

fn sweep(avg_divisor: usize) -> Vec<MethodSpec> {
    let mut methods: Vec<MethodSpec> = [100, 1000, 10_000]
        .into_iter()
        .map(|batch| MethodSpec::Fixed(Method::Bem { batch }))
        .collect();
    methods.extend([0.6, 0.75, 0.9].map(|c| MethodSpec::Fixed(Method::Oem { c })));
    methods.push(MethodSpec::AvgScaled { c: 0.6, divisor: avg_divisor });
    methods.push(MethodSpec::Fixed(Method::Ioem { cap_c: DEFAULT_CAP_C }));
    methods
}

fn traces(avg_divisor: usize) -> Vec<MethodSpec> {
    vec![
        MethodSpec::Fixed(Method::Ioem { cap_c: DEFAULT_CAP_C }),
        MethodSpec::Fixed(Method::Oem { c: 0.6 }),
        MethodSpec::Fixed(Method::Oem { c: 0.9 }),
        MethodSpec::AvgScaled { c: 0.6, divisor: avg_divisor },
    ]
}

pub fn preset(name: &str) -> Result<Preset> {
    let (model, methods, replicates) = match name {
        "fig1" => (ModelKind::SimplifiedAr, sweep(2), 100),
        "fig2" | "sup1" => (ModelKind::FullAr, sweep(2), 100),
        "fig3" | "sup3" => (ModelKind::TwoDimAr, sweep(2), 100),
        "sv" | "sup2" => (ModelKind::StochasticVolatility, sweep(2), 100),
        "sup4" => (ModelKind::TwoDimAr, traces(2), 1),
        "sup5" => (ModelKind::TwoDimAr, sweep(10), 100),
        "sup6" => (ModelKind::TwoDimAr, traces(10), 1),
        other => {
            return config_err(format!("unknown preset {other:?}; available presets: {}", PRESETS.join(", ")))
        }
    };
    let mut template = ExperimentConfig::new(model, Method::Ioem { cap_c: DEFAULT_CAP_C });
    template.replicates = replicates;
    template.out = format!("out/{name}").into();
    Ok(Preset {
        name: PRESETS.iter().find(|p| **p == name).copied().unwrap_or("custom"),
        template,
        methods,
    })
}

/// Expanded configs of a preset at its stated scale.
pub fn load_preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    Ok(preset(name)?.expand())
}
