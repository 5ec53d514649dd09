//! Tower configuration files.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use spectra_core::serre::{eilenberg_maclane_tower, TwistKind, Tower};
use spectra_core::simplicial::{eilenberg_maclane, sphere, KSpace, SSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceConfig {
    K { modulus: u32, degree: u32 },
    Sphere { dim: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwistConfig {
    Trivial,
    Universal,
}

fn default_budget() -> usize {
    spectra_core::homotopy::DEFAULT_BPL_BUDGET
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerConfig {
    pub spaces: Vec<SpaceConfig>,
    pub twists: Vec<TwistConfig>,
    pub max_degree: i32,
    #[serde(default = "default_budget")]
    pub bpl_budget: usize,
}

/// 1-based line of the first occurrence of `"key"` in `src`.
fn line_of(src: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

impl TowerConfig {
    pub fn parse(src: &str, path: &str) -> Result<TowerConfig> {
        let cfg: TowerConfig = serde_json::from_str(src).map_err(|e| anyhow!("{path}:{}: {e}", e.line()))?;
        let at = |key: &str| format!("{path}:{}", line_of(src, key));
        if cfg.spaces.len() < 2 {
            bail!("{}: a tower needs at least one fiber and a base, got {} spaces", at("spaces"), cfg.spaces.len());
        }
        if cfg.twists.len() + 1 != cfg.spaces.len() {
            bail!(
                "{}: {} spaces need {} twists, got {}",
                at("twists"),
                cfg.spaces.len(),
                cfg.spaces.len() - 1,
                cfg.twists.len()
            );
        }
        if cfg.max_degree < 0 {
            bail!("{}: max_degree must be nonnegative", at("max_degree"));
        }
        if cfg.bpl_budget == 0 {
            bail!("{}: bpl_budget must be positive", at("bpl_budget"));
        }
        for (i, s) in cfg.spaces[..cfg.spaces.len() - 1].iter().enumerate() {
            if let SpaceConfig::Sphere { .. } = s {
                bail!("{}: fiber {i} must be an Eilenberg–MacLane space, spheres can only be the base", at("spaces"));
            }
        }
        for (i, t) in cfg.twists.iter().enumerate() {
            if *t != TwistConfig::Universal {
                continue;
            }
            let (SpaceConfig::K { modulus, degree }, next) = (cfg.spaces[i], cfg.spaces[i + 1]) else {
                unreachable!("fibers are K spaces")
            };
            if cfg.twists.get(i + 1) == Some(&TwistConfig::Universal) {
                bail!("{}: a universal twist at level {i} needs an untwisted level {}", at("twists"), i + 1);
            }
            if next != (SpaceConfig::K { modulus, degree: degree + 1 }) {
                bail!(
                    "{}: a universal twist at level {i} needs space {} to be K(Z/{modulus},{}), the classifying space of space {i}",
                    at("twists"),
                    i + 1,
                    degree + 1
                );
            }
        }
        Ok(cfg)
    }

    pub fn m(&self) -> usize {
        self.twists.len()
    }

    pub fn build(&self) -> Result<Tower> {
        let k = |modulus: u32, degree: u32| -> Result<Arc<KSpace>> {
            eilenberg_maclane(modulus, degree).map_err(|e| anyhow!("K(Z/{modulus},{degree}): {e}"))
        };
        let mut fibers = Vec::new();
        for s in &self.spaces[..self.m()] {
            let SpaceConfig::K { modulus, degree } = *s else { unreachable!("validated") };
            fibers.push(k(modulus, degree)?);
        }
        let (base, base_k): (SSet, Option<Arc<KSpace>>) = match *self.spaces.last().expect("validated") {
            SpaceConfig::K { modulus, degree } => {
                let b = k(modulus, degree)?;
                (b.clone(), Some(b))
            }
            SpaceConfig::Sphere { dim } => (sphere(dim).map_err(|e| anyhow!("S^{dim}: {e}"))?, None),
        };
        let kinds: Vec<TwistKind> = self
            .twists
            .iter()
            .map(|t| match t {
                TwistConfig::Trivial => TwistKind::Trivial,
                TwistConfig::Universal => TwistKind::Universal,
            })
            .collect();
        eilenberg_maclane_tower(fibers, base, base_k, &kinds).context("invalid tower")
    }
}
