//! Run configuration shared by the command line and the test harness.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::CoeffParams;
use crate::error::{Error, Result};
use crate::groupcoh::AbelianPGroup;

pub const DEFAULT_BUDGET: usize = 128;
pub const LARGE_BUDGET: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u32,
    pub n: u32,
    /// p-adic digits `N`.
    pub precision: u32,
    /// Cap `D` on total v-degree.
    pub vdeg: u32,
    /// Floor for the formal group law degree; raised automatically when short.
    pub ydeg: Option<usize>,
    pub group: Option<String>,
    /// Power bound for nonvanishing checks and saturation.
    pub t: u32,
    pub r: Option<usize>,
    /// Largest formal group law degree the planner may request.
    pub budget: usize,
    pub large: bool,
    pub cache_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 2,
            n: 1,
            precision: 16,
            vdeg: 8,
            ydeg: None,
            group: None,
            t: 8,
            r: None,
            budget: DEFAULT_BUDGET,
            large: false,
            cache_dir: None,
            report: None,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.budget < 4 {
            return Err(Error::Config("degree budget must be at least 4".into()));
        }
        if let Some(g) = &self.group {
            AbelianPGroup::parse(self.p, g)?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<CoeffParams> {
        CoeffParams::new(self.p, self.n, self.precision, self.vdeg)
    }

    pub fn group(&self) -> Result<AbelianPGroup> {
        match &self.group {
            Some(g) => AbelianPGroup::parse(self.p, g),
            None => Err(Error::Config("a group is required (--group)".into())),
        }
    }

    pub fn effective_budget(&self) -> usize {
        if self.large {
            self.budget.max(LARGE_BUDGET)
        } else {
            self.budget
        }
    }

    /// The smallest sensible floor for a group: `p^{n k_max} + 1`.
    pub fn ydeg_floor(&self, group: &AbelianPGroup) -> usize {
        let kmax = group.exps().iter().copied().max().unwrap_or(0);
        (self.p as usize).pow(self.n * kmax) + 1
    }

    /// The deterministic part of the configuration, echoed into reports.
    pub fn echo(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("p".into(), Value::from(self.p));
        m.insert("n".into(), Value::from(self.n));
        m.insert("precision".into(), Value::from(self.precision));
        m.insert("vdeg".into(), Value::from(self.vdeg));
        m.insert("ydeg".into(), self.ydeg.map_or(Value::Null, Value::from));
        m.insert("group".into(), self.group.clone().map_or(Value::Null, Value::from));
        m.insert("t".into(), Value::from(self.t));
        m.insert("r".into(), self.r.map_or(Value::Null, Value::from));
        m.insert("budget".into(), Value::from(self.effective_budget()));
        m.insert("large".into(), Value::from(self.large));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.params().unwrap().precision, 16);
        assert!(!c.echo().contains_key("cache_dir"));
    }

    #[test]
    fn bad_values_rejected() {
        let c = RunConfig { p: 4, ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { group: Some("6".into()), ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { group: Some("4,2".into()), n: 2, ..Default::default() };
        assert_eq!(c.ydeg_floor(&c.group().unwrap()), 17);
    }

    #[test]
    fn large_raises_budget() {
        let c = RunConfig { large: true, ..Default::default() };
        assert_eq!(c.effective_budget(), LARGE_BUDGET);
    }
}
