//! Run configuration: constraint thresholds and weights, search parameters,
//! capacity method, and evaluation knobs, loaded from TOML.

use serde::{Deserialize, Serialize};

use crate::cost::{table_default_threshold, CapacitySelection, ConstraintSpec, EvalOptions};
use crate::error::{Error, Result};
use crate::search::SearchConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Average aircraft count; no default, must be set to enable the row.
    pub t1: Option<f64>,
    /// Peak aircraft count; no default, must be set to enable the row.
    pub t2: Option<f64>,
    pub t3: Option<f64>,
    pub t4: Option<f64>,
    pub t5: Option<f64>,
    pub t6: Option<f64>,
    pub t7: Option<f64>,
    pub t8: Option<f64>,
    pub t9: Option<f64>,
    pub t10: Option<f64>,
    pub t11: Option<f64>,
    pub t12: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub w6: f64,
    pub w7: f64,
    pub w8: f64,
    pub w9: f64,
    pub w10: f64,
    pub w11: f64,
    pub w12: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            w1: 1.0,
            w2: 1.0,
            w3: 1.0,
            w4: 1.0,
            w5: 1.0,
            w6: 1.0,
            w7: 1.0,
            w8: 1.0,
            w9: 1.0,
            w10: 1.0,
            w11: 1.0,
            w12: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub move_radius: f64,
    pub move_step: f64,
    pub flip_length_factors: Vec<f64>,
    pub max_iterations: usize,
}

impl Default for SearchSection {
    fn default() -> Self {
        let s = SearchConfig::default();
        SearchSection {
            move_radius: s.move_radius,
            move_step: s.move_step,
            flip_length_factors: s.flip_length_factors,
            max_iterations: s.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub capacity_method: CapacitySelection,
    pub lane_width_deg: f64,
    pub horizon_start_s: f64,
    pub horizon_end_s: f64,
    pub nmi_per_deg: f64,
    pub slab_thickness_nmi: f64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        let o = EvalOptions::default();
        EvaluationSection {
            capacity_method: CapacitySelection::Map,
            lane_width_deg: o.lane_width_deg,
            horizon_start_s: o.horizon.0,
            horizon_end_s: o.horizon.1,
            nmi_per_deg: o.nmi_per_deg,
            slab_thickness_nmi: o.slab_thickness_nmi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub thresholds: Thresholds,
    pub weights: Weights,
    pub search: SearchSection,
    pub evaluation: EvaluationSection,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let w = &self.weights;
        let all = [
            w.w1, w.w2, w.w3, w.w4, w.w5, w.w6, w.w7, w.w8, w.w9, w.w10, w.w11, w.w12,
        ];
        if all.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Config("weights must be finite and non-negative".into()));
        }
        if self.search.move_radius <= 0.0 || self.search.move_step <= 0.0 {
            return Err(Error::Config("search grid must have positive radius and step".into()));
        }
        if self.evaluation.horizon_end_s <= self.evaluation.horizon_start_s {
            return Err(Error::Config("horizon must have positive length".into()));
        }
        if self.evaluation.lane_width_deg <= 0.0 {
            return Err(Error::Config("lane width must be positive".into()));
        }
        Ok(())
    }

    /// Effective threshold for a constraint id: configured value, or the
    /// table default. Ids 1 and 2 have no default and stay disabled unless
    /// configured.
    pub fn threshold(&self, id: u8) -> Option<f64> {
        let t = &self.thresholds;
        let explicit = match id {
            1 => t.t1,
            2 => t.t2,
            3 => t.t3,
            4 => t.t4,
            5 => t.t5,
            6 => t.t6,
            7 => t.t7,
            8 => t.t8,
            9 => t.t9,
            10 => t.t10,
            11 => t.t11,
            12 => t.t12,
            _ => None,
        };
        explicit.or_else(|| table_default_threshold(id))
    }

    pub fn weight(&self, id: u8) -> f64 {
        let w = &self.weights;
        match id {
            1 => w.w1,
            2 => w.w2,
            3 => w.w3,
            4 => w.w4,
            5 => w.w5,
            6 => w.w6,
            7 => w.w7,
            8 => w.w8,
            9 => w.w9,
            10 => w.w10,
            11 => w.w11,
            12 => w.w12,
            _ => 0.0,
        }
    }

    /// The active constraint table: one spec per enabled constraint id.
    pub fn constraint_specs(&self) -> Vec<ConstraintSpec> {
        (1u8..=12)
            .filter_map(|id| {
                self.threshold(id)
                    .map(|t| ConstraintSpec::from_table(id, t, self.weight(id)))
            })
            .collect()
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            move_radius: self.search.move_radius,
            move_step: self.search.move_step,
            flip_length_factors: self.search.flip_length_factors.clone(),
            max_iterations: self.search.max_iterations,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            horizon: (self.evaluation.horizon_start_s, self.evaluation.horizon_end_s),
            capacity: self.evaluation.capacity_method,
            lane_width_deg: self.evaluation.lane_width_deg,
            df_window_deg: self.threshold(7).unwrap_or(0.3),
            nmi_per_deg: self.evaluation.nmi_per_deg,
            slab_thickness_nmi: self.evaluation.slab_thickness_nmi,
        }
    }

    /// Canonical text form of the effective configuration: every threshold,
    /// limit, and weight in constraint order, then the remaining sections.
    /// Stable across runs, used as a golden for default-checking.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "[thresholds]").unwrap();
        for id in 1u8..=12 {
            match self.threshold(id) {
                Some(t) => writeln!(s, "t{id} = {t}").unwrap(),
                None => writeln!(s, "t{id} = unset").unwrap(),
            }
        }
        writeln!(s, "[limits]").unwrap();
        for id in 1u8..=12 {
            match crate::cost::table_limit(id).0 {
                crate::cost::Limit::Finite(l) => writeln!(s, "l{id} = {l}").unwrap(),
                crate::cost::Limit::Unbounded => writeln!(s, "l{id} = unbounded").unwrap(),
            }
        }
        writeln!(s, "[weights]").unwrap();
        for id in 1u8..=12 {
            writeln!(s, "w{id} = {}", self.weight(id)).unwrap();
        }
        writeln!(s, "[search]").unwrap();
        writeln!(s, "move_radius = {}", self.search.move_radius).unwrap();
        writeln!(s, "move_step = {}", self.search.move_step).unwrap();
        let factors: Vec<String> =
            self.search.flip_length_factors.iter().map(|f| f.to_string()).collect();
        writeln!(s, "flip_length_factors = [{}]", factors.join(", ")).unwrap();
        writeln!(s, "max_iterations = {}", self.search.max_iterations).unwrap();
        writeln!(s, "[evaluation]").unwrap();
        let method = match self.evaluation.capacity_method {
            CapacitySelection::Map => "map",
            CapacitySelection::Welch => "welch",
        };
        writeln!(s, "capacity_method = {method}").unwrap();
        writeln!(s, "lane_width_deg = {}", self.evaluation.lane_width_deg).unwrap();
        writeln!(s, "horizon_start_s = {}", self.evaluation.horizon_start_s).unwrap();
        writeln!(s, "horizon_end_s = {}", self.evaluation.horizon_end_s).unwrap();
        writeln!(s, "nmi_per_deg = {}", self.evaluation.nmi_per_deg).unwrap();
        writeln!(s, "slab_thickness_nmi = {}", self.evaluation.slab_thickness_nmi).unwrap();
        s
    }
}
