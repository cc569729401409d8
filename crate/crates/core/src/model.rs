//! Engagement vector model.
//!
//! Every raw indicator is mapped linearly onto `[0, 1]`, combined into a
//! cognitive, an emotional and a behavioral score, and the three scores are
//! fused into one final engagement value by a weighted sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {field} = {value} is outside {expected}")]
    Domain {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
}

/// The nine scalar indicators a session is scored from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawMetrics {
    /// Quiz completion time in minutes.
    pub tq_minutes: f64,
    /// Quiz success rate, percent.
    pub sq_percent: f64,
    /// Share of gaze samples on target, percent.
    pub gf_percent: f64,
    /// Share of expression frames labelled positive, percent.
    pub pe_percent: f64,
    /// Share of expression frames labelled frustrated, percent.
    pub fr_percent: f64,
    /// Self-report rating on the 1..=5 Likert scale.
    pub rs_rating: f64,
    /// Student-initiated interactions.
    pub if_count: u32,
    /// Share of the session covered by tutor gestures, percent.
    pub ga_percent: f64,
    /// Share of tutor prompts that got a spoken reply, percent.
    pub vr_percent: f64,
}

impl RawMetrics {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.tq_minutes.is_finite() && self.tq_minutes > 0.0) {
            return Err(ModelError::Domain {
                field: "tq_minutes",
                value: self.tq_minutes,
                expected: "(0, inf)",
            });
        }
        for (field, value) in [
            ("sq_percent", self.sq_percent),
            ("gf_percent", self.gf_percent),
            ("pe_percent", self.pe_percent),
            ("fr_percent", self.fr_percent),
            ("ga_percent", self.ga_percent),
            ("vr_percent", self.vr_percent),
        ] {
            check_percent(field, value)?;
        }
        if self.pe_percent + self.fr_percent > 100.0 + 1e-9 {
            return Err(ModelError::Domain {
                field: "pe_percent + fr_percent",
                value: self.pe_percent + self.fr_percent,
                expected: "[0, 100]",
            });
        }
        check_rating(self.rs_rating)
    }
}

fn check_percent(field: &'static str, value: f64) -> Result<(), ModelError> {
    if (0.0..=100.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::Domain {
            field,
            value,
            expected: "[0, 100]",
        })
    }
}

fn check_rating(value: f64) -> Result<(), ModelError> {
    if (1.0..=5.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::Domain {
            field: "rs_rating",
            value,
            expected: "[1, 5]",
        })
    }
}

/// How the quiz-time term is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeBounds {
    /// Use the fastest and slowest completion time among the sessions scored together.
    CohortRange,
    Fixed {
        t_min_minutes: f64,
        t_max_minutes: f64,
    },
}

/// Coefficients and normalisation bounds for scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub lambda: [f64; 3],
    pub gamma: [f64; 2],
    pub beta: [f64; 3],
    pub w: [f64; 3],
    pub time_bounds: TimeBounds,
    pub i_max: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        let third = 1.0 / 3.0;
        Self {
            lambda: [third; 3],
            gamma: [0.5, 0.5],
            beta: [third; 3],
            w: [third; 3],
            time_bounds: TimeBounds::CohortRange,
            i_max: 12.0,
        }
    }
}

impl WeightConfig {
    pub fn with_time_bounds(mut self, t_min_minutes: f64, t_max_minutes: f64) -> Self {
        self.time_bounds = TimeBounds::Fixed {
            t_min_minutes,
            t_max_minutes,
        };
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_group("lambda", &self.lambda)?;
        check_group("gamma", &self.gamma)?;
        check_group("beta", &self.beta)?;
        check_group("w", &self.w)?;
        if let TimeBounds::Fixed {
            t_min_minutes,
            t_max_minutes,
        } = self.time_bounds
        {
            if !(t_min_minutes.is_finite() && t_max_minutes.is_finite()) || t_min_minutes > t_max_minutes {
                return Err(ModelError::Config(format!(
                    "time bounds must satisfy t_min <= t_max, got [{t_min_minutes}, {t_max_minutes}]"
                )));
            }
        }
        if !(self.i_max >= 1.0 && self.i_max.is_finite()) {
            return Err(ModelError::Config(format!("i_max must be >= 1, got {}", self.i_max)));
        }
        Ok(())
    }

    /// Fixed time bounds, or an error when the config defers to the cohort range.
    pub fn fixed_time_bounds(&self) -> Result<(f64, f64), ModelError> {
        match self.time_bounds {
            TimeBounds::Fixed {
                t_min_minutes,
                t_max_minutes,
            } => Ok((t_min_minutes, t_max_minutes)),
            TimeBounds::CohortRange => Err(ModelError::Config(
                "time bounds are cohort-relative; resolve them before scoring a single session".into(),
            )),
        }
    }
}

fn check_group(name: &str, coefficients: &[f64]) -> Result<(), ModelError> {
    if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(ModelError::Config(format!(
            "{name} coefficients must be finite and nonnegative, got {coefficients:?}"
        )));
    }
    let sum: f64 = coefficients.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ModelError::Config(format!(
            "{name} coefficients must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementVector {
    pub e_cog: f64,
    pub e_emo: f64,
    pub e_beh: f64,
    pub e_final: f64,
}

impl EngagementVector {
    pub fn component(&self, component: Component) -> f64 {
        match component {
            Component::Cognitive => self.e_cog,
            Component::Emotional => self.e_emo,
            Component::Behavioral => self.e_beh,
            Component::Final => self.e_final,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Cognitive,
    Emotional,
    Behavioral,
    Final,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::Cognitive,
        Component::Emotional,
        Component::Behavioral,
        Component::Final,
    ];
    pub const PARTS: [Component; 3] = [Component::Cognitive, Component::Emotional, Component::Behavioral];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Cognitive => "cognitive",
            Component::Emotional => "emotional",
            Component::Behavioral => "behavioral",
            Component::Final => "final",
        }
    }
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Inverted, bounded quiz-time term. Equal bounds carry no ranking information
/// and map to the midpoint.
pub fn time_term(tq_minutes: f64, t_min: f64, t_max: f64) -> f64 {
    if t_max == t_min {
        0.5
    } else {
        clamp01(1.0 - (tq_minutes - t_min) / (t_max - t_min))
    }
}

pub fn cognitive_score(raw: &RawMetrics, cfg: &WeightConfig) -> Result<f64, ModelError> {
    cfg.validate()?;
    raw.validate()?;
    let (t_min, t_max) = cfg.fixed_time_bounds()?;
    let [l1, l2, l3] = cfg.lambda;
    let score = l1 * time_term(raw.tq_minutes, t_min, t_max)
        + l2 * clamp01(raw.sq_percent / 100.0)
        + l3 * clamp01(raw.gf_percent / 100.0);
    Ok(clamp01(score))
}

/// Net valence of positive against frustrated expression shares.
pub fn emotional_valence(pe_percent: f64, fr_percent: f64) -> Result<f64, ModelError> {
    check_percent("pe_percent", pe_percent)?;
    check_percent("fr_percent", fr_percent)?;
    Ok((pe_percent - fr_percent + 100.0) / 200.0)
}

pub fn emotional_score(raw: &RawMetrics, cfg: &WeightConfig) -> Result<f64, ModelError> {
    cfg.validate()?;
    raw.validate()?;
    let valence = emotional_valence(raw.pe_percent, raw.fr_percent)?;
    let [g1, g2] = cfg.gamma;
    Ok(clamp01(g1 * valence + g2 * clamp01((raw.rs_rating - 1.0) / 4.0)))
}

pub fn behavioral_score(raw: &RawMetrics, cfg: &WeightConfig) -> Result<f64, ModelError> {
    cfg.validate()?;
    raw.validate()?;
    let [b1, b2, b3] = cfg.beta;
    let interaction = (f64::from(raw.if_count) / cfg.i_max).min(1.0);
    let score = b1 * interaction + b2 * clamp01(raw.ga_percent / 100.0) + b3 * clamp01(raw.vr_percent / 100.0);
    Ok(clamp01(score))
}

pub fn fuse_final(e_cog: f64, e_emo: f64, e_beh: f64, w: &[f64; 3]) -> Result<f64, ModelError> {
    check_group("w", w)?;
    for (field, value) in [("e_cog", e_cog), ("e_emo", e_emo), ("e_beh", e_beh)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::Domain {
                field,
                value,
                expected: "[0, 1]",
            });
        }
    }
    Ok(clamp01(w[0] * e_cog + w[1] * e_emo + w[2] * e_beh))
}

pub fn compose_vector(raw: &RawMetrics, cfg: &WeightConfig) -> Result<EngagementVector, ModelError> {
    let e_cog = cognitive_score(raw, cfg)?;
    let e_emo = emotional_score(raw, cfg)?;
    let e_beh = behavioral_score(raw, cfg)?;
    let e_final = fuse_final(e_cog, e_emo, e_beh, &cfg.w)?;
    Ok(EngagementVector {
        e_cog,
        e_emo,
        e_beh,
        e_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> WeightConfig {
        WeightConfig::default().with_time_bounds(6.3, 8.3)
    }

    fn raw() -> RawMetrics {
        RawMetrics {
            tq_minutes: 7.5,
            sq_percent: 66.0,
            gf_percent: 70.0,
            pe_percent: 60.0,
            fr_percent: 20.0,
            rs_rating: 5.0,
            if_count: 8,
            ga_percent: 40.0,
            vr_percent: 90.0,
        }
    }

    #[test]
    fn cognitive_examples() {
        let mut r = raw();
        r.tq_minutes = 6.3;
        r.sq_percent = 100.0;
        r.gf_percent = 100.0;
        assert_eq!(cognitive_score(&r, &cfg()).unwrap(), 1.0);
        r.tq_minutes = 8.3;
        r.sq_percent = 0.0;
        r.gf_percent = 0.0;
        assert_eq!(cognitive_score(&r, &cfg()).unwrap(), 0.0);
        let v = cognitive_score(&raw(), &cfg()).unwrap();
        assert!((v - 0.586_666_666_666_7).abs() < 1e-9, "{v}");
    }

    #[test]
    fn degenerate_time_bounds_use_midpoint() {
        let c = WeightConfig::default().with_time_bounds(7.0, 7.0);
        assert_eq!(time_term(3.0, 7.0, 7.0), 0.5);
        let mut r = raw();
        r.sq_percent = 0.0;
        r.gf_percent = 0.0;
        assert!((cognitive_score(&r, &c).unwrap() - 0.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_time_is_clamped() {
        let mut r = raw();
        r.tq_minutes = 20.0;
        r.sq_percent = 0.0;
        r.gf_percent = 0.0;
        assert_eq!(cognitive_score(&r, &cfg()).unwrap(), 0.0);
        r.tq_minutes = 1.0;
        assert!((cognitive_score(&r, &cfg()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn valence_examples() {
        assert_eq!(emotional_valence(37.0, 37.0).unwrap(), 0.5);
        assert_eq!(emotional_valence(100.0, 0.0).unwrap(), 1.0);
        assert!((emotional_valence(60.0, 20.0).unwrap() - 0.7).abs() < 1e-12);
        assert!(matches!(emotional_valence(101.0, 0.0), Err(ModelError::Domain { .. })));
    }

    #[test]
    fn emotional_examples() {
        let mut r = raw();
        r.pe_percent = 100.0;
        r.fr_percent = 0.0;
        assert_eq!(emotional_score(&r, &cfg()).unwrap(), 1.0);
        r.pe_percent = 0.0;
        r.rs_rating = 1.0;
        assert!((emotional_score(&r, &cfg()).unwrap() - 0.25).abs() < 1e-12);
        assert!((emotional_score(&raw(), &cfg()).unwrap() - 0.85).abs() < 1e-12);
        r.rs_rating = 5.5;
        assert!(matches!(
            emotional_score(&r, &cfg()),
            Err(ModelError::Domain { field: "rs_rating", .. })
        ));
    }

    #[test]
    fn behavioral_examples() {
        let mut r = raw();
        r.if_count = 0;
        r.ga_percent = 0.0;
        r.vr_percent = 0.0;
        assert_eq!(behavioral_score(&r, &cfg()).unwrap(), 0.0);
        r.if_count = 12;
        r.ga_percent = 100.0;
        r.vr_percent = 100.0;
        assert!((behavioral_score(&r, &cfg()).unwrap() - 1.0).abs() < 1e-12);
        r.if_count = 30;
        assert!((behavioral_score(&r, &cfg()).unwrap() - 1.0).abs() < 1e-12);
        assert!((behavioral_score(&raw(), &cfg()).unwrap() - 0.655_555_555_555_6).abs() < 1e-9);
    }

    #[test]
    fn i_max_below_one_is_config_error() {
        let mut c = cfg();
        c.i_max = 0.5;
        assert!(matches!(behavioral_score(&raw(), &c), Err(ModelError::Config(_))));
    }

    #[test]
    fn compose_examples() {
        let v = compose_vector(&raw(), &cfg()).unwrap();
        assert!((v.e_cog - 0.586_666_666_666_7).abs() < 1e-9);
        assert!((v.e_emo - 0.85).abs() < 1e-9);
        assert!((v.e_beh - 0.655_555_555_555_6).abs() < 1e-9);
        assert!((v.e_final - 0.697_407_407_407_4).abs() < 1e-9);

        let minimal = RawMetrics {
            tq_minutes: 8.3,
            sq_percent: 0.0,
            gf_percent: 0.0,
            pe_percent: 0.0,
            fr_percent: 100.0,
            rs_rating: 1.0,
            if_count: 0,
            ga_percent: 0.0,
            vr_percent: 0.0,
        };
        let v = compose_vector(&minimal, &cfg()).unwrap();
        assert_eq!((v.e_cog, v.e_emo, v.e_beh, v.e_final), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn fuse_examples() {
        let third = 1.0 / 3.0;
        assert!((fuse_final(0.5, 0.5, 0.5, &[third; 3]).unwrap() - 0.5).abs() < 1e-12);
        assert!((fuse_final(1.0, 0.0, 0.0, &[third; 3]).unwrap() - third).abs() < 1e-12);
        assert_eq!(fuse_final(0.42, 0.9, 0.1, &[1.0, 0.0, 0.0]).unwrap(), 0.42);
        assert!(matches!(
            fuse_final(0.5, 0.5, 0.5, &[0.5, 0.5, 0.5]),
            Err(ModelError::Config(_))
        ));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut c = cfg();
        c.lambda = [0.5, 0.5, 0.5];
        assert!(matches!(cognitive_score(&raw(), &c), Err(ModelError::Config(_))));
        let mut c = cfg();
        c.gamma = [0.7, 0.2];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.beta = [1.2, -0.1, -0.1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn cohort_range_needs_resolution() {
        let c = WeightConfig::default();
        assert!(matches!(cognitive_score(&raw(), &c), Err(ModelError::Config(_))));
    }
}
