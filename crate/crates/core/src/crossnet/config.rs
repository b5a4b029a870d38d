//! Model configuration and the fixed variant registry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::FinalActivation;

/// Which weight matrices the graphs share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    Separated,
    ShareW2,
    ShareW1W2,
}

/// Feature-space transforms in front of a shared first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    None,
    /// Transform graph A's features into graph B's feature space.
    AToB,
    /// Transform graph B's features into graph A's feature space.
    BToA,
    /// Transform both graphs into a shared space of dimension `m_hat`.
    Both,
}

/// How alignment information enters the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    None,
    Hard,
    Soft,
    Reconstruction,
}

impl AlignMode {
    /// Whether the mode carries a learned transform matrix.
    pub fn needs_r(self) -> bool {
        matches!(self, AlignMode::Soft | AlignMode::Reconstruction)
    }
}

/// Joint optimization or two sequential phases sharing warm parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Joint,
    PretrainAThenB,
    PretrainBThenA,
}

/// Which rows the hard (and soft) representation penalty covers.
///
/// The full-matrix form also pulls rows without any aligned partner toward
/// zero; restricting to rows with at least one partner matches the intent
/// that aligned nodes agree, so it is the default. The full form stays
/// available behind this flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegScope {
    #[default]
    AlignedRowsOnly,
    AllRows,
}

/// Declarative description of one cross-network model plus its
/// hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub sharing: Sharing,
    pub q_mode: QMode,
    pub align_mode: AlignMode,
    pub strategy: Strategy,
    /// Per-graph task weights, summing to 1.
    pub alpha: Vec<f64>,
    /// Alignment-task weight in `[0, 1]`.
    pub beta: f64,
    /// Representation dimension per graph.
    pub dims: Vec<usize>,
    /// Shared input dimension for `QMode::Both`; defaults to the smallest
    /// feature count and may only be overridden downward.
    pub m_hat: Option<usize>,
    pub final_activation: FinalActivation,
    pub reg_scope: RegScope,
}

impl ModelConfig {
    /// Baseline two-graph configuration: separated GCNs, no alignment.
    pub fn separated(d: usize) -> Self {
        ModelConfig {
            sharing: Sharing::Separated,
            q_mode: QMode::None,
            align_mode: AlignMode::None,
            strategy: Strategy::Joint,
            alpha: vec![0.5, 0.5],
            beta: 0.0,
            dims: vec![d, d],
            m_hat: None,
            final_activation: FinalActivation::default(),
            reg_scope: RegScope::default(),
        }
    }

    pub fn graph_count(&self) -> usize {
        self.alpha.len()
    }

    /// The dimension the shared first layer sees, given per-graph feature
    /// counts. `None` when no first-layer sharing is configured.
    pub fn shared_input_dim(&self, feature_dims: &[usize]) -> Option<usize> {
        if self.sharing != Sharing::ShareW1W2 {
            return None;
        }
        Some(match self.q_mode {
            QMode::None => feature_dims[0],
            QMode::AToB => feature_dims[1],
            QMode::BToA => feature_dims[0],
            QMode::Both => self
                .m_hat
                .unwrap_or_else(|| feature_dims.iter().copied().min().unwrap()),
        })
    }

    pub fn validate(&self, feature_dims: &[usize]) -> Result<()> {
        let k = self.graph_count();
        if k < 2 {
            return Err(Error::Config("need at least two graphs".into()));
        }
        if feature_dims.len() != k || self.dims.len() != k {
            return Err(Error::Config(format!(
                "alpha ({}), dims ({}), and graphs ({}) must agree",
                k,
                self.dims.len(),
                feature_dims.len()
            )));
        }
        for &a in &self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("alpha weight {} outside [0, 1]", a)));
            }
        }
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("alpha weights sum to {}, not 1", sum)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta {} outside [0, 1]", self.beta)));
        }
        if self.dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("dims must be >= 1".into()));
        }
        let dims_equal = self.dims.windows(2).all(|w| w[0] == w[1]);
        if self.align_mode == AlignMode::Hard && !dims_equal {
            return Err(Error::Config(
                "hard regularization requires equal representation dims".into(),
            ));
        }
        if matches!(self.sharing, Sharing::ShareW2 | Sharing::ShareW1W2) && !dims_equal {
            return Err(Error::Config(
                "sharing the second layer requires equal representation dims".into(),
            ));
        }
        match self.q_mode {
            QMode::None => {
                if self.sharing == Sharing::ShareW1W2
                    && !feature_dims.windows(2).all(|w| w[0] == w[1])
                {
                    return Err(Error::Config(
                        "sharing both layers without feature transforms requires equal feature counts"
                            .into(),
                    ));
                }
            }
            QMode::AToB | QMode::BToA => {
                if self.sharing != Sharing::ShareW1W2 {
                    return Err(Error::Config(
                        "one-sided feature transforms only apply when both layers are shared"
                            .into(),
                    ));
                }
                if k != 2 {
                    return Err(Error::Config(
                        "one-sided feature transforms are a two-graph alternative".into(),
                    ));
                }
            }
            QMode::Both => {
                if self.sharing != Sharing::ShareW1W2 {
                    return Err(Error::Config(
                        "feature transforms only apply when both layers are shared".into(),
                    ));
                }
                let min_m = feature_dims.iter().copied().min().unwrap();
                if let Some(mh) = self.m_hat {
                    if mh == 0 || mh > min_m {
                        return Err(Error::Config(format!(
                            "m_hat {} must be in 1..={}",
                            mh, min_m
                        )));
                    }
                }
            }
        }
        if self.strategy != Strategy::Joint && k != 2 {
            return Err(Error::Config("pre-training is defined for two graphs".into()));
        }
        Ok(())
    }
}

/// The thirteen cross-network variants plus the separated baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantId {
    Separated,
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
    M10,
    M11,
    M12,
    M13,
}

impl VariantId {
    pub fn all() -> [VariantId; 14] {
        use VariantId::*;
        [Separated, M1, M2, M3, M4, M5, M6, M7, M8, M9, M10, M11, M12, M13]
    }

    /// Fixed registry mapping variants onto configurations.
    pub fn config(self, d: usize, m_hat: Option<usize>) -> ModelConfig {
        use AlignMode as A;
        use QMode as Q;
        use Sharing as S;
        use Strategy as T;
        let (sharing, q_mode, align_mode, strategy) = match self {
            VariantId::Separated => (S::Separated, Q::None, A::None, T::Joint),
            VariantId::M1 => (S::Separated, Q::None, A::Soft, T::Joint),
            VariantId::M2 => (S::Separated, Q::None, A::Reconstruction, T::Joint),
            VariantId::M3 => (S::ShareW2, Q::None, A::None, T::PretrainAThenB),
            VariantId::M4 => (S::ShareW2, Q::None, A::None, T::PretrainBThenA),
            VariantId::M5 => (S::ShareW2, Q::None, A::None, T::Joint),
            VariantId::M6 => (S::ShareW2, Q::None, A::Hard, T::Joint),
            VariantId::M7 => (S::ShareW2, Q::None, A::Soft, T::Joint),
            VariantId::M8 => (S::ShareW2, Q::None, A::Reconstruction, T::Joint),
            VariantId::M9 => (S::ShareW1W2, Q::AToB, A::None, T::Joint),
            VariantId::M10 => (S::ShareW1W2, Q::BToA, A::None, T::Joint),
            VariantId::M11 => (S::ShareW1W2, Q::Both, A::None, T::Joint),
            VariantId::M12 => (S::ShareW1W2, Q::Both, A::Soft, T::Joint),
            VariantId::M13 => (S::ShareW1W2, Q::Both, A::Reconstruction, T::Joint),
        };
        let beta = if align_mode == AlignMode::None { 0.0 } else { 0.5 };
        ModelConfig {
            sharing,
            q_mode,
            align_mode,
            strategy,
            alpha: vec![0.5, 0.5],
            beta,
            dims: vec![d, d],
            m_hat,
            final_activation: FinalActivation::default(),
            reg_scope: RegScope::default(),
        }
    }

    /// Variants supported by the relational pipeline.
    pub fn relational_set() -> [VariantId; 7] {
        use VariantId::*;
        [Separated, M1, M2, M5, M11, M12, M13]
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantId::Separated => write!(f, "separated"),
            other => write!(f, "m{}", *other as usize),
        }
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "separated" {
            return Ok(VariantId::Separated);
        }
        let all = VariantId::all();
        for v in all.iter().skip(1) {
            if lower == v.to_string() {
                return Ok(*v);
            }
        }
        Err(Error::Config(format!(
            "unknown model '{}' (expected separated or m1..m13)",
            s
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_published_table() {
        use VariantId::*;
        let cases: &[(VariantId, Sharing, QMode, AlignMode, Strategy)] = &[
            (Separated, Sharing::Separated, QMode::None, AlignMode::None, Strategy::Joint),
            (M1, Sharing::Separated, QMode::None, AlignMode::Soft, Strategy::Joint),
            (M2, Sharing::Separated, QMode::None, AlignMode::Reconstruction, Strategy::Joint),
            (M3, Sharing::ShareW2, QMode::None, AlignMode::None, Strategy::PretrainAThenB),
            (M4, Sharing::ShareW2, QMode::None, AlignMode::None, Strategy::PretrainBThenA),
            (M5, Sharing::ShareW2, QMode::None, AlignMode::None, Strategy::Joint),
            (M6, Sharing::ShareW2, QMode::None, AlignMode::Hard, Strategy::Joint),
            (M7, Sharing::ShareW2, QMode::None, AlignMode::Soft, Strategy::Joint),
            (M8, Sharing::ShareW2, QMode::None, AlignMode::Reconstruction, Strategy::Joint),
            (M9, Sharing::ShareW1W2, QMode::AToB, AlignMode::None, Strategy::Joint),
            (M10, Sharing::ShareW1W2, QMode::BToA, AlignMode::None, Strategy::Joint),
            (M11, Sharing::ShareW1W2, QMode::Both, AlignMode::None, Strategy::Joint),
            (M12, Sharing::ShareW1W2, QMode::Both, AlignMode::Soft, Strategy::Joint),
            (M13, Sharing::ShareW1W2, QMode::Both, AlignMode::Reconstruction, Strategy::Joint),
        ];
        for &(variant, sharing, q, align, strat) in cases {
            let c = variant.config(8, None);
            assert_eq!(c.sharing, sharing, "{variant}");
            assert_eq!(c.q_mode, q, "{variant}");
            assert_eq!(c.align_mode, align, "{variant}");
            assert_eq!(c.strategy, strat, "{variant}");
            c.validate(&[10, 12]).unwrap();
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in VariantId::all() {
            let s = v.to_string();
            assert_eq!(s.parse::<VariantId>().unwrap(), v);
        }
        assert!("m14".parse::<VariantId>().is_err());
    }

    #[test]
    fn hard_requires_equal_dims() {
        let mut c = VariantId::M6.config(4, None);
        c.dims = vec![4, 5];
        assert!(matches!(c.validate(&[6, 6]), Err(Error::Config(_))));
    }

    #[test]
    fn share_w1w2_without_q_needs_equal_feature_counts() {
        let mut c = VariantId::M11.config(4, None);
        c.q_mode = QMode::None;
        assert!(c.validate(&[6, 7]).is_err());
        assert!(c.validate(&[6, 6]).is_ok());
    }

    #[test]
    fn alpha_must_be_convex_weights() {
        let mut c = ModelConfig::separated(4);
        c.alpha = vec![0.8, 0.8];
        assert!(c.validate(&[5, 5]).is_err());
        c.alpha = vec![1.2, -0.2];
        assert!(c.validate(&[5, 5]).is_err());
    }

    #[test]
    fn m_hat_cannot_exceed_min_feature_count() {
        let mut c = VariantId::M11.config(4, Some(9));
        assert!(c.validate(&[8, 12]).is_err());
        c.m_hat = Some(8);
        assert!(c.validate(&[8, 12]).is_ok());
        assert_eq!(c.shared_input_dim(&[8, 12]), Some(8));
        c.m_hat = None;
        assert_eq!(c.shared_input_dim(&[8, 12]), Some(8));
    }
}
