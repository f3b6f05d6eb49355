use std::fmt;
use std::str::FromStr;

use super::{
    BinStrategy, MaskMode, ProtectionPlan, TargetSet, TransformError, TransformStep, DEFAULT_K,
    DEFAULT_L, DEFAULT_N_BINS, DEFAULT_SIGMA_REL,
};

/// Named hybrid protection plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    BinMask,
    KL,
    Ra,
    Rm,
    RaKBinMask,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::BinMask,
        Preset::KL,
        Preset::Ra,
        Preset::Rm,
        Preset::RaKBinMask,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::BinMask => "BIN_MASK",
            Preset::KL => "K_L",
            Preset::Ra => "RA",
            Preset::Rm => "RM",
            Preset::RaKBinMask => "RA_K_BIN_MASK",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TransformError::UnknownPreset(s.to_string()))
    }
}

/// Which fixture's attribute choices a preset is wired to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Heart,
    Diabetes,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Heart => "heart",
            Family::Diabetes => "diabetes",
        })
    }
}

impl FromStr for Family {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "heart" => Ok(Family::Heart),
            "diabetes" => Ok(Family::Diabetes),
            _ => Err(TransformError::UnknownFamily(s.to_string())),
        }
    }
}

struct Wiring {
    /// (binned, masked) for BIN_MASK
    bin_mask: (&'static str, &'static str),
    /// (k-anonymized, l-diverse sensitive)
    k_l: (&'static str, &'static str),
    /// (binned, masked) after RA and k
    hybrid: (&'static str, &'static str),
}

fn wiring(family: Family) -> Wiring {
    match family {
        Family::Heart => Wiring {
            bin_mask: ("age", "thalach"),
            k_l: ("age", "cp"),
            hybrid: ("cp", "ca"),
        },
        Family::Diabetes => Wiring {
            bin_mask: ("Glucose", "Age"),
            k_l: ("Age", "BMI"),
            hybrid: ("BMI", "Glucose"),
        },
    }
}

/// The plan a preset stands for on a dataset family, with default parameters.
pub fn preset_plan(preset: Preset, family: Family, seed: u64) -> ProtectionPlan {
    let w = wiring(family);
    let bin = |t: &str| TransformStep::Bin {
        n_bins: DEFAULT_N_BINS,
        strategy: BinStrategy::EqualWidth,
        targets: TargetSet::named([t]),
    };
    let mask = |t: &str| TransformStep::Mask {
        mode: MaskMode::Full,
        targets: vec![t.to_string()],
    };
    let k = |q: &str| TransformStep::KAnonymize {
        k: DEFAULT_K,
        qids: vec![q.to_string()],
    };
    let ra = TransformStep::RandAdditive {
        sigma_rel: DEFAULT_SIGMA_REL,
        targets: TargetSet::AllNumeric,
    };
    let steps = match preset {
        Preset::BinMask => vec![bin(w.bin_mask.0), mask(w.bin_mask.1)],
        Preset::KL => vec![
            k(w.k_l.0),
            TransformStep::LDiversify {
                l: DEFAULT_L,
                sensitive: w.k_l.1.to_string(),
                qids: vec![w.k_l.0.to_string()],
            },
        ],
        Preset::Ra => vec![ra],
        Preset::Rm => vec![TransformStep::RandMultiplicative {
            sigma_rel: DEFAULT_SIGMA_REL,
            targets: TargetSet::AllNumeric,
        }],
        Preset::RaKBinMask => vec![ra, k(w.k_l.0), bin(w.hybrid.0), mask(w.hybrid.1)],
    };
    ProtectionPlan::new(preset.as_str(), seed, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert_eq!("k_l".parse::<Preset>().unwrap(), Preset::KL);
        assert!("KLM".parse::<Preset>().is_err());
        assert_eq!("Heart".parse::<Family>().unwrap(), Family::Heart);
        assert!("liver".parse::<Family>().is_err());
    }

    #[test]
    fn heart_bin_mask() {
        let plan = preset_plan(Preset::BinMask, Family::Heart, 1);
        let ops: Vec<&str> = plan.steps.iter().map(TransformStep::op).collect();
        assert_eq!(ops, ["bin", "mask"]);
        assert!(
            matches!(&plan.steps[0], TransformStep::Bin { targets, .. } if *targets == TargetSet::named(["age"]))
        );
        assert!(
            matches!(&plan.steps[1], TransformStep::Mask { targets, .. } if targets == &["thalach"])
        );
    }

    #[test]
    fn diabetes_k_l() {
        let plan = preset_plan(Preset::KL, Family::Diabetes, 1);
        assert_eq!(
            plan.steps,
            vec![
                TransformStep::KAnonymize {
                    k: 5,
                    qids: vec!["Age".into()]
                },
                TransformStep::LDiversify {
                    l: 2,
                    sensitive: "BMI".into(),
                    qids: vec!["Age".into()]
                },
            ]
        );
    }

    #[test]
    fn hybrid_order() {
        let plan = preset_plan(Preset::RaKBinMask, Family::Heart, 9);
        let ops: Vec<&str> = plan.steps.iter().map(TransformStep::op).collect();
        assert_eq!(ops, ["ra", "k", "bin", "mask"]);
        assert_eq!(plan.seed, 9);
        assert_eq!(plan.name, "RA_K_BIN_MASK");
    }
}
