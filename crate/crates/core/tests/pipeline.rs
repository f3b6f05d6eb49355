use std::path::Path;

use medpriv_core::risk::{attribute_risk_scores, EstimatorConfig, RiskScope};
use medpriv_core::transforms::{apply_plan, preset_plan, Family, Preset};
use medpriv_core::utility::{utility_report, ClassifierSpec, SplitConfig, Variant};
use medpriv_core::{load_csv, Dataset, Execution, RoleMap};
use proptest::prelude::*;

fn fixture(family: &str) -> Dataset {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let roles: RoleMap = serde_json::from_str(
        &std::fs::read_to_string(dir.join(format!("{family}_roles.json"))).unwrap(),
    )
    .unwrap();
    load_csv(dir.join(format!("{family}.csv")), &roles, None).unwrap()
}

#[test]
fn fixtures_have_expected_shape() {
    let heart = fixture("heart");
    assert_eq!((heart.n_rows(), heart.schema().len()), (303, 14));
    assert_eq!(heart.labels().iter().filter(|&&y| y == 1).count(), 83);
    let diabetes = fixture("diabetes");
    assert_eq!((diabetes.n_rows(), diabetes.schema().len()), (768, 9));
}

#[test]
fn every_preset_conserves_rows_and_names() {
    for (name, family) in [("heart", Family::Heart), ("diabetes", Family::Diabetes)] {
        let raw = fixture(name);
        for preset in Preset::ALL {
            let (out, log) = apply_plan(&raw, &preset_plan(preset, family, 42)).unwrap();
            assert_eq!(out.n_rows() + log.len(), raw.n_rows(), "{name} {preset}");
            assert_eq!(out.schema().names(), raw.schema().names());
            assert_eq!(
                log.retained_rows(raw.n_rows()).len(),
                out.n_rows(),
                "{name} {preset}"
            );
        }
    }
}

#[test]
fn execution_modes_agree_end_to_end() {
    let raw = fixture("heart");
    let variants: Vec<Variant> = [Preset::BinMask, Preset::RaKBinMask]
        .into_iter()
        .map(|p| {
            let (data, log) = apply_plan(&raw, &preset_plan(p, Family::Heart, 3)).unwrap();
            Variant {
                name: p.to_string(),
                origin: log.retained_rows(raw.n_rows()),
                data,
            }
        })
        .collect();
    let run = |exec| {
        let risk: Vec<_> = variants
            .iter()
            .map(|v| {
                attribute_risk_scores(&v.data, EstimatorConfig::Knn { k: 3 }, RiskScope::All, exec)
                    .unwrap()
            })
            .collect();
        let utility = utility_report(
            &raw,
            &variants,
            &ClassifierSpec::defaults(),
            SplitConfig::default(),
            exec,
        )
        .unwrap();
        (
            serde_json::to_string(&risk).unwrap(),
            serde_json::to_string(&utility).unwrap(),
        )
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn raw_variant_has_zero_deltas() {
    let raw = fixture("diabetes");
    let report = utility_report(
        &raw,
        &[Variant::whole("copy", raw.clone())],
        &ClassifierSpec::defaults(),
        SplitConfig::default(),
        Execution::default(),
    )
    .unwrap();
    for row in report.rows.iter().filter(|r| r.variant == "copy") {
        let d = row.delta.unwrap();
        assert_eq!(
            (d.accuracy, d.precision, d.recall, d.f1),
            (0.0, 0.0, 0.0, 0.0)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plans_are_deterministic_per_seed(seed in any::<u64>(), idx in 0usize..5) {
        let raw = fixture("heart");
        let plan = preset_plan(Preset::ALL[idx], Family::Heart, seed);
        let a = apply_plan(&raw, &plan).unwrap();
        let b = apply_plan(&raw, &plan).unwrap();
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(a.1, b.1);
    }

    #[test]
    fn masking_any_attribute_zeroes_its_score(idx in 0usize..13) {
        let raw = fixture("heart");
        let name = raw.schema().names()[idx].to_string();
        prop_assume!(name != raw.target_name());
        let plan: medpriv_core::ProtectionPlan = serde_json::from_str(&format!(
            r#"{{"name":"m","seed":0,"steps":[{{"op":"mask","targets":["{name}"]}}]}}"#
        )).unwrap();
        let (out, _) = apply_plan(&raw, &plan).unwrap();
        let report = attribute_risk_scores(&out, EstimatorConfig::default(), RiskScope::All, Execution::Sequential).unwrap();
        prop_assert_eq!(report.score(&name).unwrap().mi_nats, 0.0);
    }
}
