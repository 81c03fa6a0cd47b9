//! Feature manifest and index configuration shipped with the crate.

use crate::model::{FeatureSpec, IndexConfig};

pub const FEATURES_JSON: &str = include_str!("../data/features.json");
pub const INDEX_CONFIG_JSON: &str = include_str!("../data/index_config.json");

pub fn bundled_features() -> Vec<FeatureSpec> {
    serde_json::from_str(FEATURES_JSON).expect("bundled feature manifest parses")
}

pub fn bundled_config() -> IndexConfig {
    serde_json::from_str(INDEX_CONFIG_JSON).expect("bundled index config parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureKind;

    #[test]
    fn manifest_is_consistent_with_config() {
        let specs = bundled_features();
        let cfg = bundled_config();
        cfg.validate(&specs).unwrap();
        let continuous = specs.iter().filter(|s| s.kind == FeatureKind::Continuous).count();
        assert_eq!(continuous, 24);
        // Every index feature is ranked.
        for s in specs.iter().filter(|s| s.in_index) {
            assert!(cfg.group_rank_tables.get(s.group).contains(&s.feature_id), "{}", s.feature_id);
        }
    }
}
